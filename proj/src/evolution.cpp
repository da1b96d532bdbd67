#include "nck/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "nck/parallel.hpp"

namespace nck {

void SolverConfig::finalize() {
  if (n < 1) throw std::invalid_argument("n: must be >= 1");
  if (dx == 0.0) dx = 1.0 / (4.0 * n);
  if (!(dx > 0)) throw std::invalid_argument("grid.dx: must be > 0");
  if (x_max == 0.0) x_max = 2.0 * (n + 1.0);
  if (x_max < 2.0 * (n + 1.0) * (1 - 1e-12))
    throw std::invalid_argument("grid.x_max: must cover 2(n+1) so that no collision product leaves the lattice");
  if (!(dtau > 0)) throw std::invalid_argument("dtau: must be > 0");
  if (!(tau_end > 0)) throw std::invalid_argument("tau_end: must be > 0");
  if (!(t_max > 0)) throw std::invalid_argument("t_max: must be > 0");
  if (xc == 0.0) xc = 1.0 / n;
  if (xc < dx) throw std::invalid_argument("xc: must be at least one grid cell");
  if (!(record_every > 0)) throw std::invalid_argument("record_every: must be > 0");
  if (!(local_tol > 0)) throw std::invalid_argument("local_tol: must be > 0");
  if (!(conservation_tol > 0)) throw std::invalid_argument("conservation_tol: must be > 0");
  if (mollify_n < 1) throw std::invalid_argument("mollify: must be >= 1");
  if (dtau_max <= 0) dtau_max = dtau;
  for (double a : alphas)
    if (!(a >= 0)) throw std::invalid_argument("alphas: entries must be >= 0");
  for (double r : envelope_r)
    if (!(r > 0)) throw std::invalid_argument("envelope_r: entries must be > 0");
  for (const auto& [R, a] : flux)
    if (!(R > 0) || !(a > -0.5)) throw std::invalid_argument("flux: need R > 0 and alpha > -1/2");
}

std::size_t SolverConfig::nodes() const { return static_cast<std::size_t>(std::llround(x_max / dx)) + 1; }

double subtraction_rate(const DensityFn& h, const SolverConfig& cfg) {
  if (cfg.convention == HalfmomentConvention::regularized) return regularized_halfmoment(h, Cutoff(cfg.n));
  return h.moment_from(cfg.xc, 0.5);
}

SolverState initial_state(const RadialMeasure& h0, const SolverConfig& cfg) {
  SolverState s;
  const std::size_t nodes = cfg.nodes();
  const bool pure_density = h0.atom0() == 0.0 && h0.atoms().empty() && h0.has_density();
  if (pure_density) {
    s.h = DensityFn::from_measure(h0, cfg.dx, nodes);
  } else {
    const double top = cfg.dx * static_cast<double>(nodes - 1);
    const GridSpec fine = GridSpec::uniform(0.0, top, (nodes - 1) * 8);
    s.h = DensityFn::from_measure(mollify(h0, cfg.mollify_n, fine), cfg.dx, nodes);
  }
  if (!(s.h.moment(0.0) > 0) || !(s.h.moment(1.0) > 0))
    throw std::invalid_argument("initial_data: needs positive mass and energy on the lattice");
  s.m_proxy = s.h.mass_below(cfg.xc);
  s.dtau_next = cfg.dtau;
  return s;
}

namespace {

DensityFn exp_euler(const DensityFn& h, const Operators& op, double dt) {
  DensityFn out = h;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double a = op.A[i], g = op.K[i] + op.L[i];
    const double z = a * dt;
    const double f = z > 0 ? -std::expm1(-z) / a : dt;
    out[i] = h[i] * std::exp(-z) + g * f;
  }
  return out;
}

// Exponential midpoint: operators frozen at the exponential-Euler half-step predictor.
struct Midpoint {
  DensityFn h;
  double rate_mid = 0.0;
};

Midpoint midpoint_step(const DensityFn& h, const Operators& op0, double dt, const SolverConfig& cfg, const Cutoff& cut) {
  const DensityFn pred = exp_euler(h, op0, 0.5 * dt);
  Midpoint m;
  m.rate_mid = subtraction_rate(pred, cfg);
  m.h = exp_euler(h, apply_operators(pred, cut, cfg.threads), dt);
  return m;
}

double weighted_l1(const DensityFn& a, const DensityFn* b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.weight(i) * std::abs(a[i] - (b ? (*b)[i] : 0.0));
  return s;
}

bool all_finite(const DensityFn& h) {
  for (double v : h.values())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

SolverState step(const SolverState& state, const SolverConfig& cfg, double dtau_limit) {
  const Cutoff cut(cfg.n);
  const DensityFn& h = state.h;
  const Operators op0 = apply_operators(h, cut, cfg.threads);
  const double R0 = subtraction_rate(h, cfg);
  const double M1_0 = h.moment(1.0);
  const double base = cfg.adaptive ? std::min(state.dtau_next > 0 ? state.dtau_next : cfg.dtau, cfg.dtau_max)
                                   : cfg.dtau;
  double dt = std::min(base, dtau_limit);
  const bool limited = dtau_limit < base;
  int rejections = 0;
  for (;;) {
    DensityFn cand;
    double err = 0.0, A_inc = 0.0;
    if (cfg.adaptive) {
      const Midpoint coarse = midpoint_step(h, op0, dt, cfg, cut);
      const Midpoint first = midpoint_step(h, op0, 0.5 * dt, cfg, cut);
      if (!all_finite(first.h)) throw NonFiniteState("non-finite value at tau=" + std::to_string(state.tau), state);
      const double R1 = subtraction_rate(first.h, cfg);
      const Midpoint second = midpoint_step(first.h, apply_operators(first.h, cut, cfg.threads), 0.5 * dt, cfg, cut);
      cand = second.h;
      if (!all_finite(cand) || !all_finite(coarse.h))
        throw NonFiniteState("non-finite value at tau=" + std::to_string(state.tau), state);
      err = weighted_l1(cand, &coarse.h) / std::max(weighted_l1(cand, nullptr), 1e-300) / 3.0;
      // Simpson on each half step, with the predictor as the midpoint value.
      A_inc = dt / 12.0 * (R0 + 4.0 * first.rate_mid + 2.0 * R1 + 4.0 * second.rate_mid + subtraction_rate(cand, cfg));
    } else {
      const Midpoint m = midpoint_step(h, op0, dt, cfg, cut);
      cand = m.h;
      if (!all_finite(cand)) throw NonFiniteState("non-finite value at tau=" + std::to_string(state.tau), state);
      A_inc = dt / 6.0 * (R0 + 4.0 * m.rate_mid + subtraction_rate(cand, cfg));
    }
    const double drift = std::abs(cand.moment(1.0) - M1_0) / M1_0;
    const bool too_big = (cfg.adaptive && err > cfg.local_tol) || drift > cfg.conservation_tol;
    if (too_big && dt > cfg.dtau_min) {
      double shrink = 0.5;
      if (cfg.adaptive && err > cfg.local_tol) shrink = std::min(0.5, std::max(0.1, 0.9 * std::cbrt(cfg.local_tol / err)));
      dt = std::max(cfg.dtau_min, dt * shrink);
      ++rejections;
      continue;
    }
    SolverState next;
    next.tau = state.tau + dt;
    next.h = std::move(cand);
    next.accumulated_halfmoment = state.accumulated_halfmoment + A_inc;
    next.m_proxy = next.h.mass_below(cfg.xc);
    next.steps = state.steps + 1;
    next.rejected = state.rejected + static_cast<std::size_t>(rejections);
    if (cfg.adaptive) {
      const double grow = err > 0 ? std::clamp(0.9 * std::cbrt(cfg.local_tol / err), 0.2, 2.0) : 2.0;
      double proposal = std::min(cfg.dtau_max, dt * grow);
      if (limited && rejections == 0) proposal = std::max(proposal, state.dtau_next);
      next.dtau_next = proposal;
    } else {
      next.dtau_next = cfg.dtau;
    }
    next.ring = state.ring;
    next.ring.push_back({next.tau, dt, err, drift, rejections});
    while (next.ring.size() > cfg.ring_size) next.ring.pop_front();
    return next;
  }
}

Record make_record(const SolverState& s, const SolverConfig& cfg) {
  Record r;
  const DensityFn& h = s.h;
  r.tau = s.tau;
  r.M0_h = h.moment(0.0);
  r.M1_h = h.moment(1.0);
  for (double a : cfg.alphas) r.Ma_h.push_back(h.moment(a));
  r.m_proxy = s.m_proxy;
  r.A = s.accumulated_halfmoment;
  r.rate = subtraction_rate(h, cfg);
  r.M0_g = h.moment_from(cfg.xc, 0.0);
  r.M1_g = h.moment_from(cfg.xc, 1.0);
  r.Mhalf_g = h.moment_from(cfg.xc, 0.5);
  for (double a : cfg.alphas) r.Ma_g.push_back(h.moment_from(cfg.xc, a));
  for (double rr : cfg.envelope_r) {
    double m = 0.0;
    for (std::size_t i = 0; i < h.size() && h.x(i) <= rr * (1 + 1e-12); ++i) m += h.weight(i) * h[i];
    r.cum.push_back(m);
  }
  for (const auto& [R, a] : cfg.flux) {
    double m = 0.0;
    for (std::size_t i = 0; i < h.size() && h.x(i) <= R * (1 + 1e-12); ++i)
      if (h.x(i) >= cfg.xc) m += h.weight(i) * std::pow(h.x(i), a) * h[i];
    r.flux.push_back(m);
  }
  return r;
}

HRun run_h(const RadialMeasure& h0, const SolverConfig& cfg_in, bool keep_snapshots) {
  SolverConfig cfg = cfg_in;
  cfg.finalize();
  HRun out;
  SolverState s = initial_state(h0, cfg);
  out.records.push_back(make_record(s, cfg));
  if (keep_snapshots) out.snapshots.push_back(s.h);
  std::size_t k = 0;
  while (s.tau < cfg.tau_end * (1 - 1e-12)) {
    const double next_record = std::min(cfg.tau_end, cfg.record_every * static_cast<double>(k + 1));
    s = step(s, cfg, next_record - s.tau);
    if (std::abs(s.tau - next_record) <= 1e-12 * std::max(1.0, next_record)) {
      s.tau = next_record;
      ++k;
      out.records.push_back(make_record(s, cfg));
      if (keep_snapshots) out.snapshots.push_back(s.h);
    }
  }
  out.final_state = std::move(s);
  return out;
}

std::vector<HPoint> reconstruct_H(const std::vector<Record>& records) {
  std::vector<HPoint> H;
  H.reserve(records.size());
  for (const auto& r : records) H.push_back({r.tau, r.m_proxy - r.A, r.M0_g, r.M1_g});
  return H;
}

TimeChange time_change(const std::vector<HPoint>& H) {
  if (H.empty() || !(H[0].H_atom0 > 0))
    throw std::invalid_argument("time_change: the initial condensate H(0,{0}) must be positive");
  TimeChange xi;
  xi.t.assign(H.size(), std::numeric_limits<double>::infinity());
  xi.t[0] = 0.0;
  for (std::size_t k = 1; k < H.size(); ++k) {
    if (H[k].H_atom0 <= 0) {
      const double a = H[k - 1].H_atom0, b = H[k].H_atom0;
      xi.tau_star = H[k - 1].tau + (H[k].tau - H[k - 1].tau) * a / (a - b);
      break;
    }
    xi.t[k] = xi.t[k - 1] + 0.5 * (H[k].tau - H[k - 1].tau) * (1.0 / H[k - 1].H_atom0 + 1.0 / H[k].H_atom0);
  }
  return xi;
}

double inverse_time(const std::vector<HPoint>& H, const TimeChange& xi, double t) {
  if (t <= 0) return H.front().tau;
  for (std::size_t k = 1; k < H.size(); ++k) {
    if (!std::isfinite(xi.t[k])) break;
    if (xi.t[k] >= t) {
      const double w = (t - xi.t[k - 1]) / (xi.t[k] - xi.t[k - 1]);
      return H[k - 1].tau + w * (H[k].tau - H[k - 1].tau);
    }
  }
  return std::numeric_limits<double>::infinity();
}

std::string alpha_label(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

Table reconstruct_G(const std::vector<Record>& records, const TimeChange& xi, const SolverConfig& cfg,
                    const std::vector<double>& t_grid) {
  Table T;
  std::vector<std::string> cols = {"tau", "t", "in_G", "n", "M0_G", "M1_G"};
  for (double a : cfg.alphas)
    if (a != 0.0 && a != 1.0) cols.push_back("M" + alpha_label(a) + "_G");
  cols.insert(cols.end(), {"M0_h", "M1_h"});
  for (double a : cfg.alphas)
    if (a != 0.0 && a != 1.0) cols.push_back("M" + alpha_label(a) + "_h");
  cols.insert(cols.end(), {"M0_g", "Mhalf_g", "rate", "m_proxy", "A", "mu", "env_M0"});
  for (double r : cfg.envelope_r) cols.push_back("cum_" + alpha_label(r));
  for (const auto& [R, a] : cfg.flux) cols.push_back("flux_R" + alpha_label(R) + "_a" + alpha_label(a));
  for (const auto& c : cols) T.add_column(c);

  const double N = records.front().M0_h, E = records.front().M1_h;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const Record& r = records[k];
    const double n = r.m_proxy - r.A;
    const bool in_G = std::isfinite(xi.t[k]) && xi.t[k] <= cfg.t_max;
    std::vector<double> row = {r.tau, xi.t[k], in_G ? 1.0 : 0.0, n, n + r.M0_g, r.M1_g};
    for (std::size_t i = 0; i < cfg.alphas.size(); ++i)
      if (cfg.alphas[i] != 0.0 && cfg.alphas[i] != 1.0) row.push_back(r.Ma_g[i]);
    row.push_back(r.M0_h);
    row.push_back(r.M1_h);
    for (std::size_t i = 0; i < cfg.alphas.size(); ++i)
      if (cfg.alphas[i] != 0.0 && cfg.alphas[i] != 1.0) row.push_back(r.Ma_h[i]);
    const double env = 0.5 * std::sqrt(E) * r.tau + std::sqrt(N);
    for (double v : {r.M0_g, r.Mhalf_g, r.rate, r.m_proxy, r.A, 0.0, env * env}) row.push_back(v);
    row.insert(row.end(), r.cum.begin(), r.cum.end());
    row.insert(row.end(), r.flux.begin(), r.flux.end());
    T.push_row(row);
  }
  condensate_balance(T);
  if (t_grid.empty()) return T;

  const auto H = reconstruct_H(records);
  Table S;
  for (const auto& c : cols) S.add_column(c);
  const auto& tau = T.col("tau");
  for (double t : t_grid) {
    if (t > cfg.t_max) break;
    const double tt = inverse_time(H, xi, t);
    if (!std::isfinite(tt)) break;
    std::size_t k = 1;
    while (k + 1 < tau.size() && tau[k] < tt) ++k;
    const double w = tau[k] > tau[k - 1] ? (tt - tau[k - 1]) / (tau[k] - tau[k - 1]) : 0.0;
    std::vector<double> row;
    for (const auto& c : cols) {
      const auto& v = T.col(c);
      row.push_back(v[k - 1] + w * (v[k] - v[k - 1]));
    }
    row[0] = tt;
    row[1] = t;
    row[2] = 1.0;
    S.push_row(row);
  }
  return S;
}

void condensate_balance(Table& T) {
  const auto& tau = T.col("tau");
  const auto& n = T.col("n");
  const auto& half = T.col("Mhalf_g");
  auto& mu = T.col("mu");
  double acc = 0.0;
  for (std::size_t k = 0; k < T.rows(); ++k) {
    if (k > 0) acc += 0.5 * (tau[k] - tau[k - 1]) * (half[k] + half[k - 1]);
    mu[k] = n[k] - n[0] + acc;
  }
}

}  // namespace nck
