#include "nck/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nck {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::PASS: return "PASS";
    case Verdict::FAIL: return "FAIL";
    default: return "NOT_APPLICABLE";
  }
}

nlohmann::json BoundReport::to_json() const {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
  };
  nlohmann::json j = {{"name", name},       {"ref", ref},
                      {"lhs", num(lhs)},    {"rhs", num(rhs)},
                      {"slack", slack},     {"verdict", nck::to_string(verdict)},
                      {"location", num(location)}, {"location_kind", location_kind}};
  if (!note.empty()) j["note"] = note;
  return j;
}

BoundReport make_report(std::string name, std::string ref, double lhs, double rhs, double slack, double location,
                        std::string location_kind) {
  BoundReport r;
  r.name = std::move(name);
  r.ref = std::move(ref);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = slack;
  r.location = location;
  r.location_kind = std::move(location_kind);
  r.verdict = (lhs <= slack * rhs) ? Verdict::PASS : Verdict::FAIL;
  return r;
}

double moment_bound_apriori(double M_alpha0, double E, double alpha, double tau) {
  if (alpha < 3) throw std::domain_error("moment_bound_apriori: alpha must be >= 3");
  if (tau < 0) throw std::domain_error("moment_bound_apriori: tau must be >= 0");
  const double p = 2.0 / (alpha - 1.0);
  const double c = alpha * std::pow(2.0, alpha - 1.0) * std::pow(E, (alpha + 1.0) / (alpha - 1.0));
  return std::pow(std::pow(M_alpha0, p) + c * tau, (alpha - 1.0) / 2.0);
}

UniformConstants uniform_moment_constants(double alpha, double E) {
  if (alpha < 3) throw std::domain_error("uniform_moment_constants: alpha must be >= 3");
  if (!(E > 0)) throw std::domain_error("uniform_moment_constants: E must be > 0");
  const double k = std::pow(2.0, alpha - 2.0) * (alpha + 1.0) * std::pow(E, (2 * alpha + 3) / (2 * (alpha - 1)));
  const double q = (2 * alpha - 1) / (2 * (alpha - 1));
  // f(C) = k(1+C) − C^q is positive at 0 and eventually negative since q > 1.
  auto f = [&](double C) { return k * (1.0 + C) - std::pow(C, q); };
  double lo = 0.0, hi = 1.0;
  int widen = 0;
  while (f(hi) > 0) {
    lo = hi;
    hi *= 2.0;
    if (++widen > 2000) throw std::runtime_error("uniform_moment_constants: no sign change found");
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  double C = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double d = k - q * std::pow(C, q - 1.0);
    if (d == 0) break;
    const double Cn = C - f(C) / d;
    if (Cn > lo && Cn < hi) C = Cn;
  }
  UniformConstants u;
  u.C = C;
  u.gamma = 1.0 / (2.0 * (alpha + 1.0)) * std::pow(C / E, 1.0 / (2.0 * (alpha - 1.0)));
  const double L = k * (1.0 + C), R = std::pow(C, q);
  u.residual = std::abs(L - R) / std::max(L, R);
  return u;
}

double uniform_moment_bound(double alpha, double E, double tau) {
  if (!(tau > 0)) throw std::domain_error("uniform_moment_bound: tau must be > 0");
  const UniformConstants u = uniform_moment_constants(alpha, E);
  const double base = -std::expm1(-u.gamma * tau);
  if (base <= 0) return std::numeric_limits<double>::infinity();
  return u.C * std::pow(base, -2.0 * (alpha - 1.0));
}

double decay_threshold(double alpha) {
  if (!(alpha > 1) || alpha > 3) throw std::domain_error("decay_threshold: alpha must lie in (1, 3]");
  if (alpha <= 2) return std::pow((std::pow(2.0, alpha) - 2.0) * (alpha + 1.0) / (alpha - 1.0), 2.0 / 3.0);
  return std::pow(alpha * (alpha + 1.0), 2.0 / 3.0);
}

double critical_constant_b() {
  return 3.0 * std::pow(2.0 * std::numbers::pi, -1.0 / 3.0) * kZeta52 / std::pow(kZeta32, 5.0 / 3.0);
}

double temperature_ratio(double N, double E) {
  if (!(N > 0)) throw std::domain_error("temperature_ratio: N must be > 0");
  return E / (critical_constant_b() * std::pow(N, 5.0 / 3.0));
}

bool decay_condition(double N, double E, double alpha) { return E > decay_threshold(alpha) * std::pow(N, 5.0 / 3.0); }

double decay_denominator(double N, double E, double alpha) {
  if (!(alpha > 1) || alpha > 3) throw std::domain_error("decay constant: alpha must lie in (1, 3]");
  const double C1 = alpha <= 2 ? std::pow(2.0, alpha) - 2.0 : alpha * (alpha - 1.0);
  return (alpha - 1.0) / (alpha + 1.0) * std::pow(E, (2 * alpha + 1) / 2) * std::pow(N, (1 - 2 * alpha) / 2) -
         C1 * std::pow(N, 3 - alpha) * std::pow(E, alpha - 1);
}

std::optional<double> decay_integral_bound(double N, double E, double alpha, double M_alpha_t0) {
  if (!decay_condition(N, E, alpha)) return std::nullopt;
  const double d = decay_denominator(N, E, alpha);
  if (!(d > 0)) return std::nullopt;
  return M_alpha_t0 / d;
}

double origin_flux_bound(double N, double E, double R, double alpha, double int_n_dt) {
  if (!(alpha > -0.5)) throw std::domain_error("origin_flux_bound: alpha must be > -1/2");
  const double e = 0.5 + alpha;
  const double pre = 2.0 * std::pow(R, e) / (1.0 - std::pow(2.0 / 3.0, e));
  return pre * std::sqrt(int_n_dt) * (0.5 * std::sqrt(E) * int_n_dt + std::sqrt(N));
}

double origin_flux_bound_tau(double N, double E, double R, double alpha, double tau1, double tau2) {
  if (!(alpha > -0.5)) throw std::domain_error("origin_flux_bound_tau: alpha must be > -1/2");
  const double e = 0.5 + alpha;
  const double pre = 2.0 * std::pow(R, e) / (1.0 - std::pow(2.0 / 3.0, e));
  return pre * std::sqrt(tau2 - tau1) * (0.5 * std::sqrt(E) * tau2 + std::sqrt(N));
}

double concentration_time(double delta) {
  if (!(delta > 0) || delta > 1) throw std::domain_error("concentration_time: delta must lie in (0, 1]");
  return 64.0 / (delta * delta * delta) * (1.0 - delta / 2.0);
}

double t_star(double alpha) {
  if (!(alpha > 0) || !(alpha < 1)) throw std::domain_error("t_star: alpha must lie in (0, 1)");
  const double delta = 1.0 - std::pow(2.0, -alpha);
  return concentration_time(delta) / (1.0 - std::pow(2.0, -(1.0 - alpha)));
}

BoundReport lower_envelope_check(const Table& T, double alpha, double tau0) {
  BoundReport rep;
  rep.name = "lower_envelope";
  rep.ref = "lower-envelope";
  rep.slack = 1.0;
  rep.location = tau0;
  rep.location_kind = "tau";
  std::vector<std::pair<double, std::string>> rs;
  for (const auto& name : T.names())
    if (name.rfind("cum_", 0) == 0) rs.push_back({std::stod(name.substr(4)), name});
  std::sort(rs.begin(), rs.end());
  const auto& tau = T.col("tau");
  double C = std::numeric_limits<double>::infinity();
  double Rstar = 0.0;
  for (const auto& [r, name] : rs) {
    const auto& F = T.col(name);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < T.rows(); ++k)
      if (tau[k] >= tau0) m = std::min(m, F[k]);
    if (!(m > 0) || !std::isfinite(m)) break;
    C = std::min(C, m / std::pow(r, alpha));
    Rstar = r;
  }
  if (Rstar == 0.0) {
    rep.verdict = Verdict::NOT_APPLICABLE;
    rep.note = "no positive mass near the origin after tau0";
    return rep;
  }
  // Existence of a positive floor: 0 ≤ C.
  rep.lhs = 0.0;
  rep.rhs = C;
  rep.verdict = Verdict::PASS;
  // Least-squares exponent of log F against log r at the last row.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const auto& [r, name] : rs) {
    if (r > Rstar) break;
    const double y = T.col(name).back();
    if (!(y > 0)) continue;
    const double lx = std::log(r), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  const double slope = cnt > 1 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : std::nan("");
  rep.note = "R*=" + format_double(Rstar) + " fitted_exponent=" + format_double(slope) +
             " reference_constant=" + format_double(t_star(alpha) / tau0 * std::pow(2.0 * Rstar, 1.0 - alpha));
  return rep;
}

}  // namespace nck
