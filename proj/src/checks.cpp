#include "nck/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nck/evolution.hpp"

namespace nck {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Worst {
  double lhs = 0.0, rhs = 0.0, loc = 0.0;
  double margin = -kInf;
  // Keeps the row with the largest lhs − slack·rhs.
  void offer(double l, double r, double at, double slack) {
    const double m = l - slack * r;
    if (m > margin || std::isnan(m)) {
      margin = m;
      lhs = l;
      rhs = r;
      loc = at;
    }
  }
};

BoundReport from_worst(const std::string& name, const std::string& ref, const Worst& w, double slack,
                       const std::string& kind) {
  if (w.margin == -kInf) {
    BoundReport r;
    r.name = name;
    r.ref = ref;
    r.slack = slack;
    r.location_kind = kind;
    r.note = "no rows in range";
    return r;
  }
  return make_report(name, ref, w.lhs, w.rhs, slack, w.loc, kind);
}

BoundReport not_applicable(const std::string& name, const std::string& ref, const std::string& note) {
  BoundReport r;
  r.name = name;
  r.ref = ref;
  r.note = note;
  return r;
}

std::vector<std::size_t> rows_in_G(const Table& T) {
  std::vector<std::size_t> idx;
  const auto& in = T.col("in_G");
  for (std::size_t k = 0; k < T.rows(); ++k)
    if (in[k] != 0.0) idx.push_back(k);
  return idx;
}

}  // namespace

VerdictSummary summarize(const std::vector<BoundReport>& reports) {
  VerdictSummary s;
  for (const auto& r : reports) {
    if (r.verdict == Verdict::PASS) ++s.pass;
    else if (r.verdict == Verdict::FAIL) ++s.fail;
    else ++s.not_applicable;
  }
  return s;
}

std::vector<BoundReport> run_checks(const Table& T, const CheckOptions& o, const std::string& suite) {
  if (suite != "full" && suite != "conservation") throw std::invalid_argument("suite: unknown suite " + suite);
  if (T.rows() == 0) throw std::invalid_argument("trajectory: no rows");
  std::vector<BoundReport> out;
  const auto& tau = T.col("tau");
  const auto& t = T.col("t");
  const auto& n = T.col("n");
  const double N = T.col("M0_G")[0];
  const double E = T.col("M1_h")[0];
  const auto G = rows_in_G(T);

  {
    Worst w;
    const auto& M1 = T.col("M1_h");
    for (std::size_t k = 0; k < T.rows(); ++k) w.offer(std::abs(M1[k] - E) / E, o.conservation_tol, tau[k], 1.0);
    out.push_back(from_worst("energy_conservation", "conservation", w, 1.0, "tau"));
  }
  {
    Worst w;
    const auto& M0 = T.col("M0_G");
    for (std::size_t k : G) w.offer(std::abs(M0[k] - N) / N, o.conservation_tol, t[k], 1.0);
    out.push_back(from_worst("mass_G", "conservation", w, 1.0, "t"));
  }
  if (suite == "conservation") return out;

  {
    Worst w;
    const auto& M0 = T.col("M0_h");
    const auto& env = T.col("env_M0");
    for (std::size_t k = 0; k < T.rows(); ++k) w.offer(M0[k], env[k], tau[k], o.slack);
    out.push_back(from_worst("mass_envelope", "apriori-mass", w, o.slack, "tau"));
  }
  if (T.has("M3_h")) {
    const auto& M3 = T.col("M3_h");
    Worst w, u;
    for (std::size_t k = 0; k < T.rows(); ++k) {
      w.offer(M3[k], moment_bound_apriori(M3[0], E, 3.0, tau[k]), tau[k], o.slack);
      if (tau[k] >= o.uniform_tau_min) u.offer(M3[k], uniform_moment_bound(3.0, E, tau[k]), tau[k], o.slack);
    }
    out.push_back(from_worst("moment_envelope_a3", "apriori-moment", w, o.slack, "tau"));
    auto rep = from_worst("uniform_moment_a3", "uniform-moment", u, o.slack, "tau");
    const auto uc = uniform_moment_constants(3.0, E);
    rep.note = "C=" + format_double(uc.C) + " gamma=" + format_double(uc.gamma) + " residual=" + format_double(uc.residual);
    out.push_back(rep);
  } else {
    out.push_back(not_applicable("moment_envelope_a3", "apriori-moment", "no M3_h column"));
    out.push_back(not_applicable("uniform_moment_a3", "uniform-moment", "no M3_h column"));
  }

  {
    double bad = 0.0, at = 0.0;
    for (std::size_t i = 1; i < G.size(); ++i)
      if (!(t[G[i]] > t[G[i - 1]])) {
        bad += 1.0;
        at = t[G[i]];
      }
    out.push_back(make_report("time_change_monotone", "time-change", bad, 0.0, 1.0, at, "t"));
  }

  {
    const auto& mu = T.col("mu");
    const auto& half = T.col("Mhalf_g");
    Worst mono, pos, cmi;
    double running = -kInf;
    double expo = 0.0;  // ∫ M½(g) ds = ∫ M½(g)/n dτ
    for (std::size_t i = 0; i < G.size(); ++i) {
      const std::size_t k = G[i];
      if (i > 0) {
        const std::size_t j = G[i - 1];
        expo += 0.5 * (tau[k] - tau[j]) * (half[k] / n[k] + half[j] / n[j]);
        mono.offer(running - mu[k], o.conservation_tol * N, t[k], 1.0);
        pos.offer(-mu[k], o.conservation_tol * N, t[k], 1.0);
        cmi.offer(n[G[0]] * std::exp(-expo), n[k], t[k], o.slack);
      }
      running = std::max(running, mu[k]);
    }
    out.push_back(from_worst("balance_monotone", "condensate-balance", mono, 1.0, "t"));
    out.push_back(from_worst("balance_positive", "condensate-balance", pos, 1.0, "t"));
    out.push_back(from_worst("cmi", "condensate-lower", cmi, o.slack, "t"));
  }

  {
    const double a = o.decay_alpha;
    const std::string mcol = "M" + alpha_label(a) + "_G";
    const bool cond = decay_condition(N, E, a);
    if (!cond || !T.has(mcol) || G.size() < 2) {
      const std::string why = !cond ? "energy below the decay threshold C(alpha)N^(5/3)" : "trajectory too short or no " + mcol;
      out.push_back(not_applicable("decay_moment_monotone", "decay", why));
      out.push_back(not_applicable("decay_n_decreasing", "decay", why));
      out.push_back(not_applicable("decay_integral", "decay", why));
    } else {
      const auto& M = T.col(mcol);
      Worst mono, dec;
      double lo = kInf;
      for (std::size_t k : G) {
        if (lo < kInf) mono.offer(M[k], lo, t[k], o.slack);
        lo = std::min(lo, M[k]);
      }
      out.push_back(from_worst("decay_moment_monotone", "decay", mono, o.slack, "t"));
      const double t_last = t[G.back()];
      const double t0 = o.decay_t0 >= 0 ? o.decay_t0 : 0.1 * t_last;
      std::size_t k0 = G.size();
      for (std::size_t i = 0; i < G.size(); ++i)
        if (t[G[i]] >= t0) {
          k0 = i;
          break;
        }
      if (k0 + 1 >= G.size()) {
        out.push_back(not_applicable("decay_n_decreasing", "decay", "t0 beyond the trajectory"));
        out.push_back(not_applicable("decay_integral", "decay", "t0 beyond the trajectory"));
      } else {
        double nlo = kInf;
        for (std::size_t i = k0; i < G.size(); ++i) {
          const std::size_t k = G[i];
          if (nlo < kInf) dec.offer(n[k], nlo, t[k], o.slack);
          nlo = std::min(nlo, n[k]);
        }
        out.push_back(from_worst("decay_n_decreasing", "decay", dec, o.slack, "t"));
        // ∫ n dt over [t0, t_last] equals the τ increment.
        const double integral = tau[G.back()] - tau[G[k0]];
        const auto bound = decay_integral_bound(N, E, a, M[G[k0]]);
        auto rep = make_report("decay_integral", "decay", integral, bound.value_or(kInf), o.slack, t[G[k0]], "t");
        rep.note = "t0=" + format_double(t[G[k0]]) + " t_max=" + format_double(t_last);
        out.push_back(rep);
      }
    }
  }

  for (const auto& name : T.names()) {
    if (name.rfind("flux_R", 0) != 0) continue;
    const auto pos = name.find("_a");
    const double R = std::stod(name.substr(6, pos - 6));
    const double a = std::stod(name.substr(pos + 2));
    const auto& F = T.col(name);
    Worst w;
    double acc = 0.0;  // ∫ n ∫_{(0,R]} x^α g dt = ∫ (flux column) dτ
    for (std::size_t i = 1; i < G.size(); ++i) {
      const std::size_t k = G[i], j = G[i - 1];
      acc += 0.5 * (tau[k] - tau[j]) * (F[k] + F[j]);
      w.offer(acc, origin_flux_bound(N, E, R, a, tau[k] - tau[G[0]]), t[k], o.slack);
    }
    out.push_back(from_worst("origin_flux_R" + alpha_label(R) + "_a" + alpha_label(a), "origin-flux", w, o.slack, "t"));
  }

  out.push_back(lower_envelope_check(T, o.envelope_alpha, o.envelope_tau0));
  return out;
}

}  // namespace nck
