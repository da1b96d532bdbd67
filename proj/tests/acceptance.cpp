// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "app.hpp"
#include "nck/analysis.hpp"
#include "nck/measure.hpp"
#include "nck/testfn.hpp"
#include "nck/weakops.hpp"

using namespace nck;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

RadialMeasure random_atomic(std::mt19937_64& rng, double atom0 = 0.0) {
  std::uniform_int_distribution<int> K(1, 6);
  std::uniform_real_distribution<double> X(0.01, 8.0), W(0.01, 3.0);
  std::vector<Atom> atoms;
  const int k = K(rng);
  for (int i = 0; i < k; ++i) atoms.push_back({X(rng), W(rng)});
  return RadialMeasure(atom0, atoms);
}

std::vector<TestFunction> builtins() {
  return {tf_one(), tf_x(), tf_pow(2.0), phi_eps(0.5), phi_eps(2.0), tf_cap(1.5), tf_exp(1.0)};
}

char buf[512];
template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// Shared run of criteria 5, 6, 7 and 11.
app::RunOutput standard_run() {
  const json doc = json::parse(R"({
    "name": "standard",
    "initial_data": {"type": "power_exp", "atom0": 0.5, "power": 0.5, "rate": 1.0, "mass": 0.5,
                     "grid": {"x_max": 30.0, "cells": 3000}, "normalize": {"N": 1.0, "E": 1.0}},
    "n": 16,
    "tau_end": 1.0,
    "record_every": 0.01,
    "threads": 1
  })");
  return app::execute(app::parse_run_config(doc));
}

const app::RunOutput& standard() {
  static const app::RunOutput out = standard_run();
  return out;
}

Outcome c1() {
  std::mt19937_64 rng(101);
  double worst_mass = 0, worst_energy = 0, worst_id = 0;
  const auto phis = builtins();
  for (int i = 0; i < 1000; ++i) {
    const auto g = random_atomic(rng);
    const auto m = q3(tf_one(), g), e = q3(tf_x(), g);
    worst_mass = std::max(worst_mass, std::abs(m.value) / std::max(m.abs_scale, 1e-300));
    worst_energy = std::max(worst_energy, std::abs(e.value) / std::max(e.abs_scale, 1e-300));
    const auto& phi = phis[i % phis.size()];
    const auto a = q3(phi, g), b = q3_tilde(phi, g);
    const double half = moment(g, 0.5);
    const double scale = a.abs_scale + b.abs_scale + std::abs(phi(0.0)) * half;
    worst_id = std::max(worst_id, std::abs(a.value - (b.value - phi(0.0) * half)) / scale);
  }
  const bool ok = worst_mass <= 1e-12 && worst_energy <= 1e-12 && worst_id <= 1e-12;
  return {ok, fmt("max rel |q3(1,g)|=%.2e |q3(x,g)|=%.2e identity=%.2e (limit 1e-12, 1000 measures)", worst_mass,
                  worst_energy, worst_id)};
}

Outcome c2() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> E(0.1, 5.0), C(0.0, 2.0), X(0.0, 10.0);
  int bad = 0;
  double worst_q = 0, worst_l = 0, worst_e = 0;
  for (int i = 0; i < 200; ++i) {
    // Nonnegative combinations of convex nonincreasing functions stay in the class.
    const TestFunction phi = tf_combine(C(rng) + 0.01, phi_eps(E(rng)), C(rng), tf_exp(1.0 / E(rng)));
    RadialMeasure g = random_atomic(rng);
    if (i % 2) {
      const auto grid = GridSpec::geometric(1e-3, 6.0, 1.15);
      std::vector<double> d(grid.cells());
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = 0.1 + C(rng);
      g = RadialMeasure(0.0, g.atoms(), grid, d);
    }
    const auto q = q3_quadratic(phi, g), l = q3_linear_tilde(phi, g);
    worst_q = std::min(worst_q, q.value / std::max(q.abs_scale, 1e-300));
    worst_l = std::max(worst_l, l.value / std::max(l.abs_scale, 1e-300));
    if (q.value < -1e-12 * q.abs_scale || l.value > 1e-12 * l.abs_scale) ++bad;
    for (int k = 0; k < 50; ++k) {
      const double x = X(rng);
      const double v = ell0_kernel(phi, x);
      worst_e = std::min(worst_e, v);
      if (v < -1e-12 * std::max(1.0, x)) ++bad;
    }
  }
  return {bad == 0, fmt("200 samples: min q3_quadratic/scale=%.2e, max q3_linear_tilde/scale=%.2e, min ell0=%.2e, "
                        "violations=%d",
                        worst_q, worst_l, worst_e, bad)};
}

Outcome c3() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> N0(0.05, 3.0);
  const auto phis = builtins();
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const auto G = random_atomic(rng, N0(rng));
    const auto [n0, g] = split_atom(G);
    const auto& phi = phis[i % phis.size()];
    const auto full = q4_full(phi, G);
    const double rhs = q4_script(phi, g).value + n0 * q3(phi, g).value;
    worst = std::max(worst, std::abs(full.value - rhs) / std::max(full.abs_scale, 1e-300));
  }
  return {worst <= 1e-8, fmt("max |q4 - q4_script - n q3| / scale = %.2e over 100 measures (limit 1e-8)", worst)};
}

Outcome c4() {
  double worst = 0, worst_tail = 0;
  std::string where;
  for (double beta : {0.5, 1.0, 2.0})
    for (double c : {0.0, 1.0}) {
      const double x_max = 40.0 / beta;
      worst_tail = std::max(worst_tail, bose_einstein_tail(beta, 0.0, x_max));
      const auto G = bose_einstein(beta, 0.0, c, GridSpec::geometric(1e-5, x_max, 1.01));
      const auto g = split_atom(G).second;
      for (const char* name : {"phi_eps:1", "cap:2", "pow:2"}) {
        const auto r = q3(tf_from_name(name), g);
        const double rel = std::abs(r.value) / r.abs_scale;
        if (rel > worst) {
          worst = rel;
          where = fmt("beta=%g C=%g phi=%s", beta, c, name);
        }
      }
    }
  return {worst <= 1e-5 && worst_tail <= 1e-10,
          fmt("max |q3|/scale = %.2e at %s (limit 1e-5); max tail mass %.1e", worst, where.c_str(), worst_tail)};
}

Outcome c5() {
  const Table& T = standard().trajectory;
  const double N = T.col("M0_G")[0], E = T.col("M1_h")[0];
  double de = 0, dm = 0;
  for (std::size_t k = 0; k < T.rows(); ++k) {
    de = std::max(de, std::abs(T.col("M1_h")[k] - E) / E);
    if (T.col("in_G")[k] != 0) dm = std::max(dm, std::abs(T.col("M0_G")[k] - N) / N);
  }
  const std::size_t cells = static_cast<std::size_t>(std::llround(34.0 * 64));
  return {de <= 1e-3 && dm <= 1e-3 && std::abs(N - 1) < 1e-3 && std::abs(E - 1) < 1e-3,
          fmt("n=16, %zu cells, tau in [0,%g]: energy drift %.2e, mass drift of G %.2e (limit 1e-3)", cells,
              T.col("tau").back(), de, dm)};
}

Outcome c6() {
  const Table& T = standard().trajectory;
  const double N = T.col("M0_h")[0], E = T.col("M1_h")[0], M3 = T.col("M3_h")[0];
  double r0 = 0, r3 = 0;
  for (std::size_t k = 0; k < T.rows(); ++k) {
    const double tau = T.col("tau")[k];
    const double env = std::pow(std::sqrt(E) / 2 * tau + std::sqrt(N), 2);
    r0 = std::max(r0, T.col("M0_h")[k] / env);
    r3 = std::max(r3, T.col("M3_h")[k] / (M3 + 12 * E * E * tau));
  }
  return {r0 <= 1.01 && r3 <= 1.01, fmt("max M0/envelope = %.4f, max M3/(M3(0)+12E^2 tau) = %.4f (limit 1.01)", r0, r3)};
}

Outcome c7() {
  const Table& T = standard().trajectory;
  const double E = T.col("M1_h")[0];
  const auto u = uniform_moment_constants(3.0, E);
  double worst = 0;
  for (std::size_t k = 0; k < T.rows(); ++k) {
    const double tau = T.col("tau")[k];
    if (tau < 0.1) continue;
    const double bound = u.C * std::pow(-std::expm1(-u.gamma * tau), -4.0);
    worst = std::max(worst, T.col("M3_h")[k] / bound);
  }
  return {worst <= 1.01 && u.residual <= 1e-10,
          fmt("C=%.6g gamma=%.6g residual=%.1e; max M3/bound for tau>=0.1 = %.3e", u.C, u.gamma, u.residual, worst)};
}

Outcome c8() {
  // g = x^{-1/2} on (0, 10], a geometric grid resolving the origin.
  const auto grid = GridSpec::geometric(1e-7, 10.0, 1.05);
  std::vector<double> d(grid.cells());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = 2 * (std::sqrt(grid.hi(i)) - std::sqrt(grid.lo(i))) / grid.width(i);
  std::vector<double> eps;
  for (double e = 0.1; e >= 1e-3; e /= 2) eps.push_back(e);
  const auto sing = transfer_functional(RadialMeasure::density_only(grid, d), eps);
  const double target = std::numbers::pi * std::numbers::pi / 6;
  const double rel = std::abs(sing.extrapolated - target) / target;

  const auto sg = GridSpec::geometric(1e-5, 40.0, 1.02);
  std::vector<double> s(sg.cells());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = 0.5 * (sg.lo(i) + sg.hi(i));
    s[i] = std::sqrt(x) * std::exp(-x);
  }
  const auto smooth = transfer_functional(RadialMeasure::density_only(sg, s), eps);
  return {rel <= 0.02 && std::abs(smooth.extrapolated) <= 1e-3,
          fmt("x^{-1/2}: T=%.5f vs pi^2/6=%.5f (rel %.2e, limit 2%%); smooth: T=%.2e (limit 1e-3)", sing.extrapolated,
              target, rel, smooth.extrapolated)};
}

Outcome c9() {
  const double b = critical_constant_b();
  const double limit = std::pow(std::log(16.0), 2.0 / 3.0) / b;
  const double lib_limit = decay_threshold(1.0 + 1e-9) / b;
  const double branch_low = std::pow((std::pow(2.0, 2.0) - 2.0) * 3.0 / 1.0, 2.0 / 3.0);
  const double branch_high = std::pow(2.0 * 3.0, 2.0 / 3.0);
  const double gap = std::max({std::abs(branch_low - branch_high), std::abs(decay_threshold(2.0) - branch_high),
                               std::abs(decay_threshold(std::nextafter(2.0, 3.0)) - branch_high)});
  return {std::abs(limit - 4.48403) <= 1e-3 && std::abs(lib_limit - 4.48403) <= 1e-3 && gap <= 1e-12,
          fmt("b=%.6f, limit=%.6f, C(1+1e-9)/b=%.6f (target 4.48403 +- 1e-3); branch gap at 2 = %.1e", b, limit,
              lib_limit, gap)};
}

Outcome c10() {
  const json doc = json::parse(R"({
    "name": "decay",
    "initial_data": {"type": "shell", "atom0": 0.2, "lo": 6.5, "hi": 8.5, "mass": 0.8},
    "n": 16,
    "mollify": 6,
    "tau_end": 0.2,
    "record_every": 0.002,
    "threads": 1
  })");
  const auto rc = app::parse_run_config(doc);
  const auto out = app::execute(rc);
  const Table& T = out.trajectory;
  const double N = T.col("M0_G")[0], E = T.col("M1_h")[0];
  if (!decay_condition(N, E, 2.0)) return {false, "decay condition does not hold for the data"};
  std::vector<std::size_t> rows;
  for (std::size_t k = 0; k < T.rows(); ++k)
    if (T.col("in_G")[k] != 0) rows.push_back(k);
  const auto& t = T.col("t");
  const double t0 = 0.1 * t[rows.back()];
  // M₂(G) nonincreasing within slack over the whole run.
  double worst_m2 = 0, running_min = INFINITY;
  for (std::size_t k : rows) {
    running_min = std::min(running_min, T.col("M2_G")[k]);
    worst_m2 = std::max(worst_m2, T.col("M2_G")[k] / running_min);
  }
  // n decreasing after the transient.
  int rises = 0;
  std::size_t k0 = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (t[rows[i]] >= t0) {
      if (k0 == rows.size()) k0 = i;
      if (i > k0 && T.col("n")[rows[i]] > T.col("n")[rows[i - 1]]) ++rises;
    }
  // ∫_{t0}^{t_max} n dt = Δτ.
  const double integral = T.col("tau")[rows.back()] - T.col("tau")[rows[k0]];
  const auto bound = decay_integral_bound(N, E, 2.0, T.col("M2_G")[rows[k0]]);
  const bool ok = worst_m2 <= 1.01 && rises == 0 && bound && integral <= 1.01 * *bound;
  return {ok, fmt("N=%.4f E=%.4f (C(2)N^{5/3}=%.4f): max M2/running min=%.5f, n rises after t0=%g: %d, "
                  "int n dt=%.4e <= bound %.4e",
                  N, E, decay_threshold(2.0) * std::pow(N, 5.0 / 3.0), worst_m2, t0, rises, integral,
                  bound ? *bound : NAN)};
}

Outcome c11() {
  const app::RunOutput& out = standard();
  const Table& T = out.trajectory;
  const double N = T.col("M0_G")[0], E = T.col("M1_h")[0];
  std::string detail;
  bool ok = true;
  for (double R : {0.5, 1.0})
    for (double a : {0.0, 0.25}) {
      char col[64];
      std::snprintf(col, sizeof col, "flux_R%g_a%g", R, a);
      const auto& f = T.col(col);
      const auto& tau = T.col("tau");
      double lhs = 0, span = 0;
      for (std::size_t k = 1; k < T.rows() && T.col("in_G")[k] != 0; ++k) {
        lhs += 0.5 * (tau[k] - tau[k - 1]) * (f[k] + f[k - 1]);
        span = tau[k];
      }
      const double rhs = origin_flux_bound(N, E, R, a, span);
      ok = ok && lhs <= rhs;
      detail += fmt("R=%g a=%g: %.3e <= %.3e; ", R, a, lhs, rhs);
    }
  return {ok, detail};
}

Outcome c12() {
  const json doc = json::parse(R"({
    "name": "condensation",
    "initial_data": {"type": "power_exp", "atom0": 0.3, "power": 0.5, "rate": 1.0, "mass": 0.7,
                     "grid": {"x_max": 30.0, "cells": 3000}, "normalize": {"N": 1.0, "E": 0.2}},
    "n": 16,
    "tau_end": 1.0,
    "record_every": 0.01,
    "threads": 1
  })");
  const auto rc = app::parse_run_config(doc);
  const auto out = app::execute(rc);
  const Table& T = out.trajectory;
  const double N = T.col("M0_G")[0], E = T.col("M1_h")[0];
  const double ratio = temperature_ratio(N, E);
  int decreases = 0, nonpositive = 0, cmi = 0;
  double acc = 0;
  const auto& tau = T.col("tau");
  const auto& n = T.col("n");
  const auto& mu = T.col("mu");
  const auto& half = T.col("Mhalf_g");
  std::size_t last = 0;
  for (std::size_t k = 1; k < T.rows() && T.col("in_G")[k] != 0; ++k) {
    last = k;
    if (mu[k] < mu[k - 1]) ++decreases;
    if (!(mu[k] > 0)) ++nonpositive;
    // ∫ M½(g) dt = ∫ M½(g)/n dτ.
    acc += 0.5 * (tau[k] - tau[k - 1]) * (half[k] / n[k] + half[k - 1] / n[k - 1]);
    if (1.01 * n[k] < n[0] * std::exp(-acc)) ++cmi;
  }
  const bool ok = ratio < 1 && last > 0 && decreases == 0 && nonpositive == 0 && cmi == 0;
  return {ok, fmt("T/Tc=%.3f, %zu rows in G up to t=%.4g: mu decreases=%d, mu<=0 for t>0: %d, CMI violations=%d, "
                  "mu(end)=%.4e, n: %.4f -> %.4f",
                  ratio, last + 1, T.col("t")[last], decreases, nonpositive, cmi, mu[last], n[0], n[last])};
}

Outcome c13() {
  const json doc = json::parse(R"({
    "name": "determinism",
    "initial_data": {"type": "power_exp", "atom0": 0.5, "power": 0.5, "rate": 1.0, "mass": 0.5,
                     "normalize": {"N": 1.0, "E": 1.0}},
    "n": 8,
    "tau_end": 0.2,
    "record_every": 0.01,
    "threads": 2
  })");
  const auto rc = app::parse_run_config(doc);
  const auto a = app::execute(rc), b = app::execute(rc);
  const std::string ca = app::trajectory_csv(a.trajectory, a.manifest.config_hash, rc.solver);
  const std::string cb = app::trajectory_csv(b.trajectory, b.manifest.config_hash, rc.solver);
  return {ca == cb && !ca.empty(), fmt("two runs at 2 threads: %zu bytes each, identical=%s", ca.size(),
                                       ca == cb ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
