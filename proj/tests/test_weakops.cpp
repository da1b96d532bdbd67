#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nck/weakops.hpp"

using namespace nck;

namespace {

// Brute-force pair sums written from the kernel definitions, without the library's kernels.
struct Brute {
  const TestFunction& phi;
  double lam(double x, double y) const { return phi(x + y) + phi(std::abs(x - y)) - 2 * phi(std::max(x, y)); }
  double ell(double x) const { return x * phi(x) - 2 * phi.antiderivative(x); }
  double quadratic(const RadialMeasure& g) const {
    double s = 0;
    for (const auto& a : g.atoms())
      for (const auto& b : g.atoms()) s += lam(a.x, b.x) / std::sqrt(a.x * b.x) * a.w * b.w;
    return s;
  }
  double linear(const RadialMeasure& g, bool tilde) const {
    double s = 0;
    for (const auto& a : g.atoms()) s += (ell(a.x) + (tilde ? 0.0 : a.x * phi(0.0))) / std::sqrt(a.x) * a.w;
    return s;
  }
};

RadialMeasure random_atomic(std::mt19937_64& rng, int k, double atom0 = 0.0) {
  std::uniform_real_distribution<double> X(0.02, 6.0), W(0.05, 2.0);
  std::vector<Atom> atoms;
  for (int i = 0; i < k; ++i) atoms.push_back({X(rng), W(rng)});
  return RadialMeasure(atom0, atoms);
}

}  // namespace

TEST_SUITE("weakops") {
  TEST_CASE("quadratic functional on atoms") {
    const RadialMeasure one(0.0, {{1.0, 1.0}});
    CHECK(q3_quadratic(tf_pow(2.0), one).value == doctest::Approx(2.0));
    const RadialMeasure two(0.0, {{1.0, 1.0}, {2.0, 1.0}});
    const auto p = phi_eps(1.0);
    const Brute b{p};
    const double expect = b.lam(1, 1) + 2 * b.lam(1, 2) / std::sqrt(2.0) + b.lam(2, 2) / 2;
    CHECK(q3_quadratic(p, two).value == doctest::Approx(expect).epsilon(1e-14));
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) CHECK(q3_quadratic(tf_x(), random_atomic(rng, 5)).value == doctest::Approx(0.0));
  }

  TEST_CASE("linear functionals") {
    const RadialMeasure one(0.0, {{1.0, 1.0}});
    CHECK(q3_linear(tf_one(), one).value == doctest::Approx(0.0));
    CHECK(q3_linear(tf_x(), one).value == doctest::Approx(0.0));
    CHECK(q3_linear(tf_pow(2.0), one).value == doctest::Approx(1.0 / 3.0));
    CHECK(q3_linear_tilde(tf_one(), one).value == doctest::Approx(-1.0));
    CHECK(q3_linear_tilde(tf_x(), one).value == doctest::Approx(0.0));
    const auto unit = RadialMeasure::density_only(GridSpec::uniform(0, 1, 8), std::vector<double>(8, 1.0));
    CHECK(q3_linear_tilde(tf_one(), unit).value == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  }

  TEST_CASE("q3 and q3_tilde") {
    const RadialMeasure one(0.0, {{1.0, 1.0}});
    // q3 = q3_tilde − φ(0)M½ with q3(1, g) = 0, so q3_tilde(1, δ₁) = M½ = 1.
    CHECK(q3_tilde(tf_one(), one).value == doctest::Approx(1.0));
    CHECK(q3(tf_one(), one).value == doctest::Approx(0.0));
    std::mt19937_64 rng(8);
    for (int i = 0; i < 50; ++i) {
      const auto g = random_atomic(rng, 1 + i % 6);
      for (const char* name : {"one", "x", "phi_eps:0.8", "cap:1.5", "pow:2"}) {
        const auto p = tf_from_name(name);
        const Brute b{p};
        const double quad = b.quadratic(g);
        CHECK(q3(p, g).value == doctest::Approx(quad - b.linear(g, false)).epsilon(1e-12).scale(std::abs(quad) + 1));
        CHECK(q3_tilde(p, g).value == doctest::Approx(quad - b.linear(g, true)).epsilon(1e-12).scale(std::abs(quad) + 1));
      }
      CHECK(q3(tf_one(), g).value == doctest::Approx(0.0).scale(1.0));
      CHECK(q3(tf_x(), g).value == doctest::Approx(0.0).scale(1.0));
    }
  }

  TEST_CASE("q3_tilde regularity bound") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
      const auto g = random_atomic(rng, 5);
      for (const auto& p : {phi_eps(0.5), tf_cap(2.0), tf_exp(1.0)}) {
        const double bound = 2 * p.lipschitz * std::pow(moment(g, 0.0), 2) + 4 * p.sup * moment(g, 0.5);
        CHECK(std::abs(q3_tilde(p, g).value) <= bound);
      }
    }
  }

  TEST_CASE("density quadrature against a closed form") {
    // Λ(x²)(x,y) = 2 min(x,y)², so ∬_{[0,1]²} 2min²/√(xy) = 8/15.
    const auto unit = RadialMeasure::density_only(GridSpec::uniform(0, 1, 16), std::vector<double>(16, 1.0));
    CHECK(q3_quadratic(tf_pow(2.0), unit).value == doctest::Approx(8.0 / 15.0).epsilon(1e-10));
    // Mixed atoms and density: the cross term doubles ∫ Λ(x²)(1/2, y)/√(y/2) dy.
    const RadialMeasure mixed(0.0, {{0.5, 1.0}}, GridSpec::uniform(0, 1, 16), std::vector<double>(16, 1.0));
    const double cross = 2.0 * 2.0 *
                         ((2.0 / 5.0) * std::pow(0.5, 2.5) + 0.25 * 2.0 * (1.0 - std::sqrt(0.5))) / std::sqrt(0.5);
    CHECK(q3_quadratic(tf_pow(2.0), mixed).value == doctest::Approx(8.0 / 15.0 + cross + 2.0 * 0.25 / 0.5).epsilon(1e-10));
  }

  TEST_CASE("atom at the origin is rejected") {
    CHECK_THROWS(q3(tf_one(), RadialMeasure(1.0, {{1.0, 1.0}})));
    CHECK_THROWS(q4_script(tf_one(), RadialMeasure(1.0, {{1.0, 1.0}})));
    CHECK_THROWS(q4_full(tf_one(), RadialMeasure(0.0, {}, GridSpec::uniform(0, 1, 2), {1.0, 1.0})));
  }

  TEST_CASE("weight W") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> U(0.01, 5.0);
    for (int i = 0; i < 200; ++i) {
      const double x1 = U(rng), x2 = U(rng), x3 = U(rng);
      const double W = weight_W(x1, x2, x3);
      CHECK(W >= 0.0);
      const double x4 = x1 + x2 - x3;
      if (x4 <= 0) {
        CHECK(W == 0.0);
      } else {
        const double w = std::min({std::sqrt(x1), std::sqrt(x2), std::sqrt(x3), std::sqrt(x4)});
        CHECK(W == doctest::Approx(w / std::sqrt(x1 * x2 * x3)));
      }
      CHECK(phi_capital(tf_x(), x1, x2, x3) == doctest::Approx(0.0).scale(1.0));
    }
  }

  TEST_CASE("q4 kernels vanish on conserved quantities") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 10; ++i) {
      const auto G = random_atomic(rng, 4, 0.7);
      CHECK(q4_full(tf_x(), G).value == doctest::Approx(0.0).scale(1.0));
      CHECK(q4_full(tf_one(), G).value == doctest::Approx(0.0).scale(1.0));
    }
  }

  TEST_CASE("q4 decomposition") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 10; ++i) {
      const auto G = random_atomic(rng, 3, 0.4 + 0.1 * i);
      const auto [n0, g] = split_atom(G);
      for (const auto& p : {phi_eps(1.0), tf_cap(1.0), tf_exp(0.7)}) {
        const auto full = q4_full(p, G);
        const double rhs = q4_script(p, g).value + n0 * q3(p, g).value;
        CHECK(std::abs(full.value - rhs) <= 1e-8 * std::max(1.0, full.abs_scale));
      }
    }
  }

  TEST_CASE("transfer functional") {
    // Λ(φ_ε)(1,1) = φ_ε(2) + 1 − 2φ_ε(1) = 1 once ε < 1.
    const auto r = transfer_functional(RadialMeasure(0.0, {{1.0, 1.0}}), {0.5, 0.25, 0.125});
    CHECK(r.estimates.back() == doctest::Approx(1.0));
    CHECK(r.extrapolated == doctest::Approx(1.0));
    const auto grid = GridSpec::geometric(1e-3, 5.0, 1.1);
    const auto g = RadialMeasure::density_only(grid, std::vector<double>(grid.cells(), 1.0));
    const auto low = transfer_functional(g, {0.01, 0.005, 1e-4});
    CHECK(!low.warnings.empty());
    CHECK_THROWS(transfer_functional(g, {0.01, 0.02}));
  }

  TEST_CASE("functional record") {
    const auto j = functional_record("q3", "one", q3(tf_one(), RadialMeasure(0.0, {{1.0, 1.0}})), 1e-12);
    CHECK(j["functional"] == "q3");
    CHECK(j["phi"] == "one");
    CHECK(j.contains("parts"));
    CHECK(j["parts"].contains("atomic"));
  }
}
