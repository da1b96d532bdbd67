#include "nck/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nck {

TestFunction tf_one() {
  TestFunction t;
  t.name = "one";
  t.f = [](double) { return 1.0; };
  t.F = [](double x) { return x; };
  t.d1 = [](double) { return 0.0; };
  t.d2 = [](double) { return 0.0; };
  t.bounded = t.nonnegative = t.convex = t.concave = t.nonincreasing = t.nondecreasing = true;
  t.sup = 1.0;
  t.lipschitz = 0.0;
  t.d2_sup = 0.0;
  return t;
}

TestFunction tf_x() {
  TestFunction t;
  t.name = "x";
  t.f = [](double x) { return x; };
  t.F = [](double x) { return 0.5 * x * x; };
  t.d1 = [](double) { return 1.0; };
  t.d2 = [](double) { return 0.0; };
  t.nonnegative = t.convex = t.concave = t.nondecreasing = true;
  t.lipschitz = 1.0;
  t.d2_sup = 0.0;
  return t;
}

TestFunction tf_pow(double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("pow: exponent must be > 0");
  TestFunction t;
  t.name = "pow:" + std::to_string(alpha);
  t.f = [alpha](double x) { return std::pow(x, alpha); };
  t.F = [alpha](double x) { return std::pow(x, alpha + 1) / (alpha + 1); };
  t.d1 = [alpha](double x) { return alpha * std::pow(x, alpha - 1); };
  t.d2 = [alpha](double x) { return alpha * (alpha - 1) * std::pow(x, alpha - 2); };
  t.nonnegative = t.nondecreasing = true;
  t.convex = alpha >= 1;
  t.concave = alpha <= 1;
  if (alpha == 1) {
    t.lipschitz = 1;
    t.d2_sup = 0;
  }
  if (alpha == 2) t.d2_sup = 2;
  return t;
}

TestFunction phi_eps(double eps) {
  if (!(eps > 0)) throw std::invalid_argument("phi_eps: eps must be > 0");
  TestFunction t;
  t.name = "phi_eps:" + std::to_string(eps);
  t.f = [eps](double x) {
    const double s = 1.0 - x / eps;
    return s > 0 ? s * s : 0.0;
  };
  t.F = [eps](double x) {
    if (x >= eps) return eps / 3.0;
    const double s = 1.0 - x / eps;
    return eps / 3.0 * (1.0 - s * s * s);
  };
  t.d1 = [eps](double x) { return x < eps ? -2.0 / eps * (1.0 - x / eps) : 0.0; };
  t.d2 = [eps](double x) { return x < eps ? 2.0 / (eps * eps) : 0.0; };
  t.bounded = t.nonnegative = t.convex = t.nonincreasing = true;
  t.sup = 1.0;
  t.lipschitz = 2.0 / eps;
  t.d2_sup = 2.0 / (eps * eps);
  t.kinks = {eps};
  return t;
}

// x on [0,k), k + (x−k) − (x−k)²/4 on [k,k+2], k+1 beyond: concave, C¹, slope ≤ 1.
TestFunction tf_cap(double k) {
  if (!(k > 0)) throw std::invalid_argument("cap: k must be > 0");
  TestFunction t;
  t.name = "cap:" + std::to_string(k);
  t.f = [k](double x) {
    if (x < k) return x;
    if (x < k + 2) {
      const double s = x - k;
      return k + s - 0.25 * s * s;
    }
    return k + 1.0;
  };
  t.F = [k](double x) {
    if (x < k) return 0.5 * x * x;
    const double base = 0.5 * k * k;
    if (x < k + 2) {
      const double s = x - k;
      return base + k * s + 0.5 * s * s - s * s * s / 12.0;
    }
    const double mid = base + 2.0 * k + 2.0 - 8.0 / 12.0;
    return mid + (k + 1.0) * (x - k - 2.0);
  };
  t.d1 = [k](double x) {
    if (x < k) return 1.0;
    if (x < k + 2) return 1.0 - 0.5 * (x - k);
    return 0.0;
  };
  t.d2 = [k](double x) { return (x >= k && x < k + 2) ? -0.5 : 0.0; };
  t.bounded = t.nonnegative = t.concave = t.nondecreasing = true;
  t.sup = k + 1.0;
  t.lipschitz = 1.0;
  t.d2_sup = 0.5;
  t.kinks = {k, k + 2};
  return t;
}

TestFunction tf_exp(double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("exp: rate must be > 0");
  TestFunction t;
  t.name = "exp:" + std::to_string(lambda);
  t.f = [lambda](double x) { return std::exp(-lambda * x); };
  t.F = [lambda](double x) { return -std::expm1(-lambda * x) / lambda; };
  t.d1 = [lambda](double x) { return -lambda * std::exp(-lambda * x); };
  t.d2 = [lambda](double x) { return lambda * lambda * std::exp(-lambda * x); };
  t.bounded = t.nonnegative = t.convex = t.nonincreasing = true;
  t.sup = 1.0;
  t.lipschitz = lambda;
  t.d2_sup = lambda * lambda;
  return t;
}

TestFunction tf_combine(double a, const TestFunction& phi, double b, const TestFunction& psi) {
  if (a < 0 || b < 0) throw std::invalid_argument("combine: coefficients must be >= 0");
  TestFunction t;
  t.name = std::to_string(a) + "*" + phi.name + "+" + std::to_string(b) + "*" + psi.name;
  t.f = [a, b, f = phi.f, g = psi.f](double x) { return a * f(x) + b * g(x); };
  t.F = [a, b, f = phi.F, g = psi.F](double x) { return a * f(x) + b * g(x); };
  if (phi.d1 && psi.d1) t.d1 = [a, b, f = phi.d1, g = psi.d1](double x) { return a * f(x) + b * g(x); };
  if (phi.d2 && psi.d2) t.d2 = [a, b, f = phi.d2, g = psi.d2](double x) { return a * f(x) + b * g(x); };
  t.bounded = phi.bounded && psi.bounded;
  t.nonnegative = phi.nonnegative && psi.nonnegative;
  t.convex = phi.convex && psi.convex;
  t.concave = phi.concave && psi.concave;
  t.nonincreasing = phi.nonincreasing && psi.nonincreasing;
  t.nondecreasing = phi.nondecreasing && psi.nondecreasing;
  t.sup = a * phi.sup + b * psi.sup;
  t.lipschitz = a * phi.lipschitz + b * psi.lipschitz;
  t.d2_sup = a * phi.d2_sup + b * psi.d2_sup;
  t.kinks = phi.kinks;
  t.kinks.insert(t.kinks.end(), psi.kinks.begin(), psi.kinks.end());
  std::sort(t.kinks.begin(), t.kinks.end());
  return t;
}

TestFunction tf_from_name(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  double arg = 0.0;
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      arg = std::stod(spec.substr(colon + 1), &used);
      if (used != spec.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument("test function: bad parameter in '" + spec + "'");
    }
  }
  const bool has_arg = colon != std::string::npos;
  if (head == "one" && !has_arg) return tf_one();
  if (head == "x" && !has_arg) return tf_x();
  if (has_arg) {
    TestFunction t;
    if (head == "pow") t = tf_pow(arg);
    else if (head == "phi_eps") t = phi_eps(arg);
    else if (head == "cap") t = tf_cap(arg);
    else if (head == "exp") t = tf_exp(arg);
    else throw std::invalid_argument("unknown test function '" + spec + "'");
    t.name = spec;
    return t;
  }
  throw std::invalid_argument("unknown test function '" + spec + "'");
}

double lambda_kernel(const TestFunction& phi, double x, double y) {
  const double hi = std::max(x, y), lo = std::min(x, y);
  return phi(hi + lo) + phi(hi - lo) - 2.0 * phi(hi);
}

double ell_kernel(const TestFunction& phi, double x) { return x * phi(x) - 2.0 * phi.antiderivative(x); }

double ell0_kernel(const TestFunction& phi, double x) {
  return x * (phi(0.0) + phi(x)) - 2.0 * phi.antiderivative(x);
}

double delta_phi(const TestFunction& phi, double x1, double x2, double x3) {
  const double x4 = std::max(0.0, x1 + x2 - x3);
  return phi(x4) + phi(x3) - phi(x2) - phi(x1);
}

void audit(const TestFunction& phi, std::mt19937_64& rng, int samples, double x_max) {
  std::uniform_real_distribution<double> U(1e-3, x_max);
  auto fail = [&](const std::string& what) { throw std::logic_error("audit of '" + phi.name + "' failed: " + what); };
  if (phi.antiderivative(0.0) != 0.0) fail("antiderivative(0) != 0");
  const double scale = std::isfinite(phi.sup) ? std::max(1.0, phi.sup) : 1.0;
  for (int s = 0; s < samples; ++s) {
    const double a = U(rng), b = U(rng);
    const double x = a;
    const double h = 1e-5 * std::max(1.0, x);
    const double fd = (phi.antiderivative(x + h) - phi.antiderivative(x - h)) / (2.0 * h);
    const double ref = phi(x);
    const double curv = std::isfinite(phi.d2_sup) ? phi.d2_sup : 1.0;
    if (std::abs(fd - ref) > 1e-6 * std::max({1.0, std::abs(ref), scale}) + h * curv)
      fail("antiderivative inconsistent with evaluator");
    const double fa = phi(a), fb = phi(b), fm = phi(0.5 * (a + b));
    const double tol = 1e-12 * std::max({1.0, std::abs(fa), std::abs(fb)});
    if (phi.nonnegative && (fa < -tol || fb < -tol)) fail("nonnegative");
    if (phi.convex && fm > 0.5 * (fa + fb) + tol) fail("convex");
    if (phi.concave && fm < 0.5 * (fa + fb) - tol) fail("concave");
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (phi.nonincreasing && phi(hi) > phi(lo) + tol) fail("nonincreasing");
    if (phi.nondecreasing && phi(hi) < phi(lo) - tol) fail("nondecreasing");
    if (std::isfinite(phi.lipschitz) && std::abs(fa - fb) > phi.lipschitz * std::abs(a - b) * (1 + 1e-12) + tol)
      fail("lipschitz constant");
    if (std::isfinite(phi.sup) && (std::abs(fa) > phi.sup + tol || std::abs(fb) > phi.sup + tol)) fail("sup bound");
  }
}

}  // namespace nck
