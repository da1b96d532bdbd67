#pragma once

#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace nck {

// A scalar test function on [0, ∞) with an exact antiderivative x ↦ ∫₀ˣ φ.
struct TestFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> F;
  std::function<double(double)> d1;  // optional
  std::function<double(double)> d2;  // optional

  bool bounded = false;
  bool nonnegative = false;
  bool convex = false;
  bool concave = false;
  bool nonincreasing = false;
  bool nondecreasing = false;

  double sup = std::numeric_limits<double>::infinity();         // ‖φ‖∞
  double lipschitz = std::numeric_limits<double>::infinity();   // ‖φ′‖∞
  double d2_sup = std::numeric_limits<double>::infinity();      // ‖φ″‖∞
  std::vector<double> kinks;  // points where φ is not C²

  double operator()(double x) const { return f(x); }
  double antiderivative(double x) const { return F(x); }
};

TestFunction tf_one();
TestFunction tf_x();
TestFunction tf_pow(double alpha);
TestFunction phi_eps(double eps);
TestFunction tf_cap(double k);
TestFunction tf_exp(double lambda);
// a·φ + b·ψ with a, b ≥ 0; shape flags are kept where both operands share them.
TestFunction tf_combine(double a, const TestFunction& phi, double b, const TestFunction& psi);

// "one", "x", "pow:α", "phi_eps:ε", "cap:k", "exp:λ".
TestFunction tf_from_name(const std::string& spec);

double lambda_kernel(const TestFunction& phi, double x, double y);
double ell_kernel(const TestFunction& phi, double x);
double ell0_kernel(const TestFunction& phi, double x);
double delta_phi(const TestFunction& phi, double x1, double x2, double x3);

// Spot-check the caller-asserted flags and the antiderivative; throws std::logic_error on failure.
void audit(const TestFunction& phi, std::mt19937_64& rng, int samples = 200, double x_max = 20.0);

}  // namespace nck
