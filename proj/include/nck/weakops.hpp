#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nck/measure.hpp"
#include "nck/testfn.hpp"

namespace nck {

struct QuadOptions {
  int gauss_points = 4;         // per cell and direction for density pairs
  int linear_gauss_points = 8;  // per cell for the linear functionals
  int threads = 1;
  double q4_tol = 1e-13;        // relative tolerance of the x₃ quadrature in 𝒬₄
};

struct FunctionalResult {
  double value = 0.0;
  double abs_scale = 0.0;  // same integral with every kernel term in absolute value
  double atomic = 0.0;
  double density = 0.0;
  double cross = 0.0;
};

FunctionalResult q3_quadratic(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt = {});
FunctionalResult q3_linear(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt = {});
FunctionalResult q3_linear_tilde(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt = {});
FunctionalResult q3(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt = {});
FunctionalResult q3_tilde(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt = {});

// |q3 − (q3_tilde − φ(0) M_{1/2}(g))| divided by the combined absolute scale.
double q3_identity_residual(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt = {});

double weight_W(double x1, double x2, double x3);
double phi_capital(const TestFunction& phi, double x1, double x2, double x3);

// Atomic measures only; q4_full accepts an atom at 0, q4_script requires atom0 = 0.
FunctionalResult q4_full(const TestFunction& phi, const RadialMeasure& G, const QuadOptions& opt = {});
FunctionalResult q4_script(const TestFunction& phi, const RadialMeasure& g, const QuadOptions& opt = {});

struct TransferResult {
  std::vector<double> eps;
  std::vector<double> estimates;
  double extrapolated = 0.0;
  bool converged = true;
  std::vector<std::string> warnings;
};

TransferResult transfer_functional(const RadialMeasure& g, const std::vector<double>& eps_sequence,
                                   const QuadOptions& opt = {});

nlohmann::json functional_record(const std::string& functional, const std::string& phi,
                                 const FunctionalResult& r, double tol);

}  // namespace nck
