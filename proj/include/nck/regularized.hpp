#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nck/measure.hpp"
#include "nck/testfn.hpp"

namespace nck {

// φₙ: √n on [0, 1/n], x^{−1/2} on (1/n, n], linear from n^{−1/2} to 0 on [n, n+1], 0 beyond.
struct Cutoff {
  int n = 1;
  static constexpr const char* version = "min-ramp/1";

  explicit Cutoff(int n_);
  double operator()(double x) const;
  double support() const { return n + 1.0; }
  double sup() const;
  double integral() const;             // ∫φₙ
  double integral_squared() const;     // ∫φₙ²
};

double cutoff_eval(int n, double x);

// Nodal density on the lattice xᵢ = i·dx with trapezoid weights (dx/2 at the origin).
class DensityFn {
 public:
  DensityFn() = default;
  DensityFn(double dx, std::vector<double> h);
  DensityFn(double dx, std::size_t nodes);

  double dx() const { return dx_; }
  std::size_t size() const { return h_.size(); }
  double x(std::size_t i) const { return dx_ * static_cast<double>(i); }
  double weight(std::size_t i) const { return i == 0 ? 0.5 * dx_ : dx_; }
  double x_max() const { return x(size() - 1); }
  double operator[](std::size_t i) const { return h_[i]; }
  double& operator[](std::size_t i) { return h_[i]; }
  const std::vector<double>& values() const { return h_; }
  std::vector<double>& values() { return h_; }

  double moment(double alpha) const;
  double mass_below(double xc) const;                  // Σ over nodes with x < xc
  double moment_from(double xc, double alpha) const;   // Σ over nodes with x ≥ xc
  double sup_norm() const;

  // Hat-function projection: preserves M₀ and M₁ of the measure exactly (mass beyond the last node is dropped).
  static DensityFn from_measure(const RadialMeasure& mu, double dx, std::size_t nodes);
  // Dual cells [xᵢ − dx/2, xᵢ + dx/2] ∩ [0, ∞) carrying the node masses.
  RadialMeasure to_measure() const;

 private:
  double dx_ = 1.0;
  std::vector<double> h_;
};

struct Operators {
  std::vector<double> K;  // gain from pair collisions
  std::vector<double> L;  // gain from the linear term
  std::vector<double> A;  // loss rate, so that J = K + L − h·A
};

Operators apply_operators(const DensityFn& h, const Cutoff& phi_n, int threads = 1);

DensityFn k_n(const DensityFn& h, int n, int threads = 1);
DensityFn l_n(const DensityFn& h, int n, int threads = 1);
DensityFn a_n(const DensityFn& h, int n, int threads = 1);
std::vector<double> j3n(const DensityFn& h, int n, int threads = 1);

// Lattice quadrature of ∬Λ(φ)φₙφₙ h h − ∫𝓛(φ)φₙ h with the exact 𝓛.
double q3n_tilde(const TestFunction& phi, const DensityFn& h, int n, int threads = 1);
// Σᵢ wᵢ φ(xᵢ) gᵢ on the lattice.
double lattice_pairing(const TestFunction& phi, const DensityFn& lattice, const std::vector<double>& g);
// ∫ x φₙ(x) h(x) dx on the lattice: the mass source of the regularized equation.
double regularized_halfmoment(const DensityFn& h, const Cutoff& phi_n);

}  // namespace nck
