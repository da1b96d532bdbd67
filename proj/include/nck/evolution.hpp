#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nck/measure.hpp"
#include "nck/regularized.hpp"
#include "nck/table.hpp"

namespace nck {

enum class HalfmomentConvention {
  regularized,    // ∫ x φₙ h over the whole lattice (the mass source of the regularized equation)
  exclude_proxy,  // ∫ √x h over [xc, ∞)
};

struct SolverConfig {
  int n = 16;
  double dx = 0.0;     // 0 selects 1/(4n)
  double x_max = 0.0;  // 0 selects 2(n+1)
  double dtau = 1e-3;
  bool adaptive = true;
  double local_tol = 1e-4;  // relative L¹ step-doubling error per step
  double dtau_min = 1e-9;
  double dtau_max = 2e-3;
  double tau_end = 1.0;
  double t_max = std::numeric_limits<double>::infinity();
  double xc = 0.0;                 // 0 selects 1/n
  double conservation_tol = 1e-6;  // per-step relative M₁ drift
  double record_every = 0.01;
  int mollify_n = 4;
  std::vector<double> alphas{2.0, 3.0};
  std::vector<double> envelope_r{0.0625, 0.125, 0.25, 0.5, 1.0, 2.0};
  std::vector<std::pair<double, double>> flux{{0.5, 0.0}, {0.5, 0.25}, {1.0, 0.0}, {1.0, 0.25}};
  HalfmomentConvention convention = HalfmomentConvention::regularized;
  int threads = 1;
  std::size_t ring_size = 64;

  // Fills defaults and checks ranges; throws std::invalid_argument naming the field.
  void finalize();
  std::size_t nodes() const;
};

struct StepDiagnostics {
  double tau = 0.0;
  double dtau = 0.0;
  double local_error = 0.0;
  double m1_drift = 0.0;
  int rejections = 0;
};

struct SolverState {
  double tau = 0.0;
  DensityFn h;
  double accumulated_halfmoment = 0.0;  // ∫₀^τ (subtraction rate) dσ
  double m_proxy = 0.0;                 // mass of h in [0, xc)
  double dtau_next = 0.0;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::deque<StepDiagnostics> ring;
};

class NonFiniteState : public std::runtime_error {
 public:
  NonFiniteState(const std::string& what, SolverState state) : std::runtime_error(what), state_(std::move(state)) {}
  const SolverState& state() const { return state_; }

 private:
  SolverState state_;
};

double subtraction_rate(const DensityFn& h, const SolverConfig& cfg);

SolverState initial_state(const RadialMeasure& h0, const SolverConfig& cfg);
// One accepted step of size at most `dtau_limit` (adaptive) or exactly min(dtau, dtau_limit) (fixed).
SolverState step(const SolverState& state, const SolverConfig& cfg,
                 double dtau_limit = std::numeric_limits<double>::infinity());

struct Record {
  double tau = 0.0;
  double M0_h = 0.0, M1_h = 0.0;
  std::vector<double> Ma_h;
  double m_proxy = 0.0;
  double A = 0.0;
  double rate = 0.0;
  double M0_g = 0.0, M1_g = 0.0, Mhalf_g = 0.0;
  std::vector<double> Ma_g;
  std::vector<double> cum;   // ∫_{[0,r]} h for r in envelope_r
  std::vector<double> flux;  // ∫_{[xc,R]} x^α h for (R, α) in flux
};

Record make_record(const SolverState& s, const SolverConfig& cfg);

struct HRun {
  std::vector<Record> records;
  SolverState final_state;
  std::vector<DensityFn> snapshots;  // h at each record when requested
};

HRun run_h(const RadialMeasure& h0, const SolverConfig& cfg, bool keep_snapshots = false);

struct HPoint {
  double tau = 0.0;
  double H_atom0 = 0.0;  // m_proxy − accumulated subtraction; may be negative
  double M0_g = 0.0;
  double M1_g = 0.0;
};

std::vector<HPoint> reconstruct_H(const std::vector<Record>& records);

struct TimeChange {
  std::vector<double> t;  // ξ(τ) per point; +inf at and beyond τ★
  double tau_star = std::numeric_limits<double>::infinity();
};

TimeChange time_change(const std::vector<HPoint>& H);
// ξ⁻¹ by linear interpolation; returns +inf when t is beyond the reachable range.
double inverse_time(const std::vector<HPoint>& H, const TimeChange& xi, double t);

// Trajectory table: one row per record, or one row per entry of t_grid when it is non-empty.
Table reconstruct_G(const std::vector<Record>& records, const TimeChange& xi, const SolverConfig& cfg,
                    const std::vector<double>& t_grid = {});

// Fills the "mu" column: n(t) − n(0) + ∫₀ᵗ n M_{1/2}(g) ds, accumulated in τ with the trapezoid rule.
void condensate_balance(Table& trajectory);

std::string alpha_label(double a);

}  // namespace nck
