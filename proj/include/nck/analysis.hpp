#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nck/table.hpp"

namespace nck {

// ζ(3/2) and ζ(5/2) to 12 digits, from standard tables of the Riemann zeta function.
inline constexpr double kZeta32 = 2.612375348685;
inline constexpr double kZeta52 = 1.341487257250;

enum class Verdict { PASS, FAIL, NOT_APPLICABLE };
std::string to_string(Verdict v);

struct BoundReport {
  std::string name;
  std::string ref;  // short tag of the inequality family
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 1.0;
  Verdict verdict = Verdict::NOT_APPLICABLE;
  double location = 0.0;
  std::string location_kind = "tau";
  std::string note;

  nlohmann::json to_json() const;
};

// PASS iff lhs ≤ slack·rhs.
BoundReport make_report(std::string name, std::string ref, double lhs, double rhs, double slack, double location,
                        std::string location_kind);

double moment_bound_apriori(double M_alpha0, double E, double alpha, double tau);

struct UniformConstants {
  double C = 0.0;
  double gamma = 0.0;
  double residual = 0.0;  // |LHS − RHS| / max(LHS, RHS) of the defining equation at C
};
UniformConstants uniform_moment_constants(double alpha, double E);
double uniform_moment_bound(double alpha, double E, double tau);

double decay_threshold(double alpha);
double critical_constant_b();
double temperature_ratio(double N, double E);
bool decay_condition(double N, double E, double alpha);
// Denominator of the decay constant; positive exactly when decay_condition holds.
double decay_denominator(double N, double E, double alpha);
std::optional<double> decay_integral_bound(double N, double E, double alpha, double M_alpha_t0);

double origin_flux_bound(double N, double E, double R, double alpha, double int_n_dt);
double origin_flux_bound_tau(double N, double E, double R, double alpha, double tau1, double tau2);

double concentration_time(double delta);
double t_star(double alpha);

// Descriptive power-law floor ∫_{[0,r]} h ≥ C r^α over the cum_* columns; never FAIL.
BoundReport lower_envelope_check(const Table& trajectory, double alpha, double tau0);

}  // namespace nck
