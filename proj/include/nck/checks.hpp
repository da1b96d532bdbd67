#pragma once

#include <string>
#include <vector>

#include "nck/analysis.hpp"
#include "nck/table.hpp"

namespace nck {

struct CheckOptions {
  double slack = 1.01;
  double conservation_tol = 1e-3;  // relative drift allowed for M₁(h) and M₀(G)
  double uniform_tau_min = 0.1;
  double decay_alpha = 2.0;
  double decay_t0 = -1.0;  // negative selects 10% of the last finite t
  double envelope_alpha = 0.5;
  double envelope_tau0 = 0.1;
};

// Pure function of a trajectory table. Suites: "full", "conservation".
std::vector<BoundReport> run_checks(const Table& trajectory, const CheckOptions& opts, const std::string& suite = "full");

struct VerdictSummary {
  int pass = 0, fail = 0, not_applicable = 0;
};
VerdictSummary summarize(const std::vector<BoundReport>& reports);

}  // namespace nck
