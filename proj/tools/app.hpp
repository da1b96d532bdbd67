#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nck/checks.hpp"
#include "nck/evolution.hpp"
#include "nck/measure.hpp"

namespace nck::app {

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr const char* kTrajectorySchema = "nck-trajectory/1";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  nlohmann::json doc;  // the parsed document, echoed into run.json
  RadialMeasure initial;
  SolverConfig solver;
  CheckOptions checks;
  std::string suite = "full";
  std::vector<double> t_grid;
};

nlohmann::json load_json(const std::filesystem::path& path);
RunConfig parse_run_config(const nlohmann::json& doc);
RadialMeasure build_initial_data(const nlohmann::json& spec);

// SHA-256 of the canonical (key-sorted, compact) serialization.
std::string config_hash(const nlohmann::json& doc);

struct RunManifest {
  std::string config_hash;
  std::string code_version = kCodeVersion;
  std::string cutoff_version;
  std::string started;
  std::string finished;
  VerdictSummary verdicts;
  nlohmann::json to_json() const;
};

struct RunOutput {
  Table trajectory;
  Table trajectory_t;  // resampled on RunConfig::t_grid when it is set
  std::vector<BoundReport> reports;
  RunManifest manifest;
  nlohmann::json diagnostics;
};

// The whole pipeline without touching the filesystem.
RunOutput execute(const RunConfig& cfg);
// Writes trajectory.csv, run.json, bounds.json and plots/*.gp into dir.
void write_outputs(const RunOutput& out, const RunConfig& cfg, const std::filesystem::path& dir);

std::string trajectory_csv(const Table& T, const std::string& hash, const SolverConfig& solver);
nlohmann::json bounds_json(const std::vector<BoundReport>& reports, const std::string& hash);

struct GlobalFlags {
  std::string config;
  std::string out_dir;
  int threads = 0;
  double slack = 0.0;  // 0 keeps the config value
};

std::filesystem::path resolve_out_dir(const std::string& flag);

int cmd_run(const GlobalFlags& flags, std::ostream& out, std::ostream& err);
int cmd_sweep(const GlobalFlags& flags, std::ostream& out, std::ostream& err);
int cmd_check(const std::string& trajectory, const std::string& suite, const GlobalFlags& flags, std::ostream& out,
              std::ostream& err);
int cmd_functionals(const std::string& measure_path, const std::string& phi, std::ostream& out, std::ostream& err);
nlohmann::json functionals_json(const RadialMeasure& g, const std::string& phi);
int cmd_constants(std::ostream& out);
nlohmann::json constants_json();

int main_nck(int argc, char** argv);
int main_check(int argc, char** argv);

}  // namespace nck::app
