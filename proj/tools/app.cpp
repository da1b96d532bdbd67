#include "app.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "nck/analysis.hpp"
#include "nck/regularized.hpp"
#include "nck/testfn.hpp"
#include "nck/weakops.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace nck::app {

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(join(path, key) + ": required field missing");
  }
  if (!v->is_number()) throw ConfigError(join(path, key) + ": expected a number");
  return v->get<double>();
}

int integer(const json& obj, const std::string& key, const std::string& path, std::optional<int> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(join(path, key) + ": required field missing");
  }
  if (!v->is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
  return v->get<int>();
}

std::string text(const json& obj, const std::string& key, const std::string& path,
                 std::optional<std::string> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(join(path, key) + ": required field missing");
  }
  if (!v->is_string()) throw ConfigError(join(path, key) + ": expected a string");
  return v->get<std::string>();
}

std::vector<double> numbers(const json& obj, const std::string& key, const std::string& path,
                            const std::vector<double>& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_array()) throw ConfigError(join(path, key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *v) {
    if (!e.is_number()) throw ConfigError(join(path, key) + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(join(path, it.key()) + ": unknown field");
}

GridSpec grid_from(const json& spec, const std::string& path, double x_max_default) {
  const double x_max = number(spec, "x_max", path, x_max_default);
  if (find(spec, "ratio")) {
    return GridSpec::geometric(number(spec, "x_first", path, 1e-4), x_max, number(spec, "ratio", path));
  }
  const int cells = integer(spec, "cells", path, 1000);
  if (cells < 1) throw ConfigError(join(path, "cells") + ": must be >= 1");
  return GridSpec::uniform(0.0, x_max, static_cast<std::size_t>(cells));
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << content;
}

}  // namespace

json load_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path.string() + ": cannot open");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

RadialMeasure build_initial_data(const json& spec) {
  const std::string path = "initial_data";
  if (!spec.is_object()) throw ConfigError(path + ": expected an object");
  const std::string type = text(spec, "type", path);
  RadialMeasure mu;
  if (type == "measure") {
    only_keys(spec, path, {"type", "measure", "normalize"});
    const json* m = find(spec, "measure");
    if (!m) throw ConfigError(path + ".measure: required field missing");
    try {
      mu = measure_from_json(*m);
    } catch (const std::exception& e) {
      throw ConfigError(path + ".measure: " + e.what());
    }
  } else if (type == "bose_einstein") {
    only_keys(spec, path, {"type", "beta", "mu", "c", "grid", "normalize"});
    const double beta = number(spec, "beta", path);
    const json grid = spec.value("grid", json::object());
    mu = bose_einstein(beta, number(spec, "mu", path, 0.0), number(spec, "c", path, 0.0),
                       grid_from(grid, path + ".grid", 40.0 / beta));
  } else if (type == "shell") {
    only_keys(spec, path, {"type", "atom0", "lo", "hi", "mass", "normalize"});
    const double lo = number(spec, "lo", path), hi = number(spec, "hi", path), mass = number(spec, "mass", path);
    if (!(hi > lo) || lo < 0) throw ConfigError(path + ": need 0 <= lo < hi");
    mu = RadialMeasure(number(spec, "atom0", path, 0.0), {}, GridSpec::uniform(lo, hi, 1), {mass / (hi - lo)});
  } else if (type == "power_exp") {
    only_keys(spec, path, {"type", "atom0", "power", "rate", "mass", "grid", "normalize"});
    const double p = number(spec, "power", path, 0.5), lam = number(spec, "rate", path, 1.0);
    const json gj = spec.value("grid", json::object());
    const GridSpec grid = grid_from(gj, path + ".grid", 12.0 / lam);
    std::vector<double> d(grid.cells());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double x = 0.5 * (grid.lo(i) + grid.hi(i));
      d[i] = std::pow(x, p) * std::exp(-lam * x);
    }
    RadialMeasure raw(0.0, {}, grid, d);
    const double mass = number(spec, "mass", path, 1.0);
    raw = rescale(raw, mass / moment(raw, 0.0), 1.0);
    mu = with_atom0(raw, number(spec, "atom0", path, 0.0));
  } else {
    throw ConfigError(path + ".type: unknown type '" + type + "'");
  }
  if (const json* nz = find(spec, "normalize")) {
    only_keys(*nz, path + ".normalize", {"N", "E"});
    mu = normalize(mu, number(*nz, "N", path + ".normalize"), number(*nz, "E", path + ".normalize"));
  }
  return mu;
}

RunConfig parse_run_config(const json& doc) {
  only_keys(doc, "", {"name", "description", "seed", "initial_data", "n", "grid", "dtau", "dtau_control", "local_tol",
                      "dtau_min", "dtau_max", "tau_end", "t_max", "xc", "alphas", "envelope_r", "flux", "halfmoment",
                      "conservation_tol", "record_every", "mollify", "threads", "checks", "t_grid"});
  RunConfig rc;
  rc.doc = doc;
  SolverConfig& s = rc.solver;
  if (!find(doc, "initial_data")) throw ConfigError("initial_data: required field missing");
  s.tau_end = number(doc, "tau_end", "");
  s.n = integer(doc, "n", "", s.n);
  if (const json* g = find(doc, "grid")) {
    only_keys(*g, "grid", {"dx", "x_max"});
    s.dx = number(*g, "dx", "grid", 0.0);
    s.x_max = number(*g, "x_max", "grid", 0.0);
  }
  s.dtau = number(doc, "dtau", "", s.dtau);
  const std::string control = text(doc, "dtau_control", "", "adaptive");
  if (control != "adaptive" && control != "fixed") throw ConfigError("dtau_control: expected 'adaptive' or 'fixed'");
  s.adaptive = control == "adaptive";
  s.local_tol = number(doc, "local_tol", "", s.local_tol);
  s.dtau_min = number(doc, "dtau_min", "", s.dtau_min);
  s.dtau_max = number(doc, "dtau_max", "", s.dtau_max);
  s.t_max = number(doc, "t_max", "", s.t_max);
  s.xc = number(doc, "xc", "", s.xc);
  s.alphas = numbers(doc, "alphas", "", s.alphas);
  s.envelope_r = numbers(doc, "envelope_r", "", s.envelope_r);
  if (const json* f = find(doc, "flux")) {
    if (!f->is_array()) throw ConfigError("flux: expected an array of [R, alpha] pairs");
    s.flux.clear();
    for (const auto& e : *f) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ConfigError("flux: expected an array of [R, alpha] pairs");
      s.flux.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
  }
  const std::string hm = text(doc, "halfmoment", "", "regularized");
  if (hm == "regularized") s.convention = HalfmomentConvention::regularized;
  else if (hm == "exclude_proxy") s.convention = HalfmomentConvention::exclude_proxy;
  else throw ConfigError("halfmoment: expected 'regularized' or 'exclude_proxy'");
  s.conservation_tol = number(doc, "conservation_tol", "", s.conservation_tol);
  s.record_every = number(doc, "record_every", "", s.record_every);
  s.mollify_n = integer(doc, "mollify", "", s.mollify_n);
  s.threads = integer(doc, "threads", "", s.threads);
  // Moments needed by the check suite are always recorded.
  for (double a : {2.0, 3.0})
    if (std::find(s.alphas.begin(), s.alphas.end(), a) == s.alphas.end()) s.alphas.push_back(a);
  try {
    s.finalize();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (const json* c = find(doc, "checks")) {
    only_keys(*c, "checks", {"slack", "conservation_tol", "uniform_tau_min", "decay_alpha", "decay_t0", "envelope_alpha",
                             "envelope_tau0", "suite"});
    CheckOptions& o = rc.checks;
    o.slack = number(*c, "slack", "checks", o.slack);
    o.conservation_tol = number(*c, "conservation_tol", "checks", o.conservation_tol);
    o.uniform_tau_min = number(*c, "uniform_tau_min", "checks", o.uniform_tau_min);
    o.decay_alpha = number(*c, "decay_alpha", "checks", o.decay_alpha);
    o.decay_t0 = number(*c, "decay_t0", "checks", o.decay_t0);
    o.envelope_alpha = number(*c, "envelope_alpha", "checks", o.envelope_alpha);
    o.envelope_tau0 = number(*c, "envelope_tau0", "checks", o.envelope_tau0);
    rc.suite = text(*c, "suite", "checks", "full");
    if (!(o.slack >= 1.0)) throw ConfigError("checks.slack: must be >= 1");
  }
  if (const json* tg = find(doc, "t_grid")) {
    only_keys(*tg, "t_grid", {"dt", "t_end"});
    const double dt = number(*tg, "dt", "t_grid"), te = number(*tg, "t_end", "t_grid");
    if (!(dt > 0) || !(te > 0)) throw ConfigError("t_grid: dt and t_end must be > 0");
    for (std::size_t k = 0; k * dt <= te * (1 + 1e-12); ++k) rc.t_grid.push_back(k * dt);
  }
  try {
    rc.initial = build_initial_data(doc["initial_data"]);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("initial_data: ") + e.what());
  }
  return rc;
}

std::string config_hash(const json& doc) {
  const std::string canon = doc.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(canon.data(), canon.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

json RunManifest::to_json() const {
  return {{"config_hash", config_hash},
          {"code_version", code_version},
          {"cutoff_version", cutoff_version},
          {"started", started},
          {"finished", finished},
          {"verdicts", {{"PASS", verdicts.pass}, {"FAIL", verdicts.fail}, {"NOT_APPLICABLE", verdicts.not_applicable}}}};
}

json options_json(const CheckOptions& o, const std::string& suite) {
  return {{"slack", o.slack},
          {"conservation_tol", o.conservation_tol},
          {"uniform_tau_min", o.uniform_tau_min},
          {"decay_alpha", o.decay_alpha},
          {"decay_t0", o.decay_t0},
          {"envelope_alpha", o.envelope_alpha},
          {"envelope_tau0", o.envelope_tau0},
          {"suite", suite}};
}

RunOutput execute(const RunConfig& cfg) {
  RunOutput out;
  out.manifest.config_hash = config_hash(cfg.doc);
  out.manifest.cutoff_version = Cutoff::version;
  out.manifest.started = utc_now();
  const HRun run = run_h(cfg.initial, cfg.solver);
  const auto H = reconstruct_H(run.records);
  const TimeChange xi = time_change(H);
  out.trajectory = reconstruct_G(run.records, xi, cfg.solver);
  if (!cfg.t_grid.empty()) out.trajectory_t = reconstruct_G(run.records, xi, cfg.solver, cfg.t_grid);
  out.reports = run_checks(out.trajectory, cfg.checks, cfg.suite);
  out.manifest.verdicts = summarize(out.reports);
  out.manifest.finished = utc_now();
  out.diagnostics = {{"steps", run.final_state.steps},
                     {"rejected", run.final_state.rejected},
                     {"tau_end", run.final_state.tau},
                     {"tau_star", std::isfinite(xi.tau_star) ? json(xi.tau_star) : json("inf")},
                     {"nodes", cfg.solver.nodes()},
                     {"n", cfg.solver.n},
                     {"dx", cfg.solver.dx},
                     {"xc", cfg.solver.xc}};
  return out;
}

std::string trajectory_csv(const Table& T, const std::string& hash, const SolverConfig& s) {
  std::ostringstream os;
  T.write_csv(os, {"manifest " + hash, "schema " + std::string(kTrajectorySchema),
                   "resolution n=" + std::to_string(s.n) + " dx=" + format_double(s.dx) + " xc=" + format_double(s.xc),
                   "cutoff " + std::string(Cutoff::version)});
  return os.str();
}

json bounds_json(const std::vector<BoundReport>& reports, const std::string& hash) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(r.to_json());
  return {{"manifest", hash}, {"reports", arr}};
}

namespace {

std::string plot_script(const std::string& hash, const std::string& title, const std::string& ylabel,
                        const std::vector<std::pair<std::string, std::string>>& series) {
  std::ostringstream os;
  os << "# manifest " << hash << "\n"
     << "set datafile separator ','\n"
     << "set title '" << title << "'\n"
     << "set xlabel '" << series.front().first << "'\n"
     << "set ylabel '" << ylabel << "'\n"
     << "set key outside\n"
     << "plot ";
  for (std::size_t i = 0; i < series.size(); ++i)
    os << (i ? ", \\\n     " : "") << "'../trajectory.csv' using '" << series[i].first << "':'" << series[i].second
       << "' with lines title '" << series[i].second << "'";
  os << "\n";
  return os.str();
}

}  // namespace

void write_outputs(const RunOutput& out, const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir / "plots");
  const std::string& hash = out.manifest.config_hash;
  std::string csv = trajectory_csv(out.trajectory, hash, cfg.solver);
  // Check options travel with the trajectory so nck-check reproduces the reports.
  csv.insert(csv.find('\n') + 1, "# checks " + options_json(cfg.checks, cfg.suite).dump() + "\n");
  write_file(dir / "trajectory.csv", csv);
  if (!cfg.t_grid.empty()) {
    std::ostringstream os;
    out.trajectory_t.write_csv(os, {"manifest " + hash});
    write_file(dir / "trajectory_t.csv", os.str());
  }
  json run = {{"manifest", out.manifest.to_json()},
              {"config", cfg.doc},
              {"checks", bounds_json(out.reports, hash)["reports"]},
              {"diagnostics", out.diagnostics}};
  write_file(dir / "run.json", run.dump(2) + "\n");
  write_file(dir / "bounds.json", bounds_json(out.reports, hash).dump(2) + "\n");
  write_file(dir / "plots" / "conservation.gp",
             plot_script(hash, "conservation", "moment", {{"tau", "M0_G"}, {"tau", "M1_h"}, {"tau", "M0_h"}}));
  write_file(dir / "plots" / "condensate.gp",
             plot_script(hash, "condensate", "value", {{"t", "n"}, {"t", "mu"}, {"t", "Mhalf_g"}}));
  write_file(dir / "plots" / "moments.gp", plot_script(hash, "moments", "moment", {{"tau", "M2_h"}, {"tau", "M3_h"}}));
}

fs::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("NCK_OUT_DIR"); env && *env) return env;
  return "out";
}

namespace {

RunConfig load_run_config(const GlobalFlags& flags) {
  if (flags.config.empty()) throw ConfigError("--config: required");
  RunConfig rc = parse_run_config(load_json(flags.config));
  if (flags.threads > 0) rc.solver.threads = flags.threads;
  if (flags.slack > 0) rc.checks.slack = flags.slack;
  return rc;
}

void dump_state(const NonFiniteState& e, const fs::path& dir) {
  fs::create_directories(dir);
  const SolverState& s = e.state();
  json j = {{"error", e.what()}, {"tau", s.tau}, {"dx", s.h.dx()}, {"h", s.h.values()}};
  json ring = json::array();
  for (const auto& d : s.ring) ring.push_back({{"tau", d.tau}, {"dtau", d.dtau}, {"local_error", d.local_error}});
  j["ring"] = ring;
  write_file(dir / "state_dump.json", j.dump() + "\n");
}

}  // namespace

int cmd_run(const GlobalFlags& flags, std::ostream& out, std::ostream& err) {
  const fs::path dir = resolve_out_dir(flags.out_dir);
  try {
    const RunConfig rc = load_run_config(flags);
    const RunOutput res = execute(rc);
    write_outputs(res, rc, dir);
    const auto& v = res.manifest.verdicts;
    out << "manifest " << res.manifest.config_hash << "\n";
    for (const auto& r : res.reports) out << to_string(r.verdict) << " " << r.name << "\n";
    out << v.pass << " pass, " << v.fail << " fail, " << v.not_applicable << " not applicable\n";
    return v.fail > 0 ? 2 : 0;
  } catch (const NonFiniteState& e) {
    dump_state(e, dir);
    err << "error: " << e.what() << " (state written to " << (dir / "state_dump.json").string() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_sweep(const GlobalFlags& flags, std::ostream& out, std::ostream& err) {
  const fs::path dir = resolve_out_dir(flags.out_dir);
  json doc;
  try {
    if (flags.config.empty()) throw ConfigError("--config: required");
    doc = load_json(flags.config);
    only_keys(doc, "", {"base", "sweep"});
    if (!find(doc, "base")) throw ConfigError("base: required field missing");
    if (!find(doc, "sweep")) throw ConfigError("sweep: required field missing");
    only_keys(doc["sweep"], "sweep", {"n", "mesh", "xc", "dtau"});
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const json& sw = doc["sweep"];
  auto axis = [&](const char* key) {
    std::vector<json> v;
    if (const json* a = find(sw, key)) {
      if (!a->is_array() || a->empty()) throw ConfigError(std::string("sweep.") + key + ": expected a non-empty array");
      for (const auto& e : *a) v.push_back(e);
    } else {
      v.push_back(json());
    }
    return v;
  };
  std::vector<json> cells;
  try {
    for (const auto& n : axis("n"))
      for (const auto& mesh : axis("mesh"))
        for (const auto& xc : axis("xc"))
          for (const auto& dt : axis("dtau")) {
            json c = doc["base"];
            if (!n.is_null()) c["n"] = n;
            if (!mesh.is_null()) c["grid"]["dx"] = mesh;
            if (!xc.is_null()) c["xc"] = xc;
            if (!dt.is_null()) c["dtau"] = dt;
            cells.push_back(std::move(c));
          }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  struct CellResult {
    int code = 1;
    std::string message;
    double n = 0, dx = 0, xc = 0, dtau = 0;
    double energy_drift = NAN, mass_drift = NAN, tau_star = NAN, n_last = NAN;
    int fails = 0;
  };
  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min<int>(flags.threads > 0 ? flags.threads : 1, static_cast<int>(cells.size())));
  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      CellResult& r = results[i];
      char name[32];
      std::snprintf(name, sizeof name, "cell_%03zu", i);
      try {
        RunConfig rc = parse_run_config(cells[i]);
        if (flags.slack > 0) rc.checks.slack = flags.slack;
        r.n = rc.solver.n;
        r.dx = rc.solver.dx;
        r.xc = rc.solver.xc;
        r.dtau = rc.solver.dtau;
        const RunOutput res = execute(rc);
        write_outputs(res, rc, dir / name);
        const Table& T = res.trajectory;
        const double E = T.col("M1_h")[0], N = T.col("M0_G")[0];
        r.energy_drift = 0;
        r.mass_drift = 0;
        for (std::size_t k = 0; k < T.rows(); ++k) {
          r.energy_drift = std::max(r.energy_drift, std::abs(T.col("M1_h")[k] - E) / E);
          if (T.col("in_G")[k] != 0) r.mass_drift = std::max(r.mass_drift, std::abs(T.col("M0_G")[k] - N) / N);
        }
        r.tau_star = res.diagnostics["tau_star"].is_number() ? res.diagnostics["tau_star"].get<double>() : INFINITY;
        r.n_last = T.col("n").back();
        r.fails = res.manifest.verdicts.fail;
        r.code = r.fails > 0 ? 2 : 0;
      } catch (const std::exception& e) {
        r.code = 1;
        r.message = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  fs::create_directories(dir);
  Table S;
  for (const char* c : {"cell", "n", "dx", "xc", "dtau", "exit", "energy_drift", "mass_drift", "tau_star", "n_last", "fails"})
    S.add_column(c);
  int worst = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    S.push_row({double(i), r.n, r.dx, r.xc, r.dtau, double(r.code), r.energy_drift, r.mass_drift, r.tau_star, r.n_last,
                double(r.fails)});
    if (r.code == 1) err << "cell_" << i << ": " << r.message << "\n";
    if (r.code == 1 || (r.code == 2 && worst == 0)) worst = r.code;
  }
  std::ostringstream os;
  S.write_csv(os, {"manifest " + config_hash(doc)});
  write_file(dir / "summary.csv", os.str());
  out << cells.size() << " cells written to " << dir.string() << "\n";
  return worst;
}

int cmd_check(const std::string& trajectory, const std::string& suite, const GlobalFlags& flags, std::ostream& out,
              std::ostream& err) {
  try {
    std::ifstream f(trajectory);
    if (!f) throw std::runtime_error(trajectory + ": cannot open");
    std::vector<std::string> comments;
    const Table T = Table::read_csv(f, &comments);
    std::string hash;
    CheckOptions o;
    std::string stored_suite = "full";
    for (const auto& c : comments) {
      if (c.rfind("manifest ", 0) == 0) hash = c.substr(9);
      if (c.rfind("checks ", 0) == 0) {
        const json j = json::parse(c.substr(7));
        o.slack = j.value("slack", o.slack);
        o.conservation_tol = j.value("conservation_tol", o.conservation_tol);
        o.uniform_tau_min = j.value("uniform_tau_min", o.uniform_tau_min);
        o.decay_alpha = j.value("decay_alpha", o.decay_alpha);
        o.decay_t0 = j.value("decay_t0", o.decay_t0);
        o.envelope_alpha = j.value("envelope_alpha", o.envelope_alpha);
        o.envelope_tau0 = j.value("envelope_tau0", o.envelope_tau0);
        stored_suite = j.value("suite", stored_suite);
      }
    }
    if (hash.empty()) throw std::runtime_error(trajectory + ": no manifest line; refusing an orphan trajectory");
    if (flags.slack > 0) o.slack = flags.slack;
    const auto reports = run_checks(T, o, suite.empty() ? stored_suite : suite);
    const fs::path dir = flags.out_dir.empty() ? fs::path(trajectory).parent_path() : resolve_out_dir(flags.out_dir);
    if (!dir.empty()) fs::create_directories(dir);
    write_file(dir / "bounds.json", bounds_json(reports, hash).dump(2) + "\n");
    for (const auto& r : reports) out << to_string(r.verdict) << " " << r.name << "\n";
    return summarize(reports).fail > 0 ? 2 : 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

json functionals_json(const RadialMeasure& G, const std::string& phi_name) {
  const TestFunction phi = tf_from_name(phi_name);
  const auto [n0, g] = split_atom(G);
  const QuadOptions opt;
  const FunctionalResult quad = q3_quadratic(phi, g, opt);
  const FunctionalResult lin = q3_linear(phi, g, opt);
  const FunctionalResult lint = q3_linear_tilde(phi, g, opt);
  const FunctionalResult q = q3(phi, g, opt);
  const FunctionalResult qt = q3_tilde(phi, g, opt);
  json j = {{"phi", phi.name},
            {"atom0", n0},
            {"M_half", moment(g, 0.5)},
            {"identity_residual", q3_identity_residual(phi, g, opt)},
            {"functionals", json::array({functional_record("q3_quadratic", phi.name, quad, 0.0),
                                         functional_record("q3_linear", phi.name, lin, 0.0),
                                         functional_record("q3_linear_tilde", phi.name, lint, 0.0),
                                         functional_record("q3", phi.name, q, 0.0),
                                         functional_record("q3_tilde", phi.name, qt, 0.0)})}};
  if (G.is_atomic()) {
    const FunctionalResult full = q4_full(phi, G, opt);
    const FunctionalResult script = q4_script(phi, g, opt);
    j["functionals"].push_back(functional_record("q4_full", phi.name, full, opt.q4_tol));
    j["functionals"].push_back(functional_record("q4_script", phi.name, script, opt.q4_tol));
    j["decomposition_residual"] = full.value - script.value - n0 * q.value;
  }
  return j;
}

int cmd_functionals(const std::string& measure_path, const std::string& phi, std::ostream& out, std::ostream& err) {
  try {
    const json doc = load_json(measure_path);
    RadialMeasure G;
    try {
      G = measure_from_json(doc);
    } catch (const std::exception& e) {
      throw ConfigError(measure_path + ": malformed measure: " + e.what());
    }
    out << functionals_json(G, phi).dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

json constants_json() {
  json uni = json::array();
  for (double a : {3.0, 4.0, 5.0})
    for (double E : {0.2, 1.0, 6.0}) {
      const auto u = uniform_moment_constants(a, E);
      uni.push_back({{"alpha", a}, {"E", E}, {"C", u.C}, {"gamma", u.gamma}, {"residual", u.residual}});
    }
  json thr = json::array();
  for (double a : {1.25, 1.5, 1.75, 2.0, 2.5, 3.0}) thr.push_back({{"alpha", a}, {"C_alpha", decay_threshold(a)}});
  json t0 = json::array();
  for (double d : {0.25, 0.5, 0.75, 1.0}) t0.push_back({{"delta", d}, {"T0", concentration_time(d)}});
  json ts = json::array();
  for (double a : {0.25, 0.5, 0.75}) ts.push_back({{"alpha", a}, {"T_star", t_star(a)}});
  const double b = critical_constant_b();
  return {{"b", b},
          {"limit_ratio", std::pow(std::log(16.0), 2.0 / 3.0) / b},
          {"zeta_3_2", kZeta32},
          {"zeta_5_2", kZeta52},
          {"uniform_moment", uni},
          {"decay_threshold", thr},
          {"concentration_time", t0},
          {"t_star", ts}};
}

int cmd_constants(std::ostream& out) {
  out << constants_json().dump(2) << "\n";
  return 0;
}

namespace {

void add_global(CLI::App& app, GlobalFlags& g) {
  app.add_option("--config", g.config, "Run or sweep configuration (JSON)");
  app.add_option("--out-dir", g.out_dir, "Output directory (default $NCK_OUT_DIR or ./out)");
  app.add_option("--threads", g.threads, "Worker threads");
  app.add_option("--slack", g.slack, "Multiplicative slack for inequality checks");
}

}  // namespace

int main_nck(int argc, char** argv) {
  CLI::App app{"Condensate kinetic solver and bound checker"};
  app.require_subcommand(1);
  GlobalFlags g;
  add_global(app, g);
  auto* run = app.add_subcommand("run", "Evolve one configuration and check it");
  auto* sweep = app.add_subcommand("sweep", "Cartesian sweep over n, mesh, xc, dtau");
  auto* check = app.add_subcommand("check", "Run a check suite on a trajectory.csv");
  std::string traj, suite;
  check->add_option("trajectory", traj, "trajectory.csv")->required();
  check->add_option("--suite", suite, "full or conservation");
  auto* fn = app.add_subcommand("functionals", "Evaluate the weak-form functionals of a measure");
  std::string measure, phi;
  fn->add_option("measure", measure, "measure JSON")->required();
  fn->add_option("phi", phi, "test function name")->required();
  app.add_subcommand("constants", "Print the closed-form constants");
  for (auto* sub : {run, sweep, check}) add_global(*sub, g);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (*run) return cmd_run(g, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(g, std::cout, std::cerr);
  if (*check) return cmd_check(traj, suite, g, std::cout, std::cerr);
  if (*fn) return cmd_functionals(measure, phi, std::cout, std::cerr);
  return cmd_constants(std::cout);
}

int main_check(int argc, char** argv) {
  CLI::App app{"Check a trajectory against the closed-form bounds"};
  GlobalFlags g;
  std::string traj, suite;
  app.add_option("trajectory", traj, "trajectory.csv")->required();
  app.add_option("--suite", suite, "full or conservation");
  app.add_option("--out-dir", g.out_dir, "Where bounds.json goes (default: next to the trajectory)");
  app.add_option("--slack", g.slack, "Multiplicative slack");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  return cmd_check(traj, suite, g, std::cout, std::cerr);
}

}  // namespace nck::app
