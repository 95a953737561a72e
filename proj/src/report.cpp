#include "blens/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "blens/log.hpp"

namespace blens {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  return hash;
}

json solver_json(const SolverConfig& s) {
  return json{{"tol_residual", s.tol_residual},
              {"max_iters", s.max_iters},
              {"step_limit_v", s.step_limit_v},
              {"homotopy_steps", s.homotopy_steps},
              {"smoothing_delta", s.smoothing_delta},
              {"epsilon_support", s.epsilon_support},
              {"gamma", s.gamma},
              {"c_high", s.c_high},
              {"c_low", s.c_low},
              {"max_toggle_rounds", s.max_toggle_rounds},
              {"homotopy_anchor", s.homotopy_anchor},
              {"homotopy_bisections", s.homotopy_bisections}};
}

json config_json(const RunConfig& config) {
  return json{{"case_path", config.case_path},
              {"factor_spec", config.factor_spec},
              {"mode", config.mode},
              {"jobs", config.jobs},
              {"scaling_csv", config.scaling_csv_path},
              {"scale_generation", config.scale_generation},
              {"solver", solver_json(config.solver)}};
}

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged:
      return "Converged";
    case SolveStatus::Diverged:
      return "Diverged";
    default:
      return "MaxIters";
  }
}

json scenario_json(const ScenarioOutcome& o, double base_mva) {
  json s{{"t", o.index},
         {"load_factor", o.load_factor},
         {"solved", o.solved},
         {"wall_seconds", o.wall_seconds}};
  if (!o.solved) {
    s["error"] = o.error;
    return s;
  }
  const SolveResult& result = o.solution.result;
  s["status"] = status_name(result.status);
  s["iterations"] = result.iterations;
  s["toggle_rounds"] = o.solution.toggle_rounds;
  s["objective"] = result.objective;
  s["residual_norm"] = result.residual_norm;
  const double total = result.compensation.total_magnitude();
  s["total_compensation_pu"] = total;
  s["total_compensation_mva"] = total * base_mva;
  s["support_size"] = o.solution.support.size();
  json support = json::array();
  for (int bus : o.solution.support.bus_ids) {
    const double mag = o.solution.support.magnitudes.at(bus);
    support.push_back(
        json{{"location", bus}, {"magnitude_pu", mag}, {"magnitude_mva", mag * base_mva}});
  }
  s["support"] = support;
  return s;
}

json run_json(const MultiPeriodResult& result, double base_mva) {
  json r;
  r["mode"] = sweep_mode_name(result.mode);
  r["all_solved"] = result.all_solved();
  r["failed_index"] = result.failed_index ? json(*result.failed_index) : json(nullptr);

  double total_wall = 0.0;
  json scenarios = json::array();
  for (const ScenarioOutcome& o : result.outcomes) {
    scenarios.push_back(scenario_json(o, base_mva));
    total_wall += o.wall_seconds;
  }
  r["scenarios"] = scenarios;
  if (result.prior_boot) {
    r["prior_boot"] = scenario_json(*result.prior_boot, base_mva);
    total_wall += result.prior_boot->wall_seconds;
  }
  r["total_wall_seconds"] = total_wall;

  const PersistencyReport metrics = build_persistency_report(result);
  json locations = json::array();
  for (const auto& [bus, pct] : metrics.location_persistency) {
    locations.push_back(json{{"location", bus},
                             {"first_seen", metrics.first_seen.at(bus)},
                             {"persistency_pct", pct},
                             {"steps_present", metrics.steps_present.at(bus)}});
  }
  json sets = json::array();
  for (size_t t = 0; t < metrics.set_persistency.size(); ++t) {
    sets.push_back(json{{"t", static_cast<int>(t) + 1},
                        {"set_size", metrics.set_sizes[t]},
                        {"union_size", metrics.union_sizes[t]},
                        {"set_persistency_pct", metrics.set_persistency[t]},
                        {"total_l1_pu", metrics.total_compensation[t]},
                        {"total_l1_mva", metrics.total_compensation[t] * base_mva}});
  }
  r["metrics"] = json{{"location_persistency", locations}, {"set_persistency", sets}};
  return r;
}

json comparison_json(const json& mp_run, const json& base_run) {
  const json& mp_sets = mp_run["metrics"]["set_persistency"];
  const json& base_sets = base_run["metrics"]["set_persistency"];
  const size_t shared = std::min(mp_sets.size(), base_sets.size());

  json rows = json::array();
  for (size_t t = 0; t < shared; ++t) {
    const json& m = mp_sets[t];
    const json& b = base_sets[t];
    rows.push_back(json{{"t", m["t"]},
                        {"multi_period_support_size", m["set_size"]},
                        {"baseline_support_size", b["set_size"]},
                        {"multi_period_total_l1_pu", m["total_l1_pu"]},
                        {"baseline_total_l1_pu", b["total_l1_pu"]},
                        {"multi_period_set_persistency_pct", m["set_persistency_pct"]},
                        {"baseline_set_persistency_pct", b["set_persistency_pct"]}});
  }
  return json{{"per_scenario", rows}};
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

/// Single-mode reports write beside report.json; multi-mode ones get one
/// subdirectory per mode so the fixed CSV names cannot collide.
fs::path mode_dir(const std::string& out_dir, const std::vector<std::string>& modes,
                  const std::string& mode) {
  fs::path dir(out_dir);
  if (modes.size() > 1) dir /= mode;
  fs::create_directories(dir);
  return dir;
}

}  // namespace

void validate_run_config(const RunConfig& config) {
  if (config.case_path.empty()) throw Error("a case file is required");
  if (config.mode != "multi-period" && config.mode != "baseline" && config.mode != "both") {
    throw Error("unknown mode: " + config.mode);
  }
  if (config.jobs < 1) throw Error("jobs must be >= 1");
  if (config.formats.empty()) throw Error("at least one output format is required");
  for (const std::string& format : config.formats) {
    if (format != "json" && format != "csv") throw Error("unknown format: " + format);
  }
  parse_factor_spec(config.factor_spec);
  validate_config(config.solver);
}

std::vector<std::string> requested_modes(const RunConfig& config) {
  if (config.mode == "both") return {"multi-period", "baseline"};
  return {config.mode};
}

std::string config_hash(const RunConfig& config) {
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << fnv1a(config_json(config).dump());
  return out.str();
}

ReportDocument ReportDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error("unreadable report " + path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw SchemaMismatch("report lacks a schema_version field");
  }
  if (doc["schema_version"] != 1) {
    throw SchemaMismatch("unsupported report schema version: " + doc["schema_version"].dump());
  }
  return ReportDocument{std::move(doc)};
}

void ReportDocument::save(const std::string& path) const {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream out(target);
  if (!out) throw Error("cannot write report: " + path);
  out << doc.dump(2) << '\n';
}

std::vector<std::string> ReportDocument::modes() const {
  std::vector<std::string> names;
  if (doc.contains("runs")) {
    for (const auto& item : doc["runs"].items()) names.push_back(item.key());
  }
  return names;
}

bool ReportDocument::has_mode(const std::string& mode) const {
  return doc.contains("runs") && doc["runs"].contains(mode);
}

ReportDocument build_report(const RunConfig& config, const NetworkCase& network,
                            const std::vector<double>& factors,
                            const std::map<std::string, MultiPeriodResult>& runs) {
  json doc;
  doc["schema_version"] = 1;
  doc["generator"] = "blackout-lens";
  doc["case_name"] = network.name;
  doc["base_mva"] = network.base_mva;
  doc["factors"] = factors;
  doc["mode"] = config.mode;
  doc["config"] = config_json(config);
  doc["config_hash"] = config_hash(config);

  json runs_json = json::object();
  for (const auto& [name, result] : runs) {
    runs_json[name] = run_json(result, network.base_mva);
  }
  doc["runs"] = runs_json;
  if (runs_json.contains("multi-period") && runs_json.contains("baseline")) {
    doc["comparison"] = comparison_json(runs_json["multi-period"], runs_json["baseline"]);
  }
  return ReportDocument{std::move(doc)};
}

void write_metrics_csvs(const ReportDocument& report, const std::string& out_dir) {
  const std::vector<std::string> modes = report.modes();
  for (const std::string& mode : modes) {
    const json& metrics = report.doc["runs"][mode]["metrics"];
    const fs::path dir = mode_dir(out_dir, modes, mode);

    std::ofstream loc = open_csv(dir / "location_persistency.csv");
    loc << "location,first_seen,persistency_pct,steps_present\n";
    for (const json& row : metrics["location_persistency"]) {
      loc << row["location"].get<int>() << ',' << row["first_seen"].get<int>() << ','
          << fmt(row["persistency_pct"].get<double>()) << ','
          << row["steps_present"].get<int>() << '\n';
    }

    std::ofstream set = open_csv(dir / "set_persistency.csv");
    set << "t,set_size,union_size,set_persistency_pct\n";
    for (const json& row : metrics["set_persistency"]) {
      set << row["t"].get<int>() << ',' << row["set_size"].get<int>() << ','
          << row["union_size"].get<int>() << ','
          << fmt(row["set_persistency_pct"].get<double>()) << '\n';
    }

    std::ofstream comp = open_csv(dir / "compensation.csv");
    comp << "t,total_l1,support_size\n";
    for (const json& row : metrics["set_persistency"]) {
      comp << row["t"].get<int>() << ',' << fmt(row["total_l1_pu"].get<double>()) << ','
           << row["set_size"].get<int>() << '\n';
    }
  }
}

void write_supports_csv(const ReportDocument& report, const std::string& out_dir) {
  const std::vector<std::string> modes = report.modes();
  for (const std::string& mode : modes) {
    const fs::path dir = mode_dir(out_dir, modes, mode);
    std::ofstream out = open_csv(dir / "supports.csv");
    out << "t,load_factor,location,magnitude_pu,magnitude_mva\n";
    for (const json& scenario : report.doc["runs"][mode]["scenarios"]) {
      if (!scenario["solved"].get<bool>()) continue;
      for (const json& entry : scenario["support"]) {
        out << scenario["t"].get<int>() << ',' << fmt(scenario["load_factor"].get<double>())
            << ',' << entry["location"].get<int>() << ','
            << fmt(entry["magnitude_pu"].get<double>()) << ','
            << fmt(entry["magnitude_mva"].get<double>()) << '\n';
      }
    }
  }
}

void write_plot_csv(const ReportDocument& report, const std::string& figure,
                    const std::string& out_dir) {
  const std::vector<std::string> modes = report.modes();
  if (modes.empty()) throw Error("report contains no runs");
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  if (figure == "trajectory") {
    const std::string mode = report.has_mode("multi-period") ? "multi-period" : modes.front();
    std::ofstream out = open_csv(dir / "plot_trajectory.csv");
    out << "t,location,magnitude_pu,magnitude_mva\n";
    for (const json& scenario : report.doc["runs"][mode]["scenarios"]) {
      if (!scenario["solved"].get<bool>()) continue;
      for (const json& entry : scenario["support"]) {
        out << scenario["t"].get<int>() << ',' << entry["location"].get<int>() << ','
            << fmt(entry["magnitude_pu"].get<double>()) << ','
            << fmt(entry["magnitude_mva"].get<double>()) << '\n';
      }
    }
    return;
  }

  if (figure == "set_persistency") {
    std::ofstream out = open_csv(dir / "plot_set_persistency.csv");
    out << "t,mode,set_size,union_size,set_persistency_pct\n";
    for (const std::string& mode : modes) {
      for (const json& row : report.doc["runs"][mode]["metrics"]["set_persistency"]) {
        out << row["t"].get<int>() << ',' << mode << ',' << row["set_size"].get<int>() << ','
            << row["union_size"].get<int>() << ','
            << fmt(row["set_persistency_pct"].get<double>()) << '\n';
      }
    }
    return;
  }

  if (figure == "sparsity_compare") {
    if (!report.has_mode("multi-period") || !report.has_mode("baseline")) {
      throw MissingMode("sparsity comparison needs both modes in the report");
    }
    std::ofstream out = open_csv(dir / "plot_sparsity_compare.csv");
    out << "t,mode,support_size,total_l1\n";
    for (const std::string& mode : {std::string("multi-period"), std::string("baseline")}) {
      for (const json& row : report.doc["runs"][mode]["metrics"]["set_persistency"]) {
        out << row["t"].get<int>() << ',' << mode << ',' << row["set_size"].get<int>() << ','
            << fmt(row["total_l1_pu"].get<double>()) << '\n';
      }
    }
    return;
  }

  if (figure == "runtime") {
    std::ofstream out = open_csv(dir / "plot_runtime.csv");
    out << "scenario,mode,seconds\n";
    for (const std::string& mode : modes) {
      for (const json& scenario : report.doc["runs"][mode]["scenarios"]) {
        out << scenario["t"].get<int>() << ',' << mode << ','
            << fmt(scenario["wall_seconds"].get<double>()) << '\n';
      }
    }
    return;
  }

  throw Error("unknown figure: " + figure);
}

int cmd_diagnose(const RunConfig& config) {
  try {
    validate_run_config(config);
    const NetworkCase network = load_matpower_case(config.case_path);
    const std::vector<double> factors = parse_factor_spec(config.factor_spec);

    ScalingOptions options;
    options.scale_generation = config.scale_generation;
    if (!config.scaling_csv_path.empty()) {
      options.bus_weights = load_bus_scaling_csv(config.scaling_csv_path);
    }
    const ScenarioSequence sequence = build_scenario_sequence(network, factors, options);

    std::map<std::string, MultiPeriodResult> runs;
    for (const std::string& mode : requested_modes(config)) {
      BLENS_LOG_INFO("diagnose: running ", mode, " sweep over ", sequence.size(), " scenarios");
      runs[mode] = (mode == "multi-period") ? run_multi_period(sequence, config.solver)
                                            : run_baseline(sequence, config.solver, config.jobs);
    }

    const ReportDocument report = build_report(config, network, factors, runs);
    fs::create_directories(config.out_dir);
    report.save((fs::path(config.out_dir) / "report.json").string());
    if (std::find(config.formats.begin(), config.formats.end(), "csv") !=
        config.formats.end()) {
      write_metrics_csvs(report, config.out_dir);
      write_supports_csv(report, config.out_dir);
    }

    const bool complete = std::all_of(runs.begin(), runs.end(),
                                      [](const auto& kv) { return kv.second.all_solved(); });
    return complete ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "blackout-lens: " << e.what() << '\n';
    return 1;
  }
}

int cmd_metrics(const std::string& report_path, const std::string& out_dir) {
  try {
    const ReportDocument report = ReportDocument::load(report_path);
    fs::create_directories(out_dir);
    write_metrics_csvs(report, out_dir);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "blackout-lens: " << e.what() << '\n';
    return 1;
  }
}

int cmd_plot_data(const std::string& report_path, const std::string& figure,
                  const std::string& out_dir) {
  try {
    const ReportDocument report = ReportDocument::load(report_path);
    write_plot_csv(report, figure, out_dir);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "blackout-lens: " << e.what() << '\n';
    return 1;
  }
}

int cmd_oracle(const std::string& case_path, double load_factor, int max_cardinality,
               const SolverConfig& solver) {
  try {
    const NetworkCase network = load_matpower_case(case_path);
    const CircuitAssembly assembly = CircuitAssembly::assemble(network, load_factor);
    const OracleResult result = min_support_bruteforce(assembly, solver, max_cardinality);
    std::cout << "minimum cardinality: " << result.min_cardinality << '\n';
    for (size_t i = 0; i < result.witnesses.size(); ++i) {
      std::cout << "witness:";
      if (result.witnesses[i].bus_ids.empty()) std::cout << " (none needed)";
      for (int bus : result.witnesses[i].bus_ids) std::cout << ' ' << bus;
      std::cout << "  |n|_2 = " << fmt(result.witness_norms[i]) << '\n';
    }
    return 0;
  } catch (const CardinalityExceeded& e) {
    std::cerr << "blackout-lens: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "blackout-lens: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace blens
