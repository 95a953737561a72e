/**
 * @file report.hpp
 * @brief Machine-readable run reports and the command implementations behind
 *        the CLI subcommands.
 *
 * The JSON report is the source of truth: every CSV (metric tables, support
 * dumps, plot series) is derived from the document alone, so the two can
 * never disagree. Reports are schema-versioned and serialized with
 * shortest-round-trip numbers; two runs with identical configuration and
 * case differ at most in the wall-clock fields ("wall_seconds",
 * "total_wall_seconds").
 *
 * Compensation magnitudes appear twice wherever they are reported: in
 * per-unit current and in the MVA-equivalent column derived with the case
 * base power, both labeled.
 */
#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "blens/multi_period.hpp"
#include "blens/oracle.hpp"

namespace blens {

/// Everything a diagnose run needs, straight from the command line.
struct RunConfig {
  std::string case_path;
  std::string factor_spec = "1.0";
  std::string mode = "multi-period";  ///< multi-period | baseline | both
  std::string out_dir = "out";
  std::vector<std::string> formats = {"json", "csv"};
  int jobs = 1;                   ///< baseline worker pool width
  std::string scaling_csv_path;   ///< optional per-bus load weights
  bool scale_generation = false;  ///< scale generator setpoints along with loads
  SolverConfig solver;
};

/// Throws Error on an unknown mode/format, a bad factor spec, or jobs < 1.
void validate_run_config(const RunConfig& config);

/// Requested sweep modes in canonical order (multi-period before baseline).
[[nodiscard]] std::vector<std::string> requested_modes(const RunConfig& config);

/// FNV-1a digest of the reproducibility-relevant configuration, as hex.
[[nodiscard]] std::string config_hash(const RunConfig& config);

struct ReportDocument {
  nlohmann::json doc;

  /// Parses and validates a report file; throws SchemaMismatch on version
  /// drift and Error when the file is missing or not JSON.
  [[nodiscard]] static ReportDocument load(const std::string& path);
  void save(const std::string& path) const;

  [[nodiscard]] std::vector<std::string> modes() const;
  [[nodiscard]] bool has_mode(const std::string& mode) const;
};

/// Assembles the versioned document from sweep results keyed by mode name.
[[nodiscard]] ReportDocument build_report(const RunConfig& config, const NetworkCase& network,
                                          const std::vector<double>& factors,
                                          const std::map<std::string, MultiPeriodResult>& runs);

/// Metric tables per mode: location_persistency.csv, set_persistency.csv,
/// compensation.csv. Multi-mode reports write into per-mode subdirectories.
void write_metrics_csvs(const ReportDocument& report, const std::string& out_dir);

/// Per-scenario support dump (supports.csv), same directory layout.
void write_supports_csv(const ReportDocument& report, const std::string& out_dir);

/**
 * Long-format plot series, written as plot_<figure>.csv. Figures: trajectory
 * (multi-period preferred), set_persistency and runtime (one block per
 * mode), sparsity_compare (throws MissingMode unless both modes are in the
 * report). Unknown figure names throw Error.
 */
void write_plot_csv(const ReportDocument& report, const std::string& figure,
                    const std::string& out_dir);

/// Runs the requested sweep(s) and writes report.json (+ CSVs when "csv" is
/// among the formats). Exit 0 when every scenario in every mode converged,
/// 2 on partial failure, 1 on fatal errors.
int cmd_diagnose(const RunConfig& config);

/// Derives the metric CSVs from an existing report. Exit 0/1.
int cmd_metrics(const std::string& report_path, const std::string& out_dir);

/// Derives one plot series from an existing report. Exit 0/1.
int cmd_plot_data(const std::string& report_path, const std::string& figure,
                  const std::string& out_dir);

/// Brute-force minimum-support search on a tiny case; prints witnesses.
/// Exit 0 on success, 2 when the cardinality budget is exhausted, 1 on
/// fatal errors.
int cmd_oracle(const std::string& case_path, double load_factor, int max_cardinality,
               const SolverConfig& solver);

}  // namespace blens
