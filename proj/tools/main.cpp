#include <string>
#include <vector>

#include "CLI11.hpp"

#include "blens/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"blackout-lens: locates sparse compensation that restores feasibility in "
               "collapsed power-grid scenarios"};
  app.require_subcommand(1);

  blens::RunConfig config;

  auto add_solver_flags = [&config](CLI::App* cmd) {
    cmd->add_option("--tol", config.solver.tol_residual, "Convergence tolerance (per unit)");
    cmd->add_option("--gamma", config.solver.gamma, "Relative toggling threshold");
    cmd->add_option("--c-high", config.solver.c_high, "Suppressing sparsity coefficient");
    cmd->add_option("--c-low", config.solver.c_low, "Permitting sparsity coefficient");
    cmd->add_option("--epsilon", config.solver.epsilon_support,
                    "Support threshold on |n_i| (per unit)");
    cmd->add_option("--max-iters", config.solver.max_iters, "Newton iteration cap per solve");
  };

  CLI::App* diagnose =
      app.add_subcommand("diagnose", "Run the scenario sweep(s) and write report.json");
  diagnose->add_option("--case", config.case_path, "MATPOWER .m case file")->required();
  diagnose->add_option("--factors", config.factor_spec,
                       "Load factors: start:stop:step or a comma list (default 1.0)");
  diagnose->add_option("--mode", config.mode, "multi-period | baseline | both")
      ->default_str("multi-period");
  diagnose->add_option("--out", config.out_dir, "Output directory (default out)");
  diagnose->add_option("--jobs", config.jobs, "Baseline worker pool width (default 1)");
  diagnose->add_option("--formats", config.formats, "Output formats: json, csv")
      ->delimiter(',');
  diagnose->add_option("--scaling-csv", config.scaling_csv_path,
                       "Per-bus load weight CSV with header bus_id,factor");
  diagnose->add_flag("--scale-generation", config.scale_generation,
                     "Scale generator setpoints along with the loads");
  add_solver_flags(diagnose);

  std::string report_path;
  std::string derived_out = "out";
  CLI::App* metrics =
      app.add_subcommand("metrics", "Derive the persistency metric CSVs from a report");
  metrics->add_option("--report", report_path, "Path to report.json")->required();
  metrics->add_option("--out", derived_out, "Output directory (default out)");

  std::string figure;
  CLI::App* plot = app.add_subcommand("plot-data", "Derive a long-format plot series");
  plot->add_option("--report", report_path, "Path to report.json")->required();
  plot->add_option("--figure", figure,
                   "trajectory | set_persistency | sparsity_compare | runtime")
      ->required();
  plot->add_option("--out", derived_out, "Output directory (default out)");

  std::string oracle_case;
  double oracle_factor = 1.0;
  int max_cardinality = 3;
  CLI::App* oracle =
      app.add_subcommand("oracle", "Brute-force minimum-support search on a tiny case");
  oracle->add_option("--case", oracle_case, "MATPOWER .m case file")->required();
  oracle->add_option("--factor", oracle_factor, "Load factor to assemble at (default 1.0)");
  oracle->add_option("--max-cardinality", max_cardinality,
                     "Largest support size to try, at most 4 (default 3)");
  add_solver_flags(oracle);

  CLI11_PARSE(app, argc, argv);

  if (diagnose->parsed()) return blens::cmd_diagnose(config);
  if (metrics->parsed()) return blens::cmd_metrics(report_path, derived_out);
  if (plot->parsed()) return blens::cmd_plot_data(report_path, figure, derived_out);
  if (oracle->parsed()) {
    return blens::cmd_oracle(oracle_case, oracle_factor, max_cardinality, config.solver);
  }
  return 1;
}
