// logitpfa: command-line front end.
//
//   logitpfa analyze   --input data.csv --labels y --alpha 0.05 --k 6 --out report/
//   logitpfa fdp-curve --input data.csv --labels y --grid-points 400 --out curve/
//   logitpfa simulate  --scenario 2 --rho 0.5 --reps 1000 --k 1 --seed 7 --out sim/
//   logitpfa generate  --scenario 1 --replication 0 --seed 7 --out data.csv
//
// Every subcommand accepts --config <file> (TOML/INI, same keys as the long
// flags); flags given on the command line win. LOGITPFA_THREADS sets the
// worker count.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "logitpfa/analysis.hpp"
#include "logitpfa/error.hpp"
#include "logitpfa/sim.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPipeline = 3;

using logitpfa::analysis::AnalysisConfig;
using logitpfa::sim::ScenarioConfig;

struct AnalysisFlags {
  AnalysisConfig cfg;
  std::size_t k = 0;
  std::string method = "l1";
  std::string drop = "drop";
};

void add_analysis_options(CLI::App& cmd, AnalysisFlags& f, bool curve_only) {
  cmd.add_option("--input", f.cfg.input, "Predictor CSV (header row of column labels)")
      ->required();
  cmd.add_option("--labels", f.cfg.labels, "Outcome column name or 0/1 label file")->required();
  cmd.add_option("--out", f.cfg.output_dir, "Output directory")->required();
  cmd.add_option("--alpha", f.cfg.alpha, "Target FDP level")->capture_default_str();
  auto* k = cmd.add_option("--k", f.k, "Force the number of factors");
  cmd.add_option("--epsilon", f.cfg.epsilon, "Residual spectrum fraction for choosing k")
      ->capture_default_str()
      ->excludes(k);
  cmd.add_option("--factor-method", f.method, "Factor estimator")
      ->check(CLI::IsMember({"l1", "l2"}))
      ->capture_default_str();
  cmd.add_option("--grid-min", f.cfg.grid_min, "Smallest threshold")->capture_default_str();
  cmd.add_option("--grid-max", f.cfg.grid_max, "Largest threshold")->capture_default_str();
  cmd.add_option("--grid-points", f.cfg.grid_points, "Number of log-spaced thresholds")
      ->capture_default_str();
  if (!curve_only) {
    cmd.add_option("--t", f.cfg.fixed_thresholds, "Report FDP at these fixed thresholds");
    cmd.add_option("--drop-policy", f.drop, "Failed columns: drop them or fail the run")
        ->check(CLI::IsMember({"drop", "fail"}))
        ->capture_default_str();
  }
}

AnalysisConfig finish(AnalysisFlags& f, const CLI::App& cmd) {
  if (cmd.count("--k") > 0) f.cfg.k = f.k;
  f.cfg.factor_method = f.method == "l2" ? logitpfa::pfa::FactorMethod::kTrimmedLeastSquares
                                         : logitpfa::pfa::FactorMethod::kLeastAbsoluteDeviations;
  f.cfg.drop_policy = f.drop == "fail" ? logitpfa::analysis::DropPolicy::kFail
                                       : logitpfa::analysis::DropPolicy::kDrop;
  return f.cfg;
}

std::ofstream open_file(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw logitpfa::Error(logitpfa::ErrorKind::kInvalidConfig, "cannot write " + path.string());
  }
  return out;
}

void add_scenario_options(CLI::App& cmd, ScenarioConfig& s) {
  cmd.add_option("--scenario", s.scenario, "1, 2 or 3")->check(CLI::Range(1, 3))
      ->capture_default_str();
  cmd.add_option("--n", s.n, "Observations")->capture_default_str();
  cmd.add_option("--p", s.p, "Hypotheses")->capture_default_str();
  cmd.add_option("--p1", s.p1, "False nulls (signal columns)")->capture_default_str();
  cmd.add_option("--rho", s.rho, "Within-block equicorrelation")->capture_default_str();
  cmd.add_option("--beta", s.beta_signal, "Signal coefficient")->capture_default_str();
  cmd.add_option("--seed", s.seed, "Base seed")->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"Marginal logistic testing with principal-factor FDP estimation"};
  app.set_config("--config", "", "TOML/INI file with the same keys as the flags");
  app.require_subcommand(1);

  AnalysisFlags analyze_flags;
  auto* analyze = app.add_subcommand("analyze", "Test every predictor column against the outcome");
  add_analysis_options(*analyze, analyze_flags, false);

  AnalysisFlags curve_flags;
  auto* curve = app.add_subcommand("fdp-curve", "Write (t, R, V_hat, FDP_hat) over a grid");
  add_analysis_options(*curve, curve_flags, true);

  ScenarioConfig sim_cfg;
  std::filesystem::path sim_out;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo replications of a scenario");
  add_scenario_options(*simulate, sim_cfg);
  simulate->add_option("--reps", sim_cfg.replications, "Replications")->capture_default_str();
  simulate->add_option("--t", sim_cfg.t_fixed, "Fixed threshold")->capture_default_str();
  simulate->add_option("--alpha", sim_cfg.alpha, "Level for t_alpha")->capture_default_str();
  simulate->add_option("--k", sim_cfg.k, "Number of factors")->capture_default_str();
  simulate->add_option("--grid-min", sim_cfg.grid_min)->capture_default_str();
  simulate->add_option("--grid-max", sim_cfg.grid_max)->capture_default_str();
  simulate->add_option("--grid-points", sim_cfg.grid_points)->capture_default_str();
  simulate->add_option("--out", sim_out, "Output directory")->required();

  ScenarioConfig gen_cfg;
  std::size_t gen_replication = 0;
  std::filesystem::path gen_out;
  auto* generate = app.add_subcommand("generate", "Write one simulated data set as CSV");
  add_scenario_options(*generate, gen_cfg);
  generate->add_option("--replication", gen_replication, "Replication index")
      ->capture_default_str();
  generate->add_option("--out", gen_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*analyze) {
      const AnalysisConfig cfg = finish(analyze_flags, *analyze);
      const auto report = logitpfa::analysis::analyze(cfg);
      logitpfa::analysis::write_report(report, cfg.output_dir);
      for (const auto& d : report.dropped) {
        std::cerr << "dropped column " << d.column << " (" << d.label << "): " << d.reason
                  << '\n';
      }
      std::cerr << "k = " << report.k << ", t_alpha = " << report.threshold.t
                << (report.threshold.found ? "" : " (no threshold met alpha)")
                << ", rejected at t_alpha: "
                << std::count_if(report.hypotheses.begin(), report.hypotheses.end(),
                                 [](const auto& h) { return h.rejected; })
                << '\n';
    } else if (*curve) {
      const AnalysisConfig cfg = finish(curve_flags, *curve);
      const auto report = logitpfa::analysis::analyze(cfg);
      std::filesystem::create_directories(cfg.output_dir);
      auto out = open_file(cfg.output_dir / "fdp_curve.csv");
      logitpfa::analysis::write_fdp_curve_csv(out, report.fdp_curve);
    } else if (*simulate) {
      const auto result = logitpfa::sim::run_replications(sim_cfg);
      std::filesystem::create_directories(sim_out);
      {
        auto out = open_file(sim_out / "summary.csv");
        logitpfa::sim::write_summary_csv(out, sim_cfg, result);
      }
      {
        auto out = open_file(sim_out / "replications.csv");
        logitpfa::sim::write_replications_csv(out, result);
      }
      if (result.flagged) {
        std::cerr << "warning: " << result.failed << " of " << sim_cfg.replications
                  << " replications failed\n";
      }
    } else if (*generate) {
      gen_cfg.replications = 1;
      gen_cfg.k = 1;
      const auto data = logitpfa::sim::generate_dataset(gen_cfg, gen_replication);
      logitpfa::LabeledData labeled;
      for (std::size_t j = 0; j < gen_cfg.p; ++j) labeled.labels.push_back("x" + std::to_string(j));
      labeled.x = data.x;
      labeled.y = data.y;
      auto out = open_file(gen_out);
      logitpfa::write_labeled_csv(out, labeled);
    }
  } catch (const logitpfa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool config = e.kind() == logitpfa::ErrorKind::kParseError ||
                        e.kind() == logitpfa::ErrorKind::kInvalidConfig ||
                        e.kind() == logitpfa::ErrorKind::kEmptyGrid;
    return config ? kExitConfig : kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPipeline;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
