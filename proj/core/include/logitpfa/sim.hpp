#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace logitpfa::sim {

/// Data-generating designs for the predictor vector.
///  1: all columns i.i.d. N(0, 1).
///  2: signal block and null block each equicorrelated at rho, blocks
///     independent.
///  3: signal block i.i.d. N(0, 1), null block equicorrelated at rho.
struct ScenarioConfig {
  int scenario = 1;
  std::size_t n = 400;
  std::size_t p = 500;
  std::size_t p1 = 10;  // columns 0..p1-1 carry signal
  double rho = 0.0;
  double beta_signal = 1.0;
  std::size_t replications = 1000;
  double t_fixed = 1e-4;
  double alpha = 0.05;
  std::size_t k = 10;
  std::uint64_t seed = 1;
  double grid_min = 1e-12;
  double grid_max = 1.0;
  std::size_t grid_points = 400;
  std::size_t threads = 0;  // 0: use thread_count()

  /// Throws InvalidConfig.
  void validate() const;
};

struct GroundTruth {
  std::vector<bool> null_mask;  // true for true nulls

  std::size_t p0() const;
  std::size_t p1() const { return null_mask.size() - p0(); }
};

struct Dataset {
  Eigen::MatrixXd x;  // n x p
  Eigen::VectorXd y;  // 0/1
  GroundTruth truth;
};

/// Draws one data set. The stream depends only on (cfg.seed,
/// replication_index). Outcomes follow logit P(Y = 1) = beta_signal * sum of
/// the signal columns, with no intercept.
Dataset generate_dataset(const ScenarioConfig& cfg, std::size_t replication_index);

/// Counts of the accept/reject by true/false null table at threshold t.
struct DecisionPattern {
  std::size_t u = 0;  // true nulls accepted
  std::size_t v = 0;  // true nulls rejected
  std::size_t t = 0;  // false nulls accepted
  std::size_t s = 0;  // false nulls rejected
  std::size_t r = 0;  // all rejected
};

DecisionPattern decision_pattern(std::span<const double> p_values, const GroundTruth& truth,
                                 double t);

struct ReplicationResult {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  double fdp_hat = 0.0;
  std::size_t r = 0;
  std::size_t s = 0;
  std::size_t v = 0;
  double t_alpha = 0.0;
  bool t_alpha_found = false;
  double realized_fdp = 0.0;
};

struct SummaryTable {
  std::size_t completed = 0;
  double median_fdp_hat = 0.0;
  double se_fdp_hat = 0.0;
  double mean_r = 0.0;
  double se_r = 0.0;
  double mean_s = 0.0;
  double se_s = 0.0;
  double median_t_alpha = 0.0;
};

struct SimulationResult {
  SummaryTable summary;
  std::vector<ReplicationResult> replications;
  std::size_t failed = 0;
  bool flagged = false;  // more than 1% of replications failed
};

/// Generate, run the pipeline with trimmed least-squares factors and the
/// configured k, then score FDP-hat(t_fixed), R, S, V and t_alpha. Pipeline
/// errors are captured in the result instead of thrown.
ReplicationResult run_replication(const ScenarioConfig& cfg, std::size_t index);

/// Medians, means and standard errors (sample standard deviation across
/// replications) over the successful replications, in index order.
SummaryTable summarize(std::span<const ReplicationResult> replications);

SimulationResult run_replications(const ScenarioConfig& cfg);

void write_summary_csv(std::ostream& out, const ScenarioConfig& cfg,
                       const SimulationResult& result);
void write_replications_csv(std::ostream& out, const SimulationResult& result);

}  // namespace logitpfa::sim
