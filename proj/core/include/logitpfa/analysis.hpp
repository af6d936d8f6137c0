#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "logitpfa/csv.hpp"
#include "logitpfa/pfa.hpp"
#include "logitpfa/pipeline.hpp"

namespace logitpfa::analysis {

enum class DropPolicy { kDrop, kFail };

struct AnalysisConfig {
  std::filesystem::path input;
  std::string labels;  // outcome column name or label file path
  std::optional<std::size_t> k;
  double epsilon = 0.01;
  pfa::FactorMethod factor_method = pfa::FactorMethod::kLeastAbsoluteDeviations;
  double alpha = 0.05;
  double grid_min = 1e-12;
  double grid_max = 1.0;
  std::size_t grid_points = 400;
  std::vector<double> fixed_thresholds;  // extra thresholds reported individually
  std::filesystem::path output_dir;
  DropPolicy drop_policy = DropPolicy::kDrop;
  std::size_t threads = 0;  // 0: use thread_count()
  std::size_t histogram_bins = 50;

  /// Throws InvalidConfig.
  void validate() const;
};

struct HypothesisRecord {
  std::size_t column = 0;
  std::string label;
  double beta_hat = 0.0;
  double z = 0.0;
  double p_value = 0.0;
  double adjusted_p = 0.0;
  bool capped = false;  // a_j hit the communality cap
  bool rejected = false;
};

struct DroppedRecord {
  std::size_t column = 0;
  std::string label;
  std::string reason;
  std::string message;
};

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

struct AnalysisReport {
  std::size_t n = 0;
  std::size_t input_columns = 0;
  std::vector<HypothesisRecord> hypotheses;  // by adjusted p, then column
  std::vector<DroppedRecord> dropped;
  std::size_t k = 0;
  bool k_forced = false;
  double epsilon = 0.0;
  double explained_mass = 0.0;
  double residual_frobenius = 0.0;
  std::size_t capped = 0;
  std::size_t clamped_negative_eigenvalues = 0;
  bool factored_spectrum = false;
  pfa::FactorMethod factor_method = pfa::FactorMethod::kLeastAbsoluteDeviations;
  Eigen::VectorXd w_hat;
  double alpha = 0.0;
  pfa::ThresholdResult threshold;
  std::vector<pfa::FdpReport> fdp_curve;
  std::vector<pfa::FdpReport> fixed;
  double z_mean = 0.0;
  double z_sd = 0.0;
  std::vector<HistogramBin> z_histogram;
};

/// Runs the full procedure on in-memory data: marginal fits, dependence
/// estimation, factor adjustment, FDP over the grid, threshold search, and
/// rejection of hypotheses whose adjusted p-value is at most t_alpha.
AnalysisReport analyze(const LabeledData& data, const AnalysisConfig& cfg);

/// Reads cfg.input / cfg.labels and analyzes them.
AnalysisReport analyze(const AnalysisConfig& cfg);

/// hypotheses.csv, dropped.csv, fdp_curve.csv, z_histogram.csv and
/// summary.json under `dir` (created if missing).
void write_report(const AnalysisReport& report, const std::filesystem::path& dir);

void write_hypotheses_csv(std::ostream& out, const AnalysisReport& report);
void write_dropped_csv(std::ostream& out, const AnalysisReport& report);
void write_fdp_curve_csv(std::ostream& out, const std::vector<pfa::FdpReport>& rows);
void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins);
void write_summary_json(std::ostream& out, const AnalysisReport& report);

std::string_view to_string(pfa::FactorMethod method);

}  // namespace logitpfa::analysis
