#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "logitpfa/error.hpp"
#include "logitpfa/glm_marginal.hpp"
#include "logitpfa/mmm.hpp"
#include "logitpfa/pfa.hpp"

namespace logitpfa {

struct PipelineOptions {
  glm::SolverOptions solver;
  std::optional<std::size_t> k;  // forced factor count; otherwise chosen by epsilon
  double epsilon = 0.01;
  pfa::FactorMethod factor_method = pfa::FactorMethod::kLeastAbsoluteDeviations;
  pfa::LadOptions lad;
  bool drop_failed_columns = true;
  std::size_t threads = 1;  // workers for the per-column fits
};

struct DroppedColumn {
  std::size_t column = 0;
  ErrorKind reason = ErrorKind::kDegenerateInput;
  std::string message;
};

/// Everything the marginal-model and factor stages produce for one data set.
/// Vectors indexed by retained position; `columns` maps back to input
/// column indices.
struct PipelineResult {
  std::size_t n = 0;
  std::size_t input_columns = 0;
  std::vector<std::size_t> columns;
  std::vector<DroppedColumn> dropped;
  Eigen::VectorXd alpha_hat;
  Eigen::VectorXd beta_hat;
  mmm::ZVector z;
  pfa::EigenDecomposition eigen;
  pfa::FactorModel model;
  pfa::FactorEstimate factors;
  bool factored_spectrum = false;  // eigenpairs came from the n x n Gram route

  std::size_t k() const { return model.k; }
  /// sum_{h <= k} lambda_h / sum_h lambda_h.
  double explained_mass() const;
};

/// Marginal fits, score stacking, sandwich covariance and correlation,
/// Z-statistics, eigendecomposition, factor count, and factor estimation.
///
/// `x` is n x p (rows are observations). Columns that fail to fit are
/// recorded in `dropped` (or rethrown with column context when
/// drop_failed_columns is false). Throws TooFewColumns when fewer than two
/// columns survive.
PipelineResult run_pipeline(const Eigen::MatrixXd& x, std::span<const double> y,
                            const PipelineOptions& opts);

}  // namespace logitpfa
