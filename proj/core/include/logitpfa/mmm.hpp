#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace logitpfa::mmm {

/// n x p matrix of score contributions, one column per retained hypothesis.
/// `columns[j]` is the input column index of matrix column j.
struct ScoreMatrix {
  Eigen::MatrixXd psi;
  std::vector<std::size_t> columns;

  Eigen::Index n() const { return psi.rows(); }
  Eigen::Index p() const { return psi.cols(); }
};

struct CovarianceEstimate {
  Eigen::MatrixXd sigma;
  std::size_t n = 0;
};

struct CorrelationMatrix {
  Eigen::MatrixXd sigma_star;
};

struct ZVector {
  Eigen::VectorXd z;
  Eigen::VectorXd p_values;
};

/// Concatenates per-column score vectors. Throws ShapeMismatch when lengths
/// differ or when `columns` does not match `scores` in size.
ScoreMatrix stack_scores(std::span<const Eigen::VectorXd> scores,
                         std::vector<std::size_t> columns);

/// sigma = psi^T psi / n. Only the lower triangle is accumulated and then
/// mirrored, so the result is exactly symmetric.
CovarianceEstimate estimate_covariance(const ScoreMatrix& scores);

/// diag^{-1/2} sigma diag^{-1/2} with an exact unit diagonal; entries are
/// clamped to [-1, 1]. Throws ZeroVariance if a diagonal entry is <= 1e-14.
CorrelationMatrix to_correlation(const CovarianceEstimate& cov);

/// z_j = beta_j / sqrt(sigma_jj / n), p_j = 2 Phi(-|z_j|).
ZVector z_statistics(const Eigen::VectorXd& beta_hat, const CovarianceEstimate& cov);

}  // namespace logitpfa::mmm
