#include "logitpfa/mmm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "logitpfa/error.hpp"
#include "logitpfa/normal.hpp"

namespace logitpfa::mmm {
namespace {

constexpr double kMinVariance = 1e-14;

void require_positive_diagonal(const Eigen::MatrixXd& sigma) {
  for (Eigen::Index j = 0; j < sigma.rows(); ++j) {
    if (!(sigma(j, j) > kMinVariance)) {
      throw Error(ErrorKind::kZeroVariance,
                  "diagonal entry " + std::to_string(j) + " is not positive");
    }
  }
}

}  // namespace

ScoreMatrix stack_scores(std::span<const Eigen::VectorXd> scores,
                         std::vector<std::size_t> columns) {
  if (columns.size() != scores.size()) {
    throw Error(ErrorKind::kShapeMismatch, "column index map does not match score count");
  }
  ScoreMatrix out;
  out.columns = std::move(columns);
  if (scores.empty()) return out;

  const Eigen::Index n = scores.front().size();
  out.psi.resize(n, static_cast<Eigen::Index>(scores.size()));
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j].size() != n) {
      throw Error(ErrorKind::kShapeMismatch,
                  "score column " + std::to_string(j) + " has " +
                      std::to_string(scores[j].size()) + " rows, expected " + std::to_string(n));
    }
    out.psi.col(static_cast<Eigen::Index>(j)) = scores[j];
  }
  return out;
}

CovarianceEstimate estimate_covariance(const ScoreMatrix& scores) {
  const Eigen::Index n = scores.n();
  const Eigen::Index p = scores.p();
  if (n == 0) throw Error(ErrorKind::kShapeMismatch, "empty score matrix");

  CovarianceEstimate cov;
  cov.n = static_cast<std::size_t>(n);
  cov.sigma = Eigen::MatrixXd::Zero(p, p);
  cov.sigma.selfadjointView<Eigen::Lower>().rankUpdate(scores.psi.transpose(),
                                                       1.0 / static_cast<double>(n));
  cov.sigma.triangularView<Eigen::StrictlyUpper>() = cov.sigma.transpose();
  return cov;
}

CorrelationMatrix to_correlation(const CovarianceEstimate& cov) {
  require_positive_diagonal(cov.sigma);
  const Eigen::Index p = cov.sigma.rows();

  CorrelationMatrix corr;
  corr.sigma_star.resize(p, p);
  for (Eigen::Index b = 0; b < p; ++b) {
    corr.sigma_star(b, b) = 1.0;
    for (Eigen::Index a = b + 1; a < p; ++a) {
      const double r = cov.sigma(a, b) / std::sqrt(cov.sigma(a, a) * cov.sigma(b, b));
      corr.sigma_star(a, b) = corr.sigma_star(b, a) = std::clamp(r, -1.0, 1.0);
    }
  }
  return corr;
}

ZVector z_statistics(const Eigen::VectorXd& beta_hat, const CovarianceEstimate& cov) {
  if (beta_hat.size() != cov.sigma.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "coefficient vector and covariance differ in size");
  }
  require_positive_diagonal(cov.sigma);

  const double n = static_cast<double>(cov.n);
  ZVector out;
  out.z.resize(beta_hat.size());
  out.p_values.resize(beta_hat.size());
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
    const double se = std::sqrt(cov.sigma(j, j) / n);
    out.z[j] = beta_hat[j] / se;
    out.p_values[j] = two_sided_p(out.z[j]);
  }
  return out;
}

}  // namespace logitpfa::mmm
