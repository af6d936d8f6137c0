#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "logitpfa/mmm.hpp"

namespace logitpfa::pfa {

/// Eigenpairs of a correlation matrix, eigenvalues sorted descending and
/// clamped at zero.
///
/// `eigenvectors` is p x m. The dense route returns m = p. The factored
/// route returns only the columns belonging to the nonzero part of the
/// spectrum (m <= rank); every eigenvalue past column m is zero, so those
/// eigenvectors never contribute to a loading matrix.
struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  std::size_t clamped_negative = 0;  // eigenvalues below -1e-8 set to 0
};

/// Full symmetric eigendecomposition (LAPACK dsyevd). Throws NotSymmetric
/// when max |A - A^T| exceeds 1e-10.
EigenDecomposition spectral_decompose(const mmm::CorrelationMatrix& corr);

/// Eigendecomposition of factor^T * factor without forming the p x p
/// product, through the n x n Gram matrix factor * factor^T. Cheaper than
/// the dense route whenever n < p.
EigenDecomposition spectral_decompose_factored(const Eigen::MatrixXd& factor);

/// Smallest k >= 1 with sqrt(sum_{j>k} lambda_j^2) / sum_j lambda_j < epsilon,
/// or p when no k < p qualifies.
std::size_t select_num_factors(const Eigen::VectorXd& eigenvalues, double epsilon);

/// Rows of a_j whose squared loading norm reaches 1 - kLoadingCapMargin get
/// a_j = kCappedScale and are flagged.
inline constexpr double kLoadingCapMargin = 1e-10;
inline constexpr double kCappedScale = 1e5;

struct FactorModel {
  std::size_t k = 0;
  Eigen::MatrixXd loadings;  // p x k, column h = sqrt(lambda_h) * gamma_h
  Eigen::VectorXd a;         // (1 - |b_j|^2)^{-1/2}
  std::vector<bool> capped;
  double residual_frobenius = 0.0;

  Eigen::Index p() const { return loadings.rows(); }
  std::size_t capped_count() const;

  /// All-zero loadings with a_j = 1: the independence model.
  static FactorModel zero(Eigen::Index p, std::size_t k);
};

FactorModel build_factor_model(const EigenDecomposition& eig, std::size_t k);

enum class FactorMethod { kTrimmedLeastSquares, kLeastAbsoluteDeviations };

struct FactorEstimate {
  Eigen::VectorXd w_hat;
  FactorMethod method = FactorMethod::kTrimmedLeastSquares;
};

/// Least squares of z_j on b_j over the floor(0.9 p) coordinates with the
/// smallest |z_j| (ties keep the lower index). Throws RankDeficientDesign.
FactorEstimate estimate_factors_l2(const Eigen::VectorXd& z, const FactorModel& model);

struct LadOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;      // max-norm move of w between iterations
  double residual_floor = 1e-6;
};

/// Least absolute deviations of z on the loadings over all p coordinates,
/// solved by iteratively reweighted least squares. If the reweighting has not
/// settled after opts.max_iterations, the solution is finished exactly by
/// vertex descent from the last iterate. Throws NoConvergence when that
/// fails too.
FactorEstimate estimate_factors_l1(const Eigen::VectorXd& z, const FactorModel& model,
                                   const LadOptions& opts = {});

/// sum_j |z_j - b_j^T w|.
double lad_objective(const Eigen::VectorXd& z, const Eigen::MatrixXd& loadings,
                     const Eigen::VectorXd& w);

/// #{j : p_j <= t}.
std::size_t count_rejections(const mmm::ZVector& z, double t);

struct FdpReport {
  double t = 0.0;
  std::size_t r = 0;
  double v_hat = 0.0;
  double fdp_hat = 0.0;
};

/// Principal-factor FDP estimate at threshold t in (0, 1]. Throws
/// InvalidThreshold or ShapeMismatch.
FdpReport estimate_fdp(const mmm::ZVector& z, const FactorModel& model,
                       const FactorEstimate& w, double t);

/// 2 Phi(-|a_j (z_j - b_j^T w)|).
Eigen::VectorXd adjusted_pvalues(const mmm::ZVector& z, const FactorModel& model,
                                 const FactorEstimate& w);

/// `points` thresholds log-spaced over [min, max]; a single point yields
/// {max}. Throws EmptyGrid for zero points, InvalidConfig for bad bounds.
std::vector<double> log_grid(double min, double max, std::size_t points);

std::vector<FdpReport> fdp_curve(const mmm::ZVector& z, const FactorModel& model,
                                 const FactorEstimate& w, std::span<const double> grid);

struct ThresholdResult {
  double t = 0.0;
  bool found = false;
  FdpReport report;
};

/// Largest grid value whose estimated FDP does not exceed alpha. When none
/// qualifies the smallest grid value is returned with found = false.
/// Comparisons allow a relative slack of 1e-12 so that values sitting on
/// the level up to roundoff count as meeting it.
ThresholdResult find_threshold(const mmm::ZVector& z, const FactorModel& model,
                               const FactorEstimate& w, double alpha,
                               std::span<const double> grid);

}  // namespace logitpfa::pfa
