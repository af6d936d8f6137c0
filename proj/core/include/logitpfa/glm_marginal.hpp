#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace logitpfa::glm {

/// One predictor column paired with the 0/1 outcome. Views only; the caller
/// owns the storage.
struct ObservationSet {
  std::span<const double> x;
  std::span<const double> y;

  std::size_t size() const { return x.size(); }

  /// Throws ShapeMismatch or DegenerateInput when the set cannot support a
  /// two-parameter logistic fit (n < 2, non-binary or single-class y,
  /// constant x).
  void validate() const;
};

struct SolverOptions {
  double tolerance = 1e-8;       // max-norm of the score vector
  int max_iterations = 50;
  double separation_bound = 1e3;  // |beta| above this aborts the fit
};

struct MarginalFit {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  Eigen::VectorXd pi_hat;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
};

/// sum_i y_i * eta_i - log(1 + exp(eta_i)) with eta_i = alpha + beta * x_i.
double log_likelihood(const ObservationSet& obs, double alpha, double beta);

/// Maximum-likelihood fit of logit P(y = 1 | x) = alpha + beta * x by
/// Newton-Raphson with step halving, started from the intercept-only MLE.
///
/// Throws DegenerateInput for invalid observation sets, SeparationDetected
/// when the classes are separable along x (the MLE does not exist) or when
/// |beta| crosses opts.separation_bound, and NoConvergence when the
/// iteration cap is reached.
MarginalFit fit_logistic(const ObservationSet& obs, const SolverOptions& opts = {});

/// Per-observation slope coordinate of I^{-1} (1, x_i)^T (y_i - pi_i), where
/// I is the averaged observed Fisher information of the fit. These are the
/// influence contributions whose outer products form the sandwich
/// covariance. Throws SingularInformation if I is numerically singular.
Eigen::VectorXd score_contributions(const MarginalFit& fit, const ObservationSet& obs);

}  // namespace logitpfa::glm
