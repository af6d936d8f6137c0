#include "logitpfa/glm_marginal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "logitpfa/error.hpp"

namespace logitpfa::glm {
namespace {

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow.
double softplus(double eta) {
  return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
}

// Complete or quasi-complete separation of a single predictor with an
// intercept: one class lies entirely on one side of a cut point.
bool separable(const ObservationSet& obs) {
  double max0 = -std::numeric_limits<double>::infinity();
  double min0 = std::numeric_limits<double>::infinity();
  double max1 = max0;
  double min1 = min0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs.y[i] > 0.5) {
      max1 = std::max(max1, obs.x[i]);
      min1 = std::min(min1, obs.x[i]);
    } else {
      max0 = std::max(max0, obs.x[i]);
      min0 = std::min(min0, obs.x[i]);
    }
  }
  return max0 <= min1 || max1 <= min0;
}

struct Derivatives {
  double g0 = 0.0, g1 = 0.0;            // score
  double h00 = 0.0, h01 = 0.0, h11 = 0.0;  // information
};

Derivatives derivatives(const ObservationSet& obs, double alpha, double beta) {
  Derivatives d;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double x = obs.x[i];
    const double pi = logistic(alpha + beta * x);
    const double r = obs.y[i] - pi;
    const double w = pi * (1.0 - pi);
    d.g0 += r;
    d.g1 += x * r;
    d.h00 += w;
    d.h01 += w * x;
    d.h11 += w * x * x;
  }
  return d;
}

}  // namespace

void ObservationSet::validate() const {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kShapeMismatch,
                "x has " + std::to_string(x.size()) + " entries, y has " +
                    std::to_string(y.size()));
  }
  if (x.size() < 2) throw Error(ErrorKind::kDegenerateInput, "need at least 2 observations");

  std::size_t ones = 0;
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw Error(ErrorKind::kDegenerateInput, "outcome must be 0/1");
    if (v == 1.0) ++ones;
  }
  if (ones == 0 || ones == y.size()) {
    throw Error(ErrorKind::kDegenerateInput, "outcome has a single class");
  }

  double mean = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kDegenerateInput, "non-finite predictor value");
    mean += v;
  }
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  if (!(ss > 0.0)) throw Error(ErrorKind::kDegenerateInput, "predictor is constant");
}

double log_likelihood(const ObservationSet& obs, double alpha, double beta) {
  double ll = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double eta = alpha + beta * obs.x[i];
    ll += obs.y[i] * eta - softplus(eta);
  }
  return ll;
}

MarginalFit fit_logistic(const ObservationSet& obs, const SolverOptions& opts) {
  obs.validate();
  if (separable(obs)) {
    throw Error(ErrorKind::kSeparationDetected, "outcome classes are separable along the predictor");
  }

  const auto n = static_cast<double>(obs.size());
  double ybar = 0.0;
  for (double v : obs.y) ybar += v;
  ybar /= n;

  double alpha = std::log(ybar / (1.0 - ybar));
  double beta = 0.0;
  double ll = log_likelihood(obs, alpha, beta);

  MarginalFit fit;
  for (int iter = 0;; ++iter) {
    const Derivatives d = derivatives(obs, alpha, beta);
    if (std::max(std::abs(d.g0), std::abs(d.g1)) < opts.tolerance) {
      fit.converged = true;
      fit.iterations = iter;
      break;
    }
    if (iter >= opts.max_iterations) {
      throw Error(ErrorKind::kNoConvergence,
                  "score did not fall below tolerance in " + std::to_string(iter) + " iterations");
    }

    const double det = d.h00 * d.h11 - d.h01 * d.h01;
    if (!(det > 0.0)) {
      throw Error(ErrorKind::kSeparationDetected, "information matrix lost positive definiteness");
    }
    const double step_alpha = (d.h11 * d.g0 - d.h01 * d.g1) / det;
    const double step_beta = (d.h00 * d.g1 - d.h01 * d.g0) / det;

    double scale = 1.0;
    double next_alpha = alpha + step_alpha;
    double next_beta = beta + step_beta;
    double next_ll = log_likelihood(obs, next_alpha, next_beta);
    // Near the optimum the gain is below the resolution of ll itself; only
    // a decrease beyond roundoff counts as overshooting.
    const double slack = 1e-12 * (1.0 + std::abs(ll));
    for (int halving = 0; halving < 40 && !(next_ll >= ll - slack); ++halving) {
      scale *= 0.5;
      next_alpha = alpha + scale * step_alpha;
      next_beta = beta + scale * step_beta;
      next_ll = log_likelihood(obs, next_alpha, next_beta);
    }
    alpha = next_alpha;
    beta = next_beta;
    ll = next_ll;

    if (std::abs(beta) > opts.separation_bound || !std::isfinite(beta)) {
      throw Error(ErrorKind::kSeparationDetected,
                  "slope magnitude exceeded " + std::to_string(opts.separation_bound));
    }
  }

  fit.alpha_hat = alpha;
  fit.beta_hat = beta;
  fit.log_likelihood = ll;
  fit.pi_hat.resize(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    fit.pi_hat[static_cast<Eigen::Index>(i)] = logistic(alpha + beta * obs.x[i]);
  }
  return fit;
}

Eigen::VectorXd score_contributions(const MarginalFit& fit, const ObservationSet& obs) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  if (fit.pi_hat.size() != n) {
    throw Error(ErrorKind::kShapeMismatch, "fit and observation set differ in length");
  }
  if (!fit.converged) {
    throw Error(ErrorKind::kNoConvergence, "score contributions need a converged fit");
  }

  double i00 = 0.0, i01 = 0.0, i11 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pi = fit.pi_hat[i];
    const double w = pi * (1.0 - pi);
    const double x = obs.x[static_cast<std::size_t>(i)];
    i00 += w;
    i01 += w * x;
    i11 += w * x * x;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  i00 *= inv_n;
  i01 *= inv_n;
  i11 *= inv_n;

  const double det = i00 * i11 - i01 * i01;
  if (!(det > 1e-14 * i00 * i11)) {
    throw Error(ErrorKind::kSingularInformation, "averaged Fisher information is singular");
  }

  // Second row of the 2x2 inverse is (-i01, i00) / det.
  Eigen::VectorXd psi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = obs.x[static_cast<std::size_t>(i)];
    psi[i] = (i00 * x - i01) * (obs.y[static_cast<std::size_t>(i)] - fit.pi_hat[i]) / det;
  }
  return psi;
}

}  // namespace logitpfa::glm
