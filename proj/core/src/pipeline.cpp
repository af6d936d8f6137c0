#include "logitpfa/pipeline.hpp"

#include <cmath>
#include <utility>

#include "logitpfa/parallel.hpp"

namespace logitpfa {
namespace {

struct ColumnOutcome {
  bool ok = false;
  double alpha = 0.0;
  double beta = 0.0;
  Eigen::VectorXd psi;
  DroppedColumn failure;
};

}  // namespace

double PipelineResult::explained_mass() const {
  const double total = eigen.eigenvalues.sum();
  if (!(total > 0.0)) return 0.0;
  return eigen.eigenvalues.head(static_cast<Eigen::Index>(model.k)).sum() / total;
}

PipelineResult run_pipeline(const Eigen::MatrixXd& x, std::span<const double> y,
                            const PipelineOptions& opts) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  if (y.size() != n) {
    throw Error(ErrorKind::kShapeMismatch, "outcome has " + std::to_string(y.size()) +
                                               " entries, predictors have " +
                                               std::to_string(n) + " rows");
  }

  std::vector<ColumnOutcome> outcomes(p);
  parallel_for(
      p,
      [&](std::size_t j) {
        ColumnOutcome& out = outcomes[j];
        const glm::ObservationSet obs{
            std::span<const double>(x.col(static_cast<Eigen::Index>(j)).data(), n), y};
        try {
          const glm::MarginalFit fit = glm::fit_logistic(obs, opts.solver);
          out.psi = glm::score_contributions(fit, obs);
          out.alpha = fit.alpha_hat;
          out.beta = fit.beta_hat;
          out.ok = true;
        } catch (const Error& e) {
          out.failure = {j, e.kind(), e.what()};
        }
      },
      opts.threads);

  PipelineResult result;
  result.n = n;
  result.input_columns = p;
  std::vector<Eigen::VectorXd> scores;
  std::vector<double> alphas;
  std::vector<double> betas;
  for (std::size_t j = 0; j < p; ++j) {
    ColumnOutcome& out = outcomes[j];
    if (!out.ok) {
      if (!opts.drop_failed_columns) {
        throw Error(out.failure.reason,
                    "column " + std::to_string(j) + ": " + out.failure.message);
      }
      result.dropped.push_back(std::move(out.failure));
      continue;
    }
    result.columns.push_back(j);
    scores.push_back(std::move(out.psi));
    alphas.push_back(out.alpha);
    betas.push_back(out.beta);
  }
  outcomes.clear();

  if (result.columns.size() < 2) {
    throw Error(ErrorKind::kTooFewColumns,
                std::to_string(result.columns.size()) + " column(s) survived fitting");
  }

  result.alpha_hat = Eigen::Map<const Eigen::VectorXd>(alphas.data(),
                                                        static_cast<Eigen::Index>(alphas.size()));
  result.beta_hat = Eigen::Map<const Eigen::VectorXd>(betas.data(),
                                                       static_cast<Eigen::Index>(betas.size()));

  const mmm::ScoreMatrix stacked = mmm::stack_scores(scores, result.columns);
  scores.clear();
  const mmm::CovarianceEstimate cov = mmm::estimate_covariance(stacked);
  const mmm::CorrelationMatrix corr = mmm::to_correlation(cov);
  result.z = mmm::z_statistics(result.beta_hat, cov);

  const Eigen::Index retained = stacked.p();
  if (stacked.n() < retained) {
    // corr = B^T B with B = psi diag(n sigma_jj)^{-1/2}.
    const Eigen::VectorXd scale =
        (cov.sigma.diagonal() * static_cast<double>(n)).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd factor = stacked.psi * scale.asDiagonal();
    result.eigen = pfa::spectral_decompose_factored(factor);
    result.factored_spectrum = true;
  } else {
    result.eigen = pfa::spectral_decompose(corr);
  }

  std::size_t k = 0;
  if (opts.k) {
    k = *opts.k;
    if (k < 1 || k > static_cast<std::size_t>(retained)) {
      throw Error(ErrorKind::kInvalidConfig, "forced k = " + std::to_string(k) +
                                                 " outside [1, " + std::to_string(retained) +
                                                 "]");
    }
  } else {
    k = pfa::select_num_factors(result.eigen.eigenvalues, opts.epsilon);
  }
  result.model = pfa::build_factor_model(result.eigen, k);

  result.factors = opts.factor_method == pfa::FactorMethod::kTrimmedLeastSquares
                       ? pfa::estimate_factors_l2(result.z.z, result.model)
                       : pfa::estimate_factors_l1(result.z.z, result.model, opts.lad);
  return result;
}

}  // namespace logitpfa
