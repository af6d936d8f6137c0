#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "logitpfa/error.hpp"
#include "logitpfa/glm_marginal.hpp"
#include "logitpfa/mmm.hpp"
#include "logitpfa/sim.hpp"
#include "oracles.hpp"

namespace glm = logitpfa::glm;
namespace mmm = logitpfa::mmm;
namespace sim = logitpfa::sim;
using logitpfa::Error;
using logitpfa::ErrorKind;

namespace {

Eigen::VectorXd column_scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::Index j,
                              double* beta = nullptr) {
  const Eigen::VectorXd col = x.col(j);
  const glm::ObservationSet obs{{col.data(), static_cast<std::size_t>(col.size())},
                                {y.data(), static_cast<std::size_t>(y.size())}};
  const glm::MarginalFit fit = glm::fit_logistic(obs);
  if (beta != nullptr) *beta = fit.beta_hat;
  return glm::score_contributions(fit, obs);
}

mmm::ScoreMatrix scores_for(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            Eigen::VectorXd* beta = nullptr) {
  std::vector<Eigen::VectorXd> cols;
  std::vector<std::size_t> index;
  if (beta != nullptr) beta->resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double b = 0.0;
    cols.push_back(column_scores(x, y, j, &b));
    if (beta != nullptr) (*beta)[j] = b;
    index.push_back(static_cast<std::size_t>(j));
  }
  return mmm::stack_scores(cols, index);
}

void random_design(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p, Eigen::MatrixXd& x,
                   Eigen::VectorXd& y) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;
  x.resize(n, p);
  y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = gauss(rng);
    y[i] = unit(rng) < 1.0 / (1.0 + std::exp(-0.5 * x(i, 0))) ? 1.0 : 0.0;
  }
}

mmm::CovarianceEstimate cov_from(const Eigen::MatrixXd& sigma, std::size_t n) {
  mmm::CovarianceEstimate cov;
  cov.sigma = sigma;
  cov.n = n;
  return cov;
}

}  // namespace

TEST(StackScores, SingleColumnIsTheScoreVector) {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  random_design(rng, 60, 1, x, y);
  const mmm::ScoreMatrix s = scores_for(x, y);
  EXPECT_EQ(s.p(), 1);
  EXPECT_EQ((s.psi.col(0) - column_scores(x, y, 0)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(StackScores, DuplicatedColumnsGiveIdenticalScores) {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  random_design(rng, 60, 2, x, y);
  x.col(1) = x.col(0);
  const mmm::ScoreMatrix s = scores_for(x, y);
  EXPECT_EQ((s.psi.col(0) - s.psi.col(1)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(StackScores, MatchesPerColumnConcatenation) {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  random_design(rng, 80, 3, x, y);
  const mmm::ScoreMatrix s = scores_for(x, y);
  ASSERT_EQ(s.n(), 80);
  ASSERT_EQ(s.p(), 3);
  const std::vector<double> yc(y.data(), y.data() + 80);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const std::vector<double> xc(x.col(j).data(), x.col(j).data() + 80);
    const oracle::LogitFit f = oracle::newton_logit(xc, yc);
    const std::vector<double> psi = oracle::score_oracle(xc, yc, f.pi);
    for (Eigen::Index i = 0; i < 80; ++i) EXPECT_NEAR(s.psi(i, j), psi[i], 1e-8);
  }
  EXPECT_EQ(s.columns, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(StackScores, RejectsRaggedInput) {
  std::vector<Eigen::VectorXd> cols = {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4)};
  EXPECT_THROW(mmm::stack_scores(cols, {0, 1}), Error);
  std::vector<Eigen::VectorXd> two = {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  EXPECT_THROW(mmm::stack_scores(two, {0}), Error);
}

TEST(EstimateCovariance, SingleColumnIsMeanSquare) {
  mmm::ScoreMatrix s;
  s.psi.resize(4, 1);
  s.psi << 1.0, -2.0, 3.0, 0.5;
  s.columns = {0};
  const mmm::CovarianceEstimate cov = mmm::estimate_covariance(s);
  EXPECT_NEAR(cov.sigma(0, 0), (1.0 + 4.0 + 9.0 + 0.25) / 4.0, 1e-15);
  EXPECT_EQ(cov.n, 4u);
}

TEST(EstimateCovariance, OrthogonalEqualNormColumnsGiveIdentity) {
  mmm::ScoreMatrix s;
  s.psi.resize(4, 2);
  s.psi << 1, 1, 1, -1, -1, 1, -1, -1;  // columns have norm 2 = sqrt(n)
  s.columns = {0, 1};
  const mmm::CovarianceEstimate cov = mmm::estimate_covariance(s);
  EXPECT_LT((cov.sigma - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EstimateCovariance, MatchesBruteForceAccumulation) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 50; ++rep) {
    mmm::ScoreMatrix s;
    s.psi.resize(5, 3);
    for (Eigen::Index i = 0; i < 5; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) s.psi(i, j) = gauss(rng);
    s.columns = {0, 1, 2};
    const mmm::CovarianceEstimate cov = mmm::estimate_covariance(s);
    for (Eigen::Index a = 0; a < 3; ++a) {
      for (Eigen::Index b = 0; b < 3; ++b) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < 5; ++i) acc += s.psi(i, a) * s.psi(i, b) / 5.0;
        EXPECT_NEAR(cov.sigma(a, b), acc, 1e-12);
      }
    }
    EXPECT_EQ((cov.sigma - cov.sigma.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(ToCorrelation, IdentityStaysIdentity) {
  const mmm::CorrelationMatrix c =
      mmm::to_correlation(cov_from(Eigen::MatrixXd::Identity(3, 3), 10));
  EXPECT_EQ((c.sigma_star - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ToCorrelation, PerfectlyCorrelatedPair) {
  Eigen::MatrixXd s(2, 2);
  s << 4, 2, 2, 1;
  const mmm::CorrelationMatrix c = mmm::to_correlation(cov_from(s, 10));
  EXPECT_LT((c.sigma_star - Eigen::MatrixXd::Ones(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ToCorrelation, MatchesElementwiseFormulaAndIsIdempotent) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd g(6, 4);
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 4; ++j) g(i, j) = gauss(rng);
    const Eigen::MatrixXd spd = g.transpose() * g + 0.1 * Eigen::MatrixXd::Identity(4, 4);
    const mmm::CorrelationMatrix c = mmm::to_correlation(cov_from(spd, 6));
    for (Eigen::Index a = 0; a < 4; ++a) {
      for (Eigen::Index b = 0; b < 4; ++b) {
        EXPECT_NEAR(c.sigma_star(a, b), spd(a, b) / std::sqrt(spd(a, a) * spd(b, b)), 1e-12);
      }
      EXPECT_EQ(c.sigma_star(a, a), 1.0);
    }
    const mmm::CorrelationMatrix again = mmm::to_correlation(cov_from(c.sigma_star, 6));
    EXPECT_LT((again.sigma_star - c.sigma_star).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(ToCorrelation, ScaleInvariant) {
  Eigen::MatrixXd s(3, 3);
  s << 2.0, 0.3, -0.4, 0.3, 1.5, 0.2, -0.4, 0.2, 3.0;
  const Eigen::Vector3d d(0.5, 7.0, 2.0);
  const Eigen::MatrixXd scaled = d.asDiagonal() * s * d.asDiagonal();
  const auto a = mmm::to_correlation(cov_from(s, 10));
  const auto b = mmm::to_correlation(cov_from(scaled, 10));
  EXPECT_LT((a.sigma_star - b.sigma_star).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ToCorrelation, ZeroVarianceIsReported) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2, 2);
  s(1, 1) = 0.0;
  try {
    mmm::to_correlation(cov_from(s, 10));
    FAIL() << "expected ZeroVariance";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kZeroVariance);
  }
}

TEST(ZStatistics, NullCoefficientAndArithmetic) {
  Eigen::VectorXd beta(2);
  beta << 0.0, 1.0;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);
  s(0, 0) = 3.0;
  s(1, 1) = 4.0;
  const mmm::ZVector z = mmm::z_statistics(beta, cov_from(s, 100));
  EXPECT_EQ(z.z[0], 0.0);
  EXPECT_EQ(z.p_values[0], 1.0);
  EXPECT_NEAR(z.z[1], 5.0, 1e-14);
  EXPECT_NEAR(z.p_values[1], oracle::two_sided(5.0), 1e-18);
}

TEST(ZStatistics, RejectsShapeMismatch) {
  EXPECT_THROW(mmm::z_statistics(Eigen::VectorXd::Zero(3), cov_from(Eigen::MatrixXd::Identity(2, 2), 5)),
               Error);
}

TEST(ZStatistics, NullZValuesAreStandardNormal) {
  sim::ScenarioConfig cfg;
  cfg.n = 400;
  cfg.p = 50;
  cfg.p1 = 0;
  cfg.k = 1;
  int accepted = 0;
  double max_offdiag_mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    cfg.seed = seed;
    const sim::Dataset data = sim::generate_dataset(cfg, 0);
    Eigen::VectorXd beta;
    const mmm::ScoreMatrix s = scores_for(data.x, data.y, &beta);
    const mmm::CovarianceEstimate cov = mmm::estimate_covariance(s);
    const mmm::ZVector z = mmm::z_statistics(beta, cov);
    std::vector<double> zs(z.z.data(), z.z.data() + z.z.size());
    if (oracle::ks_normal_accepts(zs)) ++accepted;
    const mmm::CorrelationMatrix c = mmm::to_correlation(cov);
    const double off = (c.sigma_star.cwiseAbs().sum() - 50.0) / (50.0 * 49.0);
    max_offdiag_mean = std::max(max_offdiag_mean, off);
  }
  EXPECT_GE(accepted, 95);
  EXPECT_LT(max_offdiag_mean, 0.3);
}
