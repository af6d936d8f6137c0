#include <vector>

#include <benchmark/benchmark.h>

#include "logitpfa/glm_marginal.hpp"
#include "logitpfa/mmm.hpp"
#include "logitpfa/pfa.hpp"
#include "logitpfa/pipeline.hpp"
#include "logitpfa/sim.hpp"

namespace glm = logitpfa::glm;
namespace mmm = logitpfa::mmm;
namespace pfa = logitpfa::pfa;
namespace sim = logitpfa::sim;

namespace {

sim::Dataset dataset(std::size_t n, std::size_t p) {
  sim::ScenarioConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.k = 1;
  return sim::generate_dataset(cfg, 0);
}

mmm::ScoreMatrix scores(const sim::Dataset& d) {
  std::vector<Eigen::VectorXd> cols;
  std::vector<std::size_t> index;
  const std::span<const double> y(d.y.data(), static_cast<std::size_t>(d.y.size()));
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
    const glm::ObservationSet obs{{d.x.col(j).data(), static_cast<std::size_t>(d.x.rows())}, y};
    cols.push_back(glm::score_contributions(glm::fit_logistic(obs), obs));
    index.push_back(static_cast<std::size_t>(j));
  }
  return mmm::stack_scores(cols, index);
}

}  // namespace

static void BM_FitLogistic(benchmark::State& state) {
  const sim::Dataset d = dataset(static_cast<std::size_t>(state.range(0)), 20);
  const glm::ObservationSet obs{{d.x.col(0).data(), static_cast<std::size_t>(d.x.rows())},
                                {d.y.data(), static_cast<std::size_t>(d.y.size())}};
  for (auto _ : state) benchmark::DoNotOptimize(glm::fit_logistic(obs));
}
BENCHMARK(BM_FitLogistic)->Arg(400)->Arg(4000);

static void BM_Covariance(benchmark::State& state) {
  const mmm::ScoreMatrix s = scores(dataset(400, static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(mmm::estimate_covariance(s));
}
BENCHMARK(BM_Covariance)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_EigenDense(benchmark::State& state) {
  const mmm::CorrelationMatrix c = mmm::to_correlation(
      mmm::estimate_covariance(scores(dataset(400, static_cast<std::size_t>(state.range(0))))));
  for (auto _ : state) benchmark::DoNotOptimize(pfa::spectral_decompose(c));
}
BENCHMARK(BM_EigenDense)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_EigenFactored(benchmark::State& state) {
  const mmm::ScoreMatrix s = scores(dataset(400, static_cast<std::size_t>(state.range(0))));
  const mmm::CovarianceEstimate cov = mmm::estimate_covariance(s);
  Eigen::MatrixXd factor = s.psi;
  for (Eigen::Index j = 0; j < factor.cols(); ++j)
    factor.col(j) /= std::sqrt(static_cast<double>(s.n()) * cov.sigma(j, j));
  for (auto _ : state) benchmark::DoNotOptimize(pfa::spectral_decompose_factored(factor));
}
BENCHMARK(BM_EigenFactored)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Replication(benchmark::State& state) {
  sim::ScenarioConfig cfg;
  cfg.p = static_cast<std::size_t>(state.range(0));
  std::size_t index = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_replication(cfg, index++));
}
BENCHMARK(BM_Replication)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
