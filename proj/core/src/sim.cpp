#include "logitpfa/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "logitpfa/csv.hpp"
#include "logitpfa/error.hpp"
#include "logitpfa/parallel.hpp"
#include "logitpfa/pfa.hpp"
#include "logitpfa/pipeline.hpp"

namespace logitpfa::sim {
namespace {

std::mt19937_64 replication_engine(std::uint64_t seed, std::size_t index) {
  const auto rep = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
  return std::mt19937_64(seq);
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(),
                                          values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidConfig, what); };
  if (scenario < 1 || scenario > 3) fail("scenario must be 1, 2 or 3");
  if (n < 2) fail("n must be at least 2");
  if (p < 2) fail("p must be at least 2");
  if (p1 >= p) fail("p1 must be smaller than p");
  if (!(rho >= 0.0 && rho < 1.0)) fail("rho must lie in [0, 1)");
  if (!std::isfinite(beta_signal)) fail("beta must be finite");
  if (replications == 0) fail("replications must be positive");
  if (!(t_fixed > 0.0 && t_fixed <= 1.0)) fail("t must lie in (0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (k < 1 || k > static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(p)))) {
    fail("k must lie in [1, floor(0.9 p)]");
  }
  pfa::log_grid(grid_min, grid_max, grid_points);
}

std::size_t GroundTruth::p0() const {
  return static_cast<std::size_t>(std::count(null_mask.begin(), null_mask.end(), true));
}

Dataset generate_dataset(const ScenarioConfig& cfg, std::size_t replication_index) {
  cfg.validate();
  std::mt19937_64 engine = replication_engine(cfg.seed, replication_index);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto p = static_cast<Eigen::Index>(cfg.p);
  const auto p1 = static_cast<Eigen::Index>(cfg.p1);
  const bool signal_shared = cfg.scenario == 2;
  const bool null_shared = cfg.scenario == 2 || cfg.scenario == 3;
  const double common = std::sqrt(cfg.rho);
  const double idio = std::sqrt(1.0 - cfg.rho);

  Dataset data;
  data.x.resize(n, p);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g_signal = signal_shared ? gauss(engine) : 0.0;
    const double g_null = null_shared ? gauss(engine) : 0.0;
    double eta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double e = gauss(engine);
      double v = e;
      if (j < p1 && signal_shared) v = common * g_signal + idio * e;
      if (j >= p1 && null_shared) v = common * g_null + idio * e;
      data.x(i, j) = v;
      if (j < p1) eta += cfg.beta_signal * v;
    }
    const double prob = 1.0 / (1.0 + std::exp(-eta));
    data.y[i] = unit(engine) < prob ? 1.0 : 0.0;
  }

  data.truth.null_mask.assign(cfg.p, true);
  std::fill_n(data.truth.null_mask.begin(), cfg.p1, false);
  return data;
}

DecisionPattern decision_pattern(std::span<const double> p_values, const GroundTruth& truth,
                                 double t) {
  if (p_values.size() != truth.null_mask.size()) {
    throw Error(ErrorKind::kShapeMismatch, "p-values and ground truth differ in length");
  }
  DecisionPattern d;
  for (std::size_t j = 0; j < p_values.size(); ++j) {
    const bool rejected = p_values[j] <= t;
    if (truth.null_mask[j]) {
      rejected ? ++d.v : ++d.u;
    } else {
      rejected ? ++d.s : ++d.t;
    }
  }
  d.r = d.v + d.s;
  return d;
}

ReplicationResult run_replication(const ScenarioConfig& cfg, std::size_t index) {
  ReplicationResult rep;
  rep.index = index;
  try {
    const Dataset data = generate_dataset(cfg, index);

    PipelineOptions opts;
    opts.k = cfg.k;
    opts.factor_method = pfa::FactorMethod::kTrimmedLeastSquares;
    const PipelineResult result =
        run_pipeline(data.x, std::span<const double>(data.y.data(), cfg.n), opts);

    // Hypotheses whose fit failed are never rejected.
    Eigen::VectorXd p_full = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(cfg.p));
    for (std::size_t j = 0; j < result.columns.size(); ++j) {
      p_full[static_cast<Eigen::Index>(result.columns[j])] =
          result.z.p_values[static_cast<Eigen::Index>(j)];
    }
    const DecisionPattern pattern = decision_pattern(
        std::span<const double>(p_full.data(), cfg.p), data.truth, cfg.t_fixed);

    const pfa::FdpReport report =
        pfa::estimate_fdp(result.z, result.model, result.factors, cfg.t_fixed);
    const std::vector<double> grid = pfa::log_grid(cfg.grid_min, cfg.grid_max, cfg.grid_points);
    const pfa::ThresholdResult threshold =
        pfa::find_threshold(result.z, result.model, result.factors, cfg.alpha, grid);

    rep.fdp_hat = report.fdp_hat;
    rep.r = pattern.r;
    rep.s = pattern.s;
    rep.v = pattern.v;
    rep.realized_fdp = static_cast<double>(pattern.v) /
                       static_cast<double>(std::max<std::size_t>(pattern.r, 1));
    rep.t_alpha = threshold.t;
    rep.t_alpha_found = threshold.found;
    rep.ok = true;
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.error = e.what();
  }
  return rep;
}

SummaryTable summarize(std::span<const ReplicationResult> replications) {
  std::vector<double> fdp, r, s, t_alpha;
  for (const ReplicationResult& rep : replications) {
    if (!rep.ok) continue;
    fdp.push_back(rep.fdp_hat);
    r.push_back(static_cast<double>(rep.r));
    s.push_back(static_cast<double>(rep.s));
    t_alpha.push_back(rep.t_alpha);
  }
  SummaryTable table;
  table.completed = fdp.size();
  table.median_fdp_hat = median(fdp);
  table.se_fdp_hat = sample_sd(fdp);
  table.mean_r = mean(r);
  table.se_r = sample_sd(r);
  table.mean_s = mean(s);
  table.se_s = sample_sd(s);
  table.median_t_alpha = median(t_alpha);
  return table;
}

SimulationResult run_replications(const ScenarioConfig& cfg) {
  cfg.validate();
  SimulationResult result;
  result.replications.resize(cfg.replications);
  parallel_for(
      cfg.replications,
      [&](std::size_t i) { result.replications[i] = run_replication(cfg, i); },
      cfg.threads == 0 ? thread_count() : cfg.threads);

  result.failed = static_cast<std::size_t>(
      std::count_if(result.replications.begin(), result.replications.end(),
                    [](const ReplicationResult& rep) { return !rep.ok; }));
  result.flagged = static_cast<double>(result.failed) >
                   0.01 * static_cast<double>(cfg.replications);
  result.summary = summarize(result.replications);
  return result;
}

void write_summary_csv(std::ostream& out, const ScenarioConfig& cfg,
                       const SimulationResult& result) {
  const SummaryTable& s = result.summary;
  out << "scenario,n,p,p1,rho,beta,replications,t,alpha,k,seed,completed,failed,flagged,"
         "median_fdp_hat,se_fdp_hat,mean_r,se_r,mean_s,se_s,median_t_alpha\n";
  out << cfg.scenario << ',' << cfg.n << ',' << cfg.p << ',' << cfg.p1 << ','
      << format_double(cfg.rho) << ',' << format_double(cfg.beta_signal) << ','
      << cfg.replications << ',' << format_double(cfg.t_fixed) << ','
      << format_double(cfg.alpha) << ',' << cfg.k << ',' << cfg.seed << ',' << s.completed
      << ',' << result.failed << ',' << (result.flagged ? 1 : 0) << ','
      << format_double(s.median_fdp_hat) << ',' << format_double(s.se_fdp_hat) << ','
      << format_double(s.mean_r) << ',' << format_double(s.se_r) << ','
      << format_double(s.mean_s) << ',' << format_double(s.se_s) << ','
      << format_double(s.median_t_alpha) << '\n';
}

void write_replications_csv(std::ostream& out, const SimulationResult& result) {
  out << "replication,status,fdp_hat,r,s,v,realized_fdp,t_alpha,t_alpha_found,error\n";
  for (const ReplicationResult& rep : result.replications) {
    out << rep.index << ',' << (rep.ok ? "ok" : "failed") << ',';
    if (rep.ok) {
      out << format_double(rep.fdp_hat) << ',' << rep.r << ',' << rep.s << ',' << rep.v << ','
          << format_double(rep.realized_fdp) << ',' << format_double(rep.t_alpha) << ','
          << (rep.t_alpha_found ? 1 : 0) << ',';
    } else {
      out << ",,,,,,,";
    }
    out << quote_field(rep.error) << '\n';
  }
}

}  // namespace logitpfa::sim
