// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Set LOGITPFA_ACCEPTANCE_QUICK=1 for a reduced replication
// count (smoke runs only; tolerances are calibrated for the full counts).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "logitpfa/csv.hpp"
#include "logitpfa/glm_marginal.hpp"
#include "logitpfa/mmm.hpp"
#include "logitpfa/pfa.hpp"
#include "logitpfa/pipeline.hpp"
#include "logitpfa/sim.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
namespace glm = logitpfa::glm;
namespace mmm = logitpfa::mmm;
namespace pfa = logitpfa::pfa;
namespace sim = logitpfa::sim;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  std::printf("%s  %-3s %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool within_factor(double value, double target, double factor) {
  return value >= target / factor && value <= target * factor;
}

std::size_t reps(std::size_t full) {
  const char* quick = std::getenv("LOGITPFA_ACCEPTANCE_QUICK");
  if (quick != nullptr && std::string(quick) == "1") return std::max<std::size_t>(full / 10, 10);
  return full;
}

sim::SimulationResult simulate(sim::ScenarioConfig cfg) {
  const auto start = std::chrono::steady_clock::now();
  sim::SimulationResult res = sim::run_replications(cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "  scenario %d p=%zu rho=%.1f k=%zu t=%g: %zu reps in %.1fs (%zu failed)\n",
               cfg.scenario, cfg.p, cfg.rho, cfg.k, cfg.t_fixed, cfg.replications, secs,
               res.failed);
  return res;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------- 1 .. 5

void criterion_1() {
  sim::ScenarioConfig cfg;
  cfg.replications = reps(1000);
  const sim::SimulationResult res = simulate(cfg);
  const sim::SummaryTable& s = res.summary;
  const bool ok = !res.flagged && s.median_fdp_hat >= 0.002 && s.median_fdp_hat <= 0.008 &&
                  s.mean_r >= 6.2 && s.mean_r <= 7.7 && s.mean_s >= 6.2 && s.mean_s <= 7.7 &&
                  within_factor(s.median_t_alpha, 1.24e-3, 2.0);
  report("1", ok,
         "Scenario 1 (p=500, t=1e-4, k=10): median FDP_hat=" + fmt("%.6f", s.median_fdp_hat) +
             " [0.002,0.008], mean R=" + fmt("%.3f", s.mean_r) + ", mean S=" +
             fmt("%.3f", s.mean_s) + " [6.2,7.7], median t_0.05=" + fmt("%.3e", s.median_t_alpha) +
             " (1.24e-3 x/ 2)");
}

void criterion_2() {
  sim::ScenarioConfig cfg;
  cfg.p = 1000;
  cfg.t_fixed = 0.005;
  cfg.replications = reps(300);
  const sim::SimulationResult res = simulate(cfg);
  const sim::SummaryTable& s = res.summary;
  const bool ok = !res.flagged && s.median_fdp_hat >= 0.18 && s.median_fdp_hat <= 0.38 &&
                  s.mean_r >= 12.0 && s.mean_r <= 16.5;
  report("2", ok,
         "Scenario 1 (p=1000, t=0.005, k=10): median FDP_hat=" + fmt("%.6f", s.median_fdp_hat) +
             " [0.18,0.38], mean R=" + fmt("%.3f", s.mean_r) + " [12,16.5]");
}

void criteria_3_4() {
  const double rhos[] = {0.2, 0.5, 0.8};
  const double reference_t[] = {2.41e-3, 7.41e-3, 3.49e-2};
  bool power_ok = true;
  bool trend_ok = true;
  std::string power_detail, trend_detail;
  double previous_t = 0.0;
  for (int i = 0; i < 3; ++i) {
    sim::ScenarioConfig cfg;
    cfg.scenario = 2;
    cfg.rho = rhos[i];
    cfg.k = 1;
    cfg.replications = reps(200);
    const sim::SimulationResult res = simulate(cfg);
    std::size_t full = 0;
    for (const auto& r : res.replications) full += (r.ok && r.s == cfg.p1) ? 1 : 0;
    const double share = static_cast<double>(full) / static_cast<double>(cfg.replications);
    const double mean_r = res.summary.mean_r;
    power_ok = power_ok && !res.flagged && share >= 0.99 && mean_r >= 9.8 && mean_r <= 10.5;
    power_detail += " rho=" + fmt("%.1f", rhos[i]) + ": S=10 in " + fmt("%.1f", 100.0 * share) +
                    "%, mean R=" + fmt("%.3f", mean_r) + ";";

    const double t = res.summary.median_t_alpha;
    trend_ok = trend_ok && t > previous_t && within_factor(t, reference_t[i], 3.0);
    previous_t = t;
    trend_detail += " rho=" + fmt("%.1f", rhos[i]) + ": " + fmt("%.3e", t) + " (" +
                    fmt("%.2e", reference_t[i]) + ");";
  }
  report("3", power_ok, "Scenario 2 full power (k=1, t=1e-4, need >=99%, R in [9.8,10.5]):" +
                            power_detail);
  report("4", trend_ok,
         "Scenario 2 median t_0.05 strictly increasing, each within x/ 3:" + trend_detail);
}

void criterion_5() {
  bool ok = true;
  std::string detail;
  for (double rho : {0.2, 0.5, 0.8}) {
    sim::ScenarioConfig cfg;
    cfg.scenario = 3;
    cfg.rho = rho;
    cfg.k = 1;
    cfg.replications = reps(200);
    const sim::SimulationResult res = simulate(cfg);
    ok = ok && !res.flagged && res.summary.mean_s >= 6.0 && res.summary.mean_s <= 7.8;
    detail += " rho=" + fmt("%.1f", rho) + ": " + fmt("%.3f", res.summary.mean_s) + ";";
  }
  report("5", ok, "Scenario 3 mean S in [6.0,7.8]:" + detail);
}

// ---------------------------------------------------------------- 6

mmm::ZVector z_from_pvalues(const Eigen::VectorXd& z) {
  mmm::ZVector out;
  out.z = z;
  out.p_values.resize(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) out.p_values[j] = oracle::two_sided(z[j]);
  return out;
}

void criterion_6a() {
  sim::ScenarioConfig cfg;
  cfg.k = 1;
  const sim::Dataset d = sim::generate_dataset(cfg, 0);
  logitpfa::PipelineOptions opts;
  opts.k = 1;
  const logitpfa::PipelineResult res =
      logitpfa::run_pipeline(d.x, std::span<const double>(d.y.data(), cfg.n), opts);
  const Eigen::Index p = res.z.z.size();
  const pfa::FactorModel zero = pfa::FactorModel::zero(p, 1);
  pfa::FactorEstimate w;
  w.w_hat = Eigen::VectorXd::Zero(1);
  double worst = 0.0;
  for (double t : pfa::log_grid(1e-6, 1.0, 50)) {
    const pfa::FdpReport r = pfa::estimate_fdp(res.z, zero, w, t);
    const double rr = static_cast<double>(r.r);
    const double expected = r.r == 0 ? 0.0 : std::min(static_cast<double>(p) * t, rr) / rr;
    worst = std::max(worst, std::abs(r.fdp_hat - expected));
  }
  report("6a", worst <= 1e-12,
         "zero factor model FDP_hat = min(p t, R)/R on 50-point grid, max |diff|=" +
             fmt("%.2e", worst));
}

void criterion_6b() {
  std::mt19937_64 rng(6002);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index p = 5 + rep % 11;
    const Eigen::Index k = 1 + rep % 3;
    pfa::FactorModel m;
    m.k = static_cast<std::size_t>(k);
    m.loadings.resize(p, k);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index h = 0; h < k; ++h) m.loadings(j, h) = unit(rng);
      const double nrm = m.loadings.row(j).norm();
      if (nrm > 0.9) m.loadings.row(j) *= 0.9 * std::abs(unit(rng)) / nrm;
    }
    m.a.resize(p);
    m.capped.assign(static_cast<std::size_t>(p), false);
    for (Eigen::Index j = 0; j < p; ++j) m.a[j] = 1.0 / std::sqrt(1.0 - m.loadings.row(j).squaredNorm());
    pfa::FactorEstimate w;
    w.w_hat.resize(k);
    for (Eigen::Index h = 0; h < k; ++h) w.w_hat[h] = 1.5 * gauss(rng);
    Eigen::VectorXd z = m.loadings * w.w_hat;
    for (Eigen::Index j = 0; j < p; ++j) z[j] += 1.5 * gauss(rng);
    const double t = std::pow(10.0, -4.0 * std::abs(unit(rng)));
    const mmm::ZVector zv = z_from_pvalues(z);

    // Direct evaluation with the independent normal CDF.
    const double q = oracle::phi_inv(t / 2.0);
    std::size_t r = 0;
    double sum = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (oracle::two_sided(z[j]) <= t) ++r;
      double eta = 0.0, b2 = 0.0;
      for (Eigen::Index h = 0; h < k; ++h) {
        eta += m.loadings(j, h) * w.w_hat[h];
        b2 += m.loadings(j, h) * m.loadings(j, h);
      }
      const double a = 1.0 / std::sqrt(1.0 - b2);
      sum += oracle::phi(a * (q + eta)) + oracle::phi(a * (q - eta));
      const double adj = oracle::two_sided(a * (z[j] - eta));
      worst = std::max(worst, std::abs(pfa::adjusted_pvalues(zv, m, w)[j] - adj));
    }
    const double expected = r == 0 ? 0.0 : std::min(sum, static_cast<double>(r)) / static_cast<double>(r);
    worst = std::max(worst, std::abs(pfa::estimate_fdp(zv, m, w, t).fdp_hat - expected));
  }
  report("6b", worst <= 1e-10,
         "estimate_fdp and adjusted_pvalues vs direct formula on 50 instances, max |diff|=" +
             fmt("%.2e", worst));
}

void criterion_6c() {
  std::mt19937_64 rng(6003);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;
  std::uniform_int_distribution<int> size(8, 60);
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const int n = size(rng);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = gauss(rng);
      y[i] = unit(rng) < 1.0 / (1.0 + std::exp(-(0.2 + x[i]))) ? 1.0 : 0.0;
    }
    double lo1 = 1e300, hi1 = -1e300, lo0 = 1e300, hi0 = -1e300;
    for (int i = 0; i < n; ++i) {
      (y[i] > 0.5 ? lo1 : lo0) = std::min(y[i] > 0.5 ? lo1 : lo0, x[i]);
      (y[i] > 0.5 ? hi1 : hi0) = std::max(y[i] > 0.5 ? hi1 : hi0, x[i]);
    }
    if (!(hi0 > lo1 && hi1 > lo0)) continue;  // separated or single-class
    const oracle::LogitFit expected = oracle::newton_logit(x, y);
    const glm::MarginalFit fit = glm::fit_logistic({x, y});
    worst = std::max({worst, std::abs(fit.alpha_hat - expected.alpha),
                      std::abs(fit.beta_hat - expected.beta)});
    ++done;
  }
  report("6c", worst <= 1e-6,
         "fit_logistic vs independent Newton-Raphson on 100 datasets, max |diff|=" +
             fmt("%.2e", worst));
}

void criterion_6d() {
  std::mt19937_64 rng(6004);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    mmm::ScoreMatrix s;
    s.psi.resize(5, 3);
    for (Eigen::Index i = 0; i < 5; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) s.psi(i, j) = gauss(rng);
    s.columns = {0, 1, 2};
    const mmm::CovarianceEstimate cov = mmm::estimate_covariance(s);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        double acc = 0.0;
        for (int i = 0; i < 5; ++i) acc += s.psi(i, a) * s.psi(i, b) / 5.0;
        worst = std::max(worst, std::abs(cov.sigma(a, b) - acc));
      }
    }
  }
  report("6d", worst <= 1e-12,
         "estimate_covariance vs brute-force accumulation on 100 5x3 inputs, max |diff|=" +
             fmt("%.2e", worst));
}

void criterion_6e() {
  std::mt19937_64 rng(6005);
  std::normal_distribution<double> gauss;
  bool ok = true;
  std::string detail;
  for (Eigen::Index p : {5, 50, 500}) {
    Eigen::MatrixXd g(p + 30, p);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < p; ++j) g(i, j) = gauss(rng) + (j % 4 == 0 ? gauss(rng) : 0.0);
    mmm::CovarianceEstimate cov;
    cov.sigma = g.transpose() * g / static_cast<double>(g.rows());
    cov.n = static_cast<std::size_t>(g.rows());
    const mmm::CorrelationMatrix c = mmm::to_correlation(cov);
    const pfa::EigenDecomposition eig = pfa::spectral_decompose(c);
    const Eigen::MatrixXd rebuilt =
        eig.eigenvectors * eig.eigenvalues.asDiagonal() * eig.eigenvectors.transpose();
    const double err = (c.sigma_star - rebuilt).norm();
    ok = ok && err <= 1e-8 * static_cast<double>(p);
    detail += " p=" + std::to_string(p) + ": " + fmt("%.2e", err) + ";";
  }
  report("6e", ok, "eigen reconstruction ||S - sum lambda g g'||_F <= 1e-8 p:" + detail);
}

void criterion_6f() {
  sim::ScenarioConfig cfg;
  cfg.p = 50;
  cfg.p1 = 0;
  cfg.k = 1;
  int accepted = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    cfg.seed = seed;
    const sim::Dataset d = sim::generate_dataset(cfg, 0);
    logitpfa::PipelineOptions opts;
    opts.k = 1;
    const logitpfa::PipelineResult res =
        logitpfa::run_pipeline(d.x, std::span<const double>(d.y.data(), cfg.n), opts);
    std::vector<double> p(res.z.p_values.data(), res.z.p_values.data() + res.z.p_values.size());
    if (p.size() == cfg.p && oracle::ks_uniform_accepts(p)) ++accepted;
  }
  report("6f", accepted >= 95,
         "all-null p-values pass KS uniformity at 0.01 in " + std::to_string(accepted) +
             "/100 seeds (need >= 95)");
}

void criterion_6g() {
  std::mt19937_64 rng(6007);
  std::uniform_real_distribution<double> unit;
  bool ok = true;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t p = 1 + rng() % 200;
    std::vector<double> pv(p);
    sim::GroundTruth truth;
    for (std::size_t j = 0; j < p; ++j) {
      pv[j] = unit(rng);
      truth.null_mask.push_back(unit(rng) < 0.8);
    }
    const sim::DecisionPattern d = sim::decision_pattern(pv, truth, unit(rng));
    ok = ok && d.u + d.v == truth.p0() && d.t + d.s == truth.p1() && d.v + d.s == d.r;
  }
  report("6g", ok, "decision_pattern U+V=p0, T+S=p1, V+S=R on 1000 random instances");
}

// ---------------------------------------------------------------- 7

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LOGITPFA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion_7() {
  const fs::path dir = fs::temp_directory_path() / "logitpfa_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();
  bool ok = true;
  std::string detail;

  const std::string sim_args = "simulate --scenario 2 --rho 0.5 --k 1 --reps 5 --seed 9 --out ";
  ok = ok && run_cli(sim_args + d + "/s1") == 0 && run_cli(sim_args + d + "/s2") == 0;
  for (const char* f : {"summary.csv", "replications.csv"}) {
    const std::string a = slurp(dir / "s1" / f);
    ok = ok && !a.empty() && a == slurp(dir / "s2" / f);
  }

  ok = ok && run_cli("generate --seed 9 --out " + d + "/data.csv") == 0;
  const std::string an_args = "analyze --input " + d + "/data.csv --labels y --t 1e-4 --out ";
  ok = ok && run_cli(an_args + d + "/a1") == 0 && run_cli(an_args + d + "/a2") == 0;
  for (const char* f :
       {"hypotheses.csv", "dropped.csv", "fdp_curve.csv", "z_histogram.csv", "summary.json"}) {
    const std::string a = slurp(dir / "a1" / f);
    ok = ok && !a.empty() && a == slurp(dir / "a2" / f);
  }
  fs::remove_all(dir);
  report("7", ok, "simulate and analyze outputs byte-identical across two runs");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::function<void()>> criteria = {
      criterion_1,  criterion_2,  criteria_3_4, criterion_5,  criterion_6a, criterion_6b,
      criterion_6c, criterion_6d, criterion_6e, criterion_6f, criterion_6g, criterion_7};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      report("?", false, std::string("exception: ") + e.what());
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d failing criteria, %.0fs\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
