#include "logitpfa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "logitpfa/error.hpp"
#include "logitpfa/parallel.hpp"

namespace logitpfa::analysis {
namespace {

std::vector<HistogramBin> histogram(const Eigen::VectorXd& values, std::size_t bins) {
  std::vector<HistogramBin> out;
  if (values.size() == 0 || bins == 0) return out;
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  out.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lower = lo + width * static_cast<double>(b);
    out[b].upper = b + 1 == bins ? std::max(hi, lo + width) : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    ++out[std::min(b, bins - 1)].count;
  }
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kInvalidConfig, "cannot write " + path.string());
  return out;
}

nlohmann::ordered_json fdp_json(const pfa::FdpReport& r) {
  return {{"t", r.t}, {"r", r.r}, {"v_hat", r.v_hat}, {"fdp_hat", r.fdp_hat}};
}

}  // namespace

std::string_view to_string(pfa::FactorMethod method) {
  return method == pfa::FactorMethod::kTrimmedLeastSquares ? "l2" : "l1";
}

void AnalysisConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidConfig, what); };
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (!k && !(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
  if (k && *k == 0) fail("k must be positive");
  for (double t : fixed_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) fail("fixed thresholds must lie in (0, 1]");
  }
  pfa::log_grid(grid_min, grid_max, grid_points);
}

AnalysisReport analyze(const LabeledData& data, const AnalysisConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(data.x.cols()) != data.labels.size()) {
    throw Error(ErrorKind::kShapeMismatch, "label list does not match predictor columns");
  }

  PipelineOptions opts;
  opts.k = cfg.k;
  opts.epsilon = cfg.epsilon;
  opts.factor_method = cfg.factor_method;
  opts.drop_failed_columns = cfg.drop_policy == DropPolicy::kDrop;
  opts.threads = cfg.threads == 0 ? thread_count() : cfg.threads;
  const PipelineResult result =
      run_pipeline(data.x, std::span<const double>(data.y.data(), data.y.size()), opts);

  AnalysisReport report;
  report.n = result.n;
  report.input_columns = result.input_columns;
  report.k = result.k();
  report.k_forced = cfg.k.has_value();
  report.epsilon = cfg.epsilon;
  report.explained_mass = result.explained_mass();
  report.residual_frobenius = result.model.residual_frobenius;
  report.capped = result.model.capped_count();
  report.clamped_negative_eigenvalues = result.eigen.clamped_negative;
  report.factored_spectrum = result.factored_spectrum;
  report.factor_method = result.factors.method;
  report.w_hat = result.factors.w_hat;
  report.alpha = cfg.alpha;

  const std::vector<double> grid = pfa::log_grid(cfg.grid_min, cfg.grid_max, cfg.grid_points);
  report.fdp_curve.resize(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        report.fdp_curve[i] = pfa::estimate_fdp(result.z, result.model, result.factors, grid[i]);
      },
      opts.threads);
  report.threshold = pfa::find_threshold(result.z, result.model, result.factors, cfg.alpha, grid);
  for (double t : cfg.fixed_thresholds) {
    report.fixed.push_back(pfa::estimate_fdp(result.z, result.model, result.factors, t));
  }

  const Eigen::VectorXd adjusted = pfa::adjusted_pvalues(result.z, result.model, result.factors);
  report.hypotheses.resize(result.columns.size());
  for (std::size_t j = 0; j < result.columns.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    HypothesisRecord& h = report.hypotheses[j];
    h.column = result.columns[j];
    h.label = data.labels[h.column];
    h.beta_hat = result.beta_hat[jj];
    h.z = result.z.z[jj];
    h.p_value = result.z.p_values[jj];
    h.adjusted_p = adjusted[jj];
    h.capped = result.model.capped[j];
    h.rejected = report.threshold.found && h.adjusted_p <= report.threshold.t;
  }
  std::sort(report.hypotheses.begin(), report.hypotheses.end(),
            [](const HypothesisRecord& a, const HypothesisRecord& b) {
              if (a.adjusted_p != b.adjusted_p) return a.adjusted_p < b.adjusted_p;
              return a.column < b.column;
            });

  for (const DroppedColumn& d : result.dropped) {
    report.dropped.push_back(
        {d.column, data.labels[d.column], std::string(logitpfa::to_string(d.reason)), d.message});
  }

  const Eigen::VectorXd& z = result.z.z;
  report.z_mean = z.mean();
  report.z_sd = z.size() > 1
                    ? std::sqrt((z.array() - report.z_mean).square().sum() /
                                static_cast<double>(z.size() - 1))
                    : 0.0;
  report.z_histogram = histogram(z, cfg.histogram_bins);
  return report;
}

AnalysisReport analyze(const AnalysisConfig& cfg) {
  cfg.validate();
  return analyze(read_labeled_csv(cfg.input, cfg.labels), cfg);
}

void write_hypotheses_csv(std::ostream& out, const AnalysisReport& report) {
  out << "column,label,beta_hat,z,p_value,adjusted_p_value,a_capped,rejected\n";
  for (const HypothesisRecord& h : report.hypotheses) {
    out << h.column << ',' << quote_field(h.label) << ',' << format_double(h.beta_hat) << ','
        << format_double(h.z) << ',' << format_double(h.p_value) << ','
        << format_double(h.adjusted_p) << ',' << (h.capped ? 1 : 0) << ','
        << (h.rejected ? 1 : 0) << '\n';
  }
}

void write_dropped_csv(std::ostream& out, const AnalysisReport& report) {
  out << "column,label,reason,message\n";
  for (const DroppedRecord& d : report.dropped) {
    out << d.column << ',' << quote_field(d.label) << ',' << d.reason << ','
        << quote_field(d.message) << '\n';
  }
}

void write_fdp_curve_csv(std::ostream& out, const std::vector<pfa::FdpReport>& rows) {
  out << "t,R,V_hat,FDP_hat\n";
  for (const pfa::FdpReport& r : rows) {
    out << format_double(r.t) << ',' << r.r << ',' << format_double(r.v_hat) << ','
        << format_double(r.fdp_hat) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins) {
  out << "lower,upper,count\n";
  for (const HistogramBin& b : bins) {
    out << format_double(b.lower) << ',' << format_double(b.upper) << ',' << b.count << '\n';
  }
}

void write_summary_json(std::ostream& out, const AnalysisReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["input_columns"] = report.input_columns;
  j["analyzed_columns"] = report.hypotheses.size();
  j["dropped_columns"] = report.dropped.size();
  j["k"] = report.k;
  j["k_forced"] = report.k_forced;
  if (!report.k_forced) j["epsilon"] = report.epsilon;
  j["eigenvalue_mass_explained"] = report.explained_mass;
  j["residual_frobenius"] = report.residual_frobenius;
  j["capped_scale_factors"] = report.capped;
  j["clamped_negative_eigenvalues"] = report.clamped_negative_eigenvalues;
  j["factored_spectrum"] = report.factored_spectrum;
  j["factor_method"] = to_string(report.factor_method);
  j["w_hat"] = std::vector<double>(report.w_hat.data(), report.w_hat.data() + report.w_hat.size());
  j["alpha"] = report.alpha;
  j["t_alpha"] = report.threshold.t;
  j["t_alpha_found"] = report.threshold.found;
  j["at_t_alpha"] = fdp_json(report.threshold.report);
  j["rejected"] = std::count_if(report.hypotheses.begin(), report.hypotheses.end(),
                                [](const HypothesisRecord& h) { return h.rejected; });
  auto fixed = nlohmann::ordered_json::array();
  for (const pfa::FdpReport& r : report.fixed) fixed.push_back(fdp_json(r));
  j["fixed_thresholds"] = fixed;
  j["z_mean"] = report.z_mean;
  j["z_sd"] = report.z_sd;
  out << j.dump(2) << '\n';
}

void write_report(const AnalysisReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "hypotheses.csv");
    write_hypotheses_csv(out, report);
  }
  {
    auto out = open_output(dir / "dropped.csv");
    write_dropped_csv(out, report);
  }
  {
    auto out = open_output(dir / "fdp_curve.csv");
    write_fdp_curve_csv(out, report.fdp_curve);
  }
  {
    auto out = open_output(dir / "z_histogram.csv");
    write_histogram_csv(out, report.z_histogram);
  }
  {
    auto out = open_output(dir / "summary.json");
    write_summary_json(out, report);
  }
}

}  // namespace logitpfa::analysis
