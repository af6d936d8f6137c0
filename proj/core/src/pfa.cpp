#include "logitpfa/pfa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <lapacke.h>

#include "logitpfa/error.hpp"
#include "logitpfa/normal.hpp"

namespace logitpfa::pfa {
namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kNegativeEigenTolerance = 1e-8;

// Ascending eigenvalues in `values`, eigenvectors overwrite `a`.
void symmetric_eigen_inplace(Eigen::MatrixXd& a, Eigen::VectorXd& values) {
  const auto n = static_cast<lapack_int>(a.rows());
  values.resize(a.rows());
  if (n == 0) return;
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, values.data());
  if (info != 0) {
    throw Error(ErrorKind::kNoConvergence, "dsyevd failed with info " + std::to_string(info));
  }
}

std::size_t clamp_spectrum(Eigen::VectorXd& values) {
  std::size_t negative = 0;
  for (double& v : values) {
    if (v < 0.0) {
      if (v < -kNegativeEigenTolerance) ++negative;
      v = 0.0;
    }
  }
  return negative;
}

void require_factor_shape(const Eigen::VectorXd& z, const FactorModel& model) {
  if (z.size() != model.p()) {
    throw Error(ErrorKind::kShapeMismatch, "z has " + std::to_string(z.size()) +
                                               " entries, loadings have " +
                                               std::to_string(model.p()) + " rows");
  }
}

void require_consistent(const mmm::ZVector& z, const FactorModel& model,
                        const FactorEstimate& w) {
  require_factor_shape(z.z, model);
  if (z.p_values.size() != z.z.size()) {
    throw Error(ErrorKind::kShapeMismatch, "z and p-value vectors differ in length");
  }
  if (static_cast<std::size_t>(w.w_hat.size()) != model.k ||
      model.loadings.cols() != w.w_hat.size()) {
    throw Error(ErrorKind::kShapeMismatch, "factor estimate and model disagree on k");
  }
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw Error(ErrorKind::kRankDeficientDesign,
                "loading matrix has rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(design.cols()));
  }
  return qr.solve(rhs);
}

}  // namespace

EigenDecomposition spectral_decompose(const mmm::CorrelationMatrix& corr) {
  const Eigen::MatrixXd& m = corr.sigma_star;
  if (m.rows() != m.cols()) throw Error(ErrorKind::kShapeMismatch, "matrix is not square");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance) {
    throw Error(ErrorKind::kNotSymmetric, "max |A - A^T| = " + std::to_string(asym));
  }

  Eigen::MatrixXd vectors = m;
  Eigen::VectorXd values;
  symmetric_eigen_inplace(vectors, values);

  EigenDecomposition eig;
  eig.eigenvalues = values.reverse();
  eig.eigenvectors = vectors.rowwise().reverse();
  eig.clamped_negative = clamp_spectrum(eig.eigenvalues);
  return eig;
}

EigenDecomposition spectral_decompose_factored(const Eigen::MatrixXd& factor) {
  const Eigen::Index n = factor.rows();
  const Eigen::Index p = factor.cols();

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(factor);
  Eigen::VectorXd values;
  symmetric_eigen_inplace(gram, values);

  EigenDecomposition eig;
  eig.eigenvalues = Eigen::VectorXd::Zero(p);
  const Eigen::Index shared = std::min(n, p);
  Eigen::VectorXd top = values.reverse().head(shared);
  eig.clamped_negative = clamp_spectrum(top);
  eig.eigenvalues.head(shared) = top;

  // Columns whose eigenvalue is at roundoff level carry no direction
  // information on this route; they are dropped and treated as zero.
  const double cutoff = 1e-12 * std::max(top.size() > 0 ? top[0] : 0.0, 1.0);
  Eigen::Index m = 0;
  while (m < shared && top[m] > cutoff) ++m;

  // gamma_h is proportional to factor^T u_h; normalize explicitly.
  const Eigen::MatrixXd leading = gram.rightCols(m).rowwise().reverse();
  eig.eigenvectors.noalias() = factor.transpose() * leading;
  for (Eigen::Index h = 0; h < m; ++h) eig.eigenvectors.col(h).normalize();
  eig.eigenvalues.tail(p - m).setZero();
  return eig;
}

std::size_t select_num_factors(const Eigen::VectorXd& eigenvalues, double epsilon) {
  const auto p = static_cast<std::size_t>(eigenvalues.size());
  const double total = eigenvalues.sum();
  if (p == 0 || !(total > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "spectrum is empty or identically zero");
  }

  // tail[k] = sum_{j >= k} lambda_j^2 in 0-based indexing.
  std::vector<double> tail(p + 1, 0.0);
  for (std::size_t j = p; j-- > 0;) {
    const double v = eigenvalues[static_cast<Eigen::Index>(j)];
    tail[j] = tail[j + 1] + v * v;
  }
  for (std::size_t k = 1; k < p; ++k) {
    if (std::sqrt(tail[k]) / total < epsilon) return k;
  }
  return p;
}

std::size_t FactorModel::capped_count() const {
  return static_cast<std::size_t>(std::count(capped.begin(), capped.end(), true));
}

FactorModel FactorModel::zero(Eigen::Index p, std::size_t k) {
  FactorModel model;
  model.k = k;
  model.loadings = Eigen::MatrixXd::Zero(p, static_cast<Eigen::Index>(k));
  model.a = Eigen::VectorXd::Ones(p);
  model.capped.assign(static_cast<std::size_t>(p), false);
  return model;
}

FactorModel build_factor_model(const EigenDecomposition& eig, std::size_t k) {
  const Eigen::Index p = eig.eigenvalues.size();
  if (k < 1 || k > static_cast<std::size_t>(p)) {
    throw Error(ErrorKind::kInvalidConfig,
                "factor count " + std::to_string(k) + " outside [1, " + std::to_string(p) + "]");
  }
  const auto kk = static_cast<Eigen::Index>(k);

  FactorModel model;
  model.k = k;
  model.loadings = Eigen::MatrixXd::Zero(p, kk);
  const Eigen::Index available = std::min(kk, eig.eigenvectors.cols());
  for (Eigen::Index h = 0; h < available; ++h) {
    model.loadings.col(h) = std::sqrt(eig.eigenvalues[h]) * eig.eigenvectors.col(h);
  }

  model.a.resize(p);
  model.capped.assign(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double communality = model.loadings.row(j).squaredNorm();
    if (communality >= 1.0 - kLoadingCapMargin) {
      model.a[j] = kCappedScale;
      model.capped[static_cast<std::size_t>(j)] = true;
    } else {
      model.a[j] = 1.0 / std::sqrt(1.0 - communality);
    }
  }

  double residual = 0.0;
  for (Eigen::Index j = kk; j < p; ++j) residual += eig.eigenvalues[j] * eig.eigenvalues[j];
  model.residual_frobenius = std::sqrt(residual);
  return model;
}

FactorEstimate estimate_factors_l2(const Eigen::VectorXd& z, const FactorModel& model) {
  require_factor_shape(z, model);
  const Eigen::Index p = z.size();
  const auto kept = static_cast<Eigen::Index>(std::floor(0.9 * static_cast<double>(p)));
  const auto k = static_cast<Eigen::Index>(model.k);
  if (k > kept) {
    throw Error(ErrorKind::kRankDeficientDesign,
                "k = " + std::to_string(k) + " exceeds the trimmed size " + std::to_string(kept));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&z](Eigen::Index lhs, Eigen::Index rhs) {
    return std::abs(z[lhs]) < std::abs(z[rhs]);
  });

  Eigen::MatrixXd design(kept, k);
  Eigen::VectorXd rhs(kept);
  for (Eigen::Index i = 0; i < kept; ++i) {
    const Eigen::Index j = order[static_cast<std::size_t>(i)];
    design.row(i) = model.loadings.row(j);
    rhs[i] = z[j];
  }
  return {least_squares(design, rhs), FactorMethod::kTrimmedLeastSquares};
}

double lad_objective(const Eigen::VectorXd& z, const Eigen::MatrixXd& loadings,
                     const Eigen::VectorXd& w) {
  return (z - loadings * w).cwiseAbs().sum();
}

namespace {

struct Vertex {
  std::vector<Eigen::Index> active;  // k rows with zero residual
  Eigen::VectorXd w;
};

// Vertex through the k rows with the smallest |residual(w)| that give a
// nonsingular system, taken greedily.
std::optional<Vertex> nearest_vertex(const Eigen::VectorXd& z, const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& w) {
  const Eigen::Index k = design.cols();
  const Eigen::VectorXd residual = z - design * w;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(design.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(residual[a]) < std::abs(residual[b]);
  });
  Vertex v;
  Eigen::MatrixXd rows(0, k);
  for (Eigen::Index j : order) {
    Eigen::MatrixXd grown(rows.rows() + 1, k);
    grown << rows, design.row(j);
    if (Eigen::FullPivLU<Eigen::MatrixXd>(grown).rank() == grown.rows()) {
      rows = std::move(grown);
      v.active.push_back(j);
      if (rows.rows() == k) break;
    }
  }
  if (rows.rows() < k) return std::nullopt;
  Eigen::VectorXd target(k);
  for (Eigen::Index i = 0; i < k; ++i) target[i] = z[v.active[static_cast<std::size_t>(i)]];
  v.w = rows.fullPivLu().solve(target);
  return v;
}

// Exact LAD minimisation by descent along the edges of the objective,
// started from the vertex nearest to `w`. At a vertex with active rows S the
// multipliers g solve B_S^T g = -sum_{j not in S} sign(r_j) b_j; the vertex
// is optimal when |g| <= 1, otherwise row i with |g_i| > 1 leaves S and the
// step stops at the first breakpoint where the slope turns nonnegative.
std::optional<Eigen::VectorXd> lad_vertex_descent(const Eigen::VectorXd& z,
                                                  const Eigen::MatrixXd& design,
                                                  const Eigen::VectorXd& w) {
  std::optional<Vertex> start = nearest_vertex(z, design, w);
  if (!start) return std::nullopt;
  Vertex v = std::move(*start);
  const Eigen::Index p = design.rows();
  const Eigen::Index k = design.cols();
  const double zero = 1e-12 * (1.0 + z.cwiseAbs().maxCoeff());
  const Eigen::Index max_steps = 50 * p + 100;

  for (Eigen::Index step = 0; step < max_steps; ++step) {
    Eigen::MatrixXd active(k, k);
    for (Eigen::Index i = 0; i < k; ++i) active.row(i) = design.row(v.active[static_cast<std::size_t>(i)]);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(active);
    if (!lu.isInvertible()) return std::nullopt;

    std::vector<bool> in_active(static_cast<std::size_t>(p), false);
    for (Eigen::Index j : v.active) in_active[static_cast<std::size_t>(j)] = true;
    const Eigen::VectorXd r = z - design * v.w;
    Eigen::VectorXd pull = Eigen::VectorXd::Zero(k);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (in_active[static_cast<std::size_t>(j)] || std::abs(r[j]) <= zero) continue;
      pull += (r[j] > 0.0 ? 1.0 : -1.0) * design.row(j).transpose();
    }
    const Eigen::VectorXd g = active.transpose().fullPivLu().solve(-pull);

    // Steepest releasable row whose edge is a true descent direction once
    // the zero-residual rows outside S are accounted for.
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index i = 0; i < k; ++i)
      if (std::abs(g[i]) > 1.0 + 1e-9) candidates.push_back(i);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(g[a]) > std::abs(g[b]); });
    bool moved = false;
    for (Eigen::Index i : candidates) {
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(k);
      unit[i] = g[i] > 0.0 ? -1.0 : 1.0;
      const Eigen::VectorXd d = lu.solve(unit);
      const Eigen::VectorXd slope_rows = design * d;

      double slope = 1.0 - std::abs(g[i]);
      std::vector<std::pair<double, Eigen::Index>> breaks;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (in_active[static_cast<std::size_t>(j)] || slope_rows[j] == 0.0) continue;
        if (std::abs(r[j]) <= zero) {
          slope += std::abs(slope_rows[j]);
          breaks.emplace_back(0.0, j);
          continue;
        }
        const double s = r[j] / slope_rows[j];
        if (s > 0.0) breaks.emplace_back(s, j);
      }
      if (slope >= -1e-12) continue;
      std::stable_sort(breaks.begin(), breaks.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [s, j] : breaks) {
        if (s == 0.0) continue;  // already counted in the initial slope
        slope += 2.0 * std::abs(slope_rows[j]);
        if (slope >= 0.0) {
          v.w += s * d;
          v.active[static_cast<std::size_t>(i)] = j;
          moved = true;
          break;
        }
      }
      if (moved) break;
    }
    if (!moved) return v.w;
  }
  return std::nullopt;
}

}  // namespace

FactorEstimate estimate_factors_l1(const Eigen::VectorXd& z, const FactorModel& model,
                                   const LadOptions& opts) {
  require_factor_shape(z, model);
  const Eigen::MatrixXd& design = model.loadings;
  Eigen::VectorXd w = least_squares(design, z);

  Eigen::MatrixXd weighted(design.rows(), design.cols());
  Eigen::VectorXd weighted_rhs(z.size());
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const Eigen::VectorXd residual = z - design * w;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      const double root = 1.0 / std::sqrt(std::max(std::abs(residual[j]), opts.residual_floor));
      weighted.row(j) = root * design.row(j);
      weighted_rhs[j] = root * z[j];
    }
    const Eigen::VectorXd next = least_squares(weighted, weighted_rhs);
    const double move = (next - w).cwiseAbs().maxCoeff();
    w = next;
    if (move < opts.tolerance) return {w, FactorMethod::kLeastAbsoluteDeviations};
  }
  // The reweighting converges only linearly near a degenerate optimum;
  // finish exactly from where it stopped.
  if (auto exact = lad_vertex_descent(z, design, w)) {
    return {*exact, FactorMethod::kLeastAbsoluteDeviations};
  }
  throw Error(ErrorKind::kNoConvergence,
              "LAD iteration did not settle in " + std::to_string(opts.max_iterations) +
                  " iterations");
}

std::size_t count_rejections(const mmm::ZVector& z, double t) {
  return static_cast<std::size_t>((z.p_values.array() <= t).count());
}

FdpReport estimate_fdp(const mmm::ZVector& z, const FactorModel& model,
                       const FactorEstimate& w, double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw Error(ErrorKind::kInvalidThreshold, "t = " + std::to_string(t) + " not in (0, 1]");
  }
  require_consistent(z, model, w);

  FdpReport report;
  report.t = t;
  report.r = count_rejections(z, t);

  const double quantile = normal_quantile(t / 2.0);
  const Eigen::VectorXd eta = model.loadings * w.w_hat;
  double expected = 0.0;
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    expected += normal_cdf(model.a[j] * (quantile + eta[j])) +
                normal_cdf(model.a[j] * (quantile - eta[j]));
  }
  report.v_hat = std::min(expected, static_cast<double>(report.r));
  report.fdp_hat = report.r > 0 ? report.v_hat / static_cast<double>(report.r) : 0.0;
  return report;
}

Eigen::VectorXd adjusted_pvalues(const mmm::ZVector& z, const FactorModel& model,
                                 const FactorEstimate& w) {
  require_consistent(z, model, w);
  const Eigen::VectorXd eta = model.loadings * w.w_hat;
  Eigen::VectorXd out(z.z.size());
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    out[j] = two_sided_p(model.a[j] * (z.z[j] - eta[j]));
  }
  return out;
}

std::vector<double> log_grid(double min, double max, std::size_t points) {
  if (points == 0) throw Error(ErrorKind::kEmptyGrid, "threshold grid has no points");
  if (!(min > 0.0 && min <= max && max <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "grid bounds must satisfy 0 < min <= max <= 1");
  }
  if (points == 1) return {max};

  std::vector<double> grid(points);
  const double lo = std::log10(min);
  const double hi = std::log10(max);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = std::pow(10.0, lo + step * static_cast<double>(i));
  }
  grid.front() = min;
  grid.back() = max;
  return grid;
}

std::vector<FdpReport> fdp_curve(const mmm::ZVector& z, const FactorModel& model,
                                 const FactorEstimate& w, std::span<const double> grid) {
  std::vector<FdpReport> rows;
  rows.reserve(grid.size());
  for (double t : grid) rows.push_back(estimate_fdp(z, model, w, t));
  return rows;
}

ThresholdResult find_threshold(const mmm::ZVector& z, const FactorModel& model,
                               const FactorEstimate& w, double alpha,
                               std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorKind::kEmptyGrid, "threshold grid has no points");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw Error(ErrorKind::kInvalidConfig, "threshold grid must be sorted ascending");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "alpha must lie in (0, 1]");
  }

  const double level = alpha * (1.0 + 1e-12);
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    FdpReport report = estimate_fdp(z, model, w, *it);
    if (report.fdp_hat <= level) return {*it, true, report};
  }
  return {grid.front(), false, estimate_fdp(z, model, w, grid.front())};
}

}  // namespace logitpfa::pfa
