#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "epf/error.hpp"

namespace epf::lasso {

struct Config {
  double tol = 1e-7;  // max coefficient change per full sweep
  int max_iter = 100000;
  int grid_size = 30;
  double span_exponent = 20.0;  // grid runs from lambda_max down to lambda_max * 2^-span
  int bic_patience = 3;  // stop the path after this many fits without a new BIC minimum; 0 runs the full grid
};

/// Column and response moments used to move between raw and unit-variance data.
struct ScalingParams {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  std::vector<std::uint8_t> dropped;  // zero-variance columns
  double y_mean = 0.0;
  double y_sd = 1.0;

  [[nodiscard]] int retained() const {
    return static_cast<int>(std::count(dropped.begin(), dropped.end(), std::uint8_t{0}));
  }
};

struct Standardized {
  Eigen::MatrixXd X;  // dropped columns are all zero
  Eigen::VectorXd y;
  ScalingParams params;
};

namespace detail {

inline bool negligible_sd(double sd, double mean) {
  return !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
}

}  // namespace detail

/// Column moments only; shared by the per-hour fits of one design.
inline ScalingParams column_moments(const Eigen::MatrixXd& X) {
  const auto n = X.rows();
  if (n < 2) throw DomainError("standardize needs at least 2 rows");
  ScalingParams s;
  s.mean = X.colwise().mean().transpose();
  s.sd.resize(X.cols());
  s.dropped.assign(static_cast<std::size_t>(X.cols()), 0);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double ss = (X.col(j).array() - s.mean(j)).square().sum();
    s.sd(j) = std::sqrt(ss / static_cast<double>(n - 1));
    if (detail::negligible_sd(s.sd(j), s.mean(j))) s.dropped[static_cast<std::size_t>(j)] = 1;
  }
  if (s.retained() == 0) throw DomainError("standardize: every column has zero variance");
  return s;
}

inline Eigen::MatrixXd scale_columns(const Eigen::MatrixXd& X, const ScalingParams& s) {
  Eigen::MatrixXd Z(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (s.dropped[static_cast<std::size_t>(j)])
      Z.col(j).setZero();
    else
      Z.col(j) = (X.col(j).array() - s.mean(j)) / s.sd(j);
  }
  return Z;
}

/// Response mean and sd; a constant response keeps sd 1 so it is only centred.
inline void response_moments(const Eigen::VectorXd& y, ScalingParams& s) {
  auto n = static_cast<double>(y.size());
  s.y_mean = y.mean();
  double sd = std::sqrt((y.array() - s.y_mean).square().sum() / (n - 1));
  s.y_sd = detail::negligible_sd(sd, s.y_mean) ? 1.0 : sd;
}

/// Centres every column and the response and scales them to sample variance 1.
inline Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw DomainError("standardize: row count mismatch");
  Standardized out;
  out.params = column_moments(X);
  response_moments(y, out.params);
  out.X = scale_columns(X, out.params);
  out.y = (y.array() - out.params.y_mean) / out.params.y_sd;
  return out;
}

struct LassoFit {
  Eigen::VectorXd beta_scaled;
  Eigen::VectorXd beta_original;
  double intercept = 0.0;
  double lambda = 0.0;
  int df = 0;
  double rss = 0.0;  // on the scaled response
  int iterations = 0;
  bool converged = false;
};

/// Sufficient statistics of a scaled least-squares problem: G = X'X, c = X'y, yy = y'y.
/// The Gram matrix is shared so many responses can reuse one design.
struct GramProblem {
  std::shared_ptr<const Eigen::MatrixXd> gram;
  Eigen::VectorXd c;
  double yy = 0.0;
  int n = 0;

  [[nodiscard]] const Eigen::MatrixXd& G() const { return *gram; }

  static std::shared_ptr<const Eigen::MatrixXd> gram_of(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(X.cols(), X.cols());
    G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
    return std::make_shared<const Eigen::MatrixXd>(std::move(G));
  }

  static GramProblem with_response(std::shared_ptr<const Eigen::MatrixXd> gram, const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y) {
    GramProblem g;
    g.gram = std::move(gram);
    g.c = X.transpose() * y;
    g.yy = y.squaredNorm();
    g.n = static_cast<int>(X.rows());
    return g;
  }

  static GramProblem from_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return with_response(gram_of(X), X, y);
  }

  /// G b, touching only the nonzero coefficients.
  [[nodiscard]] Eigen::VectorXd times(const Eigen::VectorXd& beta) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j)
      if (beta(j) != 0.0) out.noalias() += G().col(j) * beta(j);
    return out;
  }

  /// ||y - X b||^2 from the Gram form.
  [[nodiscard]] double rss(const Eigen::VectorXd& beta) const {
    double v = yy - 2.0 * beta.dot(c) + beta.dot(times(beta));
    return std::max(v, 0.0);
  }

  /// sum (y - X b)^2 + lambda * |b|_1
  [[nodiscard]] double objective(const Eigen::VectorXd& beta, double lambda) const {
    return rss(beta) + lambda * beta.lpNorm<1>();
  }
};

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

/// Columns the solver may use: all-ones when `allowed` is empty, and never a
/// column with zero norm.
inline std::vector<int> usable_columns(const GramProblem& g, const std::vector<std::uint8_t>& allowed) {
  std::vector<int> cols;
  for (Eigen::Index j = 0; j < g.G().rows(); ++j) {
    if (!allowed.empty() && !allowed[static_cast<std::size_t>(j)]) continue;
    if (g.G()(j, j) <= 0.0) continue;
    cols.push_back(static_cast<int>(j));
  }
  return cols;
}

/// Smallest penalty with an all-zero solution: 2 max_j |x_j'y|.
inline double lambda_max(const GramProblem& g, const std::vector<std::uint8_t>& allowed = {}) {
  double m = 0.0;
  for (int j : usable_columns(g, allowed)) m = std::max(m, std::abs(g.c(j)));
  return 2.0 * m;
}

/// Descending grid lambda_max * 2^g, g equidistant in [-span, 0].
inline std::vector<double> lambda_grid(double lambda_max, int grid_size, double span_exponent) {
  if (grid_size < 2) throw DomainError("lambda grid needs at least 2 points");
  if (!(lambda_max > 0.0)) lambda_max = 1.0;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i)
    grid.push_back(lambda_max * std::exp2(-span_exponent * i / (grid_size - 1)));
  return grid;
}

inline std::vector<double> lambda_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int grid_size,
                                       double span_exponent) {
  return lambda_grid(lambda_max(GramProblem::from_data(X, y)), grid_size, span_exponent);
}

/// Largest KKT violation of beta at lambda: zero coefficients need
/// |2 x_j'r| <= lambda, active ones need 2 x_j'r == lambda * sign(beta_j).
inline double kkt_violation(const GramProblem& g, const Eigen::VectorXd& beta, double lambda,
                            const std::vector<int>& cols) {
  Eigen::VectorXd grad = 2.0 * (g.c - g.times(beta));
  double worst = 0.0;
  for (int j : cols) {
    double v = beta(j) == 0.0 ? std::abs(grad(j)) - lambda
                              : std::abs(grad(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

namespace detail {

/**
 * Feature-sign step: solves G_AA b = c_A - lambda/2 s_A on the support A with
 * the current signs s. When the solution flips a sign, moves along the segment
 * to the first zero crossing, drops that coordinate and solves again. Every
 * step stays on the face where the objective is the quadratic being
 * minimized, so the objective never increases. Returns whether beta moved.
 */
inline bool solve_on_support(const GramProblem& g, double lambda, std::vector<int> active, Eigen::VectorXd& beta) {
  const Eigen::VectorXd start = beta;
  bool moved = false;
  while (!active.empty()) {
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd A(k, k);
    Eigen::VectorXd rhs(k), cur(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      int j = active[static_cast<std::size_t>(a)];
      for (Eigen::Index b = 0; b < k; ++b) A(a, b) = g.G()(j, active[static_cast<std::size_t>(b)]);
      cur(a) = beta(j);
      rhs(a) = g.c(j) - 0.5 * lambda * (cur(a) > 0.0 ? 1.0 : -1.0);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
      // Exactly collinear support (centered dummies or season curves): a tiny
      // ridge picks one minimizer of the flat face.
      A.diagonal().array() += 1e-10 * A.diagonal().mean();
      llt.compute(A);
      if (llt.info() != Eigen::Success) break;
    }
    Eigen::VectorXd x = llt.solve(rhs);
    if (!x.allFinite()) break;
    double t = 1.0;
    Eigen::Index hit = -1;
    for (Eigen::Index a = 0; a < k; ++a) {
      if ((x(a) > 0.0) == (cur(a) > 0.0) && x(a) != 0.0) continue;
      double ta = cur(a) / (cur(a) - x(a));
      if (ta < t) {
        t = ta;
        hit = a;
      }
    }
    for (Eigen::Index a = 0; a < k; ++a)
      beta(active[static_cast<std::size_t>(a)]) = hit < 0 ? x(a) : cur(a) + t * (x(a) - cur(a));
    moved = true;
    if (hit < 0) break;
    beta(active[static_cast<std::size_t>(hit)]) = 0.0;
    active.erase(active.begin() + hit);
    std::erase_if(active, [&](int j) { return beta(j) == 0.0; });
  }
  if (moved && !(g.objective(beta, lambda) <= g.objective(start, lambda))) {
    beta = start;
    return false;
  }
  return moved;
}

}  // namespace detail

/**
 * Cyclic coordinate descent for  sum (y - X b)^2 + lambda |b|_1  in Gram form.
 *
 * Alternates full sweeps with sweeps over the active set; each new support and
 * sign pattern first gets an exact feature-sign solve. Converged once a full
 * sweep moves no coefficient by `tol` or more and the KKT conditions hold within
 * 10 tol. `objective_trace`, when given, receives the objective after each sweep.
 */
inline LassoFit coordinate_descent(const GramProblem& g, double lambda, const Eigen::VectorXd& warm_start,
                                   double tol, int max_iter, const std::vector<std::uint8_t>& allowed = {},
                                   std::vector<double>* objective_trace = nullptr) {
  if (lambda < 0.0) throw DomainError("lambda must be >= 0");
  const auto p = g.G().rows();
  auto cols = usable_columns(g, allowed);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (warm_start.size() == p)
    for (int j : cols) beta(j) = warm_start(j);
  Eigen::VectorXd q = g.times(beta);
  const double half = 0.5 * lambda;

  auto update = [&](int j) {
    double gjj = g.G()(j, j);
    double rho = g.c(j) - q(j) + gjj * beta(j);
    double next = soft_threshold(rho, half) / gjj;
    double delta = next - beta(j);
    if (delta != 0.0) {
      beta(j) = next;
      q.noalias() += g.G().col(j) * delta;
    }
    return std::abs(delta);
  };

  LassoFit fit;
  fit.lambda = lambda;
  std::vector<int> active, pattern, tried;
  int iter = 0;
  while (iter < max_iter) {
    double full_change = 0.0;
    for (int j : cols) full_change = std::max(full_change, update(j));
    ++iter;
    if (objective_trace) objective_trace->push_back(g.objective(beta, lambda));
    if (full_change < tol) {
      q = g.times(beta);
      if (kkt_violation(g, beta, lambda, cols) <= 10.0 * tol) {
        fit.converged = true;
        break;
      }
    }
    while (iter < max_iter) {
      active.clear();
      pattern.clear();
      for (int j : cols)
        if (beta(j) != 0.0) {
          active.push_back(j);
          pattern.push_back(beta(j) > 0.0 ? j + 1 : -j - 1);
        }
      if (pattern != tried) {
        tried = pattern;
        if (detail::solve_on_support(g, lambda, active, beta)) q = g.times(beta);
      }
      double change = 0.0;
      for (int j : active) change = std::max(change, update(j));
      ++iter;
      if (objective_trace) objective_trace->push_back(g.objective(beta, lambda));
      if (change < tol) break;
    }
  }
  fit.iterations = iter;
  fit.beta_scaled = std::move(beta);
  fit.df = static_cast<int>((fit.beta_scaled.array() != 0.0).count());
  fit.rss = g.rss(fit.beta_scaled);
  return fit;
}

/// Convenience overload on explicit (already scaled) data.
inline LassoFit coordinate_descent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                                   const Eigen::VectorXd& warm_start, double tol, int max_iter) {
  return coordinate_descent(GramProblem::from_data(X, y), lambda, warm_start, tol, max_iter);
}

/// Maps scaled coefficients back to raw units: y ~ intercept + X beta.
inline void descale(LassoFit& fit, const ScalingParams& s) {
  const auto p = fit.beta_scaled.size();
  fit.beta_original = Eigen::VectorXd::Zero(p);
  fit.intercept = s.y_mean;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (s.dropped[static_cast<std::size_t>(j)] || fit.beta_scaled(j) == 0.0) continue;
    fit.beta_original(j) = s.y_sd * fit.beta_scaled(j) / s.sd(j);
    fit.intercept -= fit.beta_original(j) * s.mean(j);
  }
}

/// n ln(RSS/n) + df ln n
inline double bic(double rss, int df, int n, double yy) {
  double floor = std::max(yy, 1.0) * 1e-15;
  return n * std::log(std::max(rss, floor) / n) + df * std::log(static_cast<double>(n));
}

struct PathResult {
  std::vector<double> grid;
  std::vector<LassoFit> fits;
  std::vector<double> bic;
  std::size_t selected_index = 0;
  ScalingParams scaling;

  [[nodiscard]] const LassoFit& selected() const { return fits[selected_index]; }
};

/// Warm-started path over the exponential grid; selects minimum BIC, ties
/// going to the larger penalty. Coefficients stay on the scaled data.
inline PathResult fit_path(const GramProblem& g, const Config& config,
                           const std::vector<std::uint8_t>& allowed = {}) {
  PathResult r;
  r.grid = lambda_grid(lambda_max(g, allowed), config.grid_size, config.span_exponent);
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(g.G().rows());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    auto fit = coordinate_descent(g, r.grid[i], warm, config.tol, config.max_iter, allowed);
    warm = fit.beta_scaled;
    double score = bic(fit.rss, fit.df, g.n, g.yy);
    if (score < best) {
      best = score;
      r.selected_index = i;
    }
    r.bic.push_back(score);
    r.fits.push_back(std::move(fit));
    if (config.bic_patience > 0 && i >= r.selected_index + static_cast<std::size_t>(config.bic_patience)) break;
  }
  return r;
}

/// Standardizes raw data, fits the path and reports every fit in raw units too.
inline PathResult fit_path_bic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Config& config = {}) {
  auto s = standardize(X, y);
  auto r = fit_path(GramProblem::from_data(s.X, s.y), config);
  for (auto& fit : r.fits) descale(fit, s.params);
  r.scaling = std::move(s.params);
  return r;
}

}  // namespace epf::lasso
