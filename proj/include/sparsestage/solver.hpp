#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparsestage/error.hpp"
#include "sparsestage/model.hpp"

namespace sparsestage {

/// Per-feature penalty levels lambda_j >= 0.
class PenaltyWeights {
 public:
  explicit PenaltyWeights(Vector weights) : w_(std::move(weights)) {
    require(w_.allFinite(), ErrorCode::invalid_weight, "penalty weights must be finite");
    require(w_.size() == 0 || w_.minCoeff() >= 0.0, ErrorCode::invalid_weight,
            "penalty weights must be >= 0");
  }

  static PenaltyWeights uniform(Index p, double lambda) {
    return PenaltyWeights(Vector::Constant(p, lambda));
  }

  const Vector& values() const noexcept { return w_; }
  double operator[](Index j) const { return w_[j]; }
  Index size() const noexcept { return w_.size(); }

  friend bool operator==(const PenaltyWeights& a, const PenaltyWeights& b) {
    return a.w_.size() == b.w_.size() && (a.w_.array() == b.w_.array()).all();
  }

 private:
  Vector w_;
};

struct SolverConfig {
  double tol = 1e-8;             // max |coordinate change| per full sweep
  long max_sweeps = 10000;
  double kkt_tol = 1e-6;

  void validate() const {
    require(tol > 0.0 && kkt_tol > 0.0 && max_sweeps >= 1, ErrorCode::invalid_argument,
            "solver config needs tol > 0, kkt_tol > 0, max_sweeps >= 1");
  }
};

struct LassoSolution {
  Vector coefficients;
  long sweeps_used = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

/// sgn(z) * max(|z| - t, 0). Returns +0.0 whenever |z| <= t.
inline double soft_threshold(double z, double t) noexcept {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

/// Sufficient statistics of the smooth part (1/n)‖Xw − y‖²:
/// gram = XᵀX/n, xty = Xᵀy/n, yty = yᵀy/n. Shared across stages of a run.
struct QuadraticModel {
  Matrix gram;
  Vector xty;
  double yty = 0.0;
  Index n = 0;

  QuadraticModel(const DesignMatrix& x, const Observations& y) {
    require(y.n() == x.n(), ErrorCode::invalid_dimension,
            "observations length " + std::to_string(y.n()) + " != design n " +
                std::to_string(x.n()));
    require(y.y.allFinite(), ErrorCode::numeric_failure, "observations are not finite");
    n = x.n();
    const double inv_n = 1.0 / static_cast<double>(n);
    gram.noalias() = x.matrix().transpose() * x.matrix();
    gram *= inv_n;
    xty.noalias() = x.matrix().transpose() * y.y;
    xty *= inv_n;
    yty = y.y.squaredNorm() * inv_n;
  }

  Index p() const noexcept { return gram.cols(); }
};

/// Called after every sweep with the running sweep count and current coefficients.
using SweepObserver = std::function<void(long sweep, const Vector& w)>;

inline double weighted_objective(const DesignMatrix& x, const Observations& y,
                                 const PenaltyWeights& weights, const Vector& w) {
  require(w.size() == x.p() && weights.size() == x.p() && y.n() == x.n(),
          ErrorCode::invalid_dimension, "weighted_objective: inconsistent dimensions");
  const double loss = (x.matrix() * w - y.y).squaredNorm() / static_cast<double>(x.n());
  return loss + weights.values().dot(w.cwiseAbs());
}

/// Largest violation of the weighted-Lasso subgradient condition
/// (2/n) X_jᵀ(Xw − y) + lambda_j sgn(w_j) ∋ 0.
inline double kkt_residual(const DesignMatrix& x, const Observations& y,
                           const PenaltyWeights& weights, const Vector& w) {
  require(w.size() == x.p() && weights.size() == x.p() && y.n() == x.n(),
          ErrorCode::invalid_dimension, "kkt_residual: inconsistent dimensions");
  const Vector grad =
      (2.0 / static_cast<double>(x.n())) * (x.matrix().transpose() * (x.matrix() * w - y.y));
  double worst = 0.0;
  for (Index j = 0; j < w.size(); ++j) {
    const double lam = weights[j];
    double v;
    if (w[j] > 0.0)
      v = std::abs(grad[j] + lam);
    else if (w[j] < 0.0)
      v = std::abs(grad[j] - lam);
    else
      v = std::max(0.0, std::abs(grad[j]) - lam);
    worst = std::max(worst, v);
  }
  return worst;
}

namespace detail {

inline double kkt_from_model(const QuadraticModel& m, const PenaltyWeights& weights,
                             const Vector& w) {
  // gradient of the smooth part is 2 (gram w − xty)
  const Vector grad = 2.0 * (m.gram * w - m.xty);
  double worst = 0.0;
  for (Index j = 0; j < w.size(); ++j) {
    const double lam = weights[j];
    double v;
    if (w[j] > 0.0)
      v = std::abs(grad[j] + lam);
    else if (w[j] < 0.0)
      v = std::abs(grad[j] - lam);
    else
      v = std::max(0.0, std::abs(grad[j]) - lam);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace detail

/// Weighted Lasso by cyclic coordinate descent on the precomputed quadratic model.
///
/// Alternates full sweeps with sweeps restricted to the current nonzeros; a run is
/// converged once a full sweep moves no coordinate by more than `tol` and the KKT
/// residual is within `kkt_tol`. Each coordinate step is an exact minimization, so the
/// objective never increases.
inline LassoSolution solve_weighted_lasso(const QuadraticModel& model,
                                          const PenaltyWeights& weights,
                                          const SolverConfig& config,
                                          const std::optional<Vector>& warm_start = std::nullopt,
                                          const SweepObserver& observer = {}) {
  config.validate();
  const Index p = model.p();
  require(weights.size() == p, ErrorCode::invalid_dimension,
          "weights length does not match feature count");
  require(!warm_start || warm_start->size() == p, ErrorCode::invalid_dimension,
          "warm start length does not match feature count");

  LassoSolution sol;
  sol.coefficients = warm_start ? *warm_start : Vector::Zero(p);
  Vector& w = sol.coefficients;
  require(w.allFinite(), ErrorCode::numeric_failure, "warm start is not finite");

  const Matrix& a = model.gram;
  for (Index j = 0; j < p; ++j)
    require(a(j, j) > 0.0, ErrorCode::numeric_failure, "zero column in design");

  // c = xty − gram w; coordinate j's unpenalized minimizer is (c_j + a_jj w_j) / a_jj.
  Vector c = model.xty - a * w;

  auto update = [&](Index j) -> double {
    const double ajj = a(j, j);
    const double old = w[j];
    const double z = c[j] + ajj * old;
    const double next = soft_threshold(z, 0.5 * weights[j]) / ajj;
    if (!std::isfinite(next))
      fail(ErrorCode::numeric_failure, "coordinate " + std::to_string(j) + " diverged");
    if (next == old) return 0.0;
    const double delta = next - old;
    w[j] = next;
    c.noalias() -= delta * a.col(j);
    return std::abs(delta);
  };

  std::vector<Index> active;
  active.reserve(static_cast<std::size_t>(p));
  bool full_sweep = true;

  while (sol.sweeps_used < config.max_sweeps) {
    double max_change = 0.0;
    if (full_sweep) {
      for (Index j = 0; j < p; ++j) max_change = std::max(max_change, update(j));
    } else {
      for (Index j : active) max_change = std::max(max_change, update(j));
    }
    ++sol.sweeps_used;
    if (observer) observer(sol.sweeps_used, w);

    if (max_change > config.tol) {
      if (full_sweep) {
        active.clear();
        for (Index j = 0; j < p; ++j)
          if (w[j] != 0.0) active.push_back(j);
        full_sweep = false;
      }
      continue;
    }
    if (!full_sweep) {
      full_sweep = true;  // active set settled; confirm with a full pass
      continue;
    }
    // Full sweep with no movement: certify.
    c = model.xty - a * w;  // drop accumulated rounding in the running residual
    if (detail::kkt_from_model(model, weights, w) <= config.kkt_tol) {
      sol.converged = true;
      break;
    }
  }

  sol.kkt_residual = detail::kkt_from_model(model, weights, w);
  if (!std::isfinite(sol.kkt_residual)) fail(ErrorCode::numeric_failure, "KKT residual is not finite");
  if (sol.converged && sol.kkt_residual > config.kkt_tol) sol.converged = false;
  return sol;
}

inline LassoSolution solve_weighted_lasso(const DesignMatrix& x, const Observations& y,
                                          const PenaltyWeights& weights,
                                          const SolverConfig& config,
                                          const std::optional<Vector>& warm_start = std::nullopt,
                                          const SweepObserver& observer = {}) {
  require(weights.size() == x.p(), ErrorCode::invalid_dimension,
          "weights length does not match design p");
  return solve_weighted_lasso(QuadraticModel(x, y), weights, config, warm_start, observer);
}

/// Least squares restricted to columns in `support`; zero elsewhere.
inline Vector restricted_least_squares(const DesignMatrix& x, const Observations& y,
                                       const Support& support) {
  require(y.n() == x.n(), ErrorCode::invalid_dimension,
          "restricted_least_squares: observations length != n");
  Vector w = Vector::Zero(x.p());
  if (support.empty()) return w;
  for (Index j : support)
    require(j >= 0 && j < x.p(), ErrorCode::invalid_dimension, "support index out of range");
  const auto k = static_cast<Index>(support.size());
  require(k <= x.n(), ErrorCode::singular_system, "support larger than sample count");

  Matrix xf(x.n(), k);
  for (Index i = 0; i < k; ++i) xf.col(i) = x.matrix().col(support[static_cast<std::size_t>(i)]);
  Eigen::ColPivHouseholderQR<Matrix> qr(xf);
  require(qr.rank() == k, ErrorCode::singular_system, "restricted design is rank deficient");
  const Vector coef = qr.solve(y.y);
  require(coef.allFinite(), ErrorCode::numeric_failure, "restricted least squares diverged");
  for (Index i = 0; i < k; ++i) w[support[static_cast<std::size_t>(i)]] = coef[i];
  return w;
}

}  // namespace sparsestage
