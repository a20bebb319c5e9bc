#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "sparsestage/error.hpp"
#include "sparsestage/model.hpp"
#include "sparsestage/solver.hpp"

namespace sparsestage {

struct MultiStageConfig {
  double lambda = 1.0;
  double theta = 1.0;
  long max_stages = 8;
  bool early_stop = false;  // stop once the reweighting reaches a fixed point

  void validate() const {
    require(std::isfinite(lambda) && lambda > 0.0, ErrorCode::invalid_argument, "lambda must be > 0");
    require(std::isfinite(theta) && theta > 0.0, ErrorCode::invalid_argument, "theta must be > 0");
    require(max_stages >= 1, ErrorCode::invalid_argument, "max_stages must be >= 1");
  }
};

struct StageTrace {
  long stage = 1;
  PenaltyWeights weights_in;
  LassoSolution solution;
  Support support;
  double capped_objective = 0.0;
  double joint_objective = 0.0;
};

struct MultiStageResult {
  std::vector<StageTrace> traces;
  Vector final;
  long stages_run = 0;
  bool fixed_point_reached = false;
};

namespace detail {

inline void check_penalty(double lambda, double theta) {
  require(lambda > 0.0 && theta > 0.0, ErrorCode::invalid_argument, "lambda and theta must be > 0");
}

inline double capped_penalty(const Vector& w, double lambda, double theta) {
  double s = 0.0;
  for (Index j = 0; j < w.size(); ++j) s += std::min(std::abs(w[j]), theta);
  return lambda * s;
}

inline double joint_penalty(const Vector& w, const PenaltyWeights& weights, double lambda,
                            double theta) {
  double s = 0.0;
  for (Index j = 0; j < w.size(); ++j) {
    const double lj = weights[j];
    require(lj >= 0.0 && lj <= lambda, ErrorCode::invalid_weight,
            "weight " + std::to_string(j) + " outside [0, lambda]");
    s += lj * std::abs(w[j]) + std::max((lambda - lj) * theta, 0.0);
  }
  return s;
}

inline double model_loss(const QuadraticModel& m, const Vector& w) {
  // (1/n)‖Xw − y‖² = wᵀ gram w − 2 xtyᵀw + yty, floored at zero against cancellation
  return std::max(0.0, w.dot(m.gram * w) - 2.0 * m.xty.dot(w) + m.yty);
}

}  // namespace detail

/// (1/n)‖Xw − y‖² + lambda Σ min(|w_j|, theta)
inline double capped_l1_objective(const DesignMatrix& x, const Observations& y, const Vector& w,
                                  double lambda, double theta) {
  detail::check_penalty(lambda, theta);
  require(w.size() == x.p() && y.n() == x.n(), ErrorCode::invalid_dimension,
          "capped_l1_objective: inconsistent dimensions");
  const double loss = (x.matrix() * w - y.y).squaredNorm() / static_cast<double>(x.n());
  return loss + detail::capped_penalty(w, lambda, theta);
}

/// Closed-form minimizer of the joint objective over weights for fixed w:
/// lambda where |w_j| <= theta, zero otherwise.
inline PenaltyWeights update_weights(const Vector& w, double lambda, double theta) {
  detail::check_penalty(lambda, theta);
  Vector out(w.size());
  for (Index j = 0; j < w.size(); ++j) out[j] = std::abs(w[j]) <= theta ? lambda : 0.0;
  return PenaltyWeights(std::move(out));
}

/// Weighted Lasso objective plus the concave conjugate Σ max((lambda − lambda_j) theta, 0).
inline double joint_objective(const DesignMatrix& x, const Observations& y, const Vector& w,
                              const PenaltyWeights& weights, double lambda, double theta) {
  detail::check_penalty(lambda, theta);
  require(w.size() == x.p() && weights.size() == x.p() && y.n() == x.n(),
          ErrorCode::invalid_dimension, "joint_objective: inconsistent dimensions");
  const double loss = (x.matrix() * w - y.y).squaredNorm() / static_cast<double>(x.n());
  return loss + detail::joint_penalty(w, weights, lambda, theta);
}

/// Multi-stage convex relaxation on a precomputed quadratic model.
///
/// Stage 1 is the plain Lasso (all weights lambda, zero start). Every later stage
/// re-solves with weights from update_weights on the previous solution, warm-started
/// from it.
inline MultiStageResult run_multistage(const QuadraticModel& model, const MultiStageConfig& config,
                                       const SolverConfig& solver_config) {
  config.validate();
  solver_config.validate();
  const Index p = model.p();

  MultiStageResult result;
  result.traces.reserve(static_cast<std::size_t>(config.max_stages));
  PenaltyWeights weights = PenaltyWeights::uniform(p, config.lambda);
  std::optional<Vector> warm;

  for (long stage = 1; stage <= config.max_stages; ++stage) {
    LassoSolution sol = solve_weighted_lasso(model, weights, solver_config, warm);
    const double loss = detail::model_loss(model, sol.coefficients);

    StageTrace trace{stage, weights, std::move(sol), {}, 0.0, 0.0};
    const Vector& w = trace.solution.coefficients;
    trace.support = support_of(w);
    trace.capped_objective = loss + detail::capped_penalty(w, config.lambda, config.theta);
    trace.joint_objective = loss + detail::joint_penalty(w, weights, config.lambda, config.theta);

    PenaltyWeights next = update_weights(w, config.lambda, config.theta);
    const bool repeats = next == weights;
    warm = w;
    result.traces.push_back(std::move(trace));
    result.stages_run = stage;
    if (repeats) {
      result.fixed_point_reached = true;
      if (config.early_stop) break;
    }
    weights = std::move(next);
  }
  result.final = result.traces.back().solution.coefficients;
  return result;
}

inline MultiStageResult run_multistage(const DesignMatrix& x, const Observations& y,
                                       const MultiStageConfig& config,
                                       const SolverConfig& solver_config) {
  return run_multistage(QuadraticModel(x, y), config, solver_config);
}

}  // namespace sparsestage
