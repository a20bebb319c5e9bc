#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "sparsestage/error.hpp"
#include "sparsestage/model.hpp"

namespace sparsestage {

/// Inputs to the support-recovery and estimation conditions.
///
/// The sparse eigenvalues are supplied by the caller, at the arguments noted:
///   rho_plus_1     rho_plus(1)
///   rho_plus_s     rho_plus(s)
///   rho_plus_kbar  rho_plus(kbar)             (estimation bound only)
///   rho_minus_a    rho_minus(1.5 kbar + s)
///   rho_minus_b    rho_minus(1.5 kbar + 2 s)
///   rho_minus_c    rho_minus(2 kbar + s)      (estimation bound only)
struct TheoryInputs {
  double sigma = 1.0;
  Index n = 1;
  Index p = 1;
  Index kbar = 1;
  double eta = 0.1;
  Index s = 2;
  double rho_plus_1 = 1.0;
  double rho_minus_a = 1.0;
  double rho_plus_s = 1.0;
  double rho_minus_b = 1.0;
  double rho_plus_kbar = 1.0;
  double rho_minus_c = 1.0;
  double lambda = 1.0;
  double theta = 1.0;
  Index k_theta = 0;
  std::optional<long> ell;  // empty: drop the geometric stage term (ell -> infinity)
};

/// 7 for the support-recovery theorem, 20 for the estimation bound.
enum class LambdaRegime { selection, estimation };

inline double lambda_threshold(const TheoryInputs& in, LambdaRegime regime = LambdaRegime::selection) {
  require(in.eta > 0.0 && in.eta < 1.0, ErrorCode::invalid_argument, "eta must lie in (0, 1)");
  require(in.n >= 1 && in.p >= 1, ErrorCode::invalid_dimension, "n and p must be >= 1");
  require(in.sigma >= 0.0 && in.rho_plus_1 >= 0.0, ErrorCode::invalid_argument,
          "sigma and rho_plus(1) must be >= 0");
  const double c = regime == LambdaRegime::selection ? 7.0 : 20.0;
  return c * in.sigma *
         std::sqrt(2.0 * in.rho_plus_1 * std::log(2.0 * static_cast<double>(in.p) / in.eta) /
                   static_cast<double>(in.n));
}

/// 9 lambda / rho_minus(1.5 kbar + s); theta must be chosen strictly above.
inline double theta_threshold(const TheoryInputs& in) {
  require(in.rho_minus_a > 0.0, ErrorCode::domain_error, "rho_minus(1.5 kbar + s) must be > 0");
  return 9.0 * in.lambda / in.rho_minus_a;
}

struct SecResult {
  bool holds = false;
  double ratio = 0.0;   // rho_plus(s) / rho_minus(1.5 kbar + 2 s)
  double limit = 0.0;   // 1 + 2 s / (3 kbar)
  double margin = 0.0;  // limit − ratio
};

/// Sparse eigenvalue condition rho_plus(s)/rho_minus(1.5 kbar + 2s) <= 1 + 2s/(3 kbar).
inline SecResult sec_check(const TheoryInputs& in) {
  require(in.rho_minus_b > 0.0, ErrorCode::domain_error, "rho_minus(1.5 kbar + 2 s) must be > 0");
  require(in.kbar >= 1, ErrorCode::invalid_argument, "kbar must be >= 1");
  require(2 * in.s >= 3 * in.kbar, ErrorCode::invalid_argument, "s must be >= 1.5 kbar");
  SecResult r;
  r.ratio = in.rho_plus_s / in.rho_minus_b;
  r.limit = 1.0 + 2.0 * static_cast<double>(in.s) / (3.0 * static_cast<double>(in.kbar));
  r.margin = r.limit - r.ratio;
  r.holds = r.ratio <= r.limit;
  return r;
}

/// Every nonzero of the target exceeds 2 theta in magnitude (vacuous for an empty support).
inline bool min_coef_check(const SparseTarget& target, double theta) {
  for (Index j : target.support())
    if (!(std::abs(target.coefficients()[j]) > 2.0 * theta)) return false;
  return true;
}

/// Number of stages L after which the support is recovered:
/// floor(0.5 ln kbar / ln(rho_minus(1.5 kbar + s) theta / (6 lambda))) + 1.
inline long stage_bound(const TheoryInputs& in) {
  require(in.kbar >= 1, ErrorCode::invalid_argument, "kbar must be >= 1");
  require(in.lambda > 0.0, ErrorCode::invalid_argument, "lambda must be > 0");
  const double contraction = in.rho_minus_a * in.theta / (6.0 * in.lambda);
  require(contraction > 1.0, ErrorCode::condition_violated,
          "rho_minus * theta / (6 lambda) = " + std::to_string(contraction) +
              " <= 1; theta is too small relative to lambda");
  const double ratio = 0.5 * std::log(static_cast<double>(in.kbar)) / std::log(contraction);
  return static_cast<long>(std::floor(ratio)) + 1;
}

/// Right-hand side of the l2 estimation bound after ell stages:
/// (17/rho_minus_c) [2 sigma sqrt(rho_plus_kbar) (sqrt(7.4 kbar/n) + sqrt(2.7 ln(2/eta)/n))
///   + lambda sqrt(k_theta)] + 0.7^ell sqrt(kbar) lambda / rho_minus_c.
inline double param_bound_rhs(const TheoryInputs& in) {
  require(in.rho_minus_c > 0.0, ErrorCode::domain_error, "rho_minus(2 kbar + s) must be > 0");
  require(in.eta > 0.0 && in.eta <= 1.0, ErrorCode::invalid_argument, "eta must lie in (0, 1]");
  const double n = static_cast<double>(in.n);
  const double kbar = static_cast<double>(in.kbar);
  const double noise = 2.0 * in.sigma * std::sqrt(in.rho_plus_kbar) *
                       (std::sqrt(7.4 * kbar / n) + std::sqrt(2.7 * std::log(2.0 / in.eta) / n));
  const double bias = in.lambda * std::sqrt(static_cast<double>(in.k_theta));
  double rhs = 17.0 / in.rho_minus_c * (noise + bias);
  if (in.ell) rhs += std::pow(0.7, static_cast<double>(*in.ell)) * std::sqrt(kbar) * in.lambda / in.rho_minus_c;
  return rhs;
}

}  // namespace sparsestage
