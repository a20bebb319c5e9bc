#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparsestage/error.hpp"
#include "sparsestage/rng.hpp"

namespace sparsestage {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Support = std::vector<Index>;

/// Indices of strictly nonzero entries, ascending. No tolerance.
inline Support support_of(const Vector& w) {
  Support s;
  for (Index j = 0; j < w.size(); ++j)
    if (w[j] != 0.0) s.push_back(j);
  return s;
}

/// n x p design whose columns all have squared 2-norm n.
class DesignMatrix {
 public:
  static constexpr double kNormTolerance = 1e-9;

  /// Rescale every column of `raw` to 2-norm sqrt(n).
  static DesignMatrix normalize(Matrix raw) {
    check_shape(raw);
    const double target = std::sqrt(static_cast<double>(raw.rows()));
    for (Index j = 0; j < raw.cols(); ++j) {
      const double norm = raw.col(j).norm();
      require(norm > 0.0, ErrorCode::degenerate_column,
              "column " + std::to_string(j) + " is identically zero");
      raw.col(j) *= target / norm;
    }
    return DesignMatrix(std::move(raw));
  }

  /// Wrap a matrix that is already normalized (e.g. loaded from a fixture).
  static DesignMatrix from_normalized(Matrix x) {
    check_shape(x);
    const double n = static_cast<double>(x.rows());
    for (Index j = 0; j < x.cols(); ++j) {
      const double dev = std::abs(x.col(j).squaredNorm() - n);
      require(dev <= kNormTolerance * n, ErrorCode::invalid_argument,
              "column " + std::to_string(j) + " is not normalized to squared norm n");
    }
    return DesignMatrix(std::move(x));
  }

  Index n() const noexcept { return x_.rows(); }
  Index p() const noexcept { return x_.cols(); }
  const Matrix& matrix() const noexcept { return x_; }

  /// Largest |‖X_j‖² − n| / n over columns.
  double max_norm_deviation() const {
    double worst = 0.0;
    const double n = static_cast<double>(x_.rows());
    for (Index j = 0; j < x_.cols(); ++j)
      worst = std::max(worst, std::abs(x_.col(j).squaredNorm() - n) / n);
    return worst;
  }

 private:
  explicit DesignMatrix(Matrix x) : x_(std::move(x)) {}

  static void check_shape(const Matrix& x) {
    require(x.rows() >= 1 && x.cols() >= 1, ErrorCode::invalid_dimension,
            "design must have n >= 1 and p >= 1");
    require(x.allFinite(), ErrorCode::numeric_failure, "design has non-finite entries");
  }

  Matrix x_;
};

/// True coefficient vector together with its exact support.
class SparseTarget {
 public:
  explicit SparseTarget(Vector coefficients) : w_(std::move(coefficients)) {
    require(w_.size() >= 1, ErrorCode::invalid_dimension, "target must have p >= 1");
    require(w_.allFinite(), ErrorCode::numeric_failure, "target has non-finite entries");
    support_ = support_of(w_);
  }

  const Vector& coefficients() const noexcept { return w_; }
  const Support& support() const noexcept { return support_; }
  Index kbar() const noexcept { return static_cast<Index>(support_.size()); }
  Index p() const noexcept { return w_.size(); }

  /// Smallest nonzero magnitude; +inf for an all-zero target.
  double min_abs_nonzero() const {
    double m = std::numeric_limits<double>::infinity();
    for (Index j : support_) m = std::min(m, std::abs(w_[j]));
    return m;
  }

 private:
  Vector w_;
  Support support_;
};

enum class NoiseKind { gaussian, uniform_bounded };

/// Sub-Gaussian noise description. For uniform_bounded, noise is uniform on
/// [-sigma, sigma], i.e. an interval of width b - a = 2 sigma.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma = 1.0;

  static NoiseSpec gaussian(double sigma) { return validated({NoiseKind::gaussian, sigma}); }

  /// Zero-mean bounded noise on an interval of the given width; sigma = width / 2.
  static NoiseSpec uniform_width(double width) {
    return validated({NoiseKind::uniform_bounded, width / 2.0});
  }

  static NoiseSpec validated(NoiseSpec s) {
    require(std::isfinite(s.sigma) && s.sigma >= 0.0, ErrorCode::invalid_argument,
            "noise sigma must be finite and >= 0");
    return s;
  }
};

struct Provenance {
  NoiseSpec noise;
  Seed noise_seed = 0;
  std::optional<Seed> design_seed;
  std::optional<Seed> target_seed;
};

struct Observations {
  Vector y;
  std::optional<Provenance> provenance;

  Index n() const noexcept { return y.size(); }
};

inline DesignMatrix generate_design(Index n, Index p, Seed seed) {
  require(n >= 1 && p >= 1, ErrorCode::invalid_dimension, "generate_design needs n >= 1, p >= 1");
  CounterRng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix raw(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) raw(i, j) = normal(rng);
  return DesignMatrix::normalize(std::move(raw));
}

/// kbar nonzeros at uniformly random positions, magnitudes uniform on (low, high).
/// With random_sign each nonzero is negated with probability 1/2.
inline SparseTarget generate_target(Index p, Index kbar, double low, double high, Seed seed,
                                    bool random_sign = false) {
  require(p >= 1, ErrorCode::invalid_dimension, "generate_target needs p >= 1");
  require(kbar >= 1 && kbar <= p, ErrorCode::invalid_sparsity, "kbar must lie in [1, p]");
  require(low < high, ErrorCode::invalid_argument, "coefficient interval needs low < high");
  require(low > 0.0 || high < 0.0, ErrorCode::invalid_argument,
          "coefficient interval must exclude zero");
  CounterRng rng(seed);

  std::vector<Index> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), Index{0});
  // partial Fisher-Yates
  for (Index i = 0; i < kbar; ++i) {
    std::uniform_int_distribution<Index> pick(i, p - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }

  std::uniform_real_distribution<double> mag(low, high);
  std::bernoulli_distribution flip(0.5);
  Vector w = Vector::Zero(p);
  for (Index i = 0; i < kbar; ++i) {
    double v = mag(rng);
    if (v == low) v = std::nextafter(low, high);  // keep the draw inside the open interval
    if (random_sign && flip(rng)) v = -v;
    w[idx[static_cast<std::size_t>(i)]] = v;
  }
  return SparseTarget(std::move(w));
}

inline Observations generate_observations(const DesignMatrix& x, const SparseTarget& target,
                                          const NoiseSpec& noise, Seed seed) {
  require(target.p() == x.p(), ErrorCode::invalid_dimension,
          "target length " + std::to_string(target.p()) + " != design p " + std::to_string(x.p()));
  NoiseSpec::validated(noise);
  Vector y = x.matrix() * target.coefficients();
  if (noise.sigma > 0.0) {
    CounterRng rng(seed);
    if (noise.kind == NoiseKind::gaussian) {
      std::normal_distribution<double> eps(0.0, noise.sigma);
      for (Index i = 0; i < y.size(); ++i) y[i] += eps(rng);
    } else {
      std::uniform_real_distribution<double> eps(-noise.sigma, noise.sigma);
      for (Index i = 0; i < y.size(); ++i) y[i] += eps(rng);
    }
  }
  Provenance prov;
  prov.noise_seed = seed;
  prov.noise = noise;
  return Observations{std::move(y), prov};
}

}  // namespace sparsestage
