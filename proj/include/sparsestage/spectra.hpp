#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "sparsestage/error.hpp"
#include "sparsestage/model.hpp"
#include "sparsestage/rng.hpp"

namespace sparsestage {

enum class SpectrumMethod { exact, sampled };

inline const char* to_string(SpectrumMethod m) { return m == SpectrumMethod::exact ? "exact" : "sampled"; }

/// Extreme restricted eigenvalues of A = XᵀX/n over k-sparse directions.
struct SparseSpectrum {
  Index k = 1;
  double rho_minus = 0.0;
  double rho_plus = 0.0;
  SpectrumMethod method = SpectrumMethod::exact;
  std::uint64_t subsets_evaluated = 0;
};

inline constexpr std::uint64_t kDefaultSubsetBudget = 2'000'000;

/// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  constexpr auto cap = static_cast<unsigned __int128>(std::numeric_limits<std::uint64_t>::max());
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;  // exact: r * (n-k+i) is divisible by i at every step
    if (r > cap) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

namespace detail {

struct EigenRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void merge(const EigenRange& o) {
    lo = std::min(lo, o.lo);
    hi = std::max(hi, o.hi);
  }
};

inline Matrix gram_of(const DesignMatrix& x) {
  Matrix a = x.matrix().transpose() * x.matrix();
  a /= static_cast<double>(x.n());
  return a;
}

/// Smallest and largest eigenvalue of the principal block gram[idx, idx].
inline EigenRange block_extremes(const Matrix& gram, const std::vector<Index>& idx,
                                 Matrix& scratch) {
  const auto k = static_cast<Index>(idx.size());
  if (k == 1) {
    const double d = gram(idx[0], idx[0]);
    return {d, d};
  }
  if (k == 2) {
    const double a = gram(idx[0], idx[0]);
    const double d = gram(idx[1], idx[1]);
    const double b = gram(idx[0], idx[1]);
    const double mid = 0.5 * (a + d);
    const double rad = std::hypot(0.5 * (a - d), b);
    return {mid - rad, mid + rad};
  }
  scratch.resize(k, k);
  for (Index r = 0; r < k; ++r)
    for (Index c = 0; c < k; ++c) scratch(r, c) = gram(idx[r], idx[c]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(scratch, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::numeric_failure, "block eigensolver failed");
  const auto& ev = es.eigenvalues();  // ascending
  return {ev[0], ev[k - 1]};
}

/// Combination of rank `rank` in lexicographic order of k-subsets of {0..p-1}.
inline std::vector<Index> unrank_combination(std::uint64_t rank, Index p, Index k) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));
  Index next = 0;
  for (Index slot = 0; slot < k; ++slot) {
    for (Index v = next; v < p; ++v) {
      const std::uint64_t count = binomial(static_cast<std::uint64_t>(p - v - 1),
                                           static_cast<std::uint64_t>(k - slot - 1));
      if (rank < count) {
        out.push_back(v);
        next = v + 1;
        break;
      }
      rank -= count;
    }
  }
  return out;
}

/// Advance to the lexicographic successor; false when `idx` was the last subset.
inline bool next_combination(std::vector<Index>& idx, Index p) {
  const auto k = static_cast<Index>(idx.size());
  for (Index i = k - 1; i >= 0; --i) {
    if (idx[i] < p - k + i) {
      ++idx[i];
      for (Index j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

inline void check_k(const DesignMatrix& x, Index k) {
  require(k >= 1 && k <= x.p(), ErrorCode::invalid_argument,
          "sparsity level k must lie in [1, p]");
}

inline SparseSpectrum finish(Index k, EigenRange r, SpectrumMethod m, std::uint64_t count) {
  // Round-off can push the smallest eigenvalue of a singular block slightly negative.
  const double lo = std::max(0.0, r.lo);
  return SparseSpectrum{k, lo, std::max(lo, r.hi), m, count};
}

}  // namespace detail

/// Exact sparse eigenvalues by enumerating every size-k column subset.
/// Size-k blocks suffice: by interlacing, a smaller block's extremes lie within
/// those of any size-k block containing it.
inline SparseSpectrum sparse_eigen_exact(const DesignMatrix& x, Index k,
                                         std::uint64_t budget = kDefaultSubsetBudget,
                                         unsigned workers = 1) {
  detail::check_k(x, k);
  const std::uint64_t total =
      binomial(static_cast<std::uint64_t>(x.p()), static_cast<std::uint64_t>(k));
  require(total <= budget, ErrorCode::budget_exceeded,
          "C(" + std::to_string(x.p()) + ", " + std::to_string(k) + ") = " +
              std::to_string(total) + " subsets exceeds budget " + std::to_string(budget) +
              "; use sparse_eigen_sampled");
  const Matrix gram = detail::gram_of(x);

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(total, 256))));
  std::vector<detail::EigenRange> partial(workers);

  auto scan = [&](unsigned w) {
    const std::uint64_t begin = total * w / workers;
    const std::uint64_t end = total * (w + 1) / workers;
    if (begin == end) return;
    std::vector<Index> idx = detail::unrank_combination(begin, x.p(), k);
    Matrix scratch;
    detail::EigenRange acc;
    for (std::uint64_t r = begin; r < end; ++r) {
      acc.merge(detail::block_extremes(gram, idx, scratch));
      detail::next_combination(idx, x.p());
    }
    partial[w] = acc;
  };

  if (workers == 1) {
    scan(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(scan, w);
  }

  detail::EigenRange all;
  for (const auto& r : partial) all.merge(r);
  return detail::finish(k, all, SpectrumMethod::exact, total);
}

/// Inner estimate from `samples` uniformly random size-k subsets:
/// rho_plus never exceeds, and rho_minus never undercuts, the exact values.
inline SparseSpectrum sparse_eigen_sampled(const DesignMatrix& x, Index k, std::uint64_t samples,
                                           Seed seed) {
  detail::check_k(x, k);
  require(samples >= 1, ErrorCode::invalid_argument, "samples must be >= 1");
  const Matrix gram = detail::gram_of(x);
  CounterRng rng(seed);

  const Index p = x.p();
  std::vector<Index> pool(static_cast<std::size_t>(p));
  std::vector<Index> idx(static_cast<std::size_t>(k));
  Matrix scratch;
  detail::EigenRange acc;
  for (std::uint64_t s = 0; s < samples; ++s) {
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Index> pick(i, p - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    std::copy_n(pool.begin(), k, idx.begin());
    std::sort(idx.begin(), idx.end());
    acc.merge(detail::block_extremes(gram, idx, scratch));
  }
  return detail::finish(k, acc, SpectrumMethod::sampled, samples);
}

/// Upper bound (sqrt(s)/2) * sqrt(rho_plus(s) / rho_minus(k+s) − 1) on pi(k, s).
/// The exact pi(k, s) is not computed.
inline double pi_upper_bound(double rho_plus_s, double rho_minus_ks, Index s) {
  require(s >= 1, ErrorCode::invalid_argument, "s must be >= 1");
  require(rho_minus_ks > 0.0, ErrorCode::domain_error, "rho_minus(k+s) must be > 0");
  require(rho_plus_s >= rho_minus_ks, ErrorCode::invalid_spectrum,
          "rho_plus(s) must be >= rho_minus(k+s)");
  return 0.5 * std::sqrt(static_cast<double>(s)) * std::sqrt(rho_plus_s / rho_minus_ks - 1.0);
}

}  // namespace sparsestage
