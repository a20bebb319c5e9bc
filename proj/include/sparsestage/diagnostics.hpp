#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparsestage/error.hpp"
#include "sparsestage/model.hpp"
#include "sparsestage/spectra.hpp"
#include "sparsestage/theory.hpp"

namespace sparsestage {

/// All condition checks for one choice of the free sparsity parameter s.
struct ConditionReport {
  TheoryInputs inputs;
  double lambda_min_selection = 0.0;
  double lambda_min_estimation = 0.0;
  bool lambda_ok = false;
  std::optional<double> theta_min;  // empty when rho_minus_a <= 0
  bool theta_ok = false;
  std::optional<SecResult> sec;     // empty when rho_minus_b <= 0
  std::optional<long> stage_bound;  // empty when the contraction factor is <= 1
  std::optional<double> param_bound;
  std::vector<std::string> notes;
};

inline ConditionReport evaluate_conditions(const TheoryInputs& in) {
  ConditionReport r;
  r.inputs = in;
  r.lambda_min_selection = lambda_threshold(in, LambdaRegime::selection);
  r.lambda_min_estimation = lambda_threshold(in, LambdaRegime::estimation);
  r.lambda_ok = in.lambda >= r.lambda_min_selection;
  try {
    r.theta_min = theta_threshold(in);
    r.theta_ok = in.theta > *r.theta_min;
  } catch (const Error& e) {
    r.notes.emplace_back(e.what());
  }
  try {
    r.sec = sec_check(in);
  } catch (const Error& e) {
    r.notes.emplace_back(e.what());
  }
  try {
    r.stage_bound = stage_bound(in);
  } catch (const Error& e) {
    r.notes.emplace_back(e.what());
  }
  try {
    r.param_bound = param_bound_rhs(in);
  } catch (const Error& e) {
    r.notes.emplace_back(e.what());
  }
  return r;
}

struct SpectrumSource {
  std::uint64_t budget = kDefaultSubsetBudget;
  std::uint64_t samples = 20000;
  Seed seed = 0;
};

/// Sparse eigenvalues of one design, computed lazily per sparsity level.
/// Levels above p are clamped to p; levels with C(p, k) over budget are sampled.
class SpectrumCache {
 public:
  SpectrumCache(const DesignMatrix& x, SpectrumSource src) : x_(x), src_(src) {}

  const SparseSpectrum& at(Index k) {
    k = std::clamp<Index>(k, 1, x_.p());
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    const auto total = binomial(static_cast<std::uint64_t>(x_.p()), static_cast<std::uint64_t>(k));
    SparseSpectrum s = total <= src_.budget
                           ? sparse_eigen_exact(x_, k, src_.budget)
                           : sparse_eigen_sampled(x_, k, src_.samples, derive_seed(src_.seed, {static_cast<std::uint64_t>(k)}));
    return cache_.emplace(k, s).first->second;
  }

  const std::map<Index, SparseSpectrum>& computed() const { return cache_; }

 private:
  const DesignMatrix& x_;
  SpectrumSource src_;
  std::map<Index, SparseSpectrum> cache_;
};

struct DatasetDiagnosis {
  std::vector<ConditionReport> per_s;
  std::size_t best = 0;  // index into per_s with the largest SEC margin
  std::optional<bool> min_coef_ok;
  std::map<Index, SparseSpectrum> spectra;
};

/// Default grid {ceil(1.5 kbar), 2 kbar, 3 kbar}.
inline std::vector<Index> default_s_grid(Index kbar) {
  std::vector<Index> g{(3 * kbar + 1) / 2, 2 * kbar, 3 * kbar};
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

/// Fill the sparse-eigenvalue inputs from a design and evaluate every s in the grid.
/// Fractional sparsity levels such as 1.5 kbar + s round down, since ‖w‖₀ is an integer.
inline DatasetDiagnosis diagnose_dataset(const DesignMatrix& x, const std::optional<SparseTarget>& target,
                                         TheoryInputs base, const std::vector<Index>& s_grid,
                                         SpectrumSource src = {}) {
  require(!s_grid.empty(), ErrorCode::invalid_argument, "s grid must be nonempty");
  base.n = x.n();
  base.p = x.p();
  DatasetDiagnosis d;
  if (target) {
    base.kbar = std::max<Index>(1, target->kbar());
    base.k_theta = 0;
    for (Index j : target->support())
      if (std::abs(target->coefficients()[j]) <= 2.0 * base.theta) ++base.k_theta;
    d.min_coef_ok = min_coef_check(*target, base.theta);
  }
  SpectrumCache cache(x, src);
  const Index kbar = base.kbar;
  for (Index s : s_grid) {
    TheoryInputs in = base;
    in.s = s;
    in.rho_plus_1 = cache.at(1).rho_plus;
    in.rho_plus_s = cache.at(s).rho_plus;
    in.rho_plus_kbar = cache.at(kbar).rho_plus;
    in.rho_minus_a = cache.at((3 * kbar) / 2 + s).rho_minus;
    in.rho_minus_b = cache.at((3 * kbar) / 2 + 2 * s).rho_minus;
    in.rho_minus_c = cache.at(2 * kbar + s).rho_minus;
    ConditionReport r;
    try {
      r = evaluate_conditions(in);
    } catch (const Error& e) {
      r.inputs = in;
      r.notes.emplace_back(e.what());
    }
    d.per_s.push_back(std::move(r));
  }
  auto margin = [](const ConditionReport& r) {
    return r.sec ? r.sec->margin : -std::numeric_limits<double>::infinity();
  };
  for (std::size_t i = 1; i < d.per_s.size(); ++i)
    if (margin(d.per_s[i]) > margin(d.per_s[d.best])) d.best = i;
  d.spectra = cache.computed();
  return d;
}

}  // namespace sparsestage
