#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sparsestage/spectra.hpp"

using namespace sparsestage;

TEST(Binomial, Values) {
  EXPECT_EQ(binomial(4, 2), 6u);
  EXPECT_EQ(binomial(250, 2), 31125u);
  EXPECT_EQ(binomial(250, 3), 2573000u);
  EXPECT_EQ(binomial(3, 5), 0u);
  EXPECT_EQ(binomial(10, 0), 1u);
  EXPECT_EQ(binomial(1000, 500), std::numeric_limits<std::uint64_t>::max());
}

TEST(Combinations, UnrankMatchesIteration) {
  std::vector<Index> idx{0, 1, 2};
  for (std::uint64_t r = 0; r < binomial(7, 3); ++r) {
    EXPECT_EQ(detail::unrank_combination(r, 7, 3), idx) << r;
    const bool more = detail::next_combination(idx, 7);
    EXPECT_EQ(more, r + 1 < binomial(7, 3));
  }
}

TEST(SparseEigenExact, IdentityDesign) {
  const Index n = 6;
  const DesignMatrix x = DesignMatrix::from_normalized(std::sqrt(6.0) * Matrix::Identity(n, n));
  for (Index k = 1; k <= n; ++k) {
    const SparseSpectrum s = sparse_eigen_exact(x, k);
    EXPECT_NEAR(s.rho_minus, 1.0, 1e-14);
    EXPECT_NEAR(s.rho_plus, 1.0, 1e-14);
    EXPECT_EQ(s.method, SpectrumMethod::exact);
    EXPECT_EQ(s.subsets_evaluated, binomial(6, static_cast<std::uint64_t>(k)));
  }
}

TEST(SparseEigenExact, KOneIsUnity) {
  const SparseSpectrum s = sparse_eigen_exact(generate_design(30, 40, 5), 1);
  EXPECT_NEAR(s.rho_minus, 1.0, 1e-9);
  EXPECT_NEAR(s.rho_plus, 1.0, 1e-9);
}

TEST(SparseEigenExact, ClosedFormTwoByTwoOracle) {
  std::mt19937_64 rng(99);
  const DesignMatrix x = oracle::random_design(6, 4, rng);
  const SparseSpectrum s = sparse_eigen_exact(x, 2);
  const auto e = oracle::sparse_eigen_k2(x);
  EXPECT_NEAR(s.rho_minus, e.lo, 1e-10);
  EXPECT_NEAR(s.rho_plus, e.hi, 1e-10);
  EXPECT_EQ(s.subsets_evaluated, 6u);
}

TEST(SparseEigenExact, AgreesWithAllSizesEnumeration) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const DesignMatrix x = oracle::random_design(8, 7, rng);
    for (Index k = 1; k <= 7; ++k) {
      const SparseSpectrum s = sparse_eigen_exact(x, k);
      const auto e = oracle::sparse_eigen_all_sizes(x, k);
      EXPECT_NEAR(s.rho_minus, std::max(0.0, e.lo), 1e-10);
      EXPECT_NEAR(s.rho_plus, e.hi, 1e-10);
    }
  }
}

TEST(SparseEigenExact, MonotoneInK) {
  const DesignMatrix x = generate_design(10, 9, 3);
  double last_plus = 0.0, last_minus = INFINITY;
  for (Index k = 1; k <= 9; ++k) {
    const SparseSpectrum s = sparse_eigen_exact(x, k);
    EXPECT_GE(s.rho_plus, last_plus);
    EXPECT_LE(s.rho_minus, last_minus);
    EXPECT_LE(s.rho_minus, s.rho_plus);
    EXPECT_GE(s.rho_minus, 0.0);
    last_plus = s.rho_plus;
    last_minus = s.rho_minus;
  }
}

TEST(SparseEigenExact, ParallelMatchesSerial) {
  const DesignMatrix x = generate_design(20, 16, 8);
  const SparseSpectrum a = sparse_eigen_exact(x, 4, kDefaultSubsetBudget, 1);
  const SparseSpectrum b = sparse_eigen_exact(x, 4, kDefaultSubsetBudget, 3);
  EXPECT_EQ(a.rho_minus, b.rho_minus);
  EXPECT_EQ(a.rho_plus, b.rho_plus);
  EXPECT_EQ(a.subsets_evaluated, b.subsets_evaluated);
}

TEST(SparseEigenExact, BudgetExceeded) {
  try {
    sparse_eigen_exact(generate_design(10, 250, 1), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::budget_exceeded);
  }
  EXPECT_THROW(sparse_eigen_exact(generate_design(5, 4, 1), 0), Error);
  EXPECT_THROW(sparse_eigen_exact(generate_design(5, 4, 1), 5), Error);
}

TEST(SparseEigenExact, SingularBlocksClampAtZero) {
  const SparseSpectrum s = sparse_eigen_exact(generate_design(3, 6, 2), 5);
  EXPECT_EQ(s.rho_minus, 0.0);
}

TEST(SparseEigenSampled, HitsEverySubsetEventually) {
  std::mt19937_64 rng(17);
  const DesignMatrix x = oracle::random_design(6, 4, rng);
  const SparseSpectrum exact = sparse_eigen_exact(x, 2);
  const SparseSpectrum sampled = sparse_eigen_sampled(x, 2, 1000, 3);
  EXPECT_EQ(sampled.method, SpectrumMethod::sampled);
  EXPECT_EQ(sampled.subsets_evaluated, 1000u);
  EXPECT_NEAR(sampled.rho_minus, exact.rho_minus, 1e-10);
  EXPECT_NEAR(sampled.rho_plus, exact.rho_plus, 1e-10);
}

TEST(SparseEigenSampled, InnerEstimate) {
  for (Seed seed = 0; seed < 10; ++seed) {
    const Index p = 5 + static_cast<Index>(seed % 8);
    const DesignMatrix x = generate_design(8, p, seed);
    for (Index k = 1; k <= std::min<Index>(p, 4); ++k) {
      const SparseSpectrum exact = sparse_eigen_exact(x, k);
      const SparseSpectrum sampled = sparse_eigen_sampled(x, k, 5, seed);
      EXPECT_LE(sampled.rho_plus, exact.rho_plus);
      EXPECT_GE(sampled.rho_minus, exact.rho_minus);
    }
  }
}

TEST(SparseEigenSampled, Deterministic) {
  const DesignMatrix x = generate_design(30, 40, 2);
  const SparseSpectrum a = sparse_eigen_sampled(x, 5, 200, 9);
  const SparseSpectrum b = sparse_eigen_sampled(x, 5, 200, 9);
  EXPECT_EQ(a.rho_minus, b.rho_minus);
  EXPECT_EQ(a.rho_plus, b.rho_plus);
  EXPECT_THROW(sparse_eigen_sampled(x, 5, 0, 9), Error);
}

TEST(PiUpperBound, Values) {
  EXPECT_EQ(pi_upper_bound(1.3, 1.3, 5), 0.0);
  EXPECT_DOUBLE_EQ(pi_upper_bound(2.0, 1.0, 4), 1.0);
  EXPECT_DOUBLE_EQ(pi_upper_bound(1.25, 1.0, 9), 0.75);
}

TEST(PiUpperBound, Errors) {
  try {
    pi_upper_bound(0.5, 1.0, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_spectrum);
  }
  try {
    pi_upper_bound(1.0, 0.0, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain_error);
  }
}
