#include <cmath>

#include <gtest/gtest.h>

#include "sparsestage/diagnostics.hpp"
#include "sparsestage/theory.hpp"

using namespace sparsestage;

namespace {

TheoryInputs base() {
  TheoryInputs in;
  in.sigma = 1.0;
  in.n = 100;
  in.p = 250;
  in.eta = 0.1;
  return in;
}

}  // namespace

TEST(LambdaThreshold, Values) {
  TheoryInputs in = base();
  EXPECT_NEAR(lambda_threshold(in), 2.889, 1e-3);
  EXPECT_NEAR(lambda_threshold(in, LambdaRegime::estimation), 20.0 / 7.0 * lambda_threshold(in), 1e-12);
  in.sigma = 0.0;
  EXPECT_EQ(lambda_threshold(in), 0.0);
}

TEST(LambdaThreshold, Scaling) {
  TheoryInputs in = base();
  const double t = lambda_threshold(in);
  in.n = 200;
  EXPECT_NEAR(lambda_threshold(in), t / std::sqrt(2.0), 1e-12);
  in = base();
  in.sigma = 3.0;
  EXPECT_NEAR(lambda_threshold(in), 3.0 * t, 1e-12);
  in = base();
  in.p = 500;
  EXPECT_NEAR(lambda_threshold(in) / t, std::sqrt(std::log(2.0 * 500 / 0.1) / std::log(2.0 * 250 / 0.1)), 1e-12);
  in.eta = 1.0;
  EXPECT_THROW(lambda_threshold(in), Error);
}

TEST(ThetaThreshold, Values) {
  TheoryInputs in;
  in.lambda = 1.0;
  in.rho_minus_a = 1.0;
  EXPECT_DOUBLE_EQ(theta_threshold(in), 9.0);
  in.lambda = 0.94;
  in.rho_minus_a = 0.5;
  EXPECT_NEAR(theta_threshold(in), 16.92, 1e-12);
  in.lambda = 0.0;
  EXPECT_EQ(theta_threshold(in), 0.0);
  in.rho_minus_a = 0.0;
  EXPECT_THROW(theta_threshold(in), Error);
}

TEST(SecCheck, Values) {
  TheoryInputs in;
  in.kbar = 2;
  in.s = 3;
  in.rho_plus_s = 1.0;
  in.rho_minus_b = 1.0;
  SecResult r = sec_check(in);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.margin, 1.0, 1e-15);  // 2s/(3 kbar)
  in.rho_plus_s = 2.0;
  r = sec_check(in);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.margin, 0.0, 1e-12);
  in.rho_plus_s = 2.5;
  r = sec_check(in);
  EXPECT_FALSE(r.holds);
  EXPECT_NEAR(r.margin, -0.5, 1e-12);
}

TEST(SecCheck, MarginCrossesZeroAtLimit) {
  TheoryInputs in;
  in.kbar = 6;
  in.s = 9;
  in.rho_minus_b = 0.8;
  const double limit = 1.0 + 2.0 * 9 / 18.0;
  for (double ratio = 1.0; ratio < 3.0; ratio += 0.01) {
    in.rho_plus_s = ratio * in.rho_minus_b;
    const SecResult r = sec_check(in);
    EXPECT_EQ(r.margin >= -1e-12, ratio <= limit + 1e-12) << ratio;
    EXPECT_NEAR(r.margin, limit - ratio, 1e-12);
  }
}

TEST(SecCheck, Preconditions) {
  TheoryInputs in;
  in.kbar = 4;
  in.s = 5;  // < 1.5 kbar
  EXPECT_THROW(sec_check(in), Error);
  in.s = 6;
  in.rho_minus_b = 0.0;
  EXPECT_THROW(sec_check(in), Error);
}

TEST(MinCoefCheck, Cases) {
  Vector w(4);
  w << 0.0, 1.5, -9.0, 1.0;
  const SparseTarget t(w);
  EXPECT_TRUE(min_coef_check(t, 0.4));
  EXPECT_FALSE(min_coef_check(t, 0.5));  // needs strict >
  EXPECT_TRUE(min_coef_check(t, 0.0));
  EXPECT_TRUE(min_coef_check(SparseTarget(Vector::Zero(3)), 100.0));
}

TEST(StageBound, Values) {
  TheoryInputs in;
  in.kbar = 30;
  in.rho_minus_a = 1.0;
  in.lambda = 1.0;
  in.theta = 9.0;
  EXPECT_EQ(stage_bound(in), 5);
  in.kbar = 1;
  EXPECT_EQ(stage_bound(in), 1);
  in.kbar = 30;
  in.theta = 6.0;
  try {
    stage_bound(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::condition_violated);
  }
}

TEST(StageBound, MonotoneInThetaAndKbar) {
  TheoryInputs in;
  in.rho_minus_a = 0.7;
  in.lambda = 0.5;
  for (Index kbar = 1; kbar <= 60; kbar += 3) {
    long prev = std::numeric_limits<long>::max();
    for (double theta = 4.3; theta < 40.0; theta += 0.37) {
      in.kbar = kbar;
      in.theta = theta;
      const long l = stage_bound(in);
      EXPECT_LE(l, prev);
      prev = l;
      in.kbar = kbar + 1;
      EXPECT_GE(stage_bound(in), l);
    }
  }
}

TEST(ParamBound, Values) {
  TheoryInputs in;
  in.sigma = 0.0;
  in.kbar = 1;
  in.k_theta = 0;
  in.lambda = 1.0;
  in.rho_minus_c = 1.0;
  in.ell = 1;
  EXPECT_NEAR(param_bound_rhs(in), 0.7, 1e-15);

  in.k_theta = 4;
  in.ell.reset();
  EXPECT_NEAR(param_bound_rhs(in), 34.0, 1e-12);

  in.sigma = 1.0;
  in.rho_plus_kbar = 1.0;
  in.kbar = 4;
  in.n = 100;
  in.eta = 1.0;
  in.k_theta = 0;
  in.ell = 10;
  // independent re-evaluation of the closed form
  const double noise = 2.0 * (std::sqrt(0.296) + std::sqrt(0.027 * std::log(2.0)));
  const double expect = 17.0 * noise + std::pow(0.7, 10) * 2.0;
  EXPECT_NEAR(param_bound_rhs(in), expect, 1e-12);
  EXPECT_NEAR(param_bound_rhs(in), 23.21, 5e-3);
}

TEST(Evaluators, PureAndRepeatable) {
  TheoryInputs in = base();
  in.kbar = 10;
  in.s = 15;
  in.theta = 12.0;
  in.lambda = 1.0;
  in.rho_minus_a = 0.9;
  in.rho_plus_s = 1.2;
  in.rho_minus_b = 0.8;
  in.ell = 3;
  const ConditionReport a = evaluate_conditions(in);
  const ConditionReport b = evaluate_conditions(in);
  EXPECT_EQ(a.lambda_min_selection, b.lambda_min_selection);
  EXPECT_EQ(*a.theta_min, *b.theta_min);
  EXPECT_EQ(a.sec->margin, b.sec->margin);
  EXPECT_EQ(*a.stage_bound, *b.stage_bound);
  EXPECT_EQ(*a.param_bound, *b.param_bound);
}

TEST(Diagnostics, DefaultSGrid) {
  EXPECT_EQ(default_s_grid(30), (std::vector<Index>{45, 60, 90}));
  EXPECT_EQ(default_s_grid(3), (std::vector<Index>{5, 6, 9}));
}

TEST(Diagnostics, OrthonormalDatasetPassesEverything) {
  const Index n = 12;
  const DesignMatrix x = DesignMatrix::from_normalized(std::sqrt(12.0) * Matrix::Identity(n, n));
  Vector w = Vector::Zero(n);
  w[0] = 5.0;
  w[3] = -6.0;
  TheoryInputs in;
  in.sigma = 0.1;
  in.eta = 0.1;
  in.lambda = 0.2;
  in.theta = 2.0;
  in.ell = 4;
  const DatasetDiagnosis d = diagnose_dataset(x, SparseTarget(w), in, {3, 4});
  ASSERT_EQ(d.per_s.size(), 2u);
  EXPECT_TRUE(*d.min_coef_ok);
  for (const auto& r : d.per_s) {
    EXPECT_NEAR(r.inputs.rho_minus_a, 1.0, 1e-12);
    EXPECT_TRUE(r.sec->holds);
    EXPECT_TRUE(r.theta_ok);
    EXPECT_EQ(*r.stage_bound, 1);  // floor(0.5 ln 2 / ln(2 / 1.2)) + 1
  }
  EXPECT_EQ(d.per_s[d.best].inputs.s, 4);  // larger s, larger margin
}
