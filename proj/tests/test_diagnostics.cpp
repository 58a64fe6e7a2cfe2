#include <cmath>

#include <gtest/gtest.h>

#include "bowl/diagnostics.hpp"
#include "bowl/rng.hpp"
#include "bowl/verify.hpp"

using namespace bowl;

namespace {

// AR(1) chains, x_t = phi x_{t-1} + e_t; integrated autocorrelation time (1 + phi) / (1 - phi).
Eigen::MatrixXd ar1(Eigen::Index n, Eigen::Index chains, double phi, std::uint64_t seed, double shift_last = 0.0) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, chains);
  for (Eigen::Index c = 0; c < chains; ++c) {
    double v = rng.normal() / std::sqrt(1.0 - phi * phi);
    for (Eigen::Index t = 0; t < n; ++t) {
      v = phi * v + rng.normal();
      x(t, c) = v;
    }
  }
  x.col(chains - 1).array() += shift_last;
  return x;
}

}  // namespace

TEST(Ess, IndependentDrawsNearSampleSize) {
  const Eigen::MatrixXd x = ar1(4000, 2, 0.0, 1);
  EXPECT_NEAR(effective_sample_size(x) / 8000.0, 1.0, 0.15);
}

TEST(Ess, Ar1MatchesAutocorrelationTime) {
  const double phi = 0.8;
  const Eigen::MatrixXd x = ar1(20000, 2, phi, 2);
  const double expect = 40000.0 * (1.0 - phi) / (1.0 + phi);
  EXPECT_NEAR(effective_sample_size(x) / expect, 1.0, 0.2);
}

TEST(Rhat, MixedChainsNearOne) {
  EXPECT_LT(split_rhat(ar1(2000, 4, 0.5, 3)), 1.01);
}

TEST(Rhat, DisjointChainsFlagged) {
  EXPECT_GT(split_rhat(ar1(2000, 4, 0.5, 4, 5.0)), 1.1);
}

TEST(Rhat, TooShortIsNan) { EXPECT_TRUE(std::isnan(split_rhat(Eigen::MatrixXd::Ones(3, 2)))); }

TEST(CoordinateByChain, ReshapesChainMajorDraws) {
  PosteriorDraws d;
  d.retained_per_chain = 3;
  d.n_chains = 2;
  d.beta.resize(6, 2);
  d.beta << 1, 10, 2, 20, 3, 30, 4, 40, 5, 50, 6, 60;
  const Eigen::MatrixXd c = coordinate_by_chain(d, 1);
  EXPECT_EQ(c(0, 0), 10);
  EXPECT_EQ(c(2, 0), 30);
  EXPECT_EQ(c(0, 1), 40);
  EXPECT_EQ(c(2, 1), 60);
}

TEST(Verify, MixtureIdentityAndKs) {
  EXPECT_LT(verify::mixture_identity_max_error(verify::mixture_identity_points()), 1e-6);
  EXPECT_EQ(verify::ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(verify::ks_statistic({1, 2}, {3, 4}), 1.0);
  EXPECT_NEAR(verify::ks_statistic({1, 2, 3, 4}, {2.5, 3.5}), 0.5, 1e-15);
}

TEST(Verify, QuickSuitePassesAndTightTolFails) {
  verify::Options opt;
  opt.quick = true;
  for (const auto& c : verify::run_all(opt)) EXPECT_TRUE(c.passed) << c.name << " " << c.measured << " >= " << c.threshold;
  opt.tol = 1e-12;
  bool any_failed = false;
  for (const auto& c : verify::run_all(opt)) any_failed |= !c.passed;
  EXPECT_TRUE(any_failed);
}
