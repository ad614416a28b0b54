#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "smallball/errors.hpp"
#include "smallball/grassmann.hpp"

using namespace sblab;

namespace {

MonteCarlo mc_with(std::uint64_t trials, std::uint64_t seed, unsigned threads = 1) {
  MonteCarlo mc;
  mc.trials = trials;
  mc.seed = seed;
  mc.threads = threads;
  return mc;
}

Operator diag(std::initializer_list<double> v) {
  const std::vector<double> d(v);
  return Operator::diagonal(d);
}

// |estimate - truth| within the reported interval widened to 4 sigma.
void expect_covers(const MomentEstimate& e, double truth) {
  const double sigma = e.value * e.log_se;
  EXPECT_NEAR(e.value, truth, 4.0 * sigma + 1e-12) << "value " << e.value;
}

}  // namespace

TEST(SampleSubspace, FramesAreOrthonormal) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    TrialRng rng(1, Stream::kTest, t);
    const SubspaceSample f = sample_subspace(6, 1 + static_cast<Eigen::Index>(t % 6), rng);
    const Eigen::MatrixXd g = f.frame.transpose() * f.frame;
    EXPECT_LE((g - Eigen::MatrixXd::Identity(f.k(), f.k())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SampleSubspace, ProjectionTraceMatchesUniformLaw) {
  // E P_F = (k/m) Id for a uniformly distributed F.
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(4, 4);
  const int n = 20000;
  for (int t = 0; t < n; ++t) {
    TrialRng rng(2, Stream::kTest, static_cast<std::uint64_t>(t));
    acc += sample_subspace(4, 1, rng).projector();
  }
  acc /= n;
  EXPECT_LE((acc - 0.25 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.01);
}

TEST(SampleSubspace, RejectsBadDimensions) {
  TrialRng rng(1, Stream::kTest, 0);
  EXPECT_THROW(sample_subspace(3, 0, rng), ParameterError);
  EXPECT_THROW(sample_subspace(3, 4, rng), ParameterError);
  EXPECT_THROW(coordinate_subspace(3, 4), ParameterError);
}

TEST(ChiOracle, ClosedForms) {
  EXPECT_NEAR(chi_negative_moment(3, 1), 0.797884560802865, 1e-14);
  EXPECT_NEAR(chi_oracle(3, 1), 1.25331413731550, 1e-13);
  EXPECT_NEAR(chi_oracle(4, 1), 1.59576912160573, 1e-13);
  EXPECT_NEAR(chi_oracle(4, 2), std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(chi_oracle(3, 2), 1.0, 1e-13);
  for (int m = 2; m <= 9; ++m)
    for (int k = 1; k < m; ++k) EXPECT_NEAR(chi_oracle(m, k), oracle::chi_negative_radius(m, k), 1e-11);
  EXPECT_THROW(chi_negative_moment(3, 3), ParameterError);
}

TEST(AkEstimate, ExactAtFullDimension) {
  const AkEstimate a = a_k_estimate(diag({2.0, 1.0}), 2, mc_with(100, 0));
  EXPECT_TRUE(a.exact);
  EXPECT_NEAR(a.estimate.value, std::sqrt(2.0), 1e-14);
  EXPECT_EQ(a.estimate.ci_low, a.estimate.value);
  EXPECT_EQ(a.estimate.ci_high, a.estimate.value);
}

TEST(AkEstimate, IdentityGivesOne) {
  for (int k = 1; k <= 3; ++k) {
    const AkEstimate a = a_k_estimate(Operator::identity(4), k, mc_with(1000, 1));
    EXPECT_NEAR(a.estimate.value, 1.0, 1e-12);
  }
}

TEST(AkEstimate, MatchesQuadrature) {
  expect_covers(a_k_estimate(diag({2.0, 1.0}), 1, mc_with(200000, 3)).estimate,
                1.45679103104691);
  expect_covers(a_k_estimate(diag({3.0, 1.0, 1.0}), 1, mc_with(200000, 4)).estimate,
                1.60455632344895);
  expect_covers(a_k_estimate(diag({3.0, 1.0, 1.0}), 2, mc_with(200000, 5)).estimate,
                1.51583045774432);
}

TEST(AkEstimate, IntervalOrderedAndDiagnostics) {
  const AkEstimate a = a_k_estimate(Operator::gaussian(4, 4, 2), 2, mc_with(5000, 6));
  EXPECT_LE(a.estimate.ci_low, a.estimate.value);
  EXPECT_GE(a.estimate.ci_high, a.estimate.value);
  EXPECT_EQ(a.estimate.trials, 5000u);
  EXPECT_GE(a.max_term_ratio, 1.0);
  EXPECT_EQ(a.singular_samples, 0u);
}

TEST(AkEstimate, Errors) {
  EXPECT_THROW(a_k_estimate(Operator::identity(3), 0, mc_with(1000, 0)), ParameterError);
  EXPECT_THROW(a_k_estimate(Operator::identity(3), 4, mc_with(1000, 0)), ParameterError);
  EXPECT_THROW(a_k_estimate(Operator::identity(3), 1, mc_with(10, 0)), ParameterError);
  EXPECT_THROW(a_k_estimate(diag({1.0, 0.0}), 1, mc_with(1000, 0)), DomainError);
}

TEST(AkEstimate, ThreadCountDoesNotChangeResult) {
  const Operator t = Operator::gaussian(5, 5, 9);
  const AkEstimate a = a_k_estimate(t, 2, mc_with(20000, 7, 1));
  const AkEstimate b = a_k_estimate(t, 2, mc_with(20000, 7, 8));
  EXPECT_EQ(a.estimate.value, b.estimate.value);
  EXPECT_EQ(a.estimate.ci_low, b.estimate.ci_low);
}

TEST(GaussianMoment, RadialIsExactForIdentity) {
  const MomentEstimate g = gaussian_negative_moment(Operator::identity(3), 1, mc_with(1000, 1));
  EXPECT_NEAR(g.value, 1.25331413731550, 1e-12);
}

TEST(GaussianMoment, RawMatchesChiMoment) {
  const MomentEstimate g = gaussian_negative_moment(Operator::identity(3), 1, mc_with(200000, 2),
                                                    GaussianMomentMethod::kRaw);
  expect_covers(g, 1.25331413731550);
}

TEST(GaussianMoment, RadialAndRawAgree) {
  const Operator t = diag({2.0, 1.0, 0.5});
  const MomentEstimate a = gaussian_negative_moment(t, 1, mc_with(200000, 3));
  const MomentEstimate b =
      gaussian_negative_moment(t, 1, mc_with(200000, 4), GaussianMomentMethod::kRaw);
  const double se = std::hypot(a.value * a.log_se, b.value * b.log_se);
  EXPECT_NEAR(a.value, b.value, 4.0 * se);
}

TEST(GaussianMoment, IdentityWithAk) {
  const Operator t = diag({2.0, 1.0});
  const MomentEstimate g = gaussian_negative_moment(t, 1, mc_with(200000, 5));
  expect_covers(g, 1.45679103104691 * chi_oracle(2, 1));
}

TEST(GaussianMoment, Errors) {
  EXPECT_THROW(gaussian_negative_moment(Operator::identity(3), 3, mc_with(1000, 0)),
               ParameterError);
  EXPECT_THROW(gaussian_negative_moment(Operator::identity(3), 0, mc_with(1000, 0)),
               ParameterError);
}
