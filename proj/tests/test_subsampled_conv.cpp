#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "oracles.hpp"
#include "smallball/errors.hpp"
#include "smallball/operator.hpp"
#include "smallball/subsampled_conv.hpp"

using namespace sblab;

namespace {

MonteCarlo mc_with(std::uint64_t trials, std::uint64_t seed, unsigned threads = 1) {
  MonteCarlo mc;
  mc.trials = trials;
  mc.seed = seed;
  mc.threads = threads;
  return mc;
}

std::vector<double> gaussian_vector(std::size_t n, std::uint64_t seed, std::uint64_t trial = 0) {
  TrialRng rng(seed, Stream::kTest, trial);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Convolve, DeltaReversesIndices) {
  const std::size_t n = 8;
  std::vector<double> e1(n, 0.0);
  e1[0] = 1.0;
  const auto xi = gaussian_vector(n, 1);
  const auto c = circular_convolve(e1, xi);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(c[i], xi[(n - i) % n], 1e-14);
  const auto m = circulant_matvec(e1, xi);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(m[i], xi[(n - i) % n], 1e-14);
}

TEST(Convolve, MatchesDirectSum) {
  const auto a = gaussian_vector(64, 2);
  const auto xi = gaussian_vector(64, 3);
  EXPECT_LE(max_abs_diff(circular_convolve(a, xi), oracle::convolve_direct(a, xi)), 1e-10);
  EXPECT_LE(max_abs_diff(circular_convolve_direct(a, xi), oracle::convolve_direct(a, xi)), 1e-12);
}

TEST(Convolve, Bilinear) {
  const auto a1 = gaussian_vector(33, 4);
  const auto a2 = gaussian_vector(33, 5);
  const auto xi = gaussian_vector(33, 6);
  std::vector<double> sum(33);
  for (std::size_t i = 0; i < 33; ++i) sum[i] = a1[i] + a2[i];
  const auto lhs = circular_convolve(sum, xi);
  const auto c1 = circular_convolve(a1, xi);
  const auto c2 = circular_convolve(a2, xi);
  for (std::size_t i = 0; i < 33; ++i) EXPECT_NEAR(lhs[i], c1[i] + c2[i], 1e-10);
}

TEST(Convolve, LengthMismatch) {
  EXPECT_THROW(circular_convolve(std::vector<double>(4), std::vector<double>(5)), InputError);
  EXPECT_THROW(circulant_matvec(std::vector<double>(4), std::vector<double>(5)), InputError);
}

TEST(CirculantMatvec, AgreesWithConvolution) {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto a = gaussian_vector(128, 10, s);
    const auto x = gaussian_vector(128, 11, s);
    worst = std::max(worst, max_abs_diff(circulant_matvec(a, x), circular_convolve(a, x)));
    const CirculantOperator op(a);
    worst = std::max(worst, max_abs_diff(op.apply(x), oracle::convolve_direct(a, x)));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(CirculantMatvec, DiagonalisationIdentity) {
  // sum_i (a (*) xi)_i^2 = n sum_k |a_hat_k|^2 |xi_hat_k|^2 with unitary transforms.
  const auto a = gaussian_vector(50, 12);
  const auto xi = gaussian_vector(50, 13);
  const auto c = circular_convolve(a, xi);
  double lhs = 0.0;
  for (double v : c) lhs += v * v;
  const auto ah = dft(a);
  const auto xh = dft(xi);
  double rhs = 0.0;
  for (std::size_t k = 0; k < 50; ++k) rhs += std::norm(ah[k] / std::sqrt(50.0)) * std::norm(xh[k] / std::sqrt(50.0));
  rhs *= 50.0;
  EXPECT_NEAR(lhs, rhs, 1e-8 * lhs);
}

TEST(CirculantMatvec, FasterThanDirectAtLargeN) {
  const std::size_t n = 1u << 16;
  const auto a = gaussian_vector(n, 14);
  const auto x = gaussian_vector(n, 15);
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto fast = circulant_matvec(a, x);
  const auto t1 = clock::now();
  // Time a slice of the direct sum and extrapolate.
  const std::size_t rows = 256;
  std::vector<double> slow(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < n; ++j) slow[i] += a[j] * x[(j + n - i) % n];
  const auto t2 = clock::now();
  const double fft_s = std::chrono::duration<double>(t1 - t0).count();
  const double direct_s = std::chrono::duration<double>(t2 - t1).count() * (double(n) / rows);
  EXPECT_GE(direct_s, 20.0 * fft_s);
  for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(fast[i], slow[i], 1e-8);
}

TEST(FourierProfile, DeltaSignal) {
  const std::size_t n = 16;
  std::vector<double> e1(n, 0.0);
  e1[0] = 1.0;
  const double qs[] = {3.0, 4.0, kInf};
  const FourierProfile p = fourier_profile(e1, qs);
  for (const auto& z : p.a_hat) EXPECT_NEAR(std::abs(z), 0.25, 1e-15);
  for (double q : qs) {
    const double expect = std::isinf(q) ? 0.25 : std::pow(16.0, 1.0 / q - 0.5);
    EXPECT_NEAR(p.q_norms.at(q), expect, 1e-14);
    EXPECT_NEAR(p.srank.at(q), 16.0, 1e-10);
  }
}

TEST(FourierProfile, FlatSignal) {
  const std::size_t n = 9;
  const std::vector<double> flat(n, 1.0 / 3.0);
  const double qs[] = {4.0, kInf};
  const FourierProfile p = fourier_profile(flat, qs);
  EXPECT_NEAR(p.q_norms.at(4.0), 1.0, 1e-14);
  EXPECT_NEAR(p.srank.at(kInf), 1.0, 1e-13);
}

TEST(FourierProfile, ParsevalAndErrors) {
  auto a = gaussian_vector(37, 16);
  double norm = 0.0;
  for (double v : a) norm += v * v;
  for (double& v : a) v /= std::sqrt(norm);
  const double qs[] = {4.0};
  const FourierProfile p = fourier_profile(a, qs);
  double energy = 0.0;
  for (const auto& z : p.a_hat) energy += std::norm(z);
  EXPECT_NEAR(energy, 1.0, 1e-10);
  EXPECT_THROW(fourier_profile(std::vector<double>(4, 0.0), qs), DomainError);
  const double bad_q[] = {2.0};
  EXPECT_THROW(fourier_profile(a, bad_q), ParameterError);
}

TEST(FourierProfile, WalshHadamardMode) {
  std::vector<double> e1(8, 0.0);
  e1[3] = 1.0;
  const double qs[] = {kInf};
  const FourierProfile p = fourier_profile(e1, qs, TransformMode::kWalshHadamard);
  for (const auto& z : p.a_hat) EXPECT_NEAR(std::abs(z), 1.0 / std::sqrt(8.0), 1e-15);
  EXPECT_THROW(fourier_profile(std::vector<double>{0.6, 0.8, 0.0}, qs, TransformMode::kWalshHadamard),
               ParameterError);
  const auto h = fwht(std::vector<double>{1.0, 0.0, 0.0, 0.0});
  for (double v : h) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Subsample, EdgeProbabilities) {
  const std::vector<double> v(50, 1.0);
  TrialRng rng(1, Stream::kTest, 0);
  EXPECT_EQ(subsample(v, 1.0, rng).indices.size(), 50u);
  EXPECT_EQ(subsample(v, 0.0, rng).indices.size(), 0u);
  EXPECT_THROW(subsample(v, 1.5, rng), ParameterError);
}

TEST(Subsample, MeanSizeIsBinomial) {
  const std::vector<double> v(1024, 0.0);
  double total = 0.0;
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    TrialRng rng(2, Stream::kTest, static_cast<std::uint64_t>(r));
    total += static_cast<double>(subsample(v, 0.25, rng).indices.size());
  }
  const double se = std::sqrt(1024 * 0.25 * 0.75 / reps);
  EXPECT_NEAR(total / reps, 256.0, 3.0 * se);
}

TEST(Ensemble, RandomSparseSignal) {
  const auto a = ConvolutionEnsemble::random_sparse(256, 8, 3);
  std::size_t nz = 0;
  double norm = 0.0;
  for (double x : a) {
    if (x != 0.0) ++nz;
    norm += x * x;
  }
  EXPECT_EQ(nz, 8u);
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_EQ(a, ConvolutionEnsemble::random_sparse(256, 8, 3));
  EXPECT_THROW(ConvolutionEnsemble(std::vector<double>{1.0, 1.0}, 0.5, RandomVectorModel::cube(2)),
               ParameterError);
  EXPECT_THROW(ConvolutionEnsemble(std::vector<double>{1.0, 0.0}, 0.0, RandomVectorModel::cube(2)),
               ParameterError);
}

TEST(Ensemble, SparseSignalsBeatTheOldExponent) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto a = ConvolutionEnsemble::random_sparse(256, 8, seed);
    const double qs[] = {kInf};
    EXPECT_GE(fourier_profile(a, qs).srank.at(kInf), 32.0 - 1e-9) << "seed " << seed;
  }
}

TEST(Separation, GaussianDeltaCountsMatchNormalTail) {
  std::vector<double> e1(128, 0.0);
  e1[0] = 1.0;
  const ConvolutionEnsemble ens(e1, 1.0, RandomVectorModel::gaussian(128));
  const SeparationReport r = separation_experiment(ens, 0.1, {}, mc_with(4000, 1));
  const double p = oracle::normal_two_sided_tail(0.1);
  EXPECT_NEAR(p, 0.920344325445942, 1e-14);
  const double se = std::sqrt(128.0 * p * (1.0 - p) / 4000.0);
  EXPECT_NEAR(r.mean_large_count, 128.0 * p, 3.0 * se);
  EXPECT_DOUBLE_EQ(r.mean_subset_size, 128.0);
  EXPECT_DOUBLE_EQ(r.exponent_old, 128.0);
}

TEST(Separation, MonotoneInEpsilonOnSharedSamples) {
  const auto a = ConvolutionEnsemble::random_sparse(64, 4, 7);
  const ConvolutionEnsemble ens(a, 0.5, RandomVectorModel::cube(64));
  const std::vector<double> eps{0.01, 0.05, 0.1, 0.2, 0.3, 0.5};
  const auto rows = separation_sweep(ens, eps, {}, mc_with(5000, 2));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].p_e2.successes, rows[i - 1].p_e2.successes);
    EXPECT_LE(rows[i].p_e1.successes, rows[i - 1].p_e1.successes);
    EXPECT_LE(rows[i].mean_large_count, rows[i - 1].mean_large_count);
  }
}

TEST(Separation, ThreadInvariantAndErrors) {
  const auto a = ConvolutionEnsemble::random_sparse(32, 3, 8);
  const ConvolutionEnsemble ens(a, 0.5, RandomVectorModel::cube(32));
  const auto r1 = separation_experiment(ens, 0.05, {}, mc_with(10000, 3, 1));
  const auto r8 = separation_experiment(ens, 0.05, {}, mc_with(10000, 3, 8));
  EXPECT_EQ(r1.p_e2.successes, r8.p_e2.successes);
  EXPECT_EQ(r1.mean_large_count, r8.mean_large_count);
  EXPECT_THROW(separation_experiment(ens, 1.0, {}, mc_with(10, 0)), ParameterError);
}
