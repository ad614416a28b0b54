#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

namespace sblab {

/// Monte-Carlo probability with an exact (Clopper-Pearson) 95% interval.
struct ProbabilityEstimate {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Exact binomial interval at confidence `level` (two-sided, equal tails).
std::pair<double, double> clopper_pearson(std::uint64_t successes,
                                          std::uint64_t trials,
                                          double level = 0.95);

ProbabilityEstimate make_probability(std::uint64_t successes,
                                     std::uint64_t trials, std::uint64_t seed);

/// Sample mean with a normal-approximation 95% interval.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double max_term = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Estimate of a quantity of the form (E Y)^{-1/k} for a positive integrand Y
/// (a_k(T), Gaussian negative moments). The interval is the delta-method
/// interval on log(E Y) mapped through the power; `log_se` is the standard
/// error of log(value).
struct MomentEstimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double log_se = 0.0;
  MeanEstimate integrand;
  int k = 1;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Order-independent accumulator of sum, sum of squares and max.
struct SumAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  double max = 0.0;
  std::uint64_t count = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    if (x > max) max = x;
    ++count;
  }
  void merge(const SumAccumulator& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    if (o.max > max) max = o.max;
    count += o.count;
  }
};

inline constexpr double kZ95 = 1.959963984540054;

MeanEstimate make_mean(const SumAccumulator& acc, std::uint64_t seed);

/// Maps an estimate of E Y to (E Y)^{-1/k} times `scale`.
MomentEstimate make_power_moment(const MeanEstimate& integrand, int k,
                                 double scale = 1.0);

/// Least-squares slope of log p against log eps over points with
/// 10/trials <= p <= 0.5. Needs at least two such points.
std::optional<double> fit_loglog_slope(std::span<const double> epsilons,
                                       std::span<const double> p_hats,
                                       std::uint64_t trials);

double normal_cdf(double x);

}  // namespace sblab
