#include "smallball/stats.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <vector>

#include "smallball/errors.hpp"

namespace sblab {

std::pair<double, double> clopper_pearson(std::uint64_t successes,
                                          std::uint64_t trials, double level) {
  if (trials == 0) throw ParameterError("clopper_pearson: zero trials");
  if (successes > trials) throw ParameterError("clopper_pearson: successes > trials");
  const double alpha = 1.0 - level;
  const double x = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  double lo = 0.0;
  double hi = 1.0;
  if (successes > 0) lo = boost::math::ibeta_inv(x, n - x + 1.0, alpha / 2.0);
  if (successes < trials) hi = boost::math::ibeta_inv(x + 1.0, n - x, 1.0 - alpha / 2.0);
  return {lo, hi};
}

ProbabilityEstimate make_probability(std::uint64_t successes,
                                     std::uint64_t trials, std::uint64_t seed) {
  ProbabilityEstimate p;
  p.successes = successes;
  p.trials = trials;
  p.seed = seed;
  p.p_hat = static_cast<double>(successes) / static_cast<double>(trials);
  std::tie(p.ci_low, p.ci_high) = clopper_pearson(successes, trials);
  return p;
}

MeanEstimate make_mean(const SumAccumulator& acc, std::uint64_t seed) {
  MeanEstimate m;
  m.trials = acc.count;
  m.seed = seed;
  m.max_term = acc.max;
  if (acc.count == 0) return m;
  const double n = static_cast<double>(acc.count);
  m.mean = acc.sum / n;
  if (acc.count > 1) {
    const double var = std::max(0.0, (acc.sum_sq - n * m.mean * m.mean) / (n - 1.0));
    m.std_error = std::sqrt(var / n);
  }
  m.ci_low = m.mean - kZ95 * m.std_error;
  m.ci_high = m.mean + kZ95 * m.std_error;
  return m;
}

MomentEstimate make_power_moment(const MeanEstimate& integrand, int k,
                                 double scale) {
  if (!(integrand.mean > 0.0)) throw DomainError("moment estimate: non-positive mean");
  MomentEstimate e;
  e.integrand = integrand;
  e.k = k;
  e.trials = integrand.trials;
  e.seed = integrand.seed;
  const double inv_k = 1.0 / static_cast<double>(k);
  e.value = scale * std::pow(integrand.mean, -inv_k);
  // d log(value) = -(1/k) d log(mean)
  e.log_se = inv_k * integrand.std_error / integrand.mean;
  e.ci_low = e.value * std::exp(-kZ95 * e.log_se);
  e.ci_high = e.value * std::exp(kZ95 * e.log_se);
  return e;
}

std::optional<double> fit_loglog_slope(std::span<const double> epsilons,
                                       std::span<const double> p_hats,
                                       std::uint64_t trials) {
  if (epsilons.size() != p_hats.size()) throw InputError("fit_loglog_slope: length mismatch");
  const double floor = 10.0 / static_cast<double>(trials);
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    const double p = p_hats[i];
    if (p >= floor && p <= 0.5 && p > 0.0 && epsilons[i] > 0.0) {
      xs.push_back(std::log(epsilons[i]));
      ys.push_back(std::log(p));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace sblab
