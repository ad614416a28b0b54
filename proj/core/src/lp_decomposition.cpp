#include "smallball/lp_decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smallball/errors.hpp"
#include "smallball/operator.hpp"

namespace sblab {

double lp_norm(std::span<const double> v, double p) {
  if (!(p >= 1.0)) throw ParameterError("lp_norm: p must be >= 1");
  double top = 0.0;
  for (double x : v) top = std::max(top, std::abs(x));
  if (std::isinf(p) || top == 0.0) return top;
  double acc = 0.0;
  for (double x : v) acc += std::pow(std::abs(x) / top, p);
  return top * std::pow(acc, 1.0 / p);
}

int dyadic_level(double x, double a1) {
  const double ax = std::abs(x);
  if (!(ax > 0.0 && ax <= a1)) throw DomainError("dyadic_level: need 0 < |x| <= a1");
  int exp_a1 = 0;
  int exp_x = 0;
  std::frexp(a1, &exp_a1);
  std::frexp(ax, &exp_x);
  int j = std::max(0, exp_a1 - exp_x - 1);
  while (j > 0 && ax > std::ldexp(a1, -j)) --j;
  while (!(ax > std::ldexp(a1, -(j + 1)))) ++j;
  return j;
}

int DyadicDecomposition::j_of_ell(std::size_t ell) const {
  auto it = lambda_sets.find(ell);
  if (it == lambda_sets.end()) return 0;
  return *std::min_element(it->second.begin(), it->second.end());
}

double DyadicDecomposition::phi(std::size_t k) const {
  double acc = 0.0;
  for (auto it = lambda_sets.lower_bound(std::max<std::size_t>(k, 1)); it != lambda_sets.end();
       ++it) {
    acc += block_power_sums.at(j_of_ell(it->first));
  }
  return std::pow(acc, 1.0 / p);
}

double DyadicDecomposition::compression_factor() const {
  return std::pow(phi(1), p) / norm_p_power;
}

bool DyadicDecomposition::sandwich_holds(double rel_slack) const {
  for (const auto& [j, idx] : blocks) {
    const double level = std::pow(std::ldexp(a1, -j), p);
    const double count = static_cast<double>(idx.size());
    const double sum = block_power_sums.at(j);
    if (!(sum <= count * level * (1.0 + rel_slack))) return false;
    if (!(sum > count * level / std::pow(2.0, p))) return false;
  }
  return true;
}

DyadicDecomposition dyadic_decompose(std::span<const double> a, double p) {
  if (!(p >= 1.0) || std::isinf(p)) throw ParameterError("dyadic_decompose: p must be finite and >= 1");
  DyadicDecomposition d;
  d.p = p;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) throw InputError("dyadic_decompose: non-finite entry");
    if (a[i] != 0.0) d.order.push_back(i);
  }
  if (d.order.empty()) throw DomainError("dyadic_decompose: zero vector");
  std::stable_sort(d.order.begin(), d.order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(a[x]) > std::abs(a[y]);
  });
  d.a1 = std::abs(a[d.order.front()]);
  for (std::size_t i : d.order) {
    const int j = dyadic_level(a[i], d.a1);
    d.blocks[j].push_back(i);
    const double term = std::pow(std::abs(a[i]), p);
    d.block_power_sums[j] += term;
    d.norm_p_power += term;
  }
  for (const auto& [j, idx] : d.blocks) d.lambda_sets[idx.size()].push_back(j);
  return d;
}

LpReport lp_smallball_experiment(const RandomVectorModel& model, std::span<const double> a,
                                 double p, std::span<const double> epsilons, const MonteCarlo& mc,
                                 double c1) {
  if (!(p >= 1.0)) throw ParameterError("lp_smallball_experiment: p must be >= 1");
  if (static_cast<std::size_t>(model.dim()) != a.size()) {
    throw InputError("lp_smallball_experiment: model dimension must equal length of a");
  }
  if (epsilons.empty()) throw ParameterError("lp_smallball_experiment: no epsilons");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0 && epsilons[i] < 1.0)) {
      throw ParameterError("lp_smallball_experiment: epsilon must lie in (0, 1)");
    }
    if (i > 0 && !(epsilons[i] > epsilons[i - 1])) {
      throw ParameterError("lp_smallball_experiment: epsilons must be strictly increasing");
    }
  }
  if (!(c1 > 0.0)) throw ParameterError("lp_smallball_experiment: c1 must be > 0");
  if (mc.trials < 1) throw ParameterError("trials must be >= 1");
  const double norm_a = lp_norm(a, p);
  if (norm_a == 0.0) throw DomainError("lp_smallball_experiment: zero vector");
  const double norm_inf = lp_norm(a, kInf);

  const std::size_t ne = epsilons.size();
  std::vector<double> radii(ne);
  for (std::size_t e = 0; e < ne; ++e) radii[e] = epsilons[e] * norm_a;

  using Counts = std::vector<std::uint64_t>;
  Counts hits = chunked_reduce(
      mc.trials, mc.threads, Counts(ne, 0),
      [&](std::uint64_t begin, std::uint64_t end) {
        Counts local(ne, 0);
        std::vector<double> x(a.size());
        std::vector<double> y(a.size());
        for (std::uint64_t trial = begin; trial < end; ++trial) {
          TrialRng rng(mc.seed, Stream::kLp, trial);
          model.sample(rng, x);
          for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] * x[i];
          const double stat = lp_norm(y, p);
          // Radii increase, so the first hit implies all later ones.
          auto first = std::lower_bound(radii.begin(), radii.end(), stat);
          for (auto e = static_cast<std::size_t>(first - radii.begin()); e < ne; ++e) ++local[e];
        }
        return local;
      },
      [](Counts& lhs, const Counts& rhs) {
        for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] += rhs[i];
      });

  LpReport r;
  r.p = p;
  r.c1 = c1;
  r.epsilons.assign(epsilons.begin(), epsilons.end());
  for (std::size_t e = 0; e < ne; ++e) {
    r.estimates.push_back(make_probability(hits[e], mc.trials, mc.seed));
  }
  r.k_hat = std::pow(c1 * norm_a / norm_inf, p);
  std::vector<double> p_hats(ne);
  for (std::size_t e = 0; e < ne; ++e) p_hats[e] = r.estimates[e].p_hat;
  r.slope = fit_loglog_slope(r.epsilons, p_hats, mc.trials);
  return r;
}

}  // namespace sblab
