#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "smallball/parallel.hpp"
#include "smallball/rv_models.hpp"
#include "smallball/stats.hpp"

namespace sblab {

/// Level sets of |a| relative to its largest entry a_1:
///   I_j = {i : 2^{-(j+1)} < |a_i| / a_1 <= 2^{-j}},  j >= 0.
/// Zero coordinates belong to no block.
struct DyadicDecomposition {
  double p = 1.0;
  double a1 = 0.0;
  /// Support indices sorted by |a_i| non-increasing, ties by index.
  std::vector<std::size_t> order;
  /// Non-empty blocks keyed by j; indices inside a block follow `order`.
  std::map<int, std::vector<std::size_t>> blocks;
  /// sum_{i in I_j} |a_i|^p.
  std::map<int, double> block_power_sums;
  /// Lambda_l = {j : |I_j| = l}, only non-empty sets stored.
  std::map<std::size_t, std::vector<int>> lambda_sets;
  /// ||a||_p^p over the support.
  double norm_p_power = 0.0;

  /// j(l) = min Lambda_l, or 0 when Lambda_l is empty.
  int j_of_ell(std::size_t ell) const;
  /// phi(k) = (sum_{l >= k, Lambda_l non-empty} sum_{i in I_{j(l)}} |a_i|^p)^{1/p}.
  double phi(std::size_t k) const;
  /// phi(1)^p / ||a||_p^p: share of the p-mass kept by one representative block per size.
  double compression_factor() const;
  /// Checks (1/2^p)|I_j|(a_1/2^j)^p < S_j <= |I_j|(a_1/2^j)^p for every block,
  /// allowing `rel_slack` of floating-point summation error on the upper side.
  bool sandwich_holds(double rel_slack = 1e-12) const;
};

/// Pre: a != 0 (DomainError), p >= 1 (ParameterError).
DyadicDecomposition dyadic_decompose(std::span<const double> a, double p);

/// Block index j with 2^{-(j+1)} < |x| / a1 <= 2^{-j}, decided by exact
/// comparison against ldexp(a1, -j). Requires 0 < |x| <= a1.
int dyadic_level(double x, double a1);

struct LpReport {
  double p = 1.0;
  std::vector<double> epsilons;
  /// P(||(a_i x_i)_i||_p <= eps ||a||_p) per epsilon, on shared samples.
  std::vector<ProbabilityEstimate> estimates;
  double c1 = 1.0;
  /// (c1 ||a||_p / ||a||_inf)^p.
  double k_hat = 0.0;
  std::optional<double> slope;
};

/// Each epsilon must lie in (0, 1); the list must be strictly increasing.
LpReport lp_smallball_experiment(const RandomVectorModel& model, std::span<const double> a,
                                 double p, std::span<const double> epsilons, const MonteCarlo& mc,
                                 double c1 = 1.0);

/// ||v||_p (p = infinity allowed).
double lp_norm(std::span<const double> v, double p);

}  // namespace sblab
