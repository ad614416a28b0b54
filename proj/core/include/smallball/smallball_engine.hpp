#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "smallball/grassmann.hpp"
#include "smallball/operator.hpp"
#include "smallball/parallel.hpp"
#include "smallball/rv_models.hpp"
#include "smallball/stats.hpp"

namespace sblab {

// Every estimator here draws X for trial t from TrialRng(seed, kModelSamples, t),
// so runs with the same seed share one sample set. Sweeps over thresholds
// or caps are therefore exactly monotone, and the Markov inequality between
// small-ball probabilities and capped negative moments holds on the
// empirical measure.

enum class ThresholdScale {
  kHsNorm,  // eps * ||T||_{S2}
  kAk,      // eps * sqrt(m) * a_k(T)
};

std::string_view threshold_scale_name(ThresholdScale s);

struct SmallBallReport {
  std::vector<double> epsilons;
  std::vector<ProbabilityEstimate> p_hats;
  ThresholdScale threshold_scale = ThresholdScale::kHsNorm;
  /// Radius multiplying eps (||T||_{S2} or sqrt(m) a_k(T)).
  double scale = 0.0;
  std::optional<double> fitted_slope;
  /// The a_k(T) estimate behind kAk thresholds.
  std::optional<AkEstimate> a_k;
};

/// Empirical P(||TX|| <= r_i) for absolute radii r_i on a shared sample set.
std::vector<ProbabilityEstimate> norm_below(const RandomVectorModel& model, const Operator& t,
                                            std::span<const double> radii,
                                            const MonteCarlo& mc);

/// P(||TX|| <= eps ||T||_{S2}).
ProbabilityEstimate smallball_prob(const RandomVectorModel& model, const Operator& t,
                                   double epsilon, const MonteCarlo& mc);

/// smallball_prob over a strictly increasing eps grid, shared samples.
SmallBallReport smallball_sweep(const RandomVectorModel& model, const Operator& t,
                                std::span<const double> epsilons, const MonteCarlo& mc);

struct NegativeMomentReport {
  int k = 1;
  double cap = 0.0;
  /// E min(||TX||^{-k}, cap) at cap / 10, cap and 10 cap.
  MeanEstimate at_cap_low;
  MeanEstimate at_cap;
  MeanEstimate at_cap_high;

  /// max relative deviation of the low and high cap estimates from at_cap.
  double cap_sensitivity() const;
};

NegativeMomentReport negative_moment(const RandomVectorModel& model, const Operator& t, int k,
                                     double cap, const MonteCarlo& mc);

/// Sweep of P(||TX|| <= eps sqrt(m) a_k(T)). For k < m, a_k(T) is estimated
/// with `ak_trials` Grassmannian samples from the same seed.
SmallBallReport corollary_bound_sweep(const RandomVectorModel& model, const Operator& t,
                                      int k, std::span<const double> epsilons,
                                      const MonteCarlo& mc,
                                      std::uint64_t ak_trials = 100000);

struct TwoSidedReport {
  int k = 1;
  /// (E||TX||^{-k})^{-1/k} and the same for the standard Gaussian.
  MomentEstimate model_side;
  MomentEstimate gaussian_side;
  double ratio = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double band = 3.0;
  bool in_band = false;
};

/// Ratio of negative-moment radii of TX and TG for isotropic log-concave X
/// (gaussian, ball_uniform, laplace_iid). Both sides are plain Monte-Carlo
/// averages of min(||T.||^{-k}, cap) over the shared trial indices.
TwoSidedReport logconcave_twosided_check(const RandomVectorModel& model, const Operator& t,
                                         int k, const MonteCarlo& mc, double band = 3.0,
                                         double cap = 1e12);

}  // namespace sblab
