#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smallball/grassmann.hpp"
#include "smallball/parallel.hpp"
#include "smallball/rng.hpp"
#include "smallball/stats.hpp"

namespace sblab {

enum class Family { kGaussian, kCube, kIidDensity, kLaplaceIid, kBallUniform, kPerturbation };

std::string_view family_name(Family f);
/// Throws ConfigError for unknown names.
Family parse_family(std::string_view name);

/// Piecewise-linear inverse CDF: knots (u_i, x_i) with u_0 = 0, u_N = 1,
/// u strictly increasing and x non-decreasing.
class QuantileTable {
 public:
  QuantileTable(std::vector<double> u, std::vector<double> x);

  double operator()(double u) const;
  /// Largest density on a segment, max (du / dx); infinite for atoms.
  double max_density() const;
  std::span<const double> u() const { return u_; }
  std::span<const double> x() const { return x_; }

 private:
  std::vector<double> u_;
  std::vector<double> x_;
};

/// A law for a random vector X in R^n together with its declared small-ball
/// constants.
///
/// `density_bound` is the constant L with sup f_{P_F X} <= L^k for every
/// k-dimensional marginal. This is the form the Gaussian comparison
/// inequality E||TX||^{-k} <= E||TG/(sqrt(2 pi) L)||^{-k} is stated in.
///
/// `sba_constant` is the ball form, P(||P_F X - z|| <= eps sqrt(k)) <=
/// (L' eps)^k. Since vol(B_k(sqrt k))^{1/k} < sqrt(2 pi e) for all k, the
/// declared value is L' = sqrt(2 pi e) * density_bound.
///
/// Declared density bounds:
///   gaussian      (2 pi)^{-1/2}, exact
///   cube          sqrt(2): sections of [-1/2,1/2]^n of codimension k have
///                 volume at most 2^{k/2} (Ball)
///   iid families  sqrt(2) * max one-dimensional density
///   perturbation  W + delta X inherits L_X / delta
///   ball_uniform  undeclared (report-only)
class RandomVectorModel {
 public:
  static RandomVectorModel gaussian(int dim);
  /// Coordinates uniform on [-1/2, 1/2].
  static RandomVectorModel cube(int dim);
  /// Isotropic Laplace coordinates (scale 1/sqrt 2).
  static RandomVectorModel laplace_iid(int dim);
  /// Uniform on the ball of radius sqrt(dim + 2), which is isotropic.
  static RandomVectorModel ball_uniform(int dim);
  static RandomVectorModel iid_density(int dim, QuantileTable table);
  /// W + delta * X with W and X independent.
  static RandomVectorModel perturbation(RandomVectorModel base, RandomVectorModel inner,
                                        double delta);

  Family family() const { return family_; }
  int dim() const { return dim_; }
  std::optional<double> density_bound() const { return density_bound_; }
  std::optional<double> sba_constant() const;
  bool log_concave_isotropic() const;

  const RandomVectorModel* base() const { return base_.get(); }
  const RandomVectorModel* inner() const { return inner_.get(); }
  double delta() const { return delta_; }
  const std::optional<QuantileTable>& table() const { return table_; }

  /// Draws one sample into `out` (length dim()). A perturbation draws W
  /// first and then X from the same generator.
  void sample(TrialRng& rng, std::span<double> out) const;
  Eigen::VectorXd sample(TrialRng& rng) const;

  /// Replaces the declared density bound (e.g. from configuration).
  RandomVectorModel with_density_bound(std::optional<double> bound) const;

 private:
  RandomVectorModel(Family family, int dim);

  Family family_;
  int dim_;
  std::optional<double> density_bound_;
  std::optional<QuantileTable> table_;
  std::shared_ptr<const RandomVectorModel> base_;
  std::shared_ptr<const RandomVectorModel> inner_;
  double delta_ = 0.0;
};

/// Volume of the Euclidean ball of radius r in R^k.
double ball_volume(int k, double r);

struct SbaCheckRow {
  double epsilon = 0.0;
  ProbabilityEstimate estimate;
  /// (sba_constant * eps)^k when the model declares a constant.
  std::optional<double> ceiling;
  /// density_bound^k * vol(B_k(eps sqrt k)), the sharper volumetric ceiling.
  std::optional<double> density_ceiling;
};

/// Empirical P(||P_F X - z|| <= eps sqrt(k)) for every eps, all evaluated on
/// one shared sample set so the estimates are non-decreasing in eps.
std::vector<SbaCheckRow> sba_check_sweep(const RandomVectorModel& model,
                                         const SubspaceSample& f,
                                         std::span<const double> z,
                                         std::span<const double> epsilons,
                                         const MonteCarlo& mc);

SbaCheckRow sba_check(const RandomVectorModel& model, const SubspaceSample& f,
                      std::span<const double> z, double epsilon, const MonteCarlo& mc);

}  // namespace sblab
