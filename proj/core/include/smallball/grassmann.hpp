#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "smallball/operator.hpp"
#include "smallball/parallel.hpp"
#include "smallball/rng.hpp"
#include "smallball/stats.hpp"

namespace sblab {

/// A point of the Grassmannian G_{m,k}, stored as an m x k orthonormal frame.
/// The projection onto the subspace is frame * frame^T.
struct SubspaceSample {
  Eigen::MatrixXd frame;

  Eigen::Index ambient_dim() const { return frame.rows(); }
  Eigen::Index k() const { return frame.cols(); }
  Eigen::MatrixXd projector() const { return frame * frame.transpose(); }
};

/// Haar-distributed k-frame: QR of an m x k standard Gaussian matrix with the
/// diagonal of R forced positive. Gaussian entries are drawn column by column.
SubspaceSample sample_subspace(Eigen::Index m, Eigen::Index k, TrialRng& rng);

/// span(e_1, ..., e_k) in R^m.
SubspaceSample coordinate_subspace(Eigen::Index m, Eigen::Index k);

/// a_k(T) estimate plus diagnostics for the Grassmannian integrand.
struct AkEstimate {
  MomentEstimate estimate;
  bool exact = false;
  /// Samples whose projected operator was numerically singular; their
  /// singular values were clamped at the rank tolerance.
  std::uint64_t singular_samples = 0;
  /// max integrand / mean integrand; large values flag heavy tails.
  double max_term_ratio = 0.0;
};

/// a_k(T) = ( E_F det^{-1/2}[(P_F T)(P_F T)^*] )^{-1/k} over Haar F in G_{m,k}.
/// For k = m the exact value det^{1/(2m)}(T T^*) is returned with a
/// degenerate interval. Requires rank(T) = m (T onto R^m), 1 <= k <= m and
/// trials >= 100 when k < m.
AkEstimate a_k_estimate(const Operator& t, int k, const MonteCarlo& mc);

/// E ||G_m||^{-k} for the standard Gaussian in R^m; requires 0 <= k < m.
double chi_negative_moment(int m, int k);

/// (E ||G_m||^{-k})^{-1/k}.
double chi_oracle(int m, int k);

enum class GaussianMomentMethod {
  /// Conditions on the radius: E||TG||^{-k} = E R^{-k} * E||T theta||^{-k}
  /// with R ~ chi(n) in closed form and theta = G/||G|| uniform on the
  /// sphere. Same law as kRaw with bounded integrand when T is injective.
  kRadial,
  /// Plain average of ||TG||^{-k}.
  kRaw,
};

/// (E ||T G||^{-k})^{-1/k} over standard Gaussian G in R^n, with a
/// delta-method interval. Requires 1 <= k <= m - 1.
MomentEstimate gaussian_negative_moment(
    const Operator& t, int k, const MonteCarlo& mc,
    GaussianMomentMethod method = GaussianMomentMethod::kRadial);

}  // namespace sblab
