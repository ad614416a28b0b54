#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "smallball/operator.hpp"
#include "smallball/parallel.hpp"
#include "smallball/rng.hpp"
#include "smallball/rv_models.hpp"
#include "smallball/stats.hpp"

namespace sblab {

/// Columns u_1..u_m of an m x m orthogonal matrix.
class OrthonormalBasis {
 public:
  /// Throws InputError unless vectors^T vectors = Id within 1e-10.
  explicit OrthonormalBasis(Eigen::MatrixXd vectors);

  static OrthonormalBasis standard(Eigen::Index m);
  static OrthonormalBasis haar(Eigen::Index m, std::uint64_t seed);

  Eigen::Index dim() const { return vectors_.rows(); }
  const Eigen::MatrixXd& vectors() const { return vectors_; }

 private:
  Eigen::MatrixXd vectors_;
};

struct CoordCountReport {
  double theta = 0.0;
  double s = 0.0;
  Eigen::Index m = 0;
  /// counts[j] = number of trials with N = j, j = 0..m, where
  /// N = |{i : |<TX, u_i>| >= theta}|.
  std::vector<std::uint64_t> counts;
  /// P(N <= (1 - s) m).
  ProbabilityEstimate p_fail;
  double q = 4.0;
  double k_q = 0.0;
  /// Evaluated coordinate small-ball bound; absent when no constant is declared.
  std::optional<double> bound_rhs;

  std::uint64_t fail_threshold() const;
  double mean_count() const;
};

struct CoordCountOptions {
  double q = 4.0;
  /// Ball-form small-ball constant for the bound; defaults to the model's.
  std::optional<double> sba_constant;
};

CoordCountReport coord_count(const RandomVectorModel& model, const Operator& t,
                             const OrthonormalBasis& basis, double theta, double s,
                             const MonteCarlo& mc, const CoordCountOptions& options = {});

/// Right-hand side of the coordinate small-ball estimate
///   2 (2/s)^{q/(q-2)} (m/k_q) (c_q L theta / s)^{(1/2)(s/2)^{q/(q-2)} k_q}
/// with c_q = (q/(q-2))^{1/2}, i.e. up to absolute constants.
double csb_bound_eval(double q, double m, double k_q, double s, double theta, double L);

/// c_q = (q/(q-2))^{1/2}; 1 for q = infinity.
double invertibility_constant(double q);

struct Selection {
  std::vector<Eigen::Index> sigma;  // increasing column indices
  /// s_min of the selected column submatrix, recomputed by SVD.
  double certificate = 0.0;
  bool incomplete = false;
};

/// Picks up to `target_size` columns of `a` whose submatrix has a large
/// smallest singular value.
///
/// The primary pass is a lower-barrier greedy: with b = (beta ||A||_F / sqrt(m))^2,
/// beta = min(1 - 1/sqrt 2, 1/c_q), each step adds the column minimising the
/// barrier potential sum_j 1/(lambda_j - b) over the Gram eigenvalues of the
/// enlarged selection, among columns keeping every eigenvalue above b. If no
/// column keeps the barrier, the step takes the column maximising the new
/// s_min. For m <= 24 a pure greedy (max s_min per step) followed by
/// single-swap improvement also runs and the better certificate wins.
/// Ties go to the lowest index. If no column can be added with positive
/// s_min the selection stops early and is flagged incomplete.
Selection restricted_invertibility_select(const Eigen::MatrixXd& a, std::size_t target_size,
                                          double q);
Selection restricted_invertibility_select(const Operator& a, std::size_t target_size,
                                          double q);

/// Smallest singular value of the columns `sigma` of `a` (0 for an empty set).
double column_subset_smin(const Eigen::MatrixXd& a, std::span<const Eigen::Index> sigma);

struct DecompositionStep {
  double k_q_hat = 0.0;      // stable rank of the residual at this step
  std::size_t target = 0;    // requested selection size
  std::size_t floor = 0;     // floor(lambda^{q/(q-2)} k_q_hat / 2)
  std::size_t size = 0;      // block size after extension
};

struct BlockDecomposition {
  std::vector<std::vector<Eigen::Index>> blocks;
  /// gamma_j = 1 / s_min(T^* P_{sigma_j}^*).
  std::vector<double> certificates;
  std::vector<DecompositionStep> steps;
  double lambda = 0.5;
  double q = 4.0;
  double k_q = 0.0;  // stable rank of T

  std::size_t covered() const;
};

/// Disjoint index blocks built by repeated restricted-invertibility selection
/// on the residual index set, each block extended greedily while its
/// certificate stays <= c_q. Requires ||T^* u_i|| = 1 within 1e-8; otherwise
/// throws PreconditionError pointing to general_precondition_path.
BlockDecomposition block_decompose(const Operator& t, const OrthonormalBasis& basis,
                                   double lambda, double q);

struct GeneralPrecondition {
  std::vector<Eigen::Index> sigma0;
  double c0_hat = 0.0;
  /// ((1/m) sum ||T^* u_i||^{2+delta1})^{1/(2+delta1)}
  double moment = 0.0;
  /// delta2 ||T||_{S2} / sqrt(m)
  double limit = 0.0;
};

/// Checks the moment condition on ||T^* u_i|| and returns
/// sigma0 = {i : ||T^* u_i|| >= ||T||_{S2} / (2 sqrt m)}. Throws
/// PreconditionError (carrying the measured moment) when the condition fails.
GeneralPrecondition general_precondition_path(const Operator& t, const OrthonormalBasis& basis,
                                              double delta1, double delta2);

/// Euclidean norm of the k largest-magnitude coordinates.
double topk_norm(std::span<const double> x, std::size_t k);

}  // namespace sblab
