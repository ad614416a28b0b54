#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "smallball/fft.hpp"
#include "smallball/parallel.hpp"
#include "smallball/rng.hpp"
#include "smallball/rv_models.hpp"
#include "smallball/stats.hpp"

namespace sblab {

/// (a (*) xi)_i = sum_j a_j xi_{(j - i) mod n}, computed by FFT.
std::vector<double> circular_convolve(std::span<const double> a, std::span<const double> xi);

/// Same quantity by the O(n^2) sum; the reference definition.
std::vector<double> circular_convolve_direct(std::span<const double> a,
                                             std::span<const double> xi);

/// Gamma_a x through the unitary diagonalisation Gamma_a = sqrt(n) U D O R,
/// where R reverses indices and U is the unitary DFT.
std::vector<double> circulant_matvec(std::span<const double> a, std::span<const double> x);

/// Precomputed circulant Gamma_a for repeated products.
class CirculantOperator {
 public:
  explicit CirculantOperator(std::vector<double> a);

  std::size_t size() const { return a_.size(); }
  std::span<const double> signal() const { return a_; }

  /// Gamma_a x, i.e. a (*) x.
  std::vector<double> apply(std::span<const double> x) const;
  void apply(std::span<const double> x, std::span<double> out, ComplexVector& scratch) const;

 private:
  std::vector<double> a_;
  ComplexVector a_hat_;  // unnormalised DFT of a
  std::shared_ptr<const FftPlan> plan_;
};

enum class TransformMode { kDft, kWalshHadamard };

struct FourierProfile {
  TransformMode mode = TransformMode::kDft;
  /// a_hat = F a / sqrt(n).
  ComplexVector a_hat;
  std::map<double, double> q_norms;
  /// (1 / ||a_hat||_q)^{2q/(q-2)}; q = infinity gives 1/||a_hat||_inf^2.
  std::map<double, double> srank;
};

/// Requires ||a||_2 = 1 within 1e-10. The Walsh-Hadamard mode needs n a power
/// of two and is only a norm profile; it does not diagonalise circulants.
FourierProfile fourier_profile(std::span<const double> a, std::span<const double> qs,
                               TransformMode mode = TransformMode::kDft);

/// ||v||_q of complex moduli (q = infinity allowed).
double complex_lq_norm(std::span<const Complex> v, double q);

struct Subsample {
  std::vector<std::size_t> indices;
  std::vector<double> values;
};

/// Keeps each index independently with probability delta.
Subsample subsample(std::span<const double> v, double delta, TrialRng& rng);

class ConvolutionEnsemble {
 public:
  /// a is normalised by the caller; validated here (unit norm, support size s).
  ConvolutionEnsemble(std::vector<double> a, double delta, RandomVectorModel xi_model);

  /// s-sparse unit vector: uniform support, iid Gaussian entries, normalised.
  static std::vector<double> random_sparse(std::size_t n, std::size_t s, std::uint64_t seed);

  std::size_t n() const { return op_.size(); }
  std::size_t sparsity() const { return sparsity_; }
  double delta() const { return delta_; }
  std::span<const double> signal() const { return op_.signal(); }
  const RandomVectorModel& xi_model() const { return xi_model_; }
  const CirculantOperator& circulant() const { return op_; }

 private:
  CirculantOperator op_;
  std::size_t sparsity_ = 0;
  double delta_ = 1.0;
  RandomVectorModel xi_model_;
};

struct SeparationOptions {
  double q = 4.0;
  double kappa1 = 0.5;
  double kappa2 = 0.5;
};

struct SeparationReport {
  std::size_t n = 0;
  std::size_t s = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  double q = 4.0;
  /// E1: sum_{i in I} (a (*) xi)_i^2 >= kappa1 eps^2 delta n.
  ProbabilityEstimate p_e1;
  /// E2: |{i in I : |(a (*) xi)_i| >= eps}| >= kappa2 delta n.
  ProbabilityEstimate p_e2;
  double mean_large_count = 0.0;
  double mean_subset_size = 0.0;
  /// 1 / ||a_hat||_q^{2q/(q-2)}.
  double exponent_new = 0.0;
  /// min(n/s, delta n).
  double exponent_old = 0.0;
};

/// One report per epsilon, all computed from the same (xi, I) samples.
std::vector<SeparationReport> separation_sweep(const ConvolutionEnsemble& ens,
                                               std::span<const double> epsilons,
                                               const SeparationOptions& options,
                                               const MonteCarlo& mc);

SeparationReport separation_experiment(const ConvolutionEnsemble& ens, double epsilon,
                                       const SeparationOptions& options, const MonteCarlo& mc);

}  // namespace sblab
