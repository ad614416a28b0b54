#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace sblab {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Complex DFT of a fixed length. Plans are created once, never mutated, and
/// may be executed concurrently from any thread.
class FftPlan {
 public:
  /// Shared plan for length n (cached process-wide).
  static std::shared_ptr<const FftPlan> get(std::size_t n);

  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const { return n_; }

  /// out_k = sum_j in_j exp(-2 pi i jk/n). Unnormalised; in and out may alias.
  void forward(const Complex* in, Complex* out) const;
  /// out_j = sum_k in_k exp(+2 pi i jk/n). Unnormalised; in and out may alias.
  void backward(const Complex* in, Complex* out) const;

 private:
  std::size_t n_;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

/// Unnormalised forward DFT of a real vector.
ComplexVector dft(std::span<const double> x);

/// Real part of the inverse DFT, divided by n.
std::vector<double> inverse_dft_real(std::span<const Complex> x);

/// Unnormalised fast Walsh-Hadamard transform (Sylvester ordering). Length must
/// be a power of two.
std::vector<double> fwht(std::span<const double> x);

bool is_power_of_two(std::size_t n);

}  // namespace sblab
