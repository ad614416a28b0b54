#include "smallball/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "smallball/errors.hpp"

namespace sblab {
namespace {

// FFTW's planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(const Complex* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

}  // namespace

std::shared_ptr<const FftPlan> FftPlan::get(std::size_t n) {
  // Construct the planner mutex first so it outlives the cached plans.
  (void)planner_mutex();
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto plan = std::make_shared<const FftPlan>(n);
  cache.emplace(n, plan);
  return plan;
}

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw ParameterError("FftPlan: length must be >= 1");
  ComplexVector scratch(n);
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                   FFTW_FORWARD, flags);
  backward_plan_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                    FFTW_BACKWARD, flags);
  if (forward_plan_ == nullptr || backward_plan_ == nullptr) {
    throw DomainError("FftPlan: FFTW failed to create a plan");
  }
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (backward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void FftPlan::forward(const Complex* in, Complex* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(in), as_fftw(out));
}

void FftPlan::backward(const Complex* in, Complex* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(in), as_fftw(out));
}

ComplexVector dft(std::span<const double> x) {
  ComplexVector buf(x.begin(), x.end());
  if (buf.empty()) return buf;
  FftPlan::get(buf.size())->forward(buf.data(), buf.data());
  return buf;
}

std::vector<double> inverse_dft_real(std::span<const Complex> x) {
  ComplexVector buf(x.begin(), x.end());
  std::vector<double> out(buf.size());
  if (buf.empty()) return out;
  FftPlan::get(buf.size())->backward(buf.data(), buf.data());
  const double scale = 1.0 / static_cast<double>(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real() * scale;
  return out;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<double> fwht(std::span<const double> x) {
  if (!is_power_of_two(x.size())) throw ParameterError("fwht: length must be a power of two");
  std::vector<double> v(x.begin(), x.end());
  for (std::size_t h = 1; h < v.size(); h *= 2) {
    for (std::size_t i = 0; i < v.size(); i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = v[j];
        const double b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
  return v;
}

}  // namespace sblab
