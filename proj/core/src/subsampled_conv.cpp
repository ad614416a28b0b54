#include "smallball/subsampled_conv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smallball/errors.hpp"
#include "smallball/operator.hpp"

namespace sblab {
namespace {

void require_same_length(std::size_t a, std::size_t b, const char* who) {
  if (a != b) throw InputError(std::string(who) + ": length mismatch");
  if (a == 0) throw InputError(std::string(who) + ": empty input");
}

double l2_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

std::vector<double> circular_convolve(std::span<const double> a, std::span<const double> xi) {
  require_same_length(a.size(), xi.size(), "circular_convolve");
  const std::size_t n = a.size();
  ComplexVector a_hat = dft(a);
  const ComplexVector xi_hat = dft(xi);
  // Cross-correlation: the transform of sum_j a_j xi_{j-i} is a_hat * conj(xi_hat).
  for (std::size_t k = 0; k < n; ++k) a_hat[k] *= std::conj(xi_hat[k]);
  return inverse_dft_real(a_hat);
}

std::vector<double> circular_convolve_direct(std::span<const double> a,
                                             std::span<const double> xi) {
  require_same_length(a.size(), xi.size(), "circular_convolve_direct");
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a[j] * xi[(j + n - i) % n];
    out[i] = acc;
  }
  return out;
}

std::vector<double> circulant_matvec(std::span<const double> a, std::span<const double> x) {
  require_same_length(a.size(), x.size(), "circulant_matvec");
  const std::size_t n = a.size();
  const double root_n = std::sqrt(static_cast<double>(n));
  // R x: r_l = x_{-l mod n}, so that Gamma_a x = a * R x (ordinary circular convolution).
  ComplexVector r(n);
  for (std::size_t l = 0; l < n; ++l) r[l] = x[(n - l) % n];
  const auto plan = FftPlan::get(n);
  ComplexVector d(a.begin(), a.end());
  plan->forward(d.data(), d.data());
  plan->forward(r.data(), r.data());
  // U = F / sqrt(n); D = diag(U a); result = sqrt(n) U^* D U R x.
  for (std::size_t k = 0; k < n; ++k) r[k] = (d[k] / root_n) * (r[k] / root_n);
  plan->backward(r.data(), r.data());
  std::vector<double> out(n);
  // The leading sqrt(n) cancels the 1/sqrt(n) of U^* = backward / sqrt(n).
  for (std::size_t i = 0; i < n; ++i) out[i] = r[i].real();
  return out;
}

CirculantOperator::CirculantOperator(std::vector<double> a)
    : a_(std::move(a)), a_hat_(dft(a_)), plan_(FftPlan::get(a_.empty() ? 1 : a_.size())) {
  if (a_.empty()) throw InputError("CirculantOperator: empty signal");
}

std::vector<double> CirculantOperator::apply(std::span<const double> x) const {
  std::vector<double> out(a_.size());
  ComplexVector scratch;
  apply(x, out, scratch);
  return out;
}

void CirculantOperator::apply(std::span<const double> x, std::span<double> out,
                              ComplexVector& scratch) const {
  const std::size_t n = a_.size();
  if (x.size() != n || out.size() != n) throw InputError("CirculantOperator: length mismatch");
  scratch.assign(x.begin(), x.end());
  plan_->forward(scratch.data(), scratch.data());
  for (std::size_t k = 0; k < n; ++k) scratch[k] = a_hat_[k] * std::conj(scratch[k]);
  plan_->backward(scratch.data(), scratch.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = scratch[i].real() * scale;
}

double complex_lq_norm(std::span<const Complex> v, double q) {
  if (!(q >= 1.0)) throw ParameterError("complex_lq_norm: q must be >= 1");
  double top = 0.0;
  for (const Complex& z : v) top = std::max(top, std::abs(z));
  if (std::isinf(q) || top == 0.0) return top;
  double acc = 0.0;
  for (const Complex& z : v) acc += std::pow(std::abs(z) / top, q);
  return top * std::pow(acc, 1.0 / q);
}

FourierProfile fourier_profile(std::span<const double> a, std::span<const double> qs,
                               TransformMode mode) {
  if (a.empty()) throw InputError("fourier_profile: empty signal");
  const double norm = l2_norm(a);
  if (norm == 0.0) throw DomainError("fourier_profile: zero vector");
  if (std::abs(norm - 1.0) > 1e-10) throw ParameterError("fourier_profile: need ||a||_2 = 1");
  const std::size_t n = a.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  FourierProfile out;
  out.mode = mode;
  if (mode == TransformMode::kDft) {
    out.a_hat = dft(a);
  } else {
    const std::vector<double> h = fwht(a);
    out.a_hat.assign(h.begin(), h.end());
  }
  for (Complex& z : out.a_hat) z *= scale;

  for (double q : qs) {
    if (!(q > 2.0)) throw ParameterError("fourier_profile: every q must be > 2");
    const double norm_q = complex_lq_norm(out.a_hat, q);
    out.q_norms[q] = norm_q;
    const double power = std::isinf(q) ? 2.0 : 2.0 * q / (q - 2.0);
    out.srank[q] = std::pow(1.0 / norm_q, power);
  }
  return out;
}

Subsample subsample(std::span<const double> v, double delta, TrialRng& rng) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw ParameterError("subsample: delta must lie in [0, 1]");
  Subsample out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (rng.bernoulli(delta)) {
      out.indices.push_back(i);
      out.values.push_back(v[i]);
    }
  }
  return out;
}

ConvolutionEnsemble::ConvolutionEnsemble(std::vector<double> a, double delta,
                                         RandomVectorModel xi_model)
    : op_(std::move(a)), delta_(delta), xi_model_(std::move(xi_model)) {
  if (!(delta_ > 0.0 && delta_ <= 1.0)) {
    throw ParameterError("ConvolutionEnsemble: delta must lie in (0, 1]");
  }
  const auto sig = op_.signal();
  if (std::abs(l2_norm(sig) - 1.0) > 1e-10) {
    throw ParameterError("ConvolutionEnsemble: signal must have unit norm");
  }
  sparsity_ = static_cast<std::size_t>(
      std::count_if(sig.begin(), sig.end(), [](double x) { return x != 0.0; }));
  if (static_cast<std::size_t>(xi_model_.dim()) != sig.size()) {
    throw InputError("ConvolutionEnsemble: model dimension must equal n");
  }
}

std::vector<double> ConvolutionEnsemble::random_sparse(std::size_t n, std::size_t s,
                                                       std::uint64_t seed) {
  if (s < 1 || s > n) throw ParameterError("random_sparse: need 1 <= s <= n");
  TrialRng rng(seed, Stream::kSignal, 0);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first s slots are a uniform s-subset.
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<double> a(n, 0.0);
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    double v = 0.0;
    while (v == 0.0) v = rng.normal();
    a[idx[i]] = v;
    norm_sq += v * v;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : a) x *= inv;
  return a;
}

namespace {

struct SeparationTally {
  std::vector<std::uint64_t> e1;
  std::vector<std::uint64_t> e2;
  std::vector<double> large_count;
  double subset_size = 0.0;

  explicit SeparationTally(std::size_t k) : e1(k, 0), e2(k, 0), large_count(k, 0.0) {}

  void merge(const SeparationTally& o) {
    for (std::size_t i = 0; i < e1.size(); ++i) {
      e1[i] += o.e1[i];
      e2[i] += o.e2[i];
      large_count[i] += o.large_count[i];
    }
    subset_size += o.subset_size;
  }
};

}  // namespace

std::vector<SeparationReport> separation_sweep(const ConvolutionEnsemble& ens,
                                               std::span<const double> epsilons,
                                               const SeparationOptions& options,
                                               const MonteCarlo& mc) {
  if (epsilons.empty()) throw ParameterError("separation_sweep: no epsilons");
  for (double e : epsilons) {
    if (!(e > 0.0 && e < 1.0)) throw ParameterError("separation_experiment: epsilon must lie in (0, 1)");
  }
  if (!(options.kappa1 > 0.0 && options.kappa2 > 0.0)) {
    throw ParameterError("separation_experiment: kappa1, kappa2 must be > 0");
  }
  if (mc.trials < 1) throw ParameterError("trials must be >= 1");
  const std::size_t n = ens.n();
  const double dn = static_cast<double>(n);
  const double delta = ens.delta();
  const std::size_t ne = epsilons.size();

  SeparationTally total = chunked_reduce(
      mc.trials, mc.threads, SeparationTally(ne),
      [&](std::uint64_t begin, std::uint64_t end) {
        SeparationTally local(ne);
        std::vector<double> xi(n);
        std::vector<double> conv(n);
        ComplexVector scratch;
        for (std::uint64_t trial = begin; trial < end; ++trial) {
          TrialRng rng(mc.seed, Stream::kConvolution, trial);
          ens.xi_model().sample(rng, xi);
          ens.circulant().apply(xi, conv, scratch);
          const Subsample sub = subsample(conv, delta, rng);
          local.subset_size += static_cast<double>(sub.indices.size());
          double energy = 0.0;
          for (double v : sub.values) energy += v * v;
          for (std::size_t e = 0; e < ne; ++e) {
            const double eps = epsilons[e];
            std::size_t large = 0;
            for (double v : sub.values) {
              if (std::abs(v) >= eps) ++large;
            }
            local.large_count[e] += static_cast<double>(large);
            if (energy >= options.kappa1 * eps * eps * delta * dn) ++local.e1[e];
            if (static_cast<double>(large) >= options.kappa2 * delta * dn) ++local.e2[e];
          }
        }
        return local;
      },
      [](SeparationTally& lhs, const SeparationTally& rhs) { lhs.merge(rhs); });

  const double q = options.q;
  const FourierProfile profile = fourier_profile(ens.signal(), std::span<const double>(&q, 1));
  const double trials = static_cast<double>(mc.trials);

  std::vector<SeparationReport> out;
  out.reserve(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    SeparationReport r;
    r.n = n;
    r.s = ens.sparsity();
    r.delta = delta;
    r.epsilon = epsilons[e];
    r.q = q;
    r.p_e1 = make_probability(total.e1[e], mc.trials, mc.seed);
    r.p_e2 = make_probability(total.e2[e], mc.trials, mc.seed);
    r.mean_large_count = total.large_count[e] / trials;
    r.mean_subset_size = total.subset_size / trials;
    r.exponent_new = profile.srank.at(q);
    r.exponent_old = std::min(dn / static_cast<double>(r.s), delta * dn);
    out.push_back(r);
  }
  return out;
}

SeparationReport separation_experiment(const ConvolutionEnsemble& ens, double epsilon,
                                       const SeparationOptions& options, const MonteCarlo& mc) {
  return separation_sweep(ens, std::span<const double>(&epsilon, 1), options, mc).front();
}

}  // namespace sblab
