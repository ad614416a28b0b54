#include "smallball/grassmann.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "smallball/errors.hpp"

namespace sblab {

SubspaceSample sample_subspace(Eigen::Index m, Eigen::Index k, TrialRng& rng) {
  if (k < 1 || k > m) {
    throw ParameterError("sample_subspace: need 1 <= k <= m, got k=" + std::to_string(k) +
                         " m=" + std::to_string(m));
  }
  Eigen::MatrixXd g(m, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < m; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, k);
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return SubspaceSample{std::move(q)};
}

SubspaceSample coordinate_subspace(Eigen::Index m, Eigen::Index k) {
  if (k < 1 || k > m) throw ParameterError("coordinate_subspace: need 1 <= k <= m");
  return SubspaceSample{Eigen::MatrixXd::Identity(m, k)};
}

double chi_negative_moment(int m, int k) {
  if (k < 0 || k >= m) throw ParameterError("chi_negative_moment: need 0 <= k < m");
  return std::exp(-0.5 * k * std::log(2.0) + std::lgamma(0.5 * (m - k)) -
                  std::lgamma(0.5 * m));
}

double chi_oracle(int m, int k) {
  return std::pow(chi_negative_moment(m, k), -1.0 / static_cast<double>(k));
}

AkEstimate a_k_estimate(const Operator& t, int k, const MonteCarlo& mc) {
  const auto m = t.rows();
  if (k < 1 || k > m) {
    throw ParameterError("a_k_estimate: need 1 <= k <= m, got k=" + std::to_string(k));
  }
  if (static_cast<Eigen::Index>(t.spectrum().rank) != m) {
    throw DomainError("a_k_estimate: T must have rank m = " + std::to_string(m));
  }
  AkEstimate out;
  if (k == m) {
    double log_det = 0.0;
    for (double s : t.spectrum().nonzero()) log_det += std::log(s);
    const double value = std::exp(log_det / static_cast<double>(m));
    out.exact = true;
    out.estimate.value = out.estimate.ci_low = out.estimate.ci_high = value;
    out.estimate.k = k;
    out.estimate.trials = mc.trials;
    out.estimate.seed = mc.seed;
    out.estimate.integrand.mean = std::pow(value, -static_cast<double>(k));
    out.estimate.integrand.trials = mc.trials;
    out.estimate.integrand.seed = mc.seed;
    return out;
  }
  if (mc.trials < 100) throw ParameterError("a_k_estimate: trials must be >= 100");

  const double tol = t.spectrum().tolerance;
  struct Acc {
    SumAccumulator sum;
    std::uint64_t singular = 0;
  };
  const Eigen::MatrixXd& a = t.entries();
  Acc acc = chunked_reduce(
      mc.trials, mc.threads, Acc{},
      [&](std::uint64_t begin, std::uint64_t end) {
        Acc local;
        Eigen::MatrixXd projected(k, a.cols());
        for (std::uint64_t trial = begin; trial < end; ++trial) {
          TrialRng rng(mc.seed, Stream::kSubspace, trial);
          const SubspaceSample f = sample_subspace(m, k, rng);
          // P_F T seen as a map onto F has the singular values of frame^T T.
          projected.noalias() = f.frame.transpose() * a;
          const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(projected).singularValues();
          double log_det_half = 0.0;
          bool singular = false;
          for (Eigen::Index i = 0; i < sv.size(); ++i) {
            double s = sv(i);
            if (s <= tol) {
              s = tol;
              singular = true;
            }
            log_det_half += std::log(s);
          }
          if (singular) ++local.singular;
          local.sum.add(std::exp(-log_det_half));
        }
        return local;
      },
      [](Acc& lhs, const Acc& rhs) {
        lhs.sum.merge(rhs.sum);
        lhs.singular += rhs.singular;
      });

  const MeanEstimate integrand = make_mean(acc.sum, mc.seed);
  out.estimate = make_power_moment(integrand, k);
  out.singular_samples = acc.singular;
  out.max_term_ratio = integrand.mean > 0.0 ? integrand.max_term / integrand.mean : 0.0;
  return out;
}

MomentEstimate gaussian_negative_moment(const Operator& t, int k,
                                        const MonteCarlo& mc,
                                        GaussianMomentMethod method) {
  const auto m = static_cast<int>(t.rows());
  const auto n = static_cast<int>(t.cols());
  if (k < 1 || k >= m) {
    throw ParameterError("gaussian_negative_moment: need 1 <= k <= m-1, got k=" +
                         std::to_string(k));
  }
  if (mc.trials < 100) throw ParameterError("gaussian_negative_moment: trials must be >= 100");
  const Eigen::MatrixXd& a = t.entries();
  const bool radial = method == GaussianMomentMethod::kRadial;
  const double dk = static_cast<double>(k);

  SumAccumulator acc = chunked_reduce(
      mc.trials, mc.threads, SumAccumulator{},
      [&](std::uint64_t begin, std::uint64_t end) {
        SumAccumulator local;
        Eigen::VectorXd g(n);
        Eigen::VectorXd image(m);
        for (std::uint64_t trial = begin; trial < end; ++trial) {
          TrialRng rng(mc.seed, Stream::kGaussianMoment, trial);
          for (int i = 0; i < n; ++i) g(i) = rng.normal();
          if (radial) g /= g.norm();
          image.noalias() = a * g;
          local.add(std::pow(image.norm(), -dk));
        }
        return local;
      },
      [](SumAccumulator& lhs, const SumAccumulator& rhs) { lhs.merge(rhs); });

  MeanEstimate integrand = make_mean(acc, mc.seed);
  if (radial) {
    const double radial_moment = chi_negative_moment(n, k);
    integrand.mean *= radial_moment;
    integrand.std_error *= radial_moment;
    integrand.ci_low *= radial_moment;
    integrand.ci_high *= radial_moment;
    integrand.max_term *= radial_moment;
  }
  return make_power_moment(integrand, k);
}

}  // namespace sblab
