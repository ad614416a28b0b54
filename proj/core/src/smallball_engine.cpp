#include "smallball/smallball_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smallball/errors.hpp"

namespace sblab {
namespace {

void check_dims(const RandomVectorModel& model, const Operator& t) {
  if (model.dim() != t.cols()) {
    throw InputError("model dimension " + std::to_string(model.dim()) +
                     " differs from operator columns " + std::to_string(t.cols()));
  }
}

void check_increasing(std::span<const double> xs, const char* what) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw ParameterError(std::string(what) + " must be strictly increasing");
    }
  }
}

// Calls visit(trial, ||TX||) for every trial of a chunk.
template <class Visit>
void for_each_norm(const RandomVectorModel& model, const Operator& t, std::uint64_t seed,
                   std::uint64_t begin, std::uint64_t end, Visit&& visit) {
  const Eigen::MatrixXd& a = t.entries();
  Eigen::VectorXd x(model.dim());
  Eigen::VectorXd y(a.rows());
  for (std::uint64_t trial = begin; trial < end; ++trial) {
    TrialRng rng(seed, Stream::kModelSamples, trial);
    model.sample(rng, std::span<double>(x.data(), static_cast<std::size_t>(x.size())));
    y.noalias() = a * x;
    visit(trial, y.norm());
  }
}

std::vector<MeanEstimate> capped_moments(const RandomVectorModel& model, const Operator& t,
                                         int k, std::span<const double> caps,
                                         const MonteCarlo& mc) {
  using Accs = std::vector<SumAccumulator>;
  const double dk = static_cast<double>(k);
  Accs accs = chunked_reduce(
      mc.trials, mc.threads, Accs(caps.size()),
      [&](std::uint64_t begin, std::uint64_t end) {
        Accs local(caps.size());
        for_each_norm(model, t, mc.seed, begin, end, [&](std::uint64_t, double norm) {
          const double v = std::pow(norm, -dk);
          for (std::size_t i = 0; i < caps.size(); ++i) local[i].add(std::min(v, caps[i]));
        });
        return local;
      },
      [](Accs& lhs, const Accs& rhs) {
        for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i].merge(rhs[i]);
      });
  std::vector<MeanEstimate> out;
  for (const auto& a : accs) out.push_back(make_mean(a, mc.seed));
  return out;
}

}  // namespace

std::string_view threshold_scale_name(ThresholdScale s) {
  return s == ThresholdScale::kHsNorm ? "hs_norm" : "ak";
}

std::vector<ProbabilityEstimate> norm_below(const RandomVectorModel& model, const Operator& t,
                                            std::span<const double> radii,
                                            const MonteCarlo& mc) {
  check_dims(model, t);
  if (mc.trials < 1) throw ParameterError("trials must be >= 1");
  using Counts = std::vector<std::uint64_t>;
  Counts counts = chunked_reduce(
      mc.trials, mc.threads, Counts(radii.size(), 0),
      [&](std::uint64_t begin, std::uint64_t end) {
        Counts local(radii.size(), 0);
        for_each_norm(model, t, mc.seed, begin, end, [&](std::uint64_t, double norm) {
          for (std::size_t i = 0; i < radii.size(); ++i) {
            if (norm <= radii[i]) ++local[i];
          }
        });
        return local;
      },
      [](Counts& lhs, const Counts& rhs) {
        for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] += rhs[i];
      });
  std::vector<ProbabilityEstimate> out;
  for (auto c : counts) out.push_back(make_probability(c, mc.trials, mc.seed));
  return out;
}

SmallBallReport smallball_sweep(const RandomVectorModel& model, const Operator& t,
                                std::span<const double> epsilons, const MonteCarlo& mc) {
  if (t.is_zero()) throw DomainError("smallball: zero operator");
  check_increasing(epsilons, "epsilons");
  for (double e : epsilons) {
    if (!(e >= 0.0)) throw ParameterError("smallball: epsilon must be >= 0");
  }
  SmallBallReport report;
  report.threshold_scale = ThresholdScale::kHsNorm;
  report.scale = t.frobenius_norm();
  report.epsilons.assign(epsilons.begin(), epsilons.end());
  std::vector<double> radii;
  for (double e : epsilons) radii.push_back(e * report.scale);
  report.p_hats = norm_below(model, t, radii, mc);
  std::vector<double> ps;
  for (const auto& p : report.p_hats) ps.push_back(p.p_hat);
  report.fitted_slope = fit_loglog_slope(report.epsilons, ps, mc.trials);
  return report;
}

ProbabilityEstimate smallball_prob(const RandomVectorModel& model, const Operator& t,
                                   double epsilon, const MonteCarlo& mc) {
  const double eps[] = {epsilon};
  return smallball_sweep(model, t, eps, mc).p_hats.front();
}

double NegativeMomentReport::cap_sensitivity() const {
  if (at_cap.mean == 0.0) return 0.0;
  return std::max(std::abs(at_cap_low.mean - at_cap.mean),
                  std::abs(at_cap_high.mean - at_cap.mean)) /
         at_cap.mean;
}

NegativeMomentReport negative_moment(const RandomVectorModel& model, const Operator& t, int k,
                                     double cap, const MonteCarlo& mc) {
  check_dims(model, t);
  if (k < 1 || k >= t.rows()) {
    throw ParameterError("negative_moment: need 1 <= k <= m-1, got k=" + std::to_string(k));
  }
  if (!(cap > 0.0)) throw ParameterError("negative_moment: cap must be > 0");
  if (mc.trials < 1) throw ParameterError("trials must be >= 1");
  const double caps[] = {cap / 10.0, cap, cap * 10.0};
  auto moments = capped_moments(model, t, k, caps, mc);
  NegativeMomentReport r;
  r.k = k;
  r.cap = cap;
  r.at_cap_low = moments[0];
  r.at_cap = moments[1];
  r.at_cap_high = moments[2];
  return r;
}

SmallBallReport corollary_bound_sweep(const RandomVectorModel& model, const Operator& t,
                                      int k, std::span<const double> epsilons,
                                      const MonteCarlo& mc, std::uint64_t ak_trials) {
  check_dims(model, t);
  const auto m = t.rows();
  if (k < 1 || k > m) throw ParameterError("corollary_bound_sweep: need 1 <= k <= m");
  check_increasing(epsilons, "epsilons");
  for (double e : epsilons) {
    if (!(e > 0.0 && e <= 1.0)) throw ParameterError("corollary_bound_sweep: eps in (0, 1]");
  }
  MonteCarlo ak_mc = mc;
  ak_mc.trials = ak_trials;
  AkEstimate ak = a_k_estimate(t, k, ak_mc);

  SmallBallReport report;
  report.threshold_scale = ThresholdScale::kAk;
  report.scale = std::sqrt(static_cast<double>(m)) * ak.estimate.value;
  report.a_k = ak;
  report.epsilons.assign(epsilons.begin(), epsilons.end());
  std::vector<double> radii;
  for (double e : epsilons) radii.push_back(e * report.scale);
  report.p_hats = norm_below(model, t, radii, mc);
  std::vector<double> ps;
  for (const auto& p : report.p_hats) ps.push_back(p.p_hat);
  report.fitted_slope = fit_loglog_slope(report.epsilons, ps, mc.trials);
  return report;
}

TwoSidedReport logconcave_twosided_check(const RandomVectorModel& model, const Operator& t,
                                         int k, const MonteCarlo& mc, double band,
                                         double cap) {
  if (!model.log_concave_isotropic()) {
    throw PreconditionError("logconcave_twosided_check: model family " +
                            std::string(family_name(model.family())) +
                            " is not an isotropic log-concave family");
  }
  check_dims(model, t);
  if (k < 1 || k >= t.rows()) {
    throw ParameterError("logconcave_twosided_check: need 1 <= k <= m-1");
  }
  if (!(band >= 1.0)) throw ParameterError("logconcave_twosided_check: band must be >= 1");
  const double caps[] = {cap};
  const MeanEstimate x_side = capped_moments(model, t, k, caps, mc).front();
  const MeanEstimate g_side =
      capped_moments(RandomVectorModel::gaussian(model.dim()), t, k, caps, mc).front();

  TwoSidedReport r;
  r.k = k;
  r.band = band;
  r.model_side = make_power_moment(x_side, k);
  r.gaussian_side = make_power_moment(g_side, k);
  r.ratio = r.model_side.value / r.gaussian_side.value;
  const double log_se = std::hypot(r.model_side.log_se, r.gaussian_side.log_se);
  r.ci_low = r.ratio * std::exp(-kZ95 * log_se);
  r.ci_high = r.ratio * std::exp(kZ95 * log_se);
  r.in_band = r.ratio >= 1.0 / band && r.ratio <= band;
  return r;
}

}  // namespace sblab
