#include "smallball/rv_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "smallball/errors.hpp"

namespace sblab {
namespace {

const double kSqrt2 = std::numbers::sqrt2;
const double kBallFactor = std::sqrt(2.0 * std::numbers::pi * std::numbers::e);

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kGaussian: return "gaussian";
    case Family::kCube: return "cube";
    case Family::kIidDensity: return "iid_density";
    case Family::kLaplaceIid: return "laplace_iid";
    case Family::kBallUniform: return "ball_uniform";
    case Family::kPerturbation: return "perturbation";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::kGaussian, Family::kCube, Family::kIidDensity, Family::kLaplaceIid,
                   Family::kBallUniform, Family::kPerturbation}) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("unknown model family: " + std::string(name));
}

QuantileTable::QuantileTable(std::vector<double> u, std::vector<double> x)
    : u_(std::move(u)), x_(std::move(x)) {
  if (u_.size() < 2 || u_.size() != x_.size()) {
    throw ParameterError("quantile table: need >= 2 knots of matching length");
  }
  if (u_.front() != 0.0 || u_.back() != 1.0) {
    throw ParameterError("quantile table: u must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < u_.size(); ++i) {
    if (!(u_[i] > u_[i - 1])) throw ParameterError("quantile table: u must increase strictly");
    if (!(x_[i] >= x_[i - 1])) throw ParameterError("quantile table: x must be non-decreasing");
  }
  for (double v : x_) {
    if (!std::isfinite(v)) throw ParameterError("quantile table: non-finite x");
  }
}

double QuantileTable::operator()(double u) const {
  const auto it = std::upper_bound(u_.begin(), u_.end(), u);
  std::size_t hi = static_cast<std::size_t>(it - u_.begin());
  hi = std::clamp<std::size_t>(hi, 1, u_.size() - 1);
  const std::size_t lo = hi - 1;
  const double w = (u - u_[lo]) / (u_[hi] - u_[lo]);
  return x_[lo] + w * (x_[hi] - x_[lo]);
}

double QuantileTable::max_density() const {
  double best = 0.0;
  for (std::size_t i = 1; i < u_.size(); ++i) {
    const double dx = x_[i] - x_[i - 1];
    if (dx == 0.0) return kInf;
    best = std::max(best, (u_[i] - u_[i - 1]) / dx);
  }
  return best;
}

RandomVectorModel::RandomVectorModel(Family family, int dim) : family_(family), dim_(dim) {
  if (dim < 1) throw ParameterError("model dimension must be >= 1");
}

RandomVectorModel RandomVectorModel::gaussian(int dim) {
  RandomVectorModel m(Family::kGaussian, dim);
  m.density_bound_ = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return m;
}

RandomVectorModel RandomVectorModel::cube(int dim) {
  RandomVectorModel m(Family::kCube, dim);
  m.density_bound_ = kSqrt2;
  return m;
}

RandomVectorModel RandomVectorModel::laplace_iid(int dim) {
  RandomVectorModel m(Family::kLaplaceIid, dim);
  // Scale b = 1/sqrt(2): peak density 1/(2b) = 1/sqrt(2).
  m.density_bound_ = kSqrt2 * (1.0 / kSqrt2);
  return m;
}

RandomVectorModel RandomVectorModel::ball_uniform(int dim) {
  return RandomVectorModel(Family::kBallUniform, dim);
}

RandomVectorModel RandomVectorModel::iid_density(int dim, QuantileTable table) {
  RandomVectorModel m(Family::kIidDensity, dim);
  const double peak = table.max_density();
  if (std::isfinite(peak)) m.density_bound_ = kSqrt2 * peak;
  m.table_ = std::move(table);
  return m;
}

RandomVectorModel RandomVectorModel::perturbation(RandomVectorModel base,
                                                  RandomVectorModel inner, double delta) {
  if (base.dim() != inner.dim()) throw InputError("perturbation: dimension mismatch");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ParameterError("perturbation: delta must be positive");
  }
  RandomVectorModel m(Family::kPerturbation, base.dim());
  if (inner.density_bound_) m.density_bound_ = *inner.density_bound_ / delta;
  m.base_ = std::make_shared<const RandomVectorModel>(std::move(base));
  m.inner_ = std::make_shared<const RandomVectorModel>(std::move(inner));
  m.delta_ = delta;
  return m;
}

RandomVectorModel RandomVectorModel::with_density_bound(std::optional<double> bound) const {
  RandomVectorModel m = *this;
  m.density_bound_ = bound;
  return m;
}

std::optional<double> RandomVectorModel::sba_constant() const {
  if (!density_bound_) return std::nullopt;
  return kBallFactor * *density_bound_;
}

bool RandomVectorModel::log_concave_isotropic() const {
  return family_ == Family::kGaussian || family_ == Family::kBallUniform ||
         family_ == Family::kLaplaceIid;
}

void RandomVectorModel::sample(TrialRng& rng, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(dim_)) {
    throw InputError("sample: output length differs from model dimension");
  }
  switch (family_) {
    case Family::kGaussian:
      for (double& v : out) v = rng.normal();
      return;
    case Family::kCube:
      for (double& v : out) v = rng.uniform() - 0.5;
      return;
    case Family::kLaplaceIid: {
      const double b = 1.0 / kSqrt2;
      for (double& v : out) {
        const double u = rng.uniform_open() - 0.5;
        v = -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
      }
      return;
    }
    case Family::kBallUniform: {
      double norm_sq = 0.0;
      for (double& v : out) {
        v = rng.normal();
        norm_sq += v * v;
      }
      const double radius = std::sqrt(static_cast<double>(dim_) + 2.0) *
                            std::pow(rng.uniform(), 1.0 / static_cast<double>(dim_));
      const double scale = radius / std::sqrt(norm_sq);
      for (double& v : out) v *= scale;
      return;
    }
    case Family::kIidDensity:
      for (double& v : out) v = (*table_)(rng.uniform());
      return;
    case Family::kPerturbation: {
      base_->sample(rng, out);
      std::vector<double> x(out.size());
      inner_->sample(rng, x);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += delta_ * x[i];
      return;
    }
  }
}

Eigen::VectorXd RandomVectorModel::sample(TrialRng& rng) const {
  Eigen::VectorXd v(dim_);
  sample(rng, std::span<double>(v.data(), static_cast<std::size_t>(v.size())));
  return v;
}

double ball_volume(int k, double r) {
  const double dk = static_cast<double>(k);
  return std::exp(0.5 * dk * std::log(std::numbers::pi) + dk * std::log(r) -
                  std::lgamma(0.5 * dk + 1.0));
}

std::vector<SbaCheckRow> sba_check_sweep(const RandomVectorModel& model,
                                         const SubspaceSample& f,
                                         std::span<const double> z,
                                         std::span<const double> epsilons,
                                         const MonteCarlo& mc) {
  const int n = model.dim();
  if (f.ambient_dim() != n) throw InputError("sba_check: subspace ambient dimension mismatch");
  if (z.size() != static_cast<std::size_t>(n)) throw InputError("sba_check: z has wrong length");
  if (mc.trials < 1) throw ParameterError("sba_check: trials must be >= 1");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw ParameterError("sba_check: epsilon must be > 0");
  }
  const int k = static_cast<int>(f.k());
  const Eigen::Map<const Eigen::VectorXd> zv(z.data(), n);
  const Eigen::VectorXd z_in = f.frame.transpose() * zv;
  // ||P_F X - z||^2 = ||F^T X - F^T z||^2 + ||z - P_F z||^2
  const double z_out_sq = std::max(0.0, zv.squaredNorm() - z_in.squaredNorm());
  std::vector<double> radii_sq;
  for (double e : epsilons) radii_sq.push_back(e * e * k);

  using Counts = std::vector<std::uint64_t>;
  Counts counts = chunked_reduce(
      mc.trials, mc.threads, Counts(epsilons.size(), 0),
      [&](std::uint64_t begin, std::uint64_t end) {
        Counts local(epsilons.size(), 0);
        Eigen::VectorXd x(n);
        for (std::uint64_t trial = begin; trial < end; ++trial) {
          TrialRng rng(mc.seed, Stream::kSbaCheck, trial);
          model.sample(rng, std::span<double>(x.data(), static_cast<std::size_t>(n)));
          const double d2 = (f.frame.transpose() * x - z_in).squaredNorm() + z_out_sq;
          for (std::size_t i = 0; i < radii_sq.size(); ++i) {
            if (d2 <= radii_sq[i]) ++local[i];
          }
        }
        return local;
      },
      [](Counts& lhs, const Counts& rhs) {
        for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] += rhs[i];
      });

  std::vector<SbaCheckRow> rows;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    SbaCheckRow row;
    row.epsilon = epsilons[i];
    row.estimate = make_probability(counts[i], mc.trials, mc.seed);
    if (auto l = model.sba_constant()) row.ceiling = std::pow(*l * epsilons[i], k);
    if (auto d = model.density_bound()) {
      row.density_ceiling =
          std::pow(*d, k) * ball_volume(k, epsilons[i] * std::sqrt(static_cast<double>(k)));
    }
    rows.push_back(row);
  }
  return rows;
}

SbaCheckRow sba_check(const RandomVectorModel& model, const SubspaceSample& f,
                      std::span<const double> z, double epsilon, const MonteCarlo& mc) {
  const double eps[] = {epsilon};
  return sba_check_sweep(model, f, z, eps, mc).front();
}

}  // namespace sblab
