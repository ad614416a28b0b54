#include "smallball/coord_smallball.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "smallball/errors.hpp"
#include "smallball/grassmann.hpp"

namespace sblab {
namespace {

constexpr double kUnitNormTolerance = 1e-8;
constexpr Eigen::Index kFallbackMaxColumns = 24;

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& a, std::span<const Eigen::Index> idx) {
  Eigen::MatrixXd out(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = a.col(idx[j]);
  return out;
}

// Eigenvalues (ascending) of the Gram submatrix on `idx`.
Eigen::VectorXd gram_eigenvalues(const Eigen::MatrixXd& gram,
                                 std::span<const Eigen::Index> idx) {
  const auto t = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(t, t);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < t; ++j) sub(i, j) = gram(idx[i], idx[j]);
  if (t == 1) return Eigen::VectorXd::Constant(1, sub(0, 0));
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sub, Eigen::EigenvaluesOnly)
      .eigenvalues();
}

double gram_min_eigenvalue(const Eigen::MatrixXd& gram, std::span<const Eigen::Index> idx) {
  if (idx.empty()) return 0.0;
  return gram_eigenvalues(gram, idx)(0);
}

struct GreedyState {
  std::vector<Eigen::Index> chosen;
  std::vector<char> used;
  bool incomplete = false;
};

// One pure-greedy step: add the column maximising the new lambda_min.
bool max_smin_step(const Eigen::MatrixXd& gram, double tol_sq, GreedyState& st) {
  const auto m = gram.rows();
  Eigen::Index best = -1;
  double best_value = -1.0;
  std::vector<Eigen::Index> trial = st.chosen;
  trial.push_back(0);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (st.used[static_cast<std::size_t>(i)]) continue;
    trial.back() = i;
    const double v = gram_min_eigenvalue(gram, trial);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best < 0 || !(best_value > tol_sq)) {
    st.incomplete = true;
    return false;
  }
  st.chosen.push_back(best);
  st.used[static_cast<std::size_t>(best)] = 1;
  return true;
}

std::vector<Eigen::Index> barrier_greedy(const Eigen::MatrixXd& gram, std::size_t target,
                                         double barrier, double tol_sq, bool& incomplete) {
  const auto m = gram.rows();
  GreedyState st;
  st.used.assign(static_cast<std::size_t>(m), 0);
  std::vector<Eigen::Index> trial;
  while (st.chosen.size() < target) {
    Eigen::Index best = -1;
    double best_potential = kInf;
    trial = st.chosen;
    trial.push_back(0);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (st.used[static_cast<std::size_t>(i)]) continue;
      trial.back() = i;
      const Eigen::VectorXd ev = gram_eigenvalues(gram, trial);
      if (!(ev(0) > barrier)) continue;
      double potential = 0.0;
      for (Eigen::Index j = 0; j < ev.size(); ++j) potential += 1.0 / (ev(j) - barrier);
      if (potential < best_potential) {
        best_potential = potential;
        best = i;
      }
    }
    if (best >= 0) {
      st.chosen.push_back(best);
      st.used[static_cast<std::size_t>(best)] = 1;
    } else if (!max_smin_step(gram, tol_sq, st)) {
      break;
    }
  }
  incomplete = st.incomplete;
  return st.chosen;
}

// Single-column exchanges until lambda_min stops improving.
void swap_search(const Eigen::MatrixXd& gram, GreedyState& st) {
  const auto m = gram.rows();
  if (st.chosen.empty()) return;
  double current = gram_min_eigenvalue(gram, st.chosen);
  for (int pass = 0; pass < 64; ++pass) {
    bool improved = false;
    for (std::size_t p = 0; p < st.chosen.size(); ++p) {
      for (Eigen::Index j = 0; j < m; ++j) {
        if (st.used[static_cast<std::size_t>(j)]) continue;
        std::vector<Eigen::Index> cand = st.chosen;
        cand[p] = j;
        const double v = gram_min_eigenvalue(gram, cand);
        if (v > current * (1.0 + 1e-12)) {
          st.used[static_cast<std::size_t>(st.chosen[p])] = 0;
          st.used[static_cast<std::size_t>(j)] = 1;
          st.chosen = std::move(cand);
          current = v;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
}

// Pure greedy from a forced first column, then swap search.
GreedyState greedy_with_swaps(const Eigen::MatrixXd& gram, std::size_t target, double tol_sq,
                              Eigen::Index first) {
  GreedyState st;
  st.used.assign(static_cast<std::size_t>(gram.rows()), 0);
  if (gram(first, first) > tol_sq) {
    st.chosen.push_back(first);
    st.used[static_cast<std::size_t>(first)] = 1;
  }
  while (st.chosen.size() < target && max_smin_step(gram, tol_sq, st)) {
  }
  swap_search(gram, st);
  return st;
}

}  // namespace

OrthonormalBasis::OrthonormalBasis(Eigen::MatrixXd vectors) : vectors_(std::move(vectors)) {
  if (vectors_.rows() < 1 || vectors_.rows() != vectors_.cols()) {
    throw InputError("OrthonormalBasis: need a square matrix");
  }
  if (!vectors_.allFinite()) throw InputError("OrthonormalBasis: non-finite entry");
  const Eigen::MatrixXd gram = vectors_.transpose() * vectors_;
  const double err =
      (gram - Eigen::MatrixXd::Identity(vectors_.rows(), vectors_.rows())).cwiseAbs().maxCoeff();
  if (err > 1e-10) throw InputError("OrthonormalBasis: columns are not orthonormal");
}

OrthonormalBasis OrthonormalBasis::standard(Eigen::Index m) {
  return OrthonormalBasis(Eigen::MatrixXd::Identity(m, m));
}

OrthonormalBasis OrthonormalBasis::haar(Eigen::Index m, std::uint64_t seed) {
  TrialRng rng(seed, Stream::kBasis, 0);
  return OrthonormalBasis(sample_subspace(m, m, rng).frame);
}

std::uint64_t CoordCountReport::fail_threshold() const {
  return static_cast<std::uint64_t>(std::floor((1.0 - s) * static_cast<double>(m) + 1e-9));
}

double CoordCountReport::mean_count() const {
  double total = 0.0;
  double weight = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    total += static_cast<double>(j) * static_cast<double>(counts[j]);
    weight += static_cast<double>(counts[j]);
  }
  return weight > 0.0 ? total / weight : 0.0;
}

double invertibility_constant(double q) {
  if (!(q > 2.0)) throw ParameterError("q must be > 2");
  if (std::isinf(q)) return 1.0;
  return std::sqrt(q / (q - 2.0));
}

double csb_bound_eval(double q, double m, double k_q, double s, double theta, double L) {
  if (!(q > 2.0)) throw ParameterError("csb_bound_eval: q must be > 2");
  if (!(s > 0.0 && s < 1.0)) throw ParameterError("csb_bound_eval: s must lie in (0, 1)");
  if (!(m > 0.0 && k_q > 0.0 && theta > 0.0 && L > 0.0)) {
    throw ParameterError("csb_bound_eval: arguments must be positive");
  }
  const double power = std::isinf(q) ? 1.0 : q / (q - 2.0);
  const double c_q = invertibility_constant(q);
  const double exponent = 0.5 * std::pow(s / 2.0, power) * k_q;
  return 2.0 * std::pow(2.0 / s, power) * (m / k_q) * std::pow(c_q * L * theta / s, exponent);
}

CoordCountReport coord_count(const RandomVectorModel& model, const Operator& t,
                             const OrthonormalBasis& basis, double theta, double s,
                             const MonteCarlo& mc, const CoordCountOptions& options) {
  if (!(theta > 0.0)) throw ParameterError("coord_count: theta must be > 0");
  if (!(s > 0.0 && s < 1.0)) throw ParameterError("coord_count: s must lie in (0, 1)");
  if (model.dim() != t.cols()) throw InputError("coord_count: model/operator dimension mismatch");
  if (basis.dim() != t.rows()) throw InputError("coord_count: basis/operator dimension mismatch");
  if (mc.trials < 1) throw ParameterError("trials must be >= 1");
  const Eigen::Index m = t.rows();
  // Coordinates in the basis: U^T T x.
  const Eigen::MatrixXd rotated = basis.vectors().transpose() * t.entries();

  using Counts = std::vector<std::uint64_t>;
  Counts counts = chunked_reduce(
      mc.trials, mc.threads, Counts(static_cast<std::size_t>(m) + 1, 0),
      [&](std::uint64_t begin, std::uint64_t end) {
        Counts local(static_cast<std::size_t>(m) + 1, 0);
        Eigen::VectorXd x(model.dim());
        Eigen::VectorXd c(m);
        for (std::uint64_t trial = begin; trial < end; ++trial) {
          TrialRng rng(mc.seed, Stream::kCoordCount, trial);
          model.sample(rng, std::span<double>(x.data(), static_cast<std::size_t>(x.size())));
          c.noalias() = rotated * x;
          std::size_t large = 0;
          for (Eigen::Index i = 0; i < m; ++i) {
            if (std::abs(c(i)) >= theta) ++large;
          }
          ++local[large];
        }
        return local;
      },
      [](Counts& lhs, const Counts& rhs) {
        for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] += rhs[i];
      });

  CoordCountReport r;
  r.theta = theta;
  r.s = s;
  r.m = m;
  r.counts = std::move(counts);
  r.q = options.q;
  const std::uint64_t threshold = r.fail_threshold();
  std::uint64_t fails = 0;
  for (std::size_t j = 0; j < r.counts.size() && j <= threshold; ++j) fails += r.counts[j];
  r.p_fail = make_probability(fails, mc.trials, mc.seed);
  if (!t.is_zero()) r.k_q = stable_rank(t, options.q);
  const std::optional<double> L =
      options.sba_constant ? options.sba_constant : model.sba_constant();
  if (L && r.k_q > 0.0) {
    r.bound_rhs = csb_bound_eval(options.q, static_cast<double>(m), r.k_q, s, theta, *L);
  }
  return r;
}

double column_subset_smin(const Eigen::MatrixXd& a, std::span<const Eigen::Index> sigma) {
  if (sigma.empty()) return 0.0;
  const Eigen::MatrixXd sub = gather_columns(a, sigma);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(sub).singularValues();
  if (sub.cols() > sub.rows()) return 0.0;
  return sv.minCoeff();
}

Selection restricted_invertibility_select(const Eigen::MatrixXd& a, std::size_t target_size,
                                          double q) {
  const auto m = a.cols();
  if (target_size < 1 || target_size > static_cast<std::size_t>(m)) {
    throw ParameterError("restricted_invertibility_select: need 1 <= target_size <= m");
  }
  const SingularSpectrum spec = singular_values(a);
  if (spec.rank == 0) throw DomainError("restricted_invertibility_select: zero matrix");
  const double fro = schatten_norm(spec.values, 2.0);
  const double beta = std::min(1.0 - 1.0 / std::sqrt(2.0), 1.0 / invertibility_constant(q));
  const double level = beta * fro / std::sqrt(static_cast<double>(m));
  const double tol_sq = spec.tolerance * spec.tolerance;
  const Eigen::MatrixXd gram = a.transpose() * a;

  bool incomplete = false;
  std::vector<Eigen::Index> chosen =
      barrier_greedy(gram, target_size, level * level, tol_sq, incomplete);
  double cert = column_subset_smin(a, chosen);

  if (m <= kFallbackMaxColumns) {
    // Small inputs: polish the barrier pick and try every greedy start.
    const auto consider = [&](GreedyState st) {
      const double c = column_subset_smin(a, st.chosen);
      if (st.chosen.size() > chosen.size() || (st.chosen.size() == chosen.size() && c > cert)) {
        chosen = std::move(st.chosen);
        cert = c;
        incomplete = st.incomplete;
      }
    };
    GreedyState polished;
    polished.chosen = chosen;
    polished.used.assign(static_cast<std::size_t>(m), 0);
    for (Eigen::Index i : chosen) polished.used[static_cast<std::size_t>(i)] = 1;
    polished.incomplete = incomplete;
    swap_search(gram, polished);
    consider(std::move(polished));
    for (Eigen::Index first = 0; first < m; ++first) {
      consider(greedy_with_swaps(gram, target_size, tol_sq, first));
    }
  }
  std::sort(chosen.begin(), chosen.end());
  Selection out;
  out.sigma = std::move(chosen);
  out.certificate = column_subset_smin(a, out.sigma);
  out.incomplete = incomplete || out.sigma.size() < target_size;
  return out;
}

Selection restricted_invertibility_select(const Operator& a, std::size_t target_size,
                                          double q) {
  return restricted_invertibility_select(a.entries(), target_size, q);
}

std::size_t BlockDecomposition::covered() const {
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  return total;
}

BlockDecomposition block_decompose(const Operator& t, const OrthonormalBasis& basis,
                                   double lambda, double q) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ParameterError("block_decompose: lambda in (0, 1)");
  if (!(q > 2.0)) throw ParameterError("block_decompose: q must be > 2");
  if (basis.dim() != t.rows()) throw InputError("block_decompose: basis dimension mismatch");
  const Eigen::Index m = t.rows();
  // Column i is T^* u_i.
  const Eigen::MatrixXd cols = t.entries().transpose() * basis.vectors();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double norm = cols.col(i).norm();
    if (std::abs(norm - 1.0) > kUnitNormTolerance) {
      throw PreconditionError("block_decompose: ||T^* u_" + std::to_string(i) +
                                  "|| = " + std::to_string(norm) +
                                  " != 1; use general_precondition_path",
                              norm);
    }
  }
  const double c_q = invertibility_constant(q);
  const double power = std::isinf(q) ? 1.0 : q / (q - 2.0);
  const double gate = 1.0 / c_q;  // certificate <= c_q  <=>  s_min >= 1/c_q

  BlockDecomposition out;
  out.lambda = lambda;
  out.q = q;
  out.k_q = stable_rank(t, q);

  std::vector<Eigen::Index> residual(static_cast<std::size_t>(m));
  std::iota(residual.begin(), residual.end(), Eigen::Index{0});
  const double needed = (1.0 - lambda) * static_cast<double>(m);

  while (static_cast<double>(out.covered()) < needed && !residual.empty()) {
    const Eigen::MatrixXd a_r = gather_columns(cols, residual);
    const double k_hat = stable_rank(singular_values(a_r).values, q);
    std::size_t target = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(k_hat / 2.0)));
    target = std::min(target, residual.size());
    const Selection sel = restricted_invertibility_select(a_r, target, q);
    if (sel.sigma.empty()) throw DomainError("block_decompose: residual has no invertible column");

    std::vector<Eigen::Index> block;
    for (Eigen::Index local : sel.sigma) block.push_back(residual[static_cast<std::size_t>(local)]);

    std::vector<char> in_block(static_cast<std::size_t>(m), 0);
    for (Eigen::Index i : block) in_block[static_cast<std::size_t>(i)] = 1;
    if (sel.certificate >= gate) {
      const Eigen::MatrixXd gram = cols.transpose() * cols;
      for (;;) {
        Eigen::Index best = -1;
        double best_value = -1.0;
        std::vector<Eigen::Index> trial = block;
        trial.push_back(0);
        for (Eigen::Index i : residual) {
          if (in_block[static_cast<std::size_t>(i)]) continue;
          trial.back() = i;
          const double v = gram_min_eigenvalue(gram, trial);
          if (v > best_value) {
            best_value = v;
            best = i;
          }
        }
        if (best < 0 || !(std::sqrt(std::max(best_value, 0.0)) >= gate)) break;
        trial.back() = best;
        if (column_subset_smin(cols, trial) < gate) break;
        block.push_back(best);
        in_block[static_cast<std::size_t>(best)] = 1;
      }
    }
    std::sort(block.begin(), block.end());

    DecompositionStep step;
    step.k_q_hat = k_hat;
    step.target = target;
    step.floor = static_cast<std::size_t>(std::floor(std::pow(lambda, power) * k_hat / 2.0));
    step.size = block.size();
    out.steps.push_back(step);
    out.certificates.push_back(1.0 / column_subset_smin(cols, block));
    out.blocks.push_back(block);

    std::vector<Eigen::Index> next;
    for (Eigen::Index i : residual) {
      if (!in_block[static_cast<std::size_t>(i)]) next.push_back(i);
    }
    residual = std::move(next);
  }
  return out;
}

GeneralPrecondition general_precondition_path(const Operator& t, const OrthonormalBasis& basis,
                                              double delta1, double delta2) {
  if (!(delta1 > 0.0)) throw ParameterError("general_precondition_path: delta1 must be > 0");
  if (!(delta2 >= 1.0)) throw ParameterError("general_precondition_path: delta2 must be >= 1");
  if (basis.dim() != t.rows()) throw InputError("general_precondition_path: basis dimension mismatch");
  if (t.is_zero()) throw DomainError("general_precondition_path: zero operator");
  const Eigen::Index m = t.rows();
  const double dm = static_cast<double>(m);
  const Eigen::MatrixXd cols = t.entries().transpose() * basis.vectors();
  const double hs = t.frobenius_norm();

  GeneralPrecondition out;
  const double p = 2.0 + delta1;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) acc += std::pow(cols.col(i).norm(), p);
  out.moment = std::pow(acc / dm, 1.0 / p);
  out.limit = delta2 * hs / std::sqrt(dm);
  if (out.moment > out.limit * (1.0 + 1e-12)) {
    throw PreconditionError("general_precondition_path: moment " + std::to_string(out.moment) +
                                " exceeds delta2 ||T||_S2 / sqrt(m) = " +
                                std::to_string(out.limit),
                            out.moment);
  }
  const double threshold = hs / (2.0 * std::sqrt(dm));
  for (Eigen::Index i = 0; i < m; ++i) {
    if (cols.col(i).norm() >= threshold) out.sigma0.push_back(i);
  }
  out.c0_hat = static_cast<double>(out.sigma0.size()) / dm;
  return out;
}

double topk_norm(std::span<const double> x, std::size_t k) {
  if (k < 1 || k > x.size()) throw ParameterError("topk_norm: need 1 <= k <= dim(x)");
  std::vector<double> sq(x.size());
  std::transform(x.begin(), x.end(), sq.begin(), [](double v) { return v * v; });
  std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k - 1), sq.end(),
                   std::greater<>());
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += sq[i];
  return std::sqrt(acc);
}

}  // namespace sblab
