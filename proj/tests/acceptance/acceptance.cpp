// Acceptance checks: one PASS/FAIL line per criterion, detail lines indented.
#include <boost/math/distributions/binomial.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "smallball/coord_smallball.hpp"
#include "smallball/grassmann.hpp"
#include "smallball/lp_decomposition.hpp"
#include "smallball/operator.hpp"
#include "smallball/smallball_engine.hpp"
#include "smallball/subsampled_conv.hpp"

using namespace sblab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

MonteCarlo mc_with(std::uint64_t trials, std::uint64_t seed) {
  MonteCarlo mc;
  mc.trials = trials;
  mc.seed = seed;
  mc.threads = 0;
  return mc;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  void check(bool ok, const std::string& detail) {
    ok_ = ok_ && ok;
    details_.push_back((ok ? "  ok   " : "  FAIL ") + detail);
  }
  void note(const std::string& detail) { details_.push_back("  info " + detail); }

  bool finish() const {
    std::cout << (ok_ ? "PASS" : "FAIL") << " criterion " << id_ << ": " << title_ << '\n';
    for (const auto& d : details_) std::cout << d << '\n';
    std::cout.flush();
    return ok_;
  }

 private:
  int id_;
  std::string title_;
  bool ok_ = true;
  std::vector<std::string> details_;
};

bool gaussian_identity() {
  Criterion c(1, "Gaussian negative moment equals a_k(T) times the chi oracle");
  struct Case {
    std::string name;
    Operator t;
    int k;
    std::optional<double> a_k_truth;
  };
  const std::vector<double> d21{2.0, 1.0};
  const std::vector<double> d311{3.0, 1.0, 1.0};
  const std::vector<Case> cases{
      {"diag(2,1)", Operator::diagonal(d21), 1, 1.45679103104691},
      {"diag(3,1,1)", Operator::diagonal(d311), 1, 1.60455632344895},
      {"diag(3,1,1)", Operator::diagonal(d311), 2, 1.51583045774432},
      {"gaussian 4x4 seed 1", Operator::gaussian(4, 4, 1), 1, std::nullopt},
      {"gaussian 4x4 seed 1", Operator::gaussian(4, 4, 1), 2, std::nullopt},
  };
  for (const Case& cs : cases) {
    const auto t0 = Clock::now();
    const auto m = static_cast<int>(cs.t.rows());
    const MomentEstimate g = gaussian_negative_moment(cs.t, cs.k, mc_with(1'000'000, 11));
    const AkEstimate a = a_k_estimate(cs.t, cs.k, mc_with(1'000'000, 12));
    const double chi = chi_oracle(m, cs.k);
    const double predicted = a.estimate.value * chi;
    const double sigma = std::hypot(g.value * g.log_se, predicted * a.estimate.log_se);
    const double elapsed = seconds_since(t0);
    c.check(std::abs(g.value - predicted) <= 3.0 * sigma && elapsed < 60.0,
            fmt("%s k=%d: MC %.6f vs a_k*chi %.6f, |diff| %.2e <= 3 sigma %.2e, %.1f s",
                cs.name.c_str(), cs.k, g.value, predicted, std::abs(g.value - predicted),
                3.0 * sigma, elapsed));
    if (cs.a_k_truth) {
      c.check(a.estimate.ci_low <= *cs.a_k_truth && *cs.a_k_truth <= a.estimate.ci_high,
              fmt("%s k=%d: a_k CI [%.6f, %.6f] holds quadrature value %.6f", cs.name.c_str(),
                  cs.k, a.estimate.ci_low, a.estimate.ci_high, *cs.a_k_truth));
    }
  }
  return c.finish();
}

bool comparison() {
  Criterion c(2, "cube negative moments below the scaled Gaussian moments");
  const auto cube = RandomVectorModel::cube(4);
  const double L = *cube.density_bound();
  const std::vector<double> d2111{2.0, 1.0, 1.0, 1.0};
  const std::vector<std::pair<std::string, Operator>> ops{
      {"Id4", Operator::identity(4)}, {"diag(2,1,1,1)", Operator::diagonal(d2111)}};
  for (const auto& [name, t] : ops) {
    for (int k : {1, 2}) {
      const NegativeMomentReport x = negative_moment(cube, t, k, 1e6, mc_with(1'000'000, 21));
      double g_moment = 0.0;
      double g_rel = 0.0;
      if (name == "Id4") {
        g_moment = chi_negative_moment(4, k);
      } else {
        const MomentEstimate g = gaussian_negative_moment(t, k, mc_with(1'000'000, 22));
        g_moment = std::pow(g.value, -k);
        g_rel = k * g.log_se;
      }
      const double x_rel = x.at_cap.std_error / x.at_cap.mean;
      const double sigma = std::hypot(x_rel, g_rel);
      const double rhs = std::pow(std::sqrt(2.0 * std::numbers::pi) * L, k) * g_moment;
      c.check(x.at_cap.mean <= rhs * (1.0 + 3.0 * sigma),
              fmt("%s k=%d: E||TX||^-k %.5f <= %.5f (L=%.4f, sigma %.1e)", name.c_str(), k,
                  x.at_cap.mean, rhs * (1.0 + 3.0 * sigma), L, sigma));
      c.check(x.cap_sensitivity() < 0.01,
              fmt("%s k=%d: cap sensitivity %.2e < 1%%", name.c_str(), k, x.cap_sensitivity()));
    }
  }
  return c.finish();
}

bool smallball_exponent() {
  Criterion c(3, "small-ball slope tracks m for the Gaussian identity");
  std::vector<double> eps;
  for (int i = 0; i < 8; ++i) eps.push_back(0.02 * std::pow(15.0, i / 7.0));
  for (int m : {3, 4, 5}) {
    const auto t0 = Clock::now();
    const Operator t = Operator::identity(m);
    const SmallBallReport r = corollary_bound_sweep(RandomVectorModel::gaussian(m), t, m, eps,
                                                    mc_with(10'000'000, 30 + m), 1000);
    // a_m(Id_m) = 1 exactly, so the threshold is eps * sqrt(m).
    c.check(std::abs(r.a_k->estimate.value - 1.0) < 1e-12,
            fmt("m=%d: a_m(Id) = %.15f", m, r.a_k->estimate.value));
    // "Every swept eps" is a joint claim over 3 x 8 intervals: Bonferroni-adjusted
    // Clopper-Pearson bands keep the family-wise level at 95%.
    const double level = 1.0 - 0.05 / (3.0 * static_cast<double>(eps.size()));
    int inside = 0;
    int inside_pointwise = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const double truth = oracle::chi_cdf(m, eps[i] * std::sqrt(static_cast<double>(m)));
      const auto [lo, hi] = clopper_pearson(r.p_hats[i].successes, r.p_hats[i].trials, level);
      const bool ok = lo <= truth && truth <= hi;
      inside += ok;
      inside_pointwise += r.p_hats[i].ci_low <= truth && truth <= r.p_hats[i].ci_high;
      if (!ok) {
        c.check(false, fmt("m=%d eps=%.4f: chi CDF %.4e outside [%.4e, %.4e]", m, eps[i], truth,
                           lo, hi));
      }
    }
    c.check(inside == static_cast<int>(eps.size()),
            fmt("m=%d: chi CDF inside the simultaneous 95%% band at %d/%zu epsilons", m, inside,
                eps.size()));
    c.note(fmt("m=%d: inside the pointwise 95%% interval at %d/%zu epsilons", m, inside_pointwise,
               eps.size()));
    const double slope = r.fitted_slope.value_or(NAN);
    c.check(std::abs(slope - m) <= 0.15 * m,
            fmt("m=%d: fitted slope %.3f within 15%% of %d (%.1f s)", m, slope, m,
                seconds_since(t0)));
  }
  return c.finish();
}

bool coordinate_smallball() {
  Criterion c(4, "coordinate counts: binomial law and the evaluated bound");
  {
    const OrthonormalBasis basis = OrthonormalBasis::haar(16, 41);
    const CoordCountReport r = coord_count(RandomVectorModel::gaussian(16), Operator::identity(16),
                                           basis, 1.0, 0.5, mc_with(1'000'000, 42));
    const double p = oracle::normal_two_sided_tail(1.0);
    const boost::math::binomial_distribution<double> bin(16, p);
    double tv = 0.0;
    for (std::size_t j = 0; j < r.counts.size(); ++j) {
      const double emp = static_cast<double>(r.counts[j]) / 1e6;
      tv += std::abs(emp - boost::math::pdf(bin, static_cast<double>(j)));
    }
    tv *= 0.5;
    c.check(tv <= 0.02, fmt("gaussian Id16 theta=1: TV to Binomial(16, %.6f) = %.2e <= 0.02", p, tv));
  }
  for (Eigen::Index m : {Eigen::Index{16}, Eigen::Index{1024}}) {
    const auto t0 = Clock::now();
    const OrthonormalBasis basis = OrthonormalBasis::haar(m, 43);
    const CoordCountReport r = coord_count(RandomVectorModel::cube(static_cast<int>(m)),
                                           Operator::identity(m), basis, 0.05, 0.5,
                                           mc_with(m > 100 ? 20'000 : 1'000'000, 44));
    const double bound = r.bound_rhs.value_or(NAN);
    if (bound < 1.0) {
      c.check(r.p_fail.p_hat <= bound,
              fmt("cube Id%ld haar: p_fail %.3e <= bound %.3e (%.1f s)", static_cast<long>(m),
                  r.p_fail.p_hat, bound, seconds_since(t0)));
    } else {
      c.note(fmt("cube Id%ld haar: p_fail %.3e, bound %.3e >= 1 (report only)",
                 static_cast<long>(m), r.p_fail.p_hat, bound));
    }
  }
  return c.finish();
}

bool restricted_invertibility() {
  Criterion c(5, "restricted invertibility certificates");
  int good = 0;
  double worst = kInf;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Operator a = Operator::gaussian(64, 64, 500 + seed);
    const auto target = static_cast<std::size_t>(std::floor(stable_rank(a, kInf) / 2.0));
    const Selection s = restricted_invertibility_select(a.entries(), std::max<std::size_t>(target, 1), kInf);
    const double ratio = s.certificate / (a.frobenius_norm() / 8.0);
    worst = std::min(worst, ratio);
    good += ratio >= 0.29 && !s.incomplete;
  }
  c.check(good >= 95, fmt("64x64: certificate >= 0.29 ||A||_F/8 on %d/100 seeds (worst ratio %.3f)",
                          good, worst));
  int brute = 0;
  int brute_ok = 0;
  double worst_brute = kInf;
  for (Eigen::Index m = 4; m <= 12; ++m) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Operator a = Operator::gaussian(m, m, 900 + 100 * m + seed);
      const auto target =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(stable_rank(a, kInf) / 2.0)));
      const Selection s = restricted_invertibility_select(a.entries(), target, kInf);
      const double best = oracle::best_subset_smin(a.entries(), target);
      const double ratio = s.certificate / best;
      worst_brute = std::min(worst_brute, ratio);
      ++brute;
      brute_ok += ratio >= 0.9;
    }
  }
  c.check(brute_ok == brute, fmt("m <= 12: %d/%d instances within 0.9 of the optimum (worst %.3f)",
                                 brute_ok, brute, worst_brute));
  return c.finish();
}

bool block_decomposition() {
  Criterion c(6, "block decomposition of unit-column operators");
  int disjoint = 0;
  int covered = 0;
  int verified = 0;
  double worst_err = 0.0;
  std::size_t min_cover = 64;
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Eigen::MatrixXd r = Operator::gaussian(64, 64, 700 + seed).entries();
    r.rowwise().normalize();
    const OrthonormalBasis basis =
        seed % 2 == 0 ? OrthonormalBasis::standard(64) : OrthonormalBasis::haar(64, 800 + seed);
    const Operator t(basis.vectors() * r);
    const BlockDecomposition d = block_decompose(t, basis, 0.5, 4.0);
    std::set<Eigen::Index> seen;
    bool dis = true;
    for (const auto& b : d.blocks)
      for (Eigen::Index i : b) dis = seen.insert(i).second && dis;
    disjoint += dis;
    min_cover = std::min(min_cover, seen.size());
    covered += seen.size() >= 32;
    const Eigen::MatrixXd cols = t.entries().transpose() * basis.vectors();
    bool ok = true;
    for (std::size_t b = 0; b < d.blocks.size(); ++b) {
      Eigen::MatrixXd sub(64, static_cast<Eigen::Index>(d.blocks[b].size()));
      for (std::size_t j = 0; j < d.blocks[b].size(); ++j)
        sub.col(static_cast<Eigen::Index>(j)) = cols.col(d.blocks[b][j]);
      const double cert = 1.0 / oracle::smallest_singular_value(sub);
      const double err = std::abs(cert - d.certificates[b]) / std::max(1.0, cert);
      worst_err = std::max(worst_err, err);
      ok = ok && err <= 1e-8;
    }
    verified += ok;
  }
  c.check(disjoint == 100, fmt("blocks disjoint on %d/100 inputs", disjoint));
  c.check(covered == 100, fmt("coverage >= 32 on %d/100 inputs (min %zu)", covered, min_cover));
  c.check(verified == 100, fmt("certificates re-verified on %d/100 inputs (max rel err %.1e, %.1f s)",
                               verified, worst_err, seconds_since(t0)));
  return c.finish();
}

bool subsampled_convolution() {
  Criterion c(7, "sub-sampled sparse convolution");
  const auto t0 = Clock::now();
  const std::size_t n = 256;
  const std::size_t s = 8;
  const auto a = ConvolutionEnsemble::random_sparse(n, s, 71);
  const ConvolutionEnsemble ens(a, 0.25, RandomVectorModel::cube(static_cast<int>(n)));
  const SeparationReport r = separation_experiment(ens, 0.05, {}, mc_with(10'000, 72));
  c.check(r.p_e2.p_hat >= 0.99, fmt("P(E2) = %.4f >= 0.99 (P(E1) = %.4f, exponent %.1f vs %.1f)",
                                    r.p_e2.p_hat, r.p_e1.p_hat, r.exponent_new, r.exponent_old));
  int exponent_ok = 0;
  double worst_diff = 0.0;
  const double qs[] = {kInf};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto sig = ConvolutionEnsemble::random_sparse(n, s, 1000 + seed);
    exponent_ok += fourier_profile(sig, qs).srank.at(kInf) >= static_cast<double>(n) / s - 1e-9;
    TrialRng rng(seed, Stream::kTest, 0);
    std::vector<double> xi(n);
    for (double& v : xi) v = rng.uniform() - 0.5;
    const auto fast = circular_convolve(sig, xi);
    const auto slow = oracle::convolve_direct(sig, xi);
    for (std::size_t i = 0; i < n; ++i) worst_diff = std::max(worst_diff, std::abs(fast[i] - slow[i]));
  }
  c.check(exponent_ok == 100, fmt("1/||a_hat||_inf^2 >= n/s on %d/100 draws", exponent_ok));
  c.check(worst_diff <= 1e-10, fmt("FFT vs direct max diff %.2e <= 1e-10", worst_diff));
  const double elapsed = seconds_since(t0);
  c.check(elapsed < 300.0, fmt("run time %.1f s < 300 s", elapsed));
  return c.finish();
}

bool lp_module() {
  Criterion c(8, "dyadic decomposition invariants and the one-coordinate law");
  int ok = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    TrialRng rng(81, Stream::kTest, t);
    std::vector<double> a(50);
    for (double& x : a) {
      x = rng.normal() * std::exp(3.0 * rng.normal());
      if (rng.uniform() < 0.1) x = 0.0;
    }
    a[rng.below(a.size())] = 2.0;
    const double p = 1.0 + static_cast<double>(t % 4);
    const DyadicDecomposition d = dyadic_decompose(a, p);
    std::set<std::size_t> seen;
    bool good = true;
    for (const auto& [j, idx] : d.blocks) {
      for (std::size_t i : idx) {
        good = good && seen.insert(i).second;
        const double v = std::abs(a[i]);
        good = good && v <= std::ldexp(d.a1, -j) && v > std::ldexp(d.a1, -(j + 1));
      }
    }
    std::size_t support = 0;
    for (double x : a) support += x != 0.0;
    good = good && seen.size() == support && d.sandwich_holds();
    ok += good;
  }
  c.check(ok == 1000, fmt("partition, membership and sandwich hold on %d/1000 vectors", ok));
  std::vector<double> e1(4, 0.0);
  e1[0] = 1.0;
  const std::vector<double> eps{0.01, 0.05, 0.1, 0.2, 0.4};
  const LpReport r =
      lp_smallball_experiment(RandomVectorModel::cube(4), e1, 1.0, eps, mc_with(1'000'000, 82));
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double truth = 2.0 * eps[i];
    c.check(r.estimates[i].ci_low <= truth && truth <= r.estimates[i].ci_high,
            fmt("e1 cube eps=%.2f: CI [%.5f, %.5f] holds %.2f", eps[i], r.estimates[i].ci_low,
                r.estimates[i].ci_high, truth));
  }
  return c.finish();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool determinism() {
  Criterion c(9, "CLI output is byte-identical across reruns and thread counts");
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "smallball_acceptance";
  std::filesystem::create_directories(dir);
  for (const char* name :
       {"ak", "smallball", "negmoment", "coordsb", "decompose", "conv", "lp", "sbacheck"}) {
    const std::string config = std::string(SMALLBALL_CONFIG_DIR) + "/" + name + ".json";
    std::vector<std::string> outputs;
    bool ran = true;
    for (const auto& [tag, threads] : {std::pair{"a", 1}, std::pair{"b", 1}, std::pair{"c", 8}}) {
      const auto out = dir / (std::string(name) + "_" + tag + ".csv");
      std::filesystem::remove(out);
      const std::string cmd = std::string(SMALLBALL_LAB_EXE) + " " + name + " --config " + config +
                              " --threads " + std::to_string(threads) + " --out " + out.string() +
                              " > /dev/null";
      ran = ran && std::system(cmd.c_str()) == 0;
      outputs.push_back(slurp(out));
    }
    const bool same = ran && !outputs[0].empty() && outputs[0] == outputs[1] &&
                      outputs[0] == outputs[2];
    c.check(same, fmt("%s: rerun and threads 1 vs 8 identical (%zu bytes)", name,
                      outputs[0].size()));
  }
  return c.finish();
}

}  // namespace

int main() {
  bool all = true;
  const auto t0 = Clock::now();
  for (auto* criterion : {gaussian_identity, comparison, smallball_exponent, coordinate_smallball,
                          restricted_invertibility, block_decomposition, subsampled_convolution,
                          lp_module, determinism}) {
    try {
      all = criterion() && all;
    } catch (const std::exception& e) {
      std::cout << "FAIL criterion: exception " << e.what() << '\n';
      all = false;
    }
  }
  std::cout << fmt("total %.1f s", seconds_since(t0)) << '\n';
  return all ? 0 : 1;
}
