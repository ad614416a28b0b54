#include "smallball/run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "smallball/coord_smallball.hpp"
#include "smallball/errors.hpp"
#include "smallball/grassmann.hpp"
#include "smallball/lp_decomposition.hpp"
#include "smallball/smallball_engine.hpp"
#include "smallball/subsampled_conv.hpp"

namespace sblab {
namespace {

Cell u64(std::uint64_t v) { return v; }

OrthonormalBasis make_basis(const std::string& kind, Eigen::Index m, std::uint64_t seed) {
  if (kind == "haar") return OrthonormalBasis::haar(m, seed);
  return OrthonormalBasis::standard(m);
}

Table run_ak(const ExperimentConfig& cfg, const AkParams& p, const MonteCarlo& mc) {
  const AkEstimate a = a_k_estimate(*cfg.op, p.k, mc);
  Table t{{"k", "value", "ci_low", "ci_high", "max_term_ratio", "singular_samples", "trials", "seed"}, {}};
  t.add_row({std::int64_t{p.k}, a.estimate.value, a.estimate.ci_low, a.estimate.ci_high,
             a.max_term_ratio, u64(a.singular_samples), u64(mc.trials), u64(mc.seed)});
  return t;
}

Table run_smallball(const ExperimentConfig& cfg, const SmallballParams& p, const MonteCarlo& mc) {
  const SmallBallReport r =
      p.threshold_scale == ThresholdScale::kAk
          ? corollary_bound_sweep(*cfg.model, *cfg.op, p.k, p.epsilons, mc, p.ak_trials)
          : smallball_sweep(*cfg.model, *cfg.op, p.epsilons, mc);
  Table t{{"epsilon", "p_hat", "ci_low", "ci_high", "trials", "threshold_scale", "seed"}, {}};
  const std::string scale(threshold_scale_name(r.threshold_scale));
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    const ProbabilityEstimate& e = r.p_hats[i];
    t.add_row({r.epsilons[i], e.p_hat, e.ci_low, e.ci_high, u64(mc.trials), scale, u64(mc.seed)});
  }
  return t;
}

Table run_negmoment(const ExperimentConfig& cfg, const NegmomentParams& p, const MonteCarlo& mc) {
  const NegativeMomentReport r = negative_moment(*cfg.model, *cfg.op, p.k, p.cap, mc);
  const MomentEstimate g = gaussian_negative_moment(*cfg.op, p.k, mc);
  const double gaussian_moment = std::pow(g.value, -p.k);
  std::optional<double> rhs;
  if (const auto L = cfg.model->density_bound()) {
    rhs = std::pow(std::sqrt(2.0 * std::numbers::pi) * *L, p.k) * gaussian_moment;
  }
  Table t{{"k", "cap", "moment", "ci_low", "ci_high", "moment_cap_low", "moment_cap_high",
           "cap_sensitivity", "gaussian_moment", "comparison_rhs", "trials", "seed"},
          {}};
  t.add_row({std::int64_t{p.k}, p.cap, r.at_cap.mean, r.at_cap.ci_low, r.at_cap.ci_high,
             r.at_cap_low.mean, r.at_cap_high.mean, r.cap_sensitivity(), gaussian_moment,
             optional_cell(rhs), u64(mc.trials), u64(mc.seed)});
  return t;
}

Table run_coordsb(const ExperimentConfig& cfg, const CoordsbParams& p, const MonteCarlo& mc) {
  const OrthonormalBasis basis = make_basis(p.basis, cfg.op->rows(), p.basis_seed.value_or(mc.seed));
  CoordCountOptions opts;
  opts.q = p.q;
  opts.sba_constant = p.sba_L;
  const CoordCountReport r = coord_count(*cfg.model, *cfg.op, basis, p.theta, p.s, mc, opts);
  Table t{{"theta", "s", "m", "k_q", "p_fail", "ci_low", "ci_high", "bound_rhs", "trials", "seed"},
          {}};
  t.add_row({r.theta, r.s, std::int64_t{r.m}, r.k_q, r.p_fail.p_hat, r.p_fail.ci_low,
             r.p_fail.ci_high, optional_cell(r.bound_rhs), u64(mc.trials), u64(mc.seed)});
  return t;
}

Table run_decompose(const ExperimentConfig& cfg, const DecomposeParams& p, const MonteCarlo& mc) {
  const OrthonormalBasis basis = make_basis(p.basis, cfg.op->rows(), p.basis_seed.value_or(mc.seed));
  const BlockDecomposition d = block_decompose(*cfg.op, basis, p.lambda, p.q);
  Table t{{"block", "size", "certificate", "k_q_hat", "floor", "indices", "trials", "seed"}, {}};
  for (std::size_t b = 0; b < d.blocks.size(); ++b) {
    std::string idx;
    for (Eigen::Index i : d.blocks[b]) {
      if (!idx.empty()) idx += ' ';
      idx += std::to_string(i);
    }
    t.add_row({u64(b), u64(d.blocks[b].size()), d.certificates[b], d.steps[b].k_q_hat,
               u64(d.steps[b].floor), idx, u64(mc.trials), u64(mc.seed)});
  }
  return t;
}

Table run_conv(const ExperimentConfig& cfg, const ConvParams& p, const MonteCarlo& mc) {
  const auto n = static_cast<std::size_t>(cfg.model->dim());
  std::vector<double> signal =
      p.signal ? *p.signal
               : ConvolutionEnsemble::random_sparse(n, p.s, p.signal_seed.value_or(mc.seed));
  if (signal.size() != n) throw ParameterError("conv: signal length must equal the model dimension");
  const ConvolutionEnsemble ens(std::move(signal), p.delta, *cfg.model);
  SeparationOptions opts;
  opts.q = p.q;
  opts.kappa1 = p.kappa1;
  opts.kappa2 = p.kappa2;
  const std::vector<SeparationReport> rows = separation_sweep(ens, p.epsilons, opts, mc);
  Table t{{"n", "s", "delta", "epsilon", "q", "p_E1", "E1_ci_low", "E1_ci_high", "p_E2",
           "E2_ci_low", "E2_ci_high", "mean_large_count", "exponent_new", "exponent_old",
           "trials", "seed"},
          {}};
  for (const SeparationReport& r : rows) {
    t.add_row({u64(r.n), u64(r.s), r.delta, r.epsilon, r.q, r.p_e1.p_hat, r.p_e1.ci_low,
               r.p_e1.ci_high, r.p_e2.p_hat, r.p_e2.ci_low, r.p_e2.ci_high, r.mean_large_count,
               r.exponent_new, r.exponent_old, u64(mc.trials), u64(mc.seed)});
  }
  return t;
}

Table run_lp(const ExperimentConfig& cfg, const LpParams& p, const MonteCarlo& mc) {
  const LpReport r = lp_smallball_experiment(*cfg.model, p.a, p.p, p.epsilons, mc, p.c1);
  Table t{{"p", "epsilon", "p_hat", "ci_low", "ci_high", "k_hat", "slope", "trials", "seed"}, {}};
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    const ProbabilityEstimate& e = r.estimates[i];
    t.add_row({r.p, r.epsilons[i], e.p_hat, e.ci_low, e.ci_high, r.k_hat, optional_cell(r.slope),
               u64(mc.trials), u64(mc.seed)});
  }
  return t;
}

Table run_sbacheck(const ExperimentConfig& cfg, const SbacheckParams& p, const MonteCarlo& mc) {
  const Eigen::Index n = cfg.model->dim();
  if (p.k > n) throw ParameterError("sbacheck: k must not exceed the model dimension");
  SubspaceSample f = [&] {
    if (p.subspace == "haar") {
      TrialRng rng(mc.seed, Stream::kBasis, 1);
      return sample_subspace(n, p.k, rng);
    }
    return coordinate_subspace(n, p.k);
  }();
  const std::vector<double> z = p.z.value_or(std::vector<double>(static_cast<std::size_t>(n), 0.0));
  const std::vector<SbaCheckRow> rows = sba_check_sweep(*cfg.model, f, z, p.epsilons, mc);
  Table t{{"k", "epsilon", "p_hat", "ci_low", "ci_high", "ceiling", "density_ceiling", "trials",
           "seed"},
          {}};
  for (const SbaCheckRow& r : rows) {
    t.add_row({std::int64_t{p.k}, r.epsilon, r.estimate.p_hat, r.estimate.ci_low,
               r.estimate.ci_high, optional_cell(r.ceiling), optional_cell(r.density_ceiling),
               u64(mc.trials), u64(mc.seed)});
  }
  return t;
}

}  // namespace

Table run_point(const ExperimentConfig& cfg, const ExperimentParams& params, std::uint64_t seed,
                unsigned threads) {
  MonteCarlo mc;
  mc.trials = cfg.trials;
  mc.seed = seed;
  mc.threads = threads;
  return std::visit(
      [&](const auto& p) -> Table {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, AkParams>) return run_ak(cfg, p, mc);
        if constexpr (std::is_same_v<P, SmallballParams>) return run_smallball(cfg, p, mc);
        if constexpr (std::is_same_v<P, NegmomentParams>) return run_negmoment(cfg, p, mc);
        if constexpr (std::is_same_v<P, CoordsbParams>) return run_coordsb(cfg, p, mc);
        if constexpr (std::is_same_v<P, DecomposeParams>) return run_decompose(cfg, p, mc);
        if constexpr (std::is_same_v<P, ConvParams>) return run_conv(cfg, p, mc);
        if constexpr (std::is_same_v<P, LpParams>) return run_lp(cfg, p, mc);
        if constexpr (std::is_same_v<P, SbacheckParams>) return run_sbacheck(cfg, p, mc);
      },
      params);
}

Table run(const ExperimentConfig& cfg, unsigned threads) {
  const bool shared_epsilon =
      cfg.sweep && cfg.sweep->param == "epsilon" && has_epsilon_list(cfg.experiment);
  if (!cfg.sweep || shared_epsilon) return run_point(cfg, cfg.params, cfg.seed, threads);

  Table out;
  for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i) {
    nlohmann::json raw = cfg.raw_params;
    raw[cfg.sweep->param] = cfg.sweep->values[i];
    const ExperimentParams params = parse_params(cfg.experiment, raw);
    Table point = run_point(cfg, params, derive_seed(cfg.seed, i), threads);
    // Echo the swept value when the schema does not already carry it.
    if (std::find(point.columns.begin(), point.columns.end(), cfg.sweep->param) ==
        point.columns.end()) {
      point.columns.insert(point.columns.begin(), cfg.sweep->param);
      for (auto& row : point.rows) row.insert(row.begin(), cfg.sweep->values[i]);
    }
    out.append(point);
  }
  return out;
}

unsigned resolve_thread_setting(std::optional<unsigned> cli, const char* env_value,
                                std::optional<unsigned> config_value) {
  if (cli) return *cli;
  if (env_value != nullptr && *env_value != '\0') {
    const std::string_view s(env_value);
    if (s == "auto") return 0;
    unsigned v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) {
      throw ConfigError("SMALLBALL_LAB_THREADS must be a positive integer or \"auto\"");
    }
    return v;
  }
  if (config_value) return *config_value;
  return 0;
}

}  // namespace sblab
