#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "smallball/config.hpp"
#include "smallball/coord_smallball.hpp"
#include "smallball/errors.hpp"
#include "smallball/grassmann.hpp"
#include "smallball/report.hpp"
#include "smallball/run.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config, "Experiment config (strict JSON)");
  sub->add_option("--seed", o.seed, "Override the config seed");
  sub->add_option("--threads", o.threads, "Worker threads (default: $SMALLBALL_LAB_THREADS, config, auto)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "CSV output path (overrides config output)");
}

int run_config(const CommonOptions& o, std::optional<sblab::Experiment> experiment) {
  sblab::ExperimentConfig cfg = sblab::load_config(o.config, experiment);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output = o.out;
  const unsigned threads =
      sblab::resolve_thread_setting(o.threads, std::getenv("SMALLBALL_LAB_THREADS"), cfg.threads);
  const std::string id(sblab::experiment_name(cfg.experiment));
  sblab::Table table;
  try {
    table = sblab::run(cfg, threads);
  } catch (const sblab::ParameterError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "smallball-lab: experiment '" << id << "' failed: " << e.what() << '\n';
    return kExitNumeric;
  }
  if (cfg.output) sblab::write_csv(table, *cfg.output);
  std::cout << sblab::to_json_lines(table);
  return 0;
}

int run_ak_matrix(const std::string& matrix, int k, std::uint64_t trials, std::uint64_t seed,
                  unsigned threads) {
  const sblab::Operator t = sblab::Operator::from_csv(matrix);
  sblab::MonteCarlo mc;
  mc.trials = trials;
  mc.seed = seed;
  mc.threads = threads;
  const sblab::AkEstimate a = sblab::a_k_estimate(t, k, mc);
  nlohmann::ordered_json j;
  j["value"] = a.estimate.value;
  j["ci_low"] = a.estimate.ci_low;
  j["ci_high"] = a.estimate.ci_high;
  j["trials"] = trials;
  j["seed"] = seed;
  std::cout << j.dump() << '\n';
  return 0;
}

int run_decompose_matrix(const std::string& matrix, double lambda, double q,
                         const std::string& basis, std::uint64_t basis_seed) {
  const sblab::Operator t = sblab::Operator::from_csv(matrix);
  const sblab::OrthonormalBasis u = basis == "haar"
                                        ? sblab::OrthonormalBasis::haar(t.rows(), basis_seed)
                                        : sblab::OrthonormalBasis::standard(t.rows());
  const sblab::BlockDecomposition d = sblab::block_decompose(t, u, lambda, q);
  nlohmann::ordered_json j;
  j["blocks"] = d.blocks;
  j["certificates"] = d.certificates;
  std::cout << j.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo small-ball laboratory"};
  app.require_subcommand(1);

  CommonOptions common;
  CLI::App* run_cmd = app.add_subcommand("run", "Run the experiment named in the config");
  add_common(run_cmd, common);
  run_cmd->get_option("--config")->required();

  const std::pair<sblab::Experiment, const char*> experiments[] = {
      {sblab::Experiment::kAk, ""},
      {sblab::Experiment::kSmallball, "P(||TX|| <= eps r) over an epsilon grid"},
      {sblab::Experiment::kNegmoment, "Capped E||TX||^{-k} against the Gaussian moment"},
      {sblab::Experiment::kCoordsb, "Count of large coordinates of TX in a basis"},
      {sblab::Experiment::kDecompose, ""},
      {sblab::Experiment::kConv, "Sub-sampled circular convolution events"},
      {sblab::Experiment::kLp, "Weighted lp small-ball sweep"},
      {sblab::Experiment::kSbacheck, "Projected small-ball ceiling check"},
  };
  std::map<CLI::App*, sblab::Experiment> experiment_cmds;
  for (const auto& [e, help] : experiments) {
    CLI::App* sub = app.add_subcommand(std::string(sblab::experiment_name(e)), help);
    add_common(sub, common);
    experiment_cmds[sub] = e;
  }

  CLI::App* ak = app.get_subcommand("ak");
  ak->description("a_k(T) estimate (from --config, or directly from --matrix)");
  std::string matrix;
  int k = 1;
  std::uint64_t trials = 100000;
  ak->add_option("--matrix", matrix, "CSV matrix file");
  ak->add_option("--k", k, "Subspace dimension");
  ak->add_option("--trials", trials, "Grassmannian samples");

  CLI::App* decompose = app.get_subcommand("decompose");
  decompose->description("Block decomposition (from --config, or directly from --matrix)");
  double lambda = 0.5;
  double q = 4.0;
  std::string basis = "standard";
  std::uint64_t basis_seed = 0;
  decompose->add_option("--matrix", matrix, "CSV matrix file");
  decompose->add_option("--lambda", lambda, "Uncovered fraction allowed, in (0, 1)");
  decompose->add_option("--q", q, "Schatten exponent, > 2");
  decompose->add_option("--basis", basis, "standard or haar")
      ->check(CLI::IsMember({"standard", "haar"}));
  decompose->add_option("--basis-seed", basis_seed, "Seed for a Haar basis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    if (chosen == run_cmd) return run_config(common, std::nullopt);
    const sblab::Experiment e = experiment_cmds.at(chosen);
    if (!matrix.empty()) {
      if (!common.config.empty()) throw sblab::ConfigError("give either --config or --matrix");
      const unsigned threads = sblab::resolve_thread_setting(
          common.threads, std::getenv("SMALLBALL_LAB_THREADS"), std::nullopt);
      try {
        if (e == sblab::Experiment::kAk) {
          return run_ak_matrix(matrix, k, trials, common.seed.value_or(0), threads);
        }
        return run_decompose_matrix(matrix, lambda, q, basis, basis_seed);
      } catch (const sblab::DomainError& err) {
        std::cerr << "smallball-lab: experiment '" << sblab::experiment_name(e)
                  << "' failed: " << err.what() << '\n';
        return kExitNumeric;
      }
    }
    if (common.config.empty()) throw sblab::ConfigError("--config is required");
    return run_config(common, e);
  } catch (const sblab::ConfigError& err) {
    std::cerr << "smallball-lab: config error: " << err.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& err) {
    std::cerr << "smallball-lab: invalid input: " << err.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "smallball-lab: " << err.what() << '\n';
    return kExitNumeric;
  }
}
