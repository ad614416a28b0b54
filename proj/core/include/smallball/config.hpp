#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "smallball/operator.hpp"
#include "smallball/rv_models.hpp"
#include "smallball/smallball_engine.hpp"

namespace sblab {

enum class Experiment { kAk, kSmallball, kNegmoment, kCoordsb, kDecompose, kConv, kLp, kSbacheck };

std::string_view experiment_name(Experiment e);
/// Throws ConfigError for unknown names.
Experiment parse_experiment(std::string_view name);

struct AkParams {
  int k = 1;
};

struct SmallballParams {
  std::vector<double> epsilons;
  ThresholdScale threshold_scale = ThresholdScale::kHsNorm;
  int k = 0;  // required for the "ak" scale
  std::uint64_t ak_trials = 100000;
};

struct NegmomentParams {
  int k = 1;
  double cap = 1e6;
};

struct CoordsbParams {
  double theta = 1.0;
  double s = 0.5;
  double q = 4.0;
  std::string basis = "haar";
  std::optional<std::uint64_t> basis_seed;
  std::optional<double> sba_L;
};

struct DecomposeParams {
  double lambda = 0.5;
  double q = 4.0;
  std::string basis = "standard";
  std::optional<std::uint64_t> basis_seed;
};

struct ConvParams {
  std::size_t s = 1;
  double delta = 1.0;
  std::vector<double> epsilons;
  double q = 4.0;
  double kappa1 = 0.5;
  double kappa2 = 0.5;
  std::optional<std::uint64_t> signal_seed;
  std::optional<std::vector<double>> signal;
};

struct LpParams {
  std::vector<double> a;
  double p = 2.0;
  std::vector<double> epsilons;
  double c1 = 1.0;
};

struct SbacheckParams {
  int k = 1;
  std::vector<double> epsilons;
  std::string subspace = "coordinate";
  std::optional<std::vector<double>> z;
};

using ExperimentParams = std::variant<AkParams, SmallballParams, NegmomentParams, CoordsbParams,
                                      DecomposeParams, ConvParams, LpParams, SbacheckParams>;

/// A sweep over one scalar parameter. Sweeping "epsilon" on an experiment with
/// an epsilon list runs the whole grid on one shared sample set; any other
/// parameter gets a fresh seed per grid point.
struct Sweep {
  std::string param;
  std::vector<double> values;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::kSmallball;
  std::optional<RandomVectorModel> model;
  std::optional<Operator> op;
  /// Raw params object, kept so sweeps can substitute values.
  nlohmann::json raw_params = nlohmann::json::object();
  ExperimentParams params;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  /// Unset means "auto".
  std::optional<unsigned> threads;
  std::optional<std::filesystem::path> output;
  std::optional<Sweep> sweep;
};

/// Strict parse: unknown keys, wrong types and missing required fields throw
/// ConfigError naming the offending field. Relative paths resolve against
/// `base_dir`. `fallback_experiment` is used when the config omits
/// "experiment"; when both are present they must agree.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {},
                              std::optional<Experiment> fallback_experiment = std::nullopt);

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<Experiment> fallback_experiment = std::nullopt);

/// Typed params for `experiment` from a JSON object (strict).
ExperimentParams parse_params(Experiment experiment, const nlohmann::json& params);

RandomVectorModel parse_model(const nlohmann::json& spec);
Operator parse_operator(const nlohmann::json& spec, const std::filesystem::path& base_dir = {});

/// True when the experiment takes an epsilon list that a sweep over
/// "epsilon" replaces.
bool has_epsilon_list(Experiment e);

}  // namespace sblab
