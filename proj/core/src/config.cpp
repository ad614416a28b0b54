#include "smallball/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "smallball/errors.hpp"

namespace sblab {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 8> kExperimentNames = {
    "ak", "smallball", "negmoment", "coordsb", "decompose", "conv", "lp", "sbacheck"};

std::string join_path(const std::string& parent, std::string_view key) {
  return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

// Reads an object's members by name and rejects whatever was not read.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& require(std::string_view key) {
    const json* v = find(key);
    if (v == nullptr) field_error(where(key), "required field is missing");
    return *v;
  }

  double number(const json& v, std::string_view key) const {
    if (!v.is_number()) field_error(where(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) field_error(where(key), "expected a finite number");
    return x;
  }

  double number(std::string_view key) { return number(require(key), key); }

  double number_or(std::string_view key, double fallback) {
    const json* v = find(key);
    return v == nullptr ? fallback : number(*v, key);
  }

  std::optional<double> optional_number(std::string_view key) {
    const json* v = find(key);
    if (v == nullptr || v->is_null()) return std::nullopt;
    return number(*v, key);
  }

  std::uint64_t unsigned_int(const json& v, std::string_view key) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) field_error(where(key), "expected a non-negative integer");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (x >= 0.0 && x < 1.8e19 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
    }
    field_error(where(key), "expected a non-negative integer");
  }

  std::uint64_t unsigned_int(std::string_view key) { return unsigned_int(require(key), key); }

  std::uint64_t unsigned_or(std::string_view key, std::uint64_t fallback) {
    const json* v = find(key);
    return v == nullptr ? fallback : unsigned_int(*v, key);
  }

  std::optional<std::uint64_t> optional_unsigned(std::string_view key) {
    const json* v = find(key);
    if (v == nullptr || v->is_null()) return std::nullopt;
    return unsigned_int(*v, key);
  }

  int small_int(std::string_view key) {
    const std::uint64_t v = unsigned_int(key);
    if (v > 1u << 20) field_error(where(key), "value too large");
    return static_cast<int>(v);
  }

  std::string string(std::string_view key) {
    const json& v = require(key);
    if (!v.is_string()) field_error(where(key), "expected a string");
    return v.get<std::string>();
  }

  std::string string_or(std::string_view key, std::string fallback) {
    return find(key) == nullptr ? fallback : string(key);
  }

  std::vector<double> numbers(const json& v, std::string_view key) const {
    if (!v.is_array()) field_error(where(key), "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(number(v[i], std::string(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::vector<double> numbers(std::string_view key) { return numbers(require(key), key); }

  std::optional<std::vector<double>> optional_numbers(std::string_view key) {
    const json* v = find(key);
    if (v == nullptr || v->is_null()) return std::nullopt;
    return numbers(*v, key);
  }

  /// Rejects unknown members up front, before any required-field check.
  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
        field_error(where(it.key()), "unknown field");
      }
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.contains(it.key())) field_error(where(it.key()), "unknown field");
    }
  }

  std::string where(std::string_view key) const { return join_path(path_, key); }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

RandomVectorModel parse_model_at(const json& spec, const std::string& path,
                                 std::optional<int> inherited_dim) {
  Fields f(spec, path);
  const Family family = [&] {
    try {
      return parse_family(f.string("family"));
    } catch (const ConfigError& e) {
      field_error(f.where("family"), e.what());
    }
  }();
  int dim = 0;
  if (inherited_dim) {
    if (const json* d = f.find("dim")) {
      if (static_cast<int>(f.unsigned_int(*d, "dim")) != *inherited_dim) {
        field_error(f.where("dim"), "must match the enclosing model");
      }
    }
    dim = *inherited_dim;
  } else {
    dim = f.small_int("dim");
  }
  if (dim < 1) field_error(f.where("dim"), "must be >= 1");

  static const json kEmpty = json::object();
  const json* params_json = f.find("params");
  Fields p(params_json == nullptr ? kEmpty : *params_json, f.where("params"));

  std::optional<RandomVectorModel> model;
  switch (family) {
    case Family::kGaussian: model = RandomVectorModel::gaussian(dim); break;
    case Family::kCube: model = RandomVectorModel::cube(dim); break;
    case Family::kLaplaceIid: model = RandomVectorModel::laplace_iid(dim); break;
    case Family::kBallUniform: model = RandomVectorModel::ball_uniform(dim); break;
    case Family::kIidDensity: {
      std::vector<double> u = p.numbers("u");
      std::vector<double> x = p.numbers("x");
      try {
        model = RandomVectorModel::iid_density(dim, QuantileTable(std::move(u), std::move(x)));
      } catch (const std::invalid_argument& e) {
        field_error(p.where("u"), e.what());
      }
      break;
    }
    case Family::kPerturbation: {
      RandomVectorModel base = parse_model_at(p.require("base"), p.where("base"), dim);
      RandomVectorModel inner = parse_model_at(p.require("inner"), p.where("inner"), dim);
      const double delta = p.number("delta");
      if (!(delta > 0.0)) field_error(p.where("delta"), "must be > 0");
      model = RandomVectorModel::perturbation(std::move(base), std::move(inner), delta);
      break;
    }
  }
  if (const json* b = p.find("density_bound")) {
    if (b->is_null()) {
      model = model->with_density_bound(std::nullopt);
    } else {
      const double v = p.number(*b, "density_bound");
      if (!(v > 0.0)) field_error(p.where("density_bound"), "must be > 0");
      model = model->with_density_bound(v);
    }
  }
  p.finish();
  f.finish();
  return *model;
}

void require_range(bool ok, const Fields& f, std::string_view key, const char* what) {
  if (!ok) field_error(f.where(key), what);
}

void validate_epsilons(const std::vector<double>& eps, const Fields& f, bool open_unit) {
  if (eps.empty()) field_error(f.where("epsilons"), "must not be empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (open_unit && !(eps[i] > 0.0 && eps[i] < 1.0)) {
      field_error(f.where("epsilons"), "every epsilon must lie in (0, 1)");
    }
    if (!open_unit && !(eps[i] >= 0.0)) field_error(f.where("epsilons"), "must be >= 0");
    if (i > 0 && !(eps[i] > eps[i - 1])) {
      field_error(f.where("epsilons"), "must be strictly increasing");
    }
  }
}

std::string parse_basis_name(Fields& f, std::string_view key, std::string fallback) {
  std::string b = f.string_or(key, std::move(fallback));
  if (b != "standard" && b != "haar") field_error(f.where(key), "expected \"standard\" or \"haar\"");
  return b;
}

}  // namespace

std::string_view experiment_name(Experiment e) { return kExperimentNames[static_cast<int>(e)]; }

Experiment parse_experiment(std::string_view name) {
  for (std::size_t i = 0; i < kExperimentNames.size(); ++i) {
    if (kExperimentNames[i] == name) return static_cast<Experiment>(i);
  }
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

bool has_epsilon_list(Experiment e) {
  return e == Experiment::kSmallball || e == Experiment::kConv || e == Experiment::kLp ||
         e == Experiment::kSbacheck;
}

RandomVectorModel parse_model(const json& spec) { return parse_model_at(spec, "model", std::nullopt); }

Operator parse_operator(const json& spec, const std::filesystem::path& base_dir) {
  Fields f(spec, "operator");
  std::optional<Operator> op;
  if (const json* file = f.find("file")) {
    if (!file->is_string()) field_error(f.where("file"), "expected a path string");
    std::filesystem::path path = file->get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    if (!std::filesystem::exists(path)) field_error(f.where("file"), "no such file: " + path.string());
    if (f.find("generator") != nullptr) {
      field_error(f.where("generator"), "give either file or generator, not both");
    }
    try {
      op = Operator::from_csv(path);
    } catch (const InputError& e) {
      field_error(f.where("file"), e.what());
    }
  } else {
    const std::string gen = f.string("generator");
    try {
      if (gen == "identity") {
        op = Operator::identity(static_cast<Eigen::Index>(f.small_int("dim")));
      } else if (gen == "diagonal") {
        const std::vector<double> values = f.numbers("values");
        op = Operator::diagonal(values);
      } else if (gen == "gaussian") {
        const auto rows = static_cast<Eigen::Index>(f.small_int("rows"));
        const auto cols = static_cast<Eigen::Index>(f.small_int("cols"));
        op = Operator::gaussian(rows, cols, f.unsigned_or("seed", 0));
      } else {
        field_error(f.where("generator"), "expected identity, diagonal or gaussian");
      }
    } catch (const std::invalid_argument& e) {
      field_error(f.where("generator"), e.what());
    }
  }
  if (const json* scale = f.find("scale")) {
    const double c = f.number(*scale, "scale");
    op = op->scaled(c);
  }
  f.finish();
  return *op;
}

ExperimentParams parse_params(Experiment experiment, const json& params) {
  Fields f(params, "params");
  ExperimentParams out;
  switch (experiment) {
    case Experiment::kAk: {
      AkParams p;
      p.k = f.small_int("k");
      require_range(p.k >= 1, f, "k", "must be >= 1");
      out = p;
      break;
    }
    case Experiment::kSmallball: {
      SmallballParams p;
      p.epsilons = f.numbers("epsilons");
      validate_epsilons(p.epsilons, f, false);
      const std::string scale = f.string_or("threshold_scale", "hs_norm");
      if (scale == "hs_norm") {
        p.threshold_scale = ThresholdScale::kHsNorm;
      } else if (scale == "ak") {
        p.threshold_scale = ThresholdScale::kAk;
        p.k = f.small_int("k");
        require_range(p.k >= 1, f, "k", "must be >= 1");
        for (double e : p.epsilons) {
          require_range(e > 0.0 && e <= 1.0, f, "epsilons", "must lie in (0, 1] for the ak scale");
        }
      } else {
        field_error(f.where("threshold_scale"), "expected \"hs_norm\" or \"ak\"");
      }
      p.ak_trials = f.unsigned_or("ak_trials", p.ak_trials);
      require_range(p.ak_trials >= 100, f, "ak_trials", "must be >= 100");
      out = p;
      break;
    }
    case Experiment::kNegmoment: {
      NegmomentParams p;
      p.k = f.small_int("k");
      require_range(p.k >= 1, f, "k", "must be >= 1");
      p.cap = f.number_or("cap", p.cap);
      require_range(p.cap > 0.0, f, "cap", "must be > 0");
      out = p;
      break;
    }
    case Experiment::kCoordsb: {
      CoordsbParams p;
      p.theta = f.number("theta");
      require_range(p.theta > 0.0, f, "theta", "must be > 0");
      p.s = f.number("s");
      require_range(p.s > 0.0 && p.s < 1.0, f, "s", "must lie in (0, 1)");
      p.q = f.number_or("q", p.q);
      require_range(p.q > 2.0, f, "q", "must be > 2");
      p.basis = parse_basis_name(f, "basis", p.basis);
      p.basis_seed = f.optional_unsigned("basis_seed");
      p.sba_L = f.optional_number("sba_L");
      if (p.sba_L) require_range(*p.sba_L > 0.0, f, "sba_L", "must be > 0");
      out = p;
      break;
    }
    case Experiment::kDecompose: {
      DecomposeParams p;
      p.lambda = f.number_or("lambda", p.lambda);
      require_range(p.lambda > 0.0 && p.lambda < 1.0, f, "lambda", "must lie in (0, 1)");
      p.q = f.number_or("q", p.q);
      require_range(p.q > 2.0, f, "q", "must be > 2");
      p.basis = parse_basis_name(f, "basis", p.basis);
      p.basis_seed = f.optional_unsigned("basis_seed");
      out = p;
      break;
    }
    case Experiment::kConv: {
      ConvParams p;
      p.signal = f.optional_numbers("signal");
      if (p.signal) {
        if (f.find("s") != nullptr) {
          field_error(f.where("s"), "implied by the explicit signal; remove it");
        }
      } else {
        p.s = static_cast<std::size_t>(f.unsigned_int("s"));
        require_range(p.s >= 1, f, "s", "must be >= 1");
      }
      p.delta = f.number("delta");
      require_range(p.delta > 0.0 && p.delta <= 1.0, f, "delta", "must lie in (0, 1]");
      p.epsilons = f.numbers("epsilons");
      validate_epsilons(p.epsilons, f, true);
      p.q = f.number_or("q", p.q);
      require_range(p.q > 2.0, f, "q", "must be > 2");
      p.kappa1 = f.number_or("kappa1", p.kappa1);
      p.kappa2 = f.number_or("kappa2", p.kappa2);
      require_range(p.kappa1 > 0.0, f, "kappa1", "must be > 0");
      require_range(p.kappa2 > 0.0, f, "kappa2", "must be > 0");
      p.signal_seed = f.optional_unsigned("signal_seed");
      out = p;
      break;
    }
    case Experiment::kLp: {
      LpParams p;
      p.a = f.numbers("a");
      require_range(!p.a.empty(), f, "a", "must not be empty");
      p.p = f.number("p");
      require_range(p.p >= 1.0, f, "p", "must be >= 1");
      p.epsilons = f.numbers("epsilons");
      validate_epsilons(p.epsilons, f, true);
      p.c1 = f.number_or("c1", p.c1);
      require_range(p.c1 > 0.0, f, "c1", "must be > 0");
      out = p;
      break;
    }
    case Experiment::kSbacheck: {
      SbacheckParams p;
      p.k = f.small_int("k");
      require_range(p.k >= 1, f, "k", "must be >= 1");
      p.epsilons = f.numbers("epsilons");
      validate_epsilons(p.epsilons, f, false);
      for (double e : p.epsilons) require_range(e > 0.0, f, "epsilons", "must be > 0");
      p.subspace = f.string_or("subspace", p.subspace);
      if (p.subspace != "coordinate" && p.subspace != "haar") {
        field_error(f.where("subspace"), "expected \"coordinate\" or \"haar\"");
      }
      p.z = f.optional_numbers("z");
      out = p;
      break;
    }
  }
  f.finish();
  return out;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                              std::optional<Experiment> fallback_experiment) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // The parser message already carries line and column.
    throw ConfigError(e.what());
  }
  Fields f(root, "");
  f.allow_only({"experiment", "model", "operator", "params", "trials", "seed", "threads", "output",
                "sweep"});
  ExperimentConfig cfg;

  if (const json* e = f.find("experiment")) {
    if (!e->is_string()) field_error("experiment", "expected a string");
    try {
      cfg.experiment = parse_experiment(e->get<std::string>());
    } catch (const ConfigError& err) {
      field_error("experiment", err.what());
    }
    if (fallback_experiment && *fallback_experiment != cfg.experiment) {
      field_error("experiment", "config is for '" + std::string(experiment_name(cfg.experiment)) +
                                    "' but the subcommand is '" +
                                    std::string(experiment_name(*fallback_experiment)) + "'");
    }
  } else if (fallback_experiment) {
    cfg.experiment = *fallback_experiment;
  } else {
    field_error("experiment", "required field is missing");
  }

  const Experiment ex = cfg.experiment;
  const bool wants_model = ex != Experiment::kAk && ex != Experiment::kDecompose;
  const bool wants_operator = ex != Experiment::kConv && ex != Experiment::kLp &&
                              ex != Experiment::kSbacheck;
  if (const json* m = f.find("model")) {
    if (!wants_model) field_error("model", "not used by this experiment");
    cfg.model = parse_model(*m);
  } else if (wants_model) {
    field_error("model", "required field is missing");
  }
  if (const json* o = f.find("operator")) {
    if (!wants_operator) field_error("operator", "not used by this experiment");
    cfg.op = parse_operator(*o, base_dir);
  } else if (wants_operator) {
    field_error("operator", "required field is missing");
  }

  if (const json* p = f.find("params")) {
    if (!p->is_object()) field_error("params", "expected an object");
    cfg.raw_params = *p;
  }

  cfg.trials = f.unsigned_or("trials", cfg.trials);
  if (cfg.trials < 1) field_error("trials", "must be >= 1");
  cfg.seed = f.unsigned_or("seed", cfg.seed);

  if (const json* t = f.find("threads")) {
    if (t->is_string()) {
      if (t->get<std::string>() != "auto") field_error("threads", "expected an integer or \"auto\"");
    } else {
      const std::uint64_t n = f.unsigned_int(*t, "threads");
      if (n < 1 || n > 4096) field_error("threads", "must lie in [1, 4096]");
      cfg.threads = static_cast<unsigned>(n);
    }
  }
  if (const json* o = f.find("output")) {
    if (!o->is_string()) field_error("output", "expected a path string");
    std::filesystem::path out = o->get<std::string>();
    if (out.is_relative() && !base_dir.empty()) out = base_dir / out;
    cfg.output = out;
  }

  if (const json* s = f.find("sweep")) {
    Fields sf(*s, "sweep");
    const json& param = sf.require("param");
    if (!param.is_string()) {
      field_error("sweep.param", "a sweep varies exactly one parameter; expected its name");
    }
    Sweep sweep;
    sweep.param = param.get<std::string>();
    sweep.values = sf.numbers("values");
    sf.finish();
    if (sweep.values.empty()) field_error("sweep.values", "grid must not be empty");
    if (sweep.param == "epsilon" && has_epsilon_list(ex)) {
      if (cfg.raw_params.contains("epsilons")) {
        field_error("sweep.param", "conflicts with params.epsilons");
      }
    }
    cfg.sweep = std::move(sweep);
  }
  f.finish();

  // Validate params now (and every sweep point) so errors surface before sampling.
  if (cfg.sweep && cfg.sweep->param == "epsilon" && has_epsilon_list(ex)) {
    json p = cfg.raw_params;
    p["epsilons"] = cfg.sweep->values;
    cfg.params = parse_params(ex, p);
  } else {
    if (!cfg.sweep) {
      cfg.params = parse_params(ex, cfg.raw_params);
    } else {
      // The swept parameter may be required, so validate each grid point as it will run.
      for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i) {
        json p = cfg.raw_params;
        p[cfg.sweep->param] = cfg.sweep->values[i];
        try {
          ExperimentParams point = parse_params(ex, p);
          if (i == 0) cfg.params = std::move(point);
        } catch (const ConfigError& e) {
          throw ConfigError(std::string(e.what()) + " (sweep over '" + cfg.sweep->param + "')");
        }
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<Experiment> fallback_experiment) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path(), fallback_experiment);
}

}  // namespace sblab
