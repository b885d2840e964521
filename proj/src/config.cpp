#include "orbit_averager/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace orbit_averager {

namespace pt = boost::property_tree;

namespace {

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " value '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw ConfigError("trailing characters in " + what + " value '" + text + "'");
  return v;
}

std::vector<double> parse_list(std::string text, const std::string& what) {
  for (char& c : text) {
    if (c == ',' || c == '|') c = ' ';
  }
  std::istringstream is(text);
  std::vector<double> out;
  std::string token;
  while (is >> token) out.push_back(parse_double(token, what));
  return out;
}

template <typename T>
T get_or(const pt::ptree& tree, const std::string& path, T fallback) {
  const auto node = tree.get_optional<std::string>(path);
  if (!node) return fallback;
  if constexpr (std::is_same_v<T, double>) {
    return parse_double(*node, path);
  } else if constexpr (std::is_same_v<T, std::string>) {
    return *node;
  } else {
    try {
      return static_cast<T>(std::stoll(*node));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse integer " + path + " value '" + *node + "'");
    }
  }
}

void read_named(const pt::ptree& section, AffinePerturbation& p) {
  for (const auto& [key, node] : section) {
    if (key.size() < 2 || !std::isalpha(static_cast<unsigned char>(key[0])))
      throw ConfigError("coefficient key '" + key + "' is not of the form <letter><index>");
    int index = 0;
    try {
      std::size_t used = 0;
      index = std::stoi(key.substr(1), &used);
      if (used != key.size() - 1) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ConfigError("coefficient key '" + key + "' is not of the form <letter><index>");
    }
    try {
      p.named(key[0], index) = parse_double(node.data(), "coefficient " + key);
    } catch (const std::out_of_range& e) {
      throw ConfigError(e.what());
    }
  }
}

void read_dense(const pt::ptree& section, AffinePerturbation& p) {
  const int n = p.dim();
  for (const auto& [key, node] : section) {
    const int row = key.size() == 1 ? std::tolower(static_cast<unsigned char>(key[0])) - 'a' : -1;
    if (row < 0 || row >= n) throw ConfigError("dense row '" + key + "' does not exist for dimension " + std::to_string(n));
    const auto values = parse_list(node.data(), "dense row " + key);
    if (static_cast<int>(values.size()) != n + 1)
      throw ConfigError("dense row '" + key + "' needs " + std::to_string(n + 1) + " numbers (A row then b)");
    for (int j = 0; j < n; ++j) p.A(row, j) = values[static_cast<std::size_t>(j)];
    p.b[row] = values.back();
  }
}

}  // namespace

ChartRegion RunConfig::region() const {
  ChartRegion r = default_region(scenario_ref(), perturbation, delta0);
  if (kappa) r.kappa = *kappa;
  return r;
}

AffinePerturbation preset_perturbation(const std::string& name, double a, double b, double c, double d) {
  if (name == "theorem1-example") return equator_example(a, b);
  if (name == "theorem3-example") return plane_sphere_example(a, b, c, d);
  throw ConfigError("unknown preset '" + name + "' (expected theorem1-example or theorem3-example)");
}

RunConfig parse_config(std::istream& in) {
  // read_ini only understands whole-line comments.
  std::ostringstream stripped;
  for (std::string line; std::getline(in, line);) stripped << line.substr(0, line.find_first_of(";#")) << '\n';
  std::istringstream clean(stripped.str());
  pt::ptree tree;
  try {
    pt::read_ini(clean, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  RunConfig cfg;
  if (const auto preset = tree.get_child_optional("preset")) {
    const auto name = get_or<std::string>(*preset, "name", "");
    const bool first = name == "theorem1-example";
    const double a = get_or(*preset, "a", first ? 1.0 : 2.0);
    const double b = get_or(*preset, "b", 1.0);
    const double c = get_or(*preset, "c", 1.0);
    const double d = get_or(*preset, "d", 1.0);
    cfg.perturbation = preset_perturbation(name, a, b, c, d);
    cfg.scenario = first ? ScenarioId::S1 : ScenarioId::S3;
    if (tree.get_child_optional("coefficients") || tree.get_child_optional("dense"))
      throw ConfigError("a preset cannot be combined with explicit coefficients");
  } else {
    const auto id = tree.get_optional<std::string>("scenario.id");
    if (!id) throw ConfigError("config needs [scenario] id or a [preset] section");
    try {
      cfg.scenario = parse_scenario_id(*id);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    cfg.perturbation = AffinePerturbation::zero(cfg.scenario_ref());
    if (const auto dense = tree.get_child_optional("dense")) read_dense(*dense, cfg.perturbation);
    if (const auto named = tree.get_child_optional("coefficients")) read_named(*named, cfg.perturbation);
  }
  if (!cfg.perturbation.A.allFinite() || !cfg.perturbation.b.allFinite())
    throw ConfigError("perturbation coefficients must be finite");

  if (const auto values = tree.get_optional<std::string>("epsilon.values")) {
    cfg.epsilons = parse_list(*values, "epsilon.values");
    if (cfg.epsilons.empty()) throw ConfigError("epsilon.values is empty");
  }
  for (double eps : cfg.epsilons) {
    if (!(eps > 0.0)) throw ConfigError("epsilon values must be positive");
    if (eps > 0.1) cfg.warnings.push_back("epsilon " + std::to_string(eps) + " exceeds 0.1; averaging predictions are not expected to hold");
  }

  cfg.delta0 = get_or(tree, "region.delta0", cfg.delta0);
  if (!(cfg.delta0 > 0.0 && cfg.delta0 < kHalfPi)) throw ConfigError("region.delta0 must lie in (0, pi/2)");
  if (const auto kappa = tree.get_optional<std::string>("region.kappa")) {
    cfg.kappa = parse_double(*kappa, "region.kappa");
    if (!(*cfg.kappa >= 0.0)) throw ConfigError("region.kappa must be non-negative");
  }

  auto& integ = cfg.verifier.integrator;
  const auto method = get_or<std::string>(tree, "integrator.method", "rk45-adaptive");
  if (method == "rk45-adaptive") {
    integ.method = Method::Rk45Adaptive;
  } else if (method == "rk4-fixed") {
    integ.method = Method::Rk4Fixed;
  } else {
    throw ConfigError("integrator.method must be rk4-fixed or rk45-adaptive");
  }
  integ.abs_tol = get_or(tree, "integrator.abs_tol", integ.abs_tol);
  integ.rel_tol = get_or(tree, "integrator.rel_tol", integ.rel_tol);
  integ.max_step = get_or(tree, "integrator.max_step", integ.max_step);
  integ.initial_step = get_or(tree, "integrator.initial_step", integ.initial_step);
  try {
    integ.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  cfg.verifier.tolerance = get_or(tree, "verify.tolerance", cfg.verifier.tolerance);
  if (!(cfg.verifier.tolerance > 0.0)) throw ConfigError("verify.tolerance must be positive");
  if (const auto section = tree.get_optional<std::string>("verify.section"))
    cfg.section_value = parse_double(*section, "verify.section");

  cfg.output_dir = get_or<std::string>(tree, "output.dir", "");
  cfg.seed = get_or<std::uint64_t>(tree, "run.seed", cfg.seed);
  cfg.jobs = get_or<int>(tree, "run.jobs", cfg.jobs);
  if (cfg.jobs < 1) throw ConfigError("run.jobs must be at least 1");
  cfg.survey_count = get_or<int>(tree, "sweep.count", cfg.survey_count);
  if (cfg.survey_count < 1) throw ConfigError("sweep.count must be at least 1");

  if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string(kSeedEnvVar) + " is not an unsigned integer");
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

}  // namespace orbit_averager
