#include "orbit_averager/cli.hpp"

#include "orbit_averager/averaging.hpp"
#include "orbit_averager/config.hpp"
#include "orbit_averager/selftest.hpp"
#include "orbit_averager/verifier.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace orbit_averager {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string vec(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + ")";
}

void print_matrix(std::ostream& os, const std::string& name, const Eigen::MatrixXd& m) {
  os << name << " =\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << "  [";
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << num(m(i, j));
    os << "]\n";
  }
}

struct Options {
  std::string config_path;
  std::optional<int> jobs;
  std::string out_dir;
  int seeds = 1;
  std::optional<std::uint64_t> seed;
  bool fault_inject = false;
};

struct AverageOutcome {
  int code = kExitOk;
  AveragedMap map;
  RootResult root;
};

AverageOutcome average(const RunConfig& cfg, std::ostream& report) {
  const Scenario& s = cfg.scenario_ref();
  const AffinePerturbation& p = cfg.perturbation;
  AverageOutcome outcome;

  report << "scenario " << s.name << " (dim " << s.dim() << ", averaging over k = " << s.projection_dim << ")\n";
  const MonodromyDefect defect = monodromy_defect(s, s.projection_dim);
  report << "monodromy defect: upper-right norm " << num(defect.upper_right_norm) << ", Delta det "
         << num(defect.delta_det) << (defect.condition_holds() ? " (block condition holds)\n" : " (block condition FAILS)\n");

  outcome.map = averaged_map(s, p);
  print_matrix(report, "K", outcome.map.K);
  report << "h = " << vec(outcome.map.h) << "\n";

  const ChartRegion region = cfg.region();
  outcome.root = solve_root(outcome.map, region);
  report << "det K = " << num(outcome.root.det) << "\n";
  report << "region: delta0 = " << num(region.delta0) << ", kappa = " << num(region.kappa)
         << (region.kappa > 0.0 ? "" : " (unbounded)") << "\n";

  switch (s.id) {
    case ScenarioId::S1:
      report << "a1 b2 - a2 b1 = " << num(s1_determinant_condition(p)) << "\n";
      break;
    case ScenarioId::S2:
      report << "det of 4x4 coefficient minor = " << num(s2_minor_determinant(p)) << "\n";
      break;
    case ScenarioId::S3: {
      const auto [planar, sphere] = s3_determinant_conditions(p);
      report << "determinant conditions: planar = " << num(planar) << ", sphere = " << num(sphere) << "\n";
      break;
    }
  }

  if (outcome.root.degenerate) {
    report << "status: degenerate (|det K| <= " << num(singular_threshold(outcome.map.K))
           << "), no isolated zero of the averaged map\n";
    outcome.code = kExitDegenerate;
    return outcome;
  }
  report << "root alpha* = " << vec(*outcome.root.root) << "\n";
  report << "bifurcation point (normalized) = " << vec(outcome.root.point->coords) << "\n";
  if (!outcome.root.in_region) {
    report << "warning: root lies outside the region; no limit cycle is predicted there\n";
    report << "status: out-of-region\n";
    outcome.code = kExitOutOfRegion;
    return outcome;
  }
  report << "status: isolated root in region\n";
  return outcome;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

fs::path output_dir(const Options& opts, const RunConfig& cfg) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return "out";
}

int cmd_average(const Options& opts, const RunConfig& cfg, std::ostream& out) {
  std::ostringstream report;
  for (const auto& w : cfg.warnings) report << "warning: " << w << "\n";
  const int code = average(cfg, report).code;
  out << report.str();
  if (!opts.out_dir.empty() || !cfg.output_dir.empty()) write_file(output_dir(opts, cfg) / "report.txt", report.str());
  return code;
}

int cmd_verify(const Options& opts, const RunConfig& cfg, std::ostream& out) {
  std::ostringstream report;
  for (const auto& w : cfg.warnings) report << "warning: " << w << "\n";
  const AverageOutcome avg = average(cfg, report);
  if (avg.code != kExitOk) {
    report << "verification skipped: averaging did not produce an isolated root in the region\n";
    out << report.str();
    return avg.code;
  }

  const Scenario& s = cfg.scenario_ref();
  const Eigen::VectorXd z_pred = s.embed(*avg.root.root);
  const int idx = s.first_azimuth();
  const SectionSpec section{idx, cfg.section_value.value_or(z_pred[idx])};
  const ChartPoint prediction(s.spec, z_pred);
  const int jobs = opts.jobs.value_or(cfg.jobs);

  const SweepTable table =
      epsilon_sweep(s, cfg.perturbation, section, prediction, cfg.epsilons, cfg.region(), cfg.verifier, jobs);

  report << "section: coordinate " << idx << " = " << num(section.value) << "\n";
  std::vector<std::size_t> failed;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    report << "eps = " << num(row.epsilon) << ": " << to_string(row.status);
    if (row.state) {
      report << ", residual " << num(row.residual) << ", distance " << num(row.distance) << ", period "
             << num(row.period);
      if (!row.multipliers.empty()) report << ", |mu|max " << num(std::abs(row.multipliers.front()));
      if (row.certified() && !row.hyperbolic) report << " (non-hyperbolic)";
    }
    report << "\n";
    if (!row.certified()) failed.push_back(i);
  }
  const bool slope_ok = table.slope && *table.slope >= 0.8 && *table.slope <= 1.2;
  report << "log-log slope of distance vs eps: " << (table.slope ? num(*table.slope) : std::string("n/a")) << " over "
         << table.fitted_rows << " rows\n";

  const fs::path dir = output_dir(opts, cfg);
  std::ostringstream csv;
  write_sweep_csv(csv, table, s.dim() - 1);
  write_file(dir / "sweep.csv", csv.str());
  report << "sweep table written to " << (dir / "sweep.csv").string() << "\n";

  int code = kExitOk;
  if (!failed.empty()) {
    report << "uncertified rows:";
    for (auto i : failed) report << ' ' << i;
    report << "\n";
    code = kExitUnverified;
  } else if (!slope_ok) {
    report << "slope outside [0.8, 1.2]\n";
    code = kExitUnverified;
  }
  report << "status: " << (code == kExitOk ? "verified" : "unverified") << "\n";
  write_file(dir / "report.txt", report.str());
  out << report.str();
  return code;
}

int cmd_sweep(const Options& opts, const RunConfig& cfg, std::ostream& out) {
  const Scenario& s = cfg.scenario_ref();
  std::mt19937_64 rng(cfg.seed);
  std::ostringstream csv;
  csv << "index,det,degenerate,in_region";
  for (int i = 0; i < s.projection_dim; ++i) csv << ",alpha" << i + 1;
  csv << "\n";
  int isolated = 0, in_region = 0;
  const double delta0 = cfg.delta0;
  for (int n = 0; n < cfg.survey_count; ++n) {
    const AffinePerturbation p = random_perturbation(s, rng);
    const AveragedMap map = averaged_map(s, p);
    ChartRegion region = default_region(s, p, delta0);
    if (cfg.kappa) region.kappa = *cfg.kappa;
    const RootResult root = solve_root(map, region);
    csv << n << ',' << num(root.det) << ',' << (root.degenerate ? 1 : 0) << ',' << (root.in_region ? 1 : 0);
    for (int i = 0; i < s.projection_dim; ++i) csv << ',' << (root.root ? num((*root.root)[i]) : std::string("nan"));
    csv << "\n";
    if (!root.degenerate) ++isolated;
    if (root.in_region) ++in_region;
  }
  std::ostringstream report;
  report << "scenario " << s.name << ", " << cfg.survey_count << " random perturbations (seed " << cfg.seed << ")\n";
  report << "isolated zeros of the averaged map: " << isolated << " perturbations with exactly one, "
         << cfg.survey_count - isolated << " degenerate\n";
  report << "zeros inside the region: " << in_region << "\n";
  report << "maximum number of isolated zeros per perturbation: " << (isolated > 0 ? 1 : 0)
         << " (the averaged map is affine)\n";
  const fs::path dir = output_dir(opts, cfg);
  write_file(dir / "survey.csv", csv.str());
  write_file(dir / "report.txt", report.str());
  out << report.str();
  return kExitOk;
}

int cmd_selftest(const Options& opts, std::optional<RunConfig> cfg, std::ostream& out) {
  std::uint64_t seed = cfg ? cfg->seed : SelftestOptions{}.seed;
  if (!cfg) {
    if (const char* env = std::getenv(kSeedEnvVar); env && *env) seed = std::stoull(env);
  }
  if (opts.seed) seed = *opts.seed;
  std::ostringstream report;
  bool all = true;
  for (int i = 0; i < opts.seeds; ++i) {
    SelftestOptions so;
    so.seed = seed + static_cast<std::uint64_t>(i);
    so.corrupt_integrand = opts.fault_inject;
    for (const auto& r : run_selftest(so)) {
      report << (r.passed ? "PASS " : "FAIL ") << r.module << ": " << r.name << " [" << r.criterion
             << "] worst " << num(r.worst) << " over " << r.cases << " cases, seed " << so.seed << "\n";
      all = all && r.passed;
    }
  }
  report << "selftest " << (all ? "passed" : "FAILED") << "\n";
  out << report.str();
  if (!opts.out_dir.empty()) write_file(fs::path(opts.out_dir) / "selftest.txt", report.str());
  return all ? kExitOk : kExitSelftestFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Limit cycles of perturbed linear vector fields on (S^2)^m x R^n by first-order averaging",
               "orbit-averager"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opts.config_path, "run configuration file");
    if (config_required) c->required();
    sub->add_option("--jobs", opts.jobs, "parallel verification jobs")->check(CLI::PositiveNumber);
    sub->add_option("--out", opts.out_dir, "output directory");
  };
  auto* average_cmd = app.add_subcommand("average", "compute the averaged map and its root");
  auto* verify_cmd = app.add_subcommand("verify", "verify the predicted cycle over the epsilon sweep");
  auto* sweep_cmd = app.add_subcommand("sweep", "survey roots of the averaged map over random perturbations");
  auto* selftest_cmd = app.add_subcommand("selftest", "run the seeded property suites");
  add_common(average_cmd, true);
  add_common(verify_cmd, true);
  add_common(sweep_cmd, true);
  add_common(selftest_cmd, false);
  selftest_cmd->add_option("--seed", opts.seed, "base seed (overrides config and environment)");
  selftest_cmd->add_option("--seeds", opts.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
  selftest_cmd->add_flag("--fault-inject", opts.fault_inject, "corrupt the closed-form integrals (negative control)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n" << app.help();
    return kExitBadConfig;
  }

  try {
    if (*selftest_cmd) {
      std::optional<RunConfig> cfg;
      if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
      return cmd_selftest(opts, cfg, out);
    }
    const RunConfig cfg = load_config(opts.config_path);
    if (*average_cmd) return cmd_average(opts, cfg, out);
    if (*verify_cmd) return cmd_verify(opts, cfg, out);
    if (*sweep_cmd) return cmd_sweep(opts, cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitBadConfig;
  }
  return kExitBadConfig;
}

}  // namespace orbit_averager
