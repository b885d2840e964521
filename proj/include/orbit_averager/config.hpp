// Run configuration for the command-line front end.
//
// INI-style document, e.g.
//
//   [scenario]
//   id = S1
//
//   [coefficients]        ; named form, one key per nonzero coefficient
//   a2 = 1
//   b1 = 1
//
//   [dense]               ; alternative: one row per equation, A entries then b
//   a = 0 1 0 | 0
//
//   [epsilon]
//   values = 1e-2, 5e-3, 2.5e-3, 1.25e-3
//
// A [preset] section with `name = theorem1-example` or `theorem3-example`
// (parameters a, b, c, d) replaces [scenario] and the coefficient sections.
#ifndef ORBIT_AVERAGER_CONFIG_HPP
#define ORBIT_AVERAGER_CONFIG_HPP

#include "orbit_averager/systems.hpp"
#include "orbit_averager/verifier.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbit_averager {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSeedEnvVar = "ORBIT_AVERAGER_SEED";

struct RunConfig {
  ScenarioId scenario = ScenarioId::S1;
  AffinePerturbation perturbation = AffinePerturbation::zero(orbit_averager::scenario(ScenarioId::S1));
  std::vector<double> epsilons{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  double delta0 = 0.05;
  std::optional<double> kappa;
  /// Section azimuth; defaults to the predicted azimuth of the root.
  std::optional<double> section_value;
  VerifierConfig verifier;
  std::string output_dir;
  std::uint64_t seed = 20240601;
  int jobs = 1;
  /// Number of random perturbations surveyed by the sweep command.
  int survey_count = 200;
  std::vector<std::string> warnings;

  const Scenario& scenario_ref() const { return orbit_averager::scenario(scenario); }
  ChartRegion region() const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// `theorem1-example` (system (3), parameters a, b) or `theorem3-example`
/// (system (8), parameters a, b, c, d).
AffinePerturbation preset_perturbation(const std::string& name, double a, double b, double c, double d);

}  // namespace orbit_averager

#endif  // ORBIT_AVERAGER_CONFIG_HPP
