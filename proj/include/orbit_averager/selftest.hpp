// Seeded property suites run by `orbit-averager selftest`.
#ifndef ORBIT_AVERAGER_SELFTEST_HPP
#define ORBIT_AVERAGER_SELFTEST_HPP

#include "orbit_averager/integrand.hpp"
#include "orbit_averager/systems.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace orbit_averager {

struct SuiteResult {
  std::string module;
  std::string name;
  bool passed = false;
  /// Worst observed error (or ratio, for the order check).
  double worst = 0.0;
  std::string criterion;
  std::uint64_t seed = 0;
  int cases = 0;
};

struct SelftestOptions {
  std::uint64_t seed = 20240601;
  /// Negative control: swaps the closed-form sine integrals for wrong ones so
  /// the integrand suite must fail.
  bool corrupt_integrand = false;
};

std::vector<SuiteResult> run_selftest(const SelftestOptions& options);

// Building blocks, exposed for the test suites.

Integrand random_integrand(std::mt19937_64& rng);
AffinePerturbation random_perturbation(const Scenario& s, std::mt19937_64& rng, double scale = 1.0);

SuiteResult integrand_vs_quadrature_suite(std::uint64_t seed, int cases = 500, bool corrupt = false);
SuiteResult flow_composition_suite(std::uint64_t seed, int cases = 100);
SuiteResult rk4_order_suite(std::uint64_t seed);
SuiteResult fd_jacobian_suite(std::uint64_t seed, int cases = 10);
SuiteResult averaged_vs_quadrature_suite(std::uint64_t seed, int cases_per_scenario = 100);

}  // namespace orbit_averager

#endif  // ORBIT_AVERAGER_SELFTEST_HPP
