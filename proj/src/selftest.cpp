#include "orbit_averager/selftest.hpp"

#include "orbit_averager/averaging.hpp"
#include "orbit_averager/numerics.hpp"
#include "orbit_averager/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace orbit_averager {

namespace {

constexpr ScenarioId kAllScenarios[] = {ScenarioId::S1, ScenarioId::S2, ScenarioId::S3};

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Eigen::VectorXd random_point(const Scenario& s, std::mt19937_64& rng) {
  Eigen::VectorXd z(s.dim());
  for (int i = 0; i < s.dim(); ++i) {
    switch (s.spec.role(i)) {
      case CoordRole::Azimuth: z[i] = uniform(rng, -kPi, kPi); break;
      case CoordRole::Polar: z[i] = uniform(rng, -1.2, 1.2); break;
      case CoordRole::Line: z[i] = uniform(rng, 0.5, 1.5); break;
    }
  }
  return z;
}

SuiteResult make_result(std::string module, std::string name, std::string criterion, std::uint64_t seed) {
  SuiteResult r;
  r.module = std::move(module);
  r.name = std::move(name);
  r.criterion = std::move(criterion);
  r.seed = seed;
  return r;
}

/// Deliberately wrong closed form for the fault-injection control.
double corrupted_integral(const Integrand& f, double period) {
  double v = 0.0;
  for (auto term : f.terms()) {
    if (term.trig == Trig::Sin) term.coeff = -term.coeff;
    v += definite_integral(term, 0.0, period);
  }
  return v;
}

}  // namespace

Integrand random_integrand(std::mt19937_64& rng) {
  static constexpr double kRates[] = {-2.0, -1.0, -0.5, 0.0, 0.0, 0.5, 1.0, 2.0};
  auto one_sum = [&rng] {
    std::vector<ExpTrigTerm<double>> terms;
    const int count = uniform_int(rng, 1, 4);
    for (int i = 0; i < count; ++i) {
      ExpTrigTerm<double> t;
      t.coeff = uniform(rng, -1.0, 1.0);
      t.power = uniform_int(rng, 0, 2);
      t.rate = uniform_int(rng, 0, 4) == 0 ? uniform(rng, -1.0, 1.0) : kRates[uniform_int(rng, 0, 7)];
      t.trig = static_cast<Trig>(uniform_int(rng, 0, 2));
      if (t.trig != Trig::None) t.freq = uniform_int(rng, 0, 3) == 0 ? uniform(rng, 0.1, 3.0) : uniform_int(rng, 1, 3);
      terms.push_back(t);
    }
    return Integrand(std::move(terms));
  };
  Integrand f = one_sum();
  if (uniform_int(rng, 0, 1) == 1) f = f * one_sum();
  return f;
}

AffinePerturbation random_perturbation(const Scenario& s, std::mt19937_64& rng, double scale) {
  AffinePerturbation p = AffinePerturbation::zero(s);
  for (int i = 0; i < s.dim(); ++i) {
    p.b[i] = scale * uniform(rng, -1.0, 1.0);
    for (int j = 0; j < s.dim(); ++j) p.A(i, j) = scale * uniform(rng, -1.0, 1.0);
  }
  return p;
}

SuiteResult integrand_vs_quadrature_suite(std::uint64_t seed, int cases, bool corrupt) {
  auto result = make_result("integrand_algebra", "closed form vs 64x8 Gauss-Legendre",
                            "|I - Q| <= 1e-10 * max(|Q|, int |f|)", seed);
  std::mt19937_64 rng(seed);
  const GaussLegendre<double> rule(64);
  const double period = kTwoPi;
  result.passed = true;
  for (int c = 0; c < cases; ++c) {
    const Integrand f = random_integrand(rng);
    const double closed = corrupt ? corrupted_integral(f, period) : definite_integral(f, period);
    const double oracle = integrate([&f](double t) { return f(t); }, 0.0, period, rule, 8);
    const double l1 = integrate([&f](double t) { return std::abs(f(t)); }, 0.0, period, rule, 8);
    const double scale = std::max({std::abs(oracle), l1, 1e-300});
    const double err = std::abs(closed - oracle) / scale;
    result.worst = std::max(result.worst, err);
    if (!(err <= 1e-10)) result.passed = false;
    ++result.cases;
  }
  return result;
}

SuiteResult flow_composition_suite(std::uint64_t seed, int cases) {
  auto result = make_result("systems", "flow(flow(z, t), u) = flow(z, t + u)", "chart distance <= 1e-12", seed);
  std::mt19937_64 rng(seed);
  result.passed = true;
  for (int c = 0; c < cases; ++c) {
    const Scenario& s = scenario(kAllScenarios[c % 3]);
    const ChartPoint z(s.spec, random_point(s, rng));
    const double t = uniform(rng, -1.5, 1.5);
    const double u = uniform(rng, -1.5, 1.5);
    const double err = chart_distance(flow(s, flow(s, z, t), u), flow(s, z, t + u));
    result.worst = std::max(result.worst, err);
    if (!(err <= 1e-12)) result.passed = false;
    ++result.cases;
  }
  return result;
}

SuiteResult rk4_order_suite(std::uint64_t seed) {
  auto result = make_result("numerics", "rk4-fixed global error ratio under step halving", "ratio in [12, 20]", seed);
  std::mt19937_64 rng(seed);
  const Scenario& s = scenario(ScenarioId::S1);
  const PerturbedField field(s, AffinePerturbation::zero(s), 0.0);
  Eigen::VectorXd z0(3);
  z0 << uniform(rng, -kPi, kPi), uniform(rng, -1.0, 1.0), uniform(rng, 1.05, 1.2);
  const ChartPoint start(s.spec, z0);
  const Eigen::VectorXd exact = flow_coords(s, z0, kTwoPi);
  auto endpoint_error = [&](int steps) {
    IntegratorConfig cfg;
    cfg.method = Method::Rk4Fixed;
    cfg.initial_step = kTwoPi / steps;
    IntegrationOptions opts;
    opts.record = false;
    return (integrate(field, start, kTwoPi, cfg, opts).final_state() - exact).norm();
  };
  const double ratio = endpoint_error(64) / endpoint_error(128);
  result.worst = ratio;
  result.passed = ratio >= 16.0 * 0.75 && ratio <= 16.0 * 1.25;
  result.cases = 1;
  return result;
}

SuiteResult fd_jacobian_suite(std::uint64_t seed, int cases) {
  auto result = make_result("numerics", "finite-difference Jacobian of quadrature F recovers K",
                            "max |J_fd - K| <= 1e-8", seed);
  std::mt19937_64 rng(seed);
  result.passed = true;
  for (int c = 0; c < cases; ++c) {
    const Scenario& s = scenario(kAllScenarios[c % 3]);
    const AffinePerturbation p = random_perturbation(s, rng);
    const AveragedMap map = averaged_map(s, p);
    Eigen::VectorXd alpha(s.projection_dim);
    for (int i = 0; i < alpha.size(); ++i) alpha[i] = uniform(rng, -1.0, 1.0);
    const Eigen::MatrixXd jac =
        finite_difference_jacobian([&](const Eigen::VectorXd& a) { return numeric_averaged(s, p, a); }, alpha, 1e-5);
    const double err = (jac - map.K).cwiseAbs().maxCoeff();
    result.worst = std::max(result.worst, err);
    if (!(err <= 1e-8)) result.passed = false;
    ++result.cases;
  }
  return result;
}

SuiteResult averaged_vs_quadrature_suite(std::uint64_t seed, int cases_per_scenario) {
  auto result = make_result("averaging", "closed-form F vs 64-node Gauss-Legendre", "max component error <= 1e-9", seed);
  std::mt19937_64 rng(seed);
  result.passed = true;
  for (ScenarioId id : kAllScenarios) {
    const Scenario& s = scenario(id);
    for (int c = 0; c < cases_per_scenario; ++c) {
      const AffinePerturbation p = random_perturbation(s, rng);
      Eigen::VectorXd alpha(s.projection_dim);
      for (int i = 0; i < alpha.size(); ++i) alpha[i] = uniform(rng, -1.0, 1.0);
      const double err = (averaged_map(s, p)(alpha) - numeric_averaged(s, p, alpha, 64)).cwiseAbs().maxCoeff();
      result.worst = std::max(result.worst, err);
      if (!(err <= 1e-9)) result.passed = false;
      ++result.cases;
    }
  }
  return result;
}

std::vector<SuiteResult> run_selftest(const SelftestOptions& options) {
  // Each suite draws from its own stream so adding cases to one does not
  // shift the others.
  std::seed_seq seq{options.seed};
  std::vector<std::uint64_t> seeds(5);
  seq.generate(seeds.begin(), seeds.end());
  return {
      integrand_vs_quadrature_suite(seeds[0], 500, options.corrupt_integrand),
      flow_composition_suite(seeds[1], 100),
      rk4_order_suite(seeds[2]),
      fd_jacobian_suite(seeds[3], 12),
      averaged_vs_quadrature_suite(seeds[4], 100),
  };
}

}  // namespace orbit_averager
