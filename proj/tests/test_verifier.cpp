#include "orbit_averager/averaging.hpp"
#include "orbit_averager/selftest.hpp"
#include "orbit_averager/verifier.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace orbit_averager;

namespace {

const Scenario& S1 = scenario(ScenarioId::S1);
const Scenario& S2 = scenario(ScenarioId::S2);
const Scenario& S3 = scenario(ScenarioId::S3);
const std::vector<double> kEpsilons{1e-2, 5e-3, 2.5e-3, 1.25e-3};

// Equator perturbation plus phi-damping b2, which breaks the conserved
// quantity of the pure equator example and isolates the cycle.
AffinePerturbation damped_equator() {
  AffinePerturbation p = equator_example(1.0, 1.0);
  p.named('b', 2) = -0.5;
  return p;
}

}  // namespace

TEST_CASE("unperturbed return map examples") {
  const SectionSpec sec = default_section(S1);
  const ChartRegion region(0.05, 1.0);
  const ReturnResult a = return_map(S1, AffinePerturbation::zero(S1), 0.0, sec, Eigen::Vector2d(0.2, 1.0), region);
  CHECK(a.status == FlightStatus::Returned);
  CHECK((a.image - Eigen::Vector2d(0.2, 1.0)).norm() <= 1e-10);
  CHECK(a.time == doctest::Approx(kTwoPi).epsilon(1e-12));

  const ReturnResult b = return_map(S1, AffinePerturbation::zero(S1), 0.0, sec, Eigen::Vector2d(0.2, 1.5), region);
  CHECK(b.status == FlightStatus::BoundaryExit);

  const ReturnResult c = return_map(S3, AffinePerturbation::zero(S3), 0.0, default_section(S3),
                                    Eigen::Vector3d(0.3, 0.0, 0.1), ChartRegion(0.05, 0.0, {0, 1}));
  CHECK(c.status == FlightStatus::Returned);
  CHECK((c.image - Eigen::Vector3d(0.3, 0.0, 0.1)).norm() <= 1e-10);
  CHECK(c.time == doctest::Approx(kTwoPi).epsilon(1e-12));
}

TEST_CASE("section coordinates round trip") {
  const SectionSpec sec = default_section(S3, 0.7);
  CHECK(sec.azimuth_index == 2);
  const Eigen::Vector4d z(0.1, 0.2, 0.7, -0.3);
  CHECK(sec.to_section(z) == Eigen::Vector3d(0.1, 0.2, -0.3));
  CHECK(sec.from_section(sec.to_section(z)) == z);
}

TEST_CASE("return map Jacobian matches finite differences") {
  const AffinePerturbation p = damped_equator();
  const SectionSpec sec = default_section(S1);
  const ChartRegion region(0.05, 1.0);
  const Eigen::Vector2d y(0.1, 1.0001);
  const ReturnResult r = return_map(S1, p, 0.02, sec, y, region);
  REQUIRE(r.status == FlightStatus::Returned);
  const Eigen::MatrixXd fd = finite_difference_jacobian(
      [&](const Eigen::VectorXd& v) { return return_map(S1, p, 0.02, sec, v, region).image; }, y, 1e-6);
  CHECK((r.jacobian - fd).norm() <= 1e-5 * r.jacobian.norm());
}

TEST_CASE("equator example: cycle sits on a continuum of fixed points") {
  const AffinePerturbation p = equator_example(1.0, 1.0);
  const ChartPoint prediction(S1.spec, Eigen::Vector3d(-kPi, 0.0, 1.0));
  const CycleCertificate c = find_fixed_point(S1, p, 1e-2, default_section(S1), Eigen::Vector2d(0.0, 1.0), prediction,
                                              ChartRegion(0.05, 1.0));
  REQUIRE(c.state);
  CHECK(chart_distance(*c.state, prediction) <= 0.05);
  REQUIRE(c.multipliers.size() == 2);
  CHECK(std::abs(c.multipliers[0]) == doctest::Approx(std::exp(kTwoPi)).epsilon(1e-2));
  // phi + eps (a phi^2 - b theta^2) / 2 is conserved, so the tangential
  // multiplier is exactly one.
  CHECK(std::abs(c.multipliers[1] - 1.0) <= 1e-8);
  CHECK(c.status == CertificateStatus::Degenerate);
}

TEST_CASE("plane-sphere example: fixed point at the predicted origin") {
  const AffinePerturbation p = plane_sphere_example(2.0, 1.0, 1.0, 1.0);
  const ChartPoint prediction(S3.spec, Eigen::Vector4d(0.0, 0.0, -kPi, 0.0));
  const CycleCertificate c = find_fixed_point(S3, p, 1e-2, default_section(S3), Eigen::Vector3d::Zero(), prediction,
                                              default_region(S3, p));
  REQUIRE(c.state);
  CHECK(chart_distance(*c.state, prediction) <= 0.05);
  for (const auto& mu : c.multipliers) CHECK(std::abs(mu - 1.0) <= 0.1);
}

TEST_CASE("zero epsilon is degenerate, not converged") {
  const ChartPoint prediction(S1.spec, Eigen::Vector3d(-kPi, 0.0, 1.0));
  const CycleCertificate c = find_fixed_point(S1, equator_example(1.0, 1.0), 0.0, default_section(S1),
                                              Eigen::Vector2d(0.0, 1.0), prediction, ChartRegion(0.05, 1.0));
  CHECK(c.status == CertificateStatus::Degenerate);
}

TEST_CASE("isolated cycle converges to the prediction at rate eps") {
  const AffinePerturbation p = damped_equator();
  const RootResult root = solve_root(averaged_map(S1, p), ChartRegion(0.05, 1.0));
  REQUIRE(root.in_region);
  const ChartPoint prediction(S1.spec, S1.embed(*root.root));
  const SweepTable t = epsilon_sweep(S1, p, default_section(S1, (*root.root)[0]), prediction, kEpsilons,
                                     ChartRegion(0.05, 1.0));
  CHECK(t.all_certified());
  REQUIRE(t.slope);
  CHECK(*t.slope >= 0.8);
  CHECK(*t.slope <= 1.2);
  CHECK(t.fitted_rows == 4);
  for (const auto& row : t.rows) CHECK(row.residual < 1e-8);
}

TEST_CASE("largest multiplier approaches e^{2 pi}") {
  const AffinePerturbation p = damped_equator();
  const RootResult root = solve_root(averaged_map(S1, p), ChartRegion(0.05, 1.0));
  const ChartPoint prediction(S1.spec, S1.embed(*root.root));
  const CycleCertificate c = find_fixed_point(S1, p, 1e-3, default_section(S1, (*root.root)[0]),
                                              Eigen::Vector2d((*root.root)[1], 1.0), prediction, ChartRegion(0.05, 1.0));
  REQUIRE(c.certified());
  CHECK(std::abs(std::abs(c.multipliers[0]) - std::exp(kTwoPi)) <= 1e-2 * std::exp(kTwoPi));
}

TEST_CASE("zero perturbation makes every row degenerate") {
  const ChartPoint prediction(S1.spec, Eigen::Vector3d(-kPi, 0.0, 1.0));
  const SweepTable t = epsilon_sweep(S1, AffinePerturbation::zero(S1), default_section(S1), prediction, kEpsilons,
                                     ChartRegion(0.05, 1.0));
  REQUIRE(t.rows.size() == 4);
  for (const auto& row : t.rows) CHECK(row.status == CertificateStatus::Degenerate);
  CHECK_FALSE(t.slope);
}

TEST_CASE("two-sphere cycle lies near the solution of the root system") {
  std::mt19937_64 rng(2024);
  for (int found = 0; found < 2;) {
    const AffinePerturbation p = random_perturbation(S2, rng);
    if (std::abs(s2_minor_determinant(p)) <= 0.1) continue;
    const ChartRegion region = default_region(S2, p);
    const RootResult root = solve_root(averaged_map(S2, p), region);
    if (!root.in_region) continue;
    const auto [M, rhs] = s2_root_system(p);
    const Eigen::Vector4d alpha = M.fullPivLu().solve(rhs);
    const ChartPoint prediction(S2.spec, S2.embed(alpha));
    const SectionSpec sec = default_section(S2, alpha[0]);
    const CycleCertificate c =
        find_fixed_point(S2, p, 1e-3, sec, sec.to_section(prediction.coords), prediction, region);
    REQUIRE(c.state);
    CHECK(c.distance <= 0.1);
    CHECK(c.residual < 1e-8);
    ++found;
  }
}

TEST_CASE("sweep output is deterministic and independent of job count") {
  const AffinePerturbation p = damped_equator();
  const ChartPoint prediction(S1.spec, Eigen::Vector3d(-kPi, 0.0, 1.0));
  auto csv = [&](int jobs) {
    std::ostringstream os;
    write_sweep_csv(os, epsilon_sweep(S1, p, default_section(S1), prediction, kEpsilons, ChartRegion(0.05, 1.0), {}, jobs),
                    2);
    return os.str();
  };
  const std::string one = csv(1);
  CHECK(one == csv(1));
  CHECK(one == csv(3));
  CHECK(one.rfind("epsilon,y1,y2,residual,mu1_re,mu1_im,mu2_re,mu2_im,distance,period", 0) == 0);
}

TEST_CASE("slope fit") {
  CHECK(*fit_slope({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0}) == doctest::Approx(2.0));
  CHECK_FALSE(fit_slope({1.0}, {1.0}));
}
