#include "orbit_averager/averaging.hpp"
#include "orbit_averager/selftest.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace orbit_averager;

namespace {

const Scenario& S1 = scenario(ScenarioId::S1);
const Scenario& S2 = scenario(ScenarioId::S2);
const Scenario& S3 = scenario(ScenarioId::S3);

Eigen::VectorXd random_alpha(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd a(k);
  for (int i = 0; i < k; ++i) a[i] = u(rng);
  return a;
}

}  // namespace

TEST_CASE("equator example averages to (2 pi a phi, 2 pi b (theta + pi))") {
  const double a = 1.7, b = -0.6;
  const AveragedMap F = averaged_map(S1, equator_example(a, b));
  for (const auto& [theta, phi] : {std::pair{0.3, -0.4}, std::pair{-2.0, 1.1}}) {
    const Eigen::Vector2d v = F(Eigen::Vector2d(theta, phi));
    CHECK(v[0] == doctest::Approx(kTwoPi * a * phi).epsilon(1e-13));
    CHECK(v[1] == doctest::Approx(kTwoPi * b * (theta + kPi)).epsilon(1e-13));
  }
  const Eigen::Vector2d q = numeric_averaged(S1, equator_example(a, b), Eigen::Vector2d(0.3, -0.4));
  CHECK(q[0] == doctest::Approx(kTwoPi * a * -0.4).epsilon(1e-12));
}

TEST_CASE("zero perturbation gives the zero map and a degenerate root") {
  for (const Scenario* s : {&S1, &S2, &S3}) {
    const AveragedMap F = averaged_map(*s, AffinePerturbation::zero(*s));
    CHECK(F.K.isZero(0.0));
    CHECK(F.h.isZero(0.0));
    const RootResult r = solve_root(F, default_region(*s, AffinePerturbation::zero(*s)));
    CHECK(r.degenerate);
    CHECK_FALSE(r.root);
  }
}

TEST_CASE("plane-sphere example: first component is pi (a - b) y0") {
  const double a = 2.0, b = 1.0;
  const AveragedMap F = averaged_map(S3, plane_sphere_example(a, b, 1.0, 1.0));
  for (double y0 : {-0.5, 0.25, 1.0}) {
    const Eigen::Vector4d v = F(Eigen::Vector4d(0.0, y0, -kPi, 0.0));
    CHECK(v[0] == doctest::Approx(kPi * (a - b) * y0).epsilon(1e-13));
  }
  CHECK(F(Eigen::Vector4d(0.0, 0.0, -kPi, 0.0)).norm() <= 1e-10);
}

TEST_CASE("root examples") {
  const RootResult r1 = solve_root(averaged_map(S1, equator_example(1.0, 1.0)), ChartRegion(0.05, 1.0));
  REQUIRE(r1.root);
  CHECK(std::abs((*r1.root)[0] + kPi) <= 1e-12);
  CHECK(std::abs((*r1.root)[1]) <= 1e-12);
  CHECK(r1.in_region);
  CHECK(r1.det == doctest::Approx(-4.0 * kPi * kPi).epsilon(1e-12));

  const AffinePerturbation p3 = plane_sphere_example(2.0, 1.0, 1.0, 1.0);
  const RootResult r3 = solve_root(averaged_map(S3, p3), default_region(S3, p3));
  REQUIRE(r3.root);
  CHECK(((*r3.root) - Eigen::Vector4d(0.0, 0.0, -kPi, 0.0)).norm() <= 1e-12);
  CHECK(r3.det == doctest::Approx(-4.0 * std::pow(kPi, 4)).epsilon(1e-12));
  CHECK(((*r3.root) - s3_root_formula(p3)).norm() <= 1e-12);
}

TEST_CASE("root off the polar band is reported out of region") {
  AffinePerturbation p = AffinePerturbation::zero(S1);
  p.named('a', 0) = -kPi;
  p.named('a', 1) = 1.0;
  p.named('b', 0) = 0.3 - kPi;
  p.named('b', 2) = 1.0;
  const RootResult r = solve_root(averaged_map(S1, p), ChartRegion(0.05, 1.0));
  REQUIRE(r.root);
  CHECK(std::abs((*r.root)[0]) <= 1e-12);
  CHECK((*r.root)[1] == doctest::Approx(kPi - 0.3).epsilon(1e-12));
  CHECK_FALSE(r.in_region);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("determinants match the closed forms") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    const AffinePerturbation p1 = random_perturbation(S1, rng);
    CHECK(jacobian_det(averaged_map(S1, p1)) ==
          doctest::Approx(4.0 * kPi * kPi * s1_determinant_condition(p1)).epsilon(1e-11).scale(1.0));
    const AffinePerturbation p2 = random_perturbation(S2, rng);
    CHECK(jacobian_det(averaged_map(S2, p2)) ==
          doctest::Approx(16.0 * std::pow(kPi, 4) * s2_minor_determinant(p2)).epsilon(1e-10).scale(1.0));
    const AffinePerturbation p3 = random_perturbation(S3, rng);
    const auto [planar, sphere] = s3_determinant_conditions(p3);
    CHECK(jacobian_det(averaged_map(S3, p3)) ==
          doctest::Approx(kPi * kPi * planar * 4.0 * kPi * kPi * sphere).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("solve_root agrees with the closed-form root formulas") {
  std::mt19937_64 rng(19);
  int checked[3] = {0, 0, 0};
  while (checked[0] < 100 || checked[1] < 100 || checked[2] < 100) {
    const AffinePerturbation p1 = random_perturbation(S1, rng);
    if (checked[0] < 100 && std::abs(s1_determinant_condition(p1)) > 0.1) {
      const RootResult r = solve_root(averaged_map(S1, p1), ChartRegion(0.05, 1.0));
      CHECK(((*r.root) - s1_root_formula(p1)).norm() <= 1e-9 * (1.0 + r.root->norm()));
      ++checked[0];
    }
    const AffinePerturbation p2 = random_perturbation(S2, rng);
    if (checked[1] < 100 && std::abs(s2_minor_determinant(p2)) > 0.1) {
      const RootResult r = solve_root(averaged_map(S2, p2), ChartRegion(0.05, 1.0));
      const auto [M, rhs] = s2_root_system(p2);
      CHECK((M * (*r.root) - rhs).norm() <= 1e-9 * (1.0 + r.root->norm()));
      ++checked[1];
    }
    const AffinePerturbation p3 = random_perturbation(S3, rng);
    const auto [planar, sphere] = s3_determinant_conditions(p3);
    if (checked[2] < 100 && std::abs(planar) > 0.1 && std::abs(sphere) > 0.1) {
      const RootResult r = solve_root(averaged_map(S3, p3), ChartRegion(0.05, 0.0, {0, 1}));
      CHECK(((*r.root) - s3_root_formula(p3)).norm() <= 1e-9 * (1.0 + r.root->norm()));
      ++checked[2];
    }
  }
}

TEST_CASE("averaged map is affine and equivariant under scaling") {
  std::mt19937_64 rng(23);
  for (const Scenario* s : {&S1, &S2, &S3}) {
    const AffinePerturbation p = random_perturbation(*s, rng);
    const AveragedMap F = averaged_map(*s, p);
    const AveragedMap F3 = averaged_map(*s, p * 3.0);
    CHECK(F3.K.isApprox(3.0 * F.K, 1e-13));
    CHECK(F3.h.isApprox(3.0 * F.h, 1e-13));
    const Eigen::VectorXd x = random_alpha(s->projection_dim, rng), y = random_alpha(s->projection_dim, rng);
    CHECK((F(0.25 * x + 0.75 * y) - (0.25 * F(x) + 0.75 * F(y))).norm() <= 1e-12 * (1.0 + F.h.norm()));
  }
}

TEST_CASE("closed form agrees with quadrature") {
  std::mt19937_64 rng(29);
  for (const Scenario* s : {&S1, &S2, &S3}) {
    for (int i = 0; i < 20; ++i) {
      const AffinePerturbation p = random_perturbation(*s, rng);
      const Eigen::VectorXd a = random_alpha(s->projection_dim, rng);
      CHECK((averaged_map(*s, p)(a) - numeric_averaged(*s, p, a)).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
  CHECK_THROWS(numeric_averaged(S1, AffinePerturbation::zero(S1), Eigen::Vector2d::Zero(), 8));
}
