#include "orbit_averager/numerics.hpp"
#include "orbit_averager/systems.hpp"

#include <doctest.h>

#include <cmath>

using namespace orbit_averager;

namespace {

const Scenario& S1 = scenario(ScenarioId::S1);
const Scenario& S3 = scenario(ScenarioId::S3);

PerturbedField unperturbed(const Scenario& s) { return PerturbedField(s, AffinePerturbation::zero(s), 0.0); }

// z' = z^2 on a single line coordinate; blows up at t = 1 / z0.
struct BlowUp {
  Eigen::VectorXd operator()(const Eigen::VectorXd& z) const { return z.cwiseProduct(z); }
};

}  // namespace

TEST_CASE("unperturbed orbit on the equator band is 2 pi periodic") {
  const ChartPoint z0(S1.spec, Eigen::Vector3d(0.0, 0.3, 1.0));
  const Trajectory tr = integrate(unperturbed(S1), z0, kTwoPi, IntegratorConfig{});
  CHECK(tr.status == IntegrationStatus::Completed);
  CHECK(tr.final_time() == kTwoPi);
  CHECK(chart_distance(ChartPoint(S1.spec, tr.final_state()), z0) <= 1e-9);
}

TEST_CASE("radial coordinate follows (r0 - 1) e^t + 1") {
  const ChartPoint z0(S1.spec, Eigen::Vector3d(0.0, 0.3, 1.1));
  for (Method m : {Method::Rk45Adaptive, Method::Rk4Fixed}) {
    IntegratorConfig cfg;
    cfg.method = m;
    const Trajectory tr = integrate(unperturbed(S1), z0, 1.0, cfg);
    CHECK(std::abs(tr.final_state()[2] - (0.1 * std::exp(1.0) + 1.0)) <= 1e-9);
  }
}

TEST_CASE("plane-sphere unperturbed flow conserves x^2 + y^2") {
  const ChartPoint z0(S3.spec, Eigen::Vector4d(0.6, -0.2, 0.5, 0.1));
  const Trajectory tr = integrate(unperturbed(S3), z0, 3.0 * kTwoPi, IntegratorConfig{});
  for (const auto& z : tr.states) CHECK(z.head<2>().squaredNorm() == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("monodromy examples") {
  IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-12;
  const Eigen::MatrixXd m1 = monodromy_numeric(unperturbed(S1), ChartPoint(S1.spec, Eigen::Vector3d(0.0, 0.0, 1.0)), kTwoPi, cfg);
  const Eigen::Matrix3d expected = Eigen::Vector3d(1.0, 1.0, std::exp(kTwoPi)).asDiagonal();
  CHECK((m1 - expected).norm() <= 1e-8 * expected.norm());
  const Eigen::MatrixXd m3 =
      monodromy_numeric(unperturbed(S3), ChartPoint(S3.spec, Eigen::Vector4d(0.3, 0.0, 0.0, 0.1)), kTwoPi, cfg);
  CHECK(m3.isIdentity(1e-8));
  CHECK(monodromy_numeric(unperturbed(S3), ChartPoint(S3.spec, Eigen::Vector4d::Zero()), 0.0, cfg) ==
        Eigen::MatrixXd::Identity(4, 4));
}

TEST_CASE("tangent propagation matches finite differences of the flow") {
  const PerturbedField f(S1, equator_example(1.0, 1.0), 0.05);
  IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-12;
  const Eigen::Vector3d z0(0.2, 0.1, 1.05);
  IntegrationOptions opts;
  opts.tangent = true;
  opts.record = false;
  const Eigen::MatrixXd phi = integrate(f, ChartPoint(S1.spec, z0), 2.0, cfg, opts).final_tangent();
  const Eigen::MatrixXd fd = finite_difference_jacobian(
      [&](const Eigen::VectorXd& z) {
        IntegrationOptions o;
        o.record = false;
        return Eigen::VectorXd(integrate(f, ChartPoint(S1.spec, z), 2.0, cfg, o).final_state());
      },
      z0, 1e-5);
  CHECK((phi - fd).norm() <= 1e-6 * phi.norm());
}

TEST_CASE("finite difference Jacobian examples") {
  Eigen::Matrix2d K;
  K << 1.0, -2.0, 0.5, 3.0;
  const Eigen::Vector2d h(0.3, -0.7);
  const Eigen::MatrixXd j1 =
      finite_difference_jacobian([&](const Eigen::VectorXd& a) { return Eigen::VectorXd(K * a + h); }, Eigen::Vector2d(0.2, 0.4), 1e-5);
  CHECK((j1 - K).cwiseAbs().maxCoeff() <= 1e-8);
  auto sq = [](const Eigen::VectorXd& a) { return Eigen::VectorXd(Eigen::Vector2d(a[0] * a[0], a[1])); };
  const Eigen::MatrixXd j2 = finite_difference_jacobian(sq, Eigen::Vector2d(1.0, 1.0), 1e-5);
  CHECK((j2 - Eigen::Matrix2d{{2.0, 0.0}, {0.0, 1.0}}).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_THROWS(finite_difference_jacobian(sq, Eigen::Vector2d(1.0, 1.0), 0.0));
}

TEST_CASE("finite difference error trades truncation against rounding") {
  auto f = [](const Eigen::VectorXd& a) { return Eigen::VectorXd(Eigen::Matrix<double, 1, 1>(std::exp(a[0]))); };
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.5);
  auto err = [&](double step) { return std::abs(finite_difference_jacobian(f, x, step)(0, 0) - std::exp(0.5)); };
  CHECK(err(1e-5) < err(1e-1));
  CHECK(err(1e-5) < err(1e-13));
}

TEST_CASE("rk4 global error drops by 16 under step halving") {
  const ChartPoint z0(S1.spec, Eigen::Vector3d(0.4, 0.2, 1.1));
  const Eigen::VectorXd exact = flow_coords(S1, z0.coords, kTwoPi);
  auto error = [&](int steps) {
    IntegratorConfig cfg;
    cfg.method = Method::Rk4Fixed;
    cfg.initial_step = kTwoPi / steps;
    return (integrate(unperturbed(S1), z0, kTwoPi, cfg).final_state() - exact).norm();
  };
  const double ratio = error(64) / error(128);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("adaptive error tracks the tolerance") {
  const ChartPoint z0(S1.spec, Eigen::Vector3d(0.4, 0.2, 1.1));
  const Eigen::VectorXd exact = flow_coords(S1, z0.coords, kTwoPi);
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    IntegratorConfig cfg;
    cfg.abs_tol = cfg.rel_tol = tol;
    const double err = (integrate(unperturbed(S1), z0, kTwoPi, cfg).final_state() - exact).norm();
    CHECK(err <= 1e3 * tol * exact.norm());
  }
}

TEST_CASE("event is located to the requested time tolerance") {
  IntegrationOptions opts;
  opts.event = [](const Eigen::VectorXd& z) { return z[0] - 1.0; };
  const ChartPoint z0(S1.spec, Eigen::Vector3d(0.25, 0.0, 1.0));
  const Trajectory tr = integrate(unperturbed(S1), z0, kTwoPi, IntegratorConfig{}, opts);
  CHECK(tr.status == IntegrationStatus::EventReached);
  CHECK(std::abs(tr.final_time() - 0.75) <= 1e-11);
}

TEST_CASE("leaving the region stops the integration") {
  IntegrationOptions opts;
  opts.region = ChartRegion(0.05, 1.0);
  const ChartPoint z0(S1.spec, Eigen::Vector3d(0.0, 0.0, 1.5));
  const Trajectory tr = integrate(unperturbed(S1), z0, kTwoPi, IntegratorConfig{}, opts);
  CHECK(tr.status == IntegrationStatus::BoundaryExit);
  CHECK(tr.final_time() < kTwoPi);
  CHECK(tr.final_state()[2] >= 2.0);
}

TEST_CASE("finite-time blow-up raises a stiffness error") {
  const ChartPoint z0(ManifoldSpec(0, 1), Eigen::VectorXd::Constant(1, 1.0));
  CHECK_THROWS_AS(integrate(BlowUp{}, z0, 2.0, IntegratorConfig{}), StiffnessError);
}

TEST_CASE("configuration is validated") {
  IntegratorConfig cfg;
  cfg.max_step = 1.0;
  CHECK_THROWS(cfg.validate());
  CHECK_THROWS(integrate(unperturbed(S1), ChartPoint(S1.spec, Eigen::Vector3d::Zero()), -1.0, IntegratorConfig{}));
}
