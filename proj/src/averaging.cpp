#include "orbit_averager/averaging.hpp"

#include "orbit_averager/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace orbit_averager {

SymbolicMatrix symbolic_solution(const Scenario& s) {
  const int n = s.dim();
  SymbolicMatrix x = SymbolicMatrix::Constant(n, n + 1, Integrand());
  int row = 0;
  for (BlockKind kind : s.blocks) {
    switch (kind) {
      case BlockKind::Drift:
        x(row, row) = Integrand(1.0);
        x(row, n) = Integrand::t();
        break;
      case BlockKind::Constant:
        x(row, row) = Integrand(1.0);
        break;
      case BlockKind::Radial:
        x(row, row) = Integrand::exp(1.0);
        x(row, n) = Integrand(1.0) - Integrand::exp(1.0);
        break;
      case BlockKind::Rotation:
        x(row, row) = Integrand::cos(1.0);
        x(row, row + 1) = -Integrand::sin(1.0);
        x(row + 1, row) = Integrand::sin(1.0);
        x(row + 1, row + 1) = Integrand::cos(1.0);
        break;
    }
    row += block_size(kind);
  }
  return x;
}

SymbolicMatrix symbolic_inverse_fundamental(const Scenario& s) {
  const int n = s.dim();
  SymbolicMatrix m = SymbolicMatrix::Constant(n, n, Integrand());
  int row = 0;
  for (BlockKind kind : s.blocks) {
    switch (kind) {
      case BlockKind::Drift:
      case BlockKind::Constant:
        m(row, row) = Integrand(1.0);
        break;
      case BlockKind::Radial:
        m(row, row) = Integrand::exp(-1.0);
        break;
      case BlockKind::Rotation:
        m(row, row) = Integrand::cos(1.0);
        m(row, row + 1) = Integrand::sin(1.0);
        m(row + 1, row) = -Integrand::sin(1.0);
        m(row + 1, row + 1) = Integrand::cos(1.0);
        break;
    }
    row += block_size(kind);
  }
  return m;
}

AveragedMap averaged_map(const Scenario& s, const AffinePerturbation& p) {
  p.check_compatible(s);
  const int n = s.dim();
  const int k = s.projection_dim;

  // F1(x(t)) = A (Phi z0 + g) + b, still affine in z0.
  const SymbolicMatrix x = symbolic_solution(s);
  SymbolicMatrix f1 = p.A.cast<Integrand>() * x;
  for (int i = 0; i < n; ++i) f1(i, n) += Integrand(p.b[i]);

  const SymbolicMatrix integrand = symbolic_inverse_fundamental(s) * f1;

  // z0 = E alpha + e0 restricts to the isochronous set.
  const Eigen::MatrixXd embedding = Eigen::MatrixXd::Identity(n, k);
  const Eigen::VectorXd base = s.embed(Eigen::VectorXd::Zero(k));
  SymbolicMatrix reduced(n, k + 1);
  reduced.leftCols(k) = integrand.leftCols(n) * embedding.cast<Integrand>();
  reduced.col(k) = integrand.leftCols(n) * base.cast<Integrand>() + integrand.col(n);

  AveragedMap map;
  map.scenario = &s;
  map.k = k;
  map.integrand = reduced.topRows(k);
  const Eigen::MatrixXd integrated = definite_integral(SymbolicMatrix(map.integrand), s.period);
  map.K = integrated.leftCols(k);
  map.h = integrated.col(k);
  return map;
}

double singular_threshold(const Eigen::MatrixXd& K) {
  const double inf_norm = K.rows() == 0 ? 0.0 : K.cwiseAbs().rowwise().sum().maxCoeff();
  return 1e-12 * (1.0 + std::pow(inf_norm, static_cast<double>(K.rows())));
}

RootResult solve_root(const AveragedMap& map, const ChartRegion& region) {
  RootResult result;
  result.det = jacobian_det(map);
  result.degenerate = !(std::abs(result.det) > singular_threshold(map.K));
  if (result.degenerate) return result;
  Eigen::VectorXd alpha = map.K.fullPivLu().solve(-map.h);
  if (!alpha.allFinite()) {
    result.degenerate = true;
    return result;
  }
  ChartPoint point = normalize(ChartPoint(map.scenario->spec, map.scenario->embed(alpha)));
  result.in_region = in_region(point, region);
  result.root = std::move(alpha);
  result.point = std::move(point);
  return result;
}

double jacobian_det(const AveragedMap& map) { return map.K.determinant(); }

Eigen::VectorXd numeric_averaged(const Scenario& s, const AffinePerturbation& p, const Eigen::VectorXd& alpha,
                                 int nodes, int panels) {
  p.check_compatible(s);
  if (nodes < 16) throw std::invalid_argument("numeric_averaged needs at least 16 nodes");
  const Eigen::VectorXd z = s.embed(alpha);
  const GaussLegendre<double> rule(nodes);
  auto integrand = [&](double t) -> Eigen::VectorXd {
    return inverse_fundamental_matrix(s, t) * (p.A * flow_coords(s, z, t) + p.b);
  };
  const Eigen::VectorXd full = integrate(integrand, 0.0, s.period, rule, panels);
  return full.head(s.projection_dim);
}

Eigen::Vector2d s1_root_formula(const AffinePerturbation& p) {
  const double a0 = p.named('a', 0), a1 = p.named('a', 1), a2 = p.named('a', 2), a3 = p.named('a', 3);
  const double b0 = p.named('b', 0), b1 = p.named('b', 1), b2 = p.named('b', 2), b3 = p.named('b', 3);
  const double det = a1 * b2 - a2 * b1;
  const double a_const = a0 + a3 + a1 * kPi;
  const double b_const = b0 + b3 + b1 * kPi;
  return {(a2 * b_const - b2 * a_const) / det, (b1 * a_const - a1 * b_const) / det};
}

double s1_determinant_condition(const AffinePerturbation& p) {
  return p.named('a', 1) * p.named('b', 2) - p.named('a', 2) * p.named('b', 1);
}

std::pair<Eigen::Matrix4d, Eigen::Vector4d> s2_root_system(const AffinePerturbation& p) {
  Eigen::Matrix4d m;
  Eigen::Vector4d rhs;
  const char rows[] = {'a', 'b', 'c', 'd'};
  for (int i = 0; i < 4; ++i) {
    const char r = rows[i];
    for (int j = 0; j < 4; ++j) m(i, j) = p.named(r, j + 1);
    rhs[i] = -p.named(r, 0) - p.named(r, 1) * kPi - p.named(r, 3) * kPi - p.named(r, 5);
  }
  return {m, rhs};
}

double s2_minor_determinant(const AffinePerturbation& p) { return s2_root_system(p).first.determinant(); }

Eigen::Vector4d s3_root_formula(const AffinePerturbation& p) {
  const double a1 = p.named('a', 1), a2 = p.named('a', 2), a3 = p.named('a', 3);
  const double b1 = p.named('b', 1), b2 = p.named('b', 2), b3 = p.named('b', 3);
  const double c0 = p.named('c', 0), c3 = p.named('c', 3), c4 = p.named('c', 4);
  const double d0 = p.named('d', 0), d3 = p.named('d', 3), d4 = p.named('d', 4);
  const double planar = b2 * b2 + b1 * b1 + a2 * a2 + a1 * a1 + 2 * a1 * b2 - 2 * a2 * b1;
  const double sphere = c3 * d4 - c4 * d3;
  return {((2 * b2 + 2 * a1) * b3 - 2 * a3 * b1 + 2 * a2 * a3) / planar,
          -((2 * b1 - 2 * a2) * b3 + 2 * a3 * b2 + 2 * a1 * a3) / planar,
          -((kPi * c3 + c0) * d4 - kPi * c4 * d3 - c4 * d0) / sphere, (c0 * d3 - c3 * d0) / sphere};
}

std::pair<double, double> s3_determinant_conditions(const AffinePerturbation& p) {
  const double a1 = p.named('a', 1), a2 = p.named('a', 2);
  const double b1 = p.named('b', 1), b2 = p.named('b', 2);
  const double planar = (b2 + a1) * (b2 + a1) - (a2 - b1) * (b1 - a2);
  const double sphere = p.named('c', 3) * p.named('d', 4) - p.named('c', 4) * p.named('d', 3);
  return {planar, sphere};
}

}  // namespace orbit_averager
