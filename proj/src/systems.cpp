#include "orbit_averager/systems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace orbit_averager {

int block_size(BlockKind kind) { return kind == BlockKind::Rotation ? 2 : 1; }

namespace {

Scenario make_scenario(ScenarioId id) {
  using enum BlockKind;
  switch (id) {
    case ScenarioId::S1:
      return {id, "S1", ManifoldSpec(1, 1), {Drift, Constant, Radial}, 2, kTwoPi};
    case ScenarioId::S2:
      return {id, "S2", ManifoldSpec(2, 1), {Drift, Constant, Drift, Constant, Radial}, 4, kTwoPi};
    case ScenarioId::S3:
      return {id,
              "S3",
              ManifoldSpec::with_layout({CoordRole::Line, CoordRole::Line, CoordRole::Azimuth, CoordRole::Polar}),
              {Rotation, Drift, Constant},
              4,
              kTwoPi};
  }
  throw std::invalid_argument("unknown scenario");
}

}  // namespace

const Scenario& scenario(ScenarioId id) {
  static const Scenario s1 = make_scenario(ScenarioId::S1);
  static const Scenario s2 = make_scenario(ScenarioId::S2);
  static const Scenario s3 = make_scenario(ScenarioId::S3);
  switch (id) {
    case ScenarioId::S1: return s1;
    case ScenarioId::S2: return s2;
    case ScenarioId::S3: return s3;
  }
  throw std::invalid_argument("unknown scenario");
}

ScenarioId parse_scenario_id(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "S1") return ScenarioId::S1;
  if (upper == "S2") return ScenarioId::S2;
  if (upper == "S3") return ScenarioId::S3;
  throw std::invalid_argument("unknown scenario id '" + std::string(text) + "' (expected S1, S2 or S3)");
}

std::string to_string(ScenarioId id) { return scenario(id).name; }

Eigen::VectorXd Scenario::embed(const Eigen::VectorXd& alpha) const {
  if (alpha.size() != projection_dim)
    throw DimensionMismatch("expected " + std::to_string(projection_dim) + " averaging coordinates");
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim());
  z.head(projection_dim) = alpha;
  int row = 0;
  for (BlockKind kind : blocks) {
    if (kind == BlockKind::Radial && row >= projection_dim) z[row] = 1.0;
    row += block_size(kind);
  }
  return z;
}

Eigen::VectorXd Scenario::drift() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim());
  int row = 0;
  for (BlockKind kind : blocks) {
    if (kind == BlockKind::Drift) c[row] = 1.0;
    if (kind == BlockKind::Radial) c[row] = -1.0;
    row += block_size(kind);
  }
  return c;
}

Eigen::MatrixXd Scenario::jacobian() const {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim(), dim());
  int row = 0;
  for (BlockKind kind : blocks) {
    if (kind == BlockKind::Radial) j(row, row) = 1.0;
    if (kind == BlockKind::Rotation) {
      j(row, row + 1) = -1.0;
      j(row + 1, row) = 1.0;
    }
    row += block_size(kind);
  }
  return j;
}

AffinePerturbation::AffinePerturbation(Eigen::MatrixXd A_, Eigen::VectorXd b_) : A(std::move(A_)), b(std::move(b_)) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw DimensionMismatch("perturbation block must be dim x (dim + 1)");
  if (!A.allFinite() || !b.allFinite()) throw std::invalid_argument("perturbation coefficients must be finite");
}

AffinePerturbation AffinePerturbation::zero(const Scenario& s) {
  return {Eigen::MatrixXd::Zero(s.dim(), s.dim()), Eigen::VectorXd::Zero(s.dim())};
}

double& AffinePerturbation::named(char letter, int index) {
  const int row = std::tolower(static_cast<unsigned char>(letter)) - 'a';
  if (row < 0 || row >= dim() || index < 0 || index > dim())
    throw std::out_of_range(std::string("coefficient ") + letter + std::to_string(index) +
                            " does not exist for dimension " + std::to_string(dim()));
  return index == 0 ? b[row] : A(row, index - 1);
}

double AffinePerturbation::named(char letter, int index) const {
  return const_cast<AffinePerturbation*>(this)->named(letter, index);
}

void AffinePerturbation::check_compatible(const Scenario& s) const {
  if (dim() != s.dim())
    throw DimensionMismatch("perturbation has dimension " + std::to_string(dim()) + ", scenario " + s.name +
                            " has dimension " + std::to_string(s.dim()));
}

AffinePerturbation equator_example(double a, double b) {
  auto p = AffinePerturbation::zero(scenario(ScenarioId::S1));
  p.named('a', 2) = a;
  p.named('b', 1) = b;
  return p;
}

AffinePerturbation plane_sphere_example(double a, double b, double c, double d) {
  auto p = AffinePerturbation::zero(scenario(ScenarioId::S3));
  p.named('a', 2) = a;
  p.named('b', 1) = b;
  p.named('c', 4) = c;
  p.named('d', 3) = d;
  return p;
}

Eigen::VectorXd flow_coords(const Scenario& s, const Eigen::VectorXd& z0, double t) {
  if (z0.size() != s.dim()) throw DimensionMismatch("initial condition does not match scenario dimension");
  Eigen::VectorXd z = z0;
  int row = 0;
  for (BlockKind kind : s.blocks) {
    switch (kind) {
      case BlockKind::Drift: z[row] = z0[row] + t; break;
      case BlockKind::Constant: break;
      case BlockKind::Radial: z[row] = (z0[row] - 1.0) * std::exp(t) + 1.0; break;
      case BlockKind::Rotation: {
        const double c = std::cos(t), sn = std::sin(t);
        z[row] = z0[row] * c - z0[row + 1] * sn;
        z[row + 1] = z0[row] * sn + z0[row + 1] * c;
        break;
      }
    }
    row += block_size(kind);
  }
  return z;
}

ChartPoint flow(const Scenario& s, const ChartPoint& z0, double t) {
  if (!(z0.spec == s.spec)) throw DimensionMismatch("chart point is not on the scenario manifold");
  return normalize(ChartPoint(s.spec, flow_coords(s, z0.coords, t)));
}

namespace {

Eigen::MatrixXd block_exponential(const Scenario& s, double t) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(s.dim(), s.dim());
  int row = 0;
  for (BlockKind kind : s.blocks) {
    if (kind == BlockKind::Radial) m(row, row) = std::exp(t);
    if (kind == BlockKind::Rotation) {
      const double c = std::cos(t), sn = std::sin(t);
      m.block<2, 2>(row, row) << c, -sn, sn, c;
    }
    row += block_size(kind);
  }
  return m;
}

}  // namespace

Eigen::MatrixXd fundamental_matrix(const Scenario& s, double t) { return block_exponential(s, t); }

Eigen::MatrixXd inverse_fundamental_matrix(const Scenario& s, double t) { return block_exponential(s, -t); }

bool MonodromyDefect::condition_holds() const {
  const int dim = static_cast<int>(matrix.rows());
  return k == dim || (upper_right_norm == 0.0 && delta_det != 0.0);
}

MonodromyDefect monodromy_defect(const Scenario& s, int k) {
  const int dim = s.dim();
  if (k < 1 || k > dim) throw std::invalid_argument("projection dimension must lie in [1, dim]");
  MonodromyDefect d;
  d.matrix = inverse_fundamental_matrix(s, 0.0) - inverse_fundamental_matrix(s, s.period);
  d.k = k;
  d.upper_right_norm = k == dim ? 0.0 : d.matrix.topRightCorner(k, dim - k).norm();
  d.delta_det = k == dim ? 1.0 : d.matrix.bottomRightCorner(dim - k, dim - k).determinant();
  return d;
}

PerturbedField::PerturbedField(const Scenario& s, AffinePerturbation p, double eps) : scenario_(&s), eps_(eps) {
  p.check_compatible(s);
  if (!(eps >= 0.0)) throw std::invalid_argument("perturbation parameter must be non-negative");
  jac_ = s.jacobian() + eps * p.A;
  offset_ = s.drift() + eps * p.b;
}

Eigen::VectorXd PerturbedField::operator()(const ChartPoint& p) const {
  if (!(p.spec == scenario_->spec)) throw DimensionMismatch("chart point is not on the scenario manifold");
  return (*this)(p.coords);
}

PerturbedField perturbed_field(const Scenario& s, const AffinePerturbation& p, double eps) {
  return PerturbedField(s, p, eps);
}

ChartRegion default_region(const Scenario& s, const AffinePerturbation& p, double delta0) {
  p.check_compatible(s);
  if (s.id == ScenarioId::S3) {
    const double a1 = p.named('a', 1), a2 = p.named('a', 2), a3 = p.named('a', 3);
    const double b1 = p.named('b', 1), b2 = p.named('b', 2), b3 = p.named('b', 3);
    const double denom = (a1 + b2) * (a1 + b2) + (a2 - b1) * (a2 - b1);
    const double kappa = denom > 0.0 ? 2.0 * std::hypot(a3, b3) / std::sqrt(denom) : 0.0;
    return ChartRegion(delta0, kappa, {0, 1});
  }
  return ChartRegion(delta0, 1.0, s.spec.line_coords());
}

}  // namespace orbit_averager
