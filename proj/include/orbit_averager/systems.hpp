// The three unperturbed linear systems and their affine perturbations.
//
//   S1 on S^2 x R:        theta' = 1, phi' = 0, r' = r - 1
//   S2 on S^2 x S^2 x R:  theta' = 1, phi' = 0, nu' = 1, psi' = 0, r' = r - 1
//   S3 on R^2 x S^2:      x' = -y, y' = x, theta' = 1, phi' = 0
//
// Each is a direct sum of blocks whose flows and fundamental matrices are
// known in closed form.  Perturbations add eps * (A z + b) in chart
// coordinates.
#ifndef ORBIT_AVERAGER_SYSTEMS_HPP
#define ORBIT_AVERAGER_SYSTEMS_HPP

#include "orbit_averager/manifold.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace orbit_averager {

enum class ScenarioId { S1, S2, S3 };

enum class BlockKind {
  Drift,     // theta' = 1
  Constant,  // phi' = 0
  Radial,    // r' = r - 1
  Rotation,  // x' = -y, y' = x   (two coordinates)
};

int block_size(BlockKind kind);

struct Scenario {
  ScenarioId id;
  std::string name;
  ManifoldSpec spec;
  std::vector<BlockKind> blocks;
  /// Dimension k of the averaging projection; k == dim means the whole phase
  /// space is isochronous.
  int projection_dim;
  double period;

  int dim() const { return spec.dim(); }
  /// Point z_alpha on the isochronous set: alpha fills the first k
  /// coordinates, the remaining ones take their isochronous value (r = 1).
  Eigen::VectorXd embed(const Eigen::VectorXd& alpha) const;
  /// Constant part of the unperturbed field (F0(z) = J z + c).
  Eigen::VectorXd drift() const;
  /// D_x F0, constant for these linear systems.
  Eigen::MatrixXd jacobian() const;
  /// Coordinate where the first sphere factor's azimuth lives.
  int first_azimuth() const { return spec.azimuths().front(); }
};

const Scenario& scenario(ScenarioId id);
/// Accepts "S1", "S2", "S3" (case-insensitive).
ScenarioId parse_scenario_id(std::string_view text);
std::string to_string(ScenarioId id);

/// F1(z) = A z + b.  Row i of (A | b) holds the coefficients of the i-th
/// perturbed equation, so the named scalar "c2" is A(2, 1) and
/// "c0" is b(2).
struct AffinePerturbation {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  AffinePerturbation(Eigen::MatrixXd A_, Eigen::VectorXd b_);
  static AffinePerturbation zero(const Scenario& s);

  int dim() const { return static_cast<int>(b.size()); }
  /// Named coefficient access: letter selects the row, index 0 is the
  /// constant term and index j >= 1 the coefficient of coordinate j.
  double& named(char letter, int index);
  double named(char letter, int index) const;

  void check_compatible(const Scenario& s) const;

  AffinePerturbation operator*(double scale) const { return {A * scale, b * scale}; }
};

/// System (3): only a2 = a and b1 = b nonzero.
AffinePerturbation equator_example(double a, double b);
/// System (8): only a2 = a, b1 = b, c4 = c, d3 = d nonzero.
AffinePerturbation plane_sphere_example(double a, double b, double c, double d);

/// Exact unperturbed flow in unwrapped chart coordinates.
Eigen::VectorXd flow_coords(const Scenario& s, const Eigen::VectorXd& z0, double t);
/// Exact unperturbed flow; result normalized.
ChartPoint flow(const Scenario& s, const ChartPoint& z0, double t);

/// exp(D_x F0 t).
Eigen::MatrixXd fundamental_matrix(const Scenario& s, double t);
/// Closed-form inverse, exp(-D_x F0 t).
Eigen::MatrixXd inverse_fundamental_matrix(const Scenario& s, double t);

struct MonodromyDefect {
  Eigen::MatrixXd matrix;  // M^{-1}(0) - M^{-1}(T)
  int k;
  double upper_right_norm;
  double delta_det;

  /// The (k, dim - k) block structure required before averaging over a
  /// k-dimensional isochronous set is meaningful.
  bool condition_holds() const;
};

MonodromyDefect monodromy_defect(const Scenario& s, int k);

/// F0(z) + eps (A z + b), evaluated on whatever representative of the
/// angles it is given (the integrators keep angles unwrapped).
class PerturbedField {
 public:
  PerturbedField(const Scenario& s, AffinePerturbation p, double eps);

  Eigen::VectorXd operator()(const Eigen::VectorXd& z) const { return jac_ * z + offset_; }
  Eigen::VectorXd operator()(const ChartPoint& p) const;
  const Eigen::MatrixXd& jacobian(const Eigen::VectorXd& /*z*/ = {}) const { return jac_; }

  const Scenario& scenario() const { return *scenario_; }
  double epsilon() const { return eps_; }
  int dim() const { return static_cast<int>(offset_.size()); }

 private:
  const Scenario* scenario_;
  double eps_;
  Eigen::MatrixXd jac_;
  Eigen::VectorXd offset_;
};

PerturbedField perturbed_field(const Scenario& s, const AffinePerturbation& p, double eps);

/// Default verification/root region for a scenario: polar margin delta0, the
/// radial coordinate of S1/S2 bounded by |r| < 2, and for S3 the planar
/// disc of radius 1 + kappa with kappa = 2 sqrt(a3^2 + b3^2) / sqrt(D).
ChartRegion default_region(const Scenario& s, const AffinePerturbation& p, double delta0 = 0.05);

}  // namespace orbit_averager

#endif  // ORBIT_AVERAGER_SYSTEMS_HPP
