// First-order averaged function of a perturbed linear system
//
//     F(alpha) = xi( int_0^T M^{-1}(t) F1(x(t, z_alpha, 0)) dt ),
//
// built symbolically: the periodic solution x(t, z_alpha, 0) and M^{-1}(t) are
// exponential-trigonometric polynomials, F1 is affine, so the integrand is an
// affine function of alpha whose coefficients are TermSums.  Integrating
// those exactly factors F as K alpha + h.
#ifndef ORBIT_AVERAGER_AVERAGING_HPP
#define ORBIT_AVERAGER_AVERAGING_HPP

#include "orbit_averager/integrand.hpp"
#include "orbit_averager/manifold.hpp"
#include "orbit_averager/systems.hpp"

#include <Eigen/Dense>

#include <optional>
#include <utility>

namespace orbit_averager {

struct AveragedMap {
  const Scenario* scenario = nullptr;
  int k = 0;
  Eigen::MatrixXd K;
  Eigen::VectorXd h;
  /// Integrand of each projected component, k x (k + 1): column j < k is the
  /// coefficient of alpha_j, the last column the alpha-independent part.
  SymbolicMatrix integrand;

  Eigen::VectorXd operator()(const Eigen::VectorXd& alpha) const { return K * alpha + h; }
};

struct RootResult {
  std::optional<Eigen::VectorXd> root;  // alpha*, as solved (angles unwrapped)
  std::optional<ChartPoint> point;      // z_{alpha*}, normalized
  double det = 0.0;
  bool in_region = false;
  bool degenerate = true;
};

/// Symbolic x(t, z0, 0) = Phi(t) z0 + g(t) as a dim x (dim + 1) matrix
/// (last column g).
SymbolicMatrix symbolic_solution(const Scenario& s);
/// Symbolic M^{-1}(t).
SymbolicMatrix symbolic_inverse_fundamental(const Scenario& s);

AveragedMap averaged_map(const Scenario& s, const AffinePerturbation& p);

/// |det K| at or below this is treated as singular:
/// 1e-12 * (1 + ||K||_inf^k).
double singular_threshold(const Eigen::MatrixXd& K);

RootResult solve_root(const AveragedMap& map, const ChartRegion& region);

double jacobian_det(const AveragedMap& map);

/// Quadrature of the defining integral, independent of the symbolic path.
Eigen::VectorXd numeric_averaged(const Scenario& s, const AffinePerturbation& p, const Eigen::VectorXd& alpha,
                                 int nodes = 64, int panels = 1);

// Closed-form root formulas for the three families.  These are regression
// anchors for solve_root; the S1 polar formula is the one obtained by
// solving F = 0 (its numerator carries b1 * pi).

Eigen::Vector2d s1_root_formula(const AffinePerturbation& p);
/// a1 b2 - a2 b1
double s1_determinant_condition(const AffinePerturbation& p);

/// Linear system for (theta0, phi0, nu0, psi0) whose solution is the S2 root.
std::pair<Eigen::Matrix4d, Eigen::Vector4d> s2_root_system(const AffinePerturbation& p);
/// Determinant of the 4 x 4 coefficient minor (rows a..d, columns 1..4).
double s2_minor_determinant(const AffinePerturbation& p);

Eigen::Vector4d s3_root_formula(const AffinePerturbation& p);
/// The two 2 x 2 determinants that must be nonzero for S3:
/// (b2 + a1)^2 + (a2 - b1)^2 and c3 d4 - c4 d3.
std::pair<double, double> s3_determinant_conditions(const AffinePerturbation& p);

}  // namespace orbit_averager

#endif  // ORBIT_AVERAGER_AVERAGING_HPP
