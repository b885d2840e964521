// Numerical confirmation of predicted limit cycles.
//
// A cycle of the perturbed flow is a fixed point of the first-return map to
// the section {theta = theta_sec}.  The map is computed by integrating from
// the section until the section azimuth has advanced by exactly 2 pi; its
// Jacobian comes from the variational equation projected along the flow
// onto the section.
#ifndef ORBIT_AVERAGER_VERIFIER_HPP
#define ORBIT_AVERAGER_VERIFIER_HPP

#include "orbit_averager/manifold.hpp"
#include "orbit_averager/numerics.hpp"
#include "orbit_averager/systems.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace orbit_averager {

struct SectionSpec {
  /// Coordinate index of the azimuth defining the section.
  int azimuth_index = 0;
  double value = -kPi;

  /// Section coordinates are all coordinates except the azimuth.
  Eigen::VectorXd to_section(const Eigen::VectorXd& z) const;
  Eigen::VectorXd from_section(const Eigen::VectorXd& y) const;
};

/// Section through the first azimuth of the scenario at `value`.
SectionSpec default_section(const Scenario& s, double value = -kPi);

enum class FlightStatus { Returned, BoundaryExit, NearPole, Stiffness, NoReturn };

std::string to_string(FlightStatus status);

struct ReturnResult {
  FlightStatus status = FlightStatus::NoReturn;
  Eigen::VectorXd image;     // section coordinates after one return
  double time = 0.0;         // flight time
  Eigen::MatrixXd jacobian;  // derivative of the return map, (dim-1) x (dim-1)
  Eigen::VectorXd final_state;
  /// max |r - 1| over radial coordinates along the flight (NaN when the
  /// scenario has no radial block).
  double radial_deviation = 0.0;
};

struct VerifierConfig {
  IntegratorConfig integrator{Method::Rk45Adaptive, 1e-12, 1e-12, kTwoPi / 16.0, 1e-3};
  double tolerance = 1e-8;
  int max_iterations = 50;
  int max_halvings = 8;
  /// sigma_min(I - DP) at or below this marks a non-isolated fixed point.
  double degeneracy_threshold = 1e-7;
  /// Multipliers closer to 1 than epsilon * isolation_factor are flagged.
  double isolation_factor = 0.1;
  /// Flights longer than this multiple of the period count as no return.
  double max_flight_periods = 3.0;
};

ReturnResult return_map(const Scenario& s, const AffinePerturbation& p, double eps, const SectionSpec& sec,
                        const Eigen::VectorXd& y, const ChartRegion& region, const VerifierConfig& cfg = {});

enum class CertificateStatus {
  Certified,     // converged, residual below tolerance, isolated
  Degenerate,    // I - DP numerically singular: fixed points form a continuum
  NotConverged,  // Newton ran out of iterations
  BoundaryExit,
  NearPole,
  Stiffness,
  NoReturn,
};

std::string to_string(CertificateStatus status);

struct CycleCertificate {
  double epsilon = 0.0;
  CertificateStatus status = CertificateStatus::NotConverged;
  Eigen::VectorXd section_point;
  std::optional<ChartPoint> state;
  double residual = 0.0;
  std::vector<std::complex<double>> multipliers;
  /// False when some multiplier is within epsilon * isolation_factor of 1.
  bool hyperbolic = false;
  double distance = 0.0;
  double period = 0.0;
  double radial_deviation = 0.0;
  /// det(DP - I) at the final iterate.
  double det_dp_minus_identity = 0.0;
  int iterations = 0;

  bool certified() const { return status == CertificateStatus::Certified; }
};

/// Damped Newton on y - P(y) from `guess`.  `prediction` is the averaging
/// bifurcation point used for the distance column.
CycleCertificate find_fixed_point(const Scenario& s, const AffinePerturbation& p, double eps, const SectionSpec& sec,
                                  const Eigen::VectorXd& guess, const ChartPoint& prediction, const ChartRegion& region,
                                  const VerifierConfig& cfg = {});

struct SweepTable {
  std::vector<CycleCertificate> rows;
  /// Least-squares slope of log(distance) against log(eps) over certified
  /// rows with positive distance; absent with fewer than two such rows.
  std::optional<double> slope;
  int fitted_rows = 0;

  bool all_certified() const;
};

SweepTable epsilon_sweep(const Scenario& s, const AffinePerturbation& p, const SectionSpec& sec,
                         const ChartPoint& prediction, const std::vector<double>& epsilons, const ChartRegion& region,
                         const VerifierConfig& cfg = {}, int jobs = 1);

/// Least-squares slope of y against x.
std::optional<double> fit_slope(const std::vector<double>& x, const std::vector<double>& y);

/// epsilon, y_1..y_{d-1}, residual, mu_i re/im pairs, distance, period,
/// radial_deviation, hyperbolic, status.  17 significant digits.
void write_sweep_csv(std::ostream& os, const SweepTable& table, int section_dim);

}  // namespace orbit_averager

#endif  // ORBIT_AVERAGER_VERIFIER_HPP
