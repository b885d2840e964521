// Chart coordinates on (S^2)^m x R^n.
//
// Every sphere factor contributes an (azimuth, polar) pair, every line factor
// one Cartesian coordinate.  The order of the factors is carried explicitly
// by the layout so scenarios whose natural order puts the plane first
// (x, y, theta, phi) use the same machinery as the sphere-first default.
#ifndef ORBIT_AVERAGER_MANIFOLD_HPP
#define ORBIT_AVERAGER_MANIFOLD_HPP

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbit_averager {

struct InvalidPoint : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class CoordRole { Azimuth, Polar, Line };

class ManifoldSpec {
 public:
  /// Sphere-first layout (theta_1, phi_1, ..., theta_m, phi_m, x_1, ..., x_n).
  ManifoldSpec(int spheres, int lines);

  /// Arbitrary factor order.  Every Azimuth must be immediately followed by
  /// its Polar partner.
  static ManifoldSpec with_layout(std::vector<CoordRole> layout);

  int spheres() const { return spheres_; }
  int lines() const { return lines_; }
  int dim() const { return static_cast<int>(layout_.size()); }

  CoordRole role(int i) const { return layout_.at(static_cast<std::size_t>(i)); }
  const std::vector<CoordRole>& layout() const { return layout_; }
  const std::vector<int>& azimuths() const { return azimuths_; }
  const std::vector<int>& polars() const { return polars_; }
  const std::vector<int>& line_coords() const { return lines_idx_; }

  bool operator==(const ManifoldSpec& other) const { return layout_ == other.layout_; }

 private:
  explicit ManifoldSpec(std::vector<CoordRole> layout);

  int spheres_ = 0;
  int lines_ = 0;
  std::vector<CoordRole> layout_;
  std::vector<int> azimuths_;
  std::vector<int> polars_;
  std::vector<int> lines_idx_;
};

struct ChartPoint {
  Eigen::VectorXd coords;
  ManifoldSpec spec;

  ChartPoint(ManifoldSpec s, Eigen::VectorXd c);
};

struct ChartRegion {
  double delta0 = 0.05;
  /// Radial bound on the planar coordinates; 0 leaves them unbounded.
  double kappa = 0.0;
  /// Coordinates whose Euclidean norm must stay below 1 + kappa.  Empty means
  /// all line coordinates.
  std::vector<int> planar;

  ChartRegion() = default;
  ChartRegion(double delta0_, double kappa_, std::vector<int> planar_ = {});
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

/// Polar distance to a pole below which trajectories are flagged.
inline constexpr double kNearPoleTolerance = 1e-3;

/// Reduces an angle into [-pi, pi).  Exact (no rounding) for inputs already
/// in range.
double wrap_angle(double angle);

/// Shortest signed arc from `from` to `to`, in [-pi, pi).
double angle_difference(double to, double from);

ChartPoint normalize(const ChartPoint& p);

bool in_region(const ChartPoint& p, const ChartRegion& region);

/// Raw-coordinate variant used inside integration loops (angles may be
/// unwrapped; only polar and planar coordinates are inspected).
bool in_region(const ManifoldSpec& spec, const Eigen::VectorXd& coords, const ChartRegion& region);

double chart_distance(const ChartPoint& p, const ChartPoint& q);

/// True when some polar coordinate is within `tolerance` of +-pi/2.
bool near_pole(const ManifoldSpec& spec, const Eigen::VectorXd& coords,
               double tolerance = kNearPoleTolerance);

}  // namespace orbit_averager

#endif  // ORBIT_AVERAGER_MANIFOLD_HPP
