#include "orbit_averager/manifold.hpp"

#include <cmath>
#include <utility>

namespace orbit_averager {

namespace {

std::vector<CoordRole> sphere_first_layout(int spheres, int lines) {
  if (spheres < 0 || lines < 0 || spheres + lines < 1)
    throw std::invalid_argument("manifold needs m >= 0, n >= 0 and m + n >= 1");
  std::vector<CoordRole> layout;
  for (int i = 0; i < spheres; ++i) {
    layout.push_back(CoordRole::Azimuth);
    layout.push_back(CoordRole::Polar);
  }
  layout.insert(layout.end(), static_cast<std::size_t>(lines), CoordRole::Line);
  return layout;
}

}  // namespace

ManifoldSpec::ManifoldSpec(int spheres, int lines) : ManifoldSpec(sphere_first_layout(spheres, lines)) {}

ManifoldSpec ManifoldSpec::with_layout(std::vector<CoordRole> layout) { return ManifoldSpec(std::move(layout)); }

ManifoldSpec::ManifoldSpec(std::vector<CoordRole> layout) : layout_(std::move(layout)) {
  if (layout_.empty()) throw std::invalid_argument("manifold layout is empty");
  for (std::size_t i = 0; i < layout_.size(); ++i) {
    const int idx = static_cast<int>(i);
    switch (layout_[i]) {
      case CoordRole::Azimuth:
        if (i + 1 >= layout_.size() || layout_[i + 1] != CoordRole::Polar)
          throw std::invalid_argument("azimuth coordinate must be followed by its polar partner");
        azimuths_.push_back(idx);
        ++spheres_;
        break;
      case CoordRole::Polar:
        if (i == 0 || layout_[i - 1] != CoordRole::Azimuth)
          throw std::invalid_argument("polar coordinate without a preceding azimuth");
        polars_.push_back(idx);
        break;
      case CoordRole::Line:
        lines_idx_.push_back(idx);
        ++lines_;
        break;
    }
  }
}

ChartPoint::ChartPoint(ManifoldSpec s, Eigen::VectorXd c) : coords(std::move(c)), spec(std::move(s)) {
  if (coords.size() != spec.dim())
    throw DimensionMismatch("chart point has " + std::to_string(coords.size()) + " coordinates, manifold has dimension " +
                            std::to_string(spec.dim()));
}

ChartRegion::ChartRegion(double delta0_, double kappa_, std::vector<int> planar_)
    : delta0(delta0_), kappa(kappa_), planar(std::move(planar_)) {
  if (!(delta0 > 0.0 && delta0 < kHalfPi)) throw std::invalid_argument("polar margin must lie in (0, pi/2)");
  if (!(kappa >= 0.0)) throw std::invalid_argument("radial bound must be non-negative");
}

double wrap_angle(double angle) {
  double r = std::remainder(angle, kTwoPi);
  if (r >= kPi) r -= kTwoPi;
  if (r < -kPi) r += kTwoPi;
  return r;
}

double angle_difference(double to, double from) { return wrap_angle(to - from); }

ChartPoint normalize(const ChartPoint& p) {
  if (!p.coords.allFinite()) throw InvalidPoint("chart point has a non-finite coordinate");
  ChartPoint out = p;
  for (int i : p.spec.azimuths()) out.coords[i] = wrap_angle(p.coords[i]);
  return out;
}

bool in_region(const ManifoldSpec& spec, const Eigen::VectorXd& coords, const ChartRegion& region) {
  const double bound = kHalfPi - region.delta0;
  for (int i : spec.polars()) {
    if (!(coords[i] > -bound && coords[i] < bound)) return false;
  }
  if (region.kappa > 0.0) {
    const auto& planar = region.planar.empty() ? spec.line_coords() : region.planar;
    double sq = 0.0;
    for (int i : planar) sq += coords[i] * coords[i];
    if (!(std::sqrt(sq) < 1.0 + region.kappa)) return false;
  }
  return true;
}

bool in_region(const ChartPoint& p, const ChartRegion& region) { return in_region(p.spec, p.coords, region); }

double chart_distance(const ChartPoint& p, const ChartPoint& q) {
  if (!(p.spec == q.spec)) throw DimensionMismatch("chart_distance between points on different manifolds");
  double sq = 0.0;
  for (int i = 0; i < p.spec.dim(); ++i) {
    double d = q.coords[i] - p.coords[i];
    if (p.spec.role(i) == CoordRole::Azimuth) {
      d = std::abs(std::fmod(d, kTwoPi));
      d = std::min(d, kTwoPi - d);
    }
    sq += d * d;
  }
  return std::sqrt(sq);
}

bool near_pole(const ManifoldSpec& spec, const Eigen::VectorXd& coords, double tolerance) {
  for (int i : spec.polars()) {
    if (kHalfPi - std::abs(coords[i]) < tolerance) return true;
  }
  return false;
}

}  // namespace orbit_averager
