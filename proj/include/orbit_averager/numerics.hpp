// Explicit Runge-Kutta integration with optional tangent (variational)
// propagation and section-crossing events.
//
// Angles are integrated unwrapped; nothing in here ever normalizes a state.
#ifndef ORBIT_AVERAGER_NUMERICS_HPP
#define ORBIT_AVERAGER_NUMERICS_HPP

#include "orbit_averager/manifold.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace orbit_averager {

enum class Method { Rk4Fixed, Rk45Adaptive };

struct IntegratorConfig {
  Method method = Method::Rk45Adaptive;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = kTwoPi / 16.0;
  /// Starting step for rk45-adaptive; the fixed step for rk4-fixed.
  double initial_step = 1e-3;

  void validate() const {
    if (!(abs_tol > 0.0 && rel_tol > 0.0)) throw std::invalid_argument("integrator tolerances must be positive");
    if (!(max_step > 0.0 && max_step <= kTwoPi / 16.0 * (1.0 + 1e-12)))
      throw std::invalid_argument("integrator max step must lie in (0, 2 pi / 16]");
    if (!(initial_step > 0.0)) throw std::invalid_argument("integrator initial step must be positive");
  }
};

struct StiffnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class IntegrationStatus { Completed, EventReached, BoundaryExit };

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  /// Filled only when tangent propagation was requested.
  std::vector<Eigen::MatrixXd> tangents;
  IntegrationStatus status = IntegrationStatus::Completed;
  bool near_pole = false;
  int accepted_steps = 0;
  int rejected_steps = 0;

  double final_time() const { return times.back(); }
  const Eigen::VectorXd& final_state() const { return states.back(); }
  const Eigen::MatrixXd& final_tangent() const { return tangents.back(); }

  /// Linear interpolation between stored samples.
  Eigen::VectorXd interpolate(double t) const {
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto i = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return (1.0 - w) * states[i - 1] + w * states[i];
  }
};

struct IntegrationOptions {
  /// Keep every accepted step (otherwise only the endpoints).
  bool record = true;
  /// Propagate the fundamental matrix of the variational equation from the
  /// identity; requires field.jacobian(z).
  bool tangent = false;
  /// Stop when the trajectory leaves this region.
  std::optional<ChartRegion> region;
  /// Stop at the first upward zero crossing of this function.
  std::function<double(const Eigen::VectorXd&)> event;
  double event_time_tol = 1e-12;
};

template <typename Field>
concept VectorField = requires(const Field& f, const Eigen::VectorXd& z) {
  { f(z) } -> std::convertible_to<Eigen::VectorXd>;
};

template <typename Field>
concept VectorFieldWithJacobian = VectorField<Field> && requires(const Field& f, const Eigen::VectorXd& z) {
  { f.jacobian(z) } -> std::convertible_to<Eigen::MatrixXd>;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
  static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
  };
  static constexpr std::array<double, 7> b{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
  static constexpr std::array<double, 7> e{71.0 / 57600,      0.0, -71.0 / 16695, 71.0 / 1920,
                                           -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
};

/// The augmented right-hand side: state followed (optionally) by the
/// column-major tangent matrix.
template <typename Field>
class AugmentedSystem {
 public:
  AugmentedSystem(const Field& f, int dim, bool tangent) : f_(f), dim_(dim), tangent_(tangent) {}

  int size() const { return tangent_ ? dim_ + dim_ * dim_ : dim_; }

  Eigen::VectorXd operator()(const Eigen::VectorXd& y) const {
    Eigen::VectorXd dy(y.size());
    const Eigen::VectorXd z = y.head(dim_);
    dy.head(dim_) = f_(z);
    if constexpr (VectorFieldWithJacobian<Field>) {
      if (tangent_) {
        const Eigen::Map<const Eigen::MatrixXd> phi(y.data() + dim_, dim_, dim_);
        Eigen::Map<Eigen::MatrixXd> dphi(dy.data() + dim_, dim_, dim_);
        dphi.noalias() = f_.jacobian(z) * phi;
      }
    }
    return dy;
  }

 private:
  const Field& f_;
  int dim_;
  bool tangent_;
};

template <typename System>
Eigen::VectorXd rk4_step(const System& sys, const Eigen::VectorXd& y, double h) {
  const Eigen::VectorXd k1 = sys(y);
  const Eigen::VectorXd k2 = sys(y + 0.5 * h * k1);
  const Eigen::VectorXd k3 = sys(y + 0.5 * h * k2);
  const Eigen::VectorXd k4 = sys(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One Dormand-Prince step; returns the fifth-order solution and writes the
/// embedded error estimate.
template <typename System>
Eigen::VectorXd dopri_step(const System& sys, const Eigen::VectorXd& y, double h, Eigen::VectorXd* error) {
  using T = DormandPrince;
  std::array<Eigen::VectorXd, 7> k;
  k[0] = sys(y);
  for (int s = 1; s < 7; ++s) {
    Eigen::VectorXd stage = y;
    for (int j = 0; j < s; ++j) {
      if (T::a[s][j] != 0.0) stage.noalias() += (h * T::a[s][j]) * k[j];
    }
    k[s] = sys(stage);
  }
  Eigen::VectorXd out = y;
  for (int s = 0; s < 7; ++s) {
    if (T::b[s] != 0.0) out.noalias() += (h * T::b[s]) * k[s];
  }
  if (error) {
    error->setZero(y.size());
    for (int s = 0; s < 7; ++s) {
      if (T::e[s] != 0.0) error->noalias() += (h * T::e[s]) * k[s];
    }
  }
  return out;
}

}  // namespace detail

/// Integrates z' = field(z) from `z0` over [0, t_end].
///
/// Region exits and events end the integration with the corresponding status;
/// a step size collapsing below 1e-14 (relative to t) throws StiffnessError.
template <VectorField Field>
Trajectory integrate(const Field& field, const ChartPoint& z0, double t_end, const IntegratorConfig& cfg,
                     const IntegrationOptions& opts = {}) {
  cfg.validate();
  if (!(t_end >= 0.0)) throw std::invalid_argument("integration end time must be non-negative");
  if (!z0.coords.allFinite()) throw InvalidPoint("initial condition is not finite");
  if constexpr (!VectorFieldWithJacobian<Field>) {
    if (opts.tangent) throw std::invalid_argument("tangent propagation needs a field with a Jacobian");
  }

  const int dim = z0.spec.dim();
  const detail::AugmentedSystem<Field> sys(field, dim, opts.tangent);
  Eigen::VectorXd y(sys.size());
  y.head(dim) = z0.coords;
  if (opts.tangent) {
    Eigen::Map<Eigen::MatrixXd>(y.data() + dim, dim, dim).setIdentity();
  }

  Trajectory traj;
  auto push = [&](double t, const Eigen::VectorXd& state) {
    traj.times.push_back(t);
    traj.states.push_back(state.head(dim));
    if (opts.tangent) traj.tangents.push_back(Eigen::Map<const Eigen::MatrixXd>(state.data() + dim, dim, dim));
  };
  push(0.0, y);
  traj.near_pole = near_pole(z0.spec, z0.coords);
  if (t_end == 0.0) return traj;

  const bool adaptive = cfg.method == Method::Rk45Adaptive;
  auto single_step = [&](const Eigen::VectorXd& from, double h) {
    return adaptive ? detail::dopri_step(sys, from, h, nullptr) : detail::rk4_step(sys, from, h);
  };

  double t = 0.0;
  double h = adaptive ? std::min(cfg.initial_step, cfg.max_step) : cfg.initial_step;
  if (!adaptive) {
    const double steps = std::ceil(t_end / h - 1e-9);
    h = t_end / std::max(1.0, steps);
  }
  double g_prev = opts.event ? opts.event(y.head(dim)) : 0.0;
  Eigen::VectorXd err;

  while (t < t_end) {
    const double remaining = t_end - t;
    const bool last = remaining <= h * (1.0 + 1e-9);
    const double step = last ? remaining : h;
    if (step <= 1e-14 * std::max(1.0, std::abs(t))) {
      throw StiffnessError("step size underflow at t = " + std::to_string(t));
    }
    Eigen::VectorXd y_new;
    double next_h = h;
    if (adaptive) {
      y_new = detail::dopri_step(sys, y, step, &err);
      double err_norm = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        err_norm = std::max(err_norm, std::abs(err[i]) / scale);
      }
      if (!y_new.allFinite() || !std::isfinite(err_norm)) err_norm = 1e10;
      const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      next_h = std::min(cfg.max_step, step * factor);
      if (err_norm > 1.0) {
        ++traj.rejected_steps;
        h = next_h;
        continue;
      }
    } else {
      y_new = detail::rk4_step(sys, y, step);
      if (!y_new.allFinite()) throw StiffnessError("non-finite state at t = " + std::to_string(t));
    }
    ++traj.accepted_steps;

    if (opts.event) {
      const double g_new = opts.event(y_new.head(dim));
      if (g_prev < 0.0 && g_new >= 0.0) {
        // Bisection on the step length from the last accepted state.
        double lo = 0.0, hi = step;
        Eigen::VectorXd y_hi = y_new;
        while (hi - lo > opts.event_time_tol) {
          const double mid = 0.5 * (lo + hi);
          Eigen::VectorXd y_mid = single_step(y, mid);
          if (opts.event(y_mid.head(dim)) >= 0.0) {
            hi = mid;
            y_hi = std::move(y_mid);
          } else {
            lo = mid;
          }
        }
        push(t + hi, y_hi);
        traj.status = IntegrationStatus::EventReached;
        traj.near_pole = traj.near_pole || near_pole(z0.spec, y_hi.head(dim));
        return traj;
      }
      g_prev = g_new;
    }

    t = last ? t_end : t + step;
    y = std::move(y_new);
    h = next_h;
    traj.near_pole = traj.near_pole || near_pole(z0.spec, y.head(dim));
    if (opts.record || t >= t_end) push(t, y);

    if (opts.region && !in_region(z0.spec, y.head(dim), *opts.region)) {
      if (!opts.record) push(t, y);
      traj.status = IntegrationStatus::BoundaryExit;
      return traj;
    }
  }
  return traj;
}

/// Fundamental matrix of the variational equation along the trajectory from
/// z0, evaluated at time T.
template <VectorFieldWithJacobian Field>
Eigen::MatrixXd monodromy_numeric(const Field& field, const ChartPoint& z0, double period, const IntegratorConfig& cfg) {
  if (period == 0.0) return Eigen::MatrixXd::Identity(z0.spec.dim(), z0.spec.dim());
  IntegrationOptions opts;
  opts.record = false;
  opts.tangent = true;
  return integrate(field, z0, period, cfg, opts).final_tangent();
}

/// Central-difference Jacobian of a map R^k -> R^m.
template <typename Map>
Eigen::MatrixXd finite_difference_jacobian(const Map& map, const Eigen::VectorXd& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  const Eigen::VectorXd f0 = map(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    jac.col(j) = (map(xp) - map(xm)) / (2.0 * step);
  }
  return jac;
}

}  // namespace orbit_averager

#endif  // ORBIT_AVERAGER_NUMERICS_HPP
