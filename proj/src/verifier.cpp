#include "orbit_averager/verifier.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

namespace orbit_averager {

Eigen::VectorXd SectionSpec::to_section(const Eigen::VectorXd& z) const {
  Eigen::VectorXd y(z.size() - 1);
  y.head(azimuth_index) = z.head(azimuth_index);
  y.tail(z.size() - 1 - azimuth_index) = z.tail(z.size() - 1 - azimuth_index);
  return y;
}

Eigen::VectorXd SectionSpec::from_section(const Eigen::VectorXd& y) const {
  Eigen::VectorXd z(y.size() + 1);
  z.head(azimuth_index) = y.head(azimuth_index);
  z[azimuth_index] = value;
  z.tail(y.size() - azimuth_index) = y.tail(y.size() - azimuth_index);
  return z;
}

SectionSpec default_section(const Scenario& s, double value) { return {s.first_azimuth(), value}; }

std::string to_string(FlightStatus status) {
  switch (status) {
    case FlightStatus::Returned: return "returned";
    case FlightStatus::BoundaryExit: return "boundary-exit";
    case FlightStatus::NearPole: return "near-pole";
    case FlightStatus::Stiffness: return "stiffness";
    case FlightStatus::NoReturn: return "no-return";
  }
  return "unknown";
}

std::string to_string(CertificateStatus status) {
  switch (status) {
    case CertificateStatus::Certified: return "certified";
    case CertificateStatus::Degenerate: return "degenerate";
    case CertificateStatus::NotConverged: return "not-converged";
    case CertificateStatus::BoundaryExit: return "boundary-exit";
    case CertificateStatus::NearPole: return "near-pole";
    case CertificateStatus::Stiffness: return "stiffness";
    case CertificateStatus::NoReturn: return "no-return";
  }
  return "unknown";
}

namespace {

Eigen::MatrixXd drop_row_col(const Eigen::MatrixXd& m, int idx) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd out(n - 1, n - 1);
  for (int i = 0, r = 0; i < n; ++i) {
    if (i == idx) continue;
    for (int j = 0, c = 0; j < n; ++j) {
      if (j == idx) continue;
      out(r, c++) = m(i, j);
    }
    ++r;
  }
  return out;
}

std::vector<int> radial_coords(const Scenario& s) {
  std::vector<int> out;
  int row = 0;
  for (BlockKind kind : s.blocks) {
    if (kind == BlockKind::Radial) out.push_back(row);
    row += block_size(kind);
  }
  return out;
}

CertificateStatus from_flight(FlightStatus status) {
  switch (status) {
    case FlightStatus::BoundaryExit: return CertificateStatus::BoundaryExit;
    case FlightStatus::NearPole: return CertificateStatus::NearPole;
    case FlightStatus::Stiffness: return CertificateStatus::Stiffness;
    case FlightStatus::NoReturn:
    case FlightStatus::Returned: break;
  }
  return CertificateStatus::NoReturn;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

ReturnResult return_map(const Scenario& s, const AffinePerturbation& p, double eps, const SectionSpec& sec,
                        const Eigen::VectorXd& y, const ChartRegion& region, const VerifierConfig& cfg) {
  if (y.size() != s.dim() - 1) throw DimensionMismatch("section point must have dim - 1 coordinates");
  if (s.spec.role(sec.azimuth_index) != CoordRole::Azimuth)
    throw std::invalid_argument("section coordinate is not an azimuth");

  const PerturbedField field(s, p, eps);
  const ChartPoint start(s.spec, sec.from_section(y));
  const double target = sec.value + kTwoPi;
  const int idx = sec.azimuth_index;

  IntegrationOptions opts;
  opts.tangent = true;
  opts.region = region;
  opts.event = [target, idx](const Eigen::VectorXd& z) { return z[idx] - target; };

  ReturnResult result;
  Trajectory traj;
  try {
    traj = integrate(field, start, cfg.max_flight_periods * s.period, cfg.integrator, opts);
  } catch (const StiffnessError&) {
    result.status = FlightStatus::Stiffness;
    return result;
  }
  result.final_state = traj.final_state();
  result.time = traj.final_time();

  const auto radial = radial_coords(s);
  result.radial_deviation = radial.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  for (const auto& z : traj.states)
    for (int i : radial) result.radial_deviation = std::max(result.radial_deviation, std::abs(z[i] - 1.0));

  if (traj.status == IntegrationStatus::BoundaryExit) {
    result.status = FlightStatus::BoundaryExit;
    return result;
  }
  if (traj.near_pole) {
    result.status = FlightStatus::NearPole;
    return result;
  }
  if (traj.status != IntegrationStatus::EventReached) {
    result.status = FlightStatus::NoReturn;
    return result;
  }

  const Eigen::VectorXd& z_end = traj.final_state();
  Eigen::VectorXd image = sec.to_section(z_end);
  // Other azimuths advance by about 2 pi per revolution; keep the image on
  // the lift closest to the starting point.
  for (int i : s.spec.azimuths()) {
    if (i == idx) continue;
    const int j = i < idx ? i : i - 1;
    image[j] = y[j] + angle_difference(image[j], y[j]);
  }
  result.image = std::move(image);

  // Flight time varies with the start point; projecting along the flow keeps
  // the image on the section: dz_end = (I - f e_idx^T / f_idx) Phi dz0.
  const Eigen::VectorXd f_end = field(z_end);
  const int n = s.dim();
  Eigen::MatrixXd projector = Eigen::MatrixXd::Identity(n, n);
  projector.col(idx) -= f_end / f_end[idx];
  result.jacobian = drop_row_col(projector * traj.final_tangent(), idx);
  result.status = FlightStatus::Returned;
  return result;
}

CycleCertificate find_fixed_point(const Scenario& s, const AffinePerturbation& p, double eps, const SectionSpec& sec,
                                  const Eigen::VectorXd& guess, const ChartPoint& prediction, const ChartRegion& region,
                                  const VerifierConfig& cfg) {
  CycleCertificate cert;
  cert.epsilon = eps;
  const int m = s.dim() - 1;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(m, m);

  Eigen::VectorXd y = guess;
  ReturnResult current = return_map(s, p, eps, sec, y, region, cfg);
  cert.section_point = y;
  if (current.status != FlightStatus::Returned) {
    cert.status = from_flight(current.status);
    cert.radial_deviation = current.radial_deviation;
    return cert;
  }

  bool converged = false;
  for (int iter = 0; iter <= cfg.max_iterations; ++iter) {
    cert.iterations = iter;
    const Eigen::VectorXd residual = current.image - y;
    cert.residual = max_abs(residual);
    if (cert.residual <= cfg.tolerance) {
      converged = true;
      break;
    }
    if (iter == cfg.max_iterations) break;

    const Eigen::MatrixXd newton = current.jacobian - identity;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(newton);
    if (svd.singularValues().minCoeff() <= cfg.degeneracy_threshold) {
      cert.status = CertificateStatus::Degenerate;
      break;
    }
    const Eigen::VectorXd delta = newton.fullPivLu().solve(-residual);

    // Halve the step while the residual does not decrease.
    double lambda = 1.0;
    std::optional<ReturnResult> accepted;
    Eigen::VectorXd y_next;
    ReturnResult last_returned;
    Eigen::VectorXd y_last;
    for (int halving = 0; halving <= cfg.max_halvings; ++halving, lambda *= 0.5) {
      Eigen::VectorXd trial = y + lambda * delta;
      ReturnResult r = return_map(s, p, eps, sec, trial, region, cfg);
      if (r.status != FlightStatus::Returned) continue;
      if (max_abs(r.image - trial) < cert.residual) {
        accepted = std::move(r);
        y_next = std::move(trial);
        break;
      }
      last_returned = std::move(r);
      y_last = std::move(trial);
    }
    if (!accepted) {
      if (last_returned.status != FlightStatus::Returned) break;
      accepted = std::move(last_returned);
      y_next = std::move(y_last);
    }
    y = std::move(y_next);
    current = std::move(*accepted);
  }

  cert.section_point = y;
  cert.period = current.time;
  cert.radial_deviation = current.radial_deviation;
  cert.det_dp_minus_identity = (current.jacobian - identity).determinant();
  const Eigen::EigenSolver<Eigen::MatrixXd> eig(current.jacobian, false);
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) cert.multipliers.push_back(eig.eigenvalues()[i]);
  std::sort(cert.multipliers.begin(), cert.multipliers.end(), [](auto a, auto b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    return a.imag() > b.imag();
  });
  ChartPoint state = normalize(ChartPoint(s.spec, sec.from_section(y)));
  cert.distance = chart_distance(state, normalize(prediction));
  cert.state = std::move(state);

  if (cert.status == CertificateStatus::Degenerate) return cert;
  if (!converged) {
    cert.status = CertificateStatus::NotConverged;
    return cert;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(current.jacobian - identity);
  if (svd.singularValues().minCoeff() <= cfg.degeneracy_threshold) {
    cert.status = CertificateStatus::Degenerate;
    return cert;
  }
  cert.hyperbolic = std::all_of(cert.multipliers.begin(), cert.multipliers.end(),
                                [&](auto mu) { return std::abs(mu - 1.0) >= eps * cfg.isolation_factor; });
  cert.status = CertificateStatus::Certified;
  return cert;
}

bool SweepTable::all_certified() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.certified(); });
}

std::optional<double> fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

SweepTable epsilon_sweep(const Scenario& s, const AffinePerturbation& p, const SectionSpec& sec,
                         const ChartPoint& prediction, const std::vector<double>& epsilons, const ChartRegion& region,
                         const VerifierConfig& cfg, int jobs) {
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw std::invalid_argument("sweep epsilons must be positive");
  }
  const Eigen::VectorXd guess = sec.to_section(prediction.coords);
  SweepTable table;
  table.rows.resize(epsilons.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < epsilons.size(); i = next++) {
      table.rows[i] = find_fixed_point(s, p, epsilons[i], sec, guess, prediction, region, cfg);
    }
  };
  const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, epsilons.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<double> log_eps, log_dist;
  for (const auto& row : table.rows) {
    if (row.certified() && row.distance > 0.0) {
      log_eps.push_back(std::log(row.epsilon));
      log_dist.push_back(std::log(row.distance));
    }
  }
  table.fitted_rows = static_cast<int>(log_eps.size());
  table.slope = fit_slope(log_eps, log_dist);
  return table;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& os, const SweepTable& table, int section_dim) {
  os << "epsilon";
  for (int i = 0; i < section_dim; ++i) os << ",y" << i + 1;
  os << ",residual";
  for (int i = 0; i < section_dim; ++i) os << ",mu" << i + 1 << "_re,mu" << i + 1 << "_im";
  os << ",distance,period,radial_deviation,hyperbolic,status\n";
  const std::string nan = "nan";
  for (const auto& row : table.rows) {
    os << num(row.epsilon);
    for (int i = 0; i < section_dim; ++i) os << ',' << (i < row.section_point.size() ? num(row.section_point[i]) : nan);
    os << ',' << num(row.residual);
    for (int i = 0; i < section_dim; ++i) {
      if (static_cast<std::size_t>(i) < row.multipliers.size()) {
        os << ',' << num(row.multipliers[i].real()) << ',' << num(row.multipliers[i].imag());
      } else {
        os << ',' << nan << ',' << nan;
      }
    }
    os << ',' << num(row.distance) << ',' << num(row.period) << ',' << num(row.radial_deviation) << ','
       << (row.hyperbolic ? 1 : 0) << ',' << to_string(row.status) << '\n';
  }
}

}  // namespace orbit_averager
