#include "agetrack/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "agetrack/error.hpp"

namespace agetrack {

const char* to_string(TrajectoryKind kind) noexcept {
  switch (kind) {
    case TrajectoryKind::Constant: return "constant";
    case TrajectoryKind::Ramp: return "ramp";
    case TrajectoryKind::Periodic: return "periodic";
    case TrajectoryKind::Transition: return "transition";
  }
  return "unknown";
}

Trajectory make_constant(double value) {
  if (!(value > 0.0)) throw Error(ErrorCode::NonPositive, "constant reference must be positive");
  return Trajectory(TrajectoryKind::Constant, {value, 0.0, 0.0});
}

Trajectory make_ramp(double y4, double y1) {
  if (!(y4 > 0.0)) throw Error(ErrorCode::NonPositive, "ramp offset y4 must be positive");
  if (!(y1 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ramp slope y1 must be nonnegative");
  return Trajectory(TrajectoryKind::Ramp, {y4, y1, 0.0});
}

Trajectory make_periodic(double y2, double y3, double omega) {
  if (!(y3 >= 0.0) || !(y2 > y3)) {
    throw Error(ErrorCode::NonPositive, "periodic reference needs y2 > y3 >= 0");
  }
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be positive");
  return Trajectory(TrajectoryKind::Periodic, {y2, y3, omega});
}

Trajectory make_transition(double y0, double y_delta, double t_delta) {
  if (!(y0 > 0.0) || !(y_delta > 0.0)) {
    throw Error(ErrorCode::NonPositive, "transition end points must be positive");
  }
  if (!(t_delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_delta must be positive");
  return Trajectory(TrajectoryKind::Transition, {y0, y_delta, t_delta});
}

double Trajectory::value(double t) const {
  switch (kind_) {
    case TrajectoryKind::Constant:
      return scale_ * c_[0];
    case TrajectoryKind::Ramp:
      return scale_ * (c_[0] + c_[1] * t);
    case TrajectoryKind::Periodic: {
      const double w = c_[2];
      return scale_ * (c_[0] + c_[1] * std::sin(w * t + std::sin(w * t)));
    }
    case TrajectoryKind::Transition: {
      const double s = std::clamp(t / c_[2], 0.0, 1.0);
      const auto& g = kTransitionCoefficients;
      const double blend = g[0] * s * s * s + g[1] * s * s * s * s + g[2] * s * s * s * s * s;
      return scale_ * (c_[0] + (c_[1] - c_[0]) * blend);
    }
  }
  return 0.0;
}

double Trajectory::derivative(double t) const {
  switch (kind_) {
    case TrajectoryKind::Constant:
      return 0.0;
    case TrajectoryKind::Ramp:
      return scale_ * c_[1];
    case TrajectoryKind::Periodic: {
      const double w = c_[2];
      const double theta = w * t + std::sin(w * t);
      return scale_ * c_[1] * std::cos(theta) * w * (1.0 + std::cos(w * t));
    }
    case TrajectoryKind::Transition: {
      if (t <= 0.0 || t >= c_[2]) return 0.0;
      const double s = t / c_[2];
      const auto& g = kTransitionCoefficients;
      const double d = 3.0 * g[0] * s * s + 4.0 * g[1] * s * s * s + 5.0 * g[2] * s * s * s * s;
      return scale_ * (c_[1] - c_[0]) * d / c_[2];
    }
  }
  return 0.0;
}

double Trajectory::second_derivative(double t) const {
  switch (kind_) {
    case TrajectoryKind::Constant:
    case TrajectoryKind::Ramp:
      return 0.0;
    case TrajectoryKind::Periodic: {
      const double w = c_[2];
      const double theta = w * t + std::sin(w * t);
      const double dtheta = w * (1.0 + std::cos(w * t));
      const double ddtheta = -w * w * std::sin(w * t);
      return scale_ * c_[1] * (-std::sin(theta) * dtheta * dtheta + std::cos(theta) * ddtheta);
    }
    case TrajectoryKind::Transition: {
      if (t <= 0.0 || t >= c_[2]) return 0.0;
      const double s = t / c_[2];
      const auto& g = kTransitionCoefficients;
      const double dd = 6.0 * g[0] * s + 12.0 * g[1] * s * s + 20.0 * g[2] * s * s * s;
      return scale_ * (c_[1] - c_[0]) * dd / (c_[2] * c_[2]);
    }
  }
  return 0.0;
}

double Trajectory::characteristic_horizon(double fallback) const {
  switch (kind_) {
    case TrajectoryKind::Periodic:
      return 2.0 * std::numbers::pi / c_[2];
    case TrajectoryKind::Transition:
      return std::max(c_[2], fallback);
    default:
      return fallback;
  }
}

Trajectory Trajectory::scaled(double c) const {
  if (!(c > 0.0)) throw Error(ErrorCode::NonPositive, "trajectory scale must be positive");
  Trajectory out = *this;
  out.scale_ *= c;
  return out;
}

std::string Trajectory::describe() const {
  std::ostringstream os;
  os.precision(12);
  os << to_string(kind_);
  switch (kind_) {
    case TrajectoryKind::Constant: os << " value=" << c_[0]; break;
    case TrajectoryKind::Ramp: os << " y4=" << c_[0] << " y1=" << c_[1]; break;
    case TrajectoryKind::Periodic:
      os << " y2=" << c_[0] << " y3=" << c_[1] << " omega=" << c_[2];
      break;
    case TrajectoryKind::Transition:
      os << " y0=" << c_[0] << " y_delta=" << c_[1] << " t_delta=" << c_[2];
      break;
  }
  if (scale_ != 1.0) os << " scale=" << scale_;
  return os.str();
}

ValidityReport validate(const Trajectory& traj, double d_star, double d_min, double d_max,
                        double horizon, double t_start, std::size_t probes) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (probes < 2) throw Error(ErrorCode::InvalidArgument, "need at least two probes");

  ValidityReport rep;
  rep.lower_bound = d_star - d_max;
  rep.upper_bound = d_star - d_min;
  auto inside = [&](double r) { return rep.lower_bound < r && r < rep.upper_bound; };

  double span = horizon;
  if (traj.kind() == TrajectoryKind::Periodic) {
    span = traj.characteristic_horizon(horizon);
  }
  const double step = span / static_cast<double>(probes - 1);

  rep.inf_rate = std::numeric_limits<double>::infinity();
  rep.sup_rate = -std::numeric_limits<double>::infinity();
  bool all_inside = true;
  std::optional<std::size_t> first_inside;
  for (std::size_t i = 0; i < probes; ++i) {
    const double t = t_start + step * static_cast<double>(i);
    const double r = traj.rate(t);
    rep.inf_rate = std::min(rep.inf_rate, r);
    rep.sup_rate = std::max(rep.sup_rate, r);
    const bool in = inside(r);
    all_inside = all_inside && in;
    if (in && !first_inside) first_inside = i;
  }

  // Exact limits as t -> infinity.
  if (traj.kind() != TrajectoryKind::Periodic) {
    rep.inf_rate = std::min(rep.inf_rate, 0.0);
    rep.sup_rate = std::max(rep.sup_rate, 0.0);
    all_inside = all_inside && inside(0.0);
  }

  rep.valid = all_inside && inside(rep.inf_rate) && inside(rep.sup_rate);
  rep.may_reexit = traj.kind() == TrajectoryKind::Periodic ||
                   traj.kind() == TrajectoryKind::Transition;

  if (first_inside) {
    if (*first_inside == 0) {
      rep.t_crit = t_start;
    } else {
      double lo = t_start + step * static_cast<double>(*first_inside - 1);
      double hi = t_start + step * static_cast<double>(*first_inside);
      while (hi - lo > 1e-12 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (inside(traj.rate(mid))) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      rep.t_crit = hi;
    }
  }
  return rep;
}

ValidityReport validate(const Trajectory& traj, const Equilibrium& eq, const ModelParams& params,
                        double horizon, double t_start, std::size_t probes) {
  return validate(traj, eq.d_star, params.d_min(), params.d_max(), horizon, t_start, probes);
}

GridFunction reference_profile(const Trajectory& traj, const Equilibrium& eq, double t) {
  return eq.x_star * traj.value(t);
}

}  // namespace agetrack
