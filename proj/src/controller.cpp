#include "agetrack/controller.hpp"

#include <algorithm>
#include <cmath>

#include "agetrack/error.hpp"
#include "agetrack/numerics.hpp"

namespace agetrack {

void ControllerGains::validate() const {
  if (!(gamma > 0.0) || !(l1 > 0.0) || !(l2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "controller gains gamma, l1, l2 must be positive");
  }
}

double saturate(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

ControlSample control(double y, const Trajectory& traj, const ControllerGains& gains,
                      const ObserverState& z, double t, const InputBounds& bounds) {
  if (!(y > 0.0)) {
    throw Error(ErrorCode::NonPositiveOutput, "measured output must stay positive");
  }
  const double y_ref = traj.value(t);
  ControlSample s;
  s.log_error = std::log(y / y_ref);
  s.d_ff = -traj.rate(t);
  s.d_fb = z(1) + gains.gamma * s.log_error;
  const double raw = s.d_ff + s.d_fb;
  s.d_applied = saturate(raw, bounds.d_min, bounds.d_max);
  s.saturated = s.d_applied != raw;
  return s;
}

ObserverState observer_rhs(const ObserverState& z, double log_error, double d_ff,
                           double d_applied, const ControllerGains& gains) {
  return {-gains.l1 * z(0) + z(1) + gains.l1 * log_error + d_ff - d_applied,
          -gains.l2 * z(0) + gains.l2 * log_error};
}

ObserverState observer_step(const ObserverState& z, double y, const Trajectory& traj,
                            double d_applied, const ControllerGains& gains, double t, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  auto rhs = [&](double tau, const ObserverState& zz) -> ObserverState {
    return observer_rhs(zz, std::log(y / traj.value(tau)), -traj.rate(tau), d_applied, gains);
  };
  return numerics::rk4_step(rhs, t, z, dt);
}

Eigen::Matrix2d observer_matrix(const ControllerGains& gains) {
  Eigen::Matrix2d l;
  l << -gains.l1, 1.0, -gains.l2, 0.0;
  return l;
}

}  // namespace agetrack
