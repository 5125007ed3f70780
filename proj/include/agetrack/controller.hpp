#pragma once

#include <Eigen/Dense>

#include "agetrack/trajectory.hpp"

namespace agetrack {

/// Observer state z = (z1, z2); z2 is the running estimate of D*.
using ObserverState = Eigen::Vector2d;

struct ControllerGains {
  double gamma = 2.0;
  double l1 = 4.0;
  double l2 = 8.0;
  /// z0(1) is the initial guess for the equilibrium dilution rate.
  ObserverState z0 = ObserverState(0.0, 0.5);

  /// Throws Error(InvalidArgument) unless gamma, l1, l2 > 0.
  void validate() const;
};

struct InputBounds {
  double d_min = 0.0;
  double d_max = 1.0;
};

struct ControlSample {
  double d_ff = 0.0;
  double d_fb = 0.0;
  double d_applied = 0.0;
  bool saturated = false;
  double log_error = 0.0;
};

/// min(hi, max(lo, v))
double saturate(double v, double lo, double hi);

/// Saturated two-degree-of-freedom law
///   D = sat(-y_ref'/y_ref + z2 + gamma ln(y / y_ref)).
/// Sees only the measured output, the reference and the observer state; it
/// has no access to model data. Throws Error(NonPositiveOutput) if y <= 0.
ControlSample control(double y, const Trajectory& traj, const ControllerGains& gains,
                      const ObserverState& z, double t, const InputBounds& bounds);

/// z' = L z + (l1 e + D_FF - D, l2 e) with e = ln(y / y_ref) and
/// L = [[-l1, 1], [-l2, 0]].
ObserverState observer_rhs(const ObserverState& z, double log_error, double d_ff,
                           double d_applied, const ControllerGains& gains);

/// One RK4 step of the observer with y and the applied input held fixed over
/// the step (the reference still varies with time).
ObserverState observer_step(const ObserverState& z, double y, const Trajectory& traj,
                            double d_applied, const ControllerGains& gains, double t, double dt);

/// The observer matrix L.
Eigen::Matrix2d observer_matrix(const ControllerGains& gains);

}  // namespace agetrack
