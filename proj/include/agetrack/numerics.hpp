#pragma once

// Shared numerical kernels: composite quadrature on uniform samples, the
// classical RK4 step used by every time integrator in the library, cubic
// Hermite interpolation, and scalar bracketing searches.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace agetrack::numerics {

/// Composite Simpson rule on uniformly spaced samples. An odd number of
/// intervals is closed with Simpson's 3/8 rule on the last three intervals;
/// two samples fall back to the trapezoid rule.
double simpson(std::span<const double> f, double h);

/// Quadrature weights w such that sum_i w_i f_i == simpson(f, h).
std::vector<double> simpson_weights(std::size_t n, double h);

/// F_i = integral of f from node 0 to node i, fourth-order accurate at every
/// node (Simpson pairs plus a three-point rule for the first interval).
std::vector<double> cumulative_integral(std::span<const double> f, double h);

/// Cumulative trapezoid rule; exact for piecewise-linear integrands.
std::vector<double> cumulative_trapezoid(std::span<const double> f, double h);

/// First derivative on uniform samples: fourth-order central differences in
/// the interior and fourth-order one-sided stencils at the two ends.
std::vector<double> differentiate(std::span<const double> f, double h);

/// Cubic Hermite interpolation on [t0, t1].
inline double hermite(double t0, double y0, double d0, double t1, double y1, double d1,
                      double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

/// One classical fourth-order Runge-Kutta step for y' = rhs(t, y). State must
/// support addition and scaling by double (Eigen vectors do).
template <class State, class Rhs>
State rk4_step(Rhs&& rhs, double t, const State& y, double dt) {
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * dt, State(y + (0.5 * dt) * k1));
  const State k3 = rhs(t + 0.5 * dt, State(y + (0.5 * dt) * k2));
  const State k4 = rhs(t + dt, State(y + dt * k3));
  return State(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Bisection on a sign change of f over [lo, hi]; returns the midpoint of the
/// final bracket once its width is below tol.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

struct Minimum {
  double x;
  double value;
};

/// Golden-section minimisation of a unimodal function on [lo, hi].
Minimum golden_section(const std::function<double(double)>& f, double lo, double hi,
                       double tol);

}  // namespace agetrack::numerics
