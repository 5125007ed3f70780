#pragma once

#include <array>
#include <optional>
#include <string>

#include "agetrack/grid_function.hpp"
#include "agetrack/model.hpp"

namespace agetrack {

enum class TrajectoryKind { Constant, Ramp, Periodic, Transition };

const char* to_string(TrajectoryKind kind) noexcept;

/// A positive reference output y_ref(t) with closed-form derivatives. The
/// logarithmic rate y_ref'/y_ref is evaluated analytically, never by
/// differencing.
class Trajectory {
 public:
  [[nodiscard]] TrajectoryKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::array<double, 3>& coefficients() const noexcept { return c_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }

  [[nodiscard]] double value(double t) const;
  [[nodiscard]] double derivative(double t) const;
  [[nodiscard]] double second_derivative(double t) const;
  /// y_ref'(t) / y_ref(t)
  [[nodiscard]] double rate(double t) const { return derivative(t) / value(t); }

  /// Natural probe horizon: one period for periodic kinds, the transition
  /// time for transitions, otherwise `fallback`.
  [[nodiscard]] double characteristic_horizon(double fallback) const;

  [[nodiscard]] Trajectory scaled(double c) const;
  [[nodiscard]] std::string describe() const;

  friend Trajectory make_constant(double value);
  friend Trajectory make_ramp(double y4, double y1);
  friend Trajectory make_periodic(double y2, double y3, double omega);
  friend Trajectory make_transition(double y0, double y_delta, double t_delta);

 private:
  Trajectory(TrajectoryKind kind, std::array<double, 3> c) : kind_(kind), c_(c) {}

  TrajectoryKind kind_;
  std::array<double, 3> c_;
  double scale_ = 1.0;
};

Trajectory make_constant(double value);
/// y(t) = y4 + y1 t
Trajectory make_ramp(double y4, double y1);
/// y(t) = y2 + y3 sin(omega t + sin(omega t)); requires y2 > y3 >= 0.
Trajectory make_periodic(double y2, double y3, double omega);
/// Quintic blend y0 -> y_delta on [0, t_delta] with coefficients {10, -15, 6},
/// constant afterwards. C2 at both ends.
Trajectory make_transition(double y0, double y_delta, double t_delta);

/// Blend coefficients g_i of the transition polynomial.
inline constexpr std::array<double, 3> kTransitionCoefficients{10.0, -15.0, 6.0};

struct ValidityReport {
  double inf_rate = 0.0;
  double sup_rate = 0.0;
  /// Admissible open band (D* - d_max, D* - d_min).
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool valid = false;
  /// First time the rate is inside the band (equal to the probe start when
  /// it starts inside); empty if it never enters.
  std::optional<double> t_crit;
  /// Set for kinds whose rate is not monotone: t_crit is only the first
  /// entry and the rate may leave the band again.
  bool may_reexit = false;
};

/// Probes the closed-form rate on `probes` uniform points over
/// [t_start, t_start + horizon] (one period for periodic kinds) and folds in
/// the exact limit t -> infinity for kinds that have one.
ValidityReport validate(const Trajectory& traj, double d_star, double d_min, double d_max,
                        double horizon, double t_start = 0.0, std::size_t probes = 10000);

ValidityReport validate(const Trajectory& traj, const Equilibrium& eq, const ModelParams& params,
                        double horizon, double t_start = 0.0, std::size_t probes = 10000);

/// x_ref(a, t) = x*(a) y_ref(t)
GridFunction reference_profile(const Trajectory& traj, const Equilibrium& eq, double t);

}  // namespace agetrack
