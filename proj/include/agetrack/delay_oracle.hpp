#pragma once

#include <cstddef>
#include <deque>
#include <utility>
#include <vector>

#include "agetrack/controller.hpp"
#include "agetrack/grid_function.hpp"
#include "agetrack/model.hpp"
#include "agetrack/profile.hpp"
#include "agetrack/trajectory.hpp"

namespace agetrack {

/// pi(a) = int_a^A k(s) exp(D*(a - s) + int_s^a mu) ds. pi(0) = 1 by the
/// Lotka-Sharpe condition and pi(A) = 0.
GridFunction pi_weight(const Equilibrium& eq, const ModelParams& params);

/// Uniformly sampled scalar history psi(s) with left and right slopes at
/// every sample, evaluated by cubic Hermite interpolation. Sample j sits at
/// time (first_index + j) * dt.
class PsiHistory {
 public:
  struct Sample {
    double value;
    double slope_left;
    double slope_right;
  };

  PsiHistory() = default;
  PsiHistory(double window, double dt, long first_index);

  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] double window() const noexcept { return window_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] double front_time() const noexcept;
  [[nodiscard]] double back_time() const noexcept;
  [[nodiscard]] const Sample& back() const { return samples_.back(); }
  /// Sample at time back_time() - j dt.
  [[nodiscard]] const Sample& lag(std::size_t j) const { return samples_[samples_.size() - 1 - j]; }

  void push(double value, double slope_left, double slope_right);
  void set_back_right_slope(double slope) { samples_.back().slope_right = slope; }
  void set_back_slopes(double left, double right) {
    samples_.back().slope_left = left;
    samples_.back().slope_right = right;
  }
  /// Drops samples older than back_time() - window - dt.
  void trim();
  /// Adds c to every stored value; slopes are unchanged.
  void shift(double c);

  /// Slope jump psi'(0+) - psi'(0-) where the initial history meets the
  /// solution. It is the only kink; quadratures over the window remove it.
  [[nodiscard]] double kink() const noexcept { return kink_; }
  void set_kink(double jump) noexcept { kink_ = jump; }

  /// Throws Error(HistoryGap) outside [front_time, back_time].
  [[nodiscard]] double value_at(double s) const;

 private:
  double window_ = 0.0;
  double dt_ = 0.0;
  long first_index_ = 0;
  double kink_ = 0.0;
  std::deque<Sample> samples_;
};

struct DelayState {
  double eta = 0.0;
  ObserverState z = ObserverState::Zero();
  double t = 0.0;
  long step = 0;
  PsiHistory psi;
};

/// Closed-loop sample of the delay route.
struct OracleRecord {
  double t;
  double eta;
  double delta;
  double z1;
  double z2;
  double d;
  double y;
  double y_ref;
  double log_error;
  double w;
  double c;
  bool saturated;
};

struct Snapshot {
  double t;
  GridFunction profile;
};

struct OracleTrace {
  std::vector<OracleRecord> records;
  std::vector<Snapshot> snapshots;
};

/// The delay-coordinate description of the closed loop: psi is driven by the
/// autonomous integral delay equation psi(t) = int k~(a) psi(t - a) da
/// (advanced through its differentiated form), eta by the input, and the PDE
/// state is recovered by reconstruct().
class DelayModel {
 public:
  DelayModel(const Equilibrium& eq, const ModelParams& params);

  [[nodiscard]] const Equilibrium& equilibrium() const noexcept { return eq_; }
  [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
  [[nodiscard]] const GridFunction& pi() const noexcept { return pi_; }

  /// Pi(f) = <pi, f> / <pi, x*>
  [[nodiscard]] double pi_functional(const GridFunction& f) const;

  /// eta0 = ln(Pi(x0) / y_ref(0)), psi0(-a) = x0(a) / (x*(a) Pi(x0)) - 1 on
  /// [-A, 0]. dt must divide A. Throws Error(InvalidIC) when x0 is not
  /// positive or not compatible with the boundary condition.
  [[nodiscard]] DelayState init(const Profile& x0, const Trajectory& traj,
                                const ObserverState& z0, double dt) const;

  /// Right-hand side of the delay differential equation for psi at time
  /// tau, where psi on (t, tau] is taken as the linear blend between psi(t)
  /// and `current`.
  [[nodiscard]] double psi_rhs(const PsiHistory& hist, double t, double tau,
                               double current) const;

  /// One RK4 step of psi over [t, t + dt] followed by removal of the zero
  /// mode picked up from truncation error; state.t is not advanced.
  void step_psi(DelayState& state) const;

  /// int g(a) psi(s - a) da
  [[nodiscard]] double output_moment(const PsiHistory& hist, double s) const;
  /// delta(s) = ln(1 + int g psi(s - a) da). Throws Error(LogDomain).
  [[nodiscard]] double delta(const PsiHistory& hist, double s) const;
  [[nodiscard]] double delta(const DelayState& state) const { return delta(state.psi, state.t); }

  /// Zero-mode coordinate <pi x*, psi(s - .)> / <pi x*, 1>. Conserved by the
  /// integral equation and zero for every history built by init().
  [[nodiscard]] double zero_mode(const PsiHistory& hist, double s) const;

  /// |psi(s) - int k~(a) psi(s - a) da|
  [[nodiscard]] double ide_residual(const PsiHistory& hist, double s) const;

  /// W = max over the window of exp(-sigma a) |psi(t - a)| (stored samples).
  [[nodiscard]] static double history_weighted_norm(const PsiHistory& hist, double sigma,
                                                    double age_max);
  /// C = 1 + min(0, min over the window of psi).
  [[nodiscard]] static double history_floor(const PsiHistory& hist, double age_max);

  /// Applied input for the current state. Uses the controller on the
  /// reconstructed output only.
  [[nodiscard]] ControlSample control_at(const DelayState& state, const Trajectory& traj,
                                         const ControllerGains& gains,
                                         const InputBounds& bounds) const;

  /// Advances psi, then (eta, z) with the saturated controller in the loop.
  void step_closed_loop(DelayState& state, const Trajectory& traj, const ControllerGains& gains,
                        const InputBounds& bounds) const;

  /// Open-loop step with a prescribed input D(t).
  template <class InputFn>
  void step_open_loop(DelayState& state, const Trajectory& traj, InputFn&& input) const;

  /// Phi_x(a, t) = x*(a) y_ref(t) e^eta (1 + psi(t - a)) and
  /// Phi_y(t) = y_ref(t) e^eta (1 + int g psi(t - a) da).
  [[nodiscard]] std::pair<GridFunction, double> reconstruct(const DelayState& state,
                                                            const Trajectory& traj) const;

 private:
  Equilibrium eq_;
  ModelParams params_;
  GridFunction pi_;
  double pi_norm_ = 1.0;
  // Simpson weights times f(a) on the age grid, plus R(s) = int_0^s f(a) (s - a) da
  // and R' on the same grid for the kink correction.
  struct WindowRule {
    std::vector<double> w;
    std::vector<double> ramp;
    std::vector<double> ramp_slope;
  };
  WindowRule make_rule(std::vector<double> f) const;
  // sum_i w_i psi(s - a_i), exact for a ramp kink at history time 0.
  template <class ValueFn>
  double window_sum(const WindowRule& rule, double jump, double s, ValueFn&& value) const;

  std::vector<double> weights_;
  WindowRule ktp_;
  WindowRule g_;
  WindowRule kt_;
  WindowRule mode_;
};

struct OracleOptions {
  double t_end = 20.0;
  double dt = 0.005;
  std::size_t record_every = 1;
  std::vector<double> snapshot_times;
  /// Weight exponent for the W functional; 0 disables it.
  double sigma = 0.0;
};

/// Runs the closed loop from (x0, z0) and records every record_every steps.
OracleTrace simulate_oracle(const DelayModel& model, const Profile& x0, const Trajectory& traj,
                            const ControllerGains& gains, const InputBounds& bounds,
                            const OracleOptions& opts);

template <class InputFn>
void DelayModel::step_open_loop(DelayState& state, const Trajectory& traj, InputFn&& input) const {
  const double dt = state.psi.dt();
  const double t = state.t;
  step_psi(state);
  auto rhs = [&](double tau) { return eq_.d_star - traj.rate(tau) - input(tau); };
  state.eta += dt / 6.0 * (rhs(t) + 4.0 * rhs(t + 0.5 * dt) + rhs(t + dt));
  ++state.step;
  state.t = static_cast<double>(state.step) * dt;
}

}  // namespace agetrack
