#include "agetrack/delay_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "agetrack/error.hpp"
#include "agetrack/numerics.hpp"

namespace agetrack {

namespace {
// Relaxation rate towards psi(t) = int k~(a) psi(t - a) da, capped at 1/dt
// to stay well inside the RK4 stability interval.
constexpr double kStabilization = 50.0;
}  // namespace

GridFunction pi_weight(const Equilibrium& eq, const ModelParams& params) {
  const auto& kt = eq.k_tilde;
  const auto cum = numerics::cumulative_integral(kt.values(), kt.spacing());
  const double total = cum.back();
  std::vector<double> v(kt.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = (total - cum[i]) / eq.survival[i];
  }
  v.back() = 0.0;
  return GridFunction(params.age_max(), std::move(v));
}

PsiHistory::PsiHistory(double window, double dt, long first_index)
    : window_(window), dt_(dt), first_index_(first_index) {
  if (!(dt > 0.0) || !(window > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "history window and step must be positive");
  }
}

double PsiHistory::front_time() const noexcept {
  return static_cast<double>(first_index_) * dt_;
}

double PsiHistory::back_time() const noexcept {
  return static_cast<double>(first_index_ + static_cast<long>(samples_.size()) - 1) * dt_;
}

void PsiHistory::push(double value, double slope_left, double slope_right) {
  samples_.push_back({value, slope_left, slope_right});
}

void PsiHistory::trim() {
  // One extra step is retained so the previous time level stays addressable.
  const double keep_from = back_time() - window_ - dt_;
  while (samples_.size() > 2 && front_time() + dt_ <= keep_from + 1e-9 * dt_) {
    samples_.pop_front();
    ++first_index_;
  }
}

void PsiHistory::shift(double c) {
  for (auto& sample : samples_) sample.value += c;
}

double PsiHistory::value_at(double s) const {
  if (samples_.size() < 2) throw Error(ErrorCode::HistoryGap, "history holds fewer than 2 samples");
  const double f = front_time();
  const double b = back_time();
  const double slack = 1e-9 * dt_;
  if (s < f - slack || s > b + slack) {
    throw Error(ErrorCode::HistoryGap, "requested time lies outside the stored history");
  }
  const double u = (std::clamp(s, f, b) - f) / dt_;
  auto j = static_cast<std::size_t>(std::floor(u));
  j = std::min(j, samples_.size() - 2);
  const auto& l = samples_[j];
  const auto& r = samples_[j + 1];
  const double t0 = f + static_cast<double>(j) * dt_;
  if (std::abs(s - t0) <= slack) return l.value;
  if (std::abs(s - t0 - dt_) <= slack) return r.value;
  return numerics::hermite(t0, l.value, l.slope_right, t0 + dt_, r.value, r.slope_left, s);
}

DelayModel::DelayModel(const Equilibrium& eq, const ModelParams& params)
    : eq_(eq), params_(params), pi_(pi_weight(eq, params)) {
  pi_norm_ = inner(pi_, eq_.x_star);
  if (!(pi_norm_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "<pi, x*> must be positive");
  const std::size_t n = params_.nodes();
  weights_ = numerics::simpson_weights(n, params_.spacing());
  std::vector<double> mode(n);
  double mode_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mode[i] = pi_[i] * eq_.x_star[i];
    mode_total += weights_[i] * mode[i];
  }
  for (auto& m : mode) m /= mode_total;
  auto values = [](const GridFunction& f) { return std::vector<double>(f.values().begin(), f.values().end()); };
  ktp_ = make_rule(values(eq_.k_tilde_prime));
  g_ = make_rule(values(eq_.g));
  kt_ = make_rule(values(eq_.k_tilde));
  mode_ = make_rule(std::move(mode));
}

DelayModel::WindowRule DelayModel::make_rule(std::vector<double> f) const {
  const double h = params_.spacing();
  WindowRule rule;
  rule.ramp_slope = numerics::cumulative_integral(f, h);
  rule.ramp = numerics::cumulative_integral(rule.ramp_slope, h);
  rule.w.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) rule.w[i] = weights_[i] * f[i];
  return rule;
}

template <class ValueFn>
double DelayModel::window_sum(const WindowRule& rule, double jump, double s, ValueFn&& value) const {
  const double h = params_.spacing();
  const double a_max = params_.age_max();
  // Simpson panels straddling the kink at a = s lose two orders; subtract the
  // ramp jump (s - a)_+ and add its integral back exactly.
  const bool kinked = jump != 0.0 && s > 0.0 && s < a_max;
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.w.size(); ++i) {
    const double lag = s - h * static_cast<double>(i);
    double v = value(lag);
    if (kinked && lag > 0.0) v -= jump * lag;
    acc += rule.w[i] * v;
  }
  if (kinked) {
    const double u = s / h;
    const auto j = std::min(static_cast<std::size_t>(u), rule.ramp.size() - 2);
    const double t0 = h * static_cast<double>(j);
    acc += jump * numerics::hermite(t0, rule.ramp[j], rule.ramp_slope[j], t0 + h, rule.ramp[j + 1],
                                    rule.ramp_slope[j + 1], s);
  }
  return acc;
}

double DelayModel::pi_functional(const GridFunction& f) const { return inner(pi_, f) / pi_norm_; }

DelayState DelayModel::init(const Profile& x0, const Trajectory& traj, const ObserverState& z0,
                            double dt) const {
  const double a_max = params_.age_max();
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  const double ratio = a_max / dt;
  const auto lags = static_cast<long>(std::llround(ratio));
  if (lags < 1 || std::abs(ratio - static_cast<double>(lags)) > 1e-9 * ratio) {
    throw Error(ErrorCode::InvalidArgument, "time step must divide the maximum age");
  }
  const auto x0_grid = params_.sample(x0);
  if (!check_initial_condition(x0_grid, params_)) {
    throw Error(ErrorCode::InvalidIC,
                "initial profile must be positive and satisfy x0(0) = <k, x0>");
  }
  const double y0 = traj.value(0.0);
  if (!(y0 > 0.0)) throw Error(ErrorCode::NonPositive, "y_ref(0) must be positive");
  const double big_pi = pi_functional(x0_grid);

  DelayState st;
  st.eta = std::log(big_pi / y0);
  st.z = z0;
  st.t = 0.0;
  st.step = 0;
  st.psi = PsiHistory(a_max, dt, -lags);
  const auto& mort = params_.mortality_profile();
  for (long j = lags; j >= 0; --j) {
    const double a = static_cast<double>(j) * dt;
    const double xs = eq_.x_star_at(a);
    const double v = x0.value(a) / (xs * big_pi) - 1.0;
    const double da = (x0.derivative(a) + (mort.value(a) + eq_.d_star) * x0.value(a)) /
                      (xs * big_pi);
    st.psi.push(v, -da, -da);
  }
  const double right = psi_rhs(st.psi, 0.0, 0.0, st.psi.back().value);
  st.psi.set_kink(right - st.psi.back().slope_right);
  st.psi.set_back_right_slope(right);
  return st;
}

double DelayModel::psi_rhs(const PsiHistory& hist, double t, double tau, double current) const {
  const std::size_t n = params_.nodes();
  const double psi_t = hist.back().value;
  const double span = tau - t;
  auto value = [&](double s) {
    if (s <= t) return hist.value_at(s);
    const double w = span > 0.0 ? (s - t) / span : 1.0;
    return (1.0 - w) * psi_t + w * current;
  };
  auto at = [&](double s) { return value(s); };
  const double jump = hist.kink();
  const double acc = eq_.k_tilde[0] * current - eq_.k_tilde[n - 1] * value(tau - params_.age_max()) +
                     window_sum(ktp_, jump, tau, at);
  const double renewal = window_sum(kt_, jump, tau, at);
  // Differentiating the integral equation adds a second zero root, so a
  // residual left by truncation error would drift linearly.
  // Pulling psi back towards the undifferentiated identity removes it; the
  // term vanishes on exact solutions.
  const double kappa = std::min(kStabilization, 1.0 / hist.dt());
  return acc - kappa * (current - renewal);
}

void DelayModel::step_psi(DelayState& state) const {
  auto& hist = state.psi;
  const double dt = hist.dt();
  const double t = state.t;
  const double p0 = hist.back().value;
  const double k1 = psi_rhs(hist, t, t, p0);
  hist.set_back_right_slope(k1);
  const double k2 = psi_rhs(hist, t, t + 0.5 * dt, p0 + 0.5 * dt * k1);
  const double k3 = psi_rhs(hist, t, t + 0.5 * dt, p0 + 0.5 * dt * k2);
  const double k4 = psi_rhs(hist, t, t + dt, p0 + dt * k3);
  const double next = p0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  hist.push(next, k4, k4);
  const double slope = psi_rhs(hist, t + dt, t + dt, next);
  // The rhs is continuous for t > 0, so both one-sided slopes agree.
  hist.set_back_slopes(slope, slope);
  hist.trim();
  // The exact flow keeps the zero-mode coordinate at zero; truncation error
  // does not, and the integral equation never damps it.
  hist.shift(-zero_mode(hist, t + dt));
}

double DelayModel::zero_mode(const PsiHistory& hist, double s) const {
  return window_sum(mode_, hist.kink(), s, [&](double x) { return hist.value_at(x); });
}

double DelayModel::output_moment(const PsiHistory& hist, double s) const {
  return window_sum(g_, hist.kink(), s, [&](double x) { return hist.value_at(x); });
}

double DelayModel::delta(const PsiHistory& hist, double s) const {
  const double arg = 1.0 + output_moment(hist, s);
  if (!(arg > 0.0)) throw Error(ErrorCode::LogDomain, "1 + <g, psi_t> must be positive");
  return std::log(arg);
}

double DelayModel::ide_residual(const PsiHistory& hist, double s) const {
  const double renewal = window_sum(kt_, hist.kink(), s, [&](double x) { return hist.value_at(x); });
  return std::abs(hist.value_at(s) - renewal);
}

double DelayModel::history_weighted_norm(const PsiHistory& hist, double sigma, double age_max) {
  const double dt = hist.dt();
  double w = 0.0;
  for (std::size_t j = 0; j < hist.size(); ++j) {
    const double a = static_cast<double>(j) * dt;
    if (a > age_max + 1e-9 * dt) break;
    w = std::max(w, std::exp(-sigma * a) * std::abs(hist.lag(j).value));
  }
  return w;
}

double DelayModel::history_floor(const PsiHistory& hist, double age_max) {
  const double dt = hist.dt();
  double m = 0.0;
  for (std::size_t j = 0; j < hist.size(); ++j) {
    if (static_cast<double>(j) * dt > age_max + 1e-9 * dt) break;
    m = std::min(m, hist.lag(j).value);
  }
  return 1.0 + m;
}

ControlSample DelayModel::control_at(const DelayState& state, const Trajectory& traj,
                                     const ControllerGains& gains,
                                     const InputBounds& bounds) const {
  const double y = traj.value(state.t) * std::exp(state.eta) *
                   (1.0 + output_moment(state.psi, state.t));
  return control(y, traj, gains, state.z, state.t, bounds);
}

void DelayModel::step_closed_loop(DelayState& state, const Trajectory& traj,
                                  const ControllerGains& gains, const InputBounds& bounds) const {
  const double dt = state.psi.dt();
  const double t = state.t;
  step_psi(state);
  const double m0 = output_moment(state.psi, t);
  const double mh = output_moment(state.psi, t + 0.5 * dt);
  const double m1 = output_moment(state.psi, t + dt);

  using Vec = Eigen::Vector3d;
  auto rhs = [&](double tau, const Vec& s, double moment) -> Vec {
    const double y = traj.value(tau) * std::exp(s(0)) * (1.0 + moment);
    const ObserverState z(s(1), s(2));
    const auto cs = control(y, traj, gains, z, tau, bounds);
    const auto dz = observer_rhs(z, cs.log_error, cs.d_ff, cs.d_applied, gains);
    return {eq_.d_star - traj.rate(tau) - cs.d_applied, dz(0), dz(1)};
  };
  const Vec s0(state.eta, state.z(0), state.z(1));
  const Vec k1 = rhs(t, s0, m0);
  const Vec k2 = rhs(t + 0.5 * dt, s0 + 0.5 * dt * k1, mh);
  const Vec k3 = rhs(t + 0.5 * dt, s0 + 0.5 * dt * k2, mh);
  const Vec k4 = rhs(t + dt, s0 + dt * k3, m1);
  const Vec s1 = s0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  state.eta = s1(0);
  state.z = ObserverState(s1(1), s1(2));
  ++state.step;
  state.t = static_cast<double>(state.step) * dt;
}

std::pair<GridFunction, double> DelayModel::reconstruct(const DelayState& state,
                                                        const Trajectory& traj) const {
  const double scale = traj.value(state.t) * std::exp(state.eta);
  const double h = params_.spacing();
  std::vector<double> v(params_.nodes());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = eq_.x_star[i] * scale *
           (1.0 + state.psi.value_at(state.t - h * static_cast<double>(i)));
  }
  const double y = scale * (1.0 + output_moment(state.psi, state.t));
  return {GridFunction(params_.age_max(), std::move(v)), y};
}

OracleTrace simulate_oracle(const DelayModel& model, const Profile& x0, const Trajectory& traj,
                            const ControllerGains& gains, const InputBounds& bounds,
                            const OracleOptions& opts) {
  gains.validate();
  if (!(opts.t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be positive");
  if (opts.record_every == 0) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
  auto state = model.init(x0, traj, gains.z0, opts.dt);
  const auto steps = static_cast<long>(std::llround(opts.t_end / opts.dt));
  const double a_max = model.params().age_max();

  OracleTrace trace;
  std::vector<bool> taken(opts.snapshot_times.size(), false);
  for (long n = 0; n <= steps; ++n) {
    if (n % static_cast<long>(opts.record_every) == 0 || n == steps) {
      const auto cs = model.control_at(state, traj, gains, bounds);
      const double moment = model.output_moment(state.psi, state.t);
      const double y_ref = traj.value(state.t);
      const double dl = model.delta(state);
      trace.records.push_back({state.t, state.eta, dl, state.z(0), state.z(1), cs.d_applied,
                               y_ref * std::exp(state.eta) * (1.0 + moment), y_ref,
                               state.eta + dl,
                               DelayModel::history_weighted_norm(state.psi, opts.sigma, a_max),
                               DelayModel::history_floor(state.psi, a_max), cs.saturated});
    }
    for (std::size_t k = 0; k < opts.snapshot_times.size(); ++k) {
      if (!taken[k] && std::abs(state.t - opts.snapshot_times[k]) <= 0.5 * opts.dt) {
        trace.snapshots.push_back({state.t, model.reconstruct(state, traj).first});
        taken[k] = true;
      }
    }
    if (n == steps) break;
    model.step_closed_loop(state, traj, gains, bounds);
  }
  return trace;
}

}  // namespace agetrack
