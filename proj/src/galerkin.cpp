#include "agetrack/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "agetrack/error.hpp"
#include "agetrack/numerics.hpp"

namespace agetrack {

namespace {

constexpr double kRootTolerance = 1e-8;
constexpr double kDedupDistance = 1e-4;
constexpr int kMaxBands = 8;

struct ResidualPair {
  Complex f;
  Complex df;
};

ResidualPair residual_and_slope(const Equilibrium& eq, Complex s) {
  const auto& kt = eq.k_tilde;
  const auto w = numerics::simpson_weights(kt.size(), kt.spacing());
  Complex f = 0.0;
  Complex df = 0.0;
  for (std::size_t i = 0; i < kt.size(); ++i) {
    const double a = kt.node(i);
    const Complex term = w[i] * kt[i] * std::exp(-s * a);
    f += term;
    df -= a * term;
  }
  return {f - 1.0, df};
}

std::optional<Complex> damped_newton(const Equilibrium& eq, Complex s) {
  auto cur = residual_and_slope(eq, s);
  for (int it = 0; it < 100; ++it) {
    if (std::abs(cur.f) < 1e-14) break;
    if (std::abs(cur.df) == 0.0) return std::nullopt;
    const Complex step = cur.f / cur.df;
    double theta = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Complex trial = s - theta * step;
      const auto next = residual_and_slope(eq, trial);
      if (std::abs(next.f) < std::abs(cur.f)) {
        s = trial;
        cur = next;
        moved = true;
        break;
      }
      theta *= 0.5;
    }
    if (!moved) break;
  }
  if (!(std::abs(cur.f) < kRootTolerance) || !std::isfinite(s.real()) ||
      !std::isfinite(s.imag())) {
    return std::nullopt;
  }
  return s;
}

// RK4 step that splits at a saturation switch: the right-hand side has a
// kink there, which would cost the step three orders of accuracy.
template <class Rhs, class Margin>
Eigen::VectorXd step_across_switch(Rhs&& rhs, Margin&& margin, double t, const Eigen::VectorXd& x,
                                   double dt) {
  const Eigen::VectorXd full = numerics::rk4_step(rhs, t, x, dt);
  const double m0 = margin(t, x);
  if ((m0 > 0.0) == (margin(t + dt, full) > 0.0)) return full;
  double lo = 0.0;
  double hi = dt;
  while (hi - lo > 1e-13 * dt) {
    const double mid = 0.5 * (lo + hi);
    const bool same = (margin(t + mid, numerics::rk4_step(rhs, t, x, mid)) > 0.0) == (m0 > 0.0);
    (same ? lo : hi) = mid;
  }
  const Eigen::VectorXd at_switch = numerics::rk4_step(rhs, t, x, hi);
  return numerics::rk4_step(rhs, t + hi, at_switch, dt - hi);
}

}  // namespace

Complex characteristic_residual(const Equilibrium& eq, Complex s) {
  return residual_and_slope(eq, s).f;
}

std::vector<Complex> characteristic_roots(const Equilibrium& eq, std::size_t count) {
  if (count < 2 || count % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "root count must be even and at least 2");
  }
  const std::size_t pairs = count / 2 - 1;
  const double a_max = eq.k_tilde.length();
  const double band = 6.0 * std::numbers::pi / a_max;

  // Simpson sums are periodic in the frequency (period 2 pi / h), so Newton
  // can land on aliases of s = 0. Only roots inside the searched strip count.
  const double omega_cap = std::min(band * (kMaxBands + 1), 0.25 * std::numbers::pi / eq.k_tilde.spacing());
  std::vector<Complex> found;
  auto add = [&](Complex r) {
    if (r.imag() <= 1e-6 || r.imag() > omega_cap) return;
    for (const auto& f : found) {
      if (std::abs(f - r) < kDedupDistance) return;
    }
    found.push_back(r);
  };

  int bands_after_enough = 0;
  for (int b = 0; b < kMaxBands; ++b) {
    for (int i = 0; i <= 14; ++i) {
      const double sigma = -6.0 + 0.5 * i;
      for (int j = 0; j <= 24; ++j) {
        const double omega = band * (b + j / 24.0);
        if (auto r = damped_newton(eq, Complex(sigma, omega))) add(*r);
      }
    }
    if (found.size() >= pairs && ++bands_after_enough >= 2) break;
  }
  if (found.size() < pairs) {
    throw Error(ErrorCode::RootSearchExhausted,
                "found " + std::to_string(found.size()) + " complex roots, need " +
                    std::to_string(pairs));
  }
  std::sort(found.begin(), found.end(),
            [](Complex a, Complex b) { return a.real() > b.real(); });
  std::vector<Complex> out{Complex(0.0, 0.0)};
  out.insert(out.end(), found.begin(), found.begin() + static_cast<long>(pairs));
  return out;
}

GalerkinBasis build_basis(const Profile& x0, const Equilibrium& eq, const ModelParams& params,
                          const std::vector<Complex>& roots, std::size_t n) {
  if (n < 2 || n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "basis size must be even");
  if (roots.size() < n / 2) {
    throw Error(ErrorCode::InvalidArgument, "not enough characteristic roots for the basis");
  }
  const double a_max = params.age_max();
  const std::size_t nodes = params.nodes();
  const auto& mu = params.mu();
  const auto& xs = eq.x_star;

  GalerkinBasis basis;
  basis.roots.assign(roots.begin(), roots.begin() + static_cast<long>(n / 2));
  basis.phi.push_back(params.sample(x0));
  basis.dphi.push_back(x0.sample_derivative(a_max, nodes));

  std::vector<double> dxs(nodes);
  for (std::size_t i = 0; i < nodes; ++i) dxs[i] = -(mu[i] + eq.d_star) * xs[i];
  basis.phi.push_back(xs);
  basis.dphi.emplace_back(a_max, dxs);

  for (std::size_t k = 1; k < n / 2; ++k) {
    const double sigma = roots[k].real();
    const double omega = roots[k].imag();
    std::vector<double> c(nodes), s(nodes), dc(nodes), ds(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double a = xs.node(i);
      const double env = std::exp(-sigma * a) * xs[i];
      const double co = std::cos(omega * a);
      const double si = std::sin(omega * a);
      const double decay = sigma + mu[i] + eq.d_star;
      c[i] = co * env;
      s[i] = si * env;
      dc[i] = (-omega * si - decay * co) * env;
      ds[i] = (omega * co - decay * si) * env;
    }
    basis.phi.emplace_back(a_max, std::move(c));
    basis.phi.emplace_back(a_max, std::move(s));
    basis.dphi.emplace_back(a_max, std::move(dc));
    basis.dphi.emplace_back(a_max, std::move(ds));
  }

  Eigen::MatrixXd gram(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      gram(i, j) = gram(j, i) = inner(basis.phi[i], basis.phi[j]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw Error(ErrorCode::DependentBasis, "trial functions are numerically dependent");
  }
  return basis;
}

GalerkinSystem assemble(const GalerkinBasis& basis, const ModelParams& params) {
  const std::size_t n = basis.size();
  const auto& mu = params.mu();
  GalerkinSystem sys;
  sys.m.resize(n, n);
  sys.n.resize(n, n);
  sys.p.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const GridFunction transport(params.age_max(), [&] {
      std::vector<double> v(params.nodes());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = basis.dphi[j][i] + mu[i] * basis.phi[j][i];
      return v;
    }());
    for (std::size_t i = 0; i < n; ++i) {
      sys.n(i, j) = -inner(basis.phi[i], transport);
      if (i <= j) sys.m(i, j) = sys.m(j, i) = inner(basis.phi[i], basis.phi[j]);
    }
    sys.p(j) = inner(params.p(), basis.phi[j]);
  }
  sys.k = sys.m.ldlt().solve(sys.n);
  sys.lambda = Eigen::VectorXd::Zero(n);
  sys.lambda(0) = 1.0;
  return sys;
}

GalerkinModel::GalerkinModel(GalerkinBasis basis, const ModelParams& params)
    : basis_(std::move(basis)), params_(params), system_(assemble(basis_, params_)) {
  const std::size_t n = basis_.size();
  const std::size_t nodes = params_.nodes();
  phi_.resize(nodes, n);
  Eigen::MatrixXd dphi(nodes, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < nodes; ++i) {
      phi_(i, j) = basis_.phi[j][i];
      dphi(i, j) = basis_.dphi[j][i];
    }
  }
  Eigen::VectorXd mu(nodes);
  for (std::size_t i = 0; i < nodes; ++i) mu(i) = params_.mu()[i];
  res_ = dphi + mu.asDiagonal() * phi_ + phi_ * system_.k;
  const auto w = numerics::simpson_weights(nodes, params_.spacing());
  weights_ = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<long>(w.size()));
}

GridFunction GalerkinModel::profile(const Eigen::VectorXd& lambda) const {
  const Eigen::VectorXd v = phi_ * lambda;
  return GridFunction(params_.age_max(), std::vector<double>(v.data(), v.data() + v.size()));
}

double GalerkinModel::min_profile(const Eigen::VectorXd& lambda) const {
  return (phi_ * lambda).minCoeff();
}

std::pair<double, GridFunction> GalerkinModel::residual(const Eigen::VectorXd& lambda) const {
  const Eigen::VectorXd r = res_ * lambda;
  const double norm = std::sqrt(std::max(0.0, weights_.dot(r.cwiseAbs2())));
  return {norm, GridFunction(params_.age_max(), std::vector<double>(r.data(), r.data() + r.size()))};
}

Eigen::VectorXd GalerkinModel::rhs(const Eigen::VectorXd& lambda, double d) const {
  return system_.k * lambda - d * lambda;
}

Eigen::VectorXd GalerkinModel::step(const Eigen::VectorXd& lambda,
                                    const std::function<double(double)>& d, double t,
                                    double dt) const {
  auto f = [&](double tau, const Eigen::VectorXd& l) -> Eigen::VectorXd { return rhs(l, d(tau)); };
  return numerics::rk4_step(f, t, lambda, dt);
}

GalerkinTrace simulate_galerkin(const GalerkinModel& model, const Trajectory& traj,
                                const ControllerGains& gains, const InputBounds& bounds,
                                const GalerkinOptions& opts) {
  gains.validate();
  if (!(opts.t_end > 0.0) || !(opts.dt > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "t_end and dt must be positive");
  }
  if (opts.record_every == 0) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
  const auto n = static_cast<long>(model.basis().size());
  const auto steps = static_cast<long>(std::llround(opts.t_end / opts.dt));

  Eigen::VectorXd x(n + 2);
  x.head(n) = model.system().lambda;
  x(n) = gains.z0(0);
  x(n + 1) = gains.z0(1);

  auto control_for = [&](double tau, const Eigen::VectorXd& s) {
    return control(model.output(s.head(n)), traj, gains, ObserverState(s(n), s(n + 1)), tau,
                   bounds);
  };
  auto rhs = [&](double tau, const Eigen::VectorXd& s) -> Eigen::VectorXd {
    const auto cs = control_for(tau, s);
    Eigen::VectorXd out(n + 2);
    out.head(n) = model.rhs(s.head(n), cs.d_applied);
    const auto dz = observer_rhs(ObserverState(s(n), s(n + 1)), cs.log_error, cs.d_ff,
                                 cs.d_applied, gains);
    out(n) = dz(0);
    out(n + 1) = dz(1);
    return out;
  };

  // Signed distance of the unsaturated law to the nearer bound; it changes
  // sign exactly when the saturation switches.
  auto margin = [&](double tau, const Eigen::VectorXd& s) {
    const auto cs = control_for(tau, s);
    const double raw = cs.d_ff + cs.d_fb;
    return std::min(raw - bounds.d_min, bounds.d_max - raw);
  };

  GalerkinTrace trace;
  std::vector<bool> taken(opts.snapshot_times.size(), false);
  double rel_sum = 0.0;
  for (long step = 0;; ++step) {
    const double t = static_cast<double>(step) * opts.dt;
    const Eigen::VectorXd lambda = x.head(n);
    const double r = model.residual(lambda).first;
    const double rel = r / l2_norm(model.profile(lambda));
    // Trapezoid time average.
    rel_sum += (step == 0 || step == steps) ? 0.5 * rel : rel;
    if (step % static_cast<long>(opts.record_every) == 0 || step == steps) {
      const auto cs = control_for(t, x);
      trace.records.push_back({t, model.output(lambda), traj.value(t), cs.d_applied, x(n),
                               x(n + 1), r, rel, model.min_profile(lambda), cs.saturated});
    }
    for (std::size_t k = 0; k < opts.snapshot_times.size(); ++k) {
      if (!taken[k] && std::abs(t - opts.snapshot_times[k]) <= 0.5 * opts.dt) {
        trace.snapshots.push_back({t, model.profile(lambda)});
        taken[k] = true;
      }
    }
    if (step == steps) break;
    x = step_across_switch(rhs, margin, t, x, opts.dt);
    if (!x.allFinite()) {
      throw Error(ErrorCode::Instability, "modal weights overflowed at t = " + std::to_string(t));
    }
    if (model.min_profile(x.head(n)) < 0.0) {
      throw Error(ErrorCode::PositivityViolation,
                  "approximate profile turned negative at t = " + std::to_string(t + opts.dt));
    }
  }
  trace.mean_relative_residual = rel_sum / static_cast<double>(steps);
  return trace;
}

}  // namespace agetrack
