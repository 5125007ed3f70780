#include "agetrack/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "agetrack/error.hpp"
#include "agetrack/numerics.hpp"

namespace agetrack {

namespace {

struct Eig2 {
  double lo;
  double hi;
};

Eig2 sym_eig(double a, double b, double d) {
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  return {mean - rad, mean + rad};
}

double eq26_margin_first(double l1, double l2, double p1, double p2) {
  const double lhs = 2.0 + l1 * p1 - 2.0 * l2 * p2;
  return 8.0 * l1 * p1 - 4.0 * l2 * p1 * p1 - lhs * lhs;
}

}  // namespace

double b3_integral(const Equilibrium& eq, double lambda, double sigma) {
  const auto& kt = eq.k_tilde;
  const double h = kt.spacing();
  const auto cum = numerics::cumulative_integral(kt.values(), h);
  const double total = cum.back();
  std::vector<double> moment(kt.size());
  for (std::size_t i = 0; i < kt.size(); ++i) moment[i] = kt.node(i) * kt[i];
  const double m1 = numerics::simpson(moment, h);
  std::vector<double> f(kt.size());
  for (std::size_t i = 0; i < kt.size(); ++i) {
    const double a = kt.node(i);
    f[i] = std::exp(sigma * a) * std::abs(kt[i] - lambda * (total - cum[i]) / m1);
  }
  return numerics::simpson(f, h);
}

B3Result b3_search(const Equilibrium& eq) {
  constexpr int kGrid = 2000;
  auto lam = [](int i) { return std::pow(10.0, -3.0 + 5.0 * i / (kGrid - 1)); };
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double v = b3_integral(eq, lam(i));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = lam(std::max(0, best - 1));
  const double hi = lam(std::min(kGrid - 1, best + 1));
  const auto m = numerics::golden_section([&](double l) { return b3_integral(eq, l); }, lo, hi,
                                          1e-10);
  B3Result out = m.value < best_val ? B3Result{m.x, m.value} : B3Result{lam(best), best_val};
  if (!(out.value < 1.0)) {
    throw Error(ErrorCode::B3Fail, "no lambda brings the B3 integral below one (min " +
                                       std::to_string(out.value) + ")");
  }
  return out;
}

double sigma_search(const Equilibrium& eq, double lambda) {
  auto f = [&](double s) { return b3_integral(eq, lambda, s); };
  if (!(f(0.0) < 1.0)) throw Error(ErrorCode::B3Fail, "B3 does not hold for this lambda");
  double lo = 0.0;
  double hi = 1.0;
  while (f(hi) < 1.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3) throw Error(ErrorCode::InvalidArgument, "sigma search did not bracket");
  }
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

ObserverQuadratic observer_constants(double l1, double l2, double p1, double p2) {
  ObserverQuadratic q;
  q.p1 = p1;
  q.p2 = p2;
  const auto p = sym_eig(1.0, -0.5 * p1, p2);
  q.k1 = p.lo;
  q.k2 = p.hi;
  const double off = l2 * p2 - 0.5 * l1 * p1 - 1.0;
  const auto pt = sym_eig(2.0 * l1 - l2 * p1, off, p1);
  q.k1_tilde = pt.lo;
  q.k2_tilde = pt.hi;
  q.beta1 = q.k1_tilde / (4.0 * q.k2);
  const double u = 2.0 * l1 - l2 * p1;
  const double v = l1 * p1 - 2.0 * l2 * p2;
  q.beta2 = (u * u + v * v) / (2.0 * q.k1_tilde);
  return q;
}

bool observer_pair_feasible(double l1, double l2, double p1, double p2) {
  if (!(p1 > 0.0) || !(p2 > 0.0)) return false;
  if (!(eq26_margin_first(l1, l2, p1, p2) > 0.0)) return false;
  if (!(p1 * p1 < 4.0 * p2)) return false;
  const auto q = observer_constants(l1, l2, p1, p2);
  return q.k1 > 0.0 && q.k1_tilde > 0.0;
}

ObserverQuadratic observer_quadratic(double l1, double l2) {
  if (!(l1 > 0.0) || !(l2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "observer gains must be positive");
  }
  constexpr int kGrid = 200;
  auto grid = [](int i) { return std::pow(10.0, -3.0 + 4.0 * i / (kGrid - 1)); };
  bool found = false;
  ObserverQuadratic best;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double p1 = grid(i);
      const double p2 = grid(j);
      if (!observer_pair_feasible(l1, l2, p1, p2)) continue;
      const auto q = observer_constants(l1, l2, p1, p2);
      if (!found || q.beta1 > best.beta1) {
        best = q;
        found = true;
      }
    }
  }
  if (!found) {
    throw Error(ErrorCode::NoFeasiblePair, "no (p1, p2) on the search grid satisfies the "
                                           "observer quadratic-form conditions");
  }
  return best;
}

double Certificate::gain_floor() const {
  return 8.0 * (d_max - d_min) *
         (1.0 / (gamma * std::sqrt(observer.k1)) +
          std::sqrt(2.0) * std::exp(sigma * age_max) / std::sqrt(big_m));
}

Certificate build_certificate(const Equilibrium& eq, const ModelParams& params,
                              const ControllerGains& gains) {
  gains.validate();
  Certificate c;
  c.gamma = gains.gamma;
  c.l1 = gains.l1;
  c.l2 = gains.l2;
  c.d_min = params.d_min();
  c.d_max = params.d_max();
  c.d_star = eq.d_star;
  c.age_max = params.age_max();

  const auto b3 = b3_search(eq);
  c.lambda_b3 = b3.lambda;
  c.b3_value = b3.value;
  c.sigma = sigma_search(eq, b3.lambda);
  c.observer = observer_quadratic(gains.l1, gains.l2);

  const double growth = std::exp(2.0 * c.sigma * c.age_max);
  c.big_m = 2.0 * c.observer.beta2 * growth / c.sigma;
  c.beta = std::min(c.observer.beta1, c.sigma - growth * c.observer.beta2 / c.big_m);
  c.alpha1 = 1.1 * c.gain_floor() / c.beta;
  const double shape = std::min(std::sqrt(c.observer.k1), std::sqrt(0.5 * c.big_m));
  c.alpha1 = std::max(c.alpha1, 2.0 / shape);
  c.alpha2 = 1.0;
  c.mu2 = 8.0 * (c.d_max - c.d_min) / c.gamma;
  return c;
}

void rate_constants(Certificate& cert, double inf_rate, double sup_rate) {
  cert.inf_rate = inf_rate;
  cert.sup_rate = sup_rate;
  const double room = std::min({1.0, cert.d_star - cert.d_min - sup_rate,
                                cert.d_max - cert.d_star + inf_rate});
  cert.mu1 = std::min(2.0, cert.gamma) * room;
  if (!(cert.mu1 > 0.0)) {
    cert.has_rate = false;
    throw Error(ErrorCode::InvalidTrajectory,
                "reference rate leaves the admissible band; mu1 = " + std::to_string(cert.mu1));
  }
  cert.l_rate = std::min(cert.beta - cert.gain_floor() / cert.alpha1, cert.mu1);
  cert.has_rate = true;
}

void rate_constants(Certificate& cert, const Trajectory& traj, double t_from, double horizon) {
  const auto rep = validate(traj, cert.d_star, cert.d_min, cert.d_max,
                            traj.characteristic_horizon(horizon), t_from);
  rate_constants(cert, rep.inf_rate, rep.sup_rate);
}

std::vector<std::string> Certificate::check_invariants() const {
  std::vector<std::string> bad;
  const auto& o = observer;
  if (!(eq26_margin_first(l1, l2, o.p1, o.p2) > 0.0)) bad.emplace_back("observer pair inequality");
  if (!(o.p1 * o.p1 < 4.0 * o.p2)) bad.emplace_back("p1^2 < 4 p2");
  if (!(big_m * sigma > o.beta2 * std::exp(2.0 * sigma * age_max))) {
    bad.emplace_back("M sigma > beta2 e^{2 sigma A}");
  }
  if (!(b3_value < 1.0)) bad.emplace_back("b3_value < 1");
  const std::pair<const char*, double> positive[] = {
      {"sigma", sigma},   {"lambda_b3", lambda_b3}, {"p1", o.p1},
      {"p2", o.p2},       {"big_m", big_m},         {"alpha1", alpha1},
      {"alpha2", alpha2}, {"k1", o.k1},             {"k2", o.k2},
      {"k1_tilde", o.k1_tilde}, {"k2_tilde", o.k2_tilde}, {"beta1", o.beta1},
      {"beta2", o.beta2}, {"beta", beta},           {"mu2", mu2}};
  for (const auto& [name, value] : positive) {
    if (!(value > 0.0)) bad.emplace_back(std::string(name) + " > 0");
  }
  if (!(alpha1 * std::min(std::sqrt(o.k1), std::sqrt(0.5 * big_m)) >= 2.0)) {
    bad.emplace_back("alpha1 min(sqrt K1, sqrt(M/2)) >= 2");
  }
  if (!(alpha1 > gain_floor() / beta)) bad.emplace_back("alpha1 above its lower bound");
  if (has_rate) {
    if (!(mu1 > 0.0)) bad.emplace_back("mu1 > 0");
    if (!(l_rate > 0.0)) bad.emplace_back("l_rate > 0");
  }
  return bad;
}

std::string Certificate::dump() const {
  std::ostringstream os;
  os.precision(12);
  const auto& o = observer;
  os << "sigma = " << sigma << '\n'
     << "lambda_b3 = " << lambda_b3 << '\n'
     << "b3_value = " << b3_value << '\n'
     << "p1 = " << o.p1 << '\n'
     << "p2 = " << o.p2 << '\n'
     << "k1 = " << o.k1 << '\n'
     << "k2 = " << o.k2 << '\n'
     << "k1_tilde = " << o.k1_tilde << '\n'
     << "k2_tilde = " << o.k2_tilde << '\n'
     << "beta1 = " << o.beta1 << '\n'
     << "beta2 = " << o.beta2 << '\n'
     << "big_m = " << big_m << '\n'
     << "beta = " << beta << '\n'
     << "alpha1 = " << alpha1 << '\n'
     << "alpha2 = " << alpha2 << '\n'
     << "mu2 = " << mu2 << '\n';
  if (has_rate) {
    os << "inf_rate = " << inf_rate << '\n'
       << "sup_rate = " << sup_rate << '\n'
       << "mu1 = " << mu1 << '\n'
       << "l_rate = " << l_rate << '\n';
  } else {
    os << "l_rate = unavailable\n";
  }
  return os.str();
}

ClfValue clf_value(const Certificate& cert, double eta, const ObserverState& e, double w,
                   double c) {
  const auto& o = cert.observer;
  const double j = e(0) * e(0) - o.p1 * e(0) * e(1) + o.p2 * e(1) * e(1);
  const double ratio = w / c;
  const double q = j + 0.5 * cert.big_m * ratio * ratio;
  return {eta * eta + cert.alpha1 * std::sqrt(q) + cert.alpha2 * q, q};
}

ClfValue clf_value(const Certificate& cert, const DelayState& state) {
  const ObserverState e(state.z(0) - state.eta, state.z(1) - cert.d_star);
  const double w = DelayModel::history_weighted_norm(state.psi, cert.sigma, cert.age_max);
  const double c = DelayModel::history_floor(state.psi, cert.age_max);
  return clf_value(cert, state.eta, e, w, c);
}

ClfValue clf_value(const Certificate& cert, const DelayModel& model, const GridFunction& x,
                   const ObserverState& z, const Trajectory& traj, double t) {
  if (!x.is_positive()) throw Error(ErrorCode::LogDomain, "profile must be positive");
  const double y_ref = traj.value(t);
  const double r = model.pi_functional(x) / y_ref;
  const double eta = std::log(r);
  const auto& xs = model.equilibrium().x_star;
  double num = 0.0;
  double den = r;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ratio = x[i] / (xs[i] * y_ref);
    num = std::max(num, std::exp(-cert.sigma * x.node(i)) * std::abs(ratio - r));
    den = std::min(den, ratio);
  }
  const ObserverState e(z(0) - eta, z(1) - cert.d_star);
  // Both num and den carry a factor e^eta, so num / den is the delay form's w / c.
  return clf_value(cert, eta, e, num, den);
}

std::vector<double> clf_trace(const Certificate& cert, const OracleTrace& trace) {
  std::vector<double> v;
  v.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    const ObserverState e(r.z1 - r.eta, r.z2 - cert.d_star);
    v.push_back(clf_value(cert, r.eta, e, r.w, r.c).v);
  }
  return v;
}

InequalityReport check_forward_difference(const std::vector<double>& t,
                                          const std::vector<double>& x,
                                          const std::vector<double>& bound,
                                          const std::vector<double>& slack) {
  if (t.size() != x.size() || t.size() != bound.size() || t.size() != slack.size()) {
    throw Error(ErrorCode::GridMismatch, "trace columns differ in length");
  }
  InequalityReport rep;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double fd = (x[i + 1] - x[i]) / (t[i + 1] - t[i]);
    const double excess = fd - bound[i] - slack[i];
    ++rep.checked;
    if (excess > 0.0) {
      if (rep.violations == 0) rep.first_violation_t = t[i];
      ++rep.violations;
      rep.max_excess = std::max(rep.max_excess, excess);
    }
  }
  return rep;
}

std::vector<double> halving_slack(const std::vector<double>& t_coarse,
                                  const std::vector<double>& x_coarse,
                                  const std::vector<double>& t_fine,
                                  const std::vector<double>& x_fine) {
  if (t_coarse.size() < 2 || x_coarse.size() != t_coarse.size() ||
      x_fine.size() != t_fine.size() || t_fine.size() < 2 * t_coarse.size() - 1) {
    throw Error(ErrorCode::GridMismatch, "fine trace must double the coarse sampling");
  }
  std::vector<double> slack(t_coarse.size(), 0.0);
  for (std::size_t i = 0; i + 1 < t_coarse.size(); ++i) {
    const double dt = t_coarse[i + 1] - t_coarse[i];
    if (std::abs(t_fine[2 * i] - t_coarse[i]) > 1e-9 * dt) {
      throw Error(ErrorCode::GridMismatch, "fine and coarse sample times disagree");
    }
    const double fc = (x_coarse[i + 1] - x_coarse[i]) / dt;
    const double ff = (x_fine[2 * i + 1] - x_fine[2 * i]) / (t_fine[2 * i + 1] - t_fine[2 * i]);
    slack[i] = 2.0 * std::abs(fc - ff);
  }
  return slack;
}

std::vector<double> rounding_slack(const Certificate& cert, const OracleTrace& trace,
                                   const std::vector<double>& v) {
  const auto& r = trace.records;
  if (v.size() != r.size()) throw Error(ErrorCode::GridMismatch, "V and trace differ in length");
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double gain = cert.alpha1 * std::sqrt(cert.observer.k2);
  std::vector<double> dv(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double scale = std::abs(r[i].eta) + std::abs(r[i].z1) + std::abs(r[i].z2) + cert.d_star;
    dv[i] = 4.0 * eps * (v[i] + gain * scale);
  }
  std::vector<double> slack(v.size(), 0.0);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    slack[i] = (dv[i] + dv[i + 1]) / (r[i + 1].t - r[i].t);
  }
  return slack;
}

DecayReport verify_decay(const std::vector<double>& t, const std::vector<double>& v,
                         double l_rate, const std::vector<double>& slack) {
  std::vector<double> bound(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    bound[i] = -l_rate * v[i] / (1.0 + std::sqrt(v[i]));
  }
  DecayReport rep;
  rep.differential = check_forward_difference(t, v, bound, slack);
  if (!v.empty() && v.front() > 0.0) {
    const double v0 = v.front();
    const double log_cap = std::log(v0) + std::max(0.0, v0 - 1.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] <= 0.0) continue;
      if (std::log(v[i]) > log_cap - 0.5 * l_rate * (t[i] - t.front())) {
        ++rep.integrated_violations;
      }
    }
  }
  return rep;
}

double overshoot_log_bound(double varsigma0, double e0_norm, const Certificate& cert) {
  if (varsigma0 < 0.0 || e0_norm < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "overshoot arguments must be nonnegative");
  }
  const double z = varsigma0 + e0_norm;
  if (z == 0.0) return -std::numeric_limits<double>::infinity();
  const double kappa_psi = std::exp(2.0 * z) * std::expm1(2.0 * z);
  const double kappa_q = (cert.observer.k2 + 0.5 * cert.big_m) * (z + kappa_psi) * (z + kappa_psi);
  const double kappa_v = z * z + cert.alpha1 * std::sqrt(kappa_q) + cert.alpha2 * kappa_q;
  if (!std::isfinite(kappa_v)) return std::numeric_limits<double>::infinity();
  return cert.sigma * cert.age_max + std::log(std::sqrt(kappa_v) + kappa_v) +
         std::max(0.0, kappa_v - 1.0);
}

double overshoot_bound(double varsigma0, double e0_norm, const Certificate& cert) {
  return std::exp(overshoot_log_bound(varsigma0, e0_norm, cert));
}

SaturationFactReport saturation_fact_check(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SaturationFactReport rep;
  rep.samples = samples;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    // Log-uniform magnitudes over [1e-4, 1e4] exercise every case.
    const double a = std::pow(10.0, -4.0 + 8.0 * unit(rng));
    const double b = std::pow(10.0, -4.0 + 8.0 * unit(rng));
    const double mag = std::pow(10.0, -4.0 + 8.0 * unit(rng));
    const double z = unit(rng) < 0.5 ? -mag : mag;
    const double lhs = z * saturate(z, -a, b);
    const double rhs = std::min({1.0, a, b}) * z * z / (1.0 + std::abs(z));
    const double margin = lhs - rhs;
    rep.min_margin = std::min(rep.min_margin, margin);
    if (margin < 0.0) ++rep.violations;
  }
  return rep;
}

}  // namespace agetrack
