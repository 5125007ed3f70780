#include "agetrack/model.hpp"

#include <cmath>
#include <string>

#include "agetrack/error.hpp"
#include "agetrack/numerics.hpp"

namespace agetrack {

namespace {

constexpr double kUpperDilution = 1e4;
constexpr double kCompatTolerance = 1e-6;

GridFunction weighted_survival(double d, const ModelParams& params) {
  const auto& cum = params.cumulative_mortality();
  std::vector<double> v(cum.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::exp(-d * cum.node(i) - cum[i]);
  }
  return GridFunction(cum.length(), std::move(v));
}

}  // namespace

ModelParams::ModelParams(double age_max, Profile mortality, Profile birth, Profile output_weight,
                         double d_min, double d_max, std::size_t nodes)
    : age_max_(age_max),
      nodes_(nodes),
      mortality_profile_(std::move(mortality)),
      birth_profile_(std::move(birth)),
      output_profile_(std::move(output_weight)),
      d_min_(d_min),
      d_max_(d_max) {
  if (!(age_max_ > 0.0) || !std::isfinite(age_max_)) {
    throw Error(ErrorCode::InvalidArgument, "maximum age A must be positive and finite");
  }
  if (nodes_ < 3) {
    throw Error(ErrorCode::InvalidArgument, "age grid needs at least 3 nodes");
  }
  if (!(d_min_ >= 0.0) || !(d_min_ < d_max_)) {
    throw Error(ErrorCode::InvalidArgument, "dilution bounds need 0 <= d_min < d_max");
  }
  mu_ = sample(mortality_profile_);
  k_ = sample(birth_profile_);
  p_ = sample(output_profile_);
  if (!mu_.is_nonnegative()) {
    throw Error(ErrorCode::InvalidArgument, "mortality must be nonnegative");
  }
  if (!k_.is_nonnegative() || !(integrate(k_) > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "birth modulus must be nonnegative with <1,k> > 0");
  }
  if (!p_.is_nonnegative() || !(integrate(p_) > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "output weight must be nonnegative with <1,p> > 0");
  }
  cum_mu_ = GridFunction(age_max_, numerics::cumulative_trapezoid(mu_.values(), mu_.spacing()));
}

ModelParams ModelParams::with_birth(Profile birth) const {
  return ModelParams(age_max_, mortality_profile_, std::move(birth), output_profile_, d_min_,
                     d_max_, nodes_);
}

double Equilibrium::survival_at(double a) const {
  return std::exp(-d_star * a - cumulative_mortality(a));
}

double lotka_sharpe_residual(double d, const ModelParams& params) {
  return inner(params.k(), weighted_survival(d, params)) - 1.0;
}

double lotka_sharpe_slope(double d, const ModelParams& params) {
  const auto s = weighted_survival(d, params);
  const auto& k = params.k();
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = -s.node(i) * k[i] * s[i];
  return numerics::simpson(v, s.spacing());
}

Equilibrium solve_equilibrium(const ModelParams& params) {
  auto residual = [&](double d) { return lotka_sharpe_residual(d, params); };

  double d_star = 0.0;
  const double r0 = residual(0.0);
  if (std::abs(r0) <= 1e-13) {
    d_star = 0.0;
  } else {
    if (r0 < 0.0) {
      throw Error(ErrorCode::NoRoot,
                  "Lotka-Sharpe residual is negative at d = 0 (population dies out "
                  "without dilution)");
    }
    double lo = 0.0;
    double hi = 1.0;
    while (residual(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > kUpperDilution) {
        throw Error(ErrorCode::NoRoot, "Lotka-Sharpe residual has no sign change on [0, 1e4]");
      }
    }
    d_star = numerics::bisect(residual, lo, hi, 1e-6);
    // Newton polish; the residual is smooth, convex and strictly decreasing.
    for (int it = 0; it < 50; ++it) {
      const double r = residual(d_star);
      const double step = r / lotka_sharpe_slope(d_star, params);
      const double next = d_star - step;
      // The bracket can end exactly at the root, so allow the bisection tolerance.
      if (next < lo - 1e-6 || next > hi + 1e-6) break;
      d_star = next;
      if (std::abs(step) < 1e-12) break;
    }
    if (std::abs(residual(d_star)) >= 1e-10) {
      throw Error(ErrorCode::NoRoot, "Newton polish failed to reach |residual| < 1e-10");
    }
  }

  Equilibrium eq;
  eq.d_star = d_star;
  eq.cumulative_mortality = params.cumulative_mortality();
  eq.survival = weighted_survival(d_star, params);
  eq.normalizer = inner(params.p(), eq.survival);
  eq.x_star = eq.survival * (1.0 / eq.normalizer);
  eq.g = eq.x_star * params.p();
  eq.k_tilde = params.k() * eq.survival;

  const auto& birth = params.birth_profile();
  if (birth.analytic()) {
    const auto& mu = params.mu();
    std::vector<double> v(mu.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double a = mu.node(i);
      v[i] = (birth.derivative(a) - (d_star + mu[i]) * birth.value(a)) * eq.survival[i];
    }
    eq.k_tilde_prime = GridFunction(params.age_max(), std::move(v));
  } else {
    eq.k_tilde_prime = GridFunction(
        params.age_max(), numerics::differentiate(eq.k_tilde.values(), eq.k_tilde.spacing()));
  }
  return eq;
}

double calibrate_birth_modulus(const GridFunction& shape, double d_star_target,
                               const ModelParams& params) {
  if (!shape.same_grid(params.k())) {
    throw Error(ErrorCode::GridMismatch, "shape must live on the model's age grid");
  }
  if (!shape.is_nonnegative()) {
    throw Error(ErrorCode::DegenerateShape, "birth shape must be nonnegative");
  }
  const double integral = inner(shape, weighted_survival(d_star_target, params));
  if (!(integral > 0.0)) {
    throw Error(ErrorCode::DegenerateShape, "weighted birth-shape integral is zero");
  }
  return 1.0 / integral;
}

double compatibility_gap(const GridFunction& x0, const ModelParams& params) {
  if (!x0.same_grid(params.k())) {
    throw Error(ErrorCode::GridMismatch, "initial profile must live on the model's age grid");
  }
  return x0[0] - inner(params.k(), x0);
}

bool check_initial_condition(const GridFunction& x0, const ModelParams& params) {
  if (!x0.is_positive()) return false;
  return std::abs(compatibility_gap(x0, params)) <= kCompatTolerance * x0.max_abs();
}

double compatible_linear_exp_slope(double rate, const ModelParams& params) {
  const auto decay = params.sample(Profile::linear_exp(0.0, rate));
  const auto ramp = GridFunction::sample(params.age_max(), params.nodes(),
                                         [](double a) { return a; });
  const double k_ramp = inner(params.k(), ramp);
  if (!(k_ramp > 0.0)) {
    throw Error(ErrorCode::DegenerateShape, "<k, a> vanishes; no compatible slope exists");
  }
  return (1.0 - inner(params.k(), decay)) / k_ramp;
}

}  // namespace agetrack
