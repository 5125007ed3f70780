#include <cmath>

#include "agetrack/model.hpp"
#include "check_error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace agetrack;

TEST_CASE("profiles evaluate closed forms and exact derivatives") {
  const auto q = Profile::quadratic_motherhood(2.0, 2.0);
  CHECK(q.value(0.5) == doctest::Approx(1.5));
  CHECK(q.derivative(0.5) == doctest::Approx(2.0));
  const auto le = Profile::linear_exp(0.3, 1.3);
  for (double a : {0.0, 0.7, 1.9}) {
    const double fd = (le.value(a + 1e-6) - le.value(a - 1e-6)) / 2e-6;
    CHECK(le.derivative(a) == doctest::Approx(fd).epsilon(1e-7));
  }
  CHECK(Profile::constant(0.1).derivative(1.0) == 0.0);
  CHECK(q.scaled(3.0).value(1.0) == doctest::Approx(6.0));

  const auto tab = Profile::table(GridFunction::sample(2.0, 201, [](double a) { return a * a * a; }));
  CHECK_FALSE(tab.analytic());
  CHECK(tab.value(1.0) == doctest::Approx(1.0));
  CHECK(tab.derivative(1.0) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(tab.derivative(0.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_ERROR_CODE(Profile::quadratic_motherhood(1.0, 0.0), ErrorCode::InvalidArgument);
}

TEST_CASE("model parameters are validated") {
  auto mk = [](double a, double mu, double k, double p, double lo, double hi) {
    return ModelParams(a, Profile::constant(mu), Profile::constant(k), Profile::constant(p), lo, hi);
  };
  CHECK_ERROR_CODE(mk(0.0, 0.1, 1.0, 1.0, 0.5, 1.5), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(mk(2.0, -0.1, 1.0, 1.0, 0.5, 1.5), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(mk(2.0, 0.1, 0.0, 1.0, 0.5, 1.5), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(mk(2.0, 0.1, 1.0, 0.0, 0.5, 1.5), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(mk(2.0, 0.1, 1.0, 1.0, 1.5, 0.5), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(mk(2.0, 0.1, 1.0, 1.0, -0.1, 0.5), ErrorCode::InvalidArgument);
  CHECK_NOTHROW(mk(2.0, 0.0, 1.0, 1.0, 0.0, 0.5));
}

TEST_CASE("equilibrium matches the closed-form Lotka-Sharpe root") {
  const auto params = oracle::trial_params();
  const auto eq = solve_equilibrium(params);
  CHECK(eq.d_star == doctest::Approx(oracle::d_star()).epsilon(1e-8));
  CHECK(std::abs(lotka_sharpe_residual(eq.d_star, params)) < 1e-10);
  CHECK(integrate(eq.k_tilde) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(inner(params.p(), eq.x_star) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eq.x_star_at(0.7) == doctest::Approx(std::exp(-(eq.d_star + 0.1) * 0.7) / eq.normalizer));
  // Exact derivative of k~ against differencing the closed form.
  for (std::size_t i : {10u, 200u, 390u}) {
    const double a = eq.k_tilde.node(i);
    const double fd = (oracle::k_tilde(a + 1e-6, eq.d_star) - oracle::k_tilde(a - 1e-6, eq.d_star)) / 2e-6;
    CHECK(eq.k_tilde_prime[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("residual is strictly decreasing with the analytic slope") {
  const auto params = oracle::trial_params();
  double prev = lotka_sharpe_residual(0.0, params);
  for (double d = 0.25; d < 4.0; d += 0.25) {
    const double r = lotka_sharpe_residual(d, params);
    CHECK(r < prev);
    prev = r;
    const double fd = (lotka_sharpe_residual(d + 1e-6, params) - lotka_sharpe_residual(d - 1e-6, params)) / 2e-6;
    CHECK(lotka_sharpe_slope(d, params) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("equilibrium failure modes") {
  // Too weak a birth modulus: the population dies out even without dilution.
  CHECK_ERROR_CODE(solve_equilibrium(oracle::trial_params(401, 0.1)), ErrorCode::NoRoot);
}

TEST_CASE("calibration inverts the equilibrium map") {
  const auto params = oracle::trial_params();
  const auto shape = params.sample(Profile::quadratic_motherhood(1.0, 2.0));
  const double k0 = calibrate_birth_modulus(shape, 1.0, params);
  CHECK(k0 == doctest::Approx(oracle::birth_modulus_for(1.0)).epsilon(1e-8));
  const auto eq = solve_equilibrium(params.with_birth(Profile::quadratic_motherhood(k0, 2.0)));
  CHECK(eq.d_star == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_ERROR_CODE(calibrate_birth_modulus(params.sample(Profile::constant(-1.0)), 1.0, params),
                   ErrorCode::DegenerateShape);
  CHECK_ERROR_CODE(calibrate_birth_modulus(params.sample(Profile::constant(0.0)), 1.0, params),
                   ErrorCode::DegenerateShape);
  CHECK_ERROR_CODE(
      calibrate_birth_modulus(GridFunction::sample(2.0, 11, [](double) { return 1.0; }), 1.0, params),
      ErrorCode::GridMismatch);
}

TEST_CASE("compatible initial profiles") {
  const auto params = oracle::trial_params();
  const double slope = compatible_linear_exp_slope(1.3, params);
  const auto x0 = params.sample(Profile::linear_exp(slope, 1.3));
  CHECK(std::abs(compatibility_gap(x0, params)) < 1e-12);
  CHECK(check_initial_condition(x0, params));
  CHECK_FALSE(check_initial_condition(params.sample(Profile::linear_exp(0.0, 1.3)), params));
  CHECK_FALSE(check_initial_condition(params.sample(Profile::constant(-1.0)), params));
}
