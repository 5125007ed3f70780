#include <cmath>
#include <cstring>
#include <vector>

#include "agetrack/delay_oracle.hpp"
#include "check_error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace agetrack;

namespace {

struct Fixture {
  ModelParams params = oracle::trial_params();
  Equilibrium eq = solve_equilibrium(params);
  DelayModel model{eq, params};
  Profile x0 = Profile::linear_exp(compatible_linear_exp_slope(1.3, params), 1.3);
};

}  // namespace

TEST_CASE("pi weight and the projection functional") {
  Fixture f;
  const auto& pi = f.model.pi();
  CHECK(pi[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(pi[pi.size() - 1]) < 1e-14);
  CHECK(pi.min() >= 0.0);
  CHECK(f.model.pi_functional(f.eq.x_star) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(f.model.pi_functional(f.eq.x_star * 3.0) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("initial state reproduces the initial profile") {
  Fixture f;
  const auto tr = make_transition(1.0, 3.0, 5.0);
  const auto st = f.model.init(f.x0, tr, ObserverState(0.0, 0.5), 0.005);
  const auto x0g = f.params.sample(f.x0);
  CHECK(st.eta == doctest::Approx(std::log(f.model.pi_functional(x0g))));
  const auto [x, y] = f.model.reconstruct(st, tr);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(x0g[i]).epsilon(1e-12));
  CHECK(y == doctest::Approx(inner(f.params.p(), x0g)).epsilon(1e-12));
  CHECK(std::abs(f.model.zero_mode(st.psi, 0.0)) < 1e-12);
  CHECK(f.model.ide_residual(st.psi, 0.0) < 1e-6);
  CHECK(st.psi.front_time() == doctest::Approx(-2.0));
  CHECK(st.psi.back_time() == 0.0);
  CHECK_ERROR_CODE(st.psi.value_at(0.1), ErrorCode::HistoryGap);
  CHECK_ERROR_CODE(st.psi.value_at(-2.1), ErrorCode::HistoryGap);
}

TEST_CASE("initialisation failures") {
  Fixture f;
  const auto tr = make_constant(1.0);
  CHECK_ERROR_CODE(f.model.init(Profile::linear_exp(0.0, 1.3), tr, {}, 0.005), ErrorCode::InvalidIC);
  CHECK_ERROR_CODE(f.model.init(f.x0, tr, {}, 0.003), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(f.model.init(f.x0, tr, {}, 0.0), ErrorCode::InvalidArgument);
}

TEST_CASE("equilibrium profile with D = D* is a fixed point") {
  Fixture f;
  const auto tr = make_constant(1.0);
  const auto xs = Profile::linear_exp(0.0, f.eq.d_star + oracle::kMu);
  auto st = f.model.init(xs, tr, {}, 0.01);
  const double eta0 = st.eta;
  for (int n = 0; n < 500; ++n) {
    f.model.step_open_loop(st, tr, [&](double) { return f.eq.d_star; });
    CHECK(std::abs(st.psi.back().value) < 1e-9);
  }
  CHECK(st.eta == doctest::Approx(eta0).epsilon(1e-13));
}

TEST_CASE("psi evolution does not depend on the input, bit for bit") {
  Fixture f;
  const auto tr = make_constant(1.0);
  auto a = f.model.init(f.x0, tr, {}, 0.005);
  auto b = a;
  for (int n = 0; n < 800; ++n) {
    f.model.step_open_loop(a, tr, [](double) { return 0.5; });
    f.model.step_open_loop(b, tr, [](double t) { return 1.0 + 0.4 * std::sin(3.0 * t); });
  }
  REQUIRE(a.psi.size() == b.psi.size());
  for (std::size_t j = 0; j < a.psi.size(); ++j) {
    const double va = a.psi.lag(j).value;
    const double vb = b.psi.lag(j).value;
    CHECK(std::memcmp(&va, &vb, sizeof(double)) == 0);
  }
  CHECK(a.eta != b.eta);
}

TEST_CASE("open-loop output agrees with a renewal-equation solution of the PDE") {
  Fixture f;
  const auto tr = make_constant(1.0);
  auto input = [](double t) { return 0.8 + 0.3 * std::sin(t); };
  auto big_g = [](double t) { return 0.8 * t + 0.3 * (1.0 - std::cos(t)); };
  const double dt = 0.005;
  auto st = f.model.init(f.x0, tr, {}, dt);
  const std::vector<double> times{0.5, 1.0, 2.0, 3.5, 6.0};
  oracle::RenewalSolver solver{1e-3, [&](double a) { return f.x0.value(a); }};
  const auto expected = solver.output(times, big_g);
  std::size_t next = 0;
  double worst_ide = 0.0;
  for (long n = 1; next < times.size(); ++n) {
    f.model.step_open_loop(st, tr, input);
    worst_ide = std::max(worst_ide, f.model.ide_residual(st.psi, st.t));
    if (std::abs(st.t - times[next]) < 0.5 * dt) {
      const double y = f.model.reconstruct(st, tr).second;
      CHECK(y == doctest::Approx(expected[next]).epsilon(2e-5));
      ++next;
    }
  }
  CHECK(worst_ide < 1e-6);
}

TEST_CASE("psi decays and its zero mode stays at zero") {
  Fixture f;
  const auto tr = make_constant(1.0);
  auto st = f.model.init(f.x0, tr, {}, 0.005);
  for (int n = 0; n < 4000; ++n) f.model.step_open_loop(st, tr, [](double) { return 1.0; });
  CHECK(std::abs(f.model.zero_mode(st.psi, st.t)) < 1e-13);
  CHECK(DelayModel::history_weighted_norm(st.psi, 0.0, 2.0) < 1e-8);
  CHECK(DelayModel::history_floor(st.psi, 2.0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("closed-loop oracle run records consistent quantities") {
  Fixture f;
  const auto tr = make_transition(1.0, 3.0, 5.0);
  ControllerGains g;
  OracleOptions opts;
  opts.t_end = 3.0;
  opts.snapshot_times = {1.0, 2.0};
  opts.record_every = 10;
  const auto trace = simulate_oracle(f.model, f.x0, tr, g, {0.5, 1.5}, opts);
  CHECK(trace.records.size() == 61);
  CHECK(trace.snapshots.size() == 2);
  for (const auto& r : trace.records) {
    CHECK(r.d >= 0.5);
    CHECK(r.d <= 1.5);
    CHECK(r.y == doctest::Approx(r.y_ref * std::exp(r.log_error)).epsilon(1e-12));
    CHECK(r.c > 0.0);
  }
  for (const auto& s : trace.snapshots) CHECK(s.profile.is_positive());
  opts.record_every = 0;
  CHECK_ERROR_CODE(simulate_oracle(f.model, f.x0, tr, g, {0.5, 1.5}, opts), ErrorCode::InvalidArgument);
}
