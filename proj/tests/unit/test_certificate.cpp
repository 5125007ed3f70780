#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "agetrack/certificate.hpp"
#include "check_error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace agetrack;

namespace {

struct Fixture {
  ModelParams params = oracle::trial_params();
  Equilibrium eq = solve_equilibrium(params);
  Certificate cert = build_certificate(eq, params, ControllerGains{});
};

}  // namespace

TEST_CASE("B3 integral agrees with fine-grid quadrature of the closed form") {
  Fixture f;
  const double dstar = oracle::d_star();
  for (double lambda : {0.3, 1.0, 2.5}) {
    for (double sigma : {0.0, 0.5}) {
      CHECK(b3_integral(f.eq, lambda, sigma) ==
            doctest::Approx(oracle::b3_integral(lambda, sigma, dstar)).epsilon(1e-5));
    }
  }
}

TEST_CASE("B3 witness and decay exponent") {
  Fixture f;
  const auto b3 = b3_search(f.eq);
  CHECK(b3.value < 1.0);
  for (double r : {0.97, 1.03}) CHECK(b3_integral(f.eq, b3.lambda * r) >= b3.value - 1e-12);
  const double sigma = sigma_search(f.eq, b3.lambda);
  CHECK(sigma > 0.0);
  CHECK(b3_integral(f.eq, b3.lambda, sigma - 1e-5) < 1.0);
  CHECK(b3_integral(f.eq, b3.lambda, sigma + 1e-5) >= 1.0);
}

TEST_CASE("observer quadratic constants match a direct eigen decomposition") {
  const double l1 = 4.0, l2 = 8.0;
  const auto q = observer_quadratic(l1, l2);
  // Conditions on the pair, recomputed here.
  const double lhs = 2.0 + l1 * q.p1 - 2.0 * l2 * q.p2;
  CHECK(lhs * lhs < 8.0 * l1 * q.p1 - 4.0 * l2 * q.p1 * q.p1);
  CHECK(q.p1 * q.p1 < 4.0 * q.p2);
  CHECK(observer_pair_feasible(l1, l2, q.p1, q.p2));

  Eigen::Matrix2d p;
  p << 1.0, -0.5 * q.p1, -0.5 * q.p1, q.p2;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ep(p);
  CHECK(q.k1 == doctest::Approx(ep.eigenvalues()(0)));
  CHECK(q.k2 == doctest::Approx(ep.eigenvalues()(1)));

  // -(L^T P + P L) for e' = L e is the dissipation matrix P~ of the quadratic.
  const Eigen::Matrix2d lm = observer_matrix(ControllerGains{});
  const Eigen::Matrix2d diss = -(lm.transpose() * p + p * lm);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ed(diss);
  CHECK(q.k1_tilde == doctest::Approx(ed.eigenvalues()(0)));
  CHECK(q.k2_tilde == doctest::Approx(ed.eigenvalues()(1)));
  CHECK(q.beta1 == doctest::Approx(q.k1_tilde / (4.0 * q.k2)));

  CHECK_FALSE(observer_pair_feasible(l1, l2, 0.0, 1.0));
  CHECK_FALSE(observer_pair_feasible(l1, l2, 3.0, 1.0));
  CHECK_ERROR_CODE(observer_quadratic(0.0, 8.0), ErrorCode::InvalidArgument);
}

TEST_CASE("certificate for the default gains is internally consistent") {
  Fixture f;
  auto c = f.cert;
  CHECK(c.check_invariants().empty());
  CHECK_FALSE(c.has_rate);
  CHECK(c.alpha2 == 1.0);
  CHECK(c.mu2 == doctest::Approx(8.0 * (1.5 - 0.5) / 2.0));
  CHECK(c.dump().find("l_rate = unavailable") != std::string::npos);

  rate_constants(c, make_transition(1.0, 3.0, 5.0));
  CHECK(c.has_rate);
  CHECK(c.l_rate > 0.0);
  CHECK(c.l_rate <= c.mu1);
  CHECK(c.check_invariants().empty());
  CHECK(c.mu1 == doctest::Approx(std::min(2.0, c.gamma) *
                                 std::min({1.0, c.d_star - c.d_min - c.sup_rate,
                                           c.d_max - c.d_star + c.inf_rate})));

  auto bad = f.cert;
  CHECK_ERROR_CODE(rate_constants(bad, make_periodic(0.79, 0.625, 2.0 * std::numbers::pi / 6.0)),
                   ErrorCode::InvalidTrajectory);
  CHECK_FALSE(bad.has_rate);

  auto broken = f.cert;
  broken.big_m = 1e-9;
  CHECK_FALSE(broken.check_invariants().empty());
}

TEST_CASE("Lyapunov functional forms") {
  Fixture f;
  const auto& c = f.cert;
  const ObserverState e(0.2, -0.1);
  const auto v = clf_value(c, 0.3, e, 0.4, 0.8);
  const double j = 0.04 + c.observer.p1 * 0.02 + c.observer.p2 * 0.01;
  const double q = j + 0.5 * c.big_m * 0.25;
  CHECK(v.q == doctest::Approx(q));
  CHECK(v.v == doctest::Approx(0.09 + c.alpha1 * std::sqrt(q) + q));
  CHECK(clf_value(c, 0.0, ObserverState::Zero(), 0.0, 1.0).v == 0.0);

  // The profile form on a reconstructed state equals the delay form.
  const DelayModel model(f.eq, f.params);
  const auto x0 = Profile::linear_exp(compatible_linear_exp_slope(1.3, f.params), 1.3);
  const auto tr = make_transition(1.0, 3.0, 5.0);
  auto st = model.init(x0, tr, ObserverState(0.0, 0.5), 0.005);
  const auto from_state = clf_value(c, st);
  const auto from_profile = clf_value(c, model, model.reconstruct(st, tr).first, st.z, tr, 0.0);
  CHECK(from_profile.v == doctest::Approx(from_state.v).epsilon(1e-9));
  CHECK_ERROR_CODE(clf_value(c, model, f.params.sample(Profile::constant(-1.0)), st.z, tr, 0.0),
                   ErrorCode::LogDomain);
}

TEST_CASE("forward-difference checks and slack") {
  const std::vector<double> t{0.0, 1.0, 2.0};
  const std::vector<double> x{1.0, 0.5, 0.6};
  const std::vector<double> zero(3, 0.0);
  const auto rep = check_forward_difference(t, x, zero, zero);
  CHECK(rep.checked == 2);
  CHECK(rep.violations == 1);
  CHECK(rep.first_violation_t == 1.0);
  CHECK(rep.max_excess == doctest::Approx(0.1));
  CHECK(check_forward_difference(t, x, zero, {0.0, 0.2, 0.0}).violations == 0);
  CHECK_ERROR_CODE(check_forward_difference(t, x, zero, {0.0}), ErrorCode::GridMismatch);

  const std::vector<double> tf{0.0, 0.5, 1.0, 1.5, 2.0};
  const std::vector<double> xf{1.0, 0.8, 0.5, 0.55, 0.6};
  const auto s = halving_slack(t, x, tf, xf);
  CHECK(s[0] == doctest::Approx(2.0 * std::abs(-0.5 + 0.4)));
  CHECK(s[1] == doctest::Approx(0.0));
  CHECK(s[2] == 0.0);
  CHECK_ERROR_CODE(halving_slack(t, x, t, x), ErrorCode::GridMismatch);
}

TEST_CASE("decay verification separates fast and slow decay") {
  std::vector<double> t, v;
  for (int i = 0; i <= 400; ++i) {
    t.push_back(0.01 * i);
    v.push_back(0.5 * std::exp(-t.back()));
  }
  const std::vector<double> slack(t.size(), 0.0);
  // dV/dt = -V <= -L V / (1 + sqrt V) holds for L <= 1 + sqrt(min V).
  CHECK(verify_decay(t, v, 1.0, slack).passed());
  const auto bad = verify_decay(t, v, 3.0, slack);
  CHECK_FALSE(bad.passed());
  CHECK(bad.differential.violations > 0);
}

TEST_CASE("saturation inequality on random samples") {
  const auto rep = saturation_fact_check(100000, 3);
  CHECK(rep.samples == 100000);
  CHECK(rep.violations == 0);
  CHECK(rep.min_margin >= 0.0);
}

TEST_CASE("overshoot bound") {
  Fixture f;
  CHECK(overshoot_bound(0.0, 0.0, f.cert) == 0.0);
  const double a = overshoot_log_bound(1e-4, 1e-4, f.cert);
  const double b = overshoot_log_bound(2e-4, 1e-4, f.cert);
  CHECK(std::isfinite(b));
  CHECK(a < b);
  CHECK(overshoot_bound(1e-4, 1e-4, f.cert) == doctest::Approx(std::exp(a)));
  // Large arguments overflow the plain bound but not its logarithm.
  CHECK(std::isfinite(overshoot_log_bound(0.5, 0.5, f.cert)));
  CHECK_ERROR_CODE(overshoot_log_bound(-1.0, 0.0, f.cert), ErrorCode::InvalidArgument);
}
