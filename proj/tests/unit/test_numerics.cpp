#include <cmath>
#include <numbers>
#include <vector>

#include "agetrack/error.hpp"
#include "agetrack/grid_function.hpp"
#include "agetrack/numerics.hpp"
#include "check_error.hpp"
#include "doctest.h"

using namespace agetrack;

namespace {

std::vector<double> samples(std::size_t n, double len, double (*f)(double)) {
  std::vector<double> v(n);
  const double h = len / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(h * static_cast<double>(i));
  return v;
}

double cubic(double x) { return 3.0 * x * x * x - x * x + 2.0; }

}  // namespace

TEST_CASE("simpson integrates cubics exactly for even and odd interval counts") {
  // int_0^2 (3x^3 - x^2 + 2) dx = 12 - 8/3 + 4
  const double exact = 12.0 - 8.0 / 3.0 + 4.0;
  for (std::size_t n : {3u, 4u, 5u, 8u, 11u, 40u}) {
    const auto f = samples(n, 2.0, cubic);
    CHECK(numerics::simpson(f, 2.0 / static_cast<double>(n - 1)) == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("simpson weights reproduce the rule") {
  for (std::size_t n : {2u, 3u, 4u, 7u, 10u}) {
    const auto f = samples(n, 1.5, [](double x) { return std::exp(x); });
    const double h = 1.5 / static_cast<double>(n - 1);
    const auto w = numerics::simpson_weights(n, h);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * f[i];
    CHECK(acc == doctest::Approx(numerics::simpson(f, h)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(numerics::simpson(std::vector<double>{1.0}, 1.0), Error);
}

TEST_CASE("simpson converges at fourth order") {
  auto err = [](std::size_t n) {
    const auto f = samples(n, std::numbers::pi, [](double x) { return std::sin(x); });
    return std::abs(numerics::simpson(f, std::numbers::pi / static_cast<double>(n - 1)) - 2.0);
  };
  CHECK(err(41) / err(81) == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("cumulative integrals") {
  const std::size_t n = 201;
  const double h = 2.0 / 200.0;
  const auto f = samples(n, 2.0, [](double x) { return std::cos(x); });
  const auto c = numerics::cumulative_integral(f, h);
  for (std::size_t i = 0; i < n; ++i) CHECK(c[i] == doctest::Approx(std::sin(h * i)).epsilon(1e-8));

  const auto lin = samples(n, 2.0, [](double x) { return 1.0 + 2.0 * x; });
  const auto t = numerics::cumulative_trapezoid(lin, h);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = h * static_cast<double>(i);
    CHECK(t[i] == doctest::Approx(x + x * x).epsilon(1e-13));
  }
}

TEST_CASE("differentiate is exact on quartics including the ends") {
  const std::size_t n = 21;
  const double h = 1.0 / 20.0;
  const auto f = samples(n, 1.0, [](double x) { return x * x * x * x - 2.0 * x; });
  const auto d = numerics::differentiate(f, h);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = h * static_cast<double>(i);
    CHECK(d[i] == doctest::Approx(4.0 * x * x * x - 2.0).epsilon(1e-9));
  }
}

TEST_CASE("hermite reproduces cubics") {
  auto f = [](double t) { return t * t * t - 2.0 * t + 1.0; };
  auto df = [](double t) { return 3.0 * t * t - 2.0; };
  for (double t : {0.3, 0.55, 0.9, 1.2}) {
    CHECK(numerics::hermite(0.3, f(0.3), df(0.3), 1.2, f(1.2), df(1.2), t) ==
          doctest::Approx(f(t)).epsilon(1e-14));
  }
}

TEST_CASE("rk4 local error is fifth order") {
  auto rhs = [](double, double y) { return y; };
  auto err = [&](double dt) { return std::abs(numerics::rk4_step(rhs, 0.0, 1.0, dt) - std::exp(dt)); };
  CHECK(err(0.1) / err(0.05) == doctest::Approx(32.0).epsilon(0.05));
}

TEST_CASE("bisection and golden section") {
  const double r = numerics::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-12);
  CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-11));
  CHECK_THROWS_AS(numerics::bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-9), Error);
  const auto m = numerics::golden_section([](double x) { return (x - 0.7) * (x - 0.7) + 3.0; }, 0.0,
                                          2.0, 1e-10);
  CHECK(m.x == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(m.value == doctest::Approx(3.0));
}

TEST_CASE("grid functions") {
  const auto f = GridFunction::sample(2.0, 201, [](double a) { return a * a; });
  CHECK(f.spacing() == doctest::Approx(0.01));
  CHECK(f(0.5) == doctest::Approx(0.25));
  CHECK(f(0.505) == doctest::Approx(0.5 * (0.25 + 0.2601)));
  CHECK(f(-1.0) == 0.0);
  CHECK(f(5.0) == doctest::Approx(4.0));
  CHECK(integrate(f) == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
  const auto g = GridFunction::sample(2.0, 201, [](double) { return 1.0; });
  CHECK(inner(f, g) == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
  CHECK(l2_norm(g) == doctest::Approx(std::sqrt(2.0)));
  CHECK((f * g).max() == doctest::Approx(4.0));
  CHECK((2.0 * f).max_abs() == doctest::Approx(8.0));
  const auto other = GridFunction::sample(2.0, 101, [](double) { return 1.0; });
  CHECK_FALSE(f.same_grid(other));
  CHECK_ERROR_CODE(f * other, ErrorCode::GridMismatch);
  CHECK_ERROR_CODE(GridFunction(1.0, {1.0}), ErrorCode::InvalidArgument);
}
