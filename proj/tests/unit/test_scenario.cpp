#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "agetrack/scenario.hpp"
#include "check_error.hpp"
#include "doctest.h"

using namespace agetrack;

namespace {

const std::filesystem::path kConfigs = AGETRACK_CONFIG_DIR;

const std::string kMinimal = R"(
[model]
age_max = 2
mortality = constant 0.1
birth = quadratic-motherhood 2
output_weight = constant 1
initial_profile = linear-exp auto 1.3
d_min = 0.5
d_max = 1.5

[trajectory]
kind = constant
value = 1

[controller]
gamma = 2
l1 = 4
l2 = 8
z0 = 0 0.5

[numerics]
dt = 0.01
t_end = 3
)";

std::string with(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  s.replace(at, from.size(), to);
  return s;
}

void check_validation(const std::string& text, const std::string& path) {
  try {
    (void)parse_config(text);
    FAIL("expected a validation error for " << path);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK_MESSAGE(std::string(e.what()).find(path) != std::string::npos, e.what());
  }
}

const AcceptanceRow* row(const RunReport& rep, const std::string& name) {
  const auto it = std::find_if(rep.table.begin(), rep.table.end(),
                               [&](const auto& r) { return r.name == name; });
  return it == rep.table.end() ? nullptr : &*it;
}

}  // namespace

TEST_CASE("FNV-1a test vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("minimal configuration and defaults") {
  const auto cfg = parse_config(kMinimal, "minimal");
  CHECK(cfg.origin == "minimal");
  CHECK(cfg.hash == fnv1a(kMinimal));
  CHECK(cfg.age_max == 2.0);
  CHECK(cfg.birth.kind == "quadratic-motherhood");
  CHECK(cfg.initial_profile.auto_slope);
  CHECK(cfg.galerkin_n == 6);
  CHECK(cfg.routes == Routes::Both);
  CHECK(cfg.gains.z0(1) == 0.5);
  CHECK(cfg.trajectory->kind() == TrajectoryKind::Constant);
  CHECK_FALSE(cfg.expect.route_gap.has_value());
  const auto params = build_params(cfg);
  const auto x0 = build_initial_profile(cfg, params);
  CHECK(check_initial_condition(params.sample(x0), params));
}

TEST_CASE("shipped scenarios parse") {
  for (const char* name : {"fig2a.cfg", "fig2b.cfg", "fig3.cfg"}) {
    const auto cfg = load_config(kConfigs / name);
    CHECK(cfg.trajectory.has_value());
    CHECK(cfg.expect.route_gap.has_value());
  }
  const auto fig3 = load_config(kConfigs / "fig3.cfg");
  CHECK(fig3.trajectory->kind() == TrajectoryKind::Ramp);
  CHECK(fig3.decay_check_from == 2.0);
  CHECK_ERROR_CODE(load_config(kConfigs / "missing.cfg"), ErrorCode::ParseError);
}

TEST_CASE("trajectory kinds and the periodic frequency") {
  const auto per = parse_config(with(kMinimal, "kind = constant\nvalue = 1",
                                     "kind = periodic\ny2 = 0.79\ny3 = 0.625\nperiod = 6"));
  CHECK(per.trajectory->coefficients()[2] == doctest::Approx(2.0 * 3.14159265358979 / 6.0));
  check_validation(with(kMinimal, "kind = constant\nvalue = 1",
                        "kind = periodic\ny2 = 0.79\ny3 = 0.625\nperiod = 6\nomega = 1"),
                   "trajectory.omega");
  check_validation(with(kMinimal, "kind = constant", "kind = spiral"), "trajectory.kind");
  check_validation(with(kMinimal, "value = 1", "value = -1"), "trajectory");
}

TEST_CASE("syntax errors") {
  CHECK_ERROR_CODE(parse_config(""), ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse_config("# only a comment\n"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse_config("age_max = 2\n"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse_config("[model\n"), ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse_config(with(kMinimal, "[controller]", "[controller]\nnot a pair")),
                   ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse_config(with(kMinimal, "gamma = 2", "gamma = 2\ngamma = 3")),
                   ErrorCode::ParseError);
  CHECK_ERROR_CODE(parse_config(kMinimal + "\n[controller]\n"), ErrorCode::ParseError);
}

TEST_CASE("validation errors name the offending key") {
  check_validation(kMinimal + "\n[extra]\nx = 1\n", "extra");
  check_validation(with(kMinimal, "gamma = 2", "gamma = 2\ngain = 3"), "controller.gain");
  check_validation(with(kMinimal, "[numerics]\ndt = 0.01\nt_end = 3", ""), "numerics");
  check_validation(with(kMinimal, "age_max = 2\n", ""), "model.age_max");
  check_validation(with(kMinimal, "dt = 0.01", "dt = 0.01\ngalerkin_n = 5"), "numerics.galerkin_n");
  check_validation(with(kMinimal, "dt = 0.01", "dt = 0.01\ngalerkin_n = 2"), "numerics.galerkin_n");
  check_validation(with(kMinimal, "dt = 0.01", "dt = 0.03"), "numerics.dt");
  check_validation(with(kMinimal, "d_max = 1.5", "d_max = 0.4"), "model.d_max");
  check_validation(with(kMinimal, "gamma = 2", "gamma = two"), "controller.gamma");
  check_validation(with(kMinimal, "z0 = 0 0.5", "z0 = 0"), "controller.z0");
  check_validation(with(kMinimal, "mortality = constant 0.1", "mortality = cubic 0.1"),
                   "model.mortality");
  check_validation(with(kMinimal, "birth = quadratic-motherhood 2", "birth = linear-exp auto 1"),
                   "model");
  check_validation(kMinimal + "\n[outputs]\nsnapshots = 1 4\n", "outputs.snapshots");
  check_validation(kMinimal + "\n[certificate]\ndecay_check_from = 3\n",
                   "certificate.decay_check_from");
  check_validation(kMinimal + "\n[run]\nroutes = neither\n", "run.routes");
}

TEST_CASE("route names") {
  CHECK(parse_routes("galerkin") == Routes::Galerkin);
  CHECK(std::string(to_string(Routes::Oracle)) == "oracle");
  CHECK_ERROR_CODE(parse_routes("x"), ErrorCode::ValidationError);
}

TEST_CASE("route comparison") {
  const std::vector<double> t{0.0, 1.0, 2.0};
  const auto m = compare_routes(t, {1.0, 2.0, 4.0}, t, {1.0, 2.1, 4.0});
  // Normalised by the sup norm of the second series.
  CHECK(m.y_linf == doctest::Approx(0.1 / 4.0));
  CHECK(m.y_l2 > 0.0);
  CHECK(compare_routes(t, {1.0, 2.0, 4.0}, t, {1.0, 2.0, 4.0}).y_linf == 0.0);
  CHECK_ERROR_CODE(compare_routes(t, {1.0, 2.0, 4.0}, {0.0, 1.0}, {1.0, 2.0}), ErrorCode::GridMismatch);
  CHECK_ERROR_CODE(compare_routes(t, {1.0, 2.0, 4.0}, {0.0, 1.5, 2.0}, {1.0, 2.0, 4.0}),
                   ErrorCode::GridMismatch);
}

TEST_CASE("constant reference run from the minimal configuration") {
  const auto cfg = parse_config(kMinimal);
  RunOptions opts;
  opts.write_files = false;
  const auto rep = run(cfg, opts);
  CHECK(rep.passed());
  CHECK(rep.galerkin.has_value());
  CHECK(rep.oracle.has_value());
  REQUIRE(rep.routes.has_value());
  CHECK(rep.routes->y_linf < 0.01);
  CHECK(rep.certificate.has_value());
  CHECK(rep.certificate->has_rate);
  CHECK(rep.validity.valid);
  for (const auto& w : rep.warnings) CHECK_MESSAGE(w.rfind("input saturated", 0) == 0, w);
  CHECK(rep.text().find("[acceptance]") != std::string::npos);

  opts.routes = Routes::Oracle;
  const auto only = run(cfg, opts);
  CHECK_FALSE(only.galerkin.has_value());
  CHECK_FALSE(only.routes.has_value());
}

TEST_CASE("transition scenario passes its own expectations and verification") {
  const auto cfg = load_config(kConfigs / "fig2a.cfg");
  RunOptions opts;
  opts.write_files = false;
  const auto rep = run(cfg, opts);
  CHECK_MESSAGE(rep.passed(), rep.text());
  for (const char* name : {"input_bounds", "positivity", "route_agreement", "set_point", "tracking",
                           "observer"}) {
    CHECK_MESSAGE(row(rep, name) != nullptr, name);
  }
  const auto ver = verify(cfg);
  CHECK_MESSAGE(ver.passed(), ver.text());
  CHECK(row(ver, "clf_decay") != nullptr);
}

TEST_CASE("periodic scenario is flagged as leaving the rate band") {
  const auto cfg = load_config(kConfigs / "fig2b.cfg");
  RunOptions opts;
  opts.write_files = false;
  const auto rep = run(cfg, opts);
  CHECK_FALSE(rep.validity.valid);
  CHECK_FALSE(rep.warnings.empty());
  REQUIRE(rep.certificate.has_value());
  CHECK_FALSE(rep.certificate->has_rate);
  const auto ver = verify(cfg);
  CHECK(row(ver, "clf_decay") == nullptr);
}

TEST_CASE("output files") {
  auto cfg = parse_config(kMinimal);
  cfg.snapshots = {1.0, 2.0};
  const auto dir = std::filesystem::temp_directory_path() / "agetrack_unit_outputs";
  std::filesystem::remove_all(dir);
  RunOptions opts;
  opts.out_dir = dir;
  const auto rep = run(cfg, opts);
  for (const char* f : {"galerkin.csv", "galerkin_profiles.csv", "oracle.csv", "oracle_profiles.csv",
                        "report.txt"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
  }
  std::ifstream in(dir / "oracle.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,eta,delta,z1,z2,D,y,y_ref,log_error,W,C");
  std::ifstream g(dir / "galerkin.csv");
  std::getline(g, header);
  CHECK(header == "t,y_sim,y_ref,D,z1,z2,r,min_profile");
  std::filesystem::remove_all(dir);
}
