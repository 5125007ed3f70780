#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "agetrack/error.hpp"
#include "agetrack/galerkin.hpp"
#include "agetrack/scenario.hpp"

namespace {

constexpr int kExitFail = 2;
constexpr int kExitInput = 3;

bool is_input_error(agetrack::ErrorCode c) {
  using agetrack::ErrorCode;
  return c == ErrorCode::ParseError || c == ErrorCode::ValidationError ||
         c == ErrorCode::InvalidArgument || c == ErrorCode::InvalidIC ||
         c == ErrorCode::InvalidTrajectory;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-structured output tracking: simulation and certificate checks"};
  app.require_subcommand(1);

  std::string config;
  std::string routes;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "simulate a scenario and write traces and report");
  run->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--routes", routes, "both, galerkin or oracle");
  run->add_option("--out", out_dir, "output directory (overrides outputs.dir)");

  auto* verify = app.add_subcommand("verify", "certificate and property checks only");
  verify->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);

  auto* roots = app.add_subcommand("roots", "print the equilibrium and characteristic roots");
  roots->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
  std::size_t count = 0;
  roots->add_option("-n,--count", count, "number of basis functions (default galerkin_n)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    const auto cfg = agetrack::load_config(config);
    if (*roots) {
      const auto params = agetrack::build_params(cfg);
      const auto eq = agetrack::solve_equilibrium(params);
      const auto rs = agetrack::characteristic_roots(eq, count ? count : cfg.galerkin_n);
      std::printf("d_star = %.12g\n", eq.d_star);
      for (const auto& s : rs) std::printf("%.12g %+.12gi\n", s.real(), s.imag());
      return 0;
    }
    if (*verify) {
      const auto report = agetrack::verify(cfg);
      std::cout << report.text();
      return report.passed() ? 0 : kExitFail;
    }
    agetrack::RunOptions opts;
    if (!routes.empty()) opts.routes = agetrack::parse_routes(routes);
    if (!out_dir.empty()) opts.out_dir = out_dir;
    const auto report = agetrack::run(cfg, opts);
    std::cout << report.text();
    return report.passed() ? 0 : kExitFail;
  } catch (const agetrack::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitInput : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
