#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agetrack/certificate.hpp"
#include "agetrack/controller.hpp"
#include "agetrack/delay_oracle.hpp"
#include "agetrack/galerkin.hpp"
#include "agetrack/model.hpp"
#include "agetrack/profile.hpp"
#include "agetrack/trajectory.hpp"

namespace agetrack {

/// Textual profile description: a named closed form with coefficients or a
/// sampled table. `auto_slope` marks "linear-exp auto <rate>", whose slope is
/// solved for boundary compatibility once the model is known.
struct ProfileSpec {
  std::string kind;
  std::vector<double> coefficients;
  bool auto_slope = false;
};

enum class Routes { Both, Galerkin, Oracle };

const char* to_string(Routes r) noexcept;
/// Throws Error(ValidationError) on an unknown name.
Routes parse_routes(const std::string& name);

struct Expectations {
  std::optional<double> route_gap;
  std::optional<double> log_error;
  double log_error_from = 0.0;
  std::optional<double> observer_error;
};

struct ScenarioConfig {
  std::string origin;
  std::uint64_t hash = 0;

  double age_max = 0.0;
  ProfileSpec mortality;
  ProfileSpec birth;
  ProfileSpec output_weight;
  ProfileSpec initial_profile;
  double d_min = 0.0;
  double d_max = 0.0;

  std::optional<Trajectory> trajectory;
  ControllerGains gains;

  std::size_t galerkin_n = 6;
  std::size_t age_nodes = ModelParams::kDefaultNodes;
  double dt = 0.005;
  double t_end = 20.0;
  std::size_t record_every = 1;

  std::string out_dir;
  std::vector<double> snapshots;
  Routes routes = Routes::Both;
  double decay_check_from = 0.0;
  Expectations expect;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a(const std::string& text);

/// Parses the INI-like scenario format described in docs/config_format.md.
/// Throws Error(ParseError) on malformed text and Error(ValidationError),
/// naming the offending "section.key", on unknown, missing or invalid keys.
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ScenarioConfig load_config(const std::filesystem::path& path);

Profile build_profile(const ProfileSpec& spec, double age_max);
ModelParams build_params(const ScenarioConfig& cfg);
/// Resolves an automatic slope against the model's birth modulus.
Profile build_initial_profile(const ScenarioConfig& cfg, const ModelParams& params);

struct RouteMetrics {
  double y_linf = 0.0;
  double y_l2 = 0.0;
  double profile_linf = 0.0;
};

/// Relative L-infinity and L2 gaps of y and of matching snapshot profiles.
/// Throws Error(GridMismatch) unless the sample times agree.
RouteMetrics compare_routes(const std::vector<double>& t_a, const std::vector<double>& y_a,
                            const std::vector<double>& t_b, const std::vector<double>& y_b);
RouteMetrics compare_routes(const GalerkinTrace& galerkin, const OracleTrace& oracle);

struct AcceptanceRow {
  std::string name;
  bool passed;
  std::string detail;
};

struct RunReport {
  std::uint64_t config_hash = 0;
  std::string origin;
  double d_star = 0.0;
  ValidityReport validity;
  std::optional<Certificate> certificate;
  std::optional<GalerkinTrace> galerkin;
  std::optional<OracleTrace> oracle;
  std::optional<RouteMetrics> routes;
  std::vector<AcceptanceRow> table;
  std::vector<std::string> warnings;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] std::string text() const;
};

struct RunOptions {
  std::optional<Routes> routes;
  std::optional<std::filesystem::path> out_dir;
  bool write_files = true;
};

/// Equilibrium, certificate (warnings on failure), requested routes, route
/// comparison and the acceptance table; writes CSV traces and report.txt
/// when an output directory is configured.
RunReport run(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Certificate and property checks without output files: certificate
/// invariants, the saturation inequality, and (for valid trajectories) the
/// CLF decay inequality on oracle runs at dt and dt / 2 from
/// decay_check_from on, with the step-halving slack.
RunReport verify(const ScenarioConfig& cfg);

/// Writes the CSV traces and the report into `dir`.
void write_outputs(const RunReport& report, const ScenarioConfig& cfg,
                   const std::filesystem::path& dir);

}  // namespace agetrack
