#include "agetrack/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "agetrack/error.hpp"

namespace agetrack {

namespace {

using Section = std::map<std::string, std::pair<std::string, int>>;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model",
       {"age_max", "mortality", "birth", "output_weight", "initial_profile", "d_min", "d_max"}},
      {"trajectory",
       {"kind", "value", "y4", "y1", "y2", "y3", "omega", "period", "y0", "y_delta", "t_delta"}},
      {"controller", {"gamma", "l1", "l2", "z0"}},
      {"numerics", {"galerkin_n", "age_nodes", "dt", "t_end", "record_every"}},
      {"outputs", {"dir", "snapshots"}},
      {"run", {"routes"}},
      {"certificate", {"decay_check_from"}},
      {"expect", {"route_gap", "log_error", "log_error_from", "observer_error"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ValidationError, path + ": " + what);
}

double to_double(const std::string& token, const std::string& path) {
  double v = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    invalid(path, "expected a number, got '" + token + "'");
  }
  return v;
}

std::vector<double> to_doubles(const std::vector<std::string>& tokens, std::size_t from,
                               const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = from; i < tokens.size(); ++i) out.push_back(to_double(tokens[i], path));
  return out;
}

std::size_t to_count(const std::string& token, const std::string& path) {
  const double v = to_double(token, path);
  if (v < 1.0 || v != std::floor(v)) invalid(path, "expected a positive integer");
  return static_cast<std::size_t>(v);
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Section> data) : data_(std::move(data)) {}

  bool has(const std::string& sec, const std::string& key) const {
    const auto it = data_.find(sec);
    return it != data_.end() && it->second.count(key) > 0;
  }
  const std::string& raw(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) invalid(sec + "." + key, "required key is missing");
    return data_.at(sec).at(key).first;
  }
  double number(const std::string& sec, const std::string& key) const {
    return to_double(raw(sec, key), sec + "." + key);
  }
  double number_or(const std::string& sec, const std::string& key, double fallback) const {
    return has(sec, key) ? number(sec, key) : fallback;
  }
  std::optional<double> maybe(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) return std::nullopt;
    return number(sec, key);
  }

 private:
  std::map<std::string, Section> data_;
};

ProfileSpec parse_profile(const std::string& text, const std::string& path) {
  const auto tok = split_ws(text);
  if (tok.empty()) invalid(path, "empty profile");
  ProfileSpec spec;
  spec.kind = tok[0];
  if (spec.kind == "constant" || spec.kind == "quadratic-motherhood") {
    if (tok.size() != 2) invalid(path, spec.kind + " takes one coefficient");
    spec.coefficients = to_doubles(tok, 1, path);
  } else if (spec.kind == "linear-exp") {
    if (tok.size() != 3) invalid(path, "linear-exp takes <slope|auto> <rate>");
    if (tok[1] == "auto") {
      spec.auto_slope = true;
      spec.coefficients = {0.0, to_double(tok[2], path)};
    } else {
      spec.coefficients = to_doubles(tok, 1, path);
    }
  } else if (spec.kind == "table") {
    if (tok.size() < 3) invalid(path, "table needs at least two samples");
    spec.coefficients = to_doubles(tok, 1, path);
  } else {
    invalid(path, "unknown profile kind '" + spec.kind + "'");
  }
  return spec;
}

Trajectory parse_trajectory(const Reader& r) {
  const auto& kind = r.raw("trajectory", "kind");
  const auto need = [&](const char* key) { return r.number("trajectory", key); };
  try {
    if (kind == "constant") return make_constant(need("value"));
    if (kind == "ramp") return make_ramp(need("y4"), need("y1"));
    if (kind == "transition") return make_transition(need("y0"), need("y_delta"), need("t_delta"));
    if (kind == "periodic") {
      const bool has_omega = r.has("trajectory", "omega");
      const bool has_period = r.has("trajectory", "period");
      if (has_omega == has_period) invalid("trajectory.omega", "give exactly one of omega, period");
      const double omega =
          has_omega ? need("omega") : 2.0 * std::numbers::pi / need("period");
      return make_periodic(need("y2"), need("y3"), omega);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    invalid("trajectory", e.what());
  }
  invalid("trajectory.kind", "unknown trajectory kind '" + kind + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void check_positive(double v, const std::string& path) {
  if (!(v > 0.0)) invalid(path, "must be positive");
}

}  // namespace

const char* to_string(Routes r) noexcept {
  switch (r) {
    case Routes::Both: return "both";
    case Routes::Galerkin: return "galerkin";
    case Routes::Oracle: return "oracle";
  }
  return "both";
}

Routes parse_routes(const std::string& name) {
  if (name == "both") return Routes::Both;
  if (name == "galerkin") return Routes::Galerkin;
  if (name == "oracle") return Routes::Oracle;
  invalid("run.routes", "expected both, galerkin or oracle");
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
  std::map<std::string, Section> data;
  std::string section;
  std::istringstream in(text);
  int line_no = 0;
  bool any = false;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    any = true;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (body.front() == '[') {
      if (body.back() != ']') throw Error(ErrorCode::ParseError, where + ": unterminated section");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      if (!known_keys().count(section)) invalid(section, "unknown section");
      if (data.count(section)) throw Error(ErrorCode::ParseError, where + ": duplicate section");
      data[section];
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, where + ": expected key = value");
    if (section.empty()) throw Error(ErrorCode::ParseError, where + ": key outside any section");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::ParseError, where + ": empty key");
    if (!known_keys().at(section).count(key)) invalid(section + "." + key, "unknown key");
    if (data[section].count(key)) throw Error(ErrorCode::ParseError, where + ": duplicate key " + key);
    data[section][key] = {value, line_no};
  }
  if (!any) throw Error(ErrorCode::ParseError, origin + ": configuration is empty");
  for (const char* required : {"model", "trajectory", "controller", "numerics"}) {
    if (!data.count(required)) invalid(required, "required section is missing");
  }

  const Reader r(std::move(data));
  ScenarioConfig cfg;
  cfg.origin = origin;
  cfg.hash = fnv1a(text);

  cfg.age_max = r.number("model", "age_max");
  check_positive(cfg.age_max, "model.age_max");
  cfg.mortality = parse_profile(r.raw("model", "mortality"), "model.mortality");
  cfg.birth = parse_profile(r.raw("model", "birth"), "model.birth");
  cfg.output_weight = parse_profile(r.raw("model", "output_weight"), "model.output_weight");
  cfg.initial_profile = parse_profile(r.raw("model", "initial_profile"), "model.initial_profile");
  cfg.d_min = r.number("model", "d_min");
  cfg.d_max = r.number("model", "d_max");
  if (!(cfg.d_min >= 0.0)) invalid("model.d_min", "must be nonnegative");
  if (!(cfg.d_max > cfg.d_min)) invalid("model.d_max", "must exceed d_min");
  if (cfg.mortality.auto_slope || cfg.birth.auto_slope || cfg.output_weight.auto_slope) {
    invalid("model", "automatic slopes are only allowed for initial_profile");
  }

  cfg.trajectory = parse_trajectory(r);

  cfg.gains.gamma = r.number("controller", "gamma");
  cfg.gains.l1 = r.number("controller", "l1");
  cfg.gains.l2 = r.number("controller", "l2");
  check_positive(cfg.gains.gamma, "controller.gamma");
  check_positive(cfg.gains.l1, "controller.l1");
  check_positive(cfg.gains.l2, "controller.l2");
  if (r.has("controller", "z0")) {
    const auto z = to_doubles(split_ws(r.raw("controller", "z0")), 0, "controller.z0");
    if (z.size() != 2) invalid("controller.z0", "expected two numbers");
    cfg.gains.z0 = ObserverState(z[0], z[1]);
  }

  if (r.has("numerics", "galerkin_n")) {
    cfg.galerkin_n = to_count(r.raw("numerics", "galerkin_n"), "numerics.galerkin_n");
  }
  if (cfg.galerkin_n < 4 || cfg.galerkin_n % 2 != 0) {
    invalid("numerics.galerkin_n", "must be even and at least 4");
  }
  if (r.has("numerics", "age_nodes")) {
    cfg.age_nodes = to_count(r.raw("numerics", "age_nodes"), "numerics.age_nodes");
  }
  if (cfg.age_nodes < 3) invalid("numerics.age_nodes", "must be at least 3");
  cfg.dt = r.number_or("numerics", "dt", std::min(cfg.age_max / (cfg.age_nodes - 1),
                                                   cfg.age_max / 400.0));
  check_positive(cfg.dt, "numerics.dt");
  const double lags = cfg.age_max / cfg.dt;
  if (std::abs(lags - std::round(lags)) > 1e-9 * lags) {
    invalid("numerics.dt", "must divide model.age_max");
  }
  cfg.t_end = r.number("numerics", "t_end");
  check_positive(cfg.t_end, "numerics.t_end");
  if (r.has("numerics", "record_every")) {
    cfg.record_every = to_count(r.raw("numerics", "record_every"), "numerics.record_every");
  }

  if (r.has("outputs", "dir")) cfg.out_dir = r.raw("outputs", "dir");
  if (r.has("outputs", "snapshots")) {
    cfg.snapshots = to_doubles(split_ws(r.raw("outputs", "snapshots")), 0, "outputs.snapshots");
    for (double s : cfg.snapshots) {
      if (s < 0.0 || s > cfg.t_end) invalid("outputs.snapshots", "times must lie in [0, t_end]");
    }
  }
  if (r.has("run", "routes")) cfg.routes = parse_routes(r.raw("run", "routes"));
  cfg.decay_check_from = r.number_or("certificate", "decay_check_from", 0.0);
  if (cfg.decay_check_from < 0.0 || cfg.decay_check_from >= cfg.t_end) {
    invalid("certificate.decay_check_from", "must lie in [0, t_end)");
  }
  cfg.expect.route_gap = r.maybe("expect", "route_gap");
  cfg.expect.log_error = r.maybe("expect", "log_error");
  cfg.expect.log_error_from = r.number_or("expect", "log_error_from", 0.0);
  cfg.expect.observer_error = r.maybe("expect", "observer_error");
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

Profile build_profile(const ProfileSpec& spec, double age_max) {
  const auto& c = spec.coefficients;
  if (spec.kind == "constant") return Profile::constant(c.at(0));
  if (spec.kind == "quadratic-motherhood") return Profile::quadratic_motherhood(c.at(0), age_max);
  if (spec.kind == "linear-exp") return Profile::linear_exp(c.at(0), c.at(1));
  if (spec.kind == "table") return Profile::table(GridFunction(age_max, c));
  throw Error(ErrorCode::ValidationError, "unknown profile kind '" + spec.kind + "'");
}

ModelParams build_params(const ScenarioConfig& cfg) {
  return ModelParams(cfg.age_max, build_profile(cfg.mortality, cfg.age_max),
                     build_profile(cfg.birth, cfg.age_max),
                     build_profile(cfg.output_weight, cfg.age_max), cfg.d_min, cfg.d_max,
                     cfg.age_nodes);
}

Profile build_initial_profile(const ScenarioConfig& cfg, const ModelParams& params) {
  if (cfg.initial_profile.auto_slope) {
    const double rate = cfg.initial_profile.coefficients.at(1);
    return Profile::linear_exp(compatible_linear_exp_slope(rate, params), rate);
  }
  return build_profile(cfg.initial_profile, cfg.age_max);
}

RouteMetrics compare_routes(const std::vector<double>& t_a, const std::vector<double>& y_a,
                            const std::vector<double>& t_b, const std::vector<double>& y_b) {
  if (t_a.size() != t_b.size() || y_a.size() != t_a.size() || y_b.size() != t_b.size() ||
      t_a.empty()) {
    throw Error(ErrorCode::GridMismatch, "traces have different lengths");
  }
  double diff_max = 0.0, ref_max = 0.0, diff_sq = 0.0, ref_sq = 0.0;
  for (std::size_t i = 0; i < t_a.size(); ++i) {
    if (std::abs(t_a[i] - t_b[i]) > 1e-9 * std::max(1.0, std::abs(t_a[i]))) {
      throw Error(ErrorCode::GridMismatch, "traces use different sample times");
    }
    const double d = y_a[i] - y_b[i];
    diff_max = std::max(diff_max, std::abs(d));
    ref_max = std::max(ref_max, std::abs(y_b[i]));
    diff_sq += d * d;
    ref_sq += y_b[i] * y_b[i];
  }
  RouteMetrics m;
  m.y_linf = ref_max > 0.0 ? diff_max / ref_max : diff_max;
  m.y_l2 = ref_sq > 0.0 ? std::sqrt(diff_sq / ref_sq) : std::sqrt(diff_sq);
  return m;
}

RouteMetrics compare_routes(const GalerkinTrace& galerkin, const OracleTrace& oracle) {
  std::vector<double> tg, yg, to, yo;
  for (const auto& r : galerkin.records) {
    tg.push_back(r.t);
    yg.push_back(r.y);
  }
  for (const auto& r : oracle.records) {
    to.push_back(r.t);
    yo.push_back(r.y);
  }
  auto m = compare_routes(tg, yg, to, yo);
  if (galerkin.snapshots.size() != oracle.snapshots.size()) {
    throw Error(ErrorCode::GridMismatch, "snapshot sets differ");
  }
  for (std::size_t k = 0; k < galerkin.snapshots.size(); ++k) {
    const auto& a = galerkin.snapshots[k];
    const auto& b = oracle.snapshots[k];
    if (!a.profile.same_grid(b.profile) || std::abs(a.t - b.t) > 1e-9 * std::max(1.0, a.t)) {
      throw Error(ErrorCode::GridMismatch, "snapshot grids or times differ");
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < a.profile.size(); ++i) {
      diff = std::max(diff, std::abs(a.profile[i] - b.profile[i]));
    }
    m.profile_linf = std::max(m.profile_linf, diff / b.profile.max_abs());
  }
  return m;
}

bool RunReport::passed() const {
  return std::all_of(table.begin(), table.end(), [](const auto& r) { return r.passed; });
}

std::string RunReport::text() const {
  std::ostringstream os;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  os << "config = " << origin << '\n' << "config_hash = " << hash << '\n';
  os << "d_star = " << fmt(d_star) << '\n';
  os << "\n[validity]\n"
     << "inf_rate = " << fmt(validity.inf_rate) << '\n'
     << "sup_rate = " << fmt(validity.sup_rate) << '\n'
     << "band = (" << fmt(validity.lower_bound) << ", " << fmt(validity.upper_bound) << ")\n"
     << "valid = " << (validity.valid ? "true" : "false") << '\n'
     << "t_crit = " << (validity.t_crit ? fmt(*validity.t_crit) : std::string("none")) << '\n'
     << "may_reexit = " << (validity.may_reexit ? "true" : "false") << '\n';
  os << "\n[certificate]\n";
  if (certificate) {
    os << certificate->dump();
  } else {
    os << "unavailable\n";
  }
  if (galerkin) {
    os << "\n[galerkin]\nmean_relative_residual = " << fmt(galerkin->mean_relative_residual)
       << '\n';
  }
  if (routes) {
    os << "\n[routes]\n"
       << "y_linf = " << fmt(routes->y_linf) << '\n'
       << "y_l2 = " << fmt(routes->y_l2) << '\n'
       << "profile_linf = " << fmt(routes->profile_linf) << '\n';
  }
  os << "\n[acceptance]\n";
  for (const auto& row : table) {
    os << (row.passed ? "PASS " : "FAIL ") << row.name << " : " << row.detail << '\n';
  }
  if (!warnings.empty()) {
    os << "\n[warnings]\n";
    for (const auto& w : warnings) os << w << '\n';
  }
  return os.str();
}

RunReport run(const ScenarioConfig& cfg, const RunOptions& opts) {
  const auto params = build_params(cfg);
  const auto eq = solve_equilibrium(params);
  const auto x0 = build_initial_profile(cfg, params);
  const auto& traj = *cfg.trajectory;
  const InputBounds bounds{cfg.d_min, cfg.d_max};
  const Routes routes = opts.routes.value_or(cfg.routes);

  RunReport rep;
  rep.config_hash = cfg.hash;
  rep.origin = cfg.origin;
  rep.d_star = eq.d_star;
  rep.validity = validate(traj, eq, params, traj.characteristic_horizon(cfg.t_end));
  if (!rep.validity.valid) {
    rep.warnings.push_back("reference trajectory leaves the admissible rate band");
  }
  if (!check_initial_condition(params.sample(x0), params)) {
    rep.warnings.push_back("initial profile is not boundary-compatible");
  }

  try {
    auto cert = build_certificate(eq, params, cfg.gains);
    try {
      rate_constants(cert, traj, cfg.decay_check_from, cfg.t_end);
    } catch (const Error& e) {
      rep.warnings.push_back(std::string("no decay rate: ") + e.what());
    }
    rep.certificate = cert;
  } catch (const Error& e) {
    rep.warnings.push_back(std::string("certificate unavailable: ") + e.what());
  }

  const bool want_galerkin = routes != Routes::Oracle;
  const bool want_oracle = routes != Routes::Galerkin;
  bool positive = true;
  if (want_galerkin) {
    try {
      const auto roots = characteristic_roots(eq, cfg.galerkin_n);
      GalerkinModel model(build_basis(x0, eq, params, roots, cfg.galerkin_n), params);
      rep.galerkin = simulate_galerkin(model, traj, cfg.gains, bounds,
                                       {cfg.t_end, cfg.dt, cfg.record_every, cfg.snapshots});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PositivityViolation) throw;
      positive = false;
      rep.warnings.push_back(e.what());
    }
  }
  if (want_oracle) {
    const DelayModel model(eq, params);
    OracleOptions o{cfg.t_end, cfg.dt, cfg.record_every, cfg.snapshots,
                    rep.certificate ? rep.certificate->sigma : 0.0};
    rep.oracle = simulate_oracle(model, x0, traj, cfg.gains, bounds, o);
  }

  auto in_bounds = [&](double d) { return d >= cfg.d_min && d <= cfg.d_max; };
  bool bounded = true;
  if (rep.galerkin) {
    for (const auto& r : rep.galerkin->records) bounded = bounded && in_bounds(r.d);
  }
  if (rep.oracle) {
    for (const auto& r : rep.oracle->records) {
      bounded = bounded && in_bounds(r.d);
      positive = positive && r.y > 0.0 && r.c > 0.0;
    }
  }
  rep.table.push_back({"input_bounds", bounded,
                       "D within [" + fmt(cfg.d_min) + ", " + fmt(cfg.d_max) + "]"});
  rep.table.push_back({"positivity", positive, "profile and output stay positive"});

  if (rep.galerkin && rep.oracle) {
    rep.routes = compare_routes(*rep.galerkin, *rep.oracle);
    if (cfg.expect.route_gap) {
      rep.table.push_back({"route_agreement", rep.routes->y_linf <= *cfg.expect.route_gap,
                           "relative y gap " + fmt(rep.routes->y_linf) + " <= " +
                               fmt(*cfg.expect.route_gap)});
    }
  }
  if (rep.oracle && traj.kind() == TrajectoryKind::Transition) {
    // Sample on the record grid closest to t_delta.
    const double t_delta = traj.coefficients()[2];
    const auto& recs = rep.oracle->records;
    const auto it = std::min_element(recs.begin(), recs.end(), [&](const auto& a, const auto& b) {
      return std::abs(a.t - t_delta) < std::abs(b.t - t_delta);
    });
    const double rel = std::abs(it->y / it->y_ref - 1.0);
    rep.table.push_back({"set_point", rel <= 0.02,
                         "y(" + fmt(it->t) + ") = " + fmt(it->y) + " vs y_ref " + fmt(it->y_ref)});
  }
  if (rep.oracle) {
    std::size_t episodes = 0;
    bool prev = false;
    double first = 0.0, last = 0.0;
    for (const auto& r : rep.oracle->records) {
      if (r.saturated && !prev) {
        if (episodes++ == 0) first = r.t;
      }
      if (r.saturated) last = r.t;
      prev = r.saturated;
    }
    if (episodes > 0) {
      rep.warnings.push_back("input saturated in " + std::to_string(episodes) +
                             " episode(s) between t = " + fmt(first) + " and t = " + fmt(last));
    }
  }
  if (rep.oracle && cfg.expect.log_error) {
    double worst = 0.0;
    for (const auto& r : rep.oracle->records) {
      if (r.t >= cfg.expect.log_error_from) worst = std::max(worst, std::abs(r.log_error));
    }
    rep.table.push_back({"tracking", worst < *cfg.expect.log_error,
                         "max |ln(y/y_ref)| for t >= " + fmt(cfg.expect.log_error_from) + " is " +
                             fmt(worst)});
  }
  if (rep.oracle && cfg.expect.observer_error) {
    const double gap = std::abs(rep.oracle->records.back().z2 - eq.d_star);
    rep.table.push_back({"observer", gap < *cfg.expect.observer_error,
                         "|z2(T) - D*| = " + fmt(gap)});
  }

  const auto dir = opts.out_dir ? *opts.out_dir : std::filesystem::path(cfg.out_dir);
  if (opts.write_files && !dir.empty()) write_outputs(rep, cfg, dir);
  return rep;
}

RunReport verify(const ScenarioConfig& cfg) {
  const auto params = build_params(cfg);
  const auto eq = solve_equilibrium(params);
  const auto x0 = build_initial_profile(cfg, params);
  const auto& traj = *cfg.trajectory;
  const InputBounds bounds{cfg.d_min, cfg.d_max};

  RunReport rep;
  rep.config_hash = cfg.hash;
  rep.origin = cfg.origin;
  rep.d_star = eq.d_star;
  rep.validity = validate(traj, eq, params, traj.characteristic_horizon(cfg.t_end));

  const auto fact = saturation_fact_check();
  rep.table.push_back({"saturation_fact", fact.violations == 0,
                       std::to_string(fact.violations) + " violations in " +
                           std::to_string(fact.samples) + " samples"});

  Certificate cert;
  try {
    cert = build_certificate(eq, params, cfg.gains);
  } catch (const Error& e) {
    rep.table.push_back({"certificate", false, e.what()});
    return rep;
  }
  try {
    rate_constants(cert, traj, cfg.decay_check_from, cfg.t_end);
  } catch (const Error& e) {
    rep.warnings.push_back(std::string("no decay rate: ") + e.what());
  }
  const auto broken = cert.check_invariants();
  std::string names;
  for (const auto& b : broken) names += (names.empty() ? "" : ", ") + b;
  rep.table.push_back({"certificate_invariants", broken.empty(),
                       broken.empty() ? "all hold" : "violated: " + names});
  rep.certificate = cert;

  const DelayModel model(eq, params);
  OracleOptions coarse{cfg.t_end, cfg.dt, 1, {}, cert.sigma};
  OracleOptions fine = coarse;
  fine.dt = 0.5 * cfg.dt;
  rep.oracle = simulate_oracle(model, x0, traj, cfg.gains, bounds, coarse);
  const auto fine_trace = simulate_oracle(model, x0, traj, cfg.gains, bounds, fine);

  bool bounded = true, positive = true;
  for (const auto& r : rep.oracle->records) {
    bounded = bounded && r.d >= cfg.d_min && r.d <= cfg.d_max;
    positive = positive && r.y > 0.0 && r.c > 0.0;
  }
  rep.table.push_back({"input_bounds", bounded,
                       "D within [" + fmt(cfg.d_min) + ", " + fmt(cfg.d_max) + "]"});
  rep.table.push_back({"positivity", positive, "output and history floor stay positive"});

  if (!cert.has_rate) return rep;
  // The check starts at decay_check_from; V and both slack terms are cut
  // from the full traces so the fine run keeps two samples per interval.
  const auto vc_all = clf_trace(cert, *rep.oracle);
  const auto vf_all = clf_trace(cert, fine_trace);
  auto column_t = [](const OracleTrace& tr) {
    std::vector<double> t;
    for (const auto& r : tr.records) t.push_back(r.t);
    return t;
  };
  const auto tc_all = column_t(*rep.oracle);
  auto slack = halving_slack(tc_all, vc_all, column_t(fine_trace), vf_all);
  const auto round = rounding_slack(cert, *rep.oracle, vc_all);
  for (std::size_t i = 0; i < slack.size(); ++i) slack[i] += round[i];
  std::size_t first = 0;
  while (first < tc_all.size() && tc_all[first] < cfg.decay_check_from - 1e-9 * cfg.dt) ++first;
  const auto from = static_cast<long>(first);
  const std::vector<double> tc(tc_all.begin() + from, tc_all.end());
  const std::vector<double> vc(vc_all.begin() + from, vc_all.end());
  const std::vector<double> sc(slack.begin() + from, slack.end());
  const auto decay = verify_decay(tc, vc, cert.l_rate, sc);
  const double max_slack = *std::max_element(sc.begin(), sc.end());
  rep.table.push_back(
      {"clf_decay", decay.passed(),
       std::to_string(decay.differential.violations) + " of " +
           std::to_string(decay.differential.checked) +
           " steps above -L V / (1 + sqrt V) + slack (max slack " + fmt(max_slack) + "), " +
           std::to_string(decay.integrated_violations) +
           " above the integrated bound"});
  return rep;
}

void write_outputs(const RunReport& report, const ScenarioConfig& cfg,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + (dir / name).string());
    return out;
  };
  auto snapshots = [&](const char* name, const std::vector<Snapshot>& snaps) {
    if (snaps.empty()) return;
    auto out = open(name);
    out << "a";
    for (const auto& s : snaps) out << ",t=" << fmt(s.t);
    out << '\n';
    const auto& grid = snaps.front().profile;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out << fmt(grid.node(i));
      for (const auto& s : snaps) out << ',' << fmt(s.profile[i]);
      out << '\n';
    }
  };
  if (report.galerkin) {
    auto out = open("galerkin.csv");
    out << "t,y_sim,y_ref,D,z1,z2,r,min_profile\n";
    for (const auto& r : report.galerkin->records) {
      out << fmt(r.t) << ',' << fmt(r.y) << ',' << fmt(r.y_ref) << ',' << fmt(r.d) << ','
          << fmt(r.z1) << ',' << fmt(r.z2) << ',' << fmt(r.r) << ',' << fmt(r.min_profile)
          << '\n';
    }
    snapshots("galerkin_profiles.csv", report.galerkin->snapshots);
  }
  if (report.oracle) {
    auto out = open("oracle.csv");
    out << "t,eta,delta,z1,z2,D,y,y_ref,log_error,W,C\n";
    for (const auto& r : report.oracle->records) {
      out << fmt(r.t) << ',' << fmt(r.eta) << ',' << fmt(r.delta) << ',' << fmt(r.z1) << ','
          << fmt(r.z2) << ',' << fmt(r.d) << ',' << fmt(r.y) << ',' << fmt(r.y_ref) << ','
          << fmt(r.log_error) << ',' << fmt(r.w) << ',' << fmt(r.c) << '\n';
    }
    snapshots("oracle_profiles.csv", report.oracle->snapshots);
  }
  (void)cfg;
  auto out = open("report.txt");
  out << report.text();
}

}  // namespace agetrack
