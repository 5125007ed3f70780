#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>

#include "agetrack/certificate.hpp"
#include "agetrack/error.hpp"
#include "agetrack/galerkin.hpp"
#include "agetrack/scenario.hpp"

namespace py = pybind11;
using namespace agetrack;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> to_array(const GridFunction& f) { return to_array(f.values()); }

template <class Record, class Field>
py::array_t<double> column(const std::vector<Record>& records, Field field) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(static_cast<double>(r.*field));
  return to_array(out);
}

py::dict snapshots_dict(const std::vector<Snapshot>& snaps) {
  py::dict d;
  for (const auto& s : snaps) d[py::float_(s.t)] = to_array(s.profile);
  return d;
}

py::dict oracle_dict(const OracleTrace& tr) {
  const auto& r = tr.records;
  py::dict d;
  d["t"] = column(r, &OracleRecord::t);
  d["eta"] = column(r, &OracleRecord::eta);
  d["delta"] = column(r, &OracleRecord::delta);
  d["z1"] = column(r, &OracleRecord::z1);
  d["z2"] = column(r, &OracleRecord::z2);
  d["D"] = column(r, &OracleRecord::d);
  d["y"] = column(r, &OracleRecord::y);
  d["y_ref"] = column(r, &OracleRecord::y_ref);
  d["log_error"] = column(r, &OracleRecord::log_error);
  d["W"] = column(r, &OracleRecord::w);
  d["C"] = column(r, &OracleRecord::c);
  d["saturated"] = column(r, &OracleRecord::saturated);
  d["snapshots"] = snapshots_dict(tr.snapshots);
  return d;
}

py::dict galerkin_dict(const GalerkinTrace& tr) {
  const auto& r = tr.records;
  py::dict d;
  d["t"] = column(r, &GalerkinRecord::t);
  d["y"] = column(r, &GalerkinRecord::y);
  d["y_ref"] = column(r, &GalerkinRecord::y_ref);
  d["D"] = column(r, &GalerkinRecord::d);
  d["z1"] = column(r, &GalerkinRecord::z1);
  d["z2"] = column(r, &GalerkinRecord::z2);
  d["r"] = column(r, &GalerkinRecord::r);
  d["r_relative"] = column(r, &GalerkinRecord::r_relative);
  d["min_profile"] = column(r, &GalerkinRecord::min_profile);
  d["saturated"] = column(r, &GalerkinRecord::saturated);
  d["snapshots"] = snapshots_dict(tr.snapshots);
  d["mean_relative_residual"] = tr.mean_relative_residual;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Age-structured output tracking: model, simulation routes and certificate";

  static py::exception<Error> error_type(m, "AgetrackError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  py::class_<Profile>(m, "Profile")
      .def_static("constant", &Profile::constant, py::arg("c"))
      .def_static("quadratic_motherhood", &Profile::quadratic_motherhood, py::arg("k0"),
                  py::arg("age_max"))
      .def_static("linear_exp", &Profile::linear_exp, py::arg("slope"), py::arg("rate"))
      .def_static(
          "table",
          [](double age_max, std::vector<double> values) {
            return Profile::table(GridFunction(age_max, std::move(values)));
          },
          py::arg("age_max"), py::arg("values"))
      .def("value", &Profile::value, py::arg("a"))
      .def(
          "sample",
          [](const Profile& p, double age_max, std::size_t nodes) {
            return to_array(p.sample(age_max, nodes));
          },
          py::arg("age_max"), py::arg("nodes"))
      .def("__repr__", &Profile::describe);

  py::class_<Trajectory>(m, "Trajectory")
      .def("value", &Trajectory::value, py::arg("t"))
      .def("derivative", &Trajectory::derivative, py::arg("t"))
      .def("rate", &Trajectory::rate, py::arg("t"))
      .def("__repr__", &Trajectory::describe);
  m.def("make_constant", &make_constant, py::arg("value"));
  m.def("make_ramp", &make_ramp, py::arg("y4"), py::arg("y1"));
  m.def("make_periodic", &make_periodic, py::arg("y2"), py::arg("y3"), py::arg("omega"));
  m.def("make_transition", &make_transition, py::arg("y0"), py::arg("y_delta"),
        py::arg("t_delta"));

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<double, Profile, Profile, Profile, double, double, std::size_t>(),
           py::arg("age_max"), py::arg("mortality"), py::arg("birth"), py::arg("output"),
           py::arg("d_min"), py::arg("d_max"), py::arg("nodes") = ModelParams::kDefaultNodes)
      .def_property_readonly("age_max", &ModelParams::age_max)
      .def_property_readonly("nodes", &ModelParams::nodes)
      .def_property_readonly("d_min", &ModelParams::d_min)
      .def_property_readonly("d_max", &ModelParams::d_max);

  py::class_<Equilibrium>(m, "Equilibrium")
      .def_readonly("d_star", &Equilibrium::d_star)
      .def_property_readonly("x_star", [](const Equilibrium& e) { return to_array(e.x_star); })
      .def_property_readonly("k_tilde", [](const Equilibrium& e) { return to_array(e.k_tilde); });
  m.def("solve_equilibrium", &solve_equilibrium, py::arg("params"));
  m.def("characteristic_roots", &characteristic_roots, py::arg("eq"), py::arg("count"));

  m.def(
      "validate_trajectory",
      [](const Trajectory& traj, const Equilibrium& eq, const ModelParams& params,
         double horizon) {
        const auto r = validate(traj, eq, params, horizon);
        py::dict d;
        d["inf_rate"] = r.inf_rate;
        d["sup_rate"] = r.sup_rate;
        d["lower_bound"] = r.lower_bound;
        d["upper_bound"] = r.upper_bound;
        d["valid"] = r.valid;
        d["t_crit"] = r.t_crit ? py::object(py::float_(*r.t_crit)) : py::object(py::none());
        d["may_reexit"] = r.may_reexit;
        return d;
      },
      py::arg("traj"), py::arg("eq"), py::arg("params"), py::arg("horizon") = 50.0);

  py::class_<ControllerGains>(m, "ControllerGains")
      .def(py::init([](double gamma, double l1, double l2, ObserverState z0) {
             ControllerGains g{gamma, l1, l2, z0};
             g.validate();
             return g;
           }),
           py::arg("gamma") = 2.0, py::arg("l1") = 4.0, py::arg("l2") = 8.0,
           py::arg("z0") = ObserverState(0.0, 0.5))
      .def_readwrite("gamma", &ControllerGains::gamma)
      .def_readwrite("l1", &ControllerGains::l1)
      .def_readwrite("l2", &ControllerGains::l2)
      .def_readwrite("z0", &ControllerGains::z0);

  py::class_<InputBounds>(m, "InputBounds")
      .def(py::init<double, double>(), py::arg("d_min"), py::arg("d_max"))
      .def_readwrite("d_min", &InputBounds::d_min)
      .def_readwrite("d_max", &InputBounds::d_max);

  m.def("saturate", &saturate, py::arg("v"), py::arg("lo"), py::arg("hi"));
  m.def(
      "control",
      [](double y, const Trajectory& traj, const ControllerGains& gains, const ObserverState& z,
         double t, const InputBounds& bounds) {
        const auto s = control(y, traj, gains, z, t, bounds);
        py::dict d;
        d["d_ff"] = s.d_ff;
        d["d_fb"] = s.d_fb;
        d["d_applied"] = s.d_applied;
        d["saturated"] = s.saturated;
        d["log_error"] = s.log_error;
        return d;
      },
      py::arg("y"), py::arg("traj"), py::arg("gains"), py::arg("z"), py::arg("t"),
      py::arg("bounds"));

  m.def(
      "simulate_oracle",
      [](const ModelParams& params, const Profile& x0, const Trajectory& traj,
         const ControllerGains& gains, const InputBounds& bounds, double t_end, double dt,
         std::size_t record_every, std::vector<double> snapshots, double sigma) {
        const auto eq = solve_equilibrium(params);
        const DelayModel model(eq, params);
        const OracleOptions o{t_end, dt, record_every, std::move(snapshots), sigma};
        OracleTrace tr;
        {
          py::gil_scoped_release release;
          tr = simulate_oracle(model, x0, traj, gains, bounds, o);
        }
        return oracle_dict(tr);
      },
      py::arg("params"), py::arg("x0"), py::arg("traj"), py::arg("gains"), py::arg("bounds"),
      py::arg("t_end") = 20.0, py::arg("dt") = 0.005, py::arg("record_every") = 1,
      py::arg("snapshots") = std::vector<double>{}, py::arg("sigma") = 0.0);

  m.def(
      "simulate_galerkin",
      [](const ModelParams& params, const Profile& x0, const Trajectory& traj,
         const ControllerGains& gains, const InputBounds& bounds, std::size_t n, double t_end,
         double dt, std::size_t record_every, std::vector<double> snapshots) {
        GalerkinTrace tr;
        {
          py::gil_scoped_release release;
          const auto eq = solve_equilibrium(params);
          GalerkinModel model(build_basis(x0, eq, params, characteristic_roots(eq, n), n),
                              params);
          tr = simulate_galerkin(model, traj, gains, bounds,
                                 {t_end, dt, record_every, std::move(snapshots)});
        }
        return galerkin_dict(tr);
      },
      py::arg("params"), py::arg("x0"), py::arg("traj"), py::arg("gains"), py::arg("bounds"),
      py::arg("n") = 6, py::arg("t_end") = 20.0, py::arg("dt") = 0.005,
      py::arg("record_every") = 1, py::arg("snapshots") = std::vector<double>{});

  py::class_<Certificate>(m, "Certificate")
      .def_readonly("sigma", &Certificate::sigma)
      .def_readonly("lambda_b3", &Certificate::lambda_b3)
      .def_readonly("b3_value", &Certificate::b3_value)
      .def_property_readonly("p1", [](const Certificate& c) { return c.observer.p1; })
      .def_property_readonly("p2", [](const Certificate& c) { return c.observer.p2; })
      .def_property_readonly("beta1", [](const Certificate& c) { return c.observer.beta1; })
      .def_property_readonly("beta2", [](const Certificate& c) { return c.observer.beta2; })
      .def_readonly("big_m", &Certificate::big_m)
      .def_readonly("alpha1", &Certificate::alpha1)
      .def_readonly("alpha2", &Certificate::alpha2)
      .def_readonly("beta", &Certificate::beta)
      .def_readonly("mu1", &Certificate::mu1)
      .def_readonly("mu2", &Certificate::mu2)
      .def_readonly("l_rate", &Certificate::l_rate)
      .def_readonly("has_rate", &Certificate::has_rate)
      .def("gain_floor", &Certificate::gain_floor)
      .def("check_invariants", &Certificate::check_invariants)
      .def("dump", &Certificate::dump);
  m.def("build_certificate", &build_certificate, py::arg("eq"), py::arg("params"),
        py::arg("gains"));
  m.def(
      "rate_constants",
      [](Certificate cert, const Trajectory& traj, double t_from, double horizon) {
        rate_constants(cert, traj, t_from, horizon);
        return cert;
      },
      py::arg("cert"), py::arg("traj"), py::arg("t_from") = 0.0, py::arg("horizon") = 50.0);
  m.def("overshoot_bound", &overshoot_bound, py::arg("varsigma0"), py::arg("e0_norm"),
        py::arg("cert"));
  m.def(
      "saturation_fact_check",
      [](std::size_t samples, std::uint64_t seed) {
        const auto r = saturation_fact_check(samples, seed);
        return py::make_tuple(r.samples, r.violations, r.min_margin);
      },
      py::arg("samples") = 1000000, py::arg("seed") = 20240531);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readonly("origin", &ScenarioConfig::origin)
      .def_readonly("hash", &ScenarioConfig::hash)
      .def_readonly("age_max", &ScenarioConfig::age_max)
      .def_readonly("d_min", &ScenarioConfig::d_min)
      .def_readonly("d_max", &ScenarioConfig::d_max)
      .def_readonly("dt", &ScenarioConfig::dt)
      .def_readonly("t_end", &ScenarioConfig::t_end)
      .def_readonly("galerkin_n", &ScenarioConfig::galerkin_n);
  m.def("parse_config", &parse_config, py::arg("text"), py::arg("origin") = "<string>");
  m.def(
      "load_config", [](const std::string& path) { return load_config(path); }, py::arg("path"));

  m.def(
      "run_scenario",
      [](const ScenarioConfig& cfg, std::optional<std::string> routes,
         std::optional<std::string> out_dir) {
        RunOptions opts;
        if (routes) opts.routes = parse_routes(*routes);
        if (out_dir) opts.out_dir = *out_dir;
        opts.write_files = out_dir.has_value();
        RunReport rep;
        {
          py::gil_scoped_release release;
          rep = run(cfg, opts);
        }
        py::dict d;
        d["passed"] = rep.passed();
        d["d_star"] = rep.d_star;
        d["text"] = rep.text();
        d["warnings"] = rep.warnings;
        py::list table;
        for (const auto& row : rep.table) table.append(py::make_tuple(row.name, row.passed, row.detail));
        d["table"] = table;
        if (rep.certificate) d["certificate"] = *rep.certificate;
        if (rep.oracle) d["oracle"] = oracle_dict(*rep.oracle);
        if (rep.galerkin) d["galerkin"] = galerkin_dict(*rep.galerkin);
        if (rep.routes) {
          d["route_gap"] = py::make_tuple(rep.routes->y_linf, rep.routes->y_l2,
                                          rep.routes->profile_linf);
        }
        return d;
      },
      py::arg("config"), py::arg("routes") = py::none(), py::arg("out_dir") = py::none());
}
