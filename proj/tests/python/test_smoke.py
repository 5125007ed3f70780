import math
import os
import pathlib

import pytest

import agetrack

CONFIG_DIR = pathlib.Path(os.environ.get("AGETRACK_CONFIG_DIR", pathlib.Path(__file__).parents[2] / "configs"))


def trial_params():
    return agetrack.ModelParams(
        age_max=2.0,
        mortality=agetrack.Profile.constant(0.1),
        birth=agetrack.Profile.quadratic_motherhood(2.0, 2.0),
        output=agetrack.Profile.constant(1.0),
        d_min=0.5,
        d_max=1.5,
    )


def shortened(name, t_end):
    text = (CONFIG_DIR / name).read_text()
    text = text.replace("t_end = 20", f"t_end = {t_end}")
    text = text.replace("snapshots = 0.5 1 2 10 20", "snapshots = 0.5 1")
    text = text.replace("log_error_from = 15", f"log_error_from = {t_end}")
    return agetrack.parse_config(text, origin=name)


def test_equilibrium():
    eq = agetrack.solve_equilibrium(trial_params())
    assert eq.d_star == pytest.approx(0.99976, abs=1e-4)
    assert len(eq.x_star) == len(eq.k_tilde)
    assert min(eq.x_star) >= 0.0


def test_characteristic_roots_lie_in_left_half_plane():
    eq = agetrack.solve_equilibrium(trial_params())
    roots = [complex(r) for r in agetrack.characteristic_roots(eq, 4)]
    # The zero root first, then one root from each conjugate pair.
    assert abs(roots[0]) < 1e-12
    assert all(r.real < 0.0 and r.imag > 0.0 for r in roots[1:])
    assert roots[1].real == pytest.approx(-2.01673, abs=1e-4)


def test_certificate_fields():
    params = trial_params()
    eq = agetrack.solve_equilibrium(params)
    cert = agetrack.build_certificate(eq, params, agetrack.ControllerGains())
    assert cert.sigma > 0.0
    assert cert.p1 > 0.0 and cert.p2 > 0.0
    assert not cert.has_rate
    cert = agetrack.rate_constants(cert, agetrack.make_transition(1.0, 3.0, 5.0))
    assert cert.has_rate and cert.l_rate > 0.0


def test_parse_config_reads_numerics():
    cfg = agetrack.load_config(str(CONFIG_DIR / "fig2a.cfg"))
    assert cfg.dt == pytest.approx(0.005)
    assert cfg.t_end == pytest.approx(20.0)
    assert cfg.galerkin_n == 6
    assert cfg.hash != 0


def test_bad_config_raises():
    with pytest.raises(agetrack.AgetrackError, match="mortalty"):
        agetrack.parse_config("[model]\nmortalty = constant 0.1\n")


def test_run_scenario_short_transition(tmp_path):
    cfg = shortened("fig2a.cfg", 2)
    report = agetrack.run_scenario(cfg, routes="both", out_dir=str(tmp_path))
    assert report["d_star"] == pytest.approx(0.99976, abs=1e-4)
    oracle = report["oracle"]
    galerkin = report["galerkin"]
    assert oracle["t"][-1] == pytest.approx(2.0)
    assert all(math.isfinite(v) for v in oracle["y"])
    assert all(v >= 0.5 - 1e-12 and v <= 1.5 + 1e-12 for v in galerkin["D"])
    assert report["route_gap"][0] < 0.02
    assert any(tmp_path.iterdir())
