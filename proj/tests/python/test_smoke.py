"""End-to-end checks of the python bindings against known values."""

import math
import os

import numpy as np
import pytest

import nrtrack


def test_module_exposes_version():
    assert nrtrack.__version__


def test_bicycle_rates_match_known_values():
    plant = nrtrack.BicyclePlant(nrtrack.BicycleParams())
    x = np.array([0.0, 0.0, 10.0, 0.0, 0.0, 0.0])
    u = np.array([0.0, 0.01])
    rates = plant.f(x, u)
    assert rates.shape == (6,)
    assert rates[3] == pytest.approx(0.441061751917, abs=1e-10)
    assert rates[5] == pytest.approx(0.368227603488, abs=1e-10)


def test_jacobians_are_float64_arrays_matching_fd():
    plant = nrtrack.BicyclePlant(nrtrack.BicycleParams())
    x = np.array([1.0, -2.0, 12.0, 0.3, 0.2, -0.1])
    u = np.array([0.5, 0.02])
    jx = plant.df_dx(x, u)
    assert jx.shape == (6, 6) and jx.dtype == np.float64
    fd = nrtrack.fd_df_dx(plant, x, u)
    assert np.linalg.norm(jx - fd) / np.linalg.norm(fd) < 1e-4


def test_low_speed_raises_typed_exception():
    plant = nrtrack.BicyclePlant(nrtrack.BicycleParams())
    x = np.array([0.0, 0.0, 0.05, 0.0, 0.0, 0.0])
    with pytest.raises(nrtrack.LowSpeedError):
        plant.f(x, np.zeros(2))
    assert issubclass(nrtrack.LowSpeedError, nrtrack.Error)


def test_integrator_prediction_closed_form():
    plant = nrtrack.IntegratorPlant(2)
    cfg = nrtrack.PredictorConfig()
    cfg.horizon = 0.5
    cfg.dt = 0.01
    pred = nrtrack.predict_with_jacobian(
        plant, np.array([2.0, 1.0]), np.array([1.0, 1.0]), cfg
    )
    assert pred.y_pred == pytest.approx([2.5, 1.5], abs=1e-12)
    assert pred.jac == pytest.approx(0.5 * np.eye(2), abs=1e-12)


def test_lane_change_profile_value():
    assert nrtrack.lane_change_z2(0.0) == pytest.approx(
        0.00198701438025, abs=1e-9
    )


def test_closed_loop_tracks_a_circle():
    plant = nrtrack.IntegratorPlant(2)
    dom = nrtrack.CurveDomain()
    dom.periodic = True
    dom.period = 2.0 * math.pi
    curve = nrtrack.AnalyticCurve(
        lambda t: np.array([math.sin(t), math.cos(t)]),
        dom,
        lambda t: np.array([math.cos(t), -math.sin(t)]),
    )
    cfg = nrtrack.ControllerConfig()
    cfg.alpha = 10.0
    cfg.predictor.horizon = 0.5
    cfg.predictor.dt = 0.01
    cfg.controller_dt = 0.01
    res = nrtrack.run_closed_loop(plant, curve, cfg, 0.01, 10.0, np.zeros(2))
    assert res.status == nrtrack.RunStatus.Completed
    late = [r.tracking_error for r in res.trace.rows if r.t > 8.0]
    assert max(late) < 0.15


def test_platoon_two_robots_keep_spacing():
    points = nrtrack.stadium_control_points(3.0, 2.0, 6)
    curve = nrtrack.ClosedSplineCurve(points, 2.2)
    cfg = nrtrack.PlatoonConfig()
    cfg.n_robots = 2
    res = nrtrack.run_platoon(curve, cfg, 30.0)
    assert res.status == nrtrack.RunStatus.Completed
    final_gaps = [
        gaps[0] for t, gaps in zip(res.times, res.spacings) if t > 20.0
    ]
    assert min(final_gaps) > 0.23
    assert max(final_gaps) < 0.27


def test_scenario_files_round_trip(tmp_path):
    scenarios = os.environ.get("NRTRACK_SCENARIOS")
    if scenarios is None:
        pytest.skip("NRTRACK_SCENARIOS not set")
    sc = nrtrack.load_scenario(os.path.join(scenarios, "lane_change.scn"))
    assert sc.kind == nrtrack.ScenarioKind.Vehicle
    assert len(sc.speeds_mps) == 3

    plant = nrtrack.make_plant(sc)
    assert plant.state_names()[:2] == ["z1", "z2"]
    curve = nrtrack.make_curve(sc, sc.speeds_mps[0])
    x0 = nrtrack.initial_state(sc, curve, sc.speeds_mps[0])
    assert x0.shape == (6,)
    assert x0[2] == sc.speeds_mps[0]

    sc = nrtrack.parse_scenario(
        "name = mini\n"
        "plant = integrator\n"
        "speeds_mps = 10\n"
        "sim_dt_s = 0.01\n"
        "predictor_dt_s = 0.01\n"
        "duration_s = 2\n"
        "transient_cutoff_s = 0.5\n",
        "inline",
    )
    out = nrtrack.run_vehicle_scenario(sc, str(tmp_path))
    assert [r.status for r in out.results] == [nrtrack.RunStatus.Completed]
    table = nrtrack.read_csv(out.csv_paths[0])
    assert table.rows == 201
    assert table.columns[0] == "t"
    assert table.data["t"][-1] == 2.0


def test_bad_scenario_text_raises_config_error():
    with pytest.raises(nrtrack.ConfigError):
        nrtrack.parse_scenario("name = x\nbogus = 1\n", "inline")
