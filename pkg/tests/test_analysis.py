import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfwave import analysis
from cfwave.analysis import (CompareConfig, Grid, MultipleCrossings, NoCrossing, comparison_csv, comparison_matrix,
                             front_position, measure_speed, profile_distance, state_distance, tail_drift_rate)
from cfwave.models import Model
from cfwave.pde_sim import make_grid, make_state, step
from cfwave.potential import preset

SQ2 = math.sqrt(2.0)


def snap(x, v, t=0.0):
    return SimpleNamespace(x=x, v=v, t=t)


def test_front_position_examples():
    x = make_grid(20.0, 0.02)
    assert abs(front_position(snap(x, np.tanh(x / SQ2)), 0.0)) <= 1e-12
    shifted = front_position(snap(x, np.tanh((x - 1.7) / SQ2)), 0.0)
    # linear interpolation error ~ dx^2 |v''| / (8 |v'|) near the inflection point
    assert shifted == pytest.approx(1.7, abs=0.02**2)
    with pytest.raises(NoCrossing):
        front_position(snap(x, np.ones_like(x)), 0.0)
    with pytest.raises(MultipleCrossings):
        front_position(snap(x, np.sin(x)), 0.0)


def test_measure_speed_synthetic():
    x = make_grid(10.0, 0.1)
    traj = [snap(x, np.clip(x - 3.0 * t, -1, 1), t) for t in np.linspace(0, 2, 41)]
    fit = measure_speed(traj, 0.0, predicted=3.0)
    assert fit.s_measured == pytest.approx(3.0, abs=1e-12)
    assert fit.relative_error <= 1e-12
    assert fit.fit_window == (1.0, 2.0) and fit.r_squared == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(s=st.floats(-2, 2), x0=st.floats(-2, 2))
def test_measure_speed_recovers_translation(s, x0):
    x = make_grid(10.0, 0.05)
    ts = np.linspace(0.0, 2.0, 30)
    traj = [snap(x, np.clip(x - x0 - s * t, -1, 1), t) for t in ts]
    fit = measure_speed(traj, 0.0, predicted=s)
    assert abs(fit.s_measured - s) <= 1e-10
    assert 0.0 <= fit.r_squared <= 1.0


def test_measure_speed_needs_snapshots():
    x = make_grid(1.0, 0.1)
    traj = [snap(x, x, t) for t in range(5)]
    with pytest.raises(ValueError):
        measure_speed(traj, 0.0)


def test_profile_distance_examples(quartic_profile):
    p = quartic_profile
    x, v = p.xi[2000:-2000:20], p.values[2000:-2000:20]
    shift, l2, linf = profile_distance(snap(x, v), p)
    assert l2 <= 1e-10 and abs(shift) <= 1e-5
    x = make_grid(8.0, 0.02)
    shift, l2, _ = profile_distance(snap(x, np.tanh((x - 2.5) / SQ2)), p)
    assert shift == pytest.approx(2.5, abs=1e-4)
    _, l2, _ = profile_distance(snap(x, np.zeros_like(x)), p)
    assert l2 > 1.0


def test_profile_distance_translation_invariant(quartic_profile):
    x = make_grid(6.0, 0.02)
    dists = [profile_distance(snap(x, np.tanh((x - h) / SQ2)), quartic_profile)[1] for h in (-1.3, 0.0, 0.7, 1.9)]
    assert max(dists) - min(dists) <= 1e-8


def test_state_distance_self():
    x = make_grid(8.0, 0.02)
    a = snap(x, np.tanh(x / SQ2))
    b = snap(x, np.tanh((x + 1.0) / SQ2))
    shift, l2, linf = state_distance(a, b)
    assert shift == pytest.approx(1.0, abs=1e-4) and linf < 1e-4


def test_golden_min():
    assert analysis.golden_min(lambda h: (h - 0.3) ** 2, -2, 2) == pytest.approx(0.3, abs=1e-6)


@pytest.mark.parametrize("model,mu,expected", [(Model.CLASSIC_AC, 0.2, 0.2), (Model.MODIFIED_AC, 0.2, 0.0),
                                               (Model.CLASSIC_AC, 0.0, 0.0)])
def test_tail_drift(quartic, model, mu, expected):
    x = make_grid(10.0, 0.05)
    v = np.tanh(x / SQ2)
    v[np.abs(x) > 7] = np.sign(x[np.abs(x) > 7])
    s = make_state(x, v, model, quartic, mu=mu)
    traj = [s, step(s)]
    for side in ("minus", "plus"):
        rate = tail_drift_rate(traj, side)
        if expected:
            assert rate == pytest.approx(expected, rel=0.05)
        else:
            assert rate == 0.0


COARSE_AC = Grid(10.0, 0.05, 10.0)


def test_matrix_mu_zero_all_stationary(quartic):
    cfg = CompareConfig(well=quartic, mus=(0.0,), ac=COARSE_AC)
    rows = comparison_matrix(cfg)
    assert len(rows) == 4
    for r in rows:
        assert r.front_exists and r.tail_drift_rate == 0.0 and r.s_predicted == 0.0
        assert abs(r.s_measured) < 1e-6


def test_matrix_tilted_gates_fail():
    tilted = preset("tilted_quartic", 0.1)
    cfg = CompareConfig(well=tilted, ac=Grid(10.0, 0.1, 2.0), ch=Grid(8.0, 0.4, 1.0))
    rows = comparison_matrix(cfg)
    assert len(rows) == 8
    for r in rows:
        assert "unequal_wells" in r.gate
        assert not r.front_exists and r.s_predicted is None and r.l2_distance is None


def test_matrix_deterministic_csv(quartic):
    cfg = CompareConfig(well=quartic, models=(Model.MODIFIED_CH, Model.CLASSIC_CH), ch=Grid(8.0, 0.4, 4.0))
    first = comparison_csv(comparison_matrix(cfg))
    again = comparison_csv(comparison_matrix(CompareConfig(well=quartic, models=cfg.models, ch=cfg.ch, jobs=2)))
    assert first == again
    lines = first.splitlines()
    assert lines[0] == "model,mu,front_exists,s_measured,s_predicted,tail_drift,l2_distance"
    assert len(lines) == 5


def test_front_exists_rule():
    fit = analysis.SpeedFit(-0.199, -0.2, 0.005, (10.0, 20.0), 1.0, 20)
    assert analysis.front_exists(fit, 1e-4, 0.0, 0.02, -0.2)
    assert not analysis.front_exists(fit, 1e-4, 1e-9, 0.02, -0.2)
    assert not analysis.front_exists(fit, 0.01, 0.0, 0.02, -0.2)
    assert not analysis.front_exists(fit, 1e-4, 0.0, 0.02, None)
    still = analysis.SpeedFit(1e-4, 0.0, 1e-4, (5.0, 10.0), 0.5, 10)
    assert analysis.front_exists(still, 1e-4, 0.0, 0.02, 0.0)
