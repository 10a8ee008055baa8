import math
from types import SimpleNamespace

import numpy as np
import pytest
from scipy.interpolate import PchipInterpolator

from cfwave.models import Model
from cfwave.potential import UnequalWells, preset
from cfwave.profile import (StepTooLarge, TailSaturation, WaveProfile, decay_fit, decay_rates, existence_gate,
                            energy_residual, solve_profile, speed_from_mu, tail_extent, wave_speed)

SQ2 = math.sqrt(2.0)


def test_tanh_oracle(quartic_profile):
    p = quartic_profile
    assert np.max(np.abs(p.values - np.tanh(p.xi / SQ2))) <= 1e-6
    assert p.v[p.xi.size // 2] == 0.0
    assert p.anchor == "v(0)=v*"


def test_inverse_point(quartic_profile):
    p = quartic_profile
    xi = SQ2 * math.atanh(0.5)
    assert PchipInterpolator(p.xi, p.values)(xi) == pytest.approx(0.5, abs=1e-6)


def test_invariants(quartic_profile, sextic_profile):
    for p in (quartic_profile, sextic_profile):
        w = p.well
        assert np.all(np.diff(p.v) > 0)
        assert np.all(p.dv > 0)
        assert np.all((p.v > w.v_minus) & (p.v < w.v_plus))
        assert energy_residual(p) <= 1e-8


def test_residual_order_four(quartic):
    r = [energy_residual(solve_profile(quartic, 10.0, dx)) for dx in (0.1, 0.05)]
    assert 12 <= r[0] / r[1] <= 20


def test_residual_of_fake_profile(quartic):
    xi = np.linspace(-1, 1, 5)
    fake = WaveProfile(xi, np.zeros(5, np.longdouble), np.zeros(5, np.longdouble), 0.0, "nonconserved", "", quartic)
    assert energy_residual(fake) == 0.25


def test_conserved_and_nonconserved_share_profile(quartic):
    a = solve_profile(quartic, 8.0, 1e-2, "nonconserved", s=-0.2)
    b = solve_profile(quartic, 8.0, 1e-2, "conserved", s=-0.2)
    np.testing.assert_array_equal(a.v, b.v)
    assert a.s == -0.2 and b.s == 0.0


def test_translation_quotient(sextic):
    a = solve_profile(sextic, (4.0, 20.0), 1e-3)
    mid = 0.5 * (sextic.v_minus + sextic.v_plus)
    b = solve_profile(sextic, (4.0, 20.0), 1e-3, anchor=mid)
    # shift b so that its v* crossing sits at 0
    fb = PchipInterpolator(b.values, b.xi)
    shift = float(fb(sextic.v_star))
    common = (a.xi > -3) & (a.xi < 19)
    moved = PchipInterpolator(b.xi - shift, b.values)(a.xi[common])
    assert np.max(np.abs(moved - a.values[common])) <= 1e-6


def test_unequal_wells_rejected():
    w = preset("tilted_quartic", 0.1)
    for model in ("nonconserved", "conserved"):
        with pytest.raises(UnequalWells) as exc:
            solve_profile(w, 5.0, 1e-2, model)
        assert exc.value.gap == pytest.approx(w.gap)
        with pytest.raises(UnequalWells):
            speed_from_mu(0.0, w, model)


def test_step_too_large(quartic):
    with pytest.raises(StepTooLarge):
        solve_profile(quartic, 10.0, 2.5)


def test_tail_saturation(sextic):
    with pytest.raises(TailSaturation):
        solve_profile(sextic, (30.0, 5.0), 1e-2)


def test_wave_speed_formula(quartic):
    coeffs = SimpleNamespace(alpha=1.0, beta=-0.1)
    assert wave_speed(coeffs, 0.3, quartic, "nonconserved") == pytest.approx(-0.2)
    assert wave_speed(coeffs, 0.3, quartic, "conserved") == 0.0
    for mu in (-0.3, 0.0, 0.7):
        s = speed_from_mu(mu, quartic)
        assert s * mu <= 0 and (s == 0) == (mu == 0)


def test_existence_gate(quartic):
    assert existence_gate(quartic, 0.2, Model.MODIFIED_AC).passed
    g = existence_gate(quartic, 0.2, Model.CLASSIC_AC)
    assert not g.passed and g.failed == ("mu_nonzero",)
    tilted = preset("tilted_quartic", 0.1)
    for model in Model:
        assert "unequal_wells" in existence_gate(tilted, 0.0, model).failed


def test_decay_quartic(quartic_profile):
    plus, minus = decay_rates(quartic_profile)
    for fit in (plus, minus):
        assert fit.kind == "exponential"
        assert fit.rate_or_exponent == pytest.approx(SQ2, rel=0.05)
        assert 0 <= fit.r_squared <= 1


def test_decay_sextic(sextic_profile):
    plus, minus = decay_rates(sextic_profile)
    assert plus.kind == "algebraic" and plus.rate_or_exponent == pytest.approx(1.0, rel=0.10)
    assert minus.kind == "exponential" and minus.rate_or_exponent == pytest.approx(math.sqrt(32), rel=0.05)
    assert minus.expected == pytest.approx(math.sqrt(32))


def test_decay_insufficient_tail(quartic):
    from cfwave.profile import InsufficientTail

    short = solve_profile(quartic, 2.0, 1e-2)
    with pytest.raises(InsufficientTail):
        decay_fit(short, "plus")


def test_tail_extent_matches_closed_form(quartic):
    # 1 - tanh(x/sqrt2) = d  <=>  x = sqrt2 * atanh(1 - d)
    for d in (1e-3, 1e-6, 1e-9):
        assert tail_extent(quartic, "plus", d) == pytest.approx(SQ2 * math.atanh(1 - d), rel=1e-6)


def test_profile_csv(tmp_path, quartic):
    p = solve_profile(quartic, 1.0, 0.5)
    path = tmp_path / "p.csv"
    p.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "xi,v,dv" and len(lines) == 6
    assert [float(x) for x in lines[3].split(",")] == [0.0, 0.0, float(p.dv[2])]
