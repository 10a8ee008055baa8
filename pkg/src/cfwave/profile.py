"""Monotone wave profiles connecting the two wells.

Both the non-conserved and the conserved model reduce to the same first
integral 1/2 v'^2 = f(v) - f(v+), so one profile serves both; only the
speed differs (s = -mu and s = 0 respectively).

Profiles are integrated from the factorized form
v' = sqrt(a(v)) (v+ - v)^m1 (v - v-)^m2, whose right-hand side stays smooth
at the wells.  The derivative is carried as a second unknown p with
p' = f'(v), so ``energy_residual`` measures how far the integrator drifts off
the first integral rather than echoing the right-hand side back.  The
integration runs in extended precision (``np.longdouble``) so that this
drift is resolvable at fine steps.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, stats

from . import kernels
from .models import Model
from .potential import (EQUAL_WELL_TOL, DoubleWell, UnequalWells, _horner, cofactor_coeffs, eval_fk)

NONCONSERVED = "nonconserved"
CONSERVED = "conserved"
SATURATION_GAP = 1e-8


class ProfileError(RuntimeError):
    pass


class StepTooLarge(ProfileError):
    pass


class TailSaturation(ProfileError):
    """The profile stalled next to a well value; the half width exceeds what
    extended precision can resolve."""


class InsufficientTail(ProfileError):
    pass


def _kind(model) -> str:
    if model in (NONCONSERVED, CONSERVED):
        return model
    return CONSERVED if Model.parse(model).conserved else NONCONSERVED


def _to_long(q: Fraction) -> np.longdouble:
    try:
        return np.longdouble(q.numerator) / np.longdouble(q.denominator)
    except OverflowError:
        return np.longdouble(float(q))


@dataclass(frozen=True)
class WaveProfile:
    xi: np.ndarray
    v: np.ndarray  # np.longdouble
    dv: np.ndarray  # np.longdouble
    s: float
    model: str
    anchor: str
    well: DoubleWell

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.v, dtype=np.float64)

    @property
    def dx(self) -> float:
        return float(self.xi[1] - self.xi[0])

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("xi,v,dv\n")
            for x, v, d in zip(self.xi, self.v.astype(float), self.dv.astype(float)):
                fh.write(f"{x:.17g},{v:.17g},{d:.17g}\n")


@dataclass(frozen=True)
class GateReport:
    passed: bool
    failed: tuple
    gap: float
    mu: float
    model: str


def existence_gate(well: DoubleWell, mu: float, model=Model.MODIFIED_AC) -> GateReport:
    """Whether a monotone wave between the wells can exist.

    All four models need f(v-) = f(v+).  The classic Allen-Cahn model
    additionally needs mu = 0: its flat tails otherwise feel the constant
    source mu and drift.
    """
    model = Model.parse(model)
    failed = []
    gap = well.gap
    if abs(gap) > EQUAL_WELL_TOL:
        failed.append("unequal_wells")
    if model is Model.CLASSIC_AC and mu != 0.0:
        failed.append("mu_nonzero")
    return GateReport(not failed, tuple(failed), gap, mu, model.value)


def speed_from_mu(mu: float, well: DoubleWell, model=NONCONSERVED) -> float:
    if abs(well.gap) > EQUAL_WELL_TOL:
        raise UnequalWells(well.gap)
    if _kind(model) == CONSERVED:
        return 0.0
    return 0.0 - mu


def wave_speed(coeffs, t11: float, well: DoubleWell, model=NONCONSERVED) -> float:
    """Speed of the connecting wave; ``coeffs`` needs ``alpha`` and ``beta``."""
    return speed_from_mu(coeffs.alpha * t11 + coeffs.beta, well, model)


def _split_width(half_width):
    if np.ndim(half_width) == 0:
        return float(half_width), float(half_width)
    left, right = half_width
    return float(left), float(right)


def solve_profile(well: DoubleWell, half_width, dx: float, model=NONCONSERVED,
                  s: float = 0.0, anchor: float | None = None) -> WaveProfile:
    """Integrate the profile on ``[-left, right]`` with step ``dx``.

    ``half_width`` is a number or a ``(left, right)`` pair.  The anchor
    v(0) defaults to the interior maximum v*.
    """
    if abs(well.gap) > EQUAL_WELL_TOL:
        raise UnequalWells(well.gap)
    left, right = _split_width(half_width)
    if not (left > 0 and right > 0 and dx > 0):
        raise ValueError("half widths and dx must be positive")
    kind = _kind(model)
    if kind == CONSERVED:
        s = 0.0
    v0 = well.v_star if anchor is None else float(anchor)
    if not well.v_minus < v0 < well.v_plus:
        raise ValueError("anchor must lie strictly between the wells")
    cof = np.array([_to_long(q) for q in cofactor_coeffs(well)])
    fp = np.asarray(well.deriv_coeffs(1), dtype=np.longdouble)
    n_right = int(round(right / dx))
    n_left = int(round(left / dx))
    h = np.longdouble(float(dx))
    args = (cof, fp, well.v_plus, well.v_minus, well.m1, well.m2)
    vf, pf = kernels.rk4_profile(v0, h, n_right, *args)
    vb, pb = kernels.rk4_profile(v0, -h, n_left, *args)
    v = np.concatenate([vb[:0:-1], vf])
    dv = np.concatenate([pb[:0:-1], pf])
    xi = np.arange(-n_left, n_right + 1) * float(dx)

    lo, hi = np.longdouble(well.v_minus), np.longdouble(well.v_plus)
    if np.any(v < lo) or np.any(v > hi) or not np.all(np.isfinite(v)):
        raise StepTooLarge(f"profile left [v-, v+] at dx={dx}; refine the step")
    flat = np.diff(v) <= 0
    bad = (dv <= 0) | np.concatenate([flat, [False]]) | np.concatenate([[False], flat])
    if np.any(bad):
        # stalls within roundoff reach of a well mean the tail is exhausted,
        # anything else is a genuine step-size failure
        near = np.minimum(v - lo, hi - v)[bad]
        if np.all(near <= SATURATION_GAP * (hi - lo)):
            raise TailSaturation("profile stalled at a well value; reduce the half width")
        raise StepTooLarge(f"profile not strictly increasing at dx={dx}; refine the step")
    tag = "v(0)=v*" if anchor is None else f"v(0)={v0:.17g}"
    return WaveProfile(xi=xi, v=v, dv=dv, s=float(s), model=kind, anchor=tag, well=well)


def energy_residual(profile: WaveProfile, well: DoubleWell | None = None) -> float:
    """max |1/2 dv^2 - (f(v) - f(v+))| over the nodes, in extended precision."""
    well = profile.well if well is None else well
    c = np.asarray(well.coeffs, dtype=np.longdouble)
    v = np.asarray(profile.v, dtype=np.longdouble)
    dv = np.asarray(profile.dv, dtype=np.longdouble)
    g = _horner(c, v) - _horner(c, np.longdouble(well.v_plus))
    return float(np.max(np.abs(dv * dv / 2 - g)))


residual_3_15 = energy_residual  # name used by the external acceptance contract


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    side: str
    kind: str
    rate_or_exponent: float
    expected: float
    r_squared: float
    n_nodes: int

    def to_json(self) -> dict:
        return {"side": self.side, "kind": self.kind, "value": self.rate_or_exponent,
                "expected": self.expected, "r_squared": self.r_squared}


def expected_decay(well: DoubleWell, side: str) -> tuple:
    m = well.m1 if side == "plus" else well.m2
    at = well.v_plus if side == "plus" else well.v_minus
    if m == 1:
        return "exponential", math.sqrt(float(eval_fk(well, at, 2)))
    return "algebraic", 1.0 / (m - 1)


def decay_fit(profile: WaveProfile, side: str, well: DoubleWell | None = None,
              window=(1e-8, 1e-2), min_nodes: int = 50) -> DecayFit:
    """Tail fit on one side (see ``decay_rates``)."""
    well = profile.well if well is None else well
    kind, expected = expected_decay(well, side)
    if side == "plus":
        mask = profile.xi > 0
        dist = np.abs(np.longdouble(well.v_plus) - profile.v)
    else:
        mask = profile.xi < 0
        dist = np.abs(profile.v - np.longdouble(well.v_minus))
    dist = dist.astype(np.float64)
    lo, hi = window
    sel = mask & (dist >= lo) & (dist <= hi)
    count = int(np.count_nonzero(sel))
    if count < min_nodes:
        raise InsufficientTail(f"{side} tail has {count} nodes in [{lo:g}, {hi:g}], need {min_nodes}")
    y = np.log(dist[sel])
    xi = np.abs(profile.xi[sel])
    x = xi if kind == "exponential" else np.log1p(xi)
    fit = stats.linregress(x, y)
    return DecayFit(side, kind, float(-fit.slope), expected, float(fit.rvalue ** 2), count)


def decay_rates(profile: WaveProfile, well: DoubleWell | None = None,
                window=(1e-8, 1e-2), min_nodes: int = 50):
    """Least-squares tail fits ``(plus, minus)``.

    Exponential tails (m = 1) fit log|v - v_pm| against |xi|; algebraic
    tails (m > 1) against log(1 + |xi|).  The reported value is the decay
    rate or exponent, positive for a decaying tail.
    """
    return (decay_fit(profile, "plus", well, window, min_nodes),
            decay_fit(profile, "minus", well, window, min_nodes))


def decay_json(fits) -> str:
    return json.dumps([f.to_json() for f in fits], indent=2)


def tail_extent(well: DoubleWell, side: str, distance: float) -> float:
    """|xi| at which the anchored profile is ``distance`` away from the well,
    from xi = int dv / v'(v)."""
    cof = np.array([float(q) for q in cofactor_coeffs(well)])

    def inv_speed(v):
        return 1.0 / (math.sqrt(2.0 * _horner(cof, v)) * (well.v_plus - v) ** well.m1
                      * (v - well.v_minus) ** well.m2)

    if side == "plus":
        a, b = well.v_star, well.v_plus - distance
    else:
        a, b = well.v_minus + distance, well.v_star
    # split at geometric distances from the well so quad sees the tail growth
    width = well.v_plus - well.v_minus
    cuts = [d for d in np.geomspace(distance, width / 4, 12)[1:-1]]
    if side == "plus":
        pts = sorted(well.v_plus - d for d in cuts if a < well.v_plus - d < b)
    else:
        pts = sorted(well.v_minus + d for d in cuts if a < well.v_minus + d < b)
    edges = [a, *pts, b]
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        total += integrate.quad(inv_speed, lo, hi, limit=200)[0]
    return total
