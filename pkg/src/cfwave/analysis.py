"""Measurements on trajectories: front position and speed, tail drift,
profile distance modulo translation, and the model comparison matrix."""
from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .models import Model
from .pde_sim import Blowup, DomainTooWide, init_from_profile, inner_half_width, run, step, tanh_front
from .potential import DoubleWell
from .profile import WaveProfile, existence_gate, solve_profile, speed_from_mu

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class CrossingError(ValueError):
    pass


class NoCrossing(CrossingError):
    pass


class MultipleCrossings(CrossingError):
    pass


def front_position(state, level: float) -> float:
    """Abscissa where v crosses ``level``, by linear interpolation."""
    x, v = np.asarray(state.x), np.asarray(state.v, dtype=float)
    d = v - level
    up = (d[:-1] < 0) & (d[1:] >= 0)
    down = (d[:-1] > 0) & (d[1:] <= 0)
    idx = np.flatnonzero(up | down)
    if idx.size == 0:
        raise NoCrossing(f"v never crosses {level}")
    if idx.size > 1:
        raise MultipleCrossings(f"v crosses {level} {idx.size} times")
    i = int(idx[0])
    frac = -d[i] / (d[i + 1] - d[i])
    return float(x[i] + frac * (x[i + 1] - x[i]))


@dataclass(frozen=True)
class SpeedFit:
    s_measured: float
    s_predicted: float
    relative_error: float
    fit_window: tuple
    r_squared: float
    n_points: int

    def to_json(self) -> dict:
        return {"s_measured": self.s_measured, "s_predicted": self.s_predicted,
                "relative_error": self.relative_error, "fit_window": list(self.fit_window),
                "r_squared": self.r_squared}


def _linfit(t, y):
    slope, icpt = np.polyfit(t, y, 1)
    resid = y - (slope * t + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), r2


def measure_speed(trajectory, level: float, predicted: float = 0.0, discard: float = 0.5,
                  min_points: int = 10) -> SpeedFit:
    """Least-squares slope of the front position over the last
    ``1 - discard`` of the run.  With ``predicted == 0`` the relative error
    degenerates to the absolute speed."""
    t = np.array([s.t for s in trajectory], dtype=float)
    t_start = t[0] + discard * (t[-1] - t[0])
    keep = t >= t_start - 1e-12
    if np.count_nonzero(keep) < min_points:
        raise ValueError(f"{np.count_nonzero(keep)} snapshots in the fit window, need {min_points}")
    pos = np.array([front_position(s, level) for s, k in zip(trajectory, keep) if k])
    slope, r2 = _linfit(t[keep], pos)
    err = abs(slope - predicted) / abs(predicted) if predicted != 0 else abs(slope)
    return SpeedFit(slope, float(predicted), float(err), (float(t[keep][0]), float(t[-1])), r2, int(pos.size))


def _padded_interp(xs, vs, lo_val, hi_val):
    f = PchipInterpolator(xs, vs, extrapolate=False)

    def g(x):
        out = f(x)
        out[x < xs[0]] = lo_val
        out[x > xs[-1]] = hi_val
        return out

    return g


def golden_min(fun, a, b, tol=1e-6):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def _distance(x, v, ref, bound, tol):
    dx = float(x[1] - x[0])

    def sq(h):
        return dx * float(np.sum((v - ref(x - h)) ** 2))

    h = golden_min(sq, -bound, bound, tol)
    # the squared distance is quadratic near its minimum: one parabolic step
    # removes the bracketing error left by the golden search
    fm, f0, fp = sq(h - tol), sq(h), sq(h + tol)
    curv = fm - 2 * f0 + fp
    if curv > 0:
        cand = h - 0.5 * tol * (fp - fm) / curv
        if abs(cand - h) <= tol and sq(cand) < f0:
            h = cand
    diff = v - ref(x - h)
    return float(h), math.sqrt(dx * float(np.sum(diff**2))), float(np.max(np.abs(diff)))


def profile_distance(state, profile: WaveProfile, bound: float | None = None, tol: float = 1e-6):
    """``(shift, l2, linf)`` between the state and the best translate of the
    profile, v(x) ~ profile(x - shift)."""
    x = np.asarray(state.x, dtype=float)
    v = np.asarray(state.v, dtype=float)
    bound = 0.5 * float(x[-1] - x[0]) / 2.0 if bound is None else bound
    w = profile.well
    ref = _padded_interp(profile.xi, profile.values, w.v_minus, w.v_plus)
    return _distance(x, v, ref, bound, tol)


def state_distance(a, b, bound: float | None = None, tol: float = 1e-6):
    """Same as ``profile_distance`` with a second sampled field as reference."""
    x = np.asarray(a.x, dtype=float)
    bound = 0.5 * float(x[-1] - x[0]) / 2.0 if bound is None else bound
    vb = np.asarray(b.v, dtype=float)
    ref = _padded_interp(np.asarray(b.x, dtype=float), vb, vb[0], vb[-1])
    return _distance(x, np.asarray(a.v, dtype=float), ref, bound, tol)


def tail_drift_rate(trajectory, side: str) -> float:
    """Initial dv/dt at the node next to the boundary on ``side``."""
    s0, s1 = trajectory[0], trajectory[1]
    i = 1 if side == "minus" else -2
    return float((s1.v[i] - s0.v[i]) / (s1.t - s0.t))


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    L: float
    dx: float
    t_end: float
    snapshot_every: float | None = None
    dt: float | None = None

    @property
    def cadence(self) -> float:
        return self.t_end / 40 if self.snapshot_every is None else self.snapshot_every


@dataclass(frozen=True)
class CompareConfig:
    well: DoubleWell
    potential: str = "quartic"
    mus: tuple = (0.0, 0.2)
    models: tuple = (Model.MODIFIED_AC, Model.CLASSIC_AC, Model.MODIFIED_CH, Model.CLASSIC_CH)
    ac: Grid = Grid(20.0, 0.02, 20.0)
    ch: Grid = Grid(15.0, 0.2, 10.0)
    profile_dx: float = 1e-3
    profile_half_width: float = 10.0
    delta: float = 0.0
    jobs: int = 1


@dataclass(frozen=True)
class ComparisonRow:
    model: Model
    mu: float
    front_exists: bool
    s_measured: float | None
    s_predicted: float | None
    tail_drift_rate: float
    l2_distance: float | None
    linf_distance: float | None = None
    gate: tuple = field(default=(), compare=False)
    note: str = ""


def front_exists(fit: SpeedFit | None, linf: float | None, drift: float, dx: float, predicted) -> bool:
    if fit is None or linf is None or predicted is None:
        return False
    if predicted != 0:
        speed_ok = fit.relative_error <= 0.05
    else:
        speed_ok = abs(fit.s_measured) <= dx / (fit.fit_window[1] - fit.fit_window[0])
    return bool(speed_ok and linf <= 10.0 * dx**2 and drift == 0.0)


def run_cell(cfg: CompareConfig, model: Model, mu: float) -> ComparisonRow:
    model = Model.parse(model)
    well = cfg.well
    grid = cfg.ch if model.conserved else cfg.ac
    mu_eff = 0.0 if model.conserved else mu
    gate = existence_gate(well, mu_eff, model)
    profile = None
    predicted = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DomainTooWide)
        if "unequal_wells" not in gate.failed:
            # keep the profile strictly inside the domain so the boundary
            # nodes and their neighbours sit exactly on the wells
            half = inner_half_width(grid.L, grid.dx, cfg.profile_half_width)
            profile = solve_profile(well, half, cfg.profile_dx, model.value)
            state = init_from_profile(profile, grid.L, grid.dx, model, mu=mu_eff, dt=grid.dt, delta=cfg.delta)
        else:
            state = tanh_front(grid.L, grid.dx, model, well, mu=mu_eff, dt=grid.dt, delta=cfg.delta)
    if gate.passed or (model is Model.MODIFIED_AC and profile is not None):
        predicted = speed_from_mu(mu_eff, well, model.value)
    first = [state, step(state)]
    drifts = [tail_drift_rate(first, "minus"), tail_drift_rate(first, "plus")]
    drift = max(drifts, key=abs)
    note = ""
    try:
        traj = run(state, grid.t_end, grid.cadence)
    except Blowup as exc:
        return ComparisonRow(model, mu, False, None, predicted, drift, None, None, gate.failed, f"blowup: {exc}")
    fit = linf = l2 = None
    try:
        fit = measure_speed(traj, well.v_star, predicted if predicted is not None else 0.0)
    except (CrossingError, ValueError) as exc:
        note = str(exc)
    if profile is not None:
        _, l2, linf = profile_distance(traj[-1], profile)
    exists = front_exists(fit, linf, drift, grid.dx, predicted)
    return ComparisonRow(model, mu, exists, None if fit is None else fit.s_measured, predicted, drift,
                         l2, linf, gate.failed, note)


def _cell(args):
    return run_cell(*args)


def comparison_matrix(cfg: CompareConfig) -> list:
    cells = [(cfg, m, mu) for m in cfg.models for mu in cfg.mus]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_cell, cells))
    return [_cell(c) for c in cells]


COMPARISON_HEADER = ["model", "mu", "front_exists", "s_measured", "s_predicted", "tail_drift", "l2_distance"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Model):
        return x.value
    return f"{x:.17g}"


def comparison_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARISON_HEADER)
    for r in rows:
        w.writerow([_fmt(r.model), _fmt(r.mu), _fmt(r.front_exists), _fmt(r.s_measured),
                    _fmt(r.s_predicted), _fmt(r.tail_drift_rate), _fmt(r.l2_distance)])
    return buf.getvalue()
