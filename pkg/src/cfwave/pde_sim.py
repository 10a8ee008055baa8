"""Explicit finite-difference solvers for the four 1D evolution equations.

Grid: nodes ``x_i = -L + i*dx``, i = 0..N.

* Allen-Cahn variants keep the end nodes fixed at the Dirichlet values and
  update nodes 1..N-1 with central differences.
* Cahn-Hilliard variants use mirror ghosts at both ends and a staggered
  flux J_{i+1/2}; end nodes carry half a cell, so the trapezoid mass is
  conserved by telescoping.

With these choices ``energy`` is an exact Lyapunov functional of the
semi-discrete systems.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import kernels
from .models import Model
from .potential import DoubleWell, eval_f
from .profile import WaveProfile

AC_SAFETY = 0.2
CH_SAFETY = 0.05
# nodes next to each boundary that must lie on the padded (exactly flat)
# tail so the boundary-adjacent stencils see v- or v+ only
FLAT_MARGIN = 5


class SimulationError(RuntimeError):
    pass


class Blowup(SimulationError):
    def __init__(self, message, t=None, node=None):
        super().__init__(message)
        self.t = t
        self.node = node


class StabilityViolation(Blowup):
    """dt exceeds the declared explicit stability bound."""


class DomainTooWide(UserWarning):
    pass


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str  # "dirichlet" | "noflux"
    left: float = math.nan
    right: float = math.nan

    @classmethod
    def dirichlet(cls, left, right):
        return cls("dirichlet", float(left), float(right))

    @classmethod
    def noflux(cls):
        return cls("noflux")

    def tag(self) -> str:
        if self.kind == "dirichlet":
            return f"dirichlet({self.left:.17g},{self.right:.17g})"
        return "noflux"


@dataclass(frozen=True)
class SimState:
    x: np.ndarray
    v: np.ndarray
    t: float
    model: Model
    mu: float
    bc: BoundaryCondition
    dt: float
    well: DoubleWell
    delta: float = 0.0
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.v.shape != self.x.shape or self.x.size < 10:
            raise ValueError("state needs matching x, v with at least 8 interior nodes")
        if self.model.conserved:
            if self.mu != 0.0:
                raise ValueError(f"{self.model.value} carries no mu term; got mu={self.mu}")
            if self.bc.kind != "noflux":
                raise ValueError("Cahn-Hilliard models take no-flux boundaries")
        elif self.bc.kind != "dirichlet":
            raise ValueError("Allen-Cahn models take Dirichlet boundaries")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def L(self) -> float:
        return float(-self.x[0])


def make_grid(L: float, dx: float) -> np.ndarray:
    n = 2.0 * L / dx
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise ValueError(f"2L/dx = {n} is not an integer")
    return -L + dx * np.arange(int(round(n)) + 1)


def default_bc(model: Model, well: DoubleWell) -> BoundaryCondition:
    if model.conserved:
        return BoundaryCondition.noflux()
    return BoundaryCondition.dirichlet(well.v_minus, well.v_plus)


def max_slope(v: np.ndarray, dx: float) -> float:
    return float(np.max(np.abs(np.diff(v)))) / dx


def stability_bound(state_or_v, dx=None, model=None) -> float:
    """Largest dt the scheme declares safe for this state."""
    if isinstance(state_or_v, SimState):
        v, dx, model = state_or_v.v, state_or_v.dx, state_or_v.model
    else:
        v = state_or_v
    scale = max(1.0, max_slope(v, dx))
    if model.conserved:
        return CH_SAFETY * dx**4 / scale
    return AC_SAFETY * dx**2 / scale


def make_state(x, v, model, well, mu=0.0, dt=None, bc=None, delta=0.0, t=0.0, notes=()) -> SimState:
    model = Model.parse(model)
    x = np.asarray(x, dtype=np.float64)
    v = np.array(v, dtype=np.float64)
    if model.conserved:
        mu = 0.0
    bc = default_bc(model, well) if bc is None else bc
    if bc.kind == "dirichlet":
        v[0], v[-1] = bc.left, bc.right
    if dt is None:
        dt = stability_bound(v, float(x[1] - x[0]), model)
    return SimState(x=x, v=v, t=float(t), model=model, mu=float(mu), bc=bc, dt=float(dt),
                    well=well, delta=float(delta), notes=tuple(notes))


def init_from_profile(profile: WaveProfile, L: float, dx: float, model, mu: float = 0.0,
                      dt: float | None = None, delta: float = 0.0, shift: float = 0.0) -> SimState:
    """Sample a profile onto the simulation grid (monotone cubic interpolation).

    Where [-L, L] extends beyond the profile the tails are padded with the
    well values and a ``DomainTooWide`` warning is issued.
    """
    if profile.xi.size < 2:
        raise ValueError("empty profile")
    model = Model.parse(model)
    well = profile.well
    x = make_grid(L, dx)
    xi = x - shift
    interp = PchipInterpolator(profile.xi, profile.values, extrapolate=False)
    v = interp(xi)
    notes = []
    outside = (xi < profile.xi[0]) | (xi > profile.xi[-1])
    if np.any(outside):
        msg = (f"profile covers [{profile.xi[0]:g}, {profile.xi[-1]:g}], domain needs "
               f"[{xi[0]:g}, {xi[-1]:g}]; tails padded with well values")
        warnings.warn(msg, DomainTooWide, stacklevel=2)
        notes.append(msg)
        v[xi < profile.xi[0]] = well.v_minus
        v[xi > profile.xi[-1]] = well.v_plus
    return make_state(x, v, model, well, mu=mu, dt=dt, delta=delta, notes=notes)


def inner_half_width(L: float, dx: float, wanted: float) -> float:
    """Largest profile half width <= ``wanted`` that leaves FLAT_MARGIN
    padded nodes at each end of [-L, L]."""
    return min(wanted, L - FLAT_MARGIN * dx)


def rhs(state: SimState) -> np.ndarray:
    """Semi-discrete time derivative (zero at Dirichlet nodes)."""
    from . import _pykernels as pk

    fp = state.well.deriv_coeffs(1)
    out = np.zeros_like(state.v)
    if state.model.conserved:
        out[:] = pk.ch_rate(state.v, state.model.code, state.dx, fp, state.delta)
    else:
        out[1:-1] = pk.ac_rate(state.v, state.model.code, state.mu, state.dx, fp, state.delta)
    return out


def advance(state: SimState, nsteps: int) -> SimState:
    v = state.v.copy()
    done = kernels.advance(v, state.model.code, state.mu, state.dx, state.dt, int(nsteps),
                           state.well.deriv_coeffs(1), state.delta)
    if done < nsteps:
        t_bad = state.t + (done + 1) * state.dt
        bad = np.flatnonzero(~np.isfinite(v))
        node = int(bad[0]) if bad.size else None
        raise Blowup(f"non-finite value at node {node} (x={state.x[node] if node is not None else '?'}) "
                     f"at t={t_bad:.6g}", t=state.t + done * state.dt, node=node)
    return replace(state, v=v, t=state.t + nsteps * state.dt)


def step(state: SimState) -> SimState:
    return advance(state, 1)


def run(state: SimState, t_end: float, snapshot_every: float, check_stability: bool = True) -> list:
    """Advance to ``t_end`` and return snapshots (the initial state first).

    Snapshots are taken every ``round(snapshot_every/dt)`` steps and at the
    final time; the stability bound is re-checked at every snapshot.
    """
    if not t_end > state.t:
        raise ValueError("t_end must exceed the current time")
    total = int(math.ceil((t_end - state.t) / state.dt - 1e-6))
    every = max(1, int(round(snapshot_every / state.dt)))
    t0 = state.t
    traj = [state]
    done = 0
    cur = state
    while done < total:
        if check_stability:
            bound = stability_bound(cur)
            if cur.dt > bound * (1 + 1e-12):
                raise StabilityViolation(
                    f"dt={cur.dt:.6g} exceeds the stability bound {bound:.6g} at t={cur.t:.6g}", t=cur.t)
        k = min(every, total - done)
        nxt = advance(cur, k)
        done += k
        cur = replace(nxt, t=t0 + done * state.dt)
        traj.append(cur)
    return traj


def energy(state: SimState) -> float:
    """Discrete free energy: gradient part over the edges plus the
    trapezoid-weighted potential (minus mu*v for the Allen-Cahn models)."""
    v, dx = state.v, state.dx
    grad = 0.5 * np.sum(np.diff(v) ** 2) / dx
    bulk = eval_f(state.well, v)
    if not state.model.conserved:
        bulk = bulk - state.mu * v
    w = np.ones_like(v)
    w[0] = w[-1] = 0.5
    return float(grad + dx * np.sum(w * bulk))


def mass(state_or_v, dx=None) -> float:
    v = state_or_v.v if isinstance(state_or_v, SimState) else np.asarray(state_or_v)
    dx = state_or_v.dx if dx is None else dx
    return float(dx * (np.sum(v[1:-1]) + 0.5 * (v[0] + v[-1])))


def tanh_front(L, dx, model, well, mu=0.0, dt=None, delta=0.0, width=math.sqrt(2.0)) -> SimState:
    """Smoothed step between the wells, for potentials without a profile."""
    x = make_grid(L, dx)
    mid = 0.5 * (well.v_plus + well.v_minus)
    half = 0.5 * (well.v_plus - well.v_minus)
    v = mid + half * np.tanh(x / width)
    return make_state(x, v, model, well, mu=mu, dt=dt, delta=delta, notes=("tanh initial data",))
