"""``cfwave`` command line: reduce, profile, simulate, compare.

Exit codes: 0 success, 2 invalid elastic system (or unreadable config for
``reduce``), 3 no connecting wave (existence gate failed), 4 numerical
blowup or stability violation, 1 anything else.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from . import analysis
from .config import ConfigError, RunConfig, load
from .models import Model
from .pde_sim import (Blowup, DomainTooWide, StabilityViolation, energy, init_from_profile, inner_half_width,
                      make_state, mass, run, tanh_front)
from .potential import PotentialError, UnequalWells, parse_potential
from .profile import (InsufficientTail, ProfileError, decay_fit, existence_gate, solve_profile,
                      speed_from_mu, tail_extent)
from .tensor_reduction import ElasticError, reduction_report

EXIT_OK, EXIT_OTHER, EXIT_ELASTIC, EXIT_GATE, EXIT_BLOWUP = 0, 1, 2, 3, 4
MAX_HALF_WIDTH = 2000.0


class GateFailure(Exception):
    def __init__(self, message, gap):
        super().__init__(message)
        self.gap = gap


def _g(x) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.17g}"


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(cfg: RunConfig) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


# ---------------------------------------------------------------------------
# reduce

def cmd_reduce(cfg: RunConfig) -> int:
    if cfg.elastic is None:
        raise ConfigError("reduce needs elastic data (n, D, eps0, eps1)")
    try:
        system = cfg.elastic.system()
    except ElasticError as exc:
        raise ConfigError(str(exc)) from exc
    report = reduction_report(system)
    data = report.to_json()
    if cfg.t11 is not None and report.coeffs is not None:
        data["t11"] = cfg.t11
        data["mu"] = report.coeffs.mu(cfg.t11)
    _write_json(os.path.join(_out_dir(cfg), "reduction.json"), data)
    if not report.validation.valid:
        print(json.dumps({k: data[k] for k in ("valid", "c", "d1111", "reasons")}, indent=2), file=sys.stderr)
        return EXIT_ELASTIC
    return EXIT_OK


# ---------------------------------------------------------------------------
# profile

def default_half_width(well, floor: float = 1.0):
    """Per-side half widths reaching 1e-9 from the wells, capped so that
    slowly decaying algebraic tails stay affordable."""
    out = []
    for side in ("minus", "plus"):
        reach = tail_extent(well, side, 1e-9)
        out.append(min(max(floor, math.ceil(reach)), MAX_HALF_WIDTH))
    return tuple(out)


def _profile_dx(cfg: RunConfig, widths) -> float:
    # keep the step count bounded on long algebraic tails
    span = sum(widths) if isinstance(widths, tuple) else 2 * widths
    return max(cfg.profile_dx, span / 4e5)


def cmd_profile(cfg: RunConfig) -> int:
    well = parse_potential(cfg.potential)
    model = Model.parse(cfg.model)
    mu = 0.0 if model.conserved else cfg.resolve_mu()
    if "unequal_wells" in existence_gate(well, mu, model).failed:
        raise GateFailure("wells have unequal heights; no connecting wave", well.gap)
    widths = cfg.widths() or default_half_width(well)
    dx = _profile_dx(cfg, widths)
    prof = solve_profile(well, widths, dx, model.value, s=speed_from_mu(mu, well, model.value))
    out = _out_dir(cfg)
    prof.write_csv(os.path.join(out, "profile.csv"))
    _write_json(os.path.join(out, "decay.json"), _decay_entries(prof, cfg.decay_window))
    manifest = {"command": "profile", "potential": cfg.potential, "model": model.value, "mu": mu,
                "half_width": " ".join(_g(w) for w in np.atleast_1d(widths)), "profile_dx": dx,
                "decay_window": " ".join(_g(w) for w in cfg.decay_window)}
    _write_json(os.path.join(out, "manifest.json"), manifest)
    return EXIT_OK


def _decay_entries(prof, window) -> list:
    # sides are fitted independently so one short tail does not hide the other
    out = []
    for side in ("plus", "minus"):
        try:
            out.append(decay_fit(prof, side, window=window).to_json())
        except InsufficientTail as exc:
            print(f"warning: {exc}", file=sys.stderr)
            out.append({"side": side, "error": str(exc)})
    return out


# ---------------------------------------------------------------------------
# simulate

def initial_state(cfg: RunConfig, model: Model, mu: float, L: float, dx: float, dt, profile=None):
    well = parse_potential(cfg.potential)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DomainTooWide)
        if abs(well.gap) <= 1e-10:
            if profile is None:
                widths = cfg.widths() or tuple(inner_half_width(L, dx, w) for w in default_half_width(well))
                profile = solve_profile(well, widths, cfg.profile_dx, model.value)
            state = init_from_profile(profile, L, dx, model, mu=mu, dt=dt, delta=cfg.delta)
        else:
            state = tanh_front(L, dx, model, well, mu=mu, dt=dt, delta=cfg.delta)
    if cfg.noise > 0:
        rng = np.random.default_rng(cfg.seed)
        v = state.v.copy()
        v[1:-1] += cfg.noise * rng.standard_normal(v.size - 2)
        state = make_state(state.x, v, model, well, mu=mu, dt=dt, bc=state.bc, delta=cfg.delta,
                           notes=state.notes)
    return state, profile


def sim_manifest(cfg: RunConfig, state) -> dict:
    L, dx, t_end = cfg.grid(state.model)
    m = {"command": "simulate", "model": state.model.value, "mu": state.mu, "dx": dx, "dt": state.dt,
         "L": L, "t_end": t_end, "bc": state.bc.tag(), "potential": cfg.potential, "seed": cfg.seed,
         "snapshot_every": cfg.cadence(t_end), "delta": cfg.delta, "noise": cfg.noise,
         "profile_dx": cfg.profile_dx}
    if cfg.half_width is not None:
        m["half_width"] = cfg.half_width
    return m


def cmd_simulate(cfg: RunConfig) -> int:
    model = Model.parse(cfg.model)
    mu = 0.0 if model.conserved else cfg.resolve_mu()
    L, dx, t_end = cfg.grid(model)
    state, _ = initial_state(cfg, model, mu, L, dx, cfg.dt)
    out = _out_dir(cfg)
    _write_json(os.path.join(out, "manifest.json"), sim_manifest(cfg, state))
    traj = run(state, t_end, cfg.cadence(t_end))
    level = state.well.v_star

    with open(os.path.join(out, "snapshots.csv"), "w") as fh:
        fh.write("t,x,v\n")
        for s in traj:
            t = _g(s.t)
            for x, v in zip(s.x, s.v):
                fh.write(f"{t},{x:.17g},{v:.17g}\n")
    with open(os.path.join(out, "trajectory.csv"), "w") as fh:
        fh.write("t,front_position,mass,energy\n")
        for s in traj:
            try:
                pos = analysis.front_position(s, level)
            except analysis.CrossingError:
                pos = None
            fh.write(f"{_g(s.t)},{_g(pos)},{_g(mass(s))},{_g(energy(s))}\n")

    gate = existence_gate(state.well, mu, model)
    predicted = speed_from_mu(mu, state.well, model.value) if gate.passed else None
    try:
        fit = analysis.measure_speed(traj, level, predicted if predicted is not None else 0.0)
        speed = fit.to_json()
        speed["s_predicted"] = predicted
        if predicted is None:
            speed["relative_error"] = None
    except (analysis.CrossingError, ValueError) as exc:
        speed = {"s_measured": None, "s_predicted": predicted, "error": str(exc)}
    speed["gate_failed"] = list(gate.failed)
    speed["tail_drift"] = {side: analysis.tail_drift_rate(traj, side) for side in ("minus", "plus")}
    _write_json(os.path.join(out, "speed.json"), speed)
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare

def compare_config(cfg: RunConfig) -> analysis.CompareConfig:
    L, dx, t_end = cfg.grid(Model.MODIFIED_AC)
    return analysis.CompareConfig(
        well=parse_potential(cfg.potential), potential=cfg.potential, mus=tuple(cfg.mus),
        models=tuple(Model.parse(m) for m in cfg.models),
        ac=analysis.Grid(L, dx, t_end, cfg.cadence(t_end), cfg.dt),
        ch=analysis.Grid(cfg.L_ch, cfg.dx_ch, cfg.t_end_ch, cfg.cadence(cfg.t_end_ch), cfg.dt_ch),
        profile_dx=cfg.profile_dx, profile_half_width=cfg.widths() or 10.0, delta=cfg.delta,
        jobs=cfg.jobs)


def cmd_compare(cfg: RunConfig) -> int:
    cc = compare_config(cfg)
    rows = analysis.comparison_matrix(cc)
    out = _out_dir(cfg)
    with open(os.path.join(out, "comparison.csv"), "w") as fh:
        fh.write(analysis.comparison_csv(rows))
    manifest = {"command": "compare", "potential": cfg.potential, "models": ",".join(m.value for m in cc.models),
                "mus": ",".join(_g(m) for m in cc.mus), "L": cc.ac.L, "dx": cc.ac.dx, "t_end": cc.ac.t_end,
                "L_ch": cc.ch.L, "dx_ch": cc.ch.dx, "t_end_ch": cc.ch.t_end,
                "snapshot_every": cfg.snapshot_every, "profile_dx": cc.profile_dx, "delta": cc.delta,
                "seed": cfg.seed, "bc": "dirichlet(v-,v+) for AC, noflux for CH"}
    if cfg.dt is not None:
        manifest["dt"] = cfg.dt
    if cfg.dt_ch is not None:
        manifest["dt_ch"] = cfg.dt_ch
    if cfg.half_width is not None:
        manifest["half_width"] = cfg.half_width
    _write_json(os.path.join(out, "manifest.json"), manifest)
    return EXIT_OK


# ---------------------------------------------------------------------------

COMMANDS = {"reduce": cmd_reduce, "profile": cmd_profile, "simulate": cmd_simulate, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfwave", description="Waves of configurational-force phase-field models.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("reduce", "reduce an elastic system to 1D coefficients"),
                        ("profile", "compute a wave profile and its tail decay"),
                        ("simulate", "run one 1D simulation"),
                        ("compare", "run the model/mu comparison matrix")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="key = value file or JSON run manifest")
        s.add_argument("--out", help="output directory")
        s.add_argument("--jobs", type=int, help="worker processes for compare")
        s.add_argument("--dx", type=float)
        s.add_argument("--dt", type=float)
        s.add_argument("--L", type=float, dest="L")
        s.add_argument("--t-end", type=float, dest="t_end")
        s.add_argument("--mu", type=float)
        s.add_argument("--model")
        s.add_argument("--potential")
        s.add_argument("--delta", type=float)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    command = args.command
    try:
        cfg = load(args.config, overrides)
        return COMMANDS[command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ELASTIC if command == "reduce" else EXIT_OTHER
    except GateFailure as exc:
        print(f"{exc}: gap f(v+) - f(v-) = {exc.gap:.17g}", file=sys.stderr)
        return EXIT_GATE
    except UnequalWells as exc:
        print(f"no connecting wave: gap f(v+) - f(v-) = {exc.gap:.17g}", file=sys.stderr)
        return EXIT_GATE
    except (Blowup, StabilityViolation) as exc:
        print(f"blowup: {exc}; last valid time {exc.t}", file=sys.stderr)
        return EXIT_BLOWUP
    except (PotentialError, ProfileError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
