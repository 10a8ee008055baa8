"""Run configuration: ``key = value`` text files (``#`` comments) or JSON
run manifests, merged with command-line overrides.

Elastic data: ``n``, ``D`` (``isotropic shear bulk`` or n^4 numbers in
(i,j,k,l) order), ``eps0`` and ``eps1`` (n*n numbers, ``diag a b ...``,
``zero`` or ``identity``), ``t11``.  The driving constant mu is given either
directly, as ``alpha``/``beta`` with ``t11``, or through the elastic data;
mixing two of these routes is rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .models import Model
from .tensor_reduction import ElasticError, ElasticSystem, isotropic_tensor, reduce, sym_matrix, validate


class ConfigError(ValueError):
    pass


FLOAT_KEYS = ("mu", "alpha", "beta", "t11", "L", "dx", "dt", "t_end", "snapshot_every", "delta",
              "profile_dx", "dx_ch", "L_ch", "t_end_ch", "dt_ch", "noise")
INT_KEYS = ("n", "seed", "jobs")
TEXT_KEYS = ("potential", "model", "D", "eps0", "eps1", "out", "half_width", "mus", "models",
             "decay_window", "bc", "command")


@dataclass(frozen=True)
class ElasticSpec:
    n: int
    D: str
    eps0: str = "zero"
    eps1: str = "zero"

    def system(self) -> ElasticSystem:
        n = self.n
        return ElasticSystem(parse_tensor(self.D, n), parse_matrix(self.eps0, n), parse_matrix(self.eps1, n))


def _numbers(text: str) -> list:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"expected numbers, got {text!r}") from exc


def parse_tensor(text: str, n: int) -> np.ndarray:
    parts = text.split()
    if parts and parts[0] == "isotropic":
        vals = _numbers(" ".join(parts[1:]))
        if len(vals) != 2:
            raise ConfigError("D = isotropic needs shear and bulk")
        return isotropic_tensor(n, *vals)
    vals = _numbers(text)
    if len(vals) != n**4:
        raise ConfigError(f"D needs {n**4} entries for n={n}, got {len(vals)}")
    return np.array(vals).reshape(n, n, n, n)


def parse_matrix(text: str, n: int) -> np.ndarray:
    parts = text.split()
    if not parts or parts[0] == "zero":
        return np.zeros((n, n))
    if parts[0] == "identity":
        return np.eye(n)
    if parts[0] == "diag":
        vals = _numbers(" ".join(parts[1:]))
        if len(vals) != n:
            raise ConfigError(f"diag needs {n} entries")
        return np.diag(vals)
    vals = _numbers(text)
    if len(vals) != n * n:
        raise ConfigError(f"matrix needs {n * n} entries for n={n}, got {len(vals)}")
    try:
        return sym_matrix(vals, n)
    except ElasticError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class RunConfig:
    potential: str = "quartic"
    model: str = "modified_ac"
    mu: float | None = None
    alpha: float | None = None
    beta: float | None = None
    t11: float | None = None
    elastic: ElasticSpec | None = None
    L: float | None = None
    dx: float | None = None
    dt: float | None = None
    t_end: float | None = None
    snapshot_every: float | None = None
    delta: float = 0.0
    seed: int = 0
    noise: float = 0.0
    half_width: str | None = None
    profile_dx: float = 1e-3
    decay_window: tuple = (1e-8, 1e-2)
    mus: tuple = (0.0, 0.2)
    models: tuple = ("modified_ac", "classic_ac", "modified_ch", "classic_ch")
    L_ch: float = 15.0
    dx_ch: float = 0.2
    t_end_ch: float = 10.0
    dt_ch: float | None = None
    jobs: int = 1
    out: str = "."

    def resolve_mu(self) -> float:
        if self.mu is not None:
            return self.mu
        t11 = 0.0 if self.t11 is None else self.t11
        if self.alpha is not None or self.beta is not None:
            return (self.alpha or 0.0) * t11 + (self.beta or 0.0)
        if self.elastic is not None:
            system = self.elastic.system()
            if not validate(system).valid:
                raise ConfigError("elastic system is invalid")
            return reduce(system).mu(t11)
        return 0.0

    def grid(self, model=None) -> tuple:
        """``(L, dx, t_end)`` for a single run; unset values take the
        defaults of the model family (Cahn-Hilliard runs need a coarser
        grid because their step scales with dx^4)."""
        model = Model.parse(model or self.model)
        base = (15.0, 0.2, 10.0) if model.conserved else (20.0, 0.02, 20.0)
        got = (self.L, self.dx, self.t_end)
        return tuple(b if g is None else g for g, b in zip(got, base))

    def cadence(self, t_end: float) -> float:
        """Snapshot interval; by default 40 snapshots per run."""
        return t_end / 40 if self.snapshot_every is None else self.snapshot_every

    def widths(self):
        """``half_width`` as None, a number or a (left, right) pair."""
        if self.half_width is None:
            return None
        vals = _numbers(str(self.half_width))
        if len(vals) == 1:
            return vals[0]
        if len(vals) == 2:
            return tuple(vals)
        raise ConfigError("half_width takes one or two numbers")


def _read_pairs(text: str) -> dict:
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON config: {exc}") from exc
        return {k: v for k, v in raw.items()}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "poly":
            key, value = "potential", f"poly = {value}"
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _join(value) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    return str(value)


def _coerce(pairs: dict) -> dict:
    known = set(FLOAT_KEYS) | set(INT_KEYS) | set(TEXT_KEYS)
    unknown = sorted(set(pairs) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    out = {}
    for key, value in pairs.items():
        if value is None:
            continue
        try:
            if key in FLOAT_KEYS:
                out[key] = float(value)
            elif key in INT_KEYS:
                out[key] = int(value)
            else:
                out[key] = _join(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: cannot parse {value!r}") from exc
    return out


def build(pairs: dict, overrides: dict | None = None) -> RunConfig:
    """Typed config from raw pairs; non-None ``overrides`` (command-line
    flags) replace file values and win over contradicting routes to mu."""
    vals = _coerce(pairs)
    over = _coerce({k: v for k, v in (overrides or {}).items() if v is not None})
    routes = [k for k in ("mu",) if k in vals]
    if "alpha" in vals or "beta" in vals:
        routes.append("alpha/beta")
    if any(k in vals for k in ("D", "eps0", "eps1")):
        routes.append("elastic")
    if len(routes) > 1:
        raise ConfigError(f"contradictory keys: mu given through {' and '.join(routes)}")
    if "mu" in over:
        for k in ("alpha", "beta", "D", "eps0", "eps1"):
            vals.pop(k, None)
    vals.update(over)

    elastic = None
    if "D" in vals:
        if "n" not in vals:
            raise ConfigError("elastic data needs n")
        elastic = ElasticSpec(vals.pop("n"), vals.pop("D"), vals.pop("eps0", "zero"), vals.pop("eps1", "zero"))
    elif "eps0" in vals or "eps1" in vals:
        raise ConfigError("eps0/eps1 given without D")
    vals.pop("n", None)

    bc = vals.pop("bc", None)
    vals.pop("command", None)
    if "model" in vals:
        try:
            vals["model"] = Model.parse(vals["model"]).value
        except ValueError as exc:
            raise ConfigError(f"unknown model {vals['model']!r}") from exc
        model = Model(vals["model"])
        if bc is not None and bc.split("(")[0] != ("noflux" if model.conserved else "dirichlet"):
            raise ConfigError(f"bc {bc!r} contradicts model {model.value}")
    if "mus" in vals:
        vals["mus"] = tuple(_numbers(vals["mus"]))
    if "models" in vals:
        try:
            vals["models"] = tuple(Model.parse(m).value for m in vals["models"].split(","))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if "decay_window" in vals:
        win = _numbers(vals["decay_window"])
        if len(win) != 2 or not 0 < win[0] < win[1]:
            raise ConfigError("decay_window takes two increasing positive numbers")
        vals["decay_window"] = tuple(win)
    for key in ("L", "dx", "t_end", "snapshot_every", "profile_dx", "L_ch", "dx_ch", "t_end_ch"):
        if key in vals and not vals[key] > 0:
            raise ConfigError(f"{key} must be positive")
    if vals.get("dt") is not None and not vals["dt"] > 0:
        raise ConfigError("dt must be positive")
    return RunConfig(elastic=elastic, **vals)


def load(path: str | None, overrides: dict | None = None) -> RunConfig:
    if path is None:
        return build({}, overrides)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build(_read_pairs(text), overrides)


def loads(text: str, overrides: dict | None = None) -> RunConfig:
    return build(_read_pairs(text), overrides)
