"""Polynomial double-well potentials.

Critical points are located with exact rational arithmetic: the derivative
is reduced to its squarefree part, real roots are isolated by Descartes
sign counting on bisected intervals, and each isolating interval is refined
by bisection.  Rational roots are recovered exactly, so flatness orders of
potentials such as ``(v+1)**2 (v-1)**4`` come out without rounding noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

EQUAL_WELL_TOL = 1e-10
ORDER_TOL = 1e-9


class PotentialError(ValueError):
    pass


class NotDoubleWell(PotentialError):
    pass


class OrderDetectionFailure(PotentialError):
    pass


class UnequalWells(PotentialError):
    """No connecting wave: the two minima of f sit at different heights."""

    def __init__(self, gap: float):
        super().__init__(f"f(v+) - f(v-) = {gap:.17g}; the wells must coincide")
        self.gap = gap


# ---------------------------------------------------------------------------
# exact polynomial arithmetic on ascending coefficient lists of Fractions

def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _peval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _pderiv(p):
    return _trim([k * p[k] for k in range(1, len(p))])


def _pmul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def _pdivmod(p, q):
    p, q = _trim(p), _trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    quo = [Fraction(0)] * max(len(p) - len(q) + 1, 1)
    while rem and len(rem) >= len(q):
        k = len(rem) - len(q)
        c = rem[-1] / q[-1]
        quo[k] = c
        for j, b in enumerate(q):
            rem[k + j] -= c * b
        rem = _trim(rem)
    return _trim(quo), rem


def _pgcd(p, q):
    p, q = _trim(p), _trim(q)
    while q:
        p, q = q, _pdivmod(p, q)[1]
    return [c / p[-1] for c in p] if p else []


def _ppow(p, k):
    out = [Fraction(1)]
    for _ in range(k):
        out = _pmul(out, p)
    return out


def _sign_variations(p):
    signs = [c > 0 for c in p if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _descartes_count(p, a, b):
    """Sign variations of (1+x)^n p((a + b x)/(1+x)): an upper bound on the
    number of roots in (a, b), exact when it is 0 or 1."""
    n = len(p) - 1
    lin_num = [a, b]
    one_plus = [Fraction(1), Fraction(1)]
    total = []
    for k, c in enumerate(p):
        if c == 0:
            continue
        term = _pmul(_ppow(lin_num, k), _ppow(one_plus, n - k))
        term = [c * t for t in term]
        if len(term) > len(total):
            total += [Fraction(0)] * (len(term) - len(total))
        for i, t in enumerate(term):
            total[i] += t
    return _sign_variations(_trim(total))


def _isolate(p, a, b, out):
    v = _descartes_count(p, a, b)
    if v == 0:
        return
    if v == 1:
        out.append((a, b))
        return
    m = (a + b) / 2
    if _peval(p, m) == 0:
        out.append((m, m))
    _isolate(p, a, m, out)
    _isolate(p, m, b, out)


def _refine(p, a, b, width):
    if a == b:
        return a
    fa, fb = _peval(p, a), _peval(p, b)
    if fa == 0 and fb == 0:
        # neighbouring roots sit on both ends; split once by counting
        m = (a + b) / 2
        fm = _peval(p, m)
        if fm == 0:
            return m
        if _descartes_count(p, a, m) == 1:
            b, fb = m, fm
        else:
            a, fa = m, fm
    # sign just inside the root-free side of the interval
    right_sign = fb > 0 if fb != 0 else not (fa > 0)
    while b - a > width:
        m = (a + b) / 2
        fm = _peval(p, m)
        if fm == 0:
            return m
        if (fm > 0) == right_sign:
            b = m
        else:
            a = m
    return (a + b) / 2


def real_roots(coeffs: Sequence) -> list:
    """Distinct real roots of a polynomial (ascending coefficients).

    Roots that are rationals with modest denominators are returned as exact
    ``Fraction`` objects; the rest as Fractions within 2**-80 of the root.
    """
    p = _trim([Fraction(c) for c in coeffs])
    if len(p) <= 1:
        return []
    sqf = _pdivmod(p, _pgcd(p, _pderiv(p)))[0]
    sqf = [c / sqf[-1] for c in sqf]
    bound = 1 + max(abs(c) for c in sqf[:-1]) if len(sqf) > 1 else Fraction(1)
    bound = Fraction(math.ceil(bound))
    intervals: list = []
    if _peval(sqf, -bound) == 0:
        intervals.append((-bound, -bound))
    _isolate(sqf, -bound, bound, intervals)
    roots = []
    for a, b in intervals:
        r = _refine(sqf, a, b, Fraction(1, 2**80))
        snap = r.limit_denominator(10**6)
        if _peval(sqf, snap) == 0:
            r = snap
        roots.append(r)
    return sorted(set(roots))


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DoubleWell:
    """Polynomial potential with minima v_minus < v_plus and a maximum v_star
    between them.  ``m1`` and ``m2`` are the flatness orders at ``v_plus``
    and ``v_minus``: the first non-vanishing derivative there is of order
    2*m."""

    coeffs: tuple
    v_minus: float
    v_star: float
    v_plus: float
    m1: int
    m2: int
    _exact: tuple = field(default=(), repr=False, compare=False)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def deriv_coeffs(self, k: int = 1) -> np.ndarray:
        c = np.asarray(self.coeffs, dtype=float)
        if k > self.degree:
            return np.zeros(1)
        return np.polynomial.polynomial.polyder(c, k) if k else c

    def f(self, v):
        return eval_f(self, v)

    def fprime(self, v):
        return eval_f1(self, v)

    @property
    def gap(self) -> float:
        return float(self.f(self.v_plus) - self.f(self.v_minus))


def _horner(c, v):
    v = np.asarray(v)
    acc = np.zeros_like(v, dtype=np.result_type(v, c.dtype)) + c[-1]
    for a in c[-2::-1]:
        acc = acc * v + a
    return acc if acc.ndim else acc[()]


def eval_f(well: DoubleWell, v):
    return _horner(np.asarray(well.coeffs, dtype=float), v)


def eval_f1(well: DoubleWell, v):
    return eval_fk(well, v, 1)


def eval_fk(well: DoubleWell, v, k: int):
    if k > well.degree:
        return np.zeros_like(np.asarray(v, dtype=float))[()]
    return _horner(well.deriv_coeffs(k), v)


def _flatness(p_exact, root, lead_scale):
    """Order of the first non-vanishing derivative of f at ``root`` and its
    value."""
    q = p_exact
    k = 0
    while True:
        q = _pderiv(q)
        k += 1
        if not q:
            raise OrderDetectionFailure(f"all derivatives vanish at v={float(root)}")
        if k == 1:
            continue
        val = _peval(q, root)
        if abs(float(val)) > ORDER_TOL * lead_scale:
            return k, float(val)


def make_polynomial_well(coeffs: Sequence[float]) -> DoubleWell:
    p = _trim([Fraction(float(c)) for c in coeffs])
    if len(p) < 5:
        if not _pderiv(p):
            raise OrderDetectionFailure("f is constant; every point is critical")
        raise NotDoubleWell(f"degree {len(p) - 1} < 4 cannot host two wells")
    lead = max(1.0, abs(float(p[-1])))
    crit = real_roots(_pderiv(p))
    if len(crit) != 3:
        raise NotDoubleWell(f"f' has {len(crit)} distinct real roots, need 3")
    kinds = []
    orders = []
    for r in crit:
        k, val = _flatness(p, r, lead)
        if k % 2:
            kinds.append("flat")
        else:
            kinds.append("min" if val > 0 else "max")
        orders.append(k // 2)
    if kinds != ["min", "max", "min"]:
        raise NotDoubleWell(f"critical point pattern {kinds}, need min/max/min")
    vm, vs, vp = (float(r) for r in crit)
    well = DoubleWell(
        coeffs=tuple(float(c) for c in p),
        v_minus=vm,
        v_star=vs,
        v_plus=vp,
        m1=orders[2],
        m2=orders[0],
        _exact=tuple(crit),
    )
    _check_sign_pattern(well)
    return well


def _check_sign_pattern(well: DoubleWell, n: int = 10_000) -> None:
    """Sample f' on both sides of v*; samples whose value is below the Horner
    rounding bound (very flat wells) carry no sign information and are skipped."""
    c = well.deriv_coeffs(1)
    scale = (c.size + 1) * 4 * np.finfo(float).eps
    for lo, hi, sign in ((well.v_minus, well.v_star, 1.0), (well.v_star, well.v_plus, -1.0)):
        v = np.linspace(lo, hi, n + 2)[1:-1]
        val = _horner(c, v)
        bound = scale * _horner(np.abs(c), np.abs(v))
        if np.any(sign * val[np.abs(val) > bound] <= 0):
            raise NotDoubleWell("f' does not have the sign pattern + on (v-, v*), - on (v*, v+)")


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WellDiagnostics:
    equal_wells: bool
    gap: float
    m1: int
    m2: int
    g_min: float
    g_argmin: float
    mu: float
    overshoot: float = 0.0


def chord_excess(well: DoubleWell, v):
    """f(v) - f(v-) minus the chord through both minima, evaluated at v."""
    slope = well.gap / (well.v_plus - well.v_minus)
    return eval_f(well, v) - eval_f(well, well.v_minus) - slope * (np.asarray(v) - well.v_minus)


def diagnostics(well: DoubleWell, mu: float = 0.0, values=None) -> WellDiagnostics:
    from scipy.optimize import minimize_scalar

    grid = np.linspace(well.v_minus, well.v_plus, 10_000)
    g = chord_excess(well, grid)
    i = int(np.argmin(g))
    g_min, g_arg = float(g[i]), float(grid[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if hi > lo:
        res = minimize_scalar(lambda v: float(chord_excess(well, v)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        if res.fun < g_min:
            g_min, g_arg = float(res.fun), float(res.x)
    overshoot = 0.0
    if values is not None:
        values = np.asarray(values, dtype=float)
        overshoot = float(max(0.0, np.max(values) - well.v_plus, well.v_minus - np.min(values)))
    gap = well.gap
    return WellDiagnostics(
        equal_wells=abs(gap) <= EQUAL_WELL_TOL,
        gap=gap,
        m1=well.m1,
        m2=well.m2,
        g_min=g_min,
        g_argmin=g_arg,
        mu=mu,
        overshoot=overshoot,
    )


# ---------------------------------------------------------------------------

def cofactor_coeffs(well: DoubleWell) -> list:
    """Exact quotient of f - f(v+) by (v+ - v)^(2 m1) (v - v-)^(2 m2).

    Returned as ascending Fractions; a(v) is twice this polynomial.
    """
    if abs(well.gap) > EQUAL_WELL_TOL:
        raise UnequalWells(well.gap)
    p = [Fraction(c) for c in well.coeffs]
    vm, vp = Fraction(well.v_minus), Fraction(well.v_plus)
    shifted = list(p)
    shifted[0] -= _peval(p, vp)
    denom = _pmul(_ppow([vp, Fraction(-1)], 2 * well.m1), _ppow([-vm, Fraction(1)], 2 * well.m2))
    quo, _ = _pdivmod(shifted, denom)
    return quo or [Fraction(0)]


def a_factor(well: DoubleWell, v):
    """Smooth positive factor a(v) with f(v) - f(v+) = a/2 (v+ - v)^(2 m1) (v - v-)^(2 m2)."""
    c = np.array([float(q) for q in cofactor_coeffs(well)])
    return 2.0 * _horner(c, v)


def a_endpoint_limit(well: DoubleWell, side: str) -> float:
    """Value of a at v+ (side='plus') or v- from the first non-vanishing derivative."""
    if abs(well.gap) > EQUAL_WELL_TOL:
        raise UnequalWells(well.gap)
    width = well.v_plus - well.v_minus
    if side == "plus":
        m, other, at = well.m1, well.m2, well.v_plus
    else:
        m, other, at = well.m2, well.m1, well.v_minus
    d = float(eval_fk(well, at, 2 * m))
    return 2.0 * d / (math.factorial(2 * m) * width ** (2 * other))


# ---------------------------------------------------------------------------

QUARTIC = (0.25, 0.0, -0.5, 0.0, 0.25)


def _expand(*factors):
    out = [Fraction(1)]
    for root, power in factors:
        out = _pmul(out, _ppow([Fraction(-root), Fraction(1)], power))
    return [float(c) for c in out]


def preset(name: str, *args: float) -> DoubleWell:
    if name == "quartic":
        return make_polynomial_well(QUARTIC)
    if name == "sextic_m1_2":
        return make_polynomial_well(_expand((-1, 2), (1, 4)))
    if name == "tilted_quartic":
        (t,) = args
        c = list(QUARTIC)
        c[1] += t
        return make_polynomial_well(c)
    raise PotentialError(f"unknown potential preset {name!r}")


def parse_potential(spec: str) -> DoubleWell:
    """``quartic``, ``sextic_m1_2``, ``tilted_quartic 0.1`` or ``poly = c0,c1,...``
    (the ``poly`` prefix is optional when a comma list is given)."""
    s = spec.strip()
    if s.startswith("poly"):
        s = s[4:].lstrip(" =:")
    if "," in s:
        return make_polynomial_well([float(c) for c in s.split(",")])
    parts = s.split()
    if not parts:
        raise PotentialError("empty potential spec")
    return preset(parts[0], *(float(a) for a in parts[1:]))
