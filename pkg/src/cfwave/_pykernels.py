"""Pure numpy kernels; arithmetic order mirrors ``_kernels.pyx`` line by line."""
from __future__ import annotations

import numpy as np

MODIFIED_AC, MODIFIED_CH, CLASSIC_AC, CLASSIC_CH = 0, 1, 2, 3


def _horner(c, x):
    acc = np.full_like(x, c[-1])
    for k in range(c.shape[0] - 2, -1, -1):
        acc = acc * x + c[k]
    return acc


def ac_rate(v, model, mu, dx, fp, delta):
    """Interior time derivative for the Allen-Cahn variants (nodes 1..N-1)."""
    idx = 1.0 / dx
    idx2 = idx * idx
    vl, vc, vr = v[:-2], v[1:-1], v[2:]
    lap = (vl - 2.0 * vc + vr) * idx2
    rate = mu - _horner(fp, vc) + lap
    if model == MODIFIED_AC:
        grad = np.abs(vr - vl) * (0.5 * idx)
        if delta > 0.0:
            grad = np.sqrt(grad * grad + delta * delta)
        rate = rate * grad
    return rate


def ch_rate(v, model, dx, fp, delta):
    """Time derivative at every node for the Cahn-Hilliard variants with
    mirror (no-flux) ends."""
    idx = 1.0 / dx
    idx2 = idx * idx
    n = v.shape[0]
    vl = np.empty(n)
    vr = np.empty(n)
    vl[1:] = v[:-1]
    vl[0] = v[1]
    vr[:-1] = v[1:]
    vr[-1] = v[-2]
    lap = (vl - 2.0 * v + vr) * idx2
    w = _horner(fp, v) - lap
    flux = (w[1:] - w[:-1]) * idx
    if model == MODIFIED_CH:
        mob = np.abs(v[1:] - v[:-1]) * idx
        if delta > 0.0:
            mob = np.sqrt(mob * mob + delta * delta)
        flux = flux * mob
    rate = np.empty(n)
    rate[0] = 2.0 * flux[0] * idx
    rate[1:-1] = (flux[1:] - flux[:-1]) * idx
    rate[-1] = -2.0 * flux[-1] * idx
    return rate


def advance(v, model, mu, dx, dt, nsteps, fp, delta):
    """Forward-Euler steps in place.  Returns the number of completed steps;
    fewer than ``nsteps`` means a non-finite value appeared (``v`` then holds
    the offending state)."""
    fp = np.asarray(fp, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(nsteps):
            if model == MODIFIED_AC or model == CLASSIC_AC:
                v[1:-1] = v[1:-1] + dt * ac_rate(v, model, mu, dx, fp, delta)
            else:
                v[:] = v + dt * ch_rate(v, model, dx, fp, delta)
            if not np.isfinite(np.sum(v)):
                return step
    return nsteps


def rk4_profile(v0, h, n, cof, fp, vp, vm, m1, m2):
    """Classical RK4 for v' = sqrt(2 q(v)) (vp - v)^m1 (v - vm)^m2 together
    with p' = f'(v), in extended precision.  ``cof`` holds q, ``fp`` f'."""
    L = np.longdouble
    cof = np.asarray(cof, dtype=L)
    fp = np.asarray(fp, dtype=L)
    vp, vm, h = L(vp), L(vm), L(h)
    two, half, six = L(2), L(0.5), L(6)

    def horner(c, x):
        acc = c[-1]
        for k in range(c.shape[0] - 2, -1, -1):
            acc = acc * x + c[k]
        return acc

    def rhs(x):
        return np.sqrt(two * horner(cof, x)) * (vp - x) ** m1 * (x - vm) ** m2

    vs = np.empty(n + 1, dtype=L)
    ps = np.empty(n + 1, dtype=L)
    v = L(v0)
    p = rhs(v)
    vs[0], ps[0] = v, p
    hh = h * half
    for i in range(1, n + 1):
        k1 = rhs(v)
        q1 = horner(fp, v)
        x = v + hh * k1
        k2 = rhs(x)
        q2 = horner(fp, x)
        x = v + hh * k2
        k3 = rhs(x)
        q3 = horner(fp, x)
        x = v + h * k3
        k4 = rhs(x)
        q4 = horner(fp, x)
        v = v + h * (k1 + two * k2 + two * k3 + k4) / six
        p = p + h * (q1 + two * q2 + two * q3 + q4) / six
        vs[i], ps[i] = v, p
    return vs, ps
