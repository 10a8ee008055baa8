# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled time-stepping and profile kernels.

Same arithmetic, in the same order, as ``_pykernels``; build with
``-ffp-contract=off`` so the two backends agree to the last bit on the
PDE kernels.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, isfinite
from libc.stdlib cimport malloc, free

cdef extern from "math.h":
    long double sqrtl(long double x) nogil

cdef enum:
    MODIFIED_AC = 0
    MODIFIED_CH = 1
    CLASSIC_AC = 2
    CLASSIC_CH = 3


cdef inline double _horner(const double[::1] c, double x) noexcept nogil:
    cdef Py_ssize_t k = c.shape[0] - 1
    cdef double acc = c[k]
    k -= 1
    while k >= 0:
        acc = acc * x + c[k]
        k -= 1
    return acc


cdef long _advance_ac(double[::1] v, int model, double mu, double dx, double dt,
                      long nsteps, const double[::1] fp, double delta, double* rate) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef long step
    cdef double idx = 1.0 / dx
    cdef double idx2 = idx * idx
    cdef double lap, g, r, s
    for step in range(nsteps):
        for i in range(1, n - 1):
            lap = (v[i - 1] - 2.0 * v[i] + v[i + 1]) * idx2
            r = mu - _horner(fp, v[i]) + lap
            if model == MODIFIED_AC:
                g = fabs(v[i + 1] - v[i - 1]) * (0.5 * idx)
                if delta > 0.0:
                    g = sqrt(g * g + delta * delta)
                r = r * g
            rate[i] = r
        s = 0.0
        for i in range(1, n - 1):
            v[i] = v[i] + dt * rate[i]
            s += v[i]
        if not isfinite(s):
            return step
    return nsteps


cdef long _advance_ch(double[::1] v, int model, double dx, double dt,
                      long nsteps, const double[::1] fp, double delta,
                      double* w, double* flux, double* rate) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef long step
    cdef double idx = 1.0 / dx
    cdef double idx2 = idx * idx
    cdef double vl, vr, m, s
    for step in range(nsteps):
        for i in range(n):
            vl = v[i - 1] if i > 0 else v[1]
            vr = v[i + 1] if i < n - 1 else v[n - 2]
            w[i] = _horner(fp, v[i]) - (vl - 2.0 * v[i] + vr) * idx2
        for i in range(n - 1):
            flux[i] = (w[i + 1] - w[i]) * idx
            if model == MODIFIED_CH:
                m = fabs(v[i + 1] - v[i]) * idx
                if delta > 0.0:
                    m = sqrt(m * m + delta * delta)
                flux[i] = flux[i] * m
        rate[0] = 2.0 * flux[0] * idx
        for i in range(1, n - 1):
            rate[i] = (flux[i] - flux[i - 1]) * idx
        rate[n - 1] = -2.0 * flux[n - 2] * idx
        s = 0.0
        for i in range(n):
            v[i] = v[i] + dt * rate[i]
            s += v[i]
        if not isfinite(s):
            return step
    return nsteps


def advance(double[::1] v, int model, double mu, double dx, double dt, long nsteps,
            fp, double delta):
    cdef const double[::1] c = np.ascontiguousarray(fp, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    cdef double* buf = <double*> malloc(3 * n * sizeof(double))
    cdef long done
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            if model == MODIFIED_AC or model == CLASSIC_AC:
                done = _advance_ac(v, model, mu, dx, dt, nsteps, c, delta, buf)
            else:
                done = _advance_ch(v, model, dx, dt, nsteps, c, delta, buf, buf + n, buf + 2 * n)
    finally:
        free(buf)
    return done


cdef inline long double _lhorner(long double* c, Py_ssize_t nc, long double x) noexcept nogil:
    cdef Py_ssize_t k = nc - 1
    cdef long double acc = c[k]
    k -= 1
    while k >= 0:
        acc = acc * x + c[k]
        k -= 1
    return acc


cdef inline long double _ipow(long double x, int m) noexcept nogil:
    cdef long double out = 1.0
    cdef int k
    for k in range(m):
        out = out * x
    return out


cdef inline long double _rhs(long double* cof, Py_ssize_t ncof, long double x,
                             long double vp, long double vm, int m1, int m2) noexcept nogil:
    return sqrtl(2.0 * _lhorner(cof, ncof, x)) * _ipow(vp - x, m1) * _ipow(x - vm, m2)


def rk4_profile(v0, h, long n, cof, fp, vp, vm, int m1, int m2):
    cdef cnp.ndarray vs_arr = np.empty(n + 1, dtype=np.longdouble)
    cdef cnp.ndarray ps_arr = np.empty(n + 1, dtype=np.longdouble)
    cdef cnp.ndarray cof_arr = np.ascontiguousarray(cof, dtype=np.longdouble)
    cdef cnp.ndarray fp_arr = np.ascontiguousarray(fp, dtype=np.longdouble)
    cdef long double* vs = <long double*> cnp.PyArray_DATA(vs_arr)
    cdef long double* ps = <long double*> cnp.PyArray_DATA(ps_arr)
    cdef long double* c = <long double*> cnp.PyArray_DATA(cof_arr)
    cdef long double* q = <long double*> cnp.PyArray_DATA(fp_arr)
    cdef Py_ssize_t nc = cof_arr.shape[0], nq = fp_arr.shape[0]
    cdef long double lvp = np.longdouble(vp), lvm = np.longdouble(vm)
    cdef long double lh = np.longdouble(h)
    cdef long double v = np.longdouble(v0)
    cdef long double hh = lh * 0.5
    cdef long double p, x, k1, k2, k3, k4, q1, q2, q3, q4
    cdef long i
    with nogil:
        p = _rhs(c, nc, v, lvp, lvm, m1, m2)
        vs[0] = v
        ps[0] = p
        for i in range(1, n + 1):
            k1 = _rhs(c, nc, v, lvp, lvm, m1, m2)
            q1 = _lhorner(q, nq, v)
            x = v + hh * k1
            k2 = _rhs(c, nc, x, lvp, lvm, m1, m2)
            q2 = _lhorner(q, nq, x)
            x = v + hh * k2
            k3 = _rhs(c, nc, x, lvp, lvm, m1, m2)
            q3 = _lhorner(q, nq, x)
            x = v + lh * k3
            k4 = _rhs(c, nc, x, lvp, lvm, m1, m2)
            q4 = _lhorner(q, nq, x)
            v = v + lh * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            p = p + lh * (q1 + 2.0 * q2 + 2.0 * q3 + q4) / 6.0
            vs[i] = v
            ps[i] = p
    return vs_arr, ps_arr
