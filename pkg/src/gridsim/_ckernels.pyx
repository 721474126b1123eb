# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_pykernels`` exactly (signatures, status codes)."""
from libc.math cimport cos, sin, exp, fabs, INFINITY, NAN

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double EXP_ARG_LIMIT = 500.0
cdef int MAX_HALVINGS = 60

OK = 0
NO_CONVERGENCE = 1
OVERFLOW = 2


cpdef double pv_residual(double i, double v, double iph, double i0, double vta,
                         double rs, double rp, double npar):
    cdef double arg = (v + rs * i) / vta
    return iph * npar - i0 * npar * (exp(arg) - 1.0) - (v + rs * i) / rp - i


cpdef double pv_residual_prime(double i, double v, double iph, double i0, double vta,
                               double rs, double rp, double npar):
    cdef double arg = (v + rs * i) / vta
    return -i0 * npar * (rs / vta) * exp(arg) - rs / rp - 1.0


cdef int _solve(double v, double iph, double i0, double vta, double rs, double rp,
                double npar, double tol, int maxiter,
                double* i_out, double* f_out, int* it_out) noexcept nogil:
    cdef double i = iph * npar
    cdef double arg = (v + rs * i) / vta
    cdef double f, f_new, fp, step, i_new, e
    cdef int it, h
    cdef bint decreased
    if arg > EXP_ARG_LIMIT:
        i_out[0] = i
        f_out[0] = INFINITY
        it_out[0] = 0
        return 2
    f = iph * npar - i0 * npar * (exp(arg) - 1.0) - (v + rs * i) / rp - i
    for it in range(maxiter + 1):
        if fabs(f) < tol:
            i_out[0] = i
            f_out[0] = f
            it_out[0] = it
            return 0
        if it == maxiter:
            break
        e = exp((v + rs * i) / vta)
        fp = -i0 * npar * (rs / vta) * e - rs / rp - 1.0
        step = -f / fp
        decreased = False
        for h in range(MAX_HALVINGS):
            i_new = i + step
            arg = (v + rs * i_new) / vta
            if arg <= EXP_ARG_LIMIT:
                f_new = (iph * npar - i0 * npar * (exp(arg) - 1.0)
                         - (v + rs * i_new) / rp - i_new)
                if fabs(f_new) < fabs(f):
                    decreased = True
                    break
            step *= 0.5
        if not decreased:
            i_out[0] = i
            f_out[0] = f
            it_out[0] = it
            return 1
        i = i_new
        f = f_new
    i_out[0] = i
    f_out[0] = f
    it_out[0] = maxiter
    return 1


def pv_solve_current(double v, double iph, double i0, double vta, double rs,
                     double rp, double npar, double tol, int maxiter):
    cdef double i, f
    cdef int it, status
    status = _solve(v, iph, i0, vta, rs, rp, npar, tol, maxiter, &i, &f, &it)
    return i, f, it, status


def pv_solve_many(v, double iph, double i0, double vta, double rs, double rp,
                  double npar, double tol, int maxiter):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double i, f, worst = 0.0
    cdef int it, status
    cdef Py_ssize_t k, m
    for k in range(n):
        status = _solve(vv[k], iph, i0, vta, rs, rp, npar, tol, maxiter, &i, &f, &it)
        if status != 0:
            for m in range(k, n):
                out[m] = NAN
            return out, fabs(f), status
        out[k] = i
        if fabs(f) > worst:
            worst = fabs(f)
    return out, worst, 0


def rl_period(double i_start, double dt, int nsteps, double r, double l, double omega,
              double amp_pv, double phi, double amp_g, double phase_g):
    cdef double i = i_start
    cdef double sc = 0.0, ss = 0.0, sq = 0.0
    cdef double rl = r / l
    cdef double il = 1.0 / l
    cdef double t, wt, c, s, k1, k2, k3, k4, wm, we, drive_m
    cdef int k
    with nogil:
        for k in range(nsteps):
            t = k * dt
            wt = omega * t
            c = cos(wt)
            s = sin(wt)
            sc += i * c
            ss += i * s
            sq += i * i
            k1 = rl * (amp_pv * cos(wt + phi) - i) - il * amp_g * cos(wt + phase_g)
            wm = omega * (t + 0.5 * dt)
            drive_m = rl * amp_pv * cos(wm + phi) - il * amp_g * cos(wm + phase_g)
            k2 = drive_m - rl * (i + 0.5 * dt * k1)
            k3 = drive_m - rl * (i + 0.5 * dt * k2)
            we = omega * (t + dt)
            k4 = (rl * (amp_pv * cos(we + phi) - (i + dt * k3))
                  - il * amp_g * cos(we + phase_g))
            i += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return i, sc, ss, sq
