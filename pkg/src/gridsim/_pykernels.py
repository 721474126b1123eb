"""Pure-Python kernels. Same signatures and status codes as ``_ckernels.pyx``."""
import math

import numpy as np

OK = 0
NO_CONVERGENCE = 1
OVERFLOW = 2

EXP_ARG_LIMIT = 500.0
MAX_HALVINGS = 60


def pv_residual(i, v, iph, i0, vta, rs, rp, npar):
    arg = (v + rs * i) / vta
    return iph * npar - i0 * npar * (math.exp(arg) - 1.0) - (v + rs * i) / rp - i


def pv_residual_prime(i, v, iph, i0, vta, rs, rp, npar):
    arg = (v + rs * i) / vta
    return -i0 * npar * (rs / vta) * math.exp(arg) - rs / rp - 1.0


def pv_solve_current(v, iph, i0, vta, rs, rp, npar, tol, maxiter):
    """Damped Newton on the single-diode residual.

    Returns ``(current, residual, iterations, status)``.
    """
    i = iph * npar
    arg = (v + rs * i) / vta
    if arg > EXP_ARG_LIMIT:
        return i, math.inf, 0, OVERFLOW
    f = iph * npar - i0 * npar * (math.exp(arg) - 1.0) - (v + rs * i) / rp - i
    for it in range(maxiter + 1):
        if abs(f) < tol:
            return i, f, it, OK
        if it == maxiter:
            break
        e = math.exp((v + rs * i) / vta)
        fp = -i0 * npar * (rs / vta) * e - rs / rp - 1.0
        step = -f / fp
        for _ in range(MAX_HALVINGS):
            i_new = i + step
            arg = (v + rs * i_new) / vta
            if arg <= EXP_ARG_LIMIT:
                f_new = (iph * npar - i0 * npar * (math.exp(arg) - 1.0)
                         - (v + rs * i_new) / rp - i_new)
                if abs(f_new) < abs(f):
                    break
            step *= 0.5
        else:
            # residual cannot be reduced further at floating-point resolution
            return i, f, it, NO_CONVERGENCE
        i, f = i_new, f_new
    return i, f, maxiter, NO_CONVERGENCE


def pv_solve_many(v, iph, i0, vta, rs, rp, npar, tol, maxiter):
    """Solve at every voltage in ``v``.

    Returns ``(currents, max_abs_residual, status)``; stops at the first failure.
    """
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    worst = 0.0
    for k in range(v.shape[0]):
        i, f, _, status = pv_solve_current(v[k], iph, i0, vta, rs, rp, npar, tol, maxiter)
        if status != OK:
            out[k:] = np.nan
            return out, abs(f), status
        out[k] = i
        worst = max(worst, abs(f))
    return out, worst, OK


def rl_period(i_start, dt, nsteps, r, l, omega, amp_pv, phi, amp_g, phase_g):
    """Integrate ``L di/dt = R (i_pv(t) - i) - v_g(t)`` over ``nsteps`` RK4 steps.

    Time is measured from the start of the window, which must sit on a grid
    period boundary. Returns ``(i_end, sum_i_cos, sum_i_sin, sum_i_sq)`` with
    sums taken over the left sample of every step.
    """
    i = i_start
    sc = 0.0
    ss = 0.0
    sq = 0.0
    rl = r / l
    il = 1.0 / l
    for k in range(nsteps):
        t = k * dt
        wt = omega * t
        c = math.cos(wt)
        s = math.sin(wt)
        sc += i * c
        ss += i * s
        sq += i * i
        k1 = rl * (amp_pv * math.cos(wt + phi) - i) - il * amp_g * math.cos(wt + phase_g)
        wm = omega * (t + 0.5 * dt)
        drive_m = rl * amp_pv * math.cos(wm + phi) - il * amp_g * math.cos(wm + phase_g)
        k2 = drive_m - rl * (i + 0.5 * dt * k1)
        k3 = drive_m - rl * (i + 0.5 * dt * k2)
        we = omega * (t + dt)
        k4 = (rl * (amp_pv * math.cos(we + phi) - (i + dt * k3))
              - il * amp_g * math.cos(we + phase_g))
        i += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return i, sc, ss, sq
