"""Compiled Dormand-Prince 5(4) integrator for batches of single-mode Lindblad ODEs.

State layout per mode: (rho11, rho22, rho33, rho44, Re rho23, Im rho23).
Each mode is integrated independently with its own adaptive step, so the
result for one momentum never depends on which other momenta share the batch.
"""

import math

import numba as nb
import numpy as np

# Butcher tableau (Dormand & Prince 1980); E* = b5 - b4 error weights.
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

STATUS_OK = 0
STATUS_UNDERFLOW = 1


@nb.njit(cache=True)
def _rhs(t, y, dx, dy, dzoff, u_i, tau, ga, gb, jump, out):
    g = ga + gb
    dz = dzoff + u_i - t / tau
    r22 = y[1]
    r33 = y[2]
    r44 = y[3]
    xr = y[4]
    xi = y[5]
    # i Delta rho23 - i conj(Delta) rho32 = -2 Im(Delta rho23)
    flow = -2.0 * (dx * xi + dy * xr)
    big_r = r33 - r22
    out[0] = jump * (ga * r22 + gb * r33)
    out[1] = -ga * r22 + jump * gb * r44 + flow
    out[2] = -gb * r33 + jump * ga * r44 - flow
    out[3] = -g * r44
    # -(g/2) rho23 - 2i dz rho23 - i conj(Delta) R
    out[4] = -0.5 * g * xr + 2.0 * dz * xi - dy * big_r
    out[5] = -0.5 * g * xi - 2.0 * dz * xr - dx * big_r


@nb.njit(cache=True)
def mode_rhs(t, y, dx, dy, dzoff, u_i, tau, ga, gb, jump):
    """Right-hand side for one mode; ``jump`` is 1.0 (full) or 0.0 (no-jump)."""
    out = np.empty(6)
    _rhs(t, y, dx, dy, dzoff, u_i, tau, ga, gb, jump, out)
    return out


@nb.njit(cache=True)
def integrate_batch(dx, dy, dzoff, u_i, tau, ga, gb, y0, ts, rtol, atol, max_step, phase_step, jump):
    n = dx.shape[0]
    n_samples = ts.shape[0]
    out = np.empty((n, n_samples, 6))
    status = np.zeros(n, np.int64)
    fail_t = np.full(n, np.nan)
    nsteps = np.zeros(n, np.int64)
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    k5 = np.empty(6)
    k6 = np.empty(6)
    k7 = np.empty(6)
    y = np.empty(6)
    yt = np.empty(6)
    yn = np.empty(6)
    g = ga + gb
    for m in range(n):
        a = dx[m]
        b = dy[m]
        c = dzoff[m]
        mod = math.hypot(a, b)
        for i in range(6):
            y[i] = y0[m, i]
            out[m, 0, i] = y[i]
        t = ts[0]
        _rhs(t, y, a, b, c, u_i, tau, ga, gb, jump, k1)
        h = phase_step / max(1.0, abs(c + u_i - t / tau), mod, g)
        failed = False
        for s in range(1, n_samples):
            t_end = ts[s]
            while t < t_end:
                cap = phase_step / max(1.0, abs(c + u_i - t / tau), mod, g)
                hh = min(h, cap, max_step)
                clipped = False
                # land exactly on the sample time; absorb rounding-sized remainders
                if t + hh >= t_end - 1e-12 * max(1.0, abs(t_end)):
                    hh = t_end - t
                    clipped = True
                if hh <= 1e-14 * max(1.0, abs(t)):
                    failed = True
                    break
                for i in range(6):
                    yt[i] = y[i] + hh * A21 * k1[i]
                _rhs(t + C2 * hh, yt, a, b, c, u_i, tau, ga, gb, jump, k2)
                for i in range(6):
                    yt[i] = y[i] + hh * (A31 * k1[i] + A32 * k2[i])
                _rhs(t + C3 * hh, yt, a, b, c, u_i, tau, ga, gb, jump, k3)
                for i in range(6):
                    yt[i] = y[i] + hh * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
                _rhs(t + C4 * hh, yt, a, b, c, u_i, tau, ga, gb, jump, k4)
                for i in range(6):
                    yt[i] = y[i] + hh * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
                _rhs(t + C5 * hh, yt, a, b, c, u_i, tau, ga, gb, jump, k5)
                for i in range(6):
                    yt[i] = y[i] + hh * (
                        A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
                    )
                _rhs(t + hh, yt, a, b, c, u_i, tau, ga, gb, jump, k6)
                for i in range(6):
                    yn[i] = y[i] + hh * (
                        B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]
                    )
                _rhs(t + hh, yn, a, b, c, u_i, tau, ga, gb, jump, k7)
                err = 0.0
                for i in range(6):
                    e = hh * (
                        E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]
                    )
                    sc = atol + rtol * max(abs(y[i]), abs(yn[i]))
                    err += (e / sc) ** 2
                err = math.sqrt(err / 6.0)
                if err <= 1.0:
                    t = t_end if clipped else t + hh
                    for i in range(6):
                        y[i] = yn[i]
                        k1[i] = k7[i]
                    nsteps[m] += 1
                    fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
                    h_new = hh * fac
                    h = max(h, h_new) if clipped else h_new
                else:
                    h = hh * max(0.2, 0.9 * err ** -0.2)
            if failed:
                break
            for i in range(6):
                out[m, s, i] = y[i]
        if failed:
            status[m] = STATUS_UNDERFLOW
            fail_t[m] = t
            for s in range(n_samples):
                for i in range(6):
                    out[m, s, i] = np.nan
    return out, status, fail_t, nsteps
