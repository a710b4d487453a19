"""Pure-numpy fallback for the Langevin kernels.

Vectorized across trajectories; the per-step arithmetic matches the
compiled kernels operation for operation.
"""

import numpy as np


def heun_isochore(x, p, omega, m, kx, kp, sx, sp, dt, xi_x, xi_p):
    n = x.shape[0]
    n_steps = xi_p.shape[1]
    pos_noise = xi_x.shape[1] > 0
    if xi_p.shape[0] != n or (pos_noise and xi_x.shape != xi_p.shape):
        raise ValueError("noise arrays do not match the state")
    ax = sx * np.sqrt(2.0 * dt)
    ap = sp * np.sqrt(2.0 * dt)
    w2m = m * omega * omega
    inv_m = 1.0 / m
    half_dt = 0.5 * dt
    xi = x.copy()
    pi = p.copy()
    dwx = np.zeros(n)
    for s in range(n_steps):
        if pos_noise:
            dwx = ax * xi_x[:, s]
        dwp = ap * xi_p[:, s]
        fx = pi * inv_m - kx * xi
        fp = -w2m * xi - kp * pi
        xt = xi + fx * dt + dwx
        pt = pi + fp * dt + dwp
        fxt = pt * inv_m - kx * xt
        fpt = -w2m * xt - kp * pt
        xi = xi + (fx + fxt) * half_dt + dwx
        pi = pi + (fp + fpt) * half_dt + dwp
    x[:] = xi
    p[:] = pi


def verlet_adiabat(x, p, m, inv_omega0, slope, t0, dt, n_steps):
    inv_m = 1.0 / m
    half_dt = 0.5 * dt
    xi = x.copy()
    pi = p.copy()
    for k in range(n_steps):
        ta = t0 + k * dt
        tb = t0 + (k + 1) * dt
        wa = 1.0 / (inv_omega0 + slope * ta)
        wb = 1.0 / (inv_omega0 + slope * tb)
        pi = pi - half_dt * (m * wa * wa) * xi
        xi = xi + dt * (pi * inv_m)
        pi = pi - half_dt * (m * wb * wb) * xi
    x[:] = xi
    p[:] = pi
