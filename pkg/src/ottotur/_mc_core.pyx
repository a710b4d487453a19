# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Langevin kernels. Arithmetic mirrors ``_mc_core_py`` step by step."""

cimport cython
import cython.view
from libc.math cimport sqrt


def heun_isochore(double[::1] x, double[::1] p, double omega, double m,
                  double kx, double kp, double sx, double sp, double dt,
                  const double[:, ::1] xi_x, const double[:, ::1] xi_p):
    """Stochastic Heun steps at fixed frequency, in place.

    ``xi_p`` has shape (n_traj, n_steps) of unit normals; ``xi_x`` likewise,
    or zero columns when there is no positional thermostat.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t n_steps = xi_p.shape[1]
    cdef bint pos_noise = xi_x.shape[1] > 0
    cdef double ax = sx * sqrt(2.0 * dt)
    cdef double ap = sp * sqrt(2.0 * dt)
    cdef double w2m = m * omega * omega
    cdef double inv_m = 1.0 / m
    cdef double half_dt = 0.5 * dt
    cdef double xi, pi, dwx, dwp, fx, fp, xt, pt, fxt, fpt
    cdef Py_ssize_t i, s
    if xi_p.shape[0] != n or (pos_noise and (xi_x.shape[0] != n or xi_x.shape[1] != n_steps)):
        raise ValueError("noise arrays do not match the state")
    # trajectories in the inner loop so the compiler can vectorize across them
    with nogil:
        for s in range(n_steps):
            for i in range(n):
                xi = x[i]
                pi = p[i]
                if pos_noise:
                    dwx = ax * xi_x[i, s]
                else:
                    dwx = 0.0
                dwp = ap * xi_p[i, s]
                fx = pi * inv_m - kx * xi
                fp = -w2m * xi - kp * pi
                xt = xi + fx * dt + dwx
                pt = pi + fp * dt + dwp
                fxt = pt * inv_m - kx * xt
                fpt = -w2m * xt - kp * pt
                x[i] = xi + (fx + fxt) * half_dt + dwx
                p[i] = pi + (fp + fpt) * half_dt + dwp


def verlet_adiabat(double[::1] x, double[::1] p, double m, double inv_omega0,
                   double slope, double t0, double dt, Py_ssize_t n_steps):
    """Velocity-Verlet steps under ω(t) = 1/(inv_omega0 + slope·t), in place."""
    cdef Py_ssize_t n = x.shape[0]
    cdef double inv_m = 1.0 / m
    cdef double half_dt = 0.5 * dt
    cdef double w, ka, kb
    cdef Py_ssize_t i, k
    # spring constants at the step boundaries are shared by all trajectories
    cdef double[::1] kick = cython.view.array(shape=(n_steps + 1,), itemsize=sizeof(double), format="d")
    for k in range(n_steps + 1):
        w = 1.0 / (inv_omega0 + slope * (t0 + k * dt))
        kick[k] = half_dt * (m * w * w)
    # step-outer loop: the trajectory loop has no carried dependency and vectorizes
    with nogil:
        for k in range(n_steps):
            ka = kick[k]
            kb = kick[k + 1]
            for i in range(n):
                p[i] = p[i] - ka * x[i]
                x[i] = x[i] + dt * (p[i] * inv_m)
                p[i] = p[i] - kb * x[i]
