"""Independent reference computations for the test suite.

Nothing here uses the package's generator matrices or propagators. The
moment dynamics are rebuilt from the Langevin equations for (x, p): the
phase-space covariance obeys a Lyapunov ODE, integrated with an adaptive
high-order solver. Energy statistics of Gaussian states come from Isserlis'
theorem, and quasistatic statistics from explicit Bose/exponential sums.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp

RTOL = 1e-13
ATOL = 1e-15


def t_eff(omega, temp, hbar=1.0):
    x = hbar * omega / (2 * temp)
    return 0.5 * hbar * omega / math.tanh(x)


def omega_ramp(omega_i, omega_f, tau, t):
    if tau == 0:
        return omega_i
    return 1.0 / (1.0 / omega_i + (1.0 / omega_f - 1.0 / omega_i) * t / tau)


def stroke_data(params, which):
    """(omega_i, omega_f, tau, temp or None) for a stroke name."""
    p = params
    return {
        "compression": (p.omega_c, p.omega_h, p.tau_ch, None),
        "hot": (p.omega_h, p.omega_h, p.tau_h, p.temp_h),
        "expansion": (p.omega_h, p.omega_c, p.tau_hc, None),
        "cold": (p.omega_c, p.omega_c, p.tau_c, p.temp_c),
    }[which]


STROKES = ("compression", "hot", "expansion", "cold")


def langevin_coeffs(params, quantum, omega, temp):
    """(kx, kp, Dx, Dp): dx = (p/m - kx x)dt + sqrt(2 Dx) dW, same for p."""
    if temp is None:
        return 0.0, 0.0, 0.0, 0.0
    g, m = params.gamma, params.m
    if quantum:
        te = t_eff(omega, temp, params.hbar)
        return g / 4, g / 4, g * te / (4 * m * omega**2), m * g * te / 4
    return 0.0, g / 4, 0.0, m * g * temp / 4


def _cov_rhs(params, quantum, which):
    omega_i, omega_f, tau, temp = stroke_data(params, which)
    m = params.m

    def rhs(t, y):
        w = omega_ramp(omega_i, omega_f, tau, t)
        kx, kp, dx, dp = langevin_coeffs(params, quantum, w, temp)
        sxx, sxp, spp = y
        return [
            2 * sxp / m - 2 * kx * sxx + 2 * dx,
            spp / m - m * w * w * sxx - (kx + kp) * sxp,
            -2 * m * w * w * sxp - 2 * kp * spp + 2 * dp,
        ]

    return rhs


def hld_to_cov(h, l, d, omega, m):
    return np.array([(h - l) / (m * omega**2), d / omega, m * (h + l)])


def cov_to_hld(cov, omega, m):
    sxx, sxp, spp = cov
    ke = spp / (2 * m)
    pe = 0.5 * m * omega**2 * sxx
    return np.array([ke + pe, ke - pe, omega * sxp])


def propagate_moments(params, quantum, which, hld, t=None):
    """Push (h, l, d) through the first ``t`` of a stroke via the covariance ODE."""
    omega_i, omega_f, tau, _ = stroke_data(params, which)
    t = tau if t is None else t
    if t == 0:
        return np.array(hld, dtype=float)
    y0 = hld_to_cov(*hld, omega_i, params.m)
    sol = solve_ivp(_cov_rhs(params, quantum, which), (0.0, t), y0, method="DOP853",
                    rtol=RTOL, atol=ATOL)
    return cov_to_hld(sol.y[:, -1], omega_ramp(omega_i, omega_f, tau, t), params.m)


def drift_propagator(params, quantum, which, t=None):
    """2x2 Φ with d(x, p)/dt = A(t)(x, p) along a stroke (noise-free part)."""
    omega_i, omega_f, tau, temp = stroke_data(params, which)
    t = tau if t is None else t
    m = params.m
    if t == 0:
        return np.eye(2)

    def rhs(s, y):
        w = omega_ramp(omega_i, omega_f, tau, s)
        kx, kp, _, _ = langevin_coeffs(params, quantum, w, temp)
        a = np.array([[-kx, 1 / m], [-m * w * w, -kp]])
        return (a @ y.reshape(2, 2)).ravel()

    sol = solve_ivp(rhs, (0.0, t), np.eye(2).ravel(), method="DOP853", rtol=RTOL, atol=ATOL)
    return sol.y[:, -1].reshape(2, 2)


def propagate_cov(params, quantum, which, cov):
    omega_i, omega_f, tau, _ = stroke_data(params, which)
    if tau == 0:
        return np.array(cov, dtype=float)
    sol = solve_ivp(_cov_rhs(params, quantum, which), (0.0, tau), cov, method="DOP853",
                    rtol=RTOL, atol=ATOL)
    return sol.y[:, -1]


def steady_covariance(params, quantum):
    """Fixed point of the affine one-cycle covariance map, found by solving
    the 3x3 system built from basis responses."""
    def cycle(c):
        for s in STROKES:
            c = propagate_cov(params, quantum, s, c)
        return c

    zero = cycle(np.zeros(3))
    cols = [cycle(e) - zero for e in np.eye(3)]
    a = np.array(cols).T
    return np.linalg.solve(np.eye(3) - a, zero)


def energy_form(omega, m):
    """Quadratic-form matrix M with H = z^T M z, z = (x, p)."""
    return np.diag([0.5 * m * omega**2, 0.5 / m])


def _sym(c):
    sxx, sxp, spp = c
    return np.array([[sxx, sxp], [sxp, spp]])


def cycle_statistics(params, quantum):
    """Boundary means and the 5x5 table <H_i H_j> for the quasiclassical
    Langevin steady state, from joint Gaussian covariances.

    For quantum baths this is the symmetrized-operator answer only after the
    zero-point correction applied in ``quantum_second_moments``.
    """
    m = params.m
    covs = [steady_covariance(params, quantum)]
    phis = []
    for s in STROKES:
        phis.append(drift_propagator(params, quantum, s))
        covs.append(propagate_cov(params, quantum, s, covs[-1]))
    omegas = [params.omega_c, params.omega_h, params.omega_h, params.omega_c, params.omega_c]
    forms = [energy_form(w, m) for w in omegas]
    sig = [_sym(c) for c in covs]
    means = np.array([np.trace(forms[i] @ sig[i]) for i in range(5)])
    second = np.empty((5, 5))
    for i in range(5):
        phi = np.eye(2)
        for j in range(i, 5):
            if j > i:
                phi = phis[j - 1] @ phi
            cross = phi @ sig[i]  # <z_j z_i^T>
            val = means[i] * means[j] + 2 * np.trace(forms[j] @ cross @ forms[i] @ cross.T)
            second[i, j] = second[j, i] = val
    return means, second, phis


def quantum_second_moments(params):
    """Symmetrized <H_i H_j>_s for the quantum bath.

    Gaussian (Wick) moments of the quasiclassical model overcount the
    symmetrized operator product by ħ²ω_i²/4 propagated from t_i, because
    ⟨H²⟩_s = 2h² + l² + d² − ħ²ω²/4 while classical Wick lacks the last term.
    A disturbance δ in ⟨H H_i⟩ at t_i travels with the (H, L, D) mean
    dynamics, which equals the energy response to an energy perturbation.
    """
    means, second, _ = cycle_statistics(params, True)
    omegas = [params.omega_c, params.omega_h, params.omega_h, params.omega_c, params.omega_c]
    out = second.copy()
    for i in range(5):
        zp = 0.25 * (params.hbar * omegas[i]) ** 2
        vec = np.array([1.0, 0.0, 0.0])  # unit perturbation along H at t_i
        resp = [1.0]
        for s in STROKES[i:]:
            vec = _hld_linear(params, True, s, vec)
            resp.append(vec[0])
        for j in range(i, 5):
            out[i, j] -= zp * resp[j - i]
            if j != i:
                out[j, i] = out[i, j]
    return means, out


def _hld_linear(params, quantum, which, hld):
    """Homogeneous part of the (h, l, d) map: response to a unit vector."""
    base = propagate_moments(params, quantum, which, np.zeros(3))
    return propagate_moments(params, quantum, which, hld) - base


# --- quasistatic reference via explicit distributions -----------------------

def bose_moments(omega, temp, hbar=1.0, n_max=None):
    """Mean and variance of a thermal occupation number by direct summation."""
    q = math.exp(-hbar * omega / temp)
    if n_max is None:
        n_max = int(60 / max(1e-12, -math.log(q))) + 200
    n = np.arange(n_max)
    w = q ** n
    w /= w.sum()
    mean = float(np.sum(n * w))
    return mean, float(np.sum((n - mean) ** 2 * w))


def quasistatic_reference(params, quantum):
    """Means and variances of (W, Qh, Qc, Σ) from independent thermal ensembles."""
    wh, wc, th, tc = params.omega_h, params.omega_c, params.temp_h, params.temp_c
    if quantum:
        nh, vh = bose_moments(wh, th, params.hbar)
        nc, vc = bose_moments(wc, tc, params.hbar)
        h = params.hbar
    else:
        # action I = H/ω is exponential with mean T/ω
        nh, vh = th / wh, (th / wh) ** 2
        nc, vc = tc / wc, (tc / wc) ** 2
        h = 1.0
    diff, spread = nh - nc, vh + vc
    scales = {
        "w": h * (wh - wc),
        "qh": h * wh,
        "qc": h * wc,
        "sigma": h * (wc / tc - wh / th),
    }
    means = {k: s * diff for k, s in scales.items()}
    var = {k: s * s * spread for k, s in scales.items()}
    return means, var
