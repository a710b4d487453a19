"""Closed-form quasistatic statistics and the inequality scan functions.

In the quasistatic limit adiabats conserve the quantum number (or classical
action) and isochores fully thermalize, so every statistic is a function of
x = ħω_h/2T_h and y = ħω_c/2T_c only (quantum), or of T_h/ω_h and T_c/ω_c
(classical).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correlations import classify
from .model import BathKind, CycleParams, MachineType, validate

# |x − y| below which the mean quanta difference counts as zero
_ZERO_RTOL = 1e-15


@dataclass(frozen=True)
class QuasistaticStats:
    mean_w: float
    mean_qh: float
    mean_qc: float
    mean_sigma: float
    var_w: float
    var_qh: float
    var_qc: float
    var_sigma: float
    eps: float
    u_factor: float
    eta_otto: float
    delta_otto: float
    eta_carnot: float
    bath: BathKind
    undefined: frozenset = field(default_factory=frozenset)

    # the four relative errors coincide quasistatically
    @property
    def eps_w(self) -> float:
        return self.eps

    eps_qh = eps_qc = eps_sigma = eps_w

    @property
    def q(self) -> float:
        return self.eps * self.mean_sigma / 2

    @property
    def machine(self) -> MachineType:
        return classify(self.mean_w, self.mean_qh, self.mean_qc)

    def mean(self, name: str) -> float:
        return getattr(self, f"mean_{name}")

    def var(self, name: str) -> float:
        return getattr(self, f"var_{name}")

    def eps_of(self, name: str) -> float:
        return self.eps


def coth(x):
    return 1.0 / np.tanh(x)


def _coth_diff(x, y):
    """coth x − coth y without cancellation for nearby arguments."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        sinh_form = np.sinh(y - x) / (np.sinh(x) * np.sinh(y))
    big = np.maximum(x, y) > 300.0
    return np.where(big, coth(x) - coth(y), sinh_form)


def _csch2(x):
    with np.errstate(over="ignore"):
        return 1.0 / np.sinh(np.asarray(x, dtype=float)) ** 2


def _z_coth_z(z: float) -> float:
    if abs(z) < 1e-8:
        return 1.0 + z * z / 3.0
    return z / math.tanh(z)


def otto_efficiency(omega_h: float, omega_c: float) -> float:
    return 1.0 - omega_c / omega_h


def cooling_cop(omega_h: float, omega_c: float) -> float:
    """ω_c/(ω_h − ω_c); ``inf`` when the frequencies coincide."""
    if omega_h == omega_c:
        return math.inf
    return omega_c / (omega_h - omega_c)


def quasistatic_stats(params: CycleParams, bath: BathKind) -> QuasistaticStats:
    """Quasistatic means, variances and the shared relative error. Durations are ignored."""
    validate(params.replace(tau_ch=1.0), allow_equal_frequencies=True)
    wh, wc, th, tc = params.omega_h, params.omega_c, params.temp_h, params.temp_c
    if bath is BathKind.QUANTUM:
        hb = params.hbar
        x = hb * wh / (2 * th)
        y = hb * wc / (2 * tc)
        # quanta difference ⟨n_h − n_c⟩ and summed variance Δn_c² + Δn_h²
        level = 0.5 * float(_coth_diff(x, y))
        spread = 0.25 * float(_csch2(x) + _csch2(y))
        zero = abs(x - y) <= _ZERO_RTOL * max(x, y)
        if zero:
            level = 0.0
        scale_w, scale_h, scale_c = hb * (wh - wc), hb * wh, hb * wc
        scale_sigma = 2 * (y - x)
        var_scale_sigma = 4 * (x - y) ** 2
        u = _z_coth_z(y - x)
        var_factor = spread
    else:
        a, b = th / wh, tc / wc
        diff = a - b
        zero = abs(diff) <= _ZERO_RTOL * max(a, b)
        level = 0.0 if zero else diff
        scale_w, scale_h, scale_c = wh - wc, wh, wc
        # 1/b − 1/a written as (a − b)/(ab) keeps ⟨Σ⟩ accurate when a ≈ b
        scale_sigma = diff / (a * b)
        var_scale_sigma = scale_sigma**2
        u = 1.0
        var_factor = a * a + b * b

    mean_w = scale_w * level
    mean_qh = scale_h * level
    mean_qc = scale_c * level
    mean_sigma = scale_sigma * level
    undefined = set()
    if zero:
        eps = math.nan
        undefined.add("eps")
    else:
        eps = var_factor / level**2
    delta = cooling_cop(wh, wc)
    if math.isinf(delta):
        undefined.add("delta_otto")
    return QuasistaticStats(
        mean_w=mean_w, mean_qh=mean_qh, mean_qc=mean_qc, mean_sigma=mean_sigma,
        var_w=scale_w**2 * var_factor,
        var_qh=scale_h**2 * var_factor,
        var_qc=scale_c**2 * var_factor,
        var_sigma=var_scale_sigma * var_factor,
        eps=eps,
        u_factor=u,
        eta_otto=otto_efficiency(wh, wc),
        delta_otto=delta,
        eta_carnot=1.0 - tc / th,
        bath=bath,
        undefined=frozenset(undefined),
    )


def inequality_g(z):
    """g(z) = z − ln(z + √(1+z²)) = z − asinh(z)."""
    z = np.asarray(z, dtype=float)
    out = z - np.arcsinh(z)
    return out[()] if out.ndim == 0 else out


def inequality_k(x):
    """k(x) = coth x − 1/x, with a Taylor branch near zero."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    series = x * (1 / 3 - x2 * (1 / 45 - x2 * (2 / 945 - x2 / 4725)))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = coth(x) - 1.0 / x
    out = np.where(np.abs(x) < 0.05, series, direct)
    return out[()] if out.ndim == 0 else out


def inequality_kdiff(x, y):
    """k(x) − k(y)."""
    return inequality_k(x) - inequality_k(y)


def inequality_l(x, y):
    """l(x, y) = (coth²x + coth²y − 2)(x−y)² − (x²+y²)(coth x − coth y)².

    Evaluated as (csch²x + csch²y)(x−y)² − (x²+y²)·[sinh(y−x)/(sinh x sinh y)]²,
    which has no cancellation on the diagonal (l(x, x) = 0 exactly).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x - y
    out = (_csch2(x) + _csch2(y)) * d * d - (x * x + y * y) * _coth_diff(x, y) ** 2
    return out[()] if out.ndim == 0 else out
