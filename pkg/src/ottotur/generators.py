"""Stroke generators acting on the moment vector (H, L, D, 1) and their exponentials.

Adiabats are written in the accumulated phase θ = ∫ω dt. Under the 1/ω-linear
ramp the ratio ω̇/ω² is constant, so dφ/dθ = Aφ with a constant A and the
whole stroke is one matrix exponential.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .model import (
    CYCLE_ORDER,
    BathKind,
    CycleParams,
    ProcessTag,
    ValidationError,
    effective_temperature,
)


@dataclass(frozen=True, eq=False)
class Generator:
    matrix: np.ndarray
    tag: ProcessTag
    bath: BathKind | None = None


@dataclass(frozen=True, eq=False)
class StrokePropagator:
    matrix: np.ndarray
    tag: ProcessTag
    duration: float

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def omega_protocol(omega_i: float, omega_f: float, tau: float, t: float) -> float:
    """Frequency ω(t) = 1/[1/ω_i + (1/ω_f − 1/ω_i)·t/τ] on 0 <= t <= τ."""
    if not 0.0 <= t <= tau:
        raise ValidationError(f"t={t!r} outside the stroke interval [0, {tau!r}]")
    if tau == 0:
        return omega_i
    return 1.0 / (1.0 / omega_i + (1.0 / omega_f - 1.0 / omega_i) * t / tau)


def adiabatic_rate(omega_i: float, omega_f: float, tau: float) -> float:
    """The constant ω̇/ω² = (1/ω_i − 1/ω_f)/τ of the ramp."""
    return (1.0 / omega_i - 1.0 / omega_f) / tau


def adiabatic_phase(omega_i: float, omega_f: float, tau: float, t: float | None = None) -> float:
    """Phase θ(t) = ∫₀ᵗ ω dt accumulated along the ramp (whole stroke if t is None)."""
    if t is None:
        t = tau
    if t == 0:
        return 0.0
    slope = (1.0 / omega_f - 1.0 / omega_i) / tau
    # log1p form keeps the ω_f -> ω_i limit (θ -> ω_i t) accurate.
    z = slope * omega_i * t
    if abs(z) < 1e-12:
        return omega_i * t * (1.0 - 0.5 * z)
    return math.log1p(z) / slope


def adiabatic_generator(omega_i: float, omega_f: float, tau: float,
                        tag: ProcessTag | None = None) -> Generator:
    if omega_i <= 0 or omega_f <= 0:
        raise ValidationError("frequencies must be positive")
    if tau <= 0:
        raise ValidationError("adiabat duration must be positive")
    u = adiabatic_rate(omega_i, omega_f, tau)
    a = np.array([
        [u, -u, 0.0, 0.0],
        [-u, u, -2.0, 0.0],
        [0.0, 2.0, u, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ])
    if tag is None:
        tag = ProcessTag.COMPRESSION if omega_f >= omega_i else ProcessTag.EXPANSION
    return Generator(_frozen(a), tag, None)


def isochore_generator(params: CycleParams, which: ProcessTag | str, bath: BathKind) -> Generator:
    """Time-independent generator of the hot or cold isochore."""
    if isinstance(which, str):
        which = {"hot": ProcessTag.HOT_ISOCHORE, "cold": ProcessTag.COLD_ISOCHORE}[which.lower()]
    if which is ProcessTag.HOT_ISOCHORE:
        omega, temp = params.omega_h, params.temp_h
    elif which is ProcessTag.COLD_ISOCHORE:
        omega, temp = params.omega_c, params.temp_c
    else:
        raise ValidationError(f"{which} is not an isochore")
    g = params.gamma
    if bath is BathKind.QUANTUM:
        t_eff = float(effective_temperature(omega, temp, params.hbar))
        m = np.array([
            [-g / 2, 0.0, 0.0, g * t_eff / 2],
            [0.0, -g / 2, -2 * omega, 0.0],
            [0.0, 2 * omega, -g / 2, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ])
    else:
        m = np.array([
            [-g / 4, -g / 4, 0.0, g * temp / 4],
            [-g / 4, -g / 4, -2 * omega, g * temp / 4],
            [0.0, 2 * omega, -g / 4, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ])
    return Generator(_frozen(m), which, bath)


def stroke_propagator(gen: Generator, extent: float, duration: float | None = None) -> StrokePropagator:
    """exp(matrix · extent).

    ``extent`` is elapsed time for isochores and accumulated phase θ for
    adiabats. ``duration`` (wall time of the stroke) is only recorded.
    """
    if extent < 0:
        raise ValidationError("propagation extent must be nonnegative")
    if not np.all(np.isfinite(gen.matrix)):
        raise ValidationError("generator has non-finite entries")
    if duration is None:
        duration = extent
    if extent == 0:
        return StrokePropagator(_frozen(np.eye(4)), gen.tag, duration)
    # scipy's expm is Padé scaling-and-squaring with a backward-error bound.
    mat = expm(gen.matrix * extent)
    mat[3] = (0.0, 0.0, 0.0, 1.0)
    return StrokePropagator(_frozen(mat), gen.tag, duration)


@functools.lru_cache(maxsize=4096)
def _adiabat_matrix(omega_i: float, omega_f: float, tau: float, t: float) -> np.ndarray:
    gen = adiabatic_generator(omega_i, omega_f, tau)
    return stroke_propagator(gen, adiabatic_phase(omega_i, omega_f, tau, t)).matrix


def adiabat_propagator(omega_i: float, omega_f: float, tau: float,
                       tag: ProcessTag, t: float | None = None) -> StrokePropagator:
    """Propagator over the first ``t`` (default: all) of a ramp of length ``tau``."""
    if t is None:
        t = tau
    if tau == 0 or t == 0:
        return StrokePropagator(_frozen(np.eye(4)), tag, 0.0)
    return StrokePropagator(_adiabat_matrix(omega_i, omega_f, tau, t), tag, t)


def stroke_endpoints(params: CycleParams, tag: ProcessTag) -> tuple[float, float, float]:
    """(ω at start, ω at end, duration) of a stroke."""
    return {
        ProcessTag.COMPRESSION: (params.omega_c, params.omega_h, params.tau_ch),
        ProcessTag.HOT_ISOCHORE: (params.omega_h, params.omega_h, params.tau_h),
        ProcessTag.EXPANSION: (params.omega_h, params.omega_c, params.tau_hc),
        ProcessTag.COLD_ISOCHORE: (params.omega_c, params.omega_c, params.tau_c),
    }[tag]


def partial_stroke(params: CycleParams, bath: BathKind, tag: ProcessTag, t: float) -> StrokePropagator:
    """Propagator over the first ``t`` time units of stroke ``tag``."""
    omega_i, omega_f, tau = stroke_endpoints(params, tag)
    if not 0.0 <= t <= tau:
        raise ValidationError(f"t={t!r} outside the stroke interval [0, {tau!r}]")
    if tag.is_adiabat:
        return adiabat_propagator(omega_i, omega_f, tau, tag, t)
    return stroke_propagator(isochore_generator(params, tag, bath), t)


def cycle_strokes(params: CycleParams, bath: BathKind) -> tuple[StrokePropagator, ...]:
    """The four stroke propagators in cycle order (compression first)."""
    strokes = []
    for tag in CYCLE_ORDER:
        _, _, tau = stroke_endpoints(params, tag)
        strokes.append(partial_stroke(params, bath, tag, tau))
    return tuple(strokes)
