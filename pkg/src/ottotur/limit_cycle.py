"""One-cycle propagator, cyclic steady state and intra-cycle trajectories."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .generators import StrokePropagator, cycle_strokes, partial_stroke, stroke_endpoints
from .model import (
    CYCLE_ORDER,
    BathKind,
    CycleParams,
    DivergentError,
    MomentState,
    validate,
)

# Spectral radii within this distance of 1 are treated as divergent.
STABILITY_MARGIN = 1e-9


@dataclass(frozen=True, eq=False)
class CyclePropagator:
    p: np.ndarray
    g: np.ndarray
    b: np.ndarray
    spectral_radius_g: float
    bath: BathKind
    strokes: tuple[StrokePropagator, ...]

    @property
    def stable(self) -> bool:
        return self.spectral_radius_g < 1.0 - STABILITY_MARGIN


@dataclass(frozen=True, eq=False)
class CycleTrajectory:
    times: np.ndarray
    states: tuple[MomentState, ...]
    kinetic: np.ndarray
    potential: np.ndarray
    # index into ``times`` where each stroke begins, plus the final index
    boundaries: tuple[int, ...] = ()

    @property
    def energy(self) -> np.ndarray:
        return np.array([s.h for s in self.states])


def _frequencies_at_boundaries(params: CycleParams) -> tuple[float, ...]:
    """ω at t1..t5."""
    return (params.omega_c, params.omega_h, params.omega_h, params.omega_c, params.omega_c)


@functools.lru_cache(maxsize=2048)
def cycle_propagator(params: CycleParams, bath: BathKind) -> CyclePropagator:
    """P = E_cold · E_exp · E_hot · E_com, acting on column vectors."""
    validate(params, allow_equal_frequencies=True)
    strokes = cycle_strokes(params, bath)
    p = np.eye(4)
    for s in strokes:
        p = s.matrix @ p
    if not np.all(np.isfinite(p)):
        raise DivergentError("one-cycle propagator overflowed", math.inf)
    p[3] = (0.0, 0.0, 0.0, 1.0)
    g = p[:3, :3].copy()
    b = p[:3, 3].copy()
    rho = float(np.max(np.abs(np.linalg.eigvals(g))))
    for a in (p, g, b):
        a.setflags(write=False)
    return CyclePropagator(p, g, b, rho, bath, strokes)


def steady_state(prop: CyclePropagator, params: CycleParams) -> MomentState:
    """Fixed point of the one-cycle map at the start of compression (t1).

    Raises DivergentError when the 3x3 block G has spectral radius within
    ``STABILITY_MARGIN`` of 1 or above.
    """
    if not prop.stable:
        raise DivergentError(
            f"no cyclic steady state: spectral radius of G is {prop.spectral_radius_g:.12g}",
            prop.spectral_radius_g,
        )
    c = np.linalg.solve(np.eye(3) - prop.g, prop.b)
    return MomentState.from_vector(c, params.omega_c, prop.bath, params.hbar)


@functools.lru_cache(maxsize=2048)
def boundary_vectors(params: CycleParams, bath: BathKind) -> np.ndarray:
    """Steady-state moment vectors φ(t1..t5) as rows of a 5x4 array."""
    prop = cycle_propagator(params, bath)
    phi = steady_state(prop, params).as_vector()
    rows = [phi]
    for s in prop.strokes:
        rows.append(s.matrix @ rows[-1])
    out = np.array(rows)
    out.setflags(write=False)
    return out


def boundary_states(params: CycleParams, bath: BathKind) -> tuple[MomentState, ...]:
    vecs = boundary_vectors(params, bath)
    return tuple(
        MomentState.from_vector(v, w, bath, params.hbar)
        for v, w in zip(vecs, _frequencies_at_boundaries(params))
    )


def trajectory(params: CycleParams, bath: BathKind, n_grid: int = 32) -> CycleTrajectory:
    """Sample φ(t) over one steady-state period, ``n_grid`` points per stroke.

    Grids are uniform within each stroke; stroke endpoints are shared between
    neighbouring strokes so the sample count is 4·(n_grid − 1) + 1.
    Zero-length strokes contribute no points.
    """
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2 per stroke")
    vecs = boundary_vectors(params, bath)
    times: list[float] = [0.0]
    states: list[MomentState] = [
        MomentState.from_vector(vecs[0], params.omega_c, bath, params.hbar)
    ]
    boundaries = [0]
    t0 = 0.0
    for k, tag in enumerate(CYCLE_ORDER):
        omega_i, omega_f, tau = stroke_endpoints(params, tag)
        if tau > 0:
            for t in np.linspace(0.0, tau, n_grid)[1:]:
                t = min(float(t), tau)
                vec = partial_stroke(params, bath, tag, t).matrix @ vecs[k]
                omega = _omega_in_stroke(omega_i, omega_f, tau, t)
                times.append(t0 + t)
                states.append(MomentState.from_vector(vec, omega, bath, params.hbar))
        t0 += tau
        boundaries.append(len(times) - 1)
    h = np.array([s.h for s in states])
    l = np.array([s.l for s in states])
    return CycleTrajectory(
        times=np.array(times),
        states=tuple(states),
        kinetic=0.5 * (h + l),
        potential=0.5 * (h - l),
        boundaries=tuple(boundaries),
    )


def _omega_in_stroke(omega_i: float, omega_f: float, tau: float, t: float) -> float:
    if omega_i == omega_f:
        return omega_i
    return 1.0 / (1.0 / omega_i + (1.0 / omega_f - 1.0 / omega_i) * t / tau)


def adiabat_phase_factor(omega_h: float, omega_c: float) -> float:
    """Phase per unit adiabat time, ω_cω_h ln(ω_h/ω_c)/(ω_h − ω_c)."""
    x = (omega_h - omega_c) / omega_c
    if x == 0:
        return omega_h
    return omega_h * math.log1p(x) / x


def phase(params: CycleParams) -> float:
    """Accumulated phase Δθ_cyc = ∫ω dt over one cycle."""
    return (
        params.omega_c * params.tau_c
        + params.omega_h * params.tau_h
        + adiabat_phase_factor(params.omega_h, params.omega_c) * (params.tau_ch + params.tau_hc)
    )
