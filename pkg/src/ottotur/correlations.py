"""Exact means and fluctuations of work, heats and entropy production.

Two-time correlations ⟨H(t_j)H(t_i)⟩ follow from the regression theorem: the
vector C(t, t_i) = (⟨HH_i⟩, ⟨LH_i⟩, ⟨DH_i⟩, ⟨H_i⟩) obeys the same linear
equation as the one-time moments, seeded at t = t_i by Gaussian closure.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .limit_cycle import boundary_states, cycle_propagator, phase
from .model import BathKind, CycleParams, MachineType, MomentState

# A mean is treated as zero below this fraction of the cycle's energy scale.
ZERO_MEAN_RTOL = 1e-13

QUANTITIES = ("w", "qh", "qc", "sigma")


@dataclass(frozen=True)
class TwoTimeVector:
    c1: float  # ⟨H(t)H(t')⟩_s
    c2: float  # ⟨L(t)H(t')⟩_s
    c3: float  # ⟨D(t)H(t')⟩_s
    c4: float  # ⟨H(t')⟩

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3, self.c4])

    @classmethod
    def from_array(cls, a) -> "TwoTimeVector":
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def propagate(self, matrix: np.ndarray) -> "TwoTimeVector":
        return TwoTimeVector.from_array(matrix @ self.as_array())


@dataclass(frozen=True, eq=False)
class BoundaryMoments:
    means: np.ndarray   # ⟨H(t_i)⟩, i = 1..5
    second: np.ndarray  # S_ij = ⟨H(t_i)H(t_j)⟩_s

    def mean_of(self, coeffs) -> float:
        return float(np.dot(coeffs, self.means))

    def variance_of(self, coeffs) -> float:
        c = np.asarray(coeffs, dtype=float)
        return float(c @ self.second @ c - np.dot(c, self.means) ** 2)

    def covariance_of(self, a, b) -> float:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return float(a @ self.second @ b - np.dot(a, self.means) * np.dot(b, self.means))


@dataclass(frozen=True)
class ThermoStats:
    mean_w: float
    mean_qh: float
    mean_qc: float
    mean_sigma: float
    var_w: float
    var_qh: float
    var_qc: float
    var_sigma: float
    cov_qh_qc: float
    eps_w: float
    eps_qh: float
    eps_qc: float
    eps_sigma: float
    q_w: float
    q_qh: float
    q_qc: float
    q_sigma: float
    machine: MachineType
    phase: float
    efficiency: float
    power: float
    bath: BathKind
    spectral_radius: float
    # quantities whose mean is zero, so ε and 𝒬 are reported as NaN
    undefined: frozenset = field(default_factory=frozenset)

    def mean(self, name: str) -> float:
        return getattr(self, f"mean_{name}")

    def var(self, name: str) -> float:
        return getattr(self, f"var_{name}")

    def eps(self, name: str) -> float:
        return getattr(self, f"eps_{name}")

    def q(self, name: str) -> float:
        return getattr(self, f"q_{name}")


def gaussian_closure(state: MomentState, bath: BathKind | None = None) -> TwoTimeVector:
    """Equal-time vector C(t', t') of a Gaussian state from its first moments."""
    bath = state.bath if bath is None else bath
    if bath is not state.bath:
        state = MomentState(state.h, state.l, state.d, state.omega, bath, state.hbar)
    state.check_floor()
    zero_point = 0.25 * (state.hbar * state.omega) ** 2 if bath is BathKind.QUANTUM else 0.0
    h, l, d = state.h, state.l, state.d
    return TwoTimeVector(
        c1=2 * h * h + l * l + d * d - zero_point,
        c2=3 * h * l,
        c3=3 * h * d,
        c4=h,
    )


def quantity_coefficients(params: CycleParams) -> dict[str, np.ndarray]:
    """Linear forms over (H1..H5) for each cycle quantity.

    ``qc_prime`` is the cold heat measured against t1 instead of t5, so that
    W = Q_h − Q_c' holds sample by sample. Σ is built from it: the entropy
    released over one closed cycle. Its mean is unchanged, and its slow-driving
    variance reduces to the quasistatic one, which it would not with Q_c.
    """
    w = np.array([1.0, -1.0, 1.0, -1.0, 0.0])
    qh = np.array([0.0, -1.0, 1.0, 0.0, 0.0])
    qc = np.array([0.0, 0.0, 0.0, 1.0, -1.0])
    qc_prime = np.array([-1.0, 0.0, 0.0, 1.0, 0.0])
    sigma = -qh / params.temp_h + qc_prime / params.temp_c
    return {"w": w, "qh": qh, "qc": qc, "sigma": sigma, "qc_prime": qc_prime}


@functools.lru_cache(maxsize=2048)
def boundary_moments(params: CycleParams, bath: BathKind) -> BoundaryMoments:
    """Means ⟨H(t_i)⟩ and the symmetric table ⟨H(t_i)H(t_j)⟩_s for i, j = 1..5."""
    states = boundary_states(params, bath)
    strokes = cycle_propagator(params, bath).strokes
    means = np.array([s.h for s in states])
    second = np.empty((5, 5))
    for i in range(5):
        vec = gaussian_closure(states[i], bath).as_array()
        second[i, i] = vec[0]
        for j in range(i + 1, 5):
            vec = strokes[j - 1].matrix @ vec
            second[i, j] = second[j, i] = vec[0]
    means.setflags(write=False)
    second.setflags(write=False)
    return BoundaryMoments(means, second)


def classify(mean_w: float, mean_qh: float, mean_qc: float) -> MachineType:
    """Engine: all positive; refrigerator: all negative; anything else heats.

    Sign convention: Q_c = H(t4) − H(t5) is heat dumped into the cold bath,
    so a refrigerator (extracting from the cold bath) has Q_c < 0.
    """
    if mean_w > 0 and mean_qh > 0 and mean_qc > 0:
        return MachineType.ENGINE
    if mean_w < 0 and mean_qh < 0 and mean_qc < 0:
        return MachineType.REFRIGERATOR
    return MachineType.HEATER


@functools.lru_cache(maxsize=2048)
def thermo_stats(params: CycleParams, bath: BathKind) -> ThermoStats:
    bm = boundary_moments(params, bath)
    coeffs = quantity_coefficients(params)
    energy_scale = float(np.max(np.abs(bm.means)))
    scales = {
        "w": energy_scale,
        "qh": energy_scale,
        "qc": energy_scale,
        "sigma": energy_scale * (1.0 / params.temp_h + 1.0 / params.temp_c),
    }
    means, variances, eps = {}, {}, {}
    undefined = set()
    for name in QUANTITIES:
        mu = bm.mean_of(coeffs[name])
        var = bm.variance_of(coeffs[name])
        if abs(mu) <= ZERO_MEAN_RTOL * scales[name]:
            mu = 0.0
            undefined.add(name)
            eps[name] = math.nan
        else:
            eps[name] = var / mu**2
        means[name] = mu
        variances[name] = var
    sigma = means["sigma"]
    q = {name: eps[name] * sigma / 2 for name in QUANTITIES}
    machine = classify(means["w"], means["qh"], means["qc"])
    efficiency = means["w"] / means["qh"] if machine is MachineType.ENGINE else math.nan
    return ThermoStats(
        mean_w=means["w"], mean_qh=means["qh"], mean_qc=means["qc"], mean_sigma=sigma,
        var_w=variances["w"], var_qh=variances["qh"], var_qc=variances["qc"],
        var_sigma=variances["sigma"],
        cov_qh_qc=bm.covariance_of(coeffs["qh"], coeffs["qc"]),
        eps_w=eps["w"], eps_qh=eps["qh"], eps_qc=eps["qc"], eps_sigma=eps["sigma"],
        q_w=q["w"], q_qh=q["qh"], q_qc=q["qc"], q_sigma=q["sigma"],
        machine=machine,
        phase=phase(params),
        efficiency=efficiency,
        power=means["w"] / params.tau_cyc,
        bath=bath,
        spectral_radius=cycle_propagator(params, bath).spectral_radius_g,
        undefined=frozenset(undefined),
    )
