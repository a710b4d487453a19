"""Domain types shared by every other module.

Units: k_B = 1, so temperatures carry energy units and beta = 1/T.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np


class ValidationError(ValueError):
    """Raised when a parameter set violates a model invariant."""


class DivergentError(ArithmeticError):
    """Raised when the one-cycle map has no stable fixed point."""

    def __init__(self, message: str, spectral_radius: float = math.nan):
        super().__init__(message)
        self.spectral_radius = spectral_radius


class MCInstabilityError(RuntimeError):
    """Raised when too many Monte Carlo trajectories blow up."""


class BathKind(enum.Enum):
    QUANTUM = "quantum"
    CLASSICAL = "classical"

    @classmethod
    def parse(cls, value: "BathKind | str") -> "BathKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown bath kind {value!r}") from None


class ProcessTag(enum.Enum):
    COMPRESSION = "compression"
    HOT_ISOCHORE = "hot_isochore"
    EXPANSION = "expansion"
    COLD_ISOCHORE = "cold_isochore"

    @property
    def is_adiabat(self) -> bool:
        return self in (ProcessTag.COMPRESSION, ProcessTag.EXPANSION)


# Order of strokes within one cycle, starting at compression (t1).
CYCLE_ORDER = (
    ProcessTag.COMPRESSION,
    ProcessTag.HOT_ISOCHORE,
    ProcessTag.EXPANSION,
    ProcessTag.COLD_ISOCHORE,
)


class MachineType(enum.Enum):
    ENGINE = "engine"
    REFRIGERATOR = "refrigerator"
    HEATER = "heater"


@dataclass(frozen=True)
class CycleParams:
    """Physical and protocol parameters of one Otto cycle.

    Durations are in cycle order: compression (``tau_ch``), hot isochore
    (``tau_h``), expansion (``tau_hc``), cold isochore (``tau_c``).
    """

    omega_h: float
    omega_c: float
    temp_h: float
    temp_c: float
    gamma: float
    tau_ch: float
    tau_h: float
    tau_hc: float
    tau_c: float
    m: float = 1.0
    hbar: float = 1.0

    @property
    def tau_cyc(self) -> float:
        return self.tau_ch + self.tau_h + self.tau_hc + self.tau_c

    @property
    def beta_h(self) -> float:
        return 1.0 / self.temp_h

    @property
    def beta_c(self) -> float:
        return 1.0 / self.temp_c

    @property
    def durations(self) -> tuple[float, float, float, float]:
        return (self.tau_ch, self.tau_h, self.tau_hc, self.tau_c)

    def replace(self, **changes) -> "CycleParams":
        return dataclasses.replace(self, **changes)

    def scaled(self, factor: float) -> "CycleParams":
        """Return a copy with every stroke duration multiplied by ``factor``."""
        return self.replace(
            tau_ch=self.tau_ch * factor,
            tau_h=self.tau_h * factor,
            tau_hc=self.tau_hc * factor,
            tau_c=self.tau_c * factor,
        )

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(CycleParams))


def _check(params: CycleParams, allow_equal_frequencies: bool) -> None:
    for name in PARAM_FIELDS:
        value = getattr(params, name)
        if not math.isfinite(value):
            raise ValidationError(f"{name} must be finite, got {value!r}")
    if params.temp_h <= 0 or params.temp_c <= 0:
        raise ValidationError("temperatures must be positive")
    if params.omega_h <= 0 or params.omega_c <= 0:
        raise ValidationError("frequencies must be positive")
    if params.m <= 0:
        raise ValidationError("mass must be positive")
    if params.hbar <= 0:
        raise ValidationError("hbar must be positive")
    if params.gamma < 0:
        raise ValidationError("gamma must be nonnegative")
    if min(params.durations) < 0:
        raise ValidationError("stroke durations must be nonnegative")
    if params.tau_cyc <= 0:
        raise ValidationError("cycle time tau_cyc must be positive")
    if allow_equal_frequencies:
        if params.omega_h < params.omega_c:
            raise ValidationError("ω_h must not be below ω_c")
    elif params.omega_h <= params.omega_c:
        raise ValidationError("ω_h must exceed ω_c")


def validate(params: CycleParams, *, allow_equal_frequencies: bool = False) -> CycleParams:
    """Return ``params`` unchanged if every invariant holds.

    ``allow_equal_frequencies`` relaxes ω_h > ω_c to ω_h >= ω_c, which the
    computational modules need for degenerate (undriven) reference cycles.
    """
    _check(params, allow_equal_frequencies)
    return params


def effective_temperature(omega, temp, hbar):
    """Quantum bath energy scale (ħω/2)·coth(ħω/2T).

    Reduces to ``temp`` for ``hbar == 0`` and to the zero-point energy
    ħω/2 as ``temp`` goes to zero. Accepts scalars or arrays.
    """
    omega = np.asarray(omega, dtype=float)
    temp = np.asarray(temp, dtype=float)
    hbar = np.asarray(hbar, dtype=float)
    half_quantum = 0.5 * hbar * omega
    with np.errstate(divide="ignore", invalid="ignore"):
        x = half_quantum / temp
        # x·coth(x) written via tanh so large x saturates cleanly.
        value = np.where(x > 0, half_quantum / np.tanh(x), temp)
    value = np.where(temp == 0, half_quantum, value)
    value = np.where(hbar == 0, temp, value)
    return value[()] if value.ndim == 0 else value


@dataclass(frozen=True)
class MomentState:
    """Mean values (⟨H⟩, ⟨L⟩, ⟨D⟩) of a Gaussian state at frequency ``omega``.

    The constant identity entry of the moment vector is implicit.
    """

    h: float
    l: float
    d: float
    omega: float
    bath: BathKind
    hbar: float = 1.0

    @classmethod
    def from_vector(cls, vec, omega: float, bath: BathKind, hbar: float = 1.0) -> "MomentState":
        return cls(float(vec[0]), float(vec[1]), float(vec[2]), omega, bath, hbar)

    def as_vector(self) -> np.ndarray:
        return np.array([self.h, self.l, self.d, 1.0])

    @property
    def floor(self) -> float:
        """Lower bound on h² − l² − d² for this bath kind."""
        if self.bath is BathKind.QUANTUM:
            return 0.25 * (self.hbar * self.omega) ** 2
        return 0.0

    def floor_gap(self) -> float:
        """h² − l² − d² minus the floor; nonnegative for physical states."""
        return self.h**2 - self.l**2 - self.d**2 - self.floor

    def check_floor(self, rtol: float = 1e-9) -> None:
        scale = max(self.h**2, self.floor, 1e-300)
        if self.h <= 0 or self.floor_gap() < -rtol * scale:
            raise ValidationError(
                f"moment state violates the {self.bath.value} uncertainty floor "
                f"(h={self.h:.6g}, gap={self.floor_gap():.3g})"
            )

    @property
    def kinetic(self) -> float:
        return 0.5 * (self.h + self.l)

    @property
    def potential(self) -> float:
        return 0.5 * (self.h - self.l)
