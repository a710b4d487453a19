"""Parameter sweeps built on the exact statistics: random TUR scatters,
Q-factor scans against the accumulated phase, and the γ dependence of the
isochore time below which the quantum cycle gives more precise work.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .correlations import QUANTITIES, thermo_stats
from .limit_cycle import phase
from .model import BathKind, CycleParams, DivergentError, MachineType, ValidationError, validate
from .quasistatic import quasistatic_stats

BATHS = (BathKind.QUANTUM, BathKind.CLASSICAL)


@dataclass(frozen=True)
class SweepSpec:
    """Random draws of (ω_h, ω_c, T_h, T_c); frequencies and temperatures
    uniform on (0, upper], ordered by rejection."""

    n_draws: int = 500
    seed: int = 0
    gamma: float = 0.25
    stroke_times: tuple[float, float, float, float] = (1.25, 1.25, 1.25, 1.25)
    upper: float = 1.0
    quasistatic: bool = False
    baths: tuple[BathKind, ...] = BATHS
    m: float = 1.0
    hbar: float = 1.0
    n_threads: int | None = None

    def __post_init__(self):
        if self.n_draws < 1:
            raise ValidationError("n_draws must be at least 1")
        if not self.upper > 0:
            raise ValidationError("upper bound must be positive")
        if len(self.stroke_times) != 4 or min(self.stroke_times) < 0:
            raise ValidationError("stroke_times needs four nonnegative durations")


def draw_params(spec: SweepSpec) -> list[CycleParams]:
    rng = np.random.default_rng(spec.seed)
    out = []
    while len(out) < spec.n_draws:
        # 1 - U maps [0, 1) onto (0, 1]
        wa, wb, ta, tb = spec.upper * (1.0 - rng.random(4))
        if wa == wb or ta == tb:
            continue
        tau_ch, tau_h, tau_hc, tau_c = spec.stroke_times
        out.append(CycleParams(
            omega_h=float(max(wa, wb)), omega_c=float(min(wa, wb)),
            temp_h=float(max(ta, tb)), temp_c=float(min(ta, tb)),
            gamma=spec.gamma, tau_ch=tau_ch, tau_h=tau_h, tau_hc=tau_hc, tau_c=tau_c,
            m=spec.m, hbar=spec.hbar,
        ))
    return out


@dataclass(frozen=True, eq=False)
class SweepRow:
    index: int
    params: CycleParams
    stats: dict  # BathKind -> ThermoStats | QuasistaticStats | None
    divergent: dict  # BathKind -> bool
    ratios: dict = field(default_factory=dict)  # quantity -> ε_quantum/ε_classical

    def ok(self, bath: BathKind) -> bool:
        return self.stats.get(bath) is not None


def _eps_of(stats, name):
    return stats.eps_of(name) if hasattr(stats, "eps_of") else stats.eps(name)


def evaluate(index: int, params: CycleParams, baths=BATHS, quasistatic: bool = False) -> SweepRow:
    stats, flags = {}, {}
    for bath in baths:
        try:
            stats[bath] = quasistatic_stats(params, bath) if quasistatic else thermo_stats(params, bath)
            flags[bath] = False
        except DivergentError:
            stats[bath] = None
            flags[bath] = True
    ratios = {}
    q, c = stats.get(BathKind.QUANTUM), stats.get(BathKind.CLASSICAL)
    for name in QUANTITIES:
        if q is None or c is None:
            ratios[name] = math.nan
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios[name] = float(np.divide(_eps_of(q, name), _eps_of(c, name)))
    return SweepRow(index, params, stats, flags, ratios)


def _map_rows(fn, items, n_threads):
    if n_threads is None:
        n_threads = int(os.environ.get("OTTOTUR_THREADS", "1") or 1)
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def tur_scatter(spec: SweepSpec) -> list[SweepRow]:
    """One row per draw, in draw order; divergent draws carry flags, not stats."""
    draws = draw_params(spec)
    return _map_rows(
        lambda item: evaluate(item[0], item[1], spec.baths, spec.quasistatic),
        list(enumerate(draws)),
        spec.n_threads,
    )


def tur_bound(sigma):
    """Conventional bound 2/⟨Σ⟩."""
    return 2.0 / np.asarray(sigma, dtype=float)


def classical_quasistatic_curve(sigma):
    """1 + 2/⟨Σ⟩, where classical quasistatic points sit."""
    return 1.0 + tur_bound(sigma)


@dataclass(frozen=True, eq=False)
class QScanRow:
    phase_over_pi: float
    row: SweepRow

    def q(self, bath: BathKind, name: str) -> float:
        s = self.row.stats.get(bath)
        return math.nan if s is None else s.q(name)

    def machine(self, bath: BathKind) -> MachineType | None:
        s = self.row.stats.get(bath)
        return None if s is None else s.machine


def q_factor_scan(params_base: CycleParams, phase_range: tuple[float, float], n_points: int,
                  baths=BATHS) -> list[QScanRow]:
    """Rescale all stroke durations of ``params_base`` so that Δθ_cyc/π runs
    uniformly over ``phase_range``; the duration ratios stay fixed."""
    validate(params_base)
    lo, hi = phase_range
    if not 0 < lo <= hi:
        raise ValidationError("phase range must be positive and ordered")
    if n_points < 1:
        raise ValidationError("n_points must be at least 1")
    base = phase(params_base)
    if base <= 0:
        raise ValidationError("base parameters accumulate no phase")
    rows = []
    for i, target in enumerate(np.linspace(lo, hi, n_points)):
        params = params_base.scaled(math.pi * target / base)
        rows.append(QScanRow(float(target), evaluate(i, params, baths)))
    return rows


def _phase_per_isochore_time(params: CycleParams) -> float:
    """Phase per unit total isochore time when τ_h = τ_c."""
    return 0.5 * (params.omega_h + params.omega_c)


@dataclass(frozen=True)
class CrossoverResult:
    gamma: float
    tau_star: float  # τ*_h + τ*_c; NaN when not found
    found: bool
    window_end: float
    n_evaluated: int
    n_divergent: int
    quantity: str = "w"


def work_eps_ratio(params: CycleParams, quantity: str = "w") -> float:
    """ε_quantum/ε_classical, NaN when either cycle diverges or a mean is zero."""
    try:
        q = thermo_stats(params, BathKind.QUANTUM)
        c = thermo_stats(params, BathKind.CLASSICAL)
    except DivergentError:
        return math.nan
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.divide(q.eps(quantity), c.eps(quantity)))


def crossover_tau(params_base: CycleParams, gamma: float, *, adiabat_time: float | None = None,
                  step: float | None = None, quiet_window: float | None = None,
                  window_cap: float | None = None, rtol: float = 1e-6,
                  quantity: str = "w") -> CrossoverResult:
    """Total isochore time τ_h + τ_c (split evenly) beyond which the quantum
    relative error never falls below the classical one within the window.

    The scan walks a uniform grid of total isochore time; ``step`` defaults to
    1/32 of the resonance spacing 2π/(ω_h + ω_c). After the last grid point
    with ratio < 1 the boundary is bisected to ``rtol``. The scan stops early
    once ``quiet_window`` (default 25/γ plus ten resonance spacings) passes
    with no ratio < 1. Non-finite ratios (divergence, zero means) are skipped.
    """
    if not gamma > 0:
        raise ValidationError("gamma must be positive")
    base = params_base.replace(gamma=gamma)
    if adiabat_time is None:
        adiabat_time = base.tau_ch + base.tau_hc
    spacing = math.pi / _phase_per_isochore_time(base)
    step = spacing / 32 if step is None else step
    if quiet_window is None:
        quiet_window = 25.0 / gamma + 10 * spacing
    if window_cap is None:
        window_cap = 1e3 / gamma + 1e3 / base.omega_c

    def at(total):
        return base.replace(tau_ch=adiabat_time / 2, tau_hc=adiabat_time / 2,
                            tau_h=total / 2, tau_c=total / 2)

    validate(at(step), allow_equal_frequencies=True)
    last_below = None
    n_eval = n_div = 0
    k = 1
    total = step
    while total <= window_cap:
        r = work_eps_ratio(at(total), quantity)
        n_eval += 1
        if math.isnan(r):
            n_div += 1
        elif r < 1.0:
            last_below = total
        anchor = last_below if last_below is not None else 0.0
        if total - anchor > quiet_window:
            break
        k += 1
        total = k * step
    window_end = min(total, window_cap)
    if last_below is None:
        return CrossoverResult(gamma, math.nan, False, window_end, n_eval, n_div, quantity)

    # bisect between the last sub-1 point and the next grid point; a NaN
    # midpoint is treated as not-below so the boundary does not creep past it
    lo, hi = last_below, last_below + step
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        r = work_eps_ratio(at(mid), quantity)
        n_eval += 1
        if r < 1.0:
            lo = mid
        else:
            hi = mid
    return CrossoverResult(gamma, 0.5 * (lo + hi), True, window_end, n_eval, n_div, quantity)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


__all__ = [
    "BATHS",
    "CrossoverResult",
    "QScanRow",
    "SweepRow",
    "SweepSpec",
    "classical_quasistatic_curve",
    "crossover_tau",
    "draw_params",
    "evaluate",
    "loglog_slope",
    "q_factor_scan",
    "tur_bound",
    "tur_scatter",
    "work_eps_ratio",
]
