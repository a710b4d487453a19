"""Langevin Monte Carlo through full Otto cycles.

This is an independent check on the moment-equation results: it never uses
the propagators, only the stochastic equations of motion for (x, p).

Isochores use stochastic Heun at fixed ω; adiabats run with the bath
detached, using deterministic velocity-Verlet under the ω(t) ramp.
Trajectories are processed in fixed-size blocks, each with its own Philox
stream keyed by (seed, block index), so results are independent of
thread count and completion order.

For the quantum bath the quasiclassical Langevin model reproduces the
one-time moments (so all means), but its energy products are classical
Gaussian ones. Those exceed the symmetrized quantum products by the
propagated zero-point term ħ²ω²/4, so quantum-bath variance estimates
are those of the quasiclassical model, not of the quantum cycle.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .correlations import QUANTITIES
from .generators import stroke_endpoints
from .model import (
    CYCLE_ORDER,
    BathKind,
    CycleParams,
    MCInstabilityError,
    ValidationError,
    effective_temperature,
    validate,
)

BLOCK_SIZE = 4096
MAX_ABORT_FRACTION = 0.01
THREADS_ENV = "OTTOTUR_THREADS"
# isochore steps whose noise is drawn in one batch; bounds memory per block
NOISE_CHUNK = 256


class McAccuracyWarning(UserWarning):
    """dt is above the recommended accuracy floor."""


@dataclass(frozen=True)
class McConfig:
    n_traj: int = 100_000
    dt: float | None = None  # None: half the recommended ceiling
    burn_in_cycles: int | None = None  # None: see default_burn_in
    measure_cycles: int = 1
    seed: int = 0
    grid_per_stroke: int = 4  # ⟨H(t)⟩ samples per stroke
    n_threads: int | None = None

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValidationError("n_traj must be at least 1")
        if self.dt is not None and not self.dt > 0:
            raise ValidationError("dt must be positive")
        if self.burn_in_cycles is not None and self.burn_in_cycles < 0:
            raise ValidationError("burn_in_cycles must be nonnegative")
        if self.measure_cycles < 1:
            raise ValidationError("measure_cycles must be at least 1")
        if self.grid_per_stroke < 1:
            raise ValidationError("grid_per_stroke must be at least 1")


@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float


@dataclass(frozen=True)
class McStat:
    mean: float
    mean_se: float
    var: float
    var_se: float
    eps: float
    eps_se: float


@dataclass(frozen=True, eq=False)
class McEstimate:
    stats: dict[str, McStat]
    times: np.ndarray
    h_mean: np.ndarray
    h_se: np.ndarray
    n_traj: int
    n_aborted: int
    dt: float
    burn_in_cycles: int
    measure_cycles: int
    backend: str
    extra: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> McStat:
        return self.stats[name]


def dt_ceiling(params: CycleParams) -> float:
    """min(1/ω_h, 4/γ): the fastest time scale of the cycle."""
    scales = [1.0 / max(params.omega_h, params.omega_c)]
    if params.gamma > 0:
        scales.append(4.0 / params.gamma)
    return min(scales)


def check_dt(params: CycleParams, dt: float) -> None:
    limit = dt_ceiling(params)
    if dt > 0.1 * limit:
        raise ValidationError(f"dt={dt:g} exceeds the hard limit {0.1 * limit:g}")
    if dt > 0.01 * limit:
        warnings.warn(
            f"dt={dt:g} above the recommended {0.01 * limit:g}; expect visible bias",
            McAccuracyWarning,
            stacklevel=3,
        )


def default_burn_in(params: CycleParams) -> int:
    contact = params.gamma * min(params.tau_h, params.tau_c)
    if contact <= 0:
        return 20
    return max(20, math.ceil(10.0 / contact))


def _bath_coefficients(params: CycleParams, bath: BathKind, omega: float, temp: float):
    """(kx, kp, sx, sp): damping rates and noise amplitudes on x and p."""
    g, m = params.gamma, params.m
    if bath is BathKind.QUANTUM:
        t_eff = float(effective_temperature(omega, temp, params.hbar))
        return (g / 4, g / 4,
                math.sqrt(g * t_eff / (4 * m * omega**2)), math.sqrt(m * g * t_eff / 4))
    return 0.0, g / 4, 0.0, math.sqrt(m * g * temp / 4)


def _energy(x, p, omega, m):
    return p * p / (2 * m) + 0.5 * m * omega * omega * x * x


def step(point: PhasePoint, omega: float, params: CycleParams, bath: BathKind,
         dt: float, rng: np.random.Generator, *, attached: bool = True,
         temp: float | None = None, omega_next: float | None = None) -> PhasePoint:
    """Advance one trajectory by one step.

    With a bath attached (isochore) ω is held fixed and ``temp`` defaults to
    the hot bath when ω equals ω_h, else the cold bath. Detached (adiabat)
    steps move ω from ``omega`` to ``omega_next`` along the 1/ω-linear ramp.
    """
    x = np.array([point.x])
    p = np.array([point.p])
    if attached:
        if temp is None:
            temp = params.temp_h if omega == params.omega_h else params.temp_c
        kx, kp, sx, sp = _bath_coefficients(params, bath, omega, temp)
        if bath is BathKind.QUANTUM:
            xi_x = rng.standard_normal((1, 1))
        else:
            xi_x = np.empty((1, 0))
        xi_p = rng.standard_normal((1, 1))
        kernels.heun_isochore(x, p, omega, params.m, kx, kp, sx, sp, dt, xi_x, xi_p)
    else:
        omega_next = omega if omega_next is None else omega_next
        slope = (1.0 / omega_next - 1.0 / omega) / dt
        kernels.verlet_adiabat(x, p, params.m, 1.0 / omega, slope, 0.0, dt, 1)
    if not (math.isfinite(x[0]) and math.isfinite(p[0])):
        raise MCInstabilityError("trajectory left the finite range")
    return PhasePoint(float(x[0]), float(p[0]))


@dataclass(frozen=True)
class _Stroke:
    tag: object
    omega_i: float
    omega_f: float
    tau: float
    n_seg: int  # steps per grid segment
    dt: float
    temp: float


def _plan(params: CycleParams, dt: float, grid: int) -> list[_Stroke]:
    temps = {
        "hot_isochore": params.temp_h,
        "cold_isochore": params.temp_c,
    }
    plan = []
    for tag in CYCLE_ORDER:
        omega_i, omega_f, tau = stroke_endpoints(params, tag)
        if tau == 0:
            plan.append(_Stroke(tag, omega_i, omega_f, 0.0, 0, 0.0, math.nan))
            continue
        n_seg = max(1, math.ceil(tau / (dt * grid)))
        plan.append(_Stroke(tag, omega_i, omega_f, tau, n_seg, tau / (n_seg * grid),
                            temps.get(tag.value, math.nan)))
    return plan


def _grid_times(plan: list[_Stroke], grid: int) -> np.ndarray:
    times = [0.0]
    t0 = 0.0
    for s in plan:
        for k in range(1, grid + 1):
            times.append(t0 + s.tau * k / grid)
        t0 += s.tau
    return np.array(times)


def _run_block(block: int, n: int, params: CycleParams, bath: BathKind, cfg: McConfig,
               plan: list[_Stroke], burn: int, kern) -> tuple[np.ndarray, np.ndarray]:
    """Simulate ``n`` trajectories; return boundary energies and averaged H(t) grid.

    Boundary energies have shape (n, measure_cycles, 5); the grid average
    over measured cycles has shape (n, 4·grid + 1).
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(block,))))
    m = params.m
    grid = cfg.grid_per_stroke
    if bath is BathKind.QUANTUM:
        t0 = float(effective_temperature(params.omega_c, params.temp_c, params.hbar))
    else:
        t0 = params.temp_c
    x = rng.standard_normal(n) * math.sqrt(t0 / (m * params.omega_c**2))
    p = rng.standard_normal(n) * math.sqrt(m * t0)
    bounds = np.empty((n, cfg.measure_cycles, 5))
    h_grid = np.zeros((n, 4 * grid + 1))
    for cycle in range(burn + cfg.measure_cycles):
        measured = cycle >= burn
        mc = cycle - burn
        if measured:
            e = _energy(x, p, params.omega_c, m)
            bounds[:, mc, 0] = e
            h_grid[:, 0] += e
        col = 1
        for k, s in enumerate(plan):
            for seg in range(grid):
                if s.tau > 0:
                    if s.tag.is_adiabat:
                        slope = (1.0 / s.omega_f - 1.0 / s.omega_i) / s.tau
                        kern.verlet_adiabat(x, p, m, 1.0 / s.omega_i, slope,
                                            seg * s.n_seg * s.dt, s.dt, s.n_seg)
                    else:
                        kx, kp, sx, sp = _bath_coefficients(params, bath, s.omega_i, s.temp)
                        for start in range(0, s.n_seg, NOISE_CHUNK):
                            k_steps = min(NOISE_CHUNK, s.n_seg - start)
                            if bath is BathKind.QUANTUM:
                                xi_x = rng.standard_normal((n, k_steps))
                            else:
                                xi_x = np.empty((n, 0))
                            xi_p = rng.standard_normal((n, k_steps))
                            kern.heun_isochore(x, p, s.omega_i, m, kx, kp, sx, sp, s.dt, xi_x, xi_p)
                if measured:
                    h_grid[:, col] += _energy(x, p, s.omega_f if seg == grid - 1 else
                                              _omega_at(s, (seg + 1) / grid), m)
                col += 1
            if measured:
                bounds[:, mc, k + 1] = _energy(x, p, s.omega_f, m)
    h_grid /= cfg.measure_cycles
    return bounds, h_grid


def _omega_at(s: _Stroke, frac: float) -> float:
    if s.omega_i == s.omega_f:
        return s.omega_i
    return 1.0 / (1.0 / s.omega_i + (1.0 / s.omega_f - 1.0 / s.omega_i) * frac)


def _jackknife(samples: np.ndarray) -> McStat:
    """Delete-one-trajectory jackknife for mean, variance and ε = var/mean².

    ``samples`` has shape (n_traj, cycles_per_traj).
    """
    n, k = samples.shape
    shift = float(np.mean(samples))
    c = samples - shift
    s1 = c.sum(axis=1)
    s2 = (c * c).sum(axis=1)
    tot1, tot2 = s1.sum(), s2.sum()
    total = n * k

    def estimates(a1, a2, count):
        mean_c = a1 / count
        var = (a2 / count - mean_c**2) * count / (count - 1)
        mean = shift + mean_c
        with np.errstate(divide="ignore", invalid="ignore"):
            eps = var / mean**2
        return mean, var, eps

    mean, var, eps = estimates(tot1, tot2, total)
    if n < 2:
        return McStat(mean, math.nan, var, math.nan, eps, math.nan)
    loo = estimates(tot1 - s1, tot2 - s2, total - k)
    ses = [math.sqrt((n - 1) / n * float(np.sum((v - v.mean()) ** 2))) for v in loo]
    return McStat(float(mean), ses[0], float(var), ses[1], float(eps), ses[2])


def _thread_count(cfg: McConfig) -> int:
    if cfg.n_threads is not None:
        return max(1, cfg.n_threads)
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run(params: CycleParams, bath: BathKind, cfg: McConfig, backend: str | None = None) -> McEstimate:
    """Estimate cycle statistics from ``cfg.n_traj`` Langevin trajectories.

    Each trajectory starts in equilibrium with the cold bath, runs
    ``burn_in_cycles`` unrecorded cycles, then records H(t1..t5) for
    ``measure_cycles`` cycles.
    """
    validate(params, allow_equal_frequencies=True)
    dt = cfg.dt if cfg.dt is not None else 0.005 * dt_ceiling(params)
    check_dt(params, dt)
    burn = cfg.burn_in_cycles if cfg.burn_in_cycles is not None else default_burn_in(params)
    backend = backend or kernels.BACKEND
    kern = kernels.load_backend(backend)
    plan = _plan(params, dt, cfg.grid_per_stroke)

    sizes = [BLOCK_SIZE] * (cfg.n_traj // BLOCK_SIZE)
    if cfg.n_traj % BLOCK_SIZE:
        sizes.append(cfg.n_traj % BLOCK_SIZE)

    def work(b):
        with np.errstate(over="ignore", invalid="ignore"):
            return _run_block(b, sizes[b], params, bath, cfg, plan, burn, kern)

    threads = _thread_count(cfg)
    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(len(sizes))))
    else:
        results = [work(b) for b in range(len(sizes))]

    bounds = np.concatenate([r[0] for r in results])
    h_grid = np.concatenate([r[1] for r in results])
    ok = np.all(np.isfinite(bounds), axis=(1, 2)) & np.all(np.isfinite(h_grid), axis=1)
    n_aborted = int(cfg.n_traj - ok.sum())
    if n_aborted > MAX_ABORT_FRACTION * cfg.n_traj:
        raise MCInstabilityError(
            f"{n_aborted} of {cfg.n_traj} trajectories diverged; integrator unstable at dt={dt:g}"
        )
    bounds = bounds[ok]
    h_grid = h_grid[ok]

    h1, h2, h3, h4, h5 = (bounds[:, :, i] for i in range(5))
    qh = h3 - h2
    qc = h4 - h5
    series = {
        "w": h3 - h4 - h2 + h1,
        "qh": qh,
        "qc": qc,
        # cycle-closing cold heat, as in the exact statistics
        "sigma": -qh / params.temp_h + (h4 - h1) / params.temp_c,
    }
    stats = {name: _jackknife(series[name]) for name in QUANTITIES}
    n_ok = h_grid.shape[0]
    h_mean = h_grid.mean(axis=0)
    h_se = h_grid.std(axis=0, ddof=1) / math.sqrt(n_ok) if n_ok > 1 else np.full_like(h_mean, math.nan)
    return McEstimate(
        stats=stats,
        times=_grid_times(plan, cfg.grid_per_stroke),
        h_mean=h_mean,
        h_se=h_se,
        n_traj=n_ok,
        n_aborted=n_aborted,
        dt=dt,
        burn_in_cycles=burn,
        measure_cycles=cfg.measure_cycles,
        backend=backend,
    )
