import math
import types
import warnings

import numpy as np
import pytest

import oracle
from conftest import C, Q, tur_violation_point, degenerate, reference_engine
from ottotur import kernels
from ottotur.correlations import quantity_coefficients, thermo_stats
from ottotur.model import CycleParams, MCInstabilityError, ValidationError
from ottotur.montecarlo import (
    McAccuracyWarning,
    McConfig,
    PhasePoint,
    check_dt,
    default_burn_in,
    dt_ceiling,
    run,
    step,
)


def _energy(x, p, w, m=1.0):
    return p * p / (2 * m) + 0.5 * m * w * w * x * x


def test_config_validation():
    with pytest.raises(ValidationError):
        McConfig(n_traj=0)
    with pytest.raises(ValidationError):
        McConfig(dt=-1.0)
    with pytest.raises(ValidationError):
        McConfig(measure_cycles=0)


def test_dt_limits():
    p = tur_violation_point()
    limit = dt_ceiling(p)
    assert limit == pytest.approx(1 / 0.724)
    check_dt(p, 0.005 * limit)
    with pytest.warns(McAccuracyWarning):
        check_dt(p, 0.05 * limit)
    with pytest.raises(ValidationError):
        check_dt(p, 0.2 * limit)


def test_default_burn_in():
    assert default_burn_in(tur_violation_point()) == 32
    assert default_burn_in(reference_engine().replace(gamma=100.0)) == 20


def test_undamped_step_conserves_energy():
    p = reference_engine().replace(gamma=0.0)
    rng = np.random.default_rng(0)
    pt = PhasePoint(0.8, -0.3)
    e0 = _energy(pt.x, pt.p, 1.0)
    dt = 1e-3
    for _ in range(int(2 * math.pi / dt)):
        pt = step(pt, 1.0, p, C, dt, rng)
    assert abs(_energy(pt.x, pt.p, 1.0) - e0) < 10 * dt**2


def test_adiabat_step_follows_ramp():
    p = reference_engine()
    rng = np.random.default_rng(0)
    a = step(PhasePoint(0.5, 0.2), 1.0, p, C, 0.01, rng, attached=False, omega_next=1.001)
    b = step(PhasePoint(0.5, 0.2), 1.0, p, C, 0.01, rng, attached=False, omega_next=1.001)
    assert a == b  # deterministic, no noise drawn on adiabats


def _long_run(params, bath, omega, temp, n=4096, n_steps=6000, dt=0.01, seed=3):
    rng = np.random.default_rng(seed)
    x = np.zeros(n)
    p = np.zeros(n)
    g, m = params.gamma, params.m
    if bath is Q:
        te = 0.5 * omega / math.tanh(0.5 * omega / temp)
        coeffs = (g / 4, g / 4, math.sqrt(g * te / (4 * m * omega**2)), math.sqrt(m * g * te / 4))
    else:
        coeffs = (0.0, g / 4, 0.0, math.sqrt(m * g * temp / 4))
    for _ in range(n_steps // 500):
        xi_x = rng.standard_normal((n, 500)) if bath is Q else np.empty((n, 0))
        kernels.heun_isochore(x, p, omega, m, *coeffs, dt, xi_x, rng.standard_normal((n, 500)))
    return x, p


def test_classical_equipartition():
    params = reference_engine().replace(gamma=2.0)
    x, p = _long_run(params, C, 1.0, 0.7)
    ke = p * p / 2
    assert abs(ke.mean() - 0.35) < 3 * ke.std() / math.sqrt(len(ke))


def test_quantum_bath_reaches_effective_temperature():
    params = reference_engine().replace(gamma=2.0)
    x, p = _long_run(params, Q, 1.0, 0.3)
    h = _energy(x, p, 1.0)
    te = 0.5 / math.tanh(0.5 / 0.3)
    assert abs(h.mean() - te) < 3 * h.std() / math.sqrt(len(h))


def test_step_matches_kernel_and_respects_bath_choice():
    params = reference_engine()
    rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
    a = step(PhasePoint(0.1, 0.2), params.omega_h, params, Q, 0.01, rng1)
    x, p = np.array([0.1]), np.array([0.2])
    te = 0.6 / math.tanh(0.3)
    xi_x = rng2.standard_normal((1, 1))
    xi_p = rng2.standard_normal((1, 1))
    kernels.heun_isochore(x, p, 1.2, 1.0, 0.25, 0.25, math.sqrt(te / (4 * 1.44)),
                          math.sqrt(te / 4), 0.01, xi_x, xi_p)
    assert (a.x, a.p) == (x[0], p[0])


def test_step_abort_on_nonfinite():
    with pytest.raises(MCInstabilityError):
        step(PhasePoint(math.inf, 0.0), 1.0, reference_engine(), C, 0.01, np.random.default_rng(0))


SMALL = McConfig(n_traj=600, seed=11, burn_in_cycles=3)


def test_reproducible_and_thread_independent():
    p = reference_engine()
    a = run(p, Q, SMALL)
    b = run(p, Q, SMALL)
    c = run(p, Q, McConfig(n_traj=600, seed=11, burn_in_cycles=3, n_threads=2))
    assert a.stats == b.stats == c.stats
    assert np.array_equal(a.h_mean, c.h_mean)
    d = run(p, Q, McConfig(n_traj=600, seed=12, burn_in_cycles=3))
    assert d.stats != a.stats


@pytest.mark.skipif("cython" not in kernels.available_backends(), reason="extension not built")
@pytest.mark.parametrize("bath", [Q, C])
def test_backends_agree_bitwise(bath):
    p = reference_engine()
    a = run(p, bath, SMALL, backend="cython")
    b = run(p, bath, SMALL, backend="python")
    assert a.stats == b.stats
    assert np.array_equal(a.h_mean, b.h_mean)
    assert a.backend == "cython" and b.backend == "python"


def test_kernel_backends_agree_directly():
    rng = np.random.default_rng(1)
    n, k = 50, 40
    xi_x, xi_p = rng.standard_normal((n, k)), rng.standard_normal((n, k))
    outs = []
    for name in kernels.available_backends():
        mod = kernels.load_backend(name)
        x, p = np.linspace(-1, 1, n), np.linspace(2, 0, n)
        mod.heun_isochore(x, p, 1.3, 1.1, 0.2, 0.3, 0.4, 0.5, 0.01, xi_x, xi_p)
        mod.verlet_adiabat(x, p, 1.1, 1 / 1.3, 0.05, 0.2, 0.01, 37)
        outs.append((x, p))
    for x, p in outs[1:]:
        assert np.array_equal(x, outs[0][0]) and np.array_equal(p, outs[0][1])


def test_standard_error_scaling_on_doubling():
    p = reference_engine()
    a = run(p, C, McConfig(n_traj=2000, seed=1, burn_in_cycles=5))
    b = run(p, C, McConfig(n_traj=4000, seed=2, burn_in_cycles=5))
    for q in ("w", "qh"):
        ratio = b[q].mean_se / a[q].mean_se
        assert 0.6 < ratio < 0.82  # 1/√2 ≈ 0.707


def test_degenerate_cycle_has_no_mean_work():
    est = run(degenerate(), C, McConfig(n_traj=2000, seed=4, burn_in_cycles=2))
    assert abs(est["w"].mean) < 3 * est["w"].mean_se


def _variances(means, second, params):
    coeffs = quantity_coefficients(params)
    return {q: coeffs[q] @ second @ coeffs[q] - (coeffs[q] @ means) ** 2
            for q in ("w", "qh", "qc", "sigma")}


@pytest.mark.parametrize("bath", [Q, C])
def test_moderate_sample_agrees_with_exact(bath):
    p = reference_engine()
    est = run(p, bath, McConfig(n_traj=8192, seed=21))
    ex = thermo_stats(p, bath)
    # the quasiclassical model's energy products are Gaussian (Wick) ones,
    # which exceed symmetrized quantum products by the zero-point term, so
    # quantum-bath variances are checked against the quasiclassical oracle
    m, second, _ = oracle.cycle_statistics(p, bath is Q)
    ref_var = _variances(m, second, p)
    for q in ("w", "qh", "qc", "sigma"):
        s = est[q]
        assert abs(s.mean - ex.mean(q)) < 3.5 * s.mean_se, q
        assert abs(s.var - ref_var[q]) < 3.5 * s.var_se, q
    if bath is C:
        assert ref_var["w"] == pytest.approx(ex.var_w, rel=1e-10)
    else:
        assert abs(ref_var["w"] - ex.var_w) > 0.05 * ex.var_w


def test_multiple_measure_cycles_pool_samples():
    p = reference_engine()
    est = run(p, C, McConfig(n_traj=500, seed=5, measure_cycles=3, burn_in_cycles=5))
    assert est.measure_cycles == 3
    ex = thermo_stats(p, C)
    assert abs(est["qh"].mean - ex.mean_qh) < 4 * est["qh"].mean_se


def test_grid_times_cover_cycle():
    est = run(reference_engine(), C, McConfig(n_traj=50, seed=0, burn_in_cycles=0, grid_per_stroke=3))
    assert len(est.times) == 13
    assert est.times[-1] == pytest.approx(reference_engine().tau_cyc)


def test_abort_fraction_raises(monkeypatch):
    real = kernels.load_backend("python")

    def heun(x, p, *args):
        real.heun_isochore(x, p, *args)
        x[::20] = np.nan  # 5% of trajectories blow up

    stub = types.SimpleNamespace(heun_isochore=heun, verlet_adiabat=real.verlet_adiabat)
    monkeypatch.setattr(kernels, "load_backend", lambda name: stub)
    with pytest.raises(MCInstabilityError):
        run(reference_engine(), C, McConfig(n_traj=200, seed=0, burn_in_cycles=0))


def test_small_abort_fraction_is_reported(monkeypatch):
    real = kernels.load_backend("python")

    def heun(x, p, *args):
        real.heun_isochore(x, p, *args)
        if len(x) > 1000:
            x[7] = np.nan

    stub = types.SimpleNamespace(heun_isochore=heun, verlet_adiabat=real.verlet_adiabat)
    monkeypatch.setattr(kernels, "load_backend", lambda name: stub)
    est = run(reference_engine(), C, McConfig(n_traj=1500, seed=0, burn_in_cycles=0))
    assert est.n_aborted == 1 and est.n_traj == 1499


def test_halving_dt_stays_consistent():
    """Default dt and dt/2 both sit within sampling error of the exact value."""
    p = reference_engine()
    ex = thermo_stats(p, Q)
    base = run(p, Q, McConfig(n_traj=4096, seed=8, burn_in_cycles=6))
    half = run(p, Q, McConfig(n_traj=4096, seed=8, burn_in_cycles=6, dt=base.dt / 2))
    for q in ("w", "qh"):
        se = math.hypot(base[q].mean_se, half[q].mean_se)
        assert abs(base[q].mean - half[q].mean) < 3 * se
        assert abs(base[q].mean - ex.mean(q)) < 3 * base[q].mean_se
