"""Compare the compiled and numpy Langevin kernels.

    python3 benchmarks/bench_kernels.py [--n 4096] [--steps 256] [--repeat 5] [--full]

Kernel timings use pre-drawn noise so only the integrator is measured.
``--full`` also times a short end-to-end Monte Carlo run per backend.
"""

import argparse
import time

import numpy as np

from ottotur import BathKind, CycleParams
from ottotur.kernels import available_backends, load_backend
from ottotur.montecarlo import McConfig, run


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels(n, steps, repeat):
    rng = np.random.default_rng(0)
    x0 = rng.standard_normal(n)
    p0 = rng.standard_normal(n)
    xi_x = rng.standard_normal((n, steps))
    xi_p = rng.standard_normal((n, steps))
    rows = []
    for name in available_backends():
        mod = load_backend(name)

        def iso():
            x, p = x0.copy(), p0.copy()
            mod.heun_isochore(x, p, 1.0, 1.0, 0.25, 0.25, 0.3, 0.3, 0.005, xi_x, xi_p)

        def adi():
            x, p = x0.copy(), p0.copy()
            mod.verlet_adiabat(x, p, 1.0, 1.0, -0.1, 0.0, 0.005, steps)

        rows.append((name, best_of(iso, repeat), best_of(adi, repeat)))
    return rows


def bench_full(n_traj):
    params = CycleParams(0.724, 0.620, 0.356, 0.286, 0.25, 1.25, 1.25, 1.25, 1.25)
    cfg = McConfig(n_traj=n_traj, seed=1)
    out = []
    for name in available_backends():
        t0 = time.perf_counter()
        est = run(params, BathKind.CLASSICAL, cfg, backend=name)
        out.append((name, time.perf_counter() - t0, est["w"].mean))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4096, help="trajectories per call")
    ap.add_argument("--steps", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--n-traj", type=int, default=8192)
    args = ap.parse_args()

    rows = bench_kernels(args.n, args.steps, args.repeat)
    work = args.n * args.steps
    print(f"kernels: {args.n} trajectories x {args.steps} steps, best of {args.repeat}")
    print(f"{'backend':<8} {'heun [s]':>10} {'ns/step':>9} {'verlet [s]':>11} {'ns/step':>9}")
    for name, t_iso, t_adi in rows:
        print(f"{name:<8} {t_iso:10.4f} {1e9 * t_iso / work:9.2f} {t_adi:11.4f} {1e9 * t_adi / work:9.2f}")
    if len(rows) == 2:
        (_, ci, ca), (_, pi, pa) = rows
        print(f"speedup: heun {pi / ci:.1f}x, verlet {pa / ca:.1f}x")
    else:
        print("compiled extension not built; only the numpy fallback was timed")

    if args.full:
        print(f"\nfull run: {args.n_traj} trajectories, classical bath")
        for name, secs, w in bench_full(args.n_traj):
            print(f"{name:<8} {secs:8.2f} s   <W> = {w:.6f}")


if __name__ == "__main__":
    main()
