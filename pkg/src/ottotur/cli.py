"""Command-line interface: ``ottotur <command> [flags]``.

Every command writes CSV to stdout (or ``--out``), preceded by ``#`` lines
echoing the tool version and the effective configuration. Floats use 17
significant digits so values round-trip exactly.

Exit codes: 0 ok, 2 invalid parameters, 3 divergent cycle, 4 Monte Carlo
instability, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from contextlib import nullcontext

from . import __version__
from .model import (
    PARAM_FIELDS,
    BathKind,
    CycleParams,
    DivergentError,
    MCInstabilityError,
    ValidationError,
    validate,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGENT = 3
EXIT_MC = 4
EXIT_USAGE = 64

# flag name -> CycleParams field
PARAM_FLAGS = {
    "omega-h": "omega_h",
    "omega-c": "omega_c",
    "Th": "temp_h",
    "Tc": "temp_c",
    "gamma": "gamma",
    "tau-ch": "tau_ch",
    "tau-h": "tau_h",
    "tau-hc": "tau_hc",
    "tau-c": "tau_c",
    "m": "m",
    "hbar": "hbar",
}
DEFAULTS = {"m": 1.0, "hbar": 1.0}
DURATIONS = ("tau_ch", "tau_h", "tau_hc", "tau_c")

QTY = ("w", "qh", "qc", "sigma")
CYCLE_COLUMNS = (
    ["bath", *PARAM_FIELDS]
    + [f"{k}_{q}" for q in QTY for k in ("mean", "var", "eps")]
    + ["cov_qh_qc", "q_w", "q_qh", "q_qc", "q_sigma", "phase_over_pi", "machine",
       "efficiency", "power", "spectral_radius"]
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        kw.setdefault("allow_abbrev", False)
        super().__init__(*a, **kw)

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) or hasattr(value, "dtype"):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if hasattr(value, "value"):  # enums
        return str(value.value)
    if value is None:
        return ""
    return str(value)


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment. Keys may use - or _."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("_", "-")] = value
    return out


def _add_params(p: argparse.ArgumentParser, durations: bool = True) -> None:
    g = p.add_argument_group("cycle parameters")
    g.add_argument("--bath", choices=["quantum", "classical", "both"])
    for flag in PARAM_FLAGS:
        if not durations and flag.startswith("tau"):
            continue
        g.add_argument(f"--{flag}", type=float, dest=PARAM_FLAGS[flag], metavar="X")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--out", help="write CSV here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ottotur", description="Finite-time harmonic Otto cycle statistics.")
    parser.add_argument("--version", action="version", version=f"ottotur {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("quasistatic", help="closed-form quasistatic statistics")
    _add_params(p, durations=False)
    _add_common(p)

    p = sub.add_parser("cycle", help="exact finite-time statistics of one cycle")
    _add_params(p)
    _add_common(p)

    p = sub.add_parser("trajectory", help="moments along one steady-state period")
    _add_params(p)
    p.add_argument("--n-grid", type=int, help="points per stroke (default 32)")
    _add_common(p)

    p = sub.add_parser("sweep", help="random-parameter TUR scatter")
    p.add_argument("--n-draws", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--stroke-time", type=float, help="common duration of all four strokes")
    p.add_argument("--upper", type=float, help="upper bound of the uniform draws")
    p.add_argument("--quasistatic", action="store_true", default=None)
    p.add_argument("--m", type=float)
    p.add_argument("--hbar", type=float)
    _add_common(p)

    p = sub.add_parser("qscan", help="Q factors against the accumulated phase")
    _add_params(p)
    p.add_argument("--phase-min", type=float, help="lowest Δθ_cyc/π")
    p.add_argument("--phase-max", type=float, help="highest Δθ_cyc/π")
    p.add_argument("--n-points", type=int)
    _add_common(p)

    p = sub.add_parser("crossover", help="isochore time of the quantum/classical precision crossover")
    _add_params(p)
    p.add_argument("--gammas", help="comma-separated γ values (default: --gamma)")
    p.add_argument("--quantity", choices=QTY)
    _add_common(p)

    p = sub.add_parser("mc", help="Langevin Monte Carlo estimate with exact reference")
    _add_params(p)
    p.add_argument("--n-traj", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--measure-cycles", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-per-stroke", type=int)
    p.add_argument("--trajectory", action="store_true", default=None,
                   help="emit the ⟨H(t)⟩ grid instead of the statistics table")
    p.add_argument("--backend", choices=["cython", "python"])
    _add_common(p)
    return parser


def _merge_config(args: argparse.Namespace) -> None:
    if not args.config:
        return
    cfg = read_config(args.config)
    for key, raw in cfg.items():
        dest = PARAM_FLAGS.get(key, key.replace("-", "_"))
        if not hasattr(args, dest) or dest in ("config", "out", "command"):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, dest) is not None:
            continue  # flag wins
        setattr(args, dest, _coerce(dest, raw))


def _coerce(dest: str, raw: str):
    ints = {"n_grid", "n_draws", "seed", "n_points", "n_traj", "burn_in", "measure_cycles",
            "grid_per_stroke"}
    bools = {"quasistatic", "trajectory"}
    strs = {"bath", "gammas", "quantity", "backend"}
    try:
        if dest in ints:
            return int(raw)
        if dest in bools:
            return raw.lower() in ("1", "true", "yes", "on")
        if dest in strs:
            return raw
        return float(raw)
    except ValueError:
        raise UsageError(f"bad value {raw!r} for {dest}") from None


def _params(args, unused=()) -> CycleParams:
    """Build CycleParams from flags; names in ``unused`` get a placeholder."""
    values = {}
    missing = []
    for flag, name in PARAM_FLAGS.items():
        v = getattr(args, name, None)
        if v is None and name in unused:
            v = 1.0
        if v is None:
            v = DEFAULTS.get(name)
        if v is None:
            missing.append(f"--{flag}")
        values[name] = v
    if missing:
        raise UsageError("missing required parameters: " + " ".join(missing))
    return validate(CycleParams(**values))


def _baths(args) -> list[BathKind]:
    if args.bath is None:
        raise UsageError("missing required parameter: --bath")
    if args.bath not in ("quantum", "classical", "both"):
        raise UsageError(f"unknown bath {args.bath!r}")
    if args.bath == "both":
        return [BathKind.QUANTUM, BathKind.CLASSICAL]
    return [BathKind.parse(args.bath)]


def _opt(args, name, default):
    v = getattr(args, name, None)
    return default if v is None else v


class _Writer:
    def __init__(self, command: str, meta: dict):
        self.buf = io.StringIO()
        self.buf.write(f"# ottotur {__version__}\n# command = {command}\n")
        for k, v in meta.items():
            self.buf.write(f"# {k} = {fmt(v)}\n")
        self.csv = csv.writer(self.buf, lineterminator="\n")

    def header(self, cols):
        self.csv.writerow(cols)

    def row(self, values):
        self.csv.writerow([fmt(v) for v in values])

    def comment(self, text):
        self.buf.write(f"# {text}\n")


def _param_meta(params: CycleParams, skip=()) -> dict:
    return {k: v for k, v in params.as_dict().items() if k not in skip}


def cmd_quasistatic(args) -> _Writer:
    from .quasistatic import quasistatic_stats

    params = _params(args, unused=DURATIONS)
    baths = _baths(args)
    w = _Writer("quasistatic", {"bath": args.bath, **_param_meta(params, DURATIONS)})
    fields = [f for f in PARAM_FIELDS if f not in DURATIONS]
    w.header(["bath", *fields]
             + [f"{k}_{q}" for q in QTY for k in ("mean", "var")]
             + ["eps", "u_factor", "q", "eta_otto", "delta_otto", "eta_carnot", "machine"])
    for bath in baths:
        s = quasistatic_stats(params, bath)
        w.row([bath, *(getattr(params, f) for f in fields)]
              + [getattr(s, f"{k}_{q}") for q in QTY for k in ("mean", "var")]
              + [s.eps, s.u_factor, s.q, s.eta_otto, s.delta_otto, s.eta_carnot, s.machine])
    return w


def _cycle_row(params, bath, s):
    out = [bath, *(getattr(params, f) for f in PARAM_FIELDS)]
    for q in QTY:
        out += [s.mean(q), s.var(q), s.eps(q)]
    out += [s.cov_qh_qc, s.q_w, s.q_qh, s.q_qc, s.q_sigma, s.phase / math.pi, s.machine,
            s.efficiency, s.power, s.spectral_radius]
    return out


def cmd_cycle(args) -> _Writer:
    from .correlations import thermo_stats

    params = _params(args)
    baths = _baths(args)
    rows = [_cycle_row(params, b, thermo_stats(params, b)) for b in baths]
    w = _Writer("cycle", {"bath": args.bath, **_param_meta(params)})
    w.header(CYCLE_COLUMNS)
    for r in rows:
        w.row(r)
    return w


def cmd_trajectory(args) -> _Writer:
    from .limit_cycle import trajectory

    params = _params(args)
    baths = _baths(args)
    n_grid = _opt(args, "n_grid", 32)
    trajs = [(b, trajectory(params, b, n_grid)) for b in baths]
    w = _Writer("trajectory", {"bath": args.bath, "n_grid": n_grid, **_param_meta(params)})
    w.header(["bath", "t", "omega", "h", "l", "d", "kinetic", "potential"])
    for bath, tr in trajs:
        for t, s, ke, pe in zip(tr.times, tr.states, tr.kinetic, tr.potential):
            w.row([bath, t, s.omega, s.h, s.l, s.d, ke, pe])
    return w


def cmd_sweep(args) -> _Writer:
    from .analysis import SweepSpec, tur_scatter

    tau = _opt(args, "stroke_time", 1.25)
    spec = SweepSpec(
        n_draws=_opt(args, "n_draws", 500),
        seed=_opt(args, "seed", 0),
        gamma=_opt(args, "gamma", 0.25),
        stroke_times=(tau,) * 4,
        upper=_opt(args, "upper", 1.0),
        quasistatic=bool(_opt(args, "quasistatic", False)),
        m=_opt(args, "m", 1.0),
        hbar=_opt(args, "hbar", 1.0),
    )
    rows = tur_scatter(spec)
    w = _Writer("sweep", {
        "n_draws": spec.n_draws, "seed": spec.seed, "gamma": spec.gamma, "stroke_time": tau,
        "upper": spec.upper, "quasistatic": spec.quasistatic, "m": spec.m, "hbar": spec.hbar,
    })
    w.header(["index", "bath", "omega_h", "omega_c", "temp_h", "temp_c", "divergent", "machine"]
             + [f"mean_{q}" for q in QTY] + [f"eps_{q}" for q in QTY]
             + ["tur_bound", "classical_quasistatic"] + [f"ratio_{q}" for q in QTY])
    for row in rows:
        p = row.params
        for bath in spec.baths:
            s = row.stats[bath]
            lead = [row.index, bath, p.omega_h, p.omega_c, p.temp_h, p.temp_c, row.divergent[bath]]
            ratios = [row.ratios[q] for q in QTY]
            if s is None:
                w.row(lead + [None] * 11 + ratios)
                continue
            sigma = s.mean("sigma")
            eps = [s.eps_of(q) if hasattr(s, "eps_of") else s.eps(q) for q in QTY]
            bound = 2.0 / sigma if sigma != 0 else math.nan
            w.row(lead + [s.machine] + [s.mean(q) for q in QTY] + eps
                  + [bound, 1.0 + bound] + ratios)
    return w


def cmd_qscan(args) -> _Writer:
    from .analysis import q_factor_scan

    params = _params(args)
    baths = _baths(args)
    lo, hi = _opt(args, "phase_min", 0.5), _opt(args, "phase_max", 4.0)
    n = _opt(args, "n_points", 351)
    rows = q_factor_scan(params, (lo, hi), n, baths)
    w = _Writer("qscan", {"bath": args.bath, "phase_min": lo, "phase_max": hi, "n_points": n,
                          **_param_meta(params)})
    w.header(["phase_over_pi", "bath", "tau_cyc", "divergent", "machine"]
             + [f"q_{q}" for q in QTY] + [f"mean_{q}" for q in QTY])
    for r in rows:
        for bath in baths:
            s = r.row.stats[bath]
            lead = [r.phase_over_pi, bath, r.row.params.tau_cyc, r.row.divergent[bath]]
            if s is None:
                w.row(lead + [None] * 9)
            else:
                w.row(lead + [s.machine] + [s.q(q) for q in QTY] + [s.mean(q) for q in QTY])
    return w


def cmd_crossover(args) -> _Writer:
    from .analysis import crossover_tau

    if args.gammas:
        try:
            gammas = [float(g) for g in args.gammas.split(",") if g.strip()]
        except ValueError:
            raise UsageError(f"bad --gammas list {args.gammas!r}") from None
    elif args.gamma is not None:
        gammas = [args.gamma]
    else:
        raise UsageError("give --gammas or --gamma")
    if args.gamma is None:
        args.gamma = gammas[0]
    params = _params(args, unused=("tau_h", "tau_c"))
    quantity = _opt(args, "quantity", "w")
    results = [crossover_tau(params, g, quantity=quantity) for g in gammas]
    w = _Writer("crossover", {"gammas": ",".join(fmt(g) for g in gammas), "quantity": quantity,
                              **_param_meta(params, ("gamma", "tau_h", "tau_c"))})
    w.header(["gamma", "found", "tau_star", "window_end", "n_evaluated", "n_divergent"])
    for r in results:
        w.row([r.gamma, r.found, r.tau_star, r.window_end, r.n_evaluated, r.n_divergent])
    return w


def cmd_mc(args) -> _Writer:
    from .correlations import thermo_stats
    from .limit_cycle import boundary_vectors
    from .montecarlo import McConfig, run
    from .generators import partial_stroke, stroke_endpoints
    from .model import CYCLE_ORDER

    params = _params(args)
    baths = _baths(args)
    if len(baths) != 1:
        raise UsageError("mc takes a single --bath")
    bath = baths[0]
    cfg = McConfig(
        n_traj=_opt(args, "n_traj", 100_000),
        dt=args.dt,
        burn_in_cycles=args.burn_in,
        measure_cycles=_opt(args, "measure_cycles", 1),
        seed=_opt(args, "seed", 0),
        grid_per_stroke=_opt(args, "grid_per_stroke", 4),
    )
    est = run(params, bath, cfg, backend=args.backend)
    try:
        exact = thermo_stats(params, bath)
        vecs = boundary_vectors(params, bath)
    except DivergentError:
        exact = vecs = None
    meta = {"bath": args.bath, **_param_meta(params), "n_traj": cfg.n_traj, "seed": cfg.seed,
            "dt": est.dt, "burn_in_cycles": est.burn_in_cycles,
            "measure_cycles": est.measure_cycles, "n_aborted": est.n_aborted}
    w = _Writer("mc", meta)
    if args.trajectory:
        ref = []
        if vecs is not None:
            ref.append(vecs[0][0])
            g = cfg.grid_per_stroke
            for k, tag in enumerate(CYCLE_ORDER):
                tau = stroke_endpoints(params, tag)[2]
                for j in range(1, g + 1):
                    ref.append((partial_stroke(params, bath, tag, tau * j / g).matrix @ vecs[k])[0])
        w.header(["t", "h_mc", "h_se", "h_exact"])
        for i, t in enumerate(est.times):
            w.row([t, est.h_mean[i], est.h_se[i], ref[i] if ref else None])
        return w
    w.header(["quantity", "mean", "mean_se", "var", "var_se", "eps", "eps_se",
              "exact_mean", "exact_var", "exact_eps"])
    for q in QTY:
        s = est[q]
        ex = [exact.mean(q), exact.var(q), exact.eps(q)] if exact else [None] * 3
        w.row([q, s.mean, s.mean_se, s.var, s.var_se, s.eps, s.eps_se, *ex])
    return w


COMMANDS = {
    "quasistatic": cmd_quasistatic,
    "cycle": cmd_cycle,
    "trajectory": cmd_trajectory,
    "sweep": cmd_sweep,
    "qscan": cmd_qscan,
    "crossover": cmd_crossover,
    "mc": cmd_mc,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        _merge_config(args)
        writer = COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ottotur: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"ottotur: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DivergentError as exc:
        print(f"ottotur: divergent cycle: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except MCInstabilityError as exc:
        print(f"ottotur: Monte Carlo instability: {exc}", file=sys.stderr)
        return EXIT_MC

    text = writer.buf.getvalue()
    with (open(args.out, "w", encoding="utf-8", newline="") if args.out else nullcontext(sys.stdout)) as fh:
        fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
