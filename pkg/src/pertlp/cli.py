"""Command-line entry point: ``pertlp <verb> [options]``."""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments as ex
from .generators import generate_ts1, generate_ts2, read_instance, write_instance
from .ipm import SolveOptions, solve
from .mps import MPSParseError, load_mps
from .problem import InfeasibleError, StandardLP, ensure_full_rank

EXIT_OK, EXIT_FAILURES, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def _grid(text: str) -> tuple[int, ...]:
    """``"1:18"`` (inclusive range) or ``"8,9,10"``."""
    try:
        if ":" in text:
            lo, hi = (int(t) for t in text.split(":"))
            return tuple(range(lo, hi + 1))
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def _range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected LO,HI") from None
    return lo, hi


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="first random seed")
    p.add_argument("--count", type=int, default=10, help="number of random problems")
    p.add_argument("--kind", choices=("ts1", "ts2"), default="ts1", help="random test set")
    p.add_argument("--m-range", type=_range, default=None, help="open row-count interval LO,HI")
    p.add_argument("--mps", default=None, help="MPS file or directory instead of random problems")
    p.add_argument("--cutoff", type=float, default=1e-5, help="activity threshold C")
    p.add_argument("--lambda0", type=float, default=1e-2, help="initial perturbation")
    p.add_argument("--eta", type=float, default=1.0, help="shrink factor for positive iterates")
    p.add_argument("--zeta", type=float, default=0.5, help="shrink weight for negative iterates")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--out", default=None, help="output directory or file")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--strict", action="store_true", help="exit 1 if any problem fails")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pertlp", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen", help="write random instances as text files")
    _common(g)

    s = sub.add_parser("solve", help="solve one MPS or instance file and print a trace")
    _common(s)
    s.add_argument("problem", help="MPS file or generated instance text file")
    s.add_argument("--unperturbed", action="store_true", help="run without perturbations")
    s.add_argument("--mu-cap", type=float, default=None)
    s.add_argument("--relres", type=float, default=1e-8)

    r = sub.add_parser("ratios", help="prediction ratios along the iterations")
    _common(r)
    r.add_argument("--grid", type=_grid, default=tuple(range(1, 19)))

    rn = sub.add_parser("ratios-netlib", help="prediction ratios over the last ten iterations")
    _common(rn)

    c = sub.add_parser("crossover", help="simplex iterations after crossover")
    _common(c)
    c.add_argument("--mu-cap", type=float, default=1e-3)
    c.add_argument("--relres-cap", type=float, default=None,
                   help="also stop the perturbed run below this relative residual")

    t = sub.add_parser("thresholds", help="threshold report for the two-variable example")
    t.add_argument("--samples", type=int, default=2000)
    t.add_argument("--seed", type=int, default=0)
    return parser


def _options(args) -> SolveOptions:
    try:
        return SolveOptions(lambda0=args.lambda0, eta=args.eta, zeta=args.zeta,
                            cutoff=args.cutoff, max_iters=args.max_iters)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _source(args) -> ex.ProblemSource:
    try:
        if args.mps:
            return ex.ProblemSource("MPS", path=args.mps)
        kw = {"m_range": args.m_range} if args.m_range else {}
        return ex.ProblemSource(args.kind.upper(), args.count, args.seed, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_gen(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    gen = generate_ts1 if args.kind == "ts1" else generate_ts2
    kw = {"m_range": args.m_range} if args.m_range else {}
    for i in range(args.count):
        inst = gen(args.seed + i, **kw)
        path = out / f"{args.kind}_{args.seed + i}.txt"
        write_instance(inst, path)
        print(f"{path}  m={inst.lp.m} n={inst.lp.n}")
    return EXIT_OK


def _load_problem(path: str) -> StandardLP:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"no such file: {path}")
    if p.suffix.lower() == ".mps":
        return load_mps(p)
    return read_instance(p).lp


def _cmd_solve(args) -> int:
    try:
        lp = ensure_full_rank(_load_problem(args.problem))
    except (MPSParseError, InfeasibleError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    opts = _options(args)
    opts = replace(opts, mu_cap=args.mu_cap, relres_tol=args.relres)
    if args.unperturbed:
        opts = opts.unperturbed()
    trace = solve(lp, opts)
    text = trace.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    final = trace.final
    print(f"status={trace.status.value} iterations={len(trace)} objective={lp.objective(final.x)!r} "
          f"m={lp.m} n={lp.n} active={len(trace.partition_at(len(trace)).active)}",
          file=sys.stderr)
    if trace.message:
        print(trace.message, file=sys.stderr)
    ok = trace.status.value in ("relres", "mu_cap", "iter_exact")
    return EXIT_FAILURES if args.strict and not ok else EXIT_OK


def _cmd_experiment(args, suite: ex.Suite) -> int:
    opts = _options(args)
    try:
        cfg = ex.ExperimentConfig(
            suite=suite, source=_source(args),
            grid=getattr(args, "grid", tuple(range(1, 19))),
            mu_cap=getattr(args, "mu_cap", 1e-3),
            relres_cap=getattr(args, "relres_cap", None),
            solve_options=opts, output_dir=args.out, jobs=args.jobs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        report = ex.run(cfg)
    except (MPSParseError, InfeasibleError) as exc:
        raise ConfigError(str(exc)) from exc
    if args.out:
        for path in ex.emit_report(report, args.out):
            print(f"wrote {path}", file=sys.stderr)
    _print_aggregates(report)
    return EXIT_FAILURES if args.strict and report.failures else EXIT_OK


def _print_aggregates(report: ex.ExperimentReport) -> None:
    cols = report.agg_columns
    print("\t".join(cols))
    for a in report.aggregates:
        cells = []
        for c in cols:
            v = a[c]
            cells.append(f"{v:.4g}" if isinstance(v, float) and not math.isnan(v) else str(v))
        print("\t".join(cells))
    print(f"# problems with failures: {report.failures} row(s)", file=sys.stderr)


def threshold_report(samples: int = 2000, seed: int = 0) -> str:
    """Text table for ``min x1 + 2 x2  s.t.  x1 + x2 = 1, x >= 0`` with ``lam = 0.01 (1, 5)``."""
    from .theory import TheoryConstants, estimate_tau, mu_thresholds, psi_values, solution_epsilon
    lp = StandardLP([[1.0, 1.0]], [1.0], [1.0, 2.0])
    lam = 0.01 * np.array([1.0, 5.0])
    x_star, y_star, s_star = np.array([1.0, 0.0]), np.array([1.0]), np.array([0.0, 1.0])
    trace = solve(lp, SolveOptions(lambda0=lam, shrink=False, relres_tol=1e-10))
    x_l, y_l, s_l = trace.final.x, trace.final.y, trace.final.s
    eps = solution_epsilon(x_star, s_star)
    eps_l = solution_epsilon(x_l + lam, s_l + lam)
    psi_p, _ = psi_values(x_star, s_star)
    tau_p, tau_d = estimate_tau(lp, samples, x_star=x_star, y_star=y_star, lam=lam, seed=seed)
    tc = TheoryConstants(eps, eps_l, psi_p, tau_p, tau_d, 0.01, lp.n)
    mu_l, mu_bar, mu_max = mu_thresholds(tc)
    lines = [
        ("perturbed solution x", np.array2string(x_l, precision=6)),
        ("perturbed solution y", np.array2string(y_l, precision=6)),
        ("perturbed solution s", np.array2string(s_l, precision=6)),
        ("epsilon (original)", f"{eps:.6g}"),
        ("epsilon (perturbed)", f"{eps_l:.6g}"),
        ("psi_p", f"{psi_p:.6g}"),
        ("tau_p estimate", f"{tau_p:.4f}"),
        ("tau_d estimate", f"{tau_d:.4f}"),
        ("rho", f"{tc.rho:.4f}"),
        ("mu_max_lambda", f"{mu_l:.4g}"),
        ("mu_bar_max_lambda (gamma=0.01)", f"{mu_bar:.4g}"),
        ("mu_max (gamma=0.01)", f"{mu_max:.4g}"),
    ]
    width = max(len(k) for k, _ in lines)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "gen":
            return _cmd_gen(args)
        if args.verb == "solve":
            return _cmd_solve(args)
        if args.verb == "thresholds":
            sys.stdout.write(threshold_report(args.samples, args.seed))
            return EXIT_OK
        suite = {"ratios": ex.Suite.RATIO_SWEEP, "ratios-netlib": ex.Suite.RATIO_SWEEP_NETLIB,
                 "crossover": ex.Suite.CROSSOVER}[args.verb]
        return _cmd_experiment(args, suite)
    except ConfigError as exc:
        print(f"pertlp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
