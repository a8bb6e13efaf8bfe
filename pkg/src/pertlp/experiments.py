"""Batch studies: prediction ratios along the iterations and crossover to simplex.

Each study returns an :class:`ExperimentReport` holding one row per
measurement plus aggregate means; :func:`emit_report` writes them as CSV and
SVG. Failed problems stay in the rows with a status other than ``ok`` and
are left out of the means.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .activity import prediction_ratios
from .crossover import (SimplexStatus, basis_relative_difference, build_basis,
                        relative_iteration_count, revised_simplex)
from .generators import DEFAULT_M_RANGE, DEFAULT_N_RANGE, generate_ts1, generate_ts2
from .ipm import SolveOptions, SolveStatus, SolveTrace, solve
from .mps import load_mps
from .oracle import Oracle, SolverStatusError, actual_active_set
from .problem import StandardLP, ensure_full_rank
from .svg import line_panels, signed_bars

ALGORITHMS = ("perturbed", "unperturbed")
ORACLES = (Oracle.SIMPLEX.value, Oracle.IPM.value)


class Suite(str, enum.Enum):
    RATIO_SWEEP = "ratios"
    RATIO_SWEEP_NETLIB = "ratios-netlib"
    CROSSOVER = "crossover"


@dataclass(frozen=True)
class ProblemSource:
    """Where problems come from: a random test set or MPS files.

    ``kind`` is ``"TS1"``, ``"TS2"`` or ``"MPS"``. Random problem ``i`` uses
    seed ``seed + i``. For ``"MPS"``, ``path`` is a file or a directory whose
    ``*.mps`` files are taken in name order.
    """

    kind: str = "TS1"
    count: int = 1
    seed: int = 0
    m_range: tuple[int, int] = DEFAULT_M_RANGE
    n_range: tuple[int, int] = DEFAULT_N_RANGE
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("TS1", "TS2", "MPS"):
            raise ValueError(f"unknown problem source {self.kind!r}")
        if self.kind == "MPS":
            if self.path is None:
                raise ValueError("MPS source needs a path")
            if not Path(self.path).exists():
                raise ValueError(f"no such file or directory: {self.path}")
        elif self.count < 1:
            raise ValueError("count must be at least 1")

    def names(self) -> list[str]:
        if self.kind == "MPS":
            p = Path(self.path)
            if p.is_dir():
                files = sorted(p.glob("*.mps")) + sorted(p.glob("*.MPS"))
            else:
                files = [p]
            if not files:
                raise ValueError(f"no MPS files found at {self.path}")
            return [str(f) for f in files]
        return [f"{self.kind}-{self.seed + i}" for i in range(self.count)]

    def load(self, name: str) -> StandardLP:
        if self.kind == "MPS":
            lp = load_mps(name)
        else:
            seed = int(name.rsplit("-", 1)[1])
            gen = generate_ts1 if self.kind == "TS1" else generate_ts2
            lp = gen(seed, self.m_range, self.n_range).lp
        return ensure_full_rank(lp)


@dataclass(frozen=True)
class ExperimentConfig:
    suite: Suite
    source: ProblemSource
    grid: tuple[int, ...] = tuple(range(1, 19))
    mu_cap: float = 1e-3
    relres_cap: Optional[float] = None
    solve_options: SolveOptions = field(default_factory=SolveOptions)
    output_dir: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("iteration grid must be strictly increasing")
        if not self.grid or self.grid[0] < 0:
            raise ValueError("iteration grid must be nonempty and nonnegative")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")


@dataclass
class ExperimentReport:
    suite: Suite
    columns: tuple[str, ...]
    rows: list[dict]
    agg_columns: tuple[str, ...]
    aggregates: list[dict]

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if r.get("status") != "ok")


RATIO_COLUMNS = ("problem", "m", "n", "algorithm", "oracle", "k", "false_ratio",
                 "missed_ratio", "correct_ratio", "relres", "status")
RATIO_AGG_COLUMNS = ("algorithm", "oracle", "k", "count", "failures", "mean_false",
                     "mean_missed", "mean_correct", "mean_log10_relres")
NETLIB_COLUMNS = ("problem", "m", "n", "M", "algorithm", "oracle", "offset", "k",
                  "false_ratio", "missed_ratio", "correct_ratio", "relres", "status")
NETLIB_AGG_COLUMNS = ("algorithm", "oracle", "offset", "count", "failures", "mean_false",
                      "mean_missed", "mean_correct", "mean_log10_relres")
CROSSOVER_COLUMNS = ("problem", "m", "n", "K", "ipm_status", "mu_lambda_perturbed",
                     "mu_unperturbed", "relres_perturbed", "relres_unperturbed",
                     "basis_difference", "simplex_status_perturbed",
                     "simplex_status_unperturbed", "simplex_perturbed",
                     "simplex_unperturbed", "rl", "bar", "status")
CROSSOVER_AGG_COLUMNS = ("count", "failures", "mean_simplex_perturbed",
                         "mean_simplex_unperturbed", "simplex_ratio", "mean_K",
                         "mean_mu_lambda_perturbed", "mean_mu_unperturbed",
                         "mean_basis_difference")


def _map(fn, args: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, args))


def _state_at(trace: SolveTrace, k: int):
    """Partition and relative residual after ``k`` iterations.

    A run that stopped early on its own criterion keeps its last prediction
    for later ``k``. Returns ``None`` when the run broke down before ``k``.
    """
    if k <= len(trace):
        rel = trace.records[k - 1].relres if k > 0 else math.nan
        return trace.partition_at(k), rel
    if trace.status is SolveStatus.ILL_CONDITIONED:
        return None
    last = trace.records[-1].relres if trace.records else math.nan
    return trace.partition_at(len(trace)), last


def _oracle_sets(lp: StandardLP) -> dict[str, Optional[frozenset]]:
    sets = {}
    for oracle in ORACLES:
        try:
            sets[oracle] = actual_active_set(lp, oracle).as_set()
        except SolverStatusError:
            sets[oracle] = None
    return sets


def _ratio_rows(name, lp, traces, sets, ks, extra=None):
    rows = []
    for alg in ALGORITHMS:
        for oracle in ORACLES:
            for k, offset in ks:
                row = {"problem": Path(name).stem if name.endswith(".mps") else name,
                       "m": lp.m, "n": lp.n, "algorithm": alg, "oracle": oracle, "k": k}
                if extra:
                    row.update(extra)
                if offset is not None:
                    row["offset"] = offset
                actual = sets[oracle]
                state = _state_at(traces[alg], k) if k >= 0 else None
                if actual is None:
                    status = f"{oracle}_oracle_failed"
                elif k < 0:
                    status = "before_start"
                elif state is None:
                    status = traces[alg].status.value
                else:
                    status = "ok"
                if status == "ok":
                    part, rel = state
                    r = prediction_ratios(part.active, actual)
                    row.update(false_ratio=r.false_ratio, missed_ratio=r.missed_ratio,
                               correct_ratio=r.correct_ratio, relres=rel)
                else:
                    row.update(false_ratio="", missed_ratio="", correct_ratio="", relres="")
                row["status"] = status
                rows.append(row)
    return rows


def _sweep_one(args):
    cfg, name = args
    lp = cfg.source.load(name)
    sets = _oracle_sets(lp)
    top = max(cfg.grid)
    base = replace(cfg.solve_options, max_iters=top, iter_exact=None, mu_cap=None,
                   relres_tol=cfg.solve_options.relres_tol)
    traces = {"perturbed": solve(lp, base), "unperturbed": solve(lp, base.unperturbed())}
    return _ratio_rows(name, lp, traces, sets, [(k, None) for k in cfg.grid])


def _mean(vals):
    return float(np.mean(vals)) if vals else math.nan


def _aggregate_ratios(rows, key):
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["algorithm"], r["oracle"], r[key]), []).append(r)
    aggs = []
    for (alg, oracle, kv), grp in sorted(groups.items(), key=lambda t: (
            ALGORITHMS.index(t[0][0]), ORACLES.index(t[0][1]), t[0][2])):
        ok = [r for r in grp if r["status"] == "ok"]
        logs = [math.log10(r["relres"]) for r in ok
                if isinstance(r["relres"], float) and r["relres"] > 0]
        aggs.append({"algorithm": alg, "oracle": oracle, key: kv, "count": len(ok),
                     "failures": len(grp) - len(ok),
                     "mean_false": _mean([r["false_ratio"] for r in ok]),
                     "mean_missed": _mean([r["missed_ratio"] for r in ok]),
                     "mean_correct": _mean([r["correct_ratio"] for r in ok]),
                     "mean_log10_relres": _mean(logs)})
    return aggs


def run_ratio_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    """Prediction ratios of both algorithms at every grid iteration.

    Both algorithms start from the same point and are cut off at each grid
    iteration (a run that meets its own stopping rule earlier keeps its last
    prediction). Predictions are scored against the simplex and the interior
    point oracle.
    """
    names = cfg.source.names()
    rows = [r for chunk in _map(_sweep_one, [(cfg, nm) for nm in names], cfg.jobs) for r in chunk]
    return ExperimentReport(Suite.RATIO_SWEEP, RATIO_COLUMNS, rows, RATIO_AGG_COLUMNS,
                            _aggregate_ratios(rows, "k"))


def _netlib_one(args):
    cfg, name = args
    lp = cfg.source.load(name)
    opts = replace(cfg.solve_options, iter_exact=None, mu_cap=None, relres_tol=1e-8)
    unpert = solve(lp, opts.unperturbed())
    if unpert.status is not SolveStatus.RELRES:
        return [{"problem": Path(name).stem, "m": lp.m, "n": lp.n, "M": "", "algorithm": alg,
                 "oracle": oracle, "offset": "", "k": "", "false_ratio": "", "missed_ratio": "",
                 "correct_ratio": "", "relres": "", "status": f"unperturbed_{unpert.status.value}"}
                for alg in ALGORITHMS for oracle in ORACLES]
    M = len(unpert)
    pert = solve(lp, replace(opts, max_iters=M))
    sets = _oracle_sets(lp)
    ks = [(M - i, i) for i in range(10)]
    return _ratio_rows(name, lp, {"perturbed": pert, "unperturbed": unpert}, sets, ks, {"M": M})


def run_ratio_sweep_netlib(cfg: ExperimentConfig) -> ExperimentReport:
    """Ratios over the last ten iterations of the unperturbed run.

    ``M`` is the iteration at which the unperturbed method reaches a relative
    residual below ``1e-8``; both algorithms are scored at ``M - i`` for
    ``i = 0..9``. Problems that do not reach the tolerance are reported and
    excluded.
    """
    names = cfg.source.names()
    rows = [r for chunk in _map(_netlib_one, [(cfg, nm) for nm in names], cfg.jobs) for r in chunk]
    aggs = [a for a in _aggregate_ratios([r for r in rows if r["offset"] != ""], "offset")]
    return ExperimentReport(Suite.RATIO_SWEEP_NETLIB, NETLIB_COLUMNS, rows, NETLIB_AGG_COLUMNS, aggs)


def _crossover_one(args):
    cfg, name = args
    lp = cfg.source.load(name)
    row = {c: "" for c in CROSSOVER_COLUMNS}
    row.update(problem=Path(name).stem if name.endswith(".mps") else name, m=lp.m, n=lp.n)
    popts = replace(cfg.solve_options, iter_exact=None, mu_cap=cfg.mu_cap,
                    relres_tol=cfg.relres_cap)
    pert = solve(lp, popts)
    row["ipm_status"] = pert.status.value
    if pert.status not in (SolveStatus.MU_CAP, SolveStatus.RELRES):
        row["status"] = f"perturbed_{pert.status.value}"
        return row
    K = len(pert)
    unpert = solve(lp, replace(cfg.solve_options, mu_cap=None, relres_tol=None).exactly(K).unperturbed())
    if unpert.status is not SolveStatus.ITER_EXACT:
        row["status"] = f"unperturbed_{unpert.status.value}"
        return row
    rp, ru = pert.records[-1], unpert.records[-1]
    bp = build_basis(lp, rp.partition.active, rp.s)
    bu = build_basis(lp, ru.partition.active, ru.s)
    sp = revised_simplex(lp, bp)
    su = revised_simplex(lp, bu)
    row.update(K=K, mu_lambda_perturbed=rp.mu_lambda, mu_unperturbed=ru.mu_lambda,
               relres_perturbed=rp.relres, relres_unperturbed=ru.relres,
               basis_difference=basis_relative_difference(bp, bu),
               simplex_status_perturbed=sp.status.value, simplex_status_unperturbed=su.status.value,
               simplex_perturbed=sp.iterations, simplex_unperturbed=su.iterations)
    ok_p = sp.status is SimplexStatus.OPTIMAL
    ok_u = su.status is SimplexStatus.OPTIMAL
    if ok_p and ok_u:
        row["rl"] = relative_iteration_count(sp.iterations, su.iterations)
        row["status"] = "ok"
    else:
        row["status"] = "simplex_failed"
    return row


def bar_heights(rows: Sequence[dict]) -> list[float]:
    """Signed bar heights for the relative iteration profile.

    Finite ``rl`` values are used as they are. When a simplex run fails, or
    one side needed zero iterations while the other did not, the bar gets the
    largest finite ``|rl|`` with the sign of the winner; two failures give 0.
    """
    finite = [abs(r["rl"]) for r in rows if isinstance(r["rl"], float) and math.isfinite(r["rl"])]
    top = max(finite) if finite else 1.0
    out = []
    for r in rows:
        rl = r["rl"]
        if isinstance(rl, float) and math.isfinite(rl):
            out.append(rl)
        elif isinstance(rl, float):
            out.append(math.copysign(top, rl))
        else:
            fp = r["simplex_status_perturbed"] not in ("", SimplexStatus.OPTIMAL.value)
            fu = r["simplex_status_unperturbed"] not in ("", SimplexStatus.OPTIMAL.value)
            if fp and fu:
                out.append(0.0)
            elif fp:
                out.append(-top)
            elif fu:
                out.append(top)
            else:
                out.append(math.nan)
    return out


def run_crossover(cfg: ExperimentConfig) -> ExperimentReport:
    """Simplex iterations after crossing over from each algorithm.

    The perturbed method stops once ``mu_lambda < mu_cap`` (or, with
    ``relres_cap`` set, once the relative residual drops below it), after
    ``K`` iterations. The unperturbed method then runs exactly ``K``
    iterations. A basis is built from each prediction and the simplex method
    is started from it.
    """
    names = cfg.source.names()
    rows = _map(_crossover_one, [(cfg, nm) for nm in names], cfg.jobs)
    for r, bar in zip(rows, bar_heights(rows)):
        r["bar"] = "" if math.isnan(bar) else bar
    ok = [r for r in rows if r["status"] == "ok"]
    mp = _mean([r["simplex_perturbed"] for r in ok])
    mu_ = _mean([r["simplex_unperturbed"] for r in ok])
    agg = {"count": len(ok), "failures": len(rows) - len(ok),
           "mean_simplex_perturbed": mp, "mean_simplex_unperturbed": mu_,
           "simplex_ratio": mp / mu_ if ok and mu_ > 0 else math.nan,
           "mean_K": _mean([r["K"] for r in ok]),
           "mean_mu_lambda_perturbed": _mean([r["mu_lambda_perturbed"] for r in ok]),
           "mean_mu_unperturbed": _mean([r["mu_unperturbed"] for r in ok]),
           "mean_basis_difference": _mean([r["basis_difference"] for r in ok])}
    return ExperimentReport(Suite.CROSSOVER, CROSSOVER_COLUMNS, rows, CROSSOVER_AGG_COLUMNS, [agg])


def run(cfg: ExperimentConfig) -> ExperimentReport:
    return {Suite.RATIO_SWEEP: run_ratio_sweep,
            Suite.RATIO_SWEEP_NETLIB: run_ratio_sweep_netlib,
            Suite.CROSSOVER: run_crossover}[cfg.suite](cfg)


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _write_csv(path: Path, columns, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_cell(r.get(c, "")) for c in columns])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _ratio_chart(report: ExperimentReport, key: str, xlabel: str) -> str:
    panels = []
    measures = (("mean_false", "False-prediction ratio"), ("mean_missed", "Missed-prediction ratio"),
                ("mean_correct", "Correction ratio"))
    for col, title in measures:
        series = []
        for alg in ALGORITHMS:
            for oracle in ORACLES:
                pts = [a for a in report.aggregates if a["algorithm"] == alg and a["oracle"] == oracle]
                series.append((f"{alg} vs {oracle}", [float(a[key]) for a in pts],
                               [a[col] for a in pts]))
        panels.append({"title": title, "xlabel": xlabel, "ylabel": "mean ratio",
                       "series": series, "ylim": (0.0, 1.0)})
    series = []
    for alg in ALGORITHMS:
        pts = [a for a in report.aggregates if a["algorithm"] == alg and a["oracle"] == ORACLES[0]]
        series.append((alg, [float(a[key]) for a in pts], [a["mean_log10_relres"] for a in pts]))
    panels.append({"title": "Relative residual", "xlabel": xlabel,
                   "ylabel": "mean log10 relres", "series": series})
    return line_panels(panels)


def emit_report(report: ExperimentReport, output_dir: str | os.PathLike) -> list[Path]:
    """Write ``rows.csv``, ``aggregates.csv`` and a chart (skipped for empty reports)."""
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out}: {exc.strerror}") from exc
    written = [out / "rows.csv", out / "aggregates.csv"]
    _write_csv(written[0], report.columns, report.rows)
    _write_csv(written[1], report.agg_columns, report.aggregates if report.rows else [])
    if not report.rows:
        return written
    if report.suite is Suite.CROSSOVER:
        bars = sorted((r["bar"] for r in report.rows if isinstance(r["bar"], float)), reverse=True)
        svg = signed_bars(bars, title="Relative simplex iteration count", ylabel="rl")
        path = out / "rl_profile.svg"
    elif report.suite is Suite.RATIO_SWEEP:
        svg = _ratio_chart(report, "k", "interior point iteration")
        path = out / "ratios.svg"
    else:
        svg = _ratio_chart(report, "offset", "iterations before M")
        path = out / "ratios.svg"
    try:
        path.write_text(svg)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    written.append(path)
    return written
