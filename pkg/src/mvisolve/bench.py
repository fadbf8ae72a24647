"""Benchmark harness: solver x problem grids, trace files, tables and a CLI.

A run is described by a JSON spec (see :class:`RunSpec`); each
(solver, problem, repetition) cell is executed independently, its full
per-iteration trace written to CSV, and the grid summarized in a report
that is VALID only if no cell recorded an invariant violation or error.
Repetitions re-run the identical cell to stabilize timing; the
human-readable table reports the median time.

CLI subcommands::

    mvibench run <specfile>                 execute a grid, exit 0 iff VALID
    mvibench gen <family> [dims] --seed S   write an instance file (.npz)
    mvibench rate <trace.csv>               decay slope of a trace file

Trace CSV layout: header ``k,err,res_wv,seconds`` with 17-significant-digit
decimals, so values round-trip bit-exactly; ``seconds`` is cumulative wall
time and is the only column excluded from determinism guarantees.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import statistics
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import BaselineConfig, run_baseline
from .linesearch import LineSearchParams
from .problems import Problem, assemble, gen_cs, gen_l2, gen_lpa, save_instance
from .solver import (
    InertiaSchedule,
    IterationTrace,
    SolverConfig,
    StoppingRule,
    slope_of_min_residuals,
    solve,
)

__all__ = [
    "RunSpec",
    "CellResult",
    "RunReport",
    "run",
    "emit_convergence_csv",
    "read_trace_csv",
    "main",
]

_FMT = "{:.17g}"


# ---------------------------------------------------------------------------
# trace files


def emit_convergence_csv(trace: IterationTrace, path) -> Path:
    """Write one row per iteration: k, stopping metric, ||w - v||, cumulative seconds."""
    if trace.iterations == 0:
        raise ValueError("refusing to write an empty trace")
    path = Path(path)
    seconds = trace.cumulative_seconds()
    lines = ["k,err,res_wv,seconds"]
    for rec, sec in zip(trace.records, seconds):
        lines.append(
            ",".join(
                [
                    str(rec.k),
                    _FMT.format(rec.err),
                    _FMT.format(rec.res_wv),
                    _FMT.format(sec),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_trace_csv(path) -> dict[str, np.ndarray]:
    """Parse a trace CSV back into column arrays."""
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = text[0].split(",")
    rows = [line.split(",") for line in text[1:]]
    cols = {name: np.array([float(r[i]) for r in rows]) for i, name in enumerate(header)}
    return cols


# ---------------------------------------------------------------------------
# run configuration


_FAMILY_DIMS = {
    "cs": ("d", "m", "l", "snr_db", "rho"),
    "lpa": ("d", "m", "l", "snr_db", "mu", "alpha", "rho"),
    "l2": ("case_id", "n"),
}


def _instance_for(family: str, dims: dict, seed: int):
    if family == "cs":
        return gen_cs(
            d=dims["d"],
            m=dims["m"],
            l=dims.get("l", 10),
            snr_db=dims.get("snr_db", 40.0),
            rho=dims.get("rho"),
            seed=seed,
        )
    if family == "lpa":
        return gen_lpa(
            d=dims["d"],
            m=dims["m"],
            l=dims.get("l", 10),
            snr_db=dims.get("snr_db", 40.0),
            mu=dims.get("mu", 0.01),
            alpha=dims.get("alpha", 1.5),
            rho=dims.get("rho", 0.01),
            seed=seed,
        )
    if family == "l2":
        return gen_l2(case_id=dims.get("case_id", 1), n=dims.get("n", 1001))
    raise ValueError(f"unknown problem family {family!r}")


@dataclass(frozen=True)
class ProblemCell:
    family: str
    dims: dict
    seed: int

    @property
    def cell_id(self) -> str:
        if self.family == "l2":
            return f"l2-case{self.dims.get('case_id', 1)}-n{self.dims.get('n', 1001)}"
        return f"{self.family}-d{self.dims['d']}m{self.dims['m']}-seed{self.seed}"


@dataclass(frozen=True)
class SolverEntry:
    method: str
    options: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return self.options.get("label") or self.method


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to reproduce a benchmark grid."""

    problems: tuple[ProblemCell, ...]
    solvers: tuple[SolverEntry, ...]
    stop: dict
    output_dir: str
    repetitions: int = 1
    max_iters: int = 500
    check_invariants: bool = True
    timing_mode: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not self.solvers:
            raise ValueError("at least one solver is required")
        if not self.problems:
            raise ValueError("at least one problem is required")

    @classmethod
    def from_dict(cls, raw: dict) -> "RunSpec":
        cells = []
        for p in raw["problems"]:
            family = p["family"]
            dims = {k: p[k] for k in _FAMILY_DIMS.get(family, ()) if k in p}
            seeds = p.get("seeds", [p.get("seed", 0)])
            if family == "l2":
                cases = p.get("cases", [p.get("case_id", 1)])
                for case in cases:
                    cells.append(ProblemCell(family, {**dims, "case_id": case}, seed=0))
            else:
                for s in seeds:
                    cells.append(ProblemCell(family, dims, seed=int(s)))
        solvers = tuple(
            SolverEntry(s["method"], {k: v for k, v in s.items() if k != "method"})
            for s in raw["solvers"]
        )
        return cls(
            problems=tuple(cells),
            solvers=solvers,
            stop=raw.get("stop", {"kind": "successive_diff", "tol": 1e-6}),
            output_dir=raw["output_dir"],
            repetitions=raw.get("repetitions", 1),
            max_iters=raw.get("max_iters", 500),
            check_invariants=raw.get("check_invariants", True),
            timing_mode=raw.get("timing_mode", False),
            workers=raw.get("workers", 1),
        )

    @classmethod
    def from_file(cls, path) -> "RunSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _build_stop(stop_spec: dict, problem: Problem) -> StoppingRule:
    kind = stop_spec.get("kind", "successive_diff")
    tol = stop_spec.get("tol", 1e-6)
    if kind == "distance_to_reference":
        if problem.reference is None:
            raise ValueError(f"{problem.family} problem has no reference solution")
        return StoppingRule(kind, tol, reference=problem.reference)
    if kind == "iter_cap_only":
        return StoppingRule(kind)
    return StoppingRule(kind, tol)


def _build_ifb_config(options: dict, stop: StoppingRule, spec: RunSpec) -> SolverConfig:
    ls = LineSearchParams(
        s=options.get("s", 1.0),
        mu=options.get("mu", 0.5),
        sigma=options.get("sigma", 0.9),
        max_backtracks=options.get("max_backtracks", 60),
        warm_start=options.get("warm_start", False),
    )
    gamma = options.get("gamma", 1.9)
    inertia = None
    mode = options.get("inertia", "experiment")
    if mode == "constant":
        from .solver import inertia_cap

        theta = options.get("theta", 0.99 * inertia_cap(gamma, ls.sigma))
        inertia = InertiaSchedule.constant(theta)
    return SolverConfig(
        gamma=gamma,
        linesearch=ls,
        inertia=inertia,
        stop=stop,
        max_iters=spec.max_iters,
        check_invariants=spec.check_invariants,
    )


def _build_baseline_config(method: str, options: dict) -> BaselineConfig:
    armijo = LineSearchParams(
        s=options.get("s", 2.0 if method == "tc" else 1.0),
        mu=options.get("mu", 0.5),
        sigma=options.get("sigma", 0.5 if method == "tc" else 0.9),
        max_backtracks=options.get("max_backtracks", 60),
    )
    kwargs = dict(method=method, armijo=armijo, label=options.get("label"))
    if "lam" in options:
        kwargs["lam"] = options["lam"]
    if method == "zw":
        kwargs["lambda_mode"] = options.get("lambda_mode", "schedule")
        kwargs["gamma"] = options.get("gamma", 0.5)
    elif method == "tc":
        kwargs["gamma"] = options.get("gamma", 1.0)
        kwargs["mu_tc"] = options.get("mu_tc", 0.5)
        kwargs["theta"] = options.get("theta", 0.5)
        kwargs["literal"] = options.get("literal", False)
    return BaselineConfig(**kwargs)


# ---------------------------------------------------------------------------
# execution


@dataclass(frozen=True)
class CellResult:
    solver: str
    problem_id: str
    repetition: int
    iterations: int
    seconds: float
    final_err: float
    final_dist2: float
    status: str
    min_lambda: float
    delta_min: float
    delta_max: float
    violations: int
    mode: str = ""  # solver mode labels (inertia kind, warm start, step mode)
    error: str = ""

    @property
    def valid(self) -> bool:
        return self.error == "" and self.violations == 0


@dataclass
class RunReport:
    spec: RunSpec
    cells: list[CellResult]

    @property
    def valid(self) -> bool:
        return all(c.valid for c in self.cells)

    def rows(self) -> list[dict]:
        return [vars(c) | {"valid": c.valid} for c in self.cells]

    def aggregated(self) -> list[dict]:
        """Median-over-repetitions table, one row per (solver, problem)."""
        groups: dict[tuple[str, str], list[CellResult]] = {}
        for c in self.cells:
            groups.setdefault((c.solver, c.problem_id), []).append(c)
        out = []
        for (solver, pid), cs in groups.items():
            out.append(
                {
                    "solver": solver,
                    "problem": pid,
                    "iterations": cs[0].iterations,
                    "median_seconds": statistics.median(c.seconds for c in cs),
                    "final_err": cs[0].final_err,
                    "final_dist2": cs[0].final_dist2,
                    "status": cs[0].status,
                    "valid": all(c.valid for c in cs),
                }
            )
        return out

    def write(self, outdir: Path) -> None:
        header = [
            "solver",
            "problem_id",
            "repetition",
            "iterations",
            "seconds",
            "final_err",
            "final_dist2",
            "status",
            "min_lambda",
            "delta_min",
            "delta_max",
            "violations",
            "mode",
            "error",
            "valid",
        ]
        lines = [",".join(header)]
        for c in self.cells:
            lines.append(
                ",".join(
                    [
                        c.solver,
                        c.problem_id,
                        str(c.repetition),
                        str(c.iterations),
                        _FMT.format(c.seconds),
                        _FMT.format(c.final_err),
                        _FMT.format(c.final_dist2),
                        c.status,
                        _FMT.format(c.min_lambda),
                        _FMT.format(c.delta_min),
                        _FMT.format(c.delta_max),
                        str(c.violations),
                        json.dumps(c.mode),
                        json.dumps(c.error),
                        str(c.valid),
                    ]
                )
            )
        (outdir / "report.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

        width = max((len(r["problem"]) for r in self.aggregated()), default=10) + 2
        txt = [
            f"{'problem':<{width}} {'solver':<14} {'iters':>7} {'med s':>11} "
            f"{'final err':>13} {'dist^2':>13} {'status':>12} {'valid':>6}"
        ]
        for r in self.aggregated():
            txt.append(
                f"{r['problem']:<{width}} {r['solver']:<14} {r['iterations']:>7d} "
                f"{r['median_seconds']:>11.4g} {r['final_err']:>13.4g} "
                f"{r['final_dist2']:>13.4g} {r['status']:>12} {str(r['valid']):>6}"
            )
        overall = "VALID" if self.valid else "INVALID"
        txt.append(f"\noverall: {overall} ({len(self.cells)} cells)")
        (outdir / "report.txt").write_text("\n".join(txt) + "\n", encoding="utf-8")


def _run_cell(
    entry: SolverEntry, problem: Problem, pid: str, rep: int, spec: RunSpec
) -> tuple[CellResult, Optional[IterationTrace]]:
    stop = _build_stop(spec.stop, problem)
    t0 = time.perf_counter()
    try:
        if entry.method == "ifb":
            cfg = _build_ifb_config(entry.options, stop, spec)
            _, trace = solve(problem, problem.u0, problem.u1, cfg)
        else:
            cfg = _build_baseline_config(entry.method, entry.options)
            _, trace = run_baseline(
                cfg,
                problem,
                problem.u0,
                problem.u1,
                stop,
                max_iters=spec.max_iters,
                check_invariants=spec.check_invariants,
            )
        seconds = time.perf_counter() - t0
    except Exception as exc:  # a cell failure must never abort the grid
        return (
            CellResult(
                solver=entry.label,
                problem_id=pid,
                repetition=rep,
                iterations=0,
                seconds=time.perf_counter() - t0,
                final_err=float("nan"),
                final_dist2=float("nan"),
                status="error",
                min_lambda=float("nan"),
                delta_min=float("nan"),
                delta_max=float("nan"),
                violations=0,
                error=f"{type(exc).__name__}: {exc}",
            ),
            None,
        )
    dmin, dmax = trace.delta_range
    mode = ";".join(f"{k}={v}" for k, v in sorted(trace.labels.items()))
    result = CellResult(
        solver=entry.label,
        problem_id=pid,
        repetition=rep,
        iterations=trace.iterations,
        seconds=seconds,
        final_err=trace.final_err,
        final_dist2=trace.final_dist2,
        status=trace.status.value,
        min_lambda=trace.min_lambda,
        delta_min=dmin,
        delta_max=dmax,
        violations=trace.total_violations,
        mode=mode,
    )
    return result, trace


def run(spec: RunSpec) -> RunReport:
    """Execute the full grid, write traces and the report, return the report."""
    outdir = Path(spec.output_dir)
    traces_dir = outdir / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)
    (outdir / "spec.json").write_text(
        json.dumps(
            {
                "problems": [
                    {"family": p.family, **p.dims, "seed": p.seed} for p in spec.problems
                ],
                "solvers": [{"method": s.method, **s.options} for s in spec.solvers],
                "stop": spec.stop,
                "output_dir": spec.output_dir,
                "repetitions": spec.repetitions,
                "max_iters": spec.max_iters,
                "check_invariants": spec.check_invariants,
                "timing_mode": spec.timing_mode,
            },
            indent=2,
        ),
        encoding="utf-8",
    )

    jobs = []
    for cell in spec.problems:
        problem = assemble(_instance_for(cell.family, cell.dims, cell.seed))
        for entry in spec.solvers:
            for rep in range(spec.repetitions):
                jobs.append((entry, problem, cell.cell_id, rep))

    def execute(job):
        entry, problem, pid, rep = job
        result, trace = _run_cell(entry, problem, pid, rep, spec)
        if trace is not None and trace.iterations > 0:
            emit_convergence_csv(trace, traces_dir / f"{pid}__{entry.label}__rep{rep}.csv")
        return result

    workers = 1 if spec.timing_mode else max(1, spec.workers)
    if workers == 1:
        cells = [execute(job) for job in jobs]
    else:
        # operators are immutable and solve runs share nothing mutable
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(execute, jobs))

    report = RunReport(spec=spec, cells=cells)
    report.write(outdir)
    return report


# ---------------------------------------------------------------------------
# CLI


def _cmd_run(args) -> int:
    spec = RunSpec.from_file(args.specfile)
    report = run(spec)
    for row in report.aggregated():
        print(
            f"{row['problem']:<28} {row['solver']:<14} iters={row['iterations']:<6d} "
            f"err={row['final_err']:.4g} status={row['status']}"
        )
    print("overall:", "VALID" if report.valid else "INVALID")
    return 0 if report.valid else 1


def _cmd_gen(args) -> int:
    dims = {
        "d": args.d,
        "m": args.m,
        "l": args.l,
        "snr_db": args.snr,
        "mu": args.mu,
        "alpha": args.alpha,
        "case_id": args.case,
        "n": args.n,
    }
    if args.rho is not None:
        dims["rho"] = args.rho
    instance = _instance_for(args.family, dims, args.seed)
    out = args.out or f"{args.family}_seed{args.seed}.npz"
    save_instance(instance, out)
    print(f"wrote {out}")
    return 0


def _cmd_rate(args) -> int:
    cols = read_trace_csv(args.trace)
    slope = slope_of_min_residuals(cols["res_wv"], min_iterations=args.min_iterations)
    print(f"slope = {slope:.6f}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mvibench",
        description="Benchmark harness for monotone-inclusion splitting solvers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a benchmark grid from a JSON spec")
    p_run.add_argument("specfile")
    p_run.set_defaults(fn=_cmd_run)

    p_gen = sub.add_parser("gen", help="generate and save a problem instance")
    p_gen.add_argument("family", choices=["cs", "lpa", "l2"])
    p_gen.add_argument("--d", type=int, default=512)
    p_gen.add_argument("--m", type=int, default=256)
    p_gen.add_argument("--l", type=int, default=10)
    p_gen.add_argument("--snr", type=float, default=40.0)
    p_gen.add_argument("--rho", type=float, default=None)
    p_gen.add_argument("--mu", type=float, default=0.01, help="lpa penalty weight")
    p_gen.add_argument("--alpha", type=float, default=1.5, help="lpa penalty exponent in (1,2)")
    p_gen.add_argument("--case", type=int, default=1, help="l2 initial-value case (1..4)")
    p_gen.add_argument("--n", type=int, default=1001, help="l2 grid size")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default=None)
    p_gen.set_defaults(fn=_cmd_gen)

    p_rate = sub.add_parser("rate", help="decay slope of a trace CSV")
    p_rate.add_argument("trace")
    p_rate.add_argument("--min-iterations", type=int, default=50)
    p_rate.set_defaults(fn=_cmd_rate)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
