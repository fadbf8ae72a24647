"""Inertial forward-backward contraction solver with full iteration tracing.

One iteration, starting from the pair ``(u_prev, u_curr)``:

1. inertial extrapolation  ``w = u_curr + theta_k * (u_curr - u_prev)``;
2. Armijo backtracking for ``lam`` and the forward-backward point
   ``v = J(w - lam*B(w), lam)``;
3. contraction direction  ``phi = (w - v) - lam*(B(w) - B(v))``;
4. if ``phi`` vanishes, ``v`` already solves the inclusion; otherwise the
   relaxed update ``u_next = w - gamma * delta * phi`` with the optimal
   scalar ``delta = <w - v, phi> / ||phi||^2``.

The acceptance inequality forces, at every iteration where ``phi != 0``,

    (1-sigma)*||w-v|| <= ||phi|| <= (1+sigma)*||w-v||,
    (1-sigma)/(1+sigma)^2 <= delta <= 1/(1-sigma),

and, against any solution ``u*``,

    ||u_next - u*||^2 <= ||w - u*||^2 - gamma*(2-gamma)*<w-v, phi>^2/||phi||^2.

These are checked (and counted, never silently dropped) when
``check_invariants`` is enabled; a benchmark report is only VALID if every
counter is zero.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .linesearch import (
    BacktrackExhausted,
    LineSearchParams,
    NonFiniteIterate,
    backtrack,
)
from .spaces import InnerProductSpace, euclidean

__all__ = [
    "InertiaSchedule",
    "StoppingRule",
    "SolverConfig",
    "TerminalStatus",
    "IterationRecord",
    "IterationTrace",
    "Inclusion",
    "DivergenceError",
    "InsufficientTrace",
    "contraction_margin",
    "inertia_cap",
    "analysis_constants",
    "contraction_update",
    "ifb_step",
    "solve",
    "rate_estimate",
    "slope_of_min_residuals",
]

#: iterate norms beyond this abort the run long before float64 overflow
DIVERGENCE_NORM = 1e150

#: relative floating-point slack used by the runtime invariant checks
_CHECK_SLACK = 1e-12


class DivergenceError(FloatingPointError):
    """An iterate left the trust region ``||u|| <= 1e150`` or went non-finite."""


class InsufficientTrace(ValueError):
    """The trace is too short for the requested estimate."""


# ---------------------------------------------------------------------------
# derived constants


def contraction_margin(gamma: float, sigma: float) -> float:
    """``E = ((2-gamma)/gamma) * ((1-sigma)/(1+sigma))**4``.

    The coefficient of ``||u_next - w||^2`` in the per-iteration decrease
    of the squared distance to any solution; everything the inertia bound
    depends on.
    """
    return ((2.0 - gamma) / gamma) * ((1.0 - sigma) / (1.0 + sigma)) ** 4


def inertia_cap(gamma: float, sigma: float) -> float:
    """Largest admissible inertia bound ``E / (E + max(1, E))`` for weak convergence."""
    e = contraction_margin(gamma, sigma)
    return e / (e + max(1.0, e))


def analysis_constants(
    gamma: float,
    sigma: float,
    lam_min: Optional[float] = None,
    beta: Optional[float] = None,
    theta: Optional[float] = None,
) -> dict:
    """Read-only constants derived from the configuration (and, optionally, a run).

    ``alpha``, ``zeta`` and ``margin`` depend only on ``(gamma, sigma)``.
    Supplying the inertia bound ``theta`` adds ``kappa``, the positive
    summability margin behind the step-difference series.  Supplying the
    smallest accepted step ``lam_min`` and a strong-monotonicity modulus
    ``beta`` of the set-valued operator adds the linear contraction factor
    ``tau`` and its inertia cap.
    """
    alpha = ((1.0 - sigma) / (1.0 + sigma)) ** 2
    margin = contraction_margin(gamma, sigma)
    out = {
        "alpha": alpha,
        "zeta": ((2.0 - gamma) / gamma) * alpha,
        "margin": margin,
        "inertia_cap": inertia_cap(gamma, sigma),
        "delta_lower": (1.0 - sigma) / (1.0 + sigma) ** 2,
        "delta_upper": 1.0 / (1.0 - sigma),
    }
    # kappa > 0 is what the step-difference summability argument actually
    # needs; note it requires the strictly smaller bound below, not the
    # advertised inertia_cap (the two differ by the +1 in the denominator)
    out["inertia_cap_summable"] = margin / (margin + 1.0 + max(1.0, margin))
    if theta is not None:
        out["kappa"] = margin - theta * (margin + 1.0 + max(1.0, margin))
    if lam_min is not None and beta is not None:
        q = gamma * lam_min * beta * alpha
        tau = 1.0 - 0.5 * alpha * min(gamma * (2.0 - gamma), 2.0 * gamma * lam_min * beta)
        out.update(
            {
                "strong_decrement": q,
                "tau": tau,
                "inertia_cap_strong": min(out["inertia_cap"], (1.0 - tau) / tau),
            }
        )
    return out


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class InertiaSchedule:
    """Extrapolation weights ``theta_k``, all in ``[0, theta_max]`` with ``theta_max < 1``.

    ``experiment`` uses ``theta_max * sqrt(k) / (k + 5)``, the schedule used
    by the benchmark runs.  Note it decreases after ``k = 5``, so it is not
    the non-decreasing schedule the convergence guarantee asks for; the
    ``constant`` kind is the theory-compliant alternative.  Traces record
    which kind ran.
    """

    kind: str  # "constant" | "experiment" | "custom"
    theta_max: float
    fn: Optional[Callable[[int], float]] = None

    def __post_init__(self):
        if self.kind not in ("constant", "experiment", "custom"):
            raise ValueError(f"unknown inertia schedule kind {self.kind!r}")
        if not 0.0 <= self.theta_max < 1.0:
            raise ValueError("theta_max must lie in [0, 1)")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom schedule requires a function")

    @classmethod
    def constant(cls, theta: float) -> "InertiaSchedule":
        return cls("constant", theta)

    @classmethod
    def experiment(cls, theta_max: float) -> "InertiaSchedule":
        return cls("experiment", theta_max)

    @classmethod
    def custom(cls, fn: Callable[[int], float], theta_max: float) -> "InertiaSchedule":
        return cls("custom", theta_max, fn)

    def value(self, k: int) -> float:
        if self.kind == "constant":
            theta = self.theta_max
        elif self.kind == "experiment":
            theta = self.theta_max * math.sqrt(k) / (k + 5.0)
        else:
            theta = float(self.fn(k))
        if not 0.0 <= theta <= self.theta_max:
            raise ValueError(f"theta_{k} = {theta} outside [0, {self.theta_max}]")
        return theta


@dataclass(frozen=True)
class StoppingRule:
    """When to declare a run converged.

    kinds
    -----
    ``successive_diff``        ``||u_next - u_curr|| <= tol``
    ``distance_to_reference``  ``||u_next - reference||^2 <= tol``
    ``residual``               ``||w - v|| <= tol``
    ``iter_cap_only``          run to the iteration cap
    """

    kind: str = "successive_diff"
    tol: float = 1e-6
    reference: Optional[np.ndarray] = None

    def __post_init__(self):
        kinds = ("successive_diff", "distance_to_reference", "residual", "iter_cap_only")
        if self.kind not in kinds:
            raise ValueError(f"unknown stopping rule {self.kind!r}")
        if self.kind != "iter_cap_only" and not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.kind == "distance_to_reference" and self.reference is None:
            raise ValueError("distance_to_reference requires a reference point")


@dataclass(frozen=True)
class SolverConfig:
    """All scalar knobs of the inertial contraction solver.

    Defaults follow the benchmark settings: ``gamma = 1.9``, line search
    ``(s, mu, sigma) = (1, 0.5, 0.9)`` and the ``experiment`` inertia
    schedule capped at 99% of the admissible bound.  At these values the
    admissible inertia is about 4e-7, i.e. essentially zero; pass an
    explicit :class:`InertiaSchedule` to explore anything larger.
    """

    gamma: float = 1.9
    linesearch: LineSearchParams = field(default_factory=LineSearchParams)
    inertia: Optional[InertiaSchedule] = None
    stop: StoppingRule = field(default_factory=StoppingRule)
    max_iters: int = 1000
    phi_zero_tol: float = 1e-14
    check_invariants: bool = False

    def __post_init__(self):
        if not 0.0 < self.gamma < 2.0:
            raise ValueError("gamma must lie in (0, 2)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.phi_zero_tol < 0:
            raise ValueError("phi_zero_tol must be nonnegative")
        if self.inertia is None:
            cap = inertia_cap(self.gamma, self.linesearch.sigma)
            object.__setattr__(self, "inertia", InertiaSchedule.experiment(0.99 * cap))

    @property
    def contraction_margin(self) -> float:
        return contraction_margin(self.gamma, self.linesearch.sigma)

    @property
    def inertia_cap(self) -> float:
        return inertia_cap(self.gamma, self.linesearch.sigma)

    def analysis(
        self,
        lam_min: Optional[float] = None,
        beta: Optional[float] = None,
        theta: Optional[float] = None,
    ) -> dict:
        if theta is None:
            theta = self.inertia.theta_max
        return analysis_constants(self.gamma, self.linesearch.sigma, lam_min, beta, theta)


@dataclass(frozen=True)
class Inclusion:
    """A ready-to-solve problem: forward map, resolvent, ambient space."""

    forward: Callable
    resolvent: Callable
    space: InnerProductSpace


# ---------------------------------------------------------------------------
# trace


class TerminalStatus(enum.Enum):
    CONVERGED = "converged"
    PHI_ZERO = "phi_zero"
    ITER_CAP = "iter_cap"
    DIVERGED = "diverged"
    BACKTRACK_EXHAUSTED = "backtrack_exhausted"


@dataclass(frozen=True)
class IterationRecord:
    """One row of a run trace.

    ``delta`` is the contraction scalar of the method (nan where the
    method has none), ``err`` the stopping metric, ``dist2_ref`` the
    squared distance to the reference solution when one is known.
    Evaluation counts are per-iteration, not cumulative.
    """

    k: int
    theta: float
    lam: float
    j: int
    delta: float
    res_wv: float
    phi_norm: float
    step_diff: float
    err: float
    dist2_ref: float
    elapsed_ns: int
    forward_evals: int
    resolvent_evals: int


class IterationTrace:
    """Append-only per-iteration log shared by every solver in the package."""

    def __init__(self, method: str, labels: Optional[dict] = None):
        self.method = method
        self.labels = dict(labels or {})
        self.records: list[IterationRecord] = []
        self.status: TerminalStatus = TerminalStatus.ITER_CAP
        self.violations = {"delta_bound": 0, "phi_sandwich": 0, "fejer": 0}
        self.invariants_checked = False

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def array(self, fieldname: str) -> np.ndarray:
        return np.array([getattr(r, fieldname) for r in self.records], dtype=float)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def min_lambda(self) -> float:
        lams = [r.lam for r in self.records if np.isfinite(r.lam)]
        return min(lams) if lams else float("nan")

    @property
    def delta_range(self) -> tuple[float, float]:
        deltas = [r.delta for r in self.records if np.isfinite(r.delta)]
        if not deltas:
            return (float("nan"), float("nan"))
        return (min(deltas), max(deltas))

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    @property
    def total_forward_evals(self) -> int:
        return sum(r.forward_evals for r in self.records)

    @property
    def total_resolvent_evals(self) -> int:
        return sum(r.resolvent_evals for r in self.records)

    def cumulative_seconds(self) -> np.ndarray:
        return np.cumsum(self.array("elapsed_ns")) / 1e9

    @property
    def final_err(self) -> float:
        return self.records[-1].err if self.records else float("nan")

    @property
    def final_dist2(self) -> float:
        return self.records[-1].dist2_ref if self.records else float("nan")

    def __repr__(self):
        return (
            f"IterationTrace({self.method}, {self.iterations} iterations, "
            f"status={self.status.value}, violations={self.total_violations})"
        )


# ---------------------------------------------------------------------------
# the contraction core, shared verbatim by every method that uses it


@dataclass(frozen=True)
class ContractionResult:
    u_next: np.ndarray
    phi: np.ndarray
    phi_norm: float
    res_wv: float
    delta: float
    phizero: bool


def contraction_update(
    w: np.ndarray,
    v: np.ndarray,
    b_w: np.ndarray,
    b_v: np.ndarray,
    lam: float,
    gamma: float,
    space: InnerProductSpace,
    phi_zero_tol: float,
) -> ContractionResult:
    """Direction, optimal scalar and relaxed update shared by the contraction methods.

    Kept as the single implementation so that methods which are
    algebraically identical (e.g. zero inertia versus the plain
    projection-contraction iteration) produce bitwise identical iterates.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        phi = (w - v) - lam * (b_w - b_v)
        pp = space.inner(phi, phi)
        res_wv = space.norm(w - v)
    if not (math.isfinite(pp) and math.isfinite(res_wv)):
        # an overflowed ||phi||^2 would silently zero the scalar below
        raise DivergenceError("contraction direction overflowed")
    phi_norm = math.sqrt(pp)
    if phi_norm <= phi_zero_tol * (1.0 + space.norm(w)):
        return ContractionResult(v, phi, phi_norm, res_wv, float("nan"), True)
    delta = space.inner(w - v, phi) / pp
    u_next = w - (gamma * delta) * phi
    return ContractionResult(u_next, phi, phi_norm, res_wv, delta, False)


# ---------------------------------------------------------------------------
# single step and full solve


@dataclass(frozen=True)
class StepOutcome:
    """Everything one iteration produced, for tracing and invariant checks."""

    u_next: np.ndarray
    theta: float
    lam: float
    j: int
    delta: float
    res_wv: float
    phi_norm: float
    phizero: bool
    forward_evals: int
    resolvent_evals: int
    w: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    phi: Optional[np.ndarray] = None
    sigma_check: Optional[float] = None  # Armijo ratio backing the bound checks
    delta_is_ratio: bool = False  # delta == <w-v, phi>/||phi||^2
    fejer_applicable: bool = False


def _guard_iterate(u: np.ndarray, space: InnerProductSpace, what: str) -> None:
    if not np.all(np.isfinite(u)):
        raise DivergenceError(f"{what} is non-finite")
    # sup-norm guard: avoids squaring (which would itself overflow first)
    if np.max(np.abs(u)) > DIVERGENCE_NORM:
        raise DivergenceError(f"{what} exceeded the divergence guard {DIVERGENCE_NORM:g}")


def ifb_step(
    u_prev: np.ndarray,
    u_curr: np.ndarray,
    k: int,
    forward,
    resolvent,
    cfg: SolverConfig,
    space: Optional[InnerProductSpace] = None,
    j_start: int = 0,
) -> tuple[np.ndarray, StepOutcome]:
    """One inertial contraction iteration.

    Returns the next iterate and the full step record.  When the
    contraction direction vanishes (relative to ``1 + ||w||``), the
    forward-backward point ``v`` is itself a solution and is returned with
    ``phizero`` set.
    """
    if space is None:
        space = euclidean(len(u_curr))
    theta = cfg.inertia.value(k)
    w = u_curr + theta * (u_curr - u_prev)
    _guard_iterate(w, space, f"extrapolated point at k={k}")
    ls = backtrack(w, forward, resolvent, cfg.linesearch, space=space, j_start=j_start)
    core = contraction_update(w, ls.v, ls.b_w, ls.b_v, ls.lam, cfg.gamma, space, cfg.phi_zero_tol)
    if not core.phizero:
        _guard_iterate(core.u_next, space, f"iterate at k={k}")
    outcome = StepOutcome(
        u_next=core.u_next,
        theta=theta,
        lam=ls.lam,
        j=ls.j,
        delta=core.delta,
        res_wv=core.res_wv,
        phi_norm=core.phi_norm,
        phizero=core.phizero,
        forward_evals=ls.forward_evals,
        resolvent_evals=ls.resolvent_evals,
        w=w,
        v=ls.v,
        phi=core.phi,
        sigma_check=cfg.linesearch.sigma,
        delta_is_ratio=True,
        fejer_applicable=True,
    )
    return core.u_next, outcome


def _check_invariants(
    trace: IterationTrace,
    out: StepOutcome,
    space: InnerProductSpace,
    gamma: float,
    solution: Optional[np.ndarray],
) -> None:
    trace.invariants_checked = True
    if out.phizero or out.sigma_check is None:
        return
    sigma = out.sigma_check
    res, phi_norm = out.res_wv, out.phi_norm
    if np.isfinite(phi_norm):
        slack = _CHECK_SLACK * (1.0 + res)
        if not ((1.0 - sigma) * res - slack <= phi_norm <= (1.0 + sigma) * res + slack):
            trace.violations["phi_sandwich"] += 1
    if out.delta_is_ratio and np.isfinite(out.delta):
        lo = (1.0 - sigma) / (1.0 + sigma) ** 2
        hi = 1.0 / (1.0 - sigma)
        dslack = _CHECK_SLACK * hi
        if not (lo - dslack <= out.delta <= hi + dslack):
            trace.violations["delta_bound"] += 1
    # the decrease inequality holds against exact solutions only, so it is
    # checked against a known solution, never the error-metric reference
    if solution is not None and out.fejer_applicable and out.phi is not None:
        pp = space.inner(out.phi, out.phi)
        if pp > 0.0:
            decrement = gamma * (2.0 - gamma) * space.inner(out.w - out.v, out.phi) ** 2 / pp
            eps_fp = 1e-8 * (1.0 + space.norm2(solution))
            lhs = space.norm2(out.u_next - solution)
            rhs = space.norm2(out.w - solution) - decrement + eps_fp
            if lhs > rhs:
                trace.violations["fejer"] += 1


def _drive(
    step: Callable[[int, np.ndarray, np.ndarray], StepOutcome],
    u0: np.ndarray,
    u1: np.ndarray,
    space: InnerProductSpace,
    stop: StoppingRule,
    max_iters: int,
    *,
    method: str,
    labels: Optional[dict] = None,
    gamma: float = float("nan"),
    check_invariants: bool = False,
    reference: Optional[np.ndarray] = None,
    solution: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, IterationTrace]:
    """Shared iteration loop: tracing, stopping, divergence and invariant counting.

    ``reference`` feeds the squared-distance column; ``solution`` must be an
    exact solution of the inclusion and additionally enables the
    per-iteration decrease check.
    """
    u_prev = space.check_member(u0, "u0")
    u_curr = space.check_member(u1, "u1")
    ref = None if reference is None else space.check_member(reference, "reference")
    sol = None if solution is None else space.check_member(solution, "solution")
    trace = IterationTrace(method, labels)
    final = u_curr
    trace.status = TerminalStatus.ITER_CAP

    for k in range(1, max_iters + 1):
        t0 = time.perf_counter_ns()
        try:
            out = step(k, u_prev, u_curr)
        except BacktrackExhausted:
            trace.status = TerminalStatus.BACKTRACK_EXHAUSTED
            break
        except (NonFiniteIterate, DivergenceError):
            trace.status = TerminalStatus.DIVERGED
            break
        elapsed = time.perf_counter_ns() - t0

        u_next = out.u_next
        step_diff = space.norm(u_next - u_curr)
        dist2 = space.norm2(u_next - ref) if ref is not None else float("nan")
        if stop.kind == "successive_diff":
            err = step_diff
        elif stop.kind == "distance_to_reference":
            err = space.norm2(u_next - stop.reference)
        elif stop.kind == "residual":
            err = out.res_wv
        else:
            err = step_diff

        if check_invariants:
            _check_invariants(trace, out, space, gamma, sol)

        trace.append(
            IterationRecord(
                k=k,
                theta=out.theta,
                lam=out.lam,
                j=out.j,
                delta=out.delta,
                res_wv=out.res_wv,
                phi_norm=out.phi_norm,
                step_diff=step_diff,
                err=err,
                dist2_ref=dist2,
                elapsed_ns=elapsed,
                forward_evals=out.forward_evals,
                resolvent_evals=out.resolvent_evals,
            )
        )
        final = u_next
        if out.phizero:
            trace.status = TerminalStatus.PHI_ZERO
            break
        if stop.kind != "iter_cap_only" and err <= stop.tol:
            trace.status = TerminalStatus.CONVERGED
            break
        u_prev, u_curr = u_curr, u_next
    return final, trace


def solve(
    problem,
    u0: np.ndarray,
    u1: np.ndarray,
    cfg: SolverConfig,
    reference: Optional[np.ndarray] = None,
    solution: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, IterationTrace]:
    """Run the inertial contraction solver on an inclusion problem.

    Parameters
    ----------
    problem : object with ``forward``, ``resolvent`` and ``space`` attributes
        E.g. an :class:`Inclusion` or an assembled benchmark problem.
    u0, u1 : ndarray
        The two starting points; ``u0 == u1`` is allowed (and is the
        benchmark default), in which case the first extrapolation vanishes.
    cfg : SolverConfig
    reference : ndarray, optional
        Comparison point for the squared-distance column of the trace
        (e.g. the true signal of a recovery problem).  Defaults to the
        stopping rule's reference, then to ``problem.reference``.
    solution : ndarray, optional
        An exact solution of the inclusion.  With
        ``cfg.check_invariants`` this enables the per-iteration decrease
        check.  Defaults to ``problem.reference`` when the problem marks
        it as an exact solution.

    Returns
    -------
    (u_final, trace)
        ``trace.status`` distinguishes convergence, a vanishing
        contraction direction (the exact-solution case), the iteration
        cap, divergence, and an exhausted line search.
    """
    space = problem.space
    if reference is None:
        reference = cfg.stop.reference
    if reference is None:
        reference = getattr(problem, "reference", None)
    if solution is None and getattr(problem, "reference_is_solution", False):
        solution = getattr(problem, "reference", None)

    warm = cfg.linesearch.warm_start
    prev_j = {"j": 0}

    def step(k, u_prev, u_curr):
        j_start = max(0, prev_j["j"] - 1) if warm else 0
        _, out = ifb_step(u_prev, u_curr, k, problem.forward, problem.resolvent, cfg, space, j_start)
        prev_j["j"] = out.j
        return out

    labels = {
        "inertia": cfg.inertia.kind,
        "theta_max": cfg.inertia.theta_max,
        "gamma": cfg.gamma,
        "sigma": cfg.linesearch.sigma,
        "warm_start": warm,
    }
    return _drive(
        step,
        u0,
        u1,
        space,
        cfg.stop,
        cfg.max_iters,
        method="ifb",
        labels=labels,
        gamma=cfg.gamma,
        check_invariants=cfg.check_invariants,
        reference=reference,
        solution=solution,
    )


# ---------------------------------------------------------------------------
# rate estimation


def slope_of_min_residuals(residuals: Sequence[float], min_iterations: int = 50) -> float:
    """Least-squares slope of ``log(min_{j<=k} r_j)`` against ``log k``, trailing half.

    The running minimum makes the fit insensitive to non-monotone
    residual sequences; a decay like ``k**(-1/2)`` yields a slope of
    ``-1/2`` up to floating-point error.
    """
    r = np.asarray(residuals, dtype=float)
    r = r[np.isfinite(r)]
    if len(r) < min_iterations:
        raise InsufficientTrace(
            f"need at least {min_iterations} recorded residuals, got {len(r)}"
        )
    running_min = np.minimum.accumulate(r)
    # exact zeros would break the log; clamp far below any meaningful scale
    running_min = np.maximum(running_min, 1e-300)
    k = np.arange(1, len(r) + 1, dtype=float)
    tail = slice(len(r) // 2, None)
    slope = np.polyfit(np.log(k[tail]), np.log(running_min[tail]), 1)[0]
    return float(slope)


def rate_estimate(trace_or_residuals, min_iterations: int = 50) -> float:
    """Decay-rate exponent of a run, from its ``||w - v||`` residual history.

    Accepts an :class:`IterationTrace` or a plain residual sequence.
    """
    if isinstance(trace_or_residuals, IterationTrace):
        residuals = trace_or_residuals.array("res_wv")
    else:
        residuals = trace_or_residuals
    return slope_of_min_residuals(residuals, min_iterations)
