"""Comparison splitting methods sharing the operator and trace machinery.

Five classical iterations for ``0 in A(u) + B(u)``, each exposed both as a
single-step function and through :func:`run_baseline`, which reuses the
same driver, stopping rules and trace schema as the inertial contraction
solver so benchmark tables compare like with like.

``fb``     forward-backward: ``u_next = J(u - lam*B(u), lam)``.
``tseng``  forward-backward-forward: the forward-backward point plus the
           correction ``-lam*(B(v) - B(u))``, step from the Armijo search.
``zw``     projection-contraction: forward-backward point from ``u``, then
           the relaxed contraction update (no inertia).
``tc``     inertial viscosity scheme: adaptive inertia capped by
           ``eps_k / ||u_k - u_{k-1}||``, a contraction step with scalar
           ``(1 - mu) * ||w - v||^2 / ||phi||^2``, then averaging with a
           contraction ``f``.
``jx``     projection-type method for variational inequalities over a
           convex set (the resolvent is a metric projection); identical to
           ``zw`` with relaxation 1 and Armijo steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .linesearch import LineSearchParams, backtrack
from .solver import (
    DivergenceError,
    IterationTrace,
    StepOutcome,
    StoppingRule,
    _drive,
    _guard_iterate,
    contraction_update,
)
from .spaces import InnerProductSpace, euclidean

__all__ = [
    "BaselineConfig",
    "fb_step",
    "tseng_step",
    "zw_step",
    "tc_step",
    "jx_step",
    "run_baseline",
]

METHODS = ("fb", "tseng", "zw", "tc", "jx")


def _default_half_contraction(x):
    return 0.5 * x


@dataclass(frozen=True)
class BaselineConfig:
    """Method selector plus the per-method scalars.

    Only the fields relevant to ``method`` are read.  Defaults follow the
    standard benchmark settings: ``zw`` runs the step schedule
    ``lam_k = k/(k+1)`` with relaxation 0.5 (an ``armijo`` step mode is
    available for forward maps without a global Lipschitz constant),
    ``tc`` uses search start 2, halving, ``mu = 0.5``, relaxation 1,
    ``alpha_k = 1/(k+1)``, ``eps_k = 100/(k+1)^2``, inertia bound 0.5 and
    the contraction ``f(x) = x/2``.
    """

    method: str = "fb"
    # fb / zw (schedule mode): constant value or callable k -> lam
    lam: Union[float, Callable[[int], float], None] = None
    lambda_mode: str = "schedule"  # zw only: "schedule" | "armijo"
    gamma: Optional[float] = None  # zw / tc relaxation; None selects the method default
    armijo: Optional[LineSearchParams] = None  # None selects the method default
    # tc specific
    mu_tc: float = 0.5
    theta: float = 0.5
    alpha_fn: Callable[[int], float] = lambda k: 1.0 / (k + 1.0)
    eps_fn: Callable[[int], float] = lambda k: 100.0 / (k + 1.0) ** 2
    contraction_f: Callable[[np.ndarray], np.ndarray] = _default_half_contraction
    literal: bool = False  # tc only: mixed-anchor variant (see tc_step)
    phi_zero_tol: float = 1e-14
    label: Optional[str] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown baseline method {self.method!r}")
        if self.gamma is None:
            object.__setattr__(self, "gamma", 0.5 if self.method == "zw" else 1.0)
        if self.armijo is None:
            default = (
                LineSearchParams(s=2.0, mu=0.5, sigma=0.5)
                if self.method == "tc"
                else LineSearchParams()
            )
            object.__setattr__(self, "armijo", default)
        if self.method in ("zw", "tc") and not 0.0 < self.gamma < 2.0:
            raise ValueError("relaxation gamma must lie in (0, 2)")
        if self.method == "tc" and not 0.0 <= self.mu_tc < 1.0:
            raise ValueError("mu_tc must lie in [0, 1)")
        if self.lambda_mode not in ("schedule", "armijo"):
            raise ValueError("lambda_mode must be 'schedule' or 'armijo'")
        if self.lam is None and self.method in ("fb", "zw"):
            default = 0.01 if self.method == "fb" else (lambda k: k / (1.0 + k))
            object.__setattr__(self, "lam", default)

    def lam_at(self, k: int) -> float:
        lam = self.lam(k) if callable(self.lam) else float(self.lam)
        if not lam > 0:
            raise ValueError(f"step lam_{k} = {lam} must be positive")
        return lam

    def display_label(self) -> str:
        if self.label:
            return self.label
        if self.method == "zw":
            return f"zw[{self.lambda_mode}]"
        return self.method


# ---------------------------------------------------------------------------
# single steps


def fb_step(u, lam, forward, resolvent, space=None) -> tuple[np.ndarray, StepOutcome]:
    """Forward-backward step ``J(u - lam*B(u), lam)`` at a fixed step size."""
    if space is None:
        space = euclidean(len(u))
    b_u = np.asarray(forward(u), dtype=float)
    u_next = np.asarray(resolvent(u - lam * b_u, lam), dtype=float)
    _guard_iterate(u_next, space, "forward-backward iterate")
    res = space.norm(u - u_next)
    out = StepOutcome(
        u_next=u_next,
        theta=0.0,
        lam=lam,
        j=-1,
        delta=float("nan"),
        res_wv=res,
        phi_norm=float("nan"),
        phizero=False,
        forward_evals=1,
        resolvent_evals=1,
    )
    return u_next, out


def tseng_step(u, forward, resolvent, armijo: LineSearchParams, space=None) -> tuple[np.ndarray, StepOutcome]:
    """Forward-backward-forward step with Armijo-selected step size."""
    if space is None:
        space = euclidean(len(u))
    ls = backtrack(u, forward, resolvent, armijo, space=space)
    u_next = ls.v - ls.lam * (ls.b_v - ls.b_w)
    _guard_iterate(u_next, space, "tseng iterate")
    out = StepOutcome(
        u_next=u_next,
        theta=0.0,
        lam=ls.lam,
        j=ls.j,
        delta=float("nan"),
        res_wv=space.norm(u - ls.v),
        phi_norm=float("nan"),
        phizero=False,
        forward_evals=ls.forward_evals,
        resolvent_evals=ls.resolvent_evals,
    )
    return u_next, out


def zw_step(
    u,
    forward,
    resolvent,
    lam: float,
    gamma: float,
    space=None,
    phi_zero_tol: float = 1e-14,
    sigma_check: Optional[float] = None,
) -> tuple[np.ndarray, StepOutcome]:
    """Projection-contraction step at a given step size.

    With the step size forced equal, this is the zero-inertia special case
    of the inertial contraction iteration; both run through
    :func:`mvisolve.solver.contraction_update`, so the iterates agree
    bitwise.
    """
    if space is None:
        space = euclidean(len(u))
    with np.errstate(over="ignore", invalid="ignore"):
        b_u = np.asarray(forward(u), dtype=float)
        v = np.asarray(resolvent(u - lam * b_u, lam), dtype=float)
        b_v = np.asarray(forward(v), dtype=float)
    core = contraction_update(u, v, b_u, b_v, lam, gamma, space, phi_zero_tol)
    if not core.phizero:
        _guard_iterate(core.u_next, space, "projection-contraction iterate")
    out = StepOutcome(
        u_next=core.u_next,
        theta=0.0,
        lam=lam,
        j=-1,
        delta=core.delta,
        res_wv=core.res_wv,
        phi_norm=core.phi_norm,
        phizero=core.phizero,
        forward_evals=2,
        resolvent_evals=1,
        w=u,
        v=v,
        phi=core.phi,
        sigma_check=sigma_check,
        delta_is_ratio=sigma_check is not None,
    )
    return core.u_next, out


def tc_step(
    u_prev,
    u_curr,
    k: int,
    forward,
    resolvent,
    armijo: LineSearchParams,
    gamma: float = 1.0,
    mu_tc: float = 0.5,
    alpha_k: float = 0.5,
    f: Callable[[np.ndarray], np.ndarray] = _default_half_contraction,
    theta: float = 0.5,
    eps_k: float = 1.0,
    space=None,
    literal: bool = False,
) -> tuple[np.ndarray, StepOutcome]:
    """Inertial viscosity-type projection-contraction step.

    The adaptive inertia takes ``min(eps_k / ||u_k - u_{k-1}||, theta)``
    and falls back to ``theta`` when the two iterates coincide.  By
    default the forward-backward point is computed from the extrapolated
    point ``w`` and one direction ``phi(w, v)`` is used throughout, which
    is the internally consistent form.  ``literal=True`` keeps a
    mixed-anchor variant for comparison: ``v`` from ``u_k``, the
    contraction scalar from ``phi(w, v)``, but the update along
    ``phi(u, v)``.
    """
    if space is None:
        space = euclidean(len(u_curr))
    diff = space.norm(u_curr - u_prev)
    theta_k = theta if diff == 0.0 else min(eps_k / diff, theta)
    w = u_curr + theta_k * (u_curr - u_prev)
    _guard_iterate(w, space, f"extrapolated point at k={k}")

    if literal:
        ls = backtrack(u_curr, forward, resolvent, armijo, space=space)
        v, lam, b_u, b_v = ls.v, ls.lam, ls.b_w, ls.b_v
        b_w = np.asarray(forward(w), dtype=float)
        extra_fwd = 1
        phi_scalar = (w - v) - lam * (b_w - b_v)  # feeds the contraction scalar
        phi_update = (u_curr - v) - lam * (b_u - b_v)  # direction actually stepped along
    else:
        ls = backtrack(w, forward, resolvent, armijo, space=space)
        v, lam, b_w, b_v = ls.v, ls.lam, ls.b_w, ls.b_v
        extra_fwd = 0
        phi_scalar = (w - v) - lam * (b_w - b_v)
        phi_update = phi_scalar

    with np.errstate(over="ignore", invalid="ignore"):
        res_wv = space.norm(w - v)
        pp = space.inner(phi_scalar, phi_scalar)
    if not (math.isfinite(pp) and math.isfinite(res_wv)):
        raise DivergenceError("contraction direction overflowed")
    phi_norm = math.sqrt(pp)
    if phi_norm <= 1e-14 * (1.0 + space.norm(w)):
        u_next = alpha_k * np.asarray(f(u_curr), dtype=float) + (1.0 - alpha_k) * w
        eta = float("nan")
    else:
        eta = (1.0 - mu_tc) * res_wv**2 / pp
        z = w - (gamma * eta) * phi_update
        u_next = alpha_k * np.asarray(f(u_curr), dtype=float) + (1.0 - alpha_k) * z
    _guard_iterate(u_next, space, f"viscosity iterate at k={k}")
    out = StepOutcome(
        u_next=u_next,
        theta=theta_k,
        lam=lam,
        j=ls.j,
        delta=eta,
        res_wv=res_wv,
        phi_norm=phi_norm,
        phizero=False,  # the averaging step still moves the iterate
        forward_evals=ls.forward_evals + extra_fwd,
        resolvent_evals=ls.resolvent_evals,
        w=w,
        v=v,
        phi=phi_scalar,
        sigma_check=armijo.sigma if not literal else None,
        delta_is_ratio=False,
    )
    return u_next, out


def jx_step(
    u,
    forward,
    projection,
    armijo: LineSearchParams,
    space=None,
    phi_zero_tol: float = 1e-14,
) -> tuple[np.ndarray, StepOutcome]:
    """Projection-type step for variational inequalities (relaxation fixed at 1).

    ``projection`` must be a resolvent that ignores its step argument,
    i.e. a metric projection onto the constraint set.
    """
    if space is None:
        space = euclidean(len(u))
    ls = backtrack(u, forward, projection, armijo, space=space)
    core = contraction_update(u, ls.v, ls.b_w, ls.b_v, ls.lam, 1.0, space, phi_zero_tol)
    if not core.phizero:
        _guard_iterate(core.u_next, space, "projection-type iterate")
    out = StepOutcome(
        u_next=core.u_next,
        theta=0.0,
        lam=ls.lam,
        j=ls.j,
        delta=core.delta,
        res_wv=core.res_wv,
        phi_norm=core.phi_norm,
        phizero=core.phizero,
        forward_evals=ls.forward_evals,
        resolvent_evals=ls.resolvent_evals,
        w=u,
        v=ls.v,
        phi=core.phi,
        sigma_check=armijo.sigma,
        delta_is_ratio=True,
    )
    return core.u_next, out


# ---------------------------------------------------------------------------
# driver


def run_baseline(
    cfg: BaselineConfig,
    problem,
    u0: np.ndarray,
    u1: np.ndarray,
    stop: StoppingRule,
    max_iters: int = 1000,
    check_invariants: bool = False,
    reference: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, IterationTrace]:
    """Iterate a baseline method with the shared stopping/tracing semantics.

    ``u0`` is only consumed by the inertial ``tc`` method; the others start
    from ``u1``.
    """
    space: InnerProductSpace = problem.space
    forward, resolvent = problem.forward, problem.resolvent
    if reference is None:
        reference = stop.reference
    if reference is None:
        reference = getattr(problem, "reference", None)
    solution = None
    if getattr(problem, "reference_is_solution", False):
        solution = getattr(problem, "reference", None)
    m = cfg.method

    if m == "fb":

        def step(k, u_prev, u_curr):
            _, out = fb_step(u_curr, cfg.lam_at(k), forward, resolvent, space)
            return out

    elif m == "tseng":

        def step(k, u_prev, u_curr):
            _, out = tseng_step(u_curr, forward, resolvent, cfg.armijo, space)
            return out

    elif m == "zw":
        if cfg.lambda_mode == "armijo":

            def step(k, u_prev, u_curr):
                ls = backtrack(u_curr, forward, resolvent, cfg.armijo, space=space)
                core = contraction_update(
                    u_curr, ls.v, ls.b_w, ls.b_v, ls.lam, cfg.gamma, space, cfg.phi_zero_tol
                )
                if not core.phizero:
                    _guard_iterate(core.u_next, space, "projection-contraction iterate")
                return StepOutcome(
                    u_next=core.u_next,
                    theta=0.0,
                    lam=ls.lam,
                    j=ls.j,
                    delta=core.delta,
                    res_wv=core.res_wv,
                    phi_norm=core.phi_norm,
                    phizero=core.phizero,
                    forward_evals=ls.forward_evals,
                    resolvent_evals=ls.resolvent_evals,
                    w=u_curr,
                    v=ls.v,
                    phi=core.phi,
                    sigma_check=cfg.armijo.sigma,
                    delta_is_ratio=True,
                )

        else:

            def step(k, u_prev, u_curr):
                _, out = zw_step(
                    u_curr, forward, resolvent, cfg.lam_at(k), cfg.gamma, space, cfg.phi_zero_tol
                )
                return out

    elif m == "tc":

        def step(k, u_prev, u_curr):
            _, out = tc_step(
                u_prev,
                u_curr,
                k,
                forward,
                resolvent,
                cfg.armijo,
                gamma=cfg.gamma,
                mu_tc=cfg.mu_tc,
                alpha_k=cfg.alpha_fn(k),
                f=cfg.contraction_f,
                theta=cfg.theta,
                eps_k=cfg.eps_fn(k),
                space=space,
                literal=cfg.literal,
            )
            return out

    else:  # jx

        def step(k, u_prev, u_curr):
            _, out = jx_step(u_curr, forward, resolvent, cfg.armijo, space, cfg.phi_zero_tol)
            return out

    labels = {"gamma": cfg.gamma}
    if m == "zw":
        labels["lambda_mode"] = cfg.lambda_mode
    if m == "tc":
        labels["mu_tc"] = cfg.mu_tc
        labels["literal"] = cfg.literal
    return _drive(
        step,
        u0,
        u1,
        space,
        stop,
        max_iters,
        method=cfg.display_label(),
        labels=labels,
        gamma=cfg.gamma,
        check_invariants=check_invariants,
        reference=reference,
        solution=solution,
    )
