"""Armijo-type geometric backtracking for the step size.

Each candidate ``lam = s * mu**j`` is accepted once the variation of the
forward map between the trial point and its forward-backward image is
dominated, after scaling by ``lam``, by the displacement itself:

    lam * ||B(w) - B(v_lam)|| <= sigma * ||w - v_lam||,
    v_lam = J(w - lam*B(w), lam).

No Lipschitz or cocoercivity constant enters; continuity of ``B`` alone
guarantees the search terminates, and the accepted ``lam`` stays bounded
away from zero along any convergent run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import InnerProductSpace, euclidean

__all__ = [
    "LineSearchParams",
    "LineSearchOutcome",
    "BacktrackExhausted",
    "NonFiniteIterate",
    "backtrack",
]


class BacktrackExhausted(RuntimeError):
    """The acceptance inequality failed for every tried exponent.

    On valid inputs the search is guaranteed finite, so exhaustion signals
    a discontinuous forward map or misconfigured parameters.
    """


class NonFiniteIterate(FloatingPointError):
    """An operator evaluation produced NaN or infinity."""


@dataclass(frozen=True)
class LineSearchParams:
    """Backtracking parameters.

    ``s`` is the initial trial step, ``mu`` the geometric reduction factor
    and ``sigma`` the acceptance ratio.  ``max_backtracks`` converts the
    theoretically finite loop into a diagnosable failure: near
    ``mu**60`` the step underflows double precision for ``mu = 0.5``.

    ``warm_start`` lets a driver seed the search one exponent below the
    previously accepted one instead of restarting from ``s`` each
    iteration.  It is off by default because the restarting rule is the
    documented behaviour; traces label runs that enable it.
    """

    s: float = 1.0
    mu: float = 0.5
    sigma: float = 0.9
    max_backtracks: int = 60
    warm_start: bool = False

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("initial step s must be positive")
        if not 0.0 < self.mu < 1.0:
            raise ValueError("backtrack factor mu must lie in (0, 1)")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("acceptance ratio sigma must lie in (0, 1)")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be a positive integer")


@dataclass(frozen=True)
class LineSearchOutcome:
    """Accepted step with everything the caller needs to avoid re-evaluations.

    ``lam == s * mu**j`` exactly, ``v`` is the accepted forward-backward
    point ``J(w - lam*B(w), lam)``, and ``b_w``, ``b_v`` cache ``B(w)`` and
    ``B(v)``.  The acceptance inequality can be re-checked from these
    fields alone.
    """

    lam: float
    j: int
    v: np.ndarray
    b_w: np.ndarray
    b_v: np.ndarray
    resolvent_evals: int
    forward_evals: int


def _require_finite(x: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NonFiniteIterate(f"{what} is non-finite")
    return x


def backtrack(
    w: np.ndarray,
    forward,
    resolvent,
    params: LineSearchParams,
    space: InnerProductSpace | None = None,
    j_start: int = 0,
) -> LineSearchOutcome:
    """Find the smallest ``j >= j_start`` whose step passes the acceptance test.

    Parameters
    ----------
    w : ndarray
        Trial point (finite).
    forward, resolvent : callables
        The single-valued map ``B`` and the resolvent ``J(x, lam)``.
    params : LineSearchParams
    space : InnerProductSpace, optional
        Norms are taken in this space; defaults to Euclidean.
    j_start : int
        First exponent to try.  0 restarts from ``s`` (the default rule);
        warm-started drivers pass ``max(0, previous_j - 1)``.

    Returns
    -------
    LineSearchOutcome

    Raises
    ------
    BacktrackExhausted
        If no exponent up to ``max_backtracks`` is accepted.
    NonFiniteIterate
        If any operator evaluation is non-finite.

    Notes
    -----
    ``B(w)`` does not depend on ``lam`` and is evaluated once; each trial
    then costs one resolvent and one forward evaluation.  The same ``lam``
    is used both inside the resolvent argument and as the scaling of the
    left-hand side.  The comparison is an exact floating-point ``<=``:
    both sides are same-scale norms, and any slack would silently change
    the accepted exponent.
    """
    if space is None:
        space = euclidean(len(w))
    _require_finite(np.asarray(w), "line-search input")
    b_w = _require_finite(np.asarray(forward(w), dtype=float), "B(w)")

    resolvent_evals = 0
    forward_evals = 1
    j = int(j_start)
    if j < 0:
        raise ValueError("j_start must be nonnegative")
    while j <= params.max_backtracks:
        lam = params.s * params.mu ** j
        v = _require_finite(np.asarray(resolvent(w - lam * b_w, lam), dtype=float), "J(w - lam*B(w))")
        b_v = _require_finite(np.asarray(forward(v), dtype=float), "B(v)")
        resolvent_evals += 1
        forward_evals += 1
        if lam * space.norm(b_w - b_v) <= params.sigma * space.norm(w - v):
            return LineSearchOutcome(
                lam=lam,
                j=j,
                v=v,
                b_w=b_w,
                b_v=b_v,
                resolvent_evals=resolvent_evals,
                forward_evals=forward_evals,
            )
        j += 1
    raise BacktrackExhausted(
        f"no step accepted down to {params.s * params.mu ** params.max_backtracks:.3e} "
        f"({params.max_backtracks} backtracks); the forward map may be discontinuous"
    )
