"""Operator primitives: single-valued forward maps and resolvents.

The solvers only ever touch two things: a monotone single-valued map
evaluated directly, and a set-valued maximal monotone operator exposed
through its resolvent ``(I + lam*A)^{-1}``.  Both are wrapped in thin
immutable carriers so traces can label them and benchmarks can share them
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ForwardOperator",
    "ResolventOperator",
    "soft_threshold",
    "quartic_fidelity_gradient",
    "lpa_gradient",
    "log_operator",
    "box_projection",
    "zero_forward",
    "identity_forward",
    "cubic_forward",
    "log_forward",
    "quartic_forward",
    "lpa_forward",
    "linear_forward",
    "identity_resolvent",
    "l1_resolvent",
    "box_resolvent",
    "shifted_l1_resolvent",
]


@dataclass(frozen=True)
class ForwardOperator:
    """Single-valued map ``u -> B(u)``, evaluated directly.

    ``lipschitz_hint`` is informational only; no solver in this package
    requires a Lipschitz constant.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    label: str = "forward"
    lipschitz_hint: Optional[float] = None

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.fn(u)


@dataclass(frozen=True)
class ResolventOperator:
    """Set-valued operator exposed through ``x -> (I + lam*A)^{-1}(x)``.

    For subdifferentials this is the proximal map, for normal cones the
    metric projection.  ``apply`` must be single-valued and
    dimension-preserving for every ``lam > 0``.
    """

    apply: Callable[[np.ndarray, float], np.ndarray]
    label: str = "resolvent"

    def __call__(self, x: np.ndarray, lam: float) -> np.ndarray:
        return self.apply(x, lam)


# ---------------------------------------------------------------------------
# concrete maps


def soft_threshold(u: np.ndarray, tau: float) -> np.ndarray:
    """Componentwise shrinkage ``sgn(u_i) * max(0, |u_i| - tau)``.

    This is the proximal map of ``tau * ||.||_1``; with ``tau = lam * rho``
    it is the resolvent of the scaled l1 subdifferential.

    Parameters
    ----------
    u : ndarray
        Input vector.
    tau : float
        Nonnegative threshold.
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    return np.sign(u) * np.maximum(np.abs(u) - tau, 0.0)


def quartic_fidelity_gradient(C: np.ndarray, v: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Gradient ``||Cu - v||^2 * C^T (Cu - v)`` of ``u -> ||Cu - v||^4 / 4``.

    Convex and differentiable but not globally Lipschitz: the local
    Lipschitz constant grows with the residual norm, which is exactly the
    regime the Armijo-backtracked solvers are built for.
    """
    r = C @ u - v
    return float(r @ r) * (C.T @ r)


def lpa_gradient(Q: np.ndarray, q: np.ndarray, mu: float, alpha: float, u: np.ndarray) -> np.ndarray:
    """Gradient of the least-squares plus l^alpha penalty objective.

    Returns ``Q^T(Qu - q) + mu*alpha*sgn(u_i)|u_i|^(alpha-1)`` componentwise
    for ``alpha`` in (1, 2).  The penalty term is 0 at ``u_i = 0`` (the
    minimal-norm subgradient, and the limit of the formula since
    ``alpha > 1``); the derivative is unbounded near zero, so the map is
    continuous but not Lipschitz.
    """
    if not 1.0 < alpha < 2.0:
        raise ValueError("alpha must lie strictly inside (1, 2)")
    if mu <= 0:
        raise ValueError("mu must be positive")
    r = Q @ u - q
    # 0**(alpha-1) == 0 and sign(0) == 0, so no special case is needed at 0.
    return Q.T @ r + mu * alpha * np.sign(u) * np.abs(u) ** (alpha - 1.0)


def log_operator(u: np.ndarray) -> np.ndarray:
    """Componentwise ``u_i * log(1 + |u_i|)``.

    Monotone on the whole line, continuous, and not Lipschitz near zero.
    """
    return u * np.log1p(np.abs(u))


def box_projection(u: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Componentwise clamp of ``u`` to ``[lo, hi]``; independent of any step size."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise ValueError("box is empty: lo > hi in some coordinate")
    return np.clip(u, lo, hi)


# ---------------------------------------------------------------------------
# wrapped operator factories


def zero_forward() -> ForwardOperator:
    return ForwardOperator(lambda u: np.zeros_like(u), label="zero", lipschitz_hint=0.0)


def identity_forward() -> ForwardOperator:
    return ForwardOperator(lambda u: u, label="identity", lipschitz_hint=1.0)


def cubic_forward() -> ForwardOperator:
    """Componentwise ``u -> u^3``: monotone, continuous, not globally Lipschitz."""
    return ForwardOperator(lambda u: u ** 3, label="cubic")


def log_forward() -> ForwardOperator:
    return ForwardOperator(log_operator, label="x*log1p|x|")


def quartic_forward(C: np.ndarray, v: np.ndarray) -> ForwardOperator:
    C = np.asarray(C, dtype=float)
    v = np.asarray(v, dtype=float)
    return ForwardOperator(
        lambda u: quartic_fidelity_gradient(C, v, u),
        label=f"quartic-fidelity[{C.shape[0]}x{C.shape[1]}]",
    )


def lpa_forward(Q: np.ndarray, q: np.ndarray, mu: float, alpha: float) -> ForwardOperator:
    Q = np.asarray(Q, dtype=float)
    q = np.asarray(q, dtype=float)
    return ForwardOperator(
        lambda u: lpa_gradient(Q, q, mu, alpha, u),
        label=f"lsq+l^{alpha}[{Q.shape[0]}x{Q.shape[1]}]",
    )


def linear_forward(M: np.ndarray, label: str = "linear") -> ForwardOperator:
    """``u -> M u``; monotone whenever ``M + M^T`` is positive semidefinite."""
    M = np.asarray(M, dtype=float)
    return ForwardOperator(lambda u: M @ u, label=label, lipschitz_hint=float(np.linalg.norm(M, 2)))


def identity_resolvent() -> ResolventOperator:
    """Resolvent of the zero operator: the identity for every step size."""
    return ResolventOperator(lambda x, lam: x, label="identity")


def l1_resolvent(rho: float) -> ResolventOperator:
    """Resolvent of the scaled l1 subdifferential: ``x -> soft(x, lam*rho)``."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    return ResolventOperator(lambda x, lam: soft_threshold(x, lam * rho), label=f"soft[rho={rho:g}]")


def box_resolvent(lo: np.ndarray, hi: np.ndarray) -> ResolventOperator:
    """Resolvent of the normal cone of a box: projection, independent of lam."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise ValueError("box is empty: lo > hi in some coordinate")
    return ResolventOperator(lambda x, lam: np.clip(x, lo, hi), label="box-projection")


def shifted_l1_resolvent(rho: float, beta: float) -> ResolventOperator:
    """Resolvent of the strongly monotone operator ``(scaled l1 subdifferential) + beta*I``.

    Solving ``x in y + lam*(rho*sgn(y) + beta*y)`` coordinatewise gives
    ``y = soft(x / (1 + lam*beta), lam*rho / (1 + lam*beta))``.
    """
    if rho < 0 or beta <= 0:
        raise ValueError("need rho >= 0 and beta > 0")

    def apply(x, lam):
        c = 1.0 + lam * beta
        return soft_threshold(x / c, lam * rho / c)

    return ResolventOperator(apply, label=f"soft-shifted[rho={rho:g},beta={beta:g}]")
