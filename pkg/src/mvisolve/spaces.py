"""Finite-dimensional real inner-product spaces.

All solver arithmetic (norms, inner products, stopping metrics) goes
through an :class:`InnerProductSpace` so that the same code runs on plain
``R^d`` and on quadrature discretizations of function spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

__all__ = ["InnerProductSpace", "euclidean", "trapezoid_unit_interval"]


@dataclass(frozen=True)
class InnerProductSpace:
    """Dense real vectors with the weighted inner product ``<u, v> = sum_i w_i u_i v_i``.

    Parameters
    ----------
    dimension : int
        Number of coordinates.
    weights : ndarray
        Strictly positive weights, one per coordinate.  All ones gives the
        Euclidean space; quadrature weights give a discretized function
        space whose norm approximates the integral norm.
    label : str
        Human-readable tag carried into traces and reports.
    """

    dimension: int
    weights: np.ndarray
    label: str = "euclidean"
    _plain: bool = field(init=False, repr=False, default=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.dimension,):
            raise ValueError(f"weights must have shape ({self.dimension},), got {w.shape}")
        if not np.all(w > 0.0):
            raise ValueError("all quadrature weights must be strictly positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_plain", bool(np.all(w == 1.0)))

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        if self._plain:
            return float(u @ v)
        return float((self.weights * u) @ v)

    def norm2(self, u: np.ndarray) -> float:
        """Squared norm ``<u, u>``."""
        return self.inner(u, u)

    def norm(self, u: np.ndarray) -> float:
        return math.sqrt(self.inner(u, u))

    def check_member(self, u: np.ndarray, what: str = "vector") -> np.ndarray:
        """Validate shape and finiteness; returns the array as float64."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dimension,):
            raise ValueError(f"{what} has shape {u.shape}, expected ({self.dimension},)")
        if not np.all(np.isfinite(u)):
            raise ValueError(f"{what} contains non-finite entries")
        return u


def euclidean(dimension: int) -> InnerProductSpace:
    """Plain ``R^d`` with unit weights."""
    return InnerProductSpace(dimension, np.ones(dimension), label="euclidean")


def trapezoid_unit_interval(n: int) -> InnerProductSpace:
    """Uniform n-point grid on [0, 1] with trapezoidal quadrature weights.

    The weights are ``h * [1/2, 1, ..., 1, 1/2]`` with ``h = 1/(n-1)`` and
    sum to one, so the induced norm is a second-order accurate
    approximation of the integral L2 norm on [0, 1].
    """
    if n < 3:
        raise ValueError("need at least 3 grid nodes")
    h = 1.0 / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return InnerProductSpace(n, w, label=f"trapezoid[0,1]/{n}")
