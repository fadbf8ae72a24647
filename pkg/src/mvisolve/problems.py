"""Benchmark problem families and constructed test problems.

Three experiment families, each assembled into a forward map, a resolvent
and an ambient space:

* sparse signal recovery ("cs"): quartic data fidelity ``||Cu - v||^4 / 4``
  plus an l1 penalty, Gaussian sensing matrix, spike signal, noise scaled
  to an exact target SNR;
* least squares with an l^alpha penalty ("lpa"): smooth but non-Lipschitz
  gradient near zero;
* a discretized integral space ("l2"): the componentwise map
  ``u*log(1+|u|)`` plus the subdifferential of the integral of ``|u|`` on a
  trapezoidal grid over [0, 1], where the zero function solves the
  inclusion exactly.

Reproducibility: every random component draws from its own child stream of
``numpy.random.SeedSequence(seed)``, spawned in a fixed order (0 matrix,
1 spike support and values, 2 noise, 3 initial point) and fed to a PCG64
generator.  The same seed therefore rebuilds the same instance on any
platform, and instances serialize to ``.npz`` files with little-endian
float64 arrays plus a JSON metadata record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .operators import (
    ForwardOperator,
    ResolventOperator,
    cubic_forward,
    l1_resolvent,
    log_forward,
    lpa_forward,
    quartic_forward,
    shifted_l1_resolvent,
)
from .spaces import InnerProductSpace, euclidean, trapezoid_unit_interval

__all__ = [
    "Problem",
    "CompressedSensingInstance",
    "LpaInstance",
    "L2Instance",
    "gen_cs",
    "gen_lpa",
    "gen_l2",
    "table_initials",
    "assemble",
    "save_instance",
    "load_instance",
    "cubic_problem",
    "strongly_monotone_problem",
]

_STREAMS = {"matrix": 0, "spikes": 1, "noise": 2, "init": 3}


def _rng(seed: int, component: str) -> np.random.Generator:
    children = np.random.SeedSequence(seed).spawn(len(_STREAMS))
    return np.random.Generator(np.random.PCG64(children[_STREAMS[component]]))


@dataclass(frozen=True)
class Problem:
    """An assembled inclusion ready for any solver in the package.

    ``reference`` is the comparison point for error metrics.
    ``reference_is_solution`` marks it as an exact solution of the
    inclusion (true for the integral-space and constructed problems, false
    for sparse recovery, where the true signal differs from the
    regularized solution by the shrinkage bias).
    """

    forward: ForwardOperator
    resolvent: ResolventOperator
    space: InnerProductSpace
    u0: np.ndarray
    u1: np.ndarray
    family: str
    metadata: dict = field(default_factory=dict)
    reference: Optional[np.ndarray] = None
    reference_is_solution: bool = False


# ---------------------------------------------------------------------------
# sparse recovery


@dataclass(frozen=True)
class CompressedSensingInstance:
    """Underdetermined linear measurements of a spike signal.

    ``v_obs = C @ u_true + noise`` with ``C`` i.i.d. standard normal,
    ``u_true`` holding ``l`` spikes drawn uniformly from [-2, 2], and the
    noise rescaled so the achieved SNR matches ``snr_db`` exactly
    (``snr_db = inf`` gives noiseless data).
    """

    C: np.ndarray
    u_true: np.ndarray
    v_obs: np.ndarray
    rho: float
    seed: int
    snr_db: float
    u_init: np.ndarray

    @property
    def d(self) -> int:
        return self.C.shape[1]

    @property
    def m(self) -> int:
        return self.C.shape[0]

    @property
    def l(self) -> int:
        return int(np.count_nonzero(self.u_true))

    @property
    def achieved_snr_db(self) -> float:
        noise = self.v_obs - self.C @ self.u_true
        p_noise = float(noise @ noise)
        if p_noise == 0.0:
            return float("inf")
        p_signal = float((self.C @ self.u_true) @ (self.C @ self.u_true))
        return 10.0 * np.log10(p_signal / p_noise)


def gen_cs(
    d: int,
    m: int,
    l: int,
    snr_db: float = 40.0,
    rho: Optional[float] = None,
    seed: int = 0,
) -> CompressedSensingInstance:
    """Generate a sparse-recovery instance, deterministic in ``seed``.

    ``rho`` defaults to ``0.005 * ||C^T v_obs||_inf``, a standard
    regularization-path heuristic; pass ``rho = 0.0`` together with
    ``snr_db = inf`` for the noiseless diagnostic in which the true signal
    is an exact fixed point of the forward-backward map.
    """
    if not (l <= d and m <= d):
        raise ValueError("need l <= d and m <= d")
    C = _rng(seed, "matrix").standard_normal((m, d))

    rs = _rng(seed, "spikes")
    support = rs.choice(d, size=l, replace=False)
    values = rs.uniform(-2.0, 2.0, size=l)
    u_true = np.zeros(d)
    u_true[support] = values
    if np.count_nonzero(u_true) != l:  # uniform draw hit 0.0 exactly
        values[values == 0.0] = 1.0
        u_true[support] = values

    clean = C @ u_true
    if np.isinf(snr_db):
        noise = np.zeros(m)
    else:
        noise = _rng(seed, "noise").standard_normal(m)
        target = float(clean @ clean) / 10.0 ** (snr_db / 10.0)
        noise *= np.sqrt(target) / np.linalg.norm(noise)
    v_obs = clean + noise

    if rho is None:
        rho = 0.005 * float(np.max(np.abs(C.T @ v_obs)))
    u_init = _rng(seed, "init").standard_normal(d)
    return CompressedSensingInstance(C, u_true, v_obs, float(rho), seed, float(snr_db), u_init)


# ---------------------------------------------------------------------------
# least squares + l^alpha penalty


@dataclass(frozen=True)
class LpaInstance:
    """Least-squares data with an l^alpha penalty, alpha strictly in (1, 2)."""

    Q: np.ndarray
    q: np.ndarray
    mu: float
    alpha: float
    rho: float
    seed: int
    u_init: np.ndarray
    u_true: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise ValueError("alpha must lie strictly inside (1, 2)")

    @property
    def d(self) -> int:
        return self.Q.shape[1]

    @property
    def m(self) -> int:
        return self.Q.shape[0]


def gen_lpa(
    d: int,
    m: int,
    l: int = 10,
    snr_db: float = 40.0,
    mu: float = 0.01,
    alpha: float = 1.5,
    rho: float = 0.01,
    seed: int = 0,
) -> LpaInstance:
    """Generate an instance with the same measurement recipe as ``gen_cs``.

    Defaults ``alpha = 1.5``, ``mu = 0.01``, ``rho = 0.01``.
    """
    cs = gen_cs(d, m, l, snr_db=snr_db, rho=1.0, seed=seed)
    return LpaInstance(
        Q=cs.C,
        q=cs.v_obs,
        mu=float(mu),
        alpha=float(alpha),
        rho=float(rho),
        seed=seed,
        u_init=cs.u_init,
        u_true=cs.u_true,
    )


# ---------------------------------------------------------------------------
# discretized integral space


@dataclass(frozen=True)
class L2Instance:
    """Initial pair on a trapezoidal grid over [0, 1]; the zero function solves it."""

    n: int
    case_id: int
    u0: np.ndarray
    u1: np.ndarray

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be at least 3")


def table_initials(case_id: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample the four standard starting pairs on the uniform n-grid.

    case 1:  cos^2(2 pi t)/4           and  3 e^(-2t) cos(3t)/25
    case 2:  (e^(2t) + cos(4t))/10     and  cos^2(2 pi t)/4
    case 3:  (e^(2t) + cos(4t))/10     and  3 e^(-2t) cos(3t)/25
    case 4:  cos^2(2 pi t)/4           and  (e^(2t) + cos(4t))/10
    """
    t = np.linspace(0.0, 1.0, n)
    f_a = np.cos(2.0 * np.pi * t) ** 2 / 4.0
    f_b = 3.0 * np.exp(-2.0 * t) * np.cos(3.0 * t) / 25.0
    f_c = (np.exp(2.0 * t) + np.cos(4.0 * t)) / 10.0
    pairs = {1: (f_a, f_b), 2: (f_c, f_a), 3: (f_c, f_b), 4: (f_a, f_c)}
    if case_id not in pairs:
        raise ValueError(f"unknown case id {case_id}; expected 1..4")
    return pairs[case_id]


def gen_l2(case_id: int, n: int = 1001) -> L2Instance:
    u0, u1 = table_initials(case_id, n)
    return L2Instance(n=n, case_id=case_id, u0=u0, u1=u1)


# ---------------------------------------------------------------------------
# assembly


def assemble(instance) -> Problem:
    """Build the solver-facing problem for any generated instance.

    * sparse recovery: quartic fidelity gradient + soft threshold at
      ``lam * rho``, Euclidean space, reference = the true spike signal;
    * l^alpha penalty: its gradient + soft threshold at ``lam * rho``;
    * integral space: ``u*log(1+|u|)`` + pointwise soft threshold at
      ``lam`` under the trapezoidal inner product.  The quadrature weights
      cancel coordinatewise in that proximal map on a uniform grid, so the
      plain soft threshold is exact; the reference solution is zero.
    """
    if isinstance(instance, CompressedSensingInstance):
        d = instance.d
        # benchmark initialization: the zero vector, the usual sparse-recovery
        # starting point; instance.u_init carries a seeded random alternative
        return Problem(
            forward=quartic_forward(instance.C, instance.v_obs),
            resolvent=l1_resolvent(instance.rho),
            space=euclidean(d),
            u0=np.zeros(d),
            u1=np.zeros(d),
            family="cs",
            metadata={
                "d": d,
                "m": instance.m,
                "l": instance.l,
                "rho": instance.rho,
                "seed": instance.seed,
                "snr_db": instance.snr_db,
                "achieved_snr_db": instance.achieved_snr_db,
            },
            reference=instance.u_true.copy(),
        )
    if isinstance(instance, LpaInstance):
        return Problem(
            forward=lpa_forward(instance.Q, instance.q, instance.mu, instance.alpha),
            resolvent=l1_resolvent(instance.rho),
            space=euclidean(instance.d),
            u0=np.zeros(instance.d),
            u1=np.zeros(instance.d),
            family="lpa",
            metadata={
                "d": instance.d,
                "m": instance.m,
                "mu": instance.mu,
                "alpha": instance.alpha,
                "rho": instance.rho,
                "seed": instance.seed,
            },
        )
    if isinstance(instance, L2Instance):
        return Problem(
            forward=log_forward(),
            resolvent=l1_resolvent(1.0),
            space=trapezoid_unit_interval(instance.n),
            u0=instance.u0.copy(),
            u1=instance.u1.copy(),
            family="l2",
            metadata={"n": instance.n, "case_id": instance.case_id},
            reference=np.zeros(instance.n),
            reference_is_solution=True,
        )
    raise TypeError(f"cannot assemble {type(instance).__name__}")


# ---------------------------------------------------------------------------
# constructed test problems with a known solution


def cubic_problem(u_start=(2.0, -2.0), rho: float = 1.0) -> Problem:
    """Componentwise cubic forward map plus an l1 resolvent; zero solves it.

    The cubic map is monotone and continuous but has no global Lipschitz
    constant, and ``0`` belongs to ``B(0) + rho*[-1, 1]^d``.
    """
    u = np.asarray(u_start, dtype=float)
    d = len(u)
    return Problem(
        forward=cubic_forward(),
        resolvent=l1_resolvent(rho),
        space=euclidean(d),
        u0=u.copy(),
        u1=u.copy(),
        family="cubic",
        metadata={"d": d, "rho": rho},
        reference=np.zeros(d),
        reference_is_solution=True,
    )


def strongly_monotone_problem(
    u_start, rho: float = 0.1, beta: float = 0.1
) -> Problem:
    """l1-plus-identity-shift resolvent with the log forward map; zero solves it.

    The set-valued part is ``beta``-strongly monotone, which upgrades the
    convergence of the contraction solver to a linear rate.
    """
    u = np.asarray(u_start, dtype=float)
    d = len(u)
    return Problem(
        forward=log_forward(),
        resolvent=shifted_l1_resolvent(rho, beta),
        space=euclidean(d),
        u0=u.copy(),
        u1=u.copy(),
        family="strong",
        metadata={"d": d, "rho": rho, "beta": beta},
        reference=np.zeros(d),
        reference_is_solution=True,
    )


# ---------------------------------------------------------------------------
# serialization


def save_instance(instance, path) -> None:
    """Write an instance to ``.npz``: little-endian float64 arrays + JSON metadata."""
    arrays = {}
    if isinstance(instance, CompressedSensingInstance):
        meta = {
            "family": "cs",
            "d": instance.d,
            "m": instance.m,
            "l": instance.l,
            "rho": instance.rho,
            "seed": instance.seed,
            "snr_db": instance.snr_db,
        }
        arrays = {
            "C": instance.C,
            "u_true": instance.u_true,
            "v_obs": instance.v_obs,
            "u_init": instance.u_init,
        }
    elif isinstance(instance, LpaInstance):
        meta = {
            "family": "lpa",
            "d": instance.d,
            "m": instance.m,
            "mu": instance.mu,
            "alpha": instance.alpha,
            "rho": instance.rho,
            "seed": instance.seed,
        }
        arrays = {"Q": instance.Q, "q": instance.q, "u_init": instance.u_init}
        if instance.u_true is not None:
            arrays["u_true"] = instance.u_true
    elif isinstance(instance, L2Instance):
        meta = {"family": "l2", "n": instance.n, "case_id": instance.case_id}
        arrays = {"u0": instance.u0, "u1": instance.u1}
    else:
        raise TypeError(f"cannot serialize {type(instance).__name__}")
    payload = {k: np.ascontiguousarray(v, dtype="<f8") for k, v in arrays.items()}
    payload["meta_json"] = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
    np.savez(path, **payload)


def load_instance(path):
    """Rebuild an instance saved by :func:`save_instance`."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta_json"]).decode("utf-8"))
        arrays = {k: np.asarray(data[k], dtype=float) for k in data.files if k != "meta_json"}
    family = meta["family"]
    if family == "cs":
        return CompressedSensingInstance(
            C=arrays["C"],
            u_true=arrays["u_true"],
            v_obs=arrays["v_obs"],
            rho=meta["rho"],
            seed=meta["seed"],
            snr_db=meta["snr_db"],
            u_init=arrays["u_init"],
        )
    if family == "lpa":
        return LpaInstance(
            Q=arrays["Q"],
            q=arrays["q"],
            mu=meta["mu"],
            alpha=meta["alpha"],
            rho=meta["rho"],
            seed=meta["seed"],
            u_init=arrays["u_init"],
            u_true=arrays.get("u_true"),
        )
    if family == "l2":
        return L2Instance(n=meta["n"], case_id=meta["case_id"], u0=arrays["u0"], u1=arrays["u1"])
    raise ValueError(f"unknown family {family!r} in {path}")
