"""Composite problem model F = f + h and a zoo of certified instances.

Every zoo problem carries, when available, its exact minimizer set (as a
projectable convex set), the optimal value, and a growth certificate
(quadratic with modulus mu, or power growth K * d(x, X*)^gamma).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .vecgeo import AffineSubspace, ConvexSet, as_vector

# Finite stand-in for +inf objective values; avoids NaN propagation.
INF_SENTINEL = 1e300


@dataclass
class SmoothPart:
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    lipschitz_L: float
    validity_radius: Optional[float] = None


@dataclass
class ProxPart:
    value: Callable[[np.ndarray], float]
    prox: Callable[[float, np.ndarray], np.ndarray]
    is_zero: bool = False

    @staticmethod
    def zero() -> "ProxPart":
        return ProxPart(value=lambda x: 0.0,
                        prox=lambda s, x: np.array(x, dtype=float, copy=True),
                        is_zero=True)

    @staticmethod
    def l1(lam: float) -> "ProxPart":
        if lam <= 0:
            raise ValueError("l1 weight must be positive")

        def value(x):
            return lam * float(np.sum(np.abs(x)))

        def prox(s, x):
            t = s * lam
            return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)

        return ProxPart(value=value, prox=prox)


@dataclass(frozen=True)
class GrowthCertificate:
    """kind 'quadratic' (mu), 'hoelder' (gamma, K) or 'none'.

    radius is None for global certificates, otherwise the local radius
    around the solution set where the bound is certified.
    """

    kind: str = "none"
    mu: Optional[float] = None
    gamma: Optional[float] = None
    K: Optional[float] = None
    radius: Optional[float] = None

    def lower_bound(self, d: float) -> float:
        if self.kind == "quadratic":
            return 0.5 * self.mu * d * d
        if self.kind == "hoelder":
            return self.K * d ** self.gamma
        raise ValueError("no growth certificate")


@dataclass
class CompositeProblem:
    f: SmoothPart
    h: ProxPart
    dim: int
    name: str = "problem"
    solution_set: Optional[ConvexSet] = None
    f_star: Optional[float] = None
    growth: GrowthCertificate = field(default_factory=GrowthCertificate)
    coercive: bool = True

    @property
    def L(self) -> float:
        return self.f.lipschitz_L

    def eval_F(self, x) -> float:
        x = as_vector(x)
        hv = self.h.value(x)
        if hv >= INF_SENTINEL:
            return INF_SENTINEL
        return float(self.f.value(x)) + float(hv)

    def grad_f(self, x) -> np.ndarray:
        return np.asarray(self.f.grad(as_vector(x)), dtype=float)

    def prox_h(self, s: float, x) -> np.ndarray:
        return np.asarray(self.h.prox(s, as_vector(x)), dtype=float)

    def dist_star(self, x) -> Optional[float]:
        if self.solution_set is None:
            return None
        return self.solution_set.dist(as_vector(x))

    def in_certified_region(self, x) -> bool:
        """True unless a validity radius is set and x lies outside it."""
        if self.f.validity_radius is None or self.solution_set is None:
            return True
        return self.solution_set.dist(as_vector(x)) <= self.f.validity_radius


def eval_F(P: CompositeProblem, x) -> float:
    return P.eval_F(x)


def _orthonormal_null_basis(A: np.ndarray, tol: float) -> np.ndarray:
    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > tol * max(A.shape) * (s[0] if s.size else 1.0)))
    return vt[rank:]


def make_rankdef_least_squares(A, b, name: str = "rankdef_ls") -> CompositeProblem:
    """f(x) = 0.5 ||Ax - b||^2 with b in range(A), h = 0.

    The solution set is the affine set of exact solutions; the quadratic
    growth modulus is the smallest positive eigenvalue of A^T A.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = as_vector(b)
    if A.shape[0] != b.shape[0]:
        raise ValueError("A and b have incompatible shapes")
    d = A.shape[1]

    x_p, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.linalg.norm(A @ x_p - b) > 1e-9 * (1.0 + np.linalg.norm(b)):
        raise ValueError("b is not in the range of A")

    AtA = A.T @ A
    Atb = A.T @ b
    eigs = np.linalg.eigvalsh(AtA)
    L = float(eigs[-1])
    pos = eigs[eigs > 1e-12 * max(L, 1.0)]
    if pos.size == 0:
        raise ValueError("A is the zero matrix")
    mu = float(pos[0])

    null_basis = _orthonormal_null_basis(A, np.finfo(float).eps)
    X_star = AffineSubspace(offset=x_p, directions=null_basis)

    f = SmoothPart(
        value=lambda x: 0.5 * float(np.dot(A @ x - b, A @ x - b)),
        grad=lambda x: AtA @ x - Atb,
        lipschitz_L=L,
    )
    return CompositeProblem(
        f=f, h=ProxPart.zero(), dim=d, name=name,
        solution_set=X_star, f_star=0.0,
        growth=GrowthCertificate(kind="quadratic", mu=mu),
    )


def make_hoelder_distance(C: ConvexSet, gamma: float, K: float, R: float,
                          name: str = "hoelder_dist") -> CompositeProblem:
    """F(x) = K * dist(x, C)^gamma with gradient certified on dist <= R."""
    if gamma <= 2:
        raise ValueError("gamma must exceed 2")
    if K <= 0 or R <= 0:
        raise ValueError("K and R must be positive")

    def value(x):
        return K * C.dist(x) ** gamma

    def grad(x):
        p = C.project(x)
        d = float(np.linalg.norm(x - p))
        if d == 0.0:
            return np.zeros_like(x)
        return K * gamma * d ** (gamma - 2.0) * (x - p)

    L = K * gamma * (gamma - 1.0) * R ** (gamma - 2.0)
    f = SmoothPart(value=value, grad=grad, lipschitz_L=L, validity_radius=R)
    return CompositeProblem(
        f=f, h=ProxPart.zero(), dim=C.dim, name=name,
        solution_set=C, f_star=0.0,
        growth=GrowthCertificate(kind="hoelder", gamma=gamma, K=K),
    )


def make_lasso(A, b, lam: float, name: str = "lasso") -> CompositeProblem:
    """f(x) = 0.5 ||Ax - b||^2, h = lam * ||x||_1 (soft-threshold prox)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = as_vector(b)
    AtA = A.T @ A
    Atb = A.T @ b
    L = float(np.linalg.eigvalsh(AtA)[-1])
    f = SmoothPart(
        value=lambda x: 0.5 * float(np.dot(A @ x - b, A @ x - b)),
        grad=lambda x: AtA @ x - Atb,
        lipschitz_L=L,
    )
    return CompositeProblem(f=f, h=ProxPart.l1(lam), dim=A.shape[1], name=name)


def make_simple_quadratic(d: int, mu: float = 1.0,
                          name: str = "quadratic") -> CompositeProblem:
    """F(x) = mu/2 ||x||^2 with X* = {0}; strongly convex reference problem."""
    f = SmoothPart(
        value=lambda x: 0.5 * mu * float(np.dot(x, x)),
        grad=lambda x: mu * np.asarray(x, dtype=float),
        lipschitz_L=mu,
    )
    X_star = AffineSubspace(offset=np.zeros(d))
    return CompositeProblem(
        f=f, h=ProxPart.zero(), dim=d, name=name,
        solution_set=X_star, f_star=0.0,
        growth=GrowthCertificate(kind="quadratic", mu=mu),
    )


@dataclass
class GrowthReport:
    min_ratio: float
    samples: int

    @property
    def ok(self) -> bool:
        return self.min_ratio >= 1.0 - 1e-9


def check_growth(P: CompositeProblem, samples: int, rng_seed: int) -> GrowthReport:
    """Sample the certified region and report min (F(x)-F*) / growth bound."""
    if P.solution_set is None or P.f_star is None or P.growth.kind == "none":
        raise ValueError("problem lacks solution set, f_star or certificate")
    from .vecgeo import sample_point

    rng = np.random.default_rng(rng_seed)
    radius = P.growth.radius if P.growth.radius is not None else 5.0
    worst = np.inf
    n_used = 0
    while n_used < samples:
        base = sample_point(P.solution_set, rng)
        step = rng.standard_normal(P.dim)
        nrm = np.linalg.norm(step)
        if nrm == 0:
            continue
        x = base + (radius * rng.random() / nrm) * step
        d = P.solution_set.dist(x)
        if d < 1e-12:
            continue
        ratio = (P.eval_F(x) - P.f_star) / P.growth.lower_bound(d)
        worst = min(worst, ratio)
        n_used += 1
    return GrowthReport(min_ratio=float(worst), samples=n_used)


def estimate_lasso_fstar(P: CompositeProblem, iters: int = 10 ** 6,
                         starts: Tuple[float, ...] = (0.0, 1.0, -1.0),
                         guard: float = 1e-13) -> float:
    """Estimate F* by long proximal-gradient runs from several starts.

    Returns min F minus a small relative guard so recorded gaps stay
    nonnegative.
    """
    s = 1.0 / P.L
    best = np.inf
    for scale in starts:
        x = np.full(P.dim, float(scale))
        for _ in range(iters):
            x = P.prox_h(s, x - s * P.grad_f(x))
        best = min(best, P.eval_F(x))
    return best - guard * abs(best)
