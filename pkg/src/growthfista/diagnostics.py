"""Sequence quantities, discrete Lyapunov energies and numeric verifiers.

Conventions for the per-iteration arrays (n = 0..N, entries at undefined
indices are zero):

    w[n]     = (2/L) (F(x_n) - F*)
    h[n]     = ||x_n - x_n*||^2
    delta[n] = ||x_n - x_{n-1}||^2                       (n >= 1)
    gstar[n] = ||x_n* - x_{n-1}*||^2                     (n >= 1)
    c_step[n] = <x_{n-1} - x_{n-1}*, x_n - x_{n-1}>      (n >= 1)
    c_cur[n]  = <x_n - x_n*, x_n* - x_{n-1}*>            (n >= 1)
    c_prev[n] = <x_{n-1} - x_{n-1}*, x_n* - x_{n-1}*>    (n >= 1)

where x_n* is the projection of x_n onto the minimizer set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .problems import CompositeProblem
from .solvers import Trace
from .vecgeo import as_vector

MAX_VERIFIER_ITERATES = 10 ** 4


@dataclass
class VerifierReport:
    name: str
    n_lo: int
    n_hi: int
    worst_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst_violation <= self.tolerance

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: worst violation "
                f"{self.worst_violation:.3e} (tol {self.tolerance:.1e}, "
                f"n in [{self.n_lo}, {self.n_hi}])")


@dataclass
class SeqQuantities:
    alpha: float
    L: float
    xs: List[np.ndarray]
    stars: List[np.ndarray]
    w: np.ndarray
    h: np.ndarray
    delta: np.ndarray
    gstar: np.ndarray
    c_step: np.ndarray
    c_cur: np.ndarray
    c_prev: np.ndarray

    @property
    def N(self) -> int:
        return len(self.xs) - 1

    def alpha_n(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return n / (n + self.alpha)

    def b_E(self, n: int, lam: float) -> float:
        """||lam (x_{n-1} - x_{n-1}*) + n (x_n - x_{n-1})||^2."""
        v = lam * (self.xs[n - 1] - self.stars[n - 1]) + n * (self.xs[n] - self.xs[n - 1])
        return float(np.dot(v, v))

    def b_flat(self, n: int, lam: float) -> float:
        """||lam (x_n - x_n*) + n alpha_n (x_n - x_{n-1})||^2."""
        an = n / (n + self.alpha)
        v = lam * (self.xs[n] - self.stars[n]) + n * an * (self.xs[n] - self.xs[n - 1])
        return float(np.dot(v, v))


def gradient_mapping(P: CompositeProblem, x) -> np.ndarray:
    """g(x) = L (x - prox_{h/L}(x - grad f(x)/L)); zero exactly on X*."""
    x = as_vector(x)
    L = P.L
    return L * (x - P.prox_h(1.0 / L, x - P.grad_f(x) / L))


def control1_check(P: CompositeProblem, x) -> float:
    """(F(x) - F*) - ||g(x)||^2 / (2L); nonnegative for convex composites."""
    if P.f_star is None:
        raise ValueError("f_star unknown")
    g = gradient_mapping(P, x)
    return (P.eval_F(x) - P.f_star) - float(np.dot(g, g)) / (2.0 * P.L)


def compute_seq_quantities(trace: Trace, P: CompositeProblem,
                           alpha: Optional[float] = None) -> SeqQuantities:
    if trace.iterates is None:
        raise ValueError("trace has no stored iterates (use record_stride = 1)")
    if P.solution_set is None or P.f_star is None:
        raise ValueError("verifiers need the solution set and optimal value")
    xs = trace.iterates[:MAX_VERIFIER_ITERATES + 1]
    if alpha is None:
        alpha = getattr(trace.config, "alpha", 0.0)
    N = len(xs) - 1
    stars = [P.solution_set.project(x) for x in xs]
    w = np.zeros(N + 1)
    h = np.zeros(N + 1)
    delta = np.zeros(N + 1)
    gstar = np.zeros(N + 1)
    c_step = np.zeros(N + 1)
    c_cur = np.zeros(N + 1)
    c_prev = np.zeros(N + 1)
    L = P.L
    for n in range(N + 1):
        w[n] = (2.0 / L) * (P.eval_F(xs[n]) - P.f_star)
        dn = xs[n] - stars[n]
        h[n] = float(np.dot(dn, dn))
        if n >= 1:
            step = xs[n] - xs[n - 1]
            gs = stars[n] - stars[n - 1]
            prev = xs[n - 1] - stars[n - 1]
            delta[n] = float(np.dot(step, step))
            gstar[n] = float(np.dot(gs, gs))
            c_step[n] = float(np.dot(prev, step))
            c_cur[n] = float(np.dot(dn, gs))
            c_prev[n] = float(np.dot(prev, gs))
    return SeqQuantities(alpha=float(alpha), L=L, xs=list(xs), stars=stars,
                         w=w, h=h, delta=delta, gstar=gstar,
                         c_step=c_step, c_cur=c_cur, c_prev=c_prev)


def _report(name: str, residuals, tol: float, n_lo: int, n_hi: int) -> VerifierReport:
    worst = float(np.max(residuals)) if len(residuals) else 0.0
    return VerifierReport(name=name, n_lo=n_lo, n_hi=n_hi,
                          worst_violation=worst, tolerance=tol)


def _scaled(lhs: float, rhs: float) -> float:
    return (lhs - rhs) / (1.0 + max(abs(lhs), abs(rhs)))


# ---------------------------------------------------------------------------
# algebraic identities (hold for arbitrary sequences and projections)

def verify_lemma_tech1(q: SeqQuantities, tol: float = 1e-10) -> VerifierReport:
    res = []
    for n in range(1, q.N + 1):
        lhs1 = float(np.dot(q.xs[n] - q.stars[n], q.xs[n] - q.xs[n - 1]))
        rhs1 = 0.5 * (q.h[n] - q.h[n - 1] + q.delta[n] - q.gstar[n]) + q.c_prev[n]
        lhs2 = q.c_step[n]
        rhs2 = 0.5 * (q.h[n] - q.h[n - 1] - q.delta[n] + q.gstar[n]) + q.c_cur[n]
        res.append(abs(_scaled(lhs1, rhs1)))
        res.append(abs(_scaled(lhs2, rhs2)))
    return _report("lemma_tech1", res, tol, 1, q.N)


def verify_energy_identity(q: SeqQuantities, alpha: float,
                           tol: float = 1e-10) -> VerifierReport:
    """The two algebraic forms of the main discrete energy agree."""
    lam = 2.0 * alpha / 3.0
    res = []
    for n in range(1, q.N + 1):
        direct = n * n * q.w[n] + q.b_E(n, lam)
        expanded = (n * n * q.w[n] + lam * lam * q.h[n - 1]
                    + n * n * q.delta[n] + 2.0 * lam * n * q.c_step[n])
        res.append(abs(_scaled(direct, expanded)))
    return _report("energy_two_forms", res, tol, 1, q.N)


def verify_dev_bn(q: SeqQuantities, lam: float,
                  tol: float = 1e-10) -> VerifierReport:
    """Expansion of b_n = ||lam (x_n - x_n*) + n alpha_n (x_n - x_{n-1})||^2."""
    res = []
    for n in range(1, q.N + 1):
        na = n * (n / (n + q.alpha))
        lhs = q.b_flat(n, lam)
        rhs = (lam * lam * q.h[n] + lam * na * (q.h[n] - q.h[n - 1])
               + na * (na + lam) * q.delta[n]
               - lam * na * q.gstar[n] + 2.0 * lam * na * q.c_prev[n])
        res.append(abs(_scaled(lhs, rhs)))
    return _report("dev_bn", res, tol, 1, q.N)


def verify_sign_facts(q: SeqQuantities, tol: float = 1e-12) -> VerifierReport:
    """gamma* >= 0, c_cur >= 0, c_prev <= 0 (projection variational facts)."""
    res = []
    for n in range(1, q.N + 1):
        scale = 1.0 + max(abs(q.c_cur[n]), abs(q.c_prev[n]), q.gstar[n])
        res.append(-q.gstar[n] / scale)
        res.append(-q.c_cur[n] / scale)
        res.append(q.c_prev[n] / scale)
    return _report("projection_sign_facts", res, tol, 1, q.N)


# ---------------------------------------------------------------------------
# inequalities along genuine FISTA runs with s = 1/L

def verify_descent_lemma(q: SeqQuantities, alpha: float,
                         tol: float = 1e-9) -> VerifierReport:
    res = []
    for n in range(1, q.N):
        an = n / (n + alpha)
        lhs = q.w[n + 1] - q.w[n]
        rhs = an * an * q.delta[n] - q.delta[n + 1]
        res.append(_scaled(lhs, rhs))
    return _report("descent_lemma", res, tol, 1, q.N - 1)


def verify_lemma_tech2_claim2(q: SeqQuantities, alpha: float,
                              tol: float = 1e-9) -> VerifierReport:
    res = []
    for n in range(1, q.N):
        an = n / (n + alpha)
        lhs = q.w[n + 1]
        rhs = ((1.0 + an) * q.h[n] + (an * an + an) * q.delta[n]
               - an * q.h[n - 1] - q.h[n + 1] - q.gstar[n + 1] - an * q.gstar[n]
               + 2.0 * an * q.c_prev[n] - 2.0 * q.c_cur[n + 1])
        res.append(_scaled(lhs, rhs))
    return _report("tech2_claim2", res, tol, 1, q.N - 1)


def energy_E(q: SeqQuantities, n: int, alpha: float) -> float:
    """n^2 w + lam^2 h_{n-1} + n^2 delta + 2 lam n c_step, lam = 2 alpha / 3."""
    lam = 2.0 * alpha / 3.0
    value = (n * n * q.w[n] + lam * lam * q.h[n - 1]
             + n * n * q.delta[n] + 2.0 * lam * n * q.c_step[n])
    other = n * n * q.w[n] + q.b_E(n, lam)
    if abs(value - other) > 1e-10 * (1.0 + abs(value)):
        raise AssertionError("energy form mismatch beyond tolerance")
    return value


def flat_parameters(alpha: float, gamma: float):
    """(p, lam, xi) for the flat-case energy; requires alpha > 1 + p."""
    if gamma <= 2:
        raise ValueError("gamma must exceed 2")
    p = 1.0 + 4.0 / (gamma - 2.0)
    lam = alpha - 1.0 - p
    if lam <= 0:
        raise ValueError(f"alpha = {alpha} too small for gamma = {gamma}")
    xi = lam * (lam + 1.0 - alpha)
    return p, lam, xi


def energy_flat(q: SeqQuantities, n: int, alpha: float, gamma: float):
    """Flat-case energy and its n^p-weighted companion: (E_n, J_n)."""
    p, lam, xi = flat_parameters(alpha, gamma)
    an = n / (n + alpha)
    e = (n * n * q.w[n] + q.b_flat(n, lam) + xi * q.h[n]
         + lam * n * an * an * q.delta[n])
    return e, n ** p * e


def verify_checkpoint_inequality(q: SeqQuantities, alpha: float,
                                 tol: float = 1e-8) -> VerifierReport:
    """Per-iteration decrement bound for the main energy, with the fully
    explicit coefficient formulas."""
    lam = 2.0 * alpha / 3.0
    a = alpha
    K_a = 2.0 * a * (a - 3.0) / 9.0
    res = []
    for n in range(1, q.N):
        A1 = (17.0 * a ** 2 / 9.0 - 8.0 * a / 3.0 + 2.0
              - a * ((10.0 * a ** 2 - 18.0 * a + 9.0) * n
                     + 7.0 * a ** 3 - 12.0 * a ** 2 + 6.0 * a)
              / (3.0 * (n + a) ** 2))
        B1 = (-2.0 * a ** 2 / 9.0 + 4.0 * a / 3.0 - 1.0
              + (3.0 * a - 2.0 * a ** 3) / (3.0 * (n + a))
              + (8.0 * a ** 3 - 24.0 * a ** 2) / (27.0 * n))
        B3 = 2.0 * a / 3.0 - 1.0
        D2 = (-4.0 * a / 3.0 * n - 1.0 - 4.0 * a / 3.0 + 10.0 * a ** 2 / 9.0
              + (3.0 * a - 2.0 * a ** 3) / (3.0 * (n + a)))
        D4 = -4.0 * a / 3.0 * n - 8.0 * a / 3.0 + 8.0 * a ** 2 / 9.0
        D5 = (4.0 * a / 3.0 * n + 2.0 - 4.0 * a ** 2 / 3.0
              + a * (4.0 * a ** 2 - 6.0) / (3.0 * (n + a)))
        lhs = energy_E(q, n + 1, alpha) - (1.0 - (lam - 2.0) / n) * energy_E(q, n, alpha)
        rhs = (4.0 * a * K_a / (3.0 * n) * q.h[n]
               + A1 * q.delta[n]
               + B1 * (q.h[n - 1] - q.h[n])
               + B3 * (q.h[n + 1] - q.h[n] - q.delta[n + 1])
               + B3 * q.gstar[n + 1]
               + D2 * q.gstar[n]
               + 2.0 * B3 * q.c_cur[n + 1]
               + D4 * q.c_cur[n]
               + D5 * q.c_prev[n])
        res.append(_scaled(lhs, rhs))
    return _report("checkpoint_inequality", res, tol, 1, q.N - 1)


def verify_flat_decrement(q: SeqQuantities, alpha: float, gamma: float,
                          tol: float = 1e-8) -> VerifierReport:
    """Decrement bound for the flat-case energy (xi = lam (lam + 1 - alpha)).

    The delta coefficient uses the (n + 1 + alpha)^2 denominator dictated by
    the derivation.
    """
    p, lam, _ = flat_parameters(alpha, gamma)
    a = alpha
    res = []
    for n in range(1, q.N):
        m = n + 1.0
        B1 = 2.0 * (lam + 1.0 - a) / m + a * (2.0 * lam + 2.0 - a) / m ** 2
        B2 = (-2.0 * lam ** 2 * (lam + 1.0 - a) / m
              + a * lam ** 2 * (a - 2.0 * lam - 2.0) / m ** 2)
        B3 = (a * (lam + 2.0) - (2.0 * lam ** 2 + 2.0 * lam + 1.0)
              + a ** 2 * (n * (lam - 2.0) + lam - 2.0 - 2.0 * a) / (m + a) ** 2)
        B4 = -2.0 * lam * (lam + 1.0 - a) - a ** 2 * lam / (m + a)
        e_n, _ = energy_flat(q, n, alpha, gamma)
        e_n1, _ = energy_flat(q, n + 1, alpha, gamma)
        lhs = e_n1 - e_n
        rhs = (((2.0 - lam) * n + 1.0) * q.w[n + 1]
               + B1 * q.b_flat(n + 1, lam)
               + B2 * q.h[n + 1]
               + B3 * q.delta[n + 1]
               - B4 * (q.gstar[n + 1] - 2.0 * q.c_prev[n + 1]))
        res.append(_scaled(lhs, rhs))
    return _report("flat_decrement", res, tol, 1, q.N - 1)


def verify_lemma_AB(q: SeqQuantities, alpha: float, A: float, B: float,
                    kappa: float, tol: float = 1e-8) -> VerifierReport:
    """Both claims of the step-size control lemma under quadratic growth."""
    lam = 2.0 * alpha / 3.0
    n_lo = int(math.floor(lam)) + 1
    res = []
    for n in range(max(n_lo, 1), q.N + 1):
        b = q.b_E(n, lam)
        lhs1 = q.delta[n]
        rhs1 = (2.0 * b + 8.0 * alpha ** 2 / 9.0 * q.h[n]) / (n - lam) ** 2
        res.append(_scaled(lhs1, rhs1))
        e = n * n * q.w[n] + b
        lhs2 = A * q.delta[n] + B * (q.h[n - 1] - q.h[n])
        rhs2 = ((2.0 * abs(A + B) + math.sqrt(2.0) * abs(B) / math.sqrt(kappa))
                * (1.0 + 4.0 * alpha ** 2 / (9.0 * kappa * n * n))
                * e / (n - lam) ** 2
                - B * q.gstar[n] + 2.0 * B * q.c_prev[n])
        res.append(_scaled(lhs2, rhs2))
    return _report("lemma_AB", res, tol, max(n_lo, 1), q.N)
