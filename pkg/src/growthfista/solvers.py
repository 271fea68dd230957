"""Discrete first-order methods: proximal gradient and FISTA variants.

All runs are deterministic. With record_stride == 1 the full iterate
sequence is kept on the trace so the Lyapunov verifiers can replay it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .problems import CompositeProblem
from .vecgeo import as_vector

PGM = "pgm"
FISTA_NESTEROV = "fista_nesterov"
FISTA_CD = "fista_cd"
V_FISTA = "v_fista"

TERM_BUDGET = "budget"
TERM_EPSILON = "epsilon_solution"
TERM_REGION = "region_violation"


@dataclass
class SolverConfig:
    algorithm: str = FISTA_CD
    step_s: Optional[float] = None        # None -> 1/L
    max_iter: int = 1000
    epsilon: float = 0.0                  # 0 disables the eps-solution stop
    record_stride: int = 1
    alpha: float = 6.0                    # FISTA_CD friction parameter
    alpha_const: float = 0.5              # V_FISTA constant momentum

    def resolve_step(self, P: CompositeProblem) -> float:
        s = self.step_s if self.step_s is not None else 1.0 / P.L
        if s > 1.0 / P.L * (1.0 + 1e-12):
            raise ValueError(f"step {s} exceeds 1/L = {1.0 / P.L}")
        if self.algorithm != PGM and self.step_s is not None and s < 1.0 / P.L:
            warnings.warn("FISTA with s < 1/L: Lyapunov verifiers assume s = 1/L")
        return s


@dataclass
class IterateRecord:
    n: int
    gap: Optional[float]
    gmap_norm: float
    step_norm: float
    dist_star: Optional[float]
    extras: Dict[str, float] = field(default_factory=dict)


@dataclass
class Trace:
    problem: CompositeProblem
    config: object
    records: List[IterateRecord]
    final_x: np.ndarray
    terminated_by: str
    iterates: Optional[List[np.ndarray]] = None

    def ns(self) -> np.ndarray:
        return np.array([r.n for r in self.records], dtype=float)

    def gaps(self) -> np.ndarray:
        return np.array([math.nan if r.gap is None else r.gap
                         for r in self.records])

    def step_norms(self) -> np.ndarray:
        return np.array([r.step_norm for r in self.records])

    def gmap_norms(self) -> np.ndarray:
        return np.array([r.gmap_norm for r in self.records])

    def dist_stars(self) -> np.ndarray:
        return np.array([math.nan if r.dist_star is None else r.dist_star
                         for r in self.records])


def nesterov_momentum_sequence(n_max: int) -> np.ndarray:
    """alpha_0 .. alpha_{n_max} from the classical t-recursion (t_0 = 1)."""
    alphas = np.zeros(n_max + 1)
    t = 1.0
    for n in range(1, n_max + 1):
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        alphas[n] = (t - 1.0) / t_next
        t = t_next
    return alphas


def nesterov_momentum(n: int) -> float:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return float(nesterov_momentum_sequence(n)[n])


def cd_momentum(n: int, alpha: float) -> float:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return n / (n + alpha)


def gradient_mapping_norm(P: CompositeProblem, x: np.ndarray) -> float:
    L = P.L
    x_plus = P.prox_h(1.0 / L, x - P.grad_f(x) / L)
    return L * float(np.linalg.norm(x - x_plus))


def epsilon_stop(P: CompositeProblem, x, epsilon: float) -> bool:
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    return gradient_mapping_norm(P, as_vector(x)) <= epsilon


def _momentum_fn(cfg: SolverConfig) -> Callable[[int], float]:
    if cfg.algorithm == PGM:
        return lambda n: 0.0
    if cfg.algorithm == FISTA_CD:
        if cfg.alpha <= 0:
            raise ValueError("FISTA_CD requires alpha > 0")
        if cfg.alpha < 3:
            warnings.warn(f"alpha = {cfg.alpha} < 3: rate guarantees not certified")
        a = cfg.alpha
        return lambda n: n / (n + a)
    if cfg.algorithm == FISTA_NESTEROV:
        seq = nesterov_momentum_sequence(cfg.max_iter + 1)
        return lambda n: seq[n]
    if cfg.algorithm == V_FISTA:
        if not 0.0 < cfg.alpha_const < 1.0:
            raise ValueError("V_FISTA requires alpha_const in (0, 1)")
        c = cfg.alpha_const
        return lambda n: c
    raise ValueError(f"unknown algorithm {cfg.algorithm!r}")


def _record(P: CompositeProblem, n: int, x: np.ndarray,
            x_prev: np.ndarray, length: float) -> IterateRecord:
    gap = None if P.f_star is None else P.eval_F(x) - P.f_star
    return IterateRecord(
        n=n,
        gap=gap,
        gmap_norm=gradient_mapping_norm(P, x),
        step_norm=float(np.linalg.norm(x - x_prev)),
        dist_star=P.dist_star(x),
        extras={"length": length},
    )


def _run(P: CompositeProblem, cfg: SolverConfig, x0) -> Trace:
    x0 = as_vector(x0)
    if x0.shape[0] != P.dim:
        raise ValueError("x0 dimension mismatch")
    s = cfg.resolve_step(P)
    momentum = _momentum_fn(cfg)
    store = cfg.record_stride == 1

    x_prev = x0.copy()
    x = x0.copy()
    length = 0.0
    records = [_record(P, 0, x, x_prev, length)]
    iterates = [x.copy()] if store else None
    terminated = TERM_BUDGET

    for n in range(cfg.max_iter):
        y = x + momentum(n) * (x - x_prev)
        x_next = P.prox_h(s, y - s * P.grad_f(y))
        x_prev, x = x, x_next
        length += float(np.linalg.norm(x - x_prev))
        if store:
            iterates.append(x.copy())
        k = n + 1
        if k % cfg.record_stride == 0 or k == cfg.max_iter:
            rec = _record(P, k, x, x_prev, length)
            records.append(rec)
            if not P.in_certified_region(x):
                terminated = TERM_REGION
                break
            if cfg.epsilon > 0 and rec.gmap_norm <= cfg.epsilon:
                terminated = TERM_EPSILON
                break

    return Trace(problem=P, config=cfg, records=records, final_x=x,
                 terminated_by=terminated, iterates=iterates)


def pgm_run(P: CompositeProblem, cfg: SolverConfig, x0) -> Trace:
    if cfg.algorithm != PGM:
        cfg = SolverConfig(**{**cfg.__dict__, "algorithm": PGM})
    return _run(P, cfg, x0)


def fista_run(P: CompositeProblem, cfg: SolverConfig, x0) -> Trace:
    if cfg.algorithm not in (FISTA_CD, FISTA_NESTEROV, V_FISTA):
        raise ValueError("fista_run needs a FISTA algorithm variant")
    return _run(P, cfg, x0)
