"""Integration of the inertial ODE x'' + (alpha/t) x' + grad F(x) = 0.

Classical fixed-step RK4 on the first-order system (x, v). Only
differentiable problems (h = 0) are accepted. The recorded trace carries
the continuous Lyapunov energy and the accumulated trajectory length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problems import CompositeProblem
from .solvers import IterateRecord, Trace
from .vecgeo import ConvexSet, as_vector

TERM_BLOWUP = "blow_up"
TERM_HORIZON = "budget"
TERM_REGION = "region_violation"


@dataclass
class AVDState:
    t: float
    x: np.ndarray
    v: np.ndarray


@dataclass
class AVDConfig:
    alpha: float
    t_end: float
    t0: float = 1.0
    dt: Optional[float] = None            # None -> 1e-3 * min(1, 1/sqrt(L))
    record_stride: int = 1

    def resolve_dt(self, P: CompositeProblem) -> float:
        dt = self.dt
        if dt is None:
            dt = 1e-3 * min(1.0, 1.0 / math.sqrt(P.L))
        if dt > 0.1 / math.sqrt(P.L) * (1.0 + 1e-12):
            raise ValueError(f"dt = {dt} violates the 0.1/sqrt(L) stability bound")
        return dt


def energy_continuous(P: CompositeProblem, state: AVDState,
                      lam: float, xi: float) -> float:
    """t^2 gap + 0.5 ||lam (x - x*) + t v||^2 + xi/2 ||x - x*||^2."""
    if P.solution_set is None or P.f_star is None:
        raise ValueError("energy needs the solution set and optimal value")
    x_star = P.solution_set.project(state.x)
    d = state.x - x_star
    gap = P.eval_F(state.x) - P.f_star
    inertial = lam * d + state.t * state.v
    return (state.t ** 2 * gap
            + 0.5 * float(np.dot(inertial, inertial))
            + 0.5 * xi * float(np.dot(d, d)))


def avd_integrate(P: CompositeProblem, cfg: AVDConfig, x0, v0=None) -> Trace:
    if not P.h.is_zero:
        raise ValueError("the ODE integrator requires a differentiable problem (h = 0)")
    if cfg.t0 <= 0:
        raise ValueError("t0 must be positive (damping alpha/t is singular at 0)")
    x = as_vector(x0).copy()
    v = np.zeros_like(x) if v0 is None else as_vector(v0).copy()
    dt = cfg.resolve_dt(P)
    alpha = cfg.alpha
    grad = P.grad_f
    blow_up_norm = 1e6 * (1.0 + np.linalg.norm(x))
    lam_energy = 2.0 * alpha / 3.0
    has_star = P.solution_set is not None and P.f_star is not None

    def accel(t, x, v):
        return -(alpha / t) * v - grad(x)

    n_steps = int(math.ceil((cfg.t_end - cfg.t0) / dt - 1e-12))
    t = cfg.t0
    length = 0.0
    records = []
    terminated = TERM_HORIZON

    def record(idx, t, x, v, length):
        gap = P.eval_F(x) - P.f_star if P.f_star is not None else None
        extras = {"t": t, "speed": float(np.linalg.norm(v)), "length": length}
        if has_star:
            extras["energy"] = energy_continuous(
                P, AVDState(t=t, x=x, v=v), lam_energy, 0.0)
        records.append(IterateRecord(
            n=idx, gap=gap, gmap_norm=float(np.linalg.norm(grad(x))),
            step_norm=float(np.linalg.norm(v)) * dt,
            dist_star=P.dist_star(x), extras=extras))

    record(0, t, x, v, length)
    for k in range(1, n_steps + 1):
        k1x, k1v = v, accel(t, x, v)
        k2x = v + 0.5 * dt * k1v
        k2v = accel(t + 0.5 * dt, x + 0.5 * dt * k1x, k2x)
        k3x = v + 0.5 * dt * k2v
        k3v = accel(t + 0.5 * dt, x + 0.5 * dt * k2x, k3x)
        k4x = v + dt * k3v
        k4v = accel(t + dt, x + dt * k3x, k4x)
        x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        t = cfg.t0 + k * dt
        length += float(np.linalg.norm(v)) * dt
        if np.linalg.norm(x) > blow_up_norm:
            terminated = TERM_BLOWUP
            record(k, t, x, v, length)
            break
        if not P.in_certified_region(x):
            terminated = TERM_REGION
            record(k, t, x, v, length)
            break
        if k % cfg.record_stride == 0 or k == n_steps:
            record(k, t, x, v, length)

    return Trace(problem=P, config=cfg, records=records, final_x=x,
                 terminated_by=terminated, iterates=None)


@dataclass
class DirectionalDerivativeReport:
    h_values: list
    quotients: list            # finite-difference directional derivatives
    orthogonality: list        # <x - P(x), q_h>, expected -> 0
    forward_alignment: list    # <d, q_h>, expected >= -tol
    stable: bool               # quotients settled between the two smallest h

    @property
    def final_orthogonality(self) -> float:
        return self.orthogonality[-1]

    @property
    def final_alignment(self) -> float:
        return self.forward_alignment[-1]


def directional_projection_checks(S: ConvexSet, x, d,
                                  h_list) -> DirectionalDerivativeReport:
    """Finite-difference probe of the projection's directional derivative."""
    x, d = as_vector(x), as_vector(d)
    h_list = sorted(float(h) for h in h_list)[::-1]
    if len(h_list) < 2:
        raise ValueError("need at least two step sizes")
    p = S.project(x)
    quotients, orth, align = [], [], []
    for h in h_list:
        q = (S.project(x + h * d) - p) / h
        quotients.append(q)
        orth.append(float((x - p) @ q))
        align.append(float(d @ q))
    qa, qb = quotients[-2], quotients[-1]
    denom = max(np.linalg.norm(qb), 1e-12)
    stable = bool(np.linalg.norm(qa - qb) / denom <= 0.1)
    return DirectionalDerivativeReport(
        h_values=list(h_list), quotients=quotients,
        orthogonality=orth, forward_alignment=align, stable=stable)
