"""Rate fitting, closed-form bounds and tuning helpers.

Rates are measured by least squares on (log n, log value). Oscillating
series (the optimality gap under heavy momentum rings like a Bessel
function) are fitted through their tail supremum envelope, which is the
quantity the O(.) statements actually bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .diagnostics import SeqQuantities, VerifierReport, _report, _scaled
from .solvers import Trace

MIN_FIT_POINTS = 10


@dataclass
class RateFit:
    exponent: float            # value ~ C * n^{-exponent}
    log_intercept: float
    rms_residual: float
    n_lo: float
    n_hi: float
    points: int


def noise_floor(f_star: float) -> float:
    """Absolute gap level below which round-off dominates the measurement."""
    return 100.0 * np.finfo(float).eps * (1.0 + abs(f_star))


def tail_envelope(values: np.ndarray) -> np.ndarray:
    """Running supremum from the right: env[i] = max(values[i:])."""
    return np.maximum.accumulate(np.asarray(values, dtype=float)[::-1])[::-1]


def default_fit_window(ns: np.ndarray, values: np.ndarray,
                       floor: float = 0.0) -> Tuple[float, float]:
    """Last decade [N/10, N], shrunk so it ends where the signal still sits
    above the round-off floor; widened toward earlier n if the decade holds
    fewer than MIN_FIT_POINTS usable samples."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    usable = (ns >= 1) & np.isfinite(values) & (values > floor)
    if not np.any(usable):
        raise ValueError("no usable points above the noise floor")
    n_hi = float(np.max(ns[usable]))
    n_lo = n_hi / 10.0
    in_window = usable & (ns >= n_lo) & (ns <= n_hi)
    if np.sum(in_window) < MIN_FIT_POINTS:
        good = np.sort(ns[usable])
        k = min(len(good), MIN_FIT_POINTS)
        n_lo = float(good[-k])
    return n_lo, n_hi


def fit_rate(ns, values, window: Optional[Tuple[float, float]] = None,
             floor: float = 0.0, envelope: bool = False) -> RateFit:
    """Least-squares power-law fit value ~ C n^{-exponent} on a window."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if envelope:
        values = tail_envelope(values)
    if window is None:
        window = default_fit_window(ns, values, floor)
    n_lo, n_hi = window
    mask = ((ns >= n_lo) & (ns <= n_hi) & (ns >= 1)
            & np.isfinite(values) & (values > max(floor, 0.0)))
    if np.sum(mask) < MIN_FIT_POINTS:
        raise ValueError(f"only {int(np.sum(mask))} usable points in window "
                         f"[{n_lo:g}, {n_hi:g}]")
    x = np.log(ns[mask])
    y = np.log(values[mask])
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return RateFit(exponent=float(-coef[0]), log_intercept=float(coef[1]),
                   rms_residual=float(np.sqrt(np.mean(resid ** 2))),
                   n_lo=n_lo, n_hi=n_hi, points=int(np.sum(mask)))


def trajectory_length(trace: Trace) -> Tuple[np.ndarray, float]:
    """(cumulative path lengths at record points, tail Cauchy gap).

    The Cauchy gap is S_N - S_{N/2}; it tends to zero exactly when the
    trajectory has finite length.
    """
    ns = trace.ns()
    lengths = np.array([r.extras["length"] for r in trace.records])
    n_final = ns[-1]
    i_half = int(np.searchsorted(ns, n_final / 2.0))
    return lengths, float(lengths[-1] - lengths[i_half])


# ---------------------------------------------------------------------------
# closed-form bounds

def worst_case_gap_bound(n: float, alpha: float, s: float, r0_sq: float) -> float:
    """(alpha-1)^2 r0^2 / (2 s (n + alpha - 2)^2): momentum worst case on
    convex composites (valid from n >= 1)."""
    return (alpha - 1.0) ** 2 * r0_sq / (2.0 * s * (n + alpha - 2.0) ** 2)


def explicit_gap_bound(n: float, alpha: float, kappa: float, M0: float) -> float:
    """Fully explicit gap bound under quadratic growth; certified for
    alpha >= 3 + 3/sqrt(2) and n >= 3 alpha / sqrt(kappa)."""
    if alpha < 3.0 + 3.0 / math.sqrt(2.0):
        raise ValueError("bound requires alpha >= 3 + 3/sqrt(2)")
    if n < 3.0 * alpha / math.sqrt(kappa):
        raise ValueError("bound requires n >= 3 alpha / sqrt(kappa)")
    c = 8.0 * math.e * alpha / (3.0 * math.sqrt(kappa))
    return 2.25 * math.exp(-2.0) * M0 * c ** (2.0 * alpha / 3.0) \
        * n ** (-2.0 * alpha / 3.0)


def pgm_linear_rate(kappa: float) -> float:
    """Decay constant rho of the gap bound O(exp(-rho n)) for proximal
    gradient under quadratic growth, kappa = mu / L."""
    return kappa / 4.0


@dataclass
class TuningResult:
    epsilon: float
    alpha_eps: float
    n_eps: float
    log_arg: float

    @property
    def valid(self) -> bool:
        """The optimized friction is meaningful only when alpha_eps >= 3."""
        return self.alpha_eps >= 3.0


def tune_friction(epsilon: float, L: float, M0: float,
                  kappa: float) -> TuningResult:
    """Friction alpha and iteration budget minimizing the certified count of
    iterations to an epsilon-solution under quadratic growth."""
    if epsilon <= 0 or L <= 0 or M0 <= 0 or kappa <= 0:
        raise ValueError("epsilon, L, M0, kappa must be positive")
    log_arg = (3.0 / (math.e * epsilon)) * math.sqrt(L * M0 / 2.0)
    log_val = math.log(log_arg)
    return TuningResult(
        epsilon=epsilon,
        alpha_eps=3.0 * log_val,
        n_eps=8.0 * math.e ** 2 / math.sqrt(kappa) * log_val,
        log_arg=log_arg,
    )


def control_v_bound(delta: float, K1: float, K2: float) -> float:
    """If x^delta (x^(1-delta) - K1) <= K2 then x <= this bound."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if K1 <= 0 or K2 <= 0:
        raise ValueError("K1 and K2 must be positive")
    return (K2 ** (1.0 - delta) + K1) ** (1.0 / (1.0 - delta))


def min_g_bound(K: float, delta: float) -> float:
    """Global minimum bound of x - K x^delta over x >= 0."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if K <= 0:
        raise ValueError("K must be positive")
    return K * (delta - 1.0) * (delta * K) ** (delta / (1.0 - delta))


def lemma_geo_check(q: SeqQuantities, gamma: float, K: float, L: float,
                    radius: Optional[float] = None,
                    tol: float = 1e-8) -> VerifierReport:
    """Growth-geometry bound n^(p-1) h_n <= (L/2K)^(2/gamma) (n^(p+1) w_n)^(2/gamma).

    Activated from the first index where the iterate enters the certified
    region (all indices when the certificate is global).
    """
    p = 1.0 + 4.0 / (gamma - 2.0)
    n0 = 1
    if radius is not None:
        inside = [n for n in range(1, q.N + 1)
                  if math.sqrt(q.h[n]) <= radius]
        if not inside:
            raise ValueError("trajectory never enters the certified region")
        n0 = inside[0]
    c = (L / (2.0 * K)) ** (2.0 / gamma)
    res = []
    for n in range(n0, q.N + 1):
        lhs = n ** (p - 1.0) * q.h[n]
        rhs = c * (n ** (p + 1.0) * q.w[n]) ** (2.0 / gamma)
        res.append(_scaled(lhs, rhs))
    return _report("lemma_geo", res, tol, n0, q.N)


# ---------------------------------------------------------------------------
# continuous-time (inertial ODE) bound

def r_star(tol: float = 1e-12) -> float:
    """Unique positive root of r^3 - r^2 - 2(1+sqrt(2)) r - 4, near 3."""
    def poly(r):
        return r ** 3 - r ** 2 - 2.0 * (1.0 + math.sqrt(2.0)) * r - 4.0

    lo, hi = 1.0, 10.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if poly(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def avd_rate_bound(t: float, alpha: float, mu: float, M0: float) -> float:
    """Explicit continuous-time gap bound under quadratic growth, certified
    for t >= alpha r* / (3 sqrt(mu))."""
    rs = r_star()
    t_min = alpha * rs / (3.0 * math.sqrt(mu))
    if t < t_min:
        raise ValueError(f"bound requires t >= {t_min}")
    C1 = 1.0 + 2.0 / rs + 4.0 / rs ** 2
    C2 = 1.0 / rs + (1.0 + math.sqrt(2.0)) / rs ** 2 + 4.0 / (3.0 * rs ** 3)
    return C1 * math.exp(2.0 / 3.0 * C2 * (alpha - 3.0)) * M0 \
        * (t_min / t) ** (2.0 * alpha / 3.0)
