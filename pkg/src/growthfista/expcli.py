"""Config-driven experiment runner, CSV/SVG emitters and command line.

Configs are flat dotted key/value text (diff-friendly) or JSON with the
same schema. Built-in configs reproduce the headline rate experiments:
power-growth rates, the explicit quadratic-growth bound, finite-length
checks, ODE analogues, proximal-gradient baselines and friction tuning.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import analysis, avd, diagnostics, problems, solvers
from .vecgeo import AffineSubspace

__version__ = "1.0.0"

ENV_OUT = "GROWTHFISTA_OUT"
DEFAULT_OUT = "out"


# ---------------------------------------------------------------------------
# configuration

@dataclass
class ExperimentConfig:
    name: str
    problem: Dict[str, object]
    runs: List[Dict[str, object]]
    verifiers: List[str] = field(default_factory=list)
    checks: List[Dict[str, object]] = field(default_factory=list)
    seed: int = 0
    out_dir: Optional[str] = None

    @staticmethod
    def from_dict(d: Dict[str, object]) -> "ExperimentConfig":
        for key in ("name", "problem", "run"):
            if key not in d:
                raise ValueError(f"config missing required field {key!r}")
        runs = d["run"] if isinstance(d["run"], list) else [d["run"]]
        for i, r in enumerate(runs):
            r.setdefault("label", str(i))
        cfg = ExperimentConfig(
            name=str(d["name"]),
            problem=dict(d["problem"]),
            runs=[dict(r) for r in runs],
            verifiers=list(d.get("verifier", [])),
            checks=[dict(c) for c in _as_list(d.get("check", []))],
            seed=int(d.get("seed", 0)),
            out_dir=d.get("out_dir"),
        )
        if cfg.problem.get("name") not in PROBLEM_BUILDERS:
            raise ValueError(f"unknown zoo problem {cfg.problem.get('name')!r}")
        labels = {r["label"] for r in cfg.runs}
        for c in cfg.checks:
            if "exponent" in c and not math.isfinite(float(c["exponent"])):
                raise ValueError("check field 'exponent' must be finite")
            if c.get("run") is not None and str(c["run"]) not in labels:
                raise ValueError(f"check references unknown run {c['run']!r}")
        for v in cfg.verifiers:
            if v not in VERIFIERS:
                raise ValueError(f"unknown verifier {v!r}")
        return cfg


def _as_list(v) -> list:
    return v if isinstance(v, list) else [v]


def _parse_scalar(s: str):
    t = s.strip()
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(t)
        except ValueError:
            pass
    return t


def parse_flat_config(text: str) -> Dict[str, object]:
    """Flat dotted keys -> nested dict; integer path segments build lists."""
    root: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        parts = key.strip().split(".")
        node = root
        for i, part in enumerate(parts):
            last = i == len(parts) - 1
            idx = int(part) if part.isdigit() else None
            if idx is not None:
                if not isinstance(node, list):
                    raise ValueError(f"line {lineno}: bad key path {key!r}")
                while len(node) <= idx:
                    node.append({})
                if last:
                    node[idx] = _parse_scalar(value)
                else:
                    nxt = parts[i + 1]
                    if not isinstance(node[idx], (dict, list)) or node[idx] == {}:
                        node[idx] = [] if nxt.isdigit() else (node[idx] or {})
                    node = node[idx]
            else:
                if last:
                    node[part] = _parse_scalar(value)
                else:
                    nxt = parts[i + 1]
                    if part not in node or not isinstance(node[part], (dict, list)):
                        node[part] = [] if nxt.isdigit() else {}
                    node = node[part]
    return root


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        return ExperimentConfig.from_dict(json.loads(text))
    return ExperimentConfig.from_dict(parse_flat_config(text))


# ---------------------------------------------------------------------------
# problem zoo plumbing

def _build_hoelder(spec: Dict, rng: np.random.Generator):
    dim = int(spec.get("dim", 10))
    affine_dim = int(spec.get("affine_dim", 2))
    q, _ = np.linalg.qr(rng.standard_normal((dim, max(affine_dim, 1))))
    dirs = q.T[:affine_dim]
    offset = rng.standard_normal(dim)
    C = AffineSubspace(offset=offset, directions=dirs)
    return problems.make_hoelder_distance(
        C, gamma=float(spec.get("gamma", 4.0)), K=float(spec.get("K", 1.0)),
        R=float(spec.get("R", 2.0)))


def _build_rankdef(spec: Dict, rng: np.random.Generator):
    dim = int(spec.get("dim", 10))
    rank = int(spec.get("rank", 6))
    kappa = float(spec.get("kappa", 1e-2))
    if not 1 <= rank <= dim:
        raise ValueError("rankdef_ls rank must lie in [1, dim]")
    eigs = np.geomspace(kappa, 1.0, rank)
    v, _ = np.linalg.qr(rng.standard_normal((dim, rank)))
    A = np.diag(np.sqrt(eigs)) @ v.T
    x_true = rng.standard_normal(dim)
    return problems.make_rankdef_least_squares(A, A @ x_true)


def _build_quadratic(spec: Dict, rng: np.random.Generator):
    return problems.make_simple_quadratic(int(spec.get("dim", 1)),
                                          mu=float(spec.get("mu", 1.0)))


def _build_ortho_lasso(spec: Dict, rng: np.random.Generator):
    dim = int(spec.get("dim", 8))
    lam = float(spec.get("lam", 0.1))
    A, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    b = rng.standard_normal(dim)
    P = problems.make_lasso(A, b, lam)
    # orthogonal design: the minimizer is the soft-thresholded correlation
    x_star = np.sign(A.T @ b) * np.maximum(np.abs(A.T @ b) - lam, 0.0)
    P.solution_set = AffineSubspace(offset=x_star)
    P.f_star = P.eval_F(x_star)
    P.growth = problems.GrowthCertificate(kind="quadratic", mu=1.0)
    return P


PROBLEM_BUILDERS = {
    "hoelder_dist": _build_hoelder,
    "rankdef_ls": _build_rankdef,
    "simple_quadratic": _build_quadratic,
    "ortho_lasso": _build_ortho_lasso,
}


def build_problem(spec: Dict[str, object], seed: int):
    rng = np.random.default_rng(seed)
    P = PROBLEM_BUILDERS[str(spec["name"])](spec, rng)
    x0_dist = float(spec.get("x0_dist", 1.0))
    base = P.solution_set.project(rng.standard_normal(P.dim))
    raw = base + rng.standard_normal(P.dim)
    p = P.solution_set.project(raw)
    normal = raw - p
    nrm = np.linalg.norm(normal)
    x0 = p + (x0_dist / nrm) * normal if nrm > 0 else p
    return P, x0


# ---------------------------------------------------------------------------
# running

def _execute_run(P, x0, run: Dict[str, object]):
    kind = str(run.get("kind", "fista"))
    if kind == "avd":
        cfg = avd.AVDConfig(
            alpha=float(run.get("alpha", 6.0)),
            t_end=float(run.get("t_end", 100.0)),
            t0=float(run.get("t0", 1.0)),
            dt=float(run["dt"]) if "dt" in run else None,
            record_stride=int(run.get("record_stride", 1)),
        )
        return avd.avd_integrate(P, cfg, x0)
    cfg = solvers.SolverConfig(
        algorithm=str(run.get("algorithm",
                              solvers.PGM if kind == "pgm" else solvers.FISTA_CD)),
        step_s=float(run["step_s"]) if "step_s" in run else None,
        max_iter=int(run.get("max_iter", 1000)),
        epsilon=float(run.get("epsilon", 0.0)),
        record_stride=int(run.get("record_stride", 1)),
        alpha=float(run.get("alpha", 6.0)),
        alpha_const=float(run.get("alpha_const", 0.5)),
    )
    return (solvers.pgm_run if cfg.algorithm == solvers.PGM
            else solvers.fista_run)(P, cfg, x0)


def _series(trace, which: str) -> Tuple[np.ndarray, np.ndarray]:
    if trace.records and "t" in trace.records[0].extras:
        xs = np.array([r.extras["t"] for r in trace.records])
    else:
        xs = trace.ns()
    ys = {"gap": trace.gaps, "step": trace.step_norms,
          "gmap": trace.gmap_norms, "dist": trace.dist_stars}[which]()
    return xs, ys


VERIFIERS = {
    "lemma_tech1": lambda q, P, run: diagnostics.verify_lemma_tech1(q),
    "energy_two_forms": lambda q, P, run: diagnostics.verify_energy_identity(
        q, float(run["alpha"])),
    "dev_bn": lambda q, P, run: diagnostics.verify_dev_bn(
        q, 2.0 * float(run["alpha"]) / 3.0),
    "sign_facts": lambda q, P, run: diagnostics.verify_sign_facts(q),
    "descent_lemma": lambda q, P, run: diagnostics.verify_descent_lemma(
        q, float(run["alpha"])),
    "tech2_claim2": lambda q, P, run: diagnostics.verify_lemma_tech2_claim2(
        q, float(run["alpha"])),
    "checkpoint": lambda q, P, run: diagnostics.verify_checkpoint_inequality(
        q, float(run["alpha"])),
    "flat_decrement": lambda q, P, run: diagnostics.verify_flat_decrement(
        q, float(run["alpha"]), P.growth.gamma),
    "lemma_AB": lambda q, P, run: _verify_AB(q, P, run),
    "lemma_geo": lambda q, P, run: analysis.lemma_geo_check(
        q, P.growth.gamma, P.growth.K, P.L, radius=P.growth.radius),
}


def _verify_AB(q, P, run):
    kappa = P.growth.mu / P.L
    reports = [diagnostics.verify_lemma_AB(q, float(run["alpha"]), A, B, kappa)
               for A, B in ((1.0, 0.0), (0.0, 1.0), (1.0, -1.0))]
    worst = max(reports, key=lambda r: r.worst_violation)
    worst.name = "lemma_AB"
    return worst


@dataclass
class CheckResult:
    name: str
    status: str               # pass | fail | flagged
    detail: str

    @property
    def failed(self) -> bool:
        return self.status == "fail"


@dataclass
class ExperimentReport:
    name: str
    checks: List[CheckResult]
    verifier_reports: List[diagnostics.VerifierReport]
    rate_fits: Dict[str, analysis.RateFit]
    lengths: Dict[str, float]
    wall_time: float
    out_dir: str

    def failed(self, strict: bool = False) -> bool:
        bad = {"fail", "flagged"} if strict else {"fail"}
        if any(c.status in bad for c in self.checks):
            return True
        return any(not r.passed for r in self.verifier_reports)


def _run_check(check: Dict, traces: Dict[str, object], P, x0,
               rate_fits: Dict) -> CheckResult:
    kind = str(check["type"])
    name = str(check.get("name", kind))
    trace = traces.get(str(check.get("run"))) if check.get("run") is not None \
        else None

    if kind == "rate":
        which = str(check.get("series", "gap"))
        xs, ys = _series(trace, which)
        floor = analysis.noise_floor(P.f_star or 0.0)
        window = None
        if which != "gap":
            # iterate stalling floods step/gmap tails with rounding noise;
            # fit them where the gap still carries signal
            _, gaps = _series(trace, "gap")
            window = analysis.default_fit_window(
                xs, analysis.tail_envelope(gaps), floor)
        fit = analysis.fit_rate(xs, ys, window=window, floor=0.0 if window
                                else floor,
                                envelope=bool(check.get("envelope", True)))
        rate_fits[name] = fit
        want = float(check["exponent"])
        ok = fit.exponent >= want
        return CheckResult(name, "pass" if ok else "fail",
                           f"fitted exponent {fit.exponent:.3f} vs required "
                           f">= {want:.3f} on [{fit.n_lo:.3g}, {fit.n_hi:.3g}]")

    if kind == "linear_rate":
        xs, ys = _series(trace, "gap")
        floor = analysis.noise_floor(P.f_star or 0.0)
        mask = (ys > floor) & (xs >= 1)
        coef = np.polyfit(xs[mask], np.log(ys[mask]), 1)
        want = -float(check["rho"])
        ok = coef[0] <= want
        return CheckResult(name, "pass" if ok else "fail",
                           f"log-gap slope {coef[0]:.3e} vs required <= {want:.3e}")

    if kind == "explicit_bound":
        alpha = float(check["alpha"])
        kappa = P.growth.mu / P.L
        M0 = P.eval_F(x0) - P.f_star
        n_min = 3.0 * alpha / math.sqrt(kappa)
        floor = analysis.noise_floor(P.f_star)
        worst = -np.inf
        for r in trace.records:
            if r.n >= n_min and r.gap is not None and r.gap > floor:
                bound = analysis.explicit_gap_bound(r.n, alpha, kappa, M0)
                worst = max(worst, (r.gap - bound) / (1.0 + bound))
        if worst <= 1e-9:
            return CheckResult(name, "pass",
                               f"bound holds from n >= {n_min:.0f} "
                               f"(worst margin {worst:.3e})")
        return CheckResult(name, "flagged",
                           "kappa exceeds the certified threshold kappa_0 "
                           f"(worst relative excess {worst:.3e})")

    if kind == "worst_case":
        alpha = float(check["alpha"])
        s = 1.0 / P.L
        x_star = P.solution_set.project(np.asarray(x0, dtype=float))
        r0_sq = float(np.dot(x0 - x_star, x0 - x_star))
        worst = -np.inf
        for r in trace.records:
            if r.n >= 1 and r.gap is not None:
                bound = analysis.worst_case_gap_bound(r.n, alpha, s, r0_sq)
                worst = max(worst, (r.gap - bound) / (1.0 + bound))
        ok = worst <= 1e-9
        return CheckResult(name, "pass" if ok else "fail",
                           f"worst relative excess over the bound {worst:.3e}")

    if kind == "control1":
        worst = min((r.gap - r.gmap_norm ** 2 / (2.0 * P.L))
                    / (1.0 + abs(r.gap))
                    for r in trace.records if r.gap is not None)
        ok = worst >= -1e-12
        return CheckResult(name, "pass" if ok else "fail",
                           f"min scaled slack of the mapping bound {worst:.3e}")

    if kind == "cauchy_length":
        lengths, gap = analysis.trajectory_length(trace)
        total = float(lengths[-1])
        ratio = gap / total if total > 0 else 0.0
        want = float(check.get("ratio", 1e-3))
        ok = ratio < want
        return CheckResult(name, "pass" if ok else "fail",
                           f"tail/total length ratio {ratio:.3e} vs < {want:g}")

    if kind == "avd_bound":
        alpha = float(check["alpha"])
        mu = P.growth.mu
        first = trace.records[0]
        M0 = first.gap + 0.5 * first.extras["speed"] ** 2
        t_min = alpha * analysis.r_star() / (3.0 * math.sqrt(mu))
        floor = analysis.noise_floor(P.f_star)
        worst = -np.inf
        for r in trace.records:
            t = r.extras["t"]
            if t >= t_min and r.gap > floor:
                bound = analysis.avd_rate_bound(t, alpha, mu, M0)
                worst = max(worst, (r.gap - bound) / (1.0 + bound))
        ok = worst <= 1e-9
        return CheckResult(name, "pass" if ok else "fail",
                           f"worst relative excess over the ODE bound {worst:.3e}")

    if kind == "tuning":
        res = analysis.tune_friction(float(check["epsilon"]), P.L,
                                     P.eval_F(x0) - P.f_star,
                                     P.growth.mu / P.L)
        budget = int(math.ceil(res.n_eps))
        cfg = solvers.SolverConfig(algorithm=solvers.FISTA_CD,
                                   alpha=res.alpha_eps, max_iter=budget,
                                   epsilon=res.epsilon, record_stride=1)
        t = solvers.fista_run(P, cfg, x0)
        ok = t.terminated_by == solvers.TERM_EPSILON
        n_hit = t.records[-1].n
        return CheckResult(name, "pass" if ok else "fail",
                           f"alpha_eps {res.alpha_eps:.2f}, budget {budget}, "
                           f"stopped at n = {n_hit} ({t.terminated_by})")

    raise ValueError(f"unknown check type {kind!r}")


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[str] = None,
                   threads: int = 1) -> ExperimentReport:
    t_start = time.perf_counter()
    out_root = out_dir or cfg.out_dir or os.environ.get(ENV_OUT, DEFAULT_OUT)
    exp_dir = os.path.join(out_root, cfg.name)
    os.makedirs(exp_dir, exist_ok=True)

    P, x0 = build_problem(cfg.problem, cfg.seed)

    def one(run):
        return run["label"], _execute_run(P, x0, run)

    if threads > 1 and len(cfg.runs) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
            traces = dict(ex.map(one, cfg.runs))
    else:
        traces = dict(one(r) for r in cfg.runs)

    for run in cfg.runs:
        label = run["label"]
        emit_csv(traces[label], os.path.join(exp_dir, f"{label}.csv"))
        if run.get("verify") and traces[label].iterates is not None:
            emit_iterates_csv(traces[label],
                              os.path.join(exp_dir, f"{label}_iterates.csv"))

    verifier_reports = []
    verify_runs = [r for r in cfg.runs if r.get("verify")]
    for run in verify_runs:
        q = diagnostics.compute_seq_quantities(traces[run["label"]], P,
                                               alpha=float(run.get("alpha", 0)))
        for vname in cfg.verifiers:
            rep = VERIFIERS[vname](q, P, run)
            rep.name = f"{run['label']}:{rep.name}"
            verifier_reports.append(rep)

    rate_fits: Dict[str, analysis.RateFit] = {}
    checks = [_run_check(c, traces, P, x0, rate_fits) for c in cfg.checks]

    series = []
    for run in cfg.runs:
        xs, ys = _series(traces[run["label"]], "gap")
        mask = np.isfinite(ys) & (ys > 0) & (xs > 0)
        if np.any(mask):
            series.append((run["label"], xs[mask], ys[mask]))
    if series:
        guides = sorted({round(float(c["exponent"]), 6) for c in cfg.checks
                         if c.get("type") == "rate"
                         and c.get("series", "gap") == "gap"})
        emit_loglog_svg(series, os.path.join(exp_dir, "gaps.svg"),
                        guide_exponents=guides)

    lengths = {}
    for run in cfg.runs:
        recs = traces[run["label"]].records
        if recs and "length" in recs[-1].extras:
            lengths[run["label"]] = float(recs[-1].extras["length"])

    report = ExperimentReport(
        name=cfg.name, checks=checks, verifier_reports=verifier_reports,
        rate_fits=rate_fits, lengths=lengths,
        wall_time=time.perf_counter() - t_start, out_dir=exp_dir)
    _write_report(report, exp_dir)
    return report


def _write_report(report: ExperimentReport, exp_dir: str) -> None:
    payload = {
        "name": report.name,
        "checks": [asdict(c) for c in report.checks],
        "verifiers": [asdict(v) for v in report.verifier_reports],
        "rate_fits": {k: asdict(v) for k, v in report.rate_fits.items()},
        "lengths": report.lengths,
        "wall_time": report.wall_time,
    }
    with open(os.path.join(exp_dir, "report.json"), "w",
              encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    lines = [f"experiment {report.name} ({report.wall_time:.2f} s)"]
    for c in report.checks:
        lines.append(f"  [{c.status.upper()}] {c.name}: {c.detail}")
    for v in report.verifier_reports:
        lines.append("  " + str(v))
    with open(os.path.join(exp_dir, "report.txt"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# CSV / SVG emitters

def _fmt(v: Optional[float]) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return format(float(v), ".17g")


def emit_csv(trace, path: str) -> None:
    extras = sorted(trace.records[0].extras) if trace.records else []
    header = ["n", "gap", "gmap_norm", "step_norm", "dist_star"] + extras
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for r in trace.records:
            row = [_fmt(r.n), _fmt(r.gap), _fmt(r.gmap_norm),
                   _fmt(r.step_norm), _fmt(r.dist_star)]
            row += [_fmt(r.extras.get(k)) for k in extras]
            fh.write(",".join(row) + "\n")


def emit_iterates_csv(trace, path: str) -> None:
    d = len(trace.iterates[0])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(["n"] + [f"x{i}" for i in range(d)]) + "\n")
        for n, x in enumerate(trace.iterates):
            fh.write(",".join([str(n)] + [_fmt(v) for v in x]) + "\n")


def read_series_csv(path: str) -> Dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    cols = {}
    for j, name in enumerate(header):
        cols[name] = np.array([float(r[j]) if r[j] else math.nan for r in rows])
    return cols


_SVG_W, _SVG_H, _SVG_PAD = 640, 480, 60
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def emit_loglog_svg(series: Sequence[Tuple[str, np.ndarray, np.ndarray]],
                    path: str, guide_exponents: Sequence[float] = ()) -> None:
    """Standalone log-log SVG: one polyline per series plus slope guides."""
    if not series:
        raise ValueError("no series to plot")
    for label, xs, ys in series:
        if np.any(np.asarray(xs) <= 0) or np.any(np.asarray(ys) <= 0):
            raise ValueError(f"series {label!r} has nonpositive data")
    lx = [np.log10(np.asarray(xs, dtype=float)) for _, xs, _ in series]
    ly = [np.log10(np.asarray(ys, dtype=float)) for _, _, ys in series]
    x_lo = min(a.min() for a in lx)
    x_hi = max(a.max() for a in lx)
    y_lo = min(a.min() for a in ly)
    y_hi = max(a.max() for a in ly)
    x_hi += 1e-9 if x_hi == x_lo else 0.0
    y_hi += 1e-9 if y_hi == y_lo else 0.0
    plot_w = _SVG_W - 2 * _SVG_PAD
    plot_h = _SVG_H - 2 * _SVG_PAD

    def sx(v):
        return _SVG_PAD + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        return _SVG_H - _SVG_PAD - (v - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" '
        f'height="{_SVG_H}" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect x="{_SVG_PAD}" y="{_SVG_PAD}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="black"/>',
    ]
    for tick in range(int(math.floor(x_lo)), int(math.ceil(x_hi)) + 1):
        if x_lo <= tick <= x_hi:
            px = sx(tick)
            parts.append(f'<line x1="{px:.1f}" y1="{_SVG_H - _SVG_PAD}" '
                         f'x2="{px:.1f}" y2="{_SVG_H - _SVG_PAD + 5}" '
                         'stroke="black"/>')
            parts.append(f'<text x="{px:.1f}" y="{_SVG_H - _SVG_PAD + 20}" '
                         f'font-size="12" text-anchor="middle">1e{tick}</text>')
    for tick in range(int(math.floor(y_lo)), int(math.ceil(y_hi)) + 1):
        if y_lo <= tick <= y_hi:
            py = sy(tick)
            parts.append(f'<line x1="{_SVG_PAD - 5}" y1="{py:.1f}" '
                         f'x2="{_SVG_PAD}" y2="{py:.1f}" stroke="black"/>')
            parts.append(f'<text x="{_SVG_PAD - 8}" y="{py + 4:.1f}" '
                         f'font-size="12" text-anchor="end">1e{tick}</text>')
    for e in guide_exponents:
        gy = [ly[0][0], ly[0][0] - e * (x_hi - lx[0][0])]
        parts.append(
            f'<polyline fill="none" stroke="#999999" stroke-dasharray="6,4" '
            f'points="{sx(lx[0][0]):.1f},{sy(gy[0]):.1f} '
            f'{sx(x_hi):.1f},{sy(gy[1]):.1f}"/>')
        parts.append(f'<text x="{sx(x_hi) - 4:.1f}" y="{sy(gy[1]) - 6:.1f}" '
                     f'font-size="11" fill="#999999" text-anchor="end">'
                     f'slope -{e:g}</text>')
    for i, (label, _, _) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}"
                       for a, b in zip(lx[i], ly[i]))
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'points="{pts}"/>')
        yleg = _SVG_PAD + 16 + 16 * i
        parts.append(f'<line x1="{_SVG_W - 170}" y1="{yleg - 4}" '
                     f'x2="{_SVG_W - 150}" y2="{yleg - 4}" stroke="{color}"/>')
        parts.append(f'<text x="{_SVG_W - 144}" y="{yleg}" font-size="12">'
                     f'{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# built-in configs

_ALPHA_Q = 3.0 + 3.0 / math.sqrt(2.0)


def builtin_configs() -> Dict[str, Dict[str, object]]:
    verif_common = ["lemma_tech1", "energy_two_forms", "dev_bn", "sign_facts",
                    "descent_lemma", "tech2_claim2", "checkpoint"]
    cfgs = {
        "theorem1_hoelder": {
            "name": "theorem1_hoelder",
            "seed": 11,
            "problem": {"name": "hoelder_dist", "dim": 10, "affine_dim": 2,
                        "gamma": 4.0, "K": 1.0, "R": 2.0, "x0_dist": 1.0},
            "run": [
                {"label": "rate", "kind": "fista", "alpha": 10.0,
                 "max_iter": 100000, "record_stride": 50},
                {"label": "verify", "kind": "fista", "alpha": 10.0,
                 "max_iter": 10000, "record_stride": 1, "verify": True},
            ],
            "verifier": verif_common + ["flat_decrement", "lemma_geo"],
            "check": [
                {"type": "rate", "run": "rate", "series": "gap",
                 "exponent": 3.7, "name": "gap_rate"},
                {"type": "rate", "run": "rate", "series": "step",
                 "exponent": 1.7, "name": "step_rate"},
                {"type": "control1", "run": "rate"},
            ],
        },
        "theorem2_bound": {
            "name": "theorem2_bound",
            "seed": 7,
            "problem": {"name": "rankdef_ls", "dim": 10, "rank": 6,
                        "kappa": 1e-2, "x0_dist": 1.0},
            "run": [
                {"label": "explicit", "kind": "fista", "alpha": _ALPHA_Q,
                 "max_iter": 30000, "record_stride": 7},
            ],
            "check": [
                {"type": "explicit_bound", "run": "explicit",
                 "alpha": _ALPHA_Q, "name": "explicit_bound"},
                {"type": "rate", "run": "explicit", "series": "gap",
                 "exponent": 2.0 * _ALPHA_Q / 3.0 - 0.3, "name": "gap_rate"},
                {"type": "control1", "run": "explicit"},
            ],
        },
        "theorem3_quadratic": {
            "name": "theorem3_quadratic",
            "seed": 7,
            "problem": {"name": "rankdef_ls", "dim": 10, "rank": 6,
                        "kappa": 1e-2, "x0_dist": 1.0},
            "run": [
                {"label": f"alpha{a:g}", "kind": "fista", "alpha": a,
                 "max_iter": 100000, "record_stride": 17}
                for a in (_ALPHA_Q, 6.0, 9.0)
            ] + [
                {"label": "verify", "kind": "fista", "alpha": 6.0,
                 "max_iter": 10000, "record_stride": 1, "verify": True},
            ],
            "verifier": verif_common + ["lemma_AB"],
            "check": sum([[
                {"type": "rate", "run": f"alpha{a:g}", "series": "gap",
                 "exponent": 2.0 * a / 3.0 - 0.3, "name": f"gap_rate_{a:g}"},
                {"type": "rate", "run": f"alpha{a:g}", "series": "step",
                 "exponent": a / 3.0 - 0.3, "name": f"step_rate_{a:g}"},
                {"type": "cauchy_length", "run": f"alpha{a:g}",
                 "ratio": 1e-3, "name": f"finite_length_{a:g}"},
                {"type": "worst_case", "run": f"alpha{a:g}", "alpha": a,
                 "name": f"worst_case_{a:g}"},
            ] for a in (_ALPHA_Q, 6.0, 9.0)], []),
        },
        "strong_convergence_sweep": {
            "name": "strong_convergence_sweep",
            "seed": 11,
            "problem": {"name": "hoelder_dist", "dim": 10, "affine_dim": 2,
                        "gamma": 4.0, "K": 1.0, "R": 2.0, "x0_dist": 1.0},
            "run": [
                {"label": f"alpha{a:g}", "kind": "fista", "alpha": a,
                 "max_iter": 100000, "record_stride": 50}
                for a in (5.5, 7.0, 10.0)
            ],
            "check": [
                {"type": "cauchy_length", "run": f"alpha{a:g}",
                 "ratio": 1e-2, "name": f"finite_length_{a:g}"}
                for a in (5.5, 7.0, 10.0)
            ],
        },
        "theorem45_avd": {
            "name": "theorem45_avd",
            "seed": 3,
            "problem": {"name": "simple_quadratic", "dim": 10, "mu": 1.0,
                        "x0_dist": 1.0},
            "run": [
                {"label": f"alpha{a:g}", "kind": "avd", "alpha": a,
                 "t_end": 1000.0, "dt": 0.05, "record_stride": 20}
                for a in (4.0, 6.0)
            ],
            "check": sum([[
                {"type": "rate", "run": f"alpha{a:g}", "series": "gap",
                 "exponent": 2.0 * a / 3.0 - 0.3, "name": f"gap_rate_{a:g}"},
                {"type": "avd_bound", "run": f"alpha{a:g}", "alpha": a,
                 "name": f"ode_bound_{a:g}"},
            ] for a in (4.0, 6.0)], []),
        },
        "avd_hoelder": {
            "name": "avd_hoelder",
            "seed": 11,
            "problem": {"name": "hoelder_dist", "dim": 10, "affine_dim": 2,
                        "gamma": 4.0, "K": 1.0, "R": 2.0, "x0_dist": 1.0},
            "run": [
                {"label": "alpha10", "kind": "avd", "alpha": 10.0,
                 "t_end": 1000.0, "dt": 0.01, "record_stride": 100},
            ],
            "check": [
                {"type": "rate", "run": "alpha10", "series": "gap",
                 "exponent": 3.7, "name": "gap_rate"},
            ],
        },
        "pgm_rates": {
            "name": "pgm_rates",
            "seed": 7,
            "problem": {"name": "rankdef_ls", "dim": 10, "rank": 6,
                        "kappa": 1e-2, "x0_dist": 1.0},
            "run": [
                {"label": "pgm", "kind": "pgm", "max_iter": 10000,
                 "record_stride": 7},
            ],
            "check": [
                {"type": "linear_rate", "run": "pgm",
                 "rho": 1e-2 / 4.0 * 0.8, "name": "linear_rate"},
                {"type": "control1", "run": "pgm"},
            ],
        },
        "pgm_hoelder": {
            "name": "pgm_hoelder",
            "seed": 11,
            "problem": {"name": "hoelder_dist", "dim": 10, "affine_dim": 2,
                        "gamma": 4.0, "K": 1.0, "R": 2.0, "x0_dist": 1.0},
            "run": [
                {"label": "pgm", "kind": "pgm", "max_iter": 30000,
                 "record_stride": 11},
            ],
            "check": [
                {"type": "rate", "run": "pgm", "series": "gap",
                 "exponent": 1.7, "name": "gap_rate"},
            ],
        },
        "tuning_demo": {
            "name": "tuning_demo",
            "seed": 7,
            "problem": {"name": "rankdef_ls", "dim": 10, "rank": 6,
                        "kappa": 1e-2, "x0_dist": 1.0},
            "run": [
                {"label": "reference", "kind": "fista", "alpha": _ALPHA_Q,
                 "max_iter": 2000, "record_stride": 10},
            ],
            "check": [
                {"type": "tuning", "epsilon": 1e-6, "name": "tuning"},
            ],
        },
    }
    return cfgs


def get_builtin(name: str) -> ExperimentConfig:
    cfgs = builtin_configs()
    if name not in cfgs:
        raise ValueError(f"unknown built-in config {name!r}; "
                         f"available: {', '.join(sorted(cfgs))}")
    return ExperimentConfig.from_dict(cfgs[name])


# ---------------------------------------------------------------------------
# CLI

def _cmd_run(args) -> int:
    if os.path.exists(args.config):
        cfg = load_config(args.config)
    else:
        cfg = get_builtin(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    report = run_experiment(cfg, out_dir=args.out, threads=args.threads)
    for c in report.checks:
        print(f"[{c.status.upper()}] {c.name}: {c.detail}")
    for v in report.verifier_reports:
        print(str(v))
    print(f"outputs in {report.out_dir} ({report.wall_time:.2f} s)")
    return 1 if report.failed(strict=args.strict) else 0


def _cmd_list(args) -> int:
    for name in sorted(builtin_configs()):
        print(name)
    return 0


def _cmd_verify(args) -> int:
    cfg = load_config(args.config) if os.path.exists(args.config) \
        else get_builtin(args.config)
    P, _ = build_problem(cfg.problem, args.seed if args.seed is not None
                         else cfg.seed)
    cols = read_series_csv(args.trace)
    d = P.dim
    iterates = [np.array([cols[f"x{i}"][k] for i in range(d)])
                for k in range(len(cols["n"]))]
    run = next((r for r in cfg.runs if r.get("verify")), cfg.runs[0])
    trace = solvers.Trace(problem=P, config=None, records=[],
                          final_x=iterates[-1], terminated_by="budget",
                          iterates=iterates)
    q = diagnostics.compute_seq_quantities(trace, P,
                                           alpha=float(run.get("alpha", 0)))
    ok = True
    for vname in cfg.verifiers:
        rep = VERIFIERS[vname](q, P, run)
        print(str(rep))
        ok = ok and rep.passed
    return 0 if ok else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="growthfista",
        description="momentum-method rate experiments and inequality verifiers")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallel runs inside a sweep")
    parser.add_argument("--strict", action="store_true",
                        help="flagged checks count as failures")
    sub = parser.add_subparsers(dest="verb", required=True)
    p_run = sub.add_parser("run", help="run a built-in or file config")
    p_run.add_argument("config")
    sub.add_parser("list", help="list built-in configs")
    p_ver = sub.add_parser("verify",
                           help="re-run verifiers on a stored iterates CSV")
    p_ver.add_argument("trace")
    p_ver.add_argument("--config", required=True,
                       help="built-in name or config file that produced it")
    sub.add_parser("version", help="print version")

    args = parser.parse_args(argv)
    if args.verb == "run":
        return _cmd_run(args)
    if args.verb == "list":
        return _cmd_list(args)
    if args.verb == "verify":
        return _cmd_verify(args)
    print(__version__)
    return 0


if __name__ == "__main__":
    sys.exit(main())
