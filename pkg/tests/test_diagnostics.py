import numpy as np
import pytest

from growthfista.diagnostics import (compute_seq_quantities, control1_check,
                                     energy_E, energy_flat, flat_parameters,
                                     gradient_mapping, verify_checkpoint_inequality,
                                     verify_descent_lemma, verify_dev_bn,
                                     verify_energy_identity, verify_lemma_AB,
                                     verify_lemma_tech1, verify_lemma_tech2_claim2,
                                     verify_sign_facts)
from growthfista.problems import make_hoelder_distance, make_lasso
from growthfista.solvers import FISTA_CD, SolverConfig, Trace, fista_run
from growthfista.vecgeo import AffineSubspace, Ball, Box, Halfspace


def random_set(rng, dim):
    kind = rng.integers(4)
    if kind == 0:
        lo = rng.standard_normal(dim)
        return Box(lower=lo, upper=lo + rng.random(dim) + 0.1)
    if kind == 1:
        return Ball(center=rng.standard_normal(dim), radius=0.5 + rng.random())
    if kind == 2:
        q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        k = int(rng.integers(0, dim))
        return AffineSubspace(offset=rng.standard_normal(dim),
                              directions=q.T[:k] if k else None)
    n = rng.standard_normal(dim)
    return Halfspace(normal=n / np.linalg.norm(n),
                     offset=float(rng.standard_normal()))


def random_quantities(rng, n_pts=4, dim=3):
    C = random_set(rng, dim)
    P = make_hoelder_distance(C, gamma=3.0, K=1.0, R=100.0)
    xs = [rng.standard_normal(dim) * 2.0 for _ in range(n_pts)]
    trace = Trace(problem=P, config=None, records=[], final_x=xs[-1],
                  iterates=xs, terminated_by="budget")
    alpha = 3.0 + 9.0 * rng.random()
    return compute_seq_quantities(trace, P, alpha=alpha), alpha


def test_identities_hold_on_random_draws(rng):
    """Pure algebra: holds for arbitrary point sequences and convex sets."""
    for _ in range(1000):
        q, alpha = random_quantities(rng)
        assert verify_lemma_tech1(q).passed
        assert verify_energy_identity(q, alpha).passed
        assert verify_dev_bn(q, alpha - 1.0 - 2.0).worst_violation <= 1e-10
        assert verify_sign_facts(q).passed


def genuine_run(P, alpha, n=300):
    x0 = P.solution_set.project(np.zeros(P.dim)) + 0.5 * np.ones(P.dim) \
        / np.sqrt(P.dim)
    cfg = SolverConfig(algorithm=FISTA_CD, alpha=alpha, max_iter=n,
                       record_stride=1)
    return fista_run(P, cfg, x0)


@pytest.fixture(scope="module")
def hoelder_run(hoelder_problem):
    P, x0 = hoelder_problem
    cfg = SolverConfig(algorithm=FISTA_CD, alpha=10.0, max_iter=500,
                       record_stride=1)
    trace = fista_run(P, cfg, x0)
    return P, compute_seq_quantities(trace, P)


@pytest.fixture(scope="module")
def rankdef_run(rankdef_problem):
    P, x0 = rankdef_problem
    cfg = SolverConfig(algorithm=FISTA_CD, alpha=6.0, max_iter=500,
                       record_stride=1)
    trace = fista_run(P, cfg, x0)
    return P, compute_seq_quantities(trace, P)


def test_descent_and_tech2_along_runs(hoelder_run, rankdef_run):
    for P, q in (hoelder_run, rankdef_run):
        assert verify_descent_lemma(q, q.alpha).passed
        assert verify_lemma_tech2_claim2(q, q.alpha).passed


def test_checkpoint_inequality_along_runs(hoelder_run, rankdef_run):
    for P, q in (hoelder_run, rankdef_run):
        rep = verify_checkpoint_inequality(q, q.alpha)
        assert rep.passed, str(rep)


def test_lemma_AB_along_quadratic_run(rankdef_run):
    P, q = rankdef_run
    kappa = P.growth.mu / P.L
    for A, B in ((1.0, 0.0), (0.0, 1.0), (2.0, -1.5)):
        assert verify_lemma_AB(q, q.alpha, A, B, kappa).passed


def test_energy_values_positive_and_consistent(rankdef_run):
    P, q = rankdef_run
    for n in (1, 5, 50):
        assert energy_E(q, n, q.alpha) >= 0.0
    e, j = energy_flat(q, 10, 10.0, 4.0)
    assert j == pytest.approx(10.0 ** 3 * e)


def test_flat_parameters():
    p, lam, xi = flat_parameters(10.0, 4.0)
    assert p == 3.0 and lam == 6.0 and xi == pytest.approx(6.0 * (7.0 - 10.0))
    with pytest.raises(ValueError):
        flat_parameters(4.0, 4.0)    # needs alpha > 1 + p
    with pytest.raises(ValueError):
        flat_parameters(10.0, 2.0)


def test_gradient_mapping_zero_on_solution_composite():
    rng = np.random.default_rng(2)
    A, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    b = rng.standard_normal(5)
    lam = 0.2
    P = make_lasso(A, b, lam)
    c = A.T @ b
    x_star = np.sign(c) * np.maximum(np.abs(c) - lam, 0.0)
    assert np.linalg.norm(gradient_mapping(P, x_star)) <= 1e-12
    P.f_star = P.eval_F(x_star)
    for _ in range(20):
        assert control1_check(P, rng.standard_normal(5)) >= -1e-12


def test_verifier_report_formatting(rankdef_run):
    _, q = rankdef_run
    rep = verify_lemma_tech1(q)
    text = str(rep)
    assert "PASS" in text and "lemma_tech1" in text
