import numpy as np
import pytest

from activelasso import (
    ProblemInstance,
    eligibility,
    is_optimal,
    kkt_residual,
    smooth_gradient,
    solve,
    subgradient_box,
    tier_config,
)
from helpers import random_ls_instance

I3 = np.eye(3)
B3 = np.array([3.0, 0.5, -2.0])


def test_subgradient_box_orthonormal_example():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    box = subgradient_box(inst, np.array([2.0, 0.0, -1.0]))
    np.testing.assert_allclose(box.lo, [0.0, -1.5, 0.0])
    np.testing.assert_allclose(box.hi, [0.0, 0.5, 0.0])


def test_subgradient_box_at_origin_is_full_width():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    g = smooth_gradient(inst, np.zeros(3))
    box = subgradient_box(inst, np.zeros(3))
    np.testing.assert_allclose(box.lo, g - 1.0)
    np.testing.assert_allclose(box.hi, g + 1.0)


def test_subgradient_box_degenerates_without_penalty(rng):
    # a vanishing penalty weight collapses every interval onto the gradient
    A = rng.standard_normal((4, 2))
    inst = ProblemInstance(A, rng.standard_normal(4), kind="ls", eta=1.0,
                           unpenalized_col=0)
    x = np.array([0.0, 0.5])
    box = subgradient_box(inst, x)
    g = smooth_gradient(inst, x)
    assert box.lo[0] == box.hi[0] == g[0]


def test_eligibility_at_origin_sorted():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    rep = eligibility(inst, np.zeros(3), np.array([0, 1, 2]))
    np.testing.assert_array_equal(rep.indices, [0, 2])
    np.testing.assert_allclose(rep.magnitudes, [3.0, 2.0])


def test_eligibility_empty_active_set():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    rep = eligibility(inst, np.zeros(3), np.array([], dtype=np.int64))
    assert len(rep) == 0


def test_eligibility_ties_break_by_index():
    A = np.eye(4)
    b = np.array([2.0, -2.0, 3.0, 2.0])
    inst = ProblemInstance(A, b, kind="ls", eta=1.0)
    rep = eligibility(inst, np.zeros(4), np.arange(4))
    np.testing.assert_array_equal(rep.indices, [2, 0, 1, 3])


def test_eligibility_requires_zero_on_active():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    with pytest.raises(ValueError):
        eligibility(inst, np.array([1.0, 0.0, 0.0]), np.array([0]))


def test_eligibility_empty_after_unconstrained_solve(rng):
    inst = random_ls_instance(rng, n=40, p=60)
    rep = solve(inst, np.empty(0, dtype=np.int64), np.zeros(60), tier_config("cd"))
    zeros = np.flatnonzero(rep.x == 0.0)
    report = eligibility(inst, rep.x, zeros)
    assert len(report) == 0


def test_kkt_residual_zero_at_orthonormal_optimum():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    assert kkt_residual(inst, np.array([2.0, 0.0, -1.0])) == 0.0


def test_kkt_residual_at_origin():
    A = np.eye(2)
    b = np.array([5.0, 1.0])
    inst = ProblemInstance(A, b, kind="ls", eta=1.0)
    assert kkt_residual(inst, np.zeros(2)) == pytest.approx(4.0)


def test_origin_optimal_iff_eta_dominates_gradient(rng):
    for _ in range(20):
        A = rng.standard_normal((6, 10))
        b = rng.standard_normal(6)
        g0 = np.abs(A.T @ b).max()
        above = ProblemInstance(A, b, kind="ls", eta=1.01 * g0)
        below = ProblemInstance(A, b, kind="ls", eta=0.5 * g0)
        assert kkt_residual(above, np.zeros(10)) == 0.0
        assert kkt_residual(below, np.zeros(10)) == pytest.approx(g0 - 0.5 * g0)


def test_is_optimal_thresholds():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    assert is_optimal(inst, np.array([2.0, 0.0, -1.0]), 1e-6)
    assert not is_optimal(inst, np.zeros(3), 1e-6)
    with pytest.raises(ValueError):
        is_optimal(inst, np.zeros(3), -1.0)


def test_tight_solver_output_passes_is_optimal(rng):
    inst = random_ls_instance(rng, n=50, p=120)
    rep = solve(inst, np.empty(0, dtype=np.int64), np.zeros(120), tier_config("cd"))
    assert is_optimal(inst, rep.x, 1e-4 * inst.eta)


def test_eligibility_matches_brute_force_resolve(rng):
    # releasing a pinned coordinate strictly decreases the optimum iff
    # the coordinate is reported; checked by re-solving tiny problems
    ultra = tier_config("cd")
    from dataclasses import replace
    ultra = replace(ultra, tol=1e-16, kkt_rel=1e-9, max_iter=500_000)
    for _ in range(25):
        n = int(rng.integers(6, 16))
        p = int(rng.integers(4, 13))
        A = rng.standard_normal((n, p))
        b = rng.standard_normal(n)
        eta = 0.35 * np.abs(A.T @ b).max()
        inst = ProblemInstance(A, b, kind="ls", eta=eta)
        active = np.sort(rng.choice(p, size=p // 2, replace=False)).astype(np.int64)
        base = solve(inst, active, np.zeros(p), ultra)
        report = eligibility(inst, base.x, active)
        listed = set(report.indices.tolist())
        for j in active:
            freed = np.setdiff1d(active, [j])
            again = solve(inst, freed, np.zeros(p), ultra)
            decreased = base.objective - again.objective > 1e-9
            assert decreased == (int(j) in listed), (j, base.objective, again.objective)
