import numpy as np
import pytest

from activelasso import (
    ProblemInstance,
    embed,
    full_objective,
    restrict,
    smooth_gradient,
    smooth_value,
    soft_threshold,
)
from helpers import random_logistic_instance

I3 = np.eye(3)
B3 = np.array([3.0, 0.5, -2.0])


def test_smooth_value_ls_direct():
    inst = ProblemInstance(np.eye(2), np.array([3.0, 0.5]), kind="ls", eta=1.0)
    assert smooth_value(inst, [2.0, 0.0]) == pytest.approx(0.625)


def test_smooth_value_logistic_at_origin_is_log2():
    inst = ProblemInstance(np.array([[1.0, -4.0], [2.0, 0.5]]), np.array([1.0, 0.0]),
                           kind="logistic", eta=1.0)
    assert smooth_value(inst, np.zeros(2)) == pytest.approx(np.log(2.0), rel=1e-12)


def test_smooth_value_exact_fit_is_zero(rng):
    A = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    x = rng.standard_normal(4)
    inst = ProblemInstance(A, A @ x, kind="ls", eta=1.0)
    assert smooth_value(inst, x) == pytest.approx(0.0, abs=1e-18)


def test_smooth_value_logistic_stable_at_huge_margins():
    A = np.array([[700.0], [-700.0]])
    inst = ProblemInstance(A, np.array([1.0, 0.0]), kind="logistic", eta=1.0)
    val = smooth_value(inst, np.array([1.0]))
    assert np.isfinite(val)
    assert val == pytest.approx(0.0, abs=1e-250)


def test_smooth_gradient_ls_at_origin():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    np.testing.assert_allclose(smooth_gradient(inst, np.zeros(3)), -B3)


def test_smooth_gradient_logistic_single_row():
    inst = ProblemInstance(np.array([[1.0, 2.0]]), np.array([1.0]), kind="logistic", eta=1.0)
    np.testing.assert_allclose(smooth_gradient(inst, np.zeros(2)), [-0.5, -1.0])


def test_logistic_gradient_matches_finite_differences(rng):
    # central differences, h = 1e-5, over 100 random small instances
    for _ in range(100):
        n = int(rng.integers(5, 51))
        p = int(rng.integers(2, 21))
        inst = random_logistic_instance(rng, n=n, p=p)
        x = rng.uniform(-1.0, 1.0, size=p)
        g = smooth_gradient(inst, x)
        h = 1e-5
        fd = np.empty(p)
        for j in range(p):
            e = np.zeros(p)
            e[j] = h
            fd[j] = (smooth_value(inst, x + e) - smooth_value(inst, x - e)) / (2 * h)
        denom = max(np.abs(fd).max(), 1e-12)
        assert np.abs(g - fd).max() / denom <= 1e-6


def test_full_objective_orthonormal_example():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    assert full_objective(inst, [2.0, 0.0, -1.0]) == pytest.approx(4.125)


def test_full_objective_zero_point_has_no_penalty():
    inst = ProblemInstance(I3, B3, kind="ls", eta=7.0)
    assert full_objective(inst, np.zeros(3)) == pytest.approx(smooth_value(inst, np.zeros(3)))


def test_full_objective_pure_penalty_term():
    # f vanishes at an exact fit, leaving eta * ||x||_1
    A = np.eye(2)
    x = np.array([1.0, -1.0])
    inst = ProblemInstance(A, A @ x, kind="ls", eta=1.0)
    assert full_objective(inst, x) == pytest.approx(2.0)


def test_full_objective_dominates_smooth_value(rng):
    inst = ProblemInstance(rng.standard_normal((6, 9)), rng.standard_normal(6), eta=0.7)
    for _ in range(20):
        x = rng.standard_normal(9)
        assert full_objective(inst, x) >= smooth_value(inst, x)
    assert full_objective(inst, np.zeros(9)) == smooth_value(inst, np.zeros(9))


def test_objective_convexity_spot_check(rng):
    for _ in range(50):
        inst = ProblemInstance(rng.standard_normal((8, 12)), rng.standard_normal(8), eta=0.5)
        x = rng.standard_normal(12)
        z = rng.standard_normal(12)
        lam = rng.random()
        mid = full_objective(inst, lam * x + (1 - lam) * z)
        assert mid <= lam * full_objective(inst, x) + (1 - lam) * full_objective(inst, z) + 1e-12


@pytest.mark.parametrize(
    "z,t,expected",
    [(3.0, 1.0, 2.0), (-0.5, 1.0, 0.0), (-3.0, 1.0, -2.0), (0.0, 0.0, 0.0)],
)
def test_soft_threshold_scalars(z, t, expected):
    assert soft_threshold(z, t) == expected


def test_soft_threshold_is_prox_of_abs(rng):
    # argmin_x 0.5 (x - z)^2 + t |x| found by dense scan
    for _ in range(10):
        z = float(rng.uniform(-4, 4))
        t = float(rng.uniform(0, 2))
        grid = np.linspace(-6, 6, 200001)
        brute = grid[np.argmin(0.5 * (grid - z) ** 2 + t * np.abs(grid))]
        assert soft_threshold(z, t) == pytest.approx(brute, abs=1e-4)


def test_soft_threshold_rejects_negative_threshold():
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.1)


def test_restrict_identity():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    sub = restrict(inst, [0, 1, 2])
    np.testing.assert_array_equal(sub.A, inst.A)
    assert sub.eta == inst.eta


def test_restrict_single_column_closed_form():
    # free = {column 1}: optimum of the 1-D problem is the soft threshold of b_2
    inst = ProblemInstance(I3, B3, kind="ls", eta=0.3)
    sub = restrict(inst, [1])
    assert sub.n_cols == 1
    opt = soft_threshold(B3[1], 0.3)
    g = smooth_gradient(sub, np.array([opt]))
    assert abs(g[0] + np.sign(opt) * 0.3) <= 1e-12 if opt != 0 else abs(g[0]) <= 0.3


def test_restrict_empty_free_set():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    sub = restrict(inst, [])
    assert sub.n_cols == 0
    assert smooth_value(inst, np.zeros(3)) == pytest.approx(smooth_value(sub, np.zeros(0)))


def test_restrict_rejects_unsorted():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0)
    with pytest.raises(ValueError):
        restrict(inst, [2, 1])
    with pytest.raises(ValueError):
        restrict(inst, [1, 1])


def test_embed_basics():
    np.testing.assert_array_equal(embed([7.0], [1], 3), [0.0, 7.0, 0.0])
    x = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(embed(x, [0, 1, 2], 3), x)


def test_embed_restrict_round_trip(rng):
    inst = ProblemInstance(rng.standard_normal((5, 8)), rng.standard_normal(5), eta=0.4)
    free = np.array([1, 3, 4, 7])
    x_free = rng.standard_normal(4)
    full = embed(x_free, free, 8)
    np.testing.assert_array_equal(full[free], x_free)
    # objective commutes with restrict/embed
    sub = restrict(inst, free)
    assert full_objective(inst, full) == pytest.approx(full_objective(sub, x_free), rel=1e-12)


def test_embed_rejects_bad_lengths():
    with pytest.raises(ValueError):
        embed([1.0, 2.0], [0], 3)
    with pytest.raises(IndexError):
        embed([1.0], [5], 3)


def test_instance_validation():
    with pytest.raises(ValueError):
        ProblemInstance(I3, B3[:2], kind="ls", eta=1.0)
    with pytest.raises(ValueError):
        ProblemInstance(I3, B3, kind="ls", eta=0.0)
    with pytest.raises(ValueError):
        ProblemInstance(I3, np.array([0.0, 2.0, 1.0]), kind="logistic", eta=1.0)
    with pytest.raises(ValueError):
        ProblemInstance(np.array([[np.inf, 0.0]]), np.array([1.0]), kind="ls", eta=1.0)


def test_unpenalized_column_is_exempt():
    inst = ProblemInstance(I3, B3, kind="ls", eta=1.0, unpenalized_col=1)
    w = inst.penalty_weights()
    np.testing.assert_array_equal(w, [1.0, 0.0, 1.0])
    # penalty skips column 1 in the objective
    assert full_objective(inst, [0.0, 5.0, 0.0]) == pytest.approx(
        smooth_value(inst, [0.0, 5.0, 0.0])
    )
    # restriction remaps the exempt column
    sub = restrict(inst, [1, 2])
    assert sub.unpenalized_col == 0
    sub2 = restrict(inst, [0, 2])
    assert sub2.unpenalized_col is None
