"""Tests for the solver module."""

import numpy as np
import pytest

from locsvm.solver import (
    CellModel,
    CellProblem,
    brute_force_dual,
    cell_predict_raw,
    classification_loss,
    clip,
    hinge_loss,
    sign,
    train_cell,
)

SEED = 0


def random_problem(seed: int, k: int = 4, lam: float = 0.25) -> CellProblem:
    rng = np.random.default_rng(seed)
    X = rng.uniform(-0.4, 0.4, size=(k, 2))
    y = rng.choice([-1, 1], size=k)
    return CellProblem(X, y, lam=lam, gamma=0.5, n=k)


def objective(m: CellModel) -> float:
    return float(m.alpha.sum() - 0.5 * m.rkhs_norm_sq)


def support_mask(problem: CellProblem, m: CellModel) -> np.ndarray:
    return np.array([np.any(np.all(m.support == x, axis=1)) for x in problem.X])


@pytest.mark.parametrize(("lam", "expected"), [(0.5, 1.0), (1.0, 0.5)])
def test_single_point(lam, expected):
    """Test a single point takes alpha = min(1, C)."""
    m = train_cell(CellProblem(np.zeros((1, 1)), np.array([1]), lam=lam, gamma=1.0, n=1))
    assert m.alpha[0] == pytest.approx(expected)
    assert cell_predict_raw(m, 0.0) == pytest.approx(expected)
    assert m.converged


def test_empty_cell_is_zero():
    """Test a cell without data predicts zero."""
    m = train_cell(CellProblem(np.empty((0, 2)), np.empty(0), lam=1.0, gamma=0.5, n=10))
    assert m.n_support == 0
    assert m.rkhs_norm_sq == 0.0
    assert cell_predict_raw(m, [0.1, 0.1]) == 0.0


@pytest.mark.parametrize("seed", range(100))
def test_matches_brute_force(seed):
    """Test coordinate ascent reaches at least the best dual value on a fine grid."""
    k = int(np.random.default_rng(10_000 + seed).integers(1, 5))
    problem = random_problem(seed, k=k)
    exact = train_cell(problem, eps_kkt=1e-9)
    grid = brute_force_dual(problem, grid_step=problem.box / 20)
    assert objective(exact) >= objective(grid) - 1e-7
    # the grid optimum is close to the true one
    assert objective(exact) - objective(grid) <= 1e-2


@pytest.mark.parametrize("seed", [6, 7, 8])
def test_kkt_conditions(seed):
    """Test margins of non-support points exceed one and free points sit on the margin."""
    problem = random_problem(seed, k=25, lam=0.02)
    m = train_cell(problem, eps_kkt=1e-8)
    assert m.converged
    margins = problem.y * m.decision_values(problem.X)
    sv = support_mask(problem, m)
    assert np.all(margins[~sv] >= 1 - 1e-6)
    free = m.alpha < problem.box
    assert np.allclose(margins[sv][free], 1.0, atol=1e-6)
    assert np.all(m.alpha <= problem.box)


def test_dual_history_non_decreasing():
    """Test the dual objective never drops between sweeps."""
    m = train_cell(random_problem(SEED, k=40, lam=0.01))
    history = np.array(m.dual_history)
    assert history.size == m.sweeps
    assert np.all(np.diff(history) >= -1e-12)


def test_deterministic():
    """Test identical problems train identical models."""
    a = train_cell(random_problem(3, k=20))
    b = train_cell(random_problem(3, k=20))
    assert np.array_equal(a.alpha, b.alpha)
    assert np.array_equal(a.support, b.support)


def test_norm_invariant_to_permutation():
    """Test the trained function does not depend on the order of the data."""
    problem = random_problem(9, k=20, lam=0.05)
    perm = np.random.default_rng(SEED).permutation(20)
    shuffled = CellProblem(problem.X[perm], problem.y[perm], problem.lam, problem.gamma, problem.n)
    a = train_cell(problem, eps_kkt=1e-10)
    b = train_cell(shuffled, eps_kkt=1e-10)
    assert a.rkhs_norm_sq == pytest.approx(b.rkhs_norm_sq, rel=1e-4)
    grid = np.random.default_rng(1).uniform(-0.4, 0.4, size=(10, 2))
    assert np.allclose(a.decision_values(grid), b.decision_values(grid), atol=1e-4)


def test_rejects_bad_settings():
    """Test invalid stopping settings are errors."""
    problem = random_problem(SEED)
    with pytest.raises(ValueError, match="eps_kkt"):
        train_cell(problem, eps_kkt=0.0)
    with pytest.raises(ValueError, match="max_sweeps"):
        train_cell(problem, max_sweeps=0)


def test_cell_problem_validation():
    """Test labels and sample sizes are checked."""
    with pytest.raises(ValueError, match="labels"):
        CellProblem(np.zeros((2, 1)), np.array([1, 0]), lam=1.0, gamma=1.0, n=2)
    with pytest.raises(ValueError, match="smaller than"):
        CellProblem(np.zeros((3, 1)), np.array([1, 1, -1]), lam=1.0, gamma=1.0, n=2)
    with pytest.raises(ValueError, match="lambda"):
        CellProblem(np.zeros((1, 1)), np.array([1]), lam=0.0, gamma=1.0, n=1)


def test_brute_force_rejects_large_cells():
    """Test the grid oracle refuses more than five points."""
    with pytest.raises(ValueError, match="at most"):
        brute_force_dual(random_problem(SEED, k=6), grid_step=0.1)


def test_clip_and_sign():
    """Test clipping and the sign convention at zero."""
    assert clip(2.5) == 1.0
    assert clip(-0.3) == -0.3
    assert np.array_equal(clip(np.array([-3.0, 0.5])), np.array([-1.0, 0.5]))
    assert sign(0.0) == 1
    assert sign(-1e-300) == -1
    assert np.array_equal(sign(np.array([0.0, -2.0, 3.0])), np.array([1, -1, 1]))


def test_losses():
    """Test the hinge and classification losses."""
    assert hinge_loss(1, 0.5) == pytest.approx(0.5)
    assert hinge_loss(-1, -2.0) == 0.0
    assert hinge_loss(-1, 0.0) == 1.0
    assert classification_loss(-1, 0.0) == 1.0
    assert classification_loss(1, 0.0) == 0.0


def test_block_round_trip():
    """Test a cell block reloads with identical coefficients."""
    m = train_cell(random_problem(2, k=10))
    lines = m.to_block(7).splitlines()
    j, loaded, rest = CellModel.from_lines(lines + ["tail"], dim=2)
    assert j == 7
    assert rest == ["tail"]
    assert np.array_equal(loaded.alpha, m.alpha)
    assert np.array_equal(loaded.support, m.support)
    assert loaded.gamma == m.gamma
    assert loaded.rkhs_norm_sq == pytest.approx(m.rkhs_norm_sq)


def test_block_rejects_bad_header():
    """Test a malformed cell header is reported."""
    with pytest.raises(ValueError, match="bad cell header"):
        CellModel.from_lines(["cell 0 0.5"], dim=1)
