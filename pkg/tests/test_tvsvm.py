"""Tests for the training-validation SVM."""

import numpy as np
import pytest

from locsvm.analysis.rates import CellRule
from locsvm.analysis.risk import estimate_risk
from locsvm.dataset import Dataset
from locsvm.distributions import MarginDistribution
from locsvm.geometry import Partition, build_rnet
from locsvm.model import train_localized
from locsvm.solver import clip, hinge_loss
from locsvm.tvsvm import ParameterNets, build_nets, select, split_tv, train_tv

SEED = 0
HALVES = np.array([[-0.5], [0.5]])


@pytest.fixture
def halves():
    return Partition(1, 1.0, HALVES)


@pytest.fixture
def small_nets():
    return build_nets(40, 1.0, "geometric", 3)


def line_sample(n: int, seed: int = SEED) -> Dataset:
    return MarginDistribution(family="halfspace", d=1).sample(n, seed=seed)


@pytest.mark.parametrize(("n", "n_train", "n_val"), [(4, 3, 1), (5, 3, 2), (10, 6, 4)])
def test_split_sizes(n, n_train, n_val):
    """Test the first floor(n/2) + 1 samples train and the rest validate."""
    data = line_sample(n)
    train, val = split_tv(data)
    assert (len(train), len(val)) == (n_train, n_val)
    assert np.array_equal(train.X, data.X[:n_train])


def test_split_rejects_tiny_samples():
    """Test fewer than four samples are rejected."""
    with pytest.raises(ValueError, match="at least 4"):
        split_tv(line_sample(3))


def test_exact_nets():
    """Test the arithmetic nets for n=10 and r=0.5."""
    nets = build_nets(10, 0.5, "exact")
    assert np.allclose(nets.lambdas, np.arange(10, 0, -1) / 100)
    assert np.allclose(nets.gammas, np.arange(10, 0, -1) * 0.05)
    assert nets.lambdas.max() <= 0.1
    assert nets.gammas.max() <= 0.5
    assert len(nets.pairs) == 100


def test_geometric_nets_endpoints():
    """Test a two-entry geometric net spans exactly its range."""
    nets = build_nets(10, 0.5, "geometric", 2)
    assert np.allclose(nets.lambdas, [0.1, 1e-3])
    assert np.allclose(nets.gammas, [0.5, 0.05])


def test_build_nets_rejects_unknown_mode():
    """Test an unknown net mode is an error."""
    with pytest.raises(ValueError, match="unknown net mode"):
        build_nets(10, 0.5, "random")  # type: ignore[arg-type]


def test_parameter_nets_must_decrease():
    """Test nets given in increasing order are rejected."""
    with pytest.raises(ValueError, match="decreasing"):
        ParameterNets(np.array([0.01, 0.1]), np.array([0.5]), 0.09, 0.0, "geometric", 10, 0.5)


def test_parameter_nets_reject_lambda_above_inverse_n():
    """Test a lambda net reaching past 1/n is rejected."""
    with pytest.raises(ValueError, match="1/n"):
        ParameterNets(np.array([0.2, 0.01]), np.array([0.5]), 0.19, 0.0, "geometric", 10, 0.5)


def test_parameter_nets_reject_gamma_above_radius():
    """Test a gamma net reaching past r_n is rejected."""
    with pytest.raises(ValueError, match="r_n"):
        ParameterNets(np.array([0.1]), np.array([0.6, 0.3]), 0.0, 0.5, "geometric", 10, 0.5)


@pytest.mark.parametrize("mode", ["exact", "geometric"])
def test_built_nets_stay_in_range(mode):
    """Test both net modes respect 1/n and r_n."""
    nets = build_nets(37, 0.3, mode, 6)
    assert nets.lambdas.max() <= 1 / 37
    assert nets.gammas.max() <= 0.3
    assert (nets.n, nets.r_n) == (37, 0.3)


def test_selection_minimises_validation_risk(halves, small_nets):
    """Test every cell keeps a candidate of least validation risk."""
    train, val = split_tv(line_sample(80))
    selection = select(train, val, halves, small_nets, quiet=True)
    df = selection.candidates
    for j in range(halves.m):
        cell = df[df["cell"] == j]
        chosen = cell[cell["chosen"] == 1]
        assert len(chosen) == 1
        assert chosen["val_risk"].iloc[0] == cell["val_risk"].min()
        assert chosen["lambda"].iloc[0] == selection.lambdas[j]


def test_ties_prefer_small_lambda_and_large_gamma(halves, small_nets):
    """Test a cell where every candidate ties gets the smallest lambda and largest gamma."""
    rng = np.random.default_rng(SEED)
    train = Dataset(rng.uniform(-1.0, -0.1, size=(20, 1)), rng.choice([-1, 1], 20))
    val = Dataset(rng.uniform(0.1, 1.0, size=(10, 1)), rng.choice([-1, 1], 10))
    # no training data on the right, so every candidate predicts zero there
    selection = select(train, val, halves, small_nets, quiet=True)
    assert selection.lambdas[1] == small_nets.lambdas.min()
    assert selection.gammas[1] == small_nets.gammas.max()


def test_cell_without_validation_points_falls_back(halves, small_nets):
    """Test a cell with no validation data gets the fallback pair and no risk."""
    rng = np.random.default_rng(SEED)
    train = Dataset(rng.uniform(-1.0, 1.0, size=(20, 1)), rng.choice([-1, 1], 20))
    val = Dataset(rng.uniform(-1.0, -0.1, size=(10, 1)), rng.choice([-1, 1], 10))
    selection = select(train, val, halves, small_nets, quiet=True)
    assert selection.lambdas[1] == small_nets.lambdas.min()
    assert selection.gammas[1] == small_nets.gammas.max()
    right = selection.candidates[selection.candidates["cell"] == 1]
    assert right["val_risk"].isna().all()


def test_single_candidate_matches_plain_training(halves):
    """Test one-pair nets reproduce the localized SVM on the training half."""
    data = line_sample(60)
    nets = ParameterNets(np.array([1e-2]), np.array([0.4]), 0.0, 0.0, "geometric", 60, 0.4)
    model, report = train_tv(data, halves, nets, quiet=True)
    train, _ = split_tv(data)
    plain = train_localized(train, halves, 1e-2, 0.4)
    X = np.linspace(-1.0, 1.0, 41).reshape(-1, 1)
    assert np.array_equal(model.decision_function(X), plain.decision_function(X))
    assert (report.n_train, report.n_val) == (31, 29)


def test_gamma_net_wider_than_cells_rejected():
    """Test a gamma net reaching past the cell radius is rejected."""
    p = Partition(1, 0.25, np.array([[-0.75], [-0.25], [0.25], [0.75]]))
    train, val = split_tv(line_sample(20))
    with pytest.raises(ValueError, match="cell radius"):
        select(train, val, p, build_nets(20, 0.5), quiet=True)


def test_report_csv(tmp_path, halves, small_nets):
    """Test the candidate table is written with one row per cell and pair."""
    _, report = train_tv(line_sample(40), halves, small_nets, quiet=True)
    path = tmp_path / "tv_report.csv"
    report.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "cell,lambda,gamma,val_risk,chosen"
    assert len(lines) == 1 + halves.m * len(small_nets.pairs)


def test_independent_validation_matches_exhaustive_selection(halves, small_nets):
    """Test selection on an independent validation set equals a per-cell exhaustive search."""
    train = line_sample(60, seed=SEED)
    val = line_sample(40, seed=SEED + 1)
    selection = select(train, val, halves, small_nets, quiet=True)
    cells = halves.assign(val.X)
    for j in range(halves.m):
        scored = []
        for lam, gam in small_nets.pairs:
            model = train_localized(train, halves, lam, gam)
            losses = hinge_loss(val.y, clip(model.decision_function(val.X)))
            risk = losses[cells == j].sum() / len(val)
            scored.append((round(float(risk), 12), lam, -gam))
        risk, lam, neg_gam = min(scored)
        assert (selection.lambdas[j], selection.gammas[j]) == (lam, -neg_gam)
        df = selection.candidates
        chosen = df[(df["cell"] == j) & (df["chosen"] == 1)]
        assert chosen["val_risk"].iloc[0] == pytest.approx(risk, abs=1e-12)


@pytest.mark.slow
def test_tv_svm_within_twice_best_fixed_pair():
    """Test the TV-SVM excess risk on the d=2 halfspace is at most twice the best fixed pair's."""
    dist = MarginDistribution(family="halfspace", d=2)
    n = 2**12
    r = CellRule.for_distribution(dist).radius(n)
    nets = build_nets(n, r, "geometric", 6)
    tv_excess = []
    fixed_excess = {pair: [] for pair in nets.pairs}
    for seed in range(5):
        data = dist.sample(n, seed=seed)
        p = build_rnet(2, r, seed)
        train, val = split_tv(data)
        selection = select(train, val, p, nets, quiet=True)
        test_seed = 1_000 + seed
        tv_excess.append(estimate_risk(selection.assemble(p), dist, 50_000, seed=test_seed).excess_class)
        for pair, model in selection.models.items():
            fixed_excess[pair].append(estimate_risk(model, dist, 50_000, seed=test_seed).excess_class)
    best_fixed = min(np.mean(values) for values in fixed_excess.values())
    assert np.mean(tv_excess) <= 2 * best_fixed
