"""Tests for the synthetic distributions and margin estimators."""

import numpy as np
import pytest

from locsvm.distributions import (
    ExponentSheet,
    MarginDistribution,
    check_lc,
    estimate_me,
    estimate_mne,
    estimate_ne,
    margin_curves,
    margin_report,
    reverse_holder_check,
)
from locsvm.geometry import Partition

SEED = 7
N_MC = 1_000_000


@pytest.fixture
def line():
    return MarginDistribution(family="halfspace", d=1, zeta=1.0, tau=1.0)


@pytest.fixture
def plane():
    return MarginDistribution(family="halfspace", d=2, zeta=1.0, tau=1.0)


def test_eta_delta_label_examples(line):
    """Test closed-form evaluations on the line."""
    assert line.eta(0.3)[0] == pytest.approx(0.65)
    assert line.delta(0.3)[0] == pytest.approx(0.3)
    assert line.bayes_label(0.3)[0] == 1


def test_boundary_point(line):
    """Test the boundary has eta 1/2, zero distance and label +1."""
    assert line.eta(0.0)[0] == 0.5
    assert line.delta(0.0)[0] == 0.0
    assert line.bayes_label(0.0)[0] == 1


def test_sphere_distance():
    """Test the distance to a circle of radius 0.5."""
    dist = MarginDistribution(family="sphere", d=2, R=0.5)
    assert dist.delta([0.8, 0.0])[0] == pytest.approx(0.3)
    assert dist.bayes_label(np.array([[0.1, 0.0], [0.9, 0.0]])).tolist() == [-1, 1]


def test_rejects_points_outside_ball(line):
    """Test evaluations outside the unit ball are errors."""
    with pytest.raises(ValueError, match="outside the unit ball"):
        line.eta(1.5)


def test_rejects_zero_zeta():
    """Test a flat noise profile is not a valid family."""
    with pytest.raises(ValueError):
        MarginDistribution(zeta=0.0)


def test_sample_deterministic(plane):
    """Test a fixed seed reproduces the sample bit for bit."""
    a = plane.sample(500, seed=3)
    b = plane.sample(500, seed=3)
    assert np.array_equal(a.X, b.X)
    assert np.array_equal(a.y, b.y)
    assert np.all(np.linalg.norm(a.X, axis=1) <= 1.0)


def test_sample_symmetry(plane):
    """Test both labels are equally likely on the halfspace family."""
    n = 100_000
    data = plane.sample(n, seed=SEED)
    assert abs(np.mean(data.y == 1) - 0.5) <= 3 / (2 * np.sqrt(n))


def test_sample_calibration(line):
    """Test label frequencies match eta within three binomial standard errors per bin."""
    data = line.sample(200_000, seed=SEED)
    eta = line.eta(data.X)
    bins = np.digitize(eta, np.linspace(0.0, 1.0, 11)[1:-1])
    for b in np.unique(bins):
        mask = bins == b
        p = eta[mask].mean()
        freq = np.mean(data.y[mask] == 1)
        assert abs(freq - p) <= 3 * np.sqrt(p * (1 - p) / mask.sum()) + 1e-3


def test_delta_is_lipschitz():
    """Test the boundary distance is 1-Lipschitz on random pairs."""
    dist = MarginDistribution(family="sphere", d=3, R=0.4)
    rng = np.random.default_rng(SEED)
    X = dist.sample_inputs(10_000, rng)
    Y = dist.sample_inputs(10_000, rng)
    gap = np.abs(dist.delta(X) - dist.delta(Y))
    assert np.all(gap <= np.linalg.norm(X - Y, axis=1) + 1e-12)


def test_bayes_risk_line(line):
    """Test the Bayes risk of the affine line family."""
    assert line.bayes_risk() == pytest.approx(0.25)
    assert line.hinge_bayes_risk() == pytest.approx(0.5)


@pytest.mark.parametrize(("zeta", "tau"), [(1.0, 1.0), (2.0, 0.5), (0.5, 0.3)])
def test_bayes_risk_line_closed_form(zeta, tau):
    """Test the line family's Bayes risk is tau zeta / (2 (zeta + 1))."""
    dist = MarginDistribution(family="halfspace", d=1, zeta=zeta, tau=tau)
    assert dist.bayes_risk() == pytest.approx(0.5 * tau * zeta / (zeta + 1))


@pytest.mark.parametrize(
    "dist",
    [
        MarginDistribution(family="halfspace", d=2, zeta=1.0, tau=1.0),
        MarginDistribution(family="halfspace", d=3, zeta=2.0, tau=0.5),
        MarginDistribution(family="sphere", d=2, zeta=1.0, tau=0.3, R=0.5),
    ],
)
def test_bayes_risk_quadrature_matches_sampling(dist):
    """Test quadrature against a Monte Carlo average of min(eta, 1 - eta)."""
    X = dist.sample_inputs(N_MC, np.random.default_rng(SEED))
    eta = dist.eta(X)
    assert dist.bayes_risk() == pytest.approx(np.mean(np.minimum(eta, 1 - eta)), abs=2e-3)


def test_bayes_risk_limits():
    """Test the Bayes risk tends to 0 for sharp and to 1/2 for flat profiles."""
    assert MarginDistribution(d=1, tau=1e-4).bayes_risk() < 1e-4
    assert MarginDistribution(d=1, zeta=1e4).bayes_risk() > 0.499


def test_exponent_estimates_zeta_one(plane):
    """Test fitted exponents of the d=2 halfspace with zeta=1."""
    assert 0.9 <= estimate_ne(plane, N_MC, SEED) <= 1.1
    assert 1.85 <= estimate_mne(plane, N_MC, SEED) <= 2.15
    assert 0.9 <= estimate_me(plane, N_MC, SEED) <= 1.1


def test_exponent_estimates_zeta_two():
    """Test fitted exponents of a zeta=2 profile."""
    dist = MarginDistribution(family="halfspace", d=2, zeta=2.0, tau=1.0)
    assert estimate_ne(dist, N_MC, SEED) == pytest.approx(0.5, abs=0.1)
    assert estimate_mne(dist, N_MC, SEED) == pytest.approx(3.0, abs=0.2)


@pytest.mark.parametrize("zeta", [0.5, 1.0, 2.0])
def test_noise_exponent_relation(zeta):
    """Test q is close to alpha / zeta."""
    dist = MarginDistribution(family="halfspace", d=2, zeta=zeta, tau=1.0)
    assert abs(estimate_ne(dist, N_MC, SEED) - estimate_me(dist, N_MC, SEED) / zeta) <= 0.15


def test_estimators_reject_small_budgets(plane):
    """Test fewer than 10^4 Monte Carlo inputs are rejected."""
    with pytest.raises(ValueError, match="n_mc"):
        estimate_ne(plane, 9_999, SEED)


def test_lower_control_holds_at_own_exponent(plane):
    """Test lower control at zeta=1 with constant at most one."""
    lc = check_lc(plane, 100_000, SEED)
    assert lc.holds
    assert lc.constant <= 1 + 1e-9


def test_lower_control_fails_below_exponent(plane):
    """Test lower control fails at an exponent below the profile's."""
    assert not check_lc(plane, 100_000, SEED, zeta=0.5).holds


def test_reverse_holder_affine(line):
    """Test the affine posterior has reverse Hoelder constant 1/2 and lower control."""
    check = reverse_holder_check(line, 10_000, SEED)
    assert check.holds
    assert check.constant == pytest.approx(0.5)
    assert check.lc is not None and check.lc.holds


def test_reverse_holder_rejects_sphere():
    """Test only the d=1 halfspace family is supported."""
    with pytest.raises(ValueError, match="supports"):
        reverse_holder_check(MarginDistribution(family="sphere", d=1), 1_000, SEED)


def test_exponent_sheet():
    """Test declared exponents and their consistency checks."""
    sheet = MarginDistribution(zeta=0.5).exponents()
    assert (sheet.beta, sheet.q, sheet.alpha, sheet.rho) == (1.5, 2.0, 1.0, 0.5)
    assert MarginDistribution(zeta=2.0).exponents().rho is None
    with pytest.raises(ValueError):
        ExponentSheet(beta=3.0, q=1.0, zeta=1.0, alpha=1.0)


def test_boundary_range_on_line(line):
    """Test the signed boundary range of interval cells."""
    p = Partition(1, 0.5, np.array([[-0.75], [-0.25], [0.25], [0.75]]))
    assert line.boundary_range(p, 1) == (-0.5, 0.0)
    assert line.boundary_range(p, 3) == (0.5, 1.0)


def test_text_round_trip(tmp_path):
    """Test a distribution reloads from its key=value file."""
    dist = MarginDistribution(family="sphere", d=3, zeta=0.7, tau=0.4, R=0.3, seed=5)
    path = tmp_path / "dist.txt"
    dist.save(path)
    assert MarginDistribution.load(path) == dist


def test_margin_curves_and_report(plane):
    """Test the curve table covers the ladder and the report lists four exponents."""
    curves = margin_curves(plane, 20_000, SEED)
    assert list(curves.columns) == ["t", "ne", "mne", "me"]
    assert np.all(np.diff(curves["me"]) <= 0)
    report = margin_report(plane, 20_000, SEED)
    assert report["exponent"].tolist() == ["q (NE)", "beta (MNE)", "alpha (ME)", "zeta (LC)"]
