"""Synthetic distributions with known posterior, boundary distance and margin exponents.

Both families draw x uniformly from the unit ball and set

    eta(x) = 1/2 (1 + sign(g(x)) min(1, (|g(x)| / tau)^zeta))

with g(x) = x_1 (halfspace) or ||x|| - R (sphere), so the distance to the
decision boundary is |g(x)|.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import quad
from scipy.special import gammaln
from scipy.stats import linregress

from locsvm.dataset import Dataset, as_points, check_in_ball
from locsvm.geometry import Partition, cell_linear_range, cell_norm_range

Family = Literal["halfspace", "sphere"]

MIN_MC_SAMPLES = 10_000
LADDER = 2.0 ** -np.arange(1, 7)
INNER_BAND = LADDER[-1]
LC_RATIO_SLACK = 1e-6


class ExponentSheet(BaseModel):
    """Margin exponents a family satisfies by construction."""

    model_config = ConfigDict(frozen=True)

    beta: float  # margin-noise exponent
    q: float  # noise exponent
    zeta: float  # lower control exponent
    alpha: float  # margin exponent
    rho: float | None = None  # Hoelder exponent of eta, when zeta <= 1

    @model_validator(mode="after")
    def _consistent(self) -> "ExponentSheet":
        if abs(self.beta - (self.zeta + self.alpha)) > 1e-12:
            raise ValueError(f"beta={self.beta} must equal zeta + alpha = {self.zeta + self.alpha}")
        if abs(self.q - self.alpha / self.zeta) > 1e-12:
            raise ValueError(f"q={self.q} must equal alpha / zeta = {self.alpha / self.zeta}")
        if self.rho is not None and self.rho * self.q > 1 + 1e-12:
            raise ValueError(f"rho * q = {self.rho * self.q} exceeds 1")
        return self


class MarginDistribution(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Family = "halfspace"
    d: int = Field(default=1, ge=1)
    zeta: float = Field(default=1.0, gt=0)
    tau: float = Field(default=1.0, gt=0, le=1)
    R: float = Field(default=0.5, gt=0, lt=1)
    seed: int = 0

    def signed_boundary(self, X: np.ndarray) -> np.ndarray:
        X = as_points(X, self.d)
        check_in_ball(X)
        if self.family == "halfspace":
            return X[:, 0].copy()
        return np.linalg.norm(X, axis=1) - self.R

    def delta(self, X: np.ndarray) -> np.ndarray:
        return np.abs(self.signed_boundary(X))

    def noise(self, X: np.ndarray) -> np.ndarray:
        """|2 eta - 1| in closed form."""
        return np.minimum(1.0, (self.delta(X) / self.tau) ** self.zeta)

    def eta(self, X: np.ndarray) -> np.ndarray:
        side = np.where(self.signed_boundary(X) > 0, 1.0, -1.0)
        return 0.5 * (1.0 + side * self.noise(X))

    def bayes_label(self, X: np.ndarray) -> np.ndarray:
        return np.where(self.eta(X) >= 0.5, 1, -1)

    def boundary_range(self, p: Partition, j: int) -> tuple[float, float]:
        if self.family == "halfspace":
            return cell_linear_range(p, j, np.eye(self.d)[0])
        low, high = cell_norm_range(p, j)
        return low - self.R, high - self.R

    def sample_inputs(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform points of the unit ball."""
        Z = rng.standard_normal((n, self.d))
        Z /= np.linalg.norm(Z, axis=1, keepdims=True)
        return Z * rng.random(n)[:, None] ** (1.0 / self.d)

    def sample(self, n: int, seed: int | None = None) -> Dataset:
        if n < 1:
            raise ValueError(f"sample size must be positive, got {n}")
        rng = np.random.default_rng(self.seed if seed is None else seed)
        X = self.sample_inputs(n, rng)
        y = np.where(rng.random(n) < self.eta(X), 1, -1)
        return Dataset(X, y)

    def exponents(self) -> ExponentSheet:
        alpha = 1.0
        return ExponentSheet(
            beta=self.zeta + alpha,
            q=alpha / self.zeta,
            zeta=self.zeta,
            alpha=alpha,
            rho=self.zeta if self.zeta <= 1 else None,
        )

    def _mean_noise(self) -> float:
        if self.family == "halfspace" and self.d == 1:
            return 1.0 - self.tau + self.tau / (self.zeta + 1.0)

        def profile(t: float) -> float:
            return min(1.0, (abs(t) / self.tau) ** self.zeta)

        if self.family == "halfspace":
            # density of |x_1| for the uniform ball
            log_c = np.log(2.0) + gammaln(self.d / 2 + 1) - 0.5 * np.log(np.pi) - gammaln((self.d + 1) / 2)
            c = float(np.exp(log_c))
            breaks = [self.tau] if self.tau < 1 else None
            value, _ = quad(lambda t: profile(t) * c * (1 - t * t) ** ((self.d - 1) / 2), 0.0, 1.0,
                            points=breaks, epsabs=1e-10, limit=200)
            return float(value)
        breaks = [b for b in (self.R - self.tau, self.R, self.R + self.tau) if 0 < b < 1]
        value, _ = quad(lambda s: profile(s - self.R) * self.d * s ** (self.d - 1), 0.0, 1.0,
                        points=breaks, epsabs=1e-10, limit=200)
        return float(value)

    def bayes_risk(self) -> float:
        """E[min(eta, 1 - eta)]."""
        return 0.5 * (1.0 - self._mean_noise())

    def hinge_bayes_risk(self) -> float:
        """Hinge risk of the Bayes decision function, E[1 - |2 eta - 1|]."""
        return 1.0 - self._mean_noise()

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.model_dump().items())

    @classmethod
    def from_text(cls, text: str) -> "MarginDistribution":
        values: dict[str, str] = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"expected key=value, got {raw!r}")
            values[key.strip()] = value.strip()
        return cls.model_validate(values)

    def save(self, path: Path) -> None:
        path.write_text(self.to_text())

    @classmethod
    def load(cls, path: Path) -> "MarginDistribution":
        return cls.from_text(path.read_text())


def _mc_inputs(dist: MarginDistribution, n_mc: int, seed: int) -> np.ndarray:
    if n_mc < MIN_MC_SAMPLES:
        raise ValueError(f"n_mc must be at least {MIN_MC_SAMPLES}, got {n_mc}")
    return dist.sample_inputs(n_mc, np.random.default_rng(seed))


def _ladder_slope(values: np.ndarray) -> float:
    positive = values > 0
    if positive.sum() < 2:
        raise ValueError("too few non-empty ladder bands to fit a slope; raise n_mc")
    return float(linregress(np.log(LADDER[positive]), np.log(values[positive])).slope)


def margin_curves(dist: MarginDistribution, n_mc: int, seed: int) -> pd.DataFrame:
    """Empirical left-hand sides of the NE, MNE and ME conditions over the ladder."""
    X = _mc_inputs(dist, n_mc, seed)
    delta, noise = dist.delta(X), dist.noise(X)
    return pd.DataFrame(
        {
            "t": LADDER,
            "ne": [np.mean(noise < eps) for eps in LADDER],
            "mne": [np.mean(noise * (delta < t)) for t in LADDER],
            "me": [np.mean(delta < t) for t in LADDER],
        }
    )


def estimate_ne(dist: MarginDistribution, n_mc: int, seed: int) -> float:
    """Slope of log P(|2 eta - 1| < eps) against log eps."""
    return _ladder_slope(margin_curves(dist, n_mc, seed)["ne"].to_numpy())


def estimate_mne(dist: MarginDistribution, n_mc: int, seed: int) -> float:
    """Slope of log E[|2 eta - 1| 1{Delta < t}] against log t."""
    return _ladder_slope(margin_curves(dist, n_mc, seed)["mne"].to_numpy())


def estimate_me(dist: MarginDistribution, n_mc: int, seed: int) -> float:
    """Slope of log P(Delta < t) against log t."""
    return _ladder_slope(margin_curves(dist, n_mc, seed)["me"].to_numpy())


@dataclass(frozen=True)
class LcCheck:
    holds: bool
    constant: float  # smallest c with Delta^zeta <= c |2 eta - 1| on the sample


def _band_rule(ratios: np.ndarray, inner: np.ndarray, worst: str) -> bool:
    if not inner.any() or inner.all():
        return True
    if worst == "max":
        return float(ratios[inner].max()) <= float(ratios[~inner].max()) * (1 + LC_RATIO_SLACK)
    return float(ratios[inner].min()) >= float(ratios[~inner].min()) * (1 - LC_RATIO_SLACK)


def check_lc(dist: MarginDistribution, n_mc: int, seed: int, zeta: float | None = None) -> LcCheck:
    """Lower control at exponent `zeta` (the family's own by default).

    Holds when the worst ratio Delta^zeta / |2 eta - 1| is finite and does not
    grow inside the innermost band {Delta < 2^-6}.
    """
    zeta = dist.zeta if zeta is None else zeta
    if not zeta > 0:
        raise ValueError(f"zeta must be positive, got {zeta}")
    X = _mc_inputs(dist, n_mc, seed)
    delta, noise = dist.delta(X), dist.noise(X)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(delta > 0, delta**zeta / noise, 0.0)
    constant = float(ratios.max())
    holds = bool(np.isfinite(constant) and _band_rule(ratios, delta < INNER_BAND, "max"))
    return LcCheck(holds, constant)


@dataclass(frozen=True)
class ReverseHolderCheck:
    holds: bool
    constant: float  # smallest c with |eta(x) - eta(x')| >= c |x - x'|^zeta on the pairs
    lc: LcCheck | None = None


def reverse_holder_check(dist: MarginDistribution, n_pairs: int, seed: int) -> ReverseHolderCheck:
    """Reverse Hoelder continuity of eta on sampled pairs, and the lower control it implies."""
    if dist.family != "halfspace" or dist.d != 1 or dist.tau != 1 or dist.zeta > 1:
        raise ValueError("reverse Hoelder check supports the d=1 halfspace family with tau=1, zeta<=1")
    if n_pairs < 2:
        raise ValueError(f"n_pairs must be at least 2, got {n_pairs}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, n_pairs)
    far = rng.uniform(-1.0, 1.0, n_pairs)
    # half the pairs sit at small dyadic separations
    h = 2.0 ** -rng.integers(1, 11, n_pairs) * rng.choice([-1.0, 1.0], n_pairs)
    near = np.where(np.abs(x + h) <= 1.0, x + h, x - h)
    x_prime = np.where(np.arange(n_pairs) % 2 == 0, near, far)
    sep = np.abs(x - x_prime)
    keep = sep > 0
    diff = np.abs(dist.eta(x[keep]) - dist.eta(x_prime[keep]))
    ratios = diff / sep[keep] ** dist.zeta
    constant = float(ratios.min())
    holds = bool(constant > 0 and _band_rule(ratios, sep[keep] < INNER_BAND, "min"))
    if not holds:
        return ReverseHolderCheck(holds, constant)
    lc = check_lc(dist, max(MIN_MC_SAMPLES, n_pairs), seed + 1)
    if not lc.holds or lc.constant > 1.0 / (2.0 * constant) * (1 + LC_RATIO_SLACK):
        raise RuntimeError(
            f"reverse Hoelder constant {constant:.6g} does not yield lower control "
            f"(found c_LC={lc.constant:.6g})"
        )
    return ReverseHolderCheck(holds, constant, lc)


def margin_report(dist: MarginDistribution, n_mc: int, seed: int) -> pd.DataFrame:
    """Declared against estimated exponents for one distribution."""
    sheet = dist.exponents()
    curves = margin_curves(dist, n_mc, seed)
    lc = check_lc(dist, n_mc, seed)
    return pd.DataFrame(
        {
            "exponent": ["q (NE)", "beta (MNE)", "alpha (ME)", "zeta (LC)"],
            "declared": [sheet.q, sheet.beta, sheet.alpha, sheet.zeta],
            "estimated": [
                _ladder_slope(curves["ne"].to_numpy()),
                _ladder_slope(curves["mne"].to_numpy()),
                _ladder_slope(curves["me"].to_numpy()),
                lc.constant,
            ],
            "note": ["slope", "slope", "slope", f"c_LC, holds={lc.holds}"],
        }
    )
