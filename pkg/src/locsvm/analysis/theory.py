"""Learning-rate exponents of the localized SVM and of competing classifiers."""

from dataclasses import asdict, dataclass
from typing import Literal

import pandas as pd

Regime = Literal["large-beta", "small-beta"]


def _check(beta: float, q: float, d: int, zeta: float) -> None:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if q < 0:
        raise ValueError(f"q must be non-negative, got {q}")
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    if zeta < 0:
        raise ValueError(f"zeta must be non-negative, got {zeta}")


def kappa(beta: float, q: float, d: int) -> float:
    return (q + 1) / (beta * (q + 2) + d * (q + 1))


def regime_threshold(q: float, d: int, zeta: float) -> float:
    return (q + 1) * (1 + max(d, zeta) - d)


def optimal_nu(beta: float, q: float, d: int, zeta: float) -> float:
    """Cell-size exponent (r_n = n^-nu) that maximises the localized rate."""
    _check(beta, q, d, zeta)
    k = kappa(beta, q, d)
    if beta >= regime_threshold(q, d, zeta):
        return k / (1 - k)
    return (1 - beta * k) / (beta * k + max(d, zeta))


def localized_exponent(beta: float, q: float, d: int, zeta: float, nu: float) -> float:
    """beta kappa (nu + 1) for cell sizes r_n = n^-nu up to the optimal nu."""
    _check(beta, q, d, zeta)
    best = optimal_nu(beta, q, d, zeta)
    if not 0 <= nu <= best * (1 + 1e-12):
        raise ValueError(f"nu={nu} outside [0, {best:.6g}]; use suboptimal_exponent beyond it")
    return beta * kappa(beta, q, d) * (nu + 1)


def suboptimal_exponent(beta: float, q: float, d: int, zeta: float, nu: float) -> float:
    """1 - nu max{d, zeta} for cells shrinking faster than the optimal choice.

    Only known in the small-beta regime and for nu in [optimal nu, kappa / (1 - kappa)].
    """
    _check(beta, q, d, zeta)
    best = optimal_nu(beta, q, d, zeta)
    if nu < best * (1 - 1e-12):
        raise ValueError(f"nu={nu} below the optimal {best:.6g}; use localized_exponent")
    if beta >= regime_threshold(q, d, zeta):
        raise ValueError(
            f"no rate known for nu={nu} above the optimal {best:.6g} in the large-beta regime "
            f"(beta={beta} >= {regime_threshold(q, d, zeta):.6g})"
        )
    k = kappa(beta, q, d)
    upper = k / (1 - k)
    if nu > upper * (1 + 1e-12):
        raise ValueError(f"no rate known for nu={nu} above kappa/(1-kappa)={upper:.6g}")
    return 1 - nu * max(d, zeta)


def rate_exponent(beta: float, q: float, d: int, zeta: float, nu: float) -> float:
    """Exponent for nu >= 0: localized up to the optimum, suboptimal beyond it where known.

    Raises ValueError for nu values no rate is known for.
    """
    if nu <= optimal_nu(beta, q, d, zeta):
        return localized_exponent(beta, q, d, zeta, nu)
    return suboptimal_exponent(beta, q, d, zeta, nu)


@dataclass(frozen=True)
class TheoryExponents:
    beta: float
    q: float
    d: int
    zeta: float
    kappa: float
    threshold: float
    regime: Regime
    nu: float
    localized: float  # beta kappa (nu + 1)
    localized_closed_form: float
    global_svm: float
    plug_in: float | None  # rho = beta / (q + 1) when at most 1
    kohler_krzyzak: float | None
    nearest_neighbor: float | None
    kohler_krzyzak_bounded_density: float | None
    histogram: float
    histogram_valid: bool
    histogram_nu_lower: float

    def to_frame(self) -> pd.DataFrame:
        """One row per exponent, as written by the theory command."""
        rows = [
            ("kappa", self.kappa),
            ("nu", self.nu),
            ("localized", self.localized),
            ("localized_closed_form", self.localized_closed_form),
            ("global_svm", self.global_svm),
            ("plug_in", self.plug_in),
            ("kohler_krzyzak", self.kohler_krzyzak),
            ("nearest_neighbor", self.nearest_neighbor),
            ("kohler_krzyzak_bounded_density", self.kohler_krzyzak_bounded_density),
            ("histogram", self.histogram),
            ("histogram_nu_lower", self.histogram_nu_lower),
        ]
        df = pd.DataFrame(rows, columns=["quantity", "value"])
        df["regime"] = self.regime
        df["histogram_valid"] = self.histogram_valid
        return df

    def as_dict(self) -> dict:
        return asdict(self)


def theory_exponents(beta: float, q: float, d: int, zeta: float) -> TheoryExponents:
    _check(beta, q, d, zeta)
    k = kappa(beta, q, d)
    threshold = regime_threshold(q, d, zeta)
    big_m = max(d, zeta)
    nu = optimal_nu(beta, q, d, zeta)
    if beta >= threshold:
        regime: Regime = "large-beta"
        closed = beta * (q + 1) / (beta * (q + 2) + (d - 1) * (q + 1))
    else:
        regime = "small-beta"
        closed = beta * k * (1 + big_m) / (beta * k + big_m)

    rho = beta / (q + 1)
    smooth = rho <= 1
    return TheoryExponents(
        beta=beta,
        q=q,
        d=d,
        zeta=zeta,
        kappa=k,
        threshold=threshold,
        regime=regime,
        nu=nu,
        localized=beta * k * (nu + 1),
        localized_closed_form=closed,
        global_svm=beta * k,
        plug_in=rho * (q + 1) / (rho * (q + 2) + d) if smooth else None,
        kohler_krzyzak=rho * (q + 1) / (rho * (q + 3) + d) if smooth else None,
        nearest_neighbor=rho * q / (rho * (q + 2) + d) if smooth else None,
        kohler_krzyzak_bounded_density=rho * (q + 1) / (2 * rho + d) if smooth else None,
        histogram=beta * (q + 1) / (beta * (q + 1) + d * (q + 1) + beta * zeta / (1 + zeta)),
        histogram_valid=beta <= (1 + zeta) * (q + 1),
        histogram_nu_lower=beta / ((beta + d) * (q + 1) * (zeta + 1) + beta * zeta),
    )
