"""Gaussian kernels, the smoothing convolution and incomplete-gamma tail bounds.

The convolution utilities only serve the approximation-error checks; training
never calls them.
"""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gamma as gamma_fn
from scipy.special import gammainc, gammaincc

MIN_QUAD_BUDGET = 100


def _check_gamma(gamma: float) -> None:
    if not gamma > 0:
        raise ValueError(f"kernel width gamma must be positive, got {gamma}")


@dataclass(frozen=True)
class KernelParams:
    gamma: float

    def __post_init__(self):
        _check_gamma(self.gamma)

    def matrix(self, X: np.ndarray) -> np.ndarray:
        return np.exp(-cdist(X, X, "sqeuclidean") / self.gamma**2)

    def cross(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        return np.exp(-cdist(A, B, "sqeuclidean") / self.gamma**2)


def gaussian_eval(
    x: np.ndarray | list[float] | float, x_prime: np.ndarray | list[float] | float, gamma: float
) -> float:
    """exp(-||x - x'||^2 / gamma^2)."""
    _check_gamma(gamma)
    diff = np.atleast_1d(np.asarray(x, dtype=float)) - np.atleast_1d(np.asarray(x_prime, dtype=float))
    return float(np.exp(-(diff @ diff) / gamma**2))


def kernel_matrix(points: np.ndarray, gamma: float) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.shape[0] == 0:
        raise ValueError("kernel_matrix needs at least one point")
    return KernelParams(gamma).matrix(points)


def cross_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    return KernelParams(gamma).cross(np.asarray(A, dtype=float), np.asarray(B, dtype=float))


@dataclass(frozen=True)
class ConvolutionEstimate:
    value: float
    stderr: float


def smooth_convolve(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray | list[float],
    gamma: float,
    quad_budget: int = 10_000,
    seed: int = 0,
) -> ConvolutionEstimate:
    """Importance-sampling estimate of (K_gamma * f)(x).

    The smoothing kernel is a multiple of the N(x, gamma^2/4 I) density, so
    (K_gamma * f)(x) = (pi gamma^2)^(d/4) E[f(Y)] with Y drawn from that normal.
    `f` must accept a (k, d) array and return k values.
    """
    _check_gamma(gamma)
    if quad_budget < MIN_QUAD_BUDGET:
        raise ValueError(f"quad_budget must be at least {MIN_QUAD_BUDGET}, got {quad_budget}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.shape[0]
    rng = np.random.default_rng(seed)
    Y = x + (gamma / 2.0) * rng.standard_normal((quad_budget, d))
    w = (np.pi * gamma**2) ** (d / 4.0) * np.asarray(f(Y), dtype=float)
    return ConvolutionEstimate(float(w.mean()), float(w.std(ddof=1) / np.sqrt(quad_budget)))


def plateau(
    d: int,
    gamma: float,
    center: np.ndarray | list[float],
    radius: float,
    sign: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Callable[[np.ndarray], np.ndarray]:
    """(pi gamma^2)^(-d/4) times the indicator of B_radius(center), optionally signed.

    With `sign=None` this is the flat plateau; passing the sign of the Bayes
    decision function gives the straddling and one-sided approximants.
    """
    _check_gamma(gamma)
    if not radius > 0:
        raise ValueError(f"plateau radius must be positive, got {radius}")
    center = np.atleast_1d(np.asarray(center, dtype=float))
    height = (np.pi * gamma**2) ** (-d / 4.0)

    def f(Y: np.ndarray) -> np.ndarray:
        inside = np.linalg.norm(Y - center, axis=1) <= radius
        values = height * inside.astype(float)
        if sign is not None:
            values *= sign(Y)
        return values

    return f


def gauss_ball_mass(d: int, rho: float, gamma: float) -> float:
    """Mass the smoothing Gaussian puts on a ball of radius rho around its mean."""
    if d < 1 or not rho > 0 or not gamma > 0:
        raise ValueError(f"gauss_ball_mass needs d >= 1, rho > 0, gamma > 0; got {d}, {rho}, {gamma}")
    return float(gammainc(d / 2.0, 2.0 * rho**2 / gamma**2))


def gauss_ball_mass_mc(
    d: int, rho: float, gamma: float, n_samples: int, seed: int = 0
) -> ConvolutionEstimate:
    """Monte Carlo counterpart of `gauss_ball_mass`."""
    if d < 1 or not rho > 0 or not gamma > 0:
        raise ValueError(f"gauss_ball_mass needs d >= 1, rho > 0, gamma > 0; got {d}, {rho}, {gamma}")
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = 1_000_000
    remaining = n_samples
    while remaining > 0:
        k = min(chunk, remaining)
        Z = (gamma / 2.0) * rng.standard_normal((k, d))
        hits += int(np.count_nonzero(np.einsum("ij,ij->i", Z, Z) <= rho**2))
        remaining -= k
    p = hits / n_samples
    return ConvolutionEstimate(p, float(np.sqrt(max(p * (1 - p), 1e-300) / n_samples)))


def straddle_tail_bound(d: int, delta: float, gamma: float) -> float:
    """Bound on |K_gamma * f - f*| at distance `delta` from the boundary in a straddling cell."""
    _check_gamma(gamma)
    return float(2.0 * gammaincc(d / 2.0, 2.0 * delta**2 / gamma**2))


def one_sided_tail_bound(d: int, omega: float, gamma: float) -> float:
    """Bound on |K_gamma * f - f*| when f* is constant on a ball of radius `omega` around x."""
    _check_gamma(gamma)
    return float(gammaincc(d / 2.0, 2.0 * omega**2 / gamma**2))


def unit_ball_volume(d: int) -> float:
    return float(np.pi ** (d / 2.0) / gamma_fn(d / 2.0 + 1.0))


def plateau_norm_bound(d: int, rho: float, gamma: float) -> float:
    """Upper bound on the RKHS norm squared of K_gamma * f^rho_gamma."""
    _check_gamma(gamma)
    return float((rho**2 / (np.pi * gamma**2)) ** (d / 2.0) * unit_ball_volume(d))
