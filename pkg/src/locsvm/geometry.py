"""Voronoi partitions of the unit ball built from r-nets."""

from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Protocol, runtime_checkable

import numpy as np
import pandas as pd
from scipy.optimize import minimize
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from scipy.stats import qmc

from locsvm.dataset import as_points, check_in_ball
from locsvm.printer import print_warning

MIN_POOL_LOG2 = 11
MAX_POOL_LOG2 = 17
POOL_DENSITY = 256  # candidates per (r/2)^d volume unit
STRADDLE_TOLERANCE = 1e-9
FEASIBILITY_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class Partition:
    dim: int
    radius: float
    centers: np.ndarray  # (m, dim)

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim != 2 or centers.shape[1] != self.dim or centers.shape[0] == 0:
            raise ValueError(
                f"centers must have shape (m, {self.dim}) with m >= 1, got {centers.shape}"
            )
        if not 0 < self.radius <= 2:
            raise ValueError(f"radius must lie in (0, 2], got {self.radius}")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)

    @property
    def m(self) -> int:
        return self.centers.shape[0]

    def assign(self, X: np.ndarray) -> np.ndarray:
        """Voronoi cell index of every row of `X`, ties to the lowest index."""
        X = as_points(X, self.dim)
        check_in_ball(X)
        if X.shape[0] == 0:
            return np.empty(0, dtype=np.int64)
        # argmin returns the first minimum, which is the tie rule
        return np.argmin(cdist(X, self.centers, "sqeuclidean"), axis=1)

    def to_text(self) -> str:
        lines = [f"{self.dim} {self.radius:.17g} {self.m}"]
        lines.extend(" ".join(f"{v:.17g}" for v in z) for z in self.centers)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_lines(cls, lines: list[str]) -> tuple["Partition", list[str]]:
        """Parse a partition block and return it with the unconsumed lines."""
        header = lines[0].split()
        if len(header) != 3:
            raise ValueError(f"bad partition header {lines[0]!r}, expected 'd r m'")
        dim, radius, m = int(header[0]), float(header[1]), int(header[2])
        if len(lines) < m + 1:
            raise ValueError(f"partition declares {m} centers but has {len(lines) - 1}")
        centers = np.array([[float(v) for v in line.split()] for line in lines[1 : m + 1]])
        return cls(dim, radius, centers.reshape(m, dim)), lines[m + 1 :]

    @classmethod
    def from_text(cls, text: str) -> "Partition":
        partition, rest = cls.from_lines([ln for ln in text.splitlines() if ln.strip()])
        if rest:
            raise ValueError(f"unexpected trailing content after partition: {rest[0]!r}")
        return partition

    def save(self, path: Path) -> None:
        path.write_text(self.to_text())

    @classmethod
    def load(cls, path: Path) -> "Partition":
        return cls.from_text(path.read_text())


def ball_points(dim: int, log2_count: int, seed: int) -> np.ndarray:
    """Scrambled Sobol points of [-1, 1]^d folded into the closed unit ball.

    Points outside the ball are projected radially onto the sphere, which keeps
    the boundary of the ball densely sampled.
    """
    sobol = qmc.Sobol(dim, scramble=True, seed=seed)
    pts = 2.0 * sobol.random_base2(log2_count) - 1.0
    norms = np.linalg.norm(pts, axis=1)
    outside = norms > 1.0
    pts[outside] /= norms[outside, None]
    return pts


def _pool_log2(dim: int, r: float) -> int:
    target = POOL_DENSITY * (2.0 / r) ** dim
    return int(np.clip(np.ceil(np.log2(target)), MIN_POOL_LOG2, MAX_POOL_LOG2))


def _farthest_point_insertion(
    pool: np.ndarray, centers: list[np.ndarray], threshold: float
) -> list[np.ndarray]:
    dist = np.full(pool.shape[0], np.inf)
    for z in centers:
        dist = np.minimum(dist, np.linalg.norm(pool - z, axis=1))
    while True:
        idx = int(np.argmax(dist))
        if dist[idx] <= threshold:
            return centers
        z = pool[idx].copy()
        centers.append(z)
        dist = np.minimum(dist, np.linalg.norm(pool - z, axis=1))


def build_rnet(d: int, r: float, seed: int) -> Partition:
    """Greedy farthest-point r-net of the unit ball, seeded at the origin.

    The main pass covers a quasi-random candidate pool at radius r/2, so picks
    are at least r/2 apart. A repair pass on an independent pool adds every
    point farther than r from all centers; such points keep the separation.
    """
    if d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    if not 0 < r <= 2:
        raise ValueError(f"radius must lie in (0, 2], got {r}")
    log2_count = _pool_log2(d, r)
    if log2_count == MAX_POOL_LOG2:
        print_warning(f"candidate pool capped at 2^{MAX_POOL_LOG2} points for d={d}, r={r}")
    centers = _farthest_point_insertion(
        ball_points(d, log2_count, seed), [np.zeros(d)], r / 2
    )
    centers = _farthest_point_insertion(ball_points(d, log2_count, seed + 1), centers, r)
    return Partition(d, float(r), np.array(centers))


def assign_cell(p: Partition, x: np.ndarray | list[float] | float) -> int:
    """Cell index of a single point (0-based)."""
    return int(p.assign(as_points(x, p.dim))[0])


def partition_report(p: Partition, n_probe: int = 100_000, seed: int = 0) -> pd.DataFrame:
    """Check separation, covering and the size bound of a partition."""
    if p.m > 1:
        dists, _ = cKDTree(p.centers).query(p.centers, k=2)
        min_sep = float(dists[:, 1].min())
    else:
        min_sep = np.inf
    probes = ball_points(p.dim, int(np.ceil(np.log2(n_probe))), seed + 7919)
    cover, _ = cKDTree(p.centers).query(probes, k=1)
    size_bound = 16.0 * p.m ** (-1.0 / p.dim)
    return pd.DataFrame(
        {
            "check": ["separation", "covering", "size_bound"],
            "value": [min_sep, float(cover.max()), p.radius],
            "bound": [p.radius / 2, p.radius, size_bound],
            "passed": [min_sep >= p.radius / 2, cover.max() <= p.radius, p.radius <= size_bound],
        }
    )


def cell_interval(p: Partition, j: int) -> tuple[float, float]:
    """Closed interval [lo, hi] of cell j of a one-dimensional partition."""
    if p.dim != 1:
        raise ValueError("cell intervals exist only for d = 1")
    c = p.centers[:, 0]
    z = c[j]
    left = c[c < z]
    right = c[c > z]
    lo = (left.max() + z) / 2 if left.size else -1.0
    hi = (right.min() + z) / 2 if right.size else 1.0
    return float(lo), float(hi)


def _neighbor_halfspaces(p: Partition, j: int) -> tuple[np.ndarray, np.ndarray]:
    # cells lie inside B_r(z_j), so only centers within 2r can bound cell j
    z = p.centers[j]
    idx = [k for k in cKDTree(p.centers).query_ball_point(z, 2 * p.radius + 1e-12) if k != j]
    others = p.centers[idx]
    A = others - z
    b = (np.sum(others**2, axis=1) - z @ z) / 2
    return A, b


def _cell_optimize(p: Partition, j: int, fun, jac, starts: list[np.ndarray]) -> float:
    """Smallest feasible local minimum of `fun` over the closed cell j.

    The center is feasible, so the result never exceeds fun(z_j).
    """
    A, b = _neighbor_halfspaces(p, j)
    z = p.centers[j]
    r2 = p.radius**2

    def violation(x: np.ndarray) -> float:
        worst = max(x @ x - 1.0, (x - z) @ (x - z) - r2)
        return max(worst, float(np.max(A @ x - b))) if A.size else worst

    constraints = [
        {"type": "ineq", "fun": lambda x: 1.0 - x @ x, "jac": lambda x: -2.0 * x},
        {"type": "ineq", "fun": lambda x: r2 - (x - z) @ (x - z), "jac": lambda x: -2.0 * (x - z)},
    ]
    if A.size:
        constraints.append({"type": "ineq", "fun": lambda x: b - A @ x, "jac": lambda x: -A})
    best = float(fun(z))
    for x0 in starts:
        res = minimize(
            fun, x0, jac=jac, method="SLSQP", constraints=constraints,
            options={"ftol": 1e-12, "maxiter": 300},
        )
        if violation(res.x) <= FEASIBILITY_TOLERANCE:
            best = min(best, float(res.fun))
    return best


def cell_linear_range(p: Partition, j: int, u: np.ndarray) -> tuple[float, float]:
    """Minimum and maximum of <u, x> over the closed cell j."""
    u = np.asarray(u, dtype=float)
    if p.dim == 1:
        lo, hi = cell_interval(p, j)
        return tuple(sorted((u[0] * lo, u[0] * hi)))  # type: ignore[return-value]
    z = p.centers[j]
    low = _cell_optimize(p, j, lambda x: u @ x, lambda x: u, [z])
    high = -_cell_optimize(p, j, lambda x: -(u @ x), lambda x: -u, [z])
    return low, high


def cell_norm_range(p: Partition, j: int) -> tuple[float, float]:
    """Minimum and maximum Euclidean norm over the closed cell j.

    The maximum is a non-convex problem: it is the best of several local
    solutions started towards the sphere and along the axes, and never below
    the largest norm among a few probes of the cell.
    """
    if p.dim == 1:
        lo, hi = cell_interval(p, j)
        low = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
        return low, max(abs(lo), abs(hi))
    z = p.centers[j]
    low = np.sqrt(max(_cell_optimize(p, j, lambda x: x @ x, lambda x: 2.0 * x, [z]), 0.0))
    norm_z = float(np.linalg.norm(z))
    outward = z / norm_z if norm_z > 0 else np.eye(p.dim)[0]
    directions = [outward, *np.eye(p.dim), *(-np.eye(p.dim))]
    starts = [z + 0.9 * p.radius * u for u in directions]
    high_sq = -_cell_optimize(p, j, lambda x: -(x @ x), lambda x: -2.0 * x, starts)
    probed = float(np.linalg.norm(cell_probes(p, j, 64, 0), axis=1).max())
    return float(low), float(max(np.sqrt(max(high_sq, 0.0)), probed))


def cell_probes(p: Partition, j: int, budget: int, seed: int) -> np.ndarray:
    """Quasi-random points of cell j (the center is always included)."""
    sobol = qmc.Sobol(p.dim, scramble=True, seed=seed + j)
    u = 2.0 * sobol.random_base2(int(np.ceil(np.log2(max(budget, 2))))) - 1.0
    cand = p.centers[j] + p.radius * u
    cand = cand[np.linalg.norm(cand, axis=1) <= 1.0]
    inside = cand[p.assign(cand) == j] if cand.size else cand
    return np.vstack([p.centers[j][None, :], inside])


@runtime_checkable
class LabelField(Protocol):
    """Anything exposing the posterior and the distance to the decision boundary."""

    def eta(self, X: np.ndarray) -> np.ndarray: ...

    def delta(self, X: np.ndarray) -> np.ndarray: ...


@runtime_checkable
class BoundaryRange(Protocol):
    """A label field that can bound its signed boundary function over a cell.

    `boundary_range` returns (g_min, g_max) of a function g with |g| = Δ_η,
    positive on X₁ and negative on X₋₁.
    """

    def boundary_range(self, p: Partition, j: int) -> tuple[float, float]: ...


@dataclass(frozen=True)
class CellClassification:
    near: frozenset[int]
    far: frozenset[int]
    n1: frozenset[int]
    n2: frozenset[int]
    separation: float
    mode: Literal["exact", "probe"]

    def __post_init__(self):
        if self.n1 | self.n2 != self.near or self.n1 & self.n2:
            raise ValueError("n1 and n2 must partition the near cells")


def classify_cells(
    p: Partition, dist: LabelField, s: float, probe_budget: int = 256, seed: int = 0
) -> CellClassification:
    """Split cells into near (sup Δ ≤ 3s) and far (inf Δ ≥ s) index sets."""
    if s < p.radius:
        raise ValueError(f"separation s={s} must be at least the radius r={p.radius}")
    if probe_budget < 1:
        raise ValueError(f"probe_budget must be positive, got {probe_budget}")
    near, far, n1 = set(), set(), set()
    exact = isinstance(dist, BoundaryRange)
    if not exact:
        print_warning("distribution has no closed-form cell extrema, probing cells")
    for j in range(p.m):
        if exact:
            g_min, g_max = dist.boundary_range(p, j)
            touches = g_min <= STRADDLE_TOLERANCE and g_max >= -STRADDLE_TOLERANCE
            inf_delta = 0.0 if touches else min(abs(g_min), abs(g_max))
            sup_delta = max(abs(g_min), abs(g_max))
            straddles = touches
        else:
            probes = cell_probes(p, j, probe_budget, seed)
            delta = dist.delta(probes)
            eta = dist.eta(probes)
            inf_delta, sup_delta = float(delta.min()), float(delta.max())
            straddles = bool(np.any(eta > 0.5) and np.any(eta < 0.5))
        if sup_delta <= 3 * s:
            near.add(j)
            if straddles:
                n1.add(j)
        if inf_delta >= s:
            far.add(j)
    return CellClassification(
        near=frozenset(near),
        far=frozenset(far),
        n1=frozenset(n1),
        n2=frozenset(near - n1),
        separation=float(s),
        mode="exact" if exact else "probe",
    )
