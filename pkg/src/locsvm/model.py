"""The localized SVM: one independently trained cell model per Voronoi cell."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from locsvm.dataset import Dataset, as_points, check_in_ball
from locsvm.env import LOCSVM_WORKERS
from locsvm.geometry import Partition
from locsvm.printer import print_warning
from locsvm.solver import (
    DEFAULT_EPS_KKT,
    DEFAULT_MAX_SWEEPS,
    CellModel,
    CellProblem,
    clip,
    sign,
    train_cell,
)


def per_cell(values: float | np.ndarray | list[float], m: int, name: str) -> np.ndarray:
    """Broadcast a scalar to m cells or check a vector has one entry per cell."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(m, float(arr))
    if arr.shape != (m,):
        raise ValueError(f"{name} must have one entry per cell ({m}), got shape {arr.shape}")
    if not np.all(arr > 0):
        raise ValueError(f"{name} must be positive in every cell")
    return arr


@dataclass(frozen=True, eq=False)
class LocalizedModel:
    partition: Partition
    cells: tuple[CellModel, ...]

    def __post_init__(self):
        if len(self.cells) != self.partition.m:
            raise ValueError(f"expected {self.partition.m} cell models, got {len(self.cells)}")
        for j, cell in enumerate(self.cells):
            if cell.gamma > self.partition.radius:
                raise ValueError(
                    f"cell {j}: gamma={cell.gamma} exceeds the cell radius r={self.partition.radius}"
                )

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([c.lam for c in self.cells])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([c.gamma for c in self.cells])

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        """Raw predictions for a batch of points in the unit ball."""
        X = as_points(X, self.partition.dim)
        check_in_ball(X)
        cells = self.partition.assign(X)
        out = np.zeros(X.shape[0])
        for j in np.unique(cells):
            mask = cells == j
            out[mask] = self.cells[j].decision_values(X[mask])
        return out

    def to_text(self) -> str:
        return self.partition.to_text() + "".join(c.to_block(j) for j, c in enumerate(self.cells))

    @classmethod
    def from_text(cls, text: str) -> "LocalizedModel":
        partition, lines = Partition.from_lines([ln for ln in text.splitlines() if ln.strip()])
        cells: list[CellModel] = []
        while lines:
            j, cell, lines = CellModel.from_lines(lines, partition.dim)
            if j != len(cells):
                raise ValueError(f"cell blocks out of order: expected cell {len(cells)}, got {j}")
            cells.append(cell)
        return cls(partition, tuple(cells))

    def save(self, path: Path) -> None:
        path.write_text(self.to_text())

    @classmethod
    def load(cls, path: Path) -> "LocalizedModel":
        return cls.from_text(path.read_text())


def cell_problems(
    data: Dataset, p: Partition, lambdas: np.ndarray, gammas: np.ndarray
) -> list[CellProblem]:
    if data.dim != p.dim:
        raise ValueError(f"data has dimension {data.dim} but the partition has {p.dim}")
    cells = p.assign(data.X)
    n = max(len(data), 1)
    return [
        CellProblem(data.X[cells == j], data.y[cells == j], lambdas[j], gammas[j], n)
        for j in range(p.m)
    ]


def train_localized(
    data: Dataset,
    p: Partition,
    lambdas: float | np.ndarray | list[float],
    gammas: float | np.ndarray | list[float],
    workers: int = LOCSVM_WORKERS,
    eps_kkt: float = DEFAULT_EPS_KKT,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> LocalizedModel:
    """Train every cell on its own points, normalised by the global sample size."""
    lambdas = per_cell(lambdas, p.m, "lambdas")
    gammas = per_cell(gammas, p.m, "gammas")
    bad = np.flatnonzero(gammas > p.radius)
    if bad.size:
        raise ValueError(f"cell {bad[0]}: gamma={gammas[bad[0]]} exceeds the cell radius r={p.radius}")
    problems = cell_problems(data, p, lambdas, gammas)

    def solve(problem: CellProblem) -> CellModel:
        return train_cell(problem, eps_kkt, max_sweeps)

    if workers <= 1:
        cells = [solve(problem) for problem in problems]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            cells = list(executor.map(solve, problems))
    stalled = [j for j, c in enumerate(cells) if not c.converged]
    if stalled:
        print_warning(f"{len(stalled)} cell(s) hit max_sweeps={max_sweeps} before the KKT tolerance")
    return LocalizedModel(p, tuple(cells))


def _single_or_batch(x, values: np.ndarray):
    return float(values[0]) if np.ndim(x) < 2 and values.shape[0] == 1 else values


def predict_raw(model: LocalizedModel, x):
    return _single_or_batch(x, model.decision_function(x))


def predict_clipped(model: LocalizedModel, x):
    return _single_or_batch(x, clip(model.decision_function(x)))


def predict_sign(model: LocalizedModel, x):
    values = sign(model.decision_function(x))
    return int(values[0]) if np.ndim(x) < 2 and values.shape[0] == 1 else values
