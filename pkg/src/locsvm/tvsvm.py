"""Training-validation SVM: per-cell hyperparameter selection on a held-out half."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd

from locsvm.dataset import Dataset
from locsvm.env import LOCSVM_WORKERS
from locsvm.geometry import Partition
from locsvm.model import LocalizedModel, train_localized
from locsvm.printer import progress_bar
from locsvm.solver import clip, hinge_loss

NetMode = Literal["exact", "geometric"]
MIN_TV_SAMPLES = 4


@dataclass(frozen=True, eq=False)
class ParameterNets:
    lambdas: np.ndarray  # decreasing, in (0, 1/n]
    gammas: np.ndarray  # decreasing, in (0, r_n]
    lambda_spacing: float
    gamma_spacing: float  # relative to r_n
    mode: NetMode
    n: int
    r_n: float

    def __post_init__(self):
        if self.n < 1 or not self.r_n > 0:
            raise ValueError(f"nets need n >= 1 and r_n > 0, got n={self.n}, r_n={self.r_n}")
        for name in ("lambdas", "gammas"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1 or arr.size == 0 or not np.all(arr > 0):
                raise ValueError(f"{name} must be a non-empty vector of positive values")
            if np.any(np.diff(arr) > 0):
                raise ValueError(f"{name} must be in decreasing order")
            object.__setattr__(self, name, arr)
        if self.lambdas.max() > (1.0 / self.n) * (1 + 1e-12):
            raise ValueError(f"lambda net reaches {self.lambdas.max():.6g} > 1/n = {1.0 / self.n:.6g}")
        if self.gammas.max() > self.r_n * (1 + 1e-12):
            raise ValueError(f"gamma net reaches {self.gammas.max():.6g} > r_n = {self.r_n:.6g}")

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return [(float(lam), float(gam)) for lam, gam in product(self.lambdas, self.gammas)]


def split_tv(data: Dataset) -> tuple[Dataset, Dataset]:
    """First floor(n/2) + 1 samples for training, the rest for validation."""
    n = len(data)
    if n < MIN_TV_SAMPLES:
        raise ValueError(f"TV-SVM needs at least {MIN_TV_SAMPLES} samples, got {n}")
    l = n // 2 + 1  # noqa: E741
    return data.subset(slice(0, l)), data.subset(slice(l, n))


def build_nets(n: int, r_n: float, mode: NetMode = "geometric", size_cap: int = 10) -> ParameterNets:
    """Candidate grids for lambda and gamma.

    "exact" is the arithmetic net with n entries each (lambda spacing n^-2,
    gamma spacing r_n / n). "geometric" is a log-spaced practical default with
    `size_cap` entries over [n^-3, n^-1] and [r_n / n, r_n].
    """
    if n < MIN_TV_SAMPLES:
        raise ValueError(f"nets need n >= {MIN_TV_SAMPLES}, got {n}")
    if not 0 < r_n <= 2:
        raise ValueError(f"r_n must lie in (0, 2], got {r_n}")
    if size_cap < 2:
        raise ValueError(f"size_cap must be at least 2, got {size_cap}")
    if mode == "exact":
        k = np.arange(n, 0, -1, dtype=float)
        lambdas = np.minimum(k / n**2, 1.0 / n)
        gammas = np.minimum(k * r_n / n, r_n)
        return ParameterNets(lambdas, gammas, n**-2.0, 1.0 / n, mode, n, r_n)
    if mode == "geometric":
        lambdas = np.geomspace(1.0 / n, n**-3.0, size_cap)
        gammas = np.geomspace(r_n, r_n / n, size_cap)
        lambda_spacing = float(lambdas[0] - lambdas[1])
        return ParameterNets(lambdas, gammas, lambda_spacing, 1.0 - gammas[1] / gammas[0], mode, n, r_n)
    raise ValueError(f"unknown net mode {mode!r}, expected 'exact' or 'geometric'")


@dataclass(frozen=True, eq=False)
class TvReport:
    candidates: pd.DataFrame  # cell, lambda, gamma, val_risk, chosen
    lambdas: np.ndarray  # chosen per cell
    gammas: np.ndarray
    n_train: int
    n_val: int
    mode: NetMode

    def to_csv(self, path: Path) -> None:
        self.candidates.to_csv(path, index=False, float_format="%.17g")


@dataclass(frozen=True, eq=False)
class Selection:
    lambdas: np.ndarray
    gammas: np.ndarray
    candidates: pd.DataFrame
    models: dict[tuple[float, float], LocalizedModel]

    def assemble(self, p: Partition) -> LocalizedModel:
        cells = tuple(
            self.models[(float(lam), float(gam))].cells[j]
            for j, (lam, gam) in enumerate(zip(self.lambdas, self.gammas, strict=True))
        )
        return LocalizedModel(p, cells)


def select(
    train: Dataset,
    val: Dataset,
    p: Partition,
    nets: ParameterNets,
    workers: int = LOCSVM_WORKERS,
    quiet: bool = False,
) -> Selection:
    """Train every candidate on `train` and pick per cell by clipped hinge risk on `val`.

    The risk of cell j counts the validation points in cell j and is divided by
    the full validation size. Ties go to the smallest lambda, then the largest
    gamma. A cell without validation points keeps (min lambda, max gamma).
    """
    if nets.gammas.max() > p.radius:
        raise ValueError(f"gamma net reaches {nets.gammas.max()} > cell radius {p.radius}")
    pairs = nets.pairs
    val_cells = p.assign(val.X)
    n_val = max(len(val), 1)

    def evaluate(pair: tuple[float, float]) -> tuple[LocalizedModel, np.ndarray]:
        model = train_localized(train, p, pair[0], pair[1], workers=1)
        losses = hinge_loss(val.y, clip(model.decision_function(val.X))) if len(val) else np.empty(0)
        risks = np.bincount(val_cells, weights=losses, minlength=p.m) / n_val
        return model, risks

    with progress_bar(quiet) as progress:
        task = progress.add_task(f"[cyan]Training {len(pairs)} candidates...", total=len(pairs))
        results = []
        with ThreadPoolExecutor(max_workers=max(workers, 1)) as executor:
            for result in executor.map(evaluate, pairs):
                results.append(result)
                progress.update(task, advance=1)

    counts = np.bincount(val_cells, minlength=p.m)
    rows = []
    lambdas = np.empty(p.m)
    gammas = np.empty(p.m)
    for j in range(p.m):
        if counts[j] == 0:
            best = (float(nets.lambdas.min()), float(nets.gammas.max()))
        else:
            k = min(range(len(pairs)), key=lambda k: (results[k][1][j], pairs[k][0], -pairs[k][1]))
            best = pairs[k]
        lambdas[j], gammas[j] = best
        for pair, (_, risks) in zip(pairs, results, strict=True):
            rows.append(
                {
                    "cell": j,
                    "lambda": pair[0],
                    "gamma": pair[1],
                    "val_risk": float(risks[j]) if counts[j] else np.nan,
                    "chosen": int(pair == best),
                }
            )
    models = {pair: model for pair, (model, _) in zip(pairs, results, strict=True)}
    return Selection(lambdas, gammas, pd.DataFrame(rows), models)


def train_tv(
    data: Dataset,
    p: Partition,
    nets: ParameterNets,
    workers: int = LOCSVM_WORKERS,
    quiet: bool = False,
) -> tuple[LocalizedModel, TvReport]:
    train, val = split_tv(data)
    selection = select(train, val, p, nets, workers=workers, quiet=quiet)
    report = TvReport(
        selection.candidates, selection.lambdas, selection.gammas, len(train), len(val), nets.mode
    )
    return selection.assemble(p), report
