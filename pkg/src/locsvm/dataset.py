"""Labeled samples in the closed unit ball."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

BALL_TOLERANCE = 1e-12


def check_in_ball(X: np.ndarray) -> None:
    """Raise if any row of `X` lies outside the closed unit ball."""
    if X.size == 0:
        return
    norms = np.linalg.norm(X, axis=1)
    worst = int(np.argmax(norms))
    if norms[worst] > 1.0 + BALL_TOLERANCE:
        raise ValueError(
            f"point {worst} has norm {norms[worst]:.6g} > 1 (outside the unit ball)"
        )


def as_points(x: np.ndarray | list[float] | float, dim: int) -> np.ndarray:
    """Coerce a single point or a batch of points to a (k, dim) float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.shape[0] == dim else arr.reshape(-1, 1)
    if arr.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got {arr.shape[1]}")
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray  # (n, d)
    y: np.ndarray  # (n,), entries in {-1, +1}

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if X.ndim != 2:
            raise ValueError(f"X must be two-dimensional, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
        if y.size and not np.all(np.abs(y) == 1):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def empty(cls, dim: int) -> "Dataset":
        return cls(np.empty((0, dim)), np.empty(0, dtype=np.int64))

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, idx: np.ndarray | slice) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx])

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.X, columns=[f"x{i + 1}" for i in range(self.dim)])
        df["y"] = self.y
        return df

    def to_csv(self, path: Path) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    @classmethod
    def from_csv(cls, path: Path) -> "Dataset":
        df = pd.read_csv(path, float_precision="round_trip")
        if "y" not in df.columns:
            raise ValueError(f"{path}: missing label column 'y'")
        features = [c for c in df.columns if c != "y"]
        return cls(df[features].to_numpy(dtype=float), df["y"].to_numpy())


def derive_seed(seed: int, *keys: int) -> int:
    """Independent, reproducible child seed for (seed, *keys)."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])
