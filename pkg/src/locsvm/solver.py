"""Per-cell hinge-loss SVM solved exactly in the dual by coordinate ascent.

Cell j minimises lambda ||f||^2 + (1/n) sum_{i in D_j} hinge(y_i, f(x_i)) with n
the size of the whole sample. Without an offset the dual is box constrained,

    max  sum(alpha) - 1/2 (alpha*y)^T K (alpha*y)   over [0, C]^k,  C = 1 / (2 lambda n)

and the exact coordinate update alpha_i += (1 - y_i f_i) / K_ii, clipped to the
box, converges.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from locsvm.kernel import KernelParams

DEFAULT_EPS_KKT = 1e-6
DEFAULT_MAX_SWEEPS = 10_000
SNAP_TOLERANCE = 1e-12
MAX_BRUTE_FORCE_POINTS = 5


@dataclass(frozen=True, eq=False)
class CellProblem:
    X: np.ndarray  # (k, d) points of the cell
    y: np.ndarray  # (k,) labels in {-1, +1}
    lam: float
    gamma: float
    n: int  # size of the whole training sample

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError(f"X of shape {X.shape} does not match {y.shape[0]} labels")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if y.size and not np.all(np.abs(y) == 1):
            raise ValueError("labels must be -1 or +1")
        if self.n < max(1, y.size):
            raise ValueError(f"global sample size n={self.n} is smaller than the cell's {y.size} points")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def box(self) -> float:
        return 1.0 / (2.0 * self.lam * self.n)

    def __len__(self) -> int:
        return self.y.shape[0]


def _rkhs_norm_sq(X: np.ndarray, coef: np.ndarray, gamma: float) -> float:
    if coef.size == 0:
        return 0.0
    return max(float(coef @ KernelParams(gamma).matrix(X) @ coef), 0.0)


@dataclass(frozen=True, eq=False)
class CellModel:
    support: np.ndarray  # (n_sv, d)
    alpha: np.ndarray  # (n_sv,)
    y: np.ndarray  # (n_sv,)
    gamma: float
    lam: float
    rkhs_norm_sq: float
    converged: bool = True
    sweeps: int = 0
    dual_history: tuple[float, ...] = field(default=(), repr=False)

    @classmethod
    def zero(cls, dim: int, gamma: float, lam: float) -> "CellModel":
        return cls(np.empty((0, dim)), np.empty(0), np.empty(0, dtype=np.int64), gamma, lam, 0.0)

    @classmethod
    def from_support(
        cls, support: np.ndarray, alpha: np.ndarray, y: np.ndarray, gamma: float, lam: float, **kwargs
    ) -> "CellModel":
        return cls(support, alpha, y, gamma, lam, _rkhs_norm_sq(support, alpha * y, gamma), **kwargs)

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    @property
    def n_support(self) -> int:
        return self.alpha.shape[0]

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        if self.n_support == 0:
            return np.zeros(X.shape[0])
        return KernelParams(self.gamma).cross(X, self.support) @ (self.alpha * self.y)

    def to_block(self, j: int) -> str:
        lines = [f"cell {j} {self.gamma:.17g} {self.lam:.17g} {self.n_support}"]
        for a, label, x in zip(self.alpha, self.y, self.support, strict=True):
            lines.append(" ".join([f"{a:.17g}", str(int(label)), *(f"{v:.17g}" for v in x)]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_lines(cls, lines: list[str], dim: int) -> tuple[int, "CellModel", list[str]]:
        """Parse one cell block; returns the cell index, the model and the remaining lines."""
        header = lines[0].split()
        if len(header) != 5 or header[0] != "cell":
            raise ValueError(f"bad cell header {lines[0]!r}, expected 'cell j gamma lambda n_sv'")
        j, gamma, lam, n_sv = int(header[1]), float(header[2]), float(header[3]), int(header[4])
        if len(lines) < n_sv + 1:
            raise ValueError(f"cell {j} declares {n_sv} support vectors but has {len(lines) - 1}")
        rows = [line.split() for line in lines[1 : n_sv + 1]]
        if any(len(row) != dim + 2 for row in rows):
            raise ValueError(f"cell {j}: support vector lines must hold alpha, y and {dim} coordinates")
        if n_sv == 0:
            return j, cls.zero(dim, gamma, lam), lines[1:]
        alpha = np.array([float(row[0]) for row in rows])
        y = np.array([int(row[1]) for row in rows], dtype=np.int64)
        support = np.array([[float(v) for v in row[2:]] for row in rows])
        return j, cls.from_support(support, alpha, y, gamma, lam), lines[n_sv + 1 :]


def clip(t):
    """Clip to [-1, 1]; scalars stay scalars."""
    clipped = np.clip(t, -1.0, 1.0)
    return float(clipped) if np.ndim(clipped) == 0 else clipped


def sign(t):
    """Sign with sign(0) = +1."""
    s = np.where(np.asarray(t) >= 0, 1, -1)
    return int(s) if s.ndim == 0 else s


def hinge_loss(y, t):
    return np.maximum(0.0, 1.0 - np.asarray(y) * np.asarray(t))


def classification_loss(y, t):
    return (np.asarray(y) != sign(t)).astype(float)


def dual_objective(problem: CellProblem, alpha: np.ndarray) -> float:
    coef = alpha * problem.y
    return float(alpha.sum() - 0.5 * coef @ KernelParams(problem.gamma).matrix(problem.X) @ coef)


def kkt_violation(alpha: np.ndarray, margins: np.ndarray, box: float) -> float:
    """Largest KKT violation given y_i f(x_i) for every training point."""
    at_zero = alpha <= 0.0
    at_box = alpha >= box
    free = ~(at_zero | at_box)
    violation = np.zeros_like(margins)
    violation[at_zero] = np.maximum(0.0, 1.0 - margins[at_zero])
    violation[at_box] = np.maximum(0.0, margins[at_box] - 1.0)
    violation[free] = np.abs(margins[free] - 1.0)
    return float(violation.max()) if violation.size else 0.0


def _snap(a: float, box: float) -> float:
    if a <= SNAP_TOLERANCE:
        return 0.0
    if a >= box - SNAP_TOLERANCE:
        return box
    return a


def _to_model(problem: CellProblem, alpha: np.ndarray, **kwargs) -> CellModel:
    sv = alpha > 0
    return CellModel.from_support(
        problem.X[sv], alpha[sv], problem.y[sv], problem.gamma, problem.lam, **kwargs
    )


def train_cell(
    problem: CellProblem, eps_kkt: float = DEFAULT_EPS_KKT, max_sweeps: int = DEFAULT_MAX_SWEEPS
) -> CellModel:
    if not eps_kkt > 0:
        raise ValueError(f"eps_kkt must be positive, got {eps_kkt}")
    if max_sweeps < 1:
        raise ValueError(f"max_sweeps must be a positive integer, got {max_sweeps}")
    k = len(problem)
    if k == 0:
        return CellModel.zero(problem.X.shape[1], problem.gamma, problem.lam)

    K = KernelParams(problem.gamma).matrix(problem.X)
    y = problem.y.astype(float)
    box = problem.box
    alpha = np.zeros(k)
    f = np.zeros(k)
    history = []
    converged = False
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        for i in range(k):
            new = _snap(min(max(alpha[i] + (1.0 - y[i] * f[i]) / K[i, i], 0.0), box), box)
            step = new - alpha[i]
            if step != 0.0:
                f += step * y[i] * K[:, i]
                alpha[i] = new
        # refresh to keep rounding from the incremental updates out of the KKT test
        coef = alpha * y
        f = K @ coef
        history.append(float(alpha.sum() - 0.5 * coef @ f))
        if kkt_violation(alpha, y * f, box) <= eps_kkt:
            converged = True
            break
    return _to_model(problem, alpha, converged=converged, sweeps=sweeps, dual_history=tuple(history))


def brute_force_dual(problem: CellProblem, grid_step: float) -> CellModel:
    """Exhaustive grid search of the dual over [0, C]^k; a test oracle for tiny cells."""
    k = len(problem)
    if k > MAX_BRUTE_FORCE_POINTS:
        raise ValueError(f"brute_force_dual handles at most {MAX_BRUTE_FORCE_POINTS} points, got {k}")
    if not grid_step > 0:
        raise ValueError(f"grid_step must be positive, got {grid_step}")
    if k == 0:
        return CellModel.zero(problem.X.shape[1], problem.gamma, problem.lam)
    box = problem.box
    axis = np.append(np.arange(0.0, box, grid_step), box)
    grid = np.array(list(product(axis, repeat=k)))
    coef = grid * problem.y
    K = KernelParams(problem.gamma).matrix(problem.X)
    objective = grid.sum(axis=1) - 0.5 * np.einsum("ij,jk,ik->i", coef, K, coef)
    return _to_model(problem, grid[int(np.argmax(objective))])


def cell_predict_raw(m: CellModel, x: np.ndarray | list[float] | float) -> float:
    """sum_i alpha_i y_i k(x_i, x) for a single point."""
    point = np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1)
    return float(m.decision_values(point)[0])
