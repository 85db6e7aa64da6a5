"""Learning-curve experiment: excess risk of localized SVMs along a ladder of sample sizes."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from scipy.stats import linregress

from locsvm.analysis.charts import create_learning_curve_plot
from locsvm.analysis.risk import estimate_risk
from locsvm.analysis.theory import kappa, optimal_nu, rate_exponent, theory_exponents
from locsvm.dataset import derive_seed
from locsvm.distributions import MarginDistribution
from locsvm.env import LOCSVM_WORKERS
from locsvm.geometry import CellClassification, Partition, build_rnet, classify_cells
from locsvm.model import train_localized
from locsvm.printer import print_success, print_warning, progress_bar

Mode = Literal["localized", "global"]

EXCESS_FLOOR = 1e-6
MIN_LADDER = 4
MIN_REPS = 3

# purpose keys for derive_seed
_PARTITION, _TRAIN, _TEST = 0, 1, 2


def partition_seed(seed: int, n: int) -> int:
    return derive_seed(seed, n, 0, _PARTITION)


def train_seed(seed: int, n: int, rep: int) -> int:
    return derive_seed(seed, n, rep, _TRAIN)


def evaluation_seed(seed: int, n: int, rep: int) -> int:
    return derive_seed(seed, n, rep, _TEST)


@dataclass
class RateParams:
    n_ladder: list[int]
    reps: int = 5
    nu: float | None = None  # None picks the optimal cell-size exponent
    cell_scale: float = 2.0  # r_n = cell_scale * n^-nu
    sigma: float | None = None  # None uses max(1, kappa (beta + d)(nu + 1) - nu)
    mode: Mode = "localized"
    n_test: int = 100_000
    seed: int = 0
    drop_smallest: bool = False
    workers: int = LOCSVM_WORKERS


@dataclass
class RateReport:
    runs: pd.DataFrame  # n, rep, excess_class, excess_hinge, stderr
    by_n: pd.DataFrame  # n, mean, stderr, mean_hinge
    slope: float
    slope_se: float
    theory_exponent: float
    regime: str
    nu: float
    sigma: float
    mode: Mode
    comparison: pd.DataFrame
    warnings: list[str] = field(default_factory=list)

    @property
    def summary(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "slope": self.slope,
                    "slope_se": self.slope_se,
                    "theory_exponent": self.theory_exponent,
                    "regime": self.regime,
                    "nu": self.nu,
                    "sigma": self.sigma,
                    "mode": self.mode,
                }
            ]
        )

    def plot_data(self) -> str:
        """Two whitespace-separated columns: log n and log of the mean excess risk."""
        lines = [
            f"{np.log(n):.17g} {np.log(max(m, EXCESS_FLOOR)):.17g}"
            for n, m in zip(self.by_n["n"], self.by_n["mean"], strict=True)
        ]
        return "\n".join(lines) + "\n"

    def write(self, out_dir: Path, prefix: str = "rates", png: bool = False) -> list[Path]:
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = [
            out_dir / f"{prefix}_runs.csv",
            out_dir / f"{prefix}_summary.csv",
            out_dir / f"{prefix}_comparison.csv",
            out_dir / f"{prefix}_plot.dat",
        ]
        self.runs.to_csv(paths[0], index=False, float_format="%.17g")
        self.summary.to_csv(paths[1], index=False, float_format="%.17g")
        self.comparison.to_csv(paths[2], index=False, float_format="%.17g")
        paths[3].write_text(self.plot_data())
        if png:
            fig = self.plot_learning_curve()
            if fig is not None:
                paths.append(out_dir / f"{prefix}_curve.png")
                fig.savefig(paths[-1])
                plt.close(fig)
        return paths

    def plot_learning_curve(self) -> plt.Figure | None:
        return create_learning_curve_plot(self.by_n, self.slope, self.theory_exponent)


@dataclass(frozen=True)
class CellRule:
    """Exponents behind the per-cell parameter choice."""

    kappa: float
    nu: float
    sigma: float
    cell_scale: float = 2.0

    @classmethod
    def for_distribution(
        cls,
        dist: MarginDistribution,
        nu: float | None = None,
        sigma: float | None = None,
        cell_scale: float = 2.0,
    ) -> "CellRule":
        sheet = dist.exponents()
        k = kappa(sheet.beta, sheet.q, dist.d)
        nu = optimal_nu(sheet.beta, sheet.q, dist.d, dist.zeta) if nu is None else nu
        if sigma is None:
            sigma = max(1.0, k * (sheet.beta + dist.d) * (nu + 1) - nu)
        return cls(k, nu, sigma, cell_scale)

    def radius(self, n: int) -> float:
        return min(2.0, self.cell_scale * n**-self.nu)


@dataclass(frozen=True)
class ParameterChoice:
    """Partition and per-cell (lambda, gamma) for one sample size."""

    n: int
    partition: Partition
    lambdas: np.ndarray
    gammas: np.ndarray
    classification: CellClassification | None


def choose_parameters(
    dist: MarginDistribution, n: int, rule: CellRule, seed: int, mode: Mode = "localized"
) -> ParameterChoice:
    """Cells of radius r_n with gamma = (r_n / n)^kappa on cells straddling the boundary.

    Other cells get gamma = r_n and every cell lambda = n^-sigma. The global
    baseline uses one cell with gamma = n^-kappa and lambda = 1 / n.
    """
    if mode == "global":
        p = build_rnet(dist.d, 2.0, seed)
        return ParameterChoice(n, p, np.full(p.m, 1.0 / n), np.full(p.m, n**-rule.kappa), None)
    r_n = rule.radius(n)
    boundary_gamma = (r_n / n) ** rule.kappa
    if boundary_gamma > r_n:
        raise ValueError(
            f"boundary-cell gamma (r_n / n)^kappa = {boundary_gamma:.6g} exceeds r_n = {r_n:.6g} at n={n}; "
            "lower nu or raise cell_scale"
        )
    p = build_rnet(dist.d, r_n, seed)
    # s_n = r_n
    cells = classify_cells(p, dist, s=r_n, seed=seed)
    gammas = np.full(p.m, r_n)
    gammas[sorted(cells.n1)] = boundary_gamma
    return ParameterChoice(n, p, np.full(p.m, n**-rule.sigma), gammas, cells)


class RateExperiment:
    def __init__(self, dist: MarginDistribution, params: RateParams):
        self.dist = dist
        self.params = params
        self._validate_inputs()
        sheet = dist.exponents()
        self.beta, self.q = sheet.beta, sheet.q
        self.rule = CellRule.for_distribution(dist, params.nu, params.sigma, params.cell_scale)
        if params.mode == "global":
            self.theory_exponent = theory_exponents(self.beta, self.q, dist.d, dist.zeta).global_svm
        else:
            self.theory_exponent = rate_exponent(self.beta, self.q, dist.d, dist.zeta, self.rule.nu)
        self.warnings: list[str] = []

    def _validate_inputs(self):
        ladder = self.params.n_ladder
        if len(ladder) < MIN_LADDER:
            raise ValueError(f"the n ladder needs at least {MIN_LADDER} sizes, got {len(ladder)}")
        if any(b <= a for a, b in zip(ladder, ladder[1:], strict=False)):
            raise ValueError(f"the n ladder must be strictly increasing, got {ladder}")
        if ladder[0] < 1:
            raise ValueError(f"sample sizes must be positive, got {ladder[0]}")
        if self.params.reps < MIN_REPS:
            raise ValueError(f"need at least {MIN_REPS} repetitions, got {self.params.reps}")
        if self.params.nu is not None and self.params.nu < 0:
            raise ValueError(f"nu must be non-negative, got {self.params.nu}")
        if not self.params.cell_scale > 0:
            raise ValueError(f"cell_scale must be positive, got {self.params.cell_scale}")
        if self.params.sigma is not None and self.params.sigma < 1:
            raise ValueError(f"sigma must be at least 1, got {self.params.sigma}")

    def _warn(self, message: str):
        self.warnings.append(message)
        print_warning(message)

    def _prepare(self, n: int) -> ParameterChoice:
        seed = partition_seed(self.params.seed, n)
        return choose_parameters(self.dist, n, self.rule, seed, self.params.mode)

    def _run_one(self, task: tuple[ParameterChoice, int]) -> dict:
        ladder, rep = task
        data = self.dist.sample(ladder.n, train_seed(self.params.seed, ladder.n, rep))
        model = train_localized(data, ladder.partition, ladder.lambdas, ladder.gammas, workers=1)
        risk = estimate_risk(
            model, self.dist, self.params.n_test, evaluation_seed(self.params.seed, ladder.n, rep)
        )
        return {
            "n": ladder.n,
            "rep": rep,
            "excess_class": risk.excess_class,
            "excess_hinge": risk.excess_hinge,
            "stderr": risk.stderr,
            "cells": ladder.partition.m,
        }

    def run(self, quiet: bool = False) -> RateReport:
        """Train and evaluate every (n, repetition) pair, then fit the log-log slope"""
        ladders = [self._prepare(n) for n in self.params.n_ladder]
        tasks = [(ladder, rep) for ladder in ladders for rep in range(self.params.reps)]
        rows = []
        with progress_bar(quiet) as progress:
            task = progress.add_task(f"[cyan]Running {len(tasks)} trainings...", total=len(tasks))
            with ThreadPoolExecutor(max_workers=max(self.params.workers, 1)) as executor:
                for row in executor.map(self._run_one, tasks):
                    rows.append(row)
                    progress.update(task, advance=1)
        runs = pd.DataFrame(rows).sort_values(["n", "rep"], kind="stable").reset_index(drop=True)
        report = self._fit(runs)
        if not quiet:
            print_success(
                f"Rate experiment completed: slope {report.slope:.3f} (theory -{report.theory_exponent:.3f})"
            )
        return report

    def _fit(self, runs: pd.DataFrame) -> RateReport:
        grouped = runs.groupby("n", sort=True)
        by_n = pd.DataFrame(
            {
                "n": grouped["excess_class"].mean().index.to_numpy(),
                "mean": grouped["excess_class"].mean().to_numpy(),
                "stderr": grouped["excess_class"].sem().to_numpy(),
                "mean_hinge": grouped["excess_hinge"].mean().to_numpy(),
            }
        )
        fit = by_n.iloc[1:] if self.params.drop_smallest else by_n
        if self.params.drop_smallest:
            self._warn(f"dropped the smallest sample size n={int(by_n['n'].iloc[0])} from the slope fit")
        floored = fit["mean"] < EXCESS_FLOOR
        if floored.any():
            self._warn(
                f"{int(floored.sum())} mean excess risk(s) floored at {EXCESS_FLOOR} for the slope fit"
            )
        log_mean = np.log(np.maximum(fit["mean"], EXCESS_FLOOR))
        result = linregress(np.log(fit["n"].to_numpy(dtype=float)), log_mean)

        theory = theory_exponents(self.beta, self.q, self.dist.d, self.dist.zeta)
        return RateReport(
            runs=runs,
            by_n=by_n,
            slope=float(result.slope),
            slope_se=float(result.stderr),
            theory_exponent=self.theory_exponent,
            regime=theory.regime,
            nu=self.rule.nu,
            sigma=self.rule.sigma,
            mode=self.params.mode,
            comparison=theory.to_frame(),
            warnings=list(self.warnings),
        )

    def get_summary_stats(self, report: RateReport) -> dict:
        """Headline numbers of a finished run"""
        return {
            "slope": report.slope,
            "slope_se": report.slope_se,
            "theory_slope": -report.theory_exponent,
            "largest_n_excess": float(report.by_n["mean"].iloc[-1]),
            "total_trainings": len(report.runs),
        }


def rate_experiment(dist: MarginDistribution, params: RateParams, quiet: bool = False) -> RateReport:
    return RateExperiment(dist, params).run(quiet=quiet)
