import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from locsvm.printer import print_warning  # noqa: E402


def create_learning_curve_plot(
    by_n: pd.DataFrame, slope: float, theory_exponent: float, figsize=(8, 6)
) -> plt.Figure | None:
    """Log-log plot of mean excess risk against n with the theoretical slope for reference.

    `by_n` holds one row per sample size with columns n, mean and stderr.
    """
    if by_n.empty:
        print_warning("No learning-curve data available to plot")
        return None

    sns.set_style("darkgrid")
    fig, ax = plt.subplots(figsize=figsize)

    ax.errorbar(
        by_n["n"],
        by_n["mean"],
        yerr=by_n["stderr"],
        fmt="o-",
        color="blue",
        capsize=3,
        label=f"Mean excess risk (fitted slope {slope:.3f})",
    )

    # Reference line through the first point
    n = by_n["n"].to_numpy(dtype=float)
    anchor = max(float(by_n["mean"].iloc[0]), 1e-6)
    sns.lineplot(
        x=n,
        y=anchor * (n / n[0]) ** (-theory_exponent),
        color="r",
        linestyle="--",
        ax=ax,
        label=f"Theory n^-{theory_exponent:.3f}",
    )

    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("Sample size n")
    ax.set_ylabel("Excess classification risk")
    plt.title("Learning Curve")
    ax.legend(loc="upper right")
    return fig


def create_margin_plot(ladder: np.ndarray, values: pd.DataFrame, figsize=(8, 6)) -> plt.Figure:
    """Empirical margin-condition curves over the dyadic ladder, one line per column."""
    sns.set_style("darkgrid")
    fig, ax = plt.subplots(figsize=figsize)
    for column in values.columns:
        sns.lineplot(x=ladder, y=values[column].to_numpy(), marker="o", ax=ax, label=column)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("t")
    plt.title("Margin Conditions")
    return fig
