"""Batch commands behind `locsvm <command>`; each returns the files it wrote."""

from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import matplotlib.pyplot as plt

from locsvm.analysis.charts import create_margin_plot
from locsvm.analysis.rates import (
    CellRule,
    RateParams,
    choose_parameters,
    evaluation_seed,
    partition_seed,
    rate_experiment,
    train_seed,
)
from locsvm.analysis.risk import estimate_risk
from locsvm.analysis.theory import theory_exponents
from locsvm.console.config import (
    CommonConfig,
    MarginsConfig,
    PartitionConfig,
    RatesConfig,
    TheoryConfig,
    TrainConfig,
    TvConfig,
)
from locsvm.distributions import LADDER, margin_curves, margin_report
from locsvm.geometry import build_rnet, partition_report
from locsvm.model import train_localized
from locsvm.printer import print_info, print_success, print_table
from locsvm.tvsvm import build_nets, train_tv


def _out(cfg: CommonConfig, name: str) -> Path:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg.out_dir / name


def _csv(df, path: Path) -> Path:
    df.to_csv(path, index=False, float_format="%.17g")
    return path


def cmd_partition(cfg: PartitionConfig) -> list[Path]:
    p = build_rnet(cfg.d, cfg.r, cfg.seed)
    print_info(f"Built an r-net with {p.m} cells (d={cfg.d}, r={cfg.r})")
    partition_path = _out(cfg, "partition.txt")
    p.save(partition_path)
    report = partition_report(p, cfg.n_probe, cfg.seed)
    print_table(report, title="Partition invariants")
    return [partition_path, _csv(report, _out(cfg, "partition_report.csv"))]


def cmd_train(cfg: TrainConfig) -> list[Path]:
    dist = cfg.distribution()
    rule = CellRule.for_distribution(dist, cfg.nu, cfg.sigma, cfg.cell_scale)
    choice = choose_parameters(dist, cfg.n, rule, partition_seed(cfg.seed, cfg.n))
    data = dist.sample(cfg.n, train_seed(cfg.seed, cfg.n, 0))
    print_info(f"Training {choice.partition.m} cells on {cfg.n} samples")
    model = train_localized(data, choice.partition, choice.lambdas, choice.gammas, workers=cfg.workers)
    model_path = _out(cfg, "model.txt")
    model.save(model_path)
    risk = estimate_risk(model, dist, cfg.n_test, evaluation_seed(cfg.seed, cfg.n, 0))
    print_table(risk.to_frame(), title="Risk")
    return [model_path, _csv(risk.to_frame(), _out(cfg, "risk.csv"))]


def cmd_tvsvm(cfg: TvConfig) -> list[Path]:
    dist = cfg.distribution()
    rule = CellRule.for_distribution(dist, cfg.nu, cfg.sigma, cfg.cell_scale)
    r = rule.radius(cfg.n) if cfg.r is None else cfg.r
    p = build_rnet(dist.d, r, partition_seed(cfg.seed, cfg.n))
    data = dist.sample(cfg.n, train_seed(cfg.seed, cfg.n, 0))
    nets = build_nets(cfg.n, r, cfg.net_mode, cfg.net_size)
    print_info(
        f"TV-SVM on {p.m} cells with {nets.lambdas.size}x{nets.gammas.size} {nets.mode} nets"
    )
    model, report = train_tv(data, p, nets, workers=cfg.workers)
    model_path = _out(cfg, "model.txt")
    model.save(model_path)
    report_path = _out(cfg, "tv_report.csv")
    report.to_csv(report_path)
    risk = estimate_risk(model, dist, cfg.n_test, evaluation_seed(cfg.seed, cfg.n, 0))
    print_table(risk.to_frame(), title=f"Risk ({nets.mode} nets)")
    return [model_path, report_path, _csv(risk.to_frame(), _out(cfg, "risk.csv"))]


def cmd_margins(cfg: MarginsConfig) -> list[Path]:
    dist = cfg.distribution()
    report = margin_report(dist, cfg.n_mc, cfg.seed)
    print_table(report, title=f"Margin exponents ({dist.family}, d={dist.d})")
    paths = [_csv(report, _out(cfg, "margins.csv"))]
    if cfg.plot:
        curves = margin_curves(dist, cfg.n_mc, cfg.seed)
        fig = create_margin_plot(LADDER, curves[["ne", "mne", "me"]])
        paths.append(_out(cfg, "margins.png"))
        fig.savefig(paths[-1])
        plt.close(fig)
    return paths


def cmd_theory(cfg: TheoryConfig) -> list[Path]:
    beta, q = cfg.exponents()
    table = theory_exponents(beta, q, cfg.d, cfg.zeta).to_frame()
    print_table(table, title=f"Rate exponents (beta={beta}, q={q}, d={cfg.d}, zeta={cfg.zeta})")
    return [_csv(table, _out(cfg, "theory.csv"))]


def cmd_rates(cfg: RatesConfig) -> list[Path]:
    params = RateParams(
        n_ladder=cfg.n_ladder,
        reps=cfg.reps,
        nu=cfg.nu,
        cell_scale=cfg.cell_scale,
        sigma=cfg.sigma,
        mode=cfg.mode,
        n_test=cfg.n_test,
        seed=cfg.seed,
        drop_smallest=cfg.drop_smallest,
        workers=cfg.workers,
    )
    report = rate_experiment(cfg.distribution(), params)
    print_table(report.summary, title="Learning rate")
    return report.write(cfg.out_dir, png=cfg.plot)


@dataclass(frozen=True)
class Command:
    config: type[CommonConfig]
    run: Callable[[Any], list[Path]]
    help: str


COMMANDS: dict[str, Command] = {
    "partition": Command(PartitionConfig, cmd_partition, "build an r-net partition of the unit ball"),
    "train": Command(TrainConfig, cmd_train, "train a localized SVM with the theory's parameter rules"),
    "tvsvm": Command(TvConfig, cmd_tvsvm, "train a TV-SVM selecting parameters per cell"),
    "margins": Command(MarginsConfig, cmd_margins, "estimate margin exponents of a distribution"),
    "theory": Command(TheoryConfig, cmd_theory, "tabulate theoretical rate exponents"),
    "rates": Command(RatesConfig, cmd_rates, "run a learning-curve experiment"),
}


def run_command(name: str, cfg: CommonConfig) -> list[Path]:
    paths = COMMANDS[name].run(cfg)
    print_success(f"Wrote {len(paths)} file(s) to {cfg.out_dir}")
    return paths
