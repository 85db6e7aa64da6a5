"""Validated run configurations for the command-line front end.

Values are layered, lowest precedence first: field defaults, the environment
(LOCSVM_SEED, LOCSVM_WORKERS), a key=value config file, then command-line flags.
"""

from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from locsvm import env
from locsvm.distributions import Family, MarginDistribution


class CommonConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0, description="master seed")
    workers: int = Field(default=1, ge=1, description="parallel workers (results do not depend on it)")
    out_dir: Path = Field(default=Path("out"), description="directory for output files")


class DistributionConfig(CommonConfig):
    family: Family = Field(default="halfspace", description="halfspace or sphere")
    d: int = Field(default=2, ge=1, description="input dimension")
    zeta: float = Field(default=1.0, gt=0, description="noise-profile exponent")
    tau: float = Field(default=1.0, gt=0, le=1, description="plateau width")
    R: float = Field(default=0.5, gt=0, lt=1, description="sphere radius")

    def distribution(self) -> MarginDistribution:
        return MarginDistribution(
            family=self.family, d=self.d, zeta=self.zeta, tau=self.tau, R=self.R, seed=self.seed
        )


class CellRuleConfig(DistributionConfig):
    nu: float | None = Field(default=None, ge=0, description="cell-size exponent, r_n = cell_scale n^-nu")
    cell_scale: float = Field(default=2.0, gt=0, description="cell-size constant")
    sigma: float | None = Field(default=None, ge=1, description="lambda = n^-sigma")
    n_test: int = Field(default=100_000, ge=1_000, description="fresh test points for risk estimates")


class PartitionConfig(CommonConfig):
    d: int = Field(default=2, ge=1, description="input dimension")
    r: float = Field(default=0.5, gt=0, le=2, description="net radius")
    n_probe: int = Field(default=100_000, ge=1_000, description="covering probes")


class TrainConfig(CellRuleConfig):
    n: int = Field(default=1024, ge=1, description="training sample size")


class TvConfig(CellRuleConfig):
    n: int = Field(default=1024, ge=4, description="training sample size")
    r: float | None = Field(default=None, gt=0, le=2, description="net radius (default from the cell rule)")
    net_mode: Literal["exact", "geometric"] = Field(default="geometric", description="parameter net")
    net_size: int = Field(default=6, ge=2, description="entries per geometric net")


class MarginsConfig(DistributionConfig):
    n_mc: int = Field(default=1_000_000, ge=10_000, description="Monte Carlo inputs")
    plot: bool = Field(default=False, description="also write a PNG of the margin curves")


class TheoryConfig(CommonConfig):
    beta: float | None = Field(default=None, gt=0, description="margin-noise exponent (default zeta + 1)")
    q: float | None = Field(default=None, ge=0, description="noise exponent (default 1 / zeta)")
    d: int = Field(default=2, ge=1, description="input dimension")
    zeta: float = Field(default=1.0, ge=0, description="lower control exponent")

    def exponents(self) -> tuple[float, float]:
        if (self.beta is None or self.q is None) and self.zeta == 0:
            raise ValueError("beta and q must be given when zeta = 0")
        beta = self.zeta + 1 if self.beta is None else self.beta
        q = 1 / self.zeta if self.q is None else self.q
        return beta, q


class RatesConfig(CellRuleConfig):
    n_ladder: list[int] = Field(
        default=[256, 512, 1024, 2048, 4096, 8192], description="comma-separated sample sizes"
    )
    reps: int = Field(default=5, ge=3, description="repetitions per sample size")
    mode: Literal["localized", "global"] = Field(default="localized", description="localized or global SVM")
    drop_smallest: bool = Field(default=False, description="leave the smallest n out of the slope fit")
    plot: bool = Field(default=False, description="also write a PNG learning curve")

    @field_validator("n_ladder", mode="before")
    @classmethod
    def _split_ladder(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [int(v) for v in value.split(",") if v.strip()]
        return value


def parse_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        values[key.strip()] = value.strip()
    return values


def environment_values(config_cls: type[CommonConfig]) -> dict[str, Any]:
    fields = config_cls.model_fields
    values: dict[str, Any] = {}
    if "seed" in fields:
        values["seed"] = env.LOCSVM_SEED
    if "workers" in fields:
        values["workers"] = env.LOCSVM_WORKERS
    return values


def load_config(
    config_cls: type[CommonConfig], config_file: Path | None, flags: dict[str, Any]
) -> CommonConfig:
    values = environment_values(config_cls)
    if config_file is not None:
        values.update(parse_config_file(config_file))
    values.update(flags)
    return config_cls.model_validate(values)
