import os
from pathlib import Path

from dotenv import load_dotenv

env_path = Path(__file__).parents[2] / ".env"
load_dotenv(env_path)


def _int_from_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from e


LOCSVM_SEED = _int_from_env("LOCSVM_SEED", 0)
LOCSVM_WORKERS = max(1, _int_from_env("LOCSVM_WORKERS", os.cpu_count() or 1))
