from __future__ import annotations

from dataclasses import dataclass
import os
from pathlib import Path

from dotenv import load_dotenv

try:
    load_dotenv()
except PermissionError:
    # Fall back to existing environment variables if .env is unreadable.
    pass

_PREFIX = "BSTAB_"
DEFAULT_PACKS_DIR = Path(__file__).resolve().parents[1] / "packs"


@dataclass(frozen=True)
class Settings:
    seed: int
    brute_limit: int
    max_enumeration: int
    random_trials: int
    scan_nmax: int

    output_dir: Path
    run_db_url: str
    log_level: str
    packs_dir: Path


def _env(name: str, default: str) -> str:
    return os.getenv(_PREFIX + name, default)


def _int(name: str, default: str) -> int:
    raw = _env(name, default)
    try:
        # accept "1e5" style values for the budget knobs
        return int(float(raw)) if any(c in raw for c in "eE.") else int(raw)
    except ValueError as exc:
        raise RuntimeError(f"Invalid integer env var {_PREFIX}{name}: {raw!r}") from exc


def load_settings() -> Settings:
    seed = _int("SEED", "20240917")
    if not 0 <= seed < 2**64:
        raise RuntimeError(f"{_PREFIX}SEED must be a 64-bit unsigned integer")

    return Settings(
        seed=seed,
        brute_limit=_int("BRUTE_LIMIT", "100000"),
        max_enumeration=_int("MAX_ENUMERATION", "10000000"),
        random_trials=_int("RANDOM_TRIALS", "24"),
        scan_nmax=_int("SCAN_NMAX", "8"),
        output_dir=Path(_env("OUTPUT_DIR", "./runs")),
        run_db_url=_env("RUN_DB_URL", "sqlite:///./runs/ledger.db"),
        log_level=_env("LOG_LEVEL", "WARNING").upper(),
        packs_dir=Path(_env("PACKS_DIR", str(DEFAULT_PACKS_DIR))),
    )
