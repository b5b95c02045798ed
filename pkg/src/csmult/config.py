"""Process settings for csmult, read from the environment and an optional .env file."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


def _as_bool(value: str, *, default: bool = False) -> bool:
    truthy = {"1", "true", "yes", "on"}
    falsy = {"0", "false", "no", "off"}
    text = value.strip().lower()
    if text in truthy:
        return True
    if text in falsy:
        return False
    return default


@dataclass(frozen=True)
class Settings:
    threads: int
    log_level: str
    out_dir: Path
    quiet: bool
    n_max: int

    @classmethod
    def load(cls) -> "Settings":
        threads = int(os.getenv("CSMULT_THREADS", str(os.cpu_count() or 1)))
        return cls(
            threads=max(1, threads),
            log_level=os.getenv("CSMULT_LOG_LEVEL", "INFO"),
            out_dir=Path(os.getenv("CSMULT_OUT_DIR", "var/reports")).resolve(),
            quiet=_as_bool(os.getenv("CSMULT_QUIET", "false"), default=False),
            n_max=int(os.getenv("CSMULT_N_MAX", "65536")),
        )
