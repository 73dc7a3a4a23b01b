"""
Tourney Lab - 统一配置模块
所有预算、默认值集中管理；均可通过环境变量 (TOURNEY_*) 覆盖
"""
import os
import logging
import sys
from dataclasses import dataclass, replace
from dotenv import load_dotenv

load_dotenv()

# --- Logging ---
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logging(level: str = "INFO", log_file: str = None):
    """配置全局日志。"""
    log_level = getattr(logging, level.upper(), logging.INFO)
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=log_level,
        format=LOG_FORMAT,
        datefmt=LOG_DATE_FORMAT,
        handlers=handlers,
        force=True,
    )


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    return int(raw)


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    return float(raw)


# --- Exact engine budgets ---
ATOM_BUDGET = _env_int("TOURNEY_ATOM_BUDGET", 10**6)
THRESHOLD_GRID_BUDGET = _env_int("TOURNEY_THRESHOLD_GRID_BUDGET", 5 * 10**6)
UPPER_SET_BUDGET = _env_int("TOURNEY_UPPER_SET_BUDGET", 2 * 10**5)  # per block
UPPER_SET_PAIR_BUDGET = _env_int("TOURNEY_UPPER_SET_PAIR_BUDGET", 10**7)  # per partition
NA_MAX_SUBSET_SIZE = _env_int("TOURNEY_NA_MAX_SUBSET_SIZE", 5)

# Cells of the (upper set x upper set) covariance block evaluated per numpy call
COVARIANCE_BLOCK_CELLS = _env_int("TOURNEY_COVARIANCE_BLOCK_CELLS", 1 << 22)

# --- Monte Carlo ---
MC_DEFAULT_REPS = _env_int("TOURNEY_MC_REPS", 10**5)
MC_DEFAULT_SEED = _env_int("TOURNEY_MC_SEED", 20230917)
MC_CONFIDENCE_LEVEL = _env_float("TOURNEY_MC_LEVEL", 0.99)
MC_CHUNK_SIZE = _env_int("TOURNEY_MC_CHUNK", 4096)

# --- Workers ---
DEFAULT_WORKERS = _env_int("TOURNEY_WORKERS", 1)


@dataclass(frozen=True)
class Budgets:
    """Search/atom budgets threaded through builders and checkers."""
    atoms: int = ATOM_BUDGET
    threshold_grid: int = THRESHOLD_GRID_BUDGET
    upper_sets: int = UPPER_SET_BUDGET
    upper_set_pairs: int = UPPER_SET_PAIR_BUDGET
    max_subset_size: int = NA_MAX_SUBSET_SIZE
    workers: int = DEFAULT_WORKERS

    def with_overrides(self, **kwargs) -> "Budgets":
        """Return a copy with the non-None keyword values replaced."""
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def to_dict(self) -> dict:
        return {
            "atoms": self.atoms,
            "threshold_grid": self.threshold_grid,
            "upper_sets": self.upper_sets,
            "upper_set_pairs": self.upper_set_pairs,
            "max_subset_size": self.max_subset_size,
        }


DEFAULT_BUDGETS = Budgets()
