import os
from pathlib import Path

# Exact enumeration
DEFAULT_CELL_BUDGET = 200_000_000
ENGINE_VERSION = "dense-dp-1"

# Formula evaluation
WORKING_DPS = 30
DEFAULT_OMEGA = 0.2
DEFAULT_ALPHA = 0.25

# Monte Carlo
DEFAULT_MC_SAMPLES = 100_000
DEFAULT_SEED = 20240101
MC_CHUNK_SIZE = 65_536

# Reports
DEFAULT_GRID = 21
DEFAULT_TABLE2_MAX_N = 8

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
CACHE_PATH_ENV = "SYMSTOCH_CACHE_PATH"


def get_cache_path() -> Path:
    """
    Determine the count cache location.
    Uses $SYMSTOCH_CACHE_PATH when set, otherwise ~/.cache/symstoch/counts.jsonl.
    """
    value = os.environ.get(CACHE_PATH_ENV)
    if value:
        return Path(value).expanduser()
    return Path.home() / ".cache" / "symstoch" / "counts.jsonl"
