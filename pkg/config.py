"""
Configuration file for the coarse-geometry experiment toolkit
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_flag(name: str, default: str = "0") -> bool:
    return os.getenv(name, default).strip().lower() in {"1", "true", "yes", "on"}


# Output Configuration
DEFAULT_OUTPUT_DIR = os.getenv("CT_OUTPUT_DIR", "./ct_output")
DEFAULT_FORMAT = "json"

# Determinism
DEFAULT_SEED = int(os.getenv("CT_SEED", "0"))

# Experiment Configuration
DEFAULT_BUDGET = int(os.getenv("CT_BUDGET", "200"))
DEFAULT_JOBS = int(os.getenv("CT_JOBS", "1"))
PAIR_SAMPLE_COUNT = 500

# Logging
LOG_LEVEL = os.getenv("CT_LOG_LEVEL", "INFO")
SHOW_PROGRESS = _env_flag("CT_PROGRESS")

# Metric scan limits
EXHAUSTIVE_DELTA_LIMIT = 200
SAMPLED_DELTA_COUNT = 20000
SAMPLE_POOL_SIZE = 256
MATRIX_LIMIT = 4000
ROW_CACHE_SIZE = 512

# Tree-of-spaces diagnostics
DENSITY_FLAG_THRESHOLD = 2

# Horoball oracle scans are limited to small members
HOROBALL_SCAN_LIMIT = 50
