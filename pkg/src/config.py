"""
Configuration
"""
from pathlib import Path

PROJECT_ROOT = Path(__file__).parent.parent

OUTPUT_DIR = PROJECT_ROOT / "outputs" / "tables"
PLOTS_DIR = PROJECT_ROOT / "outputs" / "plots"
CONFIG_DIR = PROJECT_ROOT / "configs"

# Gradient ascent
FD_STEP = 1e-7
LEARNING_RATE = 1e-3
MAX_ITERATIONS = 1_000_000
REDUCED_MAX_ITERATIONS = 10_000
VALUE_TOLERANCE = 1e-9
RENORMALIZE_DEPTH_THRESHOLD = 50
PROJECTION_ROUNDS = 100
CAPACITY_TOLERANCE = 1e-9
POLISH_FTOL = 1e-13
POLISH_MAX_ITERATIONS = 500

# Recursion numerics
NORMALIZATION_TOLERANCE = 1e-12
FIXED_POINT_TOLERANCE = 1e-12
EXACT_MODE_MAX_DEPTH = 12

# Monte Carlo
MC_MAX_NODES = 10**8
MC_CHUNK_RUNS = 1000
MC_CHUNK_NODE_BUDGET = 4_000_000
ENUMERATION_MAX_NODES = 14
DEFAULT_MC_RUNS = 10_000

# Output
SIGNIFICANT_DIGITS = 12
FLOAT_FORMAT = f"%.{SIGNIFICANT_DIGITS}g"
NA_SENTINEL = "NA"
THREADS_ENV_VAR = "BDTP_THREADS"

# Default sweep grids (loss-map axes are approximate)
DEFAULT_B_MAX = 20
DEFAULT_HEURISTICS = [2, 20]
LOSS_MAP_CAPACITIES = [10, 30, 100, 300, 1000, 3000, 10000]
LOSS_MAP_FAMILIES = [("plus", 1), ("minus", 2), ("minus", 4), ("minus", 9), ("minus", 19), ("minus", 99)]
