from pathlib import Path

# ============================================================================
# APPLICATION METADATA
# ============================================================================

APP_NAME = "Merger Matching Toolkit"
APP_VERSION = "0.3.0"
APP_ORG = "merger-matching"

# ============================================================================
# PATHS
# ============================================================================

PROJECT_DIR = Path(__file__).parent

# Bundled reference data
DATA_DIR = PROJECT_DIR / "data"
COORDS_FILE = DATA_DIR / "coords.csv"
MERGERS_DIR = DATA_DIR / "mergers"

# Result document schemas
SCHEMAS_DIR = PROJECT_DIR / "validation" / "schemas"

LOG_DIR = Path("logs")

# ============================================================================
# REGIMES
# ============================================================================

# label -> (first year, last year), both inclusive
REGIMES: dict[str, tuple[int, int]] = {
    "1966-1990": (1966, 1990),
    "1991-2005": (1991, 2005),
    "2006-2022": (2006, 2022),
}

# ============================================================================
# MARKET CONSTRUCTION
# ============================================================================

# Lower end of every normalized characteristic; the upper end is 1
NORMALIZATION_FLOOR = 1e-6

LATITUDE_RANGE = (-90.0, 90.0)
LONGITUDE_RANGE = (-180.0, 180.0)

# ============================================================================
# SCORE & ESTIMATION
# ============================================================================

# Relative tolerance under which a pairwise inequality counts as a tie
TIE_TOLERANCE = 1e-12

DEFAULT_BOUNDS = (-10.0, 10.0)
DEFAULT_RUNS = 100
DEFAULT_POPULATION = 1000
DEFAULT_MAX_GENERATIONS = 200
# scipy's differential_evolution needs more than four members
MIN_POPULATION = 5

# Two maximizers closer than this (max-norm) are the same point
DEDUP_TOLERANCE = 1e-9

# Lattice step used to extend identified-set brackets
REFINEMENT_STEP = 1e-3

# Points kept per DE restart; brackets still track every maximizer seen
MAX_ARCHIVE_PER_RUN = 2_000

MAX_GRID_POINTS = 10**7
GRID_CHUNK_SIZE = 50_000

# ============================================================================
# ASSIGNMENT
# ============================================================================

DUAL_TOLERANCE = 1e-9
BRUTE_FORCE_MAX_N = 8

# ============================================================================
# COUNTERFACTUAL
# ============================================================================

DEFAULT_DRAWS = 100
DEFAULT_SHOCK_SD = 1.0

# ============================================================================
# SYNTHETIC MARKETS
# ============================================================================

SYNTHETIC_MAX_ATTEMPTS = 10
SYNTHETIC_LATITUDE_RANGE = (-60.0, 60.0)
SYNTHETIC_LONGITUDE_RANGE = (-180.0, 180.0)
SYNTHETIC_YEAR = 2000
# Single-year regime label accepted by the regime loader
SYNTHETIC_REGIME = f"{SYNTHETIC_YEAR}-{SYNTHETIC_YEAR}"
SYNTHETIC_COUNTRIES = 5
DEFAULT_TRIALS = 10

# ============================================================================
# RESULT DOCUMENTS
# ============================================================================

RESULT_SCHEMA_VERSION = 1
RESULT_FLOAT_DIGITS = 12

# ============================================================================
# EXIT CODES
# ============================================================================

EXIT_SUCCESS = 0
EXIT_INPUT_ERROR = 1
EXIT_NUMERICAL_ERROR = 2

# ============================================================================
# LOGGING CONFIGURATION
# ============================================================================

LOG_FILE_NAME = "merger_matching.log"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
LOG_MAX_BYTES = 10 * 1024 * 1024  # 10 MB
LOG_BACKUP_COUNT = 5
