# app_config.py

import logging
import os

import platformdirs

APP_NAME = "RelaySim"

# --- Per-user log storage ---

def get_log_dir(create: bool = True) -> str:
    """
    Returns the OS-appropriate log directory for RelaySim.
    - Windows: %LOCALAPPDATA%\\RelaySim\\Logs
    - Linux: ~/.local/state/RelaySim/log
    - Mac: ~/Library/Logs/RelaySim
    Creates the directory on request only; nothing is written at import.
    """
    log_dir = platformdirs.user_log_dir(APP_NAME, appauthor=False)
    if create:
        os.makedirs(log_dir, exist_ok=True)
    return log_dir


DEFAULT_LOG_FILENAME = "relaysim.log"


def get_default_log_path() -> str:
    return os.path.join(get_log_dir(), DEFAULT_LOG_FILENAME)


LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


_installed_handlers: list[logging.Handler] = []


def configure_logging(verbose: bool = False, log_file: str | None = None) -> None:
    """
    Installs the stderr handler and, optionally, a file handler on the root
    logger. Calling it again replaces only the handlers it installed.
    """
    root = logging.getLogger()
    while _installed_handlers:
        handler = _installed_handlers.pop()
        root.removeHandler(handler)
        handler.close()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)

    formatter = logging.Formatter(LOG_FORMAT)
    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(formatter)
    _installed_handlers.append(stream_handler)

    if log_file:
        parent_dir = os.path.dirname(log_file)
        if parent_dir:
            os.makedirs(parent_dir, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(formatter)
        _installed_handlers.append(file_handler)

    for handler in _installed_handlers:
        root.addHandler(handler)


# --- Simulation defaults ---

DEFAULT_TRIALS = 100_000
DEFAULT_L = 20
DEFAULT_PATHLOSS = 4.0
DEFAULT_RTILDE = 0.1
DEFAULT_G = 1.0
DEFAULT_SEED = 0
DEFAULT_CONFIDENCE = 0.95
DEFAULT_CURVE_STEP = 0.01

# Trials per work unit handed to a pool worker
DEFAULT_CHUNK_SIZE = 2_000

MAX_SEED = 2**64 - 1

# --- Schemes ---

SCHEME_DIRECT = "direct"
SCHEME_SUCCESSIVE_ML = "successive_ml"
SCHEME_DBLAST = "dblast"
SCHEME_STC = "stc"
SCHEME_MIMO22 = "mimo22"
SCHEME_LOWER_BOUND = "lower_bound"

SCHEMES = (
    SCHEME_DIRECT, SCHEME_SUCCESSIVE_ML, SCHEME_DBLAST,
    SCHEME_STC, SCHEME_MIMO22, SCHEME_LOWER_BOUND,
)

# Command-line spelling -> scheme name
SCHEME_ALIASES = {
    "direct": SCHEME_DIRECT,
    "successive": SCHEME_SUCCESSIVE_ML,
    "successive_ml": SCHEME_SUCCESSIVE_ML,
    "dblast": SCHEME_DBLAST,
    "stc": SCHEME_STC,
    "mimo22": SCHEME_MIMO22,
    "lower_bound": SCHEME_LOWER_BOUND,
}

# Schemes whose constraint probability is defined
CONSTRAINT_SCHEMES = (SCHEME_SUCCESSIVE_ML, SCHEME_DBLAST, SCHEME_STC)
CONSTRAINT_SUFFIX = ":constraint"

RELAY_PERFECT = "perfect"
RELAY_CONSTRAINED = "constrained"
RELAY_MODES = (RELAY_PERFECT, RELAY_CONSTRAINED)

RATE_FIXED = "fixed"
RATE_MULTIPLEXING = "mux"

CONSTRAINT_EXACT = "exact"
CONSTRAINT_APPROX = "approx"
CONSTRAINT_FORMS = (CONSTRAINT_EXACT, CONSTRAINT_APPROX)

# --- Output formats ---

CSV_FLOAT_FORMAT = "%.10g"
CSV_LINE_TERMINATOR = "\n"

OUTAGE_CSV_COLUMNS = (
    "snr_db", "scheme", "rate_mode", "rate_value", "L", "rtilde",
    "trials", "outage_count", "p_hat", "ci_low", "ci_high",
)
DIVERSITY_CSV_COLUMNS = ("snr_db", "scheme", "rate_mode", "rate_value", "d_hat")
DMT_CSV_COLUMNS = ("curve", "kind", "r", "d")

DMT_CURVE_NAMES = ("mimo:2x2", "stc", "upper", "lower_bound_transform")
