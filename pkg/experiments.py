# experiments.py

"""
Monte Carlo estimators over block-fading trials: outage curves per scheme,
probability that the relay's SNR constraint holds, and finite-SNR
diversity read off an outage curve.

Every trial is a pure function of (config, trial index): its channel comes
from a counter-based substream, and one draw is evaluated at every SNR
point. Workers return per-SNR counters that are summed, so the result
does not depend on how trials are split.
"""

import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Callable, Iterable

import numpy as np
import pandas as pd
from scipy import stats

import app_config
from channel import (
    ChannelRealization, FrameSpec, Geometry, assemble_stc_matrix,
    assemble_successive_matrix, sample_trial,
)
from dblast import layer_schedule, mmse_sic_layer_rates_sweep
from dmt_analytic import outage_lower_bound
from mimo_info import (
    constraint_threshold_stc, constraint_threshold_successive,
    constraint_threshold_successive_approx, mutual_information_sweep,
)
from sim_errors import ConfigError, NumericalError, TrialError

logger = logging.getLogger(__name__)

ESTIMATOR_OUTAGE = "outage"
ESTIMATOR_CONSTRAINT = "constraint"

StatusCallback = Callable[[int, int], None]


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedRate:
    """Same spectral efficiency R (bits/slot) at every SNR."""

    R: float
    mode = app_config.RATE_FIXED

    def __post_init__(self):
        if not math.isfinite(self.R) or self.R < 0:
            raise ConfigError(f"Rate must be non-negative bits/slot, got {self.R}.")

    @property
    def value(self) -> float:
        return self.R

    def rates(self, etas: np.ndarray) -> np.ndarray:
        return np.full(np.shape(etas), float(self.R))


@dataclass(frozen=True)
class MultiplexingRate:
    """Finite-SNR rate law R = r log2(1 + g eta)."""

    r: float
    g: float = app_config.DEFAULT_G
    mode = app_config.RATE_MULTIPLEXING

    def __post_init__(self):
        if not math.isfinite(self.r) or self.r < 0:
            raise ConfigError(f"Multiplexing gain must be non-negative, got {self.r}.")
        if not math.isfinite(self.g) or self.g <= 0:
            raise ConfigError(f"Array gain g must be positive, got {self.g}.")

    @property
    def value(self) -> float:
        return self.r

    def rates(self, etas: np.ndarray) -> np.ndarray:
        return self.r * np.log2(1.0 + self.g * np.asarray(etas, dtype=float))


RateMode = FixedRate | MultiplexingRate


def snr_grid(start_db: float, stop_db: float, step_db: float) -> tuple[float, ...]:
    """Inclusive dB grid start, start+step, ... <= stop."""
    if not all(math.isfinite(v) for v in (start_db, stop_db, step_db)):
        raise ConfigError("SNR range values must be finite.")
    if step_db <= 0:
        raise ConfigError(f"SNR step must be positive, got {step_db}.")
    if stop_db < start_db:
        raise ConfigError(f"SNR range must be ascending, got {start_db}:{stop_db}.")
    count = int(math.floor((stop_db - start_db) / step_db + 1e-9)) + 1
    return tuple(round(start_db + k * step_db, 10) for k in range(count))


@dataclass(frozen=True)
class SimConfig:
    snr_db: tuple[float, ...]
    scheme: str
    rate_mode: RateMode | None = None
    L: int = app_config.DEFAULT_L
    trials: int = app_config.DEFAULT_TRIALS
    master_seed: int = app_config.DEFAULT_SEED
    geometry: Geometry = field(
        default_factory=lambda: Geometry(app_config.DEFAULT_RTILDE, app_config.DEFAULT_PATHLOSS)
    )
    relay_mode: str = app_config.RELAY_PERFECT
    constraint_form: str = app_config.CONSTRAINT_EXACT
    workers: int = 1
    chunk_size: int = app_config.DEFAULT_CHUNK_SIZE
    confidence: float = app_config.DEFAULT_CONFIDENCE

    def __post_init__(self):
        grid = tuple(float(v) for v in self.snr_db)
        if not grid:
            raise ConfigError("SNR grid is empty.")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("SNR grid must be strictly increasing.")
        object.__setattr__(self, "snr_db", grid)

        scheme = app_config.SCHEME_ALIASES.get(self.scheme)
        if scheme is None:
            raise ConfigError(f"Unknown scheme '{self.scheme}'. Choose from {', '.join(app_config.SCHEMES)}.")
        object.__setattr__(self, "scheme", scheme)

        FrameSpec(self.L)
        if self.trials < 1:
            raise ConfigError(f"Trial count must be at least 1, got {self.trials}.")
        if not 0 <= self.master_seed <= app_config.MAX_SEED:
            raise ConfigError(f"Seed must be an unsigned 64-bit integer, got {self.master_seed}.")
        if self.relay_mode not in app_config.RELAY_MODES:
            raise ConfigError(f"Unknown relay mode '{self.relay_mode}'.")
        if self.constraint_form not in app_config.CONSTRAINT_FORMS:
            raise ConfigError(f"Unknown constraint form '{self.constraint_form}'.")
        if self.workers < 0:
            raise ConfigError(f"Worker count must be >= 0 (0 = all cores), got {self.workers}.")
        if self.chunk_size < 1:
            raise ConfigError(f"Chunk size must be at least 1, got {self.chunk_size}.")
        if not 0 < self.confidence < 1:
            raise ConfigError(f"Confidence level must lie in (0, 1), got {self.confidence}.")

    @property
    def etas(self) -> np.ndarray:
        return 10.0 ** (np.asarray(self.snr_db) / 10.0)

    @property
    def frame(self) -> FrameSpec:
        return FrameSpec(self.L)

    @property
    def effective_workers(self) -> int:
        return self.workers or (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    snr_db: float
    trials: int
    outage_count: int
    p_hat: float
    ci_low: float
    ci_high: float
    zero_count: bool = False


@dataclass(frozen=True)
class OutageCurve:
    scheme: str
    rate_mode: str
    rate_value: float
    L: int
    rtilde: float
    points: tuple[CurvePoint, ...]

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def p_hat(self) -> np.ndarray:
        return np.array([p.p_hat for p in self.points])

    def point_at(self, snr_db: float) -> CurvePoint:
        for point in self.points:
            if math.isclose(point.snr_db, snr_db, abs_tol=1e-9):
                return point
        raise KeyError(f"No point at {snr_db} dB on the {self.scheme} curve.")

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "snr_db": p.snr_db,
                "scheme": self.scheme,
                "rate_mode": self.rate_mode,
                "rate_value": float(self.rate_value),
                "L": int(self.L),
                "rtilde": float(self.rtilde),
                "trials": int(p.trials),
                "outage_count": int(p.outage_count),
                "p_hat": p.p_hat,
                "ci_low": p.ci_low,
                "ci_high": p.ci_high,
            }
            for p in self.points
        ]
        return pd.DataFrame(rows, columns=list(app_config.OUTAGE_CSV_COLUMNS))


@dataclass(frozen=True)
class DiversityEstimate:
    points: tuple[tuple[float, float], ...]
    skipped: tuple[float, ...]


@dataclass(frozen=True)
class RunSummary:
    estimator: str
    scheme: str
    trials: int
    counts: tuple[int, ...]
    rows: int
    wall_time_s: float
    output: str


def wilson_interval(successes: int, trials: int,
                    confidence: float = app_config.DEFAULT_CONFIDENCE) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion, clipped to [0, 1]."""
    if trials <= 0:
        return 0.0, 1.0
    z = float(stats.norm.ppf(1.0 - (1.0 - confidence) / 2.0))
    p_hat = successes / trials
    denominator = 1.0 + z * z / trials
    center = (p_hat + z * z / (2.0 * trials)) / denominator
    margin = (z / denominator) * math.sqrt(p_hat * (1.0 - p_hat) / trials + z * z / (4.0 * trials * trials))
    lower = max(0.0, min(center - margin, p_hat))
    upper = min(1.0, max(center + margin, p_hat))
    return lower, upper


# ---------------------------------------------------------------------------
# Per-trial evaluation (runs inside workers)
# ---------------------------------------------------------------------------

def _scheme_outage(config: SimConfig, ch: ChannelRealization,
                   etas: np.ndarray, rates: np.ndarray) -> np.ndarray:
    scheme = config.scheme
    frame = config.frame
    L = frame.L
    if scheme == app_config.SCHEME_DIRECT:
        gain = float(np.sum(np.abs(ch.h_sd) ** 2))
        return np.log2(1.0 + etas * gain) < rates
    if scheme == app_config.SCHEME_SUCCESSIVE_ML:
        info = mutual_information_sweep(assemble_successive_matrix(ch, frame), etas)
        return info < rates * (L + 1)
    if scheme == app_config.SCHEME_DBLAST:
        layer_rates = mmse_sic_layer_rates_sweep(assemble_successive_matrix(ch, frame), etas, layer_schedule(L))
        return np.any(layer_rates < (rates * (L + 1) / L)[:, None], axis=1)
    if scheme == app_config.SCHEME_STC:
        return mutual_information_sweep(assemble_stc_matrix(ch), etas) < 2.0 * rates
    # mimo22 and lower_bound: the relay-destination block is an i.i.d. 2x2 Rayleigh draw
    return mutual_information_sweep(ch.h_rd, etas) < rates


def constraint_threshold(config: SimConfig, ch: ChannelRealization) -> float:
    """SNR threshold of the decode constraint that matches the configured scheme."""
    if config.scheme == app_config.SCHEME_STC:
        return constraint_threshold_stc(ch)
    if config.constraint_form == app_config.CONSTRAINT_APPROX:
        return constraint_threshold_successive_approx(ch)
    return constraint_threshold_successive(ch)


def _trial_hits(config: SimConfig, estimator: str, ch: ChannelRealization,
                etas: np.ndarray, rates: np.ndarray | None) -> np.ndarray:
    if estimator == ESTIMATOR_CONSTRAINT:
        return constraint_threshold(config, ch) >= etas
    hits = _scheme_outage(config, ch, etas, rates)
    if config.relay_mode == app_config.RELAY_CONSTRAINED and config.scheme in app_config.CONSTRAINT_SCHEMES:
        hits = hits | (constraint_threshold(config, ch) < etas)
    return hits


def _run_chunk(task: tuple[SimConfig, str, int, int]) -> np.ndarray:
    config, estimator, start, stop = task
    etas = config.etas
    rates = config.rate_mode.rates(etas) if estimator == ESTIMATOR_OUTAGE else None
    counts = np.zeros(etas.size, dtype=np.int64)
    for trial_index in range(start, stop):
        ch = sample_trial(config.master_seed, trial_index, config.geometry)
        try:
            counts += _trial_hits(config, estimator, ch, etas, rates)
        except NumericalError as e:
            snr_db = 10.0 * math.log10(e.eta) if e.eta else None
            raise TrialError(e.args[0], trial_index, snr_db) from e
    return counts


def _chunks(config: SimConfig, estimator: str) -> list[tuple[SimConfig, str, int, int]]:
    return [
        (config, estimator, start, min(start + config.chunk_size, config.trials))
        for start in range(0, config.trials, config.chunk_size)
    ]


def _run_trials(config: SimConfig, estimator: str,
                status_callback: StatusCallback | None = None) -> np.ndarray:
    tasks = _chunks(config, estimator)
    workers = min(config.effective_workers, len(tasks))
    logger.info(
        "Running %d %s trials for '%s' over %d SNR points on %d worker(s).",
        config.trials, estimator, config.scheme, len(config.snr_db), workers,
    )
    counts = np.zeros(len(config.snr_db), dtype=np.int64)
    done = 0

    def _absorb(task, chunk_counts):
        nonlocal done, counts
        counts = counts + chunk_counts
        done += task[3] - task[2]
        logger.debug("Finished trials %d-%d (%d/%d).", task[2], task[3] - 1, done, config.trials)
        if status_callback:
            status_callback(done, config.trials)

    if workers <= 1:
        for task in tasks:
            _absorb(task, _run_chunk(task))
    else:
        with Pool(processes=workers) as pool:
            for task, chunk_counts in zip(tasks, pool.imap(_run_chunk, tasks)):
                _absorb(task, chunk_counts)
    return counts


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def _build_curve(config: SimConfig, label: str, counts: np.ndarray, rate: RateMode | None,
                 transform: Callable[[float], float] | None = None) -> OutageCurve:
    points = []
    for snr_db, count in zip(config.snr_db, counts):
        count = int(count)
        p_hat = count / config.trials
        ci_low, ci_high = wilson_interval(count, config.trials, config.confidence)
        if transform is not None:
            p_hat, ci_low, ci_high = transform(p_hat), transform(ci_low), transform(ci_high)
        if count == 0:
            logger.warning(
                "No events at %g dB for '%s' in %d trials; p_hat=0 with upper bound %.3g.",
                snr_db, label, config.trials, ci_high,
            )
        points.append(CurvePoint(snr_db, config.trials, count, p_hat, ci_low, ci_high, count == 0))

    return OutageCurve(
        scheme=label,
        rate_mode=rate.mode if rate is not None else "none",
        rate_value=rate.value if rate is not None else 0.0,
        L=config.L,
        rtilde=config.geometry.rtilde,
        points=tuple(points),
    )


def estimate_outage(config: SimConfig, status_callback: StatusCallback | None = None) -> OutageCurve:
    """
    Outage probability per SNR point with Wilson intervals.

    With relay_mode=constrained, a trial whose decode threshold lies below
    eta also counts as an outage (successive, D-BLAST and STC only). The
    lower_bound scheme reports 2P - P^2 of the 2x2 estimate, intervals
    mapped through the same increasing transform.
    """
    if config.rate_mode is None:
        raise ConfigError("Outage estimation needs a rate mode (fixed rate or multiplexing gain).")
    counts = _run_trials(config, ESTIMATOR_OUTAGE, status_callback)
    transform = outage_lower_bound if config.scheme == app_config.SCHEME_LOWER_BOUND else None
    return _build_curve(config, config.scheme, counts, config.rate_mode, transform)


def estimate_constraint_probability(config: SimConfig,
                                    status_callback: StatusCallback | None = None) -> OutageCurve:
    """Fraction of channel draws whose decode threshold is at least eta."""
    if config.scheme not in app_config.CONSTRAINT_SCHEMES:
        raise ConfigError(
            f"Constraint probability is defined for {', '.join(app_config.CONSTRAINT_SCHEMES)}, "
            f"not '{config.scheme}'."
        )
    counts = _run_trials(config, ESTIMATOR_CONSTRAINT, status_callback)
    # Constraint curves carry no rate whatever the config holds
    return _build_curve(config, config.scheme + app_config.CONSTRAINT_SUFFIX, counts, None)


def _log_eta(snr_db: float) -> float:
    return snr_db * math.log(10.0) / 10.0


def estimate_finite_snr_diversity(curve: OutageCurve) -> DiversityEstimate:
    """
    d = -d ln P / d ln eta by central differences over the points with
    p_hat > 0; points with no events are skipped and listed.
    """
    usable = [p for p in curve.points if p.p_hat > 0]
    skipped = tuple(p.snr_db for p in curve.points if p.p_hat <= 0)
    if len(usable) < 3:
        raise ConfigError(
            f"Need at least 3 SNR points with events to estimate diversity, got {len(usable)}."
        )
    if skipped:
        logger.info("Diversity estimate for '%s' skips zero-count points: %s", curve.scheme, skipped)

    estimates = []
    for before, here, after in zip(usable, usable[1:], usable[2:]):
        slope = (math.log(after.p_hat) - math.log(before.p_hat)) / (
            _log_eta(after.snr_db) - _log_eta(before.snr_db)
        )
        estimates.append((here.snr_db, -slope + 0.0))
    return DiversityEstimate(points=tuple(estimates), skipped=skipped)


def window_diversity(curve: OutageCurve, lo_db: float, hi_db: float) -> float:
    """Log-log slope between the outermost points with events inside [lo_db, hi_db]."""
    inside = [p for p in curve.points if lo_db - 1e-9 <= p.snr_db <= hi_db + 1e-9 and p.p_hat > 0]
    if len(inside) < 2:
        raise ConfigError(f"Need two points with events between {lo_db} and {hi_db} dB.")
    first, last = inside[0], inside[-1]
    slope = (math.log(last.p_hat) - math.log(first.p_hat)) / (_log_eta(last.snr_db) - _log_eta(first.snr_db))
    return -slope + 0.0


# ---------------------------------------------------------------------------
# CSV input / output
# ---------------------------------------------------------------------------

def format_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(
        index=False,
        float_format=app_config.CSV_FLOAT_FORMAT,
        lineterminator=app_config.CSV_LINE_TERMINATOR,
    )


def write_csv(frame: pd.DataFrame, output_sink) -> str:
    """
    Writes `frame` to a path (atomically: temp file then rename), to an open
    text stream, or to standard output when the sink is None or "-".
    Returns a description of where the rows went.
    """
    text = format_csv(frame)
    if output_sink is None or output_sink == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return "<stdout>"
    if hasattr(output_sink, "write"):
        output_sink.write(text)
        return getattr(output_sink, "name", "<stream>")

    path = os.path.abspath(os.fspath(output_sink))
    target_dir = os.path.dirname(path)
    tmp_path = None
    try:
        os.makedirs(target_dir, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", newline="", dir=target_dir,
            prefix=".relaysim-", suffix=".tmp", delete=False,
        ) as tmp:
            tmp_path = tmp.name
            tmp.write(text)
        os.replace(tmp_path, path)
    except OSError as e:
        if tmp_path and os.path.exists(tmp_path):
            os.remove(tmp_path)
        logger.error("Could not write results to %s: %s", path, e)
        raise OSError(e.errno, f"Could not write results to {path}: {e.strerror or e}") from e
    return path


def _curves_from_frame(frame: pd.DataFrame) -> list[OutageCurve]:
    curves = []
    keys = ["scheme", "rate_mode", "rate_value", "L", "rtilde"]
    for (scheme, rate_mode, rate_value, L, rtilde), group in frame.groupby(keys, sort=False):
        group = group.sort_values("snr_db")
        points = tuple(
            CurvePoint(
                snr_db=float(row.snr_db),
                trials=int(row.trials),
                outage_count=int(row.outage_count),
                p_hat=float(row.p_hat),
                ci_low=float(row.ci_low),
                ci_high=float(row.ci_high),
                zero_count=int(row.outage_count) == 0,
            )
            for row in group.itertuples(index=False)
        )
        curves.append(OutageCurve(str(scheme), str(rate_mode), float(rate_value), int(L), float(rtilde), points))
    return curves


def read_curves(path) -> list[OutageCurve]:
    """Loads an outage CSV back into curves, one per (scheme, rate, L, rtilde) group."""
    try:
        frame = pd.read_csv(path)
    except OSError as e:
        logger.error("Could not read %s: %s", path, e)
        raise
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise ConfigError(f"{path}: not a readable CSV ({e}).") from e
    missing = [c for c in app_config.OUTAGE_CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError(f"{path} is missing columns: {', '.join(missing)}.")

    try:
        return _curves_from_frame(frame)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: malformed outage row ({e}).") from e


def diversity_frame(curves: Iterable[OutageCurve]) -> pd.DataFrame:
    rows = []
    for curve in curves:
        for snr_db, d_hat in estimate_finite_snr_diversity(curve).points:
            rows.append({
                "snr_db": snr_db,
                "scheme": curve.scheme,
                "rate_mode": curve.rate_mode,
                "rate_value": float(curve.rate_value),
                "d_hat": d_hat,
            })
    return pd.DataFrame(rows, columns=list(app_config.DIVERSITY_CSV_COLUMNS))


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def run(config: SimConfig, output_sink=None, estimator: str = ESTIMATOR_OUTAGE,
        status_callback: StatusCallback | None = None) -> RunSummary:
    """Runs one estimator, writes its CSV and reports counts and wall time."""
    started = time.perf_counter()
    if estimator == ESTIMATOR_OUTAGE:
        curve = estimate_outage(config, status_callback)
    elif estimator == ESTIMATOR_CONSTRAINT:
        curve = estimate_constraint_probability(config, status_callback)
    else:
        raise ConfigError(f"Unknown estimator '{estimator}'.")

    frame = curve.to_frame()
    output = write_csv(frame, output_sink)
    elapsed = time.perf_counter() - started
    logger.info("Wrote %d rows to %s in %.2f s.", len(frame), output, elapsed)
    return RunSummary(
        estimator=estimator,
        scheme=curve.scheme,
        trials=config.trials,
        counts=tuple(p.outage_count for p in curve.points),
        rows=len(frame),
        wall_time_s=elapsed,
        output=output,
    )
