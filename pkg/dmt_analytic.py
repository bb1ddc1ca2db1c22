# dmt_analytic.py

"""Closed-form diversity-multiplexing tradeoff curves and the 2x2-based outage bound."""

import math
import re
from dataclasses import dataclass

import numpy as np

import app_config
from sim_errors import ConfigError


@dataclass(frozen=True)
class DmtCurve:
    """
    Piecewise-linear d(r) through `breakpoints` (r strictly increasing,
    d non-increasing and non-negative). Zero beyond the last breakpoint.
    """

    name: str
    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.breakpoints:
            raise ConfigError(f"Curve '{self.name}' has no breakpoints.")
        rs = [r for r, _ in self.breakpoints]
        ds = [d for _, d in self.breakpoints]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ConfigError(f"Curve '{self.name}': multiplexing gains must be strictly increasing.")
        if any(b > a for a, b in zip(ds, ds[1:])) or min(ds) < 0:
            raise ConfigError(f"Curve '{self.name}': diversity must be non-increasing and non-negative.")

    @property
    def max_multiplexing(self) -> float:
        return self.breakpoints[-1][0]

    def __call__(self, r: float) -> float:
        if r < self.breakpoints[0][0]:
            raise ConfigError(f"Curve '{self.name}' is undefined at r={r}.")
        if r > self.max_multiplexing:
            return 0.0
        rs, ds = zip(*self.breakpoints)
        return float(np.interp(r, rs, ds))

    def sample(self, step: float = app_config.DEFAULT_CURVE_STEP) -> list[tuple[float, float]]:
        """(r, d) on a uniform r grid from the first to the last breakpoint, both included."""
        if step <= 0:
            raise ConfigError(f"Sampling step must be positive, got {step}.")
        start, stop = self.breakpoints[0][0], self.max_multiplexing
        count = int(math.floor((stop - start) / step + 1e-9))
        grid = [round(start + k * step, 12) for k in range(count + 1)]
        if grid[-1] < stop:
            grid.append(stop)
        return [(r, self(r)) for r in grid]


def _check_range(r: float, upper: float, label: str) -> None:
    if not math.isfinite(r) or r < 0 or r > upper:
        raise ConfigError(f"{label}: multiplexing gain {r} outside [0, {upper:g}].")


def mimo_curve(nt: int, nr: int) -> DmtCurve:
    if nt < 1 or nr < 1:
        raise ConfigError(f"Antenna counts must be positive, got {nt}x{nr}.")
    points = tuple((float(k), float((nt - k) * (nr - k))) for k in range(min(nt, nr) + 1))
    return DmtCurve(f"mimo:{nt}x{nr}", points)


def mimo_dmt(nt: int, nr: int, r: float) -> float:
    """Optimal nt x nr Rayleigh MIMO tradeoff through (k, (nt-k)(nr-k))."""
    _check_range(r, min(nt, nr), f"{nt}x{nr} MIMO")
    return mimo_curve(nt, nr)(r)


def upper_bound_curve() -> DmtCurve:
    return DmtCurve("upper", ((0.0, 4.0), (1.0, 0.0)))


def upper_bound_dmt(r: float) -> float:
    """4(1 - r)^+: best any half-duplex scheme can do in this network."""
    if not math.isfinite(r) or r < 0:
        raise ConfigError(f"Upper bound: multiplexing gain must be non-negative, got {r}.")
    return 4.0 * max(1.0 - r, 0.0)


def stc_curve() -> DmtCurve:
    return DmtCurve("stc", ((0.0, 6.0), (0.5, 3.0), (1.0, 1.0), (1.5, 0.0)))


def stc_dmt(r: float) -> float:
    """Two-slot space-time-coding protocol with a correctly decoding relay."""
    _check_range(r, 1.5, "Space-time coding")
    if r <= 0.5:
        return 6.0 - 6.0 * r
    if r <= 1.0:
        return 5.0 - 4.0 * r
    return 3.0 - 2.0 * r


def direct_curve() -> DmtCurve:
    return DmtCurve("direct", mimo_curve(1, 2).breakpoints)


def lower_bound_curve() -> DmtCurve:
    # 2P - P^2 decays with the same exponent as P, so the curve is the 2x2 one.
    return DmtCurve("lower_bound_transform", mimo_curve(2, 2).breakpoints)


def outage_lower_bound(p22: float) -> float:
    """Outage bound 2 P - P^2 for the successive scheme, from the 2x2 MIMO outage P."""
    if not math.isfinite(p22) or p22 < 0 or p22 > 1:
        raise ConfigError(f"Probability must lie in [0, 1], got {p22}.")
    return 2.0 * p22 - p22 * p22


_MIMO_NAME = re.compile(r"^mimo:(\d+)x(\d+)$", re.IGNORECASE)


def curve_by_name(name: str) -> DmtCurve:
    """Resolves `mimo:NTxNR`, `stc`, `upper`, `direct` or `lower_bound_transform`."""
    key = name.strip().lower()
    match = _MIMO_NAME.match(key)
    if match:
        return mimo_curve(int(match.group(1)), int(match.group(2)))
    named = {
        "stc": stc_curve,
        "upper": upper_bound_curve,
        "direct": direct_curve,
        "lower_bound_transform": lower_bound_curve,
    }
    if key not in named:
        raise ConfigError(
            f"Unknown curve '{name}'. Use mimo:NTxNR, stc, upper, direct or lower_bound_transform."
        )
    return named[key]()
