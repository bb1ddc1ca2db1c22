# channel.py

"""
Block-fading channel draws for the one-source / two-antenna-relay /
two-antenna-destination network, and the per-frame transfer matrices
of the successive-relaying and space-time-coding schemes.

Matrices are returned without the sqrt(eta) prefactor; the consumers in
mimo_info and dblast apply it, so one draw serves a whole SNR sweep.
"""

from dataclasses import dataclass

import numpy as np

import app_config
from sim_errors import ConfigError

# Complex coefficients per realization: 2 source-dest, 2 source-relay, 4 relay-dest
COEFFS_PER_REALIZATION = 8


@dataclass(frozen=True)
class Geometry:
    """Source-relay distance (destination at unit distance from both) and path-loss exponent."""

    rtilde: float = 1.0
    pathloss_exponent: float = app_config.DEFAULT_PATHLOSS

    def __post_init__(self):
        if not np.isfinite(self.rtilde) or self.rtilde <= 0:
            raise ConfigError(f"rtilde must be a positive distance, got {self.rtilde!r}.")
        if not np.isfinite(self.pathloss_exponent) or self.pathloss_exponent <= 0:
            raise ConfigError(f"Path-loss exponent must be positive, got {self.pathloss_exponent!r}.")

    @property
    def amplitude_gain(self) -> float:
        """Amplitude factor applied to source-relay coefficients."""
        return float(self.rtilde ** (-self.pathloss_exponent / 2.0))

    @property
    def power_gain(self) -> float:
        return float(self.rtilde ** (-self.pathloss_exponent))


@dataclass(frozen=True)
class FrameSpec:
    """L codewords per frame, sent over L+1 slots."""

    L: int

    def __post_init__(self):
        if isinstance(self.L, bool) or not isinstance(self.L, (int, np.integer)) or self.L < 1:
            raise ConfigError(f"Frame length L must be an integer >= 1, got {self.L!r}.")

    @property
    def slots(self) -> int:
        return int(self.L) + 1


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """
    One frame's worth of coefficients.
      h_sd[j]    = h_{s,d_j}
      h_sr[i]    = h_{s,r_i}, path loss already applied
      h_rd[i, j] = h_{r_i,d_j}
    """

    h_sd: np.ndarray
    h_sr: np.ndarray
    h_rd: np.ndarray

    def __post_init__(self):
        shapes = {"h_sd": (2,), "h_sr": (2,), "h_rd": (2, 2)}
        for name, shape in shapes.items():
            value = np.array(getattr(self, name), dtype=np.complex128)
            if value.shape != shape:
                raise ConfigError(f"{name} must have shape {shape}, got {value.shape}.")
            if not np.all(np.isfinite(value)):
                raise ConfigError(f"{name} contains non-finite entries.")
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def from_values(cls, h_sd, h_sr, h_rd) -> "ChannelRealization":
        return cls(np.asarray(h_sd), np.asarray(h_sr), np.asarray(h_rd))

    def identical_to(self, other: "ChannelRealization") -> bool:
        """Bitwise equality of all coefficients."""
        return all(
            getattr(self, name).tobytes() == getattr(other, name).tobytes()
            for name in ("h_sd", "h_sr", "h_rd")
        )


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

def trial_stream(master_seed: int, trial_index: int) -> np.random.Generator:
    """
    Counter-based substream for one trial: Philox keyed by the master seed,
    with the trial index in counter word 2. Each trial owns 2**128 blocks,
    so streams never overlap and need no coordination between workers.
    """
    if not 0 <= master_seed <= app_config.MAX_SEED:
        raise ConfigError(f"Master seed must be an unsigned 64-bit integer, got {master_seed!r}.")
    if trial_index < 0:
        raise ConfigError(f"Trial index must be non-negative, got {trial_index!r}.")
    counter = np.array([0, 0, trial_index, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=int(master_seed), counter=counter))


def sample_realization(stream: np.random.Generator, geometry: Geometry) -> ChannelRealization:
    """Draws all eight coefficients i.i.d. CN(0, 1), then scales the source-relay pair."""
    draws = stream.normal(0.0, 1.0 / np.sqrt(2.0), size=(2, COEFFS_PER_REALIZATION))
    coeffs = draws[0] + 1j * draws[1]
    h_sd = coeffs[0:2]
    h_sr = coeffs[2:4] * geometry.amplitude_gain
    h_rd = coeffs[4:8].reshape(2, 2)
    return ChannelRealization(h_sd, h_sr, h_rd)


def sample_trial(master_seed: int, trial_index: int, geometry: Geometry) -> ChannelRealization:
    return sample_realization(trial_stream(master_seed, trial_index), geometry)


# ---------------------------------------------------------------------------
# Transfer matrices
# ---------------------------------------------------------------------------

def relay_antenna_for_message(message: int) -> int:
    """Relay antenna (1 or 2) that receives and forwards message `message` (1-based)."""
    return 1 if message % 2 == 1 else 2


def assemble_successive_matrix(ch: ChannelRealization, frame: FrameSpec | int) -> np.ndarray:
    """
    Banded 2(L+1) x 2L matrix of the successive-relaying frame.

    Rows 2i, 2i+1 (0-based) are destination antennas 1, 2 in slot i+1.
    Message l (1-based) occupies columns 2l-2 (source, slot l) and
    2l-1 (relay, slot l+1). Odd messages go through relay antenna 1,
    even ones through antenna 2.
    """
    if not isinstance(frame, FrameSpec):
        frame = FrameSpec(frame)
    L = int(frame.L)
    H = np.zeros((2 * (L + 1), 2 * L), dtype=np.complex128)
    for message in range(1, L + 1):
        src_col = 2 * (message - 1)
        src_row = 2 * (message - 1)
        H[src_row:src_row + 2, src_col] = ch.h_sd
        antenna = relay_antenna_for_message(message)
        H[src_row + 2:src_row + 4, src_col + 1] = ch.h_rd[antenna - 1, :]
    return H


def assemble_stc_matrix(ch: ChannelRealization) -> np.ndarray:
    """4 x 3 matrix of the two-slot space-time-coding protocol."""
    H = np.zeros((4, 3), dtype=np.complex128)
    H[0:2, 0] = ch.h_sd
    H[2:4, 1] = ch.h_rd[0, :]
    # Third column: relay antenna 2 to destination antennas 1 and 2.
    H[2:4, 2] = ch.h_rd[1, :]
    return H
