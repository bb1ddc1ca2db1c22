# mimo_info.py

"""
Gaussian mutual information and outage events on complex channel matrices,
plus the source-relay SNR thresholds that decide whether the relay can
decode in time.

All rates are in bits. Matrices come in without the sqrt(eta) factor.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from channel import (
    ChannelRealization, FrameSpec, assemble_stc_matrix, assemble_successive_matrix,
)
from sim_errors import ConfigError, NumericalError


@dataclass(frozen=True)
class SnrPoint:
    """Per-antenna transmit power over unit noise variance, linear scale."""

    eta: float

    def __post_init__(self):
        if not math.isfinite(self.eta) or self.eta <= 0:
            raise ConfigError(f"SNR must be a positive finite linear ratio, got {self.eta!r}.")

    @classmethod
    def from_db(cls, eta_db: float) -> "SnrPoint":
        return cls(10.0 ** (eta_db / 10.0))

    @property
    def eta_db(self) -> float:
        return 10.0 * math.log10(self.eta)


def eta_value(eta: "SnrPoint | float") -> float:
    if isinstance(eta, SnrPoint):
        return eta.eta
    value = float(eta)
    if not math.isfinite(value) or value < 0:
        raise ConfigError(f"SNR must be a non-negative finite linear ratio, got {eta!r}.")
    return value


def check_rate(R: float) -> float:
    R = float(R)
    if not math.isfinite(R) or R < 0:
        raise ConfigError(f"Rate must be a non-negative number of bits, got {R!r}.")
    return R


def as_complex_matrix(H) -> np.ndarray:
    """Validates a dense complex matrix: two dimensions, non-empty, all entries finite."""
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
        raise ConfigError(f"Expected a non-empty 2-D matrix, got shape {H.shape}.")
    if not np.all(np.isfinite(H)):
        raise ConfigError("Channel matrix contains non-finite entries.")
    return H


def gram(H: np.ndarray) -> np.ndarray:
    """H H^H or H^H H, whichever is smaller; both give the same det(I + eta G)."""
    if H.shape[0] <= H.shape[1]:
        return H @ H.conj().T
    return H.conj().T @ H


def log2det_cholesky(A: np.ndarray) -> np.ndarray:
    """log2 det of Hermitian positive-definite matrices (batched over leading axes)."""
    factor = np.linalg.cholesky(A)
    diag = np.diagonal(factor, axis1=-2, axis2=-1).real
    return 2.0 * np.sum(np.log2(diag), axis=-1)


# ---------------------------------------------------------------------------
# Mutual information
# ---------------------------------------------------------------------------

def mutual_information(H, eta: "SnrPoint | float") -> float:
    """log2 det(I + eta H H^H) via a Cholesky factorization of the smaller Gram."""
    H = as_complex_matrix(H)
    eta = eta_value(eta)
    G = gram(H)
    A = np.eye(G.shape[0], dtype=np.complex128) + eta * G
    try:
        bits = float(log2det_cholesky(A))
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Cholesky factorization failed: {e}", eta=eta) from e
    if not math.isfinite(bits):
        raise NumericalError("Log-determinant is not finite.", eta=eta)
    return max(bits, 0.0)


def mutual_information_sweep(H, etas) -> np.ndarray:
    """mutual_information for every SNR in `etas`, one batched factorization."""
    H = as_complex_matrix(H)
    etas = np.asarray(etas, dtype=float).reshape(-1)
    if np.any(~np.isfinite(etas)) or np.any(etas < 0):
        raise ConfigError("SNR values must be non-negative and finite.")
    G = gram(H)
    A = np.eye(G.shape[0], dtype=np.complex128)[None, :, :] + etas[:, None, None] * G[None, :, :]
    try:
        bits = log2det_cholesky(A)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Cholesky factorization failed: {e}") from e
    bad = np.flatnonzero(~np.isfinite(bits))
    if bad.size:
        raise NumericalError("Log-determinant is not finite.", eta=float(etas[bad[0]]))
    return np.maximum(bits, 0.0)


def mutual_information_eig(H, eta: "SnrPoint | float") -> float:
    """Eigenvalue form: sum of log2(1 + eta * lambda_i) over the Gram spectrum."""
    H = as_complex_matrix(H)
    eta = eta_value(eta)
    eigenvalues = np.clip(scipy.linalg.eigvalsh(gram(H)), 0.0, None)
    return float(np.sum(np.log2(1.0 + eta * eigenvalues)))


# ---------------------------------------------------------------------------
# Outage events
# ---------------------------------------------------------------------------

def direct_outage_event(ch: ChannelRealization, eta: "SnrPoint | float", R: float) -> bool:
    """1x2 SIMO link from the source straight to the destination."""
    R = check_rate(R)
    gain = float(np.sum(np.abs(ch.h_sd) ** 2))
    return math.log2(1.0 + eta_value(eta) * gain) < R


def successive_outage_event(ch: ChannelRealization, frame: FrameSpec | int,
                            eta: "SnrPoint | float", R: float) -> bool:
    """Joint decoding of the whole frame: L+1 slots must carry R(L+1) bits."""
    R = check_rate(R)
    if not isinstance(frame, FrameSpec):
        frame = FrameSpec(frame)
    H = assemble_successive_matrix(ch, frame)
    return mutual_information(H, eta) < R * frame.slots


def stc_outage_event(ch: ChannelRealization, eta: "SnrPoint | float", R: float) -> bool:
    """One message per two slots, so the two-slot block must carry 2R bits."""
    R = check_rate(R)
    return mutual_information(assemble_stc_matrix(ch), eta) < 2.0 * R


def mimo22_outage_event(H22, eta: "SnrPoint | float", R: float) -> bool:
    R = check_rate(R)
    H22 = as_complex_matrix(H22)
    if H22.shape != (2, 2):
        raise ConfigError(f"Expected a 2x2 channel matrix, got shape {H22.shape}.")
    return mutual_information(H22, eta) < R


# ---------------------------------------------------------------------------
# Source-relay SNR thresholds
# ---------------------------------------------------------------------------

def _ratio_threshold(numerator: float, denominator: float, relay_gain: float,
                     terms: tuple[float, ...], label: str) -> float:
    """
    numerator / denominator, or a sentinel when the denominator vanishes:
    +inf if the relay hears the source at all, -inf if the source-relay
    link is dead but another link is not, and an error when every channel
    term is zero.
    """
    if denominator > 0:
        return numerator / denominator
    if relay_gain > 0:
        return math.inf
    if any(t > 0 for t in terms):
        return -math.inf
    raise NumericalError(f"{label} threshold is undefined: every channel term is zero.")


def _successive_terms(ch: ChannelRealization) -> tuple[float, float, float]:
    a = float(np.min(np.abs(ch.h_sr) ** 2))
    b = float(np.sum(np.abs(ch.h_sd) ** 2))
    c = float(np.min(np.sum(np.abs(ch.h_rd) ** 2, axis=1)))
    return a, b, c


def constraint_threshold_successive(ch: ChannelRealization) -> float:
    """
    Largest SNR at which the relay still decodes every message of a
    successive-relaying frame: (a - b - c) / (b c), with
      a = min_i |h_{s,r_i}|^2          (path loss included)
      b = |h_{s,d_1}|^2 + |h_{s,d_2}|^2
      c = min_i sum_j |h_{r_i,d_j}|^2
    The constraint holds at eta iff eta <= the returned value; a negative
    value means it fails at every positive SNR.
    """
    a, b, c = _successive_terms(ch)
    return _ratio_threshold(a - b - c, b * c, a, (b, c), "Successive-relaying")


def constraint_threshold_successive_approx(ch: ChannelRealization) -> float:
    """Small-distance approximation a / (b c) of constraint_threshold_successive."""
    a, b, c = _successive_terms(ch)
    return _ratio_threshold(a, b * c, a, (b, c), "Successive-relaying (approximate)")


def constraint_threshold_stc(ch: ChannelRealization) -> float:
    """
    p / (q z) with p = sum_i |h_{s,r_i}|^2 (path loss included),
    q = sum_j |h_{s,d_j}|^2 and z = sum_{i,j} |h_{r_i,d_j}|^2.
    This is an approximate bound; it is evaluated as an exact threshold.
    """
    p = float(np.sum(np.abs(ch.h_sr) ** 2))
    q = float(np.sum(np.abs(ch.h_sd) ** 2))
    z = float(np.sum(np.abs(ch.h_rd) ** 2))
    return _ratio_threshold(p, q * z, p, (q, z), "Space-time-coding")


def constraint_holds(threshold: float, eta: "SnrPoint | float") -> bool:
    return threshold >= eta_value(eta)
