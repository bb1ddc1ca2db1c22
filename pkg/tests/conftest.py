from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

# The simulation modules live flat at the repository root.
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from channel import ChannelRealization, Geometry, sample_realization  # noqa: E402


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def random_matrix(rng):
    def make(rows: int, cols: int) -> np.ndarray:
        return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
    return make


@pytest.fixture
def random_realization(rng):
    def make(rtilde: float = 1.0) -> ChannelRealization:
        return sample_realization(rng, Geometry(rtilde))
    return make


def make_realization(h_sd, h_sr, h_rd) -> ChannelRealization:
    return ChannelRealization.from_values(h_sd, h_sr, h_rd)


ZERO_CHANNEL = make_realization([0, 0], [0, 0], [[0, 0], [0, 0]])


def mimo22_outage_oracle(eta: float, R: float) -> float:
    """
    P(log2 det(I + eta H H^H) < R) for a 2x2 i.i.d. CN(0, 1) H, integrated
    over the joint density (l1 - l2)^2 exp(-l1 - l2) / 2 of the unordered
    Wishart eigenvalues.
    """
    target = 2.0 ** R

    def upper(l1):
        return max(0.0, (target / (1.0 + eta * l1) - 1.0) / eta)

    value, _ = integrate.dblquad(
        lambda l2, l1: 0.5 * (l1 - l2) ** 2 * np.exp(-l1 - l2),
        0.0, (target - 1.0) / eta,
        lambda l1: 0.0, upper,
        epsabs=1e-13, epsrel=1e-10,
    )
    return value
