# dblast.py

"""
Distributed D-BLAST on the successive-relaying frame.

Each message is a diagonal layer: its source codeword in slot l and its
relay codeword in slot l+1 form two columns of the frame matrix. The
destination peels layers off one at a time with block MMSE-SIC: already
decoded layers are cancelled, layers still to come act as Gaussian
interference.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from channel import ChannelRealization, FrameSpec, assemble_successive_matrix, relay_antenna_for_message
from mimo_info import SnrPoint, check_rate, eta_value, log2det_cholesky, as_complex_matrix
from sim_errors import ConfigError, NumericalError


@dataclass(frozen=True)
class Layer:
    # message, slots and antenna are 1-based protocol labels; columns index the matrix
    message: int
    source_slot: int
    relay_slot: int
    relay_antenna: int
    columns: tuple[int, int]


@dataclass(frozen=True)
class LayerSchedule:
    L: int
    layers: tuple[Layer, ...]

    @property
    def relay_antennas(self) -> tuple[int, ...]:
        return tuple(layer.relay_antenna for layer in self.layers)

    @property
    def column_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(layer.columns for layer in self.layers)


@dataclass(frozen=True, eq=False)
class LayerRates:
    """Achievable bits per frame for each layer, indexed by message order."""

    rates: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.rates))

    def all_clear(self, bits_per_message: float) -> bool:
        return bool(np.all(self.rates >= bits_per_message))


def layer_schedule(L: int) -> LayerSchedule:
    frame = FrameSpec(L)
    layers = tuple(
        Layer(
            message=l,
            source_slot=l,
            relay_slot=l + 1,
            relay_antenna=relay_antenna_for_message(l),
            columns=(2 * l - 2, 2 * l - 1),
        )
        for l in range(1, frame.L + 1)
    )
    return LayerSchedule(L=int(frame.L), layers=layers)


def bits_per_message(R: float, L: int) -> float:
    """Per-layer target that keeps the frame at R bits per slot: R(L+1)/L."""
    return check_rate(R) * (L + 1) / L


def _decode_order(schedule: LayerSchedule, order: Sequence[int] | None) -> list[int]:
    if order is None:
        return list(range(schedule.L))
    order = [int(i) for i in order]
    if sorted(order) != list(range(schedule.L)):
        raise ConfigError(f"Decode order must be a permutation of 0..{schedule.L - 1}, got {order}.")
    return order


def mmse_sic_layer_rates_sweep(H, etas, schedule: LayerSchedule,
                               order: Sequence[int] | None = None) -> np.ndarray:
    """
    Block MMSE-SIC rates for every SNR in `etas`; shape (len(etas), L).

    Layer l's rate is log2 det(I_2 + eta H_l^H K_l^{-1} H_l) with
    K_l = I + eta * sum of H_j H_j^H over layers decoded after l.
    K_l is applied through its Cholesky factor, never inverted.
    """
    H = as_complex_matrix(H)
    expected = (2 * (schedule.L + 1), 2 * schedule.L)
    if H.shape != expected:
        raise ConfigError(f"Frame matrix for L={schedule.L} must be {expected}, got {H.shape}.")
    etas = np.asarray(etas, dtype=float).reshape(-1)
    if np.any(~np.isfinite(etas)) or np.any(etas < 0):
        raise ConfigError("SNR values must be non-negative and finite.")
    order = _decode_order(schedule, order)

    rates = np.zeros((etas.size, schedule.L))
    eye2 = np.eye(2, dtype=np.complex128)
    for position, layer_index in enumerate(order):
        H_l = H[:, list(schedule.layers[layer_index].columns)]
        later_cols = [c for j in order[position + 1:] for c in schedule.layers[j].columns]
        H_int = H[:, later_cols]

        # Rows untouched by this layer and its interferers are an identity block; drop them.
        active = np.any(H_l != 0, axis=1) | np.any(H_int != 0, axis=1)
        if not np.any(active):
            continue
        H_l = H_l[active]
        H_int = H_int[active]
        n = H_l.shape[0]

        S = H_int @ H_int.conj().T
        K = np.eye(n, dtype=np.complex128)[None] + etas[:, None, None] * S[None]
        try:
            factor = np.linalg.cholesky(K)
            W = np.linalg.solve(factor, np.broadcast_to(H_l, (etas.size, n, 2)))
            M = eye2[None] + etas[:, None, None] * (W.conj().transpose(0, 2, 1) @ W)
            layer_bits = log2det_cholesky(M)
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"MMSE-SIC factorization failed at layer {layer_index + 1}: {e}") from e

        bad = np.flatnonzero(~np.isfinite(layer_bits))
        if bad.size:
            raise NumericalError(
                f"MMSE-SIC rate for layer {layer_index + 1} is not finite.", eta=float(etas[bad[0]])
            )
        rates[:, layer_index] = np.maximum(layer_bits, 0.0)
    return rates


def mmse_sic_layer_rates(H, eta: "SnrPoint | float", schedule: LayerSchedule,
                         order: Sequence[int] | None = None) -> LayerRates:
    rates = mmse_sic_layer_rates_sweep(H, [eta_value(eta)], schedule, order)
    return LayerRates(rates=rates[0])


def dblast_frame_outage(ch: ChannelRealization, frame: FrameSpec | int,
                        eta: "SnrPoint | float", R: float) -> bool:
    """SIC stops at the first layer below R(L+1)/L bits; any such layer is a frame outage."""
    if not isinstance(frame, FrameSpec):
        frame = FrameSpec(frame)
    target = bits_per_message(R, frame.L)
    schedule = layer_schedule(frame.L)
    H = assemble_successive_matrix(ch, frame)
    return not mmse_sic_layer_rates(H, eta, schedule).all_clear(target)
