import numpy as np
import pytest

from channel import (
    ChannelRealization, FrameSpec, Geometry, assemble_stc_matrix, assemble_successive_matrix,
    relay_antenna_for_message, sample_realization, sample_trial, trial_stream,
)
from sim_errors import ConfigError

from conftest import make_realization


DISTINCT = make_realization([1 + 1j, 2 - 1j], [3, 4j], [[5, 6 + 2j], [7j, -8]])


def _mean_power(draws: int, rtilde: float, seed: int, attr: str = "h_sr") -> np.ndarray:
    stream = np.random.default_rng(seed)
    geometry = Geometry(rtilde)
    samples = np.array([getattr(sample_realization(stream, geometry), attr) for _ in range(draws)])
    return np.mean(np.abs(samples) ** 2, axis=0)


class TestGeometry:
    def test_gains(self):
        geometry = Geometry(0.1, 4.0)
        assert geometry.power_gain == pytest.approx(1e4)
        assert geometry.amplitude_gain == pytest.approx(100.0)

    @pytest.mark.parametrize("rtilde", [0.0, -0.5, float("nan"), float("inf")])
    def test_rejects_bad_distance(self, rtilde):
        with pytest.raises(ConfigError):
            Geometry(rtilde)

    def test_rejects_bad_exponent(self):
        with pytest.raises(ConfigError):
            Geometry(0.5, 0.0)


class TestFrameSpec:
    @pytest.mark.parametrize("L", [0, -3, 2.5, True])
    def test_rejects_bad_length(self, L):
        with pytest.raises(ConfigError):
            FrameSpec(L)

    def test_slots(self):
        assert FrameSpec(20).slots == 21


class TestRealization:
    def test_rejects_wrong_shape(self):
        with pytest.raises(ConfigError):
            make_realization([1, 2, 3], [1, 2], [[1, 2], [3, 4]])

    def test_rejects_non_finite(self):
        with pytest.raises(ConfigError):
            make_realization([1, np.nan], [1, 2], [[1, 2], [3, 4]])

    def test_copies_and_freezes(self):
        h_sd = np.array([1.0, 2.0], dtype=np.complex128)
        ch = ChannelRealization(h_sd, np.ones(2), np.ones((2, 2)))
        h_sd[0] = 99.0
        assert ch.h_sd[0] == 1.0
        with pytest.raises(ValueError):
            ch.h_rd[0, 0] = 3.0


class TestSampling:
    def test_unit_variance_and_zero_mean(self):
        stream = np.random.default_rng(5)
        geometry = Geometry(1.0)
        draws = np.array([
            np.concatenate([ch.h_sd, ch.h_sr, ch.h_rd.ravel()])
            for ch in (sample_realization(stream, geometry) for _ in range(50_000))
        ])
        assert np.all(np.abs(np.mean(draws, axis=0)) < 0.02)
        np.testing.assert_allclose(np.mean(np.abs(draws) ** 2, axis=0), 1.0, rtol=0.05)
        # Real and imaginary parts each carry half the power
        np.testing.assert_allclose(np.var(draws.real, axis=0), 0.5, rtol=0.05)

    def test_source_relay_power_at_rtilde_0_1(self):
        power = _mean_power(100_000, 0.1, seed=11)
        np.testing.assert_allclose(power, 1e4, rtol=0.05)

    def test_path_loss_ratio_between_distances(self):
        ratio = np.mean(_mean_power(50_000, 0.1, seed=1)) / np.mean(_mean_power(50_000, 0.2, seed=2))
        assert ratio == pytest.approx(16.0, rel=0.1)

    def test_path_loss_leaves_other_links_alone(self):
        power = _mean_power(20_000, 0.1, seed=3, attr="h_sd")
        np.testing.assert_allclose(power, 1.0, rtol=0.05)

    def test_trial_streams_are_reproducible(self):
        geometry = Geometry(0.1)
        first = sample_trial(42, 7, geometry)
        again = sample_trial(42, 7, geometry)
        assert first.identical_to(again)
        assert not first.identical_to(sample_trial(42, 8, geometry))
        assert not first.identical_to(sample_trial(43, 7, geometry))

    def test_trial_stream_rejects_bad_seed(self):
        with pytest.raises(ConfigError):
            trial_stream(-1, 0)
        with pytest.raises(ConfigError):
            trial_stream(2**64, 0)
        with pytest.raises(ConfigError):
            trial_stream(0, -1)


class TestSuccessiveMatrix:
    def test_single_message(self):
        H = assemble_successive_matrix(DISTINCT, 1)
        expected = np.array([
            [1 + 1j, 0],
            [2 - 1j, 0],
            [0, 5],
            [0, 6 + 2j],
        ])
        np.testing.assert_array_equal(H, expected)

    def test_two_messages_alternate_relay_antennas(self):
        H = assemble_successive_matrix(DISTINCT, FrameSpec(2))
        assert H.shape == (6, 4)
        np.testing.assert_array_equal(H[0:2, 0], DISTINCT.h_sd)
        np.testing.assert_array_equal(H[2:4, 1], DISTINCT.h_rd[0])
        np.testing.assert_array_equal(H[2:4, 2], DISTINCT.h_sd)
        np.testing.assert_array_equal(H[4:6, 3], DISTINCT.h_rd[1])
        assert np.count_nonzero(H) == 8

    @pytest.mark.parametrize("L", range(1, 31))
    def test_banded_structure(self, L):
        H = assemble_successive_matrix(DISTINCT, L)
        assert H.shape == (2 * (L + 1), 2 * L)
        assert np.count_nonzero(H) == 4 * L
        for message in range(1, L + 1):
            src, rel = 2 * message - 2, 2 * message - 1
            assert np.flatnonzero(H[:, src]).tolist() == [src, src + 1]
            assert np.flatnonzero(H[:, rel]).tolist() == [src + 2, src + 3]
            antenna = relay_antenna_for_message(message)
            np.testing.assert_array_equal(H[src + 2:src + 4, rel], DISTINCT.h_rd[antenna - 1])
        last_antenna = 1 if L % 2 else 2
        np.testing.assert_array_equal(H[-2:, -1], DISTINCT.h_rd[last_antenna - 1])

    def test_rejects_zero_length(self):
        with pytest.raises(ConfigError):
            assemble_successive_matrix(DISTINCT, 0)


class TestStcMatrix:
    def test_layout(self):
        H = assemble_stc_matrix(DISTINCT)
        assert H.shape == (4, 3)
        np.testing.assert_array_equal(H[0:2, 0], DISTINCT.h_sd)
        np.testing.assert_array_equal(H[2:4, 1], DISTINCT.h_rd[0])
        np.testing.assert_array_equal(H[2:4, 2], DISTINCT.h_rd[1])
        assert not np.any(H[0:2, 1:])
        assert not np.any(H[2:4, 0])

    def test_unit_channel_column_norms(self):
        ones = make_realization([1, 1], [1, 1], [[1, 1], [1, 1]])
        H = assemble_stc_matrix(ones)
        np.testing.assert_allclose(np.linalg.norm(H, axis=0), np.sqrt(2.0))
