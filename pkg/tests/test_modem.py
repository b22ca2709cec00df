"""QAM labeling, OFDM transforms, and end-to-end modem properties."""

import numpy as np
import pytest

from glimsim import make_constellation, ofdm_demodulate, ofdm_modulate, qam_demap, qam_map


def all_bit_patterns(n_bits: int) -> np.ndarray:
    values = np.arange(2**n_bits)
    shifts = np.arange(n_bits - 1, -1, -1)
    return ((values[:, None] >> shifts) & 1).astype(np.int8)


class TestConstellations:
    @pytest.mark.parametrize("order", [4, 8, 16])
    def test_unit_average_energy(self, order):
        c = make_constellation(order)
        assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0, abs=1e-12)
        assert len(set(np.round(c.points, 12))) == order  # labels map to distinct points

    def test_qpsk_zero_zero_label(self):
        c = make_constellation(4)
        assert qam_map([0, 0], c)[0] == pytest.approx((1 + 1j) / np.sqrt(2))

    def test_16qam_zero_label(self):
        c = make_constellation(16)
        assert qam_map([0, 0, 0, 0], c)[0] == pytest.approx((-3 - 3j) / np.sqrt(10))

    def test_unsupported_order(self):
        with pytest.raises(ValueError, match="orders"):
            make_constellation(32)

    def test_framing_error(self):
        c = make_constellation(16)
        with pytest.raises(ValueError, match="divisible"):
            qam_map([0, 1, 0], c)

    @pytest.mark.parametrize("order", [4, 8, 16])
    def test_map_demap_roundtrip_exhaustive(self, order):
        """Every 12-bit pattern survives map/demap for all three orders."""
        c = make_constellation(order)
        bits = all_bit_patterns(12)
        for pattern in bits:
            recovered = qam_demap(qam_map(pattern, c), c)
            assert np.array_equal(recovered, pattern)

    def test_midpoint_tie_goes_to_lower_label(self):
        c = make_constellation(4)
        # Equidistant from labels 0 (1+1j)/sqrt(2) and 1 (1-1j)/sqrt(2).
        bits = qam_demap(np.array([1 / np.sqrt(2) + 0j]), c)
        assert bits.tolist() == [0, 0]

    def test_nearest_neighbor_decision(self):
        c = make_constellation(4)
        bits = qam_demap(np.array([0.9 + 0.8j]), c)
        assert bits.tolist() == [0, 0]


class TestOfdm:
    def test_zero_symbols_give_zero_stream(self):
        out = ofdm_modulate(np.zeros(64, dtype=complex))
        assert out.shape == (128,)
        assert not out.any()

    def test_dc_only_frame(self):
        """A lone DC symbol of amplitude 2 over N=4 yields constant unit samples."""
        stream = ofdm_modulate(np.array([2, 0, 0, 0], dtype=complex))
        np.testing.assert_allclose(stream, [1, 0, 1, 0, 1, 0, 1, 0], atol=1e-15)

    def test_parseval(self):
        rng = np.random.default_rng(3)
        symbols = rng.normal(size=64) + 1j * rng.normal(size=64)
        stream = ofdm_modulate(symbols)
        assert np.sum(stream**2) == pytest.approx(np.sum(np.abs(symbols) ** 2), rel=1e-9)

    def test_roundtrip(self):
        rng = np.random.default_rng(4)
        symbols = rng.normal(size=64) + 1j * rng.normal(size=64)
        back = ofdm_demodulate(ofdm_modulate(symbols))
        np.testing.assert_allclose(back, symbols, rtol=1e-9, atol=1e-12)

    def test_zero_stream_demodulates_to_zero(self):
        assert not ofdm_demodulate(np.zeros(128)).any()

    def test_impulse_stream_has_flat_spectrum(self):
        stream = np.zeros(16)
        stream[0] = 1.0
        spectrum = ofdm_demodulate(stream)
        np.testing.assert_allclose(np.abs(spectrum), np.abs(spectrum[0]), rtol=1e-12)

    def test_dimension_errors(self):
        with pytest.raises(ValueError, match="power of two"):
            ofdm_modulate(np.zeros(12, dtype=complex))
        with pytest.raises(ValueError, match="even"):
            ofdm_demodulate(np.zeros(9))


class TestModemChain:
    @pytest.mark.parametrize("order", [4, 8, 16])
    def test_end_to_end_identity(self, order):
        """bits -> map -> OFDM -> inverse OFDM -> demap is the identity."""
        c = make_constellation(order)
        k = c.bits_per_symbol
        rng = np.random.default_rng(100 + order)
        for _ in range(100):
            bits = rng.integers(0, 2, 64 * k, dtype=np.int8)
            stream = ofdm_modulate(qam_map(bits, c))
            recovered = qam_demap(ofdm_demodulate(stream), c)
            assert np.array_equal(recovered, bits)

    def test_power_contract(self):
        """Average stream sample power sits within 5% of 1/2 for 4QAM."""
        c = make_constellation(4)
        rng = np.random.default_rng(9)
        n_frames = 10_000
        bits = rng.integers(0, 2, n_frames * 64 * 2, dtype=np.int8)
        stream = ofdm_modulate(qam_map(bits, c).reshape(n_frames, 64))
        power = float(np.mean(stream**2))
        assert 0.475 <= power <= 0.525
