"""Channel construction, Lambertian model, and CSV round-trip tests."""

import io
import math

import numpy as np
import pytest

from glimsim import (
    ChannelMatrix,
    RoomGeometry,
    build_lambertian_channel,
    default_room_geometry,
    load_channel_csv,
    normalize_channel,
    save_channel_csv,
    square_positions,
)


def lambertian_entry(led, pd, m, area, fov, responsivity=1.0):
    """Independent scalar evaluation of the line-of-sight gain formula."""
    d = math.dist(led, pd)
    cos = (led[2] - pd[2]) / d
    if cos < math.cos(fov):
        return 0.0
    return responsivity * area * (m + 1) / (2 * math.pi * d * d) * cos**m * cos


class TestChannelMatrix:
    def test_rejects_negative_entry(self):
        with pytest.raises(ValueError, match="negative gain"):
            ChannelMatrix(np.array([[1.0, -0.1], [0.5, 0.5]]))

    def test_rejects_odd_led_count(self):
        with pytest.raises(ValueError, match="even"):
            ChannelMatrix(np.ones((2, 3)))

    def test_rejects_all_zero_column(self):
        with pytest.raises(ValueError, match="all-zero column"):
            ChannelMatrix(np.array([[1.0, 0.0], [1.0, 0.0]]))

    def test_rejects_non_matrix(self):
        with pytest.raises(ValueError, match="2-D"):
            ChannelMatrix(np.ones(4))

    def test_gains_are_immutable(self):
        cm = ChannelMatrix(np.eye(2))
        with pytest.raises(ValueError):
            cm.gains[0, 0] = 2.0


class TestLambertian:
    def test_aligned_axis_gain(self):
        """PD 1 m directly below an LED: both cosines are 1, gain = area/pi."""
        geometry = RoomGeometry(
            led_positions=[[0.0, 0.0, 1.0], [0.3, 0.0, 1.0]],
            pd_positions=[[0.0, 0.0, 0.0]],
            lambertian_order=1.0,
            pd_area=1e-4,
            pd_fov_half_angle=math.radians(85.0),
        )
        cm = build_lambertian_channel(geometry)
        assert cm.gains[0, 0] == pytest.approx(3.1831e-5, rel=1e-4)
        assert cm.gains[0, 0] == pytest.approx(1e-4 / math.pi, rel=1e-12)

    def test_fov_cutoff_zeroes_entry(self):
        """An LED seen beyond the half angle contributes exactly zero."""
        geometry = RoomGeometry(
            led_positions=[[0.0, 0.0, 1.0], [10.0, 0.0, 1.0]],
            pd_positions=[[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]],
            pd_fov_half_angle=math.radians(60.0),
        )
        cm = build_lambertian_channel(geometry)
        assert cm.gains[0, 1] == 0.0
        assert cm.gains[1, 1] > 0.0

    def test_default_geometry_matches_scalar_oracle(self):
        """Full 8x8 default matrix against a per-entry scalar evaluation."""
        geometry = default_room_geometry()
        cm = build_lambertian_channel(geometry)
        expected = np.array(
            [
                [
                    lambertian_entry(
                        led,
                        pd,
                        geometry.lambertian_order,
                        geometry.pd_area,
                        geometry.pd_fov_half_angle,
                    )
                    for led in geometry.led_positions
                ]
                for pd in geometry.pd_positions
            ]
        )
        np.testing.assert_allclose(cm.gains, expected, rtol=1e-12)

    def test_coincident_points_raise(self):
        geometry = RoomGeometry(
            led_positions=[[0.0, 0.0, 1.0], [1.0, 0.0, 1.0]],
            pd_positions=[[0.0, 0.0, 1.0 - 1e-18]],  # numerically coincident
        )
        with pytest.raises(ValueError, match="strictly above|degenerate"):
            build_lambertian_channel(geometry)

    def test_leds_must_sit_above_pds(self):
        with pytest.raises(ValueError, match="strictly above"):
            RoomGeometry(
                led_positions=[[0.0, 0.0, 1.0], [1.0, 0.0, 1.0]],
                pd_positions=[[0.0, 0.0, 1.5]],
            )

    def test_inverse_square_law(self):
        """Doubling an axis-aligned distance divides the gain by 4."""
        rng = np.random.default_rng(5)
        for _ in range(100):
            d = rng.uniform(0.5, 3.0)
            gains = []
            for dist in (d, 2 * d):
                geometry = RoomGeometry(
                    led_positions=[[0.0, 0.0, dist], [5.0, 0.0, dist]],
                    pd_positions=[[0.0, 0.0, 0.0]],
                )
                gains.append(build_lambertian_channel(geometry).gains[0, 0])
            assert gains[0] / gains[1] == pytest.approx(4.0, rel=1e-12)

    def test_reflection_symmetry_permutes_rows_and_columns(self):
        """Reflecting both layouts through the square center reverses the numbering."""
        geometry = default_room_geometry()
        reflected = RoomGeometry(
            led_positions=geometry.led_positions * np.array([-1.0, -1.0, 1.0]),
            pd_positions=geometry.pd_positions * np.array([-1.0, -1.0, 1.0]),
            lambertian_order=geometry.lambertian_order,
            pd_area=geometry.pd_area,
            pd_fov_half_angle=geometry.pd_fov_half_angle,
        )
        h = build_lambertian_channel(geometry).gains
        h_ref = build_lambertian_channel(reflected).gains
        np.testing.assert_allclose(h_ref, h[::-1, ::-1], rtol=1e-13)

    def test_square_positions_row_major(self):
        pts = square_positions(8, 4.0, 2.15)
        assert pts.shape == (8, 3)
        np.testing.assert_allclose(pts[0], [-2.0, 2.0, 2.15])
        np.testing.assert_allclose(pts[2], [2.0, 2.0, 2.15])
        np.testing.assert_allclose(pts[7], [2.0, -2.0, 2.15])
        with pytest.raises(ValueError):
            square_positions(6, 4.0, 2.15)


class TestNormalize:
    def test_mean_column_energy_is_one(self, default_channel):
        energy = np.mean(np.sum(default_channel.gains**2, axis=0))
        assert energy == pytest.approx(1.0, rel=1e-12)

    def test_normalization_is_pure_scaling(self):
        cm = ChannelMatrix(np.array([[2.0, 1.0], [0.0, 3.0]]))
        normed = normalize_channel(cm)
        ratio = cm.gains[0, 0] / normed.gains[0, 0]
        np.testing.assert_allclose(cm.gains, normed.gains * ratio, rtol=1e-12)


class TestChannelCsv:
    def test_parses_identity(self):
        cm = load_channel_csv(io.BytesIO(b"1,0\n0,1\n"))
        np.testing.assert_array_equal(cm.gains, np.eye(2))

    def test_odd_column_count_rejected(self):
        with pytest.raises(ValueError, match="even"):
            load_channel_csv(io.StringIO("1,2,3\n4,5,6\n"))

    def test_ragged_row_names_row_two(self):
        with pytest.raises(ValueError, match="row 2"):
            load_channel_csv(io.StringIO("1,2,3,4\n5,6,7\n"))

    def test_negative_entry_names_position(self):
        with pytest.raises(ValueError, match="row 2, column 1"):
            load_channel_csv(io.StringIO("1,2\n-3,4\n"))

    def test_non_numeric_token_names_position(self):
        with pytest.raises(ValueError, match="row 1, column 2"):
            load_channel_csv(io.StringIO("1,abc\n3,4\n"))

    def test_empty_file_rejected(self):
        with pytest.raises(ValueError, match="no data"):
            load_channel_csv(io.StringIO("\n\n"))

    def test_roundtrip_is_bit_exact(self, tmp_path, default_channel):
        path = tmp_path / "h.csv"
        save_channel_csv(default_channel, path)
        loaded = load_channel_csv(path)
        assert np.array_equal(loaded.gains, default_channel.gains)

    def test_roundtrip_random_matrices(self, tmp_path):
        rng = np.random.default_rng(11)
        path = tmp_path / "h.csv"
        for _ in range(100):
            cm = ChannelMatrix(rng.uniform(1e-8, 1e3, size=(3, 4)))
            save_channel_csv(cm, path)
            assert np.array_equal(load_channel_csv(path).gains, cm.gains)
