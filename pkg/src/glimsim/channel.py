"""Indoor optical MIMO channel models.

Builds line-of-sight Lambertian gain matrices for ceiling-LED /
desk-photodetector layouts, and loads or saves plain-CSV gain matrices so
externally measured channels can drive the same simulation chain.

Conventions: rows are photodetectors, columns are LEDs, and LED/PD indices
are 1-based everywhere they appear in messages or pair notation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

__all__ = [
    "ChannelMatrix",
    "RoomGeometry",
    "square_positions",
    "default_room_geometry",
    "build_lambertian_channel",
    "normalize_channel",
    "load_channel_csv",
    "save_channel_csv",
]


@dataclass(frozen=True)
class ChannelMatrix:
    """Nonnegative nR x nT matrix of optical gains (PD rows, LED columns).

    The LED count must be even (intensities are carried on LED pairs) and
    every LED must reach at least one photodetector.
    """

    gains: np.ndarray

    def __post_init__(self) -> None:
        g = np.array(self.gains, dtype=float)
        if g.ndim != 2:
            raise ValueError(f"channel gains must form a 2-D matrix, got {g.ndim}-D")
        n_rx, n_tx = g.shape
        if n_rx < 1:
            raise ValueError("channel needs at least one photodetector row")
        if n_tx < 2 or n_tx % 2 != 0:
            raise ValueError(f"LED column count must be even and >= 2, got {n_tx}")
        if not np.all(np.isfinite(g)):
            raise ValueError("channel gains must be finite")
        if np.any(g < 0):
            r, c = np.argwhere(g < 0)[0]
            raise ValueError(f"negative gain at row {r + 1}, column {c + 1}")
        dead = np.flatnonzero(~g.any(axis=0))
        if dead.size:
            raise ValueError(f"LED {dead[0] + 1} reaches no photodetector (all-zero column)")
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)

    @property
    def n_rx(self) -> int:
        return self.gains.shape[0]

    @property
    def n_tx(self) -> int:
        return self.gains.shape[1]


@dataclass(frozen=True)
class RoomGeometry:
    """LED and photodetector placement plus Lambertian front-end parameters.

    LEDs face straight down, PDs straight up; every LED must sit strictly
    above every PD. `pd_area` is in m^2, angles in radians.
    """

    led_positions: np.ndarray
    pd_positions: np.ndarray
    lambertian_order: float = 1.0
    pd_area: float = 1e-4
    pd_fov_half_angle: float = math.radians(85.0)
    responsivity: float = 1.0

    def __post_init__(self) -> None:
        led = np.array(self.led_positions, dtype=float)
        pd = np.array(self.pd_positions, dtype=float)
        for name, pts in (("led_positions", led), ("pd_positions", pd)):
            if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
                raise ValueError(f"{name} must be a (count, 3) array of points in meters")
            if len(np.unique(pts, axis=0)) != len(pts):
                raise ValueError(f"{name} contains duplicate points")
        if len(led) % 2 != 0:
            raise ValueError(f"LED count must be even, got {len(led)}")
        if led[:, 2].min() <= pd[:, 2].max():
            raise ValueError("every LED must sit strictly above every photodetector")
        if self.lambertian_order < 1:
            raise ValueError(f"lambertian_order must be >= 1, got {self.lambertian_order}")
        if self.pd_area <= 0:
            raise ValueError("pd_area must be positive")
        if not 0 < self.pd_fov_half_angle <= math.pi / 2:
            raise ValueError("pd_fov_half_angle must lie in (0, pi/2]")
        if self.responsivity <= 0:
            raise ValueError("responsivity must be positive")
        led.setflags(write=False)
        pd.setflags(write=False)
        object.__setattr__(self, "led_positions", led)
        object.__setattr__(self, "pd_positions", pd)


def square_positions(count: int, side: float, z: float) -> np.ndarray:
    """Points on a horizontal square of the given side length, centered on the z axis.

    count=4 places the corners; count=8 adds the edge midpoints. Points are
    numbered row-major from the top-left corner (decreasing y, increasing x).
    """
    h = side / 2.0
    if count == 4:
        xy = [(-h, h), (h, h), (-h, -h), (h, -h)]
    elif count == 8:
        xy = [(-h, h), (0.0, h), (h, h), (-h, 0.0), (h, 0.0), (-h, -h), (0.0, -h), (h, -h)]
    else:
        raise ValueError(f"square layouts support 4 or 8 devices, got {count}")
    return np.array([(x, y, z) for x, y in xy], dtype=float)


def default_room_geometry(
    n_tx: int = 8,
    n_rx: int = 8,
    led_side: float = 4.0,
    pd_side: float = 1.0,
    separation: float = 2.15,
    lambertian_order: float = 1.0,
    pd_area: float = 1e-4,
    pd_fov_half_angle: float = math.radians(85.0),
    responsivity: float = 1.0,
) -> RoomGeometry:
    """Square LED array over a smaller square PD array at desk height.

    Defaults: 8 LEDs on a 4 m square, 8 PDs on a 1 m square, 2.15 m below,
    first-order Lambertian emission, 1 cm^2 detectors with an 85 deg field
    of view.
    """
    return RoomGeometry(
        led_positions=square_positions(n_tx, led_side, separation),
        pd_positions=square_positions(n_rx, pd_side, 0.0),
        lambertian_order=lambertian_order,
        pd_area=pd_area,
        pd_fov_half_angle=pd_fov_half_angle,
        responsivity=responsivity,
    )


def build_lambertian_channel(geometry: RoomGeometry) -> ChannelMatrix:
    """Line-of-sight Lambertian gain matrix for the given room geometry.

    Entry (r, l) is pd_area*(m+1)/(2*pi*d^2) * cos(emission)^m * cos(incidence),
    scaled by the responsivity, and zero when the incidence angle exceeds the
    detector's field-of-view half angle.
    """
    led = geometry.led_positions
    pd = geometry.pd_positions
    delta = led[None, :, :] - pd[:, None, :]
    dist = np.linalg.norm(delta, axis=2)
    if np.any(dist == 0):
        r, l = np.argwhere(dist == 0)[0]
        raise ValueError(f"degenerate geometry: LED {l + 1} coincides with PD {r + 1}")
    # Vertical normals make the emission and incidence angles equal.
    cos_angle = delta[:, :, 2] / dist
    m = geometry.lambertian_order
    gain = (
        geometry.responsivity
        * geometry.pd_area
        * (m + 1.0)
        / (2.0 * math.pi * dist**2)
        * cos_angle**m
        * cos_angle
    )
    gain[cos_angle < math.cos(geometry.pd_fov_half_angle)] = 0.0
    return ChannelMatrix(gain)


def normalize_channel(channel: ChannelMatrix) -> ChannelMatrix:
    """Rescale so the mean LED-column energy is 1.

    Keeps SNR sweeps comparable across geometries; correlation structure and
    condition numbers are unchanged.
    """
    scale = math.sqrt(float(np.mean(np.sum(channel.gains**2, axis=0))))
    return ChannelMatrix(channel.gains / scale)


def _read_text(source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def load_channel_csv(source: Union[str, Path, object]) -> ChannelMatrix:
    """Parse a plain-text CSV gain matrix (one PD row per line, no header).

    `source` may be a path or an open text/binary file. Errors name the
    offending row and column, 1-based.
    """
    text = _read_text(source)
    rows: list[list[float]] = []
    width = None
    for line in text.splitlines():
        if not line.strip():
            continue
        r = len(rows) + 1
        tokens = [t.strip() for t in line.split(",")]
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise ValueError(f"row {r}: expected {width} values, found {len(tokens)}")
        values = []
        for c, token in enumerate(tokens, start=1):
            try:
                value = float(token)
            except ValueError:
                raise ValueError(f"row {r}, column {c}: invalid number {token!r}") from None
            if not math.isfinite(value):
                raise ValueError(f"row {r}, column {c}: invalid number {token!r}")
            if value < 0:
                raise ValueError(f"row {r}, column {c}: negative gain {token}")
            values.append(value)
        rows.append(values)
    if not rows:
        raise ValueError("channel file contains no data rows")
    if width % 2 != 0:
        raise ValueError(f"LED column count must be even, found {width}")
    return ChannelMatrix(np.array(rows, dtype=float))


def save_channel_csv(channel: ChannelMatrix, destination: Union[str, Path]) -> None:
    """Write the gain matrix as CSV with 17 significant digits (round-trip exact)."""
    lines = [",".join(f"{v:.17g}" for v in row) for row in channel.gains]
    Path(destination).write_text("\n".join(lines) + "\n", encoding="utf-8")
