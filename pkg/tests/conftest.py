import numpy as np
import pytest

from glimsim import build_lambertian_channel, default_room_geometry, normalize_channel


@pytest.fixture(scope="session")
def default_channel():
    """Normalized channel of the built-in 8x8 square geometry."""
    return normalize_channel(build_lambertian_channel(default_room_geometry()))


def random_channel(rng: np.random.Generator, n_rx: int, n_tx: int):
    """Generic random nonnegative channel; entries bounded away from zero so
    cosines and condition numbers are distinct almost surely."""
    from glimsim import ChannelMatrix

    return ChannelMatrix(rng.uniform(0.1, 1.0, size=(n_rx, n_tx)))
