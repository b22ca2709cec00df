"""QAM mapping and the OFDM front end that produces the real sample stream.

A frame of N unit-energy QAM symbols passes through a unitary inverse DFT and
is serialized by interleaving real and imaginary parts, giving 2N real
samples with average power 1/2. The receiver side inverts both steps exactly.

Bit labelings are fixed so results are reproducible:
  * 4QAM: Gray-labeled QPSK, first bit sets the real sign, second the
    imaginary sign, 0 meaning positive (00 -> (1+1j)/sqrt(2)).
  * 8QAM: rectangular 2x4 grid; two Gray bits pick the in-phase level from
    {-3,-1,+1,+3}, the last bit picks the quadrature sign.
  * 16QAM: row-major Gray labeling; the first two bits pick the in-phase
    level, the last two the quadrature level (0000 -> (-3-3j)/sqrt(10)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Constellation",
    "make_constellation",
    "qam_map",
    "qam_demap",
    "ofdm_modulate",
    "ofdm_demodulate",
]

# 2-bit Gray code (MSB first) to PAM level: 00,01,11,10 -> -3,-1,+1,+3.
_GRAY2_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy QAM constellation; point index equals its bit label."""

    order: int
    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=complex)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def bits_per_symbol(self) -> int:
        return int(self.order).bit_length() - 1


def make_constellation(order: int) -> Constellation:
    """Build the fixed 4/8/16-QAM constellation for the given order."""
    if order == 4:
        labels = np.arange(4)
        re = 1.0 - 2.0 * (labels >> 1)
        im = 1.0 - 2.0 * (labels & 1)
        points = (re + 1j * im) / np.sqrt(2.0)
    elif order == 8:
        labels = np.arange(8)
        re = _GRAY2_LEVELS[labels >> 1]
        im = 2.0 * (labels & 1) - 1.0
        points = (re + 1j * im) / np.sqrt(6.0)
    elif order == 16:
        labels = np.arange(16)
        re = _GRAY2_LEVELS[labels >> 2]
        im = _GRAY2_LEVELS[labels & 3]
        points = (re + 1j * im) / np.sqrt(10.0)
    else:
        raise ValueError(f"supported QAM orders are 4, 8 and 16, got {order}")
    return Constellation(order=order, points=points)


def qam_map(bits, constellation: Constellation) -> np.ndarray:
    """Map a flat 0/1 sequence to constellation symbols, MSB first per group."""
    b = np.asarray(bits)
    k = constellation.bits_per_symbol
    if b.size % k != 0:
        raise ValueError(f"bit count {b.size} is not divisible by {k} bits per symbol")
    weights = 1 << np.arange(k - 1, -1, -1)
    labels = b.reshape(-1, k) @ weights
    return constellation.points[labels]


def qam_demap(symbols, constellation: Constellation) -> np.ndarray:
    """Nearest-point hard decision back to bits; ties go to the lower bit label."""
    s = np.asarray(symbols, dtype=complex).ravel()
    d = np.abs(s[:, None] - constellation.points[None, :])
    labels = np.argmin(d, axis=1)
    k = constellation.bits_per_symbol
    shifts = np.arange(k - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).astype(np.int8).ravel()


def ofdm_modulate(symbols) -> np.ndarray:
    """Unitary inverse DFT, then interleave real/imag into a real stream.

    Accepts one frame (N,) or a batch (..., N); N must be a power of two.
    Unit-energy symbols give a stream with average sample power 1/2 (each
    complex time sample splits its unit variance over two reals).
    """
    s = np.asarray(symbols, dtype=complex)
    n = s.shape[-1]
    if n < 1 or n & (n - 1):
        raise ValueError(f"subcarrier count must be a power of two, got {n}")
    x = np.fft.ifft(s, norm="ortho")
    out = np.empty(s.shape[:-1] + (2 * n,), dtype=float)
    out[..., 0::2] = x.real
    out[..., 1::2] = x.imag
    return out


def ofdm_demodulate(stream) -> np.ndarray:
    """De-interleave a real stream and apply the forward unitary DFT.

    Exact inverse of `ofdm_modulate` in the absence of noise.
    """
    t = np.asarray(stream, dtype=float)
    if t.shape[-1] < 2 or t.shape[-1] % 2 != 0:
        raise ValueError(f"stream length must be even and positive, got {t.shape[-1]}")
    x = t[..., 0::2] + 1j * t[..., 1::2]
    return np.fft.fft(x, norm="ortho")
