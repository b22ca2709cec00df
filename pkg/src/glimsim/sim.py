"""Seeded Monte Carlo bit-error-rate engine for the GLIM link.

Each frame draws its bits and noise from a dedicated random stream keyed by
(seed, SNR index, frame index), so results are bit-identical no matter how
frames are partitioned across workers. Frames are simulated in deterministic
rounds; the per-point stopping rule (minimum bits AND minimum errors, with a
hard bit cap) is evaluated only at round boundaries.

SNR convention: the transmitted real stream has average sample power 1/2, and
snr_db compares that power to the per-photodetector noise variance, so
sigma_w^2 = 0.5 / 10^(snr_db/10).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .channel import ChannelMatrix, RoomGeometry, build_lambertian_channel, load_channel_csv, normalize_channel
from .detect import MapFilterBank, map_detect_batch, mmse_matrix, precompute_map_filters, zf_matrix
from .glim import LedMapping, map_blocks
from .modem import Constellation, make_constellation, ofdm_demodulate, ofdm_modulate, qam_demap, qam_map
from .selection import select_mapping

__all__ = [
    "DETECTORS",
    "BerRecord",
    "SimConfig",
    "sigma_from_snr",
    "count_bit_errors",
    "resolve_channel",
    "run_ber_sweep",
]

DETECTORS = ("zf", "mmse", "map")

ChannelSource = Union[ChannelMatrix, RoomGeometry, str, Path]

# Upper bound on frames vectorized at once; keeps the MAP candidate tensor
# (2^(n_tx/2) x n_pairs x blocks) in the tens of megabytes.
_FRAMES_PER_SLICE = 512


def sigma_from_snr(snr_db: float) -> float:
    """Noise variance sigma_w^2 for a transmit-sample power of 1/2."""
    return 0.5 / 10.0 ** (snr_db / 10.0)


def count_bit_errors(sent, received) -> int:
    """Hamming distance between two equal-length bit sequences."""
    a = np.asarray(sent)
    b = np.asarray(received)
    if a.shape != b.shape:
        raise ValueError(f"bit sequences differ in shape: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


@dataclass(frozen=True)
class BerRecord:
    """One Monte Carlo point: counts and the resulting BER estimate."""

    snr_db: float
    bits_sent: int
    bit_errors: int
    ber: float
    detector: str
    qam_order: int
    selection: str
    seed: int


@dataclass(frozen=True)
class SimConfig:
    """Everything that determines a BER sweep.

    `selection` is "off" (sequential pairing), "auto" (run the selector), or
    an explicit LedMapping. `noise_var_override` replaces the per-point
    channel noise variance (e.g. 0.0 for noiseless runs); `detector_noise_var`
    sets the design variance of the MAP/MMSE filters when it must differ from
    the channel noise (default: equal).
    """

    channel: ChannelSource
    snr_grid_db: Tuple[float, ...]
    detector: str = "map"
    qam_order: int = 4
    n_subcarriers: int = 64
    selection: Union[str, LedMapping] = "off"
    normalize: bool = True
    min_bits: int = 100_000
    min_errors: int = 100
    max_bits: int = 10_000_000
    seed: int = 1
    workers: int = 1
    noise_var_override: Optional[float] = None
    detector_noise_var: Optional[float] = None

    def __post_init__(self) -> None:
        grid = tuple(float(s) for s in self.snr_grid_db)
        if not grid:
            raise ValueError("snr_grid_db must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("snr_grid_db must be strictly increasing")
        object.__setattr__(self, "snr_grid_db", grid)
        if self.detector not in DETECTORS:
            raise ValueError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        if self.qam_order not in (4, 8, 16):
            raise ValueError(f"qam_order must be 4, 8 or 16, got {self.qam_order}")
        n = self.n_subcarriers
        if n < 1 or n & (n - 1):
            raise ValueError(f"n_subcarriers must be a power of two, got {n}")
        if self.min_bits < 1_000:
            raise ValueError(f"min_bits must be at least 1000, got {self.min_bits}")
        if self.min_errors < 0:
            raise ValueError("min_errors must be nonnegative")
        if self.max_bits < self.min_bits:
            raise ValueError("max_bits must be at least min_bits")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if isinstance(self.selection, str) and self.selection not in ("off", "auto"):
            raise ValueError(f"selection must be 'off', 'auto' or a LedMapping, got {self.selection!r}")
        if self.noise_var_override is not None and self.noise_var_override < 0:
            raise ValueError("noise_var_override must be nonnegative")
        if self.detector_noise_var is not None and self.detector_noise_var < 0:
            raise ValueError("detector_noise_var must be nonnegative")


def resolve_channel(source: ChannelSource, normalize: bool = True) -> ChannelMatrix:
    """Materialize a channel matrix from a geometry, CSV path, or pass one through."""
    if isinstance(source, ChannelMatrix):
        cm = source
    elif isinstance(source, RoomGeometry):
        cm = build_lambertian_channel(source)
    elif isinstance(source, (str, Path)):
        cm = load_channel_csv(source)
    else:
        raise TypeError(f"unsupported channel source {type(source).__name__}")
    return normalize_channel(cm) if normalize else cm


def resolve_mapping(cfg: SimConfig, channel: ChannelMatrix) -> Tuple[LedMapping, str]:
    """Resolve the configured selection mode into (mapping, record label)."""
    if isinstance(cfg.selection, LedMapping):
        return cfg.selection, cfg.selection.to_string("|")
    if cfg.selection == "auto":
        return select_mapping(channel), "auto"
    return LedMapping.sequential(channel.n_tx), "off"


@dataclass(frozen=True)
class _PointRuntime:
    """Picklable per-SNR-point state shipped to worker processes."""

    seed: int
    snr_index: int
    constellation: Constellation
    n_subcarriers: int
    mapping: LedMapping
    channel: ChannelMatrix
    noise_sigma: float
    detector: str
    bank: Optional[MapFilterBank]
    linear_filter: Optional[np.ndarray]

    @property
    def bits_per_frame(self) -> int:
        return self.n_subcarriers * self.constellation.bits_per_symbol

    @property
    def blocks_per_frame(self) -> int:
        return 2 * self.n_subcarriers // self.mapping.n_pairs


def _detect_stream(rt: _PointRuntime, y: np.ndarray) -> np.ndarray:
    if rt.detector == "map":
        signed, _, _ = map_detect_batch(y, rt.bank)
        return signed
    z_hat = rt.linear_filter @ y
    return z_hat[rt.mapping.plus_indices] - z_hat[rt.mapping.minus_indices]


def _run_chunk(rt: _PointRuntime, frame_start: int, n_frames: int) -> Tuple[int, int]:
    """Simulate a contiguous run of frames; returns (bits sent, bit errors)."""
    c = rt.constellation
    n_fft = rt.n_subcarriers
    n_pairs = rt.mapping.n_pairs
    n_rx = rt.channel.n_rx
    bpf = rt.bits_per_frame
    blocks_pf = rt.blocks_per_frame
    bits_total = 0
    errors = 0
    done = 0
    while done < n_frames:
        count = min(_FRAMES_PER_SLICE, n_frames - done)
        start = frame_start + done
        bits = np.empty((count, bpf), dtype=np.int8)
        noise = np.empty((count, n_rx, blocks_pf), dtype=float) if rt.noise_sigma > 0 else None
        for f in range(count):
            rng = np.random.default_rng([rt.seed, rt.snr_index, start + f])
            bits[f] = rng.integers(0, 2, bpf, dtype=np.int8)
            if noise is not None:
                noise[f] = rng.normal(0.0, rt.noise_sigma, (n_rx, blocks_pf))
        symbols = qam_map(bits.ravel(), c).reshape(count, n_fft)
        stream = ofdm_modulate(symbols)
        blocks = stream.reshape(count * blocks_pf, n_pairs).T
        y = rt.channel.gains @ map_blocks(blocks, rt.mapping)
        if noise is not None:
            y = y + noise.transpose(1, 0, 2).reshape(n_rx, count * blocks_pf)
        signed_hat = _detect_stream(rt, y)
        stream_hat = signed_hat.T.reshape(count, 2 * n_fft)
        bits_hat = qam_demap(ofdm_demodulate(stream_hat).ravel(), c)
        errors += count_bit_errors(bits.ravel(), bits_hat)
        bits_total += count * bpf
        done += count
    return bits_total, errors


def _worker_splits(total: int, workers: int) -> list:
    base, extra = divmod(total, workers)
    sizes = [base + (1 if i < extra else 0) for i in range(workers)]
    return [s for s in sizes if s > 0]


def _next_round_frames(
    frames_done: int, bits: int, errors: int, cfg: SimConfig, bpf: int, max_frames: int
) -> int:
    """Deterministic escalation: reach min_bits first, then grow toward min_errors."""
    min_frames = math.ceil(cfg.min_bits / bpf)
    if frames_done == 0:
        grow = min_frames
    elif errors == 0:
        grow = frames_done  # no information yet: double
    else:
        projected = math.ceil(frames_done * cfg.min_errors / errors)
        grow = max(projected - frames_done, 1)
        grow = min(grow, frames_done)  # at most double per round
    grow = max(grow, min_frames - frames_done)
    return min(grow, max_frames - frames_done)


def _simulate_point(rt: _PointRuntime, cfg: SimConfig, executor) -> Tuple[int, int]:
    bpf = rt.bits_per_frame
    max_frames = max(cfg.max_bits // bpf, 1)
    frames_done = 0
    bits = 0
    errors = 0
    while frames_done < max_frames and not (bits >= cfg.min_bits and errors >= cfg.min_errors):
        round_frames = _next_round_frames(frames_done, bits, errors, cfg, bpf, max_frames)
        if executor is None:
            results = [_run_chunk(rt, frames_done, round_frames)]
        else:
            starts = []
            offset = frames_done
            for size in _worker_splits(round_frames, cfg.workers):
                starts.append((offset, size))
                offset += size
            results = list(
                executor.map(_run_chunk, [rt] * len(starts), [s for s, _ in starts], [n for _, n in starts])
            )
        for b, e in results:
            bits += b
            errors += e
        frames_done += round_frames
    return bits, errors


def run_ber_sweep(
    cfg: SimConfig,
    progress: Optional[Callable[[BerRecord], None]] = None,
) -> list:
    """Sweep the SNR grid and return one BerRecord per point.

    Deterministic for a fixed (config, seed) regardless of the worker count.
    """
    channel = resolve_channel(cfg.channel, cfg.normalize)
    mapping, label = resolve_mapping(cfg, channel)
    if mapping.n_tx != channel.n_tx:
        raise ValueError(
            f"mapping covers {mapping.n_tx} LEDs but the channel has {channel.n_tx}"
        )
    if (2 * cfg.n_subcarriers) % mapping.n_pairs != 0:
        raise ValueError(
            f"frame of {2 * cfg.n_subcarriers} samples does not divide into "
            f"blocks of {mapping.n_pairs}"
        )
    constellation = make_constellation(cfg.qam_order)
    records = []
    executor = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for snr_index, snr_db in enumerate(cfg.snr_grid_db):
            noise_var = (
                cfg.noise_var_override
                if cfg.noise_var_override is not None
                else sigma_from_snr(snr_db)
            )
            design_var = (
                cfg.detector_noise_var if cfg.detector_noise_var is not None else noise_var
            )
            bank = None
            linear = None
            if cfg.detector == "map":
                bank = precompute_map_filters(channel, mapping, design_var)
            elif cfg.detector == "mmse":
                linear = mmse_matrix(channel, design_var)
            else:
                linear = zf_matrix(channel)
            rt = _PointRuntime(
                seed=cfg.seed,
                snr_index=snr_index,
                constellation=constellation,
                n_subcarriers=cfg.n_subcarriers,
                mapping=mapping,
                channel=channel,
                noise_sigma=math.sqrt(noise_var),
                detector=cfg.detector,
                bank=bank,
                linear_filter=linear,
            )
            bits, errors = _simulate_point(rt, cfg, executor)
            record = BerRecord(
                snr_db=snr_db,
                bits_sent=bits,
                bit_errors=errors,
                ber=errors / bits,
                detector=cfg.detector,
                qam_order=cfg.qam_order,
                selection=label,
                seed=cfg.seed,
            )
            records.append(record)
            if progress is not None:
                progress(record)
    finally:
        if executor is not None:
            executor.shutdown()
    return records
