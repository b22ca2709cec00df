"""Receiver algorithms: conditional-MAP detection over LED active sets, ZF and MMSE.

The MAP detector hypothesizes each of the 2^(n_tx/2) active sets, estimates
the sample magnitudes with a precomputed regularized least-squares filter,
clips them to be nonnegative (light intensity cannot be negative), scores the
hypothesis with a residual-plus-prior metric, and keeps the minimum. The
filters solve

    (Hbar^T Hbar + 2 sigma_w^2 I) A = Hbar^T

per active submatrix Hbar, where sigma_w^2 is the per-detector noise variance
and the factor 2 matches the 1/2 average power of the transmitted stream.

All detectors have a batched variant operating on y stacked column-wise,
which the Monte Carlo engine uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .glim import ActiveSet, LedMapping, candidate_column_indices

__all__ = [
    "Detection",
    "MapFilterBank",
    "precompute_map_filters",
    "map_detect",
    "map_detect_batch",
    "zf_detect",
    "zf_detect_batch",
    "mmse_detect",
    "mmse_detect_batch",
]


@dataclass(frozen=True)
class Detection:
    """Signed sample estimates, the detected active set, and the winning metric."""

    signed_block: np.ndarray
    active: ActiveSet
    metric: float


@dataclass(frozen=True)
class MapFilterBank:
    """Per-active-set filters A and submatrices Hbar at a fixed noise variance.

    Immutable after construction; safe to share read-only across workers.
    """

    mapping: LedMapping
    noise_var: float
    submatrices: np.ndarray  # (candidates, n_rx, n_pairs)
    filters: np.ndarray  # (candidates, n_pairs, n_rx)

    def __post_init__(self) -> None:
        self.submatrices.setflags(write=False)
        self.filters.setflags(write=False)

    @property
    def n_candidates(self) -> int:
        return self.filters.shape[0]

    @property
    def n_rx(self) -> int:
        return self.filters.shape[2]


def precompute_map_filters(channel, mapping: LedMapping, noise_var: float) -> MapFilterBank:
    """Solve the filter normal equations for every active set of the mapping.

    With zero noise variance the filters reduce to left pseudoinverses, which
    requires every active submatrix to have full column rank.
    """
    if noise_var < 0:
        raise ValueError(f"noise variance must be nonnegative, got {noise_var}")
    if mapping.n_tx != channel.n_tx:
        raise ValueError(
            f"mapping covers {mapping.n_tx} LEDs but the channel has {channel.n_tx}"
        )
    cols = candidate_column_indices(mapping)
    sub = np.ascontiguousarray(np.transpose(channel.gains[:, cols], (1, 0, 2)))
    if noise_var == 0:
        ranks = np.linalg.matrix_rank(sub)
        bad = np.flatnonzero(ranks < mapping.n_pairs)
        if bad.size:
            j = int(bad[0])
            raise np.linalg.LinAlgError(
                f"active set {j} (columns {list(cols[j] + 1)}) is rank deficient; "
                "zero-noise filters need full column rank"
            )
    gram = sub.transpose(0, 2, 1) @ sub + 2.0 * noise_var * np.eye(mapping.n_pairs)
    filters = np.linalg.solve(gram, sub.transpose(0, 2, 1))
    return MapFilterBank(
        mapping=mapping,
        noise_var=float(noise_var),
        submatrices=sub,
        filters=filters,
    )


def map_detect_batch(y, bank: MapFilterBank, rank_by_unclipped: bool = False):
    """Conditional-MAP detection for received columns y of shape (n_rx, B).

    Returns (signed (n_pairs, B), winner index (B,), metric (B,)). Metric ties
    break toward the lowest candidate index. `rank_by_unclipped` scores the
    candidates at the raw filter output instead of the clipped one (debug
    comparison); the returned estimates are clipped either way.
    """
    yv = np.asarray(y, dtype=float)
    if yv.ndim != 2 or yv.shape[0] != bank.n_rx:
        raise ValueError(f"expected received columns of shape ({bank.n_rx}, B)")
    raw = np.einsum("cpr,rb->cpb", bank.filters, yv)
    clipped = np.maximum(raw, 0.0)
    scored = raw if rank_by_unclipped else clipped
    resid = yv[None, :, :] - np.einsum("crp,cpb->crb", bank.submatrices, scored)
    metrics = np.einsum("crb,crb->cb", resid, resid)
    metrics += 2.0 * bank.noise_var * np.einsum("cpb,cpb->cb", scored, scored)
    winner = np.argmin(metrics, axis=0)
    best = np.take_along_axis(clipped, winner[None, None, :], axis=0)[0]
    n = bank.mapping.n_pairs
    neg = (winner[None, :] >> np.arange(n)[:, None]) & 1
    signed = np.where(neg == 1, -best, best)
    return signed, winner, np.take_along_axis(metrics, winner[None, :], axis=0)[0]


def map_detect(y, bank: MapFilterBank, rank_by_unclipped: bool = False) -> Detection:
    """Detect a single received vector with the precomputed filter bank."""
    yv = np.asarray(y, dtype=float)
    if yv.ndim != 1:
        raise ValueError("map_detect expects a single received vector; "
                         "use map_detect_batch for stacked columns")
    signed, winner, metric = map_detect_batch(yv[:, None], bank, rank_by_unclipped)
    active = ActiveSet.from_index(int(winner[0]), bank.mapping.n_pairs)
    return Detection(signed_block=signed[:, 0], active=active, metric=float(metric[0]))


def _linear_detect_batch(yv: np.ndarray, w: np.ndarray, channel, mapping: LedMapping):
    """Shared ZF/MMSE path: per-LED estimate, pair differencing, larger-entry choice."""
    z_hat = w @ yv
    zp = z_hat[mapping.plus_indices]
    zm = z_hat[mapping.minus_indices]
    signed = zp - zm
    resid = yv - channel.gains @ z_hat
    metrics = np.einsum("rb,rb->b", resid, resid)
    neg = zm > zp  # ties report the positive branch
    winner = (neg.astype(np.int64) << np.arange(mapping.n_pairs)[:, None]).sum(axis=0)
    return signed, winner, metrics


def _check_received(y, channel) -> np.ndarray:
    yv = np.asarray(y, dtype=float)
    if yv.ndim != 2 or yv.shape[0] != channel.n_rx:
        raise ValueError(f"expected received columns of shape ({channel.n_rx}, B)")
    return yv


def zf_matrix(channel) -> np.ndarray:
    """Left pseudoinverse of the channel; errors out on rank deficiency."""
    if np.linalg.matrix_rank(channel.gains) < channel.n_tx:
        raise np.linalg.LinAlgError("channel matrix is rank deficient; zero-forcing undefined")
    return np.linalg.pinv(channel.gains)


def mmse_matrix(channel, noise_var: float) -> np.ndarray:
    """Regularized linear filter (H^T H + 2 sigma_w^2 I)^-1 H^T; ZF when sigma is 0."""
    if noise_var < 0:
        raise ValueError(f"noise variance must be nonnegative, got {noise_var}")
    if noise_var == 0:
        return zf_matrix(channel)
    g = channel.gains
    gram = g.T @ g + 2.0 * noise_var * np.eye(channel.n_tx)
    return np.linalg.solve(gram, g.T)


def zf_detect_batch(y, channel, mapping: LedMapping):
    """Zero-forcing detection for received columns (n_rx, B)."""
    return _linear_detect_batch(_check_received(y, channel), zf_matrix(channel), channel, mapping)


def mmse_detect_batch(y, channel, noise_var: float, mapping: LedMapping):
    """Linear MMSE detection for received columns (n_rx, B)."""
    yv = _check_received(y, channel)
    return _linear_detect_batch(yv, mmse_matrix(channel, noise_var), channel, mapping)


def _wrap_single(signed, winner, metric, n_pairs: int) -> Detection:
    active = ActiveSet.from_index(int(winner[0]), n_pairs)
    return Detection(signed_block=signed[:, 0], active=active, metric=float(metric[0]))


def zf_detect(y, channel, mapping: LedMapping) -> Detection:
    """Zero-forcing detection of a single received vector."""
    yv = np.asarray(y, dtype=float)
    if yv.ndim != 1:
        raise ValueError("zf_detect expects a single received vector")
    return _wrap_single(*zf_detect_batch(yv[:, None], channel, mapping), mapping.n_pairs)


def mmse_detect(y, channel, noise_var: float, mapping: LedMapping) -> Detection:
    """Linear MMSE detection of a single received vector."""
    yv = np.asarray(y, dtype=float)
    if yv.ndim != 1:
        raise ValueError("mmse_detect expects a single received vector")
    return _wrap_single(
        *mmse_detect_batch(yv[:, None], channel, noise_var, mapping), mapping.n_pairs
    )
