"""GLIM spatial mapping: sign splitting, LED pair mapping, and the forward model.

Each real sample rides on a dedicated LED pair: its magnitude drives exactly
one LED of the pair and the choice of LED encodes the sign. A zero sample
counts as positive (both LEDs stay dark, the positive branch is reported).
LED indices are 1-based in pair notation; array columns are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "LedMapping",
    "ActiveSet",
    "GlimBlock",
    "sign_split",
    "map_block",
    "map_blocks",
    "unmap_block",
    "true_active_set",
    "forward_model",
    "active_column_indices",
    "active_submatrix",
    "candidate_column_indices",
]


@dataclass(frozen=True)
class LedMapping:
    """Ordered partition of LEDs {1..n_tx} into pairs (positive LED, negative LED).

    The first pair must list LED 1 first; sample slot l is carried by pair l.
    """

    pairs: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        if not pairs:
            raise ValueError("a mapping needs at least one LED pair")
        n_tx = 2 * len(pairs)
        flat = [i for pair in pairs for i in pair]
        if sorted(flat) != list(range(1, n_tx + 1)):
            raise ValueError(
                f"pairs must partition LEDs 1..{n_tx} into disjoint pairs, got {pairs}"
            )
        if pairs[0][0] != 1:
            raise ValueError(f"the first pair must list LED 1 first, got {pairs[0]}")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    @property
    def n_tx(self) -> int:
        return 2 * len(self.pairs)

    @property
    def plus_indices(self) -> np.ndarray:
        """0-based channel columns of the positive-branch LEDs."""
        return np.array([a - 1 for a, _ in self.pairs])

    @property
    def minus_indices(self) -> np.ndarray:
        """0-based channel columns of the negative-branch LEDs."""
        return np.array([b - 1 for _, b in self.pairs])

    @classmethod
    def sequential(cls, n_tx: int) -> "LedMapping":
        """The unselected baseline (1,2),(3,4),... pairing."""
        if n_tx < 2 or n_tx % 2 != 0:
            raise ValueError(f"LED count must be even and >= 2, got {n_tx}")
        return cls(tuple((i, i + 1) for i in range(1, n_tx, 2)))

    @classmethod
    def from_string(cls, text: str) -> "LedMapping":
        """Parse '1-3,2-4' (also '|'-separated); pairs are reordered canonically."""
        pairs = []
        for chunk in text.replace("|", ",").split(","):
            part = chunk.strip()
            fields = part.split("-")
            if len(fields) != 2:
                raise ValueError(f"malformed pair {part!r}; expected like '1-3'")
            try:
                pairs.append((int(fields[0]), int(fields[1])))
            except ValueError:
                raise ValueError(f"malformed pair {part!r}; expected like '1-3'") from None
        pairs.sort(key=min)
        return cls(tuple(pairs))

    def to_string(self, sep: str = ",") -> str:
        return sep.join(f"{a}-{b}" for a, b in self.pairs)


@dataclass(frozen=True)
class ActiveSet:
    """One lit LED per pair: entry l is True when the negative branch is active."""

    negatives: Tuple[bool, ...]

    @classmethod
    def from_index(cls, index: int, n_pairs: int) -> "ActiveSet":
        """Decode a candidate index; bit l set means pair l lit its negative LED."""
        if not 0 <= index < 2**n_pairs:
            raise ValueError(f"candidate index {index} out of range for {n_pairs} pairs")
        return cls(tuple(bool((index >> l) & 1) for l in range(n_pairs)))

    @property
    def index(self) -> int:
        return sum(int(neg) << l for l, neg in enumerate(self.negatives))

    @property
    def n_pairs(self) -> int:
        return len(self.negatives)


@dataclass(frozen=True)
class GlimBlock:
    """One channel use: n_tx/2 signed samples and the LED intensity vector z."""

    signed: np.ndarray
    z: np.ndarray


def sign_split(value):
    """Split reals into nonnegative (positive part, negative part).

    plus - minus reproduces the input and at most one part is nonzero;
    zero counts as positive, so both parts vanish.
    """
    v = np.asarray(value, dtype=float)
    plus = np.where(v >= 0, v, 0.0)
    minus = np.where(v < 0, -v, 0.0)
    if np.ndim(value) == 0:
        return float(plus), float(minus)
    return plus, minus


def map_blocks(signed, mapping: LedMapping) -> np.ndarray:
    """Vectorized mapper: signed samples (n_pairs,) or (n_pairs, B) -> z (n_tx[, B])."""
    s = np.asarray(signed, dtype=float)
    if s.shape[0] != mapping.n_pairs:
        raise ValueError(f"expected {mapping.n_pairs} samples per block, got {s.shape[0]}")
    plus, minus = sign_split(s)
    z = np.zeros((mapping.n_tx,) + s.shape[1:], dtype=float)
    z[mapping.plus_indices] = plus
    z[mapping.minus_indices] = minus
    return z


def map_block(signed, mapping: LedMapping) -> GlimBlock:
    """Place one block of signed samples onto the LED pairs of the mapping."""
    s = np.asarray(signed, dtype=float)
    if s.ndim != 1:
        raise ValueError("map_block expects a 1-D block of samples")
    return GlimBlock(signed=s, z=map_blocks(s, mapping))


def true_active_set(signed) -> ActiveSet:
    """Active set actually lit by a block (zero samples report the positive branch)."""
    s = np.asarray(signed, dtype=float)
    return ActiveSet(tuple(bool(v < 0) for v in s))


def unmap_block(magnitudes, active: ActiveSet) -> np.ndarray:
    """Reattach signs to nonnegative magnitude estimates per the active set."""
    m = np.asarray(magnitudes, dtype=float)
    if np.any(m < 0):
        raise ValueError("magnitudes must be nonnegative")
    if m.shape[0] != active.n_pairs:
        raise ValueError(f"expected {active.n_pairs} magnitudes, got {m.shape[0]}")
    signs = np.where(np.array(active.negatives), -1.0, 1.0)
    if m.ndim > 1:
        signs = signs.reshape((-1,) + (1,) * (m.ndim - 1))
    return signs * m


def forward_model(block, channel, noise=None) -> np.ndarray:
    """Received signal y = H z + n for a block (or raw intensity vector)."""
    z = block.z if isinstance(block, GlimBlock) else np.asarray(block, dtype=float)
    if z.shape[0] != channel.n_tx:
        raise ValueError(f"intensity vector has {z.shape[0]} entries for {channel.n_tx} LEDs")
    y = channel.gains @ z
    if noise is not None:
        n = np.asarray(noise, dtype=float)
        if n.shape != y.shape:
            raise ValueError(f"noise shape {n.shape} does not match received shape {y.shape}")
        y = y + n
    return y


def active_column_indices(mapping: LedMapping, active: ActiveSet) -> np.ndarray:
    """0-based channel columns lit under the given active set."""
    if active.n_pairs != mapping.n_pairs:
        raise ValueError("active set and mapping disagree on the pair count")
    return np.array(
        [pair[1] - 1 if neg else pair[0] - 1 for pair, neg in zip(mapping.pairs, active.negatives)]
    )


def active_submatrix(channel, mapping: LedMapping, active: ActiveSet) -> np.ndarray:
    """Channel columns of the lit LEDs, as an nR x n_pairs matrix."""
    return channel.gains[:, active_column_indices(mapping, active)]


def candidate_column_indices(mapping: LedMapping) -> np.ndarray:
    """0-based column choices for all 2^n_pairs active sets, one row per candidate.

    Candidate index bits follow `ActiveSet.from_index`: bit l set selects the
    negative-branch LED of pair l, so index 0 is the all-positive set.
    """
    n = mapping.n_pairs
    pairs0 = np.asarray(mapping.pairs) - 1
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    return pairs0[np.arange(n)[None, :], bits]
