"""LED pair selection by column correlation and worst-case condition number.

The selector scores every LED pair by the cosine between its channel columns,
drops the pairs tied at the maximum cosine (they are the hardest to tell
apart when deciding which LED of a pair fired), enumerates all remaining
perfect matchings, and keeps the matching whose worst active submatrix has
the smallest condition number. If the cosine filter removes every matching,
selection re-runs without it so a usable mapping is always returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Tuple

import numpy as np

from .glim import LedMapping, candidate_column_indices

__all__ = [
    "PairScore",
    "CandidateScore",
    "SelectionReport",
    "column_cosine",
    "condition_number",
    "score_pairs",
    "enumerate_candidates",
    "worst_active_condition",
    "analyze_selection",
    "select_mapping",
]

# Scores within this relative distance count as tied; exact float equality
# would miss symmetric geometries, where ties are exact in real arithmetic.
_SCORE_TIE_REL = 1e-9


@dataclass(frozen=True)
class PairScore:
    """Cosine similarity of the channel columns of one LED pair."""

    pair: Tuple[int, int]
    cosine: float


@dataclass(frozen=True)
class CandidateScore:
    """A candidate mapping and its worst active-submatrix condition number."""

    mapping: LedMapping
    worst_condition: float


@dataclass(frozen=True)
class SelectionReport:
    """Full selection outcome: winner, scored candidates, and the filter state."""

    selected: LedMapping
    candidates: Tuple[CandidateScore, ...]
    removed_pairs: Tuple[Tuple[int, int], ...]
    max_cosine: float
    used_fallback: bool


def column_cosine(channel, a: int, b: int) -> float:
    """Cosine between channel columns of LEDs a and b (1-based indices)."""
    if a == b:
        raise ValueError("need two distinct LED indices")
    for idx in (a, b):
        if not 1 <= idx <= channel.n_tx:
            raise ValueError(f"LED index {idx} out of range 1..{channel.n_tx}")
    ha = channel.gains[:, a - 1]
    hb = channel.gains[:, b - 1]
    na = np.linalg.norm(ha)
    nb = np.linalg.norm(hb)
    if na == 0 or nb == 0:
        raise ValueError(f"LED {a if na == 0 else b} has an all-zero channel column")
    return float(ha @ hb / (na * nb))


def condition_number(matrix) -> float:
    """Ratio of extreme singular values; +inf when the matrix is rank deficient."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] < m.shape[1]:
        raise ValueError("matrix must have at least as many rows as columns")
    s = np.linalg.svd(m, compute_uv=False)
    tol = s[0] * max(m.shape) * np.finfo(float).eps
    if s[0] == 0 or s[-1] <= tol:
        return math.inf
    return float(s[0] / s[-1])


def score_pairs(channel) -> Tuple[PairScore, ...]:
    """Cosine scores for all LED pairs, in lexicographic pair order."""
    return tuple(
        PairScore(pair=(a, b), cosine=column_cosine(channel, a, b))
        for a, b in combinations(range(1, channel.n_tx + 1), 2)
    )


def enumerate_candidates(n_tx: int, forbidden: Iterable[Tuple[int, int]] = ()) -> list:
    """All perfect matchings of {1..n_tx} that avoid the forbidden pairs.

    Canonical, deterministic order: the pair containing the smallest unplaced
    LED comes next and lists that LED first, so the very first pair always
    starts with LED 1. Without forbidden pairs the count is (n_tx-1)!!.
    """
    if n_tx < 2 or n_tx % 2 != 0:
        raise ValueError(f"LED count must be even and >= 2, got {n_tx}")
    banned = {frozenset(p) for p in forbidden}
    out: list[LedMapping] = []

    def extend(remaining: Tuple[int, ...], acc: Tuple[Tuple[int, int], ...]) -> None:
        if not remaining:
            out.append(LedMapping(acc))
            return
        first = remaining[0]
        rest = remaining[1:]
        for i, partner in enumerate(rest):
            if frozenset((first, partner)) in banned:
                continue
            extend(rest[:i] + rest[i + 1 :], acc + ((first, partner),))

    extend(tuple(range(1, n_tx + 1)), ())
    return out


def worst_active_condition(channel, mapping: LedMapping) -> float:
    """Largest condition number over the mapping's 2^(n_tx/2) active submatrices."""
    cols = candidate_column_indices(mapping)
    return max(condition_number(channel.gains[:, c]) for c in cols)


def analyze_selection(channel) -> SelectionReport:
    """Run the full selection procedure and keep every intermediate score."""
    scores = score_pairs(channel)
    omega = max(s.cosine for s in scores)
    removed = tuple(s.pair for s in scores if s.cosine >= omega * (1.0 - _SCORE_TIE_REL))
    candidates = enumerate_candidates(channel.n_tx, removed)
    used_fallback = False
    if not candidates:
        used_fallback = True
        candidates = enumerate_candidates(channel.n_tx)
    scored = tuple(
        CandidateScore(mapping=m, worst_condition=worst_active_condition(channel, m))
        for m in candidates
    )
    # Ties (within float dust of the minimum) break toward canonical order.
    mu_min = min(c.worst_condition for c in scored)
    best = next(
        i for i, c in enumerate(scored) if c.worst_condition <= mu_min * (1.0 + _SCORE_TIE_REL)
    )
    return SelectionReport(
        selected=scored[best].mapping,
        candidates=scored,
        removed_pairs=removed,
        max_cosine=omega,
        used_fallback=used_fallback,
    )


def select_mapping(channel) -> LedMapping:
    """Pick the LED pairing that best protects active-set detection."""
    return analyze_selection(channel).selected
