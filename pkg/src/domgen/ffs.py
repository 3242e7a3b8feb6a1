"""Farthest Feature Sampling: greedy max-min selection over style vectors.

Picks k corpus elements that are mutually most distant in style space. The
classic trick keeps, for every corpus element, its distance to the selected
set; each round folds in the distance to the newest pick with a minimum and
selects the argmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .style import StyleVector, style_distance, styles_to_matrix

ORACLE_MAX_N = 12


@dataclass
class FfsState:
    """Selection trace: per-element distance to the selected set.

    max_dist_trace[t] is the max-min distance of the element picked at round
    t (None for the start element, whose distance is unbounded).
    """

    min_dist: np.ndarray
    selected: list[int] = field(default_factory=list)
    max_dist_trace: list[float | None] = field(default_factory=list)


@dataclass(frozen=True)
class BaseDomainSet:
    """The k selected reference styles, in selection order."""

    indices: list[int]
    styles: list[StyleVector]
    k: int

    def __post_init__(self):
        if len(self.indices) != self.k or len(self.styles) != self.k:
            raise ValueError("indices/styles length must equal k")
        if len(set(self.indices)) != self.k:
            raise ValueError("indices must be distinct")


def _resolve_start(start: int | str, n: int) -> int:
    """Accept an explicit corpus index or 'random:SEED' for a seeded draw."""
    if isinstance(start, str):
        if not start.startswith("random:"):
            raise ValueError(f"start must be an index or 'random:SEED', got {start!r}")
        seed = int(start.split(":", 1)[1])
        return int(np.random.default_rng(seed).integers(0, n))
    start = int(start)
    if not 0 <= start < n:
        raise ValueError(f"start index {start} out of range for corpus of {n}")
    return start


def _sq_dists_to(mat: np.ndarray, row: np.ndarray) -> np.ndarray:
    diff = mat - row
    return np.einsum("ij,ij->i", diff, diff)


def ffs_select_with_state(styles: list[StyleVector], k: int,
                          start: int | str) -> tuple[BaseDomainSet, FfsState]:
    """Greedy max-min selection, returning the selection state for inspection."""
    n = len(styles)
    if n == 0:
        raise ValueError("empty corpus")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    mat = styles_to_matrix(styles)
    start_idx = _resolve_start(start, n)

    state = FfsState(min_dist=np.full(n, np.inf))
    state.selected.append(start_idx)
    state.max_dist_trace.append(None)
    for _ in range(1, k):
        state.min_dist = np.minimum(state.min_dist, _sq_dists_to(mat, mat[state.selected[-1]]))
        # selected entries sit at 0; mask them out so exact duplicates can
        # never be re-picked when every remaining distance is 0
        candidates = state.min_dist.copy()
        candidates[state.selected] = -np.inf
        pick = int(np.argmax(candidates))  # argmax takes the lowest tied index
        state.max_dist_trace.append(float(state.min_dist[pick]))
        state.selected.append(pick)
    # fold in the final pick so its own entry drops to zero as well
    state.min_dist = np.minimum(state.min_dist, _sq_dists_to(mat, mat[state.selected[-1]]))
    chosen = state.selected
    return BaseDomainSet(indices=list(chosen), styles=[styles[i] for i in chosen], k=k), state


def ffs_select(styles: list[StyleVector], k: int, start: int | str) -> BaseDomainSet:
    """Select k mutually most style-distant corpus elements (ties: lowest index)."""
    base, _ = ffs_select_with_state(styles, k, start)
    return base


def maxmin_oracle(styles: list[StyleVector], k: int, start: int | str) -> BaseDomainSet:
    """Brute-force reference: each round recomputes min-distance-to-set from scratch.

    Exponential-safe sizes only (N <= 12); exists to pin down ffs_select.
    """
    n = len(styles)
    if n == 0:
        raise ValueError("empty corpus")
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle restricted to N <= {ORACLE_MAX_N}, got {n}")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    selected = [_resolve_start(start, n)]
    for _ in range(1, k):
        best_idx, best_dist = None, -1.0
        for j in range(n):
            if j in selected:
                continue
            dist_to_set = min(style_distance(styles[j], styles[s]) for s in selected)
            if dist_to_set > best_dist:
                best_idx, best_dist = j, dist_to_set
        selected.append(best_idx)
    return BaseDomainSet(indices=selected, styles=[styles[i] for i in selected], k=k)
