"""Clairvoyant optimum for a fixed instance.

The production path is a maximum-weight matching between items and time steps.
The brute-force path enumerates every schedule and never looks at the matching,
so the two can check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import Instance, Schedule, canonicalize_eef

BRUTEFORCE_MAX_ITEMS = 8
BRUTEFORCE_MAX_STEPS = 8


class TooLarge(Exception):
    pass


@dataclass(frozen=True)
class AvailabilityGraph:
    items: tuple[str, ...]
    weights: tuple[float, ...]
    n_steps: int
    # edges[i] = steps at which items[i] is active (a contiguous range)
    edges: tuple[range, ...]

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Weight matrix (items x steps) and the boolean edge mask."""
        starts = np.array([r.start for r in self.edges])
        stops = np.array([r.stop for r in self.edges])
        t = np.arange(self.n_steps)
        mask = (t >= starts[:, None]) & (t < stops[:, None])
        w = np.asarray(self.weights, dtype=float)[:, None] * mask
        return w, mask


def availability_graph(instance: Instance) -> AvailabilityGraph:
    trace = instance.trace
    spans = trace.intervals
    ids = tuple(spans)
    return AvailabilityGraph(
        items=ids,
        weights=tuple(trace.weights[i] for i in ids),
        n_steps=len(instance.steps),
        edges=tuple(range(spans[i][0], spans[i][1] + 1) for i in ids),
    )


def optimal_gain_matching(instance: Instance, canonical: bool = True) -> tuple[float, Schedule]:
    """Maximum-weight matching of items to steps.

    Queue schedules are EEF-canonicalized unless ``canonical`` is False, which
    bulk scans use when only the gain matters.
    """
    g = availability_graph(instance)
    picks: list[str | None] = [None] * g.n_steps
    if not g.items or g.n_steps == 0:
        return 0.0, Schedule(tuple(picks))
    w, mask = g.matrix()
    rows, cols = linear_sum_assignment(w, maximize=True)
    for r, c in zip(rows, cols):
        if mask[r, c] and g.weights[r] > 0:
            picks[c] = g.items[r]
    sched = Schedule(tuple(picks))
    if canonical and instance.is_queue:
        sched = canonicalize_eef(instance, sched)
    total = math.fsum(g.weights[r] for r, c in zip(rows, cols) if picks[c] is not None)
    return total, sched


def achievable_sets(edges: list[range] | tuple[range, ...], n_steps: int) -> set[int]:
    """Bitmasks of every item set some schedule can collect.

    Walks all schedules step by step (pass, or any active uncollected item);
    schedules reaching the same collected set at the same step are merged.
    """
    active_at = [[i for i, r in enumerate(edges) if t in r] for t in range(n_steps)]
    frontier = {0}
    for t in range(n_steps):
        nxt = set(frontier)
        for mask in frontier:
            for i in active_at[t]:
                bit = 1 << i
                if not mask & bit:
                    nxt.add(mask | bit)
        frontier = nxt
    return frontier


def optimal_gain_bruteforce(instance: Instance) -> float:
    g = availability_graph(instance)
    if len(g.items) > BRUTEFORCE_MAX_ITEMS or g.n_steps > BRUTEFORCE_MAX_STEPS:
        raise TooLarge(
            f"{len(g.items)} items / {g.n_steps} steps exceeds the "
            f"{BRUTEFORCE_MAX_ITEMS}/{BRUTEFORCE_MAX_STEPS} enumeration guard"
        )
    best = 0.0
    for mask in achievable_sets(g.edges, g.n_steps):
        total = math.fsum(w for i, w in enumerate(g.weights) if mask >> i & 1)
        best = max(best, total)
    return best


def bruteforce_table(edges, n_steps: int, weight_rows: np.ndarray) -> np.ndarray:
    """Brute-force optimum for many weight vectors sharing one availability pattern."""
    masks = sorted(achievable_sets(edges, n_steps))
    n = weight_rows.shape[1]
    bits = np.array([[(m >> i) & 1 for i in range(n)] for m in masks], dtype=float)
    return (weight_rows @ bits.T).max(axis=1)
