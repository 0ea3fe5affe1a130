"""Flooding, random walks, support sequences and exact hitting-time oracles."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import breadth_first_order

from .graph import DynamicGraph, GraphError, StaticGraph, neighbors
from .smoothing import SmoothingConfig, enumerate_smoothing_support


@dataclass(frozen=True)
class FloodResult:
    completion_round: Optional[int]
    horizon: int
    informed_history: tuple[int, ...]

    @property
    def completed(self) -> bool:
        return self.completion_round is not None


@dataclass(frozen=True)
class WalkResult:
    hit_steps: Optional[int]
    max_steps: int
    trajectory_length: int

    @property
    def censored(self) -> bool:
        return self.hit_steps is None


def flood(h: DynamicGraph, source: int, horizon: int) -> FloodResult:
    """Synchronous flooding under reliable broadcast.

    ``h`` should already be smoothed. ``informed_history[0]`` is the state
    before round 1 and entry r is the informed count after round r.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if not 0 <= source < h.n:
        raise GraphError(f"source {source} out of range for n={h.n}")
    informed = np.zeros(h.n, dtype=bool)
    informed[source] = True
    history = [1]
    last = horizon if h.length is None else min(horizon, h.length)
    for r in range(1, last + 1):
        e = h[r].edge_array
        if len(e):
            hit = informed[e[:, 0]] | informed[e[:, 1]]
            informed[e[hit].ravel()] = True
        count = int(informed.sum())
        history.append(count)
        if count == h.n:
            return FloodResult(r, horizon, tuple(history))
    return FloodResult(None, horizon, tuple(history))


def random_walk_hit(h: DynamicGraph, u: int, v: int, max_steps: int, rng: random.Random) -> WalkResult:
    """Walk from u, moving at step t to a uniform neighbor in round-t graph.

    A node without neighbors and without a self-loop stays put for that step.
    """
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    if not (0 <= u < h.n and 0 <= v < h.n):
        raise GraphError("walk endpoints out of range")
    if u == v:
        return WalkResult(0, max_steps, 0)
    cur = u
    for t in range(1, max_steps + 1):
        nb = neighbors(h[t], cur)
        if nb:
            cur = nb[rng.randrange(len(nb))]
        if cur == v:
            return WalkResult(t, max_steps, t)
    return WalkResult(None, max_steps, max_steps)


# -- support sequences ------------------------------------------------------


class DisconnectedRound(GraphError):
    """A support-sequence step found no node adjacent to the current set."""


@dataclass(frozen=True)
class SupportSequence:
    target: int
    t: int
    l: int
    sets: tuple[frozenset[int], ...]
    added: tuple[int, ...]


def build_support_sequence(h: DynamicGraph, u: int, t: int, l: int) -> SupportSequence:
    """Grow S_0 = {u} backwards in time, adding the smallest eligible node each step."""
    if not 1 <= l < t:
        raise ValueError(f"need 1 <= l < t, got l={l}, t={t}")
    current = {u}
    sets = [frozenset(current)]
    added = []
    for i in range(1, l + 1):
        adj = h[t - i].adjacency
        frontier = {y for x in current for y in adj[x]} - current
        if not frontier:
            raise DisconnectedRound(f"round {t - i} has no edge leaving the support set")
        v = min(frontier)
        current.add(v)
        sets.append(frozenset(current))
        added.append(v)
    return SupportSequence(u, t, l, tuple(sets), tuple(added))


def validate_support_sequence(h: DynamicGraph, seq: SupportSequence) -> bool:
    if not 1 <= seq.l < seq.t or len(seq.sets) != seq.l + 1:
        return False
    if any(not s <= set(range(h.n)) for s in seq.sets):
        return False
    if seq.sets[0] != {seq.target}:
        return False
    for i in range(1, seq.l + 1):
        prev, cur = seq.sets[i - 1], seq.sets[i]
        diff = cur - prev
        if not (prev < cur and len(diff) == 1):
            return False
        (v,) = diff
        g = h[seq.t - i]
        if not any(g.has_edge(v, x) for x in prev):
            return False
    return True


# -- exact oracles -----------------------------------------------------------


def walk_matrix(g: StaticGraph) -> np.ndarray:
    """One uniform-neighbor step on g; isolated loopless nodes stay put."""
    p = np.zeros((g.n, g.n))
    for x in range(g.n):
        nb = neighbors(g, x)
        if nb:
            for y in nb:
                p[x, y] += 1.0 / len(nb)
        else:
            p[x, x] = 1.0
    return p


class EnumerationTooLarge(ValueError):
    pass


def exact_smoothed_transition(g: StaticGraph, cfg: SmoothingConfig) -> np.ndarray:
    """Walk step averaged over the uniform k-smoothed version of g (tiny n only)."""
    if g.n > 6 or cfg.k > 2:
        raise EnumerationTooLarge(f"enumeration limited to n <= 6 and k <= 2 (n={g.n}, k={cfg.k})")
    support = enumerate_smoothing_support(g, cfg.k, cfg.network_type)
    return sum(walk_matrix(s) for s in support) / len(support)


def exact_hitting_time_from_transitions(mats: Sequence[np.ndarray], u: int, v: int) -> float:
    """Expected steps to reach v from u when step t uses ``mats[(t-1) % len(mats)]``."""
    if u == v:
        return 0.0
    p = len(mats)
    n = mats[0].shape[0]
    size = n * p

    def state(x: int, j: int) -> int:
        return j * n + x

    rows, cols, vals = [], [], []
    for j, m in enumerate(mats):
        nxt = (j + 1) % p
        xs, ys = np.nonzero(m)
        for x, y in zip(xs, ys):
            if x == v:
                continue
            rows.append(state(x, j))
            cols.append(state(y, nxt))
            vals.append(m[x, y])
    step = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))

    targets = [state(v, j) for j in range(p)]
    can_reach = np.zeros(size, dtype=bool)
    rev = step.T.tocsr()
    for s in targets:
        can_reach[breadth_first_order(rev, s, directed=True, return_predecessors=False)] = True
    doomed = ~can_reach
    # Any state that can wander into a doomed state has infinite expectation.
    infinite = np.zeros(size, dtype=bool)
    for s in np.flatnonzero(doomed):
        if not infinite[s]:
            infinite[breadth_first_order(rev, s, directed=True, return_predecessors=False)] = True
    start = state(u, 0)
    if infinite[start]:
        return float("inf")

    is_target = np.zeros(size, dtype=bool)
    is_target[targets] = True
    live = np.flatnonzero(~infinite & ~is_target)
    q = step[live][:, live]
    a = sp.identity(len(live), format="csc") - q.tocsc()
    h = spla.spsolve(a, np.ones(len(live)))
    idx = {s: i for i, s in enumerate(live)}
    return float(h[idx[start]])


def exact_hitting_time_periodic(
    h: DynamicGraph, u: int, v: int, cfg: Optional[SmoothingConfig] = None
) -> float:
    """Exact H(u, v) (or H_k with ``cfg`` for tiny graphs) on a periodic dynamic graph."""
    if h.period is None:
        raise ValueError(f"{h!r} has no declared period")
    graphs = [h[r] for r in range(1, h.period + 1)]
    if cfg is None or cfg.k == 0:
        mats = [walk_matrix(g) for g in graphs]
    else:
        mats = [exact_smoothed_transition(g, cfg) for g in graphs]
    return exact_hitting_time_from_transitions(mats, u, v)


__all__ = [
    "FloodResult",
    "WalkResult",
    "SupportSequence",
    "DisconnectedRound",
    "EnumerationTooLarge",
    "flood",
    "random_walk_hit",
    "build_support_sequence",
    "validate_support_sequence",
    "walk_matrix",
    "exact_smoothed_transition",
    "exact_hitting_time_from_transitions",
    "exact_hitting_time_periodic",
]
