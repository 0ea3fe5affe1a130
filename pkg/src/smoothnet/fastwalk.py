"""Compiled random-walk engine for periodic base graphs under k-smoothing.

Each step draws a fresh edit-ball proposal (same two-stage law as
:func:`smoothnet.smoothing.propose_toggles`), rejects it if the family is
``CONNECTED`` and the toggled graph disconnects, and then moves the walker
to a uniform neighbor in the toggled graph. Only the walker's neighborhood
is ever materialized; the resulting law is identical to smoothing the whole
round graph and walking on it, because rounds are smoothed independently.
"""

from __future__ import annotations

from typing import Sequence

import networkx as nx
import numba
import numpy as np

from .graph import DynamicGraph, NetworkType, StaticGraph, num_slots
from .smoothing import BallWeights, NotInFamily, RetryExhausted, SmoothingConfig, _in_family

_ALL, _CONNECTED = 0, 1
CENSORED = -1
EXHAUSTED = -2


@numba.njit(cache=True)
def _decode(s):
    v = (1 + int(np.sqrt(8.0 * s + 1.0))) // 2
    while v * (v - 1) // 2 > s:
        v -= 1
    while (v + 1) * v // 2 <= s:
        v += 1
    return s - v * (v - 1) // 2, v


@numba.njit(cache=True)
def _propose(n, cum, ta, tb, tr, adj, phase):
    """Fill toggle buffers; returns (count, removals)."""
    slots = n * (n - 1) // 2
    x = np.random.random()
    d = 0
    while d < len(cum) - 1 and cum[d] <= x:
        d += 1
    codes = np.empty(d, dtype=np.int64)
    c = 0
    while c < d:
        s = np.random.randint(0, slots)
        dup = False
        for i in range(c):
            if codes[i] == s:
                dup = True
                break
        if not dup:
            codes[c] = s
            c += 1
    removals = 0
    for i in range(d):
        a, b = _decode(codes[i])
        ta[i] = a
        tb[i] = b
        if adj[phase, a, b]:
            tr[i] = 1
            removals += 1
        else:
            tr[i] = 0
    return d, removals


@numba.njit(cache=True)
def _removed(x, y, d, ta, tb, tr):
    for i in range(d):
        if tr[i] and ((ta[i] == x and tb[i] == y) or (ta[i] == y and tb[i] == x)):
            return True
    return False


@numba.njit(cache=True)
def _connected_after(n, phase, indptr, indices, d, ta, tb, tr, seen, queue):
    seen[:] = 0
    seen[0] = 1
    queue[0] = 0
    head, tail, count = 0, 1, 1
    while head < tail:
        x = queue[head]
        head += 1
        for p in range(indptr[phase, x], indptr[phase, x + 1]):
            y = indices[phase, p]
            if not seen[y] and not _removed(x, y, d, ta, tb, tr):
                seen[y] = 1
                count += 1
                queue[tail] = y
                tail += 1
        for i in range(d):
            if tr[i]:
                continue
            y = -1
            if ta[i] == x:
                y = tb[i]
            elif tb[i] == x:
                y = ta[i]
            if y >= 0 and not seen[y]:
                seen[y] = 1
                count += 1
                queue[tail] = y
                tail += 1
    return count == n


@numba.njit(cache=True)
def _walk(n, period, adj, bridge, indptr, indices, loops, cum, family, retry_cap, u, v, start_round, max_steps, seed):
    """Returns (hit step or CENSORED/EXHAUSTED, final position)."""
    np.random.seed(seed)
    k = len(cum) - 1
    ta = np.empty(k + 1, dtype=np.int64)
    tb = np.empty(k + 1, dtype=np.int64)
    tr = np.empty(k + 1, dtype=np.int64)
    seen = np.empty(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    cur = u
    if u == v:
        return 0, cur
    for step in range(1, max_steps + 1):
        phase = (start_round + step - 2) % period
        d = 0
        if k > 0:
            ok = False
            for _ in range(retry_cap):
                d, removals = _propose(n, cum, ta, tb, tr, adj, phase)
                if family == _ALL or removals == 0:
                    ok = True
                elif removals == 1 and d == 1 and not bridge[phase, ta[0], tb[0]]:
                    ok = True
                else:
                    ok = _connected_after(n, phase, indptr, indices, d, ta, tb, tr, seen, queue)
                if ok:
                    break
            if not ok:
                return EXHAUSTED, cur
        base = indptr[phase, cur + 1] - indptr[phase, cur]
        n_removed = 0
        n_added = 0
        for i in range(d):
            if ta[i] == cur or tb[i] == cur:
                if tr[i]:
                    n_removed += 1
                else:
                    n_added += 1
        loop = 1 if loops[phase, cur] else 0
        choices = base - n_removed + n_added + loop
        if choices > 0:
            while True:
                j = np.random.randint(0, base + n_added + loop)
                if j < base:
                    y = indices[phase, indptr[phase, cur] + j]
                    if _removed(cur, y, d, ta, tb, tr):
                        continue
                    cur = y
                elif j < base + n_added:
                    j -= base
                    for i in range(d):
                        if not tr[i] and (ta[i] == cur or tb[i] == cur):
                            if j == 0:
                                cur = tb[i] if ta[i] == cur else ta[i]
                                break
                            j -= 1
                break
        if cur == v:
            return step, cur
    return CENSORED, cur


@numba.njit(cache=True)
def _walk_many(n, period, adj, bridge, indptr, indices, loops, cum, family, retry_cap, u, v, start_round, max_steps, seeds):
    hits = np.empty(len(seeds), dtype=np.int64)
    ends = np.empty(len(seeds), dtype=np.int64)
    for i in range(len(seeds)):
        h, e = _walk(n, period, adj, bridge, indptr, indices, loops, cum, family, retry_cap, u, v, start_round, max_steps, seeds[i])
        hits[i] = h
        ends[i] = e
    return hits, ends


class FastWalkEngine:
    """Walks on a k-smoothed periodic dynamic graph.

    Only ``ALL`` and ``CONNECTED`` smoothing are supported (walks are not
    studied on matchings).
    """

    def __init__(self, h: DynamicGraph, cfg: SmoothingConfig):
        if h.period is None:
            raise ValueError(f"{h!r} is not periodic; use processes.random_walk_hit")
        if cfg.network_type is NetworkType.PAIRING:
            raise ValueError("the compiled walk engine does not support pairing smoothing")
        cfg.check_range(h.n)
        graphs: Sequence[StaticGraph] = [h[r] for r in range(1, h.period + 1)]
        for g in graphs:
            if not _in_family(g, cfg.network_type):
                raise NotInFamily(f"round graph of {h.name} is not in the {cfg.network_type.value} family")
        n, p = h.n, h.period
        self.n, self.period, self.cfg = n, p, cfg
        self.adj = np.zeros((p, n, n), dtype=np.uint8)
        self.bridge = np.zeros((p, n, n), dtype=np.uint8)
        self.loops = np.zeros((p, n), dtype=np.uint8)
        width = max(2 * len(g.edges) for g in graphs) or 1
        self.indptr = np.zeros((p, n + 1), dtype=np.int64)
        self.indices = np.zeros((p, width), dtype=np.int64)
        for j, g in enumerate(graphs):
            pos = 0
            for x in range(n):
                nb = g.adjacency[x]
                self.indices[j, pos : pos + len(nb)] = nb
                pos += len(nb)
                self.indptr[j, x + 1] = pos
                self.adj[j, x, list(nb)] = 1
            for x in g.self_loops:
                self.loops[j, x] = 1
            if cfg.network_type is NetworkType.CONNECTED:
                for a, b in nx.bridges(nx.Graph(list(g.edges))):
                    self.bridge[j, a, b] = self.bridge[j, b, a] = 1
        self.cum = np.array(BallWeights.of(n, cfg.k).cumulative if cfg.k else [1.0], dtype=np.float64)
        self.family = _CONNECTED if cfg.network_type is NetworkType.CONNECTED else _ALL
        assert num_slots(n) >= cfg.k

    def _run(self, u: int, v: int, start_round: int, max_steps: int, seeds: Sequence[int]):
        seeds = np.asarray([s % (2**32) for s in seeds], dtype=np.int64)
        hits, ends = _walk_many(
            self.n, self.period, self.adj, self.bridge, self.indptr, self.indices, self.loops,
            self.cum, self.family, self.cfg.retry_cap, u, v, start_round, max_steps, seeds,
        )
        if (hits == EXHAUSTED).any():
            raise RetryExhausted(self.cfg.retry_cap, self.cfg.k, self.cfg.network_type, self.n)
        return hits, ends

    def hit_times(self, u: int, v: int, max_steps: int, seeds: Sequence[int]) -> np.ndarray:
        """Hitting step per seed; ``CENSORED`` (-1) when ``max_steps`` ran out."""
        if max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        return self._run(u, v, 1, max_steps, seeds)[0]

    def positions_after(self, u: int, steps: int, seeds: Sequence[int], start_round: int = 1) -> np.ndarray:
        """Walker position after ``steps`` steps starting at ``start_round`` (no target)."""
        return self._run(u, -1, start_round, steps, seeds)[1]
