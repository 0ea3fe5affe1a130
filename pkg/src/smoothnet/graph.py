"""Static and dynamic graphs on a fixed, dense node set.

Nodes are the integers ``0 .. n-1``. An undirected edge is stored as a
normalized pair ``(u, v)`` with ``u < v``; these pairs are the *edge slots*
of the smoothing universe (there are ``n*(n-1)/2`` of them). Self-loops are a
per-node flag that only matters to random walks and never counts towards
edit distance.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

EdgeSlot = tuple[int, int]


class GraphError(ValueError):
    """Raised on malformed graphs or mismatched node sets."""


def edge_slot(u: int, v: int) -> EdgeSlot:
    if u == v:
        raise GraphError(f"self-loop ({u}, {v}) is not an edge slot")
    return (u, v) if u < v else (v, u)


def num_slots(n: int) -> int:
    return n * (n - 1) // 2


def slot_index(u: int, v: int) -> int:
    """Dense index of slot ``(u, v)``, ordered by the larger endpoint."""
    if u > v:
        u, v = v, u
    return v * (v - 1) // 2 + u


def slot_pair(index: int) -> EdgeSlot:
    v = (1 + math.isqrt(1 + 8 * index)) // 2
    return (index - v * (v - 1) // 2, v)


class CommRule(enum.Enum):
    RELIABLE_BROADCAST = "reliable_broadcast"
    PAIR_EXCHANGE = "pair_exchange"
    NONE = "none"


class NetworkType(enum.Enum):
    """Graph family plus the communication rule that goes with it."""

    CONNECTED = "connected"
    PAIRING = "pairing"
    ALL = "all"

    @property
    def comm_rule(self) -> CommRule:
        return _COMM_RULES[self]

    @classmethod
    def parse(cls, value: "str | NetworkType") -> "NetworkType":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown network type {value!r}") from None


_COMM_RULES = {
    NetworkType.CONNECTED: CommRule.RELIABLE_BROADCAST,
    NetworkType.PAIRING: CommRule.PAIR_EXCHANGE,
    NetworkType.ALL: CommRule.NONE,
}


@dataclass(frozen=True)
class StaticGraph:
    """Undirected simple graph on nodes ``0..n-1`` with optional self-loop flags.

    Build instances with :meth:`from_edges`, which normalizes endpoint
    order; the raw constructor expects already-normalized slots.
    """

    n: int
    edges: frozenset[EdgeSlot]
    self_loops: frozenset[int] = field(default=frozenset())

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GraphError(f"node count must be positive, got {self.n}")
        for u, v in self.edges:
            if not 0 <= u < v < self.n:
                raise GraphError(f"invalid edge slot ({u}, {v}) for n={self.n}")
        for v in self.self_loops:
            if not 0 <= v < self.n:
                raise GraphError(f"self-loop on unknown node {v}")

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[tuple[int, int]] = (), self_loops: Iterable[int] | bool = ()
    ) -> "StaticGraph":
        if self_loops is True:
            loops = frozenset(range(n))
        elif self_loops is False:
            loops = frozenset()
        else:
            loops = frozenset(self_loops)
        return cls(n, frozenset(edge_slot(u, v) for u, v in edges), loops)

    @classmethod
    def _unchecked(cls, n: int, edges: frozenset[EdgeSlot], self_loops: frozenset[int]) -> "StaticGraph":
        # Skips the O(m) validation; callers guarantee normalized, in-range slots.
        g = object.__new__(cls)
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "edges", edges)
        object.__setattr__(g, "self_loops", self_loops)
        return g

    def __repr__(self) -> str:
        return f"StaticGraph(n={self.n}, m={len(self.edges)}, loops={len(self.self_loops)})"

    def has_edge(self, u: int, v: int) -> bool:
        return edge_slot(u, v) in self.edges

    def has_self_loop(self, v: int) -> bool:
        return v in self.self_loops

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Sorted neighbor tuples, self-loops excluded."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` integer array in no particular order."""
        origin = self.__dict__.pop("_toggled_from", None)
        if origin is not None:
            return _derive_edge_array(*origin)
        if not self.edges:
            return np.empty((0, 2), dtype=np.int64)
        return np.array(sorted(self.edges), dtype=np.int64)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def to_text(self) -> str:
        lines = [f"n {self.n}"]
        lines += [f"{u} {v}" for u, v in sorted(self.edges)]
        if self.self_loops:
            lines.append("loops " + " ".join(str(v) for v in sorted(self.self_loops)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "StaticGraph":
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0][0] != "n":
            raise GraphError("edge-list text must start with 'n <count>'")
        n = int(lines[0][1])
        edges, loops = [], []
        for parts in lines[1:]:
            if parts[0] == "loops":
                loops = [int(p) for p in parts[1:]]
            else:
                edges.append((int(parts[0]), int(parts[1])))
        return cls.from_edges(n, edges, loops)


def is_connected(g: StaticGraph) -> bool:
    if g.n == 1:
        return True
    if len(g.edges) < g.n - 1:
        return False
    adj = g.adjacency
    seen = bytearray(g.n)
    seen[0] = 1
    queue = deque([0])
    count = 1
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = 1
                count += 1
                queue.append(y)
    return count == g.n


def is_matching(g: StaticGraph) -> bool:
    touched: set[int] = set()
    for u, v in g.edges:
        if u in touched or v in touched:
            return False
        touched.add(u)
        touched.add(v)
    return True


def allowed(g: StaticGraph, network_type: NetworkType) -> bool:
    if network_type is NetworkType.CONNECTED:
        return is_connected(g)
    if network_type is NetworkType.PAIRING:
        return is_matching(g)
    return True


def _check_same_n(g: StaticGraph, h: StaticGraph) -> None:
    if g.n != h.n:
        raise GraphError(f"graphs have different node counts ({g.n} vs {h.n})")


def edit_distance(g: StaticGraph, h: StaticGraph) -> int:
    _check_same_n(g, h)
    return len(g.edges ^ h.edges)


def toggle_edges(g: StaticGraph, slots: Iterable[tuple[int, int]]) -> StaticGraph:
    """Flip the presence of each slot; self-loop flags are kept."""
    toggles = set()
    for u, v in slots:
        s = edge_slot(u, v)
        if not 0 <= s[0] < s[1] < g.n:
            raise GraphError(f"invalid edge slot {s} for n={g.n}")
        if s in toggles:
            raise GraphError(f"slot {s} listed twice")
        toggles.add(s)
    return _toggled(g, toggles)


def _toggled(g: StaticGraph, toggles: set[EdgeSlot]) -> StaticGraph:
    if not toggles:
        return g
    out = StaticGraph._unchecked(g.n, g.edges.symmetric_difference(toggles), g.self_loops)
    # Large parents are reused across many toggles; derive the array from theirs.
    if len(g.edges) > 64:
        out.__dict__["_toggled_from"] = (g, frozenset(toggles))
    return out


def _derive_edge_array(parent: StaticGraph, toggles: frozenset[EdgeSlot]) -> np.ndarray:
    removed = [s for s in toggles if s in parent.edges]
    added = [s for s in toggles if s not in parent.edges]
    arr = parent.edge_array
    if removed:
        n = parent.n
        codes = arr[:, 1] * n + arr[:, 0]
        gone = np.array([v * n + u for u, v in removed], dtype=np.int64)
        arr = arr[~np.isin(codes, gone)]
    if added:
        arr = np.vstack([arr, np.array(added, dtype=np.int64)])
    return arr


def neighbors(g: StaticGraph, v: int) -> list[int]:
    """Sorted neighbors of ``v``, followed by ``v`` itself if it has a self-loop."""
    if not 0 <= v < g.n:
        raise GraphError(f"node {v} out of range for n={g.n}")
    out = list(g.adjacency[v])
    if v in g.self_loops:
        out.append(v)
    return out


class DynamicGraph:
    """Round-indexed source of static graphs (rounds start at 1).

    ``round_graph`` must be deterministic. ``period`` is set when the
    sequence is known to repeat (``H[r] == H[r + period]`` for all r), which
    lets exact solvers work on the finite phase space.
    """

    def __init__(
        self,
        n: int,
        round_graph: Callable[[int], StaticGraph],
        length: Optional[int] = None,
        period: Optional[int] = None,
        name: str = "dynamic",
    ):
        if n < 2:
            raise GraphError(f"dynamic graphs need n >= 2, got {n}")
        if length is not None and length < 0:
            raise GraphError("length must be non-negative")
        self.n = n
        self._round_graph = round_graph
        self.length = length
        self.period = period
        self.name = name

    def __getitem__(self, r: int) -> StaticGraph:
        if r < 1:
            raise IndexError(f"rounds start at 1, got {r}")
        if self.length is not None and r > self.length:
            raise IndexError(f"round {r} beyond length {self.length}")
        g = self._round_graph(r)
        if g.n != self.n:
            raise GraphError(f"round {r} produced n={g.n}, expected {self.n}")
        return g

    def __len__(self) -> int:
        if self.length is None:
            raise TypeError("infinite dynamic graph has no length")
        return self.length

    def __iter__(self) -> Iterator[StaticGraph]:
        if self.length is None:
            raise TypeError("refusing to iterate an infinite dynamic graph")
        return (self[r] for r in range(1, self.length + 1))

    def __repr__(self) -> str:
        return f"DynamicGraph({self.name!r}, n={self.n}, length={self.length}, period={self.period})"

    @classmethod
    def constant(cls, g: StaticGraph, length: Optional[int] = None, name: str = "constant") -> "DynamicGraph":
        return cls(g.n, lambda r: g, length=length, period=1, name=name)

    @classmethod
    def from_sequence(cls, graphs: list[StaticGraph], name: str = "sequence") -> "DynamicGraph":
        if not graphs:
            raise GraphError("use DynamicGraph(n, ..., length=0) for an empty sequence")
        seq = tuple(graphs)
        return cls(seq[0].n, lambda r: seq[r - 1], length=len(seq), name=name)
