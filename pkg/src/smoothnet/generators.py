"""Adversarial dynamic graphs and fixtures.

Node ids are 0-based. Constructions described with 1-based labels map label
``x`` to id ``x - 1`` (so the spooling source, label 1, is node 0).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .graph import DynamicGraph, GraphError, StaticGraph


@lru_cache(maxsize=4096)
def spool_graph(n: int, i: int) -> StaticGraph:
    """The i-spool: star on labels 1..i centered at i, star on i+1..n centered at i+1, plus the center edge.

    In 0-based ids the left center is ``i-1`` and the head is ``i``.
    """
    if n < 3:
        raise GraphError(f"spool graphs need n >= 3, got {n}")
    if not 1 <= i <= n - 1:
        raise GraphError(f"spool index must be in [1, {n - 1}], got {i}")
    left, head = i - 1, i
    edges = [(x, left) for x in range(left)]
    edges += [(head, x) for x in range(head + 1, n)]
    edges.append((left, head))
    return StaticGraph(n, frozenset(edges))


def spooling_dynamic(n: int) -> DynamicGraph:
    spool_graph(n, 1)  # validates n
    return DynamicGraph(n, lambda r: spool_graph(n, min(r, n - 1)), name="spooling")


@lru_cache(maxsize=1024)
def star_graph(n: int, center: int, self_loops: bool = True) -> StaticGraph:
    edges = frozenset((min(center, x), max(center, x)) for x in range(n) if x != center)
    return StaticGraph(n, edges, frozenset(range(n)) if self_loops else frozenset())


def dynamic_star(n: int) -> DynamicGraph:
    """Star whose center at round t is ``t mod (n-1)``; every node has a self-loop."""
    if n < 3:
        raise GraphError(f"dynamic star needs n >= 3, got {n}")
    return DynamicGraph(n, lambda t: star_graph(n, t % (n - 1)), period=n - 1, name="star")


def lollipop_graph(n: int) -> StaticGraph:
    """Clique on ids 0..n/2-1, path on n/2..n-1, bridge from node 0 to n/2."""
    if n < 4 or n % 2:
        raise GraphError(f"lollipop needs even n >= 4, got {n}")
    half = n // 2
    edges = [(a, b) for a in range(half) for b in range(a + 1, half)]
    edges += [(x, x + 1) for x in range(half, n - 1)]
    edges.append((0, half))
    return StaticGraph(n, frozenset(edges))


def lollipop_dynamic(n: int) -> DynamicGraph:
    """Constant lollipop. The walk endpoints are ``lollipop_endpoints(n)``."""
    return DynamicGraph.constant(lollipop_graph(n), name="lollipop")


def lollipop_endpoints(n: int) -> tuple[int, int]:
    return 0, n - 1


def clique_plus_isolate_graph(n: int) -> StaticGraph:
    if n < 3:
        raise GraphError(f"clique_plus_isolate needs n >= 3, got {n}")
    return StaticGraph(n, frozenset((a, b) for a in range(n - 1) for b in range(a + 1, n - 1)))


def clique_plus_isolate(n: int) -> DynamicGraph:
    return DynamicGraph.constant(clique_plus_isolate_graph(n), name="clique_isolate")


def path_graph(n: int) -> StaticGraph:
    if n < 2:
        raise GraphError(f"path needs n >= 2, got {n}")
    return StaticGraph(n, frozenset((x, x + 1) for x in range(n - 1)))


def static_path(n: int) -> DynamicGraph:
    return DynamicGraph.constant(path_graph(n), name="path")


@dataclass(frozen=True)
class StablePairingInstance:
    """One draw of the alpha-stable pairing process.

    Labels a_i, b_i are ids ``2(i-1)`` and ``2(i-1)+1``. ``phase_sets[p]`` is
    the set that is paired up in phase p+1; the last entry is the single
    survivor. ``phase_pairs[p]`` lists those pairs as (survivor, other).
    """

    n: int
    alpha: int
    round_bits: tuple[int, ...]
    selected: frozenset[int]
    phase_sets: tuple[frozenset[int], ...]
    phase_pairs: tuple[tuple[tuple[int, int], ...], ...]
    graphs: tuple[StaticGraph, ...]

    @property
    def H(self) -> DynamicGraph:
        return DynamicGraph.from_sequence(list(self.graphs), name="stable_pairing")

    @property
    def initial_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((2 * i, 2 * i + 1) for i in range(self.n // 2))

    @property
    def root(self) -> int:
        (survivor,) = self.phase_sets[-1]
        return survivor

    def phase_of_round(self, r: int) -> int:
        """0 for the initial alpha rounds, p >= 1 for phase p."""
        return (r - 1) // self.alpha


def _pair_sorted(nodes) -> list[tuple[int, int]]:
    s = sorted(nodes)
    return [(s[j], s[j + 1]) for j in range(0, len(s) - 1, 2)]


def stable_pairing_process(n: int, alpha: int, rng: random.Random) -> StablePairingInstance:
    if n < 2 or n % 2:
        raise GraphError(f"stable pairing needs even n, got {n}")
    ell = n // 2
    if ell & (ell - 1):
        raise GraphError(f"n/2 must be a power of two, got {ell}")
    if alpha < 1:
        raise GraphError(f"alpha must be >= 1, got {alpha}")

    bits = tuple(rng.getrandbits(1) for _ in range(ell))
    selected = frozenset(2 * i + q for i, q in enumerate(bits))
    first = StaticGraph(n, frozenset((2 * i, 2 * i + 1) for i in range(ell)))
    graphs = [first] * alpha

    phase_sets = [selected]
    phase_pairs = []
    current = selected
    while len(current) > 1:
        pairs = _pair_sorted(current)
        # Survivor of each pair is the lower id.
        survivors = frozenset(a for a, _ in pairs)
        leftovers = _pair_sorted(selected - current)
        g = StaticGraph(n, frozenset(pairs + leftovers))
        graphs += [g] * alpha
        phase_pairs.append(tuple(pairs))
        phase_sets.append(survivors)
        current = survivors

    return StablePairingInstance(
        n=n,
        alpha=alpha,
        round_bits=bits,
        selected=selected,
        phase_sets=tuple(phase_sets),
        phase_pairs=tuple(phase_pairs),
        graphs=tuple(graphs),
    )


# Default walk endpoints per generator (start, target).
WALK_ENDPOINTS: dict[str, Callable[[int], tuple[int, int]]] = {
    "star": lambda n: (n - 2, n - 1),
    "lollipop": lollipop_endpoints,
    "clique_isolate": lambda n: (0, n - 1),
    "path": lambda n: (0, n - 1),
    "spooling": lambda n: (0, n - 1),
}

DYNAMIC_GENERATORS: dict[str, Callable[[int], DynamicGraph]] = {
    "spooling": spooling_dynamic,
    "star": dynamic_star,
    "lollipop": lollipop_dynamic,
    "clique_isolate": clique_plus_isolate,
    "path": static_path,
}

GENERATOR_KEYS = tuple(DYNAMIC_GENERATORS) + ("stable_pairing",)


def build_dynamic(key: str, n: int) -> DynamicGraph:
    try:
        make = DYNAMIC_GENERATORS[key]
    except KeyError:
        raise ValueError(f"unknown generator {key!r}; expected one of {sorted(DYNAMIC_GENERATORS)}") from None
    return make(n)
