"""Empirical checks of the four smoothing lemmas.

Each scenario fixes a base graph, a smoothing radius and either an edge set
(connected-family lemmas) or a node set plus a target node (pairing lemma).
The directional bounds use the constants that fall out of the proofs:

* lemma 1 (some edge of S present afterwards): at least k|S| / (16 n^2)
* lemma 2 (some edge of S ⊆ E removed):         at most 4 k|S| / C(n, 2)
* lemma 3 (some edge of S, S ∩ E = ∅, added):   at most 4 k|S| / C(n, 2)
* lemma 4 (adjacency of u changes):             at most 2 δ k / n

Lower bounds are checked against the lower end of a Wilson interval and
upper bounds against the upper end, so a pass means the data are
inconsistent with a violation at the chosen confidence.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

import scipy.stats

from ..generators import lollipop_graph, path_graph, spool_graph, stable_pairing_process, star_graph
from ..graph import EdgeSlot, NetworkType, StaticGraph, is_connected, is_matching, slot_pair
from ..seeding import derive_seed, make_rng
from ..smoothing import SmoothingConfig, enumerate_smoothing_support, k_smooth_graph
from .stats import wilson_interval

CONNECTED_LEMMAS = (1, 2, 3)
PAIRING_LEMMAS = (4,)


class ScenarioRejected(ValueError):
    """The scenario falls outside the hypotheses of its lemma."""


@dataclass(frozen=True)
class Scenario:
    lemma: int
    name: str
    graph: StaticGraph
    k: int
    edges: frozenset[EdgeSlot] = frozenset()
    nodes: frozenset[int] = frozenset()
    node: Optional[int] = None
    delta: Optional[float] = None

    @property
    def network_type(self) -> NetworkType:
        return NetworkType.PAIRING if self.lemma == 4 else NetworkType.CONNECTED

    @property
    def scale(self) -> float:
        """k|S|/n^2 for lemmas 1-3, k/n for lemma 4."""
        n = self.graph.n
        if self.lemma == 4:
            return self.k / n
        return self.k * len(self.edges) / n**2

    @property
    def bound(self) -> float:
        n, k = self.graph.n, self.k
        if self.lemma == 1:
            return k * len(self.edges) / (16 * n**2)
        if self.lemma in (2, 3):
            return 4 * k * len(self.edges) / math.comb(n, 2)
        return 2 * self.delta * k / n

    @property
    def lower_bound(self) -> bool:
        return self.lemma == 1


def check_hypotheses(s: Scenario) -> None:
    g, n, k = s.graph, s.graph.n, s.k
    if s.lemma not in (1, 2, 3, 4):
        raise ScenarioRejected(f"{s.name}: unknown lemma {s.lemma}")
    if k < 1:
        raise ScenarioRejected(f"{s.name}: k must be positive")
    if s.lemma in CONNECTED_LEMMAS:
        if not is_connected(g):
            raise ScenarioRejected(f"{s.name}: base graph is not connected")
        if not s.edges:
            raise ScenarioRejected(f"{s.name}: edge set S is empty")
        if any(not 0 <= a < b < n for a, b in s.edges):
            raise ScenarioRejected(f"{s.name}: S contains an invalid slot")
        if 16 * k > n:
            raise ScenarioRejected(f"{s.name}: k={k} exceeds n/16")
        if s.lemma == 1 and 2 * k * len(s.edges) > n**2:
            raise ScenarioRejected(f"{s.name}: k|S| exceeds n^2/2")
        if s.lemma == 2 and not s.edges <= g.edges:
            raise ScenarioRejected(f"{s.name}: S is not a subset of E")
        if s.lemma == 3 and s.edges & g.edges:
            raise ScenarioRejected(f"{s.name}: S intersects E")
        return
    if not is_matching(g):
        raise ScenarioRejected(f"{s.name}: base graph is not a matching")
    if s.delta is None or s.delta <= 1:
        raise ScenarioRejected(f"{s.name}: delta must exceed 1")
    if s.node is None or s.node not in s.nodes:
        raise ScenarioRejected(f"{s.name}: u must belong to S")
    matched = {x for e in g.edges for x in e}
    if len({x in matched for x in s.nodes}) != 1:
        raise ScenarioRejected(f"{s.name}: S mixes matched and unmatched nodes")
    if len(s.nodes) * s.delta < n:
        raise ScenarioRejected(f"{s.name}: |S| < n/delta")
    if 2 * s.delta * k >= n:
        raise ScenarioRejected(f"{s.name}: k >= n/(2 delta)")


def event(s: Scenario, before: StaticGraph, after: StaticGraph) -> bool:
    if s.lemma in (1, 3):
        return not s.edges.isdisjoint(after.edges)
    if s.lemma == 2:
        return not s.edges <= after.edges
    return before.adjacency[s.node] != after.adjacency[s.node]


def lemma_event_frequency(s: Scenario, trials: int, rng: random.Random) -> int:
    """Number of smoothed samples (out of ``trials``) in which the lemma's event occurs.

    No hypothesis guard: small out-of-range scenarios are useful for
    comparing against exact enumeration.
    """
    cfg = SmoothingConfig(s.k, s.network_type)
    g = s.graph
    return sum(event(s, g, k_smooth_graph(g, cfg, rng)) for _ in range(trials))


def exact_event_probability(s: Scenario) -> float:
    """Exact probability by enumerating the whole smoothing support (tiny n)."""
    support = enumerate_smoothing_support(s.graph, s.k, s.network_type)
    return sum(event(s, s.graph, h) for h in support) / len(support)


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    hits: int
    trials: int
    ci_low: float
    ci_high: float

    @property
    def frequency(self) -> float:
        return self.hits / self.trials

    @property
    def passed(self) -> bool:
        s = self.scenario
        return self.ci_low >= s.bound if s.lower_bound else self.ci_high <= s.bound


@dataclass(frozen=True)
class LemmaReport:
    results: tuple[ScenarioResult, ...]
    fitted_constants: dict[int, float]
    monotonicity: dict[int, float] = field(default_factory=dict)

    def for_lemma(self, lemma: int) -> list[ScenarioResult]:
        return [r for r in self.results if r.scenario.lemma == lemma]

    @property
    def monotone(self) -> bool:
        return all(rho > 0 for rho in self.monotonicity.values())

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results) and self.monotone

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            s = r.scenario
            rel = ">=" if s.lower_bound else "<="
            out.append(
                f"lemma {s.lemma} {s.name:<34} n={s.graph.n:<3} k={s.k:<2} freq={r.frequency:.5f} "
                f"ci=[{r.ci_low:.5f}, {r.ci_high:.5f}] {rel} {s.bound:.5f}  {'PASS' if r.passed else 'FAIL'}"
            )
        for lemma, c in sorted(self.fitted_constants.items()):
            out.append(f"lemma {lemma} fitted constant {c:.4f}")
        for lemma, rho in sorted(self.monotonicity.items()):
            out.append(f"lemma {lemma} spearman(freq, k|S|/n^2) = {rho:.3f}")
        return out


def verify_lemma_frequencies(
    family: NetworkType | str,
    scenarios: Iterable[Scenario],
    trials: int,
    seed: int,
    confidence: float = 0.99,
) -> LemmaReport:
    """Run every scenario of ``family`` and check its directional bound.

    The fitted constant is the tightest multiplier c with freq vs c * scale
    over the scenarios (minimum ratio for lemma 1, maximum for the upper
    bounds). Monotonicity is the Spearman correlation between frequency and
    k|S|/n^2 for lemmas 1-3; it must be positive.
    """
    family = NetworkType.parse(family)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    allowed_lemmas = PAIRING_LEMMAS if family is NetworkType.PAIRING else CONNECTED_LEMMAS
    results = []
    for s in scenarios:
        if s.lemma not in allowed_lemmas:
            raise ScenarioRejected(f"{s.name}: lemma {s.lemma} does not belong to the {family.value} family")
        check_hypotheses(s)
        hits = lemma_event_frequency(s, trials, make_rng(seed, "lemma", s.lemma, s.name))
        lo, hi = wilson_interval(hits, trials, confidence)
        results.append(ScenarioResult(s, hits, trials, lo, hi))

    fitted: dict[int, float] = {}
    mono: dict[int, float] = {}
    for lemma in allowed_lemmas:
        rs = [r for r in results if r.scenario.lemma == lemma]
        if not rs:
            continue
        ratios = [r.frequency / r.scenario.scale for r in rs]
        fitted[lemma] = min(ratios) if lemma == 1 else max(ratios)
        if lemma != 4 and len(rs) >= 3:
            rho = scipy.stats.spearmanr([r.scenario.scale for r in rs], [r.frequency for r in rs]).statistic
            mono[lemma] = float(rho)
    return LemmaReport(tuple(results), fitted, mono)


# -- default scenario suite ---------------------------------------------------


def _absent_edges(g: StaticGraph, count: int, tag: str) -> frozenset[EdgeSlot]:
    rng = make_rng(derive_seed(0, "scenario-edges"), tag)
    pool = [slot_pair(i) for i in range(g.n * (g.n - 1) // 2)]
    pool = [e for e in pool if e not in g.edges]
    return frozenset(rng.sample(pool, count))


def _present_edges(g: StaticGraph, count: int, tag: str, within: Optional[Iterable[EdgeSlot]] = None) -> frozenset[EdgeSlot]:
    rng = make_rng(derive_seed(0, "scenario-edges"), tag)
    pool = sorted(g.edges if within is None else set(within) & g.edges)
    return frozenset(rng.sample(pool, count))


def cycle_with_chords(n: int, chords: int) -> StaticGraph:
    """Ring on n nodes plus ``chords`` fixed pseudo-random chords (2-edge-connected)."""
    ring = [(i, (i + 1) % n) for i in range(n)]
    base = StaticGraph.from_edges(n, ring)
    extra = _absent_edges(base, chords, f"chords-{n}-{chords}")
    return StaticGraph(n, base.edges | extra)


def _clique_edges(g: StaticGraph, size: int) -> list[EdgeSlot]:
    return [e for e in g.edges if e[1] < size]


def connected_scenarios() -> list[Scenario]:
    spool64 = spool_graph(64, 20)
    spool32 = spool_graph(32, 5)
    path64, path32 = path_graph(64), path_graph(32)
    lolli = lollipop_graph(64)
    star32 = star_graph(32, 3, self_loops=False)
    ring64 = cycle_with_chords(64, 32)
    ring48 = cycle_with_chords(48, 8)
    clique = _clique_edges(lolli, 32)

    out = [
        Scenario(1, "spool64-absent1", spool64, 1, _absent_edges(spool64, 1, "l1a")),
        Scenario(1, "spool64-absent8", spool64, 2, _absent_edges(spool64, 8, "l1b")),
        Scenario(1, "spool64-absent32", spool64, 4, _absent_edges(spool64, 32, "l1c")),
        Scenario(1, "path64-absent16", path64, 1, _absent_edges(path64, 16, "l1d")),
        Scenario(1, "path64-absent64", path64, 4, _absent_edges(path64, 64, "l1e")),
        Scenario(1, "lollipop64-absent4", lolli, 2, _absent_edges(lolli, 4, "l1f")),
        Scenario(1, "star32-absent2", star32, 1, _absent_edges(star32, 2, "l1g")),
        Scenario(1, "star32-absent24", star32, 2, _absent_edges(star32, 24, "l1h")),
        Scenario(1, "spool32-mixed", spool32, 1, _absent_edges(spool32, 3, "l1i") | _present_edges(spool32, 1, "l1i")),
        Scenario(1, "lollipop64-present10", lolli, 3, _present_edges(lolli, 10, "l1j", clique)),
        Scenario(1, "path32-absent100", path32, 2, _absent_edges(path32, 100, "l1k")),
        Scenario(1, "spool64-absent256", spool_graph(64, 40), 4, _absent_edges(spool_graph(64, 40), 256, "l1l")),
    ]
    out += [
        Scenario(2, "lollipop64-clique1", lolli, 1, _present_edges(lolli, 1, "l2a", clique)),
        Scenario(2, "lollipop64-clique10", lolli, 2, _present_edges(lolli, 10, "l2b", clique)),
        Scenario(2, "lollipop64-clique100", lolli, 4, _present_edges(lolli, 100, "l2c", clique)),
        Scenario(2, "lollipop64-clique400", lolli, 3, _present_edges(lolli, 400, "l2d", clique)),
        Scenario(2, "ring64-all", ring64, 4, frozenset(ring64.edges)),
        Scenario(2, "ring64-ring8", ring64, 1, _present_edges(ring64, 8, "l2f")),
        Scenario(2, "ring48-chords8", ring48, 3, _present_edges(ring48, 8, "l2g")),
        Scenario(2, "ring48-all", ring48, 2, frozenset(ring48.edges)),
        Scenario(2, "path64-bridges", path64, 4, frozenset(path64.edges)),
        Scenario(2, "star32-leaves", star32, 2, frozenset(star32.edges)),
        Scenario(2, "spool64-edges", spool64, 2, _present_edges(spool64, 30, "l2k")),
    ]
    out += [
        Scenario(3, "spool64-absent1", spool64, 1, _absent_edges(spool64, 1, "l3a")),
        Scenario(3, "spool64-absent8", spool64, 2, _absent_edges(spool64, 8, "l3b")),
        Scenario(3, "spool64-absent32", spool64, 4, _absent_edges(spool64, 32, "l3c")),
        Scenario(3, "path64-absent16", path64, 1, _absent_edges(path64, 16, "l3d")),
        Scenario(3, "path64-absent200", path64, 4, _absent_edges(path64, 200, "l3e")),
        Scenario(3, "lollipop64-absent4", lolli, 2, _absent_edges(lolli, 4, "l3f")),
        Scenario(3, "star32-absent2", star32, 1, _absent_edges(star32, 2, "l3g")),
        Scenario(3, "star32-absent24", star32, 2, _absent_edges(star32, 24, "l3h")),
        Scenario(3, "ring64-absent50", ring64, 3, _absent_edges(ring64, 50, "l3i")),
        Scenario(3, "path32-absent100", path32, 2, _absent_edges(path32, 100, "l3j")),
        Scenario(3, "ring48-absent500", ring48, 1, _absent_edges(ring48, 500, "l3k")),
    ]
    return out


def pairing_scenarios() -> list[Scenario]:
    inst = stable_pairing_process(64, 1, make_rng(derive_seed(0, "scenario-pairing")))
    perfect = inst.graphs[0]
    half = inst.graphs[1]
    matched_half = sorted({x for e in half.edges for x in e})
    unmatched_half = sorted(set(range(64)) - set(matched_half))
    sparse = StaticGraph(64, frozenset(sorted(half.edges)[:4]))
    sparse_unmatched = sorted(set(range(64)) - {x for e in sparse.edges for x in e})
    empty = StaticGraph(64, frozenset())
    everyone = frozenset(range(64))

    def sc(name, g, k, nodes, u, delta):
        return Scenario(4, name, g, k, nodes=frozenset(nodes), node=u, delta=delta)

    return [
        sc("half-unmatched-d2-k4", half, 4, unmatched_half, unmatched_half[0], 2.0),
        sc("half-unmatched-d2.5-k1", half, 1, unmatched_half, unmatched_half[5], 2.5),
        sc("half-unmatched-d2-k8", half, 8, unmatched_half, unmatched_half[-1], 2.0),
        sc("half-matched-d2-k4", half, 4, matched_half, matched_half[0], 2.0),
        sc("half-matched-d2-k12", half, 12, matched_half, matched_half[3], 2.0),
        sc("perfect-d1.05-k4", perfect, 4, everyone, 0, 1.05),
        sc("perfect-d1.5-k10", perfect, 10, everyone, 17, 1.5),
        sc("perfect-d4-k2", perfect, 2, range(16), 3, 4.0),
        sc("empty-d1.05-k8", empty, 8, everyone, 9, 1.05),
        sc("empty-d8-k3", empty, 3, range(8), 2, 8.0),
        sc("sparse-unmatched-d1.2-k6", sparse, 6, sparse_unmatched, sparse_unmatched[10], 1.2),
    ]


def default_scenarios(family: NetworkType | str) -> list[Scenario]:
    family = NetworkType.parse(family)
    return pairing_scenarios() if family is NetworkType.PAIRING else connected_scenarios()
