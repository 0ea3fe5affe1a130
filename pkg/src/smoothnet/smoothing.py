"""k-smoothing: uniform sampling from edit-distance balls intersected with a family.

The edit ball of radius k around G is sampled exactly in two stages: draw a
distance d with probability C(N, d) / |ball| (N = number of slots), then
toggle a uniformly random d-subset of slots. Distinct subsets give distinct
graphs, so the mixture is uniform over the ball. Restricting to a family is
done by rejection (connected graphs), or by a direct counting sampler for
matchings, where rejection is hopeless once the base graph is a near-perfect
matching.
"""

from __future__ import annotations

import bisect
import itertools
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .graph import (
    DynamicGraph,
    EdgeSlot,
    GraphError,
    NetworkType,
    StaticGraph,
    _toggled,
    allowed,
    is_connected,
    num_slots,
    slot_pair,
)
from .seeding import make_rng

DEFAULT_RETRY_CAP = 100_000


class RetryExhausted(RuntimeError):
    """Rejection sampling gave up; the ball/family intersection is too sparse."""

    def __init__(self, proposals: int, k: int, network_type: NetworkType, n: int):
        self.proposals = proposals
        self.accepted = 0
        self.k = k
        self.network_type = network_type
        self.n = n
        self.round: Optional[int] = None
        super().__init__(
            f"no {network_type.value} graph within edit distance {k} after {proposals} "
            f"proposals (n={n}, acceptance rate < {1 / proposals:.2e})"
        )


    def __reduce__(self):
        return (type(self), (self.proposals, self.k, self.network_type, self.n), self.__dict__)

    def __str__(self) -> str:
        where = "" if self.round is None else f" [round {self.round}]"
        return super().__str__() + where


class NotInFamily(GraphError):
    """The graph to be smoothed is not itself a member of the target family."""


@dataclass(frozen=True)
class SmoothingConfig:
    k: int
    network_type: NetworkType = NetworkType.CONNECTED
    retry_cap: int = DEFAULT_RETRY_CAP
    method: str = "auto"  # "auto" or "rejection"

    def __post_init__(self) -> None:
        object.__setattr__(self, "network_type", NetworkType.parse(self.network_type))
        if self.k < 0:
            raise ValueError(f"smoothing factor must be >= 0, got {self.k}")
        if self.retry_cap < 1:
            raise ValueError("retry_cap must be >= 1")
        if self.method not in ("auto", "rejection"):
            raise ValueError(f"unknown sampling method {self.method!r}")

    def check_range(self, n: int) -> None:
        if self.k > num_slots(n):
            raise ValueError(f"k={self.k} exceeds the {num_slots(n)} edge slots of n={n}")


@dataclass(frozen=True)
class BallWeights:
    """Distance distribution of the uniform edit ball: P(d) ∝ C(N, d)."""

    n: int
    k: int
    log_weights: tuple[float, ...]
    cumulative: tuple[float, ...]

    @classmethod
    def of(cls, n: int, k: int) -> "BallWeights":
        return _ball_weights(n, k)

    def draw_distance(self, rng: random.Random) -> int:
        return min(bisect.bisect_right(self.cumulative, rng.random()), self.k)


@lru_cache(maxsize=256)
def _ball_weights(n: int, k: int) -> BallWeights:
    slots = num_slots(n)
    if not 0 <= k <= slots:
        raise ValueError(f"k={k} out of range [0, {slots}] for n={n}")
    log_w = [math.lgamma(slots + 1) - math.lgamma(d + 1) - math.lgamma(slots - d + 1) for d in range(k + 1)]
    top = max(log_w)
    w = [math.exp(x - top) for x in log_w]
    total = math.fsum(w)
    cum, acc = [], 0.0
    for x in w:
        acc += x
        cum.append(acc / total)
    cum[-1] = 1.0
    return BallWeights(n, k, tuple(log_w), tuple(cum))


def edit_ball_size(n: int, k: int) -> int:
    slots = num_slots(n)
    if not 0 <= k <= slots:
        raise ValueError(f"k={k} out of range [0, {slots}] for n={n}")
    return sum(math.comb(slots, d) for d in range(k + 1))


def _random_slots(n: int, d: int, rng: random.Random) -> set[EdgeSlot]:
    slots = num_slots(n)
    if d > slots // 2:
        return {slot_pair(i) for i in rng.sample(range(slots), d)}
    chosen: set[int] = set()
    while len(chosen) < d:
        chosen.add(rng.randrange(slots))
    return {slot_pair(i) for i in chosen}


def propose_toggles(n: int, k: int, rng: random.Random) -> set[EdgeSlot]:
    """Slots to toggle for one uniform draw from the radius-k edit ball."""
    if k == 0:
        return set()
    d = _ball_weights(n, k).draw_distance(rng)
    return _random_slots(n, d, rng)


def sample_edit_ball(g: StaticGraph, k: int, rng: random.Random) -> StaticGraph:
    return _toggled(g, propose_toggles(g.n, k, rng))


def _in_family(g: StaticGraph, network_type: NetworkType) -> bool:
    memo = g.__dict__.setdefault("_family_memo", {})
    if network_type not in memo:
        memo[network_type] = allowed(g, network_type)
    return memo[network_type]


def _accepts(g: StaticGraph, toggles: set[EdgeSlot], network_type: NetworkType) -> Optional[StaticGraph]:
    """Apply toggles to a family member and return the result if still a member."""
    if network_type is NetworkType.ALL:
        return _toggled(g, toggles)
    if network_type is NetworkType.CONNECTED:
        candidate = _toggled(g, toggles)
        if any(s in g.edges for s in toggles) and not is_connected(candidate):
            return None
        return candidate
    # Matching: only the touched endpoints can exceed degree one.
    delta: dict[int, int] = {}
    for s in toggles:
        step = -1 if s in g.edges else 1
        for x in s:
            delta[x] = delta.get(x, 0) + step
    adj = g.adjacency
    if any(len(adj[x]) + dd > 1 for x, dd in delta.items()):
        return None
    return _toggled(g, toggles)


def k_smooth_graph(g: StaticGraph, cfg: SmoothingConfig, rng: random.Random) -> StaticGraph:
    """Uniform sample from ``editdist(g, k) ∩ family``; self-loop flags are copied."""
    cfg.check_range(g.n)
    if not _in_family(g, cfg.network_type):
        raise NotInFamily(f"input graph is not in the {cfg.network_type.value} family")
    if cfg.k == 0:
        return g
    if cfg.network_type is NetworkType.PAIRING and cfg.method == "auto":
        return _toggled(g, _matching_ball_toggles(g, cfg.k, rng))
    for _ in range(cfg.retry_cap):
        out = _accepts(g, propose_toggles(g.n, cfg.k, rng), cfg.network_type)
        if out is not None:
            return out
    raise RetryExhausted(cfg.retry_cap, cfg.k, cfg.network_type, g.n)


def acceptance_rate(g: StaticGraph, cfg: SmoothingConfig, rng: random.Random, proposals: int) -> float:
    """Fraction of uniform edit-ball proposals that stay in the family."""
    hits = sum(
        _accepts(g, propose_toggles(g.n, cfg.k, rng), cfg.network_type) is not None for _ in range(proposals)
    )
    return hits / proposals


# -- direct sampler for matchings -------------------------------------------
#
# A matching within distance k of the matching M is M - R + A with R ⊆ M and A
# a matching on the free vertices (unmatched nodes plus endpoints of R) that
# avoids the edges of R, |R| + |A| <= k. The number of such pairs depends only
# on (|M|, #unmatched, |R|, |A|), so we can draw (|R|, |A|) exactly by weight
# and then fill in R and A uniformly.


def _count_matchings(f: int, a: int) -> int:
    """Number of a-edge matchings in the complete graph on f vertices."""
    if a < 0 or 2 * a > f:
        return 0
    return math.comb(f, 2 * a) * math.prod(range(2 * a - 1, 0, -2))


def _count_avoiding(f: int, r: int, a: int) -> int:
    """a-edge matchings in K_f that use none of r fixed disjoint edges."""
    return sum((-1) ** j * math.comb(r, j) * _count_matchings(f - 2 * j, a - j) for j in range(min(r, a) + 1))


@lru_cache(maxsize=1024)
def matching_ball_table(matched_edges: int, unmatched: int, k: int) -> tuple[tuple[int, int, int], ...]:
    """``(removed, added, count)`` for every split of a matching-ball member."""
    rows = []
    for r in range(min(matched_edges, k) + 1):
        for a in range(k - r + 1):
            c = math.comb(matched_edges, r) * _count_avoiding(unmatched + 2 * r, r, a)
            if c:
                rows.append((r, a, c))
    return tuple(rows)


def matching_ball_size(g: StaticGraph, k: int) -> int:
    m = len(g.edges)
    return sum(c for _, _, c in matching_ball_table(m, g.n - 2 * m, k))


def _matching_ball_toggles(g: StaticGraph, k: int, rng: random.Random) -> set[EdgeSlot]:
    matched = sorted(g.edges)
    free_base = g.__dict__.get("_unmatched")
    if free_base is None:
        covered = {x for e in matched for x in e}
        free_base = g.__dict__["_unmatched"] = [x for x in range(g.n) if x not in covered]
    table = matching_ball_table(len(matched), len(free_base), k)
    pick = rng.randrange(sum(c for _, _, c in table))
    for r, a, c in table:
        if pick < c:
            break
        pick -= c
    removed = rng.sample(matched, r)
    if a == 0:
        return set(removed)
    free = sorted(itertools.chain(free_base, (x for e in removed for x in e)))
    forbidden = set(removed)
    while True:
        seq = rng.sample(free, 2 * a)
        added = {(min(seq[i], seq[i + 1]), max(seq[i], seq[i + 1])) for i in range(0, 2 * a, 2)}
        if forbidden.isdisjoint(added):
            return forbidden | added


# -- brute force enumeration (oracle) ----------------------------------------


def enumerate_smoothing_support(g: StaticGraph, k: int, network_type: NetworkType) -> list[StaticGraph]:
    """Every member of ``editdist(g, k) ∩ family``, by exhaustive toggling."""
    slots = [slot_pair(i) for i in range(num_slots(g.n))]
    out = []
    for d in range(k + 1):
        for combo in itertools.combinations(slots, d):
            h = StaticGraph(g.n, g.edges.symmetric_difference(combo), g.self_loops)
            if allowed(h, network_type):
                out.append(h)
    return out


# -- dynamic graphs -----------------------------------------------------------


def k_smooth_dynamic(h: DynamicGraph, cfg: SmoothingConfig, rng_root: int, stream: tuple = ()) -> DynamicGraph:
    """Smooth every round independently; round r uses the stream ``(rng_root, *stream, r)``."""
    if cfg.k == 0:
        return h

    def round_graph(r: int) -> StaticGraph:
        try:
            return k_smooth_graph(h[r], cfg, make_rng(rng_root, *stream, "round", r))
        except RetryExhausted as exc:
            exc.round = r
            raise

    return DynamicGraph(h.n, _memo_last(round_graph), length=h.length, period=None, name=f"{h.name}~k{cfg.k}")


def _memo_last(fn):
    # Processes query rounds in order; keep the last few to serve repeats cheaply.
    cache: dict[int, StaticGraph] = {}

    def wrapped(r: int) -> StaticGraph:
        g = cache.get(r)
        if g is None:
            if len(cache) >= 4:
                cache.pop(next(iter(cache)))
            g = cache[r] = fn(r)
        return g

    return wrapped
