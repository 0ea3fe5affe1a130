"""Token aggregation on pairing dynamic graphs.

Every node starts with one token (token ``u`` at node ``u``). When two
matched nodes meet, one of them may hand its whole holding to the other.
At the end each node uploads whatever it holds, and the aggregation factor
is the number of non-empty uploads.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Protocol

from .generators import StablePairingInstance
from .graph import DynamicGraph, GraphError, is_matching


class NonMatchingRound(GraphError):
    pass


class InstanceTooLarge(ValueError):
    pass


@dataclass
class TokenState:
    sigma: tuple[int, ...]
    holdings: list[set[int]] = field(default_factory=list)

    @classmethod
    def initial(cls, n: int) -> "TokenState":
        return cls(tuple(range(n)), [{u} for u in range(n)])

    @property
    def gamma(self) -> list[set[int]]:
        return self.holdings

    @property
    def factor(self) -> int:
        return sum(1 for h in self.holdings if h)

    def move(self, src: int, dst: int) -> None:
        self.holdings[dst] |= self.holdings[src]
        self.holdings[src] = set()


def check_no_loss_no_dup(state: TokenState) -> bool:
    return no_loss(state) and no_duplication(state)


def no_loss(state: TokenState) -> bool:
    return set().union(*state.gamma) == set(state.sigma)


def no_duplication(state: TokenState) -> bool:
    return sum(len(g) for g in state.gamma) == len(set().union(*state.gamma))


def competitive_ratio(alg_factor: int, offline_factor: int) -> Fraction:
    if alg_factor < 1 or offline_factor < 1:
        raise ValueError("aggregation factors are at least 1 whenever tokens exist")
    return Fraction(alg_factor, offline_factor)


@dataclass(frozen=True)
class AggregationOutcome:
    factor: int
    offline_factor: int
    no_loss: bool
    no_duplication: bool

    @property
    def ratio(self) -> Fraction:
        return competitive_ratio(self.factor, self.offline_factor)

    @property
    def valid(self) -> bool:
        return self.no_loss and self.no_duplication


# -- online policies ----------------------------------------------------------


class OnlinePolicy(Protocol):
    """Decides one meeting from what the two partners can observe locally."""

    def receiver(self, rnd: int, a: int, b: int, held_a: int, held_b: int, rng: random.Random) -> Optional[int]:
        ...


class RandomDirection:
    """Fair coin per meeting picks who absorbs the other's holding."""

    def receiver(self, rnd, a, b, held_a, held_b, rng):
        return a if rng.random() < 0.5 else b


class KeepLower:
    def receiver(self, rnd, a, b, held_a, held_b, rng):
        return min(a, b)


ONLINE_POLICIES = {"random_direction": RandomDirection, "keep_lower": KeepLower}
POLICY_KEYS = tuple(ONLINE_POLICIES) + ("offline_schedule",)


def make_policy(key: str) -> OnlinePolicy:
    try:
        return ONLINE_POLICIES[key]()
    except KeyError:
        raise ValueError(f"unknown online policy {key!r}; expected one of {sorted(ONLINE_POLICIES)}") from None


def _rounds(h2: DynamicGraph):
    if h2.length is None:
        raise ValueError("aggregation needs a finite dynamic graph")
    for r in range(1, h2.length + 1):
        g = h2[r]
        if not is_matching(g):
            raise NonMatchingRound(f"round {r} is not a matching")
        yield r, g


def run_online_aggregation(h2: DynamicGraph, policy: OnlinePolicy, rng: random.Random) -> TokenState:
    state = TokenState.initial(h2.n)
    for r, g in _rounds(h2):
        for a, b in sorted(g.edges):
            dst = policy.receiver(r, a, b, len(state.holdings[a]), len(state.holdings[b]), rng)
            if dst is not None:
                state.move(b if dst == a else a, dst)
    return state


def offline_schedule_stable_pairing(inst: StablePairingInstance, h2: DynamicGraph) -> TokenState:
    """Aggregate towards the surviving root along the adversary's pairs.

    Each scheduled pair transfers in the first round of its phase in which
    its edge survived smoothing; a pair whose edge never survived leaves a
    stranded subtree that uploads separately.
    """
    if h2.length != len(inst.graphs) or h2.n != inst.n:
        raise ValueError("smoothed graph does not match the instance")
    graphs = [h2[r] for r in range(1, h2.length + 1)]
    alpha = inst.alpha
    state = TokenState.initial(inst.n)

    def first_present(phase: int, a: int, b: int) -> bool:
        edge = (min(a, b), max(a, b))
        return any(edge in g.edges for g in graphs[phase * alpha : (phase + 1) * alpha])

    for a, b in inst.initial_pairs:
        keep, give = (a, b) if a in inst.selected else (b, a)
        if first_present(0, a, b):
            state.move(give, keep)
    for p, pairs in enumerate(inst.phase_pairs, start=1):
        for keep, give in pairs:
            if first_present(p, keep, give):
                state.move(give, keep)
    return state


def brute_force_offline_optimal(h2: DynamicGraph, limit_n: int = 8, limit_length: int = 8) -> int:
    """Fewest uploaders reachable by any per-meeting transfer choice.

    The uploader count only depends on which nodes hold something, so the
    search runs over occupancy masks; every meeting branches three ways
    (no transfer, left absorbs, right absorbs).
    """
    length = 0 if h2.length is None else h2.length
    if h2.n > limit_n or h2.length is None or length > limit_length:
        raise InstanceTooLarge(f"brute force limited to n <= {limit_n}, length <= {limit_length}")
    states = {(1 << h2.n) - 1}
    for _, g in _rounds(h2):
        edges = sorted(g.edges)
        nxt = set()
        for mask in states:
            for choice in itertools.product((0, 1, 2), repeat=len(edges)):
                m = mask
                for (a, b), c in zip(edges, choice):
                    if c == 1 and m >> b & 1:
                        m = (m & ~(1 << b)) | (1 << a)
                    elif c == 2 and m >> a & 1:
                        m = (m & ~(1 << a)) | (1 << b)
                nxt.add(m)
        states = nxt
    return min(bin(m).count("1") for m in states)
