"""Experiment specs, seeded trial execution and CSV emission."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Any, Iterable, Optional, TextIO

from ..aggregation import (
    ONLINE_POLICIES,
    check_no_loss_no_dup,
    competitive_ratio,
    make_policy,
    offline_schedule_stable_pairing,
    run_online_aggregation,
)
from ..generators import DYNAMIC_GENERATORS, WALK_ENDPOINTS, build_dynamic, stable_pairing_process
from ..graph import DynamicGraph, GraphError, NetworkType, StaticGraph, allowed, edit_distance
from ..processes import flood, random_walk_hit
from ..seeding import derive_seed, make_rng
from ..smoothing import DEFAULT_RETRY_CAP, RetryExhausted, SmoothingConfig, k_smooth_dynamic, k_smooth_graph

KINDS = ("flood", "walk", "agg", "sample-smooth", "verify-lemmas")
CSV_COLUMNS = ("experiment", "generator", "n", "k", "trial", "seed", "metric_name", "metric_value", "censored", "wall_ms")
DEFAULT_NETWORK = {"flood": "connected", "walk": "connected", "agg": "pairing", "sample-smooth": "connected"}


class ConfigError(ValueError):
    pass


class InvariantViolation(AssertionError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    """One campaign. ``seed`` is mandatory; nothing reads ambient entropy.

    Optional fields default per kind: ``horizon`` to 10 n, ``max_steps`` to
    50 n^3 / max(k, 1), walk endpoints to the generator's canonical pair.
    """

    kind: str
    seed: int
    generator: str = ""
    n_values: tuple[int, ...] = ()
    k_values: tuple[int, ...] = (0,)
    trials: int = 1
    network_type: Optional[str] = None
    horizon: Optional[int] = None
    max_steps: Optional[int] = None
    source: int = 0
    endpoints: Optional[tuple[int, int]] = None
    engine: str = "fast"
    alpha: int = 8
    policies: tuple[str, ...] = tuple(ONLINE_POLICIES)
    round: int = 1
    family: str = "both"
    retry_cap: int = DEFAULT_RETRY_CAP
    timing: bool = False
    output: Optional[str] = None
    dump: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2^64)")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.kind == "verify-lemmas":
            if self.family not in ("connected", "pairing", "both"):
                raise ConfigError(f"family must be connected, pairing or both, got {self.family!r}")
            return
        if not self.n_values:
            raise ConfigError("n list is empty")
        if not self.k_values:
            raise ConfigError("k list is empty")
        if any(k < 0 for k in self.k_values):
            raise ConfigError("k values must be >= 0")
        try:
            ntype = NetworkType.parse(self.net)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.kind == "agg":
            if self.generator != "stable_pairing":
                raise ConfigError("agg experiments use the stable_pairing generator")
            if ntype is not NetworkType.PAIRING:
                raise ConfigError("agg experiments smooth within the pairing family")
            if self.alpha < 1:
                raise ConfigError("alpha must be >= 1")
            for p in self.policies:
                if p not in ONLINE_POLICIES:
                    raise ConfigError(f"unknown online policy {p!r}")
        elif self.generator not in DYNAMIC_GENERATORS and not (
            self.kind == "sample-smooth" and self.generator == "stable_pairing"
        ):
            raise ConfigError(f"unknown generator {self.generator!r} for {self.kind}")
        if self.kind == "walk":
            if ntype is NetworkType.PAIRING:
                raise ConfigError("walks are run on connected or unrestricted smoothing")
            if self.engine not in ("fast", "reference"):
                raise ConfigError(f"unknown walk engine {self.engine!r}")
        for key in ("horizon", "max_steps"):
            val = getattr(self, key)
            if val is not None and val < 1:
                raise ConfigError(f"{key} must be >= 1")
        if self.round < 1:
            raise ConfigError("round must be >= 1")
        for n in self.n_values:
            self._check_n(n, ntype)

    @property
    def net(self) -> str:
        return self.network_type or DEFAULT_NETWORK.get(self.kind, "connected")

    def _check_n(self, n: int, ntype: NetworkType) -> None:
        try:
            if self.generator == "stable_pairing":
                base = stable_pairing_process(n, self.alpha if self.kind == "agg" else 1, make_rng(0)).graphs[0]
            else:
                base = build_dynamic(self.generator, n)[1]
        except GraphError as exc:
            raise ConfigError(f"n={n}: {exc}") from None
        if not allowed(base, ntype):
            raise ConfigError(f"{self.generator} graphs at n={n} are not in the {ntype.value} family")
        for k in self.k_values:
            if k > n * (n - 1) // 2:
                raise ConfigError(f"k={k} exceeds the edge slots of n={n}")
        if self.kind == "flood" and not 0 <= self.source < n:
            raise ConfigError(f"flood source {self.source} out of range for n={n}")
        if self.kind == "walk":
            u, v = self.walk_endpoints(n)
            if not (0 <= u < n and 0 <= v < n):
                raise ConfigError(f"walk endpoints ({u}, {v}) out of range for n={n}")

    def walk_endpoints(self, n: int) -> tuple[int, int]:
        if self.endpoints is not None:
            return tuple(self.endpoints)
        return WALK_ENDPOINTS[self.generator](n)

    def horizon_for(self, n: int) -> int:
        return self.horizon if self.horizon is not None else 10 * n

    def max_steps_for(self, n: int, k: int) -> int:
        return self.max_steps if self.max_steps is not None else 50 * n**3 // max(k, 1)

    def smoothing(self, k: int) -> SmoothingConfig:
        return SmoothingConfig(k, NetworkType.parse(self.net), self.retry_cap)

    # -- (de)serialization ---------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict[str, Any], kind: Optional[str] = None, seed: Optional[int] = None) -> "ExperimentSpec":
        data = dict(data)
        for short, long in (("n", "n_values"), ("k", "k_values")):
            if short in data:
                if long in data:
                    raise ConfigError(f"give either {short!r} or {long!r}, not both")
                data[long] = data.pop(short)
        if kind is not None:
            if data.get("kind", kind) != kind:
                raise ConfigError(f"config kind {data['kind']!r} does not match subcommand {kind!r}")
            data["kind"] = kind
        if seed is not None:
            data["seed"] = seed
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        for key in ("kind", "seed"):
            if key not in data:
                raise ConfigError(f"config is missing {key!r}")
        for key in ("n_values", "k_values", "policies", "endpoints"):
            val = data.get(key)
            if isinstance(val, (int, str)):
                val = [val]
            if val is not None:
                data[key] = tuple(val)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str, **overrides: Any) -> "ExperimentSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data, **overrides)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    generator: str
    n: int
    k: int
    trial: int
    seed: int
    metric_name: str
    metric_value: float
    censored: bool = False
    wall_ms: Optional[float] = field(default=None, compare=False)

    def sort_key(self) -> tuple:
        return (self.n, self.k, self.trial, self.metric_name)

    def csv_fields(self) -> list[str]:
        return [
            self.experiment,
            self.generator,
            str(self.n),
            str(self.k),
            str(self.trial),
            str(self.seed),
            self.metric_name,
            _fmt(self.metric_value),
            "1" if self.censored else "0",
            "" if self.wall_ms is None else f"{self.wall_ms:.3f}",
        ]


def _fmt(x: float) -> str:
    if isinstance(x, int) or (isinstance(x, float) and x.is_integer() and abs(x) < 2**53):
        return str(int(x))
    return repr(float(x))


def trial_seed(spec: ExperimentSpec, n: int, k: int, trial: int) -> int:
    return derive_seed(spec.seed, spec.kind, n, k, trial)


# -- per-kind trial runners ---------------------------------------------------


def _timer(spec: ExperimentSpec):
    start = time.perf_counter()
    return lambda: (time.perf_counter() - start) * 1e3 if spec.timing else None


def _flood_rows(spec: ExperimentSpec, n: int, k: int, trials: range) -> list[ResultRow]:
    base = build_dynamic(spec.generator, n)
    cfg = spec.smoothing(k)
    horizon = spec.horizon_for(n)
    rows = []
    for t in trials:
        seed = trial_seed(spec, n, k, t)
        clock = _timer(spec)
        res = flood(k_smooth_dynamic(base, cfg, seed), spec.source, horizon)
        hist = res.informed_history
        if hist[0] != 1 or any(b < a for a, b in zip(hist, hist[1:])) or (res.completed and hist[-1] != n):
            raise InvariantViolation(f"flood trial n={n} k={k} trial={t}: informed counts not monotone")
        value = res.completion_round if res.completed else horizon
        rows.append(ResultRow(spec.kind, spec.generator, n, k, t, seed, "completion_round", value, not res.completed, clock()))
    return rows


def _walk_rows(spec: ExperimentSpec, n: int, k: int, trials: range) -> list[ResultRow]:
    base = build_dynamic(spec.generator, n)
    cfg = spec.smoothing(k)
    u, v = spec.walk_endpoints(n)
    max_steps = spec.max_steps_for(n, k)
    seeds = [trial_seed(spec, n, k, t) for t in trials]
    clock = _timer(spec)
    if spec.engine == "fast" and base.period is not None:
        from ..fastwalk import CENSORED, FastWalkEngine

        hits = [int(h) for h in FastWalkEngine(base, cfg).hit_times(u, v, max_steps, seeds)]
        hits = [None if h == CENSORED else h for h in hits]
    else:
        hits = [
            random_walk_hit(k_smooth_dynamic(base, cfg, s), u, v, max_steps, make_rng(s, "walk")).hit_steps
            for s in seeds
        ]
    elapsed = clock()
    per_trial = None if elapsed is None else elapsed / len(seeds)
    rows = []
    for t, s, h in zip(trials, seeds, hits):
        if h is not None and not (0 <= h <= max_steps and (h > 0) == (u != v)):
            raise InvariantViolation(f"walk trial n={n} k={k} trial={t}: hit step {h} out of range")
        value = max_steps if h is None else h
        rows.append(ResultRow(spec.kind, spec.generator, n, k, t, s, "hit_steps", value, h is None, per_trial))
    return rows


def _agg_rows(spec: ExperimentSpec, n: int, k: int, trials: range) -> list[ResultRow]:
    cfg = spec.smoothing(k)
    rows = []
    for t in trials:
        seed = trial_seed(spec, n, k, t)
        clock = _timer(spec)
        inst = stable_pairing_process(n, spec.alpha, make_rng(seed, "instance"))
        h2 = k_smooth_dynamic(inst.H, cfg, seed)
        # Materialize once so the offline schedule and every policy see the same rounds.
        h2 = DynamicGraph.from_sequence([h2[r] for r in range(1, len(inst.graphs) + 1)], name=h2.name)
        states = {"offline_schedule": offline_schedule_stable_pairing(inst, h2)}
        for p in spec.policies:
            states[p] = run_online_aggregation(h2, make_policy(p), make_rng(seed, "policy", p))
        for name, state in states.items():
            if not check_no_loss_no_dup(state):
                raise InvariantViolation(f"agg trial n={n} k={k} trial={t}: {name} lost or duplicated tokens")
        wall = clock()
        offline = states["offline_schedule"].factor
        rows.append(ResultRow(spec.kind, spec.generator, n, k, t, seed, "factor:offline_schedule", offline, False, wall))
        for p in spec.policies:
            f = states[p].factor
            rows.append(ResultRow(spec.kind, spec.generator, n, k, t, seed, f"factor:{p}", f, False, wall))
            ratio = float(competitive_ratio(f, offline))
            rows.append(ResultRow(spec.kind, spec.generator, n, k, t, seed, f"ratio:{p}", ratio, False, wall))
    return rows


def sample_base_graph(spec: ExperimentSpec, n: int) -> StaticGraph:
    """The round graph that ``sample-smooth`` draws around."""
    if spec.generator == "stable_pairing":
        inst = stable_pairing_process(n, 1, make_rng(spec.seed, spec.kind, n, "instance"))
        return inst.graphs[min(spec.round, len(inst.graphs)) - 1]
    return build_dynamic(spec.generator, n)[spec.round]


def smoothed_samples(spec: ExperimentSpec, n: int, k: int, trials: Iterable[int]):
    """Yield ``(trial, seed, base, sample)`` for a sample-smooth campaign."""
    base = sample_base_graph(spec, n)
    cfg = spec.smoothing(k)
    for t in trials:
        seed = trial_seed(spec, n, k, t)
        yield t, seed, base, k_smooth_graph(base, cfg, make_rng(seed))


def _sample_rows(spec: ExperimentSpec, n: int, k: int, trials: range) -> list[ResultRow]:
    rows = []
    ntype = NetworkType.parse(spec.net)
    for t, seed, base, g in smoothed_samples(spec, n, k, trials):
        d = edit_distance(base, g)
        if d > k or not allowed(g, ntype):
            raise InvariantViolation(f"sample n={n} k={k} trial={t}: outside the smoothing support")
        rows.append(ResultRow(spec.kind, spec.generator, n, k, t, seed, "edit_distance", d, False, None))
    return rows


_RUNNERS = {"flood": _flood_rows, "walk": _walk_rows, "agg": _agg_rows, "sample-smooth": _sample_rows}


def _run_job(spec: ExperimentSpec, n: int, k: int, start: int, stop: int) -> list[ResultRow]:
    try:
        return _RUNNERS[spec.kind](spec, n, k, range(start, stop))
    except RetryExhausted as exc:
        exc.context = {"n": n, "k": k, "trials": (start, stop)}
        raise


def _lemma_rows(spec: ExperimentSpec) -> list[ResultRow]:
    from .lemmas import default_scenarios, verify_lemma_frequencies

    families = ("connected", "pairing") if spec.family == "both" else (spec.family,)
    rows = []
    index = 0
    for fam in families:
        report = verify_lemma_frequencies(fam, default_scenarios(fam), spec.trials, spec.seed)
        for r in report.results:
            s = r.scenario
            tag = f"lemma{s.lemma}"
            for metric, value in (
                ("frequency", r.frequency),
                ("ci_low", r.ci_low),
                ("ci_high", r.ci_high),
                ("bound", s.bound),
                ("pass", int(r.passed)),
            ):
                rows.append(ResultRow(spec.kind, s.name, s.graph.n, s.k, index, spec.seed, f"{tag}:{metric}", value))
            index += 1
    return rows


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> list[ResultRow]:
    """All rows of the campaign, sorted by (n, k, trial, metric).

    Trials are split into chunks that may run in worker processes; every
    trial derives its own seed, so the rows do not depend on ``workers``.
    """
    if spec.kind == "verify-lemmas":
        return _lemma_rows(spec)
    jobs = []
    chunk = max(1, math.ceil(spec.trials / (4 * max(workers, 1))))
    for n in spec.n_values:
        for k in spec.k_values:
            for start in range(0, spec.trials, chunk):
                jobs.append((n, k, start, min(start + chunk, spec.trials)))
    rows: list[ResultRow] = []
    if workers <= 1:
        for job in jobs:
            rows += _run_job(spec, *job)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_job, spec, *job) for job in jobs]
            for fut in futures:
                rows += fut.result()
    rows.sort(key=ResultRow.sort_key)
    return rows


# -- CSV -----------------------------------------------------------------------


def write_csv(rows: Iterable[ResultRow], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(row.csv_fields())


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(path: str | os.PathLike) -> list[dict[str, Any]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected CSV header {reader.fieldnames}")
        out = []
        for rec in reader:
            rec["n"], rec["k"], rec["trial"] = int(rec["n"]), int(rec["k"]), int(rec["trial"])
            rec["metric_value"] = float(rec["metric_value"])
            rec["censored"] = rec["censored"] == "1"
            out.append(rec)
        return out
