"""Experiment harness: sampling-rate sweeps comparing AG, NG, and RDM.

For each rate and sample index a ground subset T is drawn (independent
Bernoulli per item, seeded), each algorithm runs restricted to T, and its
expected utility is estimated: exactly when the instance materializes an
explicit prior, by seeded Monte-Carlo otherwise. The fidelity mode is
recorded per row and in the CSV metadata; it never switches silently.

Seed discipline: every random draw derives from a sha256 hash of the
master seed plus structural indices, so the subset sequence is shared by
all algorithms and adding an algorithm never perturbs the others' draws.
"""

from __future__ import annotations

import json
import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import CapacityError, InvalidParameterError
from .instance_io import instance_from_dict, load_instance
from .model import Instance, expected_utility
from .policy import adaptive_greedy, nonadaptive_greedy, random_policy
from .sampling import lower_bound_instance
from .seeding import derive_seed
from .systems import CardinalitySystem, restrict
from .viral import (
    Graph,
    conditional_gains,
    estimate_spread,
    live_reachable,
    parse_edge_list,
    set_extension_gains,
    synthetic_graph,
)

ALGORITHMS = ("AG", "NG", "RDM")
DEFAULT_RATES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
CSV_COLUMNS = ("algorithm", "rate", "sample", "subset_size", "utility", "mode", "wall_ms")
WORKERS_ENV = "ADSUB_WORKERS"


@dataclass(frozen=True)
class ExperimentConfig:
    instance: dict
    algorithms: tuple[str, ...] = ALGORITHMS
    rates: tuple[float, ...] = DEFAULT_RATES
    samples_per_rate: int = 30
    trials: int = 10_000
    k: int = 5
    master_seed: int = 0
    episodes: int = 1

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(str(a) for a in self.algorithms))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise InvalidParameterError(f"unknown algorithms {bad}; expected subset of {ALGORITHMS}")
        if not self.algorithms:
            raise InvalidParameterError("at least one algorithm required")
        if any(not 0.0 < r <= 1.0 for r in self.rates):
            raise InvalidParameterError("rates must lie in (0, 1]")
        if self.samples_per_rate < 1:
            raise InvalidParameterError("samples_per_rate must be at least 1")
        if self.trials < 1 or self.episodes < 1:
            raise InvalidParameterError("trials and episodes must be at least 1")
        if self.k < 0:
            raise InvalidParameterError("k must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "algorithms": list(self.algorithms),
            "rates": list(self.rates),
            "samples_per_rate": self.samples_per_rate,
            "trials": self.trials,
            "k": self.k,
            "master_seed": self.master_seed,
            "episodes": self.episodes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        kwargs = {}
        for name in (
            "instance",
            "algorithms",
            "rates",
            "samples_per_rate",
            "trials",
            "k",
            "master_seed",
            "episodes",
        ):
            if name in data:
                kwargs[name] = data[name]
        if "algorithms" in kwargs:
            kwargs["algorithms"] = tuple(kwargs["algorithms"])
        if "rates" in kwargs:
            kwargs["rates"] = tuple(kwargs["rates"])
        return cls(**kwargs)


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    rate: float
    sample: int
    subset_size: int
    utility: float
    mode: str
    wall_ms: float = 0.0


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    rate: float
    count: int
    mean: float
    stddev: float
    ci_halfwidth: float
    degenerate: bool


class ExperimentContext:
    """Either an exact materialized instance or a Monte-Carlo cascade graph."""

    def __init__(self, mode: str, instance: Optional[Instance] = None, graph: Optional[Graph] = None):
        self.mode = mode
        self.instance = instance
        self.graph = graph

    @property
    def n(self) -> int:
        return self.instance.n if self.instance is not None else self.graph.n


def build_context(cfg: ExperimentConfig) -> ExperimentContext:
    source = cfg.instance
    kind = source.get("kind")
    if kind == "lower-bound":
        return ExperimentContext("exact", instance=lower_bound_instance())
    if kind == "file":
        try:
            return ExperimentContext("exact", instance=load_instance(source["path"]))
        except CapacityError:
            data = json.loads(Path(source["path"]).read_text())
            return ExperimentContext("mc", graph=_graph_from_instance_data(data))
    if kind == "active-learning":
        return ExperimentContext("exact", instance=instance_from_dict({"utility": source}))
    if kind == "independent-cascade":
        try:
            return ExperimentContext("exact", instance=instance_from_dict({"utility": source}))
        except CapacityError:
            from .instance_io import _graph_from_descriptor

            return ExperimentContext("mc", graph=_graph_from_descriptor(source))
    if kind == "edge-list":
        text = Path(source["path"]).read_text()
        graph = parse_edge_list(text, default_prob=float(source.get("edge_prob", 0.01)))
        return _context_for_graph(graph, cfg)
    if kind == "synthetic-ic":
        graph = synthetic_graph(
            n=int(source.get("n", 50)),
            hubs=int(source.get("hubs", 5)),
            hub_out_degree=int(source.get("hub_out_degree", 15)),
            base_out_degree=int(source.get("base_out_degree", 3)),
            edge_prob=float(source.get("edge_prob", 0.05)),
            seed=int(source.get("seed", 0)),
        )
        return _context_for_graph(graph, cfg)
    raise InvalidParameterError(f"unknown instance source kind {kind!r}")


def _graph_from_instance_data(data: dict) -> Graph:
    from .instance_io import _graph_from_descriptor

    desc = data.get("utility", {})
    if desc.get("kind") != "independent-cascade":
        raise InvalidParameterError("only cascade instances fall back to Monte-Carlo mode")
    return _graph_from_descriptor(desc)


def _context_for_graph(graph: Graph, cfg: ExperimentConfig) -> ExperimentContext:
    from .viral import ic_instance

    try:
        inst = ic_instance(graph, system=CardinalitySystem(n=graph.n, k=cfg.k))
        return ExperimentContext("exact", instance=inst)
    except CapacityError:
        return ExperimentContext("mc", graph=graph)


def _subset_for(cfg: ExperimentConfig, n: int, rate_index: int, sample_index: int) -> frozenset[int]:
    rate = cfg.rates[rate_index]
    rng = random.Random(derive_seed(cfg.master_seed, "subset", rate_index, sample_index))
    return frozenset(e for e in range(n) if rng.random() < rate)


def _alg_seed(cfg: ExperimentConfig, algorithm: str, rate_index: int, sample_index: int, *extra) -> int:
    return derive_seed(cfg.master_seed, "alg", algorithm, rate_index, sample_index, *extra)


def _run_exact_row(ctx: ExperimentContext, cfg: ExperimentConfig, algorithm: str, rate_index: int, sample_index: int) -> ResultRow:
    inst = ctx.instance
    subset = _subset_for(cfg, inst.n, rate_index, sample_index)
    system = restrict(inst.system, frozenset(), subset)
    if algorithm == "AG":
        policy = adaptive_greedy(inst, system)
    elif algorithm == "NG":
        policy = nonadaptive_greedy(inst, system)
    elif algorithm == "RDM":
        policy = random_policy(inst, system, cfg.k, _alg_seed(cfg, "RDM", rate_index, sample_index))
    else:
        raise InvalidParameterError(f"unknown algorithm {algorithm!r}")
    value = expected_utility(inst, policy)
    return ResultRow(
        algorithm=algorithm,
        rate=cfg.rates[rate_index],
        sample=sample_index,
        subset_size=len(subset),
        utility=value,
        mode="exact",
    )


def _adaptive_episode(graph: Graph, subset: frozenset[int], cfg: ExperimentConfig, episode_seed: int) -> float:
    """One interactive adaptive-greedy run against a sampled ground truth.

    The hidden outcome is presampled per edge; each selection reveals the
    out-edges of every newly activated node (full-adoption feedback), and
    each decision estimates candidate marginals conditioned on the current
    activated set with shared Monte-Carlo samples.
    """
    out_rng = random.Random(derive_seed(episode_seed, "outcome"))
    outcome = [1 if out_rng.random() < p else 0 for _u, _v, p in graph.edges]
    activated: set[int] = set()
    selected: set[int] = set()
    for step in range(cfg.k):
        candidates = sorted(subset - selected)
        if not candidates:
            break
        rng = np.random.default_rng(derive_seed(episode_seed, "estimate", step))
        gains = conditional_gains(graph, frozenset(activated), candidates, cfg.trials, rng)
        best_item, best_gain = None, -math.inf
        for c in candidates:
            if gains[c] > best_gain:
                best_item, best_gain = c, gains[c]
        selected.add(best_item)
        newly = live_reachable(graph, (best_item,), outcome)
        activated |= newly
    return float(len(activated | selected))


def _run_mc_row(ctx: ExperimentContext, cfg: ExperimentConfig, algorithm: str, rate_index: int, sample_index: int) -> ResultRow:
    graph = ctx.graph
    subset = _subset_for(cfg, graph.n, rate_index, sample_index)
    seed = _alg_seed(cfg, algorithm, rate_index, sample_index)
    if algorithm == "AG":
        values = [
            _adaptive_episode(graph, subset, cfg, derive_seed(seed, "episode", ep))
            for ep in range(cfg.episodes)
        ]
        value = math.fsum(values) / len(values)
    elif algorithm == "NG":
        chosen: set[int] = set()
        for round_index in range(cfg.k):
            candidates = sorted(subset - chosen)
            if not candidates:
                break
            rng = np.random.default_rng(derive_seed(seed, "round", round_index))
            gains = set_extension_gains(graph, frozenset(chosen), candidates, cfg.trials, rng)
            best_item, best_gain = None, -math.inf
            for c in candidates:
                if gains[c] > best_gain:
                    best_item, best_gain = c, gains[c]
            chosen.add(best_item)
        rng = np.random.default_rng(derive_seed(seed, "evaluate"))
        value = estimate_spread(graph, frozenset(chosen), cfg.trials, rng)
    elif algorithm == "RDM":
        rng_pick = random.Random(derive_seed(seed, "pick"))
        pool = sorted(subset)
        chosen = frozenset(rng_pick.sample(pool, min(cfg.k, len(pool))))
        rng = np.random.default_rng(derive_seed(seed, "evaluate"))
        value = estimate_spread(graph, chosen, cfg.trials, rng)
    else:
        raise InvalidParameterError(f"unknown algorithm {algorithm!r}")
    return ResultRow(
        algorithm=algorithm,
        rate=cfg.rates[rate_index],
        sample=sample_index,
        subset_size=len(subset),
        utility=float(value),
        mode="mc",
    )


def _run_row(ctx: ExperimentContext, cfg: ExperimentConfig, job: tuple[str, int, int], timings: bool) -> ResultRow:
    algorithm, rate_index, sample_index = job
    start = time.perf_counter() if timings else 0.0
    if ctx.mode == "exact":
        row = _run_exact_row(ctx, cfg, algorithm, rate_index, sample_index)
    else:
        row = _run_mc_row(ctx, cfg, algorithm, rate_index, sample_index)
    if timings:
        row = replace(row, wall_ms=(time.perf_counter() - start) * 1000.0)
    return row


_POOL_STATE: dict = {}


def _pool_init(cfg_dict: dict, timings: bool) -> None:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    _POOL_STATE["cfg"] = cfg
    _POOL_STATE["ctx"] = build_context(cfg)
    _POOL_STATE["timings"] = timings


def _pool_run(job: tuple[str, int, int]) -> ResultRow:
    return _run_row(_POOL_STATE["ctx"], _POOL_STATE["cfg"], job, _POOL_STATE["timings"])


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(
    cfg: ExperimentConfig,
    workers: Optional[int] = None,
    timings: bool = False,
) -> tuple[list[ResultRow], list[SummaryRow]]:
    """Execute the sweep; rows come back canonically sorted so worker count
    never changes the output bytes."""
    ctx = build_context(cfg)
    jobs = [
        (algorithm, rate_index, sample_index)
        for algorithm in cfg.algorithms
        for rate_index in range(len(cfg.rates))
        for sample_index in range(cfg.samples_per_rate)
    ]
    if workers is None:
        workers = default_workers()
    # Exact rows are microtasks; a pool only pays off for Monte-Carlo rows.
    if workers > 1 and ctx.mode == "mc" and len(jobs) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_pool_init, initargs=(cfg.to_dict(), timings)
        ) as pool:
            chunk = max(1, len(jobs) // (8 * workers))
            rows = list(pool.map(_pool_run, jobs, chunksize=chunk))
    else:
        rows = [_run_row(ctx, cfg, job, timings) for job in jobs]
    rows.sort(key=lambda r: (r.algorithm, r.rate, r.sample))
    return rows, summarize(rows)


def summarize(rows: list[ResultRow]) -> list[SummaryRow]:
    """Per-(algorithm, rate) mean and normal-approximation 95% interval
    (half-width 1.96 s / sqrt(n), sample standard deviation)."""
    groups: dict[tuple[str, float], list[float]] = {}
    for row in rows:
        groups.setdefault((row.algorithm, row.rate), []).append(row.utility)
    out = []
    for (algorithm, rate), values in sorted(groups.items()):
        n = len(values)
        mean = math.fsum(values) / n
        if n > 1:
            var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
            stddev = math.sqrt(max(0.0, var))
            degenerate = False
        else:
            stddev = 0.0
            degenerate = True
        out.append(
            SummaryRow(
                algorithm=algorithm,
                rate=rate,
                count=n,
                mean=mean,
                stddev=stddev,
                ci_halfwidth=1.96 * stddev / math.sqrt(n),
                degenerate=degenerate,
            )
        )
    return out


def write_results_csv(path, rows: list[ResultRow], metadata: Optional[dict] = None) -> None:
    lines = []
    for key in sorted(metadata or {}):
        value = json.dumps(metadata[key], sort_keys=True)
        lines.append(f"# {key}={value}")
    lines.append(",".join(CSV_COLUMNS))
    for row in rows:
        lines.append(
            f"{row.algorithm},{row.rate!r},{row.sample},{row.subset_size},"
            f"{row.utility!r},{row.mode},{row.wall_ms!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_results_csv(path) -> tuple[list[ResultRow], dict]:
    metadata: dict = {}
    rows: list[ResultRow] = []
    header_seen = False
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                try:
                    metadata[key.strip()] = json.loads(value)
                except json.JSONDecodeError:
                    metadata[key.strip()] = value
            continue
        if not header_seen:
            if tuple(line.split(",")) != CSV_COLUMNS:
                raise InvalidParameterError(f"unexpected CSV header {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        rows.append(
            ResultRow(
                algorithm=parts[0],
                rate=float(parts[1]),
                sample=int(parts[2]),
                subset_size=int(parts[3]),
                utility=float(parts[4]),
                mode=parts[5],
                wall_ms=float(parts[6]),
            )
        )
    if not header_seen:
        raise InvalidParameterError("results CSV has no header line")
    return rows, metadata


def write_summary_csv(path, summaries: list[SummaryRow]) -> None:
    lines = ["algorithm,rate,count,mean,stddev,ci95_halfwidth,degenerate"]
    for s in summaries:
        lines.append(
            f"{s.algorithm},{s.rate!r},{s.count},{s.mean!r},{s.stddev!r},"
            f"{s.ci_halfwidth!r},{int(s.degenerate)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
