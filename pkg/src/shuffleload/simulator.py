"""Seedable simulator of shuffle-phase network load.

One run of a job with ``m`` map tasks and ``r`` reduce tasks:

1. tasks are placed on nodes (round-robin: task ``k`` on node ``k % num_nodes``;
   random: uniform node draws from the run's generator, maps first);
2. the intermediate data ``D = input_bytes * map_output_ratio`` is split evenly
   across the maps;
3. each map output is split across reducers with Zipf weights
   ``w_j ~ j**(-s)``, ``j = 1..r``;
4. every (map, reduce) pair on different nodes moves its bytes plus a fixed
   per-pair overhead, multiplied by ``cross_rack_weight`` when the two nodes
   sit in different racks;
5. the total is multiplied by ``max(0, 1 + noise_sigma * g)`` with ``g`` a
   standard normal draw.

Seeds
-----
``simulate_shuffle`` seeds ``numpy.random.default_rng`` with the seed it is
given. The profile runners derive one seed per run with
``mix_seed(base_seed, maps, reduces, run_index)`` (a splitmix64 chain), so
results do not depend on execution order and runs of one configuration get
independent draws.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _backend
from .errors import ExhaustedSpace, InvalidConfig
from .ingest import aggregate_runs
from .model import ParameterVector, ProfileDataset
from .records import RunRecord

KiB = 1024
MiB = 1024 * KiB
GiB = 1024 * MiB

DEFAULT_OVERHEAD = 256 * KiB
DEFAULT_NOISE = 0.05
DEFAULT_INPUT_BYTES = 256 * MiB
PLACEMENTS = ("round-robin", "random")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ClusterSpec:
    num_nodes: int = 5
    placement: str = "round-robin"
    rack_map: tuple[int, ...] | None = None
    cross_rack_weight: float = 1.0

    def __post_init__(self):
        if int(self.num_nodes) < 1:
            raise InvalidConfig("num_nodes must be >= 1")
        if self.placement not in PLACEMENTS:
            raise InvalidConfig(f"placement must be one of {PLACEMENTS}, got {self.placement!r}")
        if not self.cross_rack_weight >= 1.0:
            raise InvalidConfig("cross_rack_weight must be >= 1")
        if self.rack_map is not None:
            racks = tuple(self.rack_map)
            if len(racks) != self.num_nodes:
                raise InvalidConfig(
                    f"rack_map covers {len(racks)} nodes, cluster has {self.num_nodes}"
                )
            object.__setattr__(self, "rack_map", racks)

    def node_racks(self) -> np.ndarray:
        if self.rack_map is None:
            return np.zeros(self.num_nodes, dtype=np.int64)
        labels = {}
        ids = [labels.setdefault(rack, len(labels)) for rack in self.rack_map]
        return np.array(ids, dtype=np.int64)


@dataclass(frozen=True)
class WorkloadProfile:
    name: str
    input_bytes: int = DEFAULT_INPUT_BYTES
    map_output_ratio: float = 1.0
    partition_skew: float = 0.0
    per_pair_overhead_bytes: float = DEFAULT_OVERHEAD
    noise_sigma: float = DEFAULT_NOISE

    def __post_init__(self):
        if not self.input_bytes > 0:
            raise InvalidConfig("input_bytes must be > 0")
        if not self.map_output_ratio > 0:
            raise InvalidConfig("map_output_ratio must be > 0")
        if not self.partition_skew >= 0:
            raise InvalidConfig("partition_skew must be >= 0")
        if not self.per_pair_overhead_bytes >= 0:
            raise InvalidConfig("per_pair_overhead_bytes must be >= 0")
        if not 0 <= self.noise_sigma < 1:
            raise InvalidConfig("noise_sigma must be in [0, 1)")

    @property
    def intermediate_bytes(self) -> float:
        return self.input_bytes * self.map_output_ratio


# Synthetic stand-ins for three benchmark applications. Not calibrated to any
# real cluster; they only differ in how much data is shuffled and how it splits.
PRESETS = {
    "wordcount-like": WorkloadProfile("wordcount-like"),
    "terasort-like": WorkloadProfile("terasort-like", per_pair_overhead_bytes=4 * DEFAULT_OVERHEAD),
    "exim-like": WorkloadProfile("exim-like", map_output_ratio=0.3, partition_skew=0.5),
}


@dataclass(frozen=True)
class ShuffleBreakdown:
    remote_data: float
    remote_overhead: float
    local: float

    @property
    def shuffle_bytes(self) -> float:
        return self.remote_data + self.remote_overhead


def mix_seed(base: int, *coords: int) -> int:
    def splitmix(x):
        x = (x + 0x9E3779B97F4A7C15) & _MASK64
        x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
        return x ^ (x >> 31)

    h = splitmix(int(base) & _MASK64)
    for c in coords:
        h = splitmix(h ^ (int(c) & _MASK64))
    return h


def zipf_weights(r: int, s: float) -> list[float]:
    """Normalized reducer weights proportional to ``j**-s`` for ranks 1..r."""
    raw = [float(j) ** -s for j in range(1, r + 1)]
    total = math.fsum(raw)
    return [x / total for x in raw]


def place_tasks(cluster: ClusterSpec, m: int, r: int, rng: np.random.Generator | None = None):
    """Node index of every map task and every reduce task."""
    n = cluster.num_nodes
    if cluster.placement == "round-robin":
        return np.arange(m, dtype=np.int64) % n, np.arange(r, dtype=np.int64) % n
    if rng is None:
        raise ValueError("random placement needs a generator")
    maps = rng.integers(0, n, size=m, dtype=np.int64)
    reduces = rng.integers(0, n, size=r, dtype=np.int64)
    return maps, reduces


def _check_config(config) -> tuple[int, int]:
    pv = ParameterVector.of(config)
    if len(pv) != 2:
        raise InvalidConfig(f"expected (maps, reduces), got {pv.values}")
    return pv.values


def shuffle_breakdown(cluster: ClusterSpec, workload: WorkloadProfile, map_nodes, reduce_nodes,
                      pair_bytes=None) -> ShuffleBreakdown:
    """Noise-free byte accounting for an explicit task placement."""
    map_nodes = np.ascontiguousarray(map_nodes, dtype=np.int64)
    reduce_nodes = np.ascontiguousarray(reduce_nodes, dtype=np.int64)
    m, r = len(map_nodes), len(reduce_nodes)
    if m < 1 or r < 1:
        raise InvalidConfig("need at least one map and one reduce task")
    weights = np.array(zipf_weights(r, workload.partition_skew), dtype=float)
    per_map = workload.intermediate_bytes / m
    kernel = pair_bytes or _backend.pair_bytes
    data, ovh, local = kernel(map_nodes, reduce_nodes, cluster.node_racks(), weights, per_map,
                              float(workload.per_pair_overhead_bytes),
                              float(cluster.cross_rack_weight))
    return ShuffleBreakdown(data, ovh, local)


def simulate_shuffle(cluster: ClusterSpec, workload: WorkloadProfile, config, seed: int,
                     run_index: int = 1) -> RunRecord:
    m, r = _check_config(config)
    rng = np.random.default_rng(int(seed) & _MASK64)
    map_nodes, reduce_nodes = place_tasks(cluster, m, r, rng)
    bd = shuffle_breakdown(cluster, workload, map_nodes, reduce_nodes)
    factor = max(0.0, 1.0 + workload.noise_sigma * float(rng.standard_normal()))
    return RunRecord(m, r, int(workload.input_bytes), run_index, bd.shuffle_bytes * factor,
                     app=workload.name)


def run_profile_configs(cluster: ClusterSpec, workload: WorkloadProfile, configs: Iterable,
                        repetitions: int, seed: int, workers: int = 1
                        ) -> tuple[ProfileDataset, list[RunRecord]]:
    """Simulate ``repetitions`` runs of each configuration and average them."""
    if repetitions < 1:
        raise InvalidConfig("repetitions must be >= 1")
    cells = [_check_config(c) for c in configs]
    if not cells:
        raise InvalidConfig("no configurations to profile")
    if len(set(cells)) != len(cells):
        raise InvalidConfig("configurations must be distinct")
    jobs = [(m, r, k) for m, r in cells for k in range(1, repetitions + 1)]

    def run(job):
        m, r, k = job
        return simulate_shuffle(cluster, workload, (m, r), mix_seed(seed, m, r, k), run_index=k)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, jobs))
    else:
        records = [run(job) for job in jobs]
    records.sort(key=lambda rec: (rec.num_maps, rec.num_reduces, rec.run_index))
    return aggregate_runs(records), records


def run_profile_grid(cluster: ClusterSpec, workload: WorkloadProfile, map_values: Sequence[int],
                     reduce_values: Sequence[int], repetitions: int, seed: int,
                     workers: int = 1) -> tuple[ProfileDataset, list[RunRecord]]:
    for name, values in (("map_values", map_values), ("reduce_values", reduce_values)):
        if not values:
            raise InvalidConfig(f"{name} is empty")
        if len(set(values)) != len(values):
            raise InvalidConfig(f"{name} has repeated entries")
    configs = [(m, r) for m in map_values for r in reduce_values]
    return run_profile_configs(cluster, workload, configs, repetitions, seed, workers)


def sample_unseen_configs(n: int, lo: int, hi: int, exclude: Iterable = (), seed: int = 0
                          ) -> list[ParameterVector]:
    """``n`` distinct uniform integer configs in ``[lo, hi]**2`` avoiding ``exclude``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if lo < 1 or hi < lo:
        raise InvalidConfig(f"bad sampling range [{lo}, {hi}]")
    excluded = {ParameterVector.of(c).values for c in exclude}
    inside = sum(1 for a, b in excluded if lo <= a <= hi and lo <= b <= hi)
    available = (hi - lo + 1) ** 2 - inside
    if n > available:
        raise ExhaustedSpace(f"only {available} configurations left in [{lo}, {hi}]^2, need {n}")
    rng = np.random.default_rng(int(seed) & _MASK64)
    picked: list[tuple[int, int]] = []
    taken = set(excluded)
    while len(picked) < n:
        a, b = (int(v) for v in rng.integers(lo, hi + 1, size=2))
        if (a, b) in taken:
            continue
        taken.add((a, b))
        picked.append((a, b))
    return [ParameterVector(c) for c in picked]


# -- declarative config files -------------------------------------------------

def cluster_to_dict(cluster: ClusterSpec) -> dict:
    d = asdict(cluster)
    if d["rack_map"] is not None:
        d["rack_map"] = list(d["rack_map"])
    return d


def workload_to_dict(workload: WorkloadProfile) -> dict:
    return asdict(workload)


def cluster_from_dict(d: dict) -> ClusterSpec:
    unknown = set(d) - {"num_nodes", "placement", "rack_map", "cross_rack_weight"}
    if unknown:
        raise InvalidConfig(f"unknown cluster fields: {sorted(unknown)}")
    rack_map = d.get("rack_map")
    return ClusterSpec(
        num_nodes=int(d.get("num_nodes", 5)),
        placement=d.get("placement", "round-robin"),
        rack_map=tuple(rack_map) if rack_map is not None else None,
        cross_rack_weight=float(d.get("cross_rack_weight", 1.0)),
    )


def workload_from_dict(d: dict) -> WorkloadProfile:
    """Build a workload; a ``preset`` key supplies defaults for the other fields."""
    d = dict(d)
    preset = d.pop("preset", None)
    if preset is not None and preset not in PRESETS:
        raise InvalidConfig(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    base = PRESETS[preset] if preset is not None else WorkloadProfile("custom")
    fields = {"name", "input_bytes", "map_output_ratio", "partition_skew",
              "per_pair_overhead_bytes", "noise_sigma"}
    unknown = set(d) - fields
    if unknown:
        raise InvalidConfig(f"unknown workload fields: {sorted(unknown)}")
    if "input_bytes" in d:
        d["input_bytes"] = int(d["input_bytes"])
    return replace(base, **d)


def load_cluster(path: str | Path | None) -> ClusterSpec:
    if path is None:
        return ClusterSpec()
    return cluster_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_workload(source: str | Path) -> WorkloadProfile:
    """Preset name or path to a JSON workload file."""
    if str(source) in PRESETS:
        return PRESETS[str(source)]
    return workload_from_dict(json.loads(Path(source).read_text(encoding="utf-8")))
