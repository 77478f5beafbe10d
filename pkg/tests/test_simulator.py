import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import enumerate_pairs, enumerate_pairs_exact
from shuffleload import _backend
from shuffleload.errors import ExhaustedSpace, InvalidConfig
from shuffleload.simulator import (
    PRESETS,
    ClusterSpec,
    WorkloadProfile,
    load_cluster,
    load_workload,
    mix_seed,
    place_tasks,
    run_profile_configs,
    run_profile_grid,
    sample_unseen_configs,
    shuffle_breakdown,
    simulate_shuffle,
    zipf_weights,
)

GRID = [4, 8, 12, 16, 20, 24, 28, 32]
KERNELS = {"python": _backend.python_pair_bytes}
if _backend.compiled_pair_bytes is not None:
    KERNELS["cython"] = _backend.compiled_pair_bytes


@pytest.fixture(params=sorted(KERNELS))
def kernel(request, monkeypatch):
    monkeypatch.setattr(_backend, "pair_bytes", KERNELS[request.param])
    return KERNELS[request.param]


def quiet(**kw):
    base = dict(name="t", input_bytes=256 * 2**20, per_pair_overhead_bytes=0.0, noise_sigma=0.0)
    base.update(kw)
    return WorkloadProfile(**base)


class TestSimulateShuffle:
    def test_single_node_is_all_local(self, kernel):
        wl = PRESETS["exim-like"]
        rec = simulate_shuffle(ClusterSpec(num_nodes=1), WorkloadProfile(
            "x", map_output_ratio=0.3, partition_skew=0.5, noise_sigma=0.0), (12, 7), seed=3)
        assert rec.shuffle_bytes == 0.0
        assert wl.noise_sigma > 0

    def test_five_nodes_round_robin(self, kernel):
        wl = quiet()
        rec = simulate_shuffle(ClusterSpec(num_nodes=5), wl, (20, 20), seed=0)
        d = wl.intermediate_bytes
        # 400 pairs, 80 co-located; value frozen from the exhaustive oracle
        assert math.isclose(rec.shuffle_bytes, d * 4 / 5, rel_tol=1e-12)
        remote, _ = enumerate_pairs_exact([i % 5 for i in range(20)], [j % 5 for j in range(20)], d)
        assert math.isclose(rec.shuffle_bytes, float(remote), rel_tol=1e-12)
        assert rec.shuffle_bytes == enumerate_pairs(
            [i % 5 for i in range(20)], [j % 5 for j in range(20)], [0] * 5, d, 0.0, 0.0, 1.0)[0]

    def test_deterministic(self, kernel):
        cl = ClusterSpec(num_nodes=4, placement="random")
        a = simulate_shuffle(cl, PRESETS["terasort-like"], (9, 11), seed=2**63 + 5)
        b = simulate_shuffle(cl, PRESETS["terasort-like"], (9, 11), seed=2**63 + 5)
        assert a == b and a.shuffle_bytes.hex() == b.shuffle_bytes.hex()

    def test_invalid_config(self):
        with pytest.raises(InvalidConfig):
            simulate_shuffle(ClusterSpec(), PRESETS["wordcount-like"], (0, 4), seed=1)
        with pytest.raises(InvalidConfig):
            simulate_shuffle(ClusterSpec(), PRESETS["wordcount-like"], (4, -1), seed=1)

    def test_noise_floor(self):
        wl = WorkloadProfile("n", noise_sigma=0.99)
        loads = [simulate_shuffle(ClusterSpec(), wl, (8, 8), seed=s).shuffle_bytes
                 for s in range(300)]
        assert min(loads) >= 0.0

    def test_run_index_draws_independent_noise(self):
        wl = PRESETS["wordcount-like"]
        loads = {simulate_shuffle(ClusterSpec(), wl, (8, 8), mix_seed(1, 8, 8, k)).shuffle_bytes
                 for k in range(1, 11)}
        assert len(loads) == 10


class TestAccounting:
    def test_brute_force_equivalence_exhaustive(self, kernel):
        intermediate = 1e8 + 12345.678
        for nodes in (1, 2, 3):
            racks_options = [None] if nodes == 1 else [None, tuple(range(nodes))]
            for m, r in itertools.product(range(1, 7), repeat=2):
                for skew, ovh, racks, crw in itertools.product(
                        (0.0, 1.0), (0.0, 4096.0), racks_options, (1.0, 2.5)):
                    cl = ClusterSpec(nodes, rack_map=racks, cross_rack_weight=crw)
                    wl = quiet(input_bytes=int(intermediate), map_output_ratio=1.0,
                               partition_skew=skew, per_pair_overhead_bytes=ovh)
                    mn, rn = place_tasks(cl, m, r)
                    bd = shuffle_breakdown(cl, wl, mn, rn)
                    rack_ids = list(racks) if racks else [0] * nodes
                    want = enumerate_pairs(list(mn), list(rn), rack_ids, wl.intermediate_bytes,
                                           skew, ovh, crw)
                    assert (bd.remote_data, bd.remote_overhead, bd.local) == want
                    rec = simulate_shuffle(cl, wl, (m, r), seed=7)
                    assert rec.shuffle_bytes == want[0] + want[1]

    def test_random_placement_matches_oracle(self, kernel):
        cl = ClusterSpec(3, placement="random", rack_map=(0, 0, 1), cross_rack_weight=2.0)
        wl = quiet(partition_skew=0.7, per_pair_overhead_bytes=1000.0)
        for m, r in itertools.product(range(1, 7), repeat=2):
            mn, rn = place_tasks(cl, m, r, np.random.default_rng(m * 10 + r))
            bd = shuffle_breakdown(cl, wl, mn, rn)
            assert (bd.remote_data, bd.remote_overhead, bd.local) == enumerate_pairs(
                list(mn), list(rn), [0, 0, 1], wl.intermediate_bytes, 0.7, 1000.0, 2.0)

    @pytest.mark.parametrize("nodes", [1, 2, 3, 5])
    def test_conservation(self, kernel, nodes):
        wl = quiet(input_bytes=10**9 + 7, partition_skew=0.8)
        for m, r in itertools.product(range(1, 13), repeat=2):
            bd = shuffle_breakdown(ClusterSpec(nodes), wl, *place_tasks(ClusterSpec(nodes), m, r))
            assert math.isclose(bd.local + bd.shuffle_bytes, wl.intermediate_bytes, rel_tol=1e-12)

    def test_conservation_bit_exact_dyadic(self, kernel):
        wl = quiet(input_bytes=2**30)
        for m, r, nodes in itertools.product((1, 2, 4, 8, 16, 32), (1, 2, 4, 8, 16, 32), (1, 2, 3, 5)):
            cl = ClusterSpec(nodes)
            bd = shuffle_breakdown(cl, wl, *place_tasks(cl, m, r))
            assert bd.local + bd.shuffle_bytes == wl.intermediate_bytes

    def test_doubling_input_doubles_data_bytes(self, kernel):
        cl = ClusterSpec(5, rack_map=(0, 0, 1, 1, 2), cross_rack_weight=1.5)
        for m, r in [(4, 4), (7, 13), (32, 28)]:
            a = shuffle_breakdown(cl, quiet(input_bytes=3 * 10**8, per_pair_overhead_bytes=777.0),
                                  *place_tasks(cl, m, r))
            b = shuffle_breakdown(cl, quiet(input_bytes=6 * 10**8, per_pair_overhead_bytes=777.0),
                                  *place_tasks(cl, m, r))
            assert b.remote_data == 2 * a.remote_data
            assert b.remote_overhead == a.remote_overhead
            assert math.isclose(b.shuffle_bytes - b.remote_overhead,
                                2 * (a.shuffle_bytes - a.remote_overhead), rel_tol=1e-12)

    @given(st.integers(1, 200), st.floats(0, 3))
    def test_zipf_weights_normalized(self, r, s):
        w = zipf_weights(r, s)
        assert len(w) == r
        assert abs(math.fsum(w) - 1.0) <= 1e-12
        assert all(a >= b for a, b in zip(w, w[1:]))

    @pytest.mark.parametrize("r", [1, 3, 7, 32])
    def test_uniform_reducer_share(self, r):
        d = 123456789.0
        m = 5
        per_reducer = [sum(d / m * w for _ in range(m)) for w in zipf_weights(r, 0.0)]
        for share in per_reducer:
            assert abs(share - d / r) <= 1e-9 * d


@settings(max_examples=200, deadline=None)
@given(
    st.integers(1, 6), st.lists(st.integers(0, 5), min_size=1, max_size=40),
    st.lists(st.integers(0, 5), min_size=1, max_size=40),
    st.floats(0, 2), st.floats(1, 1e12), st.floats(0, 1e7), st.floats(1, 4),
    st.lists(st.integers(0, 2), min_size=6, max_size=6),
)
def test_backends_bit_identical(nodes, maps, reduces, skew, inter, ovh, crw, racks):
    if _backend.compiled_pair_bytes is None:
        pytest.skip("compiled kernel not built")
    mn = np.array([x % nodes for x in maps], dtype=np.int64)
    rn = np.array([x % nodes for x in reduces], dtype=np.int64)
    rk = np.array(racks[:nodes], dtype=np.int64)
    w = np.array(zipf_weights(len(rn), skew))
    args = (mn, rn, rk, w, inter / len(mn), ovh, crw)
    assert _backend.compiled_pair_bytes(*args) == _backend.python_pair_bytes(*args)


class TestGrid:
    def test_small_grid_arity(self):
        ds, recs = run_profile_grid(ClusterSpec(), PRESETS["wordcount-like"], [4, 8], [4, 8], 2, 1)
        assert len(recs) == 8 and len(ds) == 4

    def test_default_grid_arity(self):
        ds, recs = run_profile_grid(ClusterSpec(), PRESETS["wordcount-like"], GRID, GRID, 10, 42)
        assert len(recs) == 640 and len(ds) == 64
        assert [(r.num_maps, r.num_reduces, r.run_index) for r in recs] == sorted(
            (m, r, k) for m in GRID for r in GRID for k in range(1, 11))

    def test_means(self):
        ds, recs = run_profile_grid(ClusterSpec(), PRESETS["exim-like"], [4, 9], [5], 3, 8)
        for obs in ds.observations:
            loads = [r.shuffle_bytes for r in recs if r.config == obs.config.values]
            assert obs.load == pytest.approx(sum(loads) / 3, rel=1e-15)
            assert min(loads) <= obs.load <= max(loads)

    def test_parallel_matches_sequential(self):
        cl, wl = ClusterSpec(placement="random"), PRESETS["terasort-like"]
        a = run_profile_grid(cl, wl, GRID, GRID[:4], 3, 99)
        b = run_profile_grid(cl, wl, GRID, GRID[:4], 3, 99, workers=4)
        assert a == b

    def test_order_of_configs_irrelevant(self):
        cl, wl = ClusterSpec(), PRESETS["wordcount-like"]
        a = run_profile_configs(cl, wl, [(4, 4), (9, 3), (5, 30)], 2, 5)
        b = run_profile_configs(cl, wl, [(5, 30), (4, 4), (9, 3)], 2, 5)
        assert a == b

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidConfig):
            run_profile_grid(ClusterSpec(), PRESETS["wordcount-like"], [4, 4], [4], 1, 0)
        with pytest.raises(InvalidConfig):
            run_profile_grid(ClusterSpec(), PRESETS["wordcount-like"], [], [4], 1, 0)
        with pytest.raises(InvalidConfig):
            run_profile_grid(ClusterSpec(), PRESETS["wordcount-like"], [4], [4], 0, 0)
        with pytest.raises(InvalidConfig):
            run_profile_grid(ClusterSpec(), PRESETS["wordcount-like"], [0], [4], 1, 0)


class TestSampleUnseen:
    def test_default_protocol_sizes(self):
        grid = {(m, r) for m in GRID for r in GRID}
        configs = sample_unseen_configs(30, 4, 32, grid, seed=42)
        values = [c.values for c in configs]
        assert len(set(values)) == 30
        assert not set(values) & grid
        assert all(4 <= a <= 32 and 4 <= b <= 32 for a, b in values)
        assert values == [c.values for c in sample_unseen_configs(30, 4, 32, grid, seed=42)]
        assert values != [c.values for c in sample_unseen_configs(30, 4, 32, grid, seed=43)]

    def test_singleton(self):
        assert [c.values for c in sample_unseen_configs(1, 4, 4, set(), seed=0)] == [(4, 4)]

    def test_exhausted(self):
        with pytest.raises(ExhaustedSpace):
            sample_unseen_configs(2, 4, 4, set(), seed=0)
        with pytest.raises(ExhaustedSpace):
            sample_unseen_configs(1, 4, 5, {(4, 4), (4, 5), (5, 4), (5, 5)}, seed=0)

    def test_fills_space_exactly(self):
        got = sample_unseen_configs(8, 1, 3, {(2, 2)}, seed=4)
        assert {c.values for c in got} == set(itertools.product((1, 2, 3), repeat=2)) - {(2, 2)}


class TestConfigFiles:
    def test_cluster_round_trip(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"num_nodes": 4, "placement": "random",
                                    "rack_map": ["a", "a", "b", "b"], "cross_rack_weight": 2}))
        cl = load_cluster(path)
        assert cl.num_nodes == 4 and cl.placement == "random"
        assert cl.node_racks().tolist() == [0, 0, 1, 1]
        assert load_cluster(None) == ClusterSpec()

    def test_workload_preset_override(self, tmp_path):
        path = tmp_path / "w.json"
        path.write_text(json.dumps({"preset": "exim-like", "noise_sigma": 0.0}))
        wl = load_workload(path)
        assert wl.name == "exim-like" and wl.noise_sigma == 0.0 and wl.partition_skew == 0.5
        assert load_workload("terasort-like") is PRESETS["terasort-like"]

    def test_bad_fields(self, tmp_path):
        path = tmp_path / "w.json"
        path.write_text(json.dumps({"name": "x", "bogus": 1}))
        with pytest.raises(InvalidConfig):
            load_workload(path)
        with pytest.raises(InvalidConfig):
            ClusterSpec(3, rack_map=(0, 1))
        with pytest.raises(InvalidConfig):
            ClusterSpec(3, cross_rack_weight=0.5)
        with pytest.raises(InvalidConfig):
            WorkloadProfile("x", noise_sigma=1.0)

    def test_presets(self):
        assert PRESETS["terasort-like"].per_pair_overhead_bytes == 4 * 256 * 1024
        assert PRESETS["exim-like"].map_output_ratio == 0.3
        assert PRESETS["wordcount-like"].partition_skew == 0.0
