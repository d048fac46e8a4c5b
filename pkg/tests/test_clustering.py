"""Blocked epsilon clustering against the union-find oracle and its invariants."""

import numpy as np
import pytest

from dedupkit import (
    ClusterAssignment,
    ClusterParams,
    DataError,
    Dataset,
    EmbeddingMatrix,
    MatchSentenceSpec,
    MockProvider,
    cluster,
    cluster_multi_epsilon,
    embed_dataset,
    group_stats,
    load_assignment_csv,
    save_assignment_csv,
)

from conftest import (
    make_dataset,
    margin_safe_epsilon,
    oracle_cluster_labels,
    oracle_distance_matrix,
    random_sentences,
)


def _matrix(vectors, ids=None) -> EmbeddingMatrix:
    vectors = np.asarray(vectors, dtype=np.float32)
    if ids is None:
        ids = tuple(str(i) for i in range(vectors.shape[0]))
    return EmbeddingMatrix(tuple(ids), vectors, "test")


def _partition(assignment: ClusterAssignment) -> set[frozenset]:
    return {frozenset(m) for m in assignment.groups.values()} | {
        frozenset([rid]) for rid in assignment.singletons
    }


def _labels_to_partition(labels: dict[str, str]) -> set[frozenset]:
    by_label: dict[str, set] = {}
    for rid, label in labels.items():
        by_label.setdefault(label, set()).add(rid)
    return {frozenset(v) for v in by_label.values()}


def assert_blocking_sound(assignment: ClusterAssignment, dataset: Dataset, block_columns):
    by_id = dataset.by_id()
    for members in assignment.groups.values():
        keys = {
            tuple(by_id[rid].attributes[c] for c in block_columns) for rid in members
        }
        assert len(keys) == 1, f"group {members} spans blocks {keys}"


class TestClusterEdges:
    def test_epsilon_zero_distinct_vectors_all_singletons(self):
        rng = np.random.default_rng(0)
        vectors = rng.standard_normal((8, 6)).astype(np.float32)
        ds = make_dataset([(f"t{i}",) for i in range(8)], ["text"])
        asgn = cluster(_matrix(vectors), ds, ClusterParams("l2", 0.0))
        assert asgn.groups == {}
        assert asgn.singletons == frozenset(str(i) for i in range(8))

    @pytest.mark.parametrize("epsilon", [0.0, 0.1, 1.5])
    def test_identical_vectors_same_block_group_of_two(self, epsilon):
        # Third vector is antipodal (cosine distance 2), beyond any epsilon here.
        vectors = np.array([[0.6, 0.8], [0.6, 0.8], [-0.6, -0.8]], dtype=np.float32)
        ds = make_dataset([("a", "B1"), ("b", "B1"), ("c", "B1")], ["text", "blk"])
        asgn = cluster(
            _matrix(vectors), ds, ClusterParams("cosine", epsilon, ("blk",))
        )
        assert asgn.groups == {"0": frozenset({"0", "1"})}
        assert asgn.singletons == frozenset({"2"})

    def test_within_epsilon_but_different_block_stay_singletons(self):
        vectors = np.array([[1.0, 0.0], [1.0, 0.0]], dtype=np.float32)
        ds = make_dataset([("a", "london"), ("a", "paris")], ["text", "city"])
        asgn = cluster(_matrix(vectors), ds, ClusterParams("cosine", 0.5, ("city",)))
        assert asgn.groups == {}
        assert asgn.singletons == frozenset({"0", "1"})

    def test_matrix_dataset_id_mismatch(self):
        vectors = np.ones((2, 3), dtype=np.float32)
        ds = make_dataset([("a",), ("b",), ("c",)], ["text"])
        with pytest.raises(DataError, match="do not match"):
            cluster(_matrix(vectors), ds, ClusterParams("l2", 0.1))

    def test_unknown_block_column(self):
        vectors = np.ones((2, 3), dtype=np.float32)
        ds = make_dataset([("a",), ("b",)], ["text"])
        with pytest.raises(DataError, match="block columns"):
            cluster(_matrix(vectors), ds, ClusterParams("l2", 0.1, ("ghost",)))

    def test_cosine_zero_vector_rejected(self):
        vectors = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.float32)
        ds = make_dataset([("a",), ("b",)], ["text"])
        with pytest.raises(DataError, match="zero vector"):
            cluster(_matrix(vectors), ds, ClusterParams("cosine", 0.1))

    def test_empty_sentences_forced_singletons(self):
        # Two all-empty records embed identically but must never match.
        ds = make_dataset([("",), ("",), ("hello world",)], ["text"])
        spec = MatchSentenceSpec(("text",))
        matrix = embed_dataset(ds, spec, MockProvider(dim=8, seed=1))
        with_rule = cluster(
            matrix, ds, ClusterParams("cosine", 0.5), sentence_spec=spec
        )
        assert with_rule.groups == {}
        without_rule = cluster(matrix, ds, ClusterParams("cosine", 0.5))
        assert without_rule.groups == {"0": frozenset({"0", "1"})}


class TestPlantedClusters:
    def test_recovers_planted_partition_and_matches_oracle(self, planted):
        ds, matrix, eps = planted["dataset"], planted["matrix"], planted["epsilon"]
        asgn = cluster(matrix, ds, ClusterParams("cosine", eps), sentence_spec=planted["spec"])
        truth = planted["truth"]
        expected = {
            frozenset(
                rid for rid, t in zip(ds.record_ids(), truth) if t == label
            )
            for label in set(truth)
        }
        assert _partition(asgn) == expected
        oracle = oracle_cluster_labels(ds, matrix, "cosine", eps)
        assert _partition(asgn) == _labels_to_partition(oracle)

    def test_group_stats_match_planted_design(self, planted):
        asgn = cluster(
            planted["matrix"],
            planted["dataset"],
            ClusterParams("cosine", planted["epsilon"]),
        )
        stats = group_stats(asgn)
        assert stats.max_group_size == max(planted["sizes"])
        assert stats.num_match_groups == len(planted["sizes"])

    def test_order_independence(self, planted):
        ds, matrix, eps = planted["dataset"], planted["matrix"], planted["epsilon"]
        base = cluster(matrix, ds, ClusterParams("cosine", eps))

        rng = np.random.default_rng(5)
        perm = rng.permutation(len(ds))
        shuffled_ds = Dataset(
            records=tuple(ds.records[i] for i in perm), schema=ds.schema, name=ds.name
        )
        shuffled_matrix = EmbeddingMatrix(
            tuple(matrix.record_ids[i] for i in perm),
            matrix.vectors[perm],
            matrix.provider_tag,
        )
        shuffled = cluster(shuffled_matrix, shuffled_ds, ClusterParams("cosine", eps))
        assert _partition(base) == _partition(shuffled)
        assert base.groups.keys() == shuffled.groups.keys()

    def test_epsilon_monotonicity(self, planted):
        ds, matrix = planted["dataset"], planted["matrix"]
        small = cluster(matrix, ds, ClusterParams("cosine", planted["max_intra"] / 2))
        large = cluster(matrix, ds, ClusterParams("cosine", planted["epsilon"]))
        large_labels = large.as_labels()
        for members in small.groups.values():
            assert len({large_labels[rid] for rid in members}) == 1


class TestRandomizedOracle:
    @pytest.mark.parametrize("seed", range(6))
    def test_matches_union_find_oracle_with_blocks(self, seed):
        rng = np.random.default_rng(200 + seed)
        n_clusters = int(rng.integers(3, 8))
        sizes = [int(rng.integers(1, 7)) for _ in range(n_clusters)]
        sentences, truth = random_sentences(rng, n_clusters, sizes)
        n_blocks = int(rng.integers(1, 4))
        blocks = [f"B{rng.integers(0, n_blocks)}" for _ in sentences]
        ds = make_dataset(list(zip(sentences, blocks)), ["text", "blk"], truth=truth)
        spec = MatchSentenceSpec(("text",))
        matrix = embed_dataset(ds, spec, MockProvider(dim=48, seed=seed))

        block_columns = ("blk",) if rng.random() < 0.7 else ()
        metric = "cosine" if rng.random() < 0.5 else "l2"
        dist = oracle_distance_matrix(matrix.vectors, metric)
        iu, ju = np.triu_indices(len(ds), k=1)
        eps = margin_safe_epsilon(dist[iu, ju], rng)

        asgn = cluster(matrix, ds, ClusterParams(metric, eps, block_columns))
        oracle = oracle_cluster_labels(ds, matrix, metric, eps, block_columns)
        assert _partition(asgn) == _labels_to_partition(oracle)
        assert_blocking_sound(asgn, ds, block_columns)


class TestMetricEquivalence:
    @pytest.mark.parametrize("seed", range(4))
    def test_l2_epsilon_equals_cosine_half_square(self, seed):
        # On unit vectors an l2 ball of radius e equals a cosine ball of
        # radius e^2/2; epsilons are kept > 1e-4 away from every pairwise
        # distance so the 1e-5 identity slack cannot flip a decision.
        rng = np.random.default_rng(300 + seed)
        sentences, truth = random_sentences(rng, 5, [3, 3, 2, 2, 2])
        ds = make_dataset([(s,) for s in sentences], ["text"], truth=truth)
        matrix = embed_dataset(
            ds, MatchSentenceSpec(("text",)), MockProvider(dim=32, seed=seed)
        )
        dist = oracle_distance_matrix(matrix.vectors, "l2")
        iu, ju = np.triu_indices(len(ds), k=1)
        eps_l2 = margin_safe_epsilon(dist[iu, ju], rng, min_gap=1e-4)
        left = cluster(matrix, ds, ClusterParams("l2", eps_l2))
        right = cluster(matrix, ds, ClusterParams("cosine", eps_l2 * eps_l2 / 2.0))
        assert _partition(left) == _partition(right)


class TestMultiEpsilon:
    def test_consistent_with_single_epsilon_runs(self, planted):
        ds, matrix = planted["dataset"], planted["matrix"]
        epsilons = [planted["max_intra"] / 2, planted["epsilon"], planted["min_inter"] + 0.05]
        fused = cluster_multi_epsilon(matrix, ds, "cosine", epsilons)
        for eps, asgn in zip(epsilons, fused):
            single = cluster(matrix, ds, ClusterParams("cosine", eps))
            assert _partition(asgn) == _partition(single)

    def test_requires_strictly_increasing(self, planted):
        with pytest.raises(DataError, match="strictly increasing"):
            cluster_multi_epsilon(
                planted["matrix"], planted["dataset"], "cosine", [0.2, 0.2]
            )


class TestGroupStats:
    def test_direct_computation(self):
        asgn = ClusterAssignment(
            groups={
                "a": frozenset({"a", "b", "c"}),
                "d": frozenset({"d", "e"}),
                "f": frozenset({"f", "g", "h", "i", "j", "k", "l"}),
            },
            singletons=frozenset({"z"}),
        )
        stats = group_stats(asgn)
        assert stats.max_group_size == 7
        assert stats.num_match_groups == 3

    def test_all_singletons(self):
        asgn = ClusterAssignment(groups={}, singletons=frozenset({"a", "b"}))
        stats = group_stats(asgn)
        assert stats.max_group_size == 0
        assert stats.num_match_groups == 0


class TestAssignmentValidation:
    def test_group_of_one_rejected(self):
        with pytest.raises(DataError, match="fewer than 2"):
            ClusterAssignment(groups={"a": frozenset({"a"})}, singletons=frozenset())

    def test_group_id_must_be_min_member(self):
        with pytest.raises(DataError, match="smallest"):
            ClusterAssignment(groups={"b": frozenset({"a", "b"})}, singletons=frozenset())

    def test_overlap_rejected(self):
        with pytest.raises(DataError, match="overlap"):
            ClusterAssignment(
                groups={"a": frozenset({"a", "b"})}, singletons=frozenset({"b"})
            )


class TestAssignmentCsv:
    def test_round_trip_and_singleton_flag(self, tmp_path, planted):
        asgn = cluster(
            planted["matrix"], planted["dataset"], ClusterParams("cosine", planted["epsilon"])
        )
        path = tmp_path / "assignment.csv"
        save_assignment_csv(asgn, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "record_id,group_id,is_singleton"
        again = load_assignment_csv(path)
        assert _partition(again) == _partition(asgn)
        assert again.groups.keys() == asgn.groups.keys()

    def test_singletons_use_own_id(self, tmp_path):
        asgn = ClusterAssignment(groups={}, singletons=frozenset({"x", "y"}))
        path = tmp_path / "assignment.csv"
        save_assignment_csv(asgn, path)
        rows = path.read_text().splitlines()[1:]
        assert rows == ["x,x,1", "y,y,1"]
