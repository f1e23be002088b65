"""Discovery procedure tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oddoneout import algorithms
from oddoneout.algorithms import (
    HybridConfig,
    ReplayError,
    Transcript,
    default_theta,
    replay,
    run_adaptive_hybrid,
    run_adaptive_pair,
    run_adaptive_triple,
    run_fresh_adaptive,
    run_fresh_random_triple,
    run_random_triple,
    run_tagging,
)
from oddoneout.model import (
    FeatureMatrix,
    FeatureTree,
    IndependentSpec,
    InvalidParameter,
    TreeNode,
    gen_d_ary_leafy_tree,
    gen_proper_binary_tree,
    sample_independent,
    triple_elicit_rate,
)
from oddoneout.oracle import GroundTruth, OraclePolicy, POLICY_KINDS
from test_model import fig_taxonomy_tree


class TestAdaptiveTriple:
    def test_exact_queries_on_binary_tree_all_policies(self):
        for kind in POLICY_KINDS:
            for seed in range(10):
                truth = GroundTruth.from_tree(gen_proper_binary_tree(2, seed=seed))
                res = run_adaptive_triple(truth, OraclePolicy(kind), seed=seed)
                assert res.elicitation_queries == 2
                assert res.none_answers == 0
                assert res.terminated_by == "exhaustion"
                assert len(res.feature_names) == 2

    def test_identical_examples_one_none_then_exhausted(self):
        mat = FeatureMatrix(bits=np.ones((3, 1), dtype=np.uint8), feature_names=("c",))
        truth = GroundTruth(matrix=mat)
        res = run_adaptive_triple(truth, OraclePolicy("homogeneous"), seed=0)
        assert res.elicitation_queries == 1
        assert res.none_answers == 1
        assert res.terminated_by == "exhaustion"
        assert res.feature_names == []

    def test_needs_three_examples(self):
        mat = FeatureMatrix(bits=np.zeros((2, 1), dtype=np.uint8), feature_names=("c",))
        with pytest.raises(InvalidParameter):
            run_adaptive_triple(GroundTruth(matrix=mat), OraclePolicy("uniform"), seed=0)

    def test_budget_stop(self):
        truth = GroundTruth.from_tree(gen_proper_binary_tree(8, seed=0))
        res = run_adaptive_triple(truth, OraclePolicy("uniform"), seed=0, budget=3)
        assert res.elicitation_queries == 3
        assert res.terminated_by == "budget"

    def test_recovered_columns_match_truth(self):
        truth = GroundTruth.from_tree(gen_proper_binary_tree(5, seed=4))
        res = run_adaptive_triple(truth, OraclePolicy("uniform"), seed=4)
        for k, j in enumerate(res.true_ids):
            assert np.array_equal(res.columns[:, k], truth.matrix.column(j))

    def test_never_returns_discovered_feature(self):
        # novelty is asserted inside the runner; a completed run proves it held
        for seed in range(20):
            truth = GroundTruth.from_tree(gen_proper_binary_tree(6, seed=seed))
            res = run_adaptive_triple(truth, OraclePolicy("homogeneous"), seed=seed)
            assert len(set(res.feature_names)) == len(res.feature_names) == 6


class TestAdaptivePair:
    def test_two_examples_one_query(self):
        mat = FeatureMatrix(
            bits=np.array([[1], [0]], dtype=np.uint8), feature_names=("f",)
        )
        res = run_adaptive_pair(GroundTruth(matrix=mat), OraclePolicy("homogeneous"), seed=0)
        assert res.elicitation_queries == 1
        assert res.feature_names == ["f"]
        assert res.terminated_by == "exhaustion"

    def test_specifist_misses_interior_features(self):
        # deepest-answer crowds on the taxonomy only ever surface the two
        # bottom features; the broad ones are never a pair's deepest answer
        truth = GroundTruth.from_tree(fig_taxonomy_tree())
        for seed in range(10):
            res = run_adaptive_pair(truth, OraclePolicy("specifist"), seed=seed)
            assert set(res.feature_names) == {"plant", "animal"}
            assert res.terminated_by == "exhaustion"

    def test_identical_examples_close_by_transitivity(self):
        mat = FeatureMatrix(bits=np.zeros((4, 1), dtype=np.uint8), feature_names=("c",))
        res = run_adaptive_pair(GroundTruth(matrix=mat), OraclePolicy("uniform"), seed=1)
        # 3 NONE answers suffice for 6 identical pairs
        assert res.none_answers == 3
        assert res.terminated_by == "exhaustion"

    def test_fresh_pair_mean_under_bound(self):
        spec = IndependentSpec.uniform(4, 0.5)
        counts = [
            run_fresh_adaptive(spec, OraclePolicy("uniform"), arity=2, seed=s).elicitation_queries
            for s in range(300)
        ]
        assert np.mean(counts) <= 8.0  # sum M_j / q_j with q = 2 p (1-p)


class TestRandomTriple:
    def test_zero_budget(self):
        truth = GroundTruth.from_tree(gen_proper_binary_tree(3, seed=0))
        res = run_random_triple(truth, OraclePolicy("uniform"), 0, seed=0)
        assert res.elicitation_queries == 0
        assert res.feature_names == []

    def test_duplicates_deduped(self):
        truth = GroundTruth.from_tree(gen_proper_binary_tree(2, seed=0))
        res = run_random_triple(truth, OraclePolicy("homogeneous"), 50, seed=0)
        assert len(set(res.feature_names)) == len(res.feature_names)
        assert res.elicitation_queries == 50

    def test_all_zero_matrix_all_nones(self):
        mat = FeatureMatrix(bits=np.zeros((5, 2), dtype=np.uint8), feature_names=("a", "b"))
        res = run_random_triple(GroundTruth(matrix=mat), OraclePolicy("uniform"), 10, seed=0)
        assert res.none_answers == 10


class TestTagging:
    def test_budget_one(self):
        truth = GroundTruth.from_tree(gen_proper_binary_tree(4, seed=1))
        res = run_tagging(truth, OraclePolicy("uniform"), 1, seed=0)
        assert len(res.feature_names) <= 1

    def test_all_zero_rows_all_nones(self):
        mat = FeatureMatrix(bits=np.zeros((4, 2), dtype=np.uint8), feature_names=("a", "b"))
        res = run_tagging(GroundTruth(matrix=mat), OraclePolicy("uniform"), 8, seed=0)
        assert res.none_answers == 8
        assert res.feature_names == []

    def test_homogeneous_plateaus_at_most_salient(self):
        truth = GroundTruth.from_tree(fig_taxonomy_tree())
        res = run_tagging(truth, OraclePolicy("homogeneous"), 200, seed=3)
        # every row tags as its most salient present feature; nothing else ever shows
        expected = set()
        for i in range(truth.matrix.n_examples):
            present = np.flatnonzero(truth.matrix.row(i))
            if present.size:
                expected.add(truth.matrix.feature_names[present.min()])
        assert set(res.feature_names) == expected
        assert len(res.feature_names) < truth.matrix.n_features


class TestFreshMode:
    def test_elicit_rate_matches_formula(self):
        # chance a fresh triple is distinguished by one undiscovered feature
        p = 0.5
        rng = np.random.default_rng(0)
        rows = (rng.random((200_000, 3)) < p).astype(np.uint8)
        rate = float((rows.sum(axis=1) == 2).mean())
        assert abs(rate - triple_elicit_rate(p)) < 0.005

    def test_adaptive_triple_mean_under_bound(self):
        spec = IndependentSpec.uniform(8, 0.5)
        counts = [
            run_fresh_adaptive(spec, OraclePolicy("uniform"), arity=3, seed=s).elicitation_queries
            for s in range(300)
        ]
        assert np.mean(counts) <= 8 / (3 / 8)

    def test_policy_independent_count_distribution(self):
        spec = IndependentSpec.uniform(4, 0.5)
        a = [run_fresh_adaptive(spec, OraclePolicy("uniform"), seed=s).elicitation_queries for s in range(400)]
        b = [run_fresh_adaptive(spec, OraclePolicy("homogeneous"), seed=s).elicitation_queries for s in range(400)]
        assert abs(np.mean(a) - np.mean(b)) < 0.8

    def test_fresh_random_dominated_by_last_feature(self):
        spec = IndependentSpec.uniform(8, 0.5)
        res = run_fresh_random_triple(spec, OraclePolicy("homogeneous"), seed=0)
        assert res.terminated_by == "exhaustion"
        assert len(res.found) == 8

    def test_tree_policies_rejected(self):
        spec = IndependentSpec.uniform(3, 0.5)
        with pytest.raises(InvalidParameter):
            run_fresh_adaptive(spec, OraclePolicy("generalist"), seed=0)


def star_under_feature_tree(n_leaves=3):
    return FeatureTree(
        root=TreeNode(
            children=[
                TreeNode(feature="hub", children=[TreeNode(leaf=i) for i in range(n_leaves)]),
                TreeNode(leaf=n_leaves),
            ]
        )
    )


class TestAdaptiveHybrid:
    def test_recovers_all_features_small(self):
        for seed in range(20):
            tree = gen_d_ary_leafy_tree(6, 2, 20, seed=seed)
            truth = GroundTruth.from_tree(tree)
            res = run_adaptive_hybrid(
                truth,
                OraclePolicy("uniform"),
                HybridConfig(d=2, delta=0.1, theta=default_theta(2, 6, 0.1)),
                seed=seed,
            )
            assert len(res.feature_names) == 6

    def test_star_under_feature_burns_theta_nones(self):
        truth = GroundTruth.from_tree(star_under_feature_tree(3))
        theta = 5
        res = run_adaptive_hybrid(
            truth, OraclePolicy("uniform"), HybridConfig(d=2, theta=theta), seed=0
        )
        assert res.feature_names == ["hub"]  # found by the pair phase
        # phase 2 pops the hub and must see exactly theta NONE triples on its
        # three identical leaves before retiring it
        phase2_nones = [
            ev for ev in res.transcript.events
            if ev.kind == "triple" and ev.payload["a"] is None
        ]
        assert len(phase2_nones) == theta

    def test_all_policies_on_small_trees(self):
        for kind in POLICY_KINDS:
            tree = gen_d_ary_leafy_tree(4, 2, 14, seed=7)
            truth = GroundTruth.from_tree(tree)
            res = run_adaptive_hybrid(
                truth, OraclePolicy(kind),
                HybridConfig(d=2, delta=0.1, theta=default_theta(2, 4, 0.1)),
                seed=11,
            )
            assert len(res.feature_names) == 4, kind

    def test_adaptive_theta_default(self):
        cfg = HybridConfig(d=2, delta=0.1)
        assert cfg.theta_for(0) == default_theta(2, 2, 0.1)
        assert cfg.theta_for(10) == default_theta(2, 12, 0.1)

    def test_query_budget_scales_like_bound(self):
        # total queries stay within a small constant of N + M theta
        d, delta = 2, 0.1
        for m in (4, 8, 16):
            theta = default_theta(d, m, delta)
            tree = gen_d_ary_leafy_tree(m, d, 3 * m + 4, seed=m)
            truth = GroundTruth.from_tree(tree)
            res = run_adaptive_hybrid(
                truth, OraclePolicy("uniform"),
                HybridConfig(d=d, delta=delta, theta=theta), seed=m,
            )
            n = truth.matrix.n_examples
            assert res.elicitation_queries <= 3 * (n + m * theta)


class TestReplay:
    def test_round_trip(self):
        truth = GroundTruth.from_tree(gen_proper_binary_tree(5, seed=2))
        res = run_adaptive_triple(truth, OraclePolicy("uniform"), seed=2)
        text = res.transcript.to_jsonl()
        rebuilt = replay(Transcript.from_jsonl(text), truth)
        assert rebuilt.elicitation_queries == res.elicitation_queries
        assert rebuilt.none_answers == res.none_answers
        assert rebuilt.feature_names == res.feature_names
        assert rebuilt.terminated_by == res.terminated_by
        assert np.array_equal(rebuilt.columns, res.columns)

    def test_unsound_answer_flagged_with_index(self):
        truth = GroundTruth.from_tree(gen_proper_binary_tree(4, seed=5))
        res = run_adaptive_triple(truth, OraclePolicy("uniform"), seed=5)
        text = res.transcript.to_jsonl()
        tampered = Transcript.from_jsonl(text)
        # find the first answered triple and swap in a wrong feature
        for i, ev in enumerate(tampered.events):
            if ev.kind == "triple" and ev.payload["a"] is not None:
                wrong = next(
                    f for f in truth.matrix.feature_names if f != ev.payload["a"]
                    and truth.matrix.bits[ev.payload["q"], list(truth.matrix.feature_names).index(f)].sum() != 2
                )
                ev.payload["a"] = wrong
                bad_index = i
                break
        with pytest.raises(ReplayError) as err:
            replay(tampered, truth)
        assert err.value.index == bad_index

    @given(st.integers(min_value=0, max_value=200))
    @settings(max_examples=25, deadline=None)
    def test_truncation_gives_partial_state(self, cut):
        truth = GroundTruth.from_tree(gen_proper_binary_tree(5, seed=9))
        res = run_adaptive_triple(truth, OraclePolicy("uniform"), seed=9)
        events = res.transcript.events
        cut = cut % (len(events) + 1)
        # never cut between a discovery and its labels (the run orders them
        # adjacently; a valid prefix must not end on a bare discovery)
        while cut > 0 and events[cut - 1].kind == "discovery":
            cut -= 1
        partial = Transcript(events=list(events[:cut]))
        rebuilt = replay(partial, truth)
        assert rebuilt.elicitation_queries <= res.elicitation_queries
        if cut < len(events):
            assert rebuilt.terminated_by == "truncated"

    def test_jsonl_versioned(self):
        truth = GroundTruth.from_tree(gen_proper_binary_tree(2, seed=1))
        res = run_adaptive_triple(truth, OraclePolicy("uniform"), seed=1)
        first = res.transcript.to_jsonl().splitlines()[0]
        assert '"v": 1' in first
