"""Ground-truth structure tests."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oddoneout import model
from oddoneout.model import (
    FeatureMatrix,
    FeatureTree,
    IndependentSpec,
    InvalidParameter,
    TreeNode,
    build_lr_counterexample,
    canonical_pair,
    canonical_triple,
    distinguishing_features,
    gen_caterpillar_binary_tree,
    gen_d_ary_leafy_tree,
    gen_proper_binary_tree,
    identifiability_tau,
    sample_independent,
    tree_to_matrix,
    validate_tree,
)


def fig_taxonomy_tree() -> FeatureTree:
    """Six everyday objects under man-made/natural with plant/animal below.

    Leaves: 0 pen, 1 car, 2 flower, 3 tree, 4 fish, 5 bird.
    """
    return FeatureTree(
        root=TreeNode(
            children=[
                TreeNode(feature="man-made", children=[TreeNode(leaf=0), TreeNode(leaf=1)]),
                TreeNode(
                    feature="natural",
                    children=[
                        TreeNode(feature="plant", children=[TreeNode(leaf=2), TreeNode(leaf=3)]),
                        TreeNode(feature="animal", children=[TreeNode(leaf=4), TreeNode(leaf=5)]),
                    ],
                ),
            ]
        )
    )


class TestCanonicalIds:
    def test_triple_sorted_and_distinct(self):
        assert canonical_triple(5, 1, 3) == (1, 3, 5)
        with pytest.raises(InvalidParameter):
            canonical_triple(1, 1, 2)
        with pytest.raises(InvalidParameter):
            canonical_triple(0, 1, 7, n=5)

    def test_pair(self):
        assert canonical_pair(4, 2) == (2, 4)
        with pytest.raises(InvalidParameter):
            canonical_pair(3, 3)


class TestProperBinaryTree:
    def test_smallest_tree_shape(self):
        tree = gen_proper_binary_tree(1, seed=0)
        assert tree.n_leaves == 3
        root_kids = tree.root.children
        internal = [n for n in root_kids if n.is_internal]
        leaves = [n for n in root_kids if n.is_leaf]
        assert len(internal) == 1 and len(leaves) == 1
        assert all(c.is_leaf for c in internal[0].children)
        assert validate_tree(tree, "proper-binary") == []

    def test_m2_has_four_leaves_any_seed(self):
        for seed in range(25):
            assert gen_proper_binary_tree(2, seed=seed).n_leaves == 4

    @given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=50))
    @settings(max_examples=60, deadline=None)
    def test_leaf_count_is_m_plus_2(self, m, seed):
        tree = gen_proper_binary_tree(m, seed=seed)
        mat = tree_to_matrix(tree)
        assert mat.n_examples == m + 2
        assert mat.n_features == m
        assert validate_tree(tree, "proper-binary") == []

    def test_two_seeds_differ(self):
        a = tree_to_matrix(gen_proper_binary_tree(10, seed=1))
        b = tree_to_matrix(gen_proper_binary_tree(10, seed=2))
        assert a.to_json() != b.to_json()

    def test_invalid_m(self):
        with pytest.raises(InvalidParameter):
            gen_proper_binary_tree(0)

    def test_caterpillar_depth_maximal(self):
        tree = gen_caterpillar_binary_tree(6, seed=0)
        assert validate_tree(tree, "proper-binary") == []
        assert max(tree.depths().values()) == 6

    def test_no_duplicate_columns(self):
        for seed in range(10):
            mat = tree_to_matrix(gen_proper_binary_tree(7, seed=seed))
            cols = {tuple(mat.column(j)) for j in range(mat.n_features)}
            assert len(cols) == mat.n_features


class TestLeafyTree:
    def test_minimal_budget_m1(self):
        tree = gen_d_ary_leafy_tree(1, 2, 3, seed=0)
        assert validate_tree(tree, "d-ary-leafy", d=2) == []
        feature = [n for n in tree.root.children if n.is_internal]
        root_leaves = [n for n in tree.root.children if n.is_leaf]
        assert len(feature) == 1
        assert len(root_leaves) >= 1
        assert sum(1 for c in feature[0].children if c.is_leaf) >= 2

    def test_infeasible_budget_rejected(self):
        with pytest.raises(InvalidParameter):
            gen_d_ary_leafy_tree(1, 2, 2, seed=0)

    def test_branching_respected_over_seeds(self):
        for seed in range(100):
            tree = gen_d_ary_leafy_tree(7, 3, 24, seed=seed)
            assert validate_tree(tree, "d-ary-leafy", d=3) == []

            def walk(node):
                internal = [c for c in node.children if c.is_internal]
                assert len(internal) <= 3
                for c in internal:
                    walk(c)

            walk(tree.root)

    def test_validator_flags_bare_internal_chain(self):
        bad = FeatureTree(
            root=TreeNode(
                children=[
                    TreeNode(
                        feature="a",
                        children=[TreeNode(feature="b", children=[TreeNode(leaf=0)])],
                    ),
                    TreeNode(leaf=1),
                ]
            )
        )
        violations = validate_tree(bad, "d-ary-leafy", d=2)
        assert any("sole child" in v for v in violations)

    def test_validator_flags_overbranching(self):
        kids = [TreeNode(feature=f"c{i}", children=[TreeNode(leaf=i)]) for i in range(3)]
        bad = FeatureTree(root=TreeNode(children=kids + [TreeNode(leaf=3)]))
        violations = validate_tree(bad, "d-ary-leafy", d=2)
        assert any("exceeds D=2" in v for v in violations)


class TestTreeToMatrix:
    def test_taxonomy_rows(self):
        mat = tree_to_matrix(fig_taxonomy_tree())
        names = mat.feature_names
        flower = {names[j]: int(v) for j, v in enumerate(mat.row(2))}
        assert flower["natural"] == 1
        assert flower["plant"] == 1
        assert flower["man-made"] == 0
        assert flower["animal"] == 0

    def test_single_feature_tree(self):
        tree = FeatureTree(
            root=TreeNode(
                children=[
                    TreeNode(feature="x", children=[TreeNode(leaf=0), TreeNode(leaf=1)]),
                    TreeNode(leaf=2),
                ]
            )
        )
        mat = tree_to_matrix(tree)
        assert mat.n_features == 1
        assert list(mat.column(0)) == [1, 1, 0]

    def test_ancestor_dominates_descendant(self):
        for seed in range(10):
            tree = gen_proper_binary_tree(6, seed=seed)
            mat = tree_to_matrix(tree)
            depths = tree.depths()
            for a, b in itertools.permutations(range(mat.n_features), 2):
                col_a, col_b = mat.column(a), mat.column(b)
                if np.all(col_b <= col_a) and depths[mat.feature_names[a]] < depths[
                    mat.feature_names[b]
                ]:
                    # ancestor: every descendant bit implies the ancestor bit
                    assert np.all(col_b <= col_a)

    def test_rejects_bad_leaf_ids(self):
        tree = FeatureTree(
            root=TreeNode(
                children=[
                    TreeNode(feature="x", children=[TreeNode(leaf=0), TreeNode(leaf=5)]),
                    TreeNode(leaf=1),
                ]
            )
        )
        with pytest.raises(InvalidParameter):
            tree_to_matrix(tree)

    def test_json_round_trip(self):
        tree = gen_proper_binary_tree(4, seed=3)
        again = FeatureTree.from_json_dict(tree.to_json_dict())
        assert tree_to_matrix(again).to_json() == tree_to_matrix(tree).to_json()


class TestIndependentSampling:
    def test_invariants(self):
        with pytest.raises(InvalidParameter):
            IndependentSpec(blocks=((1, 1.0),))
        with pytest.raises(InvalidParameter):
            IndependentSpec(blocks=((0, 0.5),))

    def test_shape(self):
        spec = IndependentSpec(blocks=((2, 0.5), (1, 0.9)))
        mat = sample_independent(spec, 1, seed=0)
        assert mat.bits.shape == (1, 3)

    def test_column_mean_close_to_p(self):
        mat = sample_independent(IndependentSpec.uniform(1, 0.5), 10_000, seed=7)
        assert abs(float(mat.column(0).mean()) - 0.5) < 0.02

    def test_columns_uncorrelated(self):
        mat = sample_independent(IndependentSpec.uniform(5, 0.5), 10_000, seed=11)
        corr = np.corrcoef(mat.bits.T.astype(float))
        off = corr[~np.eye(5, dtype=bool)]
        assert np.abs(off).max() < 0.05

    def test_matrix_json_round_trip(self):
        mat = sample_independent(IndependentSpec.uniform(4, 0.3), 6, seed=1)
        again = FeatureMatrix.from_json_dict(mat.to_json_dict())
        assert np.array_equal(again.bits, mat.bits)
        assert again.feature_names == mat.feature_names


class TestDistinguishing:
    def test_taxonomy_triple(self):
        mat = tree_to_matrix(fig_taxonomy_tree())
        found = {mat.feature_names[j] for j in distinguishing_features(mat, (0, 2, 3))}
        assert found == {"natural", "plant"}

    def test_identical_rows_none(self):
        mat = FeatureMatrix(bits=np.ones((3, 2), dtype=np.uint8), feature_names=("a", "b"))
        assert distinguishing_features(mat, (0, 1, 2)) == []

    def test_matches_per_feature_recount(self):
        rng = np.random.default_rng(5)
        mat = FeatureMatrix(
            bits=rng.integers(0, 2, size=(8, 5), dtype=np.uint8).astype(np.uint8),
            feature_names=tuple(f"f{j}" for j in range(5)),
        )
        for tri in itertools.combinations(range(8), 3):
            expect = [
                j
                for j in range(5)
                if sum(int(mat.bits[i, j]) for i in tri) == 2
            ]
            assert distinguishing_features(mat, tri) == expect


class TestShallowestDeepest:
    def test_taxonomy_answers(self):
        tree = fig_taxonomy_tree()
        assert model.shallowest_distinguishing(tree, (0, 2, 3)) == "natural"
        assert model.deepest_distinguishing(tree, (0, 2, 3)) == "plant"

    def test_unique_triple_for_deep_feature(self):
        # Both leaves of a deepest feature plus its sibling's leaf force it.
        tree = fig_taxonomy_tree()
        assert model.shallowest_distinguishing(tree, (2, 3, 4)) == "plant"
        assert model.deepest_distinguishing(tree, (2, 3, 4)) == "plant"

    def test_no_distinguisher_on_sibling_leaves(self):
        # three leaves under one feature share every feature value: NONE
        tree = FeatureTree(
            root=TreeNode(
                children=[
                    TreeNode(feature="x", children=[TreeNode(leaf=i) for i in range(3)]),
                    TreeNode(leaf=3),
                ]
            )
        )
        assert model.shallowest_distinguishing(tree, (0, 1, 2)) is None
        assert model.deepest_distinguishing(tree, (0, 1, 2)) is None


class TestIdentifiability:
    def test_single_feature(self):
        taus, tau_min = identifiability_tau(IndependentSpec.uniform(1, 0.5))
        assert taus.shape == (1,)
        assert taus[0] == pytest.approx(3 / 8)
        assert tau_min == pytest.approx(3 / 8)

    def test_two_features_matches_exact_enumeration(self):
        spec = IndependentSpec.uniform(2, 0.5)
        taus, _ = identifiability_tau(spec)
        # independent oracle: enumerate all 4^3 type assignments exactly
        ps = spec.frequencies
        total = 0.0
        for rows in itertools.product(range(4), repeat=3):
            bits = np.array([[(t >> j) & 1 for j in range(2)] for t in rows])
            prob = 1.0
            for t in rows:
                for j in range(2):
                    prob *= ps[j] if (t >> j) & 1 else 1 - ps[j]
            sums = bits.sum(axis=0)
            if sums[0] == 2 and sums[1] != 2:
                total += prob
        assert taus[0] == pytest.approx(total)

    def test_min_over_blocks(self):
        spec = IndependentSpec(blocks=((1, 0.5), (1, 0.9)))
        taus, tau_min = identifiability_tau(spec)
        assert tau_min == pytest.approx(min(taus))
        assert taus[0] == pytest.approx(0.375 * (1 - 0.243))
        assert taus[1] == pytest.approx(0.243 * (1 - 0.375))


class TestLrCounterexample:
    def test_shape_2_2(self):
        lr = build_lr_counterexample(2, 2)
        assert lr.matrix.n_examples == 4
        assert lr.matrix.n_features == 5
        assert list(lr.matrix.column(lr.f_index)) == [1, 1, 0, 0]
        assert lr.matrix.feature_names[lr.f_index] == "f"
        assert not lr.notes

    def test_degenerate_1_1_flagged(self):
        lr = build_lr_counterexample(1, 1)
        g1 = lr.matrix.column(0)
        h1 = lr.matrix.column(1)
        assert not g1.any()
        assert h1.all()
        assert len(lr.notes) == 2

    def test_unique_answers(self):
        lr = build_lr_counterexample(3, 2)
        bits = lr.matrix.bits
        for i in lr.left:
            absent = [j for j in range(lr.matrix.n_features) if bits[i, j] == 0]
            assert absent == [i]  # only g_i is absent from x_i
        for k, j in enumerate(lr.right):
            present = [c for c in range(lr.matrix.n_features) if bits[j, c] == 1]
            assert present == [3 + k]  # only h_j holds on x'_j

    def test_invalid_params(self):
        with pytest.raises(InvalidParameter):
            build_lr_counterexample(0, 2)
