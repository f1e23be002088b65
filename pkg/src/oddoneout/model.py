"""Ground-truth feature structures.

Everything a simulated crowd can be asked about lives here: binary feature
matrices, hierarchical feature trees (proper binary and D-ary leafy), product
distributions of independent features, and the left/right dataset that
separates set queries from triple queries. All generators are deterministic
given a seed and all operations are pure, so they can be used freely from
parallel experiment trials.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np


class InvalidParameter(ValueError):
    """Raised when a generator or query is called with infeasible arguments."""


# ---------------------------------------------------------------------------
# Canonical query ids
# ---------------------------------------------------------------------------

def canonical_triple(i: int, j: int, k: int, n: int | None = None) -> tuple[int, int, int]:
    """Sorted, distinct triple of example indices."""
    t = tuple(sorted((int(i), int(j), int(k))))
    if len(set(t)) != 3:
        raise InvalidParameter(f"triple indices must be distinct, got {t}")
    if any(x < 0 for x in t) or (n is not None and t[2] >= n):
        raise InvalidParameter(f"triple {t} out of range for n={n}")
    return t


def canonical_pair(i: int, j: int, n: int | None = None) -> tuple[int, int]:
    """Sorted, distinct pair of example indices."""
    p = tuple(sorted((int(i), int(j))))
    if p[0] == p[1]:
        raise InvalidParameter(f"pair indices must be distinct, got {p}")
    if p[0] < 0 or (n is not None and p[1] >= n):
        raise InvalidParameter(f"pair {p} out of range for n={n}")
    return p


# ---------------------------------------------------------------------------
# Feature matrix
# ---------------------------------------------------------------------------

@dataclass
class FeatureMatrix:
    """Latent N-by-M binary allocation of features to examples.

    Row i is example i, column j is feature j. ``feature_names`` gives one
    name per column; generated data uses synthetic names whose index is also
    the salience index (lower = noticed first).
    """

    bits: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 2:
            raise InvalidParameter("bits must be a 2-D array")
        if not np.isin(self.bits, (0, 1)).all():
            raise InvalidParameter("matrix entries must be 0 or 1")
        self.feature_names = tuple(self.feature_names)
        if len(self.feature_names) != self.bits.shape[1]:
            raise InvalidParameter(
                f"{len(self.feature_names)} names for {self.bits.shape[1]} columns"
            )

    @property
    def n_examples(self) -> int:
        return self.bits.shape[0]

    @property
    def n_features(self) -> int:
        return self.bits.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.bits[:, j]

    def row(self, i: int) -> np.ndarray:
        return self.bits[i, :]

    def to_json_dict(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "feature_names": list(self.feature_names),
            "rows": ["".join("01"[b] for b in row) for row in self.bits],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict) -> "FeatureMatrix":
        rows = [[int(c) for c in row] for row in d["rows"]]
        bits = np.array(rows, dtype=np.uint8).reshape(len(rows), len(d["feature_names"]))
        m = cls(bits=bits, feature_names=tuple(d["feature_names"]))
        if m.n_examples != d["n_examples"]:
            raise InvalidParameter("row count does not match n_examples")
        return m


def hstack_matrices(a: FeatureMatrix, b: FeatureMatrix) -> FeatureMatrix:
    """Concatenate feature columns of two matrices over the same examples."""
    if a.n_examples != b.n_examples:
        raise InvalidParameter("matrices must share the example set")
    return FeatureMatrix(
        bits=np.hstack([a.bits, b.bits]),
        feature_names=a.feature_names + b.feature_names,
    )


# ---------------------------------------------------------------------------
# Feature trees
# ---------------------------------------------------------------------------

@dataclass
class TreeNode:
    """One node: the root (neither field set), a feature, or an example leaf."""

    feature: str | None = None
    leaf: int | None = None
    children: list["TreeNode"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None

    @property
    def is_internal(self) -> bool:
        return self.leaf is None


@dataclass
class FeatureTree:
    """Rooted tree: internal non-root nodes are features, leaves are examples."""

    root: TreeNode

    def feature_nodes(self) -> list[TreeNode]:
        """Internal non-root nodes in breadth-first order."""
        out: list[TreeNode] = []
        q = deque(self.root.children)
        while q:
            node = q.popleft()
            if node.is_internal:
                out.append(node)
                q.extend(node.children)
        return out

    def features(self) -> list[str]:
        return [n.feature for n in self.feature_nodes()]

    def leaf_nodes(self) -> list[TreeNode]:
        out: list[TreeNode] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend(reversed(node.children))
        return out

    def leaf_ids(self) -> list[int]:
        return [n.leaf for n in self.leaf_nodes()]

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_nodes())

    def depths(self) -> dict[str, int]:
        """Feature name -> distance from the root (direct children are 1)."""
        out: dict[str, int] = {}
        q: deque[tuple[TreeNode, int]] = deque((c, 1) for c in self.root.children)
        while q:
            node, d = q.popleft()
            if node.is_internal:
                out[node.feature] = d
                q.extend((c, d + 1) for c in node.children)
        return out

    def to_json_dict(self) -> dict:
        def enc(node: TreeNode) -> dict:
            return {
                "feature": node.feature,
                "leaf": node.leaf,
                "children": [enc(c) for c in node.children],
            }

        return enc(self.root)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict) -> "FeatureTree":
        def dec(nd: dict) -> TreeNode:
            return TreeNode(
                feature=nd.get("feature"),
                leaf=nd.get("leaf"),
                children=[dec(c) for c in nd.get("children", [])],
            )

        return cls(root=dec(d))


def tree_to_matrix(tree: FeatureTree) -> FeatureMatrix:
    """Feature allocation induced by the tree.

    Entry (i, j) is 1 iff feature j lies on the path from example i's leaf to
    the root. Columns follow breadth-first feature order, so ancestors come
    before descendants and the column index doubles as a salience index.
    """
    names = tree.features()
    if len(names) != len(set(names)):
        raise InvalidParameter("feature ids must be distinct")
    leaf_ids = tree.leaf_ids()
    if sorted(leaf_ids) != list(range(len(leaf_ids))):
        raise InvalidParameter("leaf ids must be exactly 0..N-1")
    col = {name: j for j, name in enumerate(names)}
    bits = np.zeros((len(leaf_ids), len(names)), dtype=np.uint8)

    def walk(node: TreeNode, path: list[str]) -> None:
        if node.is_leaf:
            for name in path:
                bits[node.leaf, col[name]] = 1
            return
        if node.feature is not None:
            path = path + [node.feature]
        for c in node.children:
            walk(c, path)

    walk(tree.root, [])
    return FeatureMatrix(bits=bits, feature_names=tuple(names))


def _relabel(tree: FeatureTree, rng: np.random.Generator) -> FeatureTree:
    """Name features f0.. in breadth-first order; permute example ids."""
    for j, node in enumerate(tree.feature_nodes()):
        node.feature = f"f{j}"
    leaves = tree.leaf_nodes()
    ids = rng.permutation(len(leaves))
    for node, i in zip(leaves, ids):
        node.leaf = int(i)
    return tree


def gen_proper_binary_tree(m: int, seed: int | None = None) -> FeatureTree:
    """Random proper binary feature tree with m features and m+2 leaves.

    Grown by iterative random leaf splitting: start from a root with two
    leaves and repeatedly turn a uniformly chosen leaf into a feature with two
    leaf children. The shape distribution is the one this process induces,
    which is reproducible but not uniform over shapes.
    """
    if m < 1:
        raise InvalidParameter("m must be >= 1")
    rng = np.random.default_rng(seed)
    root = TreeNode(children=[TreeNode(leaf=0), TreeNode(leaf=1)])
    leaves = list(root.children)
    for _ in range(m):
        idx = int(rng.integers(len(leaves)))
        node = leaves[idx]
        node.leaf = None
        node.feature = "pending"
        node.children = [TreeNode(leaf=0), TreeNode(leaf=0)]
        leaves[idx] = node.children[0]
        leaves.append(node.children[1])
    return _relabel(FeatureTree(root=root), rng)


def gen_caterpillar_binary_tree(m: int, seed: int | None = None) -> FeatureTree:
    """Depth-maximal proper binary tree: a chain of m features.

    Each feature has one leaf child and one feature child; the deepest feature
    has two leaves. This is the worst case for non-adaptive discovery since
    deep features are reachable only through near-unique triples.
    """
    if m < 1:
        raise InvalidParameter("m must be >= 1")
    rng = np.random.default_rng(seed)
    bottom = TreeNode(feature="pending", children=[TreeNode(leaf=0), TreeNode(leaf=0)])
    node = bottom
    for _ in range(m - 1):
        node = TreeNode(feature="pending", children=[node, TreeNode(leaf=0)])
    root = TreeNode(children=[node, TreeNode(leaf=0)])
    return _relabel(FeatureTree(root=root), rng)


def _internal_child_count(node: TreeNode) -> int:
    return sum(1 for c in node.children if c.is_internal)


def _leaf_child_count(node: TreeNode) -> int:
    return sum(1 for c in node.children if c.is_leaf)


def min_leaf_budget(m: int, d: int, seed: int | None = None) -> int:
    """Leaves required by gen_d_ary_leafy_tree for this (m, d, seed) skeleton."""
    skeleton = _leafy_skeleton(m, d, np.random.default_rng(seed))
    return _required_leaves(skeleton)


def _leafy_skeleton(m: int, d: int, rng: np.random.Generator) -> FeatureTree:
    root = TreeNode()
    internals = [root]
    for _ in range(m):
        open_nodes = [n for n in internals if _internal_child_count(n) < d]
        parent = open_nodes[int(rng.integers(len(open_nodes)))]
        node = TreeNode(feature="pending")
        parent.children.append(node)
        internals.append(node)
    return FeatureTree(root=root)


def _required_leaves(skeleton: FeatureTree) -> int:
    # Bottom features hold 2 leaves so that a triple can sit below them;
    # every other internal node (root included) holds at least 1 direct leaf
    # so each feature is the forced answer of some pair query.
    need = 1  # root
    for node in skeleton.feature_nodes():
        need += 2 if _internal_child_count(node) == 0 else 1
    return need


def gen_d_ary_leafy_tree(
    m: int, d: int, leaf_budget: int, seed: int | None = None
) -> FeatureTree:
    """Random feature tree with at most d feature children per internal node.

    A random feature skeleton is grown first, then leaves are attached:
    features with no feature children receive two, every other internal node
    (root included) receives one, and any remaining budget is sprinkled
    uniformly. Placing a direct leaf under every node keeps each feature
    recoverable from comparison queries alone.
    """
    if m < 1:
        raise InvalidParameter("m must be >= 1")
    if d < 2:
        raise InvalidParameter("d must be >= 2")
    rng = np.random.default_rng(seed)
    tree = _leafy_skeleton(m, d, rng)
    need = _required_leaves(tree)
    if leaf_budget < need:
        raise InvalidParameter(
            f"leaf_budget={leaf_budget} infeasible for (m={m}, d={d}); need >= {need}"
        )
    internals = [tree.root] + tree.feature_nodes()
    for node in internals:
        k = 2 if (node is not tree.root and _internal_child_count(node) == 0) else 1
        for _ in range(k):
            node.children.append(TreeNode(leaf=0))
    for _ in range(leaf_budget - need):
        node = internals[int(rng.integers(len(internals)))]
        node.children.append(TreeNode(leaf=0))
    return _relabel(tree, rng)


def validate_tree(tree: FeatureTree, kind: str, d: int | None = None) -> list[str]:
    """Check structural invariants; returns a list of violations (empty = ok)."""
    if kind not in ("proper-binary", "d-ary-leafy"):
        raise InvalidParameter(f"unknown tree kind {kind!r}")
    if kind == "d-ary-leafy" and (d is None or d < 2):
        raise InvalidParameter("d-ary-leafy validation requires d >= 2")
    violations: list[str] = []
    if tree.root.feature is not None or tree.root.leaf is not None:
        violations.append("root must carry neither feature nor example")
    names = tree.features()
    if len(names) != len(set(names)):
        violations.append("duplicate feature ids")
    leaf_ids = tree.leaf_ids()
    if len(leaf_ids) != len(set(leaf_ids)):
        violations.append("duplicate example ids")

    def walk(node: TreeNode, label: str) -> None:
        if node.is_leaf:
            if node.children:
                violations.append(f"{label}: leaf with children")
            return
        if node is not tree.root and node.feature is None:
            violations.append(f"{label}: internal non-root node without a feature id")
        if not node.children:
            violations.append(f"{label}: internal node with no children")
        if kind == "proper-binary":
            if len(node.children) != 2:
                violations.append(
                    f"{label}: proper binary node needs exactly 2 children, has {len(node.children)}"
                )
        else:
            ic = _internal_child_count(node)
            if ic > d:
                violations.append(f"{label}: {ic} feature children exceeds D={d}")
            if ic == 1 and _leaf_child_count(node) == 0:
                violations.append(
                    f"{label}: sole child is an internal node (redundant feature)"
                )
        for i, c in enumerate(node.children):
            walk(c, f"{label}.{i}")

    walk(tree.root, "root")
    return violations


# ---------------------------------------------------------------------------
# Independent features
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndependentSpec:
    """Product model: blocks of (count, frequency) describing M independent features."""

    blocks: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "blocks", tuple((int(m), float(p)) for m, p in self.blocks)
        )
        if not self.blocks:
            raise InvalidParameter("at least one block required")
        for m, p in self.blocks:
            if m < 1:
                raise InvalidParameter("block counts must be >= 1")
            if not 0.0 < p < 1.0:
                raise InvalidParameter(f"frequencies must lie in (0,1), got {p}")

    @property
    def n_features(self) -> int:
        return sum(m for m, _ in self.blocks)

    @property
    def frequencies(self) -> np.ndarray:
        """Per-feature frequency, flattened in block order (= salience order)."""
        return np.array([p for m, p in self.blocks for _ in range(m)])

    @classmethod
    def uniform(cls, m: int, p: float = 0.5) -> "IndependentSpec":
        return cls(blocks=((m, p),))


def sample_independent(
    spec: IndependentSpec, n: int, seed: int | None = None
) -> FeatureMatrix:
    """n examples drawn iid from the product distribution."""
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    rng = np.random.default_rng(seed)
    ps = spec.frequencies
    bits = (rng.random((n, len(ps))) < ps).astype(np.uint8)
    names = tuple(f"f{j}" for j in range(len(ps)))
    return FeatureMatrix(bits=bits, feature_names=names)


# ---------------------------------------------------------------------------
# Query primitives on matrices
# ---------------------------------------------------------------------------

def distinguishing_features(matrix: FeatureMatrix, examples) -> list[int]:
    """Columns holding for all but one of the given examples (sum = |S|-1).

    Accepts pairs, triples, or any larger tuple; repeated indices are allowed
    so that a pair can be phrased as two degenerate triples.
    """
    idx = tuple(int(i) for i in examples)
    if len(idx) < 2:
        raise InvalidParameter("need at least two examples")
    sums = matrix.bits[list(idx), :].sum(axis=0, dtype=np.int64)
    return [int(j) for j in np.flatnonzero(sums == len(idx) - 1)]


def _tree_distinguishers(
    tree: FeatureTree, triple, matrix: FeatureMatrix | None
) -> tuple[FeatureMatrix, list[int]]:
    mat = matrix if matrix is not None else tree_to_matrix(tree)
    return mat, distinguishing_features(mat, triple)


def shallowest_distinguishing(
    tree: FeatureTree, triple, matrix: FeatureMatrix | None = None
) -> str | None:
    """Distinguishing feature of minimum root distance (the generalist answer).

    On a tree the distinguishing features of a triple form a root-path chain,
    so the minimum is unique.
    """
    mat, cands = _tree_distinguishers(tree, triple, matrix)
    if not cands:
        return None
    depths = tree.depths()
    return min((mat.feature_names[j] for j in cands), key=lambda f: depths[f])


def deepest_distinguishing(
    tree: FeatureTree, triple, matrix: FeatureMatrix | None = None
) -> str | None:
    """Distinguishing feature of maximum root distance (the specifist answer)."""
    mat, cands = _tree_distinguishers(tree, triple, matrix)
    if not cands:
        return None
    depths = tree.depths()
    return max((mat.feature_names[j] for j in cands), key=lambda f: depths[f])


# ---------------------------------------------------------------------------
# Identifiability in the independent model
# ---------------------------------------------------------------------------

def triple_elicit_rate(p: float) -> float:
    """Chance a Bernoulli(p) feature holds for exactly two of three fresh examples."""
    return 3.0 * p * p * (1.0 - p)


def pair_elicit_rate(p: float) -> float:
    """Chance a Bernoulli(p) feature holds for exactly one of two fresh examples."""
    return 2.0 * p * (1.0 - p)


def identifiability_tau(spec: IndependentSpec) -> tuple[np.ndarray, float]:
    """Per-feature chance of being the unique distinguisher of a fresh triple.

    tau_f = q_f * prod_{g != f} (1 - q_g) with q = 3 p^2 (1-p): feature f must
    hold for exactly two of the three examples while every other feature
    fails to. Returns (per-feature array in block order, minimum).
    """
    qs = np.array([triple_elicit_rate(p) for p in spec.frequencies])
    total = np.prod(1.0 - qs)
    taus = qs * total / (1.0 - qs)
    return taus, float(taus.min())


# ---------------------------------------------------------------------------
# Left/right counterexample dataset
# ---------------------------------------------------------------------------

@dataclass
class LrCounterexample:
    """Dataset where set queries recover a feature no triple query can.

    Examples are L (indices 0..l-1) and R (l..l+r-1). Features, in salience
    order: g_i = 1 exactly on L minus its own left example; h_j = 1 everywhere
    except R minus its own right example; and last (least salient) f = 1
    exactly on L.
    """

    matrix: FeatureMatrix
    left: tuple[int, ...]
    right: tuple[int, ...]
    f_index: int
    notes: tuple[str, ...]


def build_lr_counterexample(l: int, r: int) -> LrCounterexample:
    if l < 1 or r < 1:
        raise InvalidParameter("l and r must be >= 1")
    n = l + r
    left = tuple(range(l))
    right = tuple(range(l, n))
    cols: list[np.ndarray] = []
    names: list[str] = []
    for i in range(l):
        col = np.zeros(n, dtype=np.uint8)
        col[list(left)] = 1
        col[i] = 0
        cols.append(col)
        names.append(f"g{i + 1}")
    for j in range(r):
        col = np.ones(n, dtype=np.uint8)
        col[list(right)] = 0
        col[l + j] = 1
        cols.append(col)
        names.append(f"h{j + 1}")
    f_col = np.zeros(n, dtype=np.uint8)
    f_col[list(left)] = 1
    cols.append(f_col)
    names.append("f")
    matrix = FeatureMatrix(bits=np.column_stack(cols), feature_names=tuple(names))
    notes = []
    if l == 1:
        notes.append("degenerate: g1 is constant 0 (no example ever has it)")
    if r == 1:
        notes.append("degenerate: h1 is constant 1 (every example has it)")
    return LrCounterexample(
        matrix=matrix,
        left=left,
        right=right,
        f_index=n,
        notes=tuple(notes),
    )
