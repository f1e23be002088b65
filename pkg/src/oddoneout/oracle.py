"""Crowd oracles: answer comparison queries from ground truth under a policy.

Policies model how a crowd picks among the valid answers to a query:
generalists return the shallowest distinguishing feature of a tree, specifists
the deepest, a homogeneous crowd always returns the most salient (lowest
index) answer, and a heterogeneous crowd answers uniformly at random. Noise
applies only to labeling; elicitation answers are always sound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    FeatureMatrix,
    FeatureTree,
    InvalidParameter,
    distinguishing_features,
    tree_to_matrix,
)

POLICY_KINDS = ("generalist", "specifist", "uniform", "homogeneous")


class PolicyError(ValueError):
    """Raised when a policy is incompatible with the attached ground truth."""


@dataclass
class GroundTruth:
    """A feature matrix plus, when available, the tree it came from."""

    matrix: FeatureMatrix
    tree: FeatureTree | None = None

    def __post_init__(self) -> None:
        self._depths: np.ndarray | None = None
        if self.tree is not None:
            by_name = self.tree.depths()
            try:
                self._depths = np.array(
                    [by_name[f] for f in self.matrix.feature_names]
                )
            except KeyError as e:
                raise InvalidParameter(f"matrix column {e} missing from tree") from e

    @classmethod
    def from_tree(cls, tree: FeatureTree) -> "GroundTruth":
        return cls(matrix=tree_to_matrix(tree), tree=tree)

    @property
    def depths(self) -> np.ndarray:
        if self._depths is None:
            raise PolicyError("depth-based policy requires tree-backed truth")
        return self._depths


@dataclass
class OraclePolicy:
    """How one sound answer is chosen when several features fit a query.

    ``salience`` is a permutation of column indices, most salient first;
    identity when omitted. ``noise`` is a hook that, with the given
    probability, replaces the policy's pick by a uniform one among the sound
    answers; it defaults off and never produces unsound answers.
    """

    kind: str = "uniform"
    salience: tuple[int, ...] | None = None
    noise: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise PolicyError(f"unknown policy kind {self.kind!r}")
        if self.salience is not None:
            self.salience = tuple(int(j) for j in self.salience)
        if not 0.0 <= self.noise < 1.0:
            raise PolicyError("noise must lie in [0,1)")

    def rank(self, j: int) -> int:
        if self.salience is None:
            return j
        return self.salience.index(j)

    def requires_tree(self) -> bool:
        return self.kind in ("generalist", "specifist")


def _choose(
    policy: OraclePolicy,
    truth: GroundTruth,
    candidates: list[int],
    rng: np.random.Generator | None,
) -> int:
    if len(candidates) == 1:
        return candidates[0]
    if policy.kind == "uniform" or (
        policy.noise > 0.0 and rng is not None and rng.random() < policy.noise
    ):
        if rng is None:
            raise PolicyError("uniform policy needs an rng")
        return int(rng.choice(candidates))
    if policy.kind == "homogeneous":
        return min(candidates, key=policy.rank)
    depths = truth.depths
    if policy.kind == "generalist":
        # Salience breaks ties; triples on trees never tie, pairs can.
        return min(candidates, key=lambda j: (depths[j], policy.rank(j)))
    return min(candidates, key=lambda j: (-depths[j], policy.rank(j)))


class ScriptedOracle:
    """Replays recorded answers instead of consulting a live policy.

    Each call must match the recorded query; answers are returned verbatim so
    a transcript can drive a fresh run of the same algorithm and seed.
    """

    def __init__(self, steps):
        # steps: iterable of (query tuple, feature index or None)
        self._steps = list(steps)
        self._cursor = 0

    @classmethod
    def from_transcript(cls, transcript, matrix: FeatureMatrix) -> "ScriptedOracle":
        col = {name: j for j, name in enumerate(matrix.feature_names)}
        steps = []
        for ev in transcript.events:
            if ev.kind in ("triple", "pair", "tag"):
                ans = ev.payload.get("a")
                steps.append((tuple(ev.payload["q"]), None if ans is None else col[ans]))
        return cls(steps)

    def requires_tree(self) -> bool:
        return False

    def next_answer(self, query) -> int | None:
        if self._cursor >= len(self._steps):
            raise PolicyError("scripted oracle exhausted")
        recorded_query, answer = self._steps[self._cursor]
        if tuple(sorted(recorded_query)) != tuple(sorted(query)):
            raise PolicyError(
                f"scripted oracle expected query {recorded_query}, got {tuple(query)}"
            )
        self._cursor += 1
        return answer


def _answer(policy, truth, candidates, rng, query=None) -> int | None:
    if isinstance(policy, ScriptedOracle):
        return policy.next_answer(query)
    if policy.requires_tree() and truth.tree is None:
        raise PolicyError(f"{policy.kind} policy requires tree-backed truth")
    if not candidates:
        return None
    return _choose(policy, truth, candidates, rng)


def answer_triple(
    policy: OraclePolicy,
    truth: GroundTruth,
    triple,
    rng: np.random.Generator | None = None,
) -> int | None:
    """A feature held by exactly two of the three examples, or None."""
    return _answer(
        policy, truth, distinguishing_features(truth.matrix, triple), rng, triple
    )


def answer_pair(
    policy: OraclePolicy,
    truth: GroundTruth,
    pair,
    rng: np.random.Generator | None = None,
) -> int | None:
    """A feature held by exactly one of the two examples; None iff identical."""
    return _answer(
        policy, truth, distinguishing_features(truth.matrix, pair), rng, pair
    )


def answer_lr(
    policy: OraclePolicy,
    truth: GroundTruth,
    left,
    right,
    rng: np.random.Generator | None = None,
) -> int | None:
    """A feature present on every left example and absent from every right one."""
    left = [int(i) for i in left]
    right = [int(i) for i in right]
    if set(left) & set(right):
        raise InvalidParameter("left and right sets must be disjoint")
    bits = truth.matrix.bits
    ok = np.ones(truth.matrix.n_features, dtype=bool)
    if left:
        ok &= bits[left, :].min(axis=0) == 1
    if right:
        ok &= bits[right, :].max(axis=0) == 0
    return _answer(policy, truth, [int(j) for j in np.flatnonzero(ok)], rng)


def answer_tag(
    policy: OraclePolicy,
    truth: GroundTruth,
    example: int,
    rng: np.random.Generator | None = None,
) -> int | None:
    """A feature present on the example (the plain tagging baseline)."""
    present = [int(j) for j in np.flatnonzero(truth.matrix.row(example))]
    return _answer(policy, truth, present, rng, (example,))


# ---------------------------------------------------------------------------
# Labeling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LabelingConfig:
    """Noisy voting for label queries: K voters, each flipping the true bit
    independently with probability flip_noise; the majority is reported."""

    flip_noise: float = 0.0
    votes: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.flip_noise < 1.0:
            raise InvalidParameter("flip_noise must lie in [0,1)")
        if self.votes < 1 or self.votes % 2 == 0:
            raise InvalidParameter("vote count must be odd and >= 1")


def label(
    truth: GroundTruth,
    feature: int,
    example: int,
    config: LabelingConfig = LabelingConfig(),
    rng: np.random.Generator | None = None,
) -> int:
    """Majority-of-K label of one feature on one example."""
    bit = int(truth.matrix.bits[example, feature])
    if config.flip_noise == 0.0:
        return bit
    if rng is None:
        raise InvalidParameter("noisy labeling needs an rng")
    flips = rng.random(config.votes) < config.flip_noise
    wrong = int(flips.sum())
    return bit if wrong * 2 < config.votes else 1 - bit


def label_column(
    truth: GroundTruth,
    feature: int,
    config: LabelingConfig = LabelingConfig(),
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Labels of one feature on all examples (a batched labeling task)."""
    col = truth.matrix.column(feature).astype(np.uint8)
    if config.flip_noise == 0.0:
        return col.copy()
    if rng is None:
        raise InvalidParameter("noisy labeling needs an rng")
    flips = rng.random((config.votes, col.size)) < config.flip_noise
    wrong = flips.sum(axis=0)
    out = col.copy()
    flip_mask = wrong * 2 > config.votes
    out[flip_mask] = 1 - out[flip_mask]
    return out


def policy_from_config(d: dict) -> tuple[OraclePolicy, LabelingConfig]:
    """Parse the {"policy": ..., "salience": ..., "flip_noise": ..., "votes": ...}
    form used in experiment config files and session configs."""
    policy = OraclePolicy(
        kind=d.get("policy", "uniform"),
        salience=tuple(d["salience"]) if d.get("salience") else None,
        noise=float(d.get("noise", 0.0)),
    )
    labeling = LabelingConfig(
        flip_noise=float(d.get("flip_noise", 0.0)),
        votes=int(d.get("votes", 1)),
    )
    return policy, labeling
