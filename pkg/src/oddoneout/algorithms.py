"""Discovery procedures.

Five ways to spend elicitation queries against an oracle:

  * adaptive triple — sample an unresolved triple, query, batch-label each
    discovered feature, repeat until every triple is resolved;
  * adaptive pair — the same over unresolved pairs;
  * random triple — a non-adaptive budget of uniformly random triples;
  * tagging — one random example at a time;
  * adaptive hybrid — resolve all pairs first, then walk a queue of known
    features top-down, eliciting sub-features from representative triples
    until a feature survives theta consecutive NONE answers.

Each run emits an append-only transcript (JSON lines, one event per line)
that `replay` can reconstruct and validate. Fresh-example variants draw every
query from an independent-feature product distribution instead of a fixed
dataset, which models an unbounded example supply.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .model import (
    FeatureMatrix,
    IndependentSpec,
    InvalidParameter,
    canonical_pair,
    canonical_triple,
    distinguishing_features,
)
from .oracle import (
    GroundTruth,
    LabelingConfig,
    OraclePolicy,
    answer_pair,
    answer_tag,
    answer_triple,
    label_column,
)
from .resolution import SignaturePartition

TRANSCRIPT_VERSION = 1


# ---------------------------------------------------------------------------
# Transcript
# ---------------------------------------------------------------------------

@dataclass
class Event:
    kind: str  # triple | pair | tag | label | discovery | end
    payload: dict

    def to_json(self) -> str:
        d = {"v": TRANSCRIPT_VERSION, "e": self.kind}
        d.update(self.payload)
        return json.dumps(d, sort_keys=True)


@dataclass
class Transcript:
    events: list[Event] = field(default_factory=list)

    def add(self, kind: str, **payload) -> int:
        self.events.append(Event(kind=kind, payload=payload))
        return len(self.events) - 1

    def to_jsonl(self) -> str:
        return "\n".join(ev.to_json() for ev in self.events) + ("\n" if self.events else "")

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        events = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            if d.pop("v", TRANSCRIPT_VERSION) != TRANSCRIPT_VERSION:
                raise InvalidParameter("unsupported transcript version")
            kind = d.pop("e")
            events.append(Event(kind=kind, payload=d))
        return cls(events=events)


@dataclass
class RunResult:
    """What a run produced: query counts plus the recovered features."""

    elicitation_queries: int
    none_answers: int
    feature_names: list[str]
    columns: np.ndarray | None  # N x k in discovery order; None in fresh mode
    terminated_by: str  # budget | exhaustion | theta
    transcript: Transcript
    true_ids: list[int] = field(default_factory=list)  # ground-truth column ids

    def to_json_dict(self) -> dict:
        return {
            "elicitation_queries": self.elicitation_queries,
            "none_answers": self.none_answers,
            "features": list(self.feature_names),
            "terminated_by": self.terminated_by,
        }


class _Recorder:
    """Shared bookkeeping: events, discovered set, labeling."""

    def __init__(self, truth: GroundTruth, labeling: LabelingConfig, rng):
        self.truth = truth
        self.labeling = labeling
        self.rng = rng
        self.transcript = Transcript()
        self.names: list[str] = []
        self.true_ids: list[int] = []
        self.columns: list[np.ndarray] = []
        self.queries = 0
        self.nones = 0

    def elicit(self, kind: str, payload: dict, answer: int | None) -> int:
        self.queries += 1
        name = None if answer is None else self.truth.matrix.feature_names[answer]
        if answer is None:
            self.nones += 1
        ev = self.transcript.add(kind, **payload, a=name)
        return ev

    def discover(self, answer: int, event_index: int) -> np.ndarray:
        if answer in self.true_ids:
            raise RuntimeError(
                "oracle returned an already-discovered feature on an unresolved query"
            )
        name = self.truth.matrix.feature_names[answer]
        self.transcript.add("discovery", f=name, at=event_index)
        col = label_column(self.truth, answer, self.labeling, self.rng)
        self.transcript.add("label", f=name, bits="".join("01"[b] for b in col))
        self.names.append(name)
        self.true_ids.append(answer)
        self.columns.append(col)
        return col

    def result(self, reason: str) -> RunResult:
        self.transcript.add("end", reason=reason)
        cols = (
            np.column_stack(self.columns)
            if self.columns
            else np.zeros((self.truth.matrix.n_examples, 0), dtype=np.uint8)
        )
        return RunResult(
            elicitation_queries=self.queries,
            none_answers=self.nones,
            feature_names=list(self.names),
            columns=cols,
            terminated_by=reason,
            transcript=self.transcript,
            true_ids=list(self.true_ids),
        )


# ---------------------------------------------------------------------------
# Adaptive triple / pair
# ---------------------------------------------------------------------------

def run_adaptive_triple(
    truth: GroundTruth,
    policy: OraclePolicy,
    seed: int | None = None,
    budget: int | None = None,
    labeling: LabelingConfig = LabelingConfig(),
) -> RunResult:
    """Query only unresolved triples; label each discovery on all examples."""
    n = truth.matrix.n_examples
    if n < 3:
        raise InvalidParameter("adaptive triple needs at least 3 examples")
    rng = np.random.default_rng(seed)
    rec = _Recorder(truth, labeling, rng)
    part = SignaturePartition(n)
    while True:
        if budget is not None and rec.queries >= budget:
            return rec.result("budget")
        triple = part.sample_unresolved_triple(rng)
        if triple is None:
            return rec.result("exhaustion")
        ans = answer_triple(policy, truth, triple, rng)
        ev = rec.elicit("triple", {"q": list(triple)}, ans)
        if ans is None:
            part.add_none_triple(triple)
        else:
            col = rec.discover(ans, ev)
            part.apply_discovery(rec.names[-1], col)


def run_adaptive_pair(
    truth: GroundTruth,
    policy: OraclePolicy,
    seed: int | None = None,
    budget: int | None = None,
    labeling: LabelingConfig = LabelingConfig(),
) -> RunResult:
    """Query only unresolved pairs until every class is fully separated or NONE'd."""
    n = truth.matrix.n_examples
    if n < 2:
        raise InvalidParameter("adaptive pair needs at least 2 examples")
    rng = np.random.default_rng(seed)
    rec = _Recorder(truth, labeling, rng)
    part = SignaturePartition(n)
    identical = _UnionFind(n)
    while True:
        if budget is not None and rec.queries >= budget:
            return rec.result("budget")
        pair = part.sample_unresolved_pair(rng)
        if pair is None:
            return rec.result("exhaustion")
        ans = answer_pair(policy, truth, pair, rng)
        ev = rec.elicit("pair", {"q": list(pair)}, ans)
        if ans is None:
            _record_identical(part, identical, pair)
        else:
            col = rec.discover(ans, ev)
            part.apply_discovery(rec.names[-1], col)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        self.parent[self.find(i)] = self.find(j)

    def component(self, i: int) -> list[int]:
        root = self.find(i)
        return [k for k in range(len(self.parent)) if self.find(k) == root]


def _record_identical(part: SignaturePartition, uf: _UnionFind, pair) -> None:
    # A NONE on a pair means the rows are identical, so identity is transitive:
    # close the whole component rather than re-querying each member pair.
    uf.union(*pair)
    members = uf.component(pair[0])
    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            part.add_none_pair(canonical_pair(members[a], members[b]))


# ---------------------------------------------------------------------------
# Non-adaptive baselines
# ---------------------------------------------------------------------------

def run_random_triple(
    truth: GroundTruth,
    policy: OraclePolicy,
    budget: int,
    seed: int | None = None,
    labeling: LabelingConfig = LabelingConfig(),
    stop_when_all_found: bool = False,
) -> RunResult:
    """Budget of uniformly random triples (with replacement), resolution ignored."""
    n = truth.matrix.n_examples
    if n < 3:
        raise InvalidParameter("random triple needs at least 3 examples")
    if budget < 0:
        raise InvalidParameter("budget must be >= 0")
    rng = np.random.default_rng(seed)
    rec = _Recorder(truth, labeling, rng)
    m = truth.matrix.n_features
    for _ in range(budget):
        if stop_when_all_found and len(rec.true_ids) == m:
            break
        triple = canonical_triple(*rng.choice(n, size=3, replace=False))
        ans = answer_triple(policy, truth, triple, rng)
        ev = rec.elicit("triple", {"q": list(triple)}, ans)
        if ans is not None and ans not in rec.true_ids:
            rec.discover(ans, ev)
    return rec.result("budget")


def run_tagging(
    truth: GroundTruth,
    policy: OraclePolicy,
    budget: int,
    seed: int | None = None,
    labeling: LabelingConfig = LabelingConfig(),
) -> RunResult:
    """Budget of single-example tag queries on uniformly random examples."""
    if budget < 0:
        raise InvalidParameter("budget must be >= 0")
    rng = np.random.default_rng(seed)
    rec = _Recorder(truth, labeling, rng)
    n = truth.matrix.n_examples
    for _ in range(budget):
        example = int(rng.integers(n))
        ans = answer_tag(policy, truth, example, rng)
        ev = rec.elicit("tag", {"q": [example]}, ans)
        if ans is not None and ans not in rec.true_ids:
            rec.discover(ans, ev)
    return rec.result("budget")


# ---------------------------------------------------------------------------
# Adaptive hybrid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HybridConfig:
    """Exploration settings for the hybrid pair+triple procedure.

    ``theta`` is the consecutive-NONE budget per explored feature. When not
    given it is re-evaluated on each pop as 3 D^2 ln(M_hat / delta) with
    M_hat = currently discovered count + D, since the true feature count is
    unknown while running.
    """

    d: int = 2
    delta: float = 0.1
    theta: int | None = None

    def __post_init__(self) -> None:
        if self.d < 2:
            raise InvalidParameter("d must be >= 2")
        if not 0.0 < self.delta < 1.0:
            raise InvalidParameter("delta must lie in (0,1)")
        if self.theta is not None and self.theta < 1:
            raise InvalidParameter("theta must be >= 1")

    def theta_for(self, discovered: int) -> int:
        if self.theta is not None:
            return self.theta
        m_hat = max(2, discovered + self.d)
        return max(1, math.ceil(3 * self.d**2 * math.log(m_hat / self.delta)))


def default_theta(d: int, m: int, delta: float) -> int:
    """Exploration budget 3 D^2 ln(M / delta), rounded up."""
    return max(1, math.ceil(3 * d**2 * math.log(m / delta)))


class _Frontier:
    """Units directly below a popped feature: discovered features with nothing
    discovered strictly between, plus classes of examples claimed by no
    discovered feature below it. Each unit is shown through representative
    examples (up to three for a class, one for a feature)."""

    def __init__(self, rec: _Recorder, col_of: dict[str, np.ndarray], name: str | None):
        self.rec = rec
        self.col_of = col_of
        self.name = name
        self.reps: list[int] = []
        self.refresh()

    def _column(self, name: str | None) -> np.ndarray:
        n = self.rec.truth.matrix.n_examples
        if name is None:
            return np.ones(n, dtype=np.uint8)
        return self.col_of[name]

    def refresh(self) -> None:
        rng = self.rec.rng
        base = self._column(self.name)
        below = {}
        for name in self.rec.names:
            col = self.col_of[name]
            if _strictly_below(col, base):
                below[name] = col
        frontier = [
            name
            for name, col in below.items()
            if not any(
                _strictly_below(col, other) for o_name, other in below.items() if o_name != name
            )
        ]
        reps: list[int] = []
        for name in sorted(frontier):
            positives = np.flatnonzero(self.col_of[name])
            reps.append(int(positives[rng.integers(len(positives))]))
        claimed = np.zeros_like(base, dtype=bool)
        for name in below:
            claimed |= self.col_of[name].astype(bool)
        unclaimed = np.flatnonzero(base.astype(bool) & ~claimed)
        if unclaimed.size:
            # Group unclaimed examples by their labeled signature; a class
            # contributes up to three representatives so triples inside a
            # bare class are possible.
            if not self.rec.columns:
                groups = {(): [int(i) for i in unclaimed]}
            else:
                rows = np.stack(self.rec.columns, axis=1)[unclaimed]
                groups = {}
                for i, row in zip(unclaimed, rows):
                    groups.setdefault(tuple(int(b) for b in row), []).append(int(i))
            for key in sorted(groups):
                members = groups[key]
                take = min(3, len(members))
                picks = rng.choice(len(members), size=take, replace=False)
                reps.extend(int(members[p]) for p in picks)
        self.reps = reps

    def sample_triple(self, rng) -> tuple[int, int, int]:
        picks = rng.choice(len(self.reps), size=3, replace=False)
        return canonical_triple(*(self.reps[int(p)] for p in picks))


def _strictly_below(col: np.ndarray, base: np.ndarray) -> bool:
    return bool(np.all(col <= base) and np.any(col < base))


def run_adaptive_hybrid(
    truth: GroundTruth,
    policy: OraclePolicy,
    config: HybridConfig,
    seed: int | None = None,
    labeling: LabelingConfig = LabelingConfig(),
    max_queries: int | None = None,
) -> RunResult:
    """Pairs until everything is pairwise resolved, then top-down triple probes.

    Phase two keeps a queue seeded with a virtual all-ones root feature plus
    everything phase one found; popping a feature probes random triples of
    representatives of the units directly below it, pushing (and fully
    labeling) every new feature, until theta consecutive NONE answers retire
    the popped feature.
    """
    n = truth.matrix.n_examples
    if n < 2:
        raise InvalidParameter("adaptive hybrid needs at least 2 examples")
    rng = np.random.default_rng(seed)
    rec = _Recorder(truth, labeling, rng)
    part = SignaturePartition(n)
    identical = _UnionFind(n)

    while True:
        if max_queries is not None and rec.queries >= max_queries:
            return rec.result("budget")
        pair = part.sample_unresolved_pair(rng)
        if pair is None:
            break
        ans = answer_pair(policy, truth, pair, rng)
        ev = rec.elicit("pair", {"q": list(pair)}, ans)
        if ans is None:
            _record_identical(part, identical, pair)
        else:
            col = rec.discover(ans, ev)
            part.apply_discovery(rec.names[-1], col)

    col_of = {name: col for name, col in zip(rec.names, rec.columns)}
    # Root first, then phase-one features top-down so interiors found by
    # pairs still get explored for sub-features.
    queue: deque[str | None] = deque([None])
    for name in sorted(rec.names, key=lambda f: -int(col_of[f].sum())):
        queue.append(name)

    while queue:
        popped = queue.popleft()
        frontier = _Frontier(rec, col_of, popped)
        streak = 0
        theta = config.theta_for(len(rec.names))
        while len(frontier.reps) >= 3 and streak < theta:
            if max_queries is not None and rec.queries >= max_queries:
                return rec.result("budget")
            triple = frontier.sample_triple(rng)
            ans = answer_triple(policy, truth, triple, rng)
            ev = rec.elicit("triple", {"q": list(triple)}, ans)
            if ans is None or ans in rec.true_ids:
                streak += 1
                continue
            col = rec.discover(ans, ev)
            part.apply_discovery(rec.names[-1], col)
            col_of[rec.names[-1]] = col
            queue.append(rec.names[-1])
            frontier.refresh()
            streak = 0
            theta = config.theta_for(len(rec.names))
    return rec.result("exhaustion")


# ---------------------------------------------------------------------------
# Fresh-example mode (unbounded data from a product distribution)
# ---------------------------------------------------------------------------

def _fresh_rows(spec: IndependentSpec, k: int, rng) -> np.ndarray:
    ps = spec.frequencies
    return (rng.random((k, ps.size)) < ps).astype(np.uint8)


def _fresh_policy_answer(
    policy: OraclePolicy, cands: np.ndarray, rng
) -> int | None:
    if cands.size == 0:
        return None
    if policy.kind == "homogeneous":
        if policy.salience is None:
            return int(cands.min())
        return min((int(j) for j in cands), key=policy.rank)
    if policy.kind == "uniform":
        return int(rng.choice(cands))
    raise InvalidParameter(f"{policy.kind} policy is undefined without a tree")


@dataclass
class FreshRunResult:
    elicitation_queries: int
    none_answers: int
    found: list[int]  # feature indices in discovery order
    terminated_by: str


def run_fresh_adaptive(
    spec: IndependentSpec,
    policy: OraclePolicy,
    arity: int = 3,
    seed: int | None = None,
    max_queries: int = 1_000_000,
) -> FreshRunResult:
    """Adaptive triple (or pair, arity=2) with a brand-new draw per query.

    Each elicitation draws fresh examples from the product distribution and
    rejects draws already resolved by a discovered feature; rejections are
    free, queries on unresolved draws are counted. Stops when all features
    are found.
    """
    if arity not in (2, 3):
        raise InvalidParameter("arity must be 2 or 3")
    rng = np.random.default_rng(seed)
    m = spec.n_features
    discovered: list[int] = []
    mask = np.zeros(m, dtype=bool)
    queries = 0
    nones = 0
    while len(discovered) < m and queries < max_queries:
        rows = _fresh_rows(spec, arity, rng)
        sums = rows.sum(axis=0)
        if (sums[mask] == arity - 1).any():
            continue  # resolved by a known feature; redraw costs nothing
        queries += 1
        cands = np.flatnonzero(sums == arity - 1)
        ans = _fresh_policy_answer(policy, cands, rng)
        if ans is None:
            nones += 1
            continue
        discovered.append(ans)
        mask[ans] = True
    reason = "exhaustion" if len(discovered) == m else "budget"
    return FreshRunResult(queries, nones, discovered, reason)


def run_fresh_random_triple(
    spec: IndependentSpec,
    policy: OraclePolicy,
    seed: int | None = None,
    max_queries: int = 1_000_000,
) -> FreshRunResult:
    """Non-adaptive stream of fresh random triples until all features appear."""
    rng = np.random.default_rng(seed)
    m = spec.n_features
    seen: set[int] = set()
    order: list[int] = []
    queries = 0
    nones = 0
    while len(seen) < m and queries < max_queries:
        rows = _fresh_rows(spec, 3, rng)
        queries += 1
        cands = np.flatnonzero(rows.sum(axis=0) == 2)
        ans = _fresh_policy_answer(policy, cands, rng)
        if ans is None:
            nones += 1
            continue
        if ans not in seen:
            seen.add(ans)
            order.append(ans)
    reason = "exhaustion" if len(seen) == m else "budget"
    return FreshRunResult(queries, nones, order, reason)


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------

class ReplayError(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(f"event {index}: {message}")
        self.index = index


def replay(transcript: Transcript, truth: GroundTruth | None = None) -> RunResult:
    """Reconstruct a run's result from its transcript.

    With ground truth attached, every recorded answer is checked for
    soundness (a triple answer must hold for exactly two of the three, a pair
    answer for one of two, a NONE must have an empty distinguishing set) and
    the event ordering invariants are enforced. Truncated transcripts yield
    the partial state without error.
    """
    queries = 0
    nones = 0
    names: list[str] = []
    columns: list[np.ndarray] = []
    reason = "truncated"
    pending_discovery: str | None = None
    awaiting_label: str | None = None
    name_to_col = (
        {f: j for j, f in enumerate(truth.matrix.feature_names)} if truth else None
    )
    for i, ev in enumerate(transcript.events):
        if ev.kind in ("triple", "pair", "tag"):
            if awaiting_label is not None:
                raise ReplayError(i, f"elicitation before labels of {awaiting_label!r}")
            queries += 1
            ans = ev.payload.get("a")
            if ans is None:
                nones += 1
            else:
                pending_discovery = ans
            if truth is not None:
                q = ev.payload["q"]
                if ev.kind == "tag":
                    cands = set(np.flatnonzero(truth.matrix.row(q[0])))
                else:
                    cands = set(distinguishing_features(truth.matrix, q))
                if ans is None:
                    if cands:
                        raise ReplayError(i, "NONE recorded but valid answers exist")
                else:
                    if ans not in name_to_col:
                        raise ReplayError(i, f"unknown feature {ans!r}")
                    if name_to_col[ans] not in cands:
                        raise ReplayError(i, f"unsound answer {ans!r}")
        elif ev.kind == "discovery":
            f = ev.payload["f"]
            if pending_discovery != f:
                raise ReplayError(i, f"discovery of {f!r} without its eliciting event")
            if f in names:
                raise ReplayError(i, f"feature {f!r} discovered twice")
            names.append(f)
            pending_discovery = None
            awaiting_label = f
        elif ev.kind == "label":
            f = ev.payload["f"]
            if awaiting_label != f:
                raise ReplayError(i, f"label batch for {f!r} out of order")
            col = np.array([int(c) for c in ev.payload["bits"]], dtype=np.uint8)
            columns.append(col)
            awaiting_label = None
        elif ev.kind == "end":
            reason = ev.payload["reason"]
        else:
            raise ReplayError(i, f"unknown event kind {ev.kind!r}")
    cols = np.column_stack(columns) if columns else None
    if cols is None and truth is not None:
        cols = np.zeros((truth.matrix.n_examples, 0), dtype=np.uint8)
    return RunResult(
        elicitation_queries=queries,
        none_answers=nones,
        feature_names=names,
        columns=cols,
        terminated_by=reason,
        transcript=transcript,
        true_ids=[name_to_col[f] for f in names] if name_to_col else [],
    )
