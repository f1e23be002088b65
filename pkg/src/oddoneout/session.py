"""Live elicitation sessions against human oracles.

A session walks a real item set through the adaptive loop: serve one
elicitation task at a time (a triple the discovered features cannot yet
resolve), turn each submitted feature into a batch-labeling task over all
items, commit labels once enough votes are in, and keep the unresolved-query
index in sync. The append-only JSONL transcript is the source of truth;
restarting and replaying it reconstructs the exact state, so snapshots are
only a cache.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .metrics import metric_report
from .model import FeatureMatrix, canonical_pair, canonical_triple
from .resolution import SignaturePartition

SESSION_ALGORITHMS = ("adaptive-triple", "adaptive-pair", "random-triple")
ITEM_KINDS = ("image", "video", "text")


class ValidationError(ValueError):
    """Bad request payload (HTTP 400)."""


class ConflictError(RuntimeError):
    """Submission against a stale or already-answered task (HTTP 409)."""


class NotFoundError(KeyError):
    """Unknown session or resource (HTTP 404)."""


@dataclass(frozen=True)
class Item:
    id: str
    media: str
    kind: str

    def to_json_dict(self) -> dict:
        return {"id": self.id, "media": self.media, "kind": self.kind}


@dataclass(frozen=True)
class ItemManifest:
    title: str
    items: tuple[Item, ...]
    license_note: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "ItemManifest":
        try:
            items = tuple(
                Item(
                    id=str(it["id"]),
                    media=str(it["media"]),
                    kind=str(it.get("kind", "image")),
                )
                for it in d["items"]
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed manifest: {e}") from e
        manifest = cls(
            title=str(d.get("title", "")),
            items=items,
            license_note=d.get("license"),
        )
        ids = [it.id for it in items]
        if len(ids) != len(set(ids)):
            raise ValidationError("item ids must be unique")
        if any(not i for i in ids):
            raise ValidationError("item ids must be non-empty")
        for it in items:
            if it.kind not in ITEM_KINDS:
                raise ValidationError(f"unknown item kind {it.kind!r}")
        return manifest

    def to_json_dict(self) -> dict:
        d = {"title": self.title, "items": [it.to_json_dict() for it in self.items]}
        if self.license_note is not None:
            d["license"] = self.license_note
        return d


@dataclass(frozen=True)
class SessionConfig:
    algorithm: str = "adaptive-triple"
    budget: int | None = None
    votes: int = 1  # single-operator flow by default; 5 reproduces crowd voting
    seed: int = 0
    elicitor_vote: bool = True

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        cfg = cls(
            algorithm=d.get("algorithm", "adaptive-triple"),
            budget=d.get("budget"),
            votes=int(d.get("votes", 1)),
            seed=int(d.get("seed", 0)),
            elicitor_vote=bool(d.get("elicitor_vote", True)),
        )
        if cfg.algorithm not in SESSION_ALGORITHMS:
            raise ValidationError(f"algorithm must be one of {SESSION_ALGORITHMS}")
        if cfg.votes < 1:
            raise ValidationError("votes must be >= 1")
        if cfg.budget is not None and cfg.budget < 1:
            raise ValidationError("budget must be >= 1 when given")
        if cfg.algorithm == "random-triple" and cfg.budget is None:
            raise ValidationError("random-triple sessions need a budget")
        return cfg

    def to_json_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "budget": self.budget,
            "votes": self.votes,
            "seed": self.seed,
            "elicitor_vote": self.elicitor_vote,
        }


@dataclass
class PendingLabel:
    task_id: str
    feature_name: str
    origin: tuple[int, ...]  # the eliciting triple/pair, positives first
    votes: dict[str, str] = field(default_factory=dict)  # voter -> bit string
    partial: dict[int, list[int]] = field(default_factory=dict)  # item -> early bits


@dataclass
class Feature:
    name: str
    bits: np.ndarray
    origin: tuple[int, ...]
    warnings: list[str] = field(default_factory=list)


class Session:
    """State machine for one live session. Callers must hold the store's
    per-session lock around mutations."""

    def __init__(self, session_id: str, manifest: ItemManifest, config: SessionConfig):
        if len(manifest.items) < (2 if config.algorithm == "adaptive-pair" else 3):
            raise ValidationError("manifest too small for the chosen query type")
        self.id = session_id
        self.manifest = manifest
        self.config = config
        self.n = len(manifest.items)
        self.partition = SignaturePartition(self.n)
        self.features: list[Feature] = []
        self.pending_elicit: tuple[str, tuple[int, ...]] | None = None
        self.pending_label: PendingLabel | None = None
        self.elicit_count = 0
        self.task_counter = 0
        self.events: list[dict] = []
        self.warnings: list[str] = []
        self._done_reason: str | None = None

    # -- helpers -------------------------------------------------------------

    def _item_index(self, item_id: str) -> int:
        for i, it in enumerate(self.manifest.items):
            if it.id == item_id:
                return i
        raise ValidationError(f"unknown item id {item_id!r}")

    def _items_payload(self, indices) -> list[dict]:
        return [self.manifest.items[i].to_json_dict() for i in indices]

    def _record(self, kind: str, **payload) -> dict:
        ev = {"v": 1, "e": kind}
        ev.update(payload)
        self.events.append(ev)
        return ev

    # -- task flow -------------------------------------------------------------

    def next_task(self) -> dict:
        """Current task; idempotent until the pending task is answered."""
        if self.pending_label is not None:
            p = self.pending_label
            return {
                "kind": "label_batch",
                "task_id": p.task_id,
                "feature": p.feature_name,
                "items": self._items_payload(range(self.n)),
                "votes_needed": self.config.votes,
                "votes_have": len(p.votes),
            }
        if self.pending_elicit is None and self._done_reason is None:
            self._sample_elicitation()
        if self.pending_elicit is not None:
            task_id, query = self.pending_elicit
            return {
                "kind": "elicit_triple" if len(query) == 3 else "elicit_pair",
                "task_id": task_id,
                "items": self._items_payload(query),
            }
        return {"kind": "done", "reason": self._done_reason}

    def _sample_elicitation(self) -> None:
        if self.config.budget is not None and self.elicit_count >= self.config.budget:
            self._done_reason = "budget"
            return
        rng = np.random.default_rng([self.config.seed, self.task_counter])
        if self.config.algorithm == "adaptive-pair":
            query = self.partition.sample_unresolved_pair(rng)
        elif self.config.algorithm == "adaptive-triple":
            query = self.partition.sample_unresolved_triple(rng)
        else:  # random-triple: resolution status deliberately ignored
            picks = rng.choice(self.n, size=3, replace=False)
            query = canonical_triple(*picks)
        if query is None:
            self._done_reason = "exhaustion"
            return
        self.task_counter += 1
        task_id = f"t{self.task_counter}"
        self.pending_elicit = (task_id, tuple(query))
        self._record("task", task_id=task_id, query=list(query))

    def submit_elicitation(
        self, task_id: str, feature_name: str | None, chosen: list[str] | None
    ) -> dict:
        if self.pending_elicit is None or self.pending_elicit[0] != task_id:
            raise ConflictError(f"task {task_id!r} is not the pending elicitation")
        _, query = self.pending_elicit
        if feature_name is None:
            self._record("elicit", task_id=task_id, feature=None, chosen=None)
            self._apply_none(query)
            self.pending_elicit = None
            self.elicit_count += 1
            return {"accepted": "none"}
        feature_name = feature_name.strip()
        if not feature_name:
            raise ValidationError("feature name must be non-empty")
        expect = 2 if len(query) == 3 else 1
        if chosen is None or len(chosen) != expect:
            raise ValidationError(f"must choose exactly {expect} item(s) with the feature")
        chosen_idx = [self._item_index(c) for c in chosen]
        if not set(chosen_idx) <= set(query):
            raise ValidationError("chosen items must come from the task's items")
        if len(set(chosen_idx)) != expect:
            raise ValidationError("chosen items must be distinct")
        self._record(
            "elicit", task_id=task_id, feature=feature_name, chosen=list(chosen)
        )
        self._apply_elicit(task_id, query, feature_name, chosen_idx)
        return {"accepted": "feature", "label_task": self.pending_label.task_id}

    def _apply_none(self, query: tuple[int, ...]) -> None:
        if len(query) == 3:
            self.partition.add_none_triple(query)
        else:
            self.partition.add_none_pair(query)

    def _apply_elicit(self, task_id, query, feature_name, chosen_idx) -> None:
        folded = feature_name.casefold()
        if any(f.name.casefold() == folded for f in self.features):
            self.warnings.append(
                f"feature name {feature_name!r} duplicates an earlier name; "
                "kept as a separate column"
            )
        self.task_counter += 1
        label_task = f"t{self.task_counter}"
        origin = tuple(chosen_idx) + tuple(i for i in query if i not in chosen_idx)
        pending = PendingLabel(
            task_id=label_task, feature_name=feature_name, origin=origin
        )
        if self.config.elicitor_vote:
            # The elicitor's two-of-three assertion counts as one early vote
            # on exactly the items they saw.
            for i in chosen_idx:
                pending.partial.setdefault(i, []).append(1)
            for i in query:
                if i not in chosen_idx:
                    pending.partial.setdefault(i, []).append(0)
        self.pending_label = pending
        self.pending_elicit = None
        self.elicit_count += 1

    def _vote_counts(self) -> dict[int, list[int]]:
        """Per-item bit lists, earliest vote first."""
        p = self.pending_label
        out: dict[int, list[int]] = {i: list(p.partial.get(i, ())) for i in range(self.n)}
        for voter in sorted(p.votes):  # insertion order not durable; sort for replay
            bits = p.votes[voter]
            for i, ch in enumerate(bits):
                out[i].append(int(ch))
        return out

    def submit_labels(self, task_id: str, voter: str, bits: str) -> dict:
        p = self.pending_label
        if p is None or p.task_id != task_id:
            raise ConflictError(f"task {task_id!r} is not the pending label batch")
        if not voter:
            raise ValidationError("voter id must be non-empty")
        if voter in p.votes:
            raise ValidationError(f"voter {voter!r} already voted on this task")
        if len(bits) != self.n or any(c not in "01" for c in bits):
            raise ValidationError(f"bits must be a 0/1 string of length {self.n}")
        p.votes[voter] = bits
        self._record("vote", task_id=task_id, voter=voter, bits=bits)
        if len(p.votes) >= self.config.votes:
            self._commit_labels()
            return {"accepted": "vote", "committed": True}
        return {"accepted": "vote", "committed": False}

    def _commit_labels(self) -> None:
        p = self.pending_label
        counts = self._vote_counts()
        bits = np.zeros(self.n, dtype=np.uint8)
        for i in range(self.n):
            votes = counts[i]
            ones = sum(votes)
            if ones * 2 > len(votes):
                bits[i] = 1
            elif ones * 2 == len(votes):
                bits[i] = votes[0]  # tie: earliest vote (the elicitor's) wins
        feature = Feature(name=p.feature_name, bits=bits, origin=p.origin)
        positives, negatives = p.origin[:-1], p.origin[-1:]
        if len(p.origin) >= 3:
            consistent = all(bits[i] == 1 for i in positives) and all(
                bits[i] == 0 for i in negatives
            )
            if not consistent:
                note = (
                    f"committed labels for {p.feature_name!r} contradict the "
                    f"elicitor's choice on items {list(p.origin)}"
                )
                feature.warnings.append(note)
                self.warnings.append(note)
        self.features.append(feature)
        self.partition.apply_discovery(p.feature_name, bits)
        self.pending_label = None

    # -- exports ---------------------------------------------------------------

    def matrix(self) -> FeatureMatrix:
        if not self.features:
            return FeatureMatrix(
                bits=np.zeros((self.n, 0), dtype=np.uint8), feature_names=()
            )
        return FeatureMatrix(
            bits=np.column_stack([f.bits for f in self.features]),
            feature_names=tuple(f.name for f in self.features),
        )

    def metrics_view(self) -> dict:
        cols = [f.bits for f in self.features]
        report = metric_report(cols, [f.name for f in self.features], self.n)
        return {
            "g": report.g_curve[-1][1],
            "g_curve": [[k, g] for k, g in report.g_curve],
            "features": [f.name for f in self.features],
            "distinct_interesting": report.distinct_interesting,
            "elicitations": self.elicit_count,
        }

    def export(self) -> dict:
        return {
            "session": self.id,
            "title": self.manifest.title,
            "items": [it.id for it in self.manifest.items],
            "matrix": self.matrix().to_json_dict(),
            "metrics": self.metrics_view(),
            "warnings": list(self.warnings),
            "transcript": self.transcript_jsonl(),
        }

    # -- persistence -------------------------------------------------------------

    def transcript_jsonl(self) -> str:
        lines = [
            json.dumps(
                {
                    "v": 1,
                    "e": "created",
                    "id": self.id,
                    "manifest": self.manifest.to_json_dict(),
                    "config": self.config.to_json_dict(),
                },
                sort_keys=True,
            )
        ]
        lines.extend(json.dumps(ev, sort_keys=True) for ev in self.events)
        return "\n".join(lines) + "\n"

    @classmethod
    def replay(cls, jsonl: str) -> "Session":
        """Rebuild a session from its transcript; the creation event carries
        the manifest and config, every later event is re-applied in order."""
        lines = [ln for ln in jsonl.splitlines() if ln.strip()]
        if not lines:
            raise ValidationError("empty transcript")
        head = json.loads(lines[0])
        if head.get("e") != "created":
            raise ValidationError("transcript must start with the creation event")
        session = cls(
            head["id"],
            ItemManifest.from_dict(head["manifest"]),
            SessionConfig.from_dict(head["config"]),
        )
        for raw in lines[1:]:
            ev = json.loads(raw)
            kind = ev.get("e")
            if kind == "task":
                session.task_counter += 1
                expected = f"t{session.task_counter}"
                if ev["task_id"] != expected:
                    raise ValidationError(
                        f"transcript task id {ev['task_id']} out of order"
                    )
                session.pending_elicit = (ev["task_id"], tuple(ev["query"]))
                session.events.append(ev)
            elif kind == "elicit":
                task_id = ev["task_id"]
                if session.pending_elicit is None or session.pending_elicit[0] != task_id:
                    raise ValidationError("elicit event without matching task")
                _, query = session.pending_elicit
                session.events.append(ev)
                if ev["feature"] is None:
                    session._apply_none(query)
                    session.pending_elicit = None
                    session.elicit_count += 1
                else:
                    chosen_idx = [session._item_index(c) for c in ev["chosen"]]
                    session._apply_elicit(task_id, query, ev["feature"], chosen_idx)
            elif kind == "vote":
                p = session.pending_label
                if p is None or p.task_id != ev["task_id"]:
                    raise ValidationError("vote event without matching label task")
                p.votes[ev["voter"]] = ev["bits"]
                session.events.append(ev)
                if len(p.votes) >= session.config.votes:
                    session._commit_labels()
            else:
                raise ValidationError(f"unknown session event {kind!r}")
        return session


class SessionStore:
    """Disk-backed registry of sessions; one directory per session holding
    the JSONL transcript (authoritative) and a snapshot (cache)."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._registry_lock = threading.RLock()

    def _dir(self, session_id: str) -> Path:
        return self.root / session_id

    def lock(self, session_id: str) -> threading.RLock:
        with self._registry_lock:
            if session_id not in self._locks:
                self._locks[session_id] = threading.RLock()
            return self._locks[session_id]

    def create(self, manifest: ItemManifest, config: SessionConfig) -> Session:
        session_id = uuid.uuid4().hex[:12]
        session = Session(session_id, manifest, config)
        with self._registry_lock:
            self._sessions[session_id] = session
        self.persist(session)
        return session

    def get(self, session_id: str) -> Session:
        with self._registry_lock:
            if session_id in self._sessions:
                return self._sessions[session_id]
        path = self._dir(session_id) / "transcript.jsonl"
        if not path.exists():
            raise NotFoundError(session_id)
        session = Session.replay(path.read_text())
        with self._registry_lock:
            self._sessions[session_id] = session
        return session

    def persist(self, session: Session) -> None:
        d = self._dir(session.id)
        d.mkdir(parents=True, exist_ok=True)
        (d / "transcript.jsonl").write_text(session.transcript_jsonl())
        snapshot = {
            "partition": session.partition.to_json_dict(),
            "features": [f.name for f in session.features],
            "elicitations": session.elicit_count,
        }
        (d / "snapshot.json").write_text(json.dumps(snapshot, sort_keys=True))

    def ids(self) -> list[str]:
        with self._registry_lock:
            known = set(self._sessions)
        on_disk = {p.name for p in self.root.iterdir() if p.is_dir()}
        return sorted(known | on_disk)
