"""Unresolved-query bookkeeping via signature classes.

Examples are partitioned by their bit-signature over the features discovered
so far. A triple is resolved when some discovered feature holds for exactly
two of its members (or its NONE outcome is on record), so unresolved triples
can be counted and sampled exactly by enumerating signature-class
combinations instead of all O(N^3) triples on every step:

  * three from one class: always unresolved (bit sums are 0 or 3);
  * two from class s, one from class t: unresolved iff s is a bitwise subset
    of t (per position 2*s + t hits 2 exactly when s=1, t=0);
  * one from each of three distinct classes: unresolved iff no bit position
    has exactly two ones across the signatures.

Unresolved pairs are simply same-class pairs. Recorded NONE answers are
subtracted from whichever combination they fall in.
"""

from __future__ import annotations

import json
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .model import InvalidParameter, canonical_pair, canonical_triple


def signature(labels) -> str:
    """Bitstring over discovered features; position k is the k-th discovery."""
    return "".join("01"[int(b)] for b in labels)


def is_triple_resolved(sig_a: str, sig_b: str, sig_c: str) -> bool:
    """True iff some position carries exactly two ones across the signatures."""
    if not (len(sig_a) == len(sig_b) == len(sig_c)):
        raise InvalidParameter("signatures must have equal length")
    a, b, c = (_mask(s) for s in (sig_a, sig_b, sig_c))
    return _two_of_three(a, b, c) != 0


def _mask(sig: str) -> int:
    m = 0
    for k, ch in enumerate(sig):
        if ch == "1":
            m |= 1 << k
        elif ch != "0":
            raise InvalidParameter(f"bad signature character {ch!r}")
    return m


def _two_of_three(a: int, b: int, c: int) -> int:
    return (a & b & ~c) | (a & c & ~b) | (b & c & ~a)


@lru_cache(maxsize=64)
def _combo_indices(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    idx = np.array(list(combinations(range(n), 3)), dtype=np.int64)
    if idx.size == 0:
        idx = idx.reshape(0, 3)
    return idx[:, 0], idx[:, 1], idx[:, 2]


class SignaturePartition:
    """Mutable index of unresolved triple and pair queries over N examples.

    Single-writer: mutations (apply_discovery, NONE additions) must be
    serialized per instance; reads between mutations are safe.
    """

    def __init__(self, n_examples: int):
        if n_examples < 1:
            raise InvalidParameter("need at least one example")
        self.n_examples = int(n_examples)
        self.discovered: list[str] = []
        self.sigs: list[int] = [0] * self.n_examples
        self.none_triples: set[tuple[int, int, int]] = set()
        self.none_pairs: set[tuple[int, int]] = set()
        self._classes: dict[int, list[int]] | None = None
        self._triple_cache: list[tuple] | None = None

    # -- structure ---------------------------------------------------------

    @property
    def classes(self) -> dict[int, list[int]]:
        if self._classes is None:
            by_sig: dict[int, list[int]] = {}
            for i, s in enumerate(self.sigs):
                by_sig.setdefault(s, []).append(i)
            self._classes = by_sig
        return self._classes

    def signature_of(self, example: int) -> str:
        bits = self.sigs[example]
        return "".join("01"[(bits >> k) & 1] for k in range(len(self.discovered)))

    def apply_discovery(self, name: str, labels) -> None:
        """Split every class by the labels of a newly discovered feature."""
        labels = np.asarray(labels)
        if labels.shape != (self.n_examples,):
            raise InvalidParameter("need one label per example")
        if not np.isin(labels, (0, 1)).all():
            raise InvalidParameter("labels must be 0 or 1")
        bit = 1 << len(self.discovered)
        self.discovered.append(name)
        for i in range(self.n_examples):
            if labels[i]:
                self.sigs[i] |= bit
        self._classes = None
        self._triple_cache = None

    def add_none_triple(self, triple) -> None:
        self.none_triples.add(canonical_triple(*triple, n=self.n_examples))
        self._triple_cache = None

    def add_none_pair(self, pair) -> None:
        self.none_pairs.add(canonical_pair(*pair, n=self.n_examples))

    # -- triples -----------------------------------------------------------

    def _build_triple_cache(self) -> list[tuple]:
        """Unresolved class combinations: (kind, class keys, total, none'd, sizes)."""
        keys = sorted(self.classes)
        sizes = {s: len(self.classes[s]) for s in keys}
        entries: dict[tuple, list] = {}

        for s in keys:
            n = sizes[s]
            if n >= 3:
                entries[("one", s)] = [comb(n, 3), 0]
        for s in keys:
            if sizes[s] < 2:
                continue
            for t in keys:
                if t == s or (s & ~t) != 0:
                    continue
                entries[("two", s, t)] = [comb(sizes[s], 2) * sizes[t], 0]
        if len(keys) >= 3:
            arr = np.array(keys, dtype=np.int64 if max(keys) < 2**62 else object)
            ia, ib, ic = _combo_indices(len(keys))
            a, b, c = arr[ia], arr[ib], arr[ic]
            ok = ((a & b & ~c) | (a & c & ~b) | (b & c & ~a)) == 0
            for pos in np.flatnonzero(ok):
                s, t, u = keys[ia[pos]], keys[ib[pos]], keys[ic[pos]]
                entries[("three", s, t, u)] = [sizes[s] * sizes[t] * sizes[u], 0]

        for tri in self.none_triples:
            key = self._combo_key(tri)
            if key in entries:  # otherwise already class-resolved; nothing to correct
                entries[key][1] += 1
        return [(k, total, noned) for k, (total, noned) in entries.items()]

    def _combo_key(self, triple: tuple[int, int, int]) -> tuple:
        ks = sorted(self.sigs[i] for i in triple)
        if ks[0] == ks[1] == ks[2]:
            return ("one", ks[0])
        if ks[0] == ks[1]:
            return ("two", ks[0], ks[2])
        if ks[1] == ks[2]:
            return ("two", ks[1], ks[0])
        return ("three", ks[0], ks[1], ks[2])

    def _triples(self) -> list[tuple]:
        if self._triple_cache is None:
            self._triple_cache = self._build_triple_cache()
        return self._triple_cache

    def count_unresolved_triples(self) -> int:
        return sum(total - noned for _, total, noned in self._triples())

    def sample_unresolved_triple(
        self, rng: np.random.Generator
    ) -> tuple[int, int, int] | None:
        """Uniform over unresolved, non-NONE'd triples; None when exhausted."""
        entries = self._triples()
        weights = np.array([total - noned for _, total, noned in entries], dtype=np.int64)
        grand = int(weights.sum())
        if grand == 0:
            return None
        pick = int(rng.integers(grand))
        combo_i = int(np.searchsorted(np.cumsum(weights), pick, side="right"))
        key = entries[combo_i][0]
        # Rejection against the NONE set stays uniform within the combination.
        for _ in range(64):
            tri = self._draw_from_combo(key, rng)
            if tri not in self.none_triples:
                return tri
        pool = [t for t in self._enumerate_combo(key) if t not in self.none_triples]
        return pool[int(rng.integers(len(pool)))]

    def _draw_from_combo(self, key: tuple, rng) -> tuple[int, int, int]:
        cls = self.classes
        if key[0] == "one":
            members = cls[key[1]]
            picks = rng.choice(len(members), size=3, replace=False)
            return canonical_triple(*(members[int(i)] for i in picks))
        if key[0] == "two":
            s_members, t_members = cls[key[1]], cls[key[2]]
            picks = rng.choice(len(s_members), size=2, replace=False)
            third = t_members[int(rng.integers(len(t_members)))]
            return canonical_triple(s_members[int(picks[0])], s_members[int(picks[1])], third)
        _, s, t, u = key
        return canonical_triple(
            cls[s][int(rng.integers(len(cls[s])))],
            cls[t][int(rng.integers(len(cls[t])))],
            cls[u][int(rng.integers(len(cls[u])))],
        )

    def _enumerate_combo(self, key: tuple):
        cls = self.classes
        if key[0] == "one":
            for tri in combinations(cls[key[1]], 3):
                yield canonical_triple(*tri)
        elif key[0] == "two":
            for a, b in combinations(cls[key[1]], 2):
                for c in cls[key[2]]:
                    yield canonical_triple(a, b, c)
        else:
            _, s, t, u = key
            for a in cls[s]:
                for b in cls[t]:
                    for c in cls[u]:
                        yield canonical_triple(a, b, c)

    def enumerate_unresolved_triples(self):
        """All unresolved triples (test/inspection helper; not used per step)."""
        for key, _, _ in self._triples():
            for tri in self._enumerate_combo(key):
                if tri not in self.none_triples:
                    yield tri

    # -- pairs ---------------------------------------------------------------

    def _live_none_pairs(self) -> int:
        return sum(1 for (i, j) in self.none_pairs if self.sigs[i] == self.sigs[j])

    def count_unresolved_pairs(self) -> int:
        total = sum(comb(len(members), 2) for members in self.classes.values())
        return total - self._live_none_pairs()

    def sample_unresolved_pair(
        self, rng: np.random.Generator
    ) -> tuple[int, int] | None:
        sizes = [(s, comb(len(m), 2)) for s, m in sorted(self.classes.items()) if len(m) >= 2]
        weights = []
        for s, total in sizes:
            noned = sum(
                1 for (i, j) in self.none_pairs
                if self.sigs[i] == s and self.sigs[j] == s
            )
            weights.append(total - noned)
        grand = sum(weights)
        if grand == 0:
            return None
        pick = int(rng.integers(grand))
        combo_i = int(np.searchsorted(np.cumsum(weights), pick, side="right"))
        members = self.classes[sizes[combo_i][0]]
        for _ in range(64):
            picks = rng.choice(len(members), size=2, replace=False)
            pair = canonical_pair(members[int(picks[0])], members[int(picks[1])])
            if pair not in self.none_pairs:
                return pair
        pool = [
            canonical_pair(a, b)
            for a, b in combinations(members, 2)
            if canonical_pair(a, b) not in self.none_pairs
        ]
        return pool[int(rng.integers(len(pool)))]

    # -- (de)serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "discovered": list(self.discovered),
            "classes": {
                self.signature_of(members[0]): list(members)
                for members in self.classes.values()
            },
            "none_triples": sorted(list(t) for t in self.none_triples),
            "none_pairs": sorted(list(p) for p in self.none_pairs),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict) -> "SignaturePartition":
        part = cls(d["n_examples"])
        part.discovered = list(d["discovered"])
        for sig, members in d["classes"].items():
            mask = _mask(sig)
            for i in members:
                part.sigs[i] = mask
        part.none_triples = {canonical_triple(*t) for t in d.get("none_triples", [])}
        part.none_pairs = {canonical_pair(*p) for p in d.get("none_pairs", [])}
        return part

    @classmethod
    def from_labels(cls, n_examples: int, discovered: list[str], columns) -> "SignaturePartition":
        """Rebuild from scratch given the discovered features' label columns."""
        part = cls(n_examples)
        for name, col in zip(discovered, columns):
            part.apply_discovery(name, col)
        return part
