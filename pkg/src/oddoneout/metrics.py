"""Evaluation measures for discovered feature sets.

A feature column is *interesting* when it is at least 10% away (Hamming
fraction) from both constant columns, and *distinct* when it is at least 10%
away from every feature counted before it; redundant columns are represented
by the earliest discovery. The scattering value g is the average fraction of
examples indistinguishable under the first k features: 1 before anything is
discovered, 1/N once every example is separated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .model import InvalidParameter

DEFAULT_THRESHOLD = 0.1


def feature_distance(u, v) -> float:
    """Fraction of examples two feature columns disagree on."""
    u = np.asarray(u, dtype=np.uint8)
    v = np.asarray(v, dtype=np.uint8)
    if u.shape != v.shape or u.ndim != 1 or u.size == 0:
        raise InvalidParameter("columns must be equal-length non-empty vectors")
    return float((u != v).mean())


def interesting(column, threshold: float = DEFAULT_THRESHOLD) -> bool:
    """At least `threshold` away from the all-0 and the all-1 column."""
    column = np.asarray(column, dtype=np.uint8)
    frac = float(column.mean())
    return frac >= threshold and (1.0 - frac) >= threshold


@dataclass
class FeatureFlags:
    name: str
    interesting: bool
    distinct: bool
    representative_of: str | None  # earliest counted feature this one duplicates


@dataclass
class MetricReport:
    distinct_interesting: int
    g_curve: list[tuple[int, float]]
    flags: list[FeatureFlags]

    def to_json_dict(self) -> dict:
        return {
            "distinct_interesting": self.distinct_interesting,
            "g_curve": [[k, g] for k, g in self.g_curve],
            "features": [
                {
                    "name": f.name,
                    "interesting": f.interesting,
                    "distinct": f.distinct,
                    "representative_of": f.representative_of,
                }
                for f in self.flags
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def g_curve_csv(self) -> str:
        lines = ["k,g"] + [f"{k},{g:.10g}" for k, g in self.g_curve]
        return "\n".join(lines) + "\n"


def distinct_interesting_count(
    columns, names=None, threshold: float = DEFAULT_THRESHOLD
) -> tuple[int, list[FeatureFlags]]:
    """Greedy scan in discovery order.

    A column is counted when it is interesting and at least `threshold` away
    from every previously counted representative (ties count as distinct);
    otherwise it maps to the first representative within threshold, if any.
    """
    columns = [np.asarray(c, dtype=np.uint8) for c in columns]
    if names is None:
        names = [f"f{j}" for j in range(len(columns))]
    reps: list[tuple[str, np.ndarray]] = []
    flags: list[FeatureFlags] = []
    for name, col in zip(names, columns):
        rep_of = None
        for rep_name, rep_col in reps:
            if feature_distance(col, rep_col) < threshold:
                rep_of = rep_name
                break
        is_int = interesting(col, threshold)
        is_distinct = is_int and rep_of is None
        if is_distinct:
            reps.append((name, col))
        flags.append(
            FeatureFlags(
                name=name,
                interesting=is_int,
                distinct=is_distinct,
                representative_of=rep_of,
            )
        )
    return len(reps), flags


def scatter_g(columns, n_examples: int) -> float:
    """Average fraction of indistinguishable examples under the given columns.

    Partition the examples by agreement on every column and return
    sum_r |P_r|^2 / N^2; 1 when no columns are given.
    """
    if n_examples < 1:
        raise InvalidParameter("need at least one example")
    cols = [np.asarray(c, dtype=np.uint8) for c in columns]
    if not cols:
        return 1.0
    stacked = np.stack(cols, axis=1)
    if stacked.shape[0] != n_examples:
        raise InvalidParameter("columns must have one entry per example")
    _, counts = np.unique(stacked, axis=0, return_counts=True)
    return float((counts.astype(np.float64) ** 2).sum() / n_examples**2)


def g_curve(columns, n_examples: int) -> list[tuple[int, float]]:
    """(k, g) for every prefix of the discovery order, k = 0..len(columns)."""
    return [
        (k, scatter_g(columns[:k], n_examples)) for k in range(len(columns) + 1)
    ]


def metric_report(
    columns, names=None, n_examples: int | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> MetricReport:
    columns = [np.asarray(c, dtype=np.uint8) for c in columns]
    if n_examples is None:
        if not columns:
            raise InvalidParameter("n_examples required when no columns given")
        n_examples = columns[0].size
    count, flags = distinct_interesting_count(columns, names, threshold)
    return MetricReport(
        distinct_interesting=count,
        g_curve=g_curve(columns, n_examples),
        flags=flags,
    )
