"""Closed-form query-complexity bounds used by the reproduction suites.

All logarithms are natural. Quantities that need a branching bound, a failure
probability, or a product model are left as None when the inputs do not
supply them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .model import (
    IndependentSpec,
    identifiability_tau,
    pair_elicit_rate,
    triple_elicit_rate,
)


@dataclass
class BoundTable:
    m: int
    # hierarchical, non-adaptive lower bounds
    random_lb_any: float | None = None       # M^2 / 12 queries for success 1/2
    random_lb_generalist: float | None = None  # M^3 / 24
    # hybrid exploration budgets
    theta_single: float | None = None        # 3 D^2 ln(1/delta)
    theta_full: float | None = None          # 3 D^2 ln(M/delta)
    hybrid_query_bound: float | None = None  # N + M * theta_full (N unknown -> None)
    # independent model
    adaptive_triple_ub: float | None = None  # sum M_j / q_j, q = 3p^2(1-p)
    adaptive_pair_ub: float | None = None    # same with q = 2p(1-p)
    nonadaptive_lb: float | None = None      # (1-q_max) / prod (1-q_i)^{M_i}
    last_feature_rate: float | None = None   # q_M * prod_{i<M} (1-q_i)
    tau: tuple[float, ...] | None = None
    tau_min: float | None = None
    sample_size_bound: float | None = None   # ln(1/tau_min) / tau_min

    def to_json_dict(self) -> dict:
        d = asdict(self)
        if d["tau"] is not None:
            d["tau"] = list(d["tau"])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def compute_bounds(
    m: int | None = None,
    spec: IndependentSpec | None = None,
    d: int | None = None,
    delta: float | None = None,
    n: int | None = None,
) -> BoundTable:
    """Evaluate every bound the inputs make applicable.

    Give ``m`` alone for the hierarchical bounds, ``spec`` for the
    independent-model bounds, and ``d``/``delta`` for exploration budgets.
    """
    if m is None and spec is None:
        raise ValueError("need a feature count or an independent spec")
    if spec is not None:
        m = spec.n_features
    table = BoundTable(m=m)
    table.random_lb_any = m * m / 12.0
    table.random_lb_generalist = m**3 / 24.0
    if d is not None and delta is not None:
        table.theta_single = 3.0 * d * d * math.log(1.0 / delta)
        table.theta_full = 3.0 * d * d * math.log(m / delta)
        if n is not None:
            table.hybrid_query_bound = n + m * table.theta_full
    if spec is not None:
        qs = np.array([triple_elicit_rate(p) for p in spec.frequencies])
        qs_pair = np.array([pair_elicit_rate(p) for p in spec.frequencies])
        table.adaptive_triple_ub = float((1.0 / qs).sum())
        table.adaptive_pair_ub = float((1.0 / qs_pair).sum())
        table.nonadaptive_lb = float((1.0 - qs.max()) / np.prod(1.0 - qs))
        table.last_feature_rate = float(qs[-1] * np.prod(1.0 - qs[:-1]))
        taus, tau_min = identifiability_tau(spec)
        table.tau = tuple(float(t) for t in taus)
        table.tau_min = tau_min
        table.sample_size_bound = math.log(1.0 / tau_min) / tau_min
    return table


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return center - half, center + half


def mean_and_se(values) -> tuple[float, float | None]:
    """Sample mean and standard error (None for a single value)."""
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, None
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))
