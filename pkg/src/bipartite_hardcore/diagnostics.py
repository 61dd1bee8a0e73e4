"""Empirical and spectral checks against the exact oracle."""
from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from ._format import fmt_float, to_json
from .exact import (
    ExactDistribution, Fugacities, _check_cap, _influence_from_weights, _pinned_weights,
    dist_side, max_eigenvalue,
)
from .graph import BipartiteGraph
from .samplers import FieldDynamicsParams, chain_curve
from .uniqueness import is_delta_unique_pair, is_delta_unique


def _as_map(p) -> tuple[dict, int | None]:
    if isinstance(p, ExactDistribution):
        return {int(c): float(q) for c, q in zip(p.configs, p.probs)}, p.n_vars
    return {k: float(v) for k, v in dict(p).items()}, None


def tv_distance(p, q) -> float:
    """Half the L1 distance; keys missing on one side count as probability 0.

    Arguments are ``ExactDistribution`` objects or mappings from
    configuration to probability.
    """
    pm, pn = _as_map(p)
    qm, qn = _as_map(q)
    if pn is not None and qn is not None and pn != qn:
        raise ValueError(f"distributions over {pn} and {qn} variables")
    keys = set(pm) | set(qm)
    return 0.5 * math.fsum(abs(pm.get(k, 0.0) - qm.get(k, 0.0)) for k in keys)


def empirical(masks: np.ndarray) -> dict[int, float]:
    vals, counts = np.unique(np.asarray(masks, dtype=np.int64), return_counts=True)
    n = counts.sum()
    return {int(v): c / n for v, c in zip(vals, counts)}


def tv_to_exact(masks: np.ndarray, target: ExactDistribution) -> float:
    """TV between the histogram of left masks and a left-side distribution."""
    hist = np.bincount(np.asarray(masks, dtype=np.int64), minlength=1 << target.n_vars)
    full = np.zeros(1 << target.n_vars)
    full[target.configs] = target.probs
    return 0.5 * float(np.abs(hist / hist.sum() - full).sum())


@dataclass
class MixingCurve:
    chain: str
    start: str
    times: list[int]
    tv: list[float]
    samples: list[int]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        if any(not 0.0 <= t <= 1.0 for t in self.tv):
            raise ValueError("TV estimates must lie in [0, 1]")

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(("t", "tv", "samples"))
        for row in zip(self.times, self.tv, self.samples):
            out.writerow((row[0], fmt_float(row[1]), row[2]))
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {"chain": self.chain, "start": self.start, "times": self.times,
                "tv": self.tv, "samples": self.samples}


REPLICA_BLOCK = 4096


def _block_curve(args):
    return chain_curve(*args)


def replica_masks(chain: str, g: BipartiteGraph, f: Fugacities, times, replicas: int,
                  seed, field_params: FieldDynamicsParams | None = None,
                  jobs: int = 1) -> np.ndarray:
    """Left masks of all replicas, shape ``(len(times), replicas)``.

    Replicas run in blocks of ``REPLICA_BLOCK``, block ``b`` seeded by child
    ``b`` of ``SeedSequence(seed)``, so the result does not depend on ``jobs``.
    """
    sizes = [min(REPLICA_BLOCK, replicas - s) for s in range(0, replicas, REPLICA_BLOCK)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    tasks = [(chain, g, f, times, n, ss, field_params) for n, ss in zip(sizes, seeds)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_block_curve, tasks))
    else:
        parts = [_block_curve(t) for t in tasks]
    return np.concatenate(parts, axis=1) if parts else np.empty((len(times), 0), np.int64)


def mixing_curve(chain: str, g: BipartiteGraph, f: Fugacities, times, replicas: int,
                 seed, field_params: FieldDynamicsParams | None = None,
                 jobs: int = 1) -> MixingCurve:
    """TV to the exact left marginal of ``replicas`` chains started at all -1."""
    target = dist_side(g, f, "L")
    masks = replica_masks(chain, g, f, times, replicas, seed, field_params, jobs)
    tv = [min(1.0, tv_to_exact(row, target)) for row in masks]
    return MixingCurve(chain, "all-minus", [int(t) for t in times], tv,
                       [replicas] * len(tv))


def eta_bound(Delta: int, alpha: float, delta: float) -> float:
    """``(Delta / d) * (1 + alpha)**Delta / delta`` with ``d = Delta - 1``."""
    d = Delta - 1
    if d <= 0 or delta <= 0:
        return math.inf
    return Delta / d * (1 + alpha) ** Delta / delta


@dataclass
class SIReport:
    delta: float
    eta: float
    applicable: bool
    pinnings: list[tuple[dict, float]] = field(default_factory=list)
    global_max: float = -math.inf
    worst: dict | None = None
    passed: bool = field(init=False)

    def __post_init__(self):
        self.refresh()

    def refresh(self) -> None:
        self.passed = self.applicable and self.global_max <= self.eta + 1e-9

    def add(self, pinning: Mapping[int, int], value: float) -> None:
        self.pinnings.append((dict(pinning), value))
        if value > self.global_max:
            self.global_max, self.worst = value, dict(pinning)
        self.refresh()

    def as_dict(self) -> dict:
        return {
            "delta": self.delta, "eta": self.eta, "applicable": self.applicable,
            "verdict": ("pass" if self.passed else "fail") if self.applicable
            else "bound inapplicable",
            "global_max": self.global_max, "worst_pinning": _pin_json(self.worst),
            "pinnings": [{"pinning": _pin_json(p), "max_eigenvalue": v}
                         for p, v in self.pinnings],
        }

    def to_json(self) -> str:
        return to_json(self.as_dict())


def _pin_json(p):
    return None if p is None else {str(k): v for k, v in sorted(p.items())}


def pinnings_up_to(n: int, k: int) -> Iterable[dict[int, int]]:
    """Every partial +-1 assignment on at most ``k`` of ``n`` vertices."""
    for size in range(k + 1):
        for subset in itertools.combinations(range(n), size):
            for signs in itertools.product((-1, 1), repeat=size):
                yield dict(zip(subset, signs))


def si_check(g: BipartiteGraph, f: Fugacities, delta: float,
             policy: str = "all-up-to-k", k: int | None = None,
             Delta: int | None = None) -> SIReport:
    """Largest influence eigenvalue over pinnings, against the bound ``eta``.

    ``Delta`` defaults to ``max(2, max_deg_left)``.  The bound needs
    ``(lam, Delta - 1, alpha)`` to be delta-unique; otherwise the report
    is marked inapplicable (the eigenvalues are still computed).
    """
    Delta = max(2, g.max_deg_left) if Delta is None else Delta
    d = Delta - 1
    if f.lam == f.alpha:
        ok = delta > 0 and is_delta_unique_pair(f.lam, d, delta)
    else:
        ok = delta > 0 and is_delta_unique(f.lam, d, f.alpha, delta)
    rep = SIReport(delta, eta_bound(Delta, f.alpha, delta), ok)
    n = g.n_left
    if policy == "none":
        pins: Iterable[dict] = [{}]
    elif policy == "all-up-to-k":
        _check_cap(n, "n_left")
        pins = pinnings_up_to(n, n - 2 if k is None else min(k, n - 2))
    else:
        raise ValueError(f"unknown pinning policy {policy!r}")
    for pin in pins:
        configs, w = _pinned_weights(g, f, pin)
        index = tuple(u for u in range(n) if u not in pin)
        if len(index) == 0:
            continue
        m = _influence_from_weights(configs, w, index)
        rep.add(pin, max_eigenvalue(m))
    return rep
