"""Brute-force ground truth for small bipartite hardcore instances.

Everything here enumerates the left side only.  Given a left configuration
the right spins are conditionally independent, so the cost is
``2**n_left * n_right`` rather than ``2**(n_left + n_right)``.

Configurations are integer bitmasks: bit ``i`` set means vertex ``i`` is
occupied (spin +1).
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from .graph import BipartiteGraph

ENV_ENUM_CAP = "BIHC_ENUM_CAP"
DEFAULT_ENUM_CAP = 20


class EnumerationCapError(ValueError):
    """Raised when an instance is too large to enumerate."""


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def enum_cap() -> int:
    return int(os.environ.get(ENV_ENUM_CAP, DEFAULT_ENUM_CAP))


def _check_cap(n: int, what: str) -> None:
    cap = enum_cap()
    if n > cap:
        raise EnumerationCapError(f"{what}={n} exceeds enumeration cap {cap}")


@dataclass(frozen=True)
class Fugacities:
    """Fugacity ``lam`` on the left side and ``alpha`` on the right side."""

    lam: float
    alpha: float

    def __post_init__(self):
        if not (self.lam > 0 and self.alpha > 0):
            raise ValueError(f"fugacities must be positive, got {self}")

    def tilted(self, theta: float) -> "Fugacities":
        """Left fugacity divided by ``theta``; used by field dynamics."""
        return Fugacities(self.lam / theta, self.alpha)


@dataclass
class ExactDistribution:
    side: str  # "L", "R" or "full"
    n_vars: int
    configs: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.probs.min(initial=0.0) < 0 or abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")

    def as_dict(self) -> dict[str, float]:
        return {bitstring(int(c), self.n_vars): float(p)
                for c, p in zip(self.configs, self.probs)}

    def prob_of(self, config: int) -> float:
        idx = np.searchsorted(self.configs, config)
        if idx < len(self.configs) and self.configs[idx] == config:
            return float(self.probs[idx])
        return 0.0

    def marginals(self) -> np.ndarray:
        """Probability that each variable is occupied."""
        bits = (self.configs[:, None] >> np.arange(self.n_vars)) & 1
        return self.probs @ bits


@dataclass
class InfluenceMatrix:
    index: tuple[int, ...]
    matrix: np.ndarray


def bitstring(mask: int, n: int) -> str:
    """Character ``i`` is '1' iff bit ``i`` of ``mask`` is set."""
    return "".join("1" if (mask >> i) & 1 else "0" for i in range(n))


def spins_to_mask(spins) -> int:
    mask = 0
    for i, s in enumerate(spins):
        if s > 0:
            mask |= 1 << i
    return mask


def mask_to_spins(mask: int, n: int) -> np.ndarray:
    return np.where((mask >> np.arange(n)) & 1, 1, -1).astype(np.int8)


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


@lru_cache(maxsize=64)
def left_log_weights(g: BipartiteGraph, f: Fugacities) -> np.ndarray:
    """Unnormalised log weight of every left configuration.

    ``log w(S) = |S| log lam + sum_v log(1 + alpha) [N(v) & S = 0]``.
    """
    _check_cap(g.n_left, "n_left")
    configs = np.arange(1 << g.n_left, dtype=np.int64)
    logw = _popcount(configs) * np.log(f.lam)
    log1pa = np.log1p(f.alpha)
    for m in g.right_masks():
        logw = logw + log1pa * ((configs & m) == 0)
    logw.flags.writeable = False
    return logw


def _normalised(logw: np.ndarray) -> np.ndarray:
    w = np.exp(logw - logw.max())
    return w / w.sum()


def log_partition_function(g: BipartiteGraph, f: Fugacities) -> float:
    logw = left_log_weights(g, f)
    top = logw.max()
    return float(top + np.log(np.exp(logw - top).sum()))


def partition_function(g: BipartiteGraph, f: Fugacities) -> float:
    """Sum over independent sets of ``lam**|S & L| * alpha**|S & R|``."""
    return float(np.exp(log_partition_function(g, f)))


def dist_side(g: BipartiteGraph, f: Fugacities, side: str = "L") -> ExactDistribution:
    if side == "L":
        p = _normalised(left_log_weights(g, f))
        return ExactDistribution("L", g.n_left, np.arange(len(p), dtype=np.int64), p)
    if side == "R":
        return _dist_right(g, f)
    if side == "full":
        return _dist_full(g, f)
    raise ValueError(f"unknown side {side!r}")


def _blocked_right(g: BipartiteGraph) -> np.ndarray:
    """For every left configuration, bitmask of right vertices with an occupied neighbour."""
    configs = np.arange(1 << g.n_left, dtype=np.int64)
    blocked = np.zeros_like(configs)
    for v, m in enumerate(g.right_masks()):
        blocked |= ((configs & m) != 0).astype(np.int64) << v
    return blocked


def _dist_right(g: BipartiteGraph, f: Fugacities) -> ExactDistribution:
    _check_cap(g.n_right, "n_right")
    p_left = _normalised(left_log_weights(g, f))
    full = (1 << g.n_right) - 1
    free = full & ~_blocked_right(g)
    patterns, inverse = np.unique(free, return_inverse=True)
    p_pattern = np.bincount(inverse, weights=p_left, minlength=len(patterns))
    sigma = np.arange(1 << g.n_right, dtype=np.int64)
    k_sigma = _popcount(sigma)
    q_on = f.alpha / (1.0 + f.alpha)
    q_off = 1.0 / (1.0 + f.alpha)
    probs = np.zeros(len(sigma))
    for pat, pp in zip(patterns, p_pattern):
        ok = (sigma & ~pat) == 0
        k_pat = int(np.bitwise_count(pat))
        probs[ok] += pp * q_on ** k_sigma[ok] * q_off ** (k_pat - k_sigma[ok])
    probs /= probs.sum()
    return ExactDistribution("R", g.n_right, sigma, probs)


def _dist_full(g: BipartiteGraph, f: Fugacities) -> ExactDistribution:
    _check_cap(g.n_left + g.n_right, "n_left + n_right")
    blocked = _blocked_right(g)
    combos = np.arange(1 << (g.n_left + g.n_right), dtype=np.int64)
    s_left = combos & ((1 << g.n_left) - 1)
    s_right = combos >> g.n_left
    valid = (s_right & blocked[s_left]) == 0
    combos = combos[valid]
    logw = (_popcount(s_left[valid]) * np.log(f.lam)
            + _popcount(s_right[valid]) * np.log(f.alpha))
    return ExactDistribution("full", g.n_left + g.n_right, combos, _normalised(logw))


def _pinned_weights(g: BipartiteGraph, f: Fugacities,
                    pinning: Mapping[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Configurations consistent with ``pinning`` and their normalised weights."""
    logw = left_log_weights(g, f)
    configs = np.arange(len(logw), dtype=np.int64)
    on = sum(1 << u for u, s in pinning.items() if s > 0)
    off = sum(1 << u for u, s in pinning.items() if s <= 0)
    if on & off:
        raise ValueError("pinning assigns both spins to a vertex")
    keep = ((configs & on) == on) & ((configs & off) == 0)
    return configs[keep], _normalised(logw[keep])


def conditional_marginal(g: BipartiteGraph, f: Fugacities,
                         pinning: Mapping[int, int], u: int) -> float:
    """Exact probability that left vertex ``u`` is occupied given ``pinning``."""
    if u in pinning:
        raise ValueError(f"vertex {u} is pinned")
    configs, w = _pinned_weights(g, f, pinning)
    return float(w[(configs >> u) & 1 == 1].sum())


def conditional_dist(g: BipartiteGraph, f: Fugacities,
                     pinning: Mapping[int, int]) -> ExactDistribution:
    """Distribution over full left configurations consistent with ``pinning``."""
    configs, w = _pinned_weights(g, f, pinning)
    return ExactDistribution("L", g.n_left, configs, w)


def influence_matrix(g: BipartiteGraph, f: Fugacities,
                     pinning: Mapping[int, int] | None = None) -> InfluenceMatrix:
    pinning = dict(pinning or {})
    index = tuple(u for u in range(g.n_left) if u not in pinning)
    configs, w = _pinned_weights(g, f, pinning)
    return InfluenceMatrix(index, _influence_from_weights(configs, w, index))


def _influence_from_weights(configs: np.ndarray, w: np.ndarray,
                            index: tuple[int, ...]) -> np.ndarray:
    bits = ((configs[:, None] >> np.asarray(index, dtype=np.int64)) & 1).astype(float)
    joint = bits.T @ (w[:, None] * bits)  # joint[i, j] = Pr[i and j]
    p_on = np.diag(joint).copy()
    k = len(index)
    psi = np.zeros((k, k))
    for i in range(k):
        if 0.0 < p_on[i] < 1.0:
            psi[i] = joint[i] / p_on[i] - (p_on - joint[i]) / (1.0 - p_on[i])
        psi[i, i] = 1.0
    return psi


def max_eigenvalue(m, tol: float = 1e-9, max_iter: int = 100_000) -> float:
    """Largest eigenvalue of a matrix with real spectrum, by power iteration.

    The iteration runs on ``m + shift * I`` with a Gershgorin shift that makes
    every eigenvalue nonnegative, so it converges to the largest eigenvalue
    rather than the one of largest magnitude.
    """
    a = np.asarray(m.matrix if isinstance(m, InfluenceMatrix) else m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    radii = np.abs(a).sum(axis=1) - np.abs(np.diag(a))
    shift = max(0.0, -float(np.min(np.diag(a) - radii)))
    b = a + shift * np.eye(n)
    op = b.copy()
    x = np.ones(n) / np.sqrt(n) + np.linspace(0.0, 1e-3, n)
    x /= np.linalg.norm(x)
    residual = np.inf
    for it in range(1, max_iter + 1):
        y = b @ x
        est = float(x @ y)
        residual = float(np.linalg.norm(y - est * x))
        if residual <= tol * max(1.0, abs(est)):
            return est - shift
        z = op @ x
        norm = np.linalg.norm(z)
        if norm == 0.0:
            return -shift
        x = z / norm
        if it % 32 == 0:
            # repeated squaring keeps slow gaps from exhausting max_iter
            op = op @ op
            op /= np.abs(op).max()
    raise ConvergenceError("power iteration did not converge", residual)
