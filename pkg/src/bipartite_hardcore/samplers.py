"""Markov chains for the bipartite hardcore model.

Spins are +1 (occupied) and -1 (free).  Every chain keeps ``cnt[v]``, the
number of occupied left neighbours of each right vertex, so a left update
only needs to know how many of its right neighbours would be free without it.

Random streams: a chain owns one ``numpy.random.Generator``.  Field dynamics
splits its seed with ``SeedSequence.spawn(3)`` into the subsampling stream,
the inner-chain stream and the right-completion stream, in that order.
Single-site updates consume one uniform each (see ``_kernels``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import _kernels as K
from .exact import Fugacities, _check_cap, left_log_weights
from .graph import BipartiteGraph

InnerMode = Literal["glauber", "exact"]
SAMPLERS = ("nu", "mu", "block", "field")


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def field_streams(seed) -> tuple[np.random.Generator, ...]:
    """Outer, inner and completion generators for field dynamics."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return tuple(np.random.default_rng(c) for c in ss.spawn(3))


@dataclass
class ChainState:
    spins_left: np.ndarray
    cnt: np.ndarray
    rng: np.random.Generator
    spins_right: np.ndarray | None = None
    step: int = 0

    @classmethod
    def initial(cls, g: BipartiteGraph, seed=None, spins_left=None,
                two_sided: bool = False) -> "ChainState":
        """All -1 unless ``spins_left`` is given; the right side starts all -1."""
        if spins_left is None:
            sl = -np.ones(g.n_left, dtype=np.int8)
        else:
            sl = np.asarray(spins_left, dtype=np.int8).copy()
            if sl.shape != (g.n_left,) or not np.all(np.abs(sl) == 1):
                raise ValueError("spins_left must be a +-1 vector over L")
        cnt = np.zeros(g.n_right, dtype=np.int64)
        lp, li, _, _ = g.csr()
        K.recount(lp, li, sl, cnt)
        sr = -np.ones(g.n_right, dtype=np.int8) if two_sided else None
        return cls(sl, cnt, make_rng(seed), sr)

    def check(self, g: BipartiteGraph) -> None:
        """Raise if the counters or the independence constraint are violated."""
        for v, nbrs in enumerate(g.adj_right):
            want = sum(1 for u in nbrs if self.spins_left[u] > 0)
            if self.cnt[v] != want:
                raise AssertionError(f"cnt[{v}]={self.cnt[v]}, expected {want}")
            if self.spins_right is not None and self.spins_right[v] > 0 and want:
                raise AssertionError(f"right vertex {v} occupied next to an occupied vertex")


@dataclass(frozen=True)
class FieldDynamicsParams:
    theta: float
    T: int
    m: int = 1
    inner_mode: InnerMode = "glauber"

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.inner_mode not in ("glauber", "exact"):
            raise ValueError(f"unknown inner mode {self.inner_mode!r}")
        if self.inner_mode == "glauber" and self.m < 1:
            raise ValueError("m must be at least 1 for the Glauber inner chain")

    @classmethod
    def practical(cls, g: BipartiteGraph, eps: float = 0.01, theta: float = 0.5,
                  inner_mode: InnerMode = "glauber") -> "FieldDynamicsParams":
        n = g.n_left
        return cls(theta, math.ceil(10 * math.log(1 / eps)),
                   math.ceil(21 * n * math.log(max(2, n))), inner_mode)


@dataclass(frozen=True)
class PaperParameters:
    """Parameters from the mixing-time analysis; ``T`` is usually astronomical."""

    theta: float
    log_T: float
    T: float
    m: int
    C: float
    log_clamped: bool
    theoretical: bool = field(default=True)

    def as_dict(self) -> dict:
        return {"theta": self.theta, "log_T": self.log_T, "T": self.T, "m": self.m,
                "C": self.C, "log_clamped": self.log_clamped,
                "theoretical": self.theoretical}


def paper_parameters(g: BipartiteGraph, f: Fugacities, delta: float, eps: float,
                     n: int | None = None) -> PaperParameters:
    """``theta = lam / (C e^9 Delta log n)``, ``T = theta^(-1e5 C^5 / delta) log(n log C / (eps^2 / 2))``,
    ``m = ceil(log(4T / eps) / log n) * 21 n log n`` with ``C = (1 + lam)^Delta``.

    ``n`` defaults to ``|L|``.  The inner log of ``T`` is clamped at 1 when
    smaller, and ``log_clamped`` records it.
    """
    n = g.n_left if n is None else n
    Delta = g.max_deg_left
    if n < 2:
        raise ValueError("need n >= 2")
    if not (0 < delta < 1 and 0 < eps < 1):
        raise ValueError("delta and eps must lie in (0, 1)")
    C = (1 + f.lam) ** Delta
    theta = f.lam / (C * math.exp(9) * Delta * math.log(n))
    inner = math.log(n * math.log(C) / (eps ** 2 / 2)) if C > 1 else -math.inf
    clamped = inner < 1
    inner = max(inner, 1.0)
    log_T = 1e5 * C ** 5 / delta * -math.log(theta) + math.log(inner)
    T = math.exp(log_T) if log_T < 709 else math.inf
    rounds = math.ceil((math.log(4 / eps) + log_T) / math.log(n))
    m = math.ceil(rounds * 21 * n * math.log(n))
    return PaperParameters(theta, log_T, T, m, C, clamped)


def nu_probs(g: BipartiteGraph, f: Fugacities) -> np.ndarray:
    """Pr[+1] for a left vertex with ``k`` free right neighbours, ``k = 0..Delta``."""
    k = np.arange(g.max_deg_left + 1)
    return f.lam / (f.lam + np.exp(k * np.log1p(f.alpha)))


def free_count(state: ChainState, g: BipartiteGraph, u: int) -> int:
    """Right neighbours of ``u`` with no occupied left neighbour other than ``u``."""
    own = 1 if state.spins_left[u] > 0 else 0
    return sum(1 for v in g.adj_left[u] if state.cnt[v] - own == 0)


def nu_update_probability(state: ChainState, g: BipartiteGraph, f: Fugacities, u: int) -> float:
    """``lam / (lam + (1 + alpha)**free_count)``."""
    return f.lam / (f.lam + (1 + f.alpha) ** free_count(state, g, u))


def glauber_nu_run(state: ChainState, g: BipartiteGraph, f: Fugacities,
                   n_steps: int) -> ChainState:
    lp, li, _, _ = g.csr()
    K.nu_steps(lp, li, state.spins_left, state.cnt, nu_probs(g, f), n_steps, state.rng)
    state.step += n_steps
    return state


def glauber_nu_step(state: ChainState, g: BipartiteGraph, f: Fugacities) -> ChainState:
    return glauber_nu_run(state, g, f, 1)


def _need_right(state: ChainState) -> np.ndarray:
    if state.spins_right is None:
        raise ValueError("two-sided chain needs spins_right")
    return state.spins_right


def glauber_mu_run(state: ChainState, g: BipartiteGraph, f: Fugacities,
                   n_steps: int) -> ChainState:
    sr = _need_right(state)
    lp, li, rp, ri = g.csr()
    K.mu_steps(lp, li, rp, ri, state.spins_left, sr, state.cnt,
               f.lam / (1 + f.lam), f.alpha / (1 + f.alpha), n_steps, state.rng)
    state.step += n_steps
    return state


def glauber_mu_step(state: ChainState, g: BipartiteGraph, f: Fugacities) -> ChainState:
    return glauber_mu_run(state, g, f, 1)


def block_dynamics_run(state: ChainState, g: BipartiteGraph, f: Fugacities,
                       n_steps: int) -> ChainState:
    sr = _need_right(state)
    lp, li, _, _ = g.csr()
    K.block_steps(lp, li, state.spins_left, sr, state.cnt, nu_probs(g, f),
                  f.alpha / (1 + f.alpha), n_steps, state.rng)
    state.step += n_steps
    return state


def block_dynamics_step(state: ChainState, g: BipartiteGraph, f: Fugacities) -> ChainState:
    return block_dynamics_run(state, g, f, 1)


def right_counts(g: BipartiteGraph, spins_left) -> np.ndarray:
    cnt = np.zeros(g.n_right, dtype=np.int64)
    lp, li, _, _ = g.csr()
    K.recount(lp, li, np.asarray(spins_left, dtype=np.int8), cnt)
    return cnt


def complete_right(g: BipartiteGraph, f: Fugacities, spins_left,
                   rng) -> np.ndarray:
    """Draw R given L: each free right vertex is +1 with probability ``alpha / (1 + alpha)``."""
    cnt = right_counts(g, spins_left)
    coins = make_rng(rng).random(g.n_right)
    return np.where((cnt == 0) & (coins < f.alpha / (1 + f.alpha)), 1, -1).astype(np.int8)


class TiltedConditional:
    """Exact sampler for the tilted left measure with a set ``S`` pinned to -1.

    Cumulative tables are cached per pinned mask.
    """

    def __init__(self, g: BipartiteGraph, f: Fugacities, theta: float):
        _check_cap(g.n_left, "n_left")
        self.n = g.n_left
        self.logw = left_log_weights(g, f.tilted(theta))
        self.configs = np.arange(1 << self.n, dtype=np.int64)
        self._cdf: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def table(self, s_mask: int) -> tuple[np.ndarray, np.ndarray]:
        hit = self._cdf.get(s_mask)
        if hit is None:
            keep = self.configs[(self.configs & s_mask) == 0]
            w = np.exp(self.logw[keep] - self.logw[keep].max())
            cdf = np.cumsum(w)
            cdf /= cdf[-1]
            hit = (keep, cdf)
            self._cdf[s_mask] = hit
        return hit

    def draw(self, s_masks: np.ndarray, u: np.ndarray) -> np.ndarray:
        """One configuration per entry of ``s_masks`` using uniforms ``u``."""
        out = np.empty_like(s_masks)
        for s in np.unique(s_masks):
            sel = s_masks == s
            keep, cdf = self.table(int(s))
            idx = np.minimum(np.searchsorted(cdf, u[sel], side="right"), len(cdf) - 1)
            out[sel] = keep[idx]
        return out


def _field_exact_curve(g, f, p: FieldDynamicsParams, times, n_reps, outer, inner):
    """Left masks after each of ``times`` outer rounds, all runs advanced together."""
    sampler = TiltedConditional(g, f, p.theta)
    bits = 1 << np.arange(g.n_left, dtype=np.int64)
    x = np.zeros(n_reps, dtype=np.int64)
    out = np.empty((len(times), n_reps), dtype=np.int64)
    done = 0
    for k, t in enumerate(times):
        for _ in range(t - done):
            coins = outer.random((n_reps, g.n_left))
            unocc = (x[:, None] & bits) == 0
            s_masks = ((unocc & (coins < 1 - p.theta)) * bits).sum(axis=1)
            x = sampler.draw(s_masks, inner.random(n_reps))
        done = t
        out[k] = x
    return out


def _field_curve(g, f, p, times, n_reps, outer, inner):
    if p.inner_mode == "exact":
        return _field_exact_curve(g, f, p, times, n_reps, outer, inner)
    lp, li, _, _ = g.csr()
    return K.field_curve(lp, li, g.n_left, g.n_right, nu_probs(g, f.tilted(p.theta)),
                         p.theta, p.m, times, n_reps, outer, inner)


def field_curve(g: BipartiteGraph, f: Fugacities, p: FieldDynamicsParams,
                times, n_reps: int, seed) -> np.ndarray:
    """Left masks of ``n_reps`` field-dynamics runs, recorded after each of ``times`` rounds."""
    outer, inner, _ = field_streams(seed)
    return _field_curve(g, f, p, _check_times(times), n_reps, outer, inner)


def masks_to_spins(masks: np.ndarray, n: int) -> np.ndarray:
    bits = (np.asarray(masks, dtype=np.int64)[:, None] >> np.arange(n)) & 1
    return (2 * bits - 1).astype(np.int8)


def field_dynamics_batch(g: BipartiteGraph, f: Fugacities, p: FieldDynamicsParams,
                         n_runs: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Full configurations ``(left, right)`` of ``n_runs`` independent runs."""
    outer, inner, comp = field_streams(seed)
    masks = _field_curve(g, f, p, _check_times([p.T]), n_runs, outer, inner)[0]
    left = masks_to_spins(masks, g.n_left)
    right = np.stack([complete_right(g, f, row, comp) for row in left]) \
        if n_runs else np.empty((0, g.n_right), dtype=np.int8)
    return left, right


def field_dynamics_run(g: BipartiteGraph, f: Fugacities, p: FieldDynamicsParams,
                       seed) -> ChainState:
    """One run from all -1; returns the full configuration as a two-sided state."""
    left, right = field_dynamics_batch(g, f, p, 1, seed)
    state = ChainState.initial(g, np.random.default_rng(seed), spins_left=left[0])
    state.spins_right = right[0]
    state.step = p.T
    return state


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=np.int64)
    if t.ndim != 1 or len(t) == 0 or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("times must be a nonempty strictly increasing list of nonnegative integers")
    return t


def chain_curve(chain: str, g: BipartiteGraph, f: Fugacities, times, n_reps: int,
                seed, field_params: FieldDynamicsParams | None = None) -> np.ndarray:
    """Left masks of ``n_reps`` chains from all -1, shape ``(len(times), n_reps)``.

    For ``nu``, ``mu`` and ``block`` times count single-site updates; for
    ``field`` they count outer rounds.
    """
    t = _check_times(times)
    if chain == "field":
        if field_params is None:
            raise ValueError("field chain needs FieldDynamicsParams")
        return field_curve(g, f, field_params, t, n_reps, seed)
    rng = make_rng(seed)
    lp, li, rp, ri = g.csr()
    if chain == "nu":
        return K.nu_curve(lp, li, g.n_left, g.n_right, nu_probs(g, f), t, n_reps, rng)
    if chain in ("mu", "block"):
        return K.two_side_curve(lp, li, rp, ri, g.n_left, g.n_right, nu_probs(g, f),
                                f.lam / (1 + f.lam), f.alpha / (1 + f.alpha),
                                chain == "block", t, n_reps, rng)
    raise ValueError(f"unknown chain {chain!r}")


def sample(g: BipartiteGraph, f: Fugacities, sampler: str, n_samples: int, seed,
           steps: int | None = None,
           field_params: FieldDynamicsParams | None = None) -> tuple[np.ndarray, np.ndarray | None]:
    """Independent samples, each from its own chain started at all -1.

    Returns ``(left, right)`` spin arrays; ``right`` is ``None`` for ``nu``.
    """
    if sampler == "field":
        p = field_params or FieldDynamicsParams.practical(g)
        return field_dynamics_batch(g, f, p, n_samples, seed)
    if steps is None:
        steps = FieldDynamicsParams.practical(g).m
    rng = make_rng(seed)
    lp, li, rp, ri = g.csr()
    left = np.empty((n_samples, g.n_left), dtype=np.int8)
    right = None if sampler == "nu" else np.empty((n_samples, g.n_right), dtype=np.int8)
    probs = nu_probs(g, f)
    for i in range(n_samples):
        st = ChainState.initial(g, rng, two_sided=sampler != "nu")
        if sampler == "nu":
            K.nu_steps(lp, li, st.spins_left, st.cnt, probs, steps, rng)
        elif sampler == "mu":
            K.mu_steps(lp, li, rp, ri, st.spins_left, st.spins_right, st.cnt,
                       f.lam / (1 + f.lam), f.alpha / (1 + f.alpha), steps, rng)
        elif sampler == "block":
            K.block_steps(lp, li, st.spins_left, st.spins_right, st.cnt, probs,
                          f.alpha / (1 + f.alpha), steps, rng)
        else:
            raise ValueError(f"unknown sampler {sampler!r}")
        left[i] = st.spins_left
        if right is not None:
            right[i] = st.spins_right
    return left, right


def format_samples(left: np.ndarray, right: np.ndarray | None, header: dict) -> str:
    """'#' metadata lines, then one sample per line: L spins, then R spins."""
    lines = [f"# {k}: {v}" for k, v in header.items()]
    for i in range(len(left)):
        row = [str(int(s)) for s in left[i]]
        if right is not None:
            row += [str(int(s)) for s in right[i]]
        lines.append(" ".join(row))
    return "\n".join(lines) + "\n"
