"""Reduction of left-degree-2 instances to a ferromagnetic Ising model on R.

When every left vertex has at most two neighbours, summing out L leaves a
pairwise model on R.  Two right vertices interact through the ``j`` left
vertices they share, and a right vertex gets a field from the ``k`` left
vertices that see only it.  After a change of basis the weight of
``sigma in {-1, +1}^R`` is::

    prod_{monochromatic e} beta*_e  *  prod_{sigma_v = -1} lambda*_v

with ``beta*_e = (1 + lam_L)**(j_e / 2)`` and
``lambda*_v = (1 + lam_L)**(k_v + sum_e j_e / 2) / lam_R``.

Vertices whose field is below 1 are removed so the rest has consistent
fields.  An isolated vertex is sampled on its own.  A vertex ``v`` with a
single neighbour ``u`` is summed out, which multiplies ``lambda*_u`` by
``(1 + beta* lambda*_v) / (beta* + lambda*_v)``.  Removals cascade and are
logged so that a sample of the reduced model can be extended back to R.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._format import to_json
from .exact import ExactDistribution, Fugacities, _check_cap, dist_side
from .graph import BipartiteGraph


@dataclass
class Removal:
    vertex: int
    rule: str  # "isolated" or "degree1-folded"
    lambda_star: float
    neighbor: int | None = None
    beta_star: float | None = None

    def as_dict(self) -> dict:
        return {"vertex": self.vertex, "rule": self.rule, "lambda_star": self.lambda_star,
                "neighbor": self.neighbor, "beta_star": self.beta_star}


@dataclass
class IsingInstance:
    n_right: int
    lam_left: float
    lam_right: float
    vertices: list[int]
    beta_star: dict[tuple[int, int], float]
    lambda_star: dict[int, float]
    log: list[Removal] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return all(x >= 1.0 for x in self.lambda_star.values())

    @property
    def ferromagnetic(self) -> bool:
        return all(b >= 1.0 for b in self.beta_star.values())

    def as_dict(self) -> dict:
        return {
            "n_right": self.n_right, "lam_left": self.lam_left, "lam_right": self.lam_right,
            "vertices": self.vertices,
            "edges": [{"u": u, "v": v, "beta_star": b}
                      for (u, v), b in sorted(self.beta_star.items())],
            "fields": [{"v": v, "lambda_star": self.lambda_star[v]} for v in self.vertices],
            "removals": [r.as_dict() for r in self.log],
            "consistent": self.consistent,
        }

    def to_json(self) -> str:
        return to_json(self.as_dict())


def couplings(g: BipartiteGraph) -> tuple[dict[tuple[int, int], int], list[int]]:
    """``j_e`` for every pair of right vertices sharing a left neighbour, and ``k_v``."""
    if g.max_deg_left > 2:
        raise ValueError(f"left degree {g.max_deg_left} exceeds 2")
    j: dict[tuple[int, int], int] = {}
    k = [0] * g.n_right
    for nbrs in g.adj_left:
        if len(nbrs) == 1:
            k[nbrs[0]] += 1
        elif len(nbrs) == 2:
            j[nbrs] = j.get(nbrs, 0) + 1
    return j, k


def reduce(g: BipartiteGraph, lam: float, lam_right: float | None = None,
           allow_unequal: bool = False) -> IsingInstance:
    """Build the Ising instance for fugacity ``lam`` on both sides.

    ``lam_right`` different from ``lam`` is accepted only with
    ``allow_unequal``; the fields are then no longer guaranteed consistent.
    """
    lam_right = lam if lam_right is None else lam_right
    if lam_right != lam and not allow_unequal:
        raise ValueError("unequal fugacities need allow_unequal=True")
    Fugacities(lam, lam_right)
    j, k = couplings(g)
    base = 1.0 + lam
    beta = {e: base ** (je / 2) for e, je in j.items()}
    expo = [float(kv) for kv in k]
    for (a, b), je in j.items():
        expo[a] += je / 2
        expo[b] += je / 2
    fields = {v: base ** expo[v] / lam_right for v in range(g.n_right)}
    nbrs: dict[int, set[int]] = {v: set() for v in range(g.n_right)}
    for a, b in j:
        nbrs[a].add(b)
        nbrs[b].add(a)

    log: list[Removal] = []
    alive = set(range(g.n_right))
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            if not nbrs[v]:
                log.append(Removal(v, "isolated", fields[v]))
            elif len(nbrs[v]) == 1 and fields[v] < 1.0:
                (u,) = nbrs[v]
                e = (min(u, v), max(u, v))
                b, lv = beta[e], fields[v]
                log.append(Removal(v, "degree1-folded", lv, u, b))
                fields[u] *= (1.0 + b * lv) / (b + lv)
                nbrs[u].discard(v)
                del beta[e]
            else:
                continue
            alive.discard(v)
            nbrs[v].clear()
            changed = True
    vertices = sorted(alive)
    return IsingInstance(g.n_right, lam, lam_right, vertices, beta,
                         {v: fields[v] for v in vertices}, log)


def ising_gibbs_exact(inst: IsingInstance) -> ExactDistribution:
    """Exact Gibbs distribution on the surviving vertices.

    Bit ``i`` of a configuration is set iff ``inst.vertices[i]`` has spin +1.
    """
    n = len(inst.vertices)
    _check_cap(n, "ising vertices")
    pos = {v: i for i, v in enumerate(inst.vertices)}
    configs = np.arange(1 << n, dtype=np.int64)
    logw = np.zeros(len(configs))
    for v, lv in inst.lambda_star.items():
        logw += np.log(lv) * (((configs >> pos[v]) & 1) == 0)
    for (a, b), be in inst.beta_star.items():
        same = ((configs >> pos[a]) & 1) == ((configs >> pos[b]) & 1)
        logw += np.log(be) * same
    w = np.exp(logw - logw.max())
    return ExactDistribution("ising", n, configs, w / w.sum())


def reconstruct(inst: IsingInstance) -> ExactDistribution:
    """Distribution on all of R: the Ising law extended through the removal log."""
    dist = ising_gibbs_exact(inst)
    bit = {v: 1 << v for v in range(inst.n_right)}
    configs = np.zeros(len(dist.configs), dtype=np.int64)
    for i, v in enumerate(inst.vertices):
        configs |= ((dist.configs >> i) & 1) << v
    probs = dist.probs.copy()
    for r in reversed(inst.log):
        if r.rule == "isolated":
            p_up = np.full(len(configs), 1.0 / (1.0 + r.lambda_star))
        else:
            u_up = (configs & bit[r.neighbor]) != 0
            w_up = np.where(u_up, r.beta_star, 1.0)
            w_dn = r.lambda_star * np.where(u_up, 1.0, r.beta_star)
            p_up = w_up / (w_up + w_dn)
        configs = np.concatenate([configs | bit[r.vertex], configs])
        probs = np.concatenate([probs * p_up, probs * (1.0 - p_up)])
    order = np.argsort(configs)
    return ExactDistribution("R", inst.n_right, configs[order], probs[order])


def verify_reduction(g: BipartiteGraph, lam: float, inst: IsingInstance) -> float:
    """Largest pointwise gap between the right marginal and the reconstructed Ising law."""
    if lam != inst.lam_left:
        raise ValueError(f"instance was built for lam={inst.lam_left}, not {lam}")
    target = dist_side(g, Fugacities(inst.lam_left, inst.lam_right), "R")
    got = reconstruct(inst)
    full = np.zeros(1 << g.n_right)
    full[got.configs] = got.probs
    want = np.zeros(1 << g.n_right)
    want[target.configs] = target.probs
    return float(np.abs(full - want).max())
