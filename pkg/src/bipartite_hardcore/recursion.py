"""Scalar functions of the two-level tree recursion.

``F(x) = lam * (1 + alpha * (1 + x)**-w)**-d`` maps the occupation ratio of
grandchildren to that of the root on a tree whose odd levels branch ``d``
ways and even levels ``w`` ways.  Everything below is built on it: the
fixpoint-derivative test ``T_delta``, the first-order function ``M_delta``,
the inverse map ``lambda_of_x``, and the potential-weighted contraction ``H``
together with its symmetrised form ``U``.

Large ``w`` is routine (the uniqueness sweeps go up to ``w ~ 1e11``) so powers
of ``1 + x`` are always taken as ``exp(w * log1p(x))`` and root finding works
on versions of ``T_delta``/``M_delta`` divided by ``(1 + x)**w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

# brentq stops at xtol + rtol * |x|; a tiny xtol keeps roots near 0 relative-accurate
_XTOL = 1e-300
_RTOL = 4 * np.finfo(float).eps
FLAG_TOL = 1e-9


@dataclass(frozen=True)
class TreeParams:
    d: float
    w: float
    lam: float
    alpha: float
    delta: float = 0.0

    def __post_init__(self):
        if not (self.d > 0 and self.w > 0 and self.lam > 0 and self.alpha > 0):
            raise ValueError(f"d, w, lam, alpha must be positive: {self}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1): {self.delta}")

    def with_(self, **changes) -> "TreeParams":
        return replace(self, **changes)


@dataclass
class FixpointReport:
    fixpoints: list[float]
    derivatives: list[float]
    delta: float
    delta_unique: bool = field(init=False)

    def __post_init__(self):
        self.delta_unique = max(self.derivatives) <= 1.0 - self.delta + FLAG_TOL

    def as_dict(self) -> dict:
        return {"fixpoints": self.fixpoints, "derivatives": self.derivatives,
                "delta": self.delta, "delta_unique": self.delta_unique}


def _inv_pow(x: float, w: float) -> float:
    """``(1 + x)**-w`` without overflow."""
    return math.exp(-w * math.log1p(x))


def F(x: float, p: TreeParams) -> float:
    t = p.alpha * _inv_pow(x, p.w)
    return p.lam * math.exp(-p.d * math.log1p(t))


def dF(x: float, p: TreeParams) -> float:
    t = p.alpha * _inv_pow(x, p.w)
    return p.d * p.w * t / ((1.0 + t) * (1.0 + x)) * F(x, p)


def T_delta(x: float, p: TreeParams) -> float:
    """``(1 - delta)(x + 1)(alpha + (1 + x)**w) - alpha d w x``.

    At a fixpoint of ``F`` the sign of this is the sign of
    ``1 - delta - F'(x)``.
    """
    try:
        pw = math.exp(p.w * math.log1p(x))
    except OverflowError:
        return math.inf
    return (1 - p.delta) * (x + 1) * (p.alpha + pw) - p.alpha * p.d * p.w * x


def M_delta(x: float, p: TreeParams) -> float:
    lx = math.log1p(x)
    try:
        pw = math.exp(p.w * lx)
        big = pw * (1 + x)
    except OverflowError:
        return -math.inf
    return (p.w * lx * (p.alpha * p.d - big)
            + p.delta * (x + 1) * (p.alpha + pw))


def _T_scaled(x: float, p: TreeParams) -> float:
    """``T_delta(x) / (1 + x)**w``; same sign, never overflows."""
    s = _inv_pow(x, p.w)
    return ((1 - p.delta) * (x + 1) * (p.alpha * s + 1)
            - p.alpha * p.d * p.w * x * s)


def _M_scaled(x: float, p: TreeParams) -> float:
    """``M_delta(x) / (1 + x)**w``."""
    s = _inv_pow(x, p.w)
    lx = math.log1p(x)
    return (p.w * lx * (p.alpha * p.d * s - (1 + x))
            + p.delta * (x + 1) * (p.alpha * s + 1))


def lambda_of_x(x: float, p: TreeParams) -> float:
    """The unique fugacity making ``x`` a fixpoint of ``F``; ``p.lam`` is ignored."""
    return x * math.exp(p.d * math.log1p(p.alpha * _inv_pow(x, p.w)))


def _log_lambda_of_x(x: float, p: TreeParams) -> float:
    return math.log(x) + p.d * math.log1p(p.alpha * _inv_pow(x, p.w))


def t_delta_minimizer(p: TreeParams) -> float | None:
    """Minimiser of the strictly convex ``T_delta`` on ``x > 0``, if interior."""
    c = p.alpha * (p.d * p.w - (1 - p.delta)) / ((1 - p.delta) * (1 + p.w))
    if c <= 1.0:
        return None
    return math.expm1(math.log(c) / p.w)


def _grow(f, x0: float, positive: bool, cap: float = 1e300) -> float:
    x = x0
    while (f(x) > 0) != positive:
        x *= 2.0
        if x > cap:
            raise RuntimeError("could not bracket root")
    return x


def t_delta_roots(p: TreeParams, tol: float = 1e-12) -> list[float]:
    """Positive roots of ``T_delta`` in ascending order (zero, one or two)."""
    y = t_delta_minimizer(p)
    if y is None:
        return []
    t_min = _T_scaled(y, p)
    scale = (1 - p.delta) * (y + 1) * (p.alpha * _inv_pow(y, p.w) + 1)
    if t_min > tol * scale:
        return []
    if abs(t_min) <= tol * scale:
        return [y]
    f = lambda x: _T_scaled(x, p)  # noqa: E731
    lo = brentq(f, 0.0, y, xtol=_XTOL, rtol=_RTOL)
    hi_end = _grow(f, max(2.0 * y, 1.0), positive=True)
    hi = brentq(f, y, hi_end, xtol=_XTOL, rtol=_RTOL)
    return [lo, hi]


def find_fixpoints(p: TreeParams) -> FixpointReport:
    """All positive fixpoints of ``F``, with ``F'`` at each.

    ``lambda_of_x`` is increasing, then decreasing, then increasing, with
    turning points at the roots of ``T_0``; each monotone piece holds at most
    one solution of ``lambda_of_x(x) = lam``.  Since ``lambda_of_x(x) >= x``
    every fixpoint lies in ``(0, lam]``.
    """
    turning = t_delta_roots(p.with_(delta=0.0))
    target = math.log(p.lam)
    g = lambda x: _log_lambda_of_x(x, p) - target  # noqa: E731
    edges = [0.0] + [t for t in turning if t < p.lam] + [p.lam]
    roots: list[float] = []
    for a, b in zip(edges[:-1], edges[1:]):
        ga = -math.inf if a == 0.0 else g(a)
        gb = g(b)
        if ga == 0.0:
            roots.append(a)
        if gb == 0.0:
            roots.append(b)
        elif ga * gb < 0:
            roots.append(brentq(g, max(a, 1e-300), b, xtol=_XTOL, rtol=_RTOL))
    roots.sort()
    uniq: list[float] = []
    for r in roots:
        if not uniq or abs(r - uniq[-1]) > 1e-9 * (1 + r):
            uniq.append(r)
    if not uniq:
        raise RuntimeError(f"no fixpoint found for {p}")
    return FixpointReport(uniq, [dF(x, p) for x in uniq], p.delta)


def psi(x: float) -> float:
    if x <= 0:
        raise ValueError("psi is defined for x > 0")
    return x / ((x + 1) * math.log1p(x))


def phi(x: float) -> float:
    if x <= 0:
        raise ValueError("phi is defined for x > 0")
    return 1.0 / ((x + 1) * math.log1p(x))


def H(x: float, p: TreeParams) -> float:
    """``phi(F(x)) / phi(x) * F'(x)``; zero at ``x = 0``."""
    if x == 0.0:
        return 0.0
    fx = F(x, p)
    return (x + 1) * math.log1p(x) / ((1 + fx) * math.log1p(fx)) * dF(x, p)


def U(z: float, lam: float, d: float, alpha: float) -> float:
    """Symmetrised contraction bound on ``z in [1, 1 + alpha]``."""
    if z - 1.0 < 1e-300 or z >= 1.0 + alpha:
        return 0.0
    q = lam * z ** -d
    return (q / ((1 + q) * math.log1p(q)) * d * (z - 1) / z
            * math.log(alpha / (z - 1)))


def z_of_x(x: float, p: TreeParams) -> float:
    """Change of variables under which ``U(z) == H(x)``."""
    return 1.0 + p.alpha * _inv_pow(x, p.w)


def contraction_sup(lam: float, d: float, alpha: float,
                    grid: int = 2000, width: float = 1e-12) -> tuple[float, float]:
    """``(max U, argmax z)`` over ``[1, 1 + alpha]``: grid scan, then golden section."""
    zs = np.linspace(1.0, 1.0 + alpha, grid)
    vals = np.array([U(z, lam, d, alpha) for z in zs])
    k = int(np.argmax(vals))
    a, c = zs[max(k - 1, 0)], zs[min(k + 1, grid - 1)]
    neg = lambda z: -U(z, lam, d, alpha)  # noqa: E731
    if 0 < k < grid - 1:
        res = minimize_scalar(neg, bracket=(a, zs[k], c), method="golden",
                              tol=width / max(zs[k], 1.0))
        z_best = float(res.x)
    else:
        z_best = float(zs[k])
    best = U(z_best, lam, d, alpha)
    if best < vals[k]:
        return float(vals[k]), float(zs[k])
    return best, z_best
