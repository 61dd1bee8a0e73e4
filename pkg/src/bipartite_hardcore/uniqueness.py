"""Critical thresholds of the bipartite hardcore model.

For fixed ``(d, alpha, delta)`` the tuple ``(lam, d, alpha)`` is delta-unique
for every right branching number ``w`` exactly when ``lam >= lambda_2c``.
``lambda_2c`` is zero when ``alpha`` is at or below
``((1 - delta) / d) * exp(1 + (1 - delta) / d)``; otherwise it is
``lambda_of_x(x_c)`` at the unique solution ``(x_c, w_c)`` of
``T_delta = M_delta = 0``.

At ``delta = 0`` that system has a closed form: ``w_c`` solves
``A(d, w, 0) = alpha``, ``x_c = (d + 1) / (d w_c - 1)`` and
``lambda_2c = A(w_c, d, 0)``.  For ``delta > 0`` the solver locates ``w_c``
as the point where the larger root of ``T_delta`` meets the root of
``M_delta``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Iterable

from scipy.optimize import brentq

from ._format import fmt_float
from .recursion import (
    _M_scaled, _RTOL, _T_scaled, _XTOL, TreeParams, find_fixpoints,
    lambda_of_x, t_delta_minimizer, t_delta_roots,
)

REL_TOL = 1e-9
W_CAP = 1e9
PHASE_HEADER = ("w", "alpha_c", "lambda_c", "lambda_low")


class BracketError(RuntimeError):
    """A root could not be bracketed before the search cap."""


@dataclass
class ThresholdReport:
    d: float
    alpha: float
    delta: float
    branch: str  # "always-unique" or "critical-system"
    w_delta: float | None = None
    x_c: float | None = None
    w_c: float | None = None
    lambda_2c: float = 0.0
    residual_T: float | None = None
    residual_M: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _check_dw(d: float, w: float, delta: float) -> None:
    if not (d > 0 and w > 0):
        raise ValueError("d and w must be positive")
    if d * w <= 1 - delta:
        raise ValueError(f"need d*w > 1 - delta, got d*w={d * w}, 1-delta={1 - delta}")


def log_A(d: float, w: float, delta: float = 0.0) -> float:
    """``log A(d, w, delta)``, written to avoid cancellation at large ``w``."""
    _check_dw(d, w, delta)
    c = (1 - delta) / d
    return math.log(c) + (w + 1) * math.log1p((1 + c) / (w - c))


def A(d: float, w: float, delta: float = 0.0) -> float:
    """``(1 - delta) d**w (w + 1)**(w + 1) / (d w - (1 - delta))**(w + 1)``."""
    return math.exp(log_A(d, w, delta))


def lambda_hat(d: float, w: float) -> float:
    return A(d, w, 0.0)


def closed_form_pair(d: float, w: float) -> tuple[float, float]:
    """``(lambda_c, alpha_c) = (lambda_hat(w, d), lambda_hat(d, w))``."""
    if d < 1 or d * w <= 1:
        raise ValueError(f"need d >= 1 and d*w > 1, got d={d}, w={w}")
    return lambda_hat(w, d), lambda_hat(d, w)


def lambda_c_regular(Delta: int) -> float:
    """Uniqueness threshold of the infinite ``Delta``-regular tree."""
    d = Delta - 1
    return d ** d / (d - 1) ** (d + 1)


def small_alpha_bound(d: float, delta: float = 0.0) -> float:
    """Largest ``alpha`` for which every ``lam`` is delta-unique."""
    c = (1 - delta) / d
    return c * math.exp(1 + c)


def in_small_alpha_branch(d: float, alpha: float, delta: float = 0.0) -> bool:
    c = (1 - delta) / d
    return math.log(alpha) <= math.log(c) + 1 + c


def solve_w_delta(d: float, alpha: float, delta: float = 0.0) -> float:
    """Unique ``w`` with ``A(d, w, delta) = alpha``; ``A`` is decreasing in ``w``."""
    if in_small_alpha_branch(d, alpha, delta):
        raise ValueError(
            f"alpha={alpha} <= {small_alpha_bound(d, delta)!r}: every lambda is delta-unique")
    target = math.log(alpha)
    c = (1 - delta) / d
    f = lambda w: log_A(d, w, delta) - target  # noqa: E731
    lo = c * (1 + 1e-12)
    if f(lo) <= 0:
        lo = c * (1 + 1e-15) + 1e-300
    hi = max(2 * c, 1.0)
    while f(hi) > 0:
        hi *= 2
        if hi > 1e300:
            raise BracketError("w_delta bracket exceeded 1e300")
    return brentq(f, lo, hi, xtol=_XTOL, rtol=_RTOL)


def _rel_T(x: float, p: TreeParams) -> float:
    s = math.exp(-p.w * math.log1p(x))
    scale = (1 - p.delta) * (x + 1) * (p.alpha * s + 1) + p.alpha * p.d * p.w * x * s
    return _T_scaled(x, p) / scale


def _rel_M(x: float, p: TreeParams) -> float:
    s = math.exp(-p.w * math.log1p(x))
    lx = math.log1p(x)
    scale = (p.w * lx * (p.alpha * p.d * s + (1 + x))
             + p.delta * (x + 1) * (p.alpha * s + 1))
    return _M_scaled(x, p) / scale


def x_M(p: TreeParams) -> float:
    """Unique positive root of ``M_delta`` for ``delta > 0``."""
    f = lambda x: _M_scaled(x, p)  # noqa: E731
    lo = 1e-12
    if f(lo) <= 0:
        raise BracketError(f"M_delta not positive at {lo} for {p}")
    hi = 1.0
    while f(hi) >= 0:
        hi *= 2
        if hi > 1e300:
            raise BracketError("M_delta root bracket exceeded 1e300")
    return brentq(f, lo, hi, xtol=_XTOL, rtol=_RTOL)


def x_2(p: TreeParams) -> float:
    """Larger root of ``T_delta``; the minimiser when the roots have merged."""
    roots = t_delta_roots(p)
    if roots:
        return roots[-1]
    y = t_delta_minimizer(p)
    if y is None:
        raise BracketError(f"T_delta has no interior minimiser for {p}")
    return y


def _polish(base: TreeParams, w: float, rel: float = 1e-7) -> float:
    """Refine the crossing with ``T_delta(x_M(w))``, which has a simple zero there.

    ``x_2`` behaves like a square root near merged roots, so the gap alone
    pins ``w_c`` down only to about ``sqrt(eps)`` when ``delta`` is small.
    """
    h = lambda v: _rel_T(x_M(base.with_(w=v)), base.with_(w=v))  # noqa: E731
    a, b = w * (1 - rel), w * (1 + rel)
    try:
        ha, hb = h(a), h(b)
    except (BracketError, ArithmeticError):
        return w
    if ha > 0 > hb:
        return brentq(h, a, b, xtol=_XTOL, rtol=_RTOL)
    return w


def solve_critical_system(d: float, alpha: float, delta: float = 0.0) -> ThresholdReport:
    if in_small_alpha_branch(d, alpha, delta):
        return ThresholdReport(d, alpha, delta, "always-unique")
    w_d = solve_w_delta(d, alpha, delta)
    if delta == 0.0:
        w_c = w_d
        x_c = (d + 1) / (d * w_c - 1)
    else:
        base = TreeParams(d, w_d, 1.0, alpha, delta)
        gap = lambda w: x_2(base.with_(w=w)) - x_M(base.with_(w=w))  # noqa: E731
        # the roots of T_delta merge at w_delta, where x_2 < x_M; for tiny
        # delta the crossing is closer to w_delta than rounding can resolve
        lo, hi = w_d, w_d + max(1.0, w_d)
        if gap(lo) >= 0:
            w_c = w_d
        else:
            while gap(hi) <= 0:
                lo, hi = hi, 2 * hi
                if hi > W_CAP:
                    raise BracketError(f"no crossing of x_2 and x_M below w={W_CAP}")
            w_c = brentq(gap, lo, hi, xtol=_XTOL, rtol=_RTOL)
            w_c = _polish(base, w_c)
        # x_2 = x_M at the crossing; the root of M_delta is the well-conditioned one
        x_c = x_M(base.with_(w=w_c))
    p = TreeParams(d, w_c, 1.0, alpha, delta)
    return ThresholdReport(
        d, alpha, delta, "critical-system", w_delta=w_d, x_c=x_c, w_c=w_c,
        lambda_2c=lambda_of_x(x_c, p), residual_T=_rel_T(x_c, p),
        residual_M=_rel_M(x_c, p) if delta > 0 else
        abs(alpha * d - math.exp((w_c + 1) * math.log1p(x_c))) / (alpha * d))


def is_delta_unique_tuple(lam: float, d: float, alpha: float, w: float,
                          delta: float = 0.0) -> bool:
    """Every fixpoint of ``F`` at this ``w`` has ``F' <= 1 - delta``."""
    return find_fixpoints(TreeParams(d, w, lam, alpha, delta)).delta_unique


def is_delta_unique(lam: float, d: float, alpha: float, delta: float = 0.0) -> bool:
    """Delta-uniqueness for all ``w > 0``, i.e. ``lam >= lambda_2c``."""
    lam_2c = solve_critical_system(d, alpha, delta).lambda_2c
    return lam >= lam_2c * (1 - REL_TOL)


def is_delta_unique_pair(lam: float, d: float, delta: float = 0.0) -> bool:
    return is_delta_unique(lam, d, lam, delta)


def certify_pair_delta(lam: float, d: float, tol: float = 1e-6) -> float:
    """A ``delta`` within ``tol`` below the largest one making ``(lam, d)`` delta-unique.

    A solver failure near ``delta = 1`` (roots beyond float range) counts as
    not unique, so the result is always a safe lower bound; 0 if none.
    """
    def unique(delta: float) -> bool:
        try:
            return is_delta_unique_pair(lam, d, delta)
        except (ArithmeticError, RuntimeError):
            return False

    if not unique(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if unique(mid):
            lo = mid
        else:
            hi = mid
    return lo


def low_temp_threshold(d: float, w: float) -> float:
    """``3 (d + 1)(w + 1) alpha_c(d, w) - 1``, where cluster-expansion samplers start."""
    return 3 * (d + 1) * (w + 1) * closed_form_pair(d, w)[1] - 1


@dataclass(frozen=True)
class PhaseRow:
    w: float
    alpha_c: float
    lambda_c: float
    lambda_low: float

    @property
    def log_lambda_c(self) -> float:
        return math.log(self.lambda_c)

    @property
    def log_lambda_low(self) -> float:
        return math.log(self.lambda_low)


def phase_table(d: float, w_grid: Iterable[float]) -> list[PhaseRow]:
    rows = []
    for w in w_grid:
        lam_c, alpha_c = closed_form_pair(d, w)
        rows.append(PhaseRow(float(w), alpha_c, lam_c, low_temp_threshold(d, w)))
    return rows


def phase_csv(rows: Iterable[PhaseRow]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(PHASE_HEADER)
    for r in rows:
        out.writerow([fmt_float(x) for x in (r.w, r.alpha_c, r.lambda_c, r.lambda_low)])
    return buf.getvalue()
