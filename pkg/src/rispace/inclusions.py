"""Numerical predicates for orderings between generators and exponents.

Asymptotic conditions (``t -> 0`` for concave generators, ``t -> inf`` for
convex ones) are sampled on geometric grids and decided from the trend of the
samples.  Closed-family pairs additionally carry the exact answer.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .generators import (
    ConcaveGenerator,
    ConvexGenerator,
    ExpConvex,
    ExponentFunction,
    PowLogConcave,
    PowLogConvex,
    ScaledConvex,
    delta2_check,
    orlicz_indices,
)

LN2 = math.log(2.0)


class LimitKind(str, enum.Enum):
    TENDS_TO_ZERO = "TendsToZero"
    BOUNDED_AWAY = "BoundedAway"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class LimitVerdict:
    kind: LimitKind
    samples: list
    trend: float
    exact: LimitKind | None = None
    extended: list = field(default_factory=list)

    @property
    def tends_to_zero(self) -> bool:
        return self.kind is LimitKind.TENDS_TO_ZERO

    def to_dict(self):
        return {"kind": self.kind.value, "samples": self.samples, "trend": self.trend,
                "exact": None if self.exact is None else self.exact.value, "extended": self.extended}


def _exact_small_o(phi, psi):
    if isinstance(phi, PowLogConcave) and isinstance(psi, PowLogConcave):
        if phi.alpha > psi.alpha or (phi.alpha == psi.alpha and phi.beta < psi.beta):
            return LimitKind.TENDS_TO_ZERO
        return LimitKind.BOUNDED_AWAY
    return None


def small_o_at_zero(phi: ConcaveGenerator, psi: ConcaveGenerator, kmax: int = 60, run: int = 8,
                    threshold: float = 1e-6) -> LimitVerdict:
    """Decide ``phi(t)/psi(t) -> 0`` as ``t -> 0`` from samples at ``t = 2^-k``.

    If the samples decrease monotonically but stay above ``threshold`` up to
    ``kmax``, sampling continues in log space at ``k = kmax 2^j``.
    """
    k = np.arange(1, kmax + 1, dtype=float)
    logr = phi.log_value(-k * LN2) - psi.log_value(-k * LN2)
    samples = [float(x) for x in np.exp(logr)]
    tail = logr[-run:]
    trend = float(np.polyfit(np.arange(run), tail / LN2, 1)[0])
    decreasing = bool(np.all(np.diff(tail) < 0))
    exact = _exact_small_o(phi, psi)
    extended = []
    if decreasing and math.exp(tail[-1]) < threshold:
        kind = LimitKind.TENDS_TO_ZERO
    elif not decreasing or trend >= -1e-12:
        kind = LimitKind.BOUNDED_AWAY
    else:
        kind = LimitKind.INCONCLUSIVE
        # beyond ~2^40 octaves the log-ratio loses all digits to cancellation
        kk = kmax * 2.0 ** np.arange(1, 35)
        lr = phi.log_value(-kk * LN2) - psi.log_value(-kk * LN2)
        ok = np.isfinite(lr)
        kk, lr = kk[ok], lr[ok]
        for i in range(kk.size):
            extended.append([float(kk[i]), float(np.exp(lr[i]))])
            prev = tail[-1] if i == 0 else lr[i - 1]
            if lr[i] >= prev:
                break
            if math.exp(lr[i]) < threshold:
                kind = LimitKind.TENDS_TO_ZERO
                break
    return LimitVerdict(kind, samples, trend, exact, extended)


# ---------------------------------------------------------------------------
# inclusions between Lorentz and Marcinkiewicz spaces


@dataclass
class InclusionVerdict:
    holds: bool | None
    constant: float | None
    location: float | None = None
    samples: list = field(default_factory=list)
    exact: bool | None = None
    extra: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.holds)

    def to_dict(self):
        return {"holds": self.holds, "constant": self.constant, "location": self.location,
                "samples": self.samples, "exact": self.exact, **self.extra}


def _bounded_ratio_at_zero(num: ConcaveGenerator, den: ConcaveGenerator, kmax=60, window=10):
    """Is ``num/den`` bounded on (0, 1]?  Returns ``(bounded, sup, location, samples)``."""
    k = np.arange(0, kmax + 1, dtype=float)
    t_lin = np.linspace(0.01, 1.0, 100)
    logt = np.concatenate([-k * LN2, np.log(t_lin)])
    logr = num.log_value(logt) - den.log_value(logt)
    dyadic = logr[: k.size]
    tail = dyadic[-window:]
    slope = float(np.polyfit(np.arange(window), tail, 1)[0])
    growing = slope > 1e-9 and bool(np.all(np.diff(tail) > 0))
    samples = [float(x) for x in np.exp(dyadic)]
    if growing:
        return False, math.inf, float(2.0 ** -kmax), samples
    j = int(np.argmax(logr))
    return True, float(np.exp(logr[j])), float(np.exp(logt[j])), samples


def _exact_ratio_bounded(num, den):
    if isinstance(num, PowLogConcave) and isinstance(den, PowLogConcave):
        return num.alpha > den.alpha or (num.alpha == den.alpha and num.beta <= den.beta)
    return None


def lorentz_inclusion(phi: ConcaveGenerator, psi: ConcaveGenerator) -> InclusionVerdict:
    """``Lambda(phi) subset Lambda(psi)``: ``psi <= C phi`` on (0, 1]."""
    ok, C, loc, samples = _bounded_ratio_at_zero(psi, phi)
    return InclusionVerdict(ok, C if ok else None, loc, samples, _exact_ratio_bounded(psi, phi))


def marcinkiewicz_inclusion(phi: ConcaveGenerator, psi: ConcaveGenerator) -> InclusionVerdict:
    """``M(phi) subset M(psi)``: ``phi <= C psi`` on (0, 1]."""
    ok, C, loc, samples = _bounded_ratio_at_zero(phi, psi)
    return InclusionVerdict(ok, C if ok else None, loc, samples, _exact_ratio_bounded(phi, psi))


# ---------------------------------------------------------------------------
# Orlicz


def _growth_key(g):
    if isinstance(g, PowLogConvex):
        return (0, g.p, g.q)
    if isinstance(g, ExpConvex):
        return (1, g.p, 0.0)
    return None


def _exact_orlicz(phi, psi):
    if isinstance(phi, ScaledConvex) and phi.base is psi:
        return True
    kp, ks = _growth_key(phi), _growth_key(psi)
    if kp is None or ks is None:
        return None
    return ks <= kp


def orlicz_inclusion(phi: ConvexGenerator, psi: ConvexGenerator, kmax=60, window=10) -> InclusionVerdict:
    """``psi(t) <= c phi(t)`` for ``t >= T`` (so ``L^phi subset L^psi``).

    Samples ``psi/phi`` at ``t = 2^(k/4)``, ``k/4 = 0..kmax``; the inclusion is
    accepted when the ratio is not growing over the last ``window`` octaves,
    with ``T = 1`` and ``c`` the observed sup on ``[1, 2^kmax]``.
    """
    logt = np.arange(0, 4 * kmax + 1) * LN2 / 4
    with np.errstate(invalid="ignore"):
        logr = psi.log_value(logt) - phi.log_value(logt)
    logr = np.where(np.isnan(logr), 0.0, logr)
    samples = [float(x) for x in np.exp(np.clip(logr[::4], -700, 700))]
    tail = logr[-4 * window:]
    exact = _exact_orlicz(phi, psi)
    if not np.all(np.isfinite(tail)):
        holds = bool(np.all(tail[np.isfinite(tail)] < 0)) if np.any(np.isneginf(tail)) else False
    else:
        slope = float(np.polyfit(np.arange(tail.size) / 4, tail, 1)[0])
        holds = not (slope > 1e-9 and np.all(np.diff(tail) >= 0) and tail[-1] > tail[0])
    if not holds:
        return InclusionVerdict(False, None, float(np.exp(logt[-1])), samples, exact)
    finite = logr[np.isfinite(logr)]
    c = float(np.exp(min(finite.max(), 700))) if finite.size else 0.0
    return InclusionVerdict(True, c, 1.0, samples, exact, {"T": 1.0, "c": c})


@dataclass
class DssResult:
    found: bool
    points: list = field(default_factory=list)
    weights: list = field(default_factory=list)
    n: int = 0
    max_ratio: float | None = None
    searched: int = 0
    warnings: list = field(default_factory=list)

    def __bool__(self):
        return self.found

    def to_dict(self):
        return {"found": self.found, "points": self.points, "weights": self.weights, "n": self.n,
                "max_ratio": self.max_ratio, "searched": self.searched, "warnings": self.warnings}


def _log_sum(weights, logs):
    """``log sum_k a_k exp(logs[:, k])`` row-wise."""
    with np.errstate(divide="ignore"):
        lw = np.log(np.asarray(weights, dtype=float))
    m = logs + lw[None, :]
    M = np.max(m, axis=1)
    with np.errstate(invalid="ignore"):
        return M + np.log(np.sum(np.exp(m - M[:, None]), axis=1))


def _validate(psi, phi, C, pts, weights, logt):
    lx = np.log(pts)
    grid = logt[:, None] + lx[None, :]
    lhs = _log_sum(weights, psi.log_value(grid))
    rhs = math.log(C) + _log_sum(weights, phi.log_value(grid))
    gap = lhs - rhs
    return bool(np.all(gap <= 1e-12)), float(np.exp(np.max(gap)) * C)


def dss_orlicz_search(psi: ConvexGenerator, phi: ConvexGenerator, C: float, budget: int = 600,
                      max_points: int = 4, grid_exponents=range(0, 21, 2), t_max_exp: int = 40) -> DssResult:
    """Bounded search for ``sum a_k psi(t x_k) <= C sum a_k phi(t x_k)`` for all ``t >= 1``.

    Points come from ``x = 2^j``; weights for ``n >= 2`` minimize the worst
    row-normalized violation on ``t = 2^i`` by linear programming.  Every
    returned witness holds on the 10x denser grid ``t = 2^(i/10)``.  A
    ``found=False`` result does not refute the relation.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    notes = []
    for name, g in (("psi", psi), ("phi", phi)):
        d2 = delta2_check(g)
        if d2.verdict is not True:
            notes.append(f"{name} is not certified Delta_2; the separable-space criterion may not apply")
    for w in notes:
        warnings.warn(w, stacklevel=2)
    xs = np.array([2.0**j for j in grid_exponents])
    coarse = np.arange(0, t_max_exp + 1) * LN2
    dense = np.arange(0, 10 * t_max_exp + 1) * LN2 / 10
    searched = 0
    for n in range(1, max_points + 1):
        for combo in itertools.combinations(range(xs.size), n):
            if searched >= budget:
                return DssResult(False, searched=searched, warnings=notes)
            searched += 1
            pts = xs[list(combo)]
            if n == 1:
                w = np.array([1.0])
            else:
                w = _lp_weights(psi, phi, C, pts, coarse)
                if w is None:
                    continue
            ok, worst = _validate(psi, phi, C, pts, w, dense)
            if ok:
                return DssResult(True, [float(p) for p in pts], [float(a) for a in w], n, worst, searched, notes)
    return DssResult(False, searched=searched, warnings=notes)


def _lp_weights(psi, phi, C, pts, logt):
    grid = logt[:, None] + np.log(pts)[None, :]
    lp = psi.log_value(grid)
    lf = math.log(C) + phi.log_value(grid)
    scale = np.maximum(lp.max(axis=1), lf.max(axis=1))
    A = np.exp(lp - scale[:, None]) - np.exp(lf - scale[:, None])
    n = pts.size
    # variables (a_1..a_n, v): minimize v s.t. A a - v <= 0, sum a = 1, a >= 0
    c = np.zeros(n + 1)
    c[-1] = 1.0
    A_ub = np.hstack([A, -np.ones((A.shape[0], 1))])
    res = optimize.linprog(c, A_ub=A_ub, b_ub=np.zeros(A.shape[0]), A_eq=[[1.0] * n + [0.0]], b_eq=[1.0],
                           bounds=[(0, None)] * n + [(None, None)], method="highs")
    if not res.success or res.x[-1] > 0:
        return None
    return np.maximum(res.x[:n], 0.0)


def index_gap(psi: ConvexGenerator, phi: ConvexGenerator, margin: float = 1e-6) -> bool:
    """``q_psi < p_phi`` (upper index of ``psi`` below lower index of ``phi``)."""
    return orlicz_indices(psi).q_inf < orlicz_indices(phi).p_inf - margin


# ---------------------------------------------------------------------------
# exponents


@dataclass
class EssentialRange:
    """A finite union of closed intervals (points are degenerate intervals)."""

    intervals: list

    def contains(self, r: float, tol: float = 1e-12) -> bool:
        return any(lo - tol <= r <= hi + tol for lo, hi in self.intervals)

    __contains__ = contains

    @property
    def lower(self):
        return self.intervals[0][0]

    @property
    def upper(self):
        return self.intervals[-1][1]

    def to_dict(self):
        return {"intervals": [[lo, hi] for lo, hi in self.intervals]}


def essential_range(p: ExponentFunction) -> EssentialRange:
    spans = sorted((min(q.q0, q.q1), max(q.q0, q.q1)) for q in p.pieces)
    merged = [list(spans[0])]
    for lo, hi in spans[1:]:
        if lo <= merged[-1][1] + 1e-15:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return EssentialRange([(float(lo), float(hi)) for lo, hi in merged])


def nakano_inclusion(p: ExponentFunction, q: ExponentFunction, tol: float = 1e-15) -> InclusionVerdict:
    """``L^{q(.)} subset L^{p(.)}`` iff ``p <= q`` a.e., checked piece by piece."""
    cuts = sorted({0.0, 1.0} | set(p.breakpoints().tolist()) | set(q.breakpoints().tolist()))
    for a, b in zip(cuts[:-1], cuts[1:]):
        ends = np.array([a, b])
        pa, pb = p.value(ends[:1], "right")[0], p.value(ends[1:], "left")[0]
        qa, qb = q.value(ends[:1], "right")[0], q.value(ends[1:], "left")[0]
        if pa > qa + tol or pb > qb + tol:
            # the violation has positive measure because both are affine on (a, b)
            where = a if pa - qa >= pb - qb else b
            return InclusionVerdict(False, None, float(where), exact=False)
    return InclusionVerdict(True, 1.0, None, exact=True)
