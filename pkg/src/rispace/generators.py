"""Concave generators (class Phi), convex generators (class Psi) and exponents.

Concave generators are functions ``phi`` on [0, 1] with ``phi(0) = 0``, used as
Lorentz/Marcinkiewicz weights.  Convex generators are Orlicz functions on
[0, inf).  Both are closed parametric families so that derivatives, duals and
indices are available in closed form; every family member can be re-checked
on a grid with :meth:`class_certificate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import ConcavityViolation, DescriptorError, DomainError
from .funcrep import (
    MonotoneFunction,
    PiecewiseFunction,
    Segment,
    derivative_terms,
    log_abs_terms,
)
from .quadrature import integrate_cells

LN2 = math.log(2.0)


def _arr(x):
    return np.asarray(x, dtype=float)


def _concave_grid():
    k = np.arange(0, 61)
    return np.unique(np.concatenate([2.0 ** -k, np.linspace(0.01, 1.0, 100)]))


@dataclass
class Certificate:
    """Outcome of a grid check of class membership."""

    ok: bool
    checks: dict = field(default_factory=dict)

    def to_dict(self):
        return {"ok": self.ok, "checks": self.checks}


# ---------------------------------------------------------------------------
# class Phi


class ConcaveGenerator:
    """Base class for increasing concave ``phi`` on [0, 1] with ``phi(0) = 0``."""

    family = "abstract"

    #: limit of phi at 0+ (nonzero only for phi = const on (0, 1])
    jump = 0.0

    def value(self, t):
        raise NotImplementedError

    def deriv(self, t):
        raise NotImplementedError

    def __call__(self, t):
        return self.value(t)

    def log_value(self, logt):
        with np.errstate(divide="ignore"):
            return np.log(self.value(np.exp(_arr(logt))))

    def log_deriv(self, logt):
        with np.errstate(divide="ignore"):
            return np.log(self.deriv(np.exp(_arr(logt))))

    def class_certificate(self, rtol=1e-9) -> Certificate:
        t = _concave_grid()
        v = self.value(t)
        d = self.deriv(t)
        dv = np.diff(v)
        dd = np.diff(d)
        increasing = bool(np.all(dv >= -rtol * np.abs(v[1:])))
        concave = bool(np.all(dd <= rtol * np.maximum(np.abs(d[:-1]), 1e-300)))
        positive = bool(np.all(v > 0))
        return Certificate(
            increasing and concave and positive,
            {"increasing": increasing, "concave": concave, "positive": positive,
             "first_failure": _first_failure(t, dv, dd, rtol, v, d)},
        )

    def to_dict(self) -> dict:
        raise NotImplementedError


def _first_failure(t, dv, dd, rtol, v, d):
    bad = np.nonzero(dv < -rtol * np.abs(v[1:]))[0]
    if bad.size:
        return {"kind": "decreasing", "t": float(t[bad[0]])}
    bad = np.nonzero(dd > rtol * np.maximum(np.abs(d[:-1]), 1e-300))[0]
    if bad.size:
        return {"kind": "convex", "t": float(t[bad[0]])}
    return None


class PowLogConcave(ConcaveGenerator):
    """``phi(t) = c t^alpha (L - ln t)^beta``; ``L = 1`` gives ``ln(e/t)``."""

    family = "powlog"

    def __init__(self, alpha: float, beta: float = 0.0, c: float = 1.0, L: float = 1.0):
        if not (0.0 <= alpha <= 1.0) or c <= 0 or L <= 0:
            raise DescriptorError(f"need 0 <= alpha <= 1, c > 0, L > 0 (got alpha={alpha}, c={c}, L={L})")
        if alpha == 0.0 and beta > 0.0:
            raise DescriptorError("alpha = 0 with beta > 0 is unbounded at 0")
        self.alpha, self.beta, self.c, self.L = float(alpha), float(beta), float(c), float(L)
        self.terms = ((self.c, self.alpha, self.beta),)
        self.dterms = derivative_terms(self.terms)
        self.jump = self.c if (alpha == 0.0 and beta == 0.0) else 0.0

    def __repr__(self):
        return f"PowLogConcave(alpha={self.alpha}, beta={self.beta}, c={self.c})"

    def _eval(self, terms, t):
        t = _arr(t)
        out = np.zeros(t.shape)
        pos = t > 0
        if pos.any():
            la, sg = log_abs_terms(terms, np.log(t[pos]), self.L)
            with np.errstate(over="ignore"):
                out[pos] = sg * np.exp(la)
        return out

    def value(self, t):
        return self._eval(self.terms, t)

    def deriv(self, t):
        out = self._eval(self.dterms, t)
        return out

    def log_value(self, logt):
        return log_abs_terms(self.terms, _arr(logt), self.L)[0]

    def log_deriv(self, logt):
        la, sg = log_abs_terms(self.dterms, _arr(logt), self.L)
        return np.where(sg > 0, la, -np.inf)

    def tilde(self, require_concave: bool = True) -> "PowLogConcave":
        """``t / phi(t)``; raises :class:`ConcavityViolation` if it leaves the class."""
        g = PowLogConcave(1.0 - self.alpha, 0.0 - self.beta, 1.0 / self.c, self.L)
        if require_concave:
            cert = g.class_certificate()
            if not cert.ok:
                raise ConcavityViolation(f"t/phi(t) fails the concave-class check: {cert.checks}")
        return g

    def derivative(self, check: bool = True) -> MonotoneFunction:
        """``phi'`` as a nonincreasing piecewise function on (0, 1].

        With ``check=False`` the closed form is returned even when ``phi``
        fails the class test (e.g. ``t^(1/2) ln(e/t)``, whose derivative turns
        negative near 1 but stays nonincreasing).
        """
        if not self.dterms:
            return MonotoneFunction((), PiecewiseFunction.zero(), degenerate=True)
        cert = self.class_certificate()
        if check and not cert.ok:
            raise ConcavityViolation(f"phi' is not nonincreasing: {cert.checks}")
        seg = Segment(0.0, 1.0, self.dterms, 0.0, 1, self.L)
        return MonotoneFunction((), PiecewiseFunction((seg,)))

    def to_dict(self):
        return {"class": "Phi", "family": "powlog",
                "params": {"alpha": self.alpha, "beta": self.beta, "c": self.c, "L": self.L}}


class TabulatedConcave(ConcaveGenerator):
    """``phi(t) = int_0^t psi'(s) F(s)^(-1/2) ds`` with ``F(s) = int_0^s x* psi'``.

    ``F`` and ``phi`` are tabulated at geometric nodes (``per_octave`` per
    octave down to ``2^-octaves``) together with the breakpoints of ``x*``, and
    interpolated by cubic Hermite splines in log-log coordinates using their
    exact derivatives.  Below the last node both follow power laws whose
    exponents are the log-slopes at the last node.
    """

    family = "tabulated"

    def __init__(self, xstar: MonotoneFunction, psi: ConcaveGenerator, octaves: int = 200, per_octave: int = 32):
        self.xstar, self.psi = xstar, psi
        t = 2.0 ** (-np.arange(octaves * per_octave, -1, -1) / per_octave)
        brk = xstar.breakpoints()
        brk = brk[(brk > t[0]) & (brk < 1.0 - 1e-8)]
        # a second node just right of each breakpoint carries the right derivative
        t = np.unique(np.concatenate([t, brk, brk * (1 + 1e-9)]))
        self.nodes = t
        f = lambda s: xstar.evaluate(s) * psi.deriv(s)
        cells, _ = integrate_cells(f, t[:-1], t[1:], rtol=1e-13)
        # F(t0) from the power law of the integrand near 0
        g0 = f(np.array([t[0], t[1]]))
        slope = math.log(g0[1] / g0[0]) / math.log(t[1] / t[0])
        F0 = t[0] * g0[0] / (1.0 + slope)
        F = F0 + np.concatenate([[0.0], np.cumsum(cells)])
        self.F_nodes = F
        z = np.log(t)
        dF = f(t)
        self._logF = CubicHermiteSpline(z, np.log(F), t * dF / F)
        self._F_tail = (z[0], math.log(F[0]), float(t[0] * dF[0] / F[0]))

        phid = lambda s: psi.deriv(s) * self.F(s) ** -0.5
        cells, _ = integrate_cells(phid, t[:-1], t[1:], rtol=1e-13)
        d0 = phid(np.array([t[0], t[1]]))
        slope = math.log(d0[1] / d0[0]) / math.log(t[1] / t[0])
        P0 = t[0] * d0[0] / (1.0 + slope)
        P = P0 + np.concatenate([[0.0], np.cumsum(cells)])
        self.phi_nodes = P
        dP = phid(t)
        self._logP = CubicHermiteSpline(z, np.log(P), t * dP / P)
        self._P_tail = (z[0], math.log(P[0]), float(t[0] * dP[0] / P[0]))

    def __repr__(self):
        return f"TabulatedConcave(psi={self.psi!r})"

    @staticmethod
    def _log_eval(spline, tail, logt):
        logt = _arr(logt)
        z0, l0, s0 = tail
        return np.where(logt < z0, l0 + s0 * (logt - z0), spline(np.maximum(logt, z0)))

    def log_F(self, logt):
        return self._log_eval(self._logF, self._F_tail, logt)

    def F(self, t):
        t = _arr(t)
        with np.errstate(divide="ignore"):
            return np.where(t > 0, np.exp(self.log_F(np.log(np.maximum(t, 1e-300)))), 0.0)

    def y(self, t):
        """The multiplier ``F(t)^(-1/2)``."""
        return self.F(t) ** -0.5

    def value(self, t):
        t = _arr(t)
        with np.errstate(divide="ignore"):
            return np.where(t > 0, np.exp(self.log_value(np.log(np.maximum(t, 1e-300)))), 0.0)

    def log_value(self, logt):
        return self._log_eval(self._logP, self._P_tail, logt)

    def deriv(self, t):
        return self.psi.deriv(t) * self.y(t)

    def log_deriv(self, logt):
        return self.psi.log_deriv(logt) - 0.5 * self.log_F(logt)

    def to_dict(self):
        return {"class": "Phi", "family": "tabulated",
                "params": {"psi": self.psi.to_dict(),
                           "nodes": [float(x) for x in self.nodes[:: max(1, len(self.nodes) // 256)]],
                           "F(1)": float(self.F_nodes[-1]), "phi(1)": float(self.phi_nodes[-1])}}


# ---------------------------------------------------------------------------
# class Psi


@dataclass
class DeltaTwo:
    """Three-valued Delta_2 verdict with the observed ratios ``psi(2t)/psi(t)``."""

    verdict: bool | None
    sup_ratio: float
    ratios: list
    exact: bool | None = None

    def __bool__(self):
        return bool(self.verdict)

    def to_dict(self):
        return {"verdict": self.verdict, "sup_ratio": self.sup_ratio, "ratios": self.ratios, "exact": self.exact}


@dataclass
class OrliczIndices:
    p_inf: float
    q_inf: float
    exact: bool

    def to_dict(self):
        return {"p_inf": self.p_inf, "q_inf": "inf" if math.isinf(self.q_inf) else self.q_inf, "exact": self.exact}


class ConvexGenerator:
    """Base class for Orlicz functions ``psi`` on [0, inf)."""

    family = "abstract"

    def log_value(self, logy):
        raise NotImplementedError

    def value(self, y):
        y = _arr(y)
        out = np.zeros(y.shape)
        pos = y > 0
        with np.errstate(over="ignore"):
            out[pos] = np.exp(self.log_value(np.log(y[pos])))
        out[np.isinf(y)] = np.inf
        return out

    def __call__(self, y):
        return self.value(y)

    def kinks(self) -> np.ndarray:
        """Arguments where ``psi`` is not analytic (none for smooth families)."""
        return np.empty(0)

    def inverse(self, v: float) -> float:
        """``psi^{-1}(v)`` for ``v > 0`` by bisection in log y."""
        lo, hi = -50.0, 50.0
        target = math.log(v)
        while float(self.log_value(np.array([hi]))[0]) < target:
            hi *= 2
        while float(self.log_value(np.array([lo]))[0]) > target:
            lo *= 2
        for _ in range(200):
            m = 0.5 * (lo + hi)
            if float(self.log_value(np.array([m]))[0]) < target:
                lo = m
            else:
                hi = m
        return math.exp(0.5 * (lo + hi))

    def exact_delta2(self):
        return None

    def exact_indices(self):
        return None

    def class_certificate(self, rtol=1e-9) -> Certificate:
        y = 2.0 ** np.linspace(-20, 60, 321)
        logv = self.log_value(np.log(y))
        v = np.exp(np.minimum(logv, 700))
        zero_ok = bool(float(self.value(np.array([1e-300]))[0]) < 1e-200)
        grows = bool(np.isinf(logv[-1]) or logv[-1] > logv[0] + 10)
        slopes = np.diff(v) / np.diff(y)
        finite = np.isfinite(slopes) & (logv[1:] < 700)
        convex = bool(np.all(np.diff(slopes[finite]) >= -rtol * np.abs(slopes[finite][1:]) - 1e-9))
        return Certificate(zero_ok and grows and convex, {"zero_at_zero": zero_ok, "unbounded": grows, "convex": convex})

    def to_dict(self) -> dict:
        raise NotImplementedError


class PowLogConvex(ConvexGenerator):
    """``psi(y) = y^p ln(e + y)^q`` with ``p >= 1``, ``q >= 0``."""

    family = "powlog"

    def __init__(self, p: float, q: float = 0.0):
        if p < 1 or q < 0:
            raise DescriptorError(f"need p >= 1 and q >= 0 (got p={p}, q={q})")
        self.p, self.q = float(p), float(q)

    def __repr__(self):
        return f"PowLogConvex(p={self.p}, q={self.q})"

    def log_value(self, logy):
        logy = _arr(logy)
        out = self.p * logy
        if self.q:
            out = out + self.q * np.log(np.logaddexp(1.0, logy))
        return out

    def exact_delta2(self):
        return True

    def exact_indices(self):
        return OrliczIndices(self.p, self.p, True)

    def to_dict(self):
        return {"class": "Psi", "family": "powlog", "params": {"p": self.p, "q": self.q}}


class ExpConvex(ConvexGenerator):
    """``psi(y) = exp(y^p) - 1``: violates Delta_2."""

    family = "exp"

    def __init__(self, p: float = 1.0):
        if p < 1:
            raise DescriptorError(f"need p >= 1 (got {p})")
        self.p = float(p)

    def __repr__(self):
        return f"ExpConvex(p={self.p})"

    def log_value(self, logy):
        with np.errstate(over="ignore"):
            w = np.exp(self.p * _arr(logy))
        small = w < 30
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(small, np.log(np.expm1(np.where(small, w, 0.0))), w + np.log1p(-np.exp(-w)))

    def exact_delta2(self):
        return False

    def exact_indices(self):
        return OrliczIndices(math.inf, math.inf, True)

    def to_dict(self):
        return {"class": "Psi", "family": "exp", "params": {"p": self.p}}


class ScaledConvex(ConvexGenerator):
    """``b_n psi(y)`` for ``2^n < y <= 2^(n+1)`` (``n >= 1``), ``psi(y)`` for ``y <= 2``.

    ``b`` holds ``b_1, ..., b_N``; beyond ``2^(N+1)`` the last factor is kept.
    The result is nondecreasing and ``phi(y)/y`` is nondecreasing, but it jumps
    at the dyadic points; :meth:`class_certificate` checks those properties.
    """

    family = "scaled"

    def __init__(self, base: ConvexGenerator, b):
        b = np.asarray(b, dtype=float)
        if b.size == 0 or np.any(b <= 0) or np.any(np.diff(b) < 0):
            raise DescriptorError("scale factors must be positive and nondecreasing")
        self.base, self.b = base, b
        self._logb = np.concatenate([[0.0], np.log(b)])

    def __repr__(self):
        return f"ScaledConvex(base={self.base!r}, N={self.b.size})"

    def factor_index(self, logy):
        n = np.ceil(_arr(logy) / LN2 - 1e-12) - 1
        return np.clip(n, 0, self.b.size).astype(int)

    def log_value(self, logy):
        return self.base.log_value(logy) + self._logb[self.factor_index(logy)]

    def kinks(self):
        return 2.0 ** np.arange(1, self.b.size + 1, dtype=float)

    def exact_delta2(self):
        base = self.base.exact_delta2()
        if base is None:
            return None
        ratio_bounded = bool(np.all(self.b[1:] / self.b[:-1] <= 2.0 + 1e-12))
        return base and ratio_bounded

    def exact_indices(self):
        # beyond the last dyadic block psi is a constant multiple of the base
        return self.base.exact_indices()

    def class_certificate(self, rtol=1e-9) -> Certificate:
        y = 2.0 ** np.linspace(-20, min(60, self.b.size + 3), 641)
        logv = self.log_value(np.log(y))
        nondecreasing = bool(np.all(np.diff(logv) >= -rtol))
        ratio = logv - np.log(y)
        superlinear = bool(np.all(np.diff(ratio) >= -1e-9))
        base = self.base.class_certificate(rtol)
        return Certificate(nondecreasing and superlinear and base.ok,
                           {"nondecreasing": nondecreasing, "psi_over_y_nondecreasing": superlinear,
                            "base": base.checks})

    def to_dict(self):
        return {"class": "Psi", "family": "scaled", "params": {"base": self.base.to_dict(), "b": [float(x) for x in self.b]}}


def delta2_check(g: ConvexGenerator, kmax: int = 60, window: int = 10) -> DeltaTwo:
    """``psi(2t)/psi(t)`` at ``t = 2^k``, ``k = 1..kmax``, with a three-valued verdict."""
    k = np.arange(1, kmax + 1, dtype=float)
    with np.errstate(invalid="ignore"):
        logr = g.log_value((k + 1) * LN2) - g.log_value(k * LN2)
    ratios = [float(x) for x in np.exp(np.minimum(logr, 700))]
    tail = logr[-window:]
    exact = g.exact_delta2()
    if not np.all(np.isfinite(tail)):
        verdict = False
    else:
        trend = np.polyfit(np.arange(window), tail, 1)[0]
        grows = trend > 1e-3 and np.all(np.diff(tail) > 0)
        bounded = trend <= 1e-3 * max(1.0, abs(tail.mean())) and tail.max() <= logr.max() + 1e-12
        spread = tail.max() - tail.min()
        if grows:
            verdict = False
        elif bounded and (spread < 0.05 or np.all(np.abs(np.diff(tail)) <= LN2 + 1e-9)):
            verdict = True
        else:
            verdict = None
    sup = float(np.exp(min(np.nanmax(logr), 700)))
    return DeltaTwo(verdict, sup if verdict is not False else math.inf, ratios, exact)


def orlicz_indices(g: ConvexGenerator, lo_exp: int = 20, hi_exp: int = 60, tol: float = 1e-6,
                   numeric: bool = False) -> OrliczIndices:
    """Orlicz indices at infinity; exact for the closed families.

    The numeric estimate bisects on ``r`` for monotonicity of ``psi(t)/t^r``
    on a geometric grid over ``[2^lo_exp, 2^hi_exp]``.
    """
    if not numeric:
        ex = g.exact_indices()
        if ex is not None:
            return ex
    logt = np.linspace(lo_exp, hi_exp, 8 * (hi_exp - lo_exp) + 1) * LN2
    logv = g.log_value(logt)
    if not np.all(np.isfinite(logv)):
        return OrliczIndices(math.inf, math.inf, False)

    def increasing(r):
        return bool(np.all(np.diff(logv - r * logt) >= 0))

    def decreasing(r):
        return bool(np.all(np.diff(logv - r * logt) <= 0))

    def bisect(pred, lo, hi, want_max):
        for _ in range(200):
            if hi - lo <= tol:
                break
            m = 0.5 * (lo + hi)
            if pred(m) == want_max:
                lo = m
            else:
                hi = m
        return lo if want_max else hi

    slopes = np.diff(logv) / np.diff(logt)
    top = float(slopes.max()) + 1.0
    if top > 1e6:
        p = bisect(increasing, 0.0, 1e6, True)
        return OrliczIndices(math.inf if p >= 1e6 - 1.0 else float(p), math.inf, False)
    p = bisect(increasing, 0.0, top, True)
    q = bisect(decreasing, 0.0, top, False)
    return OrliczIndices(float(p), float(q), False)


# ---------------------------------------------------------------------------
# exponents


@dataclass(frozen=True)
class ExponentPiece:
    a: float
    b: float
    q0: float
    q1: float

    def value(self, t):
        if self.b == self.a:
            return np.full(np.shape(t), self.q0)
        return self.q0 + (self.q1 - self.q0) * (_arr(t) - self.a) / (self.b - self.a)

    @property
    def constant(self):
        return self.q0 == self.q1


class ExponentFunction:
    """Piecewise-affine ``p: [0, 1] -> [1, inf)`` given by pieces covering [0, 1]."""

    def __init__(self, pieces):
        pieces = sorted((ExponentPiece(*map(float, p)) if not isinstance(p, ExponentPiece) else p for p in pieces),
                        key=lambda p: p.a)
        if not pieces or abs(pieces[0].a) > 1e-15 or abs(pieces[-1].b - 1.0) > 1e-15:
            raise DescriptorError("exponent pieces must cover [0, 1]")
        for p1, p2 in zip(pieces[:-1], pieces[1:]):
            if abs(p1.b - p2.a) > 1e-15:
                raise DescriptorError("exponent pieces must be contiguous")
        for p in pieces:
            if not (p.b > p.a) or min(p.q0, p.q1) < 1 or not math.isfinite(max(p.q0, p.q1)):
                raise DescriptorError(f"invalid exponent piece {p}")
        self.pieces = tuple(pieces)

    @classmethod
    def constant(cls, q):
        return cls([(0.0, 1.0, q, q)])

    @classmethod
    def step(cls, q1, t, q2):
        if not (0 < t < 1):
            raise DescriptorError("step point must lie in (0, 1)")
        return cls([(0.0, t, q1, q1), (t, 1.0, q2, q2)])

    @classmethod
    def affine(cls, q0, q1):
        return cls([(0.0, 1.0, q0, q1)])

    def __repr__(self):
        return f"ExponentFunction({[tuple(vars(p).values()) for p in self.pieces]})"

    def breakpoints(self):
        return np.array([p.a for p in self.pieces[1:]])

    def value(self, t, side="right"):
        """``p(t)``; at a breakpoint ``side`` selects the piece to the right or left."""
        t = _arr(t)
        edges = np.array([p.a for p in self.pieces[1:]])
        idx = np.searchsorted(edges, t, side="right" if side == "right" else "left")
        out = np.empty(t.shape)
        for i, p in enumerate(self.pieces):
            m = idx == i
            if m.any():
                out[m] = p.value(t[m])
        return out

    __call__ = value

    def shifted(self, delta: float, a: float | None = None, b: float | None = None) -> "ExponentFunction":
        """``p + delta`` (optionally only on ``[a, b]``, splitting pieces there)."""
        cuts = sorted({0.0, 1.0} | {p.a for p in self.pieces} | ({a, b} - {None}))
        out = []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi <= lo:
                continue
            q0 = float(self.value(np.array([lo]), "right")[0])
            q1 = float(self.value(np.array([hi]), "left")[0])
            inside = a is None or (lo >= a - 1e-15 and hi <= b + 1e-15)
            d = delta if inside else 0.0
            out.append((lo, hi, q0 + d, q1 + d))
        return ExponentFunction(out)

    def to_dict(self):
        return {"class": "Exponent", "family": "piecewise",
                "params": {"pieces": [[p.a, p.b, p.q0, p.q1] for p in self.pieces]}}


def exponent_stats(p: ExponentFunction):
    """``(p-, p+)``: essential infimum and supremum."""
    lo = min(min(q.q0, q.q1) for q in p.pieces)
    hi = max(max(q.q0, q.q1) for q in p.pieces)
    return lo, hi


def derivative(g: ConcaveGenerator, check: bool = True) -> MonotoneFunction:
    if not isinstance(g, PowLogConcave):
        raise DomainError("closed-form derivative is available for family members only")
    return g.derivative(check)


def tilde(g: ConcaveGenerator, require_concave: bool = True) -> ConcaveGenerator:
    if not isinstance(g, PowLogConcave):
        raise DomainError("t/phi(t) is available for family members only")
    return g.tilde(require_concave)


def generator_from_dict(d: dict):
    try:
        cls, fam, p = d["class"], d["family"], d.get("params", {})
        if cls == "Phi" and fam in ("powlog", "pow"):
            return PowLogConcave(p["alpha"], p.get("beta", 0.0), p.get("c", 1.0), p.get("L", 1.0))
        if cls == "Psi" and fam in ("powlog", "pow"):
            return PowLogConvex(p["p"], p.get("q", 0.0))
        if cls == "Psi" and fam == "exp":
            return ExpConvex(p.get("p", 1.0))
        if cls == "Psi" and fam == "scaled":
            return ScaledConvex(generator_from_dict(p["base"]), p["b"])
        if cls == "Exponent":
            return ExponentFunction(p["pieces"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DescriptorError):
            raise
        raise DescriptorError(f"malformed generator descriptor {d!r}: {exc}") from exc
    raise DescriptorError(f"unknown generator descriptor {d!r}")
