"""Exact piecewise representation of measurable functions on [0, 1].

A function is a finite list of :class:`Segment` objects with pairwise
disjoint half-open supports ``(a, b]``.  On its support a segment is a sum of
log-power terms in the local variable ``u = orientation * (t - shift)``::

    g(u) = sum_i c_i * u**alpha_i * (L - ln u)**beta_i

With ``L = 1`` the log factor is ``ln(e/u)``.  The orientation ``-1`` is only
produced internally, for rearrangements of increasing pieces.

Distribution functions are computed by inverting each monotone piece of each
segment, either in closed form (pure powers) or by bisection in ``z = ln u``.
The decreasing rearrangement is exact (again a :class:`PiecewiseFunction`)
whenever the value ranges of the pieces do not interleave; otherwise it is the
implicit right-inverse of the exact distribution function.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from .errors import DescriptorError, DomainError, OverlapError
from .quadrature import _gl, integrate_cells

Z_FLOOR = -800.0  # exp(Z_FLOOR) == 0.0 in double precision
LOG_LEVEL_CAP = 709.0
_EPS = 1e-14


def _as_array(x):
    return np.asarray(x, dtype=float)


def combine_terms(terms) -> tuple:
    """Merge terms with equal exponents and drop zero coefficients."""
    acc: dict = {}
    for c, a, b in terms:
        key = (float(a), float(b))
        acc[key] = acc.get(key, 0.0) + float(c)
    return tuple((c, a, b) for (a, b), c in sorted(acc.items()) if c != 0.0)


def derivative_terms(terms) -> tuple:
    """Terms of ``d/du`` of a log-power sum with log offset ``L``.

    ``d/du [u^a l^b] = a u^(a-1) l^b - b u^(a-1) l^(b-1)`` with ``l = L - ln u``.
    """
    out = []
    for c, a, b in terms:
        if a != 0.0:
            out.append((c * a, a - 1.0, b))
        if b != 0.0:
            out.append((-c * b, a - 1.0, b - 1.0))
    return combine_terms(out)


def log_abs_terms(terms, z, L):
    """``(log|g|, sign g)`` at ``u = exp(z)`` computed without overflow."""
    z = _as_array(z)
    ell = L - z
    with np.errstate(divide="ignore", invalid="ignore"):
        logell = np.log(ell)
        mags = []
        for c, a, b in terms:
            m = math.log(abs(c)) + a * z
            if b != 0.0:
                m = m + b * logell
            mags.append(np.broadcast_to(m, z.shape))
    if not mags:
        return np.full(z.shape, -np.inf), np.zeros(z.shape)
    if len(mags) == 1:
        return mags[0].astype(float), np.full(z.shape, math.copysign(1.0, terms[0][0]))
    M = np.max(mags, axis=0)
    with np.errstate(invalid="ignore", over="ignore"):
        S = sum(math.copysign(1.0, c) * np.exp(m - M) for (c, _, _), m in zip(terms, mags))
        S = np.where(np.isfinite(M), S, math.copysign(1.0, terms[0][0]))
    with np.errstate(divide="ignore"):
        return M + np.log(np.abs(S)), np.sign(S)


def _limit_at_zero(terms) -> float:
    """Limit of ``g(u)`` as ``u -> 0+``."""
    if not terms:
        return 0.0
    dom = min(terms, key=lambda t: (t[1], -t[2]))
    c, a, b = dom
    if a < 0 or (a == 0 and b > 0):
        return math.copysign(math.inf, c)
    if a == 0 and b == 0:
        return c
    return 0.0


def _term_antiderivative(c, a, b, L, u):
    """Closed-form antiderivative of ``c u^a (L - ln u)^b``, or ``None``.

    Normalized so that ``F(0) = 0`` whenever the term is integrable at 0.
    """
    u = _as_array(u)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if b == 0.0:
            if a == -1.0:
                return c * np.log(u)
            return c * np.power(u, a + 1.0) / (a + 1.0)
        ell = L - np.log(u)
        if a == -1.0:
            if b == -1.0:
                return -c * np.log(ell)
            return -c * np.power(ell, b + 1.0) / (b + 1.0)
        if a > -1.0 and b > -1.0:
            k = a + 1.0
            scale = c * math.exp(k * L + special.gammaln(b + 1.0) - (b + 1.0) * math.log(k))
            return scale * special.gammaincc(b + 1.0, k * ell)
    return None


def _integrable_at_zero(terms) -> bool:
    for c, a, b in terms:
        if a < -1.0 or (a == -1.0 and b >= -1.0):
            return False
    return True


@dataclass(frozen=True)
class Segment:
    """One analytic piece ``g`` supported on ``(a, b]``."""

    a: float
    b: float
    terms: tuple
    shift: float = 0.0
    orientation: int = 1
    log_offset: float = 1.0

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (0.0 <= a < b <= 1.0 + 1e-12):
            raise DescriptorError(f"segment interval ({a}, {b}] is not a nonempty subinterval of (0,1]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", min(b, 1.0))
        object.__setattr__(self, "terms", combine_terms(self.terms))
        if self.orientation not in (1, -1):
            raise DescriptorError("orientation must be +1 or -1")
        if self.orientation == 1 and self.shift > a + 1e-12:
            raise DescriptorError(f"shift {self.shift} lies inside the interval ({a}, {b}]")
        if self.orientation == -1 and self.shift < self.b - 1e-12:
            raise DescriptorError(f"reflected shift {self.shift} lies inside ({a}, {b}]")
        if any(not (math.isfinite(c) and math.isfinite(x) and math.isfinite(y)) for c, x, y in self.terms):
            raise DescriptorError("segment parameters must be finite")
        if any(y != 0.0 for _, _, y in self.terms):
            u_hi = self.u_range[1]
            if self.log_offset - math.log(u_hi) <= 0.0:
                raise DescriptorError("log factor is not positive on the segment")

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, a, b, c):
        return cls(a, b, ((float(c), 0.0, 0.0),), shift=float(a))

    @classmethod
    def power(cls, a, b, c, alpha, shift=None):
        return cls(a, b, ((float(c), float(alpha), 0.0),), shift=float(a if shift is None else shift))

    @classmethod
    def logpower(cls, a, b, c, alpha, beta, shift=None):
        return cls(a, b, ((float(c), float(alpha), float(beta)),), shift=float(a if shift is None else shift))

    # -- geometry ---------------------------------------------------------
    @property
    def length(self) -> float:
        return self.b - self.a

    @cached_property
    def u_range(self):
        if self.orientation == 1:
            lo, hi = self.a - self.shift, self.b - self.shift
        else:
            lo, hi = self.shift - self.b, self.shift - self.a
        return max(lo, 0.0), hi

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(a == 0.0 and b == 0.0 for _, a, b in self.terms)

    def to_u(self, t):
        u = self.orientation * (_as_array(t) - self.shift)
        return np.maximum(u, 0.0)

    def t_of_u(self, u):
        return self.shift + self.orientation * _as_array(u)

    # -- evaluation -------------------------------------------------------
    def value_u(self, u):
        u = _as_array(u)
        out = np.empty(u.shape)
        pos = u > 0
        if pos.any() and len(self.terms) == 1 and self.terms[0][2] == 0.0:
            c, a, _ = self.terms[0]
            with np.errstate(over="ignore", divide="ignore"):
                out[pos] = c if a == 0.0 else c * u[pos] ** a
        elif pos.any():
            with np.errstate(divide="ignore"):
                z = np.log(u[pos])
            la, sg = log_abs_terms(self.terms, z, self.log_offset)
            with np.errstate(over="ignore"):
                out[pos] = sg * np.exp(la)
        out[~pos] = _limit_at_zero(self.terms)
        return out

    def value(self, t):
        return self.value_u(self.to_u(t))

    def log_abs_z(self, z):
        return log_abs_terms(self.terms, z, self.log_offset)

    @cached_property
    def deriv_terms(self):
        return derivative_terms(self.terms)

    def deriv_u(self, u):
        u = _as_array(u)
        with np.errstate(divide="ignore"):
            z = np.log(u)
        la, sg = log_abs_terms(self.deriv_terms, z, self.log_offset)
        with np.errstate(over="ignore"):
            return sg * np.exp(la)

    # -- integration ------------------------------------------------------
    def integral_u(self, u1, u2):
        """``int_{u1}^{u2} g(u) du`` elementwise (``0 <= u1 <= u2``)."""
        u1 = np.atleast_1d(_as_array(u1)).copy()
        u2 = np.atleast_1d(_as_array(u2)).copy()
        u1, u2 = np.broadcast_arrays(u1, u2)
        u1 = u1.astype(float).copy()
        u2 = u2.astype(float).copy()
        out = np.zeros(u1.shape)
        if not self.terms:
            return out
        nonempty = u2 > u1
        if not _integrable_at_zero(self.terms):
            bad = nonempty & (u1 <= 0.0)
            out[bad] = math.copysign(math.inf, _limit_at_zero(self.terms))
            nonempty &= ~bad
        narrow = nonempty & ((u2 - u1) < 1e-3 * u2)
        wide = nonempty & ~narrow
        if narrow.any():
            out[narrow] = self._gl_panel(u1[narrow], u2[narrow])
        if wide.any():
            out[wide] = self._wide_integral(u1[wide], u2[wide])
        return out

    def integral_t(self, t1, t2):
        """``int_{t1}^{t2} g`` for ``a <= t1 <= t2 <= b`` elementwise.

        Intervals that are short relative to their distance from the shift are
        integrated directly in ``t``, which avoids cancellation in ``u``.
        """
        t1, t2 = np.broadcast_arrays(np.atleast_1d(_as_array(t1)), np.atleast_1d(_as_array(t2)))
        ua, ub = self.to_u(t1), self.to_u(t2)
        u1, u2 = np.minimum(ua, ub), np.maximum(ua, ub)
        out = np.zeros(t1.shape)
        narrow = (t2 > t1) & ((t2 - t1) < 1e-3 * u2)
        if narrow.any():
            vals, _ = integrate_cells(self.value, t1[narrow], t2[narrow], rtol=1e-14, max_depth=8)
            out[narrow] = vals
        rest = (t2 > t1) & ~narrow
        if rest.any():
            out[rest] = self.integral_u(u1[rest], u2[rest])
        return out

    def _gl_panel(self, lo, hi):
        vals, _ = integrate_cells(self.value_u, lo, hi, rtol=1e-14, max_depth=8)
        return vals

    def _wide_integral(self, u1, u2):
        total = np.zeros(u1.shape)
        numeric = []
        for term in self.terms:
            F2 = _term_antiderivative(*term, self.log_offset, u2)
            if F2 is None:
                numeric.append(term)
                continue
            F1 = np.where(u1 > 0, _term_antiderivative(*term, self.log_offset, np.where(u1 > 0, u1, 1.0)), 0.0)
            total += F2 - F1
        if numeric:
            total += _numeric_term_integral(tuple(numeric), self.log_offset, u1, u2)
        return total

    # -- monotone structure -----------------------------------------------
    @cached_property
    def pieces(self) -> tuple:
        """Monotone pieces of ``|g|`` on the u-range, split at zeros and extrema."""
        if not self.terms:
            return ()
        u_lo, u_hi = self.u_range
        if self.is_constant:
            c = self.terms[0][0]
            return (MonoPiece(self, u_lo, u_hi, math.copysign(1.0, c), "const", abs(c), abs(c)),)
        splits = self._split_points(u_lo, u_hi)
        edges = [u_lo] + splits + [u_hi]
        out = []
        for u1, u2 in zip(edges[:-1], edges[1:]):
            if u2 <= u1:
                continue
            zm = 0.5 * (math.log(u1) + math.log(u2)) if u1 > 0 else math.log(u2) - 1.0
            _, sg = self.log_abs_z(np.array([zm]))
            sign = float(sg[0]) or 1.0
            _, dsg = log_abs_terms(self.deriv_terms, np.array([zm]), self.log_offset)
            kind = "dec" if sign * float(dsg[0]) < 0 else "inc"
            v1 = abs(float(self.value_u(np.array([u1]))[0]))
            v2 = abs(float(self.value_u(np.array([u2]))[0]))
            lo, hi = (v2, v1) if kind == "dec" else (v1, v2)
            out.append(MonoPiece(self, u1, u2, sign, kind, lo, hi))
        return tuple(out)

    def _split_points(self, u_lo, u_hi):
        if len(self.terms) == 1:
            c, a, b = self.terms[0]
            if a != 0.0 and b != 0.0:
                uc = math.exp(self.log_offset - b / a)
                if u_lo < uc < u_hi:
                    return [uc]
            return []
        z_hi = math.log(u_hi)
        z_lo = math.log(u_lo) if u_lo > 0 else max(Z_FLOOR, z_hi - 700.0)
        zs = np.linspace(z_lo, z_hi, 4001)[1:-1]
        found = []
        for terms in (self.terms, self.deriv_terms):
            _, sg = log_abs_terms(terms, zs, self.log_offset)
            idx = np.nonzero(sg[:-1] * sg[1:] < 0)[0]
            for i in idx:
                found.append(math.exp(_bisect_sign(terms, self.log_offset, zs[i], zs[i + 1])))
        return sorted(u for u in found if u_lo < u < u_hi)

    # -- transforms -------------------------------------------------------
    def scaled(self, k: float) -> "Segment":
        return Segment(self.a, self.b, tuple((c * k, a, b) for c, a, b in self.terms),
                       self.shift, self.orientation, self.log_offset)

    def translate_dilate(self, a0: float, r: float) -> "Segment":
        terms = tuple((c * r ** (-a), a, b) for c, a, b in self.terms)
        return Segment(a0 + r * self.a, a0 + r * self.b, terms, a0 + r * self.shift,
                       self.orientation, self.log_offset + math.log(r))

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        d = {"interval": [self.a, self.b]}
        simple = self.orientation == 1 and self.log_offset == 1.0 and len(self.terms) == 1
        if simple and self.is_constant:
            d.update(form="constant", params={"c": self.terms[0][0]})
        elif simple and self.terms[0][2] == 0.0:
            c, a, _ = self.terms[0]
            d.update(form="power", params={"c": c, "shift": self.shift, "alpha": a})
        elif simple:
            c, a, b = self.terms[0]
            d.update(form="logpower", params={"c": c, "shift": self.shift, "alpha": a, "beta": b})
        else:
            d.update(form="sum", params={"terms": [list(t) for t in self.terms], "shift": self.shift,
                                         "orientation": self.orientation, "log_offset": self.log_offset})
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Segment":
        try:
            a, b = (float(x) for x in d["interval"])
            form = d["form"]
            p = d.get("params", {})
            if form == "constant":
                return cls.constant(a, b, p["c"])
            if form == "power":
                return cls.power(a, b, p["c"], p["alpha"], p.get("shift", a))
            if form == "logpower":
                return cls.logpower(a, b, p["c"], p["alpha"], p["beta"], p.get("shift", a))
            if form == "sum":
                return cls(a, b, tuple(tuple(float(x) for x in t) for t in p["terms"]),
                           float(p.get("shift", a)), int(p.get("orientation", 1)),
                           float(p.get("log_offset", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DescriptorError):
                raise
            raise DescriptorError(f"malformed segment {d!r}: {exc}") from exc
        raise DescriptorError(f"unknown segment form {form!r}")


def _bisect_sign(terms, L, z1, z2, iters=80):
    _, s1 = log_abs_terms(terms, np.array([z1]), L)
    for _ in range(iters):
        zm = 0.5 * (z1 + z2)
        _, sm = log_abs_terms(terms, np.array([zm]), L)
        if sm[0] == s1[0]:
            z1 = zm
        else:
            z2 = zm
    return 0.5 * (z1 + z2)


def _numeric_term_integral(terms, L, u1, u2):
    """Integrate ``g(e^z) e^z`` over ``z`` cells for terms without closed forms."""
    shifted = tuple((c, a + 1.0, b) for c, a, b in terms)

    def f(z):
        la, sg = log_abs_terms(shifted, z, L)
        with np.errstate(over="ignore"):
            return sg * np.exp(la)

    out = np.zeros(u1.shape)
    for i in range(u1.size):
        z2 = math.log(u2[i])
        z1 = math.log(u1[i]) if u1[i] > 0 else Z_FLOOR
        edges = np.unique(np.concatenate([np.arange(z2, z1, -1.0), [z1]]))
        vals, _ = integrate_cells(f, edges[:-1], edges[1:], rtol=1e-14)
        out[i] = vals.sum()
    return out


def _illinois(fun, a, b, fa, fb, iters=100, xtol=4e-16, ftol=0.0):
    """Vectorized Illinois regula falsi for brackets with ``fa * fb <= 0``.

    ``fun(x, mask)`` evaluates the residual of the entries selected by ``mask``;
    iteration stops once ``|residual| <= ftol`` (scalar or per entry).
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    fa = np.array(fa, dtype=float)
    fb = np.array(fb, dtype=float)
    done = (fa == 0) | (fb == 0)
    x = np.where(fa == 0, a, b)
    side = np.zeros(a.shape, dtype=int)
    ftol = np.broadcast_to(np.asarray(ftol, dtype=float), a.shape)
    for _ in range(iters):
        act = ~done
        if not act.any():
            break
        aa, bb, ffa, ffb = a[act], b[act], fa[act], fb[act]
        with np.errstate(invalid="ignore", divide="ignore"):
            c = (aa * ffb - bb * ffa) / (ffb - ffa)
        bad = ~np.isfinite(c) | (c <= np.minimum(aa, bb)) | (c >= np.maximum(aa, bb))
        c = np.where(bad, 0.5 * (aa + bb), c)
        fc = np.asarray(fun(c, act), dtype=float)
        left = np.sign(fc) == np.sign(ffa)
        sd = side[act]
        # c replaces the endpoint with the same sign; halve the stale one twice in a row
        na = np.where(left, c, aa)
        nfa = np.where(left, fc, np.where(sd == -1, ffa * 0.5, ffa))
        nb = np.where(left, bb, c)
        nfb = np.where(left, np.where(sd == 1, ffb * 0.5, ffb), fc)
        side[act] = np.where(left, 1, -1)
        a[act], fa[act], b[act], fb[act] = na, nfa, nb, nfb
        step = np.abs(c - x[act])
        x[act] = c
        scale = xtol * np.maximum(1.0, np.abs(c))
        conv = (np.abs(fc) <= ftol[act]) | (np.abs(nb - na) <= scale) | (step <= scale) | ~np.isfinite(fc)
        done[act] = conv
    return x


@dataclass(frozen=True, eq=False)
class MonoPiece:
    """A stretch ``[u1, u2]`` of a segment on which ``|g|`` is monotone."""

    seg: Segment
    u1: float
    u2: float
    sign: float
    kind: str  # "dec" | "inc" | "const"
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.u2 - self.u1

    def level_u(self, s):
        """The ``u`` at which ``|g(u)| = s`` for ``lo < s < hi``."""
        s = _as_array(s)
        terms = self.seg.terms
        if len(terms) == 1:
            c, a, b = terms[0]
            with np.errstate(divide="ignore", over="ignore"):
                if b == 0.0:
                    return np.clip(np.exp((np.log(s) - math.log(abs(c))) / a), self.u1, self.u2)
                if a == 0.0:
                    ell = np.exp((np.log(s) - math.log(abs(c))) / b)
                    return np.clip(np.exp(self.seg.log_offset - ell), self.u1, self.u2)
            u = self._lambert_level(np.log(s), c, a, b)
            if u is not None:
                bad = ~np.isfinite(u)
                if bad.any():
                    u[bad] = self._table_level(np.log(s[bad]))
                return u
        return self._table_level(np.log(s))

    def _table_level(self, target):
        """Bracket on a fixed z-table, then regula falsi inside the bracket."""
        zt, lt = self._table
        key = -lt if self.kind == "dec" else lt
        tk = -target if self.kind == "dec" else target
        j = np.clip(np.searchsorted(key, tk), 1, zt.size - 1)
        # near a peak of |g| the residual flattens out; stop at its rounding floor
        z = _illinois(lambda zz, m: self.seg.log_abs_z(zz)[0] - target[m], zt[j - 1], zt[j],
                      lt[j - 1] - target, lt[j] - target, ftol=4e-16 * np.maximum(1.0, np.abs(target)))
        return np.clip(np.exp(z), self.u1, self.u2)

    def _lambert_level(self, target, c, a, b):
        """Closed-form level for ``c u^a (L - ln u)^b`` via the Lambert W function.

        With ``l = L - ln u`` the equation is ``b ln l - a l = K``, i.e.
        ``w e^w = -(a/b) e^(K/b)`` for ``w = -a l / b``.  Entries whose argument
        leaves the double range or sits at the branch point come back as NaN.
        """
        L = self.seg.log_offset
        K = target - math.log(abs(c)) - a * L
        e = K / b
        if e.size == 0:
            return None
        with np.errstate(over="ignore", invalid="ignore"):
            y = -(a / b) * np.exp(e)
        z1 = math.log(self.u1) if self.u1 > 0 else Z_FLOOR
        zmid = 0.5 * (z1 + math.log(self.u2))
        branch = -1 if (a / b > 0 and L - zmid > b / a) else 0
        with np.errstate(over="ignore", invalid="ignore"):
            w = special.lambertw(y, branch)
        z = L + (b / a) * w.real
        # Newton polish in z on log|g| - target
        for _ in range(2):
            ell = L - z
            with np.errstate(invalid="ignore", divide="ignore"):
                f = a * z + b * np.log(ell) + math.log(abs(c)) - target
                z = np.where(ell > 0, z - f / (a - b / ell), z)
        with np.errstate(invalid="ignore", divide="ignore"):
            res = a * z + b * np.log(L - z) + math.log(abs(c)) - target
        # entries near the branch point (the peak of |g|) or out of range are flagged for the table path
        ok = (np.abs(e) <= 700.0) & np.isfinite(z) & (np.abs(w.imag) < 1e-12) & (np.abs(res) <= 1e-12 * np.maximum(1.0, np.abs(target)))
        with np.errstate(over="ignore"):
            u = np.clip(np.exp(z), self.u1, self.u2)
        return np.where(ok, u, np.nan)

    @cached_property
    def _table(self):
        z_hi = math.log(self.u2)
        z_lo = math.log(self.u1) if self.u1 > 0 else Z_FLOOR
        zt = np.linspace(z_lo, z_hi, 2049)
        lt = self.seg.log_abs_z(zt)[0]
        # enforce monotone keys so searchsorted is well defined
        lt = np.minimum.accumulate(lt) if self.kind == "dec" else np.maximum.accumulate(lt)
        return zt, lt

    def measure_above(self, s):
        s = _as_array(s)
        if self.kind == "const":
            return np.where(s < self.hi, self.length, 0.0)
        out = np.where(s <= self.lo, self.length, 0.0)
        mid = (s > self.lo) & (s < self.hi)
        if mid.any():
            u = self.level_u(s[mid])
            out[mid] = (u - self.u1) if self.kind == "dec" else (self.u2 - u)
        return out

    def integral_above(self, v):
        """``int |g|`` over the part of the piece where ``|g| > v``."""
        v = _as_array(v)
        if self.kind == "const":
            return np.where(v < self.hi, self.length * self.hi, 0.0)
        full = self.sign * float(self.seg.integral_u(self.u1, self.u2)[0])
        out = np.where(v <= self.lo, full, 0.0)
        mid = (v > self.lo) & (v < self.hi)
        if mid.any():
            u = self.level_u(v[mid])
            if self.kind == "dec":
                out[mid] = self.sign * self.seg.integral_u(np.full(u.shape, self.u1), u)
            else:
                out[mid] = self.sign * self.seg.integral_u(u, np.full(u.shape, self.u2))
        return out


@dataclass(frozen=True)
class PiecewiseFunction:
    """Finitely many segments with pairwise disjoint supports; zero elsewhere."""

    segments: tuple = ()
    zero_outside: bool = True

    def __post_init__(self):
        if not self.zero_outside:
            raise DescriptorError("only functions vanishing off their segments are supported")
        segs = tuple(sorted((s for s in self.segments if not s.is_zero), key=lambda s: s.a))
        for s1, s2 in zip(segs[:-1], segs[1:]):
            if s2.a < s1.b - 1e-15:
                raise OverlapError(f"segments ({s1.a}, {s1.b}] and ({s2.a}, {s2.b}] overlap")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def zero(cls) -> "PiecewiseFunction":
        return cls(())

    @property
    def is_zero(self) -> bool:
        return not self.segments

    @cached_property
    def _bounds(self):
        return (np.array([s.a for s in self.segments]), np.array([s.b for s in self.segments]))

    def evaluate(self, t):
        t = _as_array(t)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros(t.shape)
        if self.segments:
            a, b = self._bounds
            idx = np.searchsorted(b, t, side="left")
            inside = idx < len(self.segments)
            inside[inside] &= t[inside] > a[idx[inside]]
            for i in np.unique(idx[inside]):
                m = inside & (idx == i)
                out[m] = self.segments[i].value(t[m])
        return float(out[0]) if scalar else out

    __call__ = evaluate

    @cached_property
    def pieces(self) -> tuple:
        return tuple(p for s in self.segments for p in s.pieces if p.hi > 0)

    def distribution_function(self, s):
        s = _as_array(s)
        out = np.zeros(s.shape)
        for p in self.pieces:
            out = out + p.measure_above(s)
        return out

    @property
    def support_measure(self) -> float:
        return float(sum(p.length for p in self.pieces))

    def breakpoints(self) -> np.ndarray:
        pts = {s.a for s in self.segments} | {s.b for s in self.segments}
        for p in self.pieces:
            pts.update(float(x) for x in p.seg.t_of_u(np.array([p.u1, p.u2])))
        return np.array(sorted(x for x in pts if 0.0 < x < 1.0))

    def scaled(self, k: float) -> "PiecewiseFunction":
        if k == 0:
            return PiecewiseFunction.zero()
        return PiecewiseFunction(tuple(s.scaled(k) for s in self.segments))

    def restricted(self, a: float, b: float) -> "PiecewiseFunction":
        """Segments whose support lies inside ``(a, b]`` (no cutting)."""
        return PiecewiseFunction(tuple(s for s in self.segments if s.a >= a - 1e-15 and s.b <= b + 1e-15))

    def to_dict(self) -> dict:
        return {"segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, d) -> "PiecewiseFunction":
        if isinstance(d, dict):
            d = d.get("segments")
        if not isinstance(d, list):
            raise DescriptorError("piecewise function must be a list of segments")
        return cls(tuple(Segment.from_dict(x) for x in d))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseFunction":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise DescriptorError(f"invalid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# convenience constructors


def indicator(a: float, b: float, c: float = 1.0) -> PiecewiseFunction:
    return PiecewiseFunction((Segment.constant(a, b, c),))


def power_function(c: float, alpha: float, a: float = 0.0, b: float = 1.0, shift=None) -> PiecewiseFunction:
    """``c (t - shift)^alpha`` on ``(a, b]`` (shift defaults to ``a``)."""
    return PiecewiseFunction((Segment.power(a, b, c, alpha, shift),))


def logpower_function(c, alpha, beta, a=0.0, b=1.0, shift=None) -> PiecewiseFunction:
    """``c u^alpha ln(e/u)^beta`` with ``u = t - shift`` on ``(a, b]``."""
    return PiecewiseFunction((Segment.logpower(a, b, c, alpha, beta, shift),))


# ---------------------------------------------------------------------------
# decreasing rearrangement


class MonotoneFunction:
    """A nonincreasing function on (0, 1], the rearrangement of some ``|f|``.

    When ``exact`` is true the function is held as a :class:`PiecewiseFunction`
    (``as_piecewise``); otherwise it is the right-inverse of the distribution
    function of the source pieces, evaluated by bisection on levels.
    """

    def __init__(self, source_pieces, piecewise=None, degenerate=False):
        self._pieces = tuple(source_pieces)
        self._pw = piecewise
        self.degenerate = degenerate
        if piecewise is not None:
            self._pieces = piecewise.pieces
        self.support_measure = float(sum(p.length for p in self._pieces))

    @property
    def exact(self) -> bool:
        return self._pw is not None

    def as_piecewise(self) -> PiecewiseFunction:
        if self._pw is None:
            raise DomainError("rearrangement has no closed piecewise form")
        return self._pw

    @property
    def sup_value(self) -> float:
        return max((p.hi for p in self._pieces), default=0.0)

    def distribution_function(self, s):
        s = _as_array(s)
        out = np.zeros(s.shape)
        for p in self._pieces:
            out = out + p.measure_above(s)
        return out

    # level table for the implicit inverse
    @cached_property
    def _levels(self):
        V = sorted({0.0} | {p.lo for p in self._pieces} | {p.hi for p in self._pieces if math.isfinite(p.hi)})
        V = np.array(V)
        lam = self.distribution_function(V)
        jump = np.zeros(V.size)
        for p in self._pieces:
            if p.kind == "const":
                jump[np.searchsorted(V, p.hi)] += p.length
        return V, lam, lam + jump

    def evaluate(self, t):
        t = _as_array(t)
        scalar = t.ndim == 0
        t = np.atleast_1d(t).astype(float)
        if self._pw is not None:
            out = self._pw.evaluate(t)
        else:
            out = self._implicit(t)
        return float(out[0]) if scalar else out

    __call__ = evaluate

    def _implicit(self, t):
        V, lam, lam_left = self._levels
        out = np.zeros(t.shape)
        # lam is nonincreasing; first index with lam[j] <= t
        j = np.searchsorted(-lam, -t, side="left")
        top = j >= V.size
        out[top] = np.inf  # refined below
        if top.any():
            lo = np.full(top.sum(), math.log(V[-1]) if V[-1] > 0 else Z_FLOOR)
            out[top] = self._bisect_levels(t[top], lo, np.full(top.sum(), LOG_LEVEL_CAP), unbounded=True)
        mid = ~top & (j > 0)
        if mid.any():
            jj = j[mid]
            tt = t[mid]
            vj = V[jj]
            at_jump = lam_left[jj] >= tt
            res = vj.copy()
            need = ~at_jump
            if need.any():
                vlo = V[jj[need] - 1]
                with np.errstate(divide="ignore"):
                    lo = np.where(vlo > 0, np.log(vlo), np.log(vj[need]) + Z_FLOOR)
                res[need] = self._bisect_levels(tt[need], lo, np.log(vj[need]))
            out[mid] = res
        return out

    @cached_property
    def _dense(self):
        """Levels from the per-piece tables with their exact measures."""
        lv = [self._levels[0][self._levels[0] > 0]]
        for p in self._pieces:
            if p.kind != "const" and not (len(p.seg.terms) == 1 and 0.0 in p.seg.terms[0][1:]):
                with np.errstate(over="ignore"):
                    lv.append(np.exp(p._table[1][::8]))
        v = np.unique(np.concatenate(lv))
        v = v[np.isfinite(v) & (v > 0)]
        logv = np.log(v)
        return logv, self.distribution_function(v)

    def _bisect_levels(self, t, lo, hi, unbounded=False):
        """Solve ``lambda(e^m) = t`` for ``m`` in ``[lo, hi]`` (no jumps inside)."""
        if unbounded:
            lam_cap = self.distribution_function(np.exp(hi))
            inf_mask = lam_cap > t
        logv, lam = self._dense
        if logv.size:
            k = np.searchsorted(-lam, -t, side="left")
            klo = np.clip(k - 1, 0, logv.size - 1)
            khi = np.clip(k, 0, logv.size - 1)
            lo = np.where((k > 0) & (logv[klo] > lo) & (logv[klo] < hi), logv[klo], lo)
            hi = np.where((k < logv.size) & (logv[khi] < hi) & (logv[khi] > lo), logv[khi], hi)

        # residual in log(lambda): power-law pieces become linear in m
        logt = np.log(t)

        def h(m, mask):
            with np.errstate(over="ignore", divide="ignore"):
                return np.log(np.maximum(self.distribution_function(np.exp(m)), 1e-320)) - logt[mask]

        with np.errstate(over="ignore", divide="ignore"):
            hlo = np.log(np.maximum(self.distribution_function(np.exp(lo)), 1e-320)) - logt
            hhi = np.log(np.maximum(self.distribution_function(np.exp(hi)), 1e-320)) - logt
        m = _illinois(h, lo, hi, hlo, hhi, xtol=4e-16, ftol=4e-16)
        # guard: anything left unbracketed falls back to the upper end
        m = np.where((hlo >= 0) | (hhi <= 0), m, hi)
        with np.errstate(over="ignore"):
            v = np.exp(m)
        if unbounded:
            v = np.where(inf_mask, np.inf, v)
        return v

    def primitive(self, t):
        """``int_0^t x*(s) ds`` elementwise."""
        t = np.atleast_1d(_as_array(t)).astype(float)
        if self._pw is not None:
            out = np.zeros(t.shape)
            for seg in self._pw.segments:
                hi = np.minimum(t, seg.b)
                m = hi > seg.a
                if not m.any():
                    continue
                out[m] += np.abs(seg.integral_t(np.full(m.sum(), seg.a), hi[m]))
            return out
        out = np.zeros(t.shape)
        if math.isfinite(self.sup_value):
            # near 0 the layer-cake formula cancels in u; integrate x* directly
            small = (t > 0) & (t < 1e-2 * self.support_measure)
            if small.any():
                out[small] = self._primitive_panels(t[small])
            t = np.where(small, 0.0, t)
        else:
            small = np.zeros(t.shape, dtype=bool)
        v = self._implicit(t)
        fin = np.isfinite(v) & (t > 0)
        for p in self._pieces:
            out[fin] += p.integral_above(v[fin])
        # signed on purpose: a level slightly off near a peak of |x| is compensated to first order
        out[fin] += v[fin] * (t[fin] - self.distribution_function(v[fin]))
        out[~np.isfinite(v) & (t > 0)] = np.inf
        return out

    def _primitive_panels(self, t):
        """``int_0^t x*`` by one Gauss-Legendre panel between consecutive cut points.

        ``x*`` is smooth between its level breakpoints, and the panels here are
        tiny, so a fixed rule is exact to rounding.
        """
        bp = self.breakpoints()
        edges = np.unique(np.concatenate([[0.0], bp[bp < t.max()], t]))
        cum = np.concatenate([[0.0], np.cumsum(_gl(self._implicit, edges[:-1], edges[1:]))])
        return cum[np.searchsorted(edges, t)]

    def breakpoints(self) -> np.ndarray:
        if self._pw is not None:
            pts = self._pw.breakpoints()
        else:
            _, lam, lam_left = self._levels
            pts = np.unique(np.concatenate([lam, lam_left]))
        m = self.support_measure
        pts = np.concatenate([pts, [m]])
        return np.unique(pts[(pts > 0) & (pts < 1.0)])

    def singular_head(self):
        """The leading segment if it is a log-power law in ``t`` itself."""
        if self._pw is None or not self._pw.segments:
            return None
        seg = self._pw.segments[0]
        if seg.a == 0.0 and seg.shift == 0.0 and seg.orientation == 1:
            return seg
        return None

    def to_dict(self) -> dict:
        if self._pw is not None:
            return {"exact": True, "degenerate": self.degenerate, **self._pw.to_dict()}
        return {"exact": False, "degenerate": self.degenerate,
                "levels": [float(v) for v in self._levels[0]],
                "measures": [float(v) for v in self._levels[1]]}


def _exact_layout(pieces):
    order = sorted(pieces, key=lambda p: (-p.hi, -p.lo))
    for p1, p2 in zip(order[:-1], order[1:]):
        if p2.hi > p1.lo:
            return None
    segs = []
    t0 = 0.0
    for p in order:
        t1 = t0 + p.length
        if t1 <= t0:
            continue
        seg = p.seg
        terms = tuple((c * p.sign, a, b) for c, a, b in seg.terms)
        if p.kind == "const":
            new = Segment.constant(t0, min(t1, 1.0), p.hi)
        elif p.kind == "dec":
            new = Segment(t0, min(t1, 1.0), terms, t0 - p.u1, 1, seg.log_offset)
        else:
            new = Segment(t0, min(t1, 1.0), terms, t0 + p.u2, -1, seg.log_offset)
        segs.append(new)
        t0 = t1
    return PiecewiseFunction(tuple(segs))


def decreasing_rearrangement(f: PiecewiseFunction) -> MonotoneFunction:
    """The decreasing rearrangement ``x*`` of ``|f|``.

    The zero function yields a zero :class:`MonotoneFunction` with
    ``degenerate=True``.
    """
    pieces = [p for p in f.pieces if p.hi > 0 and p.length > 0]
    if not pieces:
        return MonotoneFunction((), PiecewiseFunction.zero(), degenerate=True)
    pw = _exact_layout(pieces)
    if pw is not None:
        return MonotoneFunction((), pw)
    return MonotoneFunction(pieces)


# ---------------------------------------------------------------------------
# module-level operations


def evaluate(f: PiecewiseFunction, t):
    t_arr = _as_array(t)
    if np.any(t_arr <= 0) or np.any(t_arr > 1):
        raise DomainError("evaluation points must lie in (0, 1]")
    return f.evaluate(t)


def distribution_function(f, s):
    s_arr = _as_array(s)
    if np.any(s_arr < 0):
        raise DomainError("levels must be nonnegative")
    out = f.distribution_function(s_arr)
    return float(out) if np.ndim(s) == 0 else out


def translate_dilate(f: PiecewiseFunction, a: float, r: float) -> PiecewiseFunction:
    """``T_{a,r} f (t) = f((t - a)/r)`` on ``(a, a + r]`` and 0 elsewhere."""
    if not (0.0 <= a < 1.0) or not (0.0 < r <= 1.0 - a + 1e-15):
        raise DomainError(f"need 0 <= a < 1 and 0 < r <= 1 - a, got a={a}, r={r}")
    if a == 0.0 and r == 1.0:
        return f
    return PiecewiseFunction(tuple(s.translate_dilate(a, r) for s in f.segments))


def disjoint_sum(fs: Sequence[PiecewiseFunction], coeffs: Iterable[float] | None = None) -> PiecewiseFunction:
    """Pointwise sum of functions with pairwise disjoint supports."""
    fs = list(fs)
    coeffs = [1.0] * len(fs) if coeffs is None else [float(c) for c in coeffs]
    if len(coeffs) != len(fs):
        raise DomainError("need one coefficient per function")
    spans = sorted((s.a, s.b, i) for i, f in enumerate(fs) for s in f.segments)
    for (a1, b1, i1), (a2, b2, i2) in zip(spans[:-1], spans[1:]):
        if a2 < b1 - 1e-15 and i1 != i2:
            raise OverlapError(f"supports of summands {i1} and {i2} overlap on ({a2}, {min(b1, b2)}]")
    segs = []
    for f, c in zip(fs, coeffs):
        if c != 0.0:
            segs.extend(s.scaled(c) for s in f.segments)
    return PiecewiseFunction(tuple(segs))


__all__ = [
    "Segment",
    "MonoPiece",
    "PiecewiseFunction",
    "MonotoneFunction",
    "indicator",
    "power_function",
    "logpower_function",
    "evaluate",
    "distribution_function",
    "decreasing_rearrangement",
    "translate_dilate",
    "disjoint_sum",
    "derivative_terms",
    "combine_terms",
    "log_abs_terms",
]
