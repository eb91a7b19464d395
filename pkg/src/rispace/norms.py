"""Norms and modulars for Lorentz, Marcinkiewicz, Orlicz and Nakano spaces.

Every routine returns a :class:`~rispace.quadrature.NormResult` whose status
is certified by the octave protocol in :mod:`rispace.quadrature`.
Orlicz and Nakano modulars integrate over the segments of ``x`` itself; the
Lorentz and Marcinkiewicz norms work with the decreasing rearrangement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .funcrep import MonotoneFunction, PiecewiseFunction, decreasing_rearrangement
from .generators import ConcaveGenerator, ConvexGenerator, ExponentFunction
from .quadrature import (
    DEFAULT_HORIZON,
    DEFAULT_THRESHOLD,
    MAX_OCTAVES,
    NormResult,
    SingularSource,
    Status,
    certify_increments,
    certify_sources,
    integrate,
)

DEFAULT_TOL = 1e-10
SCALE_CAP = 1e12


def _rearranged(x) -> MonotoneFunction:
    return x if isinstance(x, MonotoneFunction) else decreasing_rearrangement(x)


def _kw(tol, horizon, threshold):
    return dict(tol=tol, horizon=horizon, threshold=threshold)


# ---------------------------------------------------------------------------
# Lorentz and Marcinkiewicz


def lorentz_norm(x, phi: ConcaveGenerator, *, tol=DEFAULT_TOL, horizon=DEFAULT_HORIZON,
                 threshold=DEFAULT_THRESHOLD) -> NormResult:
    """``int_0^1 x*(t) dphi(t)`` (including a possible jump of ``phi`` at 0)."""
    xs = _rearranged(x)
    if xs.degenerate:
        return NormResult.exact(0.0, reason="zero function")
    m = xs.support_measure
    jump_term = phi.jump * xs.sup_value if phi.jump else 0.0
    if math.isinf(jump_term):
        return NormResult(math.inf, math.inf, Status.DIVERGED, info={"reason": "unbounded x* against a jump of phi"})

    def f(t):
        return xs.evaluate(t) * phi.deriv(t)

    deep = None
    head = xs.singular_head()
    if head is not None:
        def deep(tau):
            with np.errstate(over="ignore", invalid="ignore"):
                la, sg = head.log_abs_z(-tau)
                return np.where(sg > 0, np.exp(la + phi.log_deriv(-tau) - tau), 0.0)

    # stop refining cells whose contribution is negligible on the global scale;
    # an implicit x* also carries root-finding noise near 1e-14, so ask for less
    rtol = 1e-13 if xs.exact else 1e-11
    atol = 1e-15 * float(xs.evaluate(0.5 * m)) * float(phi.value(m))
    src = SingularSource(m, f, xs.breakpoints(), deep, atol=atol)
    res = certify_sources([src], regular=(jump_term, 0.0), rtol=rtol, **_kw(tol, horizon, threshold))
    res.info["space"] = "lorentz"
    return res


def marcinkiewicz_ratio(xs: MonotoneFunction, phi: ConcaveGenerator, t):
    t = np.asarray(t, dtype=float)
    return xs.primitive(t) / phi.value(t)


def marcinkiewicz_norm(x, phi: ConcaveGenerator, *, tol=DEFAULT_TOL, horizon=DEFAULT_HORIZON,
                       threshold=DEFAULT_THRESHOLD, samples_per_octave=9) -> NormResult:
    """``sup_{0<t<=1} int_0^t x* / phi(t)`` via running maxima over octaves."""
    xs = _rearranged(x)
    if xs.degenerate:
        return NormResult.exact(0.0, reason="zero function")
    brk = xs.breakpoints()
    state = {"sup": 0.0, "argmax": None}

    def R(t):
        return marcinkiewicz_ratio(xs, phi, t)

    def octave_fn(k0, k1):
        inc = np.zeros(k1 - k0)
        grids = []
        for k in range(k0, k1):
            hi = 2.0**-k
            lo = hi / 2
            grids.append(np.unique(np.concatenate([lo * 2.0 ** np.linspace(0, 1, samples_per_octave),
                                                   brk[(brk > lo) & (brk < hi)]])))
        # one vectorized pass over every octave, then a local refinement per octave
        all_vals = np.split(R(np.concatenate(grids)), np.cumsum([g.size for g in grids])[:-1])
        for i, (pts, vals) in enumerate(zip(grids, all_vals)):
            j = int(np.nanargmax(vals))
            best, where = float(vals[j]), float(pts[j])
            # refining gains at most the bump over the neighbours; skip plateaus at rounding level
            if 0 < j < pts.size - 1 and best - min(vals[j - 1], vals[j + 1]) > 1e-3 * tol * abs(best):
                a, b = pts[j - 1], pts[j + 1]
                # the value error at a smooth maximum is quadratic in the location error
                opt = optimize.minimize_scalar(lambda s: -float(R(np.array([s]))[0]), bounds=(a, b),
                                               method="bounded", options={"xatol": 1e-7 * b})
                if -opt.fun > best:
                    best, where = float(-opt.fun), float(opt.x)
            if best > state["sup"]:
                inc[i] = best - state["sup"]
                state["sup"], state["argmax"] = best, where
        return inc, np.zeros_like(inc)

    res = certify_increments(octave_fn, tol=tol, horizon=horizon, threshold=threshold, max_octaves=MAX_OCTAVES)
    if res.status is Status.CONVERGED:
        # a sup is attained, not extrapolated: report the observed maximum
        res.value = state["sup"]
        res.abs_error = max(res.abs_error, 1e-14 * state["sup"])
    res.info.update(space="marcinkiewicz", argmax=state["argmax"])
    return res


# ---------------------------------------------------------------------------
# Orlicz


def _segment_sources(x: PiecewiseFunction, log_integrand, breaks_for, pieces_split=None):
    """Split an integral of ``G(x(t), t)`` into singular sources and regular parts.

    ``log_integrand(seg, u)`` returns ``log G`` at local coordinates ``u``;
    ``breaks_for(seg)`` gives interior u-breaks.  Each segment becomes a
    source on ``u in (0, u_hi]`` when its u-range starts at 0.
    """
    sources = []
    reg_val, reg_err = 0.0, 0.0
    for seg, (u_lo, u_hi), extra in (pieces_split or _default_split(x)):
        brk = np.asarray(sorted(set(breaks_for(seg, u_lo, u_hi)) | set(extra)), dtype=float)
        brk = brk[(brk > u_lo) & (brk < u_hi)]

        def f(u, seg=seg):
            with np.errstate(over="ignore"):
                return np.exp(log_integrand(seg, np.asarray(u, dtype=float)))

        if u_lo > 0:
            v, e = integrate(f, u_lo, u_hi, brk)
            reg_val += v
            reg_err += e
            continue

        def deep(tau, seg=seg):
            with np.errstate(over="ignore"):
                return np.exp(log_integrand(seg, None, z=-tau) - tau)

        with np.errstate(divide="ignore"):
            dbrk = -np.log(brk[brk > 0])
        sources.append(SingularSource(u_hi, f, brk, deep, dbrk))
    return sources, (reg_val, reg_err)


def _default_split(x):
    for seg in x.segments:
        yield seg, seg.u_range, [p.u1 for p in seg.pieces] + [p.u2 for p in seg.pieces]


def _finish(res: NormResult, sources, regular, **info):
    if not sources and not math.isfinite(regular[0]):
        res = NormResult(math.inf, math.inf, Status.DIVERGED, info={"reason": "infinite integrand"})
    res.info.update(info)
    return res


def orlicz_modular(x: PiecewiseFunction, psi: ConvexGenerator, s: float = 1.0, *, tol=DEFAULT_TOL,
                   horizon=DEFAULT_HORIZON, threshold=DEFAULT_THRESHOLD) -> NormResult:
    """``int_0^1 psi(|x(t)|/s) dt``."""
    if s <= 0:
        raise ValueError("scale must be positive")
    if x.is_zero:
        return NormResult.exact(0.0, reason="zero function")
    ls = math.log(s)
    kinks = psi.kinks()

    def log_integrand(seg, u, z=None):
        if z is None:
            with np.errstate(divide="ignore"):
                z = np.log(u)
        la, _ = seg.log_abs_z(z)
        return psi.log_value(la - ls)

    def breaks_for(seg, u_lo, u_hi):
        out = []
        if kinks.size:
            for p in seg.pieces:
                lv = kinks * s
                lv = lv[(lv > p.lo) & (lv < p.hi)]
                if lv.size:
                    out.extend(p.level_u(lv).tolist())
        return out

    sources, regular = _segment_sources(x, log_integrand, breaks_for)
    res = certify_sources(sources, regular=regular, **_kw(tol, horizon, threshold))
    return _finish(res, sources, regular, space="orlicz", scale=s)


# ---------------------------------------------------------------------------
# Nakano


def _nakano_split(x: PiecewiseFunction, p: ExponentFunction):
    """Split segments at exponent breakpoints; attach the exponent piece."""
    pbrk = p.breakpoints()
    for seg in x.segments:
        cuts = [seg.a] + [c for c in pbrk if seg.a < c < seg.b] + [seg.b]
        piece_ends = [p_.u1 for p_ in seg.pieces] + [p_.u2 for p_ in seg.pieces]
        for ta, tb in zip(cuts[:-1], cuts[1:]):
            ua, ub = sorted((float(seg.to_u(np.array(ta))), float(seg.to_u(np.array(tb)))))
            mid = 0.5 * (ta + tb)
            ep = p.pieces[int(np.searchsorted([q.a for q in p.pieces[1:]], mid, side="right"))]
            yield seg, (ua, ub), piece_ends, ep


def nakano_modular(x: PiecewiseFunction, p: ExponentFunction, s: float = 1.0, *, tol=DEFAULT_TOL,
                   horizon=DEFAULT_HORIZON, threshold=DEFAULT_THRESHOLD) -> NormResult:
    """``int_0^1 |x(t)/s|^p(t) dt``."""
    if s <= 0:
        raise ValueError("scale must be positive")
    if x.is_zero:
        return NormResult.exact(0.0, reason="zero function")
    ls = math.log(s)
    parts = list(_nakano_split(x, p))
    sources = []
    reg_val, reg_err = 0.0, 0.0
    for seg, (u_lo, u_hi), ends, ep in parts:
        brk = np.array([u for u in ends if u_lo < u < u_hi])

        def logf(u=None, z=None, seg=seg, ep=ep):
            if z is None:
                with np.errstate(divide="ignore"):
                    z = np.log(u)
                u_ = u
            else:
                u_ = np.exp(z)
            la, _ = seg.log_abs_z(z)
            expo = ep.value(seg.t_of_u(u_))
            with np.errstate(invalid="ignore"):
                return np.where(np.isneginf(la), -np.inf, expo * (la - ls))

        def f(u, logf=logf):
            with np.errstate(over="ignore"):
                return np.exp(logf(u=np.asarray(u, dtype=float)))

        if u_lo > 0:
            v, e = integrate(f, u_lo, u_hi, brk)
            reg_val += v
            reg_err += e
            continue

        def deep(tau, logf=logf):
            with np.errstate(over="ignore"):
                return np.exp(logf(z=-tau) - tau)

        with np.errstate(divide="ignore"):
            dbrk = -np.log(brk[brk > 0])
        sources.append(SingularSource(u_hi, f, brk, deep, dbrk))
    res = certify_sources(sources, regular=(reg_val, reg_err), **_kw(tol, horizon, threshold))
    return _finish(res, sources, (reg_val, reg_err), space="nakano", scale=s)


# ---------------------------------------------------------------------------
# norms defined through a modular


def solve_unit_modular(modular: Callable[[float], NormResult], *, tol=DEFAULT_TOL, cap=SCALE_CAP,
                       space="") -> NormResult:
    """``inf{s > 0 : modular(s) <= 1}`` for a nonincreasing modular.

    The bracket grows by doubling or halving from ``s = 1`` (capped at
    ``cap``); the root of ``log modular(log s)`` is then found with Brent's
    method, after bisecting away scales with a divergent modular.
    """
    cache: dict = {}

    def m(s):
        if s not in cache:
            cache[s] = modular(s)
        return cache[s]

    def above(r):
        return r.status is Status.DIVERGED or r.value > 1.0

    s = 1.0
    if above(m(s)):
        while above(m(s)) and s < cap:
            s *= 2.0
        if above(m(s)):
            r = m(s)
            return NormResult(math.inf, math.inf, Status.DIVERGED, r.evidence, r.slope,
                              {"space": space, "reason": f"modular exceeds 1 up to scale {cap:g}",
                               "modular_status": r.status.value})
        lo, hi = s / 2.0, s
    else:
        while not above(m(s)) and s > 1.0 / cap:
            s /= 2.0
        if not above(m(s)):
            return NormResult(0.0, s, Status.CONVERGED, info={"space": space, "reason": "modular below 1 at 1/cap"})
        lo, hi = s, 2.0 * s
    # remove divergent/infinite values at the lower end
    for _ in range(200):
        if m(lo).status is not Status.DIVERGED and math.isfinite(m(lo).value):
            break
        mid = math.sqrt(lo * hi)
        if above(m(mid)):
            lo = mid
        else:
            hi = mid
        if hi / lo - 1 < 1e-15:
            break

    def g(ls):
        r = m(math.exp(ls))
        if r.status is Status.DIVERGED or not math.isfinite(r.value):
            return 1e3
        if r.value <= 0:
            return -1e3
        return math.log(r.value)

    a, b = math.log(lo), math.log(hi)
    ga, gb = g(a), g(b)
    if ga == 0.0:
        root = a
    elif gb == 0.0:
        root = b
    elif ga > 0 > gb:
        root = optimize.brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    else:
        root = b
    s_star = math.exp(root)
    r = m(s_star)
    # sensitivity d log m / d log s from the bracket
    slope = (gb - ga) / (b - a) if b > a and abs(gb - ga) < 1e3 else -1.0
    rel_mod_err = r.abs_error / r.value if r.value > 0 else 0.0
    abs_err = s_star * (rel_mod_err / max(abs(slope), 1e-3) + 1e-13)
    statuses = {r.status}
    status = Status.CONVERGED if statuses == {Status.CONVERGED} and abs_err <= max(tol * s_star, 1e-300) * 10 \
        else Status.INCONCLUSIVE
    info = {"space": space, "modular_at_root": r.value, "modular_evaluations": len(cache),
            "bracket": [lo, hi], "log_slope": slope}
    return NormResult(s_star, abs_err, status, r.evidence, r.slope, info)


def luxemburg_norm(x: PiecewiseFunction, psi: ConvexGenerator, *, tol=DEFAULT_TOL, horizon=DEFAULT_HORIZON,
                   threshold=DEFAULT_THRESHOLD) -> NormResult:
    """``inf{s > 0 : int psi(|x|/s) <= 1}``."""
    if x.is_zero:
        return NormResult.exact(0.0, reason="zero function", space="orlicz")
    return solve_unit_modular(
        lambda s: orlicz_modular(x, psi, s, tol=tol, horizon=horizon, threshold=threshold), tol=tol, space="orlicz")


def nakano_norm(x: PiecewiseFunction, p: ExponentFunction, *, tol=DEFAULT_TOL, horizon=DEFAULT_HORIZON,
                threshold=DEFAULT_THRESHOLD) -> NormResult:
    """``inf{s > 0 : int |x/s|^p(t) <= 1}``."""
    if x.is_zero:
        return NormResult.exact(0.0, reason="zero function", space="nakano")
    return solve_unit_modular(
        lambda s: nakano_modular(x, p, s, tol=tol, horizon=horizon, threshold=threshold), tol=tol, space="nakano")


# ---------------------------------------------------------------------------
# weighted Nakano sequence spaces


@dataclass
class WeightedSeq:
    """A sequence ``x_k`` in ``l_{(p_k)}(w_k)``, indices starting at 1.

    ``indices``/``log_abs`` list explicit terms by ``log|x_k|``; ``tail`` (if
    given) returns ``log|x_k|`` for indices beyond the explicit ones.
    ``finite`` marks sequences that are genuinely zero beyond the explicit
    terms; otherwise the explicit terms are a truncation and the modular is
    certified from the trend of its partial sums.
    """

    indices: np.ndarray
    log_abs: np.ndarray
    exponent: Callable[[np.ndarray], np.ndarray]
    log_weight: Callable[[np.ndarray], np.ndarray]
    tail: Callable[[np.ndarray], np.ndarray] | None = None
    finite: bool = False
    weight_bound: tuple = (1.0, 0.5)
    tail_limit: int = 1 << 22

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        order = np.argsort(idx, kind="stable")
        self.indices = idx[order]
        self.log_abs = np.asarray(self.log_abs, dtype=float)[order]
        if idx.size and idx.min() < 1:
            raise ValueError("indices start at 1")
        if np.unique(idx).size != idx.size:
            raise ValueError("duplicate indices")
        self.check_weights()

    def check_weights(self, kmax=1 << 20):
        """Certify ``w_k <= C rho^k`` on a geometric sample of indices."""
        C, rho = self.weight_bound
        if not (C > 0 and 0 < rho < 1):
            raise ValueError("weight bound must be C > 0, 0 < rho < 1")
        k = np.unique(np.round(np.geomspace(1, kmax, 400)).astype(np.int64))
        if np.any(self.log_weight(k) > math.log(C) + k * math.log(rho) + 1e-9):
            raise ValueError("weights are not dominated by the stated geometric bound")
        return True

    @property
    def last_index(self) -> int:
        return int(self.indices[-1]) if self.indices.size else 0

    def chunks(self):
        """Index ranges ``[2^j, 2^(j+1))`` with the explicit/tail terms inside."""
        top = self.last_index
        if self.tail is not None:
            top = max(top, self.tail_limit)
        j = 0
        while (1 << j) <= max(top, 1):
            lo, hi = 1 << j, 1 << (j + 1)
            a, b = np.searchsorted(self.indices, [lo, hi])
            idx = self.indices[a:b]
            la = self.log_abs[a:b]
            if self.tail is not None and hi - 1 > self.last_index:
                t0 = max(lo, self.last_index + 1)
                extra = np.arange(t0, hi, dtype=np.int64)
                idx = np.concatenate([idx, extra])
                la = np.concatenate([la, self.tail(extra)])
            yield idx, la
            j += 1

    def to_dict(self, max_terms=64):
        return {"explicit_terms": int(self.indices.size), "last_index": self.last_index,
                "has_tail": self.tail is not None, "finite": self.finite,
                "head": [[int(k), float(v)] for k, v in zip(self.indices[:max_terms], self.log_abs[:max_terms])]}


def seq_modular(x: WeightedSeq, s: float = 1.0, exponent=None, *, tol=DEFAULT_TOL,
                threshold=DEFAULT_THRESHOLD, window=10) -> NormResult:
    """``sum_k |x_k/s|^{p_k} w_k`` (``exponent`` overrides ``p_k``)."""
    expo = exponent or x.exponent
    ls = math.log(s)
    incs = []
    for idx, la in x.chunks():
        if idx.size == 0:
            incs.append(0.0)
            continue
        logterm = expo(idx) * (la - ls) + x.log_weight(idx)
        with np.errstate(over="ignore"):
            incs.append(float(np.sum(np.exp(logterm))))
    incs = np.array(incs)
    if x.finite and x.tail is None:
        total = float(incs.sum())
        if not math.isfinite(total):
            partials = np.cumsum(incs)
            return NormResult(math.inf, math.inf, Status.DIVERGED,
                              [{"cutoff": float(1 << j), "partial": float(p)} for j, p in enumerate(partials)],
                              info={"space": "seq-nakano", "reason": "overflow"})
        return NormResult(total, 1e-15 * total * max(1, x.indices.size) ** 0.5, Status.CONVERGED,
                          info={"space": "seq-nakano", "terms": int(x.indices.size)})
    n = incs.size
    if n < window:
        incs = np.concatenate([incs, np.zeros(window - n)])

    def octave_fn(k0, k1):
        return incs[k0:k1], 1e-15 * np.abs(incs[k0:k1])

    res = certify_increments(octave_fn, tol=tol, horizon=incs.size, max_octaves=incs.size,
                             threshold=threshold, window=window)
    for j, e in enumerate(res.evidence):
        e["cutoff"] = float(1 << (j + 1))  # partial sum over indices below this
    res.info.update(space="seq-nakano", chunks=int(incs.size))
    return res


def seq_nakano_norm(x: WeightedSeq, *, tol=DEFAULT_TOL, threshold=DEFAULT_THRESHOLD) -> NormResult:
    """``inf{s > 0 : sum |x_k/s|^{p_k} w_k <= 1}``."""
    if x.indices.size == 0 and x.tail is None:
        return NormResult.exact(0.0, reason="zero sequence", space="seq-nakano")
    return solve_unit_modular(lambda s: seq_modular(x, s, tol=tol, threshold=threshold), tol=tol,
                              space="seq-nakano")
