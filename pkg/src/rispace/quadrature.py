"""Cell quadrature near endpoint singularities and finite/infinite certificates.

Every improper integral in the package is split into octave cells
``[w 2^-(k+1), w 2^-k]`` accumulating toward the singular endpoint.  The
per-octave increments are then classified: geometric decay gives a
``Converged`` result with an extrapolated tail, non-decaying increments give a
``Diverged`` certificate.  Integrands that decay like powers of ``log(1/u)``
are resolved in a second stage on cells ``tau in [T 2^i, T 2^(i+1)]`` with
``u = exp(-tau)``, where such integrands again produce geometric increments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_GL_N = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_N)

DEFAULT_TOL = 1e-9
DEFAULT_THRESHOLD = 1e12
DEFAULT_HORIZON = 60
MAX_OCTAVES = 960
DEEP_BLOCKS = 40
WINDOW = 10


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class NormResult:
    """A norm, modular or sup value with an error estimate and a certificate."""

    value: float
    abs_error: float
    status: Status
    evidence: list = field(default_factory=list)
    slope: float | None = None
    info: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def diverged(self) -> bool:
        return self.status is Status.DIVERGED

    def to_dict(self) -> dict:
        return {
            "value": _json_float(self.value),
            "abs_error": _json_float(self.abs_error),
            "status": self.status.value,
            "slope": None if self.slope is None else _json_float(self.slope),
            "evidence": [
                {k: _json_float(v) if isinstance(v, float) else v for k, v in e.items()}
                for e in self.evidence
            ],
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormResult":
        return cls(
            value=_from_json_float(d["value"]),
            abs_error=_from_json_float(d["abs_error"]),
            status=Status(d["status"]),
            evidence=[
                {k: _from_json_float(v) for k, v in e.items()} for e in d.get("evidence", [])
            ],
            slope=None if d.get("slope") is None else _from_json_float(d["slope"]),
            info=d.get("info", {}),
        )

    @classmethod
    def exact(cls, value: float, **info) -> "NormResult":
        return cls(float(value), 0.0, Status.CONVERGED, info=dict(info))


def _json_float(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def _from_json_float(x):
    if isinstance(x, str):
        return float(x)
    return x


# ---------------------------------------------------------------------------
# Gauss-Legendre cells


def _gl(func, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.asarray(func(nodes), dtype=float)
    if np.isnan(vals).any():
        raise FloatingPointError("integrand returned NaN")
    with np.errstate(invalid="ignore"):
        return half * (vals @ _GL_W)


def integrate_cells(func, lo, hi, rtol=1e-13, atol=0.0, max_depth=50, max_cells=200_000):
    """Adaptive Gauss-Legendre integration of ``func`` over each ``[lo_i, hi_i]``.

    ``func`` must accept an ndarray of any shape.  Each cell is compared against
    its two halves and split until they agree; all cells of one depth are
    evaluated in a single vectorized call.

    Returns ``(values, errors)`` with one entry per input cell.
    """
    lo = np.asarray(lo, dtype=float).ravel()
    hi = np.asarray(hi, dtype=float).ravel()
    n = lo.size
    total = np.zeros(n)
    err = np.zeros(n)
    if n == 0:
        return total, err
    owner = np.arange(n)
    coarse = _gl(func, lo, hi)
    for _ in range(max_depth):
        mid = 0.5 * (lo + hi)
        left = _gl(func, lo, mid)
        right = _gl(func, mid, hi)
        fine = left + right
        with np.errstate(invalid="ignore"):
            diff = np.abs(fine - coarse)
            ok = (diff <= rtol * np.abs(fine)) | (diff <= atol) | ~np.isfinite(fine)
            ok |= (hi - lo) <= 8 * np.finfo(float).eps * np.maximum(np.abs(hi), 1e-300)
        np.add.at(total, owner[ok], fine[ok])
        np.add.at(err, owner[ok], np.where(np.isfinite(diff[ok]), diff[ok], 0.0))
        bad = ~ok
        if not bad.any():
            return total, err
        if bad.sum() > max_cells:
            # refinement is not converging (noise-level integrand): accept as is
            np.add.at(total, owner[bad], fine[bad])
            np.add.at(err, owner[bad], diff[bad])
            return total, err
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
        owner = np.concatenate([owner[bad], owner[bad]])
    np.add.at(total, owner, coarse)
    np.add.at(err, owner, np.abs(coarse))
    return total, err


def integrate(func, a, b, breaks=(), rtol=1e-13):
    """Integrate over ``[a, b]`` split at ``breaks``; returns ``(value, error)``."""
    edges = np.unique(np.concatenate([[a, b], [x for x in breaks if a < x < b]]))
    vals, errs = integrate_cells(func, edges[:-1], edges[1:], rtol=rtol)
    return float(vals.sum()), float(errs.sum())


# ---------------------------------------------------------------------------
# Sources of octave increments


@dataclass
class SingularSource:
    """Integrand on ``w in (0, width]`` that may blow up as ``w -> 0``.

    ``deep`` optionally evaluates ``f(exp(-tau)) * exp(-tau)`` directly in
    ``tau`` (usually through logarithms), enabling the second stage.
    """

    width: float
    func: Callable[[np.ndarray], np.ndarray]
    breaks: Sequence[float] = ()
    deep: Callable[[np.ndarray], np.ndarray] | None = None
    deep_breaks: Sequence[float] = ()
    atol: float = 0.0

    def octaves(self, k0, k1, rtol):
        brk = np.sort(np.asarray(self.breaks, dtype=float))
        los, his, lab = [], [], []
        for k in range(k0, k1):
            hi = self.width * 2.0 ** (-k)
            lo = hi * 0.5
            inner = brk[(brk > lo) & (brk < hi)]
            edges = np.concatenate([[lo], inner, [hi]])
            los.append(edges[:-1])
            his.append(edges[1:])
            lab.append(np.full(edges.size - 1, k - k0))
        vals, errs = integrate_cells(self.func, np.concatenate(los), np.concatenate(his), rtol=rtol, atol=self.atol)
        lab = np.concatenate(lab)
        inc = np.zeros(k1 - k0)
        er = np.zeros(k1 - k0)
        np.add.at(inc, lab, vals)
        np.add.at(er, lab, errs)
        return inc, er

    def blocks(self, tau0, i0, i1, rtol):
        brk = np.sort(np.asarray(self.deep_breaks, dtype=float))
        inc = np.zeros(i1 - i0)
        er = np.zeros(i1 - i0)
        for i in range(i0, i1):
            lo = tau0 * 2.0**i
            hi = 2.0 * lo
            inner = brk[(brk > lo) & (brk < hi)]
            # resolve the fast initial decay of power-type integrands
            sub = lo + (hi - lo) * np.array([0.0, 1 / 256, 1 / 64, 1 / 16, 1 / 4])
            edges = np.unique(np.concatenate([sub, inner, [hi]]))
            # log-space evaluation at large tau carries absolute noise ~ eps * tau
            cell_rtol = max(rtol, 64 * np.finfo(float).eps * hi)
            vals, errs = integrate_cells(self.deep, edges[:-1], edges[1:], rtol=cell_rtol, max_depth=30)
            inc[i - i0] = vals.sum()
            er[i - i0] = errs.sum() + cell_rtol * abs(vals.sum())
        return inc, er


# ---------------------------------------------------------------------------
# Classification of increment sequences


@dataclass
class _Verdict:
    kind: str  # "converged" | "diverged" | "undecided"
    tail: float = 0.0
    tail_err: float = 0.0
    reason: str = ""
    decay: float | None = None


def _slope(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.size < 2:
        return 0.0
    xm = x - x.mean()
    den = float(xm @ xm)
    return float(xm @ (y - y.mean()) / den) if den > 0 else 0.0


def growth_slope(partials, window=WINDOW):
    """Slope of ``log2(partial)`` per step over the last ``window`` entries."""
    p = np.asarray(partials, float)[-window:]
    p = p[np.isfinite(p) & (p > 0)]
    if p.size < 2:
        return None
    return _slope(np.arange(p.size), np.log2(p))


def _classify(inc, base, tol, threshold, window, allow_harmonic):
    inc = np.asarray(inc, float)
    if not np.all(np.isfinite(inc)):
        return _Verdict("diverged", reason="infinite increment")
    total = base + float(inc.sum())
    n = inc.size
    if n < window:
        return _Verdict("undecided", reason="short")
    # negligible relative to the partial sum reached at that point
    floor = 1e-14 * np.maximum(np.abs(base + np.cumsum(inc)), 1e-300)
    tail_inc = np.where(inc > floor, inc, 0.0)
    if np.all(tail_inc[-3:] == 0.0):
        return _Verdict("converged", reason="vanishing increments")
    idx = np.arange(n)

    def fit(sl):
        m = tail_inc[sl] > 0
        if m.sum() < 3:
            return None
        return _slope(idx[sl][m], np.log2(tail_inc[sl][m]))

    s_late = fit(slice(n - window, n))
    s_early = fit(slice(n // 2 - window, n // 2)) if n // 2 >= window else None
    if s_late is None:
        return _Verdict("converged", reason="sparse increments")
    if s_late >= -1e-3:
        return _Verdict("diverged", reason="non-decaying increments", decay=s_late)
    last = tail_inc[tail_inc > 0][-1]
    geometric = s_late <= -0.5 or (s_early is not None and s_early < 0 and s_late / s_early > 0.75)
    if geometric:
        rho = 2.0**s_late
        tail = last * rho / (1 - rho)
        if s_early is not None and s_early < 0:
            rho_e = 2.0**s_early
            tail_err = abs(tail - last * rho_e / (1 - rho_e))
        else:
            tail_err = tail
        tail_err += 1e-14 * abs(total)
        if tail_err <= tol * max(abs(total + tail), 1e-300):
            return _Verdict("converged", tail, tail_err, "geometric tail", s_late)
        if total > threshold:
            return _Verdict("diverged", reason="threshold exceeded", decay=s_late)
        return _Verdict("undecided", tail, tail_err, "slow geometric", s_late)
    ks = np.arange(n - window, n) + 1.0
    m = tail_inc[n - window:] > 0
    gamma = _slope(np.log(ks[m]), np.log(tail_inc[n - window:][m]))
    if gamma >= -1.05:
        if allow_harmonic or total > threshold:
            return _Verdict("diverged", reason="harmonic-or-slower decay", decay=gamma)
        return _Verdict("undecided", reason="polynomial divergent", decay=gamma)
    tail = last * n / (-gamma - 1)
    if total > threshold:
        return _Verdict("diverged", reason="threshold exceeded", decay=gamma)
    return _Verdict("undecided", tail, tail, "polynomial", gamma)


def certify_increments(
    octave_fn,
    *,
    base=0.0,
    base_err=0.0,
    tol=DEFAULT_TOL,
    horizon=DEFAULT_HORIZON,
    max_octaves=MAX_OCTAVES,
    threshold=DEFAULT_THRESHOLD,
    window=WINDOW,
    deep_fn=None,
    deep_blocks=DEEP_BLOCKS,
    cutoff_scale=1.0,
):
    """Run the octave protocol and return a :class:`NormResult`.

    ``octave_fn(k0, k1)`` returns nonnegative increments (and error estimates)
    for octaves ``k0..k1-1``; octave ``k`` accounts for cutoffs between
    ``2^-k`` and ``2^-(k+1)``.  ``deep_fn(K, i0, i1)`` returns second-stage
    increments for the region below octave ``K``.
    """
    inc, errs = octave_fn(0, horizon)
    inc = np.asarray(inc, float)
    errs = np.asarray(errs, float)
    inc[0] += 0.0
    while True:
        verdict = _classify(inc, base, tol, threshold, window, allow_harmonic=deep_fn is None)
        if verdict.kind != "undecided":
            break
        if deep_fn is not None and verdict.reason != "slow geometric":
            break
        if inc.size >= max_octaves:
            break
        k0 = inc.size
        k1 = min(max_octaves, k0 + horizon)
        more, more_err = octave_fn(k0, k1)
        inc = np.concatenate([inc, more])
        errs = np.concatenate([errs, more_err])

    partials = base + np.cumsum(inc)
    evidence = [
        {"cutoff": cutoff_scale * 2.0 ** -(k + 1), "partial": float(p)} for k, p in enumerate(partials)
    ]
    info = {"octaves": int(inc.size), "reason": verdict.reason}
    quad_err = float(base_err + np.nansum(errs[np.isfinite(errs)]))

    if verdict.kind == "undecided" and deep_fn is not None:
        K = inc.size
        d_base = float(partials[-1])
        d_inc, d_err = deep_fn(K, 0, 12)
        while True:
            dv = _classify(d_inc, d_base, tol, threshold, 6, allow_harmonic=True)
            if dv.kind != "undecided" or d_inc.size >= deep_blocks:
                break
            more, more_err = deep_fn(K, d_inc.size, min(deep_blocks, d_inc.size + 8))
            d_inc = np.concatenate([d_inc, more])
            d_err = np.concatenate([d_err, more_err])
        d_part = d_base + np.cumsum(d_inc)
        tau0 = -math.log(cutoff_scale * 2.0**-K)
        for i, p in enumerate(d_part):
            tau = tau0 * 2.0 ** (i + 1)
            evidence.append({"cutoff": math.exp(-tau) if tau < 700 else 0.0, "tau": tau, "partial": float(p)})
        info.update(deep_blocks=int(d_inc.size), deep_reason=dv.reason)
        partials = np.concatenate([partials, d_part])
        quad_err += float(np.nansum(np.asarray(d_err)[np.isfinite(d_err)]))
        verdict = dv
        if verdict.kind == "undecided":
            verdict = _Verdict("inconclusive", verdict.tail, verdict.tail_err, verdict.reason)

    slope = growth_slope(partials, window)
    total = float(partials[-1])
    if verdict.kind == "converged":
        value = total + verdict.tail
        err = quad_err + verdict.tail_err
        status = Status.CONVERGED if err <= max(tol * abs(value), 1e-300) or value == 0 else Status.INCONCLUSIVE
        if status is Status.INCONCLUSIVE:
            info["reason"] = "quadrature error above tolerance"
        return NormResult(value, err, status, evidence, slope, info)
    if verdict.kind == "diverged":
        return NormResult(math.inf, math.inf, Status.DIVERGED, evidence, slope, info)
    return NormResult(total + verdict.tail, quad_err + verdict.tail_err, Status.INCONCLUSIVE, evidence, slope, info)


def certify_sources(sources, *, regular=(0.0, 0.0), rtol=1e-13, **kw):
    """Certify ``sum(regular) + sum of integrals of singular sources``."""
    sources = list(sources)

    def octave_fn(k0, k1):
        inc = np.zeros(k1 - k0)
        err = np.zeros(k1 - k0)
        for s in sources:
            a, b = s.octaves(k0, k1, rtol)
            inc += a
            err += b
        if k0 == 0:
            inc[0] += regular[0]
            err[0] += regular[1]
        return inc, err

    deep_fn = None
    if sources and all(s.deep is not None for s in sources):

        def deep_fn(K, i0, i1):
            inc = np.zeros(i1 - i0)
            err = np.zeros(i1 - i0)
            for s in sources:
                tau0 = -math.log(s.width * 2.0**-K)
                a, b = s.blocks(tau0, i0, i1, rtol)
                inc += a
                err += b
            return inc, err

    if not sources:
        value, err = regular
        if not math.isfinite(value):
            return NormResult(math.inf, math.inf, Status.DIVERGED, info={"reason": "infinite integrand"})
        return NormResult(float(value), float(err), Status.CONVERGED, info={"octaves": 0})
    return certify_increments(octave_fn, deep_fn=deep_fn, **kw)
