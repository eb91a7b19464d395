"""Orlicz constructions: scaled generators, union witnesses, index witnesses."""

from __future__ import annotations

import math

import numpy as np

from ..errors import CatalogMiss, DegenerateError, PreconditionFailure
from ..funcrep import PiecewiseFunction, Segment, disjoint_sum, translate_dilate
from ..generators import ConvexGenerator, ExpConvex, PowLogConvex, ScaledConvex, delta2_check, orlicz_indices
from ..inclusions import dss_orlicz_search, index_gap, orlicz_inclusion
from ..norms import DEFAULT_TOL, luxemburg_norm, orlicz_modular
from ..quadrature import Status
from .report import WitnessReport

LN2 = math.log(2.0)
PROBE_SCALES = (0.25, 1.0, 4.0)


# ---------------------------------------------------------------------------
# the b-sequence


def suffix_sums(c, tail: float = 0.0) -> np.ndarray:
    """``S_n = sum_{k >= n} c_k`` (``tail`` covers the terms beyond ``c``)."""
    c = np.asarray(c, dtype=float)
    return (np.cumsum(c[::-1])[::-1] + tail) if c.size else np.array([])


def b_rule(c, tail: float = 0.0):
    """``b_1 = 1``, ``b_{n+1} = max(b_n, min(2 b_n, S_{n+1}^(-1/2)))``.

    Returns ``(b, S)``.  The sequence is nondecreasing with ratios at most 2,
    and ``b_n <= max(1, S_n^(-1/2))``, which gives ``sum b_n c_n <= 2 sqrt(S_1)``
    when ``S_1 <= 1`` (and ``<= S_1 + 1`` in general).
    """
    S = suffix_sums(c, tail)
    n = S.size
    b = np.ones(n)
    for i in range(1, n):
        cap = math.inf if S[i] <= 0 else S[i] ** -0.5
        b[i] = max(b[i - 1], min(2.0 * b[i - 1], cap))
    return b, S


def b_sum_bound(S1: float) -> float:
    """Upper bound for ``sum b_n c_n``: ``2 sqrt(S_1)`` if ``S_1 <= 1``, else ``S_1 + 1``."""
    return 2.0 * math.sqrt(S1) if S1 <= 1.0 else S1 + 1.0


# ---------------------------------------------------------------------------
# level sets A_n = {2^n <= |x| < 2^(n+1)}


def _measure_at_least(x: PiecewiseFunction, s: np.ndarray) -> np.ndarray:
    """``lambda{|x| >= s}``: the distribution function plus flat pieces at level ``s``."""
    out = x.distribution_function(s)
    for p in x.pieces:
        if p.kind == "const":
            out = out + np.where(s == p.hi, p.length, 0.0)
    return out


def level_measures(x: PiecewiseFunction, levels: int):
    """``lambda(A_n)`` for ``n = 1..levels`` and ``lambda{0 < |x| < 2}``."""
    s = 2.0 ** np.arange(1, levels + 2, dtype=float)
    ge = _measure_at_least(x, s)
    lam = np.maximum(ge[:-1] - ge[1:], 0.0)
    low = max(x.support_measure - float(ge[0]), 0.0)
    return lam, low


def _tail_estimate(c: np.ndarray):
    """Sum of ``c_n`` beyond the horizon from the trend of the last terms."""
    pos = np.flatnonzero(c > 0)
    if pos.size == 0 or c[-1] == 0.0:
        return 0.0, "exact (levels exhausted)"
    if pos.size < 4:
        return math.inf, "undetermined"
    last = c[pos[-4:]]
    rho = float(np.max(last[1:] / last[:-1]))
    if rho < 0.99:
        return float(c[-1] * rho / (1.0 - rho)), f"geometric (ratio {rho:.4g})"
    n = np.arange(1, c.size + 1, dtype=float)[-20:]
    g = float(np.polyfit(np.log(n), np.log(c[-20:]), 1)[0])
    if g < -1.05:
        return float(c[-1] * n[-1] / (-g - 1.0)), f"polynomial (exponent {g:.4g})"
    return math.inf, "tail not summable within the horizon"


def orlicz_escape(x: PiecewiseFunction, psi: ConvexGenerator, *, levels: int = 200, tol=DEFAULT_TOL,
                  horizon=60):
    """Faster-growing ``phi`` (piecewise multiple of ``psi``) with ``x`` still in ``L^phi``.

    Returns ``(report, phi)``.  For essentially bounded ``x`` (every ``A_n``
    null) the factors are ``b_n = n`` and the report is tagged
    ``DegenerateBounded``.
    """
    if x.is_zero:
        raise DegenerateError("orlicz_escape needs a nonzero function")
    d2 = delta2_check(psi)
    if d2.verdict is not True:
        raise PreconditionFailure("psi does not pass the Delta_2 check", [d2.to_dict()])
    norm = luxemburg_norm(x, psi, tol=tol, horizon=horizon)
    if norm.status is not Status.CONVERGED:
        raise PreconditionFailure(f"x has no certified finite Luxemburg norm ({norm.status.value})", [norm.to_dict()])

    lam, low = level_measures(x, levels)
    n = np.arange(1, levels + 1, dtype=float)
    with np.errstate(divide="ignore"):
        logc = psi.log_value(n * LN2) + np.log(lam)
    c = np.exp(logc)
    rep = WitnessReport("6", horizon={"levels": levels, "octaves": horizon, "tol": tol})
    if not np.any(lam > 0):
        b = n.copy()
        phi = ScaledConvex(psi, b)
        rep.notes.append("DegenerateBounded: every level set A_n is null; b_n = n")
        S = np.zeros(levels)
        tail, tail_how = 0.0, "exact (x essentially bounded)"
    else:
        tail, tail_how = _tail_estimate(c)
        if not math.isfinite(tail):
            raise PreconditionFailure(f"sum of psi(2^n) lambda(A_n) not certified: {tail_how}")
        b, S = b_rule(c, tail)
        phi = ScaledConvex(psi, b)
    rep.objects = {"x": x.to_dict(), "psi": psi.to_dict(), "phi": phi.to_dict(), "c": c.tolist(),
                   "S": S.tolist(), "tail": tail, "tail_method": tail_how, "luxemburg_norm(x, psi)": norm.to_dict()}
    rep.check("b_1 = 1 and b nondecreasing", b[0] == 1.0 and bool(np.all(np.diff(b) >= 0)))
    rep.check("b_{n+1}/b_n <= 2", bool(np.all(b[1:] <= 2.0 * b[:-1])), max_ratio=float(np.max(b[1:] / b[:-1])))
    sum_converges = (not np.any(lam > 0)) or math.isfinite(tail)
    if np.any(lam > 0):
        rep.check("b_n unbounded (b exceeds 1e3 within the horizon, or S_n -> 0)",
                  bool(b[-1] >= 1e3 or (sum_converges and S[-1] < S[0] * 1e-6)), b_last=float(b[-1]))
    else:
        rep.check("b_n = n unbounded", bool(np.array_equal(b, n)), b_last=float(b[-1]))
    if np.any(lam > 0):
        S1 = float(S[0])
        inside = float(np.sum(b * c))
        # beyond the horizon b_n <= S_n^(-1/2), so the rest adds at most 2 sqrt(S_{N+1})
        total = inside + 2.0 * math.sqrt(tail)
        bound = b_sum_bound(S1)
        label = "sum b_n c_n <= 2 sqrt(S_1)" if S1 <= 1.0 else "sum b_n c_n <= S_1 + 1 (S_1 > 1)"
        rep.check(label, total <= bound, sum=total, S1=S1, bound=bound)
    rep.add("L^phi subset L^psi (psi <= c phi at infinity)", orlicz_inclusion(phi, psi), "True")
    cs = [C for C in (0.5, 0.125, 0.03125) if C * b[min(19, b.size - 1)] >= 1.0] or [1.0]
    for C in cs:
        rep.add(f"psi prec phi: DSS witness found for C = {C:g}", dss_orlicz_search(psi, phi, C), "True")
    mod = orlicz_modular(x, phi, 1.0, tol=tol, horizon=horizon)
    rep.add("x in L^phi (modular at s = 1)", mod, "Converged")
    logs = [float(psi.log_value(LN2)) + math.log(low)] if low > 0 else []
    with np.errstate(divide="ignore"):
        lb = np.log(b) + psi.log_value((n + 1) * LN2) + np.log(lam)
    logs.extend(lb[np.isfinite(lb)].tolist())
    mbound = float(np.sum(np.exp(logs))) if logs else 0.0
    rep.check("modular at s = 1 <= psi(2) lambda(0<|x|<2) + sum b_n psi(2^(n+1)) lambda(A_n)",
              mod.converged and mod.value <= mbound * (1 + 1e-9) + tol, modular=mod.value, bound=mbound)
    return rep, phi


# ---------------------------------------------------------------------------
# catalog of escape witnesses on (0, 1]


def catalog_witness(psi: ConvexGenerator, phi: ConvexGenerator) -> PiecewiseFunction:
    """A function on (0, 1] in ``L^psi`` but not in ``L^phi``, or :class:`CatalogMiss`.

    Power pairs use ``u^(-1/s)`` with ``s`` between the exponents; equal
    powers with larger log exponent use ``u^(-1/p) ln(e/u)^(-k)``; against
    exponential growth a power or log-power singularity is used.
    """
    if isinstance(psi, PowLogConvex) and isinstance(phi, PowLogConvex):
        if phi.p > psi.p:
            s = 0.5 * (psi.p + phi.p)
            return PiecewiseFunction((Segment.power(0.0, 1.0, 1.0, -1.0 / s),))
        if phi.p == psi.p and phi.q > psi.q:
            k = (0.5 * (psi.q + phi.q) + 1.0) / psi.p
            return PiecewiseFunction((Segment.logpower(0.0, 1.0, 1.0, -1.0 / psi.p, -k),))
    if isinstance(psi, PowLogConvex) and isinstance(phi, ExpConvex):
        return PiecewiseFunction((Segment.power(0.0, 1.0, 1.0, -1.0 / (psi.p + 1.0)),))
    if isinstance(psi, ExpConvex) and isinstance(phi, ExpConvex) and phi.p > psi.p:
        k = 2.0 / (psi.p + phi.p)
        return PiecewiseFunction((Segment.logpower(0.0, 1.0, 1.0, 0.0, k),))
    raise CatalogMiss(f"no escape witness known for the pair ({psi!r}, {phi!r})")


def orlicz_union_witness(psi: ConvexGenerator, phis=(), *, tol=DEFAULT_TOL, horizon=60,
                         scales=PROBE_SCALES):
    """``x = sum 2^-n x_n`` on ``A_n = (2^-n, 2^(1-n)]`` with ``x_n`` in ``L^psi`` minus ``L^phi_n``.

    Returns ``(report, x)``.
    """
    phis = list(phis)
    bad = [repr(phi) for phi in phis if not orlicz_inclusion(phi, psi).holds]
    if bad:
        raise PreconditionFailure("L^phi_n is not contained in L^psi for: " + ", ".join(bad), bad)
    rep = WitnessReport("union", horizon={"blocks": len(phis), "octaves": horizon, "tol": tol,
                                          "scales": list(scales)})
    blocks = []
    for i, phi in enumerate(phis, start=1):
        placed = translate_dilate(catalog_witness(psi, phi), 2.0**-i, 2.0**-i)
        raw = luxemburg_norm(placed, psi, tol=tol, horizon=horizon)
        if raw.status is not Status.CONVERGED:
            raise PreconditionFailure(f"catalog witness for {phi!r} has no certified L^psi norm", [raw.to_dict()])
        blocks.append(placed.scaled(1.0 / raw.value))
    x = disjoint_sum(blocks, [2.0**-i for i in range(1, len(blocks) + 1)]) if blocks else PiecewiseFunction.zero()
    rep.objects = {"psi": psi.to_dict(), "phis": [p.to_dict() for p in phis], "x": x.to_dict()}
    for i, blk in enumerate(blocks, start=1):
        r = luxemburg_norm(blk, psi, tol=tol, horizon=horizon)
        rep.check(f"||x_{i}||_L^psi = 1", r.converged and abs(r.value - 1.0) <= 1e-8, value=r.value)
    norm = luxemburg_norm(x, psi, tol=tol, horizon=horizon)
    rep.add("x in L^psi", norm, "Converged")
    rep.check("||x||_L^psi <= sum 2^-n", norm.value <= 1.0 + 1e-9, value=norm.value)
    for i, (phi, blk) in enumerate(zip(phis, blocks), start=1):
        part = x.restricted(2.0**-i, 2.0 ** (1 - i))
        for s in scales:
            rep.add(f"x on A_{i} not in L^phi_{i}: modular at s = {s:g} diverges",
                    orlicz_modular(part, phi, s, tol=tol, horizon=horizon), "Diverged")
    return rep, x


# ---------------------------------------------------------------------------
# index witness


def index_witness(psi: ConvexGenerator, count: int = 3, probes=(), *, tol=DEFAULT_TOL, horizon=60,
                  scales=PROBE_SCALES):
    """``x = sum_{n<=N} 2^-n x_n`` with ``x_n = (t - 2^(-n-1))^(-1/q_n)`` on ``(2^(-n-1), 2^-n]``.

    ``q_n = q + 1/n`` with ``q`` the upper index of ``psi``.  Returns ``(report, x)``.
    """
    d2 = delta2_check(psi)
    if d2.verdict is not True:
        raise PreconditionFailure("psi does not pass the Delta_2 check", [d2.to_dict()])
    q_inf = orlicz_indices(psi).q_inf
    if not math.isfinite(q_inf):
        raise PreconditionFailure("upper Orlicz index of psi is infinite")
    qs = [q_inf + 1.0 / n for n in range(1, count + 1)]
    blocks, norms = [], []
    for n, qn in enumerate(qs, start=1):
        a = 2.0 ** (-n - 1)
        raw = PiecewiseFunction((Segment.power(a, 2.0 * a, 1.0, -1.0 / qn, a),))
        r = luxemburg_norm(raw, psi, tol=tol, horizon=horizon)
        if r.status is not Status.CONVERGED:
            raise PreconditionFailure(f"block {n} has no certified L^psi norm", [r.to_dict()])
        blocks.append(raw.scaled(1.0 / r.value))
        norms.append(r.value)
    x = disjoint_sum(blocks, [2.0**-n for n in range(1, count + 1)])
    rep = WitnessReport("8", horizon={"blocks": count, "octaves": horizon, "tol": tol, "scales": list(scales)})
    rep.objects = {"psi": psi.to_dict(), "q_inf": q_inf, "q_n": qs, "raw_norms": norms, "x": x.to_dict(),
                   "probes": [p.to_dict() for p in probes]}
    for n, blk in enumerate(blocks, start=1):
        r = luxemburg_norm(blk, psi, tol=tol, horizon=horizon)
        rep.check(f"||x_{n}||_L^psi = 1", r.converged and abs(r.value - 1.0) <= 1e-8, value=r.value)
    rep.add("x in L^psi (modular at s = 1)", orlicz_modular(x, psi, 1.0, tol=tol, horizon=horizon), "Converged")
    rep.add("x in L^psi (Luxemburg norm)", luxemburg_norm(x, psi, tol=tol, horizon=horizon), "Converged")
    for phi in probes:
        if not index_gap(psi, phi):
            rep.notes.append(f"probe {phi!r} skipped: no index gap q_psi < p_phi")
            continue
        for s in scales:
            res = orlicz_modular(x, phi, s, tol=tol, horizon=horizon)
            rep.add(f"x not in L^{phi!r}: modular at s = {s:g} diverges", res, "Diverged", slope=res.slope)
    return rep, x
