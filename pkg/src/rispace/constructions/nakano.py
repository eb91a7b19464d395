"""Nakano constructions: sequence-space blocks, level-set extraction, escaping exponents."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ExtractionFailure, PreconditionFailure
from ..funcrep import PiecewiseFunction, Segment
from ..generators import ExponentFunction
from ..inclusions import essential_range, nakano_inclusion
from ..norms import DEFAULT_TOL, WeightedSeq, nakano_modular, nakano_norm, seq_modular, seq_nakano_norm
from ..quadrature import Status
from .report import WitnessReport

LN2 = math.log(2.0)
MEASURE_TOL = 1e-12


def geometric_log_weight(k):
    """``log w_k`` for the default weights ``w_k = 2^-k``."""
    return -np.asarray(k, dtype=float) * LN2


# ---------------------------------------------------------------------------
# weighted sequence spaces


def block_indices(m: int, n: int, blocks: int, vectors: int, terms: int) -> np.ndarray:
    """``Omega_{m,n}``: the progression ``r + P j`` with ``P = blocks * vectors``.

    The progressions for ``m <= blocks``, ``n <= vectors`` are pairwise
    disjoint and together cover the positive integers.
    """
    P = blocks * vectors
    r = (n - 1) * blocks + m
    return r + P * np.arange(terms, dtype=np.int64)


def _block_log_coeffs(idx, q, log_weight):
    """``log |a_{k_j}|`` with ``a_{k_j} = (j w_{k_j})^(-1/q)``."""
    j = np.arange(1, idx.size + 1, dtype=float)
    return -(np.log(j) + log_weight(idx)) / q


def nakano_seq_witness(p: float = 1.0, *, log_weight=geometric_log_weight, weight_bound=(1.0, 0.5),
                       blocks: int = 12, terms: int = 10_000, vectors: int = 1, probes=(1.1, 1.5, 2.0),
                       tol=DEFAULT_TOL):
    """Vectors ``x_n = sum_m 2^-m x_{m,n}`` in ``l_p(w)`` but in no ``l_q(w)``, ``q > p``.

    Block ``x_{m,n}`` lives on ``Omega_{m,n}``, has unit ``l_p(w)`` norm and a
    divergent ``q_m``-modular, ``q_m = p + 1/m``.  Returns ``(report, vectors)``.
    """
    if p < 1:
        raise PreconditionFailure("p must be at least 1")
    expo = lambda k: np.full(np.shape(k), float(p))
    qs = [p + 1.0 / m for m in range(1, blocks + 1)]
    rep = WitnessReport("10", horizon={"blocks": blocks, "terms_per_block": terms, "vectors": vectors, "tol": tol})
    rep.objects = {"p": p, "q_m": qs, "weight_bound": list(weight_bound), "probes": list(probes)}
    try:
        WeightedSeq(np.array([1]), np.array([0.0]), expo, log_weight, weight_bound=weight_bound)
    except ValueError as exc:
        raise PreconditionFailure(f"weights not certified summable: {exc}") from exc
    out = []
    for n in range(1, vectors + 1):
        all_idx, all_la = [], []
        for m, qm in enumerate(qs, start=1):
            idx = block_indices(m, n, blocks, vectors, terms)
            la = _block_log_coeffs(idx, qm, log_weight)
            blk = WeightedSeq(idx, la, expo, log_weight, weight_bound=weight_bound)
            raw = seq_nakano_norm(blk, tol=tol)
            la = la - math.log(raw.value)
            unit = seq_nakano_norm(WeightedSeq(idx, la, expo, log_weight, weight_bound=weight_bound), tol=tol)
            rep.check(f"||x_{{{m},{n}}}||_l_p(w) = 1 within 1e-8", unit.converged and abs(unit.value - 1.0) <= 1e-8,
                      value=unit.value)
            harm = seq_modular(WeightedSeq(idx, _block_log_coeffs(idx, qm, log_weight), expo, log_weight,
                                           weight_bound=weight_bound), 1.0, lambda k, q=qm: np.full(np.shape(k), q),
                               tol=tol)
            rep.add(f"x_{{{m},{n}}} (before scaling) has harmonic q_{m}-modular", harm, "Diverged", slope=harm.slope)
            all_idx.append(idx)
            all_la.append(la - m * LN2)
        x = WeightedSeq(np.concatenate(all_idx), np.concatenate(all_la), expo, log_weight, weight_bound=weight_bound)
        out.append(x)
        rep.add(f"x_{n} in l_p(w)", seq_nakano_norm(x, tol=tol), "Converged")
        for q in probes:
            if q <= p:
                rep.notes.append(f"probe q = {q} skipped: not above p")
                continue
            res = seq_modular(x, 1.0, lambda k, q=q: np.full(np.shape(k), float(q)), tol=tol)
            partial = max((e["partial"] for e in res.evidence), default=0.0)
            rep.add(f"x_{n} not in l_{q:g}(w): q-modular partial sums diverge", res, "Diverged",
                    slope=res.slope, last_partial=partial)
    return rep, out


# ---------------------------------------------------------------------------
# Nakano function spaces


def _preimage(p: ExponentFunction, lo: float, hi: float) -> list:
    """Intervals where ``lo < p(t) < hi``."""
    out = []
    for pc in p.pieces:
        if pc.q0 == pc.q1:
            if lo < pc.q0 < hi:
                out.append((pc.a, pc.b))
            continue
        s = (pc.q1 - pc.q0) / (pc.b - pc.a)
        t1, t2 = pc.a + (lo - pc.q0) / s, pc.a + (hi - pc.q0) / s
        a, b = max(pc.a, min(t1, t2)), min(pc.b, max(t1, t2))
        if b > a:
            out.append((a, b))
    return _merge(out)


def _merge(iv):
    iv = sorted(iv)
    out = []
    for a, b in iv:
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def _minus(iv, cut):
    out = []
    for a, b in iv:
        pieces = [(a, b)]
        for c, d in cut:
            nxt = []
            for x, y in pieces:
                if d <= x or c >= y:
                    nxt.append((x, y))
                    continue
                if c > x:
                    nxt.append((x, c))
                if d < y:
                    nxt.append((d, y))
            pieces = nxt
        out.extend(pieces)
    return [(a, b) for a, b in out if b > a]


def _measure(iv):
    return sum(b - a for a, b in iv)


def extract_level_sets(p: ExponentFunction, r: float, count: int) -> list:
    """Disjoint intervals ``B_n`` inside ``p^-1(r - 1/n, r + 1/n)``, ``n = 1..count``.

    Each ``B_n`` is taken from the shell ``P_n \\ P_{n+1}`` when that has room
    (so the core around ``p = r`` is kept for later sets), otherwise from the
    left of the free part of ``P_n`` using at most half of it.  The measure is
    ``min(available, 2^-n)``.
    """
    used = []
    out = []
    for n in range(1, count + 1):
        Pn = _minus(_preimage(p, r - 1.0 / n, r + 1.0 / n), used)
        shell = _minus(Pn, _preimage(p, r - 1.0 / (n + 1), r + 1.0 / (n + 1)))
        src, share = (shell, 1.0) if _measure(shell) > 0 else (Pn, 0.5)
        avail = _measure(src) * share
        want = min(avail, 2.0**-n)
        if not want > 0:
            break
        a, b = src[0]
        want = min(want, b - a)
        B = (a, a + want)
        out.append(B)
        used = _merge(used + [B])
    return out


def _sup_on(p: ExponentFunction, a: float, b: float) -> float:
    pts = [a, b] + [x for x in p.breakpoints() if a < x < b]
    return float(max(np.max(p.value(np.array(pts), "right")), np.max(p.value(np.array(pts), "left"))))


def _inf_on(p: ExponentFunction, a: float, b: float) -> float:
    pts = [a, b] + [x for x in p.breakpoints() if a < x < b]
    return float(min(np.min(p.value(np.array(pts), "right")), np.min(p.value(np.array(pts), "left"))))


def _range_gap(q: ExponentFunction, r: float) -> float:
    """Distance from ``r`` to the essential range of ``q`` (0 if inside)."""
    return min(0.0 if lo <= r <= hi else min(abs(r - lo), abs(r - hi)) for lo, hi in essential_range(q).intervals)


def nakano_function_witness(p: ExponentFunction, r: float, probes=(), *, blocks: int = 12, per_block: int = 3,
                            tol=DEFAULT_TOL, tail_limit: int = 1 << 16):
    """``f = sum a_n chi_{B_n}`` in ``L^{p(.)}`` escaping every ``L^{q(.)}`` with ``q >= p``, ``r`` not in ``R_q``.

    The sets ``B_n`` are interleaved into ``blocks`` progressions; in block
    ``m`` the ``j``-th set carries ``a = (j lambda(B_n))^(-1/q_m)``,
    ``q_m = r + 1/m``, scaled by ``2^-m``.  Beyond the materialized horizon the
    coefficient sequence continues by the same formula with
    ``lambda(B_n) = 2^-n``.  Returns ``(report, f)``.
    """
    R = essential_range(p)
    if not R.contains(r):
        raise PreconditionFailure(f"r = {r} is not in the essential range {R.intervals}", [R.to_dict()])
    H = blocks * per_block
    Bs = extract_level_sets(p, r, H)
    rep = WitnessReport("11", horizon={"sets": H, "blocks": blocks, "per_block": per_block, "tol": tol,
                                       "tail_limit": tail_limit})
    if not Bs:
        raise ExtractionFailure("no level set could be extracted near r")
    if len(Bs) < H:
        rep.notes.append(f"extraction stopped after {len(Bs)} of {H} sets; claims cover the finite horizon only")
    H = len(Bs)
    lam = np.array([b - a for a, b in Bs])
    pn = np.array([_sup_on(p, a, b) for a, b in Bs])
    qm = lambda n: r + 1.0 / ((np.asarray(n) - 1) % blocks + 1)
    jj = lambda n: (np.asarray(n) - 1) // blocks + 1
    mm = lambda n: (np.asarray(n) - 1) % blocks + 1

    def log_lam(n):
        n = np.asarray(n, dtype=np.int64)
        out = -n.astype(float) * LN2
        inside = n <= H
        out[inside] = np.log(lam[n[inside] - 1])
        return out

    def log_a(n):
        n = np.asarray(n, dtype=np.int64)
        return -(np.log(jj(n)) + log_lam(n)) / qm(n) - mm(n) * LN2

    def expo_p(n):
        n = np.asarray(n, dtype=np.int64)
        out = r + 1.0 / n.astype(float)  # ess sup bound for sets beyond the horizon
        inside = n <= H
        out[inside] = pn[n[inside] - 1]
        return out

    idx = np.arange(1, H + 1, dtype=np.int64)
    f = PiecewiseFunction(tuple(Segment.constant(a, b, float(np.exp(log_a(np.array([n]))[0])))
                                for n, (a, b) in zip(idx, Bs)))
    rep.objects = {"p": p.to_dict(), "r": r, "sets": [list(B) for B in Bs], "p_n": pn.tolist(),
                   "f": f.to_dict(), "probes": [q.to_dict() for q in probes]}
    rep.check("B_n pairwise disjoint", all(b1 <= a2 for (_, b1), (a2, _) in zip(sorted(Bs)[:-1], sorted(Bs)[1:])))
    # endpoints of B_n may touch the level r +- 1/n, a null set
    rep.check("B_n inside p^-1(r - 1/n, r + 1/n)",
              all(_inf_on(p, a, b) >= r - 1.0 / n - 1e-12 and _sup_on(p, a, b) <= r + 1.0 / n + 1e-12
                  for n, (a, b) in zip(idx, Bs)))
    # materialized f is a simple function: its modular is finite at some scale
    s, mod = 1.0, None
    for _ in range(60):
        mod = nakano_modular(f, p, s, tol=tol)
        if mod.status is Status.CONVERGED:
            break
        s *= 2.0
    rep.add(f"nakano_modular(f/s, p) finite at s = {s:g}", mod, "Converged")
    seq = WeightedSeq(idx, log_a(idx), expo_p, log_lam, tail=log_a, tail_limit=tail_limit)
    rep.add("sum |a_n|^p_n lambda(B_n) < inf (membership criterion)", seq_modular(seq, 1.0, tol=tol), "Converged")
    for q in probes:
        label = repr(q)
        if not nakano_inclusion(p, q).holds:
            rep.notes.append(f"probe {label} skipped: q >= p fails")
            continue
        d = _range_gap(q, r)
        if d <= 0:
            rep.notes.append(f"probe {label} skipped: r lies in its essential range")
            continue
        n0 = int(math.floor(1.0 / d)) + 1
        if n0 >= blocks:
            rep.notes.append(f"probe {label}: n0 = {n0} needs more than {blocks} blocks")
        above = [_inf_on(q, a, b) > r + 1.0 / n0 for n, (a, b) in zip(idx, Bs) if n > n0]
        rep.check(f"q > r + 1/n0 on B_n for n > n0 = {n0} ({label})", all(above), n0=n0, gap=d)
        e = r + 1.0 / n0
        low = WeightedSeq(np.arange(n0 + 1, H + 1, dtype=np.int64), log_a(np.arange(n0 + 1, H + 1)),
                          lambda n, e=e: np.full(np.shape(n), e), log_lam, tail=log_a, tail_limit=tail_limit)
        res = seq_modular(low, 1.0, tol=tol)
        rep.add(f"lower sum sum_(n>n0) |a_n|^(r+1/n0) lambda(B_n) diverges ({label})", res, "Diverged",
                slope=res.slope)
    return rep, f


# ---------------------------------------------------------------------------
# escaping exponent


def _level_points(f: PiecewiseFunction, level: float) -> list:
    pts = []
    for pc in f.pieces:
        if pc.kind != "const" and pc.lo < level < pc.hi:
            u = float(pc.level_u(np.array([level]))[0])
            pts.append(float(pc.seg.t_of_u(np.array([u]))[0]))
    return pts


def escaping_exponent(f: PiecewiseFunction, p: ExponentFunction, *, tol=DEFAULT_TOL, check: bool = True):
    """``q = p`` on ``A_{n0} = {|f| > n0}`` and ``p + 1`` elsewhere.

    ``n0`` is the least positive integer with ``lambda(A_{n0}) < 1`` (by more
    than ``MEASURE_TOL``).
    Returns ``(q, n0)``; with ``check`` the precondition
    ``nakano_norm(f, p)`` Converged is enforced.
    """
    if check:
        nr = nakano_norm(f, p, tol=tol)
        if nr.status is not Status.CONVERGED:
            raise PreconditionFailure(f"f has no certified finite Nakano norm ({nr.status.value})", [nr.to_dict()])
    n0 = 1
    # a complement of measure below rounding level is not a set of positive measure
    while float(f.distribution_function(np.array([float(n0)]))[0]) >= 1.0 - MEASURE_TOL:
        n0 += 1
    cuts = sorted({0.0, 1.0} | set(p.breakpoints().tolist()) | set(f.breakpoints().tolist())
                  | {s.a for s in f.segments} | {s.b for s in f.segments} | set(_level_points(f, float(n0))))
    cuts = [c for c in cuts if 0.0 <= c <= 1.0]
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        inside = abs(f.evaluate(mid)) > n0
        q0 = float(p.value(np.array([a]), "right")[0])
        q1 = float(p.value(np.array([b]), "left")[0])
        d = 0.0 if inside else 1.0
        pieces.append((a, b, q0 + d, q1 + d))
    return ExponentFunction(pieces), n0


def escaping_exponent_report(f: PiecewiseFunction, p: ExponentFunction, *, tol=DEFAULT_TOL):
    """Re-verify the output of :func:`escaping_exponent`.  Returns ``(report, q)``."""
    q, n0 = escaping_exponent(f, p, tol=tol)
    lamA = float(f.distribution_function(np.array([float(n0)]))[0])
    rep = WitnessReport("union", horizon={"tol": tol})
    rep.objects = {"f": f.to_dict(), "p": p.to_dict(), "q": q.to_dict(), "n0": n0, "lambda(A_n0)": lamA}
    rep.check("lambda(A_n0) < 1", lamA < 1.0 - MEASURE_TOL, n0=n0)
    rep.add("q >= p a.e.", nakano_inclusion(p, q), "True")
    raised = sum(b - a for (a, b), d in _differences(p, q) if d > 0)
    rep.check("q != p on a set of positive measure", raised > 0, measure=raised)
    s, mod = 1.0, None
    for _ in range(60):
        mod = nakano_modular(f, q, s, tol=tol)
        if mod.status is Status.CONVERGED:
            break
        s *= 2.0
    rep.add(f"nakano_modular(f/s, q) finite at s = {s:g}", mod, "Converged")
    return rep, q


def _differences(p: ExponentFunction, q: ExponentFunction):
    cuts = sorted({0.0, 1.0} | set(p.breakpoints().tolist()) | set(q.breakpoints().tolist()))
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            m = np.array([0.5 * (a + b)])
            yield (a, b), float(q.value(m)[0] - p.value(m)[0])
