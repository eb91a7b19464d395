"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line; the lines are printed as they
happen and again in the terminal summary.
"""

import math

import numpy as np
import pytest
from scipy.special import logsumexp

from rispace.constructions import (
    ALL_VERIFIED,
    escaping_exponent_report,
    index_witness,
    lorentz_escape,
    marcinkiewicz_witness,
    nakano_function_witness,
    nakano_seq_witness,
    orlicz_escape,
)
from rispace.constructions.orlicz import b_rule
from rispace.funcrep import (
    PiecewiseFunction,
    decreasing_rearrangement,
    disjoint_sum,
    distribution_function,
    indicator,
    logpower_function,
    power_function,
    translate_dilate,
)
from rispace.generators import ExponentFunction, PowLogConcave, PowLogConvex, derivative, tilde
from rispace.norms import lorentz_norm, luxemburg_norm, marcinkiewicz_norm, nakano_norm
from conftest import ACCEPTANCE_LINES, random_piecewise, random_power_piecewise

LN2 = math.log(2.0)


def record(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def brute_b_rule(c):
    """The b recursion written out term by term, no vectorization."""
    S = [math.fsum(c[n:]) for n in range(len(c))]
    b = [1.0]
    for n in range(1, len(c)):
        b.append(max(b[-1], min(2 * b[-1], S[n] ** -0.5)))
    return b, S


# -- 1 -------------------------------------------------------------------------

def test_criterion_1_luxemburg_matches_lp():
    rng = np.random.default_rng(101)
    worst = 0.0
    for p in (1.0, 1.5, 2.0, 4.0):
        for _ in range(20):
            f, lp = random_power_piecewise(rng, p)
            r = luxemburg_norm(f, PowLogConvex(p))
            assert r.converged
            worst = max(worst, abs(r.value - lp) / lp)
    ok = worst <= 1e-8
    record(1, ok, f"80 Luxemburg norms vs analytic L^p, worst rel err {worst:.2e} (tol 1e-8)")
    assert ok


# -- 2 -------------------------------------------------------------------------

def _fundamental_errors(phi):
    lor, mar = [], []
    phit = tilde(phi, require_concave=False)
    for k in range(0, 11):
        t = 2.0**-k
        want = float(phi.value(t))
        chi = indicator(0.0, t)
        lor.append(abs(lorentz_norm(chi, phi).value - want))
        mar.append(abs(marcinkiewicz_norm(chi, phit).value - want))
    return np.array(lor), np.array(mar)


def test_criterion_2_fundamental_functions():
    power = [PowLogConcave(0.5), PowLogConcave(1 / 3)]
    logphi = PowLogConcave(0.5, 1.0)
    errs = [_fundamental_errors(phi) for phi in power]
    worst = max(max(l.max(), m.max()) for l, m in errs)
    lor_log, mar_log = _fundamental_errors(logphi)
    power_ok = worst <= 1e-8 and lor_log.max() <= 1e-8
    bad_k = [k for k in range(11) if mar_log[k] > 1e-8]
    ok = power_ok and not bad_k
    record(2, ok, f"powers: max err {worst:.1e}; t^(1/2)ln(e/t): Lorentz max err {lor_log.max():.1e}, "
                  f"Marcinkiewicz fails at k = {bad_k} (max err {mar_log.max():.3f})")
    assert power_ok
    # every k away from the non-monotone stretch (1/e, 1] matches
    assert mar_log[2:].max() <= 1e-8
    if bad_k:
        # t^(1/2) ln(e/t) decreases on (1/e, 1], so sup_s min(s,t)/phi~(s) is phi(1/e) there
        peak = float(logphi.value(math.exp(-1.0)))
        assert marcinkiewicz_norm(indicator(0.0, 1.0), tilde(logphi, False)).value == pytest.approx(peak, rel=1e-8)
        pytest.xfail("t^(1/2) ln(e/t) is not increasing on (1/e, 1]: M(phi~) identity fails at t = 1, 1/2")


# -- 3 -------------------------------------------------------------------------

def test_criterion_3_marcinkiewicz_witness():
    alphas = [1 / 3, 1 / 2, 2 / 3]
    lines, ok = [], True
    for a in alphas:
        psi = PowLogConcave(a)
        phis = [PowLogConcave(b) for b in alphas + [1.0] if b > a]
        rep = marcinkiewicz_witness(psi, phis)
        own = marcinkiewicz_norm(derivative(psi), psi)
        ok &= own.converged and abs(own.value - 1.0) <= 1e-6 and rep.verdict == ALL_VERIFIED
        for c in rep.claims:
            if "fitted_slope" not in c.detail:
                continue
            fit, ana = c.detail["fitted_slope"], c.detail["analytic_slope"]
            good = c.status == "Diverged" and abs(fit - ana) <= 0.1 * ana
            ok &= good
            lines.append(f"{fit:.3f}/{ana:.3f}")
    record(3, ok, f"||psi'||_M(psi) = 1 +- 1e-6 for alpha in 1/3,1/2,2/3; slopes fitted/analytic {' '.join(lines)}")
    assert ok


# -- 4 -------------------------------------------------------------------------

def lorentz_pairs():
    chi = indicator(0.0, 1.0)
    return [
        (chi, PowLogConcave(1.0)),
        (chi, PowLogConcave(0.9)),
        (chi, PowLogConcave(0.8)),
        (chi, PowLogConcave(0.95)),
        (chi, PowLogConcave(0.9, 0.5)),
        (power_function(1.0, -0.25), PowLogConcave(1.0)),
        (power_function(1.0, -0.25), PowLogConcave(0.95)),
        (power_function(2.0, -0.1), PowLogConcave(0.9)),
        (power_function(2.0, -0.1), PowLogConcave(0.85)),
        (logpower_function(1.0, 0.0, 0.5), PowLogConcave(0.9)),
    ]


def test_criterion_4_lorentz_escape():
    ks = np.arange(31, 41)
    t = 2.0**-ks
    ok, worst_ratio = True, 0.0
    for x, psi in lorentz_pairs():
        assert lorentz_norm(x, psi).converged
        rep, phi = lorentz_escape(x, psi)
        F1 = float(phi.F(1.0))
        v = lorentz_norm(x, phi)
        r = psi.value(t) / phi.value(t)
        good = (rep.verdict == ALL_VERIFIED and v.converged and v.value <= 2 * math.sqrt(F1) * (1 + 1e-6)
                and r[-1] < 1e-4 and bool(np.all(np.diff(r) < 0)))
        ok &= good
        worst_ratio = max(worst_ratio, float(r[-1]))
    record(4, ok, f"10 pairs AllVerified, norm <= 2 sqrt(F(1)), max psi/phi(2^-40) = {worst_ratio:.2e}")
    assert ok


# -- 5 -------------------------------------------------------------------------

def test_criterion_5_orlicz_escape():
    rep, phi = orlicz_escape(power_function(1.0, -0.25), PowLogConvex(2.0))
    ok = rep.verdict == ALL_VERIFIED
    b = np.asarray(phi.b)
    ok &= bool(np.all(b[1:] <= 2.0 * b[:-1]))
    # closed form: c_n = (15/16) 4^-n, S_n = (5/4) 4^-n, S_1 = 5/16
    N = b.size
    n = np.arange(1, N + 1, dtype=float)
    c = 15.0 / 16.0 * 4.0**-n
    np.testing.assert_allclose(rep.objects["c"], c, rtol=1e-12)
    S1 = 5.0 / 16.0
    bb, _ = b_rule(c, tail=1.25 * 4.0 ** -(N + 1))
    # beyond the horizon b_n <= S_n^(-1/2) = (4/5)^(1/2) 2^n, so sum_(n>N) b_n c_n <= (15/16)(4/5)^(1/2) 2^-N
    total = math.fsum(bb * c) + 15.0 / 16.0 * math.sqrt(0.8) * 2.0**-N
    ok &= total <= 2.0 * math.sqrt(S1)
    # brute-force oracle: random summable sequences with S_1 <= 1
    rng = np.random.default_rng(55)
    for _ in range(100):
        m = int(rng.integers(5, 60))
        kind = rng.integers(0, 3)
        if kind == 0:
            seq = rng.uniform(0.1, 1.0) * rng.uniform(0.05, 0.95) ** np.arange(m)
        elif kind == 1:
            seq = rng.uniform(0, 1, m) / (np.arange(1, m + 1) ** rng.uniform(1.1, 3.0))
        else:
            seq = rng.exponential(1.0, m) * 2.0 ** -rng.integers(0, 8, m)
        seq = seq * rng.uniform(0.01, 1.0) / math.fsum(seq)
        bq, Sq = brute_b_rule(list(seq))
        bv, Sv = b_rule(seq)
        np.testing.assert_allclose(bv, bq, rtol=1e-12)
        ok &= all(y <= 2 * x for x, y in zip(bq[:-1], bq[1:]))
        ok &= math.fsum(x * y for x, y in zip(bq, seq)) <= 2 * math.sqrt(Sq[0])
    record(5, ok, f"t^(-1/4), t^2: AllVerified, sum b c = {total:.6f} <= 2 sqrt(S_1) = {2 * math.sqrt(S1):.6f}; "
                  "100 brute-force b-rule sequences confirm")
    assert ok


def test_criterion_5_bound_above_unit_mass():
    # the 2 sqrt(S_1) bound needs S_1 <= 1: for c = (9) the rule gives b = (1) and sum = 9 > 6
    rng = np.random.default_rng(56)
    viol = 0
    for _ in range(100):
        seq = rng.uniform(0.1, 1.0) * rng.uniform(0.05, 0.95) ** np.arange(int(rng.integers(1, 40)))
        seq = seq * rng.uniform(1.5, 20.0) / seq.sum()
        b, S = brute_b_rule(list(seq))
        total = math.fsum(x * y for x, y in zip(b, seq))
        assert total <= S[0] + 1.0
        viol += total > 2 * math.sqrt(S[0])
    if viol:
        pytest.xfail(f"2 sqrt(S_1) exceeded by {viol}/100 sequences with S_1 > 1 (S_1 + 1 holds for all)")


# -- 6 -------------------------------------------------------------------------

def _log_growth(res):
    p = np.array([e["partial"] for e in res.evidence])
    inc = np.diff(p)
    return inc[-10:].mean() >= 0.5 * inc[9:20].mean()


def test_criterion_6_index_witness():
    scales = (0.25, 1.0, 4.0)
    rep, x = index_witness(PowLogConvex(2.0), 3, [PowLogConvex(3.0)], scales=scales)
    ok = rep.verdict == ALL_VERIFIED and rep.claim("x in L^psi (modular").status == "Converged"
    probes = [c for c in rep.claims if c.required == "Diverged"]
    ok &= len(probes) == 3 and all(c.status == "Diverged" and _log_growth(c.result) for c in probes)
    # classical L^p versus L^q, q > p
    for p in (1.5, 2.0):
        rp, _ = index_witness(PowLogConvex(p), 3, [PowLogConvex(p + 0.5), PowLogConvex(p + 1.0)], scales=scales)
        div = [c for c in rp.claims if c.required == "Diverged"]
        ok &= rp.verdict == ALL_VERIFIED and len(div) == 6 and all(_log_growth(c.result) for c in div)
    record(6, ok, "t^2 vs t^3 (N = 3): member Converged, probes at s = 1/4, 1, 4 Diverged with log growth; "
                  "L^p instances p = 1.5, 2 reproduce")
    assert ok


# -- 7 -------------------------------------------------------------------------

def _direct_block_logs(m, q_m, blocks, terms):
    k = m + blocks * np.arange(terms, dtype=float)
    j = np.arange(1, terms + 1, dtype=float)
    return k, -(np.log(j) - k * LN2) / q_m


def test_criterion_7_nakano_seq_witness():
    blocks, terms = 12, 10_000
    rep, (x,) = nakano_seq_witness(1.0, blocks=blocks, terms=terms, probes=(1.1, 1.5, 2.0))
    ok = rep.verdict == ALL_VERIFIED
    units = [c for c in rep.claims if c.description.startswith("||x_")]
    ok &= len(units) == blocks and all(c.ok and abs(c.detail["value"] - 1.0) <= 1e-8 for c in units)
    probes = [c for c in rep.claims if "not in l_" in c.description]
    ok &= len(probes) == 3 and all(c.status == "Diverged" and c.detail["last_partial"] > 1e3 for c in probes)
    # independent: rebuild x from the definition, normalise by direct l_1(w) sums, sum the q-series
    grown = []
    for q in (1.1, 1.5, 2.0):
        logs = {}
        for H in (terms, 2 * terms):
            parts = []
            for m in range(1, blocks + 1):
                q_m = 1.0 + 1.0 / m
                k, la = _direct_block_logs(m, q_m, blocks, H)
                lw = -k * LN2
                la = la - logsumexp(la + lw) - m * LN2
                parts.append(q * la + lw)
            logs[H] = logsumexp(np.concatenate(parts))
        grown.append(logs[2 * terms] - logs[terms])
        ok &= logs[terms] > math.log(1e3) and logs[2 * terms] > logs[terms] + 1.0
    # the explicit terms of x agree with the direct construction
    k_all, la_all = [], []
    for m in range(1, blocks + 1):
        k, la = _direct_block_logs(m, 1.0 + 1.0 / m, blocks, terms)
        k_all.append(k)
        la_all.append(la - logsumexp(la - k * LN2) - m * LN2)
    order = np.argsort(np.concatenate(k_all))
    np.testing.assert_allclose(x.log_abs, np.concatenate(la_all)[order], rtol=1e-10, atol=1e-8)
    record(7, ok, f"12 unit blocks, probes 1.1/1.5/2 Diverged past 1e3; direct sums at 2x horizon grow by "
                  f"e^{min(grown):.3g}+")
    assert ok


# -- 8 -------------------------------------------------------------------------

def random_exponent(rng):
    kind = rng.integers(0, 3)
    if kind == 0:
        return ExponentFunction.constant(float(rng.uniform(1.0, 4.0)))
    if kind == 1:
        return ExponentFunction.step(float(rng.uniform(1.0, 4.0)), float(rng.uniform(0.1, 0.9)),
                                     float(rng.uniform(1.0, 4.0)))
    return ExponentFunction.affine(float(rng.uniform(1.0, 4.0)), float(rng.uniform(1.0, 4.0)))


def test_criterion_8_escaping_exponent_and_union():
    rng = np.random.default_rng(808)
    count = 0
    ok = True
    for _ in range(40):
        f = random_piecewise(rng, 3, singular=bool(rng.random() < 0.5))
        p = random_exponent(rng)
        if not nakano_norm(f, p).converged:
            continue
        rep, q = escaping_exponent_report(f, p)
        t = np.linspace(0.0005, 0.9995, 2000)
        ok &= rep.verdict == ALL_VERIFIED and bool(np.all(q.value(t) >= p.value(t) - 1e-12))
        count += 1
    ok &= count >= 20
    rep, _ = nakano_function_witness(ExponentFunction.constant(2.0), 2.0, [ExponentFunction.constant(2.5)])
    low = [c for c in rep.claims if c.description.startswith("lower sum")]
    ok &= rep.verdict == ALL_VERIFIED and len(low) == 1 and low[0].status == "Diverged"
    record(8, ok, f"escaping_exponent re-verified on {count} random (f, p); p = 2, r = 2, q = 2.5 lower sum Diverged")
    assert ok


# -- 9 -------------------------------------------------------------------------

PHIS = [PowLogConcave(1.0), PowLogConcave(0.5), PowLogConcave(0.7, 0.3)]
PSIS = [PowLogConvex(1.0), PowLogConvex(2.0), PowLogConvex(1.5, 1.0)]


def norm_suite(f):
    out = [lorentz_norm(f, phi) for phi in PHIS]
    out += [marcinkiewicz_norm(f, phi) for phi in PHIS]
    out += [luxemburg_norm(f, psi) for psi in PSIS]
    out.append(nakano_norm(f, ExponentFunction.step(2.0, 0.5, 1.5)))
    return out


def test_criterion_9_invariants():
    rng = np.random.default_rng(909)
    fails = {"equimeasurability": 0, "dilation": 0, "disjoint sum": 0, "lattice": 0, "homogeneity": 0}
    N = 200
    for i in range(N):
        f = random_piecewise(rng)
        xs = decreasing_rearrangement(f)
        levels = np.geomspace(1e-3, 1e3, 40)
        if np.max(np.abs(distribution_function(f, levels) - xs.distribution_function(levels))) > 1e-10:
            fails["equimeasurability"] += 1

        a = float(rng.uniform(0.0, 0.9))
        r = float(rng.uniform(0.05, 1.0)) * (1.0 - a)
        s = np.geomspace(1e-2, 10, 20)
        if i % 4 == 0:
            # dyadic endpoints: every length below is computed without rounding
            ka = int(rng.integers(0, 900))
            a, r = ka / 1024, int(rng.integers(1, 1024 - ka + 1)) / 1024
            chi = indicator(0.0, int(rng.integers(1, 1025)) / 1024, float(rng.uniform(0.5, 3.0)))
            g = translate_dilate(chi, a, r)
            if not np.array_equal(distribution_function(g, s), r * distribution_function(chi, s)):
                fails["dilation"] += 1
        elif np.max(np.abs(distribution_function(translate_dilate(f, a, r), s) - r * distribution_function(f, s))) > 1e-10:
            fails["dilation"] += 1

        cuts = np.sort(rng.uniform(0, 1, 3))
        edges = np.concatenate([[0.0], cuts, [1.0]])
        parts = [translate_dilate(random_piecewise(rng, 2), lo, hi - lo) for lo, hi in zip(edges[:-1], edges[1:])]
        lam = rng.uniform(-3, 3, len(parts))
        total = disjoint_sum(parts, lam)
        tt = rng.uniform(0, 1, 200)
        big = np.abs(total.evaluate(tt))
        for li, fi in zip(lam, parts):
            # equality on the support of f_i, up to rounding in the shifted evaluation
            if np.any(big < np.abs(li) * np.abs(fi.evaluate(tt)) * (1 - 1e-12)):
                fails["disjoint sum"] += 1
                break

        h = random_piecewise(rng, 3, singular=False)
        shrink = float(rng.uniform(0.1, 1.0))
        g = PiecewiseFunction(tuple(sg.scaled(shrink if j % 2 else 1.0) for j, sg in enumerate(h.segments)))
        if any(lo.value > hi.value + 1e-8 for lo, hi in zip(norm_suite(g), norm_suite(h))):
            fails["lattice"] += 1

        c = (1 / 3, 2.0, 10.0)[i % 3]
        if any(not (u.converged and v.converged) or abs(v.value - c * u.value) > 1e-8 * c * u.value
               for u, v in zip(norm_suite(h), norm_suite(h.scaled(c)))):
            fails["homogeneity"] += 1
    ok = not any(fails.values())
    record(9, ok, f"{N} instances each, failures " + ", ".join(f"{k} {v}" for k, v in fails.items()))
    assert ok


# -- 10 ------------------------------------------------------------------------

def sorted_sample_distance(f, n):
    t = (np.arange(n) + 0.5) / n
    sample = np.sort(np.abs(f.evaluate(t)))[::-1]
    return float(np.mean(np.abs(sample - decreasing_rearrangement(f).evaluate(t))))


def test_criterion_10_rearrangement_oracle():
    # the sorted sample misses O(n^-(1-a)) of mass next to a shifted t^-a
    # singularity, so exponents stay within the oracle's resolution at 10^5
    rng = np.random.default_rng(1010)
    worst = max(sorted_sample_distance(random_piecewise(rng, max_singular=0.25), 100_000) for _ in range(50))
    ok = worst <= 1e-3
    record(10, ok, f"50 functions, worst L1 distance sorted-sample vs x* {worst:.2e} (tol 1e-3)")
    assert ok


def test_rearrangement_oracle_converges_near_strong_singularities():
    f = disjoint_sum([power_function(3.0, -0.45, 0.0, 0.6203), power_function(3.0, -0.45, 0.6203, 1.0, 0.6203)])
    d5, d6 = sorted_sample_distance(f, 100_000), sorted_sample_distance(f, 1_000_000)
    assert d6 < d5 / 3
