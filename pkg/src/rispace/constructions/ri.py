"""Disjoint spanning sequences and the Lorentz / Marcinkiewicz constructions."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DegenerateError, PreconditionFailure
from ..funcrep import PiecewiseFunction, decreasing_rearrangement, translate_dilate
from ..generators import ConcaveGenerator, PowLogConcave, TabulatedConcave
from ..inclusions import LimitKind, small_o_at_zero
from ..norms import DEFAULT_TOL, lorentz_norm, marcinkiewicz_norm
from ..quadrature import Status
from .report import WitnessReport

LN2 = math.log(2.0)


def spanning_sequence(x: PiecewiseFunction, count: int) -> list:
    """``x_k = T_{a_k, r_k} x`` with ``a_k = 1 - 2^(1-k)``, ``r_k = 2^-k``, ``k = 1..count``.

    The supports sit inside the consecutive dyadic blocks
    ``(1 - 2^(1-k), 1 - 2^-k]``.
    """
    if x.is_zero:
        raise DegenerateError("the spanning sequence of the zero function is trivial")
    if count < 1:
        raise ValueError("count must be positive")
    return [translate_dilate(x, 1.0 - 2.0 ** (1 - k), 2.0**-k) for k in range(1, count + 1)]


def spanning_report(x: PiecewiseFunction, count: int = 6, member=None, escape=None, seed: int = 0,
                    samples: int = 4096) -> WitnessReport:
    """Finite-section check of the disjoint-sequence argument.

    ``member(f)`` / ``escape(f)`` are optional callables returning a
    :class:`NormResult`: the first must converge on every ``x_k`` (``x_k``
    stays in the big space), the second must diverge (``x_k`` stays outside
    the excluded set).  Closure of the span is not claimed.
    """
    xs = spanning_sequence(x, count)
    rep = WitnessReport("1", horizon={"count": count, "samples": samples, "seed": seed})
    rep.objects = {"x": x.to_dict(), "sequence": [f.to_dict() for f in xs]}
    m0 = x.support_measure
    for k, f in enumerate(xs, start=1):
        lo, hi = 1.0 - 2.0 ** (1 - k), 1.0 - 2.0**-k
        inside = all(s.a >= lo - 1e-15 and s.b <= hi + 1e-15 for s in f.segments)
        rep.check(f"x_{k} supported in ({lo:g}, {hi:g}]", inside)
        rep.check(f"x_{k} nonzero with support measure 2^-{k} |supp x|",
                  (not f.is_zero) and math.isclose(f.support_measure, 2.0**-k * m0, rel_tol=1e-12, abs_tol=1e-300),
                  measure=f.support_measure)
    rng = np.random.default_rng(seed)
    lam = rng.normal(size=count)
    t = np.sort(rng.uniform(0.0, 1.0, samples))
    t = t[t > 0]
    vals = np.array([f.evaluate(t) for f in xs])
    total = np.abs(lam @ vals)
    lower = np.abs(lam)[:, None] * np.abs(vals)
    rep.check("|sum l_n x_n| >= |l_i| |x_i| pointwise on the sample grid",
              bool(np.all(total[None, :] >= lower * (1 - 1e-12))), coefficients=lam.tolist())
    for k, f in enumerate(xs, start=1):
        if member is not None:
            rep.add(f"x_{k} has finite norm in the ambient space", member(f), "Converged")
        if escape is not None:
            rep.add(f"x_{k} escapes the excluded set", escape(f), "Diverged")
    return rep


def _small_o_ok(v) -> bool:
    return v.kind is LimitKind.TENDS_TO_ZERO or (v.kind is LimitKind.INCONCLUSIVE and v.exact is LimitKind.TENDS_TO_ZERO)


def _power_slope(psi, phi):
    """Analytic growth of ``psi(t)/phi(t)`` per octave toward 0 for power pairs."""
    if isinstance(psi, PowLogConcave) and isinstance(phi, PowLogConcave) and psi.beta == phi.beta == 0:
        return phi.alpha - psi.alpha
    return None


def marcinkiewicz_witness(psi: ConcaveGenerator, phis=(), *, tol=DEFAULT_TOL, horizon=60) -> WitnessReport:
    """``psi'`` lies in ``M(psi)`` with norm 1 and outside ``M(phi)`` for every ``phi << psi``."""
    phis = list(phis)
    limits = [small_o_at_zero(phi, psi) for phi in phis]
    bad = [repr(phi) for phi, v in zip(phis, limits) if not _small_o_ok(v)]
    if bad:
        raise PreconditionFailure("generators not small-o of psi at 0: " + ", ".join(bad), bad)
    dpsi = psi.derivative()
    rep = WitnessReport("4", horizon={"octaves": horizon, "tol": tol})
    rep.objects = {"psi": psi.to_dict(), "phis": [p.to_dict() for p in phis], "x": "psi'",
                   "small_o": [v.to_dict() for v in limits]}
    own = marcinkiewicz_norm(dpsi, psi, tol=tol, horizon=horizon)
    rep.add("psi' in M(psi)", own, "Converged")
    rep.check("||psi'||_M(psi) = 1 within 1e-6", own.converged and abs(own.value - 1.0) <= 1e-6, value=own.value)
    for phi in phis:
        res = marcinkiewicz_norm(dpsi, phi, tol=tol, horizon=horizon)
        rep.add(f"psi' not in M({phi!r})", res, "Diverged", fitted_slope=res.slope,
                analytic_slope=_power_slope(psi, phi))
    return rep


def lorentz_escape(x: PiecewiseFunction, psi: ConcaveGenerator, *, tol=DEFAULT_TOL, horizon=60):
    """Concave ``phi`` with ``psi << phi`` and ``x`` still in ``Lambda(phi)``.

    ``phi(t) = int_0^t psi' y`` with ``y = F^(-1/2)``, ``F(s) = int_0^s x* psi'``,
    so that ``||x||_Lambda(phi) = 2 sqrt(F(1))``.  Returns ``(report, phi)``.
    """
    if x.is_zero:
        raise DegenerateError("lorentz_escape needs a nonzero function")
    base = lorentz_norm(x, psi, tol=tol, horizon=horizon)
    if base.status is not Status.CONVERGED or not base.value > 0:
        raise PreconditionFailure(f"x has no certified finite Lambda(psi) norm ({base.status.value})", [base.to_dict()])
    xs = decreasing_rearrangement(x)
    phi = TabulatedConcave(xs, psi)
    F1 = float(phi.F_nodes[-1])
    bound = 2.0 * math.sqrt(F1)
    rep = WitnessReport("5", horizon={"octaves": horizon, "tol": tol})
    rep.objects = {"x": x.to_dict(), "psi": psi.to_dict(), "phi": phi.to_dict(), "F(1)": F1,
                   "Lambda(psi) norm": base.to_dict()}
    k = np.arange(0, 61)
    ys = phi.y(2.0**-k)
    tail = np.log(ys[-10:])
    unbounded = bool(np.all(np.diff(ys) >= 0) and np.all(np.diff(tail) > 0))
    rep.check("y = F^(-1/2) nonincreasing with y(2^-k) growing without bound", unbounded,
              y_samples=[float(v) for v in ys[::10]])
    rep.check("F(1) agrees with ||x||_Lambda(psi)", math.isclose(F1, base.value, rel_tol=1e-8),
              tabulated=F1, quadrature=base.value)
    rep.add("psi << phi at 0", small_o_at_zero(psi, phi), "TendsToZero")
    res = lorentz_norm(x, phi, tol=tol, horizon=horizon)
    rep.add("x in Lambda(phi)", res, "Converged")
    rep.check("||x||_Lambda(phi) <= 2 sqrt(F(1)) (1 + 1e-6)",
              res.converged and res.value <= bound * (1 + 1e-6) + tol, value=res.value, bound=bound)
    return rep, phi
