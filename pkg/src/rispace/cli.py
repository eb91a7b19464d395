"""Command-line scenario runner.

Exit codes: 0 verified / converged / relation holds, 1 failure or input
error, 2 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import inclusions, norms
from .constructions import (
    escaping_exponent_report,
    index_witness,
    lorentz_escape,
    marcinkiewicz_witness,
    nakano_function_witness,
    nakano_seq_witness,
    orlicz_escape,
    orlicz_union_witness,
    spanning_report,
)
from .constructions.report import _jsonable
from .descriptors import (
    parse_concave,
    parse_convex,
    parse_exponent,
    parse_functions,
    parse_sequence,
)
from .errors import CatalogMiss, DescriptorError, DomainError, ExtractionFailure, OverlapError, PreconditionFailure
from .funcrep import decreasing_rearrangement
from .generators import delta2_check, orlicz_indices
from .quadrature import DEFAULT_HORIZON, Status

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2
SPACES = ("lorentz", "marcinkiewicz", "orlicz", "nakano", "seq-nakano")
THEOREMS = ("1", "4", "5", "6", "7", "8", "10", "11", "union")
RELATIONS = ("small-o", "lorentz-inclusion", "marcinkiewicz-inclusion", "orlicz-inclusion", "dss", "delta2",
             "indices", "index-gap", "essential-range", "nakano-inclusion")
CONCAVE_SPACES = ("lorentz", "marcinkiewicz")


class InputError(Exception):
    pass


def _need(value, flag):
    if value is None or value == []:
        raise InputError(f"missing required option {flag}")
    return value


def _first(v):
    return v[0] if isinstance(v, list) and v else (v or None)


def _generator(text, space):
    return parse_concave(text) if space in CONCAVE_SPACES else parse_convex(text)


def _kw(args):
    return {"tol": args.tolerance, "horizon": args.horizon}


def _seq(args):
    vals = np.asarray(parse_sequence(_need(args.fn, "--fn")), dtype=float)
    p = parse_exponent(_need(args.exponent, "--exponent"))
    idx = np.flatnonzero(vals != 0) + 1
    expo = lambda k: p.value(np.zeros(np.shape(k)))  # sequences use the value of p at 0
    return norms.WeightedSeq(idx, np.log(np.abs(vals[idx - 1])), expo, lambda k: -np.asarray(k, float) * math.log(2),
                             finite=True)


def _norm_fn(space, gen, args):
    kw = _kw(args)
    if space == "lorentz":
        return lambda f: norms.lorentz_norm(f, gen, **kw)
    if space == "marcinkiewicz":
        return lambda f: norms.marcinkiewicz_norm(f, gen, **kw)
    if space == "orlicz":
        return lambda f: norms.luxemburg_norm(f, gen, **kw)
    if space == "nakano":
        return lambda f: norms.nakano_norm(f, gen, **kw)
    raise InputError(f"space {space!r} is not available here")


def _space_generator(args, text=None):
    space = _need(args.space, "--space")
    if space == "nakano":
        return parse_exponent(_need(text or args.exponent, "--exponent"))
    return _generator(_need(text or args.psi or _first(args.phi), "--psi/--phi"), space)


# ---------------------------------------------------------------------------
# commands


def cmd_norm(args):
    space = _need(args.space, "--space")
    if space == "seq-nakano":
        res = norms.seq_nakano_norm(_seq(args), tol=args.tolerance)
    else:
        gen = _space_generator(args)
        f = parse_functions(_need(args.fn, "--fn"))
        res = _norm_fn(space, gen, args)(f)
        _write_csv(args, f)
    payload = {"command": "norm", "space": space, "result": res.to_dict()}
    return payload, _status_code(res.status)


def cmd_rearrange(args):
    f = parse_functions(_need(args.fn, "--fn"))
    xs = decreasing_rearrangement(f)
    t = (np.arange(args.points) + 0.5) / args.points
    vals = xs.evaluate(t)
    levels = np.unique(np.concatenate([[0.0], np.abs(f.evaluate(t))]))[: args.points]
    payload = {"command": "rearrange", "exact": xs.exact, "support_measure": xs.support_measure,
               "rearrangement": xs.to_dict(), "samples": [[float(a), float(b)] for a, b in zip(t, vals)],
               "distribution": [[float(s), float(v)] for s, v in zip(levels, f.distribution_function(levels))]}
    _write_csv(args, xs, t)
    return payload, EXIT_OK


def cmd_check(args):
    rel = args.relation
    kw = {}
    if rel in ("small-o", "lorentz-inclusion", "marcinkiewicz-inclusion"):
        phi, psi = parse_concave(_need(_first(args.phi), "--phi")), parse_concave(_need(args.psi, "--psi"))
        if rel == "small-o":
            v = inclusions.small_o_at_zero(phi, psi)
            code = {"TendsToZero": EXIT_OK, "BoundedAway": EXIT_FAIL}.get(v.kind.value, EXIT_INCONCLUSIVE)
            return {"command": "check", "relation": rel, "result": v.to_dict()}, code
        fn = inclusions.lorentz_inclusion if rel == "lorentz-inclusion" else inclusions.marcinkiewicz_inclusion
        v = fn(phi, psi)
    elif rel in ("orlicz-inclusion", "dss", "index-gap"):
        phi, psi = parse_convex(_need(_first(args.phi), "--phi")), parse_convex(_need(args.psi, "--psi"))
        if rel == "orlicz-inclusion":
            v = inclusions.orlicz_inclusion(phi, psi)
        elif rel == "dss":
            v = inclusions.dss_orlicz_search(psi, phi, args.C)
            return {"command": "check", "relation": rel, "C": args.C, "result": v.to_dict()}, \
                EXIT_OK if v.found else EXIT_INCONCLUSIVE
        else:
            holds = inclusions.index_gap(psi, phi)
            return {"command": "check", "relation": rel, "result": {"holds": holds}}, EXIT_OK if holds else EXIT_FAIL
    elif rel in ("delta2", "indices"):
        psi = parse_convex(_need(args.psi, "--psi"))
        if rel == "delta2":
            d = delta2_check(psi)
            code = {True: EXIT_OK, False: EXIT_FAIL}.get(d.verdict, EXIT_INCONCLUSIVE)
            return {"command": "check", "relation": rel, "result": d.to_dict()}, code
        return {"command": "check", "relation": rel, "result": orlicz_indices(psi).to_dict()}, EXIT_OK
    elif rel == "essential-range":
        p = parse_exponent(_need(args.exponent, "--exponent"))
        R = inclusions.essential_range(p)
        out = {"command": "check", "relation": rel, "result": R.to_dict()}
        if args.r is not None:
            out["contains"] = R.contains(args.r)
            return out, EXIT_OK if out["contains"] else EXIT_FAIL
        return out, EXIT_OK
    else:
        p = parse_exponent(_need(args.exponent, "--exponent"))
        q = parse_exponent(_need(args.q[0] if args.q else None, "--q"))
        v = inclusions.nakano_inclusion(p, q)
    code = {True: EXIT_OK, False: EXIT_FAIL}.get(v.holds, EXIT_INCONCLUSIVE)
    return {"command": "check", "relation": rel, "result": v.to_dict(), **kw}, code


def cmd_witness(args):
    th = args.theorem
    kw = _kw(args)
    obj = None
    if th == "1":
        f = parse_functions(_need(args.fn, "--fn"))
        member = escape = None
        if args.space:
            space = args.space
            if space == "nakano":
                member = _norm_fn(space, parse_exponent(_need(args.exponent, "--exponent")), args)
                if args.q:
                    escape = _norm_fn(space, parse_exponent(args.q[0]), args)
            else:
                member = _norm_fn(space, _generator(_need(args.psi, "--psi"), space), args)
                if args.phi:
                    escape = _norm_fn(space, _generator(args.phi[0], space), args)
        rep = spanning_report(f, args.count or 6, member, escape)
    elif th == "4":
        rep = marcinkiewicz_witness(parse_concave(_need(args.psi, "--psi")),
                                    [parse_concave(p) for p in args.phi or []], **kw)
    elif th == "5":
        rep, obj = lorentz_escape(parse_functions(_need(args.fn, "--fn")), parse_concave(_need(args.psi, "--psi")),
                                  **kw)
    elif th == "6":
        rep, obj = orlicz_escape(parse_functions(_need(args.fn, "--fn")), parse_convex(_need(args.psi, "--psi")),
                                 **kw)
    elif th == "7":
        rep, obj = orlicz_union_witness(parse_convex(_need(args.psi, "--psi")),
                                        [parse_convex(p) for p in args.phi or []], **kw)
    elif th == "8":
        rep, obj = index_witness(parse_convex(_need(args.psi, "--psi")), args.count or 3,
                                 [parse_convex(p) for p in args.phi or []], **kw)
    elif th == "10":
        p = parse_exponent(args.exponent) if args.exponent else None
        p0 = float(p.value(np.zeros(1))[0]) if p is not None else 1.0
        rep, obj = nakano_seq_witness(p0, blocks=args.blocks, terms=args.terms,
                                      probes=tuple(args.probe) if args.probe else (1.1, 1.5, 2.0),
                                      tol=args.tolerance)
    elif th == "11":
        rep, obj = nakano_function_witness(parse_exponent(_need(args.exponent, "--exponent")), _need(args.r, "--r"),
                                           [parse_exponent(q) for q in args.q or []], tol=args.tolerance)
    else:
        rep, obj = escaping_exponent_report(parse_functions(_need(args.fn, "--fn")),
                                            parse_exponent(_need(args.exponent, "--exponent")), tol=args.tolerance)
    if args.csv and (hasattr(obj, "evaluate") or hasattr(obj, "value")):
        _write_csv(args, obj)
    payload = {"command": "witness", "report": rep.to_dict()}
    if rep.all_verified:
        return payload, EXIT_OK
    inconclusive = all(c.ok or c.status == Status.INCONCLUSIVE.value for c in rep.claims)
    return payload, EXIT_INCONCLUSIVE if inconclusive else EXIT_FAIL


def _status_code(status):
    return {Status.CONVERGED: EXIT_OK, Status.INCONCLUSIVE: EXIT_INCONCLUSIVE}.get(status, EXIT_FAIL)


def _write_csv(args, f, t=None):
    if not getattr(args, "csv", None):
        return
    if t is None:
        t = (np.arange(args.points) + 0.5) / args.points
    vals = f.evaluate(t) if hasattr(f, "evaluate") else f.value(t)
    with open(args.csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        for a, b in zip(t, np.atleast_1d(vals)):
            w.writerow([repr(float(a)), repr(float(b))])


COMMANDS = {"norm": cmd_norm, "rearrange": cmd_rearrange, "check": cmd_check, "witness": cmd_witness}


# ---------------------------------------------------------------------------
# argument handling


def _common(p):
    p.add_argument("--space", choices=SPACES)
    p.add_argument("--psi", help="generator descriptor (concave for lorentz/marcinkiewicz, convex for orlicz)")
    p.add_argument("--phi", action="append", help="second generator; repeatable where a list is expected")
    p.add_argument("--exponent", help="exponent descriptor (const:q, step:q1,t,q2, affine:q0,q1)")
    p.add_argument("--q", action="append", help="probe exponent descriptor; repeatable")
    p.add_argument("--fn", action="append", help="function descriptor; repeatable, supports must be disjoint")
    p.add_argument("--tolerance", type=float, default=norms.DEFAULT_TOL)
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON, help="octave horizon for integrals")
    p.add_argument("--out", help="write the JSON report here (default: stdout)")
    p.add_argument("--csv", help="write sampled values (t,value) here")
    p.add_argument("--points", type=int, default=256, help="sample count for CSV/rearrangement output")


def build_parser():
    ap = argparse.ArgumentParser(prog="rispace", description="Norms, inclusions and escape witnesses for "
                                                             "rearrangement invariant spaces on [0, 1].")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("norm", help="norm of a function in one of the spaces")
    _common(p)
    p = sub.add_parser("rearrange", help="decreasing rearrangement and distribution function")
    _common(p)
    p = sub.add_parser("check", help="decide a relation between generators or exponents")
    _common(p)
    p.add_argument("--relation", required=True, choices=RELATIONS)
    p.add_argument("--C", type=float, default=0.5, help="constant for the dss search")
    p.add_argument("--r", type=float, help="point to test against an essential range")
    p = sub.add_parser("witness", help="build and verify the witness for a theorem")
    _common(p)
    p.add_argument("--theorem", required=True, choices=THEOREMS)
    p.add_argument("--count", type=int, help="number of blocks / sequence terms")
    p.add_argument("--blocks", type=int, default=12)
    p.add_argument("--terms", type=int, default=10_000)
    p.add_argument("--probe", type=float, action="append", help="probe exponent q for theorem 10; repeatable")
    p.add_argument("--r", type=float, help="point of the essential range for theorem 11")
    p = sub.add_parser("run", help="run a JSON scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out")
    return ap


def _scenario_argv(path, out=None):
    try:
        with open(path) as fh:
            sc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DescriptorError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(sc, dict) or sc.get("command") not in COMMANDS:
        raise DescriptorError(f"scenario must be an object with command in {sorted(COMMANDS)}")
    argv = [sc["command"]]
    for key, val in sc.items():
        if key == "command":
            continue
        flag = "--" + key.replace("_", "-") if key not in ("C",) else "--C"
        vals = val if isinstance(val, list) else [val]
        for v in vals:
            argv += [flag, json.dumps(v) if isinstance(v, (dict, list)) else str(v)]
    if out:
        argv += ["--out", out]
    return argv


def _validate(args):
    """Parse every descriptor up front so schema errors precede computation."""
    space = getattr(args, "space", None)
    concave = space in CONCAVE_SPACES or getattr(args, "theorem", None) in ("4", "5") or \
        getattr(args, "relation", None) in ("small-o", "lorentz-inclusion", "marcinkiewicz-inclusion")
    gen = parse_concave if concave else parse_convex
    for text in ([args.psi] if args.psi else []) + (args.phi or []):
        gen(text)
    for text in ([args.exponent] if args.exponent else []) + (args.q or []):
        parse_exponent(text)
    if args.fn:
        if space == "seq-nakano":
            parse_sequence(args.fn)
        elif getattr(args, "theorem", None) != "10":
            parse_functions(args.fn)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "run":
            return main(_scenario_argv(args.scenario, args.out))
        _validate(args)
        payload, code = COMMANDS[args.command](args)
    except (DescriptorError, InputError, OverlapError, DomainError) as exc:
        print(f"rispace: input error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (PreconditionFailure, CatalogMiss, ExtractionFailure) as exc:
        print(f"rispace: precondition failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
