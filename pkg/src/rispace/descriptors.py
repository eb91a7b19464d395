"""Descriptor mini-language for functions, generators and exponents.

=====================  ==============================================
``pow:a``              ``t^a`` (concave, 0 <= a <= 1) or ``y^a`` (convex, a >= 1)
``powlog:a,b``         ``t^a ln(e/t)^b`` (concave) or ``y^a ln(e+y)^b`` (convex)
``exp:p``              ``exp(y^p) - 1`` (convex)
``indicator:a,b[,c]``  ``c chi_(a,b]``
``powersing:c,s,a,lo,hi``  ``c (t - s)^a`` on ``(lo, hi]``
``const:q``            constant exponent
``step:q1,t,q2``       ``q1`` on ``[0, t)``, ``q2`` on ``[t, 1]``
``affine:q0,q1``       ``q0 + (q1 - q0) t``
``seq:v1,v2,...``      finite sequence (indices 1, 2, ...)
=====================  ==============================================

A descriptor starting with ``{`` or ``[`` is read as JSON in the
serialization schema of the corresponding object.
"""

from __future__ import annotations

import json
import math

from .errors import DescriptorError
from .funcrep import PiecewiseFunction, disjoint_sum, indicator, power_function
from .generators import (
    ConcaveGenerator,
    ConvexGenerator,
    ExpConvex,
    ExponentFunction,
    PowLogConcave,
    PowLogConvex,
    generator_from_dict,
)

_ARITY = {"pow": (1, 1), "powlog": (2, 2), "exp": (1, 1), "indicator": (2, 3), "powersing": (5, 5),
          "const": (1, 1), "step": (3, 3), "affine": (2, 2), "seq": (1, None)}


def split(text: str):
    """``"tag:1,2"`` -> ``("tag", [1.0, 2.0])`` with arity and finiteness checks."""
    if not isinstance(text, str) or ":" not in text:
        raise DescriptorError(f"descriptor {text!r} must look like tag:arg1,arg2,...")
    tag, _, rest = text.partition(":")
    tag = tag.strip().lower()
    if tag not in _ARITY:
        raise DescriptorError(f"unknown descriptor tag {tag!r} (known: {', '.join(sorted(_ARITY))})")
    try:
        args = [float(a) for a in rest.split(",")] if rest.strip() else []
    except ValueError as exc:
        raise DescriptorError(f"descriptor {text!r}: arguments must be numbers") from exc
    lo, hi = _ARITY[tag]
    if len(args) < lo or (hi is not None and len(args) > hi):
        want = str(lo) if lo == hi else f"{lo}..{hi if hi is not None else 'n'}"
        raise DescriptorError(f"descriptor {text!r}: {tag} takes {want} arguments, got {len(args)}")
    if not all(math.isfinite(a) for a in args):
        raise DescriptorError(f"descriptor {text!r}: arguments must be finite")
    return tag, args


def _json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"invalid JSON descriptor: {exc}") from exc


def _is_json(text):
    return isinstance(text, (dict, list)) or (isinstance(text, str) and text.lstrip()[:1] in "{[")


def parse_concave(text) -> ConcaveGenerator:
    if _is_json(text):
        g = generator_from_dict(text if isinstance(text, dict) else _json(text))
        if not isinstance(g, ConcaveGenerator):
            raise DescriptorError("expected a concave (class Phi) generator")
        return g
    tag, args = split(text)
    if tag == "pow":
        return PowLogConcave(args[0])
    if tag == "powlog":
        return PowLogConcave(args[0], args[1])
    raise DescriptorError(f"{tag!r} does not describe a concave generator (use pow or powlog)")


def parse_convex(text) -> ConvexGenerator:
    if _is_json(text):
        g = generator_from_dict(text if isinstance(text, dict) else _json(text))
        if not isinstance(g, ConvexGenerator):
            raise DescriptorError("expected a convex (class Psi) generator")
        return g
    tag, args = split(text)
    if tag == "pow":
        return PowLogConvex(args[0])
    if tag == "powlog":
        return PowLogConvex(args[0], args[1])
    if tag == "exp":
        return ExpConvex(args[0])
    raise DescriptorError(f"{tag!r} does not describe a convex generator (use pow, powlog or exp)")


def parse_exponent(text) -> ExponentFunction:
    if _is_json(text):
        g = generator_from_dict(text if isinstance(text, dict) else _json(text))
        if not isinstance(g, ExponentFunction):
            raise DescriptorError("expected an exponent descriptor")
        return g
    tag, args = split(text)
    if tag == "const":
        return ExponentFunction.constant(args[0])
    if tag == "step":
        return ExponentFunction.step(*args)
    if tag == "affine":
        return ExponentFunction.affine(*args)
    raise DescriptorError(f"{tag!r} does not describe an exponent (use const, step or affine)")


def parse_function(text) -> PiecewiseFunction:
    if _is_json(text):
        return PiecewiseFunction.from_dict(text if isinstance(text, (dict, list)) else _json(text))
    tag, args = split(text)
    if tag == "indicator":
        a, b = args[0], args[1]
        c = args[2] if len(args) > 2 else 1.0
        if not (0.0 <= a < b <= 1.0):
            raise DescriptorError(f"indicator interval ({a}, {b}] must satisfy 0 <= a < b <= 1")
        return indicator(a, b, c)
    if tag == "powersing":
        c, s, alpha, a, b = args
        if not (0.0 <= a < b <= 1.0):
            raise DescriptorError(f"powersing interval ({a}, {b}] must satisfy 0 <= a < b <= 1")
        return power_function(c, alpha, a, b, shift=s)
    if tag == "pow":
        return power_function(1.0, args[0])
    raise DescriptorError(f"{tag!r} does not describe a function (use indicator or powersing)")


def parse_functions(texts) -> PiecewiseFunction:
    """Pointwise sum of several descriptors with disjoint supports."""
    if isinstance(texts, (str, dict)):
        texts = [texts]
    fs = [parse_function(t) for t in texts]
    if not fs:
        raise DescriptorError("at least one function descriptor is required")
    return fs[0] if len(fs) == 1 else disjoint_sum(fs)


def parse_sequence(texts) -> list:
    if isinstance(texts, str):
        texts = [texts]
    vals = []
    for t in texts:
        tag, args = split(t)
        if tag != "seq":
            raise DescriptorError(f"{tag!r} does not describe a sequence (use seq:v1,v2,...)")
        vals.extend(args)
    return vals


__all__ = ["split", "parse_concave", "parse_convex", "parse_exponent", "parse_function", "parse_functions",
           "parse_sequence"]
