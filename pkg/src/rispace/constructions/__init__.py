"""Explicit witnesses for the spaceability and emptiness results.

Every construction returns a :class:`WitnessReport` whose claims are
re-verified through :mod:`rispace.norms` and :mod:`rispace.inclusions`.
"""

from .nakano import (
    escaping_exponent,
    escaping_exponent_report,
    extract_level_sets,
    nakano_function_witness,
    nakano_seq_witness,
)
from .orlicz import b_rule, b_sum_bound, catalog_witness, index_witness, orlicz_escape, orlicz_union_witness
from .report import ALL_VERIFIED, FAILURES, Claim, WitnessReport
from .ri import lorentz_escape, marcinkiewicz_witness, spanning_report, spanning_sequence

__all__ = [
    "Claim",
    "WitnessReport",
    "ALL_VERIFIED",
    "FAILURES",
    "spanning_sequence",
    "spanning_report",
    "marcinkiewicz_witness",
    "lorentz_escape",
    "b_rule",
    "b_sum_bound",
    "orlicz_escape",
    "catalog_witness",
    "orlicz_union_witness",
    "index_witness",
    "nakano_seq_witness",
    "nakano_function_witness",
    "extract_level_sets",
    "escaping_exponent",
    "escaping_exponent_report",
]
