"""
Symbolic rate regions of the three-slot cooperative scheme.

The rate-split system bounds the six split rates by the ten information
quantities I1..I10; projecting it onto the aggregate rates (R1, R2) and
pruning under the standard side-relation cone is checked against the
six-row aggregate region used by the numerical code.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from coopmac.polytope import (
    DEFAULT_ROW_LIMIT,
    Inequality,
    RationalInequalitySystem,
    SideRelationCone,
    eliminate,
    format_inequality,
    implies,
    instantiate,
    remove_redundant,
)

logger = logging.getLogger(__name__)

SPLIT_RATES = ["R10", "R12", "R13", "R20", "R21", "R23"]
AGGREGATE_RATES = ["R1", "R2"]
BOUND_PARAMETERS = [f"I{k}" for k in range(1, 11)]
MIN_TERM_PARAMETERS = ["I1", "I3"]


def _row(lhs: Dict[str, int], rhs: Dict[str, int], label: str, const: int = 0) -> Inequality:
    return Inequality(lhs, const, rhs, label)


def rate_split_system() -> RationalInequalitySystem:
    """Constraints on the split rates and the two aggregate rates."""
    rows = [
        _row({"R10": 1}, {"I1": 1}, "I1"),
        _row({"R10": 1, "R12": 1}, {"I2": 1}, "I2"),
        _row({"R20": 1}, {"I3": 1}, "I3"),
        _row({"R20": 1, "R21": 1}, {"I4": 1}, "I4"),
        _row({"R13": 1}, {"I5": 1}, "I5"),
        _row({"R23": 1}, {"I6": 1}, "I6"),
        _row({"R13": 1, "R23": 1}, {"I7": 1}, "I7"),
        _row({"R1": 1, "R23": 1}, {"I8": 1}, "I8"),
        _row({"R2": 1, "R13": 1}, {"I9": 1}, "I9"),
        _row({"R1": 1, "R2": 1}, {"I10": 1}, "I10"),
        # R1 = R10 + R12 + R13 and R2 = R20 + R21 + R23
        _row({"R1": 1, "R10": -1, "R12": -1, "R13": -1}, {}, "split R1 upper"),
        _row({"R1": -1, "R10": 1, "R12": 1, "R13": 1}, {}, "split R1 lower"),
        _row({"R2": 1, "R20": -1, "R21": -1, "R23": -1}, {}, "split R2 upper"),
        _row({"R2": -1, "R20": 1, "R21": 1, "R23": 1}, {}, "split R2 lower"),
    ]
    rows += [_row({name: -1}, {}, f"{name} >= 0") for name in SPLIT_RATES]
    return RationalInequalitySystem(SPLIT_RATES + AGGREGATE_RATES, BOUND_PARAMETERS, rows)


def aggregate_region_template(projected_rows: bool = False) -> RationalInequalitySystem:
    """The six-row region over (R1, R2) plus non-negativity.

    With ``projected_rows`` the two single-user rows R1 <= I8 and R2 <= I9
    retained by the exact projection are added.
    """
    rows = [
        _row({"R1": 1}, {"I2": 1, "I5": 1}, "r1 direct"),
        _row({"R2": 1}, {"I4": 1, "I6": 1}, "r2 direct"),
        _row({"R1": 1, "R2": 1}, {"I2": 1, "I4": 1, "I7": 1}, "sum relay"),
        _row({"R1": 1, "R2": 1}, {"I10": 1}, "sum destination"),
        _row({"R1": 1, "R2": 1}, {"I4": 1, "I8": 1}, "sum via user 2"),
        _row({"R1": 1, "R2": 1}, {"I2": 1, "I9": 1}, "sum via user 1"),
        _row({"R1": -1}, {}, "R1 >= 0"),
        _row({"R2": -1}, {}, "R2 >= 0"),
    ]
    if projected_rows:
        rows += [
            _row({"R1": 1}, {"I8": 1}, "r1 destination"),
            _row({"R2": 1}, {"I9": 1}, "r2 destination"),
        ]
    return RationalInequalitySystem(AGGREGATE_RATES, BOUND_PARAMETERS, rows)


def _relation(lhs: Dict[str, int], label: str) -> Inequality:
    return Inequality(lhs, 0, None, label)


# Every relation holds for any input law of the form
# p(x10,u) p(x20,v) p(x13|u,v) p(x23|u,v).
STANDARD_CONE = SideRelationCone(
    [_relation({name: -1}, f"{name} >= 0") for name in BOUND_PARAMETERS]
    + [
        # min(., I(X10;Y12|U)) <= I(X10;Y12|U) <= I(X10;Y12), U - X10 - Y12
        _relation({"I1": 1, "I2": -1}, "I1 <= I2"),
        _relation({"I3": 1, "I4": -1}, "I3 <= I4"),
        # chain rule on (X13, X23) given (U, V), X13 and X23 independent given (U, V)
        _relation({"I5": 1, "I7": -1}, "I5 <= I7"),
        _relation({"I6": 1, "I7": -1}, "I6 <= I7"),
        _relation({"I7": 1, "I5": -1, "I6": -1}, "I7 <= I5 + I6"),
        # Y3 depends on (U, V) only through (X13, X23)
        _relation({"I7": 1, "I8": -1}, "I7 <= I8"),
        _relation({"I7": 1, "I9": -1}, "I7 <= I9"),
        _relation({"I8": 1, "I10": -1}, "I8 <= I10"),
        _relation({"I9": 1, "I10": -1}, "I9 <= I10"),
    ]
)


def sample_cone_parameters(
    rng: np.random.Generator, count: int
) -> List[Dict[str, Fraction]]:
    """Random exact parameter assignments inside the standard cone."""

    def value() -> Fraction:
        return Fraction(int(rng.integers(0, 41)), int(rng.integers(1, 9)))

    def share() -> Fraction:
        return Fraction(int(rng.integers(0, 11)), 10)

    samples = []
    for _ in range(count):
        p: Dict[str, Fraction] = {}
        p["I2"] = value()
        p["I1"] = p["I2"] * share()
        p["I4"] = value()
        p["I3"] = p["I4"] * share()
        p["I5"] = value()
        p["I6"] = value()
        p["I7"] = max(p["I5"], p["I6"]) + min(p["I5"], p["I6"]) * share()
        p["I8"] = p["I7"] + value()
        p["I9"] = p["I7"] + value()
        p["I10"] = max(p["I8"], p["I9"]) + value()
        assert STANDARD_CONE.contains(p)
        samples.append({name: p[name] for name in BOUND_PARAMETERS})
    return samples


class ProjectionReport:
    verdict: str
    projected: RationalInequalitySystem
    pruned: RationalInequalitySystem
    template: RationalInequalitySystem
    extra_rows: List[Inequality]
    missing_rows: List[Inequality]
    min_term_rows: List[Inequality]
    samples: int
    sample_mismatches: int

    def __init__(
        self,
        projected: RationalInequalitySystem,
        pruned: RationalInequalitySystem,
        template: RationalInequalitySystem,
        extra_rows: List[Inequality],
        missing_rows: List[Inequality],
        min_term_rows: List[Inequality],
        samples: int,
        sample_mismatches: int,
    ) -> None:
        self.projected = projected
        self.pruned = pruned
        self.template = template
        self.extra_rows = extra_rows
        self.missing_rows = missing_rows
        self.min_term_rows = min_term_rows
        self.samples = samples
        self.sample_mismatches = sample_mismatches
        if missing_rows:
            self.verdict = "FAIL"
        elif extra_rows or sample_mismatches:
            self.verdict = "FINDING"
        else:
            self.verdict = "PASS"

    def as_dict(self) -> Dict[str, object]:
        def rows(system_rows: Sequence[Inequality]) -> List[str]:
            return [
                format_inequality(r, AGGREGATE_RATES, BOUND_PARAMETERS)
                for r in system_rows
            ]

        return {
            "verdict": self.verdict,
            "projected": rows(self.projected.rows),
            "pruned": rows(self.pruned.rows),
            "template": rows(self.template.rows),
            "extra_rows": rows(self.extra_rows),
            "missing_rows": rows(self.missing_rows),
            "min_term_rows": rows(self.min_term_rows),
            "min_terms_absorbed": not self.min_term_rows,
            "samples": self.samples,
            "sample_mismatches": self.sample_mismatches,
        }


def verify_projection(
    row_limit: int = DEFAULT_ROW_LIMIT,
    samples: int = 200,
    seed: int = 0,
    template: Optional[RationalInequalitySystem] = None,
) -> ProjectionReport:
    """Project the rate-split system onto (R1, R2) and compare it with ``template``."""
    template = template or aggregate_region_template()
    projected = eliminate(rate_split_system(), SPLIT_RATES, row_limit)
    logger.info("projection has %d rows", len(projected))
    pruned = remove_redundant(projected, STANDARD_CONE)
    logger.info("%d rows remain after pruning", len(pruned))

    extra = [row for row in pruned.rows if implies(template, STANDARD_CONE, row) is None]
    missing = [row for row in template.rows if implies(pruned, STANDARD_CONE, row) is None]
    min_terms = [row for row in pruned.rows if row.mentions(MIN_TERM_PARAMETERS)]
    for row in extra:
        logger.warning(
            "projection keeps a row the template lacks: %s",
            format_inequality(row, AGGREGATE_RATES, BOUND_PARAMETERS),
        )

    mismatches = 0
    for values in sample_cone_parameters(np.random.default_rng(seed), samples):
        if (
            instantiate(pruned, values).vertices()
            != instantiate(template, values).vertices()
        ):
            mismatches += 1

    return ProjectionReport(
        projected, pruned, template, extra, missing, min_terms, samples, mismatches
    )
