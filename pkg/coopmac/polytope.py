"""
Exact-rational linear inequality systems.

A row reads ``sum(lhs[v] * v) <= const + sum(rhs[p] * p)`` where ``v`` ranges
over the system's variables and ``p`` over its symbolic bound parameters.
Variables are removed with Fourier-Motzkin elimination; rows implied by the
rest of the system together with a cone of side relations on the parameters
are removed with an exact linear-programming test.
"""

import logging
import numbers
import re
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from coopmac.simplex import Status, is_feasible, solve_standard

logger = logging.getLogger(__name__)

DEFAULT_ROW_LIMIT = 100_000

Coefficients = Dict[str, Fraction]
Point = Tuple[Fraction, Fraction]


class FloatCoefficientError(ValueError):
    """A float or other inexact number was given where a rational is required."""


class UndeclaredVariableError(ValueError):
    pass


class RowLimitExceeded(RuntimeError):
    def __init__(self, limit: int, count: int) -> None:
        super().__init__(f"elimination would produce {count} rows (limit {limit})")
        self.limit = limit
        self.count = count


class ConeInfeasibleError(ValueError):
    pass


class MissingParameterError(ValueError):
    def __init__(self, name: str) -> None:
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"no value supplied for parameter {self.name}"


class InvalidParameterValueError(ValueError):
    pass


class SerializationError(ValueError):
    pass


def rational(value: object) -> Fraction:
    """Coerce an exact number (int, Fraction, "p/q" string) to a Fraction."""
    if isinstance(value, bool):
        raise FloatCoefficientError(f"boolean {value!r} is not a coefficient")
    if isinstance(value, numbers.Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as e:
            raise FloatCoefficientError(f"cannot read {value!r} as a rational") from e
    raise FloatCoefficientError(
        f"{value!r} ({type(value).__name__}) is not an exact rational"
    )


def _clean(coefficients: Optional[Mapping[str, object]]) -> Coefficients:
    result: Coefficients = {}
    for name, value in (coefficients or {}).items():
        v = rational(value)
        if v != 0:
            result[name] = v
    return result


class Inequality:
    """One row ``lhs . x <= const + rhs . I``.

    Attributes:
        lhs: coefficients on variables.
        const: constant term of the right-hand side.
        rhs: coefficients on bound parameters.
        label: optional provenance tag, carried through scaling.
    """

    lhs: Coefficients
    const: Fraction
    rhs: Coefficients
    label: str

    def __init__(
        self,
        lhs: Optional[Mapping[str, object]] = None,
        const: object = 0,
        rhs: Optional[Mapping[str, object]] = None,
        label: str = "",
    ) -> None:
        self.lhs = _clean(lhs)
        self.const = rational(const)
        self.rhs = _clean(rhs)
        self.label = label

    def __repr__(self) -> str:
        return f"Inequality({format_inequality(self)!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Inequality):
            return NotImplemented
        return (
            self.lhs == other.lhs
            and self.const == other.const
            and self.rhs == other.rhs
        )

    def __hash__(self) -> int:
        return hash(
            (
                frozenset(self.lhs.items()),
                self.const,
                frozenset(self.rhs.items()),
            )
        )

    def coefficient(self, variable: str) -> Fraction:
        return self.lhs.get(variable, Fraction(0))

    def scaled(self, factor: Fraction) -> "Inequality":
        if factor <= 0:
            raise ValueError("inequalities may only be scaled by a positive factor")
        return Inequality(
            {k: v * factor for k, v in self.lhs.items()},
            self.const * factor,
            {k: v * factor for k, v in self.rhs.items()},
            self.label,
        )

    def normalized(
        self, variables: Sequence[str], parameters: Sequence[str]
    ) -> "Inequality":
        """Scale so the leading nonzero coefficient has magnitude one."""
        lead = next((self.lhs[v] for v in variables if v in self.lhs), None)
        if lead is None:
            lead = next((self.rhs[p] for p in parameters if p in self.rhs), None)
        if lead is None and self.const != 0:
            lead = self.const
        if lead is None:
            return self
        return self.scaled(1 / abs(lead))

    def is_trivial(self) -> bool:
        """``0 <= c`` with ``c >= 0``."""
        return not self.lhs and not self.rhs and self.const >= 0

    def sort_key(
        self, variables: Sequence[str], parameters: Sequence[str]
    ) -> Tuple[Fraction, ...]:
        return (
            tuple(self.coefficient(v) for v in variables)
            + tuple(self.rhs.get(p, Fraction(0)) for p in parameters)
            + (self.const,)
        )

    def mentions(self, names: Iterable[str]) -> bool:
        return any(n in self.lhs or n in self.rhs for n in names)


def combine(positive: Inequality, negative: Inequality, variable: str) -> Inequality:
    """Positive combination of two rows that cancels ``variable``."""
    a = positive.coefficient(variable)
    b = -negative.coefficient(variable)
    lhs = dict(positive.scaled(b).lhs)
    for k, v in negative.scaled(a).lhs.items():
        lhs[k] = lhs.get(k, Fraction(0)) + v
    lhs.pop(variable, None)
    rhs = {k: v * b for k, v in positive.rhs.items()}
    for k, v in negative.rhs.items():
        rhs[k] = rhs.get(k, Fraction(0)) + v * a
    return Inequality(lhs, positive.const * b + negative.const * a, rhs)


class RationalInequalitySystem:
    variables: List[str]
    parameters: List[str]
    rows: List[Inequality]

    def __init__(
        self,
        variables: Sequence[str],
        parameters: Sequence[str],
        rows: Iterable[Inequality],
    ) -> None:
        self.variables = list(variables)
        self.parameters = list(parameters)
        self.rows = list(rows)
        declared = set(self.variables)
        known = set(self.parameters)
        for row in self.rows:
            for name in row.lhs:
                if name not in declared:
                    raise UndeclaredVariableError(name)
            for name in row.rhs:
                if name not in known:
                    raise UndeclaredVariableError(name)

    def __len__(self) -> int:
        return len(self.rows)

    def __repr__(self) -> str:
        return (
            f"RationalInequalitySystem(variables={self.variables}, "
            f"parameters={self.parameters}, rows={len(self.rows)})"
        )

    def with_rows(self, rows: Iterable[Inequality]) -> "RationalInequalitySystem":
        return RationalInequalitySystem(self.variables, self.parameters, rows)


def canonical_rows(
    rows: Iterable[Inequality], variables: Sequence[str], parameters: Sequence[str]
) -> List[Inequality]:
    """Normalize, drop trivial rows, keep the tightest of each parallel family, sort."""
    tightest: Dict[Tuple, Inequality] = {}
    for row in rows:
        row = row.normalized(variables, parameters)
        if row.is_trivial():
            continue
        family = (frozenset(row.lhs.items()), frozenset(row.rhs.items()))
        held = tightest.get(family)
        if held is None or row.const < held.const:
            tightest[family] = row
        elif row.const == held.const and not held.label:
            held.label = row.label
    return sorted(tightest.values(), key=lambda r: r.sort_key(variables, parameters))


def _pair_count(rows: Sequence[Inequality], variable: str) -> int:
    positive = sum(1 for r in rows if r.coefficient(variable) > 0)
    negative = sum(1 for r in rows if r.coefficient(variable) < 0)
    return positive * negative


def eliminate(
    system: RationalInequalitySystem,
    drop: Iterable[str],
    row_limit: int = DEFAULT_ROW_LIMIT,
) -> RationalInequalitySystem:
    """Project ``system`` onto the variables not in ``drop``.

    Variables are eliminated greedily, cheapest (fewest generated pairs)
    first with declared order breaking ties, so the output is deterministic.

    Args:
        system: the system to project.
        drop: names of variables to eliminate.
        row_limit: largest number of rows any intermediate step may produce.

    Returns:
        The canonical projected system over the remaining variables.
    """
    drop = list(drop)
    for name in drop:
        if name not in system.variables:
            raise UndeclaredVariableError(name)
    dropped = set(drop)
    remaining = [v for v in system.variables if v in dropped]
    kept = [v for v in system.variables if v not in dropped]
    order = {v: i for i, v in enumerate(system.variables)}

    rows = canonical_rows(system.rows, system.variables, system.parameters)
    while remaining:
        variable = min(remaining, key=lambda v: (_pair_count(rows, v), order[v]))
        positive = [r for r in rows if r.coefficient(variable) > 0]
        negative = [r for r in rows if r.coefficient(variable) < 0]
        untouched = [r for r in rows if r.coefficient(variable) == 0]
        count = len(untouched) + len(positive) * len(negative)
        if count > row_limit:
            raise RowLimitExceeded(row_limit, count)

        generated = [combine(p, n, variable) for p in positive for n in negative]
        rows = canonical_rows(
            untouched + generated, system.variables, system.parameters
        )
        remaining.remove(variable)
        logger.debug(
            "eliminated %s: %d x %d pairs, %d rows remain",
            variable,
            len(positive),
            len(negative),
            len(rows),
        )

    return RationalInequalitySystem(kept, system.parameters, rows)


class SideRelationCone:
    """Linear relations among bound parameters, each ``lhs . I <= const``."""

    relations: List[Inequality]

    def __init__(self, relations: Iterable[Inequality]) -> None:
        self.relations = list(relations)
        for relation in self.relations:
            if relation.rhs:
                raise ValueError("cone relations keep every parameter on the left")

    def __len__(self) -> int:
        return len(self.relations)

    def parameters(self) -> List[str]:
        seen: List[str] = []
        for relation in self.relations:
            for name in relation.lhs:
                if name not in seen:
                    seen.append(name)
        return seen

    def contains(self, values: Mapping[str, object]) -> bool:
        for relation in self.relations:
            total = sum(
                (rational(values[k]) * v for k, v in relation.lhs.items()),
                Fraction(0),
            )
            if total > relation.const:
                return False
        return True

    def is_feasible(self) -> bool:
        names = self.parameters()
        matrix = [[r.lhs.get(n, Fraction(0)) for n in names] for r in self.relations]
        return is_feasible(matrix, [r.const for r in self.relations])


class Certificate:
    """Nonnegative multipliers proving an implication.

    ``vacuous`` is set when the premises themselves are infeasible.
    """

    row_multipliers: List[Fraction]
    cone_multipliers: List[Fraction]
    bound: Optional[Fraction]
    vacuous: bool

    def __init__(
        self,
        row_multipliers: List[Fraction],
        cone_multipliers: List[Fraction],
        bound: Optional[Fraction],
        vacuous: bool = False,
    ) -> None:
        self.row_multipliers = row_multipliers
        self.cone_multipliers = cone_multipliers
        self.bound = bound
        self.vacuous = vacuous


def _as_ge_free(
    rows: Sequence[Inequality], columns: Sequence[str], split: int
) -> Tuple[List[List[Fraction]], List[Fraction]]:
    """Rows over the joint (variable, parameter) vector as ``M z <= h``."""
    matrix = []
    bounds = []
    for row in rows:
        coeffs = []
        for i, name in enumerate(columns):
            if i < split:
                coeffs.append(row.lhs.get(name, Fraction(0)))
            else:
                coeffs.append(-row.rhs.get(name, Fraction(0)))
        matrix.append(coeffs)
        bounds.append(row.const)
    return matrix, bounds


def implies(
    system: RationalInequalitySystem,
    cone: SideRelationCone,
    target: Inequality,
) -> Optional[Certificate]:
    """Return a certificate if every point of ``system`` within ``cone`` satisfies ``target``."""
    variables = list(system.variables)
    for name in target.lhs:
        if name not in variables:
            variables.append(name)
    parameters = list(system.parameters)
    for name in list(cone.parameters()) + list(target.rhs):
        if name not in parameters:
            parameters.append(name)
    columns = variables + parameters
    split = len(variables)

    cone_rows = [Inequality({}, r.const, {k: -v for k, v in r.lhs.items()}) for r in cone.relations]
    premises = list(system.rows) + cone_rows
    matrix, bounds = _as_ge_free(premises, columns, split)
    (objective,), _ = _as_ge_free([target], columns, split)

    # dual: min h.y  s.t.  M^T y = c, y >= 0
    transposed = [[matrix[i][j] for i in range(len(matrix))] for j in range(len(columns))]
    dual = solve_standard(transposed, objective, bounds)

    if dual.status is Status.optimal:
        assert dual.x is not None and dual.value is not None
        if dual.value <= target.const:
            n = len(system.rows)
            return Certificate(dual.x[:n], dual.x[n:], dual.value)
        return None
    if dual.status is Status.unbounded:
        return Certificate([], [], None, vacuous=True)
    if not is_feasible(matrix, bounds):
        return Certificate([], [], None, vacuous=True)
    return None


def remove_redundant(
    system: RationalInequalitySystem, cone: SideRelationCone
) -> RationalInequalitySystem:
    """Drop, one at a time in canonical order, each row implied by the others and the cone."""
    if not cone.is_feasible():
        raise ConeInfeasibleError("side-relation cone admits no parameter values")

    kept = canonical_rows(system.rows, system.variables, system.parameters)
    i = 0
    while i < len(kept):
        candidate = kept[i]
        others = system.with_rows(kept[:i] + kept[i + 1 :])
        if implies(others, cone, candidate) is not None:
            logger.debug("redundant: %s", format_inequality(candidate))
            del kept[i]
        else:
            i += 1
    return system.with_rows(kept)


class HalfPlane:
    a1: Fraction
    a2: Fraction
    b: Fraction
    label: str

    def __init__(self, a1: Fraction, a2: Fraction, b: Fraction, label: str = "") -> None:
        self.a1 = a1
        self.a2 = a2
        self.b = b
        self.label = label

    def value(self, point: Tuple[object, object]) -> Fraction:
        return self.a1 * rational_or_exact(point[0]) + self.a2 * rational_or_exact(point[1])


def rational_or_exact(value: object) -> Fraction:
    """Exact binary value of a float, or the rational itself."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value)
    return rational(value)


class NumericRegion:
    """An instantiated two-variable region, exact down to the vertices."""

    variables: Tuple[str, str]
    halfplanes: List[HalfPlane]

    def __init__(self, variables: Sequence[str], halfplanes: Iterable[HalfPlane]) -> None:
        if len(variables) != 2:
            raise ValueError("a planar region has exactly two variables")
        self.variables = (variables[0], variables[1])
        self.halfplanes = list(halfplanes)

    def contains(self, point: Tuple[object, object], tol: float = 0.0) -> bool:
        slack = Fraction(tol)
        return all(h.value(point) <= h.b + slack for h in self.halfplanes)

    def vertices(self) -> List[Point]:
        found = set()
        lines = [h for h in self.halfplanes if h.a1 or h.a2]
        for h, g in combinations(lines, 2):
            det = h.a1 * g.a2 - h.a2 * g.a1
            if det == 0:
                continue
            x = (h.b * g.a2 - h.a2 * g.b) / det
            y = (h.a1 * g.b - h.b * g.a1) / det
            if all(f.a1 * x + f.a2 * y <= f.b for f in self.halfplanes):
                found.add((x, y))
        return sorted(found)

    def maximize(self, weights: Tuple[object, object]) -> Tuple[Point, Fraction]:
        """Best vertex for a weighted sum; ties go to the largest vertex."""
        w1, w2 = rational_or_exact(weights[0]), rational_or_exact(weights[1])
        vertices = self.vertices()
        if not vertices:
            raise ValueError("region is empty")
        value, best = max((w1 * x + w2 * y, (x, y)) for x, y in vertices)
        return best, value

    def binding(self, point: Tuple[object, object], tol: float = 1e-9) -> List[str]:
        slack = Fraction(tol)
        return [
            h.label
            for h in self.halfplanes
            if h.label and abs(h.value(point) - h.b) <= slack
        ]


def instantiate(
    system: RationalInequalitySystem, values: Mapping[str, object]
) -> NumericRegion:
    """Substitute parameter values into a two-variable system.

    Floats are converted with their exact binary value, so the region is
    exact for the given inputs.
    """
    halfplanes = []
    for row in system.rows:
        b = row.const
        for name, coefficient in row.rhs.items():
            if name not in values:
                raise MissingParameterError(name)
            value = values[name]
            if isinstance(value, float) and (value != value or value in (float("inf"), float("-inf"))):
                raise InvalidParameterValueError(f"{name} = {value} is not finite")
            b += coefficient * rational_or_exact(value)
        halfplanes.append(
            HalfPlane(
                row.coefficient(system.variables[0]),
                row.coefficient(system.variables[1]),
                b,
                row.label,
            )
        )
    return NumericRegion(system.variables, halfplanes)


def _format_fraction(value: Fraction) -> str:
    return str(value)


def _format_terms(terms: Sequence[Tuple[str, Fraction]]) -> str:
    text = ""
    for name, coefficient in terms:
        sign = "-" if coefficient < 0 else "+"
        magnitude = abs(coefficient)
        body = name if magnitude == 1 else f"{_format_fraction(magnitude)}*{name}"
        if not text:
            text = body if sign == "+" else f"-{body}"
        else:
            text += f" {sign} {body}"
    return text


def format_inequality(
    row: Inequality,
    variables: Optional[Sequence[str]] = None,
    parameters: Optional[Sequence[str]] = None,
) -> str:
    """Render a row as ``R1 + R2 <= 0 + I4 + I8  # label``."""
    lhs_names = variables or sorted(row.lhs)
    rhs_names = parameters or sorted(row.rhs)
    lhs = _format_terms([(v, row.lhs[v]) for v in lhs_names if v in row.lhs]) or "0"
    rhs = _format_fraction(row.const)
    terms = _format_terms([(p, row.rhs[p]) for p in rhs_names if p in row.rhs])
    if terms:
        rhs += f" - {terms[1:]}" if terms.startswith("-") else f" + {terms}"
    text = f"{lhs} <= {rhs}"
    if row.label:
        text += f"  # {row.label}"
    return text


def format_system(system: RationalInequalitySystem) -> str:
    lines = [
        "# variables: " + " ".join(system.variables),
        "# parameters: " + " ".join(system.parameters),
    ]
    lines += [
        format_inequality(row, system.variables, system.parameters)
        for row in system.rows
    ]
    return "\n".join(lines) + "\n"


_TERM = re.compile(r"[+-]?[^+-]+")
_NAME = re.compile(r"[A-Za-z_]\w*$")


def _parse_side(text: str) -> Tuple[Coefficients, Fraction]:
    names: Coefficients = {}
    const = Fraction(0)
    compact = text.replace(" ", "")
    if not compact:
        raise SerializationError("empty side")
    for token in _TERM.findall(compact):
        sign = Fraction(-1) if token.startswith("-") else Fraction(1)
        body = token.lstrip("+-")
        if "*" in body:
            coefficient_text, name = body.split("*", 1)
        elif _NAME.match(body):
            coefficient_text, name = "1", body
        else:
            coefficient_text, name = body, ""
        try:
            coefficient = sign * Fraction(coefficient_text)
        except ValueError as e:
            raise SerializationError(f"bad coefficient {coefficient_text!r}") from e
        if not name:
            const += coefficient
        elif _NAME.match(name):
            names[name] = names.get(name, Fraction(0)) + coefficient
        else:
            raise SerializationError(f"bad name {name!r}")
    return names, const


def parse_inequality(text: str) -> Inequality:
    body, _, label = text.partition("#")
    if "<=" not in body:
        raise SerializationError(f"no '<=' in {text!r}")
    left, right = body.split("<=", 1)
    lhs, left_const = _parse_side(left)
    rhs, right_const = _parse_side(right)
    return Inequality(lhs, right_const - left_const, rhs, label.strip())


def parse_system(text: str) -> RationalInequalitySystem:
    """Inverse of :func:`format_system`."""
    variables: List[str] = []
    parameters: List[str] = []
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("# variables:"):
            variables = line.split(":", 1)[1].split()
        elif line.startswith("# parameters:"):
            parameters = line.split(":", 1)[1].split()
        elif not line.startswith("#"):
            rows.append(parse_inequality(line))
    return RationalInequalitySystem(variables, parameters, rows)
