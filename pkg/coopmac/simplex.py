"""
Exact two-phase simplex over rationals.

Solves ``min c.x`` subject to ``A x = b`` and ``x >= 0`` with every entry a
:class:`fractions.Fraction`. Bland's rule guarantees termination.
"""

import logging
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence

logger = logging.getLogger(__name__)

Matrix = List[List[Fraction]]


class Status(Enum):
    optimal = "optimal"
    infeasible = "infeasible"
    unbounded = "unbounded"

    def __str__(self) -> str:
        return self.value


class LPResult:
    status: Status
    x: Optional[List[Fraction]]
    value: Optional[Fraction]

    def __init__(
        self,
        status: Status,
        x: Optional[List[Fraction]] = None,
        value: Optional[Fraction] = None,
    ) -> None:
        self.status = status
        self.x = x
        self.value = value

    def __repr__(self) -> str:
        return f"LPResult(status={self.status}, value={self.value})"


def _pivot(tableau: Matrix, objective: List[Fraction], row: int, col: int) -> None:
    pivot = tableau[row][col]
    tableau[row] = [v / pivot for v in tableau[row]]
    pivot_row = tableau[row]
    for i, current in enumerate(tableau):
        factor = current[col]
        if i != row and factor != 0:
            tableau[i] = [a - factor * b for a, b in zip(current, pivot_row)]
    factor = objective[col]
    if factor != 0:
        objective[:] = [a - factor * b for a, b in zip(objective, pivot_row)]


def _iterate(
    tableau: Matrix, objective: List[Fraction], basis: List[int], columns: int
) -> Status:
    """Run Bland-rule pivots on columns ``[0, columns)`` until optimal or unbounded."""
    while True:
        entering = next((j for j in range(columns) if objective[j] < 0), None)
        if entering is None:
            return Status.optimal

        leaving = None
        best_ratio = Fraction(0)
        for i, row in enumerate(tableau):
            if row[entering] > 0:
                ratio = row[-1] / row[entering]
                if (
                    leaving is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leaving])
                ):
                    leaving = i
                    best_ratio = ratio
        if leaving is None:
            return Status.unbounded

        _pivot(tableau, objective, leaving, entering)
        basis[leaving] = entering


def _reduced_costs(
    cost: Sequence[Fraction], tableau: Matrix, basis: List[int]
) -> List[Fraction]:
    objective = list(cost) + [Fraction(0)]
    for i, var in enumerate(basis):
        factor = objective[var]
        if factor != 0:
            objective = [a - factor * b for a, b in zip(objective, tableau[i])]
    return objective


def solve_standard(
    A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], c: Sequence[Fraction]
) -> LPResult:
    """Minimize ``c.x`` subject to ``A x = b``, ``x >= 0``.

    Args:
        A: constraint matrix, one list per equality row.
        b: right-hand side.
        c: objective coefficients, one per column of ``A``.

    Returns:
        An :class:`LPResult`. ``x`` and ``value`` are set only when optimal.
    """
    n = len(c)
    m = len(b)
    if any(len(row) != n for row in A):
        raise ValueError("every constraint row needs one coefficient per variable")

    if m == 0:
        if any(Fraction(v) < 0 for v in c):
            return LPResult(Status.unbounded)
        return LPResult(Status.optimal, [Fraction(0)] * n, Fraction(0))

    # phase 1: one artificial per row, rows negated so that b >= 0
    tableau: Matrix = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        row = [Fraction(sign * v) for v in A[i]]
        row += [Fraction(1) if k == i else Fraction(0) for k in range(m)]
        row.append(Fraction(sign * b[i]))
        tableau.append(row)
    basis = list(range(n, n + m))

    phase_one = [Fraction(0)] * n + [Fraction(1)] * m
    objective = _reduced_costs(phase_one, tableau, basis)
    _iterate(tableau, objective, basis, n + m)

    if -objective[-1] != 0:
        return LPResult(Status.infeasible)

    # drive zero-valued artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(tableau):
        if basis[i] >= n:
            col = next((j for j in range(n) if tableau[i][j] != 0), None)
            if col is None:
                del tableau[i]
                del basis[i]
                continue
            dummy = [Fraction(0)] * (n + m + 1)
            _pivot(tableau, dummy, i, col)
            basis[i] = col
        i += 1

    tableau = [row[:n] + [row[-1]] for row in tableau]
    objective = _reduced_costs([Fraction(v) for v in c], tableau, basis)
    status = _iterate(tableau, objective, basis, n)
    if status is Status.unbounded:
        return LPResult(Status.unbounded)

    x = [Fraction(0)] * n
    for i, var in enumerate(basis):
        x[var] = tableau[i][-1]
    value = sum((Fraction(c[j]) * x[j] for j in range(n)), Fraction(0))
    logger.debug("simplex optimum %s over %d rows", value, len(tableau))
    return LPResult(Status.optimal, x, value)


def is_feasible(
    A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]
) -> bool:
    """Whether ``A z <= b`` has a solution with ``z`` free."""
    if not A:
        return all(v >= 0 for v in b)
    n = len(A[0])
    m = len(A)
    rows = []
    for i, row in enumerate(A):
        plus = [Fraction(v) for v in row]
        minus = [-v for v in plus]
        slack = [Fraction(1) if k == i else Fraction(0) for k in range(m)]
        rows.append(plus + minus + slack)
    result = solve_standard(rows, [Fraction(v) for v in b], [Fraction(0)] * (2 * n + m))
    return result.status is Status.optimal
