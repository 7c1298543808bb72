"""
Exact linear programming over rationals.

A two-phase primal simplex with Bland's rule on a Fraction tableau. Rows
are kept as dicts of nonzero coefficients; every solution is re-checked by
exact substitution before it is returned.
"""

import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .config import get_config
from .exceptions import DimensionMismatch, LPSelfCheckError

logger = logging.getLogger(__name__)

Row = Dict[int, Fraction]


class LPStatus(Enum):
    INFEASIBLE = "infeasible"
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"


@dataclass
class StandardFormLP:
    """``minimize c·x  s.t.  A x = b, x ≥ 0``.

    ``rows`` is the matrix A, either dense lists or sparse ``{column: value}``
    dicts, one per equality.
    """

    rows: Sequence[object]
    rhs: Sequence[Fraction]
    objective: Sequence[Fraction]
    num_vars: int


@dataclass
class LPResult:
    status: LPStatus
    value: Optional[Fraction] = None
    assignment: List[Fraction] = field(default_factory=list)
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status is not LPStatus.INFEASIBLE


@dataclass
class SolveStats:
    """Counters shared by the solves of one decision (thread-safe)."""

    lps_solved: int = 0
    pivots: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, result: LPResult) -> None:
        with self._lock:
            self.lps_solved += 1
            self.pivots += result.pivots


def _sparse(row, n: int) -> Row:
    if isinstance(row, dict):
        items = row.items()
    else:
        if len(row) != n:
            raise DimensionMismatch(f"Row has {len(row)} entries, expected {n}")
        items = enumerate(row)
    out: Row = {}
    for j, v in items:
        if not 0 <= j < n:
            raise DimensionMismatch(f"Column {j} outside 0..{n - 1}")
        v = Fraction(v)
        if v:
            out[j] = v
    return out


class _Tableau:
    def __init__(self, rows: List[Row], rhs: List[Fraction], basis: List[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.cost: Row = {}
        self.value = Fraction(0)
        self.pivots = 0

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            for j in row:
                row[j] /= piv
            self.rhs[r] /= piv
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            coef = other.get(c)
            if coef:
                self._eliminate(other, row, coef)
                self.rhs[i] -= coef * self.rhs[r]
        coef = self.cost.get(c)
        if coef:
            self._eliminate(self.cost, row, coef)
            self.value += coef * self.rhs[r]
        self.basis[r] = c
        self.pivots += 1

    @staticmethod
    def _eliminate(target: Row, row: Row, coef: Fraction) -> None:
        for j, v in row.items():
            nv = target.get(j, 0) - coef * v
            if nv:
                target[j] = nv
            else:
                target.pop(j, None)

    def entering(self, allowed: int) -> Optional[int]:
        # Bland: lowest index with negative reduced cost
        candidates = [j for j, d in self.cost.items() if d < 0 and j < allowed]
        return min(candidates) if candidates else None

    def leaving(self, c: int) -> Optional[int]:
        best = None
        for i, row in enumerate(self.rows):
            a = row.get(c)
            if a is None or a <= 0:
                continue
            ratio = self.rhs[i] / a
            if (
                best is None
                or ratio < best[0]
                or (ratio == best[0] and self.basis[i] < self.basis[best[1]])
            ):
                best = (ratio, i)
        return None if best is None else best[1]

    def optimize(self, allowed: int) -> bool:
        """Run simplex iterations; False when unbounded."""
        while True:
            c = self.entering(allowed)
            if c is None:
                return True
            r = self.leaving(c)
            if r is None:
                return False
            self.pivot(r, c)

    def price(self, objective: Row) -> None:
        """Reduced costs and value of ``objective`` for the current basis."""
        self.cost = dict(objective)
        self.value = Fraction(0)
        for i, b in enumerate(self.basis):
            cb = objective.get(b)
            if cb:
                self._eliminate(self.cost, self.rows[i], cb)
                self.value += cb * self.rhs[i]


def solve(
    p: StandardFormLP,
    stats: Optional[SolveStats] = None,
    self_check: Optional[bool] = None,
) -> LPResult:
    """Solve ``minimize c·x  s.t.  A x = b, x ≥ 0`` exactly.

    Phase 1 minimises the sum of one artificial variable per row; leftover
    basic artificials at zero are pivoted out, or their rows dropped as
    redundant. Phase 2 then optimises the objective. Bland's rule
    guarantees termination.

    Args:
        p: The problem in standard form
        stats: Optional counters to update
        self_check: Re-verify the solution (defaults to the global config)

    Returns:
        LPResult: Status, optimal value and assignment, pivot count

    Raises:
        DimensionMismatch: If rows, rhs and objective sizes disagree
        LPSelfCheckError: If the returned solution fails re-substitution

    Example:
        >>> res = solve(StandardFormLP([[1, 1]], [1], [3, 5], 2))
        >>> res.value
        Fraction(3, 1)
    """
    n = p.num_vars
    if len(p.rows) != len(p.rhs):
        raise DimensionMismatch(f"{len(p.rows)} rows but {len(p.rhs)} right-hand sides")
    if len(p.objective) != n:
        raise DimensionMismatch(f"Objective has {len(p.objective)} entries, expected {n}")

    original = [_sparse(row, n) for row in p.rows]
    rhs = [Fraction(b) for b in p.rhs]
    objective = {j: Fraction(c) for j, c in enumerate(p.objective) if c}
    m = len(original)

    rows: List[Row] = []
    for i, row in enumerate(original):
        row = dict(row)
        if rhs[i] < 0:
            row = {j: -v for j, v in row.items()}
            rhs[i] = -rhs[i]
        row[n + i] = Fraction(1)
        rows.append(row)

    tab = _Tableau(rows, rhs, [n + i for i in range(m)])
    tab.price({n + i: Fraction(1) for i in range(m)})
    tab.optimize(n + m)

    if tab.value > 0:
        result = LPResult(LPStatus.INFEASIBLE, pivots=tab.pivots)
        _finish(result, stats, n, m)
        return result

    # Drive remaining artificials out of the basis
    for i in range(len(tab.rows) - 1, -1, -1):
        if tab.basis[i] < n:
            continue
        column = next((j for j in sorted(tab.rows[i]) if j < n), None)
        if column is None:
            del tab.rows[i], tab.rhs[i], tab.basis[i]
        else:
            tab.pivot(i, column)
    for row in tab.rows:
        for j in [j for j in row if j >= n]:
            del row[j]

    tab.price(objective)
    if not tab.optimize(n):
        result = LPResult(LPStatus.UNBOUNDED, pivots=tab.pivots)
        _finish(result, stats, n, m)
        return result

    x = [Fraction(0)] * n
    for i, b in enumerate(tab.basis):
        x[b] = tab.rhs[i]
    result = LPResult(LPStatus.OPTIMAL, tab.value, x, tab.pivots)

    check = get_config().lp_self_check if self_check is None else self_check
    if check:
        _verify(original, [Fraction(b) for b in p.rhs], objective, result)
    _finish(result, stats, n, m)
    return result


def _finish(result: LPResult, stats: Optional[SolveStats], n: int, m: int) -> None:
    logger.debug(
        "LP %dx%d: %s after %d pivots", m, n, result.status.value, result.pivots
    )
    if stats is not None:
        stats.record(result)


def _verify(rows: List[Row], rhs: List[Fraction], objective: Row, result: LPResult) -> None:
    x = result.assignment
    if any(v < 0 for v in x):
        raise LPSelfCheckError("Negative variable in LP solution")
    for i, row in enumerate(rows):
        lhs = sum((v * x[j] for j, v in row.items()), Fraction(0))
        if lhs != rhs[i]:
            raise LPSelfCheckError(f"Constraint {i} violated: {lhs} != {rhs[i]}")
    value = sum((c * x[j] for j, c in objective.items()), Fraction(0))
    if value != result.value:
        raise LPSelfCheckError(f"Objective mismatch: {value} != {result.value}")
