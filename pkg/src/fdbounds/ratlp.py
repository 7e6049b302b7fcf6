"""Exact linear programming over the rationals.

Two-phase tableau simplex with Bland's rule. The tableau is stored as sparse
rows (dicts column -> Fraction): the bound LPs built elsewhere have a handful
of non-zeros per constraint.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

OPS = ("<=", "=", ">=")


class LPError(ValueError):
    pass


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[str, Fraction]
    op: str
    rhs: Fraction


@dataclass
class RationalLP:
    variables: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    sense: str = "max"
    free: set = field(default_factory=set)  # variables without the x >= 0 bound

    def add_variable(self, name: str, free: bool = False) -> str:
        self.variables.append(name)
        if free:
            self.free.add(name)
        return name

    def add(self, coeffs: Mapping[str, object], op: str, rhs: object = 0) -> None:
        cleaned = {v: Fraction(c) for v, c in coeffs.items() if c != 0}
        self.constraints.append(Constraint(cleaned, op, Fraction(rhs)))

    def validate(self) -> None:
        if self.sense not in ("max", "min"):
            raise LPError(f"unknown sense {self.sense!r}")
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise LPError("duplicate variable names")
        for v in list(self.objective) + sorted(self.free):
            if v not in declared:
                raise LPError(f"undeclared variable {v!r}")
        for k, c in enumerate(self.constraints):
            if c.op not in OPS:
                raise LPError(f"constraint {k}: unknown relation {c.op!r}")
            for v in c.coeffs:
                if v not in declared:
                    raise LPError(f"constraint {k}: undeclared variable {v!r}")

    def to_text(self) -> str:
        """Debug dump, one constraint per line; not a stable format."""

        def lin(coeffs):
            terms = [f"{c} {v}" for v, c in sorted(coeffs.items(), key=lambda kv: self.variables.index(kv[0]))]
            return " + ".join(terms) or "0"

        lines = [f"{self.sense} {lin(self.objective)}", "subject to"]
        lines += [f"  {lin(c.coeffs)} {c.op} {c.rhs}" for c in self.constraints]
        if self.free:
            lines.append("free " + " ".join(v for v in self.variables if v in self.free))
        return "\n".join(lines)

    def satisfied_by(self, assignment: Mapping[str, Fraction]) -> bool:
        for v in self.variables:
            if v not in self.free and assignment[v] < 0:
                return False
        for c in self.constraints:
            lhs = sum((coef * assignment[v] for v, coef in c.coeffs.items()), Fraction(0))
            if c.op == "<=" and not lhs <= c.rhs:
                return False
            if c.op == ">=" and not lhs >= c.rhs:
                return False
            if c.op == "=" and lhs != c.rhs:
                return False
        return True

    def evaluate(self, assignment: Mapping[str, Fraction]) -> Fraction:
        return sum((c * assignment[v] for v, c in self.objective.items()), Fraction(0))


@dataclass(frozen=True)
class LPSolution:
    status: Status
    value: Optional[Fraction] = None
    assignment: Optional[dict] = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, col: int, obj: dict) -> Fraction:
        """Pivot on (r, col); update ``obj`` in place, return the objective shift."""
        prow = self.rows[r]
        p = prow[col]
        if p != 1:
            prow = {k: v / p for k, v in prow.items()}
            self.rows[r] = prow
            self.rhs[r] /= p
        b = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(col)
            if f is None:
                continue
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
            self.rhs[i] -= f * b
        shift = Fraction(0)
        f = obj.get(col)
        if f is not None:
            for k, v in prow.items():
                nv = obj.get(k, 0) - f * v
                if nv:
                    obj[k] = nv
                else:
                    obj.pop(k, None)
            shift = f * b
        self.basis[r] = col
        self.pivots += 1
        return shift

    def reduced_costs(self, cost: Mapping[int, Fraction]):
        obj = dict(cost)
        value = Fraction(0)
        for row, b, bc in zip(self.rows, self.rhs, self.basis):
            cb = cost.get(bc)
            if not cb:
                continue
            value += cb * b
            for k, v in row.items():
                nv = obj.get(k, 0) - cb * v
                if nv:
                    obj[k] = nv
                else:
                    obj.pop(k, None)
        return obj, value

    def run(self, cost: Mapping[int, Fraction], allowed) -> Optional[Fraction]:
        """Maximize ``cost`` over the current basis; None means unbounded."""
        obj, value = self.reduced_costs(cost)
        while True:
            entering = min((k for k, v in obj.items() if v > 0 and k in allowed), default=None)
            if entering is None:
                return value
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is None or a <= 0:
                    continue
                key = (self.rhs[i] / a, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                return None
            value += self.pivot(best[1], entering, obj)


def solve(lp: RationalLP) -> LPSolution:
    """Solve exactly. Minimization is handled by negating the objective."""
    lp.validate()
    columns: dict = {}  # variable -> (plus column, minus column or None)
    ncol = 0
    for v in lp.variables:
        if v in lp.free:
            columns[v] = (ncol, ncol + 1)
            ncol += 2
        else:
            columns[v] = (ncol, None)
            ncol += 1

    rows, rhs, basis, artificial = [], [], [], set()
    for c in lp.constraints:
        row: dict = {}
        for v, coef in c.coeffs.items():
            plus, minus = columns[v]
            row[plus] = row.get(plus, 0) + coef
            if minus is not None:
                row[minus] = row.get(minus, 0) - coef
        b, op = c.rhs, c.op
        if b < 0:
            row = {k: -x for k, x in row.items()}
            b = -b
            op = {"<=": ">=", ">=": "<=", "=": "="}[op]
        row = {k: x for k, x in row.items() if x}
        if op == "<=":
            row[ncol] = Fraction(1)
            basis.append(ncol)
            ncol += 1
        else:
            if op == ">=":
                row[ncol] = Fraction(-1)
                ncol += 1
            row[ncol] = Fraction(1)
            basis.append(ncol)
            artificial.add(ncol)
            ncol += 1
        rows.append(row)
        rhs.append(Fraction(b))

    tab = _Tableau(rows, rhs, basis)
    everything = range(ncol)

    if artificial:
        phase1 = {a: Fraction(-1) for a in artificial}
        best = tab.run(phase1, set(everything))
        if best is None or best < 0:
            return LPSolution(Status.INFEASIBLE, pivots=tab.pivots)
        # drive zero-valued artificials out of the basis, dropping redundant rows
        r = 0
        while r < len(tab.rows):
            if tab.basis[r] in artificial:
                col = min((k for k, v in tab.rows[r].items() if k not in artificial and v), default=None)
                if col is None:
                    del tab.rows[r], tab.rhs[r], tab.basis[r]
                    continue
                tab.pivot(r, col, {})
            r += 1
        for row in tab.rows:
            for a in artificial:
                row.pop(a, None)

    sign = 1 if lp.sense == "max" else -1
    cost: dict = {}
    for v, coef in lp.objective.items():
        plus, minus = columns[v]
        cost[plus] = cost.get(plus, 0) + sign * coef
        if minus is not None:
            cost[minus] = cost.get(minus, 0) - sign * coef
    allowed = set(everything) - artificial
    best = tab.run({k: Fraction(x) for k, x in cost.items() if x}, allowed)
    if best is None:
        return LPSolution(Status.UNBOUNDED, pivots=tab.pivots)

    values = [Fraction(0)] * ncol
    for bc, b in zip(tab.basis, tab.rhs):
        values[bc] = b
    assignment = {}
    for v, (plus, minus) in columns.items():
        assignment[v] = values[plus] - (values[minus] if minus is not None else 0)
    value = lp.evaluate(assignment)
    assert value == sign * best, "objective bookkeeping drifted"
    assert lp.satisfied_by(assignment), "optimal assignment violates a constraint"
    return LPSolution(Status.OPTIMAL, value, assignment, tab.pivots)


def dual_value_check(primal: RationalLP, dual: RationalLP) -> bool:
    """True iff both programs are optimal with the same exact value."""
    a, b = solve(primal), solve(dual)
    return a.optimal and b.optimal and a.value == b.value
