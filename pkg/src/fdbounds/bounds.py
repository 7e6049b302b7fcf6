"""Upper and lower bound LPs for the worst-case join size exponent.

* vertex packing / fractional edge cover (the AGM pair),
* the polymatroid (Shannon-inequality) relaxation with fd equalities and
  optional per-relation log-size budgets,
* the coloring lower bound, as an LP over colour classes.

Subsets of the query variables are handled as bitmasks over the sorted
variable list; certificates report them as comma-joined attribute names.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .constants import LATTICE_CAP, TOL
from .core import FD, CapExceeded, Database, Query, Schema, effective_fds
from .ratlp import RationalLP, Status, solve

METHODS = ("agm_cover", "vertex_packing", "polymatroid", "polymatroid_budgeted", "coloring")


class UnboundedBound(ArithmeticError):
    """The bound LP has no finite optimum."""


@dataclass(frozen=True)
class BoundReport:
    method: str
    value: Fraction
    certificate: dict

    def to_record(self) -> dict:
        return {
            "method": self.method,
            "value": str(self.value),
            "certificate": {k: str(v) for k, v in self.certificate.items()},
        }


def subset_label(attrs: Iterable[str]) -> str:
    return ",".join(sorted(attrs)) or "{}"


class Lattice:
    """Bitmask view of the subsets of a sorted attribute list."""

    def __init__(self, attrs: Iterable[str]):
        self.attrs = tuple(sorted(attrs))
        self.bit = {a: 1 << i for i, a in enumerate(self.attrs)}
        self.full = (1 << len(self.attrs)) - 1

    def mask(self, attrs: Iterable[str]) -> int:
        m = 0
        for a in attrs:
            m |= self.bit[a]
        return m

    def members(self, mask: int) -> tuple:
        return tuple(a for a in self.attrs if self.bit[a] & mask)

    def label(self, mask: int) -> str:
        return subset_label(self.members(mask))


def _query_parts(schema: Schema, q: Query):
    q.validate(schema)
    joins = sorted(q.joins)
    return joins, q.variables(schema)


def _checked(sol, method):
    if sol.status is Status.UNBOUNDED:
        raise UnboundedBound(f"{method} LP is unbounded")
    if sol.status is not Status.OPTIMAL:
        raise ArithmeticError(f"{method} LP is {sol.status.value}")
    return sol


# ---------------------------------------------------------------------------
# AGM pair


def vertex_packing_lp(schema: Schema, q: Query) -> RationalLP:
    joins, X = _query_parts(schema, q)
    lp = RationalLP()
    for x in sorted(X):
        lp.add_variable(x)
    lp.objective = {x: 1 for x in sorted(X)}
    for r in joins:
        lp.add({x: 1 for x in schema.relations[r]}, "<=", 1)
    return lp


def edge_cover_lp(schema: Schema, q: Query) -> RationalLP:
    joins, X = _query_parts(schema, q)
    lp = RationalLP(sense="min")
    for r in joins:
        lp.add_variable(r)
    lp.objective = {r: 1 for r in joins}
    for x in sorted(X):
        lp.add({r: 1 for r in joins if x in schema.relations[r]}, ">=", 1)
    return lp


def vertex_packing_bound(schema: Schema, q: Query) -> BoundReport:
    """Fractional vertex packing number of the query hypergraph; fds are ignored."""
    sol = _checked(solve(vertex_packing_lp(schema, q)), "vertex packing")
    return BoundReport("vertex_packing", sol.value, dict(sol.assignment))


def edge_cover_bound(schema: Schema, q: Query) -> BoundReport:
    """Fractional edge cover number; equal to the packing number by LP duality."""
    sol = _checked(solve(edge_cover_lp(schema, q)), "edge cover")
    packing = vertex_packing_bound(schema, q)
    assert sol.value == packing.value, "LP duality violated between cover and packing"
    return BoundReport("agm_cover", sol.value, dict(sol.assignment))


# ---------------------------------------------------------------------------
# Polymatroid relaxation


def polymatroid_lp(
    schema: Schema,
    fds: Iterable[FD],
    q: Query,
    budgets: Optional[Mapping[str, object]] = None,
    *,
    literal: bool = False,
    cap: int = LATTICE_CAP,
):
    """Build the set-function LP; returns ``(lp, lattice)``.

    ``literal=True`` keeps only what the bare submodularity statement says:
    every variable free (no zero at the empty set, no monotonicity) and
    submodularity over all pairs of subsets. That program is usually
    unbounded and exists to document why the extra constraints are needed.
    """
    joins, X = _query_parts(schema, q)
    if len(X) > cap:
        raise CapExceeded(f"{len(X)} query variables exceed the lattice cap {cap} (LP has 2^|X| variables)")
    budgets = {r: Fraction(b) for r, b in (budgets or {}).items()}
    for r, b in budgets.items():
        if r not in q.joins:
            raise ValueError(f"budget for relation {r} which the query does not join")
        if b < 0:
            raise ValueError(f"budget for {r} is negative")
    lat = Lattice(X)
    name = lat.label
    lp = RationalLP()
    first = 0 if literal else 1
    for m in range(first, lat.full + 1):
        lp.add_variable(name(m), free=literal)

    def term(coeffs, m, c):
        if m or literal:
            coeffs[name(m)] = coeffs.get(name(m), 0) + c

    if literal:
        for a, b in itertools.combinations(range(lat.full + 1), 2):
            if a & b in (a, b):
                continue
            coeffs: dict = {}
            term(coeffs, a | b, 1)
            term(coeffs, a & b, 1)
            term(coeffs, a, -1)
            term(coeffs, b, -1)
            lp.add(coeffs, "<=", 0)
    else:
        for x in lat.attrs:
            coeffs = {}
            term(coeffs, lat.full ^ lat.bit[x], 1)
            term(coeffs, lat.full, -1)
            lp.add(coeffs, "<=", 0)
        for x, y in itertools.combinations(lat.attrs, 2):
            bx, by = lat.bit[x], lat.bit[y]
            rest = lat.full ^ bx ^ by
            sub = rest
            while True:
                coeffs = {}
                term(coeffs, sub | bx | by, 1)
                term(coeffs, sub, 1)
                term(coeffs, sub | bx, -1)
                term(coeffs, sub | by, -1)
                lp.add(coeffs, "<=", 0)
                if sub == 0:
                    break
                sub = (sub - 1) & rest
    for r in joins:
        coeffs = {}
        term(coeffs, lat.mask(schema.relations[r]), 1)
        lp.add(coeffs, "<=", budgets.get(r, 1))
    for f in sorted(effective_fds(schema, fds, q.joins), key=str):
        if f.rhs in f.lhs:
            continue
        coeffs = {}
        term(coeffs, lat.mask(f.attributes), 1)
        term(coeffs, lat.mask(f.lhs), -1)
        lp.add(coeffs, "=", 0)
    target = lat.mask(q.free_variables(schema))
    lp.objective = {name(target): 1} if (target or literal) else {}
    return lp, lat


def polymatroid_bound(
    schema: Schema,
    fds: Iterable[FD],
    q: Query,
    budgets: Optional[Mapping[str, object]] = None,
    cap: int = LATTICE_CAP,
) -> BoundReport:
    """Max of v[free(q)] over polymatroids obeying relation budgets and fd equalities."""
    lp, lat = polymatroid_lp(schema, fds, q, budgets, cap=cap)
    sol = _checked(solve(lp), "polymatroid")
    cert = {lat.label(0): Fraction(0)}
    cert.update(sol.assignment)
    method = "polymatroid_budgeted" if budgets else "polymatroid"
    return BoundReport(method, sol.value, cert)


# ---------------------------------------------------------------------------
# Colorings


def admissible_classes(lat: Lattice, fds: Iterable[FD]) -> list:
    """Masks S such that every fd Y -> x with x in S has S meeting Y."""
    masks = [(lat.mask(f.lhs), lat.bit[f.rhs]) for f in fds]
    return [
        s for s in range(1, lat.full + 1)
        if all(s & lhs for lhs, rhs in masks if s & rhs)
    ]


def coloring_lp(schema: Schema, fds: Iterable[FD], q: Query, cap: int = LATTICE_CAP):
    joins, X = _query_parts(schema, q)
    if len(X) > cap:
        raise CapExceeded(f"{len(X)} query variables exceed the lattice cap {cap}")
    lat = Lattice(X)
    classes = admissible_classes(lat, effective_fds(schema, fds, q.joins))
    lp = RationalLP()
    for s in classes:
        lp.add_variable(lat.label(s))
    lp.objective = {lat.label(s): 1 for s in classes}
    for r in joins:
        rm = lat.mask(schema.relations[r])
        lp.add({lat.label(s): 1 for s in classes if s & rm}, "<=", 1)
    return lp, lat


def coloring_bound(schema: Schema, fds: Iterable[FD], q: Query, cap: int = LATTICE_CAP) -> BoundReport:
    """Best colors-used / colors-seen-by-a-relation ratio over fd-respecting colorings.

    A colouring is a multiset of colour classes (the set of variables that
    carry a given colour), so weights on admissible classes describe it up
    to scaling.
    """
    lp, _ = coloring_lp(schema, fds, q, cap)
    sol = _checked(solve(lp), "coloring")
    return BoundReport("coloring", sol.value, {k: v for k, v in sol.assignment.items() if v})


def coloring_bound_oracle(schema: Schema, fds: Iterable[FD], q: Query, max_colors: int) -> Fraction:
    """Exhaustive maximum of the colouring ratio using colours from range(max_colors)."""
    joins, X = _query_parts(schema, q)
    if max_colors > 4 or len(X) > 4:
        raise ValueError("exhaustive colouring search is limited to 4 colours and 4 variables")
    attrs = sorted(X)
    pos = {a: i for i, a in enumerate(attrs)}
    deps = [([pos[y] for y in f.lhs], pos[f.rhs]) for f in effective_fds(schema, fds, q.joins)]
    scopes = [[pos[a] for a in schema.relations[r]] for r in joins]
    best = Fraction(0)
    for f in itertools.product(range(1 << max_colors), repeat=len(attrs)):
        ok = True
        for lhs, rhs in deps:
            seen = 0
            for y in lhs:
                seen |= f[y]
            if f[rhs] & ~seen:
                ok = False
                break
        if not ok:
            continue
        used = 0
        for c in f:
            used |= c
        denom = 0
        for scope in scopes:
            s = 0
            for i in scope:
                s |= f[i]
            denom = max(denom, bin(s).count("1"))
        if denom:
            best = max(best, Fraction(bin(used).count("1"), denom))
    return best


# ---------------------------------------------------------------------------
# Weighted product inequality


def weighted_product_bound(db: Database, cover: Mapping[str, object], join_size: int) -> bool:
    """Check |Q(D)| <= prod |R(D)|^w_R for the join of the covered relations.

    The cover must be a fractional edge cover of those relations' attributes.
    Compared in the log domain with relative tolerance ``TOL``.
    """
    weights = {r: Fraction(w) for r, w in cover.items()}
    if any(w < 0 for w in weights.values()):
        raise ValueError("cover weights must be non-negative")
    attrs = set().union(*(db[r].attributes for r in weights))
    for x in attrs:
        if sum(w for r, w in weights.items() if x in db[r].attributes) < 1:
            raise ValueError(f"not a fractional edge cover: attribute {x} is covered less than once")
    if join_size < 0:
        raise ValueError("join size cannot be negative")
    if any(len(db[r]) == 0 and w > 0 for r, w in weights.items()):
        return join_size == 0
    if join_size == 0:
        return True
    rhs = sum(float(w) * math.log2(len(db[r])) for r, w in weights.items() if w)
    return math.log2(join_size) <= rhs + TOL * max(1.0, abs(rhs))
