"""Join evaluation.

``join_baseline`` is a plain backtracking join used as the correctness
oracle. ``join_components`` masks minimal fd components with placeholders
layer by layer, then rebuilds the result one component at a time: each
partial row is extended by every assignment to a smallest spanning set of
the component, and the rest of the component is chased through fd lookups.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .constants import placeholder
from .core import (
    FD,
    Database,
    InstanceError,
    Query,
    Schema,
    Table,
    effective_fds,
    iterative_width,
    restrict_fds,
    spanning_set,
)


def _checked(schema: Schema, q: Query, db: Database) -> list:
    q.validate(schema)
    for r in q.joins:
        if r not in db.tables:
            raise InstanceError(f"database has no table for relation {r}")
        if set(db[r].attributes) != schema.relations[r]:
            raise InstanceError(f"table {r} does not match the schema")
    return sorted(q.joins)


def join_baseline(schema: Schema, q: Query, db: Database) -> Table:
    """Natural join over V(Q), smallest relations first, backtracking on rows."""
    joins = sorted(_checked(schema, q, db), key=lambda r: (len(db[r]), r))
    X = tuple(sorted(q.variables(schema)))
    plan = []
    bound: set = set()
    for r in joins:
        t = db[r]
        key_attrs = [a for a in t.attributes if a in bound]
        new_attrs = [a for a in t.attributes if a not in bound]
        kpos, npos = t.positions(key_attrs), t.positions(new_attrs)
        index: dict = {}
        for row in t.rows:
            index.setdefault(tuple(row[i] for i in kpos), []).append(tuple(row[i] for i in npos))
        plan.append((key_attrs, new_attrs, index))
        bound.update(new_attrs)

    out = set()
    binding: dict = {}

    def extend(level: int) -> None:
        if level == len(plan):
            out.add(tuple(binding[x] for x in X))
            return
        key_attrs, new_attrs, index = plan[level]
        for values in index.get(tuple(binding[a] for a in key_attrs), ()):
            binding.update(zip(new_attrs, values))
            extend(level + 1)
        for a in new_attrs:
            binding.pop(a, None)

    extend(0)
    return Table(X, frozenset(out))


def candidate_values(q: Query, db: Database, x: str, schema: Schema) -> set:
    """Values of x present in every joined relation that has attribute x."""
    holders = [r for r in sorted(q.joins) if x in schema.relations[r]]
    if not holders:
        raise InstanceError(f"attribute {x} occurs in no joined relation")
    values = db[holders[0]].column(x)
    for r in holders[1:]:
        values &= db[r].column(x)
    return values


def quotient_database(db: Database, c: Iterable[str]) -> Database:
    """Replace every value of an attribute in ``c`` by its placeholder, then dedupe."""
    c = set(c)
    tables = {}
    for name, t in db.tables.items():
        masked = [i for i, a in enumerate(t.attributes) if a in c]
        if not masked:
            tables[name] = t
            continue
        marks = {i: placeholder(t.attributes[i]) for i in masked}
        rows = frozenset(tuple(marks.get(i, v) for i, v in enumerate(r)) for r in t.rows)
        tables[name] = Table(t.attributes, rows)
    return Database(tables)


@dataclass
class FdIndex:
    """fd -> (relation used, sorted lhs, lhs values -> rhs value)."""

    entries: dict = field(default_factory=dict)

    @classmethod
    def build(cls, schema: Schema, q: Query, db: Database, fds: Iterable[FD]) -> "FdIndex":
        index = cls()
        for f in sorted(fds, key=str):
            scopes = [r for r in q.joins if f.attributes <= schema.relations[r]]
            if not scopes:
                raise InstanceError(f"no joined relation contains fd {f}")
            rel = min(scopes, key=lambda r: (len(db[r]), r))
            t = db[rel]
            lhs = tuple(sorted(f.lhs))
            lpos = t.positions(lhs)
            (rpos,) = t.positions([f.rhs])
            mapping: dict = {}
            for row in t.rows:
                key = tuple(row[i] for i in lpos)
                if mapping.setdefault(key, row[rpos]) != row[rpos]:
                    raise AssertionError(f"relation {rel} violates fd {f}; cannot index it")
            index.entries[f] = (rel, lhs, mapping)
        return index

    def lookup(self, fd: FD, row: Mapping[str, str]) -> Optional[str]:
        _, lhs, mapping = self.entries[fd]
        return mapping.get(tuple(row[a] for a in lhs))


def extend_component(
    s: Mapping[str, str],
    assignment: Mapping[str, str],
    component: Iterable[str],
    fd_index: FdIndex,
    db: Database,
    q: Query,
    schema: Schema,
) -> Optional[dict]:
    """The unique row agreeing with ``s`` off the component and with ``assignment``.

    ``s`` carries placeholders on the component; ``assignment`` values a
    spanning set of it. The remaining component attributes are chased through
    ``fd_index``; the result must lie in every joined table of ``db``.
    """
    component = set(component)
    t = {x: v for x, v in s.items() if x not in component}
    t.update(assignment)
    valued = set(assignment)
    fds = [f for f in fd_index.entries if f.attributes <= component]
    changed = True
    while changed:
        changed = False
        for f in fds:
            if not f.lhs <= valued:
                continue
            value = fd_index.lookup(f, t)
            if value is None:
                return None
            if f.rhs in valued:
                if t[f.rhs] != value:
                    return None
            else:
                t[f.rhs] = value
                valued.add(f.rhs)
                changed = True
    if valued != component:
        return None
    for r in q.joins:
        table = db[r]
        if tuple(t[a] for a in table.attributes) not in table.rows:
            return None
    return t


@dataclass
class EvalStats:
    """Counters from ``join_components``; one step record per component."""

    extensions: int = 0
    steps: list = field(default_factory=list)


def join_components(
    schema: Schema,
    fds: Iterable[FD],
    q: Query,
    db: Database,
    stats: Optional[EvalStats] = None,
) -> Table:
    joins = _checked(schema, q, db)
    X = tuple(sorted(q.variables(schema)))
    F = effective_fds(schema, fds, q.joins)
    _, dec = iterative_width(F, X)
    plan = []
    for layer, residual in zip(dec.layers, dec.residual_fds):
        for comp in layer:
            local = restrict_fds(residual, comp)
            plan.append((comp, local, spanning_set(local, comp)))

    work = Database({r: db[r] for r in joins})
    quotients = [work]
    masked: set = set()
    for comp, _, _ in plan:
        masked |= comp
        quotients.append(quotient_database(work, masked))

    if all(len(work[r]) for r in joins):
        partial = [{x: placeholder(x) for x in X}]
    else:
        partial = []
    for i in reversed(range(len(plan))):
        comp, local, span = plan[i]
        target = quotients[i]
        index = FdIndex.build(schema, q, work, local)
        pools = [sorted(candidate_values(q, work, x, schema)) for x in span]
        K = [dict(zip(span, combo)) for combo in itertools.product(*pools)]
        extended = []
        for s in partial:
            for r in K:
                row = extend_component(s, r, comp, index, target, q, schema)
                if row is not None:
                    extended.append(row)
        if stats is not None:
            stats.extensions += len(partial) * len(K)
            stats.steps.append({
                "component": sorted(comp),
                "span": list(span),
                "inputs": len(partial),
                "candidates": len(K),
                "outputs": len(extended),
            })
        partial = extended
    return Table(X, frozenset(tuple(t[x] for x in X) for t in partial))


def evaluate(schema: Schema, fds: Iterable[FD], q: Query, db: Database, algo: str = "components",
             stats: Optional[EvalStats] = None) -> Table:
    """Natural join Q'(D) by the chosen algorithm (no projection)."""
    if algo == "baseline":
        return join_baseline(schema, q, db)
    if algo == "components":
        return join_components(schema, fds, q, db, stats)
    raise ValueError(f"unknown algorithm {algo!r}")


def project_set(t: Table, free: Iterable[str]) -> Table:
    free = set(free)
    if not free <= set(t.attributes):
        raise ValueError("projection onto attributes the table lacks")
    return t.project(free)


def project_bag_count(t: Table, free: Iterable[str]):
    """Projection keeping duplicates: ``(multiplicity per projected row, total)``."""
    free = sorted(set(free))
    if not set(free) <= set(t.attributes):
        raise ValueError("projection onto attributes the table lacks")
    pos = t.positions(free)
    counts = Counter(tuple(r[i] for i in pos) for r in t.rows)
    return dict(counts), sum(counts.values())
