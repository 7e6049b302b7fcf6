"""Relational data model and functional-dependency combinatorics.

Tables store rows as tuples aligned with a sorted attribute tuple, so two
tables over the same attributes compare equal iff they hold the same rows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

from .constants import (
    RESERVED_NAME_CHARS,
    RESERVED_VALUE_CHARS,
    ROW_LIMIT,
    SEP,
)


class InstanceError(ValueError):
    """A schema, dependency, query or database violates its invariants."""


class CapExceeded(RuntimeError):
    """A computation would exceed a configured size cap."""


def check_name(name: str, kind: str = "attribute") -> str:
    if not isinstance(name, str) or not name:
        raise InstanceError(f"{kind} name must be a non-empty string, got {name!r}")
    if any(ch.isspace() for ch in name) or RESERVED_NAME_CHARS & set(name):
        raise InstanceError(f"{kind} name {name!r} contains whitespace or a reserved character")
    return name


def check_value(value: str) -> str:
    if not isinstance(value, str):
        raise InstanceError(f"values must be strings, got {value!r}")
    bad = RESERVED_VALUE_CHARS & set(value)
    if bad:
        raise InstanceError(f"value {value!r} contains reserved character(s) {''.join(sorted(bad))!r}")
    return value


# ---------------------------------------------------------------------------
# Schema, dependencies, queries


@dataclass(frozen=True)
class FD:
    """Functional dependency ``lhs -> rhs`` (schema-wide)."""

    lhs: frozenset
    rhs: str

    def __post_init__(self):
        object.__setattr__(self, "lhs", frozenset(self.lhs))

    @classmethod
    def parse(cls, text: str) -> "FD":
        """Parse ``"x,y -> z"``; an empty left side is allowed (``"-> z"``)."""
        left, sep, right = text.partition("->")
        if not sep or not right.strip():
            raise InstanceError(f"cannot parse functional dependency {text!r}")
        lhs = [a.strip() for a in left.replace(",", " ").split()]
        return cls(frozenset(lhs), right.strip())

    @property
    def attributes(self) -> frozenset:
        return self.lhs | {self.rhs}

    def __str__(self):
        return f"{','.join(sorted(self.lhs))} -> {self.rhs}"


@dataclass(frozen=True)
class Schema:
    attributes: tuple
    relations: Mapping[str, frozenset] = field(hash=False)

    def __post_init__(self):
        attrs = tuple(self.attributes)
        for a in attrs:
            check_name(a)
        if len(set(attrs)) != len(attrs):
            raise InstanceError("duplicate attribute names in schema")
        if not self.relations:
            raise InstanceError("schema needs at least one relation")
        rels = {}
        for name, rattrs in self.relations.items():
            check_name(name, "relation")
            rattrs = frozenset(rattrs)
            if not rattrs:
                raise InstanceError(f"relation {name} has no attributes")
            unknown = rattrs - set(attrs)
            if unknown:
                raise InstanceError(f"relation {name} uses unknown attribute(s) {sorted(unknown)}")
            rels[name] = rattrs
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "relations", rels)

    @classmethod
    def of(cls, relations: Mapping[str, Iterable[str]], attributes: Optional[Iterable[str]] = None) -> "Schema":
        """Build a schema; attributes default to the union in first-seen order."""
        if attributes is None:
            seen: dict = {}
            for rattrs in relations.values():
                for a in rattrs:
                    seen.setdefault(a, None)
            attributes = seen
        return cls(tuple(attributes), {n: frozenset(a) for n, a in relations.items()})

    def check_fd(self, fd: FD) -> FD:
        unknown = fd.attributes - set(self.attributes)
        if unknown:
            raise InstanceError(f"fd {fd} uses unknown attribute(s) {sorted(unknown)}")
        return fd


@dataclass(frozen=True)
class Query:
    """Natural join of ``joins``; ``free`` (default: all variables) projects it."""

    joins: frozenset
    free: Optional[frozenset] = None

    def __post_init__(self):
        object.__setattr__(self, "joins", frozenset(self.joins))
        if self.free is not None:
            object.__setattr__(self, "free", frozenset(self.free))

    def variables(self, schema: Schema) -> frozenset:
        """V(Q): every attribute of a joined relation."""
        return frozenset().union(*(schema.relations[r] for r in self.joins))

    def free_variables(self, schema: Schema) -> frozenset:
        return self.variables(schema) if self.free is None else self.free

    def is_natural_join(self, schema: Schema) -> bool:
        return self.free is None or self.free == self.variables(schema)

    def validate(self, schema: Schema) -> "Query":
        if not self.joins:
            raise InstanceError("query joins no relations")
        unknown = self.joins - set(schema.relations)
        if unknown:
            raise InstanceError(f"query joins unknown relation(s) {sorted(unknown)}")
        if self.free is not None and not self.free <= self.variables(schema):
            extra = sorted(self.free - self.variables(schema))
            raise InstanceError(f"free variable(s) {extra} not in any joined relation")
        return self


def effective_fds(schema: Schema, fds: Iterable[FD], joins: Iterable[str]) -> frozenset:
    """The fds that constrain a join: those inside some joined relation.

    An fd whose attributes are not all contained in a single joined relation
    is never checked on any table, so it says nothing about the join result.
    """
    scopes = [schema.relations[r] for r in joins]
    return frozenset(f for f in fds if any(f.attributes <= s for s in scopes))


# ---------------------------------------------------------------------------
# Tables and databases


@dataclass(frozen=True)
class Table:
    attributes: tuple
    rows: frozenset

    def __post_init__(self):
        attrs = tuple(self.attributes)
        if list(attrs) != sorted(set(attrs)):
            raise InstanceError(f"table attributes must be sorted and distinct: {attrs}")
        rows = frozenset(self.rows)
        for r in rows:
            if len(r) != len(attrs):
                raise InstanceError(f"row {r} does not match attributes {attrs}")
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, attributes: Iterable[str], rows: Iterable[Iterable[str]]) -> "Table":
        """Rows given positionally in the order of ``attributes``."""
        attributes = tuple(attributes)
        order = sorted(range(len(attributes)), key=attributes.__getitem__)
        canon = tuple(attributes[i] for i in order)
        return cls(canon, frozenset(tuple(r[i] for i in order) for r in map(tuple, rows)))

    @classmethod
    def from_dicts(cls, attributes: Iterable[str], rows: Iterable[Mapping[str, str]]) -> "Table":
        attrs = tuple(sorted(set(attributes)))
        out = set()
        for r in rows:
            if set(r) != set(attrs):
                raise InstanceError(f"row keys {sorted(r)} differ from table attributes {list(attrs)}")
            out.add(tuple(r[a] for a in attrs))
        return cls(attrs, frozenset(out))

    @classmethod
    def empty(cls, attributes: Iterable[str]) -> "Table":
        return cls(tuple(sorted(set(attributes))), frozenset())

    def __len__(self):
        return len(self.rows)

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.rows)

    def dicts(self) -> Iterator[dict]:
        for r in self.rows:
            yield dict(zip(self.attributes, r))

    def sorted_rows(self) -> list:
        return sorted(self.rows)

    def positions(self, attrs: Iterable[str]) -> tuple:
        idx = {a: i for i, a in enumerate(self.attributes)}
        return tuple(idx[a] for a in attrs)

    def column(self, attribute: str) -> set:
        (i,) = self.positions([attribute])
        return {r[i] for r in self.rows}

    def project(self, attrs: Iterable[str]) -> "Table":
        attrs = tuple(sorted(set(attrs)))
        pos = self.positions(attrs)
        return Table(attrs, frozenset(tuple(r[i] for i in pos) for r in self.rows))


@dataclass(frozen=True)
class Database:
    tables: Mapping[str, Table] = field(hash=False)

    def __getitem__(self, name: str) -> Table:
        return self.tables[name]

    @property
    def size(self) -> int:
        """|D|: the largest table."""
        return max((len(t) for t in self.tables.values()), default=0)

    def size_over(self, names: Iterable[str]) -> int:
        return max((len(self.tables[n]) for n in names), default=0)

    def validate(self, schema: Schema) -> "Database":
        missing = set(schema.relations) - set(self.tables)
        if missing:
            raise InstanceError(f"database lacks relation(s) {sorted(missing)}")
        for name, t in self.tables.items():
            if name not in schema.relations:
                raise InstanceError(f"database has unknown relation {name}")
            if set(t.attributes) != schema.relations[name]:
                raise InstanceError(
                    f"table {name} has attributes {list(t.attributes)}, "
                    f"schema says {sorted(schema.relations[name])}"
                )
        return self


# ---------------------------------------------------------------------------
# FD closure combinatorics


def _within(fds: Iterable[FD], universe: frozenset) -> list:
    return [f for f in fds if f.attributes <= universe]


def fd_closure(start: Iterable[str], fds: Iterable[FD]) -> frozenset:
    closed = set(start)
    fds = list(fds)
    changed = True
    while changed:
        changed = False
        for f in fds:
            if f.rhs not in closed and f.lhs <= closed:
                closed.add(f.rhs)
                changed = True
    return frozenset(closed)


def spans(s: Iterable[str], fds: Iterable[FD], universe: Iterable[str]) -> bool:
    universe = frozenset(universe)
    return fd_closure(s, _within(fds, universe)) == universe


def spanning_set(fds: Iterable[FD], universe: Iterable[str]) -> tuple:
    """A smallest spanning set, first in sorted-lexicographic order."""
    universe = frozenset(universe)
    inner = _within(fds, universe)
    attrs = sorted(universe)
    for size in range(len(attrs) + 1):
        for cand in itertools.combinations(attrs, size):
            if fd_closure(cand, inner) == universe:
                return cand
    raise AssertionError("the full universe always spans")  # pragma: no cover


def width(fds: Iterable[FD], universe: Iterable[str]) -> int:
    return len(spanning_set(fds, universe))


def _component_of(seed: str, fds: list) -> frozenset:
    comp = {seed}
    changed = True
    while changed:
        changed = False
        for f in fds:
            if f.rhs not in comp and f.lhs & comp:
                comp.add(f.rhs)
                changed = True
    return frozenset(comp)


def minimal_components(fds: Iterable[FD], universe: Iterable[str]) -> list:
    """Inclusion-minimal nonempty C with: (Y & C nonempty) => x in C, for Y -> x.

    Components are returned sorted by their sorted attribute lists. An fd with
    an empty left side never touches a component.
    """
    universe = frozenset(universe)
    inner = _within(fds, universe)
    smallest = {a: _component_of(a, inner) for a in universe}
    found = set()
    for comp in smallest.values():
        if all(not smallest[b] < comp for b in comp):
            found.add(comp)
    found = sorted(found, key=sorted)
    for c1, c2 in itertools.combinations(found, 2):
        assert not c1 & c2, "distinct minimal components must be disjoint"
    return found


def restrict_fds(fds: Iterable[FD], component: Iterable[str]) -> frozenset:
    """F[C]: the fds with lhs and rhs inside ``component``."""
    component = frozenset(component)
    return frozenset(f for f in fds if f.attributes <= component)


def remove_attributes(fds: Iterable[FD], removed: Iterable[str]) -> frozenset:
    """Delete attributes: drop fds whose rhs goes, trim the rest of their lhs."""
    removed = frozenset(removed)
    return frozenset(FD(f.lhs - removed, f.rhs) for f in fds if f.rhs not in removed)


@dataclass(frozen=True)
class ComponentDecomposition:
    layers: tuple  # tuple of tuple of frozenset
    residual_fds: tuple  # fd set in force when each layer was computed
    widths: tuple  # per layer, width of F[C] for each component

    def components(self) -> list:
        return [c for layer in self.layers for c in layer]


def iterative_width(fds: Iterable[FD], universe: Iterable[str]):
    """Return ``(m, decomposition)`` peeling minimal components layer by layer."""
    remaining = frozenset(universe)
    if not remaining:
        raise InstanceError("iterative width needs a non-empty universe")
    current = frozenset(_within(fds, remaining))
    layers, residual, widths = [], [], []
    while remaining:
        comps = minimal_components(current, remaining)
        layers.append(tuple(comps))
        residual.append(current)
        widths.append(tuple(width(restrict_fds(current, c), c) for c in comps))
        gone = frozenset().union(*comps)
        remaining -= gone
        current = remove_attributes(current, gone)
    m = max(max(ws) for ws in widths)
    return m, ComponentDecomposition(tuple(layers), tuple(residual), tuple(widths))


# ---------------------------------------------------------------------------
# Checks on databases


def check_fd(db: Database, fd: FD) -> bool:
    """True iff no table containing the fd's attributes violates it."""
    for t in db.tables.values():
        if not fd.attributes <= set(t.attributes):
            continue
        lhs = t.positions(sorted(fd.lhs))
        (rhs,) = t.positions([fd.rhs])
        seen: dict = {}
        for r in t.rows:
            key = tuple(r[i] for i in lhs)
            if seen.setdefault(key, r[rhs]) != r[rhs]:
                return False
    return True


def violated_fds(db: Database, fds: Iterable[FD]) -> list:
    return sorted((f for f in fds if not check_fd(db, f)), key=str)


def power_database(db: Database, n: int, row_limit: int = ROW_LIMIT) -> Database:
    """D^n: rows are n-tuples of rows, values n-tuples joined with ``SEP``."""
    if n < 1:
        raise ValueError("power must be at least 1")
    for name, t in db.tables.items():
        if len(t) ** n > row_limit:
            raise CapExceeded(f"|{name}|^{n} = {len(t) ** n} rows exceeds the limit {row_limit}")
    tables = {}
    for name, t in db.tables.items():
        rows = t.sorted_rows()
        out = frozenset(
            tuple(SEP.join(parts) for parts in zip(*combo))
            for combo in itertools.product(rows, repeat=n)
        )
        tables[name] = Table(t.attributes, out)
    return Database(tables)


def measure_alpha(q: Query, db: Database, join_result: Table) -> Optional[float]:
    """log|Q(D)| / log|D| with |D| the largest joined table; None when undefined."""
    d = db.size_over(q.joins)
    if d <= 1 or len(join_result) == 0:
        return None
    return math.log2(len(join_result)) / math.log2(d)
