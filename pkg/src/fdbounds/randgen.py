"""Random schemas, fd sets and fd-satisfying databases for property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from .core import FD, Database, Query, Schema, Table, check_fd
from .entropy import Distribution


def random_schema(rng: random.Random, max_attrs: int = 5, max_relations: int = 3) -> Schema:
    n = rng.randint(1, max_attrs)
    attrs = [f"a{i}" for i in range(n)]
    rels = {}
    for j in range(rng.randint(1, max_relations)):
        rels[f"R{j}"] = rng.sample(attrs, rng.randint(1, n))
    # every attribute should occur somewhere, so V(Q) = all attributes
    for a in attrs:
        if not any(a in r for r in rels.values()):
            rng.choice(list(rels.values())).append(a)
    return Schema.of(rels, attrs)


def random_fds(rng: random.Random, schema: Schema, count: int, cycle_chance: float = 0.3) -> list:
    """Fds guarded by some relation, sometimes including a dependency cycle."""
    rels = [sorted(a) for a in schema.relations.values()]
    out = set()
    for _ in range(count):
        scope = rng.choice(rels)
        if len(scope) < 2:
            continue
        rhs = rng.choice(scope)
        rest = [a for a in scope if a != rhs]
        lhs = rng.sample(rest, rng.randint(1 if rng.random() < 0.9 else 0, min(2, len(rest))))
        out.add(FD(frozenset(lhs), rhs))
    if rng.random() < cycle_chance:
        wide = [r for r in rels if len(r) >= 2]
        if wide:
            scope = rng.choice(wide)
            ring = rng.sample(scope, rng.randint(2, len(scope)))
            for a, b in zip(ring, ring[1:] + ring[:1]):
                out.add(FD(frozenset([a]), b))
    return sorted(out, key=str)


def _repair(attrs: tuple, rows: list, fds: list, rng: random.Random) -> set:
    local = [f for f in fds if f.attributes <= set(attrs)]
    pos = {a: i for i, a in enumerate(attrs)}
    rows = [list(r) for r in rows]
    for _ in range(10):
        changed = False
        for f in local:
            li = [pos[a] for a in sorted(f.lhs)]
            ri = pos[f.rhs]
            first: dict = {}
            for r in rows:
                key = tuple(r[i] for i in li)
                want = first.setdefault(key, r[ri])
                if r[ri] != want:
                    r[ri] = want
                    changed = True
        if not changed:
            break
    kept: list = []
    seen = {f: {} for f in local}
    rng.shuffle(rows)
    for r in rows:
        ok = True
        for f in local:
            key = tuple(r[pos[a]] for a in sorted(f.lhs))
            if seen[f].get(key, r[pos[f.rhs]]) != r[pos[f.rhs]]:
                ok = False
                break
        if ok:
            for f in local:
                seen[f].setdefault(tuple(r[pos[a]] for a in sorted(f.lhs)), r[pos[f.rhs]])
            kept.append(tuple(r))
    return set(kept)


def random_database(rng: random.Random, schema: Schema, fds: list, max_rows: int = 30) -> Database:
    """Random tables over a small domain, repaired so every fd holds."""
    domain = [str(v) for v in range(rng.randint(2, 5))]
    tables = {}
    for name, attrs in schema.relations.items():
        attrs = tuple(sorted(attrs))
        rows = [tuple(rng.choice(domain) for _ in attrs) for _ in range(rng.randint(0, max_rows))]
        tables[name] = Table(attrs, frozenset(_repair(attrs, rows, list(fds), rng)))
    db = Database(tables)
    assert all(check_fd(db, f) for f in fds)
    return db


def random_instance(rng: random.Random, max_attrs: int = 5, max_relations: int = 3, max_rows: int = 30):
    schema = random_schema(rng, max_attrs, max_relations)
    fds = random_fds(rng, schema, rng.randint(0, 4))
    db = random_database(rng, schema, fds, max_rows)
    return schema, fds, Query(frozenset(schema.relations)), db


def random_distribution(rng: random.Random, max_attrs: int = 4, max_support: int = 6, domain: int = 3) -> Distribution:
    n = rng.randint(1, max_attrs)
    attrs = [f"a{i}" for i in range(n)]
    rows = {tuple(str(rng.randrange(domain)) for _ in attrs) for _ in range(rng.randint(1, max_support))}
    weights = [rng.randint(1, 6) for _ in rows]
    total = sum(weights)
    return Distribution.from_rows(attrs, sorted(rows), [Fraction(w, total) for w in weights])
