"""Worst-case database generators.

Each construction fills the joined relations of a query (other relations of
the schema are left empty) and has a closed-form ``*_sizes`` companion that
predicts table sizes without materializing anything:

* product       -- full Cartesian products sized by a fractional vertex packing
* coloring      -- projections of N^C through a set-valued colouring
* vspace        -- coset labels of a GF(p) subspace system
* permutation   -- row arrangements of the matrix A_k built from a rational
                   distribution, i.e. cosets of row-permutation stabilizers
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import gf
from .constants import ROW_LIMIT, SEP
from .core import (
    FD,
    CapExceeded,
    Database,
    InstanceError,
    Query,
    Schema,
    Table,
    check_value,
    effective_fds,
)
from .entropy import Distribution, fd_holds_on_distribution, marginal


class ConstructionError(InstanceError):
    """Generator input is invalid (violates an fd, non-integral sizes, ...)."""


def _tables(schema: Schema, q: Query, built: Mapping[str, Table]) -> Database:
    tables = {
        r: built[r] if r in built else Table.empty(attrs)
        for r, attrs in schema.relations.items()
    }
    return Database(tables)


def _guard(name: str, count: int, row_limit: int) -> None:
    if count > row_limit:
        shown = str(count) if count < 10 ** 15 else f"about 10^{len(str(count)) - 1}"
        raise CapExceeded(
            f"{name} would have {shown} rows, above the limit {row_limit}; use count-only mode"
        )


def _fds(schema, q, fds):
    return sorted(effective_fds(schema, fds, q.joins), key=str)


# ---------------------------------------------------------------------------
# Cartesian products


def _exact_power(n: int, exponent: Fraction) -> int:
    """n ** exponent when it is an integer, else ConstructionError."""
    exponent = Fraction(exponent)
    if exponent < 0:
        raise ConstructionError("packing weights must be non-negative")
    if exponent == 0:
        return 1
    root = round(n ** (1 / exponent.denominator)) if exponent else 1
    for cand in (root - 1, root, root + 1):
        if cand >= 1 and cand ** exponent.denominator == n:
            return cand ** exponent.numerator
    raise ConstructionError(f"{n}^{exponent} is not an integer")


def product_sizes(schema: Schema, q: Query, packing: Mapping[str, object], N: int) -> dict:
    """Closed-form sizes: |R(D)| = N^p(V(R)), |Q(D)| = N^p(X)."""
    q.validate(schema)
    if N < 2:
        raise ConstructionError("N must be at least 2")
    p = {x: Fraction(packing.get(x, 0)) for x in q.variables(schema)}
    for r in q.joins:
        if sum(p[x] for x in schema.relations[r]) > 1:
            raise ConstructionError(f"packing exceeds 1 on relation {r}")
    side = {x: _exact_power(N, w) for x, w in p.items()}
    sizes = {r: math.prod(side[x] for x in schema.relations[r]) for r in sorted(q.joins)}
    sizes["join"] = math.prod(side.values())
    return sizes


def product_ratio(schema: Schema, q: Query, packing: Mapping[str, object]) -> Optional[Fraction]:
    p = {x: Fraction(packing.get(x, 0)) for x in q.variables(schema)}
    top = max(sum(p[x] for x in schema.relations[r]) for r in q.joins)
    return sum(p.values()) / top if top else None


def product_database(
    schema: Schema,
    q: Query,
    packing: Mapping[str, object],
    N: int,
    row_limit: int = ROW_LIMIT,
    fds: Iterable[FD] = (),
) -> Database:
    """Full products of per-attribute value sets of size N^p_x.

    In a full product an fd Y -> x holds only when x takes a single value,
    so packings giving x positive weight are rejected when ``fds`` are given.
    """
    sizes = product_sizes(schema, q, packing, N)
    for r in q.joins:
        _guard(r, sizes[r], row_limit)
    side = {x: _exact_power(N, Fraction(packing.get(x, 0))) for x in q.variables(schema)}
    built = {}
    for r in q.joins:
        attrs = sorted(schema.relations[r])
        values = [[str(i) for i in range(side[x])] for x in attrs]
        built[r] = Table(tuple(attrs), frozenset(itertools.product(*values)))
    for fd in _fds(schema, q, fds):
        if side[fd.rhs] > 1:
            raise ConstructionError(f"product construction violates functional dependency {fd}")
    return _tables(schema, q, built)


# ---------------------------------------------------------------------------
# Colorings


@dataclass(frozen=True)
class Coloring:
    assign: Mapping[str, frozenset]

    def __post_init__(self):
        object.__setattr__(self, "assign", {x: frozenset(c) for x, c in self.assign.items()})

    def colors(self, attrs: Iterable[str]) -> frozenset:
        return frozenset().union(*(self.assign.get(x, frozenset()) for x in attrs))

    def satisfies(self, fd: FD) -> bool:
        return self.colors([fd.rhs]) <= self.colors(fd.lhs)

    def ratio(self, schema: Schema, q: Query) -> Optional[Fraction]:
        top = max(len(self.colors(schema.relations[r])) for r in q.joins)
        return Fraction(len(self.colors(q.variables(schema))), top) if top else None


def coloring_from_weights(weights: Mapping[str, object]) -> Coloring:
    """Turn colour-class weights (comma-joined class labels) into a colouring.

    Weights are scaled by the lcm of their denominators; a class of weight w
    then contributes w * lcm fresh colours to each of its members.
    """
    weights = {k: Fraction(v) for k, v in weights.items() if Fraction(v)}
    scale = math.lcm(*(w.denominator for w in weights.values())) if weights else 1
    assign: dict = {}
    counter = itertools.count()
    for label in sorted(weights):
        members = label.split(",")
        for _ in range(int(weights[label] * scale)):
            color = f"c{next(counter):03d}"
            for x in members:
                assign.setdefault(x, set()).add(color)
    return Coloring(assign)


def _check_coloring(schema, q, f, fds):
    for fd in _fds(schema, q, fds):
        if not f.satisfies(fd):
            raise ConstructionError(f"coloring violates functional dependency {fd}")


def coloring_sizes(schema: Schema, q: Query, f: Coloring, n_values: int) -> dict:
    q.validate(schema)
    sizes = {r: n_values ** len(f.colors(schema.relations[r])) for r in sorted(q.joins)}
    sizes["join"] = n_values ** len(f.colors(q.variables(schema)))
    return sizes


def coloring_database(
    schema: Schema,
    q: Query,
    f: Coloring,
    fds: Iterable[FD],
    N: Union[int, Sequence[str]],
    row_limit: int = ROW_LIMIT,
) -> Database:
    """R(D) = {r[f(V(R))] : r in N^C}; attribute x holds r restricted to f(x)."""
    values = [str(i) for i in range(N)] if isinstance(N, int) else [check_value(v) for v in N]
    if len(set(values)) < 2:
        raise ConstructionError("the value set N needs at least 2 elements")
    _check_coloring(schema, q, f, fds)
    sizes = coloring_sizes(schema, q, f, len(values))
    built = {}
    for r in q.joins:
        _guard(r, sizes[r], row_limit)
        attrs = sorted(schema.relations[r])
        colors = sorted(f.colors(attrs))
        at = {c: i for i, c in enumerate(colors)}
        picks = [[at[c] for c in sorted(f.assign.get(x, ()))] for x in attrs]
        rows = set()
        for combo in itertools.product(values, repeat=len(colors)):
            rows.add(tuple(SEP.join(combo[i] for i in pick) for pick in picks))
        built[r] = Table(tuple(attrs), frozenset(rows))
    return _tables(schema, q, built)


# ---------------------------------------------------------------------------
# Vector spaces over GF(p)


def _normalise(prime, dim, subspaces):
    gf.check_field(prime, dim)
    return {x: gf.rref(b, dim, prime)[0] for x, b in subspaces.items()}


@dataclass(frozen=True)
class VectorSpaceSystem:
    """Subspaces V_x of GF(p)^n; V_Y is the meet, fd Y -> x holds iff V_x >= V_Y.

    Attributes without a subspace get the whole space (a constant column).
    """

    prime: int
    dim: int
    subspaces: Mapping[str, tuple]

    def __post_init__(self):
        object.__setattr__(self, "subspaces", _normalise(self.prime, self.dim, self.subspaces))

    def space(self, x: str) -> tuple:
        whole = tuple(gf.unit(i, self.dim) for i in range(self.dim))
        return self.subspaces.get(x, whole)

    def meet(self, attrs: Iterable[str]) -> tuple:
        return gf.intersection([self.space(x) for x in attrs], self.dim, self.prime)

    def codim(self, attrs: Iterable[str]) -> int:
        return self.dim - len(self.meet(attrs))

    def satisfies(self, fd: FD) -> bool:
        return gf.contains(self.space(fd.rhs), self.meet(fd.lhs), self.dim, self.prime)

    def ratio(self, schema: Schema, q: Query) -> Optional[Fraction]:
        top = max(self.codim(schema.relations[r]) for r in q.joins)
        return Fraction(self.codim(q.variables(schema)), top) if top else None


@dataclass(frozen=True)
class VectorSpaceColoring:
    """Subspaces V_x of GF(p)^n; V_Y is the sum, fd Y -> x holds iff V_x <= V_Y.

    Attributes without a subspace get the zero space.
    """

    prime: int
    dim: int
    subspaces: Mapping[str, tuple]

    def __post_init__(self):
        object.__setattr__(self, "subspaces", _normalise(self.prime, self.dim, self.subspaces))

    def space(self, x: str) -> tuple:
        return self.subspaces.get(x, ())

    def join(self, attrs: Iterable[str]) -> tuple:
        return gf.span_sum([self.space(x) for x in attrs], self.dim, self.prime)

    def dimension(self, attrs: Iterable[str]) -> int:
        return len(self.join(attrs))

    def satisfies(self, fd: FD) -> bool:
        return gf.contains(self.join(fd.lhs), self.space(fd.rhs), self.dim, self.prime)

    def ratio(self, schema: Schema, q: Query) -> Optional[Fraction]:
        top = max(self.dimension(schema.relations[r]) for r in q.joins)
        return Fraction(self.dimension(q.variables(schema)), top) if top else None


def coloring_to_vector_space(f: Coloring, prime: int) -> VectorSpaceColoring:
    """Embed a colouring: V_x is spanned by the unit vectors of the colours in f(x)."""
    colors = sorted(f.colors(f.assign))
    at = {c: i for i, c in enumerate(colors)}
    n = len(colors)
    return VectorSpaceColoring(
        prime, n, {x: tuple(gf.unit(at[c], n) for c in sorted(cs)) for x, cs in f.assign.items()}
    )


def dualize_coloring(vc: VectorSpaceColoring) -> VectorSpaceSystem:
    """Annihilator system: V_x maps to {w : <v, w> = 0 for v in V_x}."""
    return VectorSpaceSystem(
        vc.prime,
        vc.dim,
        {x: gf.nullspace(b, vc.dim, vc.prime) for x, b in vc.subspaces.items()},
    )


def vs_sizes(schema: Schema, q: Query, system: VectorSpaceSystem) -> dict:
    q.validate(schema)
    sizes = {r: system.prime ** system.codim(schema.relations[r]) for r in sorted(q.joins)}
    sizes["join"] = system.prime ** system.codim(q.variables(schema))
    return sizes


def _label(vec) -> str:
    return ".".join(map(str, vec))


def vs_system_database(
    schema: Schema,
    q: Query,
    system: VectorSpaceSystem,
    fds: Iterable[FD],
    row_limit: int = ROW_LIMIT,
) -> Database:
    """One row r_v per vector v, with r_v[x] the canonical label of V_x + v."""
    q.validate(schema)
    for fd in _fds(schema, q, fds):
        if not system.satisfies(fd):
            raise ConstructionError(f"vector space system violates functional dependency {fd}")
    p, n = system.prime, system.dim
    _guard("vector space", p ** n, row_limit)
    labels = {}
    for x in sorted(q.variables(schema)):
        basis, pivots = gf.rref(system.space(x), n, p)
        labels[x] = {}
        for v in gf.vectors(n, p):
            w = list(v)
            for row, pc in zip(basis, pivots):
                f = w[pc]
                if f:
                    w = [(a - f * b) % p for a, b in zip(w, row)]
            labels[x][v] = _label(w)
    built = {}
    for r in q.joins:
        attrs = sorted(schema.relations[r])
        rows = frozenset(tuple(labels[x][v] for x in attrs) for v in gf.vectors(n, p))
        built[r] = Table(tuple(attrs), rows)
    return _tables(schema, q, built)


# ---------------------------------------------------------------------------
# Permutation groups acting on the rows of A_k


@dataclass(frozen=True)
class GroupConstructionSpec:
    """A rational distribution and a k making k * p(row) integral for every row."""

    base: Distribution
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ConstructionError("k must be positive")
        for p in self.base.probs:
            if (p * self.k).denominator != 1:
                raise ConstructionError(
                    f"k={self.k} is not a multiple of the common denominator {self.base.common_denominator}"
                )

    def matrix(self) -> list:
        """A_k: k * p(r) copies of each support row r, in support order."""
        out = []
        for r, p in zip(self.base.support, self.base.probs):
            out.extend([r] * int(p * self.k))
        return out

    def multiplicities(self, attrs: Iterable[str]) -> list:
        return [int(p * self.k) for p in marginal(self.base, attrs).probs]

    def stabilizer_order(self, attrs: Iterable[str]) -> int:
        """|G_Y|: permutations of A_k's rows fixing the submatrix on Y."""
        return math.prod(math.factorial(m) for m in self.multiplicities(attrs))

    def coset_count(self, attrs: Iterable[str]) -> int:
        return math.factorial(self.k) // self.stabilizer_order(attrs)


def distinct_permutations(items: Iterable):
    """Distinct orderings of a multiset, in lexicographic order."""
    seq = sorted(items)
    n = len(seq)
    while True:
        yield tuple(seq)
        i = n - 2
        while i >= 0 and seq[i] >= seq[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while seq[j] <= seq[i]:
            j -= 1
        seq[i], seq[j] = seq[j], seq[i]
        seq[i + 1:] = reversed(seq[i + 1:])


def permutation_sizes(schema: Schema, q: Query, spec: GroupConstructionSpec) -> dict:
    q.validate(schema)
    sizes = {r: spec.coset_count(schema.relations[r]) for r in sorted(q.joins)}
    sizes["join"] = spec.coset_count(q.variables(schema))
    return sizes


def normalized_log_coset_count(spec: GroupConstructionSpec, y: Iterable[str]) -> float:
    """(1/k) log2(k! / |G_Y|), exact integers until the final logarithm."""
    return math.log2(spec.coset_count(y)) / spec.k


def gc_ratio(schema: Schema, q: Query, spec: GroupConstructionSpec) -> Optional[float]:
    """log|G/G_X| / max_R log|G/G_V(R)| for the stabilizer system of A_k."""
    sizes = permutation_sizes(schema, q, spec)
    top = max(sizes[r] for r in q.joins)
    if top <= 1:
        return None
    return math.log2(sizes["join"]) / math.log2(top)


def permutation_database(
    schema: Schema,
    q: Query,
    spec: GroupConstructionSpec,
    fds: Iterable[FD],
    row_limit: int = ROW_LIMIT,
) -> Database:
    """R(D): the distinct row arrangements of A_k[V(R)].

    Attribute x of an arrangement holds its x column, joined with ``SEP``.
    Arrangements are enumerated as multiset permutations, never via k!.
    """
    q.validate(schema)
    X = q.variables(schema)
    if not X <= set(spec.base.attributes):
        raise ConstructionError("base distribution does not cover the query variables")
    for value in {v for r in spec.base.support for v in r}:
        check_value(value)
    for fd in _fds(schema, q, fds):
        if not fd_holds_on_distribution(spec.base, fd):
            raise ConstructionError(f"base distribution violates functional dependency {fd}")
    sizes = permutation_sizes(schema, q, spec)
    _guard("the full coset space", sizes["join"], row_limit)
    matrix = spec.matrix()
    built = {}
    for r in q.joins:
        _guard(r, sizes[r], row_limit)
        attrs = sorted(schema.relations[r])
        pos = [spec.base.attributes.index(a) for a in attrs]
        sub = [tuple(row[i] for i in pos) for row in matrix]
        rows = set()
        for arrangement in distinct_permutations(sub):
            rows.add(tuple(SEP.join(col) for col in zip(*arrangement)))
        assert len(rows) == sizes[r], "orbit-stabilizer count mismatch"
        built[r] = Table(tuple(attrs), frozenset(rows))
    return _tables(schema, q, built)
