"""Row distributions with exact rational probabilities, and their entropies.

Probabilities stay exact (``Fraction``); entropies are floats in bits.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .constants import LATTICE_CAP, TOL
from .core import FD, CapExceeded, InstanceError, Query, Schema, Table, effective_fds


class FDViolation(InstanceError):
    def __init__(self, fd: FD):
        super().__init__(f"distribution violates functional dependency {fd}")
        self.fd = fd


@dataclass(frozen=True)
class Distribution:
    attributes: tuple
    support: tuple
    probs: tuple

    def __post_init__(self):
        attrs = tuple(self.attributes)
        if list(attrs) != sorted(set(attrs)):
            raise ValueError("distribution attributes must be sorted and distinct")
        support = tuple(tuple(r) for r in self.support)
        probs = tuple(Fraction(p) for p in self.probs)
        if len(support) != len(probs):
            raise ValueError("support and probabilities differ in length")
        if len(set(support)) != len(support):
            raise ValueError("support rows must be distinct")
        if any(len(r) != len(attrs) for r in support):
            raise ValueError("support row does not match attributes")
        if any(p <= 0 for p in probs):
            raise ValueError("probabilities must be positive")
        if sum(probs) != 1:
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_rows(cls, attributes: Sequence[str], rows: Iterable[Sequence[str]], probs: Iterable[object]) -> "Distribution":
        """Rows are positional in ``attributes``; they are reordered to sorted order."""
        attributes = tuple(attributes)
        order = sorted(range(len(attributes)), key=attributes.__getitem__)
        support = [tuple(tuple(r)[i] for i in order) for r in rows]
        return cls(tuple(attributes[i] for i in order), tuple(support), tuple(probs))

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs))

    @property
    def common_denominator(self) -> int:
        return math.lcm(*(p.denominator for p in self.probs))


def marginal(d: Distribution, y: Iterable[str]) -> Distribution:
    y = sorted(set(y))
    missing = set(y) - set(d.attributes)
    if missing:
        raise ValueError(f"marginal over unknown attribute(s) {sorted(missing)}")
    idx = [d.attributes.index(a) for a in y]
    acc: dict = {}
    for r, p in zip(d.support, d.probs):
        key = tuple(r[i] for i in idx)
        acc[key] = acc.get(key, 0) + p
    return Distribution(tuple(y), tuple(acc), tuple(acc.values()))


def entropy_bits(d: Distribution) -> float:
    return -sum(float(p) * math.log2(p) for p in d.probs if p != 1) + 0.0


@dataclass(frozen=True)
class EntropyVector:
    attributes: tuple
    coords: Mapping[frozenset, float]

    def __getitem__(self, y: Iterable[str]) -> float:
        return self.coords[frozenset(y)]

    def violations(self, tol: float = TOL) -> list:
        """Failed polymatroid conditions, as human-readable strings."""
        out = []
        if self.coords[frozenset()] != 0:
            out.append("value at the empty set is not 0")
        subsets = list(self.coords)
        for y in subsets:
            for x in self.attributes:
                if x not in y and self.coords[y] > self.coords[y | {x}] + tol:
                    out.append(f"not monotone at {sorted(y)} + {x}")
        for a, b in itertools.combinations(subsets, 2):
            if self.coords[a | b] + self.coords[a & b] > self.coords[a] + self.coords[b] + tol:
                out.append(f"not submodular at {sorted(a)}, {sorted(b)}")
        return out

    def is_polymatroid(self, tol: float = TOL) -> bool:
        return not self.violations(tol)

    def to_records(self) -> list:
        return [
            (sorted(y), v)
            for y, v in sorted(self.coords.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
        ]


def entropy_vector(d: Distribution, cap: int = LATTICE_CAP) -> EntropyVector:
    if len(d.attributes) > cap:
        raise CapExceeded(f"{len(d.attributes)} attributes exceed the lattice cap {cap}")
    coords = {}
    for k in range(len(d.attributes) + 1):
        for y in itertools.combinations(d.attributes, k):
            coords[frozenset(y)] = entropy_bits(marginal(d, y))
    return EntropyVector(d.attributes, coords)


def fd_holds_on_distribution(d: Distribution, fd: FD) -> bool:
    """Decide the fd on the support, cross-checked against H(Y) == H(Y + x)."""
    lhs = sorted(fd.lhs)
    li = [d.attributes.index(a) for a in lhs]
    ri = d.attributes.index(fd.rhs)
    seen: dict = {}
    by_support = True
    for r in d.support:
        key = tuple(r[i] for i in li)
        if seen.setdefault(key, r[ri]) != r[ri]:
            by_support = False
            break
    h_lhs = entropy_bits(marginal(d, lhs))
    h_all = entropy_bits(marginal(d, fd.attributes))
    by_entropy = abs(h_all - h_lhs) <= TOL
    assert by_support == by_entropy, f"support and entropy disagree on {fd}"
    return by_support


def h_ratio(schema: Schema, q: Query, d: Distribution, fds: Iterable[FD] = ()) -> Optional[float]:
    """H(U[free]) / max over joined R of H(U[V(R)]); None when the denominator is 0."""
    q.validate(schema)
    if not q.variables(schema) <= set(d.attributes):
        raise ValueError("distribution does not cover the query variables")
    for f in sorted(effective_fds(schema, fds, q.joins), key=str):
        if not fd_holds_on_distribution(d, f):
            raise FDViolation(f)
    denom = max(entropy_bits(marginal(d, schema.relations[r])) for r in q.joins)
    if denom <= 0:
        return None
    return entropy_bits(marginal(d, q.free_variables(schema))) / denom


def uniform_on_table(t: Table) -> Distribution:
    if not len(t):
        raise ValueError("cannot put a uniform distribution on an empty table")
    rows = t.sorted_rows()
    return Distribution(t.attributes, tuple(rows), (Fraction(1, len(rows)),) * len(rows))


def rationalize_distribution(
    attributes: Sequence[str],
    support: Sequence[Sequence[str]],
    probs: Sequence[float],
    q: int,
) -> Distribution:
    """Round probabilities to multiples of 1/q on the same support.

    Largest-remainder rounding, with every entry kept at least 1/q; ties go
    to the earlier support row.
    """
    n = len(support)
    if q < n:
        raise ValueError(f"q={q} is too small to keep {n} support rows positive")
    if any(p <= 0 for p in probs):
        raise ValueError("probabilities must be positive")
    total = sum(Fraction(p) for p in probs)
    scaled = [Fraction(p) / total * q for p in probs]
    units = [max(1, math.floor(s)) for s in scaled]
    remainder = [s - u for s, u in zip(scaled, units)]
    deficit = q - sum(units)
    if deficit > 0:
        for i in sorted(range(n), key=lambda i: (-remainder[i], i))[:deficit]:
            units[i] += 1
    while deficit < 0:
        i = min((i for i in range(n) if units[i] > 1), key=lambda i: (remainder[i], i))
        units[i] -= 1
        remainder[i] += 1
        deficit += 1
    return Distribution.from_rows(attributes, support, [Fraction(u, q) for u in units])


def two_stage_distribution(join_result: Table, free: Iterable[str]) -> Distribution:
    """Pick a projected row uniformly, then a preimage uniformly."""
    if not len(join_result):
        raise ValueError("cannot build a distribution on an empty table")
    free = sorted(set(free))
    pos = join_result.positions(free)
    rows = join_result.sorted_rows()
    mult = Counter(tuple(r[i] for i in pos) for r in rows)
    probs = [Fraction(1, len(mult) * mult[tuple(r[i] for i in pos)]) for r in rows]
    return Distribution(join_result.attributes, tuple(rows), tuple(probs))
