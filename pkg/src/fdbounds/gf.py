"""Linear algebra over GF(p) for small primes, on tuples of ints.

A subspace is always carried as its reduced row-echelon basis, which makes
bases canonical and coset representatives easy to normalise.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

MAX_PRIME = 251
MAX_DIM = 12


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p ** 0.5) + 1))


def check_field(p: int, n: int) -> None:
    if not is_prime(p) or p > MAX_PRIME:
        raise ValueError(f"field size must be a prime <= {MAX_PRIME}, got {p}")
    if not 0 <= n <= MAX_DIM:
        raise ValueError(f"dimension must be between 0 and {MAX_DIM}, got {n}")


def rref(rows: Iterable[Sequence[int]], n: int, p: int) -> tuple:
    """Reduced row-echelon form without zero rows: ``(basis, pivot_columns)``."""
    m = [[x % p for x in r] for r in rows]
    for r in m:
        if len(r) != n:
            raise ValueError(f"vector {r} does not have length {n}")
    pivots = []
    top = 0
    for col in range(n):
        hit = next((i for i in range(top, len(m)) if m[i][col]), None)
        if hit is None:
            continue
        m[top], m[hit] = m[hit], m[top]
        inv = pow(m[top][col], p - 2, p)
        m[top] = [x * inv % p for x in m[top]]
        for i in range(len(m)):
            if i != top and m[i][col]:
                f = m[i][col]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[top])]
        pivots.append(col)
        top += 1
    return tuple(tuple(r) for r in m[:top]), tuple(pivots)


def rank(rows: Iterable[Sequence[int]], n: int, p: int) -> int:
    return len(rref(rows, n, p)[0])


def nullspace(rows: Iterable[Sequence[int]], n: int, p: int) -> tuple:
    """Basis (in rref) of {w : <r, w> = 0 for every row r}."""
    basis, pivots = rref(rows, n, p)
    free = [c for c in range(n) if c not in pivots]
    out = []
    for fc in free:
        w = [0] * n
        w[fc] = 1
        for row, pc in zip(basis, pivots):
            w[pc] = (-row[fc]) % p
        out.append(w)
    return rref(out, n, p)[0]


def span_sum(spaces: Iterable[Sequence[Sequence[int]]], n: int, p: int) -> tuple:
    rows = [r for s in spaces for r in s]
    return rref(rows, n, p)[0]


def intersection(spaces: Iterable[Sequence[Sequence[int]]], n: int, p: int) -> tuple:
    """Meet of subspaces; the empty meet is the whole space."""
    duals = [r for s in spaces for r in nullspace(s, n, p)]
    return nullspace(duals, n, p)


def contains(big: Sequence[Sequence[int]], small: Sequence[Sequence[int]], n: int, p: int) -> bool:
    return rank(list(big) + list(small), n, p) == rank(big, n, p)


def reduce(v: Sequence[int], basis: Sequence[Sequence[int]], n: int, p: int) -> tuple:
    """Canonical representative of the coset v + span(basis): zero on pivots."""
    basis, pivots = rref(basis, n, p)
    w = [x % p for x in v]
    for row, pc in zip(basis, pivots):
        f = w[pc]
        if f:
            w = [(a - f * b) % p for a, b in zip(w, row)]
    return tuple(w)


def vectors(n: int, p: int):
    return itertools.product(range(p), repeat=n)


def unit(i: int, n: int) -> tuple:
    return tuple(int(j == i) for j in range(n))
