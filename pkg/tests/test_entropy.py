import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import path_key, triangle
from fdbounds.core import FD, Database, Query, Schema, Table, measure_alpha
from fdbounds.entropy import (
    Distribution,
    FDViolation,
    entropy_bits,
    entropy_vector,
    fd_holds_on_distribution,
    h_ratio,
    marginal,
    rationalize_distribution,
    two_stage_distribution,
    uniform_on_table,
)
from fdbounds.evaluator import join_baseline
from fdbounds.randgen import random_distribution, random_instance


def plain_entropy(rows, probs, cols):
    acc = Counter()
    for r, p in zip(rows, probs):
        acc[tuple(r[i] for i in cols)] += float(p)
    return -sum(p * math.log2(p) for p in acc.values() if p > 0)


def test_uniform_bits():
    t = Table.from_rows(["a", "b", "c"], [(str(i), str(j), "0") for i in range(2) for j in range(2)])
    d = uniform_on_table(t)
    h = entropy_vector(d)
    assert h[{"a", "b"}] == pytest.approx(2.0)
    assert h[{"c"}] == 0
    assert h[set()] == 0


def test_distribution_validation():
    with pytest.raises(ValueError):
        Distribution.from_rows(["a"], [("0",), ("1",)], [Fraction(1, 2), Fraction(1, 3)])
    with pytest.raises(ValueError):
        Distribution.from_rows(["a"], [("0",), ("0",)], [Fraction(1, 2), Fraction(1, 2)])
    with pytest.raises(ValueError):
        Distribution.from_rows(["a"], [("0",), ("1",)], [1, 0])


@given(st.integers(0, 10 ** 6))
def test_entropy_vector_matches_direct_sum(seed):
    d = random_distribution(random.Random(seed))
    h = entropy_vector(d)
    n = len(d.attributes)
    for mask in range(1 << n):
        cols = [i for i in range(n) if mask >> i & 1]
        attrs = {d.attributes[i] for i in cols}
        assert h[attrs] == pytest.approx(plain_entropy(d.support, d.probs, cols), abs=1e-9)


@given(st.integers(0, 10 ** 6))
def test_entropy_vectors_are_polymatroids(seed):
    d = random_distribution(random.Random(seed))
    h = entropy_vector(d)
    assert h.violations() == []
    assert h.is_polymatroid()


@given(st.integers(0, 10 ** 6))
def test_fd_support_and_entropy_agree(seed):
    rng = random.Random(seed)
    d = random_distribution(rng)
    attrs = list(d.attributes)
    for rhs in attrs:
        rest = [a for a in attrs if a != rhs]
        for k in range(len(rest) + 1):
            lhs = rng.sample(rest, k)
            fd_holds_on_distribution(d, FD(frozenset(lhs), rhs))  # asserts agreement internally


def test_marginal_sums():
    d = Distribution.from_rows(["a", "b"], [("0", "0"), ("0", "1"), ("1", "1")],
                               [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)])
    m = marginal(d, ["a"])
    assert m.as_dict() == {("0",): Fraction(3, 4), ("1",): Fraction(1, 4)}
    assert entropy_bits(m) == pytest.approx(-(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25)))


def test_h_ratio_triangle_and_fd_violation():
    schema, F, q = triangle()
    t = Table.from_rows(["x", "y", "z"], [(a, b, c) for a in "01" for b in "01" for c in "01"])
    assert h_ratio(schema, q, uniform_on_table(t)) == pytest.approx(1.5)
    schema, F, q = path_key()
    with pytest.raises(FDViolation) as err:
        h_ratio(schema, q, uniform_on_table(t), F)
    assert err.value.fd.lhs == {"y"}


def test_h_ratio_undefined_on_point_mass():
    schema, F, q = triangle()
    d = Distribution.from_rows(["x", "y", "z"], [("0", "0", "0")], [1])
    assert h_ratio(schema, q, d) is None


def test_h_ratio_dominates_alpha():
    rng = random.Random(11)
    checked = 0
    for _ in range(100):
        schema, F, q, db = random_instance(rng)
        result = join_baseline(schema, q, db)
        alpha = measure_alpha(q, db, result)
        if alpha is None:
            continue
        ratio = h_ratio(schema, q, uniform_on_table(result), F)
        if ratio is None:  # a single joined row: every marginal is a point mass
            assert len(result) == 1 and alpha == 0
        else:
            assert ratio >= alpha - 1e-9
        checked += 1
    assert checked > 50


@given(st.integers(0, 10 ** 6), st.integers(0, 40))
def test_rationalize(seed, extra):
    rng = random.Random(seed)
    n = rng.randint(1, 6)
    rows = [(str(i),) for i in range(n)]
    probs = [rng.random() + 1e-3 for _ in rows]
    q = n + extra
    d = rationalize_distribution(["a"], rows, probs, q)
    assert sum(d.probs) == 1 and len(d.support) == n
    assert all((p * q).denominator == 1 for p in d.probs)
    total = sum(probs)
    for r, p in zip(rows, probs):
        assert abs(d.as_dict()[r] - Fraction(p / total)) <= Fraction(n, q)


def test_rationalize_needs_room():
    with pytest.raises(ValueError):
        rationalize_distribution(["a"], [("0",), ("1",)], [0.5, 0.5], 1)


def test_two_stage_is_uniform_on_the_projection():
    t = Table.from_rows(["x", "y"], [("0", "0"), ("0", "1"), ("0", "2"), ("1", "0")])
    d = two_stage_distribution(t, ["x"])
    assert marginal(d, ["x"]).as_dict() == {("0",): Fraction(1, 2), ("1",): Fraction(1, 2)}
    assert d.as_dict()[("0", "1")] == Fraction(1, 6)
    schema = Schema.of({"R": ["x", "y"], "S": ["x"]})
    q = Query(frozenset({"R", "S"}), frozenset({"x"}))
    db = Database({"R": t, "S": t.project(["x"])})
    projected = len(t.project(["x"]))
    alpha = math.log2(projected) / math.log2(db.size_over(q.joins))
    assert h_ratio(schema, q, d) >= alpha - 1e-9
