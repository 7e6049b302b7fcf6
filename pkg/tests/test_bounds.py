import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import hypergraphs, path, path_key, triangle
from fdbounds.bounds import (
    Lattice,
    admissible_classes,
    coloring_bound,
    coloring_bound_oracle,
    edge_cover_bound,
    polymatroid_bound,
    polymatroid_lp,
    vertex_packing_bound,
    weighted_product_bound,
)
from fdbounds.core import FD, CapExceeded, Database, Query, Schema, Table
from fdbounds.evaluator import join_baseline
from fdbounds.randgen import random_fds, random_instance
from fdbounds.ratlp import Status, solve

HALF3 = Fraction(3, 2)


def test_triangle_all_methods():
    schema, F, q = triangle()
    assert vertex_packing_bound(schema, q).value == HALF3
    assert edge_cover_bound(schema, q).value == HALF3
    assert polymatroid_bound(schema, F, q).value == HALF3
    assert coloring_bound(schema, F, q).value == HALF3


def test_path_values():
    schema, F, q = path()
    assert vertex_packing_bound(schema, q).value == 2
    schema, F, q = path_key()
    assert polymatroid_bound(schema, F, q).value == 1
    assert coloring_bound(schema, F, q).value == 1
    # fds do not change the fd-blind packing number
    assert vertex_packing_bound(schema, q).value == 2


def test_certificates_are_feasible():
    schema, F, q = triangle()
    cover = edge_cover_bound(schema, q).certificate
    assert sum(cover.values()) == HALF3
    pack = vertex_packing_bound(schema, q).certificate
    for attrs in schema.relations.values():
        assert sum(pack[x] for x in attrs) <= 1
    poly = polymatroid_bound(schema, F, q).certificate
    assert poly["{}"] == 0 and poly["x,y,z"] == HALF3


def test_literal_lattice_program_is_unbounded_on_path():
    schema, F, q = path()
    lp, _ = polymatroid_lp(schema, F, q, literal=True)
    assert solve(lp).status is Status.UNBOUNDED


def test_projection_and_budgets():
    schema, F, _ = path()
    q = Query(frozenset({"R", "S"}), frozenset({"x", "z"}))
    assert polymatroid_bound(schema, F, q).value == 2
    schema, F, _ = path_key()
    assert polymatroid_bound(schema, F, q).value == 1
    report = polymatroid_bound(schema, F, q, {"R": Fraction(1, 3), "S": Fraction(2)})
    assert report.method == "polymatroid_budgeted"
    assert report.value == Fraction(1, 3)


def test_unguarded_fd_is_ignored():
    schema, _, q = path()
    # x -> z is not inside any relation, so no table can enforce it
    assert polymatroid_bound(schema, [FD.parse("x -> z")], q).value == 2


def test_admissible_classes():
    lat = Lattice(["x", "y", "z"])
    classes = {lat.label(s) for s in admissible_classes(lat, [FD.parse("y -> x")])}
    assert "x" not in classes and "x,y" in classes and "y" in classes


def test_lattice_cap():
    rels = {f"R{i}": [f"a{i}"] for i in range(5)}
    schema = Schema.of(rels)
    q = Query(frozenset(rels))
    with pytest.raises(CapExceeded):
        polymatroid_bound(schema, [], q, cap=4)
    with pytest.raises(CapExceeded):
        coloring_bound(schema, [], q, cap=4)


def test_coloring_oracle_on_named_instances():
    schema, F, q = triangle()
    assert coloring_bound_oracle(schema, F, q, 3) == HALF3
    schema, F, q = path_key()
    assert coloring_bound_oracle(schema, F, q, 2) == 1


def _small_instance(seed):
    rng = random.Random(seed)
    schema, F, q, _ = random_instance(rng, max_attrs=4, max_relations=3, max_rows=1)
    return schema, F, q


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40)
def test_coloring_lp_dominates_exhaustive_search(seed):
    schema, F, q = _small_instance(seed)
    assert coloring_bound_oracle(schema, F, q, 3) <= coloring_bound(schema, F, q).value


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40)
def test_bound_ordering(seed):
    schema, F, q = _small_instance(seed)
    c = coloring_bound(schema, F, q).value
    p = polymatroid_bound(schema, F, q).value
    a = vertex_packing_bound(schema, q).value
    assert c <= p <= a
    assert polymatroid_bound(schema, [], q).value == a


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30)
def test_more_fds_never_raise_bounds(seed):
    schema, F, q = _small_instance(seed)
    extra = random_fds(random.Random(seed + 1), schema, 2)
    more = sorted(set(F) | set(extra), key=str)
    assert polymatroid_bound(schema, more, q).value <= polymatroid_bound(schema, F, q).value
    assert coloring_bound(schema, more, q).value <= coloring_bound(schema, F, q).value


@given(st.integers(0, 10 ** 6), st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=4))
@settings(max_examples=30)
def test_uniform_budget_scaling(seed, c):
    schema, F, q = _small_instance(seed)
    base = polymatroid_bound(schema, F, q).value
    scaled = polymatroid_bound(schema, F, q, {r: c for r in q.joins}).value
    assert scaled == c * base


@given(hypergraphs())
@settings(max_examples=40)
def test_packing_cover_duality(case):
    schema, q = case
    assert vertex_packing_bound(schema, q).value == edge_cover_bound(schema, q).value


def test_weighted_product_bound_on_random_databases():
    rng = random.Random(7)
    for _ in range(100):
        schema, F, q, db = random_instance(rng)
        cover = edge_cover_bound(schema, q).certificate
        assert weighted_product_bound(db, cover, len(join_baseline(schema, q, db)))


def test_weighted_product_bound_rejects_non_covers():
    schema, F, q = triangle()
    db = Database({r: Table.from_rows(sorted(a), [("0", "0")]) for r, a in schema.relations.items()})
    with pytest.raises(ValueError):
        weighted_product_bound(db, {"R": Fraction(1, 2)}, 1)
    with pytest.raises(ValueError):
        weighted_product_bound(db, {"R": -1, "S": 1, "T": 1}, 1)
    assert not weighted_product_bound(db, {"R": 1, "S": 1, "T": 1}, 2)
