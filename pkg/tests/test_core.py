import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fd_sets
from fdbounds.constants import placeholder
from fdbounds.core import (
    FD,
    CapExceeded,
    Database,
    InstanceError,
    Query,
    Schema,
    Table,
    check_fd,
    check_value,
    effective_fds,
    fd_closure,
    iterative_width,
    measure_alpha,
    minimal_components,
    power_database,
    remove_attributes,
    spanning_set,
    spans,
    width,
)
from fdbounds.evaluator import join_baseline
from fdbounds.randgen import random_instance


def fds(*texts):
    return [FD.parse(t) for t in texts]


# --- data model ------------------------------------------------------------


def test_fd_parse_and_print():
    f = FD.parse(" y , x -> z ")
    assert f.lhs == {"x", "y"} and f.rhs == "z"
    assert str(f) == "x,y -> z"
    assert FD.parse("-> z").lhs == frozenset()


def test_trivial_fd_is_harmless():
    f = FD.parse("x -> x")
    assert fd_closure({"x"}, [f]) == {"x"}
    assert fd_closure(set(), [f]) == set()


@pytest.mark.parametrize("bad", ["", "a b", "a|b", "a⟨", "a,b", "a->b", "{}"])
def test_bad_names(bad):
    with pytest.raises(InstanceError):
        Schema.of({"R": [bad]})


def test_reserved_values():
    assert check_value("plain") == "plain"
    for bad in ("a|b", "⟨x⟩"):
        with pytest.raises(InstanceError):
            check_value(bad)


def test_schema_rejects_unknown_attribute():
    with pytest.raises(InstanceError):
        Schema.of({"R": ["x", "y"]}, attributes=["x"])


def test_query_free_defaults_to_all_variables():
    schema = Schema.of({"R": ["x", "y"], "S": ["y", "z"]})
    q = Query(frozenset({"R", "S"}))
    assert q.free_variables(schema) == {"x", "y", "z"}
    assert q.is_natural_join(schema)
    assert not Query(frozenset({"R", "S"}), frozenset({"x"})).is_natural_join(schema)


def test_query_rejects_unknown_relation():
    schema = Schema.of({"R": ["x"]})
    with pytest.raises(InstanceError):
        Query(frozenset({"S"})).validate(schema)


def test_effective_fds_need_a_guarding_relation():
    schema = Schema.of({"R": ["x", "y"], "S": ["y", "z"]})
    got = effective_fds(schema, fds("x -> y", "x -> z"), {"R", "S"})
    assert got == {FD.parse("x -> y")}


def test_table_canonical_order():
    t1 = Table.from_rows(["y", "x"], [("1", "0")])
    t2 = Table.from_rows(["x", "y"], [("0", "1")])
    assert t1 == t2 and t1.attributes == ("x", "y")
    assert t1.project(["y"]).rows == {("1",)}


# --- closures and components ----------------------------------------------


@given(fd_sets(), st.data())
def test_closure_is_a_closure_operator(case, data):
    universe, F = case
    s = data.draw(st.sets(st.sampled_from(sorted(universe))))
    t = data.draw(st.sets(st.sampled_from(sorted(universe))))
    cs = fd_closure(s, F)
    assert s <= cs
    assert fd_closure(cs, F) == cs
    assert fd_closure(s, F) <= fd_closure(s | t, F)


@given(fd_sets())
def test_spanning_set_is_smallest(case):
    universe, F = case
    best = spanning_set(F, universe)
    assert spans(best, F, universe)
    for smaller in itertools.combinations(sorted(universe), len(best) - 1 if best else 0):
        if len(smaller) < len(best):
            assert not spans(smaller, F, universe)


def _closed_under_lhs_touch(c, F):
    return all(f.rhs in c for f in F if f.lhs & c)


@given(fd_sets())
def test_components_are_minimal_and_disjoint(case):
    universe, F = case
    comps = minimal_components(F, universe)
    assert comps
    inner = [f for f in F if f.attributes <= universe]
    for c in comps:
        assert _closed_under_lhs_touch(c, inner)
        # no proper nonempty subset has the property
        for k in range(1, len(c)):
            for sub in itertools.combinations(sorted(c), k):
                assert not _closed_under_lhs_touch(frozenset(sub), inner)
    for c1, c2 in itertools.combinations(comps, 2):
        assert not c1 & c2


@given(fd_sets())
def test_iterative_width_covers_universe(case):
    universe, F = case
    m, dec = iterative_width(F, universe)
    flat = dec.components()
    assert frozenset().union(*flat) == universe
    assert sum(len(c) for c in flat) == len(universe)
    # an fd with empty left side makes its rhs free of charge, so 0 is possible
    assert 0 <= m <= len(universe)
    if not any(not f.lhs for f in F):
        assert m >= 1


def test_iterative_width_examples():
    xyz = {"x", "y", "z"}
    assert iterative_width([], xyz)[0] == 1
    assert iterative_width(fds("x -> y", "y -> z", "z -> x"), xyz)[0] == 1
    pairs = fds("x,y -> z", "x,z -> y", "y,z -> x")
    assert iterative_width(pairs, xyz)[0] == 2
    assert width(pairs, xyz) == 2


def test_remove_attributes_trims_left_sides():
    got = remove_attributes(fds("x,y -> z", "x -> y"), {"y"})
    assert got == {FD(frozenset({"x"}), "z")}


def test_empty_lhs_fd_never_joins_a_component():
    comps = minimal_components(fds("-> y", "x -> z"), {"x", "y", "z"})
    assert frozenset({"y"}) in comps


# --- databases ---------------------------------------------------------------


def test_check_fd():
    db = Database({"R": Table.from_rows(["x", "y"], [("0", "a"), ("1", "a"), ("0", "b")])})
    assert not check_fd(db, FD.parse("x -> y"))
    assert not check_fd(db, FD.parse("y -> x"))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_power_database_sizes(n):
    rng = random.Random(n)
    for _ in range(20):
        schema, F, q, db = random_instance(rng, max_attrs=3, max_relations=2, max_rows=5)
        base = join_baseline(schema, q, db)
        powered = power_database(db, n)
        for name in db.tables:
            assert len(powered[name]) == len(db[name]) ** n
        assert len(join_baseline(schema, q, powered)) == len(base) ** n
        assert all(check_fd(powered, f) for f in F)
        a1, an = measure_alpha(q, db, base), measure_alpha(q, powered, join_baseline(schema, q, powered))
        if a1 is not None:
            assert an == pytest.approx(a1, abs=1e-9)


def test_power_database_cap():
    db = Database({"R": Table.from_rows(["x"], [(str(i),) for i in range(20)])})
    with pytest.raises(CapExceeded):
        power_database(db, 5, row_limit=1000)


def test_measure_alpha_undefined_cases():
    schema = Schema.of({"R": ["x"]})
    q = Query(frozenset({"R"}))
    one = Database({"R": Table.from_rows(["x"], [("0",)])})
    assert measure_alpha(q, one, join_baseline(schema, q, one)) is None
    empty = Database({"R": Table.empty(["x"])})
    assert measure_alpha(q, empty, join_baseline(schema, q, empty)) is None


def test_placeholder_shape():
    assert placeholder("x") == "⟨x⟩"
