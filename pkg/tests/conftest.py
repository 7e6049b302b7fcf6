import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fdbounds.core import FD, Query, Schema

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

INSTANCES = Path(__file__).resolve().parent.parent / "instances"

ATTRS = ("a", "b", "c", "d", "e")


def triangle():
    schema = Schema.of({"R": ["x", "y"], "S": ["y", "z"], "T": ["x", "z"]})
    return schema, [], Query(frozenset(schema.relations))


def path():
    schema = Schema.of({"R": ["x", "y"], "S": ["y", "z"]})
    return schema, [], Query(frozenset(schema.relations))


def path_key():
    schema, _, q = path()
    return schema, [FD.parse("y -> x"), FD.parse("y -> z")], q


@st.composite
def fd_sets(draw, max_attrs=5, max_fds=6):
    """(universe, fds) with fds over the universe, empty left sides allowed."""
    n = draw(st.integers(1, max_attrs))
    universe = ATTRS[:n]
    fds = set()
    for _ in range(draw(st.integers(0, max_fds))):
        rhs = draw(st.sampled_from(universe))
        lhs = draw(st.sets(st.sampled_from([a for a in universe if a != rhs] or [rhs]), max_size=2))
        lhs.discard(rhs)
        fds.add(FD(frozenset(lhs), rhs))
    return frozenset(universe), sorted(fds, key=str)


@st.composite
def hypergraphs(draw, max_vertices=6, max_edges=6):
    """Schemas whose relations cover every vertex."""
    n = draw(st.integers(1, max_vertices))
    verts = [f"v{i}" for i in range(n)]
    m = draw(st.integers(1, max_edges))
    rels = {f"E{j}": draw(st.sets(st.sampled_from(verts), min_size=1)) for j in range(m)}
    for v in verts:
        if not any(v in e for e in rels.values()):
            rels[draw(st.sampled_from(sorted(rels)))].add(v)
    schema = Schema.of(rels, verts)
    return schema, Query(frozenset(rels))


@pytest.fixture
def rng():
    return random.Random(20240611)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
