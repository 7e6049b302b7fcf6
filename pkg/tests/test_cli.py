import json
import logging
import random
from fractions import Fraction

import pytest

from conftest import INSTANCES, triangle
from fdbounds.cli import main
from fdbounds.core import Database, Table
from fdbounds.formats import (
    ParseError,
    database_to_text,
    instance_to_text,
    parse_database_text,
    parse_instance,
    parse_instance_text,
    parse_params_text,
)
from fdbounds.randgen import random_instance
from fdbounds.synth import Coloring, coloring_database

# --- instance files ------------------------------------------------------------


def test_triangle_file():
    spec = parse_instance(INSTANCES / "triangle.yaml")
    assert len(spec.schema.relations) == 3 and len(spec.schema.attributes) == 3
    assert spec.query.free is None


def test_budgets_are_exact():
    spec = parse_instance(INSTANCES / "path_projected.yaml")
    assert spec.budgets == {"R": Fraction(1), "S": Fraction(1, 2)}
    assert spec.query.free == {"x", "z"}


def test_fd_forms():
    spec = parse_instance(INSTANCES / "path_key.yaml")
    assert [str(f) for f in spec.fds] == ["y -> x", "y -> z"]
    spec = parse_instance(INSTANCES / "single.yaml")
    assert [str(f) for f in spec.fds] == ["x -> y"]


@pytest.mark.parametrize("text,line,needle", [
    ("relations:\n  R: [x]\nfds:\n  - {lhs: [x], rhs: q}\n", 4, "'q'"),
    ("attributes: [x]\nrelations:\n  R: [x, y]\n", 3, "'y'"),
    ("relations:\n  R: [x]\nquery:\n  joins: [S]\n", 4, "'S'"),
    ("relations:\n  R: [x]\n  R: [y]\n", 3, "duplicate"),
    ("relations:\n  R: [x|y]\n", 2, "reserved"),
    ("relations:\n  R: [x]\nbudgets:\n  R: abc\n", 4, "rational"),
    ("relations:\n  R: [x, y]\nfds:\n  - {lhs: [x], rhs: y, relation: S}\n", 4, "unknown relation"),
    ("relations:\n  R: [x]\nextra: 1\n", 3, "unknown section"),
])
def test_instance_errors_are_line_anchored(text, line, needle):
    with pytest.raises(ParseError) as err:
        parse_instance_text(text, "inst.yaml")
    assert f"inst.yaml:{line}:" in str(err.value)
    assert needle in str(err.value)


def test_instance_text_round_trip():
    spec = parse_instance(INSTANCES / "path_projected.yaml")
    again = parse_instance_text(instance_to_text(spec))
    assert again == spec


# --- database files --------------------------------------------------------------


def test_database_parse_and_dedupe(caplog):
    schema = triangle()[0]
    text = """relations:
  R: {attributes: [x, y], rows: [[a, b], [a, c], [a, b]]}
  S: {attributes: [y, z], rows: []}
  T: {attributes: [x, z], rows: [[1, 2]]}
"""
    with caplog.at_level(logging.WARNING):
        db = parse_database_text(text, schema)
    assert len(db["R"]) == 2 and len(db["T"]) == 1
    assert "duplicate" in caplog.text


@pytest.mark.parametrize("text,needle", [
    ("relations:\n  R: {attributes: [x, y], rows: [[a|b, c]]}\n", "reserved"),
    ("relations:\n  R: {attributes: [x, y], rows: [[a]]}\n", "1 values"),
    ("relations:\n  R: {attributes: [x, z], rows: []}\n", "schema says"),
    ("relations:\n  Q: {attributes: [x], rows: []}\n", "not in the schema"),
])
def test_database_errors(text, needle):
    schema = triangle()[0]
    with pytest.raises(ParseError) as err:
        parse_database_text(text, schema, "db.yaml")
    assert needle in str(err.value) and "db.yaml:" in str(err.value)


def test_missing_relation_is_an_error():
    schema = triangle()[0]
    with pytest.raises(ParseError):
        parse_database_text("relations:\n  R: {attributes: [x, y], rows: []}\n", schema)


def test_round_trip_random_databases():
    rng = random.Random(1)
    for _ in range(50):
        schema, F, q, db = random_instance(rng)
        assert parse_database_text(database_to_text(db), schema) == db


def test_round_trip_generated_tuple_values():
    schema, F, q = triangle()
    f = Coloring({"x": {"a", "b"}, "y": {"b"}, "z": {"c"}})
    db = coloring_database(schema, q, f, F, 2)
    text = database_to_text(db)
    assert "tuple_values" in text
    assert parse_database_text(text, schema) == db


def test_awkward_values_round_trip():
    db = Database({"R": Table.from_rows(["x"], [("",), ("yes",), ("null",), ("0012",), ("a: b",), ("- x",)])})
    assert parse_database_text(database_to_text(db)) == db


# --- generator parameters ---------------------------------------------------------


def test_params():
    params = parse_params_text("""
packing: {x: 1/2, y: "1/2"}
N: 9
coloring: {x: [c1, c2], y: [c2]}
subspaces: {x: [[1, 0]], y: []}
dim: 2
base:
  attributes: [x]
  rows: [[0], [1]]
  probs: [1/2, 1/2]
k: 4
""")
    assert params["packing"] == {"x": Fraction(1, 2), "y": Fraction(1, 2)}
    assert params["coloring"]["x"] == ["c1", "c2"]
    assert params["subspaces"]["x"] == ((1, 0),)
    assert params["base"].common_denominator == 2 and params["k"] == 4


def test_params_errors():
    with pytest.raises(ParseError):
        parse_params_text("base:\n  attributes: [x]\n  rows: [[0]]\n  probs: [1/2]\n")
    with pytest.raises(ParseError):
        parse_params_text("k: four\n")
    with pytest.raises(ParseError):
        parse_params_text("mystery: 1\n")


# --- commands -------------------------------------------------------------------


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name,method,expected", [
    ("triangle", "agm", "3/2"),
    ("triangle", "packing", "3/2"),
    ("triangle", "polymatroid", "3/2"),
    ("triangle", "coloring", "3/2"),
    ("path", "packing", "2"),
    ("path_key", "polymatroid", "1"),
    ("path_key", "coloring", "1"),
    ("single", "coloring", "1"),
])
def test_bound_command(capsys, name, method, expected):
    code, out, _ = run(capsys, "bound", INSTANCES / f"{name}.yaml", "--method", method)
    assert code == 0
    assert f"value: {expected} (" in out
    code, out, _ = run(capsys, "bound", INSTANCES / f"{name}.yaml", "--method", method, "--json")
    assert json.loads(out)["value"] == expected


def test_bound_errors(capsys, tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("relations:\n  R: [x]\nfds: [\"x -> nope\"]\n")
    code, _, err = run(capsys, "bound", bad)
    assert code == 2 and "nope" in err
    code, _, err = run(capsys, "bound", INSTANCES / "triangle.yaml", "--cap", "2")
    assert code == 3
    code, _, err = run(capsys, "bound", tmp_path / "missing.yaml")
    assert code == 2


def test_synth_and_eval(capsys, tmp_path):
    out = tmp_path / "db.yaml"
    code, text, _ = run(capsys, "synth", INSTANCES / "triangle.yaml", "--construction", "product", "--N", 9, "--out", out)
    assert code == 0 and "predicted alpha: 3/2" in text
    code, text, _ = run(capsys, "eval", INSTANCES / "triangle.yaml", out, "--json")
    rec = json.loads(text)
    assert rec["rows"] == 27 and rec["database_size"] == 9 and rec["alpha"] == pytest.approx(1.5)
    base = json.loads(run(capsys, "eval", INSTANCES / "triangle.yaml", out, "--algo", "baseline", "--json", "--dump")[1])
    comp = json.loads(run(capsys, "eval", INSTANCES / "triangle.yaml", out, "--json", "--dump")[1])
    assert base["result"] == comp["result"]


def test_synth_permutation_from_params(capsys, tmp_path):
    inst = tmp_path / "one.yaml"
    inst.write_text("relations:\n  R: [x]\n")
    params = tmp_path / "p.yaml"
    params.write_text("base:\n  attributes: [x]\n  rows: [[0], [1]]\n  probs: [1/2, 1/2]\n")
    out = tmp_path / "db.yaml"
    code, text, _ = run(capsys, "synth", inst, "--construction", "permutation", "--params", params, "--k", 4, "--out", out)
    assert code == 0
    assert "R: 6" in text
    code, text, _ = run(capsys, "eval", inst, out, "--json")
    assert json.loads(text)["rows"] == 6
    code, text, _ = run(capsys, "synth", inst, "--construction", "permutation", "--params", params,
                        "--k", 1000, "--count-only")
    assert code == 0 and not (tmp_path / "x.yaml").exists()
    code, _, _ = run(capsys, "synth", inst, "--construction", "permutation", "--params", params, "--k", 1000, "--out", out)
    assert code == 3
    code, _, _ = run(capsys, "synth", inst, "--construction", "permutation", "--params", params, "--k", 3, "--out", out)
    assert code == 4


def test_synth_invalid_construction(capsys, tmp_path):
    params = tmp_path / "p.yaml"
    params.write_text("coloring: {x: [a], y: [b], z: [b]}\n")
    code, _, err = run(capsys, "synth", INSTANCES / "path_key.yaml", "--construction", "coloring",
                       "--params", params, "--out", tmp_path / "db.yaml")
    assert code == 4 and "y -> x" in err


def test_eval_bag_and_empty(capsys, tmp_path):
    db = tmp_path / "db.yaml"
    db.write_text("""relations:
  R: {attributes: [x, y], rows: [[0, a], [0, b], [1, a]]}
  S: {attributes: [y, z], rows: [[a, 5], [b, 5]]}
""")
    rec = json.loads(run(capsys, "eval", INSTANCES / "path_projected.yaml", db, "--free-projection", "bag", "--json")[1])
    assert rec["rows"] == rec["join_rows"] == 3
    rec = json.loads(run(capsys, "eval", INSTANCES / "path_projected.yaml", db, "--json")[1])
    assert rec["rows"] == 2
    empty = tmp_path / "empty.yaml"
    empty.write_text("relations:\n  R: {attributes: [x, y], rows: []}\n  S: {attributes: [y, z], rows: []}\n")
    code, out, _ = run(capsys, "eval", INSTANCES / "path.yaml", empty)
    assert code == 0 and "rows: 0" in out and "undefined" in out


def test_eval_rejects_fd_violations(capsys, tmp_path):
    db = tmp_path / "db.yaml"
    db.write_text("relations:\n  R: {attributes: [x, y], rows: [[0, a], [1, a]]}\n  S: {attributes: [y, z], rows: []}\n")
    code, _, err = run(capsys, "eval", INSTANCES / "path_key.yaml", db)
    assert code == 2 and "y -> x" in err


@pytest.mark.parametrize("name", sorted(p.stem for p in INSTANCES.glob("*.yaml")))
def test_verify_corpus(capsys, name):
    code, out, _ = run(capsys, "verify", INSTANCES / f"{name}.yaml")
    assert code == 0, out
    assert out.strip().endswith("verify: PASS")


def test_verify_cap(capsys):
    code, _, err = run(capsys, "verify", INSTANCES / "triangle.yaml", "--cap", "2")
    assert code == 3 and "cap" in err


def test_outputs_are_deterministic(capsys, tmp_path):
    first = run(capsys, "verify", INSTANCES / "path_key.yaml", "--json")[1]
    second = run(capsys, "verify", INSTANCES / "path_key.yaml", "--json")[1]
    assert first == second
    a, b = tmp_path / "a.yaml", tmp_path / "b.yaml"
    for out in (a, b):
        run(capsys, "synth", INSTANCES / "triangle.yaml", "--construction", "vspace", "--prime", 3, "--out", out)
    assert a.read_text() == b.read_text()
