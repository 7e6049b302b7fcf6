"""YAML file formats: instances, databases and generator parameters.

Documents are read with YAML's base loader, so every scalar arrives as a
string (``1`` and ``"1"`` are the same value). Errors carry the file name and
the 1-based line of the offending node.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

import yaml

from .constants import PLACEHOLDER_CLOSE, PLACEHOLDER_OPEN, SEP
from .core import FD, Database, InstanceError, Query, Schema, Table, check_name, check_value
from .entropy import Distribution

log = logging.getLogger(__name__)


class ParseError(InstanceError):
    pass


@dataclass(frozen=True)
class InstanceSpec:
    schema: Schema
    fds: tuple
    query: Query
    budgets: Optional[dict] = None


class _Doc:
    def __init__(self, text: str, source: str):
        self.source = source
        try:
            self.root = yaml.compose(text, Loader=yaml.BaseLoader)
        except yaml.YAMLError as exc:
            raise ParseError(f"{source}: not valid YAML: {exc}") from None

    def fail(self, node, msg: str):
        line = node.start_mark.line + 1 if node is not None else 1
        raise ParseError(f"{self.source}:{line}: {msg}")

    def mapping(self, node, what: str) -> dict:
        if not isinstance(node, yaml.MappingNode):
            self.fail(node, f"{what} must be a mapping")
        out = {}
        for k, v in node.value:
            key = self.scalar(k, f"key in {what}")
            if key in out:
                self.fail(k, f"duplicate key {key!r} in {what}")
            out[key] = (k, v)
        return out

    def seq(self, node, what: str) -> list:
        if not isinstance(node, yaml.SequenceNode):
            self.fail(node, f"{what} must be a list")
        return node.value

    def scalar(self, node, what: str) -> str:
        if not isinstance(node, yaml.ScalarNode):
            self.fail(node, f"{what} must be a scalar")
        return node.value

    def name(self, node, kind: str) -> str:
        value = self.scalar(node, f"{kind} name")
        try:
            return check_name(value, kind)
        except InstanceError as exc:
            self.fail(node, str(exc))

    def names(self, node, kind: str, what: str) -> list:
        return [self.name(n, kind) for n in self.seq(node, what)]

    def fraction(self, node, what: str) -> Fraction:
        text = self.scalar(node, what)
        try:
            return Fraction(text.strip())
        except (ValueError, ZeroDivisionError):
            self.fail(node, f"{what}: {text!r} is not a rational number")


def _read(path: Union[str, Path]) -> _Doc:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read: {exc.strerror}") from None
    return _Doc(text, str(path))


# ---------------------------------------------------------------------------
# Instances


def parse_instance_text(text: str, source: str = "<instance>") -> InstanceSpec:
    doc = _Doc(text, source)
    top = doc.mapping(doc.root, "instance")
    known = {"attributes", "relations", "fds", "query", "budgets"}
    for key, (knode, _) in top.items():
        if key not in known:
            doc.fail(knode, f"unknown section {key!r}")
    if "relations" not in top:
        doc.fail(doc.root, "instance needs a 'relations' section")

    declared = None
    if "attributes" in top:
        declared = doc.names(top["attributes"][1], "attribute", "attributes")
        if len(set(declared)) != len(declared):
            doc.fail(top["attributes"][1], "duplicate attribute names")
    rels, order = {}, {}
    for rname, (rnode, body) in doc.mapping(top["relations"][1], "relations").items():
        check = doc.name(rnode, "relation")
        attrs = doc.names(body, "attribute", f"attributes of relation {check}")
        if not attrs:
            doc.fail(body, f"relation {check} has no attributes")
        for a, anode in zip(attrs, body.value):
            if declared is not None and a not in declared:
                doc.fail(anode, f"relation {check} uses unknown attribute {a!r}")
            order.setdefault(a, None)
        rels[check] = attrs
    schema = Schema.of(rels, declared if declared is not None else list(order))

    fds = []
    if "fds" in top:
        for node in doc.seq(top["fds"][1], "fds"):
            fds.append(_parse_fd(doc, node, schema))

    query = Query(frozenset(schema.relations))
    if "query" in top:
        qmap = doc.mapping(top["query"][1], "query")
        for key, (knode, _) in qmap.items():
            if key not in ("joins", "free"):
                doc.fail(knode, f"unknown query key {key!r}")
        joins = list(schema.relations)
        if "joins" in qmap:
            jnode = qmap["joins"][1]
            joins = doc.names(jnode, "relation", "query joins")
            for j, n in zip(joins, jnode.value):
                if j not in schema.relations:
                    doc.fail(n, f"query joins unknown relation {j!r}")
            if not joins:
                doc.fail(jnode, "query must join at least one relation")
        free = None
        if "free" in qmap:
            fnode = qmap["free"][1]
            free = doc.names(fnode, "attribute", "free variables")
            scope = set().union(*(schema.relations[j] for j in joins))
            for a, n in zip(free, fnode.value):
                if a not in scope:
                    doc.fail(n, f"free variable {a!r} is not an attribute of a joined relation")
        query = Query(frozenset(joins), None if free is None else frozenset(free))

    budgets = None
    if "budgets" in top:
        budgets = {}
        for rname, (rnode, vnode) in doc.mapping(top["budgets"][1], "budgets").items():
            if rname not in query.joins:
                doc.fail(rnode, f"budget for relation {rname!r} which the query does not join")
            value = doc.fraction(vnode, f"budget of {rname}")
            if value < 0:
                doc.fail(vnode, f"budget of {rname} is negative")
            budgets[rname] = value
    return InstanceSpec(schema, tuple(sorted(set(fds), key=str)), query, budgets)


def _parse_fd(doc: _Doc, node, schema: Schema) -> FD:
    if isinstance(node, yaml.ScalarNode):
        try:
            fd = FD.parse(node.value)
        except InstanceError as exc:
            doc.fail(node, str(exc))
        relation = None
    else:
        body = doc.mapping(node, "fd")
        for key, (knode, _) in body.items():
            if key not in ("lhs", "rhs", "relation"):
                doc.fail(knode, f"unknown fd key {key!r}")
        if "rhs" not in body:
            doc.fail(node, "fd needs an 'rhs'")
        lhs = doc.names(body["lhs"][1], "attribute", "fd lhs") if "lhs" in body else []
        fd = FD(frozenset(lhs), doc.name(body["rhs"][1], "attribute"))
        relation = doc.name(body["relation"][1], "relation") if "relation" in body else None
    for a in sorted(fd.attributes):
        if a not in schema.attributes:
            doc.fail(node, f"fd {fd} references unknown attribute {a!r}")
    if relation is not None:
        if relation not in schema.relations:
            doc.fail(node, f"fd {fd} names unknown relation {relation!r}")
        if not fd.attributes <= schema.relations[relation]:
            doc.fail(node, f"fd {fd} is not within relation {relation}")
    return fd


def parse_instance(path: Union[str, Path]) -> InstanceSpec:
    doc = _read(path)
    return parse_instance_text(Path(path).read_text(encoding="utf-8"), doc.source)


def instance_to_text(spec: InstanceSpec) -> str:
    data = {
        "attributes": list(spec.schema.attributes),
        "relations": {r: sorted(a) for r, a in spec.schema.relations.items()},
        "fds": [{"lhs": sorted(f.lhs), "rhs": f.rhs} for f in spec.fds],
        "query": {"joins": sorted(spec.query.joins)},
    }
    if spec.query.free is not None:
        data["query"]["free"] = sorted(spec.query.free)
    if spec.budgets:
        data["budgets"] = {r: str(b) for r, b in spec.budgets.items()}
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)


# ---------------------------------------------------------------------------
# Databases


def parse_database_text(text: str, schema: Optional[Schema] = None, source: str = "<database>") -> Database:
    doc = _Doc(text, source)
    top = doc.mapping(doc.root, "database")
    for key, (knode, _) in top.items():
        if key not in ("relations", "tuple_values"):
            doc.fail(knode, f"unknown section {key!r}")
    tuples = False
    if "tuple_values" in top:
        flag = doc.scalar(top["tuple_values"][1], "tuple_values").lower()
        if flag not in ("true", "false"):
            doc.fail(top["tuple_values"][1], "tuple_values must be true or false")
        tuples = flag == "true"
    if "relations" not in top:
        doc.fail(doc.root, "database needs a 'relations' section")
    tables = {}
    for rname, (rnode, body) in doc.mapping(top["relations"][1], "relations").items():
        name = doc.name(rnode, "relation")
        parts = doc.mapping(body, f"relation {name}")
        if "attributes" not in parts or "rows" not in parts:
            doc.fail(body, f"relation {name} needs 'attributes' and 'rows'")
        attrs = doc.names(parts["attributes"][1], "attribute", f"attributes of {name}")
        if len(set(attrs)) != len(attrs):
            doc.fail(parts["attributes"][1], f"duplicate attributes in {name}")
        if schema is not None:
            if name not in schema.relations:
                doc.fail(rnode, f"relation {name!r} is not in the schema")
            if set(attrs) != schema.relations[name]:
                doc.fail(parts["attributes"][1],
                         f"relation {name} has attributes {attrs}, schema says {sorted(schema.relations[name])}")
        rows = []
        for rownode in doc.seq(parts["rows"][1], f"rows of {name}"):
            values = [doc.scalar(v, "value") for v in doc.seq(rownode, "row")]
            if len(values) != len(attrs):
                doc.fail(rownode, f"row has {len(values)} values, relation {name} has {len(attrs)} attributes")
            for v, vnode in zip(values, rownode.value):
                bad = {PLACEHOLDER_OPEN, PLACEHOLDER_CLOSE} if tuples else {SEP, PLACEHOLDER_OPEN, PLACEHOLDER_CLOSE}
                if bad & set(v):
                    doc.fail(vnode, f"value {v!r} contains a reserved character")
            rows.append(tuple(values))
        table = Table.from_rows(attrs, rows)
        if len(table) < len(rows):
            log.warning("%s: relation %s: dropped %d duplicate row(s)", source, name, len(rows) - len(table))
        tables[name] = table
    if schema is not None:
        missing = sorted(set(schema.relations) - set(tables))
        if missing:
            doc.fail(doc.root, f"database lacks relation(s) {missing}")
    return Database(tables)


def parse_database(path: Union[str, Path], schema: Optional[Schema] = None) -> Database:
    _read(path)
    return parse_database_text(Path(path).read_text(encoding="utf-8"), schema, str(path))


def database_to_text(db: Database) -> str:
    tuples = any(SEP in v for t in db.tables.values() for r in t.rows for v in r)
    data: dict = {}
    if tuples:
        data["tuple_values"] = "true"
    data["relations"] = {
        name: {"attributes": list(t.attributes), "rows": [list(r) for r in t.sorted_rows()]}
        for name, t in sorted(db.tables.items())
    }
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True, default_flow_style=None, width=10_000)


# ---------------------------------------------------------------------------
# Generator parameters


def parse_params_text(text: str, source: str = "<params>") -> dict:
    """Generator parameters; see README for the keys each construction reads."""
    doc = _Doc(text, source)
    if doc.root is None:
        return {}
    top = doc.mapping(doc.root, "generator parameters")
    out: dict = {}
    for key, (knode, vnode) in top.items():
        if key == "packing":
            out[key] = {doc.name(k, "attribute"): doc.fraction(v, "packing weight")
                        for _, (k, v) in doc.mapping(vnode, "packing").items()}
        elif key == "coloring":
            out[key] = {doc.name(k, "attribute"): [doc.scalar(c, "colour") for c in doc.seq(v, "colours")]
                        for _, (k, v) in doc.mapping(vnode, "coloring").items()}
        elif key in ("N", "prime", "dim", "k"):
            text_value = doc.scalar(vnode, key)
            if not text_value.isdigit():
                doc.fail(vnode, f"{key} must be a non-negative integer")
            out[key] = int(text_value)
        elif key == "values":
            if isinstance(vnode, yaml.ScalarNode):
                if not vnode.value.isdigit():
                    doc.fail(vnode, "values must be a count or a list")
                out[key] = int(vnode.value)
            else:
                out[key] = [doc.scalar(v, "value") for v in doc.seq(vnode, "values")]
        elif key == "subspaces":
            subs = {}
            for _, (k, v) in doc.mapping(vnode, "subspaces").items():
                basis = []
                for rnode in doc.seq(v, "basis"):
                    row = []
                    for e in doc.seq(rnode, "basis vector"):
                        s = doc.scalar(e, "coordinate")
                        if not s.lstrip("-").isdigit():
                            doc.fail(e, f"coordinate {s!r} is not an integer")
                        row.append(int(s))
                    basis.append(tuple(row))
                subs[doc.name(k, "attribute")] = tuple(basis)
            out[key] = subs
        elif key == "base":
            body = doc.mapping(vnode, "base distribution")
            for need in ("attributes", "rows", "probs"):
                if need not in body:
                    doc.fail(vnode, f"base distribution needs {need!r}")
            attrs = doc.names(body["attributes"][1], "attribute", "base attributes")
            rows = [tuple(doc.scalar(x, "value") for x in doc.seq(r, "row"))
                    for r in doc.seq(body["rows"][1], "base rows")]
            probs = [doc.fraction(p, "probability") for p in doc.seq(body["probs"][1], "probs")]
            try:
                for r in rows:
                    for v in r:
                        check_value(v)
                out[key] = Distribution.from_rows(attrs, rows, probs)
            except (ValueError, InstanceError) as exc:
                doc.fail(vnode, str(exc))
        else:
            doc.fail(knode, f"unknown parameter {key!r}")
    return out


def parse_params(path: Union[str, Path]) -> dict:
    _read(path)
    return parse_params_text(Path(path).read_text(encoding="utf-8"), str(path))
