import json
import random
import re
import sqlite3
from pathlib import Path

import pytest

from emdm.demo.familytree import DEMO_TODAY, instance_for, load_clean, load_suite, scheme_text
from emdm.dsl import parse_scheme
from emdm.engine import Engine
from emdm.sqlgen import classify, emit_ddl, emit_enforcement_plan
from emdm.store import StoreError
from emdm.values import format_date, parse_date

GOLDEN = Path(__file__).parent / "golden"


def test_plan_matches_golden(family):
    assert emit_enforcement_plan(family).dumps() == (GOLDEN / "family_plan.json").read_text()


def test_ddl_matches_golden_and_is_deterministic(family):
    ddl = emit_ddl(family)
    assert ddl == emit_ddl(parse_scheme(scheme_text()))
    assert ddl == (GOLDEN / "family.sql").read_text()


def test_every_constraint_appears_once(family):
    plan = emit_enforcement_plan(family).to_json()
    listed = [r["constraint"] for r in plan["relational"]] + [e["constraint"] for e in plan["nonRelational"]]
    expected = [c.id for c in family.constraints] + [c.id for c in family.system_constraints]
    assert sorted(listed) == sorted(expected)
    assert len(listed) == len(set(listed))


def test_family_classification(family):
    cat = {c.id: classify(family, c) for c in list(family.constraints) + list(family.system_constraints)}
    assert cat["C0"].category == cat["C2"].category == "tuple-check"
    assert all(cat[f"C{i}"].category == "key" for i in range(10, 14))
    assert all(cat[c.id].category == "not-null" for c in family.constraints if c.kind.name == "totality")
    for cid in ("Mother.acyclic", "Father.acyclic", "C14", "C15", "C5", "peopleKey"):
        assert not cat[cid].relational, cid
    assert cat["Mother.acyclic"].category == "selfmap-acyclicity"


def test_plan_triggers(family):
    plan = {e.constraint: e for e in emit_enforcement_plan(family).non_relational}
    assert ("insert", "MARRIAGES", ()) in plan["C14"].triggers
    assert ("update", "MARRIAGES", ("MarriageDate", "DivorceDate", "Husband")) in plan["C14"].triggers
    assert all(event != "delete" for e in plan.values() for event, _, _ in e.triggers)
    assert plan["Mother.acyclic"].triggers == (("insert", "PEOPLE", ()), ("update", "PEOPLE", ("Mother",)))


SMALL = parse_scheme("""scheme Small;
set P: entity;
set Q: entity;
set R: relationship(P, P);
map A: P -> INT(3), default = 7;
map B: P -> DATETIME [#2000-01-01#, Today()];
map S: P -> P;
map T: Q -> P;
constraint X1: formula forall x in P (B(x) <= Today());
constraint X2: formula forall x in P (A(x) / 2 > 1);
constraint X3: formula forall x in P (A(x) + 1 > 1 or S(x) null);
constraint X4: formula forall x in P (S(x) = x);
constraint X5: formula forall x in P (Len("ab") = 2);
constraint Y1: R is reflexive;
constraint Y2: Q subset P;
constraint Y3: key (A, B) on P;
""")


def test_small_classification():
    cat = {c.id: classify(SMALL, c) for c in list(SMALL.constraints) + list(SMALL.system_constraints)}
    assert cat["A.default"].category == "default"
    assert cat["X3"].category == "tuple-check"
    for cid in ("X1", "X2", "X4", "X5", "Y1", "Y2"):
        assert not cat[cid].relational, cid
    assert cat["Y3"].category == "key"
    canonical = [c.id for c in SMALL.system_constraints if c.axiom == "canonical-key"]
    assert canonical and all(cat[c].category == "key" for c in canonical)


def test_small_ddl_and_delete_triggers():
    ddl = emit_ddl(SMALL)
    assert "A NUMERIC(3) DEFAULT 7" in ddl
    assert "CHECK (B >= DATE '2000-01-01' AND B <= CURRENT_DATE)" in ddl
    assert "UNIQUE (P1, P2)" in ddl
    plan = {e.constraint: e for e in emit_enforcement_plan(SMALL).non_relational}
    assert ("delete", "R", ()) in plan["Y1"].triggers
    assert ("delete", "P", ()) in plan["Y2"].triggers
    assert all(event != "delete" for event, _, _ in plan["X1"].triggers)


# -- semantic preservation against sqlite ----------------------------------------

def sqlite_ddl(ddl: str, today: str, keep: str) -> str:
    """The DDL with only constraint `keep` (plus column types), in sqlite's dialect."""
    out = []
    for line in ddl.splitlines():
        if line.startswith("ALTER TABLE") or line.startswith("--"):
            continue
        m = re.match(r"\s+CONSTRAINT (\w+) ", line)
        if m and m.group(1) != keep:
            continue
        line = re.sub(r" CONSTRAINT (\w+) CHECK \(.*\)(,?)$",
                      lambda mm: mm.group(0) if mm.group(1) == keep else mm.group(2), line)
        if keep != "NOTNULL":
            line = re.sub(r"(?<!IS) NOT NULL", "", line)
        out.append(line)
    text = "\n".join(out)
    text = re.sub(r",\n\)", "\n)", text)
    text = re.sub(r"DATE '([^']*)'", r"'\1'", text)
    return text.replace("CURRENT_DATE", f"'{today}'")


def sqlite_rejections(scheme, inst, keep: str) -> set:
    db = sqlite3.connect(":memory:")
    db.executescript(sqlite_ddl(emit_ddl(scheme), format_date(inst.today), keep))
    rejected = set()
    for s in scheme.sets:
        if s.kind not in ("entity", "relationship"):
            continue
        cols = [m for m in scheme.stored_mappings(s.name)]
        for x in inst.population(s.name):
            row = [x]
            for m in cols:
                v = inst.values[m.name].get(x)
                dom = scheme.value_domain(m)
                row.append(format_date(v) if v is not None and dom is not None and dom.category == "date" else v)
            names = ", ".join(["x"] + [m.name for m in cols])
            try:
                db.execute(f"INSERT INTO {s.name} ({names}) VALUES ({', '.join('?' * len(row))})", row)
            except sqlite3.IntegrityError:
                rejected.add((s.name, x))
    return rejected


def _perturbed(rng):
    data = load_clean()
    people = data["PEOPLE"]
    for _ in range(rng.randint(1, 6)):
        p = rng.choice(people)
        field = rng.choice(["Died", "Baptized", "Buried", "BirthDate"])
        p[field] = None if field != "BirthDate" and rng.random() < 0.3 else \
            f"{rng.randint(1900, 2024)}-{rng.randint(1, 7):02d}-{rng.randint(1, 28):02d}"
    for _ in range(rng.randint(0, 4)):
        m = rng.choice(data["MARRIAGES"])
        field = rng.choice(["MarriageDate", "DivorceDate", "Husband", "Wife"])
        if field in ("Husband", "Wife"):
            m[field] = {"ref": "PEOPLE", "id": rng.randint(1, 8)}
        else:
            m[field] = None if field == "DivorceDate" and rng.random() < 0.3 else \
                rng.choice(["1975-09-01", "1999-05-20", "1987-10-10", "1985-03-01"])
    return data


def _datasets(family):
    rng = random.Random(99)
    sets = [(load_clean(), DEMO_TODAY)] + [(c.dataset, c.today) for c in load_suite()]
    sets += [(_perturbed(rng), DEMO_TODAY) for _ in range(40)]
    out = []
    for data, today in sets:
        try:
            out.append(instance_for(family, data, today))
        except StoreError:
            pass
    return out


def test_tuple_checks_and_keys_preserve_semantics(family):
    instances = _datasets(family)
    assert len(instances) > 30
    targets = [c for c in family.constraints if classify(family, c).category in ("tuple-check", "key")]
    engine = Engine(family)
    for inst in instances:
        report = engine.validate(inst)
        for c in targets:
            table = c.param("formula").binders[0][1] if c.kind.name == "object" else c.param("set")
            engine_rows = {(table, v.witnesses[-1]) for v in report.violations if v.constraint == c.id}
            assert sqlite_rejections(family, inst, c.id) == engine_rows, c.id


def test_not_null_preserves_totality(family):
    inst = instance_for(family, load_clean())
    inst.update("MARRIAGES", 2, {"Husband": None})
    inst.update("PEOPLE", 3, {"SSN": None})
    totality = {(family.mapping[v.constraint.split(".")[0]].domain, v.witnesses[0])
                for v in Engine(family).validate(inst).violations if v.kind == "totality"}
    assert totality == {("MARRIAGES", 2), ("PEOPLE", 3)}
    assert sqlite_rejections(family, inst, "NOTNULL") == totality


def test_range_checks_preserve_semantics(family):
    today = DEMO_TODAY
    db = sqlite3.connect(":memory:")
    db.executescript(sqlite_ddl(emit_ddl(family), today, "sys_range_BirthDate"))
    dom = family.value_domain("BirthDate")
    texts = ["1899-12-31", "1900-01-01", "1960-06-06", "2024-08-15", "2024-08-16", "2100-01-01"]
    for i, text in enumerate(texts):
        try:
            db.execute("INSERT INTO PEOPLE (x, BirthDate) VALUES (?, ?)", (i, text))
            accepted = True
        except sqlite3.IntegrityError:
            accepted = False
        assert accepted == (dom.violation(parse_date(text), parse_date(today)) is None), text
