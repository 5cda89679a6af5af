"""Split a scheme into DDL an RDBMS enforces and a plan for the rest.

Six constraint categories map onto DDL: range (CHECK on a column), not-null,
key (UNIQUE), referential (FOREIGN KEY), tuple check (row-level CHECK) and
default.  Everything else goes into the enforcement plan together with the
mutation events that can break it.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

from . import formula as F
from .engine import Engine
from .scheme import ConstraintDecl, Scheme, SystemConstraint
from .values import TODAY, ValueDomain, format_date

RELATIONAL_CATEGORIES = ("range", "not-null", "key", "referential", "tuple-check", "default")

# positive pair properties: removing a pair or an element can break them
_DELETE_SENSITIVE_PROPS = {
    "reflexive", "null_reflexive", "symmetric", "null_symmetric", "transitive", "null_transitive",
    "euclidean", "null_euclidean", "equivalence", "null_equivalence", "connected",
}


@dataclass(frozen=True)
class Classification:
    relational: bool
    category: str  # a relational category, or the engine check kind


@dataclass(frozen=True)
class PlanEntry:
    constraint: str
    check: str
    triggers: tuple  # ((event, set, mappings), ...)

    def to_json(self) -> dict:
        trig = []
        for event, set_name, maps in self.triggers:
            item = {"event": event, "set": set_name}
            if maps:
                item["mappings"] = list(maps)
            trig.append(item)
        return {"constraint": self.constraint, "check": self.check, "triggers": trig}


@dataclass(frozen=True)
class EnforcementPlan:
    relational: tuple  # ((constraint id, category), ...)
    non_relational: tuple  # PlanEntry, ...

    def to_json(self) -> dict:
        return {
            "relational": [{"constraint": c, "category": k} for c, k in self.relational],
            "nonRelational": [e.to_json() for e in self.non_relational],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def _is_table(scheme: Scheme, name) -> bool:
    s = scheme.set.get(name) if isinstance(name, str) else None
    return s is not None and s.kind in ("entity", "relationship")


def _column(scheme: Scheme, fn: str, table: str) -> bool:
    m = scheme.mapping.get(fn)
    return m is not None and m.kind != "computed" and m.domain == table and _is_table(scheme, table)


def tuple_check_eligible(scheme: Scheme, f: F.Formula) -> bool:
    """Single-row formulas over one table's own columns.

    One bound variable over a table; mapping applications only to that
    variable and only for the table's own stored columns; structural columns
    only inside null tests; no Today(), no built-ins, no division and no
    date arithmetic.  Anything else is routed to the engine.
    """
    if len(f.binders) != 1:
        return False
    var, table = f.binders[0]
    if not _is_table(scheme, table):
        return False

    def term_ok(t, in_null_test=False):
        if isinstance(t, F.Lit):
            return True
        if isinstance(t, F.Var):
            return False
        if isinstance(t, F.Apply):
            if not (isinstance(t.arg, F.Var) and t.arg.name == var and _column(scheme, t.fn, table)):
                return False
            m = scheme.mapping[t.fn]
            return m.kind == "attribute" or in_null_test
        if isinstance(t, F.Arith):
            if t.op == "/" or _is_date(t.left) or _is_date(t.right):
                return False
            return term_ok(t.left) and term_ok(t.right)
        return False

    def _is_date(t):
        if isinstance(t, F.Lit):
            return t.category == "date"
        if isinstance(t, F.Apply):
            dom = scheme.value_domain(t.fn)
            return dom is not None and dom.category == "date"
        if isinstance(t, F.Arith):
            return _is_date(t.left) or _is_date(t.right)
        return False

    def cond_ok(c):
        if isinstance(c, F.Cmp):
            return term_ok(c.left) and term_ok(c.right)
        if isinstance(c, F.NullTest):
            return term_ok(c.term, in_null_test=True)
        if isinstance(c, (F.And, F.Or)):
            return all(cond_ok(i) for i in c.items)
        if isinstance(c, F.Not):
            return cond_ok(c.item)
        if isinstance(c, F.Implies):
            return cond_ok(c.ante) and cond_ok(c.cons)
        return False

    return cond_ok(f.body)


def classify(scheme: Scheme, c) -> Classification:
    if isinstance(c, SystemConstraint):
        if c.axiom == "range":
            return Classification(_is_table(scheme, scheme.mapping[c.targets[0]].domain), "range")
        if c.axiom == "referential":
            m = scheme.mapping[c.targets[0]]
            ok = _is_table(scheme, m.domain) and _is_table(scheme, m.codomain)
            return Classification(ok, "referential")
        return Classification(True, "key")
    name = c.kind.name
    if name == "totality" and _column(scheme, c.targets[0], scheme.mapping[c.targets[0]].domain):
        return Classification(True, "not-null")
    if name == "default-value" and _column(scheme, c.targets[0], scheme.mapping[c.targets[0]].domain):
        return Classification(True, "default")
    if name in ("injectivity", "concatenated-key"):
        table = c.param("set") or scheme.mapping[c.targets[0]].domain
        if all(_column(scheme, fn, table) for fn in c.targets):
            return Classification(True, "key")
    if name == "object" and tuple_check_eligible(scheme, c.param("formula")):
        return Classification(True, "tuple-check")
    return Classification(False, name)


# -- DDL --------------------------------------------------------------------

def sql_name(text: str) -> str:
    return re.sub(r"\W", "_", text)


def sql_type(dom: ValueDomain | None) -> str:
    if dom is None:
        return "INTEGER"
    base = dom.base
    if base in ("NAT", "INT"):
        return f"NUMERIC({dom.digits})"
    if base == "RAT":
        return f"NUMERIC({dom.digits + dom.scale}, {dom.scale})"
    if base == "CURRENCY":
        return f"NUMERIC({dom.digits + 2}, 2)"
    if base == "ASCII":
        return f"VARCHAR({dom.digits})"
    if base == "DATETIME":
        return "DATE"
    return "BOOLEAN"


def sql_literal(value, category: str) -> str:
    if value is None:
        return "NULL"
    if category == "date":
        return f"DATE '{format_date(value)}'"
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return format(value, "f") if not isinstance(value, int) else str(value)


def range_condition(col: str, dom: ValueDomain) -> str | None:
    parts = []
    cat = dom.category
    if dom.base == "NAT" and not (dom.interval and dom.interval.low is not None):
        parts.append(f"{col} >= 0")
    if dom.enumeration is not None:
        parts.append(f"{col} IN ({', '.join(sql_literal(v, cat) for v in dom.enumeration)})")
    iv = dom.interval
    if iv is not None:
        for bound, closed, ops in ((iv.low, iv.low_closed, (">=", ">")), (iv.high, iv.high_closed, ("<=", "<"))):
            if bound is None:
                continue
            rhs = "CURRENT_DATE" if bound is TODAY else sql_literal(bound, cat)
            parts.append(f"{col} {ops[0] if closed else ops[1]} {rhs}")
    return " AND ".join(parts) or None


_SQL_CMP = {"=": "=", "!=": "<>", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _sql_term(scheme: Scheme, t) -> str:
    if isinstance(t, F.Lit):
        return sql_literal(t.value, t.category)
    if isinstance(t, F.Apply):
        return t.fn
    if isinstance(t, F.Arith):
        return f"({_sql_term(scheme, t.left)} {t.op} {_sql_term(scheme, t.right)})"
    raise ValueError(f"no SQL rendering for {t!r}")


def sql_condition(scheme: Scheme, c) -> str:
    if isinstance(c, F.Cmp):
        return f"{_sql_term(scheme, c.left)} {_SQL_CMP[c.op]} {_sql_term(scheme, c.right)}"
    if isinstance(c, F.NullTest):
        return f"{_sql_term(scheme, c.term)} IS {'NULL' if c.is_null else 'NOT NULL'}"
    if isinstance(c, F.Not):
        return f"NOT ({sql_condition(scheme, c.item)})"
    if isinstance(c, F.Implies):
        return f"NOT ({sql_condition(scheme, c.ante)}) OR ({sql_condition(scheme, c.cons)})"
    sep = " AND " if isinstance(c, F.And) else " OR "
    return sep.join(f"({sql_condition(scheme, i)})" for i in c.items)


def emit_ddl(scheme: Scheme) -> str:
    """ANSI-flavoured DDL: one table per entity or relationship set."""
    by_table: dict[str, list[str]] = {}
    declared = list(scheme.constraints)
    not_null, defaults = set(), {}
    for c in declared:
        cls = classify(scheme, c)
        if cls.category == "not-null" and cls.relational:
            not_null.add(c.targets[0])
        elif cls.category == "default" and cls.relational:
            defaults[c.targets[0]] = c.param("value")
    table_checks: dict[str, list[str]] = {}
    for c in declared:
        cls = classify(scheme, c)
        if not cls.relational:
            continue
        if cls.category == "key":
            table = c.param("set") or scheme.mapping[c.targets[0]].domain
            table_checks.setdefault(table, []).append(
                f"CONSTRAINT {sql_name(c.id)} UNIQUE ({', '.join(c.targets)})")
        elif cls.category == "tuple-check":
            f = c.param("formula")
            table_checks.setdefault(f.binders[0][1], []).append(
                f"CONSTRAINT {sql_name(c.id)} CHECK ({sql_condition(scheme, f.body)})")
    foreign = []
    for sc in scheme.system_constraints:
        cls = classify(scheme, sc)
        if not cls.relational:
            continue
        if sc.axiom == "canonical-key":
            table_checks.setdefault(sc.targets[0], []).insert(
                0, f"CONSTRAINT {sql_name(sc.id)} UNIQUE ({', '.join(sc.targets[1:])})")
        elif sc.axiom == "referential":
            m = scheme.mapping[sc.targets[0]]
            foreign.append(f"ALTER TABLE {m.domain} ADD CONSTRAINT {sql_name(sc.id)} "
                           f"FOREIGN KEY ({m.name}) REFERENCES {m.codomain} (x);")
    out = []
    for s in scheme.sets:
        if s.kind not in ("entity", "relationship"):
            continue
        lines = ["  x INTEGER NOT NULL PRIMARY KEY"]
        for m in scheme.stored_mappings(s.name):
            dom = scheme.value_domain(m)
            col = f"  {m.name} {sql_type(dom)}"
            if m.name in defaults:
                col += f" DEFAULT {sql_literal(defaults[m.name], dom.category)}"
            if m.name in not_null or m.origin == "projection":
                col += " NOT NULL"
            if dom is not None:
                cond = range_condition(m.name, dom)
                if cond:
                    col += f" CONSTRAINT {sql_name('sys.range.' + m.name)} CHECK ({cond})"
            lines.append(col)
        lines += [f"  {c}" for c in table_checks.get(s.name, [])]
        out.append(f"CREATE TABLE {s.name} (\n" + ",\n".join(lines) + "\n);")
    text = f"-- scheme {scheme.name}\n\n" + "\n\n".join(out) + "\n"
    if foreign:
        text += "\n" + "\n".join(foreign) + "\n"
    return text


# -- enforcement plan ---------------------------------------------------------

def _delete_sets(scheme: Scheme, c: ConstraintDecl) -> list[str]:
    k = c.kind
    if k.family == "set-general":
        return list(c.targets) if k.name != "inclusion" else [c.targets[1]]
    if k.name in ("surjectivity", "bijectivity"):
        return [scheme.mapping[c.targets[0]].domain]
    if k.family == "set-dyadic" and k.prop in _DELETE_SENSITIVE_PROPS:
        return [c.targets[0]]
    if k.family == "hbfp" and k.prop in _DELETE_SENSITIVE_PROPS:
        return [scheme.mapping[c.targets[0]].domain]
    return []


def emit_enforcement_plan(scheme: Scheme) -> EnforcementPlan:
    engine = Engine(scheme)
    checks = {chk.id: chk for chk in engine.checks}
    relational, non_relational = [], []
    for c in list(scheme.constraints) + list(scheme.system_constraints):
        cls = classify(scheme, c)
        if cls.relational:
            relational.append((c.id, cls.category))
            continue
        chk = checks[c.id]
        tables = [s.name for s in scheme.sets if s.name in chk.sets and _is_table(scheme, s.name)]
        triggers = [("insert", t, ()) for t in tables]
        updates: dict[str, list[str]] = {}
        for m in scheme.mappings:
            if m.name in chk.mappings and m.kind != "computed" and _is_table(scheme, m.domain):
                updates.setdefault(m.domain, []).append(m.name)
        triggers += [("update", s.name, tuple(updates[s.name])) for s in scheme.sets if s.name in updates]
        if isinstance(c, ConstraintDecl):
            dels = set(_delete_sets(scheme, c))
            triggers += [("delete", s.name, ()) for s in scheme.sets if s.name in dels and _is_table(scheme, s.name)]
        non_relational.append(PlanEntry(c.id, cls.category, tuple(triggers)))
    return EnforcementPlan(tuple(relational), tuple(non_relational))
