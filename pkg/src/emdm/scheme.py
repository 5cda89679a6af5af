"""Scheme intermediate representation and well-formedness resolution."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Union

from . import formula as F
from .kinds import ConstraintKind, family_properties
from .values import ValueDomain, render_literal

SET_KINDS = ("entity", "relationship", "value", "computed", "system")
MAPPING_KINDS = ("attribute", "structural", "computed", "system")
SYSTEM_SETS = {"BOOLE": ValueDomain("BOOLE")}


class SchemeError(ValueError):
    """A well-formedness error, optionally tied to the declaration at fault."""

    def __init__(self, message: str, subject: tuple[str, str] | None = None):
        super().__init__(message)
        self.message = message
        self.subject = subject  # ("set" | "map" | "constraint", name)


@dataclass(frozen=True)
class SetExpr:
    """Selection over a base set: members x of `base` with `predicate` true."""

    base: str
    var: str
    predicate: F.Cond


@dataclass(frozen=True)
class SetDecl:
    name: str
    kind: str
    components: tuple = ()  # ((role, set name), ...) for relationship sets
    domain: ValueDomain | None = None  # value sets
    definition: SetExpr | None = None  # computed sets


@dataclass(frozen=True)
class Composition:
    chain: tuple  # (f1, ..., fk) meaning f1 o ... o fk


@dataclass(frozen=True)
class Lambda:
    var: str
    term: F.Term


MapExpr = Union[Composition, Lambda]


@dataclass(frozen=True)
class MappingDecl:
    name: str
    domain: str
    codomain: Union[str, ValueDomain]
    kind: str | None = None  # inferred when None
    nullable: bool = True  # recomputed from totality constraints
    default: object = None  # recomputed from default-value constraints
    definition: MapExpr | None = None
    origin: str = "declared"  # declared | projection


@dataclass(frozen=True)
class NullLiteral:
    """Null status of a product of mappings: all non-null or all null."""

    components: tuple
    exists: bool


@dataclass(frozen=True)
class ExistencePattern:
    antecedent: tuple  # of NullLiteral
    consequent: tuple

    @property
    def is_existence(self) -> bool:
        return all(lit.exists for lit in self.consequent)


@dataclass(frozen=True)
class ConstraintDecl:
    id: str
    kind: ConstraintKind
    targets: tuple = ()
    params: dict = field(default_factory=dict)
    origin: str = "declared"  # declared | annotation

    def param(self, name, default=None):
        return self.params.get(name, default)


@dataclass(frozen=True)
class SystemConstraint:
    """Implicit store axiom attached by build_scheme."""

    id: str
    axiom: str  # range | canonical-key | referential
    targets: tuple


@dataclass(frozen=True)
class Scheme:
    name: str
    sets: tuple
    mappings: tuple
    constraints: tuple
    system_constraints: tuple = ()

    @cached_property
    def set(self) -> dict[str, SetDecl]:
        return {s.name: s for s in self.sets}

    @cached_property
    def mapping(self) -> dict[str, MappingDecl]:
        return {m.name: m for m in self.mappings}

    @cached_property
    def constraint(self) -> dict[str, ConstraintDecl]:
        return {c.id: c for c in self.constraints}

    @cached_property
    def _supersets(self) -> dict[str, set[str]]:
        edges: dict[str, set[str]] = {s.name: set() for s in self.sets}
        for s in self.sets:
            if s.kind == "computed":
                edges[s.name].add(s.definition.base)
        for c in self.constraints:
            k = c.kind.name
            if k == "inclusion":
                edges[c.targets[0]].add(c.targets[1])
            elif k == "equality":
                edges[c.targets[0]].add(c.targets[1])
                edges[c.targets[1]].add(c.targets[0])
            elif k in ("union", "direct-sum"):
                for member in c.targets[1:]:
                    edges[member].add(c.targets[0])
        closure = {}
        for start in edges:
            seen, stack = {start}, [start]
            while stack:
                for nxt in edges.get(stack.pop(), ()):
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            closure[start] = seen
        return closure

    def is_subset(self, inner: str, outer: str) -> bool:
        return outer in self._supersets.get(inner, {inner})

    def is_object_set(self, name) -> bool:
        s = self.set.get(name) if isinstance(name, str) else None
        return s is not None and s.kind in ("entity", "relationship", "computed")

    def value_domain(self, m: MappingDecl | str) -> ValueDomain | None:
        """The ValueDomain a mapping takes values in, or None for object codomains."""
        if isinstance(m, str):
            m = self.mapping[m]
        co = m.codomain
        if isinstance(co, ValueDomain):
            return co
        s = self.set.get(co)
        if s is not None and s.kind in ("value", "system"):
            return s.domain
        return None

    def stored_mappings(self, set_name: str) -> list[MappingDecl]:
        return [m for m in self.mappings if m.domain == set_name and m.kind != "computed"]

    def projections(self, set_name: str) -> list[MappingDecl]:
        return [m for m in self.mappings if m.domain == set_name and m.origin == "projection"]

    def chain_source(self, chain) -> str:
        return self.mapping[chain[-1]].domain

    def chain_target(self, chain):
        return self.mapping[chain[0]].codomain


# -- type checking ------------------------------------------------------------

def _obj(name):
    return ("obj", name)


def _mapping_result_type(scheme: Scheme, m: MappingDecl):
    dom = scheme.value_domain(m)
    if dom is not None:
        return dom.category
    return _obj(m.codomain)


def term_type(scheme: Scheme, t, env: dict[str, str]):
    """Static type of a term: ("obj", set) or one of num/text/date/bool."""
    if isinstance(t, F.Var):
        if t.name not in env:
            raise SchemeError(f"unbound variable {t.name}")
        return _obj(env[t.name])
    if isinstance(t, F.Lit):
        return t.category
    if isinstance(t, F.Apply):
        m = scheme.mapping.get(t.fn)
        if m is None:
            raise SchemeError(f"unknown function symbol {t.fn}")
        arg = term_type(scheme, t.arg, env)
        if not (isinstance(arg, tuple) and scheme.is_subset(arg[1], m.domain)):
            raise SchemeError(f"{t.fn} expects an element of {m.domain}, got {_show(arg)}")
        return _mapping_result_type(scheme, m)
    if isinstance(t, F.Arith):
        a, b = term_type(scheme, t.left, env), term_type(scheme, t.right, env)
        if t.op in ("+", "-"):
            if a == b == "num":
                return "num"
            if a == "date" and b == "num" or t.op == "+" and a == "num" and b == "date":
                return "date"
            if t.op == "-" and a == b == "date":
                return "num"
        elif a == b == "num":
            return "num"
        raise SchemeError(f"operator {t.op} not defined on {_show(a)} and {_show(b)}")
    if isinstance(t, F.Call):
        arity = F.BUILTINS.get(t.name)
        if arity is None:
            raise SchemeError(f"unknown function symbol {t.name}")
        if len(t.args) != arity:
            raise SchemeError(f"{t.name} takes {arity} argument(s)")
        types = [term_type(scheme, a, env) for a in t.args]
        if t.name == "Today":
            return "date"
        if types[0] != "text" or any(x != "num" for x in types[1:]):
            raise SchemeError(f"{t.name} applied to {', '.join(_show(x) for x in types)}")
        return "num" if t.name == "Len" else "text"
    raise SchemeError(f"not a term: {t!r}")


def _show(ty) -> str:
    return f"element of {ty[1]}" if isinstance(ty, tuple) else ty


def check_cond(scheme: Scheme, c, env: dict[str, str]) -> None:
    if isinstance(c, F.Cmp):
        a, b = term_type(scheme, c.left, env), term_type(scheme, c.right, env)
        if isinstance(a, tuple) or isinstance(b, tuple):
            related = (isinstance(a, tuple) and isinstance(b, tuple)
                       and (scheme.is_subset(a[1], b[1]) or scheme.is_subset(b[1], a[1])))
            if not related or c.op not in ("=", "!="):
                raise SchemeError(f"cannot compare {_show(a)} {c.op} {_show(b)}")
        elif a != b or (a == "bool" and c.op not in ("=", "!=")):
            raise SchemeError(f"type mismatch: {_show(a)} {c.op} {_show(b)}")
    elif isinstance(c, F.NullTest):
        term_type(scheme, c.term, env)
    elif isinstance(c, (F.And, F.Or)):
        for item in c.items:
            check_cond(scheme, item, env)
    elif isinstance(c, F.Not):
        check_cond(scheme, c.item, env)
    elif isinstance(c, F.Implies):
        check_cond(scheme, c.ante, env)
        check_cond(scheme, c.cons, env)
    else:
        raise SchemeError(f"not a condition: {c!r}")


def check_formula(scheme: Scheme, f: F.Formula) -> None:
    env: dict[str, str] = {}
    for var, set_name in f.binders:
        if not scheme.is_object_set(set_name):
            raise SchemeError(f"quantifier over unknown object set {set_name}")
        if var in env:
            raise SchemeError(f"variable {var} bound twice")
        env[var] = set_name
    check_cond(scheme, f.body, env)


# -- resolution -------------------------------------------------------------

def build_scheme(name: str, sets, mappings=(), constraints=()) -> Scheme:
    """Resolve and validate raw declarations into an immutable Scheme.

    Relationship sets get their canonical projections as structural mappings.
    `nullable` and `default` on mappings are derived from the totality and
    default-value constraints, and the implicit system constraints (canonical
    keys, attribute ranges, referential integrity) are attached.
    """
    sets = tuple(sets)
    if not sets:
        raise SchemeError("scheme must declare at least one set")
    _unique((s.name for s in sets), "set")
    draft = Scheme(name, sets, (), ())
    for s in sets:
        _check_set_shape(draft, s)

    maps = list(mappings)
    for s in sets:
        if s.kind == "relationship":
            for role, comp in s.components:
                maps.append(MappingDecl(role, s.name, comp, kind="structural", origin="projection"))
    _unique((m.name for m in maps), "map")
    maps = [_infer_mapping_kind(draft, m) for m in maps]

    constraints = tuple(constraints)
    _unique((c.id for c in constraints), "constraint")
    # provisional scheme so set/mapping lookups work while checking
    draft = Scheme(name, sets, tuple(maps), constraints)
    for c in constraints:
        _check_constraint_targets(draft, c)
    for s in sets:
        if s.kind == "computed":
            _subject(check_formula_like, draft, ("set", s.name), s.definition.var, s.definition.base,
                     s.definition.predicate)
    for m in maps:
        _check_mapping(draft, m)
    _check_computed_cycles(draft)
    for c in constraints:
        _check_constraint(draft, c)

    total = {c.targets[0] for c in constraints if c.kind.name in ("totality", "bijectivity")}
    defaults = {c.targets[0]: c.param("value") for c in constraints if c.kind.name == "default-value"}
    maps = [
        replace(m, nullable=not (m.name in total or m.origin == "projection"),
                default=defaults.get(m.name))
        for m in maps
    ]
    draft = Scheme(name, sets, tuple(maps), constraints)
    return replace(draft, system_constraints=_system_constraints(draft))


def check_formula_like(scheme, var, set_name, cond):
    check_formula(scheme, F.Formula(((var, set_name),), cond))


def _subject(fn, scheme, subject, *args):
    try:
        return fn(scheme, *args)
    except SchemeError as e:
        if e.subject is None:
            e.subject = subject
        raise


def _unique(names, category):
    seen = set()
    for n in names:
        if n in seen:
            raise SchemeError(f"duplicate {category} name {n}", (category, n))
        seen.add(n)


def _check_set_shape(scheme: Scheme, s: SetDecl) -> None:
    subj = ("set", s.name)
    if s.kind not in SET_KINDS:
        raise SchemeError(f"unknown set kind {s.kind!r}", subj)
    if s.kind == "relationship":
        if len(s.components) < 2:
            raise SchemeError(f"relationship set {s.name} needs at least 2 components", subj)
        for _, comp in s.components:
            if not scheme.is_object_set(comp):
                raise SchemeError(f"unresolved component set {comp} of {s.name}", subj)
    elif s.components:
        raise SchemeError(f"only relationship sets have components ({s.name})", subj)
    if s.kind == "value" and s.domain is None:
        raise SchemeError(f"value set {s.name} needs a domain", subj)
    if s.kind == "computed":
        if s.definition is None:
            raise SchemeError(f"computed set {s.name} needs a definition", subj)
        if not scheme.is_object_set(s.definition.base):
            raise SchemeError(f"unresolved base set {s.definition.base} of {s.name}", subj)
    if s.kind == "system":
        if s.name not in SYSTEM_SETS:
            raise SchemeError(f"unknown system set {s.name}", subj)
        if s.domain != SYSTEM_SETS[s.name]:
            raise SchemeError(f"system set {s.name} has a fixed domain", subj)


def _infer_mapping_kind(scheme: Scheme, m: MappingDecl) -> MappingDecl:
    subj = ("map", m.name)
    if not scheme.is_object_set(m.domain):
        raise SchemeError(f"unresolved domain set {m.domain} of {m.name}", subj)
    co = m.codomain
    if isinstance(co, str):
        s = scheme.set.get(co)
        if s is None:
            raise SchemeError(f"unresolved codomain set {co} of {m.name}", subj)
        value_like = s.kind in ("value", "system")
    else:
        value_like = True
    if m.definition is not None:
        inferred = "computed"
    else:
        inferred = "attribute" if value_like else "structural"
    if m.kind is not None and m.kind != inferred:
        raise SchemeError(f"mapping {m.name} declared {m.kind} but its shape is {inferred}", subj)
    return replace(m, kind=inferred)


def _check_chain(scheme: Scheme, chain, subject) -> None:
    if not chain:
        raise SchemeError("empty mapping chain", subject)
    for fn in chain:
        if fn not in scheme.mapping:
            raise SchemeError(f"unknown mapping {fn}", subject)
    for outer, inner in zip(chain, chain[1:]):
        co = scheme.mapping[inner].codomain
        if not (isinstance(co, str) and scheme.is_object_set(co)
                and scheme.is_subset(co, scheme.mapping[outer].domain)):
            raise SchemeError(f"{outer} o {inner} does not compose", subject)


def _check_mapping(scheme: Scheme, m: MappingDecl) -> None:
    subj = ("map", m.name)
    d = m.definition
    if isinstance(d, Composition):
        _check_chain(scheme, d.chain, subj)
        if not scheme.is_subset(m.domain, scheme.chain_source(d.chain)):
            raise SchemeError(f"{m.name}: chain does not start from {m.domain}", subj)
        target = scheme.mapping[d.chain[0]]
        got, want = _mapping_result_type(scheme, target), _codomain_type(scheme, m)
        if not _type_fits(scheme, got, want):
            raise SchemeError(f"{m.name}: chain yields {_show(got)}, declared {_show(want)}", subj)
    elif isinstance(d, Lambda):
        got = _subject(term_type, scheme, subj, d.term, {d.var: m.domain})
        want = _codomain_type(scheme, m)
        if not _type_fits(scheme, got, want):
            raise SchemeError(f"{m.name}: definition yields {_show(got)}, declared {_show(want)}", subj)


def _codomain_type(scheme, m):
    dom = scheme.value_domain(m)
    return dom.category if dom is not None else _obj(m.codomain)


def _type_fits(scheme, got, want) -> bool:
    if isinstance(got, tuple) and isinstance(want, tuple):
        return scheme.is_subset(got[1], want[1])
    return got == want


def _check_computed_cycles(scheme: Scheme) -> None:
    deps = {}
    for m in scheme.mappings:
        if isinstance(m.definition, Composition):
            deps[m.name] = set(m.definition.chain)
        elif isinstance(m.definition, Lambda):
            deps[m.name] = set(F.mappings_used(m.definition.term))
    state: dict[str, int] = {}

    def visit(n):
        state[n] = 1
        for d in deps.get(n, ()):
            if state.get(d) == 1:
                raise SchemeError(f"computed mapping {n} depends on itself", ("map", n))
            if d not in state:
                visit(d)
        state[n] = 2

    for n in deps:
        if n not in state:
            visit(n)


def _check_constraint_targets(scheme: Scheme, c: ConstraintDecl) -> None:
    subj = ("constraint", c.id)
    if not isinstance(c.kind, ConstraintKind):
        raise SchemeError(f"constraint {c.id} has no registered kind", subj)
    fam = c.kind.family
    for t in c.targets:
        if fam in ("set-general", "set-dyadic"):
            if t not in scheme.set:
                raise SchemeError(f"unresolved set {t} in {c.id}", subj)
        elif t not in scheme.mapping:
            raise SchemeError(f"unresolved mapping {t} in {c.id}", subj)


def _require(cond, msg, c):
    if not cond:
        raise SchemeError(f"{c.id}: {msg}", ("constraint", c.id))


def _check_constraint(scheme: Scheme, c: ConstraintDecl) -> None:
    k = c.kind
    name, fam, t = k.name, k.family, c.targets
    M = scheme.mapping
    subj = ("constraint", c.id)
    if fam == "set-general":
        need = 2 if name in ("inclusion", "equality", "disjointness") else 3
        _require(len(t) == need if need == 2 else len(t) >= need,
                 f"{name} needs {'exactly 2' if need == 2 else 'at least 3'} sets", c)
        for s in t:
            _require(scheme.is_object_set(s), f"{s} is not an object set", c)
    elif fam == "set-dyadic":
        _require(len(t) == 1, "dyadic constraints target one relationship set", c)
        s = scheme.set[t[0]]
        _require(s.kind == "relationship" and len(s.components) == 2
                 and s.components[0][1] == s.components[1][1],
                 f"{t[0]} is not a dyadic relation over one set", c)
        _require(k.prop in family_properties("set-dyadic"), "not a dyadic property", c)
    elif fam == "map-general":
        _require(len(t) == 1, f"{name} targets exactly one mapping", c)
        m = M[t[0]]
        if name in ("surjectivity", "bijectivity"):
            dom = scheme.value_domain(m)
            _require(dom is None or dom.enumerable,
                     f"{name} needs an enumerable codomain ({m.name})", c)
        if name == "default-value":
            _require(m.kind == "attribute", "defaults apply to stored attributes only", c)
            value = c.param("value")
            dom = scheme.value_domain(m)
            reason = dom.violation(value)
            _require(reason is None, f"default {render_literal(value, dom.category)} outside codomain: {reason}", c)
        if name == "injectivity" and c.param("set") is not None:
            _require(scheme.is_subset(c.param("set"), m.domain), f"{m.name} not defined on {c.param('set')}", c)
    elif fam == "map-product":
        s = c.param("set")
        _require(s is not None and scheme.is_object_set(s), "product constraints need an object set", c)
        for fn in t:
            _require(scheme.is_subset(s, M[fn].domain), f"{fn} is not defined on {s}", c)
        if name == "concatenated-key":
            _require(len(t) >= 2, "a concatenated key needs at least 2 components", c)
        elif name == "subkey":
            sub, guards = tuple(c.param("sub", ())), tuple(c.param("guards", ()))
            _require(sub and set(sub) < set(t), "subkey must be a proper sub-product", c)
            _require(set(guards) == set(t) - set(sub), "guards must be the excluded components", c)
        else:
            p = c.param("pattern")
            _require(isinstance(p, ExistencePattern) and p.antecedent and p.consequent,
                     "existence pattern needs literals on both sides", c)
            _require(p.is_existence == (name == "existence"),
                     "pattern polarity does not match the constraint kind", c)
            used = {fn for lit in p.antecedent + p.consequent for fn in lit.components}
            _require(used == set(t), "pattern mappings must equal the targets", c)
    elif fam == "hbfp":
        _require(len(t) == 2, "an hbfp constraint targets two mappings", c)
        f, g = M[t[0]], M[t[1]]
        _require(f.domain == g.domain, "hbfp components must share a domain", c)
        _require(isinstance(f.codomain, str) and f.codomain == g.codomain and scheme.is_object_set(f.codomain),
                 "hbfp components must share an object-set codomain", c)
        _require(k.prop in family_properties("hbfp"), "not an hbfp property", c)
    elif fam == "self-map":
        _require(len(t) == 1, "self-map constraints target one mapping", c)
        m = M[t[0]]
        _require(isinstance(m.codomain, str) and m.codomain == m.domain,
                 f"{m.name} is not a self-map (domain {m.domain}, codomain {m.codomain})", c)
    elif fam == "diagram":
        if name == "diagram-general-commutativity":
            pass
        elif k.prop is not None:
            path = tuple(c.param("path", ()))
            _check_chain(scheme, path, subj)
            src, dst = scheme.chain_source(path), scheme.chain_target(path)
            _require(isinstance(dst, str) and scheme.is_subset(dst, src) and scheme.is_subset(src, dst),
                     "local diagram path must be cyclic (source = target)", c)
        else:
            left, right = tuple(c.param("left", ())), tuple(c.param("right", ()))
            _check_chain(scheme, left, subj)
            _check_chain(scheme, right, subj)
            _require(scheme.chain_source(left) == scheme.chain_source(right), "paths must share a source", c)
            lt = _mapping_result_type(scheme, M[left[0]])
            rt = _mapping_result_type(scheme, M[right[0]])
            _require(_type_fits(scheme, lt, rt) or _type_fits(scheme, rt, lt), "paths must share a target", c)
    if name in ("object", "diagram-general-commutativity"):
        f = c.param("formula")
        _require(isinstance(f, F.Formula), "a formula is required", c)
        _subject(check_formula, scheme, subj, f)


def _system_constraints(scheme: Scheme) -> tuple:
    out = []
    for s in scheme.sets:
        if s.kind == "relationship":
            roles = tuple(m.name for m in scheme.projections(s.name))
            out.append(SystemConstraint(f"sys.key.{s.name}", "canonical-key", (s.name,) + roles))
    for m in scheme.mappings:
        if m.kind == "attribute":
            out.append(SystemConstraint(f"sys.range.{m.name}", "range", (m.name,)))
        elif m.kind == "structural":
            out.append(SystemConstraint(f"sys.ref.{m.name}", "referential", (m.name,)))
    return tuple(out)
