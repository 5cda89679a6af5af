"""Instance validation against every constraint of a scheme.

Each constraint compiles into a Check: the sets and mappings it reads plus a
runner producing Violations.  Deferred validation runs every check; an
EagerSession re-runs only the checks whose reads intersect what a mutation
touched.  Both report in scheme declaration order, declared constraints
first and store axioms after.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Callable

from . import formula as F
from .kinds import KINDS
from .evaluate import chain_getter, compile_cond, compile_term, mapping_getter
from .relations import PairSet, check_pair_property, check_self_map
from .scheme import Composition, ConstraintDecl, Lambda, Scheme, SystemConstraint
from .store import Instance, Touched, load_data, new_instance
from .values import render_literal

ENFORCED_ELSEWHERE = {
    "non-primeness": "checked on the scheme by the meta analyzer",
    "default-value": "applied by the store on insert",
}


@dataclass(frozen=True)
class Violation:
    constraint: str
    kind: str
    witnesses: tuple
    message: str
    advisory: bool = False

    def to_json(self) -> dict:
        return {
            "constraint": self.constraint,
            "kind": self.kind,
            "witnesses": _jsonable(self.witnesses),
            "message": self.message,
        }


def _jsonable(x):
    if isinstance(x, (list, tuple)):
        return [_jsonable(i) for i in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, Decimal):
        return format(x, "f")
    return x


def _show(x) -> str:
    if isinstance(x, tuple):
        return "(" + ", ".join(_show(i) for i in x) + ")"
    if x is None:
        return "null"
    if isinstance(x, str):
        return repr(x)
    return str(x)


@dataclass(frozen=True)
class Check:
    id: str
    kind: str
    sets: frozenset
    mappings: frozenset
    make: Callable  # Instance -> (() -> list[Violation])
    note: str = ""

    def affected_by(self, touched: Touched) -> bool:
        return bool(self.sets & touched.sets or self.mappings & touched.mappings)


# -- dependency expansion ---------------------------------------------------

def _map_deps(scheme: Scheme, names) -> set:
    out, stack = set(), list(names)
    while stack:
        n = stack.pop()
        if n in out:
            continue
        out.add(n)
        d = scheme.mapping[n].definition
        if isinstance(d, Composition):
            stack += d.chain
        elif isinstance(d, Lambda):
            stack += F.mappings_used(d.term)
    return out


def _set_deps(scheme: Scheme, names) -> tuple[set, set]:
    sets, maps, stack = set(), set(), list(names)
    while stack:
        n = stack.pop()
        if n in sets:
            continue
        sets.add(n)
        s = scheme.set[n]
        if s.kind == "computed":
            stack.append(s.definition.base)
            maps |= _map_deps(scheme, F.mappings_used(s.definition.predicate))
    return sets, maps


def _deps(scheme: Scheme, sets=(), maps=()) -> tuple[frozenset, frozenset]:
    s, m = _set_deps(scheme, [x for x in sets if x is not None])
    m |= _map_deps(scheme, maps)
    return frozenset(s), frozenset(m)


# -- runners ----------------------------------------------------------------

def _v(c, witnesses, message, advisory=False) -> Violation:
    return Violation(c.id, c.kind.name, tuple(witnesses), message, advisory)


def _key_runner(c, components, set_name, restrict=None, advise=True):
    def make(inst: Instance):
        getters = [mapping_getter(inst, fn) for fn in components]
        guard = None
        if restrict:
            guard_getters = [mapping_getter(inst, fn) for fn in restrict]
            guard = lambda x: all(g(x) is None for g in guard_getters)  # noqa: E731

        def collisions(gs, pop):
            seen: dict = {}
            out = []
            for x in pop:
                key = tuple(g(x) for g in gs)
                if any(k is None for k in key):
                    continue
                first = seen.setdefault(key, x)
                if first != x:
                    out.append((first, x))
            return out

        def run():
            pop = inst.population(set_name)
            if guard is not None:
                pop = [x for x in pop if guard(x)]
            label = " & ".join(components)
            found = [_v(c, pair, f"{label} not unique on {set_name}: {_show(pair[0])} and {_show(pair[1])} agree")
                     for pair in collisions(getters, pop)]
            if advise and not found and len(components) > 1:
                for i in range(len(components)):
                    sub = components[:i] + components[i + 1:]
                    if not collisions(getters[:i] + getters[i + 1:], pop):
                        found.append(_v(c, sub, f"sub-product {' & '.join(sub)} is also unique on current "
                                                f"data; {label} may not be minimal", advisory=True))
            return found

        return run

    return make


def _formula_runner(c, f: F.Formula):
    def make(inst: Instance):
        names = [v for v, _ in f.binders]
        slots = {v: i for i, v in enumerate(names)}
        body = compile_cond(inst, f.body, slots)
        join = _find_join(f, slots, inst)
        sets = [s for _, s in f.binders]

        def report(env):
            binding = ", ".join(f"{n}={_show(v)}" for n, v in zip(names, env))
            return _v(c, tuple(env), f"{c.id} violated for {binding}")

        def run():
            out = []
            pops = [inst.population(s) for s in sets]
            if join is None:
                for combo in itertools.product(*pops):
                    env = list(combo)
                    if body(env) is False:
                        out.append(report(env))
                return out
            outer_term, inner_term = join
            k = len(names) - 1
            index: dict = {}
            probe = [None] * len(names)
            for y in pops[k]:
                probe[k] = y
                key = inner_term(probe)
                if key is not None:
                    index.setdefault(key, []).append(y)
            for combo in itertools.product(*pops[:k]):
                env = list(combo) + [None]
                key = outer_term(env)
                if key is None:
                    continue
                for y in index.get(key, ()):
                    env[k] = y
                    if body(env) is False:
                        out.append(report(list(env)))
            return out

        return run

    return make


def _find_join(f: F.Formula, slots, inst):
    """An equality conjunct in the antecedent linking the last variable to the others.

    When the body is `A and (s = t) and ... => B` with t depending only on the
    last bound variable and s only on earlier ones, any binding where s and t
    differ (or either is null) makes the antecedent false or unknown, so only
    bindings with equal keys can falsify the formula.
    """
    if len(f.binders) < 2 or not isinstance(f.body, F.Implies):
        return None
    last = f.binders[-1][0]
    earlier = {v for v, _ in f.binders[:-1]}
    ante = f.body.ante
    conjuncts = ante.items if isinstance(ante, F.And) else (ante,)
    for item in conjuncts:
        if not (isinstance(item, F.Cmp) and item.op == "="):
            continue
        for a, b in ((item.left, item.right), (item.right, item.left)):
            va, vb = F.variables_used(a), F.variables_used(b)
            if vb == {last} and va <= earlier:
                return compile_term(inst, a, slots), compile_term(inst, b, slots)
    return None


def _pairs_runner(c, view_of, prop):
    def make(inst):
        def run():
            view = view_of(inst)
            return [_v(c, w, f"{c.id}: {' & '.join(c.targets)} not {prop}, witness {_show(w)}")
                    for w in check_pair_property(view, prop)]
        return run
    return make


def _self_map_runner(c, chain, prop):
    def make(inst):
        g = chain_getter(inst, chain)
        source = inst.scheme.chain_source(chain)

        def run():
            u = inst.population(source)
            fmap = {x: g(x) for x in u}
            return [_v(c, w, f"{c.id}: {' o '.join(chain)} not {prop}, witness {_show(w)}")
                    for w in check_self_map(u, fmap, prop)]
        return run
    return make


def _check_for(scheme: Scheme, c: ConstraintDecl) -> Check:
    k = c.kind
    name, fam, t = k.name, k.family, c.targets
    M = scheme.mapping

    def check(make, sets=(), maps=(), note=""):
        s, m = _deps(scheme, sets, maps)
        return Check(c.id, name, s, m, make, note)

    if name in ENFORCED_ELSEWHERE:
        return check(lambda inst: (lambda: []), maps=t, note=ENFORCED_ELSEWHERE[name])

    if fam == "set-general":
        def make(inst):
            def run():
                pops = [inst.population(s) for s in t]
                sets_ = [set(p) for p in pops]
                out = []
                if name in ("inclusion", "equality"):
                    out += [_v(c, (x,), f"{x!r} in {t[0]} but not in {t[1]}") for x in pops[0] if x not in sets_[1]]
                    if name == "equality":
                        out += [_v(c, (x,), f"{x!r} in {t[1]} but not in {t[0]}")
                                for x in pops[1] if x not in sets_[0]]
                elif name == "disjointness":
                    out += [_v(c, (x,), f"{x!r} in both {t[0]} and {t[1]}") for x in pops[0] if x in sets_[1]]
                else:
                    whole = sets_[0]
                    union = set().union(*sets_[1:])
                    out += [_v(c, (x,), f"{x!r} in {t[0]} but in no member") for x in pops[0] if x not in union]
                    for s, p in zip(t[1:], pops[1:]):
                        out += [_v(c, (x,), f"{x!r} in {s} but not in {t[0]}") for x in p if x not in whole]
                    if name == "direct-sum":
                        seen: dict = {}
                        for s, p in zip(t[1:], pops[1:]):
                            for x in p:
                                if x in seen and seen[x] != s:
                                    out.append(_v(c, (x,), f"{x!r} in both {seen[x]} and {s}"))
                                seen.setdefault(x, s)
                return out
            return run
        return check(make, sets=t)

    if fam == "set-dyadic":
        rel = scheme.set[t[0]]
        p1, p2 = [m.name for m in scheme.projections(rel.name)]
        carrier = rel.components[0][1]

        def view(inst):
            a, b = inst.values[p1], inst.values[p2]
            return PairSet.of(inst.population(carrier),
                              ((a.get(r), b.get(r)) for r in inst.population(rel.name)), rel.name)
        return check(_pairs_runner(c, view, k.prop), sets=(rel.name, carrier), maps=(p1, p2))

    if name == "totality":
        f = M[t[0]]

        def make(inst):
            g = mapping_getter(inst, f.name)
            return lambda: [_v(c, (x,), f"{f.name}({_show(x)}) is null") for x in inst.population(f.domain)
                            if g(x) is None]
        return check(make, sets=(f.domain,), maps=t)

    if name == "injectivity":
        on = c.param("set") or M[t[0]].domain
        return check(_key_runner(c, t, on), sets=(on,), maps=t)

    if name in ("surjectivity", "bijectivity"):
        f = M[t[0]]
        dom = scheme.value_domain(f)

        def make(inst):
            g = mapping_getter(inst, f.name)
            key = _key_runner(c, t, f.domain)(inst)

            def run():
                out = []
                pop = inst.population(f.domain)
                if name == "bijectivity":
                    out += [_v(c, (x,), f"{f.name}({_show(x)}) is null") for x in pop if g(x) is None]
                    out += key()
                image = {g(x) for x in pop} - {None}
                targets = dom.members() if dom is not None else inst.population(f.codomain)
                cat = dom.category if dom is not None else "obj"
                out += [_v(c, (y,), f"{render_literal(y, cat) if dom else _show(y)} is not a value of {f.name}")
                        for y in targets if y not in image]
                return out
            return run
        co = () if dom is not None else (f.codomain,)
        return check(make, sets=(f.domain,) + co, maps=t)

    if name == "concatenated-key":
        return check(_key_runner(c, t, c.param("set")), sets=(c.param("set"),), maps=t)

    if name == "subkey":
        sub, guards = tuple(c.param("sub")), tuple(c.param("guards"))
        return check(_key_runner(c, sub, c.param("set"), restrict=guards, advise=False),
                     sets=(c.param("set"),), maps=t)

    if name in ("existence", "non-existence"):
        pattern = c.param("pattern")
        on = c.param("set")

        def make(inst):
            def lit(l):
                gs = [mapping_getter(inst, fn) for fn in l.components]
                if l.exists:
                    return lambda x: all(g(x) is not None for g in gs)
                return lambda x: all(g(x) is None for g in gs)

            ante = [lit(l) for l in pattern.antecedent]
            cons = [lit(l) for l in pattern.consequent]

            def run():
                return [_v(c, (x,), f"{c.id}: existence pattern fails for {_show(x)}")
                        for x in inst.population(on)
                        if all(a(x) for a in ante) and not all(q(x) for q in cons)]
            return run
        return check(make, sets=(on,), maps=t)

    if fam == "hbfp":
        f, g = M[t[0]], M[t[1]]

        def view(inst):
            fg, gg = mapping_getter(inst, f.name), mapping_getter(inst, g.name)
            return PairSet.of(inst.population(f.codomain),
                              ((fg(d), gg(d)) for d in inst.population(f.domain)), f"{f.name} & {g.name}")
        return check(_pairs_runner(c, view, k.prop), sets=(f.domain, f.codomain), maps=t)

    if fam == "self-map":
        return check(_self_map_runner(c, t, k.prop), sets=(M[t[0]].domain,), maps=t)

    if fam == "diagram" and k.prop is not None:
        path = tuple(c.param("path"))
        return check(_self_map_runner(c, path, k.prop), sets=(scheme.chain_source(path),), maps=path)

    if name in ("diagram-commutativity", "diagram-null-commutativity", "diagram-anti-commutativity"):
        left, right = tuple(c.param("left")), tuple(c.param("right"))
        source = scheme.chain_source(left)

        def make(inst):
            p, q = chain_getter(inst, left), chain_getter(inst, right)
            lt, rt = " o ".join(left), " o ".join(right)

            def bad(a, b):
                if name == "diagram-commutativity":
                    return a is None or b is None or a != b
                if a is None or b is None:
                    return False
                return a != b if name == "diagram-null-commutativity" else a == b

            def run():
                out = []
                for x in inst.population(source):
                    a, b = p(x), q(x)
                    if bad(a, b):
                        out.append(_v(c, (x, a, b), f"{c.id}: ({lt})({_show(x)}) = {_show(a)}, "
                                                    f"({rt})({_show(x)}) = {_show(b)}"))
                return out
            return run
        return check(make, sets=(source,), maps=left + right)

    if name in ("object", "diagram-general-commutativity"):
        f = c.param("formula")
        return check(_formula_runner(c, f), sets=[s for _, s in f.binders], maps=F.mappings_used(f))

    raise ValueError(f"no check for constraint kind {name}")


def _system_check(scheme: Scheme, sc: SystemConstraint) -> Check:
    if sc.axiom == "range":
        m = scheme.mapping[sc.targets[0]]
        dom = scheme.value_domain(m)

        def make(inst):
            vals = inst.values[m.name]

            def run():
                out = []
                for x, v in vals.items():
                    reason = dom.violation(v, inst.today)
                    if reason is not None:
                        out.append(Violation(sc.id, "range", (x,), f"{m.name}({_show(x)}): {reason}"))
                return out
            return run
        s, mm = _deps(scheme, (m.domain,), (m.name,))
        return Check(sc.id, "range", s, mm, make)
    if sc.axiom == "referential":
        m = scheme.mapping[sc.targets[0]]

        def make(inst):
            vals = inst.values[m.name]

            def run():
                target = set(inst.population(m.codomain))
                return [Violation(sc.id, "referential", (x, v), f"{m.name}({_show(x)}) = {_show(v)} "
                                                                f"is not an element of {m.codomain}")
                        for x, v in vals.items() if v not in target]
            return run
        s, mm = _deps(scheme, (m.domain, m.codomain), (m.name,))
        return Check(sc.id, "referential", s, mm, make)
    rel, roles = sc.targets[0], sc.targets[1:]

    def make(inst):
        getters = [inst.values[r].get for r in roles]

        def run():
            out, seen = [], {}
            for x in inst.population(rel):
                key = tuple(g(x) for g in getters)
                if any(k is None for k in key):
                    out.append(Violation(sc.id, "canonical-key", (x,), f"{rel} element {_show(x)} has a null projection"))
                    continue
                first = seen.setdefault(key, x)
                if first != x:
                    out.append(Violation(sc.id, "canonical-key", (first, x),
                                         f"{rel} elements {_show(first)} and {_show(x)} are the same tuple"))
            return out
        return run
    s, mm = _deps(scheme, (rel,), roles)
    return Check(sc.id, "canonical-key", s, mm, make)


# -- public API -------------------------------------------------------------

@dataclass
class Report:
    today: int
    violations: list
    advisories: list = field(default_factory=list)
    elsewhere: list = field(default_factory=list)  # (constraint id, note)

    @property
    def ok(self) -> bool:
        return not self.violations


class Engine:
    def __init__(self, scheme: Scheme):
        self.scheme = scheme
        self.checks = [_check_for(scheme, c) for c in scheme.constraints]
        self.checks += [_system_check(scheme, sc) for sc in scheme.system_constraints]

    def runners(self, inst: Instance) -> list:
        return [chk.make(inst) for chk in self.checks]

    def validate(self, inst: Instance) -> Report:
        results = [run() for run in self.runners(inst)]
        return self._report(inst, results)

    def _report(self, inst, results) -> Report:
        flat = [v for vs in results for v in vs]
        return Report(
            inst.today,
            [v for v in flat if not v.advisory],
            [v for v in flat if v.advisory],
            [(chk.id, chk.note) for chk in self.checks if chk.note],
        )

    def session(self, inst: Instance) -> "EagerSession":
        return EagerSession(self, inst)


class EagerSession:
    """Validate after every mutation, re-running only affected checks."""

    def __init__(self, engine: Engine, inst: Instance):
        self.engine = engine
        self.inst = inst
        self._runners = engine.runners(inst)
        self._results = [run() for run in self._runners]
        self.reruns = 0

    def _refresh(self, touched: Touched) -> None:
        for i, chk in enumerate(self.engine.checks):
            if chk.affected_by(touched):
                self._results[i] = self._runners[i]()
                self.reruns += 1

    def insert(self, set_name, assignments=None, id=None):
        eid = self.inst.insert(set_name, assignments, id)
        self._refresh(self.inst.touched_by_insert(set_name, assignments))
        return eid

    def update(self, set_name, id, assignments) -> None:
        self._refresh(self.inst.update(set_name, id, assignments))

    def delete(self, set_name, id, nullify=False) -> None:
        self._refresh(self.inst.delete(set_name, id, nullify))

    def report(self) -> Report:
        return self.engine._report(self.inst, self._results)

    def violations(self) -> list:
        return self.report().violations


def validate_eager(scheme: Scheme, source, today=None) -> Report:
    """Load a data document one mutation at a time through an eager session."""
    session = Engine(scheme).session(new_instance(scheme, today))
    load_data(session.inst, source, via=session)
    return session.report()


def validate_all(scheme: Scheme, inst: Instance, include_advisories: bool = False) -> list[Violation]:
    """Every violation, in scheme declaration order."""
    report = Engine(scheme).validate(inst)
    if include_advisories:
        return report.violations + report.advisories
    return report.violations


def relation_view(inst: Instance, targets) -> PairSet:
    """The PairSet carried by a dyadic relationship set, self-map or hbfp."""
    scheme = inst.scheme
    if isinstance(targets, str):
        targets = (targets,)
    if len(targets) == 1 and targets[0] in scheme.set:
        rel = scheme.set[targets[0]]
        comps = {c for _, c in rel.components}
        if rel.kind != "relationship" or len(rel.components) != 2 or len(comps) != 1:
            raise ValueError(f"{rel.name} is not a homogeneous dyadic relation")
        p1, p2 = [m.name for m in scheme.projections(rel.name)]
        a, b = inst.values[p1], inst.values[p2]
        return PairSet.of(inst.population(comps.pop()),
                          ((a.get(r), b.get(r)) for r in inst.population(rel.name)), rel.name)
    if len(targets) == 1:
        f = scheme.mapping[targets[0]]
        if f.codomain != f.domain:
            raise ValueError(f"{f.name} is not a self-map")
        g = mapping_getter(inst, f.name)
        u = inst.population(f.domain)
        return PairSet.of(u, ((x, g(x)) for x in u), f.name)
    f, g = scheme.mapping[targets[0]], scheme.mapping[targets[1]]
    if f.domain != g.domain or f.codomain != g.codomain or not isinstance(f.codomain, str):
        raise ValueError(f"{f.name} & {g.name} is not a homogeneous function product")
    fg, gg = mapping_getter(inst, f.name), mapping_getter(inst, g.name)
    return PairSet.of(inst.population(f.codomain),
                      ((fg(d), gg(d)) for d in inst.population(f.domain)), f"{f.name} & {g.name}")


def eval_formula(inst: Instance, f: F.Formula, cid: str = "formula") -> list[Violation]:
    """Violating bindings of a standalone formula."""
    c = ConstraintDecl(cid, KINDS["object"], (), {"formula": f})
    return _formula_runner(c, f)(inst)()
