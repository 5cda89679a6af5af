"""Abstract syntax of closed Horn-clause formulas and their terms.

A formula is a block of universal quantifiers over declared sets followed by
a propositional body over atoms.  Atoms compare terms or test null status.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

BUILTINS = {"Today": 0, "Len": 1, "Left": 2, "Right": 2, "Mid": 3}
COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*", "/")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: object
    category: str  # num | text | date | bool


@dataclass(frozen=True)
class Apply:
    fn: str
    arg: "Term"


@dataclass(frozen=True)
class Arith:
    op: str
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Term = Union[Var, Lit, Apply, Arith, Call]


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Term
    right: Term


@dataclass(frozen=True)
class NullTest:
    term: Term
    is_null: bool


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


@dataclass(frozen=True)
class Not:
    item: "Cond"


@dataclass(frozen=True)
class Implies:
    ante: "Cond"
    cons: "Cond"


Cond = Union[Cmp, NullTest, And, Or, Not, Implies]


@dataclass(frozen=True)
class Formula:
    binders: tuple  # ((var, set name), ...) outermost first
    body: Cond

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.binders)


def apply_chain(chain: tuple[str, ...], arg: Term) -> Term:
    """(f1 o f2 o ... o fk)(arg) as nested applications."""
    for fn in reversed(chain):
        arg = Apply(fn, arg)
    return arg


def subterms(node):
    """Yield every term and condition node below (and including) `node`."""
    yield node
    if isinstance(node, Apply):
        yield from subterms(node.arg)
    elif isinstance(node, (Arith, Cmp)):
        yield from subterms(node.left)
        yield from subterms(node.right)
    elif isinstance(node, Call):
        for a in node.args:
            yield from subterms(a)
    elif isinstance(node, NullTest):
        yield from subterms(node.term)
    elif isinstance(node, (And, Or)):
        for item in node.items:
            yield from subterms(item)
    elif isinstance(node, Not):
        yield from subterms(node.item)
    elif isinstance(node, Implies):
        yield from subterms(node.ante)
        yield from subterms(node.cons)
    elif isinstance(node, Formula):
        yield from subterms(node.body)


def mappings_used(node) -> list[str]:
    seen: dict[str, None] = {}
    for sub in subterms(node):
        if isinstance(sub, Apply):
            seen.setdefault(sub.fn)
    return list(seen)


def variables_used(node) -> set[str]:
    return {sub.name for sub in subterms(node) if isinstance(sub, Var)}


def uses_today(node) -> bool:
    return any(isinstance(sub, Call) and sub.name == "Today" for sub in subterms(node))


def normalize(formula: Formula) -> Formula:
    """Canonical form for syntactic comparison.

    Bound variables are renamed positionally, nested conjunctions and
    disjunctions are flattened and their operands sorted.
    """
    renaming = {v: f"_v{i}" for i, (v, _) in enumerate(formula.binders)}

    def term(t):
        if isinstance(t, Var):
            return Var(renaming.get(t.name, t.name))
        if isinstance(t, Apply):
            return Apply(t.fn, term(t.arg))
        if isinstance(t, Arith):
            return Arith(t.op, term(t.left), term(t.right))
        if isinstance(t, Call):
            return Call(t.name, tuple(term(a) for a in t.args))
        return t

    def cond(c):
        if isinstance(c, Cmp):
            left, right = term(c.left), term(c.right)
            op = c.op
            if op in (">", ">="):
                op, left, right = {">": "<", ">=": "<="}[op], right, left
            elif op in ("=", "!=") and repr(right) < repr(left):
                left, right = right, left
            return Cmp(op, left, right)
        if isinstance(c, NullTest):
            return NullTest(term(c.term), c.is_null)
        if isinstance(c, (And, Or)):
            flat = []
            for item in (cond(i) for i in c.items):
                if type(item) is type(c):
                    flat.extend(item.items)
                else:
                    flat.append(item)
            flat = sorted(set(flat), key=repr)
            return flat[0] if len(flat) == 1 else type(c)(tuple(flat))
        if isinstance(c, Not):
            return Not(cond(c.item))
        return Implies(cond(c.ante), cond(c.cons))

    binders = tuple((renaming[v], s) for v, s in formula.binders)
    return Formula(binders, cond(formula.body))
