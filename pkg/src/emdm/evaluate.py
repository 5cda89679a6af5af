"""Compile terms and conditions into closures over a live instance.

Terms evaluate to a value or None (the null marker); any null operand makes
mapping application, composition and arithmetic null.  Conditions evaluate
in three-valued logic: True, False or None (unknown).  A comparison with a
null side is unknown; only null tests observe nulls directly.  A formula is
violated by a binding exactly when its body is False.
"""
from __future__ import annotations

import operator
from decimal import Decimal

from . import formula as F
from .scheme import Composition, Lambda

_CMP = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


def _div(a, b):
    if b == 0:
        return None
    if isinstance(a, int) and isinstance(b, int):
        return a // b
    return Decimal(a) / Decimal(b)


_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": _div}


def mapping_getter(inst, name: str):
    """A one-argument function computing mapping `name` on an element id."""
    m = inst.scheme.mapping[name]
    d = m.definition
    if d is None:
        vals = inst.values[name]
        return vals.get
    if isinstance(d, Composition):
        return chain_getter(inst, d.chain)
    body = compile_term(inst, d.term, {d.var: 0})

    def computed(x):
        return body([x])

    return computed


def chain_getter(inst, chain):
    """(f1 o ... o fk) as a null-propagating function."""
    getters = [mapping_getter(inst, fn) for fn in reversed(chain)]
    if len(getters) == 1:
        return getters[0]

    def path(x):
        for g in getters:
            if x is None:
                return None
            x = g(x)
        return x

    return path


def compile_term(inst, t, slots: dict[str, int]):
    if isinstance(t, F.Var):
        i = slots[t.name]
        return lambda env: env[i]
    if isinstance(t, F.Lit):
        v = t.value
        return lambda env: v
    if isinstance(t, F.Apply):
        g = mapping_getter(inst, t.fn)
        arg = compile_term(inst, t.arg, slots)

        def apply(env):
            a = arg(env)
            return None if a is None else g(a)

        return apply
    if isinstance(t, F.Arith):
        op = _ARITH[t.op]
        left, right = compile_term(inst, t.left, slots), compile_term(inst, t.right, slots)

        def arith(env):
            a = left(env)
            if a is None:
                return None
            b = right(env)
            if b is None:
                return None
            return op(a, b)

        return arith
    if isinstance(t, F.Call):
        args = [compile_term(inst, a, slots) for a in t.args]
        return _builtin(inst, t.name, args)
    raise TypeError(f"not a term: {t!r}")


def _builtin(inst, name, args):
    if name == "Today":
        return lambda env: inst.today

    def call(env):
        vals = [a(env) for a in args]
        if any(v is None for v in vals):
            return None
        s = vals[0]
        if name == "Len":
            return len(s)
        n = vals[1]
        if name == "Left":
            return s[:max(n, 0)]
        if name == "Right":
            return s[len(s) - n:] if n > 0 else ""
        start, count = vals[1], vals[2]
        return s[max(start - 1, 0):max(start - 1 + count, 0)]

    return call


def compile_cond(inst, c, slots: dict[str, int]):
    if isinstance(c, F.Cmp):
        op = _CMP[c.op]
        left, right = compile_term(inst, c.left, slots), compile_term(inst, c.right, slots)

        def cmp(env):
            a = left(env)
            if a is None:
                return None
            b = right(env)
            if b is None:
                return None
            return op(a, b)

        return cmp
    if isinstance(c, F.NullTest):
        term = compile_term(inst, c.term, slots)
        if c.is_null:
            return lambda env: term(env) is None
        return lambda env: term(env) is not None
    if isinstance(c, F.Not):
        inner = compile_cond(inst, c.item, slots)

        def neg(env):
            v = inner(env)
            return None if v is None else not v

        return neg
    if isinstance(c, F.And):
        items = [compile_cond(inst, i, slots) for i in c.items]

        def conj(env):
            result = True
            for item in items:
                v = item(env)
                if v is False:
                    return False
                if v is None:
                    result = None
            return result

        return conj
    if isinstance(c, F.Or):
        items = [compile_cond(inst, i, slots) for i in c.items]

        def disj(env):
            result = False
            for item in items:
                v = item(env)
                if v is True:
                    return True
                if v is None:
                    result = None
            return result

        return disj
    if isinstance(c, F.Implies):
        ante, cons = compile_cond(inst, c.ante, slots), compile_cond(inst, c.cons, slots)

        def implies(env):
            a = ante(env)
            if a is False:
                return True
            b = cons(env)
            if b is True:
                return True
            if a is True and b is False:
                return False
            return None

        return implies
    raise TypeError(f"not a condition: {c!r}")


def eval_term(inst, t, binding: dict[str, object] | None = None):
    binding = binding or {}
    slots = {v: i for i, v in enumerate(binding)}
    return compile_term(inst, t, slots)(list(binding.values()))


def eval_cond(inst, c, binding: dict[str, object] | None = None):
    binding = binding or {}
    slots = {v: i for i, v in enumerate(binding)}
    return compile_cond(inst, c, slots)(list(binding.values()))


def computed_set(inst, name: str) -> list:
    """Members of the computed set `name`, in base population order."""
    d = inst.scheme.set[name].definition
    pred = compile_cond(inst, d.predicate, {d.var: 0})
    return [x for x in inst.population(d.base) if pred([x]) is True]
