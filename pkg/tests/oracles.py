"""Naive reference definitions, written independently of the package code."""
from itertools import product


def proper(pairs):
    return {(a, b) for a, b in pairs if a is not None and b is not None}


def reflexive(u, r):
    return all((x, x) in r for x in u)


def irreflexive(u, r):
    return all((x, x) not in r for x in u)


def symmetric(u, r):
    return all((y, x) in r for x, y in product(u, u) if (x, y) in r)


def asymmetric(u, r):
    return all(not ((x, y) in r and (y, x) in r) for x, y in product(u, u))


def transitive(u, r):
    return all((x, z) in r for x, y, z in product(u, u, u) if (x, y) in r and (y, z) in r)


def intransitive(u, r):
    return all((x, z) not in r for x, y, z in product(u, u, u) if (x, y) in r and (y, z) in r)


def euclidean(u, r):
    right = all((y, z) in r for x, y, z in product(u, u, u) if (x, y) in r and (x, z) in r)
    left = all((y, z) in r for x, y, z in product(u, u, u) if (y, x) in r and (z, x) in r)
    return right and left


def ineuclidean(u, r):
    right = all((y, z) not in r for x, y, z in product(u, u, u) if (x, y) in r and (x, z) in r)
    left = all((y, z) not in r for x, y, z in product(u, u, u) if (y, x) in r and (z, x) in r)
    return right and left


def equivalence(u, r):
    return reflexive(u, r) and symmetric(u, r) and transitive(u, r)


def acyclic(u, r):
    # a cycle exists iff some x reaches itself; powers of r up to |u|
    reach = set(r)
    for _ in range(len(u)):
        reach |= {(a, d) for a, b in reach for c, d in r if b == c}
    return all((x, x) not in reach for x in u)


def connected(u, r):
    return all((x, y) in r or (y, x) in r for x, y in product(u, u) if x != y)


PROPER = {
    "reflexive": reflexive, "irreflexive": irreflexive, "symmetric": symmetric,
    "asymmetric": asymmetric, "transitive": transitive, "intransitive": intransitive,
    "euclidean": euclidean, "ineuclidean": ineuclidean, "equivalence": equivalence,
    "acyclic": acyclic, "connected": connected,
}


def _esc(p, a, b):
    return (a, b) in p or (a, None) in p or (None, b) in p or (None, None) in p


def null_reflexive(u, p):
    return all(_esc(p, x, x) for x in u)


def null_symmetric(u, p):
    r = proper(p)
    return all(_esc(p, y, x) for x, y in product(u, u) if (x, y) in r)


def null_transitive(u, p):
    r = proper(p)
    return all(_esc(p, x, z) for x, y, z in product(u, u, u) if (x, y) in r and (y, z) in r)


def null_euclidean(u, p):
    r = proper(p)
    right = all(_esc(p, y, z) for x, y, z in product(u, u, u) if (x, y) in r and (x, z) in r)
    left = all(_esc(p, x, z) for x, y, z in product(u, u, u) if (x, y) in r and (z, y) in r)
    return right and left


def null_identity(u, p):
    return all(a == b for a, b in proper(p))


def null_equivalence(u, p):
    r = proper(p)
    return ((null_reflexive(u, p) and null_euclidean(u, p))
            or (reflexive(u, r) and null_euclidean(u, p))
            or (null_reflexive(u, p) and euclidean(u, r)))


NULL = {
    "null_reflexive": null_reflexive, "null_symmetric": null_symmetric,
    "null_transitive": null_transitive, "null_euclidean": null_euclidean,
    "null_identity": null_identity, "null_equivalence": null_equivalence,
}


def all_relations(u):
    cells = list(product(u, u))
    for mask in range(1 << len(cells)):
        yield {cells[i] for i in range(len(cells)) if mask >> i & 1}
