"""Binary relation properties over one carrier, shared by three targets.

Dyadic relationship sets, self-map graphs and homogeneous function products
all reduce to a PairSet: ordered pairs over a universe where either side may
be None.  Non-null properties look only at null-free pairs; the null
variants also consult pairs with null sides.

Each checker returns a list of witness tuples; an empty list means the
property holds.
"""
from __future__ import annotations

from dataclasses import dataclass

from .kinds import NULL_PAIR_PROPERTIES, PAIR_PROPERTIES, SELF_MAP_PROPERTIES


@dataclass(frozen=True)
class PairSet:
    universe: tuple
    pairs: frozenset
    origin: str = ""

    @classmethod
    def of(cls, universe, pairs, origin=""):
        return cls(tuple(dict.fromkeys(universe)), frozenset(pairs), origin)

    @property
    def proper(self) -> frozenset:
        """Pairs with both sides non-null."""
        return frozenset(p for p in self.pairs if p[0] is not None and p[1] is not None)


def _index(pairs):
    succ: dict = {}
    pred: dict = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
        pred.setdefault(b, set()).add(a)
    return succ, pred


def _sorted(items):
    return sorted(items, key=repr)


def find_cycles(succ: dict) -> list[tuple]:
    """One witness cycle per back edge found by an iterative DFS (linear time)."""
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict = {}
    cycles = []
    for root in _sorted(succ):
        if color.get(root, WHITE) != WHITE:
            continue
        stack = [(root, iter(_sorted(succ.get(root, ()))))]
        path = [root]
        on_path = {root: 0}
        color[root] = GREY
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                on_path.pop(node, None)
                color[node] = BLACK
                continue
            c = color.get(nxt, WHITE)
            if c == GREY:
                cycles.append(tuple(path[on_path[nxt]:]))
            elif c == WHITE:
                color[nxt] = GREY
                on_path[nxt] = len(path)
                path.append(nxt)
                stack.append((nxt, iter(_sorted(succ.get(nxt, ())))))
    return cycles


def _reflexive(u, r, succ, pred):
    return [(x,) for x in u if (x, x) not in r]


def _irreflexive(u, r, succ, pred):
    return [(a,) for a, b in _sorted(r) if a == b]


def _symmetric(u, r, succ, pred):
    return [(a, b) for a, b in _sorted(r) if (b, a) not in r]


def _asymmetric(u, r, succ, pred):
    return [(a, b) for a, b in _sorted(r) if (b, a) in r]


def _transitive(u, r, succ, pred):
    out = []
    for x, y in _sorted(r):
        for z in _sorted(succ.get(y, ())):
            if (x, z) not in r:
                out.append((x, y, z))
    return out


def _intransitive(u, r, succ, pred):
    out = []
    for x, y in _sorted(r):
        for z in _sorted(succ.get(y, ())):
            if (x, z) in r:
                out.append((x, y, z))
    return out


def _euclidean(u, r, succ, pred):
    # right: xRy, xRz => yRz; left: yRx, zRx => yRz
    out = []
    for x in _sorted(succ):
        ys = _sorted(succ[x])
        for y in ys:
            for z in ys:
                if (y, z) not in r:
                    out.append(("right", x, y, z))
    for x in _sorted(pred):
        ys = _sorted(pred[x])
        for y in ys:
            for z in ys:
                if (y, z) not in r:
                    out.append(("left", x, y, z))
    return out


def _ineuclidean(u, r, succ, pred):
    out = []
    for x in _sorted(succ):
        ys = _sorted(succ[x])
        for y in ys:
            for z in ys:
                if (y, z) in r:
                    out.append(("right", x, y, z))
    for x in _sorted(pred):
        ys = _sorted(pred[x])
        for y in ys:
            for z in ys:
                if (y, z) in r:
                    out.append(("left", x, y, z))
    return out


def _equivalence(u, r, succ, pred):
    return (_reflexive(u, r, succ, pred) + _symmetric(u, r, succ, pred)
            + _transitive(u, r, succ, pred))


def _acyclic(u, r, succ, pred):
    return find_cycles(succ)


def _connected(u, r, succ, pred):
    out = []
    for i, x in enumerate(u):
        for y in u[i + 1:]:
            if x != y and (x, y) not in r and (y, x) not in r:
                out.append((x, y))
    return out


_PROPER_CHECKS = {
    "reflexive": _reflexive,
    "irreflexive": _irreflexive,
    "symmetric": _symmetric,
    "asymmetric": _asymmetric,
    "transitive": _transitive,
    "intransitive": _intransitive,
    "euclidean": _euclidean,
    "ineuclidean": _ineuclidean,
    "equivalence": _equivalence,
    "acyclic": _acyclic,
    "connected": _connected,
}


def _null_escape(p, a, b) -> bool:
    """(a, b) present, or (a, null), (null, b), (null, null)."""
    return (a, b) in p or (a, None) in p or (None, b) in p or (None, None) in p


def _null_checks(prop, view: PairSet):
    p, r = view.pairs, view.proper
    succ, pred = _index(r)
    if prop == "null_identity":
        return [(a, b) for a, b in _sorted(r) if a != b]
    if prop == "null_reflexive":
        return [(x,) for x in view.universe if not _null_escape(p, x, x)]
    if prop == "null_symmetric":
        return [(a, b) for a, b in _sorted(r) if not _null_escape(p, b, a)]
    if prop == "null_transitive":
        return [(x, y, z) for x, y in _sorted(r) for z in _sorted(succ.get(y, ()))
                if not _null_escape(p, x, z)]
    if prop == "null_euclidean":
        out = []
        for x in _sorted(succ):
            ys = _sorted(succ[x])
            out += [("right", x, y, z) for y in ys for z in ys if not _null_escape(p, y, z)]
        for y in _sorted(pred):
            xs = _sorted(pred[y])
            out += [("left", y, x, z) for x in xs for z in xs if not _null_escape(p, x, z)]
        return out
    if prop == "null_equivalence":
        # each disjunct of the definition reduces to null-reflexive and null-Euclidean
        return _null_checks("null_reflexive", view) + _null_checks("null_euclidean", view)
    raise ValueError(f"unknown pair property {prop!r}")


def check_pair_property(view: PairSet, prop: str) -> list[tuple]:
    """Witnesses against `prop` on `view`; empty when it holds."""
    if prop in _PROPER_CHECKS:
        r = view.proper
        succ, pred = _index(r)
        return _PROPER_CHECKS[prop](view.universe, r, succ, pred)
    if prop in NULL_PAIR_PROPERTIES:
        return _null_checks(prop, view)
    raise ValueError(f"{prop!r} is not a pair property")


def holds(view: PairSet, prop: str) -> bool:
    return not check_pair_property(view, prop)


def witness_valid(view: PairSet, prop: str, w: tuple) -> bool:
    """Re-check a single witness directly against the definition."""
    p, r, u = view.pairs, view.proper, set(view.universe)
    if prop == "reflexive":
        return w[0] in u and (w[0], w[0]) not in r
    if prop == "irreflexive":
        return (w[0], w[0]) in r
    if prop == "symmetric":
        return (w[0], w[1]) in r and (w[1], w[0]) not in r
    if prop == "asymmetric":
        return (w[0], w[1]) in r and (w[1], w[0]) in r
    if prop in ("transitive", "intransitive"):
        x, y, z = w
        base = (x, y) in r and (y, z) in r
        return base and (((x, z) not in r) if prop == "transitive" else ((x, z) in r))
    if prop in ("euclidean", "ineuclidean"):
        side, x, y, z = w
        base = ((x, y) in r and (x, z) in r) if side == "right" else ((y, x) in r and (z, x) in r)
        return base and (((y, z) not in r) if prop == "euclidean" else ((y, z) in r))
    if prop == "equivalence":
        return any(witness_valid(view, q, w) for q in ("reflexive", "symmetric", "transitive")
                   if len(w) == {"reflexive": 1, "symmetric": 2, "transitive": 3}[q])
    if prop == "acyclic":
        return len(w) >= 1 and all((w[i], w[(i + 1) % len(w)]) in r for i in range(len(w)))
    if prop == "connected":
        x, y = w
        return x in u and y in u and x != y and (x, y) not in r and (y, x) not in r
    raise ValueError(f"no witness check for {prop!r}")


# -- self-maps ---------------------------------------------------------------

def graph_view(universe, f: dict, origin="") -> PairSet:
    """Graph {(x, f(x))} of a partial function given as a dict (missing = null)."""
    return PairSet.of(universe, ((x, f.get(x)) for x in universe), origin)


def check_self_map(universe, f: dict, prop: str) -> list[tuple]:
    """Witnesses against self-map property `prop` of f over `universe`.

    `f` maps element ids to element ids; a missing key or None means null.
    """
    if prop not in SELF_MAP_PROPERTIES:
        raise ValueError(f"{prop!r} is not a self-map property")
    get = f.get
    u = list(universe)
    out = []
    if prop == "reflexive":
        out = [(x,) for x in u if get(x) != x]
    elif prop == "null_reflexive":
        out = [(x,) for x in u if get(x) is not None and get(x) != x]
    elif prop == "irreflexive":
        out = [(x,) for x in u if get(x) == x]
    elif prop == "symmetric":
        out = [(x,) for x in u if get(x) is None or get(get(x)) != x]
    elif prop == "null_symmetric":
        for x in u:
            y = get(x)
            if y is not None and get(y) is not None and get(y) != x:
                out.append((x, y))
    elif prop == "asymmetric":
        for x in u:
            y = get(x)
            if y is not None and get(y) == x:
                out.append((x, y))
    elif prop in ("idempotent", "representative"):
        out = [(x,) for x in u if get(x) is None or get(get(x)) != get(x)]
    elif prop == "null_idempotent":
        for x in u:
            y = get(x)
            if y is not None and get(y) is not None and get(y) != y:
                out.append((x, y))
    elif prop == "anti_idempotent":
        for x in u:
            y = get(x)
            if y is not None and get(y) is not None and get(y) == y:
                out.append((x, y))
    elif prop == "null_representative":
        image = _sorted({get(x) for x in u} - {None})
        out = [(y,) for y in image if get(y) is not None and get(y) != y]
    elif prop == "acyclic":
        out = _functional_cycles(u, get)
    elif prop == "equivalence":
        out = check_pair_property(graph_view(u, f), "equivalence")
    elif prop == "null_equivalence":
        out = check_pair_property(graph_view(u, f), "null_equivalence")
    return out


def _functional_cycles(universe, get) -> list[tuple]:
    """Cycles of a partial function, each reported once; linear time."""
    state: dict = {}  # 1 = on current walk, 2 = finished
    cycles = []
    for start in universe:
        if start in state:
            continue
        walk, pos = [], {}
        x = start
        while x is not None and x not in state:
            state[x] = 1
            pos[x] = len(walk)
            walk.append(x)
            x = get(x)
        if x is not None and state.get(x) == 1:
            cycles.append(tuple(walk[pos[x]:]))
        for y in walk:
            state[y] = 2
    return cycles


ALL_PAIR_PROPERTIES = PAIR_PROPERTIES + NULL_PAIR_PROPERTIES
