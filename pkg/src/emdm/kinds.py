"""The closed registry of explicit constraint kinds.

There are exactly 76 kinds split over eight families.  Property-style kinds
(dyadic relations, homogeneous binary function products, self-maps and local
diagram cycles) carry the name of the relational property they enforce, so
the engine and the meta analyzer can share one vocabulary.
"""
from __future__ import annotations

from dataclasses import dataclass

FAMILIES = (
    "set-general",
    "set-dyadic",
    "map-general",
    "map-product",
    "hbfp",
    "self-map",
    "diagram",
    "object",
)

SET_FAMILIES = ("set-general", "set-dyadic")
MAPPING_FAMILIES = ("map-general", "map-product", "hbfp", "self-map", "diagram")


@dataclass(frozen=True)
class ConstraintKind:
    name: str
    family: str
    fundamental: bool
    prop: str | None = None  # relational property checked, for property kinds

    def __str__(self) -> str:
        return self.name


# Properties of a binary relation (dyadic relation or hbfp image).
PAIR_PROPERTIES = (
    "reflexive",
    "irreflexive",
    "symmetric",
    "asymmetric",
    "transitive",
    "intransitive",
    "euclidean",
    "ineuclidean",
    "equivalence",
    "acyclic",
    "connected",
)
NULL_PAIR_PROPERTIES = (
    "null_identity",
    "null_reflexive",
    "null_symmetric",
    "null_transitive",
    "null_euclidean",
    "null_equivalence",
)
SELF_MAP_PROPERTIES = (
    "reflexive",
    "null_reflexive",
    "irreflexive",
    "symmetric",
    "null_symmetric",
    "asymmetric",
    "idempotent",
    "null_idempotent",
    "anti_idempotent",
    "representative",
    "null_representative",
    "acyclic",
    "equivalence",
    "null_equivalence",
)

_NOUNS = {
    "reflexive": "reflexivity",
    "irreflexive": "irreflexivity",
    "symmetric": "symmetry",
    "asymmetric": "asymmetry",
    "transitive": "transitivity",
    "intransitive": "intransitivity",
    "euclidean": "euclidean",
    "ineuclidean": "ineuclidean",
    "equivalence": "equivalence",
    "acyclic": "acyclicity",
    "connected": "connectivity",
    "null_identity": "null-identity",
    "null_reflexive": "null-reflexivity",
    "null_symmetric": "null-symmetry",
    "null_transitive": "null-transitivity",
    "null_euclidean": "null-euclidean",
    "null_equivalence": "null-equivalence",
    "idempotent": "idempotency",
    "null_idempotent": "null-idempotency",
    "anti_idempotent": "anti-idempotency",
    "representative": "representative-system",
    "null_representative": "null-representative-system",
}

# Local diagram kinds are named after commutativity where the literature does.
_LOCAL_NOUNS = dict(
    _NOUNS,
    reflexive="commutativity",
    null_reflexive="null-commutativity",
    irreflexive="anti-commutativity",
)

_HBFP_FUNDAMENTAL = (
    "connected",
    "reflexive",
    "null_identity",
    "irreflexive",
    "symmetric",
    "asymmetric",
    "transitive",
    "intransitive",
    "euclidean",
    "ineuclidean",
    "acyclic",
)
_HBFP_DERIVED = (
    "equivalence",
    "null_reflexive",
    "null_symmetric",
    "null_transitive",
    "null_euclidean",
    "null_equivalence",
)


def _build() -> tuple[ConstraintKind, ...]:
    kinds = []
    add = kinds.append
    add(ConstraintKind("inclusion", "set-general", True))
    for name in ("equality", "disjointness", "union", "direct-sum"):
        add(ConstraintKind(name, "set-general", False))
    for p in PAIR_PROPERTIES:
        add(ConstraintKind(f"dyadic-{_NOUNS[p]}", "set-dyadic", False, p))
    add(ConstraintKind("totality", "map-general", False))
    add(ConstraintKind("injectivity", "map-general", True))
    add(ConstraintKind("non-primeness", "map-general", True))
    add(ConstraintKind("surjectivity", "map-general", True))
    add(ConstraintKind("bijectivity", "map-general", False))
    add(ConstraintKind("default-value", "map-general", True))
    for name in ("concatenated-key", "subkey", "existence", "non-existence"):
        add(ConstraintKind(name, "map-product", True))
    for p in _HBFP_FUNDAMENTAL:
        add(ConstraintKind(f"hbfp-{_NOUNS[p]}", "hbfp", True, p))
    for p in _HBFP_DERIVED:
        add(ConstraintKind(f"hbfp-{_NOUNS[p]}", "hbfp", False, p))
    for p in SELF_MAP_PROPERTIES:
        add(ConstraintKind(f"selfmap-{_NOUNS[p]}", "self-map", False, p))
    add(ConstraintKind("diagram-commutativity", "diagram", True))
    add(ConstraintKind("diagram-null-commutativity", "diagram", False))
    add(ConstraintKind("diagram-anti-commutativity", "diagram", True))
    add(ConstraintKind("diagram-general-commutativity", "diagram", True))
    for p in SELF_MAP_PROPERTIES:
        add(ConstraintKind(f"diagram-local-{_LOCAL_NOUNS[p]}", "diagram", False, p))
    add(ConstraintKind("object", "object", True))
    return tuple(kinds)


_REGISTRY = _build()
KINDS: dict[str, ConstraintKind] = {k.name: k for k in _REGISTRY}


def kind_registry() -> list[ConstraintKind]:
    """All 76 kinds in a fixed order (families in declaration order)."""
    return list(_REGISTRY)


def kind(name: str) -> ConstraintKind:
    try:
        return KINDS[name]
    except KeyError:
        raise ValueError(f"unknown constraint kind {name!r}") from None


def property_kind(family: str, prop: str) -> ConstraintKind:
    """Look up the kind enforcing `prop` within a property family.

    `family` is one of set-dyadic, hbfp, self-map or "local" (the local
    diagram cycle kinds).
    """
    for k in _REGISTRY:
        if k.prop != prop:
            continue
        if family == "local":
            if k.family == "diagram":
                return k
        elif k.family == family:
            return k
    raise ValueError(f"no {family} constraint kind for property {prop!r}")


def family_properties(family: str) -> tuple[str, ...]:
    if family == "set-dyadic":
        return PAIR_PROPERTIES
    if family == "hbfp":
        return PAIR_PROPERTIES + NULL_PAIR_PROPERTIES
    if family in ("self-map", "local"):
        return SELF_MAP_PROPERTIES
    raise ValueError(f"family {family!r} has no property kinds")
