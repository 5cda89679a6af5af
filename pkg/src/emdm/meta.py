"""Scheme-level analysis: coherence and minimality of declared constraints.

Properties declared on the same target (a dyadic relation, a mapping, a
function product or a cyclic diagram path) are closed under a fixed rule
table.  A triggered incompatibility makes the scheme incoherent; a declared
property derivable from the others is redundant.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .formula import normalize
from .kinds import NULL_PAIR_PROPERTIES, PAIR_PROPERTIES, SELF_MAP_PROPERTIES
from .scheme import Scheme

MAPPING_PROPERTIES = ("total", "injective", "surjective", "bijective", "nonprime")
VOCABULARY = tuple(dict.fromkeys(PAIR_PROPERTIES + NULL_PAIR_PROPERTIES + SELF_MAP_PROPERTIES
                                 + MAPPING_PROPERTIES))

_GENERAL = {"totality": "total", "injectivity": "injective", "surjectivity": "surjective",
            "bijectivity": "bijective", "non-primeness": "nonprime"}


@dataclass(frozen=True)
class PropertyRule:
    name: str
    kind: str  # implication | incompatibility
    premise: frozenset
    conclusion: str | None = None
    advisory: bool = False


def _imp(premise, conclusion):
    premise = frozenset([premise] if isinstance(premise, str) else premise)
    name = f"{' & '.join(sorted(premise))} => {conclusion}"
    return PropertyRule(name, "implication", premise, conclusion)


def _inc(*props, advisory=False):
    return PropertyRule(f"incompatible({', '.join(props)})", "incompatibility", frozenset(props), None, advisory)


IMPLICATIONS = (
    _imp("acyclic", "asymmetric"),
    _imp("asymmetric", "irreflexive"),
    _imp("intransitive", "irreflexive"),
    _imp("ineuclidean", "irreflexive"),
    _imp(("reflexive", "euclidean"), "equivalence"),
    _imp("equivalence", "reflexive"),
    _imp("equivalence", "symmetric"),
    _imp("equivalence", "transitive"),
    _imp("equivalence", "euclidean"),
    _imp("reflexive", "null_reflexive"),
    _imp("symmetric", "null_symmetric"),
    _imp("transitive", "null_transitive"),
    _imp("euclidean", "null_euclidean"),
    _imp("equivalence", "null_equivalence"),
    _imp("idempotent", "null_idempotent"),
    _imp("representative", "null_representative"),
    _imp(("injective", "surjective", "total"), "bijective"),
    _imp("bijective", "injective"),
    _imp("bijective", "surjective"),
    _imp("bijective", "total"),
)

INCOMPATIBILITIES = (
    _inc("reflexive", "irreflexive"),
    _inc("symmetric", "asymmetric"),
    _inc("transitive", "intransitive"),
    _inc("euclidean", "ineuclidean"),
    _inc("acyclic", "reflexive"),
    _inc("acyclic", "symmetric"),
    _inc("connected", "asymmetric", advisory=True),
    _inc("equivalence", "irreflexive"),
    _inc("equivalence", "asymmetric"),
    _inc("equivalence", "intransitive"),
    _inc("equivalence", "ineuclidean"),
    _inc("equivalence", "acyclic"),
)

# rules that are not about property sets
NONPRIME_KEY = "nonprime-in-key"
NONPRIME_INJECTIVE = "nonprime-injective"
DUPLICATE_FORMULA = "duplicate-formula"
CURATED_OVERLAP = "curated-overlap"

RULES = {r.name: r for r in IMPLICATIONS + INCOMPATIBILITIES}
RULE_NAMES = frozenset(RULES) | {NONPRIME_KEY, NONPRIME_INJECTIVE, DUPLICATE_FORMULA, CURATED_OVERLAP}


@dataclass(frozen=True)
class MetaFinding:
    severity: str  # incoherent | redundant | advisory
    constraints: tuple
    rule: str
    message: str

    def to_json(self) -> dict:
        return {"severity": self.severity, "constraints": list(self.constraints),
                "rule": self.rule, "message": self.message}


def _closure_with_sources(declared) -> dict[str, PropertyRule | None]:
    """Least fixed point; maps each property to the rule that first derived it."""
    unknown = set(declared) - set(VOCABULARY)
    if unknown:
        raise ValueError(f"unknown properties: {', '.join(sorted(unknown))}")
    out: dict[str, PropertyRule | None] = {p: None for p in declared}
    changed = True
    while changed:
        changed = False
        for rule in IMPLICATIONS:
            if rule.conclusion not in out and rule.premise <= out.keys():
                out[rule.conclusion] = rule
                changed = True
    return out


def property_closure(declared) -> frozenset:
    return frozenset(_closure_with_sources(declared))


def _targets(scheme: Scheme) -> dict:
    """Target key -> {property: [constraint ids]} for every property-style constraint."""
    groups: dict = {}
    for c in scheme.constraints:
        k = c.kind
        if k.family == "set-dyadic":
            key = ("relation", c.targets[0])
        elif k.family in ("self-map",):
            key = ("mapping", c.targets[0])
        elif k.family == "hbfp":
            key = ("product", " & ".join(c.targets))
        elif k.family == "diagram" and k.prop is not None:
            key = ("path", " o ".join(c.param("path")))
        elif k.name in _GENERAL:
            key = ("mapping", c.targets[0])
            groups.setdefault(key, {}).setdefault(_GENERAL[k.name], []).append(c.id)
            continue
        else:
            continue
        groups.setdefault(key, {}).setdefault(k.prop, []).append(c.id)
    return groups


def _ids(props: dict, names) -> tuple:
    return tuple(cid for p in sorted(names) for cid in props.get(p, ()))


def check_coherence(scheme: Scheme) -> list[MetaFinding]:
    findings = []
    for (kind, target), props in _targets(scheme).items():
        declared = set(props)
        closure = property_closure(declared)
        triggered = [r for r in INCOMPATIBILITIES if r.premise <= closure]
        direct = [r for r in triggered if r.premise <= declared]
        # an advisory pair declared outright must not hide a derived hard conflict
        derived = [r for r in triggered if r not in direct
                   and not any(d.advisory == r.advisory for d in direct)]
        for r in direct + derived:
            involved = _ids(props, r.premise & declared) or _ids(props, declared)
            how = "declared" if r.premise <= declared else "implied by the declared properties"
            findings.append(MetaFinding(
                "advisory" if r.advisory else "incoherent", involved, r.name,
                f"{kind} {target}: {', '.join(sorted(r.premise))} cannot hold together ({how})"))
    return findings


def check_minimality(scheme: Scheme, overlaps=()) -> list[MetaFinding]:
    """Redundant declarations.

    `overlaps` lists curated (constraint ids, note) pairs for object
    constraints known to overlap semantically; they are reported as advisory.
    """
    findings = []
    for (kind, target), props in _targets(scheme).items():
        declared = set(props)
        for p in sorted(declared, key=VOCABULARY.index):
            rest = _closure_with_sources(declared - {p})
            if p in rest:
                rule = rest[p]
                premise = sorted(rule.premise)
                findings.append(MetaFinding(
                    "redundant", tuple(props[p]), rule.name,
                    f"{kind} {target}: {p} follows from {', '.join(premise)}"))
    seen: dict = {}
    for c in scheme.constraints:
        if c.kind.name not in ("object", "diagram-general-commutativity"):
            continue
        key = normalize(c.param("formula"))
        if key in seen:
            findings.append(MetaFinding("redundant", (c.id, seen[key]), DUPLICATE_FORMULA,
                                        f"{c.id} is the same formula as {seen[key]}"))
        else:
            seen[key] = c.id
    for ids, note in overlaps:
        findings.append(MetaFinding("advisory", tuple(ids), CURATED_OVERLAP, note))
    return findings


def check_nonprime_usage(scheme: Scheme) -> list[MetaFinding]:
    nonprime = {c.targets[0]: c.id for c in scheme.constraints if c.kind.name == "non-primeness"}
    findings = []
    for c in scheme.constraints:
        k = c.kind.name
        if k in ("injectivity", "concatenated-key", "subkey"):
            comps = c.param("sub", ()) + tuple(c.targets) if k == "subkey" else tuple(c.targets)
            for fn in dict.fromkeys(comps):
                if fn in nonprime:
                    rule = NONPRIME_INJECTIVE if k == "injectivity" and len(c.targets) == 1 else NONPRIME_KEY
                    findings.append(MetaFinding("incoherent", (nonprime[fn], c.id), rule,
                                                f"non-prime mapping {fn} is used in key {c.id}"))
        elif k == "bijectivity" and c.targets[0] in nonprime:
            findings.append(MetaFinding("incoherent", (nonprime[c.targets[0]], c.id), NONPRIME_INJECTIVE,
                                        f"non-prime mapping {c.targets[0]} is declared bijective"))
    return findings


def analyze(scheme: Scheme, overlaps=()) -> list[MetaFinding]:
    return check_coherence(scheme) + check_nonprime_usage(scheme) + check_minimality(scheme, overlaps)


def findings_json(findings) -> str:
    return json.dumps([f.to_json() for f in findings], indent=2) + "\n"
