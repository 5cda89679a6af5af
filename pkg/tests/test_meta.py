import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdm.demo.familytree import CURATED_OVERLAPS
from emdm.dsl import parse_scheme
from emdm.engine import Engine
from emdm.kinds import NULL_PAIR_PROPERTIES, PAIR_PROPERTIES, SELF_MAP_PROPERTIES
from emdm.meta import (
    IMPLICATIONS, INCOMPATIBILITIES, VOCABULARY, analyze, check_coherence, check_minimality,
    check_nonprime_usage, property_closure,
)
from emdm.relations import PairSet, check_self_map, holds
from emdm.store import new_instance

import oracles

HEAD = "scheme M;\nset P: entity;\nset Q: entity;\nmap F: Q -> P;\nmap G: Q -> P;\n"


def mother(*props):
    return parse_scheme(HEAD + f"map Mother: P -> P, {', '.join(props)};\n")


def test_acyclic_asymmetric_irreflexive_gives_two_redundancies():
    findings = analyze(mother("acyclic", "asymmetric", "irreflexive"))
    assert [(f.severity, f.constraints, f.rule) for f in findings] == [
        ("redundant", ("Mother.irreflexive",), "asymmetric => irreflexive"),
        ("redundant", ("Mother.asymmetric",), "acyclic => asymmetric"),
    ]


@pytest.mark.parametrize("other", ["reflexive", "symmetric"])
def test_acyclic_with_reflexive_or_symmetric_is_incoherent(other):
    findings = check_coherence(mother("acyclic", other))
    assert len(findings) == 1
    assert findings[0].severity == "incoherent"
    assert set(findings[0].constraints) == {"Mother.acyclic", f"Mother.{other}"}


def test_family_scheme_is_coherent_and_minimal(family):
    assert analyze(family) == []
    curated = check_minimality(family, CURATED_OVERLAPS)
    assert {f.constraints for f in curated} == {("C16", "C3"), ("C17", "C3")}
    assert all(f.severity == "advisory" for f in curated)


def test_closure_examples():
    assert property_closure({"acyclic"}) >= {"acyclic", "asymmetric", "irreflexive"}
    assert property_closure({"reflexive", "euclidean"}) >= {"equivalence", "symmetric", "transitive"}
    assert "bijective" in property_closure({"injective", "surjective", "total"})
    with pytest.raises(ValueError):
        property_closure({"sparkly"})


vocab_sets = st.frozensets(st.sampled_from(VOCABULARY))


@settings(max_examples=1000)
@given(vocab_sets, vocab_sets)
def test_closure_is_a_closure_operator(a, b):
    ca = property_closure(a)
    assert a <= ca
    assert property_closure(ca) == ca
    assert property_closure(a | b) >= ca


def test_derived_incoherence_is_reported():
    # reflexive and euclidean imply equivalence, which clashes with asymmetric
    s = parse_scheme(HEAD + "set R: relationship(P, P);\n"
                     "constraint A: R is reflexive;\nconstraint B: R is euclidean;\n"
                     "constraint C: R is asymmetric;\n")
    findings = check_coherence(s)
    assert {f.rule for f in findings} >= {"incompatible(equivalence, asymmetric)",
                                          "incompatible(symmetric, asymmetric)"}
    assert all(f.severity == "incoherent" and "implied" in f.message for f in findings)


def test_connected_asymmetric_is_only_advisory():
    s = parse_scheme(HEAD + "set R: relationship(P, P);\n"
                     "constraint A: R is connected;\nconstraint B: R is asymmetric;\n")
    (f,) = check_coherence(s)
    assert f.severity == "advisory"


def test_duplicate_formulas():
    s = parse_scheme(HEAD + "map A: P -> INT(2);\n"
                     "constraint X: formula forall x in P (A(x) > 1);\n"
                     "constraint Y: formula forall y in P (1 < A(y));\n")
    (f,) = check_minimality(s)
    assert f.constraints == ("Y", "X") and f.severity == "redundant"


def test_nonprime_in_key():
    s = parse_scheme(HEAD + "map A: P -> INT(2), nonprime;\nmap B: P -> INT(2);\n"
                     "constraint K: key (A, B) on P;\n")
    (f,) = check_nonprime_usage(s)
    assert f.constraints == ("A.nonprime", "K") and f.severity == "incoherent"
    s2 = parse_scheme(HEAD + "map A: P -> INT(2), nonprime, key;\n")
    assert [f.rule for f in check_nonprime_usage(s2)] == ["nonprime-injective"]


# -- every implication holds on data ------------------------------------------

def _random_pairset(rng):
    n = rng.randint(1, 5)
    u = tuple(range(n))
    style = rng.randrange(5)
    if style == 0:  # partition: an equivalence
        block = {x: rng.randrange(n) for x in u}
        pairs = {(a, b) for a in u for b in u if block[a] == block[b]}
    elif style == 1:  # forward edges only: acyclic
        pairs = {(a, b) for a in u for b in u if a < b and rng.random() < 0.5}
    elif style == 2:  # symmetric
        base = {(a, b) for a in u for b in u if rng.random() < 0.4}
        pairs = base | {(b, a) for a, b in base}
    else:
        density = rng.random()
        pairs = {(a, b) for a in u for b in u if rng.random() < density}
    if rng.random() < 0.3:
        pairs |= {(rng.choice(u + (None,)), rng.choice(u + (None,))) for _ in range(rng.randint(1, 3))}
    return PairSet.of(u, pairs)


PAIR_RULES = [r for r in IMPLICATIONS
              if r.premise | {r.conclusion} <= set(PAIR_PROPERTIES + NULL_PAIR_PROPERTIES)]
SELF_MAP_RULES = [r for r in IMPLICATIONS if r.premise | {r.conclusion} <= set(SELF_MAP_PROPERTIES)]


@pytest.mark.parametrize("rule", PAIR_RULES, ids=lambda r: r.name)
def test_pair_rule_sound_on_data(rule):
    rng = random.Random(rule.name)
    passed = 0
    for _ in range(200_000):
        v = _random_pairset(rng)
        if all(holds(v, p) for p in rule.premise):
            assert holds(v, rule.conclusion), sorted(v.pairs, key=repr)
            passed += 1
            if passed == 1000:
                break
    assert passed == 1000


@pytest.mark.parametrize("rule", SELF_MAP_RULES, ids=lambda r: r.name)
def test_self_map_rule_sound_on_data(rule):
    rng = random.Random(rule.name)
    passed = 0
    for _ in range(200_000):
        n = rng.randint(1, 5)
        if rng.random() < 0.5:
            reps = {x: rng.randrange(n) for x in range(n)}
            f = {x: reps[reps[x]] if rng.random() < 0.8 else None for x in range(n)}
        else:
            f = {x: rng.choice([None] + list(range(n))) for x in range(n)}
        if all(not check_self_map(range(n), f, p) for p in rule.premise):
            assert not check_self_map(range(n), f, rule.conclusion), f
            passed += 1
            if passed == 1000:
                break
    assert passed == 1000


def test_mapping_rules_sound_on_data():
    s = parse_scheme("scheme B;\nset A: entity;\nset C: entity;\n"
                     "map f: A -> C, total, key, surjective, bijective;\n")
    engine = Engine(s)
    rng = random.Random(5)
    for _ in range(1000):
        inst = new_instance(s, "2024-01-01")
        cs = [inst.insert("C", {}) for _ in range(rng.randint(1, 4))]
        for _ in range(rng.randint(0, 4)):
            inst.insert("A", {"f": rng.choice(cs + [None])})
        failing = {v.constraint for v in engine.validate(inst).violations}
        ok = {p: f"f.{p}" not in failing for p in ("total", "key", "surjective", "bijective")}
        assert ok["bijective"] == (ok["total"] and ok["key"] and ok["surjective"])


# -- incompatible sets only have degenerate models --------------------------------

U3 = (0, 1, 2)


def _no_chain(r):
    return not any((y, z) in r for (x, y) in r for z in U3)


DEGENERATE = {
    frozenset({"reflexive", "irreflexive"}): lambda r: False,
    frozenset({"symmetric", "asymmetric"}): lambda r: not r,
    frozenset({"transitive", "intransitive"}): _no_chain,
    frozenset({"euclidean", "ineuclidean"}): lambda r: not r,
    frozenset({"acyclic", "reflexive"}): lambda r: False,
    frozenset({"acyclic", "symmetric"}): lambda r: not r,
    frozenset({"connected", "asymmetric"}): None,  # advisory: tournaments exist
}


@pytest.mark.parametrize("rule", INCOMPATIBILITIES, ids=lambda r: r.name)
def test_incompatible_sets_have_only_degenerate_models(rule):
    degenerate = DEGENERATE.get(rule.premise, lambda r: False)
    models = [r for r in oracles.all_relations(U3)
              if all(oracles.PROPER[p](U3, r) for p in rule.premise)]
    if degenerate is None:
        assert rule.advisory and models
        return
    assert all(degenerate(r) for r in models)


# -- minimality is the removal test ---------------------------------------------------

HBFP_PROPS = PAIR_PROPERTIES + NULL_PAIR_PROPERTIES


@settings(max_examples=300)
@given(st.frozensets(st.sampled_from(HBFP_PROPS), min_size=1))
def test_minimality_matches_removal_test(props):
    lines = [f"constraint K{i}: F & G is {p};" for i, p in enumerate(sorted(props))]
    scheme = parse_scheme(HEAD + "\n".join(lines) + "\n")
    by_id = {f"K{i}": p for i, p in enumerate(sorted(props))}
    reported = {by_id[f.constraints[0]] for f in check_minimality(scheme)}
    expected = {p for p in props if p in property_closure(props - {p})}
    assert reported == expected
    incoherent = any(r.premise <= property_closure(props) and not r.advisory for r in INCOMPATIBILITIES)
    assert incoherent == any(f.severity == "incoherent" for f in check_coherence(scheme))


def test_declared_advisory_does_not_hide_derived_incoherence():
    s = parse_scheme(HEAD + "constraint K: F & G is asymmetric;\nconstraint L: F & G is connected;\n"
                            "constraint M: F & G is reflexive;\n")
    assert {f.severity for f in check_coherence(s)} == {"advisory", "incoherent"}
