"""One test per acceptance criterion, each printing a PASS/FAIL line."""
import random
import time
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdm.demo.familytree import (
    family_tree_scheme, instance_for, load_clean, run_suite, eager_violations, load_suite, scheme_text,
    synthetic_dataset,
)
from emdm.dsl import parse_scheme, serialize_scheme
from emdm.engine import Engine, validate_all
from emdm.kinds import MAPPING_FAMILIES, NULL_PAIR_PROPERTIES, PAIR_PROPERTIES, SET_FAMILIES, kind_registry
from emdm.meta import IMPLICATIONS, VOCABULARY, analyze, check_coherence, property_closure
from emdm.relations import PairSet, holds
from emdm.sqlgen import classify, emit_ddl, emit_enforcement_plan
from emdm.store import dump_data, load_data, new_instance

import oracles
from schemegen import random_scheme_text
from test_sqlgen import GOLDEN


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return emit


def test_criterion_1_registry(report):
    t0 = time.perf_counter()
    reg = kind_registry()
    fam = Counter(k.family for k in reg)
    counts = tuple(fam[f] for f in ("set-general", "set-dyadic", "map-general", "map-product",
                                    "hbfp", "self-map", "diagram", "object"))
    ok = (len(reg) == 76 and counts == (5, 11, 6, 4, 17, 14, 18, 1)
          and sum(k.fundamental for k in reg) == 24
          and sum(fam[f] for f in SET_FAMILIES) == 16
          and sum(fam[f] for f in MAPPING_FAMILIES) == 59
          and time.perf_counter() - t0 < 1)
    report(1, ok, f"registry has {len(reg)} kinds, families {counts}")


def test_criterion_2_oracle_equivalence(report):
    t0 = time.perf_counter()
    u3 = (0, 1, 2)
    rels = list(oracles.all_relations(u3))
    bad = 0
    transitive = 0
    for r in rels:
        v = PairSet.of(u3, r)
        for prop, oracle in oracles.PROPER.items():
            bad += holds(v, prop) != oracle(u3, set(r))
        transitive += holds(v, "transitive")
    rng = random.Random(20240815)
    for _ in range(1000):
        u = tuple(range(rng.randint(4, 8)))
        d = rng.random()
        v = PairSet.of(u, {(a, b) for a in u for b in u if rng.random() < d})
        for prop, oracle in oracles.PROPER.items():
            bad += holds(v, prop) != oracle(u, set(v.pairs))
    elapsed = time.perf_counter() - t0
    ok = (len(rels) == 512 and len(oracles.PROPER) == 11 and transitive == 171
          and bad == 0 and elapsed < 30)
    report(2, ok, f"{bad} discrepancies, {transitive} transitive relations on 3 points, {elapsed:.1f}s")


_closure_failures = []


@settings(max_examples=1000, database=None)
@given(st.frozensets(st.sampled_from(VOCABULARY)), st.frozensets(st.sampled_from(VOCABULARY)))
def _closure_law(a, b):
    ca = property_closure(a)
    if not (a <= ca and property_closure(ca) == ca and property_closure(a | b) >= ca):
        _closure_failures.append((a, b))


def _random_pairset(rng):
    u = tuple(range(rng.randint(1, 5)))
    style = rng.randrange(4)
    if style == 0:
        block = {x: rng.randrange(len(u)) for x in u}
        pairs = {(a, b) for a in u for b in u if block[a] == block[b]}
    elif style == 1:
        pairs = {(a, b) for a in u for b in u if a < b and rng.random() < 0.5}
    else:
        d = rng.random()
        pairs = {(a, b) for a in u for b in u if rng.random() < d}
    if rng.random() < 0.3:
        pairs |= {(rng.choice(u + (None,)), rng.choice(u + (None,))) for _ in range(2)}
    return PairSet.of(u, pairs)


def test_criterion_3_meta_soundness(report):
    _closure_failures.clear()
    _closure_law()
    pair_props = set(PAIR_PROPERTIES + NULL_PAIR_PROPERTIES)
    rules = [r for r in IMPLICATIONS if r.premise | {r.conclusion} <= pair_props]
    counterexamples, starved = 0, []
    for rule in rules:
        rng = random.Random(rule.name)
        passed = 0
        for _ in range(200_000):
            v = _random_pairset(rng)
            if all(holds(v, p) for p in rule.premise):
                counterexamples += not holds(v, rule.conclusion)
                passed += 1
                if passed == 1000:
                    break
        if passed < 1000:
            starved.append(rule.name)
    ok = not _closure_failures and counterexamples == 0 and not starved
    report(3, ok, f"{len(_closure_failures)} closure-law failures, {counterexamples} counterexamples "
                  f"over {len(rules)} pair rules x 1000 premise-passing sets")


def test_criterion_4_meta_examples(report):
    head = "scheme M;\nset P: entity;\nmap Mother: P -> P, "
    red = analyze(parse_scheme(head + "acyclic, asymmetric, irreflexive;\n"))
    inc = [check_coherence(parse_scheme(head + f"acyclic, {p};\n")) for p in ("reflexive", "symmetric")]
    ok = ([f.severity for f in red] == ["redundant", "redundant"]
          and all(len(f) == 1 and f[0].severity == "incoherent" for f in inc))
    report(4, ok, f"{len(red)} redundancy findings; incoherence findings {[len(f) for f in inc]}")


def test_criterion_5_rejection_suite(report):
    scheme = family_tree_scheme()
    t0 = time.perf_counter()
    cases = load_suite()
    results = run_suite(scheme, cases)
    clean = load_clean()
    deferred = Engine(scheme).validate(instance_for(scheme, clean)).violations
    eager = eager_violations(scheme, clean)
    elapsed = time.perf_counter() - t0
    caught = sum(r["passed"] for r in results)
    ok = (len(cases) >= 10 and caught == len(cases) and all(r["modes_agree"] for r in results)
          and deferred == [] and eager == [] and elapsed < 5)
    report(5, ok, f"{caught}/{len(cases)} cases caught, clean dataset {len(deferred)}/{len(eager)} "
                  f"violations (deferred/eager), {elapsed:.2f}s")


def test_criterion_6_round_trip(report):
    def stable(text):
        s = parse_scheme(text)
        out = serialize_scheme(s)
        return parse_scheme(out) == s and serialize_scheme(parse_scheme(out)) == out

    schemes_ok = stable(scheme_text()) and all(stable(random_scheme_text(i)) for i in range(100))
    scheme = family_tree_scheme()
    dumped = dump_data(instance_for(scheme, load_clean()))
    data_ok = dump_data(load_data(new_instance(scheme, "2024-08-15"), dumped)) == dumped
    ddl_ok = emit_ddl(scheme) == emit_ddl(parse_scheme(scheme_text()))
    report(6, schemes_ok and data_ok and ddl_ok,
           f"schemes {schemes_ok}, data {data_ok}, DDL deterministic {ddl_ok}")


def test_criterion_7_classification(report):
    scheme = family_tree_scheme()
    plan = emit_enforcement_plan(scheme)
    doc = plan.to_json()
    listed = [r["constraint"] for r in doc["relational"]] + [e["constraint"] for e in doc["nonRelational"]]
    every = [c.id for c in scheme.constraints] + [c.id for c in scheme.system_constraints]
    cat = {c: classify(scheme, scheme.constraint.get(c) or next(
        s for s in scheme.system_constraints if s.id == c)) for c in every}
    totals = [c.id for c in scheme.constraints if c.kind.name == "totality"]
    ok = (sorted(listed) == sorted(every) and len(set(listed)) == len(listed)
          and cat["C0"].category == cat["C2"].category == "tuple-check"
          and all(cat[t].category == "not-null" for t in totals)
          and all(cat[f"C{i}"].category == "key" for i in range(10, 14))
          and not any(cat[c].relational for c in ("Mother.acyclic", "Father.acyclic", "C14", "C15"))
          and plan.dumps() == (GOLDEN / "family_plan.json").read_text())
    report(7, ok, f"{len(listed)} plan entries for {len(every)} constraints, golden plan matched")


def test_criterion_8_performance(report):
    scheme = family_tree_scheme()
    inst = instance_for(scheme, synthetic_dataset(10_000, 5_000))
    t0 = time.perf_counter()
    violations = validate_all(scheme, inst)
    elapsed = time.perf_counter() - t0
    report(8, elapsed < 10 and violations == [],
           f"10,000 people / 5,000 marriages validated in {elapsed:.2f}s, {len(violations)} violations")
