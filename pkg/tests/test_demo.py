import pytest

from emdm.demo.familytree import (
    DEMO_TODAY, adversarial_suite, eager_violations, family_tree_scheme, fixture_files, instance_for,
    load_clean, load_suite, run_suite, synthetic_dataset,
)
from emdm.engine import Engine
from emdm.demo import familytree

CASES = {c.name: c for c in load_suite()}


def test_shipped_fixtures_match_builders():
    data_dir = familytree._data_path("")
    for name, text in fixture_files().items():
        assert data_dir.joinpath(name).read_text(encoding="utf-8") == text, name


def test_suite_shape():
    assert len(CASES) >= 10
    assert all(c.expected for c in CASES.values())
    assert [c.name for c in adversarial_suite()] == list(CASES)


def test_clean_dataset_is_clean_in_both_modes(family):
    data = load_clean()
    assert Engine(family).validate(instance_for(family, data)).violations == []
    assert eager_violations(family, data) == []


@pytest.mark.parametrize("name", sorted(CASES))
def test_case_is_caught_in_both_modes(family, name):
    (result,) = run_suite(family, [CASES[name]])
    assert result["passed"], result
    assert result["modes_agree"], result


def test_same_parent_both_roles_hits_a_sex_rule(family):
    (result,) = run_suite(family, [CASES["sameParentBothRoles"]])
    assert {"C6", "C7"} & set(result["found"])


def test_clean_dataset_has_three_generations():
    people = {p["id"]: p for p in load_clean()["PEOPLE"]}

    def depth(pid):
        p = people[pid]
        parents = [r["id"] for r in (p["Mother"], p["Father"]) if r]
        return 1 + max((depth(q) for q in parents), default=0)

    assert max(depth(pid) for pid in people) >= 3


def test_lifespan_case_needs_its_own_clock():
    assert CASES["lifespanOver160"].today > DEMO_TODAY


def test_synthetic_dataset_is_clean_and_sized():
    scheme = family_tree_scheme()
    data = synthetic_dataset(400, 200, seed=3)
    assert (len(data["PEOPLE"]), len(data["MARRIAGES"])) == (400, 200)
    assert Engine(scheme).validate(instance_for(scheme, data)).violations == []
