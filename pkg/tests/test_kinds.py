from collections import Counter

import pytest

from emdm.kinds import (
    FAMILIES, MAPPING_FAMILIES, SET_FAMILIES, family_properties, kind, kind_registry, property_kind,
)

FAMILY_COUNTS = {
    "set-general": 5, "set-dyadic": 11, "map-general": 6, "map-product": 4,
    "hbfp": 17, "self-map": 14, "diagram": 18, "object": 1,
}


def test_registry_size_and_families():
    reg = kind_registry()
    assert len(reg) == 76
    assert Counter(k.family for k in reg) == FAMILY_COUNTS
    assert tuple(FAMILY_COUNTS) == FAMILIES


def test_set_and_mapping_totals():
    reg = kind_registry()
    assert sum(k.family in SET_FAMILIES for k in reg) == 16
    assert sum(k.family in MAPPING_FAMILIES for k in reg) == 59


def test_fundamental_count():
    assert sum(k.fundamental for k in kind_registry()) == 24


def test_names_unique():
    names = [k.name for k in kind_registry()]
    assert len(set(names)) == len(names)


def test_registry_is_a_fresh_copy():
    reg = kind_registry()
    reg.clear()
    assert len(kind_registry()) == 76


def test_property_lookup():
    assert property_kind("self-map", "acyclic").name == "selfmap-acyclicity"
    assert property_kind("hbfp", "null_identity").family == "hbfp"
    assert property_kind("local", "acyclic").family == "diagram"
    with pytest.raises(ValueError):
        property_kind("set-dyadic", "null_identity")
    with pytest.raises(ValueError):
        kind("no-such-kind")


@pytest.mark.parametrize("family", ["set-dyadic", "hbfp", "self-map", "local"])
def test_every_family_property_has_a_kind(family):
    for p in family_properties(family):
        assert property_kind(family, p).prop == p


def test_plain_identity_is_not_an_hbfp_kind():
    assert all(k.prop != "identity" for k in kind_registry())
