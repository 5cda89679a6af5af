import json
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from emdm.demo.familytree import load_clean
from emdm.dsl import parse_scheme
from emdm.store import DataError, StoreError, dump_data, load_data, new_instance
from emdm.values import parse_date

SHOP = parse_scheme("""scheme Shop;
set CUSTOMERS: entity;
set PRODUCTS: entity;
set ORDERS: relationship(CUSTOMERS, PRODUCTS);
map Name: CUSTOMERS -> ASCII(16), total;
map Since: CUSTOMERS -> DATETIME [#2000-01-01#, Today()];
map Referrer: CUSTOMERS -> CUSTOMERS;
map Price: PRODUCTS -> CURRENCY(5);
map Weight: PRODUCTS -> RAT(3, 2);
map Vat: PRODUCTS -> {"low", "high"}, default = "high";
map Gift: ORDERS -> BOOLE;
map Qty: ORDERS -> NAT(3), default = 1;
""")
TODAY = "2024-08-15"


def shop():
    return new_instance(SHOP, TODAY)


def test_insert_fills_defaults():
    inst = shop()
    p = inst.insert("PRODUCTS", {"Price": "9.99"})
    assert inst.get("Vat", p) == "high"
    assert inst.get("Price", p) == Decimal("9.99")


def test_generated_ids_skip_explicit_ones():
    inst = shop()
    inst.insert("CUSTOMERS", {"Name": "a"}, id=1)
    assert inst.insert("CUSTOMERS", {"Name": "b"}) == 2


def test_duplicate_id_rejected():
    inst = shop()
    inst.insert("CUSTOMERS", {"Name": "a"}, id=7)
    with pytest.raises(StoreError):
        inst.insert("CUSTOMERS", {"Name": "b"}, id=7)


@pytest.mark.parametrize("assignments", [
    {"Name": "x" * 17},
    {"Name": "ok", "Since": "1999-12-31"},
    {"Name": "ok", "Since": "2024-08-16"},
    {"Name": "ok", "Referrer": 99},
    {"Nickname": "no"},
])
def test_rejected_values(assignments):
    with pytest.raises(StoreError):
        shop().insert("CUSTOMERS", assignments)


def test_relationship_needs_both_projections():
    inst = shop()
    c = inst.insert("CUSTOMERS", {"Name": "a"})
    with pytest.raises(StoreError):
        inst.insert("ORDERS", {"CUSTOMERS": c})


def test_delete_referenced_element():
    inst = shop()
    a = inst.insert("CUSTOMERS", {"Name": "a"})
    b = inst.insert("CUSTOMERS", {"Name": "b", "Referrer": a})
    with pytest.raises(StoreError):
        inst.delete("CUSTOMERS", a)
    touched = inst.delete("CUSTOMERS", a, nullify=True)
    assert "Referrer" in touched.mappings
    assert inst.get("Referrer", b) is None
    assert inst.population("CUSTOMERS") == [b]


def test_delete_never_nullifies_projections():
    inst = shop()
    c = inst.insert("CUSTOMERS", {"Name": "a"})
    p = inst.insert("PRODUCTS", {})
    inst.insert("ORDERS", {"CUSTOMERS": c, "PRODUCTS": p})
    with pytest.raises(StoreError):
        inst.delete("PRODUCTS", p, nullify=True)


def test_update_reports_touched_mappings():
    inst = shop()
    c = inst.insert("CUSTOMERS", {"Name": "a"})
    touched = inst.update("CUSTOMERS", c, {"Name": "b", "Since": None})
    assert touched.mappings == {"Name", "Since"}
    assert inst.get("Since", c) is None


def test_family_dump_load_identity(family):
    inst = load_data(new_instance(family, TODAY), load_clean())
    text = dump_data(inst)
    again = load_data(new_instance(family, TODAY), text)
    assert dump_data(again) == text
    assert again.snapshot() == inst.snapshot()
    assert json.loads(text)["PEOPLE"][0]["BirthDate"] == "1920-03-10"


def test_forward_references_resolve():
    doc = {"CUSTOMERS": [{"id": 1, "Name": "a", "Referrer": {"ref": "CUSTOMERS", "id": 2}},
                         {"id": 2, "Name": "b"}]}
    inst = load_data(shop(), doc)
    assert inst.get("Referrer", 1) == 2


@pytest.mark.parametrize("doc,needle", [
    ('{"CUSTOMERS": [', "invalid JSON"),
    ('{"NOPE": []}', "not an entity"),
    ('{"CUSTOMERS": [{"Name": "a"}]}', "needs an 'id'"),
    ('{"CUSTOMERS": [{"id": 1, "Name": "a", "Referrer": {"ref": "PRODUCTS", "id": 1}}]}', "references"),
    ('{"CUSTOMERS": [{"id": 1, "Name": "a", "Since": 5}]}', "YYYY-MM-DD"),
    ('[]', "JSON object"),
])
def test_load_errors(doc, needle):
    with pytest.raises(DataError) as info:
        load_data(shop(), doc)
    assert needle in str(info.value)


names = st.text(alphabet="abcxyz ", min_size=1, max_size=16)
dates = st.integers(parse_date("2000-01-01"), parse_date(TODAY))
prices = st.decimals(min_value=0, max_value=Decimal("99999.99"), places=2)
weights = st.decimals(min_value=Decimal("-999.99"), max_value=Decimal("999.99"), places=2)


@st.composite
def shop_documents(draw):
    inst = shop()
    customers = []
    for _ in range(draw(st.integers(0, 5))):
        ref = draw(st.sampled_from([None] + customers)) if customers else None
        customers.append(inst.insert("CUSTOMERS", {
            "Name": draw(names), "Since": draw(st.one_of(st.none(), dates)), "Referrer": ref}))
    products = [inst.insert("PRODUCTS", {
        "Price": draw(st.one_of(st.none(), prices)), "Weight": draw(st.one_of(st.none(), weights)),
        "Vat": draw(st.sampled_from(["low", "high"]))}) for _ in range(draw(st.integers(0, 4)))]
    if customers and products:
        for _ in range(draw(st.integers(0, 4))):
            inst.insert("ORDERS", {"CUSTOMERS": draw(st.sampled_from(customers)),
                                   "PRODUCTS": draw(st.sampled_from(products)),
                                   "Gift": draw(st.one_of(st.none(), st.booleans())),
                                   "Qty": draw(st.integers(0, 999))})
    return inst


@given(shop_documents())
def test_dump_load_round_trip(inst):
    text = dump_data(inst)
    again = load_data(shop(), text)
    assert again.snapshot() == inst.snapshot()
    assert dump_data(again) == text
