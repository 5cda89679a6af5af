import io
import json

import pytest

from emdm.cli import run
from emdm.demo import familytree

DATA = familytree._data_path("")
SCHEME = str(DATA.joinpath("family.emdm"))
CLEAN = str(DATA.joinpath("clean.json"))
BORN_AFTER_DEATH = str(DATA.joinpath("cases", "bornAfterDeath.json"))


def call(*args):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(args), out, err)
    return code, out.getvalue(), err.getvalue()


def test_check():
    code, out, _ = call("check", SCHEME)
    assert code == 0 and out.startswith("scheme FamilyTree: 5 sets")


def test_validate_clean():
    code, out, _ = call("validate", SCHEME, CLEAN, "--today", "2024-08-15")
    assert code == 0
    assert out.splitlines()[-1] == "0 violations"


@pytest.mark.parametrize("mode", ["--eager", "--deferred"])
def test_validate_json_reports_c0(mode):
    code, out, _ = call("validate", SCHEME, BORN_AFTER_DEATH, "--json", "--today", "2024-08-15", mode)
    doc = json.loads(out)
    assert code == 1
    assert doc["today"] == "2024-08-15"
    assert "C0" in {v["constraint"] for v in doc["violations"]}
    assert doc["count"] == len(doc["violations"])


def test_modes_produce_the_same_violations():
    _, eager, _ = call("validate", SCHEME, BORN_AFTER_DEATH, "--json", "--today", "2024-08-15", "--eager")
    _, deferred, _ = call("validate", SCHEME, BORN_AFTER_DEATH, "--json", "--today", "2024-08-15")
    assert json.loads(eager)["violations"] == json.loads(deferred)["violations"]


def test_output_is_byte_identical_across_runs():
    args = ("validate", SCHEME, BORN_AFTER_DEATH, "--json", "--today", "2024-08-15")
    assert call(*args) == call(*args)


def test_today_defaults_to_system_date_and_is_echoed():
    import datetime

    _, out, _ = call("validate", SCHEME, CLEAN, "--json")
    assert json.loads(out)["today"] == datetime.date.today().isoformat()


def test_meta_incoherent(tmp_path):
    bad = tmp_path / "family_bad.emdm"
    bad.write_text(familytree.scheme_text().replace(
        "map Mother: PEOPLE -> PEOPLE, acyclic;", "map Mother: PEOPLE -> PEOPLE, acyclic, reflexive;"))
    code, out, _ = call("meta", str(bad))
    assert code == 3 and "incompatible(acyclic, reflexive)" in out


def test_meta_redundant_and_clean(tmp_path):
    s = tmp_path / "r.emdm"
    s.write_text("scheme R;\nset P: entity;\nmap M: P -> P, acyclic, asymmetric;\n")
    code, out, _ = call("meta", str(s), "--json")
    assert code == 1 and json.loads(out)[0]["severity"] == "redundant"
    assert call("meta", SCHEME)[0] == 0


def test_compile_writes_files(tmp_path):
    ddl, plan = tmp_path / "out.sql", tmp_path / "out.json"
    code, _, _ = call("compile", SCHEME, "--ddl", str(ddl), "--plan", str(plan))
    assert code == 0
    assert ddl.read_text().startswith("-- scheme FamilyTree")
    assert {"relational", "nonRelational"} == set(json.loads(plan.read_text()))


def test_compile_defaults_to_ddl_on_stdout():
    code, out, _ = call("compile", SCHEME)
    assert code == 0 and "CREATE TABLE PEOPLE" in out


def test_demo():
    code, out, _ = call("demo", "familytree")
    assert code == 0
    assert out.splitlines()[0].startswith("PASS clean dataset")
    code, out, _ = call("demo", "familytree", "--case", "maleMother", "--json")
    assert code == 0 and json.loads(out)["cases"][0]["name"] == "maleMother"


@pytest.mark.parametrize("args,code", [
    (("frobnicate",), 2),
    (("check", "/no/such/file.emdm"), 2),
    (("demo", "familytree", "--case", "nope"), 2),
    (("validate", SCHEME, CLEAN, "--today", "2024-02-30"), 2),
])
def test_input_errors(args, code):
    assert call(*args)[0] == code


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.emdm"
    bad.write_text("scheme X;\nset P entity;\n")
    code, _, err = call("check", str(bad))
    assert code == 2 and f"{bad}:2:7" in err


def test_bad_data_exit_code(tmp_path):
    data = tmp_path / "d.json"
    data.write_text('{"PEOPLE": [{"id": 1, "BirthDate": "2999-01-01"}]}')
    code, _, err = call("validate", SCHEME, str(data), "--today", "2024-08-15")
    assert code == 2 and "range" in err
