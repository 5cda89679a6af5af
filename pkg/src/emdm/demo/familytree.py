"""The bundled family scheme with a clean dataset and implausible variants.

Datasets are built here in code and shipped as JSON under data/; the
``scripts/make_family_fixtures.py`` script rewrites the files from these
builders.  Every adversarial dataset loads without store errors, so each
implausibility has to be caught by a constraint.
"""
from __future__ import annotations

import copy
import datetime
import json
import random
from dataclasses import dataclass
from importlib import resources

from ..dsl import parse_scheme
from ..engine import Engine, validate_eager
from ..scheme import Scheme
from ..store import Instance, load_data, new_instance

DEMO_TODAY = "2024-08-15"

# object constraints whose conditions partly coincide; no rule derives them
CURATED_OVERLAPS = (
    (("C16", "C3"), "C16 and C3 both bound the husband's age at marriage"),
    (("C17", "C3"), "C17 and C3 both bound the wife's age at marriage"),
)


@dataclass(frozen=True)
class AdversarialCase:
    name: str
    description: str
    dataset: dict
    expected: frozenset
    today: str = DEMO_TODAY


def _data_path(name: str):
    return resources.files(__package__).joinpath("data", name)


def scheme_text() -> str:
    return _data_path("family.emdm").read_text(encoding="utf-8")


def family_tree_scheme() -> Scheme:
    return parse_scheme(scheme_text(), "family.emdm")


def _ref(set_name, id):
    return {"ref": set_name, "id": id}


def _person(id, first, last, sex, born, ssn, home, mother=None, father=None, died=None,
            baptized=None, buried=None, birthplace=None):
    return {
        "id": id, "FName": first, "LName": last, "Sex": sex, "BirthDate": born, "Died": died,
        "Baptized": baptized, "Buried": buried, "SSN": ssn,
        "Mother": _ref("PEOPLE", mother) if mother else None,
        "Father": _ref("PEOPLE", father) if father else None,
        "BirthPlace": _ref("CITIES", birthplace) if birthplace else None,
        "HomeTown": _ref("CITIES", home),
    }


def _marriage(id, husband, wife, married, divorced=None):
    return {"id": id, "MarriageDate": married, "DivorceDate": divorced,
            "Husband": _ref("PEOPLE", husband), "Wife": _ref("PEOPLE", wife)}


def clean_dataset() -> dict:
    """Three generations satisfying every constraint (checked clause by clause in the tests)."""
    return {
        "COUNTRIES": [{"id": 1, "CountryName": "Romania"}, {"id": 2, "CountryName": "United States"}],
        "STATES": [
            {"id": 1, "StateName": "Bucuresti", "Country": _ref("COUNTRIES", 1)},
            {"id": 2, "StateName": "Ohio", "Country": _ref("COUNTRIES", 2)},
        ],
        "CITIES": [
            {"id": 1, "CityName": "Bucharest", "State": _ref("STATES", 1)},
            {"id": 2, "CityName": "Columbus", "State": _ref("STATES", 2)},
        ],
        "PEOPLE": [
            _person(1, "Ion", "Popescu", "M", "1920-03-10", 100000001, 1, died="1990-05-01",
                    baptized="1920-04-01", buried="1990-05-04", birthplace=1),
            _person(2, "Maria", "Popescu", "F", "1925-07-22", 100000002, 1, died="2000-01-15",
                    baptized="1925-08-10", buried="2000-01-18"),
            _person(3, "Andrei", "Popescu", "M", "1950-02-14", 100000003, 1, mother=2, father=1, birthplace=1),
            _person(4, "Elena", "Ionescu", "F", "1952-11-03", 100000004, 1),
            _person(5, "Ana", "Popescu", "F", "1978-06-30", 100000005, 2, mother=4, father=3),
            # same SSN as Ion, but another country: allowed by peopleKey
            _person(6, "John", "Smith", "M", "1975-01-20", 100000001, 2),
            _person(7, "Mihai", "Smith", "M", "2005-09-12", 100000007, 2, mother=5, father=6, birthplace=2),
            _person(8, "Ioana", "Vasilescu", "F", "1960-04-04", 100000008, 1),
        ],
        "MARRIAGES": [
            _marriage(1, 1, 2, "1948-06-12"),
            _marriage(2, 3, 4, "1975-09-01", "1985-03-01"),
            _marriage(3, 6, 5, "1999-05-20"),
            _marriage(4, 3, 8, "1987-10-10"),
        ],
    }


def _patch(data: dict, set_name: str, id, **changes) -> dict:
    for row in data[set_name]:
        if row["id"] == id:
            row.update(changes)
            return data
    raise KeyError(f"{set_name} {id}")


def _case(name, description, expected, edit, today=DEMO_TODAY) -> AdversarialCase:
    data = copy.deepcopy(clean_dataset())
    edit(data)
    return AdversarialCase(name, description, data, frozenset(expected), today)


def _add(set_name, row):
    return lambda d: d[set_name].append(row)


def _both(*edits):
    def run(d):
        for e in edits:
            e(d)
    return run


def adversarial_suite() -> list[AdversarialCase]:
    paul = _person(10, "Paul", "Ionescu", "M", "1976-02-02", 100000010, 2)
    return [
        _case("bornAfterDeath", "a person born after his death", {"C0"},
              lambda d: _patch(d, "PEOPLE", 1, Died="1919-01-01", Buried="1919-01-05")),
        _case("baptizedBeforeBirth", "a person baptized before birth", {"CBaptism"},
              lambda d: _patch(d, "PEOPLE", 2, Baptized="1925-01-01")),
        _case("buriedBeforeDeath", "a person buried before death", {"CBurial"},
              lambda d: _patch(d, "PEOPLE", 1, Buried="1990-04-01")),
        _case("maleMother", "a male recorded as mother", {"C6"},
              lambda d: _patch(d, "PEOPLE", 4, Sex="M")),
        _case("childBornBeforeParent", "a child born before both parents", {"C8", "C9"},
              lambda d: _patch(d, "PEOPLE", 7, BirthDate="1970-01-01")),
        _case("centuriesAfterParentDeath", "a child born years after both parents died", {"C8", "C9"},
              _add("PEOPLE", _person(9, "Radu", "Popescu", "M", "2015-01-01", 100000009, 1, mother=2, father=1))),
        _case("sameSexMarriage", "two men married to each other", {"C1"},
              _both(_add("PEOPLE", paul), lambda d: _patch(d, "MARRIAGES", 3, Wife=_ref("PEOPLE", 10)))),
        _case("marriedUnder16", "a marriage of children", {"C3"},
              lambda d: _patch(d, "MARRIAGES", 3, MarriageDate="1985-01-01")),
        _case("divorceBeforeMarriage", "a divorce dated before the wedding", {"C2"},
              lambda d: _patch(d, "MARRIAGES", 2, DivorceDate="1970-01-01")),
        _case("overlappingMarriages", "a husband remarrying before his divorce", {"C14"},
              lambda d: _patch(d, "MARRIAGES", 4, MarriageDate="1980-01-01")),
        _case("lifespanOver160", "a person living 165 years", {"C5"},
              lambda d: _patch(d, "PEOPLE", 1, BirthDate="1900-01-01", Died="2065-06-01", Buried=None),
              today="2070-01-01"),
        _case("sameParentBothRoles", "the same person as mother and father", {"C6"},
              lambda d: _patch(d, "PEOPLE", 7, Mother=_ref("PEOPLE", 6))),
        _case("sameSexParentsChildDiedBeforeThem",
              "a same-sex couple with a child who died before they were born", {"C0", "C1", "C6"},
              _both(_add("PEOPLE", paul),
                    lambda d: _patch(d, "MARRIAGES", 3, Wife=_ref("PEOPLE", 10)),
                    lambda d: _patch(d, "PEOPLE", 7, Mother=_ref("PEOPLE", 10), Died="1970-01-01"))),
    ]


def synthetic_dataset(people: int = 10_000, marriages: int = 5_000, seed: int = 0) -> dict:
    """A large plausible family history for timing runs.

    People fall into four generations about 25 years apart.  Each marriage
    pairs a man and a woman of one generation, each person marries at most
    once, and every child of a later generation descends from a marriage of
    the previous one, so the result satisfies every constraint.
    """
    rng = random.Random(seed)
    today = datetime.date.fromisoformat(DEMO_TODAY)
    gens = 4
    per_gen = people // gens
    rows, by_gen = [], []
    pid = 0
    for g in range(gens):
        members = []
        for i in range(per_gen + (people % gens if g == gens - 1 else 0)):
            pid += 1
            sex = "M" if i % 2 == 0 else "F"
            born = datetime.date(1900 + 25 * g + rng.randint(0, 4), rng.randint(1, 12), rng.randint(1, 28))
            died = born + datetime.timedelta(days=365 * rng.randint(70, 90))
            rows.append({"id": pid, "FName": f"N{pid}", "LName": f"L{pid % 997}", "Sex": sex,
                         "BirthDate": born.isoformat(),
                         "Died": died.isoformat() if died < today else None,
                         "SSN": pid, "HomeTown": _ref("CITIES", 1 + pid % 2),
                         "Mother": None, "Father": None})
            members.append(rows[-1])
        by_gen.append(members)
    wed, mid = [], 0
    per_gen_m = marriages // gens
    for g, members in enumerate(by_gen):
        men = [r for r in members if r["Sex"] == "M"]
        women = [r for r in members if r["Sex"] == "F"]
        count = min(len(men), len(women), per_gen_m + (marriages % gens if g == gens - 1 else 0))
        couples = []
        for h, w in zip(men[:count], women[:count]):
            mid += 1
            older = max(h["BirthDate"], w["BirthDate"])
            married = datetime.date.fromisoformat(older) + datetime.timedelta(days=365 * 20 + rng.randint(0, 900))
            wed.append(_marriage(mid, h["id"], w["id"], married.isoformat()))
            couples.append((h["id"], w["id"]))
        if g + 1 < gens:
            for child in by_gen[g + 1]:
                h, w = rng.choice(couples)
                child["Father"], child["Mother"] = _ref("PEOPLE", h), _ref("PEOPLE", w)
    base = clean_dataset()
    return {"COUNTRIES": base["COUNTRIES"], "STATES": base["STATES"], "CITIES": base["CITIES"],
            "PEOPLE": rows, "MARRIAGES": wed}


# -- shipped fixtures -------------------------------------------------------

def fixture_files() -> dict[str, str]:
    """File name -> JSON text for every shipped dataset plus the suite manifest."""
    files = {"clean.json": json.dumps(clean_dataset(), indent=2) + "\n"}
    manifest = []
    for case in adversarial_suite():
        fname = f"cases/{case.name}.json"
        files[fname] = json.dumps(case.dataset, indent=2) + "\n"
        manifest.append({"name": case.name, "description": case.description, "file": fname,
                         "expected": sorted(case.expected), "today": case.today})
    files["suite.json"] = json.dumps(manifest, indent=2) + "\n"
    return files


def load_suite() -> list[AdversarialCase]:
    """The adversarial suite as read back from the shipped JSON files."""
    manifest = json.loads(_data_path("suite.json").read_text(encoding="utf-8"))
    return [AdversarialCase(m["name"], m["description"],
                            json.loads(_data_path(m["file"]).read_text(encoding="utf-8")),
                            frozenset(m["expected"]), m["today"]) for m in manifest]


def load_clean() -> dict:
    return json.loads(_data_path("clean.json").read_text(encoding="utf-8"))


def instance_for(scheme: Scheme, dataset: dict, today: str = DEMO_TODAY) -> Instance:
    return load_data(new_instance(scheme, today), dataset)


def eager_violations(scheme: Scheme, dataset: dict, today: str = DEMO_TODAY) -> list:
    return validate_eager(scheme, dataset, today).violations


def run_suite(scheme: Scheme | None = None, cases=None) -> list[dict]:
    """Validate every case in both modes; one result record per case."""
    scheme = scheme or family_tree_scheme()
    engine = Engine(scheme)
    results = []
    for case in cases if cases is not None else load_suite():
        deferred = engine.validate(instance_for(scheme, case.dataset, case.today)).violations
        eager = eager_violations(scheme, case.dataset, case.today)
        found = {v.constraint for v in deferred}
        results.append({
            "name": case.name,
            "expected": sorted(case.expected),
            "found": sorted(found),
            "passed": case.expected <= found,
            "modes_agree": deferred == eager,
        })
    return results
