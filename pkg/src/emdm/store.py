"""In-memory instances: set populations plus mapping valuations.

Element ids are plain ints or strings shared by every set related through
inclusion, so DRIVERS <= EMPLOYEES means the same ids appear in both
populations.  The store enforces only row-local facts at mutation time
(value ranges, existence of referenced elements, non-null canonical
projections); everything else is the engine's job.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal

from .evaluate import computed_set, eval_term, mapping_getter
from .scheme import Scheme
from .values import DomainError, format_date, parse_date


class StoreError(ValueError):
    def __init__(self, message: str, witnesses=()):
        super().__init__(message)
        self.message = message
        self.witnesses = list(witnesses)


@dataclass(frozen=True)
class Touched:
    """What a mutation changed, for incremental re-validation."""

    sets: frozenset
    mappings: frozenset


@dataclass
class Instance:
    scheme: Scheme
    today: int
    populations: dict = field(default_factory=dict)  # set -> {id: None}, insertion ordered
    values: dict = field(default_factory=dict)  # stored mapping -> {id: value}
    counters: dict = field(default_factory=dict)

    def __post_init__(self):
        for s in self.scheme.sets:
            if s.kind in ("entity", "relationship"):
                self.populations.setdefault(s.name, {})
                self.counters.setdefault(s.name, 1)
        for m in self.scheme.mappings:
            if m.kind != "computed":
                self.values.setdefault(m.name, {})

    # reading
    def population(self, name: str) -> list:
        s = self.scheme.set[name]
        if s.kind in ("entity", "relationship"):
            return list(self.populations[name])
        if s.kind == "computed":
            return computed_set(self, name)
        if s.domain.enumerable:
            return list(s.domain.members())
        raise StoreError(f"value set {name} has no enumerable population")

    def contains(self, set_name: str, element) -> bool:
        s = self.scheme.set[set_name]
        if s.kind in ("entity", "relationship"):
            return element in self.populations[set_name]
        if s.kind == "computed":
            return element in set(computed_set(self, set_name))
        return s.domain.contains(element, self.today)

    def card(self, set_name: str) -> int:
        return len(self.population(set_name))

    def get(self, mapping: str, element):
        return mapping_getter(self, mapping)(element)

    def eval_term(self, term, binding=None):
        return eval_term(self, term, binding)

    # mutation
    def insert(self, set_name: str, assignments: dict | None = None, id=None):
        """Add a fresh element to an entity or relationship set; return its id."""
        s = self.scheme.set.get(set_name)
        if s is None or s.kind not in ("entity", "relationship"):
            raise StoreError(f"cannot insert into {set_name}: not an entity or relationship set")
        assignments = dict(assignments or {})
        if id is None:
            id = self.counters[set_name]
            while id in self.populations[set_name]:
                id += 1
        elif id in self.populations[set_name]:
            raise StoreError(f"duplicate id {id!r} in {set_name}", [id])
        checked = self._check_assignments(set_name, assignments)
        own = self.scheme.stored_mappings(set_name)
        for m in own:
            if m.name not in checked and m.default is not None:
                checked[m.name] = m.default
        if s.kind == "relationship":
            missing = [m.name for m in self.scheme.projections(set_name) if checked.get(m.name) is None]
            if missing:
                raise StoreError(f"{set_name} element needs non-null {', '.join(missing)}", missing)
        self.populations[set_name][id] = None
        if isinstance(id, int) and not isinstance(id, bool):
            self.counters[set_name] = max(self.counters[set_name], id + 1)
        for name, value in checked.items():
            self._store(name, id, value)
        return id

    def update(self, set_name: str, id, assignments: dict) -> Touched:
        if id not in self.populations.get(set_name, {}):
            raise StoreError(f"unknown id {id!r} in {set_name}", [id])
        checked = self._check_assignments(set_name, assignments)
        for m in self.scheme.projections(set_name):
            if m.name in checked and checked[m.name] is None:
                raise StoreError(f"{m.name} of {set_name} cannot be null", [id])
        for name, value in checked.items():
            self._store(name, id, value)
        return Touched(frozenset(), frozenset(checked))

    def delete(self, set_name: str, id, nullify: bool = False) -> Touched:
        """Remove an element; references to it are rejected unless `nullify`."""
        if id not in self.populations.get(set_name, {}):
            raise StoreError(f"unknown id {id!r} in {set_name}", [id])
        referencing = []
        for m in self.scheme.mappings:
            if m.kind == "structural" and m.codomain == set_name:
                for holder, value in self.values[m.name].items():
                    if value == id and not (m.domain == set_name and holder == id):
                        referencing.append((m.name, holder))
        if referencing and (not nullify or any(self.scheme.mapping[n].origin == "projection"
                                               for n, _ in referencing)):
            raise StoreError(
                f"cannot delete {set_name} {id!r}: still referenced by "
                + ", ".join(f"{n}({h!r})" for n, h in referencing), referencing)
        touched = {n for n, _ in referencing}
        for name, holder in referencing:
            self.values[name].pop(holder, None)
        del self.populations[set_name][id]
        for m in self.scheme.stored_mappings(set_name):
            self.values[m.name].pop(id, None)
            touched.add(m.name)
        return Touched(frozenset({set_name}), frozenset(touched))

    def touched_by_insert(self, set_name: str, assignments) -> Touched:
        maps = {m.name for m in self.scheme.stored_mappings(set_name)} | set(assignments or ())
        return Touched(frozenset({set_name}), frozenset(maps))

    def _check_assignments(self, set_name: str, assignments: dict) -> dict:
        out = {}
        for name, value in assignments.items():
            m = self.scheme.mapping.get(name)
            if m is None or m.kind == "computed" or not self.scheme.is_subset(set_name, m.domain):
                raise StoreError(f"unknown mapping {name} for {set_name}", [name])
            out[name] = self.check_value(name, value)
        return out

    def check_value(self, name: str, value):
        """Coerce and range-check a value for stored mapping `name`."""
        if value is None:
            return None
        m = self.scheme.mapping[name]
        dom = self.scheme.value_domain(m)
        if dom is None:
            if isinstance(value, dict) and "ref" in value:
                value = value.get("id")
            if not self.contains(m.codomain, value):
                raise StoreError(f"{name}: reference to nonexistent {m.codomain} element {value!r}", [value])
            return value
        try:
            value = dom.coerce(value)
        except DomainError as e:
            raise StoreError(f"{name}: {e}", [value]) from None
        reason = dom.violation(value, self.today)
        if reason is not None:
            raise StoreError(f"{name}: range violation, {reason}", [value])
        return value

    def _store(self, name, id, value):
        if value is None:
            self.values[name].pop(id, None)
        else:
            self.values[name][id] = value

    def snapshot(self):
        """A comparable view of the whole state."""
        return (
            {k: list(v) for k, v in self.populations.items()},
            {k: dict(v) for k, v in self.values.items()},
        )


def new_instance(scheme: Scheme, today) -> Instance:
    if isinstance(today, str):
        today = parse_date(today)
    return Instance(scheme, today)


# -- JSON data files --------------------------------------------------------

class DataError(StoreError):
    pass


def _decode_value(inst: Instance, name: str, raw, where: str):
    m = inst.scheme.mapping[name]
    dom = inst.scheme.value_domain(m)
    if raw is None:
        return None
    if dom is None:
        if isinstance(raw, dict):
            if set(raw) != {"ref", "id"}:
                raise DataError(f"{where}: element reference needs exactly 'ref' and 'id'")
            if not inst.scheme.is_subset(raw["ref"], m.codomain) and raw["ref"] != m.codomain:
                raise DataError(f"{where}: {name} references {raw['ref']}, expected {m.codomain}")
            return raw["id"]
        return raw
    if dom.category == "date":
        if not isinstance(raw, str):
            raise DataError(f"{where}: {name} expects a YYYY-MM-DD string")
        try:
            return parse_date(raw)
        except DomainError as e:
            raise DataError(f"{where}: {e}") from None
    if dom.base in ("RAT", "CURRENCY") and isinstance(raw, (str, int, float)) and not isinstance(raw, bool):
        try:
            return Decimal(str(raw))
        except ArithmeticError:
            raise DataError(f"{where}: {name} value {raw!r} is not a number") from None
    return raw


def load_data(inst: Instance, source, via=None) -> Instance:
    """Populate `inst` from a JSON document (text, bytes or parsed object).

    Elements are created first and structural references filled in a second
    pass, so forward references resolve.  Passing an eager session as `via`
    routes every mutation through it.
    """
    target = via if via is not None else inst
    if isinstance(source, (str, bytes, bytearray)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as e:
            raise DataError(f"line {e.lineno}: invalid JSON ({e.msg})") from None
    else:
        doc = source
    if not isinstance(doc, dict):
        raise DataError("data document must be a JSON object keyed by set name")
    scheme = inst.scheme
    deferred = []
    for set_name, rows in doc.items():
        s = scheme.set.get(set_name)
        if s is None or s.kind not in ("entity", "relationship"):
            raise DataError(f"{set_name}: not an entity or relationship set of {scheme.name}")
        if not isinstance(rows, list):
            raise DataError(f"{set_name}: expected an array of elements")
        for i, row in enumerate(rows):
            where = f"{set_name}[{i}]"
            if not isinstance(row, dict) or "id" not in row:
                raise DataError(f"{where}: element needs an 'id'")
            eid = row["id"]
            if isinstance(eid, bool) or not isinstance(eid, (int, str)):
                raise DataError(f"{where}: id must be a string or integer")
            values, refs = {}, {}
            for name, raw in row.items():
                if name == "id":
                    continue
                m = scheme.mapping.get(name)
                if m is None or m.kind == "computed":
                    raise DataError(f"{where}: unknown mapping {name}")
                value = _decode_value(inst, name, raw, where)
                if m.kind == "structural" and m.origin != "projection":
                    refs[name] = value
                else:
                    values[name] = value
            try:
                target.insert(set_name, values, id=eid)
            except StoreError as e:
                raise DataError(f"{where}: {e.message}", e.witnesses) from None
            deferred.append((set_name, eid, refs, where))
    for set_name, eid, refs, where in deferred:
        if refs:
            try:
                target.update(set_name, eid, refs)
            except StoreError as e:
                raise DataError(f"{where}: {e.message}", e.witnesses) from None
    return inst


def _encode_value(inst: Instance, m, value):
    if value is None:
        return None
    dom = inst.scheme.value_domain(m)
    if dom is None:
        return {"ref": m.codomain, "id": value}
    if dom.category == "date":
        return format_date(value)
    if isinstance(value, Decimal):
        return format(value, "f")
    return value


def dump_data(inst: Instance) -> str:
    """Serialize populations in scheme declaration order, 2-space indented."""
    doc = {}
    for s in inst.scheme.sets:
        if s.kind not in ("entity", "relationship"):
            continue
        own = [m for m in inst.scheme.mappings if m.domain == s.name and m.kind != "computed"]
        rows = []
        for eid in inst.populations[s.name]:
            row = {"id": eid}
            for m in own:
                row[m.name] = _encode_value(inst, m, inst.values[m.name].get(eid))
            rows.append(row)
        doc[s.name] = rows
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
