"""Command-line entry point: check, validate, meta, compile and demo."""
from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

from . import meta, sqlgen
from .dsl import DSLError, parse_scheme
from .engine import Engine, validate_eager
from .scheme import SchemeError
from .store import StoreError, load_data, new_instance
from .values import DomainError, format_date, parse_date

OK, FOUND, INPUT_ERROR, INCOHERENT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_bytes().decode("utf-8")
    except OSError as e:
        raise InputError(f"{path}: cannot read ({e.strerror})") from None
    except UnicodeDecodeError as e:
        raise InputError(f"{path}: not valid UTF-8 at byte {e.start}") from None


def _load_scheme(path: str):
    text = _read(path)
    try:
        return parse_scheme(text, path)
    except DSLError as e:
        raise InputError(str(e)) from None
    except SchemeError as e:
        raise InputError(f"{path}: {e.message}") from None


def _today(value: str | None) -> str:
    if value is None:
        return datetime.date.today().isoformat()
    try:
        parse_date(value)
    except DomainError as e:
        raise InputError(f"--today: {e}") from None
    return value


def _emit(out, text: str) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


def cmd_check(args, out) -> int:
    s = _load_scheme(args.scheme)
    _emit(out, f"scheme {s.name}: {len(s.sets)} sets, {len(s.mappings)} mappings, "
               f"{len(s.constraints)} constraints, {len(s.system_constraints)} system constraints")
    return OK


def cmd_validate(args, out) -> int:
    scheme = _load_scheme(args.scheme)
    today = _today(args.today)
    data = _read(args.data)
    try:
        if args.eager:
            report = validate_eager(scheme, data, today)
        else:
            report = Engine(scheme).validate(load_data(new_instance(scheme, today), data))
    except StoreError as e:
        raise InputError(f"{args.data}: {e.message}") from None
    mode = "eager" if args.eager else "deferred"
    if args.json:
        doc = {
            "scheme": scheme.name,
            "today": today,
            "mode": mode,
            "violations": [v.to_json() for v in report.violations],
            "count": len(report.violations),
            "enforcedElsewhere": [{"constraint": c, "note": n} for c, n in report.elsewhere],
        }
        _emit(out, json.dumps(doc, indent=2))
    else:
        lines = [f"scheme {scheme.name}, today {format_date(report.today)}, {mode} mode"]
        lines += [f"{v.constraint} [{v.kind}]: {v.message}" for v in report.violations]
        n = len(report.violations)
        lines.append(f"{n} violation{'s' if n != 1 else ''}")
        _emit(out, "\n".join(lines))
    return FOUND if report.violations else OK


def _meta_status(findings) -> int:
    if any(f.severity == "incoherent" for f in findings):
        return INCOHERENT
    if any(f.severity == "redundant" for f in findings):
        return FOUND
    return OK


def cmd_meta(args, out) -> int:
    scheme = _load_scheme(args.scheme)
    findings = meta.analyze(scheme)
    if args.json:
        _emit(out, meta.findings_json(findings))
    else:
        lines = [f"{f.severity}: {', '.join(f.constraints)} ({f.rule}): {f.message}" for f in findings]
        lines.append(f"{len(findings)} finding{'s' if len(findings) != 1 else ''}")
        _emit(out, "\n".join(lines))
    return _meta_status(findings)


def _write(path: str, text: str, out) -> None:
    if path == "-":
        out.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError(f"{path}: cannot write ({e.strerror})") from None


def cmd_compile(args, out) -> int:
    scheme = _load_scheme(args.scheme)
    if args.ddl is None and args.plan is None:
        args.ddl = "-"
    if args.ddl is not None:
        _write(args.ddl, sqlgen.emit_ddl(scheme), out)
    if args.plan is not None:
        _write(args.plan, sqlgen.emit_enforcement_plan(scheme).dumps(), out)
    return OK


def cmd_demo(args, out) -> int:
    from .demo import familytree

    scheme = familytree.family_tree_scheme()
    cases = familytree.load_suite()
    if args.case is not None:
        cases = [c for c in cases if c.name == args.case]
        if not cases:
            known = ", ".join(c.name for c in familytree.load_suite())
            raise InputError(f"unknown case {args.case!r}; known cases: {known}")
    results = familytree.run_suite(scheme, cases)
    clean = None
    if args.case is None:
        data = familytree.load_clean()
        deferred = Engine(scheme).validate(familytree.instance_for(scheme, data)).violations
        eager = familytree.eager_violations(scheme, data)
        clean = {"deferred": len(deferred), "eager": len(eager)}
    ok = all(r["passed"] and r["modes_agree"] for r in results)
    if clean is not None:
        ok = ok and clean == {"deferred": 0, "eager": 0}
    if args.json:
        _emit(out, json.dumps({"today": familytree.DEMO_TODAY, "clean": clean, "cases": results}, indent=2))
    else:
        lines = []
        if clean is not None:
            lines.append(f"{'PASS' if not any(clean.values()) else 'FAIL'} clean dataset: "
                         f"{clean['deferred']} violations deferred, {clean['eager']} eager")
        for r in results:
            mark = "PASS" if r["passed"] and r["modes_agree"] else "FAIL"
            lines.append(f"{mark} {r['name']}: expected {','.join(r['expected'])}; "
                         f"found {','.join(r['found'])}")
        lines.append(f"{sum(r['passed'] for r in results)}/{len(results)} cases caught")
        _emit(out, "\n".join(lines))
    return OK if ok else FOUND


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emdm", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="parse a scheme and check well-formedness")
    c.add_argument("scheme")
    c.set_defaults(run=cmd_check)

    v = sub.add_parser("validate", help="validate a JSON dataset against a scheme")
    v.add_argument("scheme")
    v.add_argument("data")
    mode = v.add_mutually_exclusive_group()
    mode.add_argument("--eager", action="store_true", help="check after every mutation")
    mode.add_argument("--deferred", action="store_true", help="check once after loading (default)")
    v.add_argument("--today", metavar="YYYY-MM-DD")
    v.add_argument("--json", action="store_true")
    v.set_defaults(run=cmd_validate)

    m = sub.add_parser("meta", help="coherence and minimality findings")
    m.add_argument("scheme")
    m.add_argument("--json", action="store_true")
    m.set_defaults(run=cmd_meta)

    k = sub.add_parser("compile", help="emit DDL and the enforcement plan")
    k.add_argument("scheme")
    k.add_argument("--ddl", metavar="OUT.sql")
    k.add_argument("--plan", metavar="OUT.json")
    k.set_defaults(run=cmd_compile)

    d = sub.add_parser("demo", help="run a bundled demonstration")
    d.add_argument("name", choices=["familytree"])
    d.add_argument("--case")
    d.add_argument("--json", action="store_true")
    d.set_defaults(run=cmd_demo)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else INPUT_ERROR
    try:
        return args.run(args, out)
    except InputError as e:
        err.write(f"error: {e}\n")
        return INPUT_ERROR


def main(argv=None) -> None:
    sys.exit(run(argv))
