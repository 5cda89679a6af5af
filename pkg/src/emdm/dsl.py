"""Textual scheme language (.emdm files).

Grammar, abridged::

    scheme     ::= "scheme" IDENT ";" decl*
    decl       ::= setDecl | valuesetDecl | mapDecl | constraintDecl
    setDecl    ::= "set" IDENT ":" ( "entity" | "system"
                   | "relationship" "(" [IDENT ":"] IDENT ("," [IDENT ":"] IDENT)+ ")"
                   | "computed" "=" IDENT "where" IDENT ":" cond ) ";"
    valuesetDecl ::= "valueset" IDENT "=" domain ";"
    mapDecl    ::= "map" IDENT ":" IDENT "->" (IDENT | domain) ("," mapAnnot)* ";"
    mapAnnot   ::= "total" | "key" | "nonprime" | "surjective" | "bijective"
                   | "default" "=" literal | PROPERTY | "=" mapExpr
    mapExpr    ::= IDENT ("@" IDENT)* | IDENT "->" term
    constraintDecl ::= "constraint" IDENT ":" body ";"

Products use ``&`` (or ``•``), compositions ``@`` (or ``∘``), dates are written
``#YYYY-MM-DD#`` and comments run from ``--`` to the end of the line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal

from . import formula as F
from .kinds import KINDS, PAIR_PROPERTIES, NULL_PAIR_PROPERTIES, SELF_MAP_PROPERTIES, property_kind
from .scheme import (
    Composition, ConstraintDecl, ExistencePattern, Lambda, MappingDecl, NullLiteral, Scheme,
    SchemeError, SetDecl, SetExpr, SYSTEM_SETS, build_scheme, check_formula,
)
from .values import (
    BASES, TODAY, DomainError, Interval, ValueDomain, format_date, infer_domain, parse_date,
    render_literal,
)

ALL_PROPERTIES = tuple(dict.fromkeys(PAIR_PROPERTIES + NULL_PAIR_PROPERTIES + SELF_MAP_PROPERTIES))
GENERAL_ANNOTATIONS = {
    "total": "totality",
    "key": "injectivity",
    "nonprime": "non-primeness",
    "surjective": "surjectivity",
    "bijective": "bijectivity",
}
SET_CLAUSES = {"subset": "inclusion", "disjoint": "disjointness"}
DIAGRAM_MODES = {
    "commutes": "diagram-commutativity",
    "nullcommutes": "diagram-null-commutativity",
    "anticommutes": "diagram-anti-commutativity",
}


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: frozenset = frozenset()

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


class DSLError(Exception):
    """Raised when a scheme or formula text does not parse or resolve."""

    def __init__(self, errors: list[ParseError]):
        super().__init__("\n".join(str(e) for e in errors))
        self.errors = errors


# -- lexer ------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # ident | num | str | date | sym | eof
    value: object
    line: int
    col: int
    length: int
    text: str


_UNICODE = {"⇒": "=>", "≠": "!=", "≤": "<=", "≥": ">=", "∘": "@", "•": "&", "→": "->", "<>": "!="}
_SYMBOLS = sorted(["->", "=>", "!=", "<>", "<=", ">=", "⇒", "≠", "≤", "≥", "∘", "•", "→",
                   ";", ":", ",", "(", ")", "[", "]", "{", "}", "=", "<", ">", "+", "-", "*",
                   "/", "&", "@"], key=len, reverse=True)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM = re.compile(r"\d+(\.\d+)?")
_DATE = re.compile(r"#(-?\d{1,6}-\d{2}-\d{2})#")


class _Syntax(Exception):
    def __init__(self, tok: Token, message: str, expected=()):
        super().__init__(message)
        self.tok = tok
        self.message = message
        self.expected = frozenset(expected)


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            toks.append(Token("ident", word, line, start_col, len(word), word))
        elif (m := _NUM.match(text, i)):
            raw = m.group()
            value = Decimal(raw) if "." in raw else int(raw)
            toks.append(Token("num", value, line, start_col, len(raw), raw))
        elif ch in "\"'":
            j, buf = i + 1, []
            while j < n and text[j] != ch and text[j] != "\n":
                if text[j] == "\\" and j + 1 < n:
                    buf.append({"n": "\n", "t": "\t"}.get(text[j + 1], text[j + 1]))
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n or text[j] != ch:
                raise _Syntax(Token("str", None, line, start_col, j - i, text[i:j]), "unterminated string literal")
            raw = text[i:j + 1]
            toks.append(Token("str", "".join(buf), line, start_col, len(raw), raw))
            m = raw
        elif ch == "#":
            m = _DATE.match(text, i)
            tok = Token("date", None, line, start_col, 1, "#")
            if not m:
                raise _Syntax(tok, "malformed date literal (expected #YYYY-MM-DD#)")
            try:
                days = parse_date(m.group(1))
            except DomainError as e:
                raise _Syntax(tok, str(e)) from None
            toks.append(Token("date", days, line, start_col, len(m.group()), m.group()))
        else:
            for sym in _SYMBOLS:
                if text.startswith(sym, i):
                    toks.append(Token("sym", _UNICODE.get(sym, sym), line, start_col, len(sym), sym))
                    m = sym
                    break
            else:
                raise _Syntax(Token("sym", ch, line, start_col, 1, ch), f"unexpected character {ch!r}")
        width = len(m.group()) if isinstance(m, re.Match) else len(m)
        i += width
        col += width
    toks.append(Token("eof", None, line, col, 0, ""))
    return toks


# -- parser -----------------------------------------------------------------

@dataclass
class _Pending:
    """A constraint whose kind depends on what its target names turn out to be."""

    id: str
    clause: str
    payload: tuple
    tok: Token


@dataclass
class _Decls:
    name: str = ""
    sets: list = field(default_factory=list)
    maps: list = field(default_factory=list)
    annotations: list = field(default_factory=list)
    constraints: list = field(default_factory=list)  # ConstraintDecl | _Pending
    spans: dict = field(default_factory=dict)


class _Parser:
    def __init__(self, tokens: list[Token], file: str):
        self.toks = tokens
        self.pos = 0
        self.file = file
        self.bound: list[str] = []

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, value, kind=None) -> bool:
        tok = self.tok
        if kind is not None and tok.kind != kind:
            return False
        return tok.kind in ("sym", "ident") and tok.value == value

    def accept(self, value) -> bool:
        if self.at(value):
            self.advance()
            return True
        return False

    def expect(self, value) -> Token:
        if not self.at(value):
            raise _Syntax(self.tok, f"expected {value!r}, found {self._describe(self.tok)}", {value})
        return self.advance()

    def ident(self, what="identifier") -> Token:
        if self.tok.kind != "ident":
            raise _Syntax(self.tok, f"expected {what}, found {self._describe(self.tok)}", {what})
        return self.advance()

    @staticmethod
    def _describe(tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def span(self, tok: Token) -> SourceSpan:
        return SourceSpan(self.file, tok.line, tok.col, max(tok.length, 1))

    # scheme level
    def scheme(self, decls: _Decls, errors: list[ParseError]) -> None:
        try:
            self.expect("scheme")
            tok = self.ident("scheme name")
            decls.name = tok.value
            decls.spans[("scheme", tok.value)] = self.span(tok)
            self.expect(";")
        except _Syntax as e:
            errors.append(ParseError(self.span(e.tok), e.message, e.expected))
            self._sync()
        while self.tok.kind != "eof":
            start = self.pos
            try:
                self.declaration(decls)
            except _Syntax as e:
                errors.append(ParseError(self.span(e.tok), e.message, e.expected))
                if self.pos == start:
                    self.advance()
                self._sync()

    def _sync(self) -> None:
        depth = 0
        while self.tok.kind != "eof":
            tok = self.advance()
            if tok.kind == "sym":
                if tok.value in "([{":
                    depth += 1
                elif tok.value in ")]}":
                    depth = max(depth - 1, 0)
                elif tok.value == ";" and depth == 0:
                    return

    def declaration(self, d: _Decls) -> None:
        tok = self.tok
        if self.accept("set"):
            self.set_decl(d)
        elif self.accept("valueset"):
            name = self.ident("value set name")
            self.expect("=")
            dom = self.domain()
            self.expect(";")
            d.sets.append(SetDecl(name.value, "value", domain=dom))
            d.spans[("set", name.value)] = self.span(name)
        elif self.accept("map"):
            self.map_decl(d)
        elif self.accept("constraint"):
            self.constraint_decl(d)
        else:
            raise _Syntax(tok, f"expected a declaration, found {self._describe(tok)}",
                          {"set", "valueset", "map", "constraint"})

    def set_decl(self, d: _Decls) -> None:
        name = self.ident("set name")
        self.expect(":")
        kw = self.ident("set kind")
        if kw.value == "entity":
            decl = SetDecl(name.value, "entity")
        elif kw.value == "system":
            if name.value not in SYSTEM_SETS:
                raise _Syntax(name, f"unknown system set {name.value}")
            decl = SetDecl(name.value, "system", domain=SYSTEM_SETS[name.value])
        elif kw.value == "relationship":
            self.expect("(")
            comps = [self.component()]
            while self.accept(","):
                comps.append(self.component())
            self.expect(")")
            if len(comps) < 2:
                raise _Syntax(self.tok, "a relationship set needs at least 2 components")
            decl = SetDecl(name.value, "relationship", components=_roles(comps))
        elif kw.value == "computed":
            self.expect("=")
            base = self.ident("base set").value
            self.expect("where")
            var = self.ident("variable").value
            self.expect(":")
            self.bound = [var]
            pred = self.cond()
            self.bound = []
            decl = SetDecl(name.value, "computed", definition=SetExpr(base, var, pred))
        else:
            raise _Syntax(kw, f"unknown set kind {kw.value!r}",
                          {"entity", "relationship", "computed", "system"})
        self.expect(";")
        d.sets.append(decl)
        d.spans[("set", name.value)] = self.span(name)

    def component(self):
        first = self.ident("component set").value
        if self.accept(":"):
            return first, self.ident("component set").value
        return None, first

    def map_decl(self, d: _Decls) -> None:
        name = self.ident("mapping name")
        self.expect(":")
        dom = self.ident("domain set").value
        self.expect("->")
        if self.tok.kind == "ident" and self.tok.value not in BASES:
            codomain = self.advance().value
        else:
            codomain = self.domain()
        definition = None
        annotations = []
        while self.accept(","):
            tok = self.tok
            if self.accept("="):
                definition = self.map_expr(dom)
                continue
            word = self.ident("annotation")
            if word.value == "default":
                self.expect("=")
                annotations.append(("default-value", {"value": self.literal_for(codomain)}, word))
            elif word.value in GENERAL_ANNOTATIONS:
                annotations.append((GENERAL_ANNOTATIONS[word.value], {}, word))
            elif word.value in SELF_MAP_PROPERTIES:
                annotations.append((property_kind("self-map", word.value).name, {}, word))
            else:
                raise _Syntax(tok, f"unknown mapping annotation {word.value!r}")
        self.expect(";")
        d.maps.append(MappingDecl(name.value, dom, codomain, definition=definition))
        d.spans[("map", name.value)] = self.span(name)
        for kind_name, params, word in annotations:
            cid = f"{name.value}.{_annotation_word(kind_name, word.value)}"
            d.annotations.append(ConstraintDecl(cid, KINDS[kind_name], (name.value,), params, "annotation"))
            d.spans[("constraint", cid)] = self.span(word)

    def map_expr(self, domain_set):
        if self.tok.kind == "ident" and self.peek().kind == "sym" and self.peek().value == "->":
            var = self.advance().value
            self.advance()
            self.bound = [var]
            term = self.term()
            self.bound = []
            return Lambda(var, term)
        return Composition(self.chain())

    def chain(self) -> tuple:
        names = [self.ident("mapping name").value]
        while self.accept("@"):
            names.append(self.ident("mapping name").value)
        return tuple(names)

    def product(self) -> tuple:
        names = [self.ident("mapping name").value]
        while self.accept("&"):
            names.append(self.ident("mapping name").value)
        return tuple(names)

    def name_list(self) -> tuple:
        self.expect("(")
        names = [self.ident("mapping name").value]
        while self.accept(","):
            names.append(self.ident("mapping name").value)
        self.expect(")")
        return tuple(names)

    def opt_on(self):
        if self.accept("on"):
            return self.ident("set name").value
        return None

    def constraint_decl(self, d: _Decls) -> None:
        name = self.ident("constraint id")
        self.expect(":")
        cid = name.value
        tok = self.tok
        if self.accept("formula"):
            f = self.formula()
            c = ConstraintDecl(cid, KINDS["object"], tuple(F.mappings_used(f)), {"formula": f})
        elif self.accept("diagram"):
            self.expect("formula")
            f = self.formula()
            c = ConstraintDecl(cid, KINDS["diagram-general-commutativity"], tuple(F.mappings_used(f)),
                               {"formula": f})
        elif self.accept("key"):
            comps = self.name_list()
            c = _Pending(cid, "key", (comps, self.opt_on()), tok)
        elif self.accept("subkey"):
            sub = self.name_list()
            self.expect("of")
            full = self.name_list()
            guards = None
            if self.accept("when"):
                guards = self.product()
                self.expect("null")
            c = _Pending(cid, "subkey", (sub, full, guards, self.opt_on()), tok)
        elif self.accept("path"):
            left = self.chain()
            if self.accept("is"):
                word = self.ident("property")
                if word.value not in SELF_MAP_PROPERTIES:
                    raise _Syntax(word, f"{word.value!r} is not a local diagram property")
                kind = property_kind("local", word.value)
                c = ConstraintDecl(cid, kind, left, {"path": left})
            else:
                mode = self.ident("commutes, nullcommutes or anticommutes")
                if mode.value not in DIAGRAM_MODES:
                    raise _Syntax(mode, f"unknown diagram mode {mode.value!r}", set(DIAGRAM_MODES))
                self.expect("with")
                right = self.chain()
                c = ConstraintDecl(cid, KINDS[DIAGRAM_MODES[mode.value]],
                                   tuple(dict.fromkeys(left + right)), {"left": left, "right": right})
        elif self.at("not") or self.tok.kind == "ident" and self._lookahead_exists():
            c = _Pending(cid, "existence", self.existence(), tok)
        else:
            target = self.product()
            if self.accept("is"):
                word = self.ident("property")
                if word.value not in ALL_PROPERTIES:
                    raise _Syntax(word, f"unknown property {word.value!r}", set(ALL_PROPERTIES))
                c = _Pending(cid, "property", (target, word.value), word)
            elif len(target) == 1 and self.tok.kind == "ident" and self.tok.value in SET_CLAUSES:
                kind = SET_CLAUSES[self.advance().value]
                other = self.ident("set name").value
                c = ConstraintDecl(cid, KINDS[kind], (target[0], other))
            elif len(target) == 1 and self.accept("="):
                if self.tok.kind == "ident" and self.tok.value in ("union", "dsum") and self.peek().value == "(":
                    kind = "union" if self.advance().value == "union" else "direct-sum"
                    members = self.name_list()
                    c = ConstraintDecl(cid, KINDS[kind], (target[0],) + members)
                else:
                    other = self.ident("set name").value
                    c = ConstraintDecl(cid, KINDS["equality"], (target[0], other))
            else:
                raise _Syntax(self.tok, f"unrecognized constraint body near {self._describe(self.tok)}",
                              {"is", "subset", "disjoint", "=", "exists"})
        self.expect(";")
        d.constraints.append(c)
        d.spans[("constraint", cid)] = self.span(name)

    def _lookahead_exists(self) -> bool:
        # a product followed by "exists"
        k = 0
        while True:
            tok = self.peek(k)
            if tok.kind != "ident":
                return False
            nxt = self.peek(k + 1)
            if nxt.kind == "ident" and nxt.value == "exists":
                return True
            if nxt.kind == "sym" and nxt.value == "&":
                k += 2
                continue
            return False

    def existence(self):
        ante = self.null_literals()
        self.expect("=>")
        cons = self.null_literals()
        return ExistencePattern(ante, cons), self.opt_on()

    def null_literals(self) -> tuple:
        lits = [self.null_literal()]
        while self.accept("and"):
            lits.append(self.null_literal())
        return tuple(lits)

    def null_literal(self) -> NullLiteral:
        negated = self.accept("not")
        comps = self.product()
        self.expect("exists")
        return NullLiteral(comps, not negated)

    # value domains and literals
    def domain(self) -> ValueDomain:
        tok = self.tok
        base = digits = scale = None
        if tok.kind == "ident" and tok.value in BASES:
            base = self.advance().value
            if base not in ("DATETIME", "BOOLE"):
                self.expect("(")
                digits = self.natural()
                if base == "RAT":
                    self.expect(",")
                    scale = self.natural()
                self.expect(")")
        interval = enumeration = None
        cats: list[str] = []
        if self.at("[") or self.at("("):
            interval, cats = self.interval()
        elif self.at("{"):
            self.advance()
            items = [self.literal()]
            while self.accept(","):
                items.append(self.literal())
            self.expect("}")
            cats = [c for _, c in items]
            enumeration = tuple(v for v, _ in items)
        elif base is None:
            raise _Syntax(tok, f"expected a value domain, found {self._describe(tok)}",
                          {"[", "(", "{"} | set(BASES))
        try:
            if base is None:
                return infer_domain(interval, enumeration, tuple(cats))
            return ValueDomain(base, digits, scale, interval, enumeration)
        except DomainError as e:
            raise _Syntax(tok, str(e)) from None

    def natural(self) -> int:
        tok = self.tok
        if tok.kind != "num" or not isinstance(tok.value, int):
            raise _Syntax(tok, "expected a natural number", {"number"})
        return self.advance().value

    def interval(self):
        low_closed = self.advance().value == "["
        cats = []
        low, cat = self.bound_value()
        cats += cat
        self.expect(",")
        high, cat = self.bound_value()
        cats += cat
        if self.at("]") or self.at(")"):
            high_closed = self.advance().value == "]"
        else:
            raise _Syntax(self.tok, "expected ']' or ')'", {"]", ")"})
        return Interval(low, high, low_closed, high_closed), cats

    def bound_value(self):
        if self.accept("*"):
            return None, []
        if self.at("Today"):
            self.advance()
            self.expect("(")
            self.expect(")")
            return TODAY, ["date"]
        value, cat = self.literal()
        return value, [cat]

    def literal(self):
        tok = self.tok
        if tok.kind == "sym" and tok.value == "-" and self.peek().kind == "num":
            self.advance()
            return -self.advance().value, "num"
        if tok.kind == "num":
            return self.advance().value, "num"
        if tok.kind == "str":
            return self.advance().value, "text"
        if tok.kind == "date":
            return self.advance().value, "date"
        if tok.kind == "ident" and tok.value in ("true", "false"):
            return self.advance().value == "true", "bool"
        raise _Syntax(tok, f"expected a literal, found {self._describe(tok)}", {"literal"})

    def literal_for(self, codomain):
        value, _ = self.literal()
        return value

    # formulas
    def formula(self) -> F.Formula:
        self.expect("forall")
        binders = []
        while True:
            names = [self.ident("variable").value]
            while self.accept(","):
                names.append(self.ident("variable").value)
            self.expect("in")
            set_name = self.ident("set name").value
            binders += [(n, set_name) for n in names]
            if not (self.at(",") and self.peek().kind == "ident"):
                break
            self.advance()
        self.expect("(")
        self.bound = [v for v, _ in binders]
        body = self.cond()
        self.bound = []
        self.expect(")")
        return F.Formula(tuple(binders), body)

    def cond(self):
        left = self.disjunction()
        if self.accept("=>"):
            return F.Implies(left, self.cond())
        return left

    def disjunction(self):
        items = [self.conjunction()]
        while self.accept("or"):
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else F.Or(tuple(items))

    def conjunction(self):
        items = [self.negation()]
        while self.accept("and"):
            items.append(self.negation())
        return items[0] if len(items) == 1 else F.And(tuple(items))

    def negation(self):
        if self.accept("not"):
            return F.Not(self.negation())
        return self.atom()

    _AFTER_TERM = {"=", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "null", "notnull"}

    def atom(self):
        if self.at("("):
            save = self.pos
            try:
                self.advance()
                inner = self.cond()
                self.expect(")")
                if not (self.tok.kind in ("sym", "ident") and self.tok.value in self._AFTER_TERM):
                    return inner
            except _Syntax:
                pass
            self.pos = save
        return self.comparison()

    def comparison(self):
        left = self.term()
        if self.accept("null"):
            return F.NullTest(left, True)
        if self.accept("notnull"):
            return F.NullTest(left, False)
        parts = []
        while self.tok.kind == "sym" and self.tok.value in F.COMPARISONS:
            op = self.advance().value
            right = self.term()
            parts.append(F.Cmp(op, left, right))
            left = right
        if not parts:
            raise _Syntax(self.tok, f"expected a comparison, found {self._describe(self.tok)}",
                          set(F.COMPARISONS) | {"null", "notnull"})
        return parts[0] if len(parts) == 1 else F.And(tuple(parts))

    def term(self):
        left = self.factor()
        while self.tok.kind == "sym" and self.tok.value in ("+", "-"):
            op = self.advance().value
            left = F.Arith(op, left, self.factor())
        return left

    def factor(self):
        left = self.unary()
        while self.tok.kind == "sym" and self.tok.value in ("*", "/"):
            op = self.advance().value
            left = F.Arith(op, left, self.unary())
        return left

    def unary(self):
        if self.at("-", "sym"):
            self.advance()
            inner = self.unary()
            if isinstance(inner, F.Lit) and inner.category == "num":
                return F.Lit(-inner.value, "num")
            return F.Arith("-", F.Lit(0, "num"), inner)
        return self.primary()

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            return F.Lit(self.advance().value, "num")
        if tok.kind == "str":
            return F.Lit(self.advance().value, "text")
        if tok.kind == "date":
            return F.Lit(self.advance().value, "date")
        if tok.kind == "ident":
            if tok.value in ("true", "false"):
                self.advance()
                return F.Lit(tok.value == "true", "bool")
            self.advance()
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.term())
                    while self.accept(","):
                        args.append(self.term())
                self.expect(")")
                if tok.value in F.BUILTINS:
                    return F.Call(tok.value, tuple(args))
                if len(args) != 1:
                    raise _Syntax(tok, f"mapping {tok.value} takes exactly one argument")
                return F.Apply(tok.value, args[0])
            if tok.value not in self.bound:
                raise _Syntax(tok, f"unbound variable {tok.value}")
            return F.Var(tok.value)
        if self.at("("):
            self.advance()
            if self.tok.kind == "ident" and self.peek().kind == "sym" and self.peek().value == "@":
                chain = self.chain()
                self.expect(")")
                self.expect("(")
                arg = self.term()
                self.expect(")")
                return F.apply_chain(chain, arg)
            inner = self.term()
            self.expect(")")
            return inner
        raise _Syntax(tok, f"expected a term, found {self._describe(tok)}", {"term"})


def _roles(comps) -> tuple:
    """Default role names: the component set name, numbered when repeated."""
    names = [c for _, c in comps]
    out = []
    for i, (role, comp) in enumerate(comps):
        if role is None:
            role = comp if names.count(comp) == 1 else f"{comp}{names[:i + 1].count(comp)}"
        out.append((role, comp))
    return tuple(out)


def _annotation_word(kind_name: str, word: str) -> str:
    return "default" if kind_name == "default-value" else word


def _resolve_pending(d: _Decls, p: _Pending) -> ConstraintDecl:
    set_names = {s.name for s in d.sets}
    domains = {m.name: m.domain for m in d.maps}
    for s in d.sets:
        if s.kind == "relationship":
            for role, _ in s.components:
                domains.setdefault(role, s.name)

    def fail(message):
        raise _Syntax(p.tok, message)

    def domain_of(names):
        return domains.get(names[0]) if names else None

    if p.clause == "property":
        target, prop = p.payload
        if len(target) == 2:
            return ConstraintDecl(p.id, property_kind("hbfp", prop), target)
        if len(target) != 1:
            fail("a property targets a set, a mapping, or a product of two mappings")
        name = target[0]
        if name in set_names and name in domains:
            fail(f"{name} names both a set and a mapping")
        if name in set_names:
            if prop not in PAIR_PROPERTIES:
                fail(f"{prop} is not a dyadic relation property")
            return ConstraintDecl(p.id, property_kind("set-dyadic", prop), target)
        if prop not in SELF_MAP_PROPERTIES:
            fail(f"{prop} is not a self-map property")
        return ConstraintDecl(p.id, property_kind("self-map", prop), target)
    if p.clause == "key":
        comps, on = p.payload
        on = on or domain_of(comps)
        if len(comps) == 1:
            return ConstraintDecl(p.id, KINDS["injectivity"], comps, {"set": on})
        return ConstraintDecl(p.id, KINDS["concatenated-key"], comps, {"set": on})
    if p.clause == "subkey":
        sub, full, guards, on = p.payload
        on = on or domain_of(full)
        if guards is None:
            guards = tuple(f for f in full if f not in sub)
        return ConstraintDecl(p.id, KINDS["subkey"], full, {"sub": sub, "guards": guards, "set": on})
    pattern, on = p.payload
    comps = tuple(dict.fromkeys(fn for lit in pattern.antecedent + pattern.consequent for fn in lit.components))
    on = on or domain_of(comps)
    kind = "existence" if pattern.is_existence else "non-existence"
    return ConstraintDecl(p.id, KINDS[kind], comps, {"pattern": pattern, "set": on})


def _decode(text) -> str:
    if isinstance(text, (bytes, bytearray)):
        return bytes(text).decode("utf-8")
    return text


def parse_scheme(text, file: str = "<input>") -> Scheme:
    """Parse scheme source text; raise DSLError listing every problem found."""
    try:
        text = _decode(text)
    except UnicodeDecodeError as e:
        before = bytes(text[:e.start])
        line = before.count(b"\n") + 1
        col = e.start - (before.rfind(b"\n") + 1) + 1
        raise DSLError([ParseError(SourceSpan(file, line, col, e.end - e.start),
                                   f"invalid UTF-8: {e.reason}")]) from None
    try:
        tokens = tokenize(text, file)
    except _Syntax as e:
        tok = e.tok
        raise DSLError([ParseError(SourceSpan(file, tok.line, tok.col, max(tok.length, 1)), e.message)]) from None
    parser = _Parser(tokens, file)
    decls = _Decls()
    errors: list[ParseError] = []
    parser.scheme(decls, errors)
    constraints = []
    for c in decls.constraints:
        if isinstance(c, _Pending):
            try:
                c = _resolve_pending(decls, c)
            except _Syntax as e:
                errors.append(ParseError(parser.span(e.tok), e.message))
                continue
        constraints.append(c)
    if errors:
        raise DSLError(errors)
    try:
        return build_scheme(decls.name, decls.sets, decls.maps, decls.annotations + constraints)
    except SchemeError as e:
        span = decls.spans.get(e.subject) or decls.spans.get(("scheme", decls.name)) \
            or SourceSpan(file, 1, 1, 1)
        raise DSLError([ParseError(span, e.message)]) from None


def parse_formula(text: str, scheme: Scheme, file: str = "<formula>") -> F.Formula:
    """Parse and type-check a standalone formula against `scheme`."""
    try:
        parser = _Parser(tokenize(text, file), file)
        f = parser.formula()
        if parser.tok.kind != "eof":
            raise _Syntax(parser.tok, f"unexpected {parser._describe(parser.tok)} after formula")
    except _Syntax as e:
        tok = e.tok
        raise DSLError([ParseError(SourceSpan(file, tok.line, tok.col, max(tok.length, 1)),
                                   e.message, e.expected)]) from None
    try:
        check_formula(scheme, f)
    except SchemeError as e:
        raise DSLError([ParseError(SourceSpan(file, 1, 1, max(len(text), 1)), e.message)]) from None
    return f


# -- serializer -------------------------------------------------------------

def render_domain(dom: ValueDomain) -> str:
    out = dom.base_text()
    if dom.enumeration is not None:
        out += " {" + ", ".join(_lit(v, dom.category) for v in dom.enumeration) + "}"
    if dom.interval is not None:
        iv = dom.interval
        out += " " + ("[" if iv.low_closed else "(") + _bound(iv.low, dom.category) + ", " \
            + _bound(iv.high, dom.category) + ("]" if iv.high_closed else ")")
    return out


def _bound(b, category) -> str:
    if b is None:
        return "*"
    if b is TODAY:
        return "Today()"
    return _lit(b, category)


def _lit(value, category) -> str:
    if category == "date":
        return f"#{format_date(value)}#"
    return render_literal(value, category)


_COND_LEVEL = {F.Implies: 1, F.Or: 2, F.And: 3, F.Not: 4}


def render_term(t) -> str:
    if isinstance(t, F.Var):
        return t.name
    if isinstance(t, F.Lit):
        return _lit(t.value, t.category)
    if isinstance(t, F.Apply):
        return f"{t.fn}({render_term(t.arg)})"
    if isinstance(t, F.Call):
        return f"{t.name}({', '.join(render_term(a) for a in t.args)})"
    level = 1 if t.op in ("+", "-") else 2
    left, right = render_term(t.left), render_term(t.right)
    if _term_level(t.left) < level:
        left = f"({left})"
    if _term_level(t.right) <= level:
        right = f"({right})"
    return f"{left} {t.op} {right}"


def _term_level(t) -> int:
    if isinstance(t, F.Arith):
        return 1 if t.op in ("+", "-") else 2
    return 3


def render_cond(c) -> str:
    if isinstance(c, F.Cmp):
        return f"{render_term(c.left)} {c.op} {render_term(c.right)}"
    if isinstance(c, F.NullTest):
        return f"{render_term(c.term)} {'null' if c.is_null else 'notnull'}"
    level = _COND_LEVEL[type(c)]

    def child(x):
        text = render_cond(x)
        return f"({text})" if _COND_LEVEL.get(type(x), 5) <= level else text

    if isinstance(c, F.Not):
        inner = render_cond(c.item)
        return f"not {inner}" if _COND_LEVEL.get(type(c.item), 5) >= 4 else f"not ({inner})"
    if isinstance(c, F.Implies):
        return f"{child(c.ante)} => {child(c.cons)}"
    sep = " and " if isinstance(c, F.And) else " or "
    return sep.join(child(i) for i in c.items)


def render_formula(f: F.Formula) -> str:
    groups: list[tuple[list[str], str]] = []
    for var, set_name in f.binders:
        if groups and groups[-1][1] == set_name:
            groups[-1][0].append(var)
        else:
            groups.append(([var], set_name))
    binders = ", ".join(f"{', '.join(vs)} in {s}" for vs, s in groups)
    return f"forall {binders} ({render_cond(f.body)})"


def _render_annotation(c: ConstraintDecl, scheme: Scheme) -> str:
    if c.kind.name == "default-value":
        dom = scheme.value_domain(c.targets[0])
        return f"default = {_lit(c.param('value'), dom.category)}"
    for word, kind_name in GENERAL_ANNOTATIONS.items():
        if kind_name == c.kind.name:
            return word
    return c.kind.prop


def _render_set(s: SetDecl) -> str:
    if s.kind == "value":
        return f"valueset {s.name} = {render_domain(s.domain)};"
    if s.kind == "relationship":
        defaults = dict(zip((r for r, _ in _roles([(None, c) for _, c in s.components])), ()))
        auto = _roles([(None, c) for _, c in s.components])
        comps = []
        for (role, comp), (auto_role, _) in zip(s.components, auto):
            comps.append(comp if role == auto_role else f"{role}: {comp}")
        del defaults
        return f"set {s.name}: relationship({', '.join(comps)});"
    if s.kind == "computed":
        d = s.definition
        return f"set {s.name}: computed = {d.base} where {d.var}: {render_cond(d.predicate)};"
    return f"set {s.name}: {s.kind};"


def _render_constraint(c: ConstraintDecl) -> str:
    k = c.kind
    name, fam, t = k.name, k.family, c.targets
    if name == "object":
        body = f"formula {render_formula(c.param('formula'))}"
    elif name == "diagram-general-commutativity":
        body = f"diagram formula {render_formula(c.param('formula'))}"
    elif name == "inclusion":
        body = f"{t[0]} subset {t[1]}"
    elif name == "disjointness":
        body = f"{t[0]} disjoint {t[1]}"
    elif name == "equality":
        body = f"{t[0]} = {t[1]}"
    elif name in ("union", "direct-sum"):
        fn = "union" if name == "union" else "dsum"
        body = f"{t[0]} = {fn}({', '.join(t[1:])})"
    elif fam in ("set-dyadic", "self-map", "hbfp"):
        body = f"{' & '.join(t)} is {k.prop}"
    elif name == "injectivity":
        body = f"key ({t[0]})" + (f" on {c.param('set')}" if c.param("set") else "")
    elif name == "concatenated-key":
        body = f"key ({', '.join(t)}) on {c.param('set')}"
    elif name == "subkey":
        body = (f"subkey ({', '.join(c.param('sub'))}) of ({', '.join(t)}) "
                f"when {' & '.join(c.param('guards'))} null on {c.param('set')}")
    elif name in ("existence", "non-existence"):
        p = c.param("pattern")

        def lits(xs):
            return " and ".join(("" if x.exists else "not ") + " & ".join(x.components) + " exists" for x in xs)

        body = f"{lits(p.antecedent)} => {lits(p.consequent)} on {c.param('set')}"
    elif fam == "diagram" and k.prop is not None:
        body = f"path {' @ '.join(c.param('path'))} is {k.prop}"
    elif fam == "diagram":
        mode = {v: m for m, v in DIAGRAM_MODES.items()}[name]
        body = f"path {' @ '.join(c.param('left'))} {mode} with {' @ '.join(c.param('right'))}"
    else:
        raise ValueError(f"constraint {c.id} of kind {name} has no surface syntax")
    return f"constraint {c.id}: {body};"


def serialize_scheme(scheme: Scheme) -> str:
    """Render a scheme as DSL text; parse_scheme inverts this exactly."""
    lines = [f"scheme {scheme.name};", ""]
    for s in scheme.sets:
        lines.append(_render_set(s))
    annotations: dict[str, list[ConstraintDecl]] = {}
    for c in scheme.constraints:
        if c.origin == "annotation":
            annotations.setdefault(c.targets[0], []).append(c)
    maps = [m for m in scheme.mappings if m.origin != "projection"]
    if maps:
        lines.append("")
    for m in maps:
        co = m.codomain if isinstance(m.codomain, str) else render_domain(m.codomain)
        parts = [f"map {m.name}: {m.domain} -> {co}"]
        if isinstance(m.definition, Composition):
            parts.append("= " + " @ ".join(m.definition.chain))
        elif isinstance(m.definition, Lambda):
            parts.append(f"= {m.definition.var} -> {render_term(m.definition.term)}")
        parts += [_render_annotation(c, scheme) for c in annotations.get(m.name, [])]
        lines.append(", ".join(parts) + ";")
    declared = [c for c in scheme.constraints if c.origin != "annotation"]
    if declared:
        lines.append("")
    for c in declared:
        lines.append(_render_constraint(c))
    return "\n".join(lines) + "\n"
