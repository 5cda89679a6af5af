"""Value domains and scalar values.

Values are plain Python objects: ``None`` is the single null marker, numbers
are ``int`` (NAT/INT) or ``Decimal`` (RAT/CURRENCY), text is ``str``, booleans
are ``bool`` and dates are ``int`` day counts since 1970-01-01 on the
proleptic Gregorian calendar (negative years included).
"""
from __future__ import annotations

import datetime as _dt
import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

NUMERIC_BASES = ("NAT", "INT", "RAT", "CURRENCY")
BASES = NUMERIC_BASES + ("ASCII", "DATETIME", "BOOLE")

CURRENCY_SCALE = 2


class DomainError(ValueError):
    pass


# -- dates ------------------------------------------------------------------

def days_from_civil(y: int, m: int, d: int) -> int:
    # H. Hinnant's days_from_civil; exact for any proleptic Gregorian date
    y -= m <= 2
    era = y // 400
    yoe = y - era * 400
    doy = (153 * (m + (-3 if m > 2 else 9)) + 2) // 5 + d - 1
    doe = yoe * 365 + yoe // 4 - yoe // 100 + doy
    return era * 146097 + doe - 719468


def civil_from_days(z: int) -> tuple[int, int, int]:
    z += 719468
    era = z // 146097
    doe = z - era * 146097
    yoe = (doe - doe // 1460 + doe // 36524 - doe // 146096) // 365
    y = yoe + era * 400
    doy = doe - (365 * yoe + yoe // 4 - yoe // 100)
    mp = (5 * doy + 2) // 153
    d = doy - (153 * mp + 2) // 5 + 1
    m = mp + (3 if mp < 10 else -9)
    return y + (m <= 2), m, d


_DATE_RE = re.compile(r"^(-?\d{1,6})-(\d{2})-(\d{2})$")


def _days_in_month(y: int, m: int) -> int:
    if m == 2:
        leap = y % 4 == 0 and (y % 100 != 0 or y % 400 == 0)
        return 29 if leap else 28
    return 30 if m in (4, 6, 9, 11) else 31


def parse_date(text: str) -> int:
    match = _DATE_RE.match(text)
    if not match:
        raise DomainError(f"malformed date {text!r} (expected YYYY-MM-DD)")
    y, m, d = (int(g) for g in match.groups())
    if not 1 <= m <= 12 or not 1 <= d <= _days_in_month(y, m):
        raise DomainError(f"invalid calendar date {text!r}")
    return days_from_civil(y, m, d)


def format_date(days: int) -> str:
    y, m, d = civil_from_days(days)
    sign = "-" if y < 0 else ""
    return f"{sign}{abs(y):04d}-{m:02d}-{d:02d}"


def to_days(value) -> int:
    """Accept a day count, a ``datetime.date`` or an ISO string."""
    if isinstance(value, bool):
        raise DomainError(f"{value!r} is not a date")
    if isinstance(value, int):
        return value
    if isinstance(value, _dt.date):
        return days_from_civil(value.year, value.month, value.day)
    if isinstance(value, str):
        return parse_date(value)
    raise DomainError(f"{value!r} is not a date")


# -- domains ----------------------------------------------------------------

class _Today:
    """The dynamic interval bound Today(), resolved against an instance clock."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Today()"

    def __reduce__(self):
        return (_Today, ())


TODAY = _Today()


@dataclass(frozen=True)
class Interval:
    low: object = None  # None means unbounded
    high: object = None
    low_closed: bool = True
    high_closed: bool = True


@dataclass(frozen=True)
class ValueDomain:
    base: str
    digits: int | None = None  # n of NAT(n), INT(n), RAT(n,m), CURRENCY(n), ASCII(n)
    scale: int | None = None  # m of RAT(n,m)
    interval: Interval | None = None
    enumeration: tuple | None = None

    def __post_init__(self):
        if self.base not in BASES:
            raise DomainError(f"unknown value domain {self.base!r}")
        if self.base in ("NAT", "INT", "CURRENCY", "ASCII") and self.digits is None:
            raise DomainError(f"{self.base} requires a size")
        if self.base == "RAT" and (self.digits is None or self.scale is None):
            raise DomainError("RAT requires (n, m)")
        for literal in self.enumeration or ():
            if self.base_violation(literal) is not None:
                raise DomainError(f"enumeration member {literal!r} does not conform to {self.base_text()}")
        if self.interval is not None:
            for bound in (self.interval.low, self.interval.high):
                if bound is None:
                    continue
                if bound is TODAY:
                    if self.base != "DATETIME":
                        raise DomainError("Today() bound requires a DATETIME domain")
                elif self.base_violation(bound) is not None:
                    raise DomainError(f"interval bound {bound!r} does not conform to {self.base_text()}")

    @property
    def category(self) -> str:
        if self.base in NUMERIC_BASES:
            return "num"
        return {"ASCII": "text", "DATETIME": "date", "BOOLE": "bool"}[self.base]

    @property
    def effective_scale(self) -> int:
        if self.base == "CURRENCY":
            return CURRENCY_SCALE
        return self.scale or 0

    @property
    def enumerable(self) -> bool:
        return self.enumeration is not None or self.base == "BOOLE"

    def members(self) -> tuple:
        if self.enumeration is not None:
            return self.enumeration
        if self.base == "BOOLE":
            return (True, False)
        raise DomainError(f"{self.base_text()} is not enumerable")

    def base_text(self) -> str:
        if self.base == "RAT":
            return f"RAT({self.digits}, {self.scale})"
        if self.digits is not None:
            return f"{self.base}({self.digits})"
        return self.base

    def coerce(self, value):
        """Normalize a Python value to this domain's representation.

        Raises DomainError when the value has the wrong type.  Range and digit
        bounds are checked separately by `violation`.
        """
        if value is None:
            return None
        base = self.base
        if base in ("NAT", "INT"):
            if isinstance(value, bool) or not isinstance(value, int):
                if isinstance(value, Decimal) and value == value.to_integral_value():
                    return int(value)
                raise DomainError(f"{value!r} is not an integer")
            return value
        if base in ("RAT", "CURRENCY"):
            if isinstance(value, bool):
                raise DomainError(f"{value!r} is not a number")
            if isinstance(value, (int, Decimal)):
                return Decimal(value)
            if isinstance(value, (float, str)):
                try:
                    return Decimal(str(value))
                except InvalidOperation:
                    pass
            raise DomainError(f"{value!r} is not a number")
        if base == "ASCII":
            if not isinstance(value, str):
                raise DomainError(f"{value!r} is not a string")
            return value
        if base == "DATETIME":
            return to_days(value)
        if not isinstance(value, bool):
            raise DomainError(f"{value!r} is not a boolean")
        return value

    def base_violation(self, value) -> str | None:
        """Why `value` lies outside the bare base set, or None."""
        base = self.base
        if base in ("NAT", "INT"):
            if isinstance(value, bool) or not isinstance(value, int):
                return f"{value!r} is not an integer"
            if base == "NAT" and value < 0:
                return f"{value} is negative"
            if abs(value) >= 10 ** self.digits:
                return f"{value} has more than {self.digits} digits"
            return None
        if base in ("RAT", "CURRENCY"):
            if isinstance(value, bool) or not isinstance(value, (int, Decimal)):
                return f"{value!r} is not a number"
            value = Decimal(value)
            if not value.is_finite():
                return f"{value} is not finite"
            if abs(value) >= Decimal(10) ** self.digits:
                return f"{value} has more than {self.digits} integer digits"
            scale = self.effective_scale
            if value != value.quantize(Decimal(1).scaleb(-scale), rounding="ROUND_DOWN"):
                return f"{value} has more than {scale} decimal digits"
            return None
        if base == "ASCII":
            if not isinstance(value, str):
                return f"{value!r} is not a string"
            if len(value) > self.digits:
                return f"string longer than {self.digits} characters"
            if not value.isascii():
                return "string contains non-ASCII characters"
            return None
        if base == "DATETIME":
            if isinstance(value, bool) or not isinstance(value, int):
                return f"{value!r} is not a date"
            return None
        if not isinstance(value, bool):
            return f"{value!r} is not a boolean"
        return None

    def violation(self, value, today: int | None = None) -> str | None:
        """Why a non-null value is outside this domain, or None if inside."""
        if value is None:
            return None
        reason = self.base_violation(value)
        if reason is not None:
            return reason
        if self.enumeration is not None and value not in self.enumeration:
            members = ", ".join(render_literal(v, self.category) for v in self.enumeration)
            return f"{render_literal(value, self.category)} not in {{{members}}}"
        iv = self.interval
        if iv is not None:
            low = today if iv.low is TODAY else iv.low
            high = today if iv.high is TODAY else iv.high
            if low is not None and (value < low or (value == low and not iv.low_closed)):
                return f"{render_literal(value, self.category)} below lower bound {render_bound(iv.low, self.category)}"
            if high is not None and (value > high or (value == high and not iv.high_closed)):
                return f"{render_literal(value, self.category)} above upper bound {render_bound(iv.high, self.category)}"
        return None

    def contains(self, value, today: int | None = None) -> bool:
        return self.violation(value, today) is None


def base_subsumes(outer: ValueDomain, inner: ValueDomain) -> bool:
    """Whether inner's base set is contained in outer's base set.

    Follows NAT(n) <= INT(n) <= CURRENCY(n) <= RAT(n + m, m) for m >= 2 and
    monotonicity in the size parameter.
    """
    rank = {"NAT": 0, "INT": 1, "CURRENCY": 2, "RAT": 3}
    a, b = inner, outer
    if a.base in rank and b.base in rank:
        if rank[a.base] > rank[b.base]:
            return False
        a_int, a_frac = a.digits, (a.effective_scale if a.base in ("RAT", "CURRENCY") else 0)
        b_int, b_frac = b.digits, (b.effective_scale if b.base in ("RAT", "CURRENCY") else 0)
        return a_int <= b_int and a_frac <= b_frac
    if a.base != b.base:
        return False
    if a.base == "ASCII":
        return a.digits <= b.digits
    return True


def render_literal(value, category: str) -> str:
    if value is None:
        return "null"
    if category == "date" and isinstance(value, int) and not isinstance(value, bool):
        return format_date(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Decimal):
        return format(value, "f")
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return str(value)


def render_bound(bound, category: str) -> str:
    if bound is TODAY:
        return "Today()"
    return render_literal(bound, category)


def literal_category(value) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, Decimal)):
        return "num"
    if isinstance(value, str):
        return "text"
    raise DomainError(f"unsupported literal {value!r}")


def infer_domain(interval: Interval | None, enumeration: tuple | None,
                 categories: tuple[str, ...]) -> ValueDomain:
    """Smallest base domain holding the given literals (used for bare ranges)."""
    values = list(enumeration or ())
    if interval is not None:
        values += [b for b in (interval.low, interval.high) if b is not None and b is not TODAY]
    cats = set(categories)
    if interval is not None and TODAY in (interval.low, interval.high):
        cats.add("date")
    if len(cats) != 1:
        raise DomainError("cannot infer a value domain from mixed literal types")
    cat = cats.pop()
    if cat == "date":
        return ValueDomain("DATETIME", interval=interval, enumeration=enumeration)
    if cat == "bool":
        return ValueDomain("BOOLE", interval=interval, enumeration=enumeration)
    if cat == "text":
        size = max((len(v) for v in values), default=1)
        return ValueDomain("ASCII", max(size, 1), interval=interval, enumeration=enumeration)
    decimals = [Decimal(v) for v in values]
    int_digits = max((len(str(abs(int(v)))) for v in decimals), default=1)
    if all(isinstance(v, int) for v in values):
        base = "NAT" if all(v >= 0 for v in values) else "INT"
        return ValueDomain(base, int_digits, interval=interval, enumeration=enumeration)
    scale = max(max(-v.as_tuple().exponent, 0) for v in decimals)
    return ValueDomain("RAT", int_digits, scale, interval=interval, enumeration=enumeration)
