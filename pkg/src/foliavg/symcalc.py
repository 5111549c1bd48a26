"""Exact scalar calculus on a coordinate chart with torus angles.

A :class:`Scalar` is a finite sum of monomials

    c * pi^a * x1^e1 * ... * th^k * trig(m1*th1) * trig(m2*th2) * ...

with ``c`` rational, ``x*`` chart coordinates and ``trig`` either ``sin`` or
``cos`` applied to a positive integer multiple of one chart angle.  The
canonical form keeps at most one trigonometric factor per angle: products of
harmonics in the same angle are rewritten to linear harmonics with the
product-to-sum identities, so equality of expressions is equality of the
term dictionaries and ``zero`` is the empty sum.  No floating point enters
any operation here; coefficients live in Q adjoined the symbol ``pi``,
which only appears through exact averages of bare angle powers.

Bare (polynomial) angle powers are not produced by the input grammar, but
they arise internally as antiderivatives of constant Fourier terms and are
fully supported by differentiation, substitution and exact averaging.
"""

from __future__ import annotations

import functools
import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    ChartMismatch,
    NonPolynomialIntegrand,
    ParseError,
    UnknownSymbol,
)

SIN = "s"
COS = "c"
PI = "pi"

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")

Number = Union[int, Fraction]

# A monomial key is a pair (powers, trig):
#   powers: tuple of (symbol, exponent), sorted by symbol, exponent >= 1;
#           symbols are coordinates, bare angles, or the reserved "pi".
#   trig:   tuple of (angle, kind, multiple), sorted by angle, at most one
#           entry per angle, multiple >= 1, kind in {SIN, COS}.
Key = tuple[tuple[tuple[str, int], ...], tuple[tuple[str, str, int], ...]]

_EMPTY_KEY: Key = ((), ())


class Chart:
    """Distinguished coordinates of one foliated chart plus torus angles.

    Horizontal coordinates label the leaves of the foliation, vertical
    coordinates span the leaves, and angles parametrise the acting torus.
    Angles are parameters, not manifold coordinates: forms and fields have
    no components along them.
    """

    __slots__ = ("horizontal", "vertical", "angles")

    def __init__(
        self,
        horizontal: Sequence[str],
        vertical: Sequence[str],
        angles: Sequence[str] = (),
    ) -> None:
        horizontal = tuple(horizontal)
        vertical = tuple(vertical)
        angles = tuple(angles)
        names = horizontal + vertical + angles
        for name in names:
            if not _NAME_RE.match(name):
                raise UnknownSymbol(f"invalid symbol name: {name!r}")
            if name == PI:
                raise UnknownSymbol("'pi' is reserved for the circle constant")
        if len(set(names)) != len(names):
            raise UnknownSymbol(f"chart symbols are not distinct: {names}")
        object.__setattr__(self, "horizontal", horizontal)
        object.__setattr__(self, "vertical", vertical)
        object.__setattr__(self, "angles", angles)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Chart is immutable")

    @property
    def coords(self) -> tuple[str, ...]:
        return self.horizontal + self.vertical

    @property
    def dim(self) -> int:
        return len(self.horizontal) + len(self.vertical)

    def is_coord(self, name: str) -> bool:
        return name in self.horizontal or name in self.vertical

    def is_angle(self, name: str) -> bool:
        return name in self.angles

    def is_symbol(self, name: str) -> bool:
        return self.is_coord(name) or self.is_angle(name) or name == PI

    def require_coord(self, name: str) -> None:
        if not self.is_coord(name):
            raise UnknownSymbol(f"{name!r} is not a coordinate of {self}")

    def require_angle(self, name: str) -> None:
        if not self.is_angle(name):
            raise UnknownSymbol(f"{name!r} is not an angle of {self}")

    def coord_index(self, name: str) -> int:
        self.require_coord(name)
        return self.coords.index(name)

    def with_extra_angles(self, extra: Sequence[str]) -> "Chart":
        return Chart(self.horizontal, self.vertical, self.angles + tuple(extra))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Chart)
            and self.horizontal == other.horizontal
            and self.vertical == other.vertical
            and self.angles == other.angles
        )

    def __hash__(self) -> int:
        return hash((self.horizontal, self.vertical, self.angles))

    def __repr__(self) -> str:
        return (
            f"Chart(horizontal={list(self.horizontal)}, "
            f"vertical={list(self.vertical)}, angles={list(self.angles)})"
        )


def _norm_harmonic(kind: str, m: int) -> tuple[Fraction, str | None, int]:
    """Reduce trig(m*th) to sign * trig(|m|*th) with m >= 0."""
    if m == 0:
        return (Fraction(1), None, 0) if kind == COS else (Fraction(0), None, 0)
    if m < 0:
        return (Fraction(1), COS, -m) if kind == COS else (Fraction(-1), SIN, -m)
    return Fraction(1), kind, m


def _trig_pair(kind1: str, m1: int, kind2: str, m2: int) -> list[tuple[Fraction, str | None, int]]:
    """Product-to-sum rewrite of trig(m1*th)*trig(m2*th), same angle."""
    half = Fraction(1, 2)
    if kind1 == COS and kind2 == COS:
        raw = [(half, COS, m1 - m2), (half, COS, m1 + m2)]
    elif kind1 == SIN and kind2 == SIN:
        raw = [(half, COS, m1 - m2), (-half, COS, m1 + m2)]
    elif kind1 == SIN and kind2 == COS:
        raw = [(half, SIN, m1 + m2), (half, SIN, m1 - m2)]
    else:  # cos * sin
        raw = [(half, SIN, m1 + m2), (-half, SIN, m1 - m2)]
    out = []
    for coef, kind, m in raw:
        sign, nkind, nm = _norm_harmonic(kind, m)
        coef = coef * sign
        if coef:
            out.append((coef, nkind, nm))
    return out


def _mul_keys(k1: Key, k2: Key) -> list[tuple[Key, Fraction]]:
    powers: dict[str, int] = {}
    for name, e in k1[0] + k2[0]:
        powers[name] = powers.get(name, 0) + e
    trig1 = dict((a, (kind, m)) for a, kind, m in k1[1])
    trig2 = dict((a, (kind, m)) for a, kind, m in k2[1])
    # (coefficient, {angle: (kind, m)}) partial products
    partial: list[tuple[Fraction, dict[str, tuple[str, int]]]] = [(Fraction(1), {})]
    for angle in sorted(set(trig1) | set(trig2)):
        if angle in trig1 and angle in trig2:
            expansions = _trig_pair(*trig1[angle], *trig2[angle])
            nxt = []
            for coef, trig in partial:
                for c2, kind, m in expansions:
                    t = dict(trig)
                    if kind is not None:
                        t[angle] = (kind, m)
                    nxt.append((coef * c2, t))
            partial = nxt
        else:
            kind, m = trig1.get(angle) or trig2[angle]
            for _, trig in partial:
                trig[angle] = (kind, m)
    powkey = tuple(sorted(powers.items()))
    out = []
    for coef, trig in partial:
        trigkey = tuple((a, kind, m) for a, (kind, m) in sorted(trig.items()))
        out.append(((powkey, trigkey), coef))
    return out


class Scalar:
    """An exact scalar function on a chart, kept in canonical form."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[Key, Fraction] | None = None) -> None:
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "terms", dict(terms or {}))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Scalar is immutable")

    # ------------------------------------------------------------------
    # constructors

    @staticmethod
    def _new(chart: Chart, items: Iterable[tuple[Key, Fraction]]) -> "Scalar":
        acc: dict[Key, Fraction] = {}
        for key, coef in items:
            if not coef:
                continue
            prev = acc.get(key)
            total = coef if prev is None else prev + coef
            if total:
                acc[key] = total
            elif prev is not None:
                del acc[key]
        return Scalar(chart, acc)

    @staticmethod
    def zero(chart: Chart) -> "Scalar":
        return Scalar(chart)

    @staticmethod
    def const(chart: Chart, value: Number | str) -> "Scalar":
        coef = Fraction(value)
        return Scalar._new(chart, [(_EMPTY_KEY, coef)])

    @staticmethod
    def one(chart: Chart) -> "Scalar":
        return Scalar.const(chart, 1)

    @staticmethod
    def var(chart: Chart, name: str) -> "Scalar":
        if not chart.is_symbol(name):
            raise UnknownSymbol(f"{name!r} is not a symbol of {chart}")
        return Scalar._new(chart, [(((((name, 1),)), ()), Fraction(1))])

    @staticmethod
    def harmonic(chart: Chart, kind: str, angle: str, multiple: int = 1) -> "Scalar":
        chart.require_angle(angle)
        normalized = {SIN: SIN, COS: COS, "sin": SIN, "cos": COS}.get(kind)
        if normalized is None:
            raise UnknownSymbol(f"harmonic kind must be sin or cos, got {kind!r}")
        kind = normalized
        sign, nkind, nm = _norm_harmonic(kind, multiple)
        if nkind is None:
            return Scalar.const(chart, sign)
        key: Key = ((), ((angle, nkind, nm),))
        return Scalar._new(chart, [(key, sign)])

    @staticmethod
    def sin(chart: Chart, angle: str, multiple: int = 1) -> "Scalar":
        return Scalar.harmonic(chart, SIN, angle, multiple)

    @staticmethod
    def cos(chart: Chart, angle: str, multiple: int = 1) -> "Scalar":
        return Scalar.harmonic(chart, COS, angle, multiple)

    @staticmethod
    def pi(chart: Chart) -> "Scalar":
        return Scalar._new(chart, [((((PI, 1),), ()), Fraction(1))])

    # ------------------------------------------------------------------
    # ring structure

    def _check(self, other: "Scalar") -> None:
        if self.chart != other.chart:
            raise ChartMismatch(f"{self.chart} vs {other.chart}")

    def _coerce(self, value: object) -> "Scalar | None":
        if isinstance(value, Scalar):
            self._check(value)
            return value
        if isinstance(value, (int, Fraction)):
            return Scalar.const(self.chart, value)
        return None

    def __add__(self, other: object) -> "Scalar":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return Scalar._new(self.chart, list(self.terms.items()) + list(rhs.terms.items()))

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar(self.chart, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: object) -> "Scalar":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: object) -> "Scalar":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return rhs + (-self)

    def __mul__(self, other: object) -> "Scalar":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        items: list[tuple[Key, Fraction]] = []
        for k1, c1 in self.terms.items():
            for k2, c2 in rhs.terms.items():
                c = c1 * c2
                for key, factor in _mul_keys(k1, k2):
                    items.append((key, c * factor))
        return Scalar._new(self.chart, items)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Scalar":
        if not isinstance(exponent, int) or exponent < 0:
            raise ParseError("exponents must be non-negative integers")
        result = Scalar.one(self.chart)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Scalar.const(self.chart, other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            canon = tuple(sorted(self.terms.items()))
            object.__setattr__(self, "_hash", hash((self.chart, canon)))
        return self._hash

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def free_symbols(self) -> set[str]:
        names: set[str] = set()
        for powers, trig in self.terms:
            names.update(name for name, _ in powers)
            names.update(angle for angle, _, _ in trig)
        return names

    def depends_on(self, name: str) -> bool:
        return name in self.free_symbols()

    # ------------------------------------------------------------------
    # calculus

    def diff(self, name: str) -> "Scalar":
        """Exact partial derivative with respect to a coordinate or angle."""
        if not (self.chart.is_coord(name) or self.chart.is_angle(name)):
            raise UnknownSymbol(f"cannot differentiate along {name!r}")
        items: list[tuple[Key, Fraction]] = []
        for (powers, trig), coef in self.terms.items():
            power_map = dict(powers)
            # bare power factor
            exp = power_map.get(name, 0)
            if exp:
                reduced = dict(power_map)
                if exp == 1:
                    del reduced[name]
                else:
                    reduced[name] = exp - 1
                items.append(((tuple(sorted(reduced.items())), trig), coef * exp))
            # harmonic factor (angles only)
            for i, (angle, kind, m) in enumerate(trig):
                if angle != name:
                    continue
                rest = trig[:i] + trig[i + 1 :]
                if kind == COS:
                    newtrig = tuple(sorted(rest + ((angle, SIN, m),)))
                    items.append(((powers, newtrig), -coef * m))
                else:
                    newtrig = tuple(sorted(rest + ((angle, COS, m),)))
                    items.append(((powers, newtrig), coef * m))
        return Scalar._new(self.chart, items)

    def substitute(self, rules: Mapping[str, "Scalar | Number"]) -> "Scalar":
        """Simultaneous substitution of coordinates by scalars."""
        values: dict[str, Scalar] = {}
        for name, value in rules.items():
            self.chart.require_coord(name)
            coerced = self._coerce(value)
            if coerced is None:
                raise ChartMismatch(f"substitution value for {name!r} is not a Scalar")
            values[name] = coerced
        total = Scalar.zero(self.chart)
        for (powers, trig), coef in self.terms.items():
            kept = tuple((n, e) for n, e in powers if n not in values)
            piece = Scalar._new(self.chart, [(((kept), trig), coef)])
            for name, e in powers:
                if name in values:
                    piece = piece * values[name] ** e
            total = total + piece
        return total

    def substitute_angle(
        self, angle: str, combo: Sequence[tuple[str, int]]
    ) -> "Scalar":
        """Replace an angle by an integer combination of angles.

        ``combo`` lists (angle, coefficient) pairs; the empty combination
        sets the angle to zero.  Harmonics are expanded with the angle
        addition formulas, bare powers multinomially.
        """
        self.chart.require_angle(angle)
        merged: dict[str, int] = {}
        for other, c in combo:
            self.chart.require_angle(other)
            merged[other] = merged.get(other, 0) + c
        terms = tuple((a, c) for a, c in sorted(merged.items()) if c)
        linear = Scalar.zero(self.chart)
        for a, c in terms:
            linear = linear + c * Scalar.var(self.chart, a)
        total = Scalar.zero(self.chart)
        for (powers, trig), coef in self.terms.items():
            kept_powers = tuple((n, e) for n, e in powers if n != angle)
            kept_trig = tuple(t for t in trig if t[0] != angle)
            piece = Scalar._new(self.chart, [((kept_powers, kept_trig), coef)])
            for n, e in powers:
                if n == angle:
                    piece = piece * linear**e
            for a, kind, m in trig:
                if a == angle:
                    piece = piece * _harmonic_of_combo(self.chart, kind, m, terms)
            total = total + piece
        return total

    def average_over_angle(self, angle: str) -> "Scalar":
        """Exact Haar average (1/2pi) * integral over one full period."""
        self.chart.require_angle(angle)
        items: list[tuple[Key, Fraction]] = []
        for (powers, trig), coef in self.terms.items():
            power_map = dict(powers)
            k = power_map.pop(angle, 0)
            entry = next((t for t in trig if t[0] == angle), None)
            rest_trig = tuple(t for t in trig if t[0] != angle)
            if entry is None:
                values = _avg_power(k)
            else:
                values = _avg_power_trig(k, entry[1], entry[2])
            for pi_pow, val in values.items():
                if pi_pow:
                    power_map2 = dict(power_map)
                    power_map2[PI] = power_map2.get(PI, 0) + pi_pow
                else:
                    power_map2 = power_map
                key = (tuple(sorted(power_map2.items())), rest_trig)
                items.append((key, coef * val))
        return Scalar._new(self.chart, items)

    def antiderivative_from_zero(self, angle: str) -> "Scalar":
        """Integral from 0 to the angle of this scalar in that angle."""
        self.chart.require_angle(angle)
        items: list[tuple[Key, Fraction]] = []
        for (powers, trig), coef in self.terms.items():
            power_map = dict(powers)
            k = power_map.get(angle, 0)
            entry = next((t for t in trig if t[0] == angle), None)
            rest_trig = tuple(t for t in trig if t[0] != angle)
            if entry is None:
                power_map[angle] = k + 1
                key = (tuple(sorted(power_map.items())), trig)
                items.append((key, coef / (k + 1)))
                continue
            if k:
                raise NonPolynomialIntegrand(
                    f"mixed power and harmonic in {angle!r} has no polynomial antiderivative"
                )
            _, kind, m = entry
            if kind == COS:
                newtrig = tuple(sorted(rest_trig + ((angle, SIN, m),)))
                items.append(((powers, newtrig), coef / m))
            else:
                items.append(((powers, rest_trig), coef / m))
                newtrig = tuple(sorted(rest_trig + ((angle, COS, m),)))
                items.append(((powers, newtrig), -coef / m))
        return Scalar._new(self.chart, items)

    def integrate_unit_interval(self, name: str) -> "Scalar":
        """Integral over [0, 1] of a polynomial dependence on one symbol."""
        if not (self.chart.is_coord(name) or self.chart.is_angle(name)):
            raise UnknownSymbol(f"{name!r} is not a symbol of {self.chart}")
        items: list[tuple[Key, Fraction]] = []
        for (powers, trig), coef in self.terms.items():
            if any(t[0] == name for t in trig):
                raise NonPolynomialIntegrand(
                    f"harmonic dependence on {name!r} is not polynomial"
                )
            power_map = dict(powers)
            k = power_map.pop(name, 0)
            key = (tuple(sorted(power_map.items())), trig)
            items.append((key, coef / (k + 1)))
        return Scalar._new(self.chart, items)

    def on_chart(self, chart: Chart) -> "Scalar":
        """Rebind to a chart declaring a superset of the used symbols."""
        for name in self.free_symbols():
            if name != PI and not chart.is_symbol(name):
                raise UnknownSymbol(f"{name!r} is not a symbol of {chart}")
        return Scalar(chart, dict(self.terms))

    def evaluate(self, point: Mapping[str, float | Number]) -> float:
        """Numerical evaluation; only used by cross-checking oracles."""
        total = 0.0
        for (powers, trig), coef in self.terms.items():
            value = float(coef)
            for name, e in powers:
                base = math.pi if name == PI else float(point[name])
                value *= base**e
            for angle, kind, m in trig:
                arg = m * float(point[angle])
                value *= math.sin(arg) if kind == SIN else math.cos(arg)
            total += value
        return total

    # ------------------------------------------------------------------
    # rendering

    def __str__(self) -> str:
        return render(self)

    __repr__ = __str__


def _harmonic_of_combo(
    chart: Chart, kind: str, multiple: int, terms: tuple[tuple[str, int], ...]
) -> Scalar:
    """Expand trig(multiple * sum(c_i * angle_i)) into the canonical basis."""
    scaled = tuple((a, multiple * c) for a, c in terms)
    return _expand_harmonic(chart, kind, scaled)


def _expand_harmonic(chart: Chart, kind: str, terms: tuple[tuple[str, int], ...]) -> Scalar:
    if not terms:
        return Scalar.const(chart, 1 if kind == COS else 0)
    (angle, c), rest = terms[0], terms[1:]
    sin_a = Scalar.sin(chart, angle, c)
    cos_a = Scalar.cos(chart, angle, c)
    sin_r = _expand_harmonic(chart, SIN, rest)
    cos_r = _expand_harmonic(chart, COS, rest)
    if kind == SIN:
        return sin_a * cos_r + cos_a * sin_r
    return cos_a * cos_r - sin_a * sin_r


def _avg_power(k: int) -> dict[int, Fraction]:
    """Haar average of th^k: (2pi)^k / (k+1), as {pi power: coefficient}."""
    if k == 0:
        return {0: Fraction(1)}
    return {k: Fraction(2**k, k + 1)}


@functools.lru_cache(maxsize=None)
def _avg_power_trig(k: int, kind: str, m: int) -> dict[int, Fraction]:
    """Haar average of th^k * trig(m*th) by integration by parts."""
    if k == 0:
        return {}
    if kind == COS:
        inner = _avg_power_trig(k - 1, SIN, m)
        return {p: -Fraction(k, m) * v for p, v in inner.items()}
    out = {k - 1: -Fraction(2 ** (k - 1), m)}
    for p, v in _avg_power_trig(k - 1, COS, m).items():
        out[p] = out.get(p, Fraction(0)) + Fraction(k, m) * v
    return {p: v for p, v in out.items() if v}


# ----------------------------------------------------------------------
# rendering


def _render_key(key: Key) -> str:
    powers, trig = key
    parts = []
    for name, e in powers:
        parts.append(name if e == 1 else f"{name}^{e}")
    for angle, kind, m in trig:
        fn = "sin" if kind == SIN else "cos"
        arg = angle if m == 1 else f"{m}*{angle}"
        parts.append(f"{fn}({arg})")
    return "*".join(parts)


def render(f: Scalar) -> str:
    """Canonical textual form, parseable by :func:`parse`."""
    if not f.terms:
        return "0"
    pieces = []
    for key in sorted(f.terms):
        coef = f.terms[key]
        body = _render_key(key)
        mag = abs(coef)
        if not body:
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag}*{body}"
        pieces.append((coef < 0, text))
    first_neg, first = pieces[0]
    out = ("-" if first_neg else "") + first
    for neg, text in pieces[1:]:
        out += (" - " if neg else " + ") + text
    return out


# ----------------------------------------------------------------------
# parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r} at position {pos}")
        pos = match.end()
        for group in ("number", "name", "op"):
            value = match.group(group)
            if value is not None:
                tokens.append((group, value))
                break
    tokens.append(("end", ""))
    return tokens


class _Parser:
    """Recursive-descent parser for the scenario expression grammar."""

    def __init__(self, chart: Chart, text: str) -> None:
        self.chart = chart
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str]:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, value: str) -> None:
        kind, got = self.take()
        if got != value:
            raise ParseError(f"expected {value!r} in {self.text!r}, got {got!r}")

    def parse(self) -> Scalar:
        value = self.expr()
        kind, tok = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {tok!r} in {self.text!r}")
        return value

    def expr(self) -> Scalar:
        sign = 1
        kind, tok = self.peek()
        if kind == "op" and tok in "+-":
            self.take()
            sign = -1 if tok == "-" else 1
        value = sign * self.term()
        while True:
            kind, tok = self.peek()
            if kind == "op" and tok in "+-":
                self.take()
                rhs = self.term()
                value = value + rhs if tok == "+" else value - rhs
            else:
                return value

    def term(self) -> Scalar:
        value = self.factor()
        while True:
            kind, tok = self.peek()
            if kind == "op" and tok == "*":
                self.take()
                value = value * self.factor()
            elif kind == "op" and tok == "/":
                self.take()
                divisor = self.factor()
                const = _as_rational(divisor)
                if const is None or const == 0:
                    raise ParseError("division is only allowed by nonzero rationals")
                value = value * (Fraction(1) / const)
            else:
                return value

    def factor(self) -> Scalar:
        value = self.atom()
        kind, tok = self.peek()
        if kind == "op" and tok == "^":
            self.take()
            nkind, num = self.take()
            if nkind != "number":
                raise ParseError("exponents must be non-negative integers")
            if "/" in num:
                # the tokenizer reads "2/3" as one rational, but the power
                # binds tighter than the division
                exponent, denom = num.split("/")
                if int(denom) == 0:
                    raise ParseError("division is only allowed by nonzero rationals")
                value = value ** int(exponent) * Fraction(1, int(denom))
            else:
                value = value ** int(num)
        return value

    def atom(self) -> Scalar:
        kind, tok = self.take()
        if kind == "number":
            return Scalar.const(self.chart, Fraction(tok))
        if kind == "op" and tok == "(":
            value = self.expr()
            self.expect(")")
            return value
        if kind == "op" and tok == "-":
            return -self.atom()
        if kind == "name":
            if tok in ("sin", "cos"):
                self.expect("(")
                multiple, angle = self.trig_argument()
                self.expect(")")
                return Scalar.harmonic(
                    self.chart, SIN if tok == "sin" else COS, angle, multiple
                )
            if not self.chart.is_symbol(tok):
                raise UnknownSymbol(f"{tok!r} is not a symbol of {self.chart}")
            return Scalar.var(self.chart, tok)
        raise ParseError(f"unexpected token {tok!r} in {self.text!r}")

    def trig_argument(self) -> tuple[int, str]:
        sign = 1
        kind, tok = self.peek()
        if kind == "op" and tok == "-":
            self.take()
            sign = -1
        kind, tok = self.take()
        if kind == "number":
            if "/" in tok:
                raise ParseError("harmonic multiples must be integers")
            multiple = sign * int(tok)
            self.expect("*")
            kind, tok = self.take()
            if kind != "name":
                raise ParseError("expected an angle name inside sin/cos")
            self.chart.require_angle(tok)
            return multiple, tok
        if kind == "name":
            self.chart.require_angle(tok)
            return sign, tok
        raise ParseError("expected an integer multiple of an angle inside sin/cos")


def _as_rational(f: Scalar) -> Fraction | None:
    if not f.terms:
        return Fraction(0)
    if list(f.terms) == [_EMPTY_KEY]:
        return f.terms[_EMPTY_KEY]
    return None


def parse(chart: Chart, text: str) -> Scalar:
    """Parse an expression string into a canonical Scalar."""
    return _Parser(chart, text).parse()


# ----------------------------------------------------------------------
# string-facing convenience wrappers


def normalize(chart: Chart, expression: "str | Scalar") -> Scalar:
    """Bring an expression (string or Scalar) into canonical form."""
    if isinstance(expression, Scalar):
        if expression.chart != chart:
            raise ChartMismatch(f"{expression.chart} vs {chart}")
        return expression
    return parse(chart, expression)


def partial_derivative(f: Scalar, name: str) -> Scalar:
    return f.diff(name)


def substitute(f: Scalar, rules: Mapping[str, Scalar | Number]) -> Scalar:
    return f.substitute(rules)


def average_over_angle(f: Scalar, angle: str) -> Scalar:
    return f.average_over_angle(angle)


def integrate_unit_interval(f: Scalar, name: str) -> Scalar:
    return f.integrate_unit_interval(name)


def is_identically_zero(f: Scalar) -> bool:
    return f.is_zero
