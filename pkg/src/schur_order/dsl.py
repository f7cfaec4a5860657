"""Text syntax for scalar functions, shared by the CLI and config files.

Grammar::

    fn     := "exp" | "neglog1m"
            | "negpow:" num | "phi:" num | "psi:" num
            | "series:" num ("," num)* ["@" num]
            | "shift:" num ":" fn
            | "scale:" num ":" fn
            | "sum:(" fn ("|" fn)* ")"
            | "deriv:" int ":" fn
            | "reflect:" fn
    num    := decimal float | "inf"

``describe()`` on any parsed function produces text that parses back to an
equal function.
"""

from __future__ import annotations

import re

from .errors import FnSpecError, PreconditionError
from .scalarfn import (AbsPower, Derivative, Exp, NegLog1m, NegPower, PowerSeries, Reflected,
                       ScalarFunction, Scaled, Shifted, SignedPower, Sum)

_NUM = re.compile(r"[+-]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)")
_HEAD = re.compile(r"[a-z0-9]+")

HEADS = ("exp", "neglog1m", "negpow", "phi", "psi", "series", "shift", "scale", "sum", "deriv", "reflect")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, expected: str, pos: int | None = None):
        raise FnSpecError(self.text, self.pos if pos is None else pos, expected)

    def expect(self, lit: str):
        if not self.text.startswith(lit, self.pos):
            self.fail(repr(lit))
        self.pos += len(lit)

    def peek(self, lit: str) -> bool:
        return self.text.startswith(lit, self.pos)

    def number(self) -> float:
        m = _NUM.match(self.text, self.pos)
        if not m:
            self.fail("a number")
        self.pos = m.end()
        return float(m.group())

    def integer(self) -> int:
        start = self.pos
        x = self.number()
        if not float(x).is_integer() or x < 1:
            self.fail("a positive integer", start)
        return int(x)

    def build(self, start: int, make):
        try:
            return make()
        except PreconditionError as exc:
            self.fail(f"valid parameters ({exc})", start)

    def fn(self) -> ScalarFunction:
        start = self.pos
        m = _HEAD.match(self.text, self.pos)
        if not m or m.group() not in HEADS:
            self.fail("one of " + ", ".join(HEADS))
        head = m.group()
        self.pos = m.end()
        if head == "exp":
            return Exp()
        if head == "neglog1m":
            return NegLog1m()
        self.expect(":")
        if head in ("negpow", "phi", "psi"):
            p = self.number()
            cls = {"negpow": NegPower, "phi": AbsPower, "psi": SignedPower}[head]
            return self.build(start, lambda: cls(p))
        if head == "series":
            coeffs = [self.number()]
            while self.peek(","):
                self.pos += 1
                coeffs.append(self.number())
            radius = float("inf")
            if self.peek("@"):
                self.pos += 1
                rpos = self.pos
                radius = self.number()
                if not radius > 0:
                    self.fail("a positive radius", rpos)
            return self.build(start, lambda: PowerSeries(tuple(coeffs), radius))
        if head in ("shift", "scale"):
            c = self.number()
            self.expect(":")
            inner = self.fn()
            if head == "shift":
                return self.build(start, lambda: Shifted(inner, c))
            return Scaled(c, inner)
        if head == "deriv":
            k = self.integer()
            self.expect(":")
            return Derivative(self.fn(), k)
        if head == "reflect":
            return Reflected(self.fn())
        # sum
        self.expect("(")
        terms = [self.fn()]
        while self.peek("|"):
            self.pos += 1
            terms.append(self.fn())
        self.expect(")")
        return Sum(tuple(terms))


def parse_fn_spec(text: str) -> ScalarFunction:
    """Parse DSL text into a ``ScalarFunction``; errors carry the failing position."""
    text = text.strip()
    parser = _Parser(text)
    f = parser.fn()
    if parser.pos != len(text):
        parser.fail("end of input")
    return f
