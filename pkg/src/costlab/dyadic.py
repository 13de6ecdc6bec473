"""Exact nonnegative dyadic rationals, ``numerator / 2**exponent``."""

from __future__ import annotations

import re
from fractions import Fraction
from functools import total_ordering

_TEXT = re.compile(r"^\s*(\d+)\s*(?:/\s*(?:2\^(\d+)|(\d+)))?\s*$")


@total_ordering
class Dyadic:
    """A nonnegative rational whose denominator is a power of two.

    Values are kept in canonical form: the numerator is odd, or the value
    is zero with exponent zero. Instances are immutable and hashable.
    """

    __slots__ = ("num", "exp")

    def __init__(self, num: int = 0, exp: int = 0):
        if num < 0:
            raise ValueError(f"negative dyadic {num}/2^{exp}")
        if exp < 0:
            num <<= -exp
            exp = 0
        if num == 0:
            exp = 0
        else:
            tz = (num & -num).bit_length() - 1
            shift = min(tz, exp)
            num >>= shift
            exp -= shift
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    # construction helpers

    @classmethod
    def pow2(cls, k: int) -> Dyadic:
        """``2**k`` for any integer k (negative k gives a fraction)."""
        return cls(1 << k, 0) if k >= 0 else cls(1, -k)

    @classmethod
    def parse(cls, text: str | int | Dyadic) -> Dyadic:
        """Parse ``"m/2^e"``, ``"m/d"`` with d a power of two, or ``"m"``."""
        if isinstance(text, Dyadic):
            return text
        if isinstance(text, int):
            return cls(text)
        m = _TEXT.match(text)
        if not m:
            raise ValueError(f"not a dyadic rational: {text!r}")
        num = int(m.group(1))
        if m.group(2) is not None:
            return cls(num, int(m.group(2)))
        if m.group(3) is not None:
            den = int(m.group(3))
            if den <= 0 or den & (den - 1):
                raise ValueError(f"denominator {den} is not a power of two")
            return cls(num, den.bit_length() - 1)
        return cls(num)

    @classmethod
    def from_fraction(cls, q: Fraction) -> Dyadic:
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not dyadic")
        return cls(q.numerator, den.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    # arithmetic

    def _aligned(self, other: Dyadic) -> tuple[int, int, int]:
        e = max(self.exp, other.exp)
        return self.num << (e - self.exp), other.num << (e - other.exp), e

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b, e = self._aligned(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b, e = self._aligned(other)
        if a < b:
            raise ValueError(f"dyadic subtraction went negative: {self} - {other}")
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Dyadic(self.num * other.num, self.exp + other.exp)

    __rmul__ = __mul__

    def scale2(self, k: int) -> Dyadic:
        """Multiply by ``2**k``."""
        return Dyadic(self.num, self.exp - k)

    def half(self) -> Dyadic:
        return self.scale2(-1)

    # comparison

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.num == other.num and self.exp == other.exp

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b, _ = self._aligned(other)
        return a < b

    def __hash__(self):
        return hash((self.num, self.exp))

    def __bool__(self):
        return self.num != 0

    # logarithms

    def floor_neg_log2(self) -> int:
        """``floor(-log2(self))`` for ``0 < self``.

        This is the unique k with ``self`` in ``(2**-(k+1), 2**-k]``. The
        result is negative when ``self > 1``.
        """
        if self.num == 0:
            raise ValueError("log of zero")
        return self.exp - (self.num - 1).bit_length()

    def ceil_log2(self) -> int:
        """Least integer j with ``self <= 2**j`` (``self > 0``)."""
        return -self.floor_neg_log2()

    def bits(self, length: int) -> str:
        """First ``length`` binary digits after the point (terminating form).

        Only meaningful for values in [0, 1); the integer part is dropped.
        """
        if length <= self.exp:
            frac = self.num >> (self.exp - length)
        else:
            frac = self.num << (length - self.exp)
        frac &= (1 << length) - 1
        return format(frac, f"0{length}b") if length else ""

    def __str__(self):
        return f"{self.num}/2^{self.exp}"

    def __repr__(self):
        return f"Dyadic({self.num}, {self.exp})"


def _coerce(x):
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Dyadic(x)
    return NotImplemented


ZERO = Dyadic(0)
ONE = Dyadic(1)
