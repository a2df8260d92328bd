"""Exact scalars: rationals, polynomials in hbar, and the field Q(hbar).

``Rational`` is :class:`fractions.Fraction`.  ``HPolynomial`` is a dense
univariate polynomial in the deformation parameter hbar, and ``HRational``
is a reduced quotient of two of them.  Every value is immutable.
"""
from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence, Union

Rational = Fraction

Scalar = Union[int, Fraction, "HPolynomial", "HRational"]


class AlgebraError(ArithmeticError):
    pass


class HDivisionByZero(AlgebraError, ZeroDivisionError):
    pass


class NotExpandable(AlgebraError):
    """Raised when a series expansion is requested at a pole hbar = 0."""


def _strip(coeffs: Iterable) -> tuple:
    c = [Fraction(x) for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class HPolynomial:
    """Polynomial in hbar with rational coefficients; ``coeffs[k]`` multiplies hbar**k."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable = ()):
        self.coeffs = _strip(coeffs)
        self._hash = None

    @classmethod
    def _raw(cls, coeffs: tuple) -> "HPolynomial":
        p = object.__new__(cls)
        p.coeffs = coeffs
        p._hash = None
        return p

    @classmethod
    def constant(cls, c) -> "HPolynomial":
        return cls((c,))

    @classmethod
    def hbar(cls, power: int = 1) -> "HPolynomial":
        return cls._raw((Fraction(0),) * power + (Fraction(1),))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1]

    def low_order(self) -> int:
        """Index of the lowest nonzero coefficient (the hbar-adic valuation)."""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        raise AlgebraError("zero polynomial has no valuation")

    def __eq__(self, other) -> bool:
        if isinstance(other, HPolynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == _strip((other,))
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    def __add__(self, other) -> "HPolynomial":
        other = _as_hpoly(other)
        if other is None:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] += c
        while out and out[-1] == 0:
            out.pop()
        return HPolynomial._raw(tuple(out))

    __radd__ = __add__

    def __neg__(self) -> "HPolynomial":
        return HPolynomial._raw(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "HPolynomial":
        other = _as_hpoly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "HPolynomial":
        return (-self) + other

    def __mul__(self, other) -> "HPolynomial":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return HPolynomial._raw(())
            return HPolynomial._raw(tuple(c * other for c in self.coeffs))
        other = _as_hpoly(other)
        if other is None:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return HPolynomial._raw(())
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return HPolynomial._raw(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "HPolynomial":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = HPolynomial._raw((Fraction(1),))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod(self, other: "HPolynomial") -> tuple["HPolynomial", "HPolynomial"]:
        if other.is_zero():
            raise HDivisionByZero("polynomial division by zero")
        rem = list(self.coeffs)
        db = other.degree
        inv_lead = 1 / other.lead
        if len(rem) <= db:
            return HPolynomial._raw(()), self
        quo = [Fraction(0)] * (len(rem) - db)
        for k in range(len(rem) - 1, db - 1, -1):
            c = rem[k]
            if c:
                q = c * inv_lead
                quo[k - db] = q
                for j, b in enumerate(other.coeffs):
                    rem[k - db + j] -= q * b
        return HPolynomial(quo), HPolynomial(rem)

    def monic(self) -> "HPolynomial":
        if self.is_zero():
            return self
        inv = 1 / self.lead
        return HPolynomial._raw(tuple(c * inv for c in self.coeffs))

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self) -> str:
        return f"HPolynomial({[str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        return format_hpoly(self.coeffs)


def _as_hpoly(x):
    if isinstance(x, HPolynomial):
        return x
    if isinstance(x, (int, Fraction)):
        return HPolynomial((x,))
    return None


_ONE = HPolynomial._raw((Fraction(1),))
_ZERO = HPolynomial._raw(())


def poly_gcd(a: HPolynomial, b: HPolynomial) -> HPolynomial:
    """Monic gcd over Q (zero only if both inputs are zero)."""
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


class HRational:
    """Element of Q(hbar), stored reduced.

    Canonical form: ``gcd(num, den) = 1`` and the lowest-order nonzero
    coefficient of ``den`` equals 1, so equal values are structurally equal.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=1):
        num = _as_hpoly(num) if not isinstance(num, HRational) else None
        if num is None:
            raise TypeError("HRational numerator must be a rational or HPolynomial")
        den = _as_hpoly(den)
        if den is None:
            raise TypeError("HRational denominator must be a rational or HPolynomial")
        if den.is_zero():
            raise HDivisionByZero("zero denominator")
        self.num, self.den = _reduce(num, den)
        self._hash = None

    @classmethod
    def _raw(cls, num: HPolynomial, den: HPolynomial) -> "HRational":
        r = object.__new__(cls)
        r.num = num
        r.den = den
        r._hash = None
        return r

    @classmethod
    def hbar(cls, power: int = 1) -> "HRational":
        return cls._raw(HPolynomial.hbar(power), _ONE)

    @classmethod
    def coerce(cls, x) -> "HRational":
        if isinstance(x, HRational):
            return x
        if isinstance(x, (int, Fraction)):
            return cls._raw(HPolynomial((x,)), _ONE)
        if isinstance(x, HPolynomial):
            return cls._raw(x, _ONE)
        if isinstance(x, str):
            return cls._raw(HPolynomial((Fraction(x),)), _ONE)
        raise TypeError(f"cannot interpret {type(x).__name__} as an element of Q(hbar)")

    def is_zero(self) -> bool:
        return not self.num.coeffs

    def is_constant(self) -> bool:
        return len(self.num.coeffs) <= 1 and len(self.den.coeffs) == 1

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise AlgebraError(f"{self} is not a rational constant")
        return self.num.coeffs[0] if self.num.coeffs else Fraction(0)

    def __bool__(self) -> bool:
        return bool(self.num.coeffs)

    # -- field operations --------------------------------------------------
    def __add__(self, other) -> "HRational":
        try:
            other = HRational.coerce(other)
        except TypeError:
            return NotImplemented
        if self.den == other.den:
            if len(self.den.coeffs) == 1:
                return HRational._raw(self.num + other.num, self.den)
            return HRational(self.num + other.num, self.den)
        return HRational(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "HRational":
        return HRational._raw(-self.num, self.den)

    def __sub__(self, other) -> "HRational":
        try:
            other = HRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "HRational":
        return (-self) + other

    def __mul__(self, other) -> "HRational":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return HRational._raw(_ZERO, _ONE)
            return HRational._raw(self.num * other, self.den)
        try:
            other = HRational.coerce(other)
        except TypeError:
            return NotImplemented
        if len(self.den.coeffs) == 1 and len(other.den.coeffs) == 1:
            return HRational._raw(self.num * other.num, _ONE)
        # cross-cancel before multiplying keeps the gcd work small
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1 = self.num.divmod(g1)[0] if not g1.is_constant() else self.num
        d2 = other.den.divmod(g1)[0] if not g1.is_constant() else other.den
        n2 = other.num.divmod(g2)[0] if not g2.is_constant() else other.num
        d1 = self.den.divmod(g2)[0] if not g2.is_constant() else self.den
        return HRational._from_coprime(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self) -> "HRational":
        if self.is_zero():
            raise HDivisionByZero("division by zero in Q(hbar)")
        return HRational._from_coprime(self.den, self.num)

    def __truediv__(self, other) -> "HRational":
        try:
            other = HRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "HRational":
        return HRational.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "HRational":
        if n < 0:
            return self.inverse() ** (-n)
        return HRational._raw(self.num ** n, self.den ** n)

    @classmethod
    def _from_coprime(cls, num: HPolynomial, den: HPolynomial) -> "HRational":
        if den.is_zero():
            raise HDivisionByZero("zero denominator")
        scale = den.coeffs[den.low_order()]
        if scale != 1:
            num = num * (1 / scale)
            den = den * (1 / scale)
        return cls._raw(num, den)

    # -- comparison ----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, HPolynomial, str)):
            other = HRational.coerce(other)
        if not isinstance(other, HRational):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __call__(self, x):
        """Evaluate at a numeric hbar."""
        d = self.den(x)
        if d == 0:
            raise HDivisionByZero(f"pole at hbar={x}")
        return Fraction(self.num(x)) / d if isinstance(d, (int, Fraction)) else self.num(x) / d

    def integer_form(self) -> tuple[list[int], list[int]]:
        """Numerator and denominator scaled to integer coefficients with joint content 1."""
        coeffs = self.num.coeffs + self.den.coeffs
        m = reduce(lcm, (c.denominator for c in coeffs), 1)
        num = [int(c * m) for c in self.num.coeffs]
        den = [int(c * m) for c in self.den.coeffs]
        g = reduce(gcd, num + den, 0) or 1
        return [c // g for c in num], [c // g for c in den]

    def __repr__(self) -> str:
        return f"HRational({self})"

    def __str__(self) -> str:
        num, den = self.integer_form()
        if den == [1]:
            return format_hpoly(num)
        n, d = format_hpoly(num), format_hpoly(den)
        if len([c for c in num if c]) > 1:
            n = f"({n})"
        if len([c for c in den if c]) > 1 or (len(den) > 1 and den[-1] != 1):
            d = f"({d})"
        return f"{n}/{d}"


def _reduce(num: HPolynomial, den: HPolynomial) -> tuple[HPolynomial, HPolynomial]:
    if num.is_zero():
        return _ZERO, _ONE
    if not den.is_constant():
        g = poly_gcd(num, den)
        if not g.is_constant():
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
    scale = den.coeffs[den.low_order()]
    if scale != 1:
        inv = 1 / scale
        num = num * inv
        den = den * inv
    return num, den


def format_hpoly(coeffs: Sequence, var: str = "h") -> str:
    terms = []
    for k, c in enumerate(coeffs):
        if not c:
            continue
        c = Fraction(c)
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    sign, body = terms[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def expand_series(x, order: int) -> list[Fraction]:
    """Taylor coefficients ``c_0 .. c_order`` of ``x`` about hbar = 0."""
    if order < 0:
        raise ValueError("order must be non-negative")
    x = HRational.coerce(x)
    den = x.den.coeffs
    if den[0] == 0:
        raise NotExpandable(f"{x} has a pole at hbar = 0")
    num = x.num.coeffs
    inv0 = 1 / den[0]
    out: list[Fraction] = []
    for k in range(order + 1):
        acc = num[k] if k < len(num) else Fraction(0)
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        out.append(acc * inv0)
    return out


def series_product(a: Sequence, b: Sequence, order: int) -> list[Fraction]:
    """Cauchy product of two coefficient lists truncated at ``order``."""
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a[: order + 1]):
        if x:
            for j, y in enumerate(b[: order + 1 - i]):
                out[i + j] += x * y
    return out


def to_json(x) -> dict:
    """``{"num": [...], "den": [...]}`` with integer decimal strings, index = hbar power."""
    num, den = HRational.coerce(x).integer_form()
    return {"num": [str(c) for c in num], "den": [str(c) for c in den]}


def from_json(obj) -> HRational:
    if isinstance(obj, (int, str)):
        return HRational.coerce(Fraction(obj))
    try:
        num = [Fraction(c) for c in obj["num"]]
        den = [Fraction(c) for c in obj["den"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed Q(hbar) value: {obj!r}") from exc
    return HRational(HPolynomial(num), HPolynomial(den))


ZERO = HRational._raw(_ZERO, _ONE)
ONE = HRational._raw(_ONE, _ONE)
HBAR = HRational.hbar()
