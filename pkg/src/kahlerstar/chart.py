"""The localized ring {p / s^m} on a CP^N chart, s = 1 + sum_k z^k zbar^k.

A :class:`ChartFunction` stores ``terms / (den(hbar) * s**s_power)`` where
``terms`` is a polynomial in z^1..z^N, zbar^1..zbar^N and hbar with integer
coefficients and ``den`` is an integer polynomial in hbar.  Viewed per
monomial in z, zbar the coefficients are elements of Q(hbar).

Monomials are packed into one int, ``_BITS`` bits per variable: variables
0..N-1 are z, N..2N-1 are zbar, 2N is hbar.  Multiplying monomials is then
integer addition.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from typing import Iterable, Sequence

from .algebra import HPolynomial, HRational, expand_series, from_json as hr_from_json, to_json as hr_to_json

_BITS = 16
_MASK = (1 << _BITS) - 1


# -- integer polynomials in hbar (tuples, index = power) ---------------------

def _zp_strip(c: list) -> tuple:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _zp_mul(a: Sequence[int], b: Sequence[int]) -> tuple:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return tuple(out)


def _zp_content(a: Iterable[int]) -> int:
    return reduce(gcd, a, 0)


def _zp_primitive(a: Sequence[int]) -> tuple:
    c = _zp_content(a)
    if c in (0, 1):
        return tuple(a)
    return tuple(x // c for x in a)


def _zp_pseudo_rem(a: tuple, b: tuple) -> tuple:
    r = list(a)
    lb, db = b[-1], len(b) - 1
    while len(r) - 1 >= db and r:
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [x * lb for x in r]
        for j, y in enumerate(b):
            r[shift + j] -= lr * y
        r = list(_zp_strip(r))
    return tuple(r)


def _zp_gcd(a: Sequence[int], b: Sequence[int]) -> tuple:
    """gcd in Z[hbar], normalized to a positive lowest-order coefficient."""
    a, b = tuple(a), tuple(b)
    if not a:
        return _zp_normsign(b)
    if not b:
        return _zp_normsign(a)
    ca, cb = _zp_content(a), _zp_content(b)
    c = gcd(ca, cb)
    pa, pb = _zp_primitive(a), _zp_primitive(b)
    if len(pa) < len(pb):
        pa, pb = pb, pa
    while pb and len(pb) > 1:
        r = _zp_pseudo_rem(pa, pb)
        pa, pb = pb, _zp_primitive(r) if r else ()
    if pb:  # nonzero constant remainder: primitive parts are coprime
        g = (1,)
    else:
        g = _zp_primitive(pa)
    return _zp_normsign(tuple(c * x for x in g))


def _zp_normsign(a: tuple) -> tuple:
    for x in a:
        if x:
            return a if x > 0 else tuple(-y for y in a)
    return a


def _zp_divexact(a: Sequence[int], b: Sequence[int]) -> tuple:
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    if len(r) <= db:
        if any(r):
            raise ArithmeticError("inexact polynomial division")
        return ()
    q = [0] * (len(r) - db)
    for k in range(len(r) - 1, db - 1, -1):
        c = r[k]
        if c:
            qq, rem = divmod(c, lb)
            if rem:
                raise ArithmeticError("inexact polynomial division")
            q[k - db] = qq
            for j, y in enumerate(b):
                r[k - db + j] -= qq * y
    if any(r):
        raise ArithmeticError("inexact polynomial division")
    return _zp_strip(q)


# -- packed polynomial helpers ----------------------------------------------

def _pmul(a: dict, b: dict) -> dict:
    if len(a) < len(b):
        a, b = b, a
    out: dict = {}
    get = out.get
    for mb, cb in b.items():
        for ma, ca in a.items():
            m = ma + mb
            out[m] = get(m, 0) + ca * cb
    return {m: c for m, c in out.items() if c}


def _padd_into(out: dict, a: dict, scale: int = 1) -> None:
    get = out.get
    for m, c in a.items():
        v = get(m, 0) + c * scale
        if v:
            out[m] = v
        else:
            out.pop(m, None)


def _pscale_hpoly(a: dict, hp: Sequence[int], hshift: int) -> dict:
    """Multiply a packed polynomial by sum_k hp[k] hbar^k."""
    if len(hp) == 1:
        c = hp[0]
        return {m: x * c for m, x in a.items()} if c != 1 else dict(a)
    out: dict = {}
    for k, c in enumerate(hp):
        if c:
            off = k << hshift
            for m, x in a.items():
                mm = m + off
                v = out.get(mm, 0) + x * c
                if v:
                    out[mm] = v
                else:
                    out.pop(mm, None)
    return out


@lru_cache(maxsize=None)
def _s_power_terms(N: int, k: int) -> tuple:
    """s**k as a tuple of (packed monomial, coefficient) pairs."""
    if k == 0:
        return ((0, 1),)
    s = {0: 1}
    for j in range(N):
        s[(1 << (_BITS * j)) + (1 << (_BITS * (N + j)))] = 1
    acc = dict(_s_power_terms(N, k - 1))
    return tuple(_pmul(acc, s).items())


def _s_pow(N: int, k: int) -> dict:
    return dict(_s_power_terms(N, k))


class ChartFunction:
    """Element of Q(hbar)[z, zbar][1/s] for a fixed chart dimension N."""

    __slots__ = ("N", "terms", "den", "s_power")

    def __init__(self, N: int, terms: dict | None = None, den: Sequence[int] = (1,), s_power: int = 0):
        if N < 1:
            raise ValueError("chart dimension must be positive")
        if s_power < 0:
            raise ValueError("s_power must be non-negative")
        den = _zp_strip(list(den))
        if not den:
            raise ZeroDivisionError("zero hbar-denominator")
        self.N = N
        self.terms = {m: c for m, c in (terms or {}).items() if c}
        self.den = den
        self.s_power = s_power
        self._normalize_content()

    @classmethod
    def _raw(cls, N, terms, den, s_power) -> "ChartFunction":
        f = object.__new__(cls)
        f.N, f.terms, f.den, f.s_power = N, terms, den, s_power
        return f

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, N: int) -> "ChartFunction":
        return cls._raw(N, {}, (1,), 0)

    @classmethod
    def constant(cls, N: int, value=1) -> "ChartFunction":
        return cls.monomial(N, (0,) * N, (0,) * N, value)

    @classmethod
    def monomial(cls, N: int, z_exps: Sequence[int], zbar_exps: Sequence[int], coeff=1) -> "ChartFunction":
        if len(z_exps) != N or len(zbar_exps) != N:
            raise ValueError("exponent vectors must have length N")
        if any(e < 0 for e in list(z_exps) + list(zbar_exps)):
            raise ValueError("negative exponent")
        mono = 0
        for j, e in enumerate(list(z_exps) + list(zbar_exps)):
            mono += e << (_BITS * j)
        num, den = HRational.coerce(coeff).integer_form()
        hshift = _BITS * 2 * N
        terms = {mono + (k << hshift): c for k, c in enumerate(num) if c}
        return cls(N, terms, den, 0)

    @classmethod
    def z(cls, N: int, k: int) -> "ChartFunction":
        e = [0] * N
        e[k - 1] = 1
        return cls.monomial(N, e, [0] * N)

    @classmethod
    def zbar(cls, N: int, k: int) -> "ChartFunction":
        e = [0] * N
        e[k - 1] = 1
        return cls.monomial(N, [0] * N, e)

    @classmethod
    def s(cls, N: int) -> "ChartFunction":
        return cls._raw(N, _s_pow(N, 1), (1,), 0)

    def s_inverse_power(self, k: int) -> "ChartFunction":
        """Divide by s**k."""
        return ChartFunction._raw(self.N, dict(self.terms), self.den, self.s_power + k)

    # -- internals -------------------------------------------------------
    @property
    def _hshift(self) -> int:
        return _BITS * 2 * self.N

    def _normalize_content(self) -> None:
        if not self.terms:
            self.den = (1,)
            self.s_power = 0
            return
        g = _zp_content(self.den)
        for c in self.terms.values():
            if g == 1:
                break
            g = gcd(g, c)
        sign = -1 if next(x for x in self.den if x) < 0 else 1
        g *= sign
        if g != 1:
            self.terms = {m: c // g for m, c in self.terms.items()}
            self.den = tuple(x // g for x in self.den)

    def _coerce(self, other) -> "ChartFunction":
        if isinstance(other, ChartFunction):
            if other.N != self.N:
                raise ValueError("chart dimension mismatch")
            return other
        return ChartFunction.constant(self.N, other)

    def _lifted_terms(self, target_s: int) -> dict:
        if target_s == self.s_power:
            return self.terms
        return _pmul(self.terms, _s_pow(self.N, target_s - self.s_power))

    # -- ring operations -------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other) -> "ChartFunction":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        sp = max(self.s_power, other.s_power)
        a = self._lifted_terms(sp)
        b = other._lifted_terms(sp)
        hs = self._hshift
        if self.den == other.den:
            out = dict(a)
            _padd_into(out, b)
            return ChartFunction(self.N, out, self.den, sp)
        g = _zp_gcd(self.den, other.den)
        fa = _zp_divexact(other.den, g)  # cofactor for a
        fb = _zp_divexact(self.den, g)
        out = _pscale_hpoly(a, fa, hs)
        _padd_into(out, _pscale_hpoly(b, fb, hs))
        den = _zp_mul(self.den, fa)
        return ChartFunction(self.N, out, den, sp)

    __radd__ = __add__

    def __neg__(self) -> "ChartFunction":
        return ChartFunction._raw(self.N, {m: -c for m, c in self.terms.items()}, self.den, self.s_power)

    def __sub__(self, other) -> "ChartFunction":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "ChartFunction":
        return (-self) + other

    def __mul__(self, other) -> "ChartFunction":
        if isinstance(other, int):
            if other == 0:
                return ChartFunction.zero(self.N)
            return ChartFunction(self.N, {m: c * other for m, c in self.terms.items()}, self.den, self.s_power)
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not self.terms or not other.terms:
            return ChartFunction.zero(self.N)
        terms = _pmul(self.terms, other.terms)
        den = _zp_mul(self.den, other.den) if other.den != (1,) else self.den
        if self.den == (1,):
            den = other.den
        return ChartFunction(self.N, terms, den, self.s_power + other.s_power)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ChartFunction":
        out = ChartFunction.constant(self.N, 1)
        for _ in range(n):
            out = out * self
        return out

    def partial(self, k: int, bar: bool = False) -> "ChartFunction":
        """Derivative by z^k (or zbar^k when ``bar``), k in 1..N."""
        if not 1 <= k <= self.N:
            raise ValueError(f"coordinate {k} outside 1..{self.N}")
        var = (k - 1) + (self.N if bar else 0)
        sh = _BITS * var
        unit = 1 << sh
        dP: dict = {}
        for m, c in self.terms.items():
            e = (m >> sh) & _MASK
            if e:
                dP[m - unit] = dP.get(m - unit, 0) + c * e
        if self.s_power == 0:
            return ChartFunction(self.N, dP, self.den, 0)
        # d(P/s^m) = (dP * s - m * P * ds) / s^(m+1); ds/dz^k = zbar^k, ds/dzbar^k = z^k
        partner = 1 << (_BITS * ((k - 1) + (0 if bar else self.N)))
        out = _pmul(dP, _s_pow(self.N, 1)) if dP else {}
        mp = self.s_power
        for m, c in self.terms.items():
            mm = m + partner
            v = out.get(mm, 0) - mp * c
            if v:
                out[mm] = v
            else:
                out.pop(mm, None)
        return ChartFunction(self.N, out, self.den, self.s_power + 1).reduce_s()

    # -- normal forms ----------------------------------------------------
    def _zdeg(self, m: int) -> int:
        d = 0
        for j in range(2 * self.N):
            d += (m >> (_BITS * j)) & _MASK
        return d

    def _divide_by_s(self) -> dict | None:
        """Exact quotient terms / s, or None if s does not divide."""
        if not self.terms:
            return None
        N = self.N
        by_deg: dict[int, dict] = {}
        for m, c in self.terms.items():
            by_deg.setdefault(self._zdeg(m), {})[m] = c
        top = max(by_deg)
        pairs = [(1 << (_BITS * j)) + (1 << (_BITS * (N + j))) for j in range(N)]
        q: dict[int, dict] = {}
        for d in range(top + 1):
            cur = dict(by_deg.get(d, {}))
            prev = q.get(d - 2)
            if prev:
                for m, c in prev.items():
                    for p in pairs:
                        mm = m + p
                        v = cur.get(mm, 0) - c
                        if v:
                            cur[mm] = v
                        else:
                            cur.pop(mm, None)
            if cur:
                if d >= top - 1:
                    return None
                q[d] = cur
        out: dict = {}
        for part in q.values():
            out.update(part)
        return out

    def reduce_s(self) -> "ChartFunction":
        """Cancel common factors of s between numerator and denominator."""
        f = self
        while f.s_power > 0:
            q = f._divide_by_s()
            if q is None:
                break
            f = ChartFunction._raw(f.N, q, f.den, f.s_power - 1)
        return f

    def _grouped(self) -> dict:
        """z/zbar monomial -> integer hbar-polynomial (as list)."""
        hs = self._hshift
        zmask = (1 << hs) - 1
        out: dict[int, list] = {}
        for m, c in self.terms.items():
            zm, k = m & zmask, m >> hs
            poly = out.setdefault(zm, [])
            if len(poly) <= k:
                poly.extend([0] * (k + 1 - len(poly)))
            poly[k] += c
        return out

    def canonical(self) -> "ChartFunction":
        """Reduced form: numerator not divisible by s, no common hbar factor with den."""
        f = self.reduce_s()
        if not f.terms:
            return ChartFunction.zero(f.N)
        g = f.den
        if len(g) > 1:
            for poly in f._grouped().values():
                g = _zp_gcd(g, _zp_strip(list(poly)))
                if len(g) == 1:
                    break
        if len(g) > 1:
            hs = f._hshift
            zmask = (1 << hs) - 1
            terms: dict = {}
            for zm, poly in f._grouped().items():
                for k, c in enumerate(_zp_divexact(_zp_strip(list(poly)), g)):
                    if c:
                        terms[zm + (k << hs)] = c
            return ChartFunction(f.N, terms, _zp_divexact(f.den, g), f.s_power)
        return ChartFunction(f.N, dict(f.terms), f.den, f.s_power)

    def unpack(self, m: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        ex = [(m >> (_BITS * j)) & _MASK for j in range(2 * self.N)]
        return tuple(ex[: self.N]), tuple(ex[self.N:])

    def coefficients(self) -> dict:
        """Canonical form as {(z_exps, zbar_exps): HRational}; the value is this sum over s**s_power."""
        f = self.canonical()
        den = HPolynomial(f.den)
        out = {}
        for zm, poly in sorted(f._grouped().items()):
            out[f.unpack(zm)] = HRational(HPolynomial(poly), den)
        return out

    def at_origin(self) -> HRational:
        """Value at z = zbar = 0 (where s = 1)."""
        hs = self._hshift
        zmask = (1 << hs) - 1
        poly: list = []
        for m, c in self.terms.items():
            if m & zmask == 0:
                k = m >> hs
                if len(poly) <= k:
                    poly.extend([0] * (k + 1 - len(poly)))
                poly[k] += c
        return HRational(HPolynomial(poly), HPolynomial(self.den))

    def series(self, order: int) -> dict:
        """Per-monomial hbar-Taylor coefficients of the numerator over den, through ``order``.

        The s**s_power denominator is hbar-free and left implicit.
        """
        den = HPolynomial(self.den)
        out = {}
        for zm, poly in self._grouped().items():
            out[self.unpack(zm)] = expand_series(HRational(HPolynomial(poly), den), order)
        return out

    def hbar_valuation(self) -> int | None:
        """Lowest power of hbar with a nonzero coefficient in the hbar-expansion, None for zero.

        The expansion is taken with z, zbar fixed; s**s_power plays no role.
        """
        if not self.terms:
            return None
        hs = self._hshift
        low_den = next(k for k, c in enumerate(self.den) if c)
        low_num = min(m >> hs for m in self.terms)
        return low_num - low_den

    def hbar_coefficient(self, k: int) -> "ChartFunction":
        """The coefficient of hbar**k in the expansion, as an hbar-free ChartFunction."""
        N = self.N
        out = ChartFunction.zero(N)
        for (ze, zbe), coeffs in self.series(k).items():
            c = coeffs[k]
            if c:
                out = out + ChartFunction.monomial(N, ze, zbe, c)
        return out.s_inverse_power(self.s_power) if out else out

    # -- comparison / output ----------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, ChartFunction):
            try:
                other = ChartFunction.constant(self.N, other)
            except TypeError:
                return NotImplemented
        if other.N != self.N:
            return False
        sp = max(self.s_power, other.s_power)
        hs = self._hshift
        a = _pscale_hpoly(self._lifted_terms(sp), other.den, hs)
        b = _pscale_hpoly(other._lifted_terms(sp), self.den, hs)
        return a == b

    __hash__ = None

    def __repr__(self) -> str:
        return f"ChartFunction(N={self.N}, {self})"

    def __str__(self) -> str:
        coeffs = self.coefficients()
        f = self.canonical()
        if not coeffs:
            return "0"
        parts = []
        for (ze, zbe), c in coeffs.items():
            mono = _monomial_str(ze, zbe)
            cs = str(c)
            if mono == "1":
                body = cs
            elif cs == "1":
                body = mono
            elif cs == "-1":
                body = "-" + mono
            else:
                if " " in cs:
                    cs = f"({cs})"
                body = f"{cs}*{mono}"
            parts.append(body)
        out = parts[0]
        for p in parts[1:]:
            out += (" - " + p[1:]) if p.startswith("-") else (" + " + p)
        if f.s_power:
            sp = "s" if f.s_power == 1 else f"s^{f.s_power}"
            out = f"({out})/{sp}"
        return out

    def to_json(self) -> dict:
        f = self.canonical()
        num = []
        for (ze, zbe), c in self.coefficients().items():
            num.append({"coeff": hr_to_json(c), "monomial": list(ze) + list(zbe)})
        return {"N": self.N, "num": num, "s_power": f.s_power}

    @classmethod
    def from_json(cls, obj: dict, N: int | None = None) -> "ChartFunction":
        N = obj.get("N", N)
        if N is None:
            raise ValueError("chart dimension missing")
        out = cls.zero(N)
        for term in obj["num"]:
            mono = term["monomial"]
            out = out + cls.monomial(N, mono[:N], mono[N:], hr_from_json(term["coeff"]))
        return out.s_inverse_power(int(obj.get("s_power", 0)))


def _monomial_str(ze: Sequence[int], zbe: Sequence[int]) -> str:
    factors = []
    for name, exps in (("z", ze), ("zb", zbe)):
        for j, e in enumerate(exps):
            if e == 1:
                factors.append(f"{name}{j + 1}")
            elif e > 1:
                factors.append(f"{name}{j + 1}^{e}")
    return "*".join(factors) if factors else "1"


def monomials_up_to(N: int, degree: int) -> list[ChartFunction]:
    """All monomials in z, zbar of total degree <= ``degree``, coefficient 1."""
    from .multiindex import enumerate_weight

    out = []
    for d in range(degree + 1):
        for e in enumerate_weight(2 * N, d):
            out.append(ChartFunction.monomial(N, e[:N], e[N:]))
    return out
