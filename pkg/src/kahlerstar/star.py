"""Star products of polynomial functions on a CP^N chart and order-by-order axiom checks.

D^k f = sum_m g^{k mbar} d_{zbar^m} f acts on the left factor and
D^{jbar} g = sum_l g^{jbar l} d_{z^l} g on the right one.  Away from the
origin the coefficients are T^n(z)_{alpha,beta} = c_n |G^{alpha,beta}(z)|^+ / (alpha! beta!)
with G built from the metric field and the scalars c_n read off the origin table.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Sequence

from .algebra import HBAR, HRational
from .chart import ChartFunction
from .coeffs import CoefficientTable
from .geometry import ChartMetric, cpn_chart_metric
from .multiindex import enumerate_weight, factorial_product, is_valid
from .permanent import block_permanent


class StarError(ValueError):
    pass


def d_holo(f: ChartFunction, k: int, chart: ChartMetric) -> ChartFunction:
    """D^k f = sum_m g^{k mbar} d f / d zbar^m, k in 1..N."""
    N = chart.N
    if not 1 <= k <= N:
        raise StarError(f"coordinate {k} outside 1..{N}")
    out = ChartFunction.zero(N)
    for m in range(N):
        df = f.partial(m + 1, bar=True)
        if df:
            out = out + chart.inverse_metric_field[m][k - 1] * df
    return out


def d_antiholo(g: ChartFunction, j: int, chart: ChartMetric) -> ChartFunction:
    """D^{jbar} g = sum_l g^{jbar l} d g / d z^l, j in 1..N."""
    N = chart.N
    if not 1 <= j <= N:
        raise StarError(f"coordinate {j} outside 1..{N}")
    out = ChartFunction.zero(N)
    for l in range(N):
        dg = g.partial(l + 1)
        if dg:
            out = out + chart.inverse_metric_field[j - 1][l] * dg
    return out


_OPS = {"holo": d_holo, "antiholo": d_antiholo}


def apply_multi(f: ChartFunction, alpha: Sequence[int], which: str, chart: ChartMetric, order: Sequence[int] | None = None) -> ChartFunction:
    """Composite operator D^{alpha_1}_1 ... D^{alpha_N}_N; ``order`` permutes the coordinates applied."""
    if which not in _OPS:
        raise StarError("which must be 'holo' or 'antiholo'")
    if len(alpha) != chart.N:
        raise StarError("multi-index length must equal N")
    if not is_valid(alpha):
        return ChartFunction.zero(chart.N)
    op = _OPS[which]
    coords = order if order is not None else range(1, chart.N + 1)
    out = f
    for k in reversed(list(coords)):
        for _ in range(alpha[k - 1]):
            if not out:
                return out
            out = op(out, k, chart)
    return out


class Derivatives:
    """All D^alpha f with |alpha| <= K, built incrementally (the operators commute)."""

    def __init__(self, f: ChartFunction, which: str, chart: ChartMetric, K: int):
        self.values: dict = {(0,) * chart.N: f}
        op = _OPS[which]
        for n in range(1, K + 1):
            for a in enumerate_weight(chart.N, n):
                k = next(i for i, x in enumerate(a) if x)
                base = self.values.get(a[:k] + (a[k] - 1,) + a[k + 1:])
                if base:
                    d = op(base, k + 1, chart)
                    if d:
                        self.values[a] = d

    def get(self, a):
        return self.values.get(tuple(a))


@dataclass
class StarResult:
    value: ChartFunction
    truncation_order: int

    def to_json(self) -> dict:
        return {"truncation_order": self.truncation_order, "value": self.value.to_json()}


_PERM_CACHE: dict = {}


def position_coefficient(n: int, alpha, beta, scalar: HRational, chart: ChartMetric) -> ChartFunction:
    """T^n(z)_{alpha,beta} = scalar * |G^{alpha,beta}(z)|^+ / (alpha! beta!)."""
    memo = _PERM_CACHE.setdefault(chart.N, {})
    one = ChartFunction.constant(chart.N, 1)
    perm = block_permanent(alpha, beta, chart.metric_field, one=one, memo=memo)
    if not perm:
        return perm
    return perm * (scalar / (factorial_product(alpha) * factorial_product(beta)))


class StarEngine:
    """Evaluates truncated star products for one origin table on the matching chart."""

    def __init__(self, table: CoefficientTable, chart: ChartMetric | None = None):
        if table.manifold.get("kind") != "cpn":
            raise StarError("star products are evaluated on CP^N tables only")
        N = table.N
        chart = chart or cpn_chart_metric(N)
        if chart.N != N:
            raise StarError("chart and table dimensions differ")
        self.table = table
        self.chart = chart
        self.N = N
        self.scalars = [self._scalar(n) for n in range(table.max_order + 1)]
        self._coeffs: dict = {}

    def _scalar(self, n: int) -> HRational:
        """c_n = n! T^n_{n e_1, n e_1}; every other origin entry must follow the permanent structure."""
        N = self.N
        top = (n,) + (0,) * (N - 1)
        c = self.table.get(n, top, top) * factorial(n)
        ident = [[1 if i == j else 0 for j in range(N)] for i in range(N)]
        memo: dict = {}
        for a in enumerate_weight(N, n):
            for b in enumerate_weight(N, n):
                perm = block_permanent(a, b, ident, one=1, memo=memo)
                expect = c * perm / (factorial_product(a) * factorial_product(b))
                if self.table.get(n, a, b) != expect:
                    raise StarError(f"table entry (n={n}, alpha={a}, beta={b}) lacks the CP^N permanent structure")
        return c

    def coefficient(self, n: int, a, b) -> ChartFunction:
        key = (n, a, b)
        if key not in self._coeffs:
            self._coeffs[key] = position_coefficient(n, a, b, self.scalars[n], self.chart)
        return self._coeffs[key]

    def _check_K(self, K: int) -> None:
        if K < 0 or K > self.table.max_order:
            raise StarError(f"truncation order {K} outside 0..{self.table.max_order}")

    def derivatives(self, f: ChartFunction, which: str, K: int) -> Derivatives:
        return Derivatives(f, which, self.chart, K)

    def right_weights(self, h: Derivatives, K: int) -> dict:
        """W_alpha = sum_beta T_{alpha,beta}(z) D^beta h, so that f * h = sum_alpha (D^alpha f) W_alpha."""
        out = {}
        for n in range(K + 1):
            for a in enumerate_weight(self.N, n):
                acc = ChartFunction.zero(self.N)
                for b in enumerate_weight(self.N, n):
                    db = h.get(b)
                    if db:
                        acc = acc + self.coefficient(n, a, b) * db
                if acc:
                    out[a] = acc
        return out

    def left_weights(self, f: Derivatives, K: int) -> dict:
        """V_beta = sum_alpha T_{alpha,beta}(z) D^alpha f, so that f * h = sum_beta V_beta (D^beta h)."""
        out = {}
        for n in range(K + 1):
            for b in enumerate_weight(self.N, n):
                acc = ChartFunction.zero(self.N)
                for a in enumerate_weight(self.N, n):
                    da = f.get(a)
                    if da:
                        acc = acc + self.coefficient(n, a, b) * da
                if acc:
                    out[b] = acc
        return out

    @staticmethod
    def contract(derivs: Derivatives, weights: dict, N: int) -> ChartFunction:
        acc = ChartFunction.zero(N)
        for a, w in weights.items():
            d = derivs.get(a)
            if d:
                acc = acc + d * w
        return acc

    def star(self, f: ChartFunction, g: ChartFunction, K: int) -> StarResult:
        self._check_K(K)
        df = self.derivatives(f, "holo", K)
        dg = self.derivatives(g, "antiholo", K)
        return StarResult(self.contract(df, self.right_weights(dg, K), self.N), K)


def star(f: ChartFunction, g: ChartFunction, table: CoefficientTable, K: int, chart: ChartMetric | None = None) -> StarResult:
    return StarEngine(table, chart).star(f, g, K)


# -- axiom checks ---------------------------------------------------------

@dataclass
class CheckReport:
    name: str
    passed: bool = True
    failures: list = field(default_factory=list)
    checked: int = 0

    def fail(self, detail: dict) -> None:
        self.passed = False
        self.failures.append(detail)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checked": self.checked, "failures": self.failures}


def check_unit(f: ChartFunction, table: CoefficientTable, K: int, chart: ChartMetric | None = None, engine: StarEngine | None = None) -> CheckReport:
    """f * 1 = 1 * f = f exactly; a failure records the lowest hbar order that differs."""
    eng = engine or StarEngine(table, chart)
    one = ChartFunction.constant(f.N, 1)
    report = CheckReport("unit")
    for side, val in (("f*1", eng.star(f, one, K).value), ("1*f", eng.star(one, f, K).value)):
        report.checked += 1
        diff = val - f
        if diff:
            report.fail({"side": side, "hbar_order": diff.hbar_valuation(), "f": str(f)})
    return report


def poisson_bracket(f: ChartFunction, g: ChartFunction, chart: ChartMetric) -> ChartFunction:
    """sum_{a,b} g^{abar b} (d_{zbar^a} f d_{z^b} g - d_{zbar^a} g d_{z^b} f)."""
    N = chart.N
    out = ChartFunction.zero(N)
    for a in range(N):
        fa, ga = f.partial(a + 1, bar=True), g.partial(a + 1, bar=True)
        for b in range(N):
            term = fa * g.partial(b + 1) - ga * f.partial(b + 1)
            if term:
                out = out + chart.inverse_metric_field[a][b] * term
    return out


def check_poisson(f: ChartFunction, g: ChartFunction, table: CoefficientTable, chart: ChartMetric | None = None, engine: StarEngine | None = None) -> CheckReport:
    """The hbar^1 coefficient of f*g - g*f equals the Poisson bivector contraction."""
    eng = engine or StarEngine(table, chart)
    report = CheckReport("poisson", checked=1)
    comm = eng.star(f, g, 1).value - eng.star(g, f, 1).value
    defect = comm - poisson_bracket(f, g, eng.chart) * HBAR
    v = defect.hbar_valuation()
    if v is not None and v <= 1:
        report.fail({"f": str(f), "g": str(g), "hbar_order": v})
    return report


class AssociativityChecker:
    """Checks (f*g)*h - f*(g*h) = O(hbar^{K+1}) for many triples drawn from one pool of functions."""

    def __init__(self, engine: StarEngine, pool: Sequence[ChartFunction], K: int):
        engine._check_K(K)
        self.engine = engine
        self.K = K
        self.pool = list(pool)
        N = engine.N
        holo = [engine.derivatives(p, "holo", K) for p in self.pool]
        anti = [engine.derivatives(p, "antiholo", K) for p in self.pool]
        self._right = [engine.right_weights(d, K) for d in anti]  # for x * pool[k]
        self._left = [engine.left_weights(d, K) for d in holo]  # for pool[k] * x
        self._pairs: dict = {}
        self._N = N

    def pair(self, i: int, j: int) -> ChartFunction:
        key = (i, j)
        if key not in self._pairs:
            d = self.engine.derivatives(self.pool[i], "holo", self.K)
            self._pairs[key] = self.engine.contract(d, self._right[j], self._N)
        return self._pairs[key]

    def defect(self, i: int, j: int, k: int) -> ChartFunction:
        eng, K, N = self.engine, self.K, self._N
        fg = self.pair(i, j)
        gh = self.pair(j, k)
        lhs = eng.contract(eng.derivatives(fg, "holo", K), self._right[k], N)
        rhs = eng.contract(eng.derivatives(gh, "antiholo", K), self._left[i], N)
        return lhs - rhs

    def check(self, i: int, j: int, k: int) -> int | None:
        """None when the defect vanishes through hbar^K, else the first offending order."""
        v = self.defect(i, j, k).hbar_valuation()
        if v is None or v > self.K:
            return None
        return v


def check_associativity(f, g, h, table: CoefficientTable, K: int, chart: ChartMetric | None = None, engine: StarEngine | None = None) -> CheckReport:
    eng = engine or StarEngine(table, chart)
    checker = AssociativityChecker(eng, [f, g, h], K)
    report = CheckReport("associativity", checked=1)
    v = checker.check(0, 1, 2)
    if v is not None:
        report.fail({"f": str(f), "g": str(g), "h": str(h), "hbar_order": v})
    return report
