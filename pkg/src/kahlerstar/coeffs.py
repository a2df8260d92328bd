"""Coefficient tables T^n_{alpha,beta} of star products with separation of variables.

The star product is f * g = sum_n sum_{|alpha|=|beta|=n} T^n_{alpha,beta} (D^alpha f)(D^beta g).
A table is keyed by (n, alpha, beta); alpha labels the holomorphic-index
operators D^k acting on f, beta the antiholomorphic-index operators acting on g.

Index conventions follow :mod:`kahlerstar.geometry`: ``metric[d][i]`` is the
component with holomorphic index d and antiholomorphic index i, so that
T^1_{e_d, e_i} = hbar * metric[d][i].
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Iterable

from .algebra import HBAR, ONE, ZERO, HRational, expand_series, from_json as hr_from_json, to_json as hr_to_json
from .geometry import GeometryError, GeometryPoint, cpn_geometry, geometry_from_json, grassmann_geometry, one_dim_geometry
from .linsolve import LinearSystemError, SingularMatrix, inverse, solve_exact
from .multiindex import enumerate_weight, factorial_product, is_valid, weight
from .permanent import block_permanent


class CoefficientError(ValueError):
    pass


Key = tuple  # (n, alpha, beta)


def _bump(t: tuple, *moves: tuple[int, int]) -> tuple:
    """0-based shift: add ``sign`` at position ``coord`` for each (coord, sign)."""
    out = list(t)
    for c, s in moves:
        out[c] += s
    return tuple(out)


def _d(a: int, b: int) -> int:
    return 1 if a == b else 0


class CoefficientTable:
    """Exact table of T^n_{alpha,beta} through ``max_order``.

    Lookups of keys outside the table (invalid or mismatched indices, orders
    above ``max_order``) return exact zero.
    """

    def __init__(self, geometry: GeometryPoint, max_order: int, entries: dict, manifold: dict | None = None):
        self.geometry = geometry
        self.N = geometry.N
        self.max_order = max_order
        self.entries = dict(entries)
        self.manifold = dict(manifold) if manifold is not None else geometry.describe()

    def get(self, n: int, alpha, beta) -> HRational:
        return self.entries.get((n, tuple(alpha), tuple(beta)), ZERO)

    __call__ = get

    def order(self, n: int) -> dict:
        return {(a, b): v for (m, a, b), v in self.entries.items() if m == n}

    def matrix(self, n: int, order=None) -> list[list[HRational]]:
        """Rows alpha, columns beta; ``order`` defaults to ascending lexicographic."""
        idx = order if order is not None else enumerate_weight(self.N, n)
        return [[self.get(n, a, b) for b in idx] for a in idx]

    def keys_sorted(self) -> list:
        return sorted(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoefficientTable):
            return NotImplemented
        return self.max_order == other.max_order and self.diff(other) == []

    def diff(self, other: "CoefficientTable") -> list:
        keys = set(self.entries) | set(other.entries)
        return sorted(k for k in keys if self.get(*k) != other.get(*k))

    def truncated(self, order: int) -> "CoefficientTable":
        return CoefficientTable(
            self.geometry, order, {k: v for k, v in self.entries.items() if k[0] <= order}, self.manifold
        )

    def with_entry(self, key: Key, value) -> "CoefficientTable":
        entries = dict(self.entries)
        entries[key] = HRational.coerce(value)
        return CoefficientTable(self.geometry, self.max_order, entries, self.manifold)

    # -- serialization --------------------------------------------------

    def to_json(self) -> dict:
        manifold = dict(self.manifold)
        manifold["geometry"] = self.geometry.to_json()
        return {
            "manifold": manifold,
            "max_order": self.max_order,
            "entries": [
                {"n": n, "alpha": list(a), "beta": list(b), "coeff": hr_to_json(self.entries[(n, a, b)])}
                for n, a, b in self.keys_sorted()
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, obj: dict) -> "CoefficientTable":
        manifold = dict(obj["manifold"])
        geom = geometry_from_json(manifold.pop("geometry"))
        entries = {}
        for e in obj["entries"]:
            a, b = tuple(e["alpha"]), tuple(e["beta"])
            if len(a) != geom.N or len(b) != geom.N or weight(a) != e["n"] or weight(b) != e["n"]:
                raise CoefficientError(f"malformed table entry {e}")
            entries[(e["n"], a, b)] = hr_from_json(e["coeff"])
        return cls(geom, int(obj["max_order"]), entries, manifold)

    def series_csv(self, hbar_order: int) -> str:
        """One row per entry: n, alpha, beta, then Taylor coefficients h^0..h^J."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "alpha", "beta"] + [f"h^{j}" for j in range(hbar_order + 1)])
        for n, a, b in self.keys_sorted():
            coeffs = expand_series(self.entries[(n, a, b)], hbar_order)
            w.writerow([n, " ".join(map(str, a)), " ".join(map(str, b))] + [str(c) for c in coeffs])
        return buf.getvalue()


def _base_entries(geom: GeometryPoint, max_order: int) -> dict:
    """T^0 = 1 and T^1_{e_d, e_i} = hbar g_{d ibar}."""
    N = geom.N
    entries = {(0, (0,) * N, (0,) * N): ONE}
    if max_order >= 1:
        for d in range(N):
            for i in range(N):
                entries[(1, _bump((0,) * N, (d, 1)), _bump((0,) * N, (i, 1)))] = HBAR * geom.metric[d][i]
    return entries


def _check_order(max_order: int) -> None:
    if max_order < 0:
        raise CoefficientError("order must be non-negative")


# -- the general recurrence -----------------------------------------------

@dataclass
class Equation:
    """sum_{beta'} coeffs[beta'] T^n_{alpha,beta'} = lhs, labelled by (i, alpha, beta); i is 0-based."""

    i: int
    alpha: tuple
    beta: tuple
    coeffs: dict
    lhs: HRational


def general_equations(geom: GeometryPoint, n: int, alpha: tuple, prev: Callable) -> list[Equation]:
    """All equations of the general recurrence for one alpha at order n >= 1.

    ``prev(alpha', beta')`` returns T^{n-1}.  Invalid shifted indices drop out.
    """
    N = geom.N
    h = HBAR
    g = geom.metric
    R = geom.curvature
    out = []
    for beta in enumerate_weight(N, n):
        for i in range(N):
            if beta[i] == 0:
                continue
            lhs = ZERO
            b_i = _bump(beta, (i, -1))
            for d in range(N):
                if alpha[d] and g[d][i]:
                    t = prev(_bump(alpha, (d, -1)), b_i)
                    if t:
                        lhs = lhs + h * g[d][i] * t
            coeffs: dict = {beta: HRational.coerce(beta[i])}

            def put(target, value):
                if is_valid(target) and value:
                    coeffs[target] = coeffs.get(target, ZERO) + value

            for k in range(N):
                for p in range(N):
                    r = R[p][k][k][i]
                    if not r:
                        continue
                    m = beta[k] - _d(k, p) - _d(i, k)
                    c = Fraction((m + 1) * (m + 2), 2)
                    if c:
                        put(_bump(beta, (p, -1), (k, 2), (i, -1)), h * r * c)
            for k in range(N):
                for kl in range(k + 1, N):
                    for p in range(N):
                        r = R[p][kl][k][i]
                        if not r:
                            continue
                        c = (beta[k] - _d(k, p) - _d(i, k) + 1) * (beta[kl] - _d(kl, p) - _d(i, kl) + 1)
                        if c:
                            put(_bump(beta, (p, -1), (k, 1), (kl, 1), (i, -1)), h * r * c)
            out.append(Equation(i, alpha, beta, {b: v for b, v in coeffs.items() if v}, lhs))
    return out


def solve_general(geom: GeometryPoint, max_order: int) -> CoefficientTable:
    """Build T^n order by order from the general recurrence, solving each alpha block exactly.

    Raises :class:`LinearSystemError` subclasses if an order's system is
    inconsistent (bad geometry data) or leaves unknowns free.
    """
    _check_order(max_order)
    N = geom.N
    entries = _base_entries(geom, max_order)
    for n in range(2, max_order + 1):
        def prev(a, b, _n=n - 1):
            return entries.get((_n, a, b), ZERO)

        unknowns = enumerate_weight(N, n)
        col = {b: c for c, b in enumerate(unknowns)}
        for alpha in unknowns:
            rows = []
            for eq in general_equations(geom, n, alpha, prev):
                row = [ZERO] * (len(unknowns) + 1)
                for b, v in eq.coeffs.items():
                    row[col[b]] = v
                row[-1] = eq.lhs
                rows.append(row)
            try:
                sol = solve_exact(rows, len(unknowns))
            except LinearSystemError as exc:
                exc.args = (f"order {n}, alpha {alpha}: {exc.args[0]}",)
                raise
            for b, v in zip(unknowns, sol):
                entries[(n, alpha, b)] = v
    return CoefficientTable(geom, max_order, entries)


@dataclass
class ResidualReport:
    order: int
    checked: int = 0
    violations: list = field(default_factory=list)  # (i, alpha, beta, residual), i 1-based

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "checked": self.checked,
            "passed": self.passed,
            "violations": [
                {"i": i, "alpha": list(a), "beta": list(b), "residual": hr_to_json(r)} for i, a, b, r in self.violations
            ],
        }


def verify_residual(table: CoefficientTable, geom: GeometryPoint, n: int) -> ResidualReport:
    """Evaluate every equation of the general recurrence at order n on the table's entries."""
    if n > table.max_order:
        raise CoefficientError(f"table only reaches order {table.max_order}")
    report = ResidualReport(n)
    N = geom.N
    if n == 0:
        z = (0,) * N
        report.checked = 1
        r = table.get(0, z, z) - ONE
        if r:
            report.violations.append((0, z, z, r))
        return report

    def prev(a, b):
        return table.get(n - 1, a, b)

    for alpha in enumerate_weight(N, n):
        for eq in general_equations(geom, n, alpha, prev):
            report.checked += 1
            acc = -eq.lhs
            for b, v in eq.coeffs.items():
                t = table.get(n, alpha, b)
                if t:
                    acc = acc + v * t
            if acc:
                report.violations.append((eq.i + 1, alpha, eq.beta, acc))
    return report


# -- closed forms ---------------------------------------------------------

def coeff_1d(g11, R, n: int) -> HRational:
    """T^n = g^n prod_{k=1}^{n} 2 hbar / (2k + hbar k (k-1) R) on a one-dimensional surface."""
    if n < 0:
        raise CoefficientError("order must be non-negative")
    g11 = HRational.coerce(g11)
    R = HRational.coerce(R)
    out = ONE
    for k in range(1, n + 1):
        out = out * g11 * (2 * HBAR) / (2 * k + HBAR * R * (k * (k - 1)))
    return out


def coeff_1d_table(g11, R, max_order: int) -> CoefficientTable:
    _check_order(max_order)
    geom = one_dim_geometry(g11, R)
    entries = {(n, (n,), (n,)): coeff_1d(g11, R, n) for n in range(max_order + 1)}
    return CoefficientTable(geom, max_order, entries)


TWO_DIM_ORDER = ((2, 0), (1, 1), (0, 2))


def coeff_2d_order2(geom: GeometryPoint) -> list[list[HRational]]:
    """All T^2 on a surface of complex dimension 2, rows alpha and columns beta in the order (2,0), (1,1), (0,2).

    T = hbar^2 M C^{-1}: M collects products of metric components and C the
    curvature-dependent coefficients of three independent equations.
    """
    if geom.N != 2:
        raise CoefficientError("two-dimensional geometry required")
    h = HBAR

    def gb(a, b):  # component with antiholomorphic index a, holomorphic index b (1-based)
        return geom.metric[b - 1][a - 1]

    def Rr(p, k, l, i):
        return geom.curvature[p - 1][k - 1][l - 1][i - 1]

    g11, g21, g12, g22 = gb(1, 1), gb(2, 1), gb(1, 2), gb(2, 2)
    M = [
        [g11 * g11, g11 * g21, g21 * g21],
        [2 * g11 * g12, g21 * g12 + g11 * g22, 2 * g21 * g22],
        [g12 * g12, g21 * g22, g22 * g22],
    ]
    C = [
        [2 + h * Rr(1, 1, 1, 1), h * Rr(2, 1, 1, 1), h * Rr(2, 1, 1, 2)],
        [h * Rr(1, 2, 1, 1), 1 + h * Rr(2, 2, 1, 1), h * Rr(2, 2, 1, 2)],
        [h * Rr(1, 2, 2, 1), h * Rr(2, 2, 2, 1), 2 + h * Rr(2, 2, 2, 2)],
    ]
    try:
        Cinv = inverse(C)
    except SingularMatrix as exc:
        raise CoefficientError("curvature matrix is singular") from exc
    hh = h * h
    return [[hh * sum((M[r][k] * Cinv[k][c] for k in range(3)), ZERO) for c in range(3)] for r in range(3)]


def _require_cpn(N: int) -> GeometryPoint:
    if N < 1:
        raise CoefficientError("N must be positive")
    return cpn_geometry(N)


def cpn_recurrence(N: int, max_order: int, pick: str = "first") -> CoefficientTable:
    """T^n_{a,b} = sum_d hbar g_{d ibar} T^{n-1}_{a-e_d, b-e_i} / ((1 + hbar - hbar n) b_i).

    ``pick`` selects the coordinate i among those with b_i >= 1: ``"first"``
    or ``"last"``.  Both give the same table.
    """
    _check_order(max_order)
    geom = _require_cpn(N)
    entries = _base_entries(geom, max_order)
    g = geom.metric
    for n in range(2, max_order + 1):
        scale = ONE / (1 + HBAR - HBAR * n)
        idx = enumerate_weight(N, n)
        for alpha in idx:
            for beta in idx:
                cands = [i for i in range(N) if beta[i]]
                i = cands[0] if pick == "first" else cands[-1]
                b_i = _bump(beta, (i, -1))
                acc = ZERO
                for d in range(N):
                    if alpha[d] and g[d][i]:
                        t = entries.get((n - 1, _bump(alpha, (d, -1)), b_i), ZERO)
                        if t:
                            acc = acc + HBAR * g[d][i] * t
                entries[(n, alpha, beta)] = acc * scale / beta[i]
    return CoefficientTable(geom, max_order, entries)


def cpn_scalar(n: int) -> HRational:
    """prod_{j=1}^{n} hbar / (1 + hbar - hbar j)."""
    out = ONE
    for j in range(1, n + 1):
        out = out * HBAR / (1 + HBAR - HBAR * j)
    return out


def cpn_closed(N: int, alpha, beta, memo: dict | None = None) -> HRational:
    """|G^{alpha,beta}|^+ / (alpha! beta!) times prod_{j=1}^{n} hbar/(1 + hbar - hbar j), at the origin."""
    alpha, beta = tuple(alpha), tuple(beta)
    if len(alpha) != N or len(beta) != N:
        raise CoefficientError("multi-index length must equal N")
    n = weight(alpha)
    if weight(beta) != n:
        raise CoefficientError("alpha and beta have different weights")
    if not (is_valid(alpha) and is_valid(beta)):
        return ZERO
    geom = _require_cpn(N)
    perm = block_permanent(alpha, beta, geom.metric, memo=memo)
    if not perm:
        return ZERO
    return perm * cpn_scalar(n) / (factorial_product(alpha) * factorial_product(beta))


def cpn_closed_table(N: int, max_order: int) -> CoefficientTable:
    _check_order(max_order)
    geom = _require_cpn(N)
    memo: dict = {}
    entries = {}
    for n in range(max_order + 1):
        idx = enumerate_weight(N, n)
        for a in idx:
            for b in idx:
                entries[(n, a, b)] = cpn_closed(N, a, b, memo)
    return CoefficientTable(geom, max_order, entries)


def cpn_gamma_coeff(n: int) -> HRational:
    """Gamma(1 - n + 1/hbar) / (n! Gamma(1 + 1/hbar)) as an element of Q(hbar).

    With x = 1/hbar, Gamma(1+x) = x (x-1) ... (x-n+1) Gamma(1-n+x), so the
    ratio telescopes to 1 / prod_{j=0}^{n-1} (x - j).
    """
    if n < 0:
        raise CoefficientError("order must be non-negative")
    x = ONE / HBAR
    falling = ONE
    for j in range(n):
        falling = falling * (x - j)
    return ONE / (falling * factorial(n))


# -- G_{2,2} --------------------------------------------------------------

G22_LABELS = ((1, 1), (1, 2), (2, 1), (2, 2))  # (i, i') in the order 11' < 12' < 21' < 22'


def _g22_partners(I: int) -> tuple[int, int, int]:
    """For I = (i, i') return the flat indices of (i, j'), (j, i') and J = (j, j'), j = not i."""
    pos = {lab: k for k, lab in enumerate(G22_LABELS)}
    i, ip = G22_LABELS[I]
    j, jp = 3 - i, 3 - ip
    return pos[(i, jp)], pos[(j, ip)], pos[(j, jp)]


def g22_equations(n: int, alpha: tuple, prev: Callable, geom: GeometryPoint) -> list[Equation]:
    h = HBAR
    g = geom.metric
    out = []
    for beta in enumerate_weight(4, n):
        for I in range(4):
            if beta[I] == 0:
                continue
            ij, ji, J = _g22_partners(I)
            lead = beta[I] * (1 + h - h * beta[I] - h * beta[ji] - h * beta[ij])
            coeffs = {beta: lead}
            other = _bump(beta, (J, -1), (ij, 1), (ji, 1), (I, -1))
            if is_valid(other):
                v = -h * ((beta[ij] + 1) * (beta[ji] + 1))
                coeffs[other] = coeffs.get(other, ZERO) + v
            lhs = ZERO
            b_I = _bump(beta, (I, -1))
            for D in (I, ij, ji, J):
                if alpha[D] and g[D][I]:
                    t = prev(_bump(alpha, (D, -1)), b_I)
                    if t:
                        lhs = lhs + h * g[D][I] * t
            out.append(Equation(I, alpha, beta, {b: v for b, v in coeffs.items() if v}, lhs))
    return out


def solve_g22(max_order: int) -> CoefficientTable:
    """Tables for G_{2,2} at the origin from its dedicated recurrence, solved exactly per order."""
    _check_order(max_order)
    geom = grassmann_geometry(2, 2)
    entries = _base_entries(geom, max_order)
    for n in range(2, max_order + 1):
        def prev(a, b, _n=n - 1):
            return entries.get((_n, a, b), ZERO)

        unknowns = enumerate_weight(4, n)
        col = {b: c for c, b in enumerate(unknowns)}
        for alpha in unknowns:
            rows = []
            for eq in g22_equations(n, alpha, prev, geom):
                row = [ZERO] * (len(unknowns) + 1)
                for b, v in eq.coeffs.items():
                    row[col[b]] = v
                row[-1] = eq.lhs
                rows.append(row)
            try:
                sol = solve_exact(rows, len(unknowns))
            except LinearSystemError as exc:
                exc.args = (f"order {n}, alpha {alpha}: {exc.args[0]}",)
                raise
            for b, v in zip(unknowns, sol):
                entries[(n, alpha, b)] = v
    return CoefficientTable(geom, max_order, entries)


# -- dispatch -------------------------------------------------------------

METHODS = ("general", "closed", "recurrence")


def default_method(geom: GeometryPoint) -> str:
    if geom.kind == "cpn":
        return "closed"
    if geom.kind == "grassmann" and (geom.params.get("p"), geom.params.get("q")) == (2, 2):
        return "recurrence"
    return "general"


def compute_table(geom: GeometryPoint, max_order: int, method: str | None = None) -> CoefficientTable:
    method = method or default_method(geom)
    if method == "general":
        table = solve_general(geom, max_order)
    elif method == "closed" and geom.kind == "cpn":
        table = cpn_closed_table(geom.N, max_order)
    elif method == "closed" and geom.kind == "one_dim":
        g11, R = geom.metric[0][0], geom.curvature[0][0][0][0]
        table = coeff_1d_table(g11, R, max_order)
    elif method == "recurrence" and geom.kind == "cpn":
        table = cpn_recurrence(geom.N, max_order)
    elif method == "recurrence" and geom.kind == "grassmann" and (geom.params.get("p"), geom.params.get("q")) == (2, 2):
        table = solve_g22(max_order)
    else:
        raise CoefficientError(f"method {method!r} is not available for manifold kind {geom.kind!r}")
    # keep the caller's geometry metadata so outputs do not depend on the method
    return CoefficientTable(geom, table.max_order, table.entries, geom.describe())
