from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from itertools import product
from math import factorial

import pytest
import sympy as sp

from kahlerstar.algebra import HBAR, ONE, ZERO, HRational, expand_series
from kahlerstar.coeffs import (
    CoefficientError,
    TWO_DIM_ORDER,
    CoefficientTable,
    coeff_1d,
    coeff_2d_order2,
    compute_table,
    cpn_closed,
    cpn_closed_table,
    cpn_gamma_coeff,
    cpn_recurrence,
    solve_g22,
    solve_general,
    verify_residual,
)
from kahlerstar.geometry import cpn_geometry, custom_geometry, grassmann_geometry, one_dim_geometry
from kahlerstar.linsolve import InconsistentSystem, RankDeficient, solve_exact
from kahlerstar.multiindex import enumerate_weight, factorial_product, from_sequence
from oracles import gamma_scalar, h, hr_from_sympy

CP1_T2 = hr_from_sympy(h**2 / (2 * (1 - h)))
CP1_T3 = hr_from_sympy(h**3 / (6 * (1 - h) * (1 - 2 * h)))


def flat2():
    return custom_geometry([[1, 0], [0, 1]], [[[[0] * 2] * 2] * 2] * 2)


def test_order_zero_and_one():
    for geom in (cpn_geometry(2), grassmann_geometry(2, 2), one_dim_geometry(2, Fraction(3, 5))):
        t = solve_general(geom, 1)
        N = geom.N
        assert t.get(0, (0,) * N, (0,) * N) == ONE
        for d, i in product(range(N), repeat=2):
            ed = tuple(int(k == d) for k in range(N))
            ei = tuple(int(k == i) for k in range(N))
            assert t.get(1, ed, ei) == HBAR * geom.metric[d][i]
    assert solve_general(cpn_geometry(3), 0).entries == {(0, (0, 0, 0), (0, 0, 0)): ONE}


def test_cp1_low_orders():
    t = solve_general(one_dim_geometry(1, -2), 3)
    assert t.get(2, (2,), (2,)) == CP1_T2
    assert t.get(3, (3,), (3,)) == CP1_T3


def test_coeff_1d_examples():
    assert coeff_1d(5, 7, 0) == ONE
    assert coeff_1d(Fraction(3, 2), 7, 1) == HBAR * Fraction(3, 2)
    assert coeff_1d(1, -2, 2) == CP1_T2


def test_coeff_1d_scaled_metric_uses_lower_index():
    # scalar recurrence T^n = g * 2h / (2n + h n (n-1) R) * T^{n-1} with g = 2
    t = solve_general(one_dim_geometry(2, -2), 3)
    assert t.get(2, (2,), (2,)) == hr_from_sympy(2 * h**2 / (1 - h))
    assert t.get(2, (2,), (2,)) == coeff_1d(2, -2, 2)
    assert coeff_1d(2, -2, 2) != coeff_1d(Fraction(1, 2), -2, 2)


@pytest.mark.parametrize("g", [1, 2])
@pytest.mark.parametrize("R", [-2, 0, Fraction(3, 5)])
def test_one_dim_consistency(g, R):
    t = solve_general(one_dim_geometry(g, R), 8)
    for n in range(9):
        assert t.get(n, (n,), (n,)) == coeff_1d(g, R, n)


@pytest.mark.parametrize("N,K", [(1, 5), (2, 5), (3, 4)])
def test_cpn_triangulation(N, K):
    general = solve_general(cpn_geometry(N), K)
    rec = cpn_recurrence(N, K)
    closed = cpn_closed_table(N, K)
    assert general.diff(rec) == []
    assert general.diff(closed) == []
    assert len(general.entries) == sum(len(enumerate_weight(N, n)) ** 2 for n in range(K + 1))
    for n in range(K + 1):
        assert verify_residual(closed, cpn_geometry(N), n).passed


@pytest.mark.parametrize("N", [1, 2, 3])
def test_cpn_recurrence_choice_of_coordinate(N):
    assert cpn_recurrence(N, 4, "first").diff(cpn_recurrence(N, 4, "last")) == []


def test_cpn_recurrence_examples():
    t = cpn_recurrence(2, 2)
    assert t.get(1, (1, 0), (1, 0)) == HBAR
    assert t.get(1, (1, 0), (0, 1)) == ZERO
    assert cpn_recurrence(1, 2).get(2, (2,), (2,)) == CP1_T2
    assert t.get(2, (3, -1), (2, 0)) == ZERO


def test_cpn_closed_examples():
    assert cpn_closed(3, (0, 1, 0), (0, 1, 0)) == HBAR
    assert cpn_closed(3, (0, 1, 0), (1, 0, 0)) == ZERO
    assert cpn_closed(2, (0, 0), (0, 0)) == ONE
    for n in range(7):
        expect = HBAR**n / factorial(n)
        for j in range(n):
            expect = expect / (1 - j * HBAR)
        assert cpn_closed(1, (n,), (n,)) == expect
    with pytest.raises(CoefficientError):
        cpn_closed(2, (1, 0), (1, 1))


def test_gamma_coefficients():
    assert cpn_gamma_coeff(0) == ONE
    assert cpn_gamma_coeff(1) == HBAR
    assert cpn_gamma_coeff(2) == CP1_T2
    for n in range(7):
        assert cpn_gamma_coeff(n) == hr_from_sympy(gamma_scalar(n))


def test_cp1_three_way():
    for n in range(9):
        assert coeff_1d(1, -2, n) == cpn_gamma_coeff(n) == cpn_closed(1, (n,), (n,))


def _sequence_sums(N, n, g):
    """Group prod_r g[k_r][m_r] over all index sequences by their multiplicity vectors."""
    out: dict = {}
    for ks in product(range(1, N + 1), repeat=n):
        a = from_sequence(N, ks)
        for ms in product(range(1, N + 1), repeat=n):
            b = from_sequence(N, ms)
            w = ONE
            for k, m in zip(ks, ms):
                w = w * g[k - 1][m - 1]
            out[(a, b)] = out.get((a, b), ZERO) + w
    return out


@pytest.mark.parametrize("N", [2, 3])
def test_gamma_tensor_form(N):
    # the Gamma-form star product sums c_n prod g_{k_r mbar_r} over index sequences;
    # collecting sequences by multiplicities gives T^n_{alpha,beta}
    g = cpn_geometry(N).metric
    for n in range(0, 5):
        c = cpn_gamma_coeff(n)
        for (a, b), s in _sequence_sums(N, n, g).items():
            assert cpn_closed(N, a, b) == c * s


@pytest.mark.parametrize("N", [2, 3])
def test_gamma_permanent_form(N):
    # alpha! beta! T^n_{alpha,beta} = n! c_n |G^{alpha,beta}|^+, permanent taken by sympy
    for n in range(0, 5):
        c = cpn_gamma_coeff(n) * factorial(n)
        for a, b in product(enumerate_weight(N, n), repeat=2):
            rows = [k for k in range(N) for _ in range(a[k])]
            cols = [k for k in range(N) for _ in range(b[k])]
            perm = sp.Matrix(n, n, lambda r, q: int(rows[r] == cols[q])).per() if n else 1
            lhs = cpn_closed(N, a, b) * factorial_product(a) * factorial_product(b)
            assert lhs == c * int(perm)


def test_two_dim_formula_cp2():
    geom = cpn_geometry(2)
    assert coeff_2d_order2(geom) == solve_general(geom, 2).matrix(2, TWO_DIM_ORDER)


def test_two_dim_formula_flat():
    T = coeff_2d_order2(flat2())
    assert T == solve_general(flat2(), 2).matrix(2, TWO_DIM_ORDER)
    assert T[0][0] == HBAR**2 / 2
    assert T[1][1] == HBAR**2
    assert T[0][1] == ZERO and T[0][2] == ZERO


def test_two_dim_formula_scaled_metric():
    geom = custom_geometry([[2, 1], [1, 3]], cpn_geometry(2).curvature)
    assert coeff_2d_order2(geom) == solve_general(geom, 2).matrix(2, TWO_DIM_ORDER)


def test_two_dim_swap_symmetry():
    T = coeff_2d_order2(cpn_geometry(2))
    rev = [2, 1, 0]
    assert all(T[r][c] == T[rev[r]][rev[c]] for r in range(3) for c in range(3))


def test_two_dim_needs_n2():
    with pytest.raises(CoefficientError):
        coeff_2d_order2(cpn_geometry(3))


def test_g22_low_orders():
    t = solve_g22(2)
    assert t.get(0, (0,) * 4, (0,) * 4) == ONE
    for d, i in product(range(4), repeat=2):
        ed = tuple(int(k == d) for k in range(4))
        ei = tuple(int(k == i) for k in range(4))
        assert t.get(1, ed, ei) == (HBAR if d == i else ZERO)


def test_g22_matches_general_solver():
    G = grassmann_geometry(2, 2)
    t = solve_g22(3)
    for n in range(4):
        assert verify_residual(t, G, n).passed
    assert t.diff(solve_general(G, 3)) == []


def test_residual_detects_perturbation():
    geom = cpn_geometry(2)
    t = solve_general(geom, 3)
    key = (3, (2, 1), (1, 2))
    bad = t.with_entry(key, t.get(*key) + 1)
    assert verify_residual(t, geom, 3).passed
    report = verify_residual(bad, geom, 3)
    assert not report.passed
    assert all(r for _, _, _, r in report.violations)
    assert any(alpha == (2, 1) for _, alpha, _, _ in report.violations)


def test_inconsistent_geometry_is_reported():
    curv = [[[[ZERO] * 2 for _ in range(2)] for _ in range(2)] for _ in range(2)]
    curv[0][0][1][1] = curv[0][1][0][1] = HRational(-1)
    with pytest.raises(InconsistentSystem):
        solve_general(custom_geometry([[1, 0], [0, 1]], curv), 3)
    with pytest.raises(InconsistentSystem):
        solve_general(one_dim_geometry(1, -2 / HBAR), 2)


def test_linear_solver_diagnostics():
    with pytest.raises(RankDeficient) as info:
        solve_exact([[1, 1, 2], [2, 2, 4]], 2)
    assert info.value.free == 1
    with pytest.raises(InconsistentSystem):
        solve_exact([[1, 1, 2], [1, 1, 3]], 2)
    assert solve_exact([[HBAR, 0, HBAR], [0, 1 - HBAR, 1]], 2) == [ONE, ONE / (1 - HBAR)]


def test_invalid_lookup_is_zero():
    t = cpn_closed_table(2, 2)
    assert t.get(2, (3, -1), (1, 1)) == ZERO
    assert t.get(2, (1, 1), (0, 1)) == ZERO
    assert t.get(5, (5, 0), (5, 0)) == ZERO


def test_table_json_round_trip_and_order():
    t = solve_general(cpn_geometry(2), 3)
    back = CoefficientTable.from_json(json.loads(t.dumps()))
    assert back == t
    assert back.geometry.same_data(t.geometry)
    keys = [(e["n"], e["alpha"], e["beta"]) for e in t.to_json()["entries"]]
    assert keys == sorted(keys)


def test_methods_give_identical_json():
    geom = cpn_geometry(2)
    outs = {m: compute_table(geom, 4, m).dumps() for m in ("general", "closed", "recurrence")}
    assert outs["general"] == outs["closed"] == outs["recurrence"]


def test_csv_series():
    t = cpn_closed_table(1, 3)
    rows = list(csv.reader(io.StringIO(t.series_csv(4))))
    assert rows[0] == ["n", "alpha", "beta", "h^0", "h^1", "h^2", "h^3", "h^4"]
    by_n = {int(r[0]): r[3:] for r in rows[1:]}
    assert [Fraction(x) for x in by_n[2]] == expand_series(CP1_T2, 4)
    assert [Fraction(x) for x in by_n[3]] == [0, 0, 0, Fraction(1, 6), Fraction(1, 2)]
