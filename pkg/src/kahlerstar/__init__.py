"""Exact star products with separation of variables on locally symmetric Kähler manifolds."""
from .algebra import HBAR, ONE, ZERO, HPolynomial, HRational, expand_series
from .chart import ChartFunction
from .coeffs import (
    CoefficientTable,
    coeff_1d,
    coeff_2d_order2,
    cpn_closed,
    cpn_closed_table,
    cpn_gamma_coeff,
    cpn_recurrence,
    solve_g22,
    solve_general,
    verify_residual,
)
from .geometry import (
    GeometryPoint,
    cpn_chart_metric,
    cpn_geometry,
    custom_geometry,
    grassmann_geometry,
    one_dim_geometry,
)
from .permanent import block_permanent, plus_det, plus_det_expand
from .star import apply_multi, check_associativity, check_poisson, check_unit, d_antiholo, d_holo, star

__all__ = [name for name in dir() if not name.startswith("_")]
