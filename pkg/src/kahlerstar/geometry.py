"""Pointwise Kähler data for locally symmetric manifolds, plus the CP^N chart metric.

Index conventions (all arrays 0-based):

* ``metric[i][j]``            = g_{i jbar}
* ``inverse_metric[a][b]``    = g^{abar b}, the matrix inverse of ``metric``
* ``curvature[p][k][l][i]``   = R_{pbar}^{kbar lbar}_{ibar}, the raised form consumed
  by the coefficient recurrences
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Any, Sequence

from .algebra import ONE, ZERO, HRational, from_json as hr_from_json, to_json as hr_to_json
from .chart import ChartFunction
from .linsolve import SingularMatrix, identity, inverse, mat_mul


class GeometryError(ValueError):
    pass


class SingularMetric(GeometryError):
    pass


class AsymmetricCurvature(GeometryError):
    pass


@dataclass(frozen=True, eq=False)
class GeometryPoint:
    N: int
    metric: tuple
    inverse_metric: tuple
    curvature: tuple
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        N = self.N
        if N < 1:
            raise GeometryError("dimension must be positive")
        if len(self.metric) != N or any(len(r) != N for r in self.metric):
            raise GeometryError("metric must be N x N")
        if len(self.curvature) != N or any(
            len(a) != N or any(len(b) != N or any(len(c) != N for c in b) for b in a) for a in self.curvature
        ):
            raise GeometryError("curvature must be N x N x N x N")
        if mat_mul(self.metric, self.inverse_metric) != identity(N):
            raise SingularMetric("inverse metric does not invert the metric")
        for p, k, l, i in product(range(N), repeat=4):
            if self.curvature[p][k][l][i] != self.curvature[p][l][k][i]:
                raise AsymmetricCurvature(
                    f"curvature not symmetric in its raised indices at (p,k,l,i)=({p + 1},{k + 1},{l + 1},{i + 1})"
                )

    def g(self, i: int, j: int) -> HRational:
        """g_{i jbar}, 0-based."""
        return self.metric[i][j]

    def R(self, p: int, k: int, l: int, i: int) -> HRational:
        """R_{pbar}^{kbar lbar}_{ibar}, 0-based."""
        return self.curvature[p][k][l][i]

    def same_data(self, other: "GeometryPoint") -> bool:
        return (
            self.N == other.N
            and self.metric == other.metric
            and self.inverse_metric == other.inverse_metric
            and self.curvature == other.curvature
        )

    def describe(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "N": self.N}

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "metric": [[hr_to_json(x) for x in row] for row in self.metric],
            "curvature": [[[[hr_to_json(x) for x in c] for c in b] for b in a] for a in self.curvature],
        }


def _freeze(m):
    if isinstance(m, (list, tuple)):
        return tuple(_freeze(x) for x in m)
    return HRational.coerce(m)


def _build(metric, curvature, kind: str, params: dict) -> GeometryPoint:
    metric = _freeze(metric)
    try:
        inv = _freeze(inverse(metric))
    except SingularMatrix as exc:
        raise SingularMetric(str(exc)) from exc
    return GeometryPoint(len(metric), metric, inv, _freeze(curvature), kind, params)


def _delta(a, b) -> int:
    return 1 if a == b else 0


def grassmann_geometry(p: int, q: int) -> GeometryPoint:
    """G_{p,q} at the chart origin: identity metric and constant curvature.

    Composite index A = (a, a'), a in 1..p, a' in 1..q, flattened
    lexicographically (for p = q = 2: 11' < 12' < 21' < 22').
    """
    if p < 1 or q < 1:
        raise GeometryError("p and q must be positive")
    N = p * q
    labels = [(a, ap) for a in range(p) for ap in range(q)]
    index = {lab: n for n, lab in enumerate(labels)}
    curv = [[[[ZERO] * N for _ in range(N)] for _ in range(N)] for _ in range(N)]
    for A, C, D, B in product(range(N), repeat=4):
        a, ap = labels[A]
        b, bp = labels[B]
        ab_ = index[(a, bp)]
        ba_ = index[(b, ap)]
        v = -_delta(ab_, C) * _delta(ba_, D) - _delta(ba_, C) * _delta(ab_, D)
        if v:
            curv[A][C][D][B] = HRational.coerce(v)
    return _build(identity(N), curv, "grassmann", {"p": p, "q": q})


def cpn_geometry(N: int) -> GeometryPoint:
    """CP^N at the origin: g = 1 and R_{pbar}^{kbar lbar}_{ibar} = -d_pk d_il - d_ik d_pl."""
    if N < 1:
        raise GeometryError("N must be positive")
    curv = [[[[ZERO] * N for _ in range(N)] for _ in range(N)] for _ in range(N)]
    for p, k, l, i in product(range(N), repeat=4):
        v = -_delta(p, k) * _delta(i, l) - _delta(i, k) * _delta(p, l)
        if v:
            curv[p][k][l][i] = HRational.coerce(v)
    return _build(identity(N), curv, "cpn", {"N": N})


def one_dim_geometry(g11, R) -> GeometryPoint:
    g11 = HRational.coerce(g11)
    R = HRational.coerce(R)
    if g11.is_zero():
        raise SingularMetric("metric component g_{1 1bar} must be nonzero")
    return _build([[g11]], [[[[R]]]], "one_dim", {"g": str(g11), "R": str(R)})


def custom_geometry(metric: Sequence[Sequence], curvature=None, *, lower_curvature=None, params: dict | None = None) -> GeometryPoint:
    """Validated geometry from user data.

    Supply either the raised ``curvature[p][k][l][i]`` or the all-lower
    ``lower_curvature[a][p][q][b]`` = R_{abar p q bbar}; the latter is raised
    with two inverse metrics, R_{abar}^{cbar dbar}_{bbar} = g^{cbar p} g^{dbar q} R_{abar p q bbar}.
    """
    if (curvature is None) == (lower_curvature is None):
        raise GeometryError("give exactly one of curvature / lower_curvature")
    metric = _freeze(metric)
    N = len(metric)
    if curvature is None:
        try:
            inv = inverse(metric)
        except SingularMatrix as exc:
            raise SingularMetric(str(exc)) from exc
        low = _freeze(lower_curvature)
        curvature = [[[[ZERO] * N for _ in range(N)] for _ in range(N)] for _ in range(N)]
        for a, c, d, b in product(range(N), repeat=4):
            acc = ZERO
            for pp, qq in product(range(N), repeat=2):
                x = low[a][pp][qq][b]
                if x:
                    acc = acc + inv[c][pp] * inv[d][qq] * x
            curvature[a][c][d][b] = acc
    return _build(metric, curvature, "custom", dict(params or {}))


def geometry_from_json(obj: dict) -> GeometryPoint:
    kind = obj.get("kind", "custom")
    params = obj.get("params", {})
    metric = [[hr_from_json(x) for x in row] for row in obj["metric"]]
    if "curvature" in obj:
        curv = [[[[hr_from_json(x) for x in c] for c in b] for b in a] for a in obj["curvature"]]
        geom = custom_geometry(metric, curv, params=params)
    elif "lower_curvature" in obj:
        low = [[[[hr_from_json(x) for x in c] for c in b] for b in a] for a in obj["lower_curvature"]]
        geom = custom_geometry(metric, lower_curvature=low, params=params)
    else:
        raise GeometryError("geometry JSON needs 'curvature' or 'lower_curvature'")
    return GeometryPoint(geom.N, geom.metric, geom.inverse_metric, geom.curvature, kind, params)


def parse_manifold(name: str) -> GeometryPoint:
    """``cpn:N``, ``grassmann:p,q``, ``g22``, ``onedim:g,R`` (rationals allowed)."""
    kind, _, arg = name.partition(":")
    try:
        if kind == "cpn":
            return cpn_geometry(int(arg))
        if kind == "grassmann":
            p, q = (int(x) for x in arg.split(","))
            return grassmann_geometry(p, q)
        if kind == "g22":
            return grassmann_geometry(2, 2)
        if kind == "onedim":
            g, R = arg.split(",")
            from fractions import Fraction

            return one_dim_geometry(Fraction(g), Fraction(R))
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, GeometryError):
            raise
        raise GeometryError(f"bad manifold parameters in {name!r}: {exc}") from exc
    raise GeometryError(f"unknown manifold {name!r}")


# -- CP^N chart ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChartMetric:
    """Fubini-Study metric fields on the standard CP^N chart.

    ``metric_field[i][j]`` = g_{i jbar} = (d_ij s - zbar^i z^j) / s^2 and
    ``inverse_metric_field[a][b]`` = g^{abar b} = s (d_ab + zbar^a z^b).
    """

    N: int
    metric_field: tuple
    inverse_metric_field: tuple

    def check_identity(self) -> bool:
        N = self.N
        for i in range(N):
            for j in range(N):
                acc = ChartFunction.zero(N)
                for b in range(N):
                    acc = acc + self.metric_field[i][b] * self.inverse_metric_field[b][j]
                if acc != (1 if i == j else 0):
                    return False
        return True


_CHART_CACHE: dict[int, ChartMetric] = {}


def cpn_chart_metric(N: int) -> ChartMetric:
    if N < 1:
        raise GeometryError("N must be positive")
    if N in _CHART_CACHE:
        return _CHART_CACHE[N]
    s = ChartFunction.s(N)
    z = [ChartFunction.z(N, k) for k in range(1, N + 1)]
    zb = [ChartFunction.zbar(N, k) for k in range(1, N + 1)]
    metric = tuple(
        tuple(((s if i == j else 0) - zb[i] * z[j]).s_inverse_power(2) for j in range(N)) for i in range(N)
    )
    inv = tuple(tuple(s * ((1 if a == b else 0) + zb[a] * z[b]) for b in range(N)) for a in range(N))
    chart = ChartMetric(N, metric, inv)
    if not chart.check_identity():
        raise GeometryError("chart metric failed the inverse identity")
    _CHART_CACHE[N] = chart
    return chart
