"""Factorable surfaces and their specialized curvature formulas.

Two kinds exist here: first kind z(x, y) = f(x)*g(y) and second kind
x(y, z) = f(y)*g(z).  The closed curvature formulas are

    first:   K = (f*g*f''*g'' - (f'*g')^2) / (1 - (f*g')^2)^2
             H = f*g'' / (2*|1 - (f*g')^2|^(3/2))
    second:  K = (f*g*f''*g'' - (f'*g')^2) / ((f*g')^2 - (f'*g)^2)^2
             H = ((f*g')^2*f''*g - 2*f*g*(f'*g')^2 + (f'*g)^2*f*g'')
                 / (2*|(f*g')^2 - (f'*g)^2|^(3/2))

The general pipeline of `surface` computes K with an extra factor -eps
relative to these and H with factor +1; `cross_check` pins those factors
empirically per causal character (see README, "Sign conventions").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import surface as _surface
from .core import Character
from .errors import DomainError, GridRejected, InvalidParams, LightlikeLocus
from .surface import FD_STEP, Jet2, SurfaceFn, curvature_arrays

__all__ = [
    "ScalarC2",
    "FactorableSurface",
    "GridSpec",
    "CurvatureReport",
    "CrossCheckReport",
    "k_first",
    "h_first",
    "k_second",
    "h_second",
    "specialized_K",
    "specialized_H",
    "jet_component_arrays",
    "pipeline_grid",
    "specialized_grid",
    "curvature_report",
    "cross_check",
    "KIND_FIRST",
    "KIND_SECOND",
]

KIND_FIRST = "first"
KIND_SECOND = "second"

# Denominator deadband for the specialized formulas (scale-aware).
_DENOM_TOL = 1e-12
# Numerator deadband for the documented flat-limit convention (second kind).
_FLAT_TOL = 1e-12

_INF = float("inf")


@dataclass(frozen=True)
class ScalarC2:
    """Twice-differentiable scalar function with analytic derivatives.

    Evaluators must accept numpy arrays.  `domain` is the open interval on
    which the evaluators are valid; infinite ends are allowed.
    """

    fn: Callable
    d1: Callable
    d2: Callable
    domain: tuple[float, float] = (-_INF, _INF)
    name: str = ""

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))

    def deriv(self, t):
        return self.d1(np.asarray(t, dtype=float))

    def deriv2(self, t):
        return self.d2(np.asarray(t, dtype=float))

    def derivative_gap(self, t: float, h: float = 1e-6) -> float:
        """|d1 - central difference of fn| at t; O(h^2) for consistent pairs."""
        fd = (self(t + h) - self(t - h)) / (2.0 * h)
        return float(abs(self.deriv(t) - fd))

    @staticmethod
    def constant(c: float, name: str = "") -> "ScalarC2":
        return ScalarC2(
            fn=lambda t: c + 0.0 * t,
            d1=lambda t: 0.0 * t,
            d2=lambda t: 0.0 * t,
            name=name or f"const({c})",
        )

    @staticmethod
    def linear(a: float, b: float = 0.0, name: str = "") -> "ScalarC2":
        """t -> a*t + b."""
        return ScalarC2(
            fn=lambda t: a * t + b,
            d1=lambda t: a + 0.0 * t,
            d2=lambda t: 0.0 * t,
            name=name or f"linear({a},{b})",
        )


@dataclass(frozen=True)
class FactorableSurface:
    """Pair (f, g) with a kind tag selecting the graph direction.

    First kind is parametrized by (x, y), second kind by (y, z); both
    parametrizations keep the two graph coordinates as parameters, so the
    jets below are exact once f and g carry analytic derivatives.
    """

    kind: str
    f: ScalarC2
    g: ScalarC2

    def __post_init__(self):
        if self.kind not in (KIND_FIRST, KIND_SECOND):
            raise InvalidParams(f"kind must be 'first' or 'second', got {self.kind!r}")

    @property
    def domain(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return self.f.domain, self.g.domain

    def value_arrays(self, u1, u2):
        """Position components (x, y, z) for array parameters."""
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        prod = self.f(u1) * self.g(u2)
        if self.kind == KIND_FIRST:
            return u1 + 0.0 * prod, u2 + 0.0 * prod, prod
        return prod, u1 + 0.0 * prod, u2 + 0.0 * prod

    def position(self, u1: float, u2: float) -> np.ndarray:
        x, y, z = self.value_arrays(u1, u2)
        return np.array([float(x), float(y), float(z)])

    def jet(self, u1: float, u2: float) -> Jet2:
        fv, f1, f2 = (float(self.f(u1)), float(self.f.deriv(u1)), float(self.f.deriv2(u1)))
        gv, g1, g2 = (float(self.g(u2)), float(self.g.deriv(u2)), float(self.g.deriv2(u2)))
        if self.kind == KIND_FIRST:
            return Jet2(
                r=[u1, u2, fv * gv],
                r1=[1.0, 0.0, f1 * gv],
                r2=[0.0, 1.0, fv * g1],
                r11=[0.0, 0.0, f2 * gv],
                r12=[0.0, 0.0, f1 * g1],
                r22=[0.0, 0.0, fv * g2],
            )
        return Jet2(
            r=[fv * gv, u1, u2],
            r1=[f1 * gv, 1.0, 0.0],
            r2=[fv * g1, 0.0, 1.0],
            r11=[f2 * gv, 0.0, 0.0],
            r12=[f1 * g1, 0.0, 0.0],
            r22=[fv * g2, 0.0, 0.0],
        )

    def surface_fn(self, mode: str = "analytic", fd_step: float = FD_STEP) -> SurfaceFn:
        return SurfaceFn(value=self.position, jet_fn=self.jet, mode=mode, fd_step=fd_step)


# ---------------------------------------------------------------------------
# Specialized formulas
# ---------------------------------------------------------------------------

def _parts(s: FactorableSurface, u1, u2):
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    return (s.f(u1), s.f.deriv(u1), s.f.deriv2(u1),
            s.g(u2), s.g.deriv(u2), s.g.deriv2(u2))


def _first_raw(fv, f1, f2, gv, g1, g2):
    num = fv * gv * f2 * g2 - (f1 * g1) ** 2
    q = (fv * g1) ** 2
    den = 1.0 - q
    scale = np.maximum(1.0, q)
    rhs_h = fv * g2
    return num, den, scale, rhs_h


def _second_raw(fv, f1, f2, gv, g1, g2):
    num = fv * gv * f2 * g2 - (f1 * g1) ** 2
    qa = (fv * g1) ** 2
    qb = (f1 * gv) ** 2
    den = qa - qb
    scale = np.maximum(1.0, np.maximum(qa, qb))
    rhs_h = qa * f2 * gv - 2.0 * fv * gv * (f1 * g1) ** 2 + qb * fv * g2
    return num, den, scale, rhs_h


def _raw(s: FactorableSurface, u1, u2):
    parts = _parts(s, u1, u2)
    return _first_raw(*parts) if s.kind == KIND_FIRST else _second_raw(*parts)


def _require_regular(s: FactorableSurface, den: float, scale: float, where: str):
    if abs(den) <= _DENOM_TOL * scale:
        raise LightlikeLocus(f"{s.kind}-kind denominator vanishes at {where}")


def k_first(s: FactorableSurface, x: float, y: float) -> float:
    """Gaussian curvature of z = f(x)*g(y) from the closed formula."""
    if s.kind != KIND_FIRST:
        raise InvalidParams("k_first requires a first-kind surface")
    num, den, scale, _ = _raw(s, x, y)
    _require_regular(s, float(den), float(scale), f"(x={x}, y={y})")
    return float(num / den ** 2)


def h_first(s: FactorableSurface, x: float, y: float) -> float:
    """Mean curvature of z = f(x)*g(y) from the closed formula."""
    if s.kind != KIND_FIRST:
        raise InvalidParams("h_first requires a first-kind surface")
    _, den, scale, rhs = _raw(s, x, y)
    _require_regular(s, float(den), float(scale), f"(x={x}, y={y})")
    return float(rhs / (2.0 * abs(den) ** 1.5))


def _flat_limit_ok(value: float, den: float, scale: float, value_scale: float) -> bool:
    return abs(den) <= _DENOM_TOL * scale and abs(value) <= _FLAT_TOL * value_scale


def k_second(s: FactorableSurface, y: float, z: float) -> float:
    """Gaussian curvature of x = f(y)*g(z) from the closed formula.

    At loci where numerator and denominator vanish together (the
    exponential-times-exponential surfaces of equal rate) the flat limit 0
    is returned; a vanishing denominator alone raises LightlikeLocus.
    """
    if s.kind != KIND_SECOND:
        raise InvalidParams("k_second requires a second-kind surface")
    fv, f1, f2, gv, g1, g2 = _parts(s, y, z)
    num, den, scale, _ = _second_raw(fv, f1, f2, gv, g1, g2)
    num, den, scale = float(num), float(den), float(scale)
    num_scale = max(1.0, abs(float(fv * gv * f2 * g2)) + float((f1 * g1) ** 2))
    if _flat_limit_ok(num, den, scale, num_scale):
        return 0.0
    _require_regular(s, den, scale, f"(y={y}, z={z})")
    return num / den ** 2


def h_second(s: FactorableSurface, y: float, z: float) -> float:
    """Mean curvature of x = f(y)*g(z); |den|^(3/2) covers timelike patches.

    Shares the flat-limit convention of `k_second`.
    """
    if s.kind != KIND_SECOND:
        raise InvalidParams("h_second requires a second-kind surface")
    fv, f1, f2, gv, g1, g2 = _parts(s, y, z)
    _, den, scale, rhs = _second_raw(fv, f1, f2, gv, g1, g2)
    den, scale, rhs = float(den), float(scale), float(rhs)
    rhs_scale = max(1.0, float((fv * g1) ** 2 * abs(f2 * gv))
                    + 2.0 * abs(float(fv * gv)) * float((f1 * g1) ** 2)
                    + float((f1 * gv) ** 2) * abs(float(fv * g2)))
    if _flat_limit_ok(rhs, den, scale, rhs_scale):
        return 0.0
    _require_regular(s, den, scale, f"(y={y}, z={z})")
    return rhs / (2.0 * abs(den) ** 1.5)


def specialized_K(s: FactorableSurface, u1: float, u2: float) -> float:
    return k_first(s, u1, u2) if s.kind == KIND_FIRST else k_second(s, u1, u2)


def specialized_H(s: FactorableSurface, u1: float, u2: float) -> float:
    return h_first(s, u1, u2) if s.kind == KIND_FIRST else h_second(s, u1, u2)


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Rectangular parameter grid: ranges plus per-axis resolution."""

    u1: tuple[float, float]
    u2: tuple[float, float]
    n1: int = 20
    n2: int = 20

    def __post_init__(self):
        for lo, hi in (self.u1, self.u2):
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
                raise InvalidParams(f"grid range must be finite and increasing, got ({lo}, {hi})")
        if self.n1 < 2 or self.n2 < 2:
            raise InvalidParams("grid resolution must be >= 2 per axis")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linspace(self.u1[0], self.u1[1], self.n1),
                np.linspace(self.u2[0], self.u2[1], self.n2))

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        a1, a2 = self.axes()
        return np.meshgrid(a1, a2, indexing="ij")


def _clip_axis(dom: tuple[float, float], span: float, margin: float) -> tuple[float, float]:
    lo, hi = dom
    if math.isinf(lo) and math.isinf(hi):
        return (-span / 2.0, span / 2.0)
    if math.isinf(hi):
        lo = lo + margin * span
        return (lo, lo + span)
    if math.isinf(lo):
        hi = hi - margin * span
        return (hi - span, hi)
    pad = margin * (hi - lo)
    return (lo + pad, hi - pad)


def default_grid(s: FactorableSurface, n1: int = 20, n2: int = 20,
                 span: float = 3.0, margin: float = 0.05) -> GridSpec:
    """Finite grid inside the surface domain, keeping a margin from the
    domain ends (radicand zeros sit exactly on those ends for the built-in
    families)."""
    (d1, d2) = s.domain
    return GridSpec(_clip_axis(d1, span, margin), _clip_axis(d2, span, margin), n1, n2)


def jet_component_arrays(s: FactorableSurface, U1, U2,
                         mode: str = "analytic", fd_step: float = FD_STEP) -> dict:
    """Component arrays x1..z22 over parameter arrays, analytic or FD."""
    U1 = np.asarray(U1, dtype=float)
    U2 = np.asarray(U2, dtype=float)
    if mode == "analytic":
        fv, f1, f2, gv, g1, g2 = _parts(s, U1, U2)
        zero = np.zeros(np.broadcast(U1, U2).shape)
        one = zero + 1.0
        if s.kind == KIND_FIRST:
            return {
                "x1": one, "y1": zero, "z1": f1 * gv + zero,
                "x2": zero, "y2": one, "z2": fv * g1 + zero,
                "x11": zero, "y11": zero, "z11": f2 * gv + zero,
                "x12": zero, "y12": zero, "z12": f1 * g1 + zero,
                "x22": zero, "y22": zero, "z22": fv * g2 + zero,
            }
        return {
            "x1": f1 * gv + zero, "y1": one, "z1": zero,
            "x2": fv * g1 + zero, "y2": zero, "z2": one,
            "x11": f2 * gv + zero, "y11": zero, "z11": zero,
            "x12": f1 * g1 + zero, "y12": zero, "z12": zero,
            "x22": fv * g2 + zero, "y22": zero, "z22": zero,
        }
    if mode != "fd":
        raise InvalidParams(f"mode must be 'analytic' or 'fd', got {mode!r}")

    h1 = fd_step * np.maximum(1.0, np.abs(U1))
    h2 = fd_step * np.maximum(1.0, np.abs(U2))

    def val(a, b):
        return s.value_arrays(a, b)

    c = val(U1, U2)
    p0 = val(U1 + h1, U2)
    m0 = val(U1 - h1, U2)
    zp = val(U1, U2 + h2)
    zm = val(U1, U2 - h2)
    pp = val(U1 + h1, U2 + h2)
    pm = val(U1 + h1, U2 - h2)
    mp = val(U1 - h1, U2 + h2)
    mm = val(U1 - h1, U2 - h2)

    out = {}
    for i, axis in enumerate("xyz"):
        out[f"{axis}1"] = (p0[i] - m0[i]) / (2.0 * h1)
        out[f"{axis}2"] = (zp[i] - zm[i]) / (2.0 * h2)
        out[f"{axis}11"] = (p0[i] - 2.0 * c[i] + m0[i]) / h1 ** 2
        out[f"{axis}22"] = (zp[i] - 2.0 * c[i] + zm[i]) / h2 ** 2
        out[f"{axis}12"] = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h1 * h2)
    return out


def pipeline_grid(s: FactorableSurface, grid: GridSpec,
                  mode: str = "analytic", fd_step: float = FD_STEP) -> dict:
    """General-pipeline sweep: positions, K, H, eps, W and exclusion mask."""
    U1, U2 = grid.mesh()
    comp = jet_component_arrays(s, U1, U2, mode=mode, fd_step=fd_step)
    out = curvature_arrays(comp)
    x, y, z = s.value_arrays(U1, U2)
    excluded = out["lightlike"] | out["inadmissible"] | ~np.isfinite(out["K"]) | ~np.isfinite(out["H"])
    return {
        "U1": U1, "U2": U2, "x": x, "y": y, "z": z,
        "K": out["K"], "H": out["H"], "eps": out["eps"], "W": out["W"],
        "excluded": excluded,
    }


def specialized_grid(s: FactorableSurface, grid: GridSpec) -> dict:
    """Closed-formula sweep with the same mask/flat-limit semantics as the
    pointwise ops."""
    U1, U2 = grid.mesh()
    fv, f1, f2, gv, g1, g2 = _parts(s, U1, U2)
    if s.kind == KIND_FIRST:
        num, den, scale, rhs = _first_raw(fv, f1, f2, gv, g1, g2)
        flat = np.zeros_like(den, dtype=bool)
    else:
        num, den, scale, rhs = _second_raw(fv, f1, f2, gv, g1, g2)
        num_scale = np.maximum(1.0, np.abs(fv * gv * f2 * g2) + (f1 * g1) ** 2)
        flat = (np.abs(den) <= _DENOM_TOL * scale) & (np.abs(num) <= _FLAT_TOL * num_scale)
    lightlike = (np.abs(den) <= _DENOM_TOL * scale) & ~flat
    densafe = np.where(np.abs(den) <= _DENOM_TOL * scale, 1.0, den)
    K = np.where(flat, 0.0, num / densafe ** 2)
    H = np.where(flat, 0.0, rhs / (2.0 * np.abs(densafe) ** 1.5))
    K = np.where(lightlike, np.nan, K)
    H = np.where(lightlike, np.nan, H)
    x, y, z = s.value_arrays(U1, U2)
    return {"U1": U1, "U2": U2, "x": x, "y": y, "z": z, "K": K, "H": H,
            "den": den, "excluded": lightlike}


@dataclass(frozen=True)
class CurvatureReport:
    """Grid of (K, H, eps, W) samples with constancy statistics."""

    U1: np.ndarray
    U2: np.ndarray
    K: np.ndarray
    H: np.ndarray
    eps: np.ndarray
    W: np.ndarray
    excluded: np.ndarray
    route: str

    @property
    def n_points(self) -> int:
        return int(self.K.size)

    @property
    def n_excluded(self) -> int:
        return int(np.count_nonzero(self.excluded))

    def stats(self, field: str) -> dict:
        """mean / max |value - mean| / std over the included points.

        field is 'K', 'H', 'absK' or 'absH'.
        """
        base = field[-1]
        values = getattr(self, base)[~self.excluded]
        if field.startswith("abs"):
            values = np.abs(values)
        if values.size == 0:
            return {"mean": float("nan"), "max_deviation": float("nan"), "std": float("nan")}
        mean = float(np.mean(values))
        return {
            "mean": mean,
            "max_deviation": float(np.max(np.abs(values - mean))),
            "std": float(np.std(values)),
        }


def curvature_report(s: FactorableSurface, grid: GridSpec, route: str = "specialized",
                     fd_step: float = FD_STEP) -> CurvatureReport:
    """Sweep a grid and bundle samples plus constancy statistics.

    route: 'specialized' (closed formulas), 'pipeline' (analytic jets) or
    'pipeline-fd' (finite-difference jets).
    """
    if route == "specialized":
        data = specialized_grid(s, grid)
        pipe = pipeline_grid(s, grid, mode="analytic")
        return CurvatureReport(data["U1"], data["U2"], data["K"], data["H"],
                               pipe["eps"], pipe["W"], data["excluded"], route)
    if route in ("pipeline", "pipeline-fd"):
        mode = "analytic" if route == "pipeline" else "fd"
        data = pipeline_grid(s, grid, mode=mode, fd_step=fd_step)
        return CurvatureReport(data["U1"], data["U2"], data["K"], data["H"],
                               data["eps"], data["W"], data["excluded"], route)
    raise InvalidParams(f"unknown route {route!r}")


# ---------------------------------------------------------------------------
# Cross-check between specialized formulas and the general pipeline
# ---------------------------------------------------------------------------

_SIGN_FLOOR = 1e-9


@dataclass(frozen=True)
class CrossCheckReport:
    """Empirical sign factors and residual discrepancy on one grid.

    sigma maps (formula, character) to the constant factor with
    pipeline = sigma * specialized; `consistent` is False when any bucket
    saw both signs.
    """

    surface_kind: str
    n_points: int
    sigma: dict = field(default_factory=dict)
    max_discrepancy: float = 0.0
    per_formula: dict = field(default_factory=dict)
    consistent: bool = True


def cross_check(s: FactorableSurface, grid: GridSpec) -> CrossCheckReport:
    """Compare the closed formulas against the general pipeline on a grid.

    The grid must avoid lightlike loci entirely, otherwise GridRejected is
    raised.  Returns the per-(formula, causal-character) sign factor and
    the maximum |pipeline - sigma*specialized| over the grid.
    """
    pipe = pipeline_grid(s, grid, mode="analytic")
    closed = specialized_grid(s, grid)
    if np.any(pipe["excluded"]) or np.any(closed["excluded"]):
        raise GridRejected("grid crosses a lightlike or inadmissible locus")

    kind_tag = "first" if s.kind == KIND_FIRST else "second"
    chars = np.where(pipe["eps"] > 0, Character.SPACELIKE.value, Character.TIMELIKE.value)

    sigma: dict = {}
    signs_seen: dict = {}
    for formula, p_arr, s_arr in (
        (f"K-{kind_tag}", pipe["K"], closed["K"]),
        (f"H-{kind_tag}", pipe["H"], closed["H"]),
    ):
        floor = _SIGN_FLOOR * np.maximum(1.0, np.abs(p_arr))
        usable = np.abs(s_arr) > floor
        for char in (Character.SPACELIKE.value, Character.TIMELIKE.value):
            mask = usable & (chars == char)
            key = (formula, char)
            if np.any(mask):
                ratio_signs = np.sign(p_arr[mask] * s_arr[mask])
                signs_seen[key] = set(int(v) for v in np.unique(ratio_signs))
                sigma[key] = int(ratio_signs.flat[0])

    consistent = all(len(v) == 1 for v in signs_seen.values())

    per_formula: dict = {}
    overall = 0.0
    for formula, p_arr, s_arr in (
        (f"K-{kind_tag}", pipe["K"], closed["K"]),
        (f"H-{kind_tag}", pipe["H"], closed["H"]),
    ):
        worst = 0.0
        for char in (Character.SPACELIKE.value, Character.TIMELIKE.value):
            mask = chars == char
            if not np.any(mask):
                continue
            factor = sigma.get((formula, char), 1)
            worst = max(worst, float(np.max(np.abs(p_arr[mask] - factor * s_arr[mask]))))
        per_formula[formula] = worst
        overall = max(overall, worst)

    return CrossCheckReport(
        surface_kind=s.kind,
        n_points=int(pipe["K"].size),
        sigma={f"{f}/{c}": v for (f, c), v in sigma.items()},
        max_discrepancy=overall,
        per_formula=per_formula,
        consistent=consistent,
    )
