"""Curvature pipeline for admissible surfaces.

Everything downstream of a 2-jet lives here: first fundamental form, the
side tangent norm W, the causal sign epsilon with the normal N, the second
fundamental form, and the Gaussian and mean curvatures

    K = -eps * (L11*L22 - L12^2) / W^2
    H = -eps * (g2^2*L11 - 2*g1*g2*L12 + g1^2*L22) / (2*W^2)

The scalar API raises on lightlike or inadmissible points; the array
kernel (`curvature_arrays`) returns masks instead so grid sweeps can
exclude bad points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import IsoVector, Motion
from .errors import InadmissiblePatch, LightlikeSurface

__all__ = [
    "Jet2",
    "FundamentalData",
    "FirstForm",
    "SurfaceFn",
    "admissible",
    "first_form",
    "side_tangent",
    "side_norm_W",
    "epsilon_and_normal",
    "second_form",
    "fundamental_data",
    "gaussian_curvature",
    "mean_curvature",
    "transform_jet",
    "finite_difference_jet",
    "curvature_arrays",
    "W_TOL",
    "ADMISSIBLE_TOL",
    "FD_STEP",
]

W_TOL = 1e-10          # W below this counts as lightlike; curvature calls fail loudly
ADMISSIBLE_TOL = 1e-12  # |x_,i| threshold for admissibility
FD_STEP = 1e-4          # default finite-difference step scale


@dataclass(frozen=True)
class Jet2:
    """Value and first/second partials of an immersion at one point.

    The single ``r12`` slot serves both mixed partials.
    """

    r: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    r11: np.ndarray
    r12: np.ndarray
    r22: np.ndarray

    def __post_init__(self):
        for name in ("r", "r1", "r2", "r11", "r12", "r22"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3,):
                raise ValueError(f"Jet2.{name} must have shape (3,), got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"Jet2.{name} must be finite, got {arr}")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class FirstForm:
    """Coefficients of ds^2 = (g1 du1 + g2 du2)^2 + omega*(h11 du1^2 + ...)."""

    g1: float
    g2: float
    h11: float
    h12: float
    h22: float
    omega: int

    def ds2(self, du1: float, du2: float) -> float:
        galilean = (self.g1 * du1 + self.g2 * du2) ** 2
        transverse = self.h11 * du1 ** 2 + 2.0 * self.h12 * du1 * du2 + self.h22 * du2 ** 2
        return galilean + self.omega * transverse


@dataclass(frozen=True)
class FundamentalData:
    """Per-point bundle: first/second form coefficients, W, epsilon, N."""

    g1: float
    g2: float
    h11: float
    h12: float
    h22: float
    W: float
    epsilon: int
    N: IsoVector
    L11: float
    L12: float
    L22: float


def _side_products(j: Jet2) -> tuple[float, float]:
    """Components (Y, Z) of the unnormalized side tangent (0, Y, Z)."""
    Y = j.r1[0] * j.r2[1] - j.r2[0] * j.r1[1]
    Z = j.r1[0] * j.r2[2] - j.r2[0] * j.r1[2]
    return float(Y), float(Z)


def admissible(j: Jet2, tol: float = ADMISSIBLE_TOL) -> bool:
    """True iff some x-partial is nonzero (no pseudo-Euclidean tangent plane)."""
    return max(abs(j.r1[0]), abs(j.r2[0])) > tol


def first_form(j: Jet2, direction: str) -> FirstForm:
    """First fundamental form coefficients; omega = 1 only for isotropic
    directions (the caller decides, it is not inferred from the jet)."""
    if direction not in ("isotropic", "non-isotropic"):
        raise ValueError(f"direction must be 'isotropic' or 'non-isotropic', got {direction!r}")
    omega = 1 if direction == "isotropic" else 0
    _, y1, z1 = j.r1
    _, y2, z2 = j.r2
    return FirstForm(
        g1=float(j.r1[0]),
        g2=float(j.r2[0]),
        h11=float(y1 * y1 + z1 * z1),
        h12=float(y1 * y2 + z1 * z2),
        h22=float(y2 * y2 + z2 * z2),
        omega=omega,
    )


def side_norm_W(j: Jet2, tol: float = W_TOL) -> float:
    """Pseudo-Galilean norm of the side tangent; raises on lightlike patches."""
    Y, Z = _side_products(j)
    W = math.sqrt(abs(Y * Y - Z * Z))
    if W < tol:
        raise LightlikeSurface(f"W = {W:.3e} below tolerance {tol:.1e}; curvature undefined")
    return W


def side_tangent(j: Jet2) -> IsoVector:
    """Normalized side tangent S = (0, Y, Z)/W with S.S = epsilon."""
    Y, Z = _side_products(j)
    W = side_norm_W(j)
    return IsoVector(Y / W, Z / W)


def epsilon_and_normal(j: Jet2) -> tuple[int, IsoVector]:
    """Causal sign epsilon = sign(S.S) and the normal N = (0, Z, Y)/W.

    N satisfies N.N = -epsilon under the (+, -) signature.
    """
    Y, Z = _side_products(j)
    W = side_norm_W(j)
    epsilon = 1 if Y * Y - Z * Z > 0.0 else -1
    return epsilon, IsoVector(Z / W, Y / W)


def _second_form_branch(j: Jet2, epsilon: int, N: IsoVector, branch: int) -> tuple[float, float, float]:
    """Second-form coefficients using the g1 (branch=1) or g2 (branch=2) formula.

    Exposed for branch-agreement diagnostics; `second_form` picks the branch.
    """
    if branch == 1:
        gs, ys, zs = j.r1[0], j.r1[1], j.r1[2]
    elif branch == 2:
        gs, ys, zs = j.r2[0], j.r2[1], j.r2[2]
    else:
        raise ValueError("branch must be 1 or 2")
    if abs(gs) <= ADMISSIBLE_TOL:
        raise InadmissiblePatch(f"branch {branch} denominator g{branch} = {gs:.3e} is zero")

    def coeff(rij: np.ndarray) -> float:
        t = rij[0] / gs  # g_{i,j}/g_branch
        vy = rij[1] - t * ys
        vz = rij[2] - t * zs
        return epsilon * (vy * N.y - vz * N.z)

    return coeff(j.r11), coeff(j.r12), coeff(j.r22)


def second_form(j: Jet2, epsilon: int, N: IsoVector) -> tuple[float, float, float]:
    """(L11, L12, L22); uses the branch with the larger |x-partial|."""
    g1, g2 = j.r1[0], j.r2[0]
    if max(abs(g1), abs(g2)) <= ADMISSIBLE_TOL:
        raise InadmissiblePatch("both x-partials vanish; patch is pseudo-Euclidean")
    return _second_form_branch(j, epsilon, N, 1 if abs(g1) >= abs(g2) else 2)


def fundamental_data(j: Jet2) -> FundamentalData:
    ff = first_form(j, "non-isotropic")
    W = side_norm_W(j)
    epsilon, N = epsilon_and_normal(j)
    L11, L12, L22 = second_form(j, epsilon, N)
    return FundamentalData(
        g1=ff.g1, g2=ff.g2, h11=ff.h11, h12=ff.h12, h22=ff.h22,
        W=W, epsilon=epsilon, N=N, L11=L11, L12=L12, L22=L22,
    )


def gaussian_curvature(j: Jet2) -> float:
    d = fundamental_data(j)
    return -d.epsilon * (d.L11 * d.L22 - d.L12 ** 2) / d.W ** 2


def mean_curvature(j: Jet2) -> float:
    d = fundamental_data(j)
    num = d.g2 ** 2 * d.L11 - 2.0 * d.g1 * d.g2 * d.L12 + d.g1 ** 2 * d.L22
    return -d.epsilon * num / (2.0 * d.W ** 2)


def transform_jet(m: Motion, j: Jet2) -> Jet2:
    """Jet of the composed immersion (motion after surface) at the same
    parameter point: translation on the value, linear part on derivatives."""
    ch, sh = math.cosh(m.theta), math.sinh(m.theta)

    def lin(v: np.ndarray) -> np.ndarray:
        return np.array([
            v[0],
            m.a3 * v[0] + ch * v[1] + sh * v[2],
            m.a5 * v[0] + sh * v[1] + ch * v[2],
        ])

    moved = lin(j.r) + np.array([m.a1, m.a2, m.a4])
    return Jet2(moved, lin(j.r1), lin(j.r2), lin(j.r11), lin(j.r12), lin(j.r22))


def finite_difference_jet(value: Callable[[float, float], np.ndarray],
                          u1: float, u2: float,
                          step: float = FD_STEP) -> Jet2:
    """Jet from central differences of a value function.

    Steps scale with the coordinate: h_i = step * max(1, |u_i|).  Second
    partials use the compact three-point / four-point cross stencils.
    """
    h1 = step * max(1.0, abs(u1))
    h2 = step * max(1.0, abs(u2))
    f = lambda a, b: np.asarray(value(a, b), dtype=float)
    c = f(u1, u2)
    pp = f(u1 + h1, u2 + h2)
    pm = f(u1 + h1, u2 - h2)
    mp = f(u1 - h1, u2 + h2)
    mm = f(u1 - h1, u2 - h2)
    p0 = f(u1 + h1, u2)
    m0 = f(u1 - h1, u2)
    zp = f(u1, u2 + h2)
    zm = f(u1, u2 - h2)
    return Jet2(
        r=c,
        r1=(p0 - m0) / (2.0 * h1),
        r2=(zp - zm) / (2.0 * h2),
        r11=(p0 - 2.0 * c + m0) / h1 ** 2,
        r22=(zp - 2.0 * c + zm) / h2 ** 2,
        r12=(pp - pm - mp + mm) / (4.0 * h1 * h2),
    )


@dataclass(frozen=True)
class SurfaceFn:
    """Evaluator bundling a value function with a way to obtain jets.

    mode 'analytic' requires `jet_fn`; mode 'fd' differentiates `value`
    by central differences with the given step scale.  Evaluators must be
    pure: the pipeline is stateless and safe for concurrent sweeps.
    """

    value: Callable[[float, float], np.ndarray]
    jet_fn: Optional[Callable[[float, float], Jet2]] = None
    mode: str = "analytic"
    fd_step: float = FD_STEP

    def __post_init__(self):
        if self.mode not in ("analytic", "fd"):
            raise ValueError(f"mode must be 'analytic' or 'fd', got {self.mode!r}")
        if self.mode == "analytic" and self.jet_fn is None:
            raise ValueError("analytic mode requires jet_fn")

    def jet(self, u1: float, u2: float) -> Jet2:
        if self.mode == "analytic":
            return self.jet_fn(u1, u2)
        return finite_difference_jet(self.value, u1, u2, self.fd_step)


# ---------------------------------------------------------------------------
# Vectorized kernel
# ---------------------------------------------------------------------------

_COMPONENT_KEYS = (
    "x1", "y1", "z1", "x2", "y2", "z2",
    "x11", "y11", "z11", "x12", "y12", "z12", "x22", "y22", "z22",
)


def curvature_arrays(comp: dict) -> dict:
    """Vectorized pipeline over arrays of jet components.

    `comp` maps the keys x1..z22 to broadcast-compatible arrays.  Returns
    g1, g2, W, eps, ny, nz, L11, L12, L22, K, H plus boolean masks
    `lightlike` and `inadmissible`; K and H are NaN at masked points.
    """
    c = {k: np.asarray(comp[k], dtype=float) for k in _COMPONENT_KEYS}
    x1, y1, z1 = c["x1"], c["y1"], c["z1"]
    x2, y2, z2 = c["x2"], c["y2"], c["z2"]

    Y = x1 * y2 - x2 * y1
    Z = x1 * z2 - x2 * z1
    q = Y * Y - Z * Z
    W = np.sqrt(np.abs(q))
    lightlike = W < W_TOL
    inadmissible = np.maximum(np.abs(x1), np.abs(x2)) <= ADMISSIBLE_TOL
    bad = lightlike | inadmissible

    eps = np.where(q > 0.0, 1.0, -1.0)
    Wsafe = np.where(bad, 1.0, W)
    ny = Z / Wsafe
    nz = Y / Wsafe

    use1 = np.abs(x1) >= np.abs(x2)
    gs = np.where(use1, x1, x2)
    ys = np.where(use1, y1, y2)
    zs = np.where(use1, z1, z2)
    gsafe = np.where(np.abs(gs) <= ADMISSIBLE_TOL, 1.0, gs)

    def coeff(xij, yij, zij):
        t = xij / gsafe
        return eps * ((yij - t * ys) * ny - (zij - t * zs) * nz)

    L11 = coeff(c["x11"], c["y11"], c["z11"])
    L12 = coeff(c["x12"], c["y12"], c["z12"])
    L22 = coeff(c["x22"], c["y22"], c["z22"])

    W2 = Wsafe * Wsafe
    K = -eps * (L11 * L22 - L12 * L12) / W2
    H = -eps * (x2 * x2 * L11 - 2.0 * x1 * x2 * L12 + x1 * x1 * L22) / (2.0 * W2)
    K = np.where(bad, np.nan, K)
    H = np.where(bad, np.nan, H)

    return {
        "g1": x1, "g2": x2, "W": W, "eps": eps, "ny": ny, "nz": nz,
        "L11": L11, "L12": L12, "L22": L22, "K": K, "H": H,
        "lightlike": lightlike, "inadmissible": inadmissible,
    }
