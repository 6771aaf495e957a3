"""Right-hand sides phi_tt = F(phi, phi_t, t) for the de Sitter wave family.

Every equation is written as ``phi_tt = rhs(state, t)``. Quasilinear
equations are linear in phi_tt, so the top time derivative is isolated with a
closed-form coefficient instead of a nonlinear solve. Spatial derivatives of
phi_t come from stencils applied to the stored phi_t array.

Notation used below: ``u = phi_t``, ``p = grad phi``, ``H = hess phi``,
``lin = -(n+2)/2 u + exp(-t) lap(phi)`` (the damped linear operator).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import Field, GridSpec, diff1, diff2, gradient, hessian, integrate, laplacian

DELTA_DEG = 1e-6


class Variant(str, enum.Enum):
    LINEAR = "LinearDissipative"
    SEMILINEAR = "SemilinearNull"
    GENERALIZED = "GeneralizedExtremal"
    EXTREMAL = "ExtremalSurface"
    BORN_INFELD = "BornInfeldTau"


class DegeneracyError(ArithmeticError):
    """Base for evaluation-time breakdowns of a quasilinear equation."""

    criterion = "NonFinite"

    def __init__(self, message: str, index=None, value: float = math.nan, t: float = math.nan):
        super().__init__(message)
        self.index = index
        self.value = value
        self.t = t


class DegenerateDenominator(DegeneracyError):
    criterion = "DenominatorDegenerate"


class TimelikeViolation(DegeneracyError):
    criterion = "TimelikeViolation"


@dataclass(frozen=True)
class EquationKind:
    variant: Variant
    n: int = 1
    alpha: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if self.n not in (1, 2, 3):
            out.append(f"n must be 1, 2 or 3 (got {self.n!r})")
        if self.variant is Variant.GENERALIZED:
            if self.alpha is None:
                out.append("alpha is required for GeneralizedExtremal")
            elif not self.alpha <= 1:
                out.append(f"alpha ≤ 1 is required (got {self.alpha})")
        elif self.alpha is not None:
            out.append(f"alpha is only allowed for GeneralizedExtremal (variant {self.variant.value})")
        return out

    @classmethod
    def linear(cls, n=1):
        return cls(Variant.LINEAR, n)

    @classmethod
    def semilinear(cls, n=1):
        return cls(Variant.SEMILINEAR, n)

    @classmethod
    def generalized(cls, alpha, n=1):
        return cls(Variant.GENERALIZED, n, float(alpha))

    @classmethod
    def extremal(cls, n=1):
        return cls(Variant.EXTREMAL, n)

    @classmethod
    def born_infeld(cls, n=1):
        return cls(Variant.BORN_INFELD, n)

    @property
    def tau_frame(self) -> bool:
        return self.variant is Variant.BORN_INFELD

    @property
    def grid_dims(self) -> int:
        return 1 if self.tau_frame else self.n


@dataclass(frozen=True)
class TimelikeStatus:
    min_determinant_factor: float
    min_denominator: float
    degenerate: bool


def null_form_q(phi_t_a, grad_a, phi_t_b, grad_b, t: float) -> np.ndarray:
    """Q(a, b) = -a_t b_t + exp(-t) sum_i a_i b_i, pointwise."""
    phi_t_a = np.asarray(phi_t_a, dtype=float)
    phi_t_b = np.asarray(phi_t_b, dtype=float)
    if phi_t_a.shape != phi_t_b.shape or len(grad_a) != len(grad_b):
        raise ValueError("null_form_q: operands live on different lattices")
    spatial = np.zeros(np.broadcast_shapes(phi_t_a.shape, phi_t_b.shape))
    for ga, gb in zip(grad_a, grad_b):
        ga, gb = np.asarray(ga, dtype=float), np.asarray(gb, dtype=float)
        if ga.shape != phi_t_a.shape or gb.shape != phi_t_b.shape:
            raise ValueError("null_form_q: gradient shape does not match time derivative")
        spatial = spatial + ga * gb
    return -phi_t_a * phi_t_b + math.exp(-t) * spatial


def _dims(field: Field, n: int | None) -> int:
    if n is None:
        return field.grid.dims
    if n != field.grid.dims:
        raise ValueError(f"equation dimension n={n} does not match a {field.grid.dims}-D grid")
    return n


def _lin(field: Field, t: float, n: int) -> np.ndarray:
    return -(n + 2) / 2 * field.phi_t + math.exp(-t) * laplacian(field.phi, field.grid)


def _raise_if_below(values: np.ndarray, err: type[DegeneracyError], what: str, t: float):
    k = int(np.argmin(values))
    v = float(values.flat[k])
    if not v > DELTA_DEG:
        idx = np.unravel_index(k, values.shape)
        raise err(f"{what} = {v:.6g} <= {DELTA_DEG:g} at lattice point {idx}, t = {t:.6g}", idx, v, t)


def rhs_linear(field: Field, t: float, n: int | None = None) -> np.ndarray:
    return _lin(field, t, _dims(field, n))


def rhs_semilinear(field: Field, t: float, n: int | None = None) -> np.ndarray:
    n = _dims(field, n)
    p = gradient(field.phi, field.grid)
    q = null_form_q(field.phi_t, p, field.phi_t, p, t)
    return _lin(field, t, n) - q


def rhs_generalized(field: Field, t: float, alpha: float, n: int | None = None) -> np.ndarray:
    """Generalized extremal equation with weight exp(alpha t).

    With ``W = exp(alpha t) Q(phi, phi)`` the nonlinearity expands to
    ``Q(phi, W) = 2 exp(alpha t) u^2 phi_tt + rest`` where

        rest = -alpha u W + e^{(alpha-1)t} u |p|^2
               - 4 e^{(alpha-1)t} u (p . grad u) + 2 e^{(alpha-2)t} p^T H p.

    Moving phi_tt to the left leaves the coefficient
    ``1 + W + exp(alpha t) u^2 = 1 + exp((alpha-1)t)|p|^2``, which is >= 1.
    """
    n = _dims(field, n)
    grid, u = field.grid, field.phi_t
    p = gradient(field.phi, grid)
    gu = gradient(u, grid)
    H = hessian(field.phi, grid)
    p2 = sum(pi * pi for pi in p)
    W = math.exp(alpha * t) * null_form_q(u, p, u, p, t)
    _raise_if_below(1.0 + W, DegenerateDenominator, "1 + exp(alpha t) Q(phi, phi)", t)

    p_gu = sum(pi * gi for pi, gi in zip(p, gu))
    pHp = sum(p[i] * H[i][j] * p[j] for i in range(n) for j in range(n))
    ea1 = math.exp((alpha - 1.0) * t)
    rest = -alpha * u * W + ea1 * u * p2 - 4.0 * ea1 * u * p_gu + 2.0 * math.exp((alpha - 2.0) * t) * pHp
    return ((1.0 + W) * _lin(field, t, n) - 0.5 * rest) / (1.0 + ea1 * p2)


def rhs_extremal_surface(field: Field, t: float, n: int | None = None) -> np.ndarray:
    """Euler-Lagrange equation of the induced area, expanded and solved for phi_tt.

    With ``G = 1 + |p|^2 - e^t u^2`` the phi_tt terms of d/dt G combine with the
    leading -phi_tt into the coefficient ``G + e^t u^2 = 1 + |p|^2``.
    """
    n = _dims(field, n)
    grid, u = field.grid, field.phi_t
    p = gradient(field.phi, grid)
    gu = gradient(u, grid)
    H = hessian(field.phi, grid)
    p2 = sum(pi * pi for pi in p)
    et = math.exp(t)
    G = 1.0 + p2 - et * u * u
    _raise_if_below(G, TimelikeViolation, "1 + |grad phi|^2 - e^t phi_t^2", t)

    p_gu = sum(pi * gi for pi, gi in zip(p, gu))
    pHp = sum(p[i] * H[i][j] * p[j] for i in range(n) for j in range(n))
    num = G * _lin(field, t, n) + 2.0 * u * p_gu - 0.5 * et * u**3 - math.exp(-t) * pHp
    return num / (1.0 + p2)


def rhs_born_infeld_tau(field: Field, tau: float, n: int = 1) -> np.ndarray:
    """Plane-symmetric extremal surface equation in conformal time tau = -2 e^{-t/2}.

    State is (phi, psi = phi_tau) on a 1-D lattice; ``n`` is the dimension of the
    original problem and only enters through the friction coefficient (n+1)/tau.
    """
    if field.grid.dims != 1:
        raise ValueError("the tau-frame equation is posed on a 1-D lattice")
    if not tau < 0:
        raise ValueError(f"tau must be negative (got {tau})")
    grid, psi = field.grid, field.phi_t
    q = diff1(field.phi, grid, 0)
    qx = diff2(field.phi, grid, 0)
    psix = diff1(psi, grid, 0)
    K = 1.0 + q * q - psi * psi
    _raise_if_below(K, TimelikeViolation, "1 + phi_x^2 - phi_tau^2", tau)
    return (qx * (1.0 - psi * psi) + 2.0 * q * psi * psix + (n + 1) / tau * psi * K) / (1.0 + q * q)


def rhs(field: Field, t: float, eq: EquationKind) -> np.ndarray:
    v = eq.variant
    if v is Variant.LINEAR:
        return rhs_linear(field, t, eq.n)
    if v is Variant.SEMILINEAR:
        return rhs_semilinear(field, t, eq.n)
    if v is Variant.GENERALIZED:
        return rhs_generalized(field, t, eq.alpha, eq.n)
    if v is Variant.EXTREMAL:
        return rhs_extremal_surface(field, t, eq.n)
    return rhs_born_infeld_tau(field, t, eq.n)


def timelike_status(field: Field, t: float, alpha: float = 1.0) -> TimelikeStatus:
    u = field.phi_t
    p = gradient(field.phi, field.grid)
    p2 = sum(pi * pi for pi in p)
    det = 1.0 + p2 - math.exp(t) * u * u
    den = 1.0 + math.exp(alpha * t) * null_form_q(u, p, u, p, t)
    mdet, mden = float(np.min(det)), float(np.min(den))
    return TimelikeStatus(mdet, mden, not (mdet > DELTA_DEG and mden > DELTA_DEG))


def degeneracy(field: Field, t: float, eq: EquationKind) -> tuple[str, float] | None:
    """The breakdown criterion that applies to ``eq``, if it fires on this state.

    Only the singular set of the equation being evolved is consulted: the
    denominator for the generalized equation, the induced-metric determinant
    for the extremal surface, and its tau-frame analogue for Born-Infeld.
    """
    v = eq.variant
    if v is Variant.GENERALIZED:
        s = timelike_status(field, t, eq.alpha).min_denominator
        crit = DegenerateDenominator.criterion
    elif v is Variant.EXTREMAL:
        s = timelike_status(field, t).min_determinant_factor
        crit = TimelikeViolation.criterion
    elif v is Variant.BORN_INFELD:
        q = diff1(field.phi, field.grid, 0)
        s = float(np.min(1.0 + q * q - field.phi_t**2))
        crit = TimelikeViolation.criterion
    else:
        return None
    return None if s > DELTA_DEG else (crit, s)


def area_density(phi: np.ndarray, phi_t: np.ndarray, t: float, grid: GridSpec) -> np.ndarray:
    """sqrt(-det G) = e^{nt/2} sqrt(1 + |grad phi|^2 - e^t phi_t^2)."""
    p = gradient(phi, grid)
    arg = 1.0 + sum(pi * pi for pi in p) - math.exp(t) * phi_t * phi_t
    _raise_if_below(arg, TimelikeViolation, "1 + |grad phi|^2 - e^t phi_t^2", t)
    return math.exp(grid.dims * t / 2) * np.sqrt(arg)


def area_functional(trajectory: Sequence, grid: GridSpec) -> float:
    """Trapezoidal space-time integral of the induced area element over a slab.

    ``trajectory`` is a time-ordered sequence of objects with ``t``, ``phi`` and
    ``phi_t`` attributes.
    """
    if len(trajectory) < 2:
        return 0.0
    ts = np.array([s.t for s in trajectory], dtype=float)
    if np.any(np.diff(ts) < 0):
        raise ValueError("trajectory must be ordered in time")
    slices = [integrate(area_density(s.phi, s.phi_t, s.t, grid), grid) for s in trajectory]
    return float(np.trapezoid(slices, ts))
