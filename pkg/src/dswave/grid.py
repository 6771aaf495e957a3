"""Cubic lattices, second-order stencils and compactly supported initial data."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

#: Total coordinate distance a signal can travel for t in [0, inf) when the
#: wave speed is exp(-t/2).
MAX_TRAVEL = 2.0
DEFAULT_MARGIN = 0.5


class ConfigurationError(ValueError):
    """Raised for grid/data combinations that violate a domain rule."""


class ContractError(ValueError):
    """Raised when an array does not match the lattice it is used with."""


class Boundary(str, enum.Enum):
    ZERO_PAD = "ZeroPad"
    PERIODIC = "Periodic"


@dataclass(frozen=True)
class GridSpec:
    """Cubic lattice on [-L, L]^n.

    ZeroPad lattices include both end points, so ``h = 2L/(points-1)``.
    Periodic lattices drop the duplicated right end point, ``h = 2L/points``.
    """

    dims: int
    extent: float
    points: int
    boundary: Boundary = Boundary.ZERO_PAD

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        problems = self.violations()
        if problems:
            raise ConfigurationError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not isinstance(self.dims, (int, np.integer)) or not 1 <= self.dims <= 3:
            out.append(f"dims must be 1, 2 or 3 (got {self.dims!r})")
        if not isinstance(self.points, (int, np.integer)) or self.points < 5:
            out.append(f"points_per_axis must be >= 5 (got {self.points!r})")
        if not np.isfinite(self.extent) or self.extent <= 0:
            out.append(f"extent must be a positive finite half-width (got {self.extent!r})")
        return out

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def h(self) -> float:
        if self.periodic:
            return 2.0 * self.extent / self.points
        return 2.0 * self.extent / (self.points - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dims

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.extent + self.h * np.arange(self.points)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.dims), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords))

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights (cell volume included)."""
        w1 = np.ones(self.points)
        if not self.periodic:
            w1[0] = w1[-1] = 0.5
        w = w1
        for _ in range(self.dims - 1):
            w = np.multiply.outer(w, w1)
        return w * self.h**self.dims

    def check(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != self.shape:
            raise ContractError(f"array shape {values.shape} does not match grid shape {self.shape}")
        return values

    def refined(self, factor: int = 2) -> "GridSpec":
        """Same extent with the spacing divided by ``factor``."""
        if self.periodic:
            pts = self.points * factor
        else:
            pts = (self.points - 1) * factor + 1
        return GridSpec(self.dims, self.extent, pts, self.boundary)


@dataclass(frozen=True)
class Field:
    """Method-of-lines state (phi, phi_t) on a lattice."""

    grid: GridSpec
    phi: np.ndarray
    phi_t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "phi", self.grid.check(self.phi))
        object.__setattr__(self, "phi_t", self.grid.check(self.phi_t))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape))

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.phi).all() and np.isfinite(self.phi_t).all())

    def max_abs(self) -> tuple[float, float]:
        return float(np.max(np.abs(self.phi))), float(np.max(np.abs(self.phi_t)))


@dataclass(frozen=True)
class BumpProfile:
    """``amplitude * exp(1/(|x|^2/R^2 - 1))`` for |x| < R, zero elsewhere."""

    radius: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError(f"bump radius must be positive (got {self.radius!r})")

    def __call__(self, r: np.ndarray) -> np.ndarray:
        s = np.asarray(r, dtype=float) ** 2 / self.radius**2
        out = np.zeros_like(s)
        inside = s < 1.0
        out[inside] = self.amplitude * np.exp(1.0 / (s[inside] - 1.0))
        return out


def required_extent(radius: float, margin: float = DEFAULT_MARGIN) -> float:
    return radius + MAX_TRAVEL + margin


def _shift(values: np.ndarray, offset: int, axis: int, periodic: bool) -> np.ndarray:
    """values[x + offset*e_axis] with wrap-around or zero padding."""
    if periodic:
        return np.roll(values, -offset, axis=axis)
    out = np.zeros_like(values)
    src = [slice(None)] * values.ndim
    dst = [slice(None)] * values.ndim
    if offset > 0:
        src[axis] = slice(offset, None)
        dst[axis] = slice(None, -offset)
    else:
        src[axis] = slice(None, offset)
        dst[axis] = slice(-offset, None)
    out[tuple(dst)] = values[tuple(src)]
    return out


def diff1(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    """Central first difference along one axis."""
    p = grid.periodic
    return (_shift(values, 1, axis, p) - _shift(values, -1, axis, p)) / (2.0 * grid.h)


def diff2(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    """Compact three-point second difference along one axis."""
    p = grid.periodic
    return (_shift(values, 1, axis, p) - 2.0 * values + _shift(values, -1, axis, p)) / grid.h**2


def laplacian(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    values = grid.check(values)
    out = np.zeros_like(values)
    for ax in range(grid.dims):
        out += diff2(values, grid, ax)
    return out


def gradient(values: np.ndarray, grid: GridSpec) -> list[np.ndarray]:
    values = grid.check(values)
    return [diff1(values, grid, ax) for ax in range(grid.dims)]


def hessian(values: np.ndarray, grid: GridSpec) -> list[list[np.ndarray]]:
    """Second derivatives: compact stencil on the diagonal, nested central
    differences off the diagonal."""
    values = grid.check(values)
    n = grid.dims
    first = [diff1(values, grid, ax) for ax in range(n)]
    H = [[None] * n for _ in range(n)]
    for i in range(n):
        H[i][i] = diff2(values, grid, i)
        for j in range(i + 1, n):
            H[i][j] = H[j][i] = diff1(first[i], grid, j)
    return H


def derivative(values: np.ndarray, grid: GridSpec, index: tuple[int, ...]) -> np.ndarray:
    """Apply D^I for a spatial multi-index I (per-axis orders 0..3)."""
    values = grid.check(values)
    if len(index) != grid.dims:
        raise ContractError(f"multi-index {index} has wrong length for a {grid.dims}-D grid")
    out = values
    for ax, order in enumerate(index):
        if order < 0 or order > 3:
            raise ContractError(f"per-axis derivative order must be in 0..3 (got {order})")
        if order >= 2:
            out = diff2(out, grid, ax)
        if order % 2 == 1:
            out = diff1(out, grid, ax)
    return out


def forward_differences(values: np.ndarray, grid: GridSpec) -> list[np.ndarray]:
    """Staggered one-sided differences (v[x+h] - v[x])/h per axis.

    For ZeroPad the array is padded with one zero on each side first, so every
    edge that touches the lattice is included. These are the differences for
    which sum(u * laplacian(v)) == -sum(Du . Dv) holds exactly.
    """
    values = grid.check(values)
    out = []
    for ax in range(grid.dims):
        if grid.periodic:
            out.append((np.roll(values, -1, axis=ax) - values) / grid.h)
        else:
            pad = [(0, 0)] * grid.dims
            pad[ax] = (1, 1)
            out.append(np.diff(np.pad(values, pad), axis=ax) / grid.h)
    return out


def integrate(values: np.ndarray, grid: GridSpec) -> float:
    return float(np.sum(grid.check(values) * grid.weights))


def multi_indices(dims: int, order: int) -> list[tuple[int, ...]]:
    """All spatial multi-indices with |I| == order, lexicographically descending."""
    out = [I for I in itertools.product(range(order + 1), repeat=dims) if sum(I) == order]
    return sorted(out, reverse=True)


def make_initial_data(
    profile_f: BumpProfile | None,
    profile_g: BumpProfile | None,
    eps: float,
    grid: GridSpec,
    margin: float = DEFAULT_MARGIN,
) -> Field:
    """phi = eps*f, phi_t = eps*g, both centred at the origin."""
    if not eps >= 0:
        raise ConfigurationError(f"eps must be >= 0 (got {eps!r})")
    arrays = []
    for prof in (profile_f, profile_g):
        if prof is None:
            arrays.append(np.zeros(grid.shape))
            continue
        if grid.periodic:
            if prof.radius > grid.extent:
                raise ConfigurationError(
                    f"bump radius {prof.radius} exceeds the periodic half-width {grid.extent}"
                )
        elif grid.extent < required_extent(prof.radius, margin):
            raise ConfigurationError(
                f"L = {grid.extent} < R + 2 + margin = {required_extent(prof.radius, margin)}"
            )
        arrays.append(eps * prof(grid.radius))
    return Field(grid, arrays[0], arrays[1])


@dataclass(frozen=True)
class Snapshot:
    """A stored (t, phi, phi_t) sample of a trajectory."""

    t: float
    phi: np.ndarray
    phi_t: np.ndarray

    @classmethod
    def of(cls, field: Field, t: float) -> "Snapshot":
        return cls(float(t), field.phi.copy(), field.phi_t.copy())
