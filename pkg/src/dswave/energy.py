"""Slice energies E, weighted energies f, flat energies e and their monitors.

For a tracked pair (I, I0) the differentiated quantity is ``w = d_t^{I0} D^I phi``:

    E0 = 1/2 int w_t^2 dVol_t,   E1 = 1/2 int e^{-t} |grad w|^2 dVol_t,
    dVol_t = e^{nt/2} dx,        f = (E0 + E1) e^{(2-n)t/2}.

``w_t`` for I0 = 1 is D^I of the equation's right-hand side. The gradient
energy uses staggered one-sided differences: with the compact Laplacian these
satisfy summation by parts exactly, so the discrete linear flow obeys the
continuous energy identity with no O(h^2) defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .equations import EquationKind, null_form_q, rhs, timelike_status
from .grid import Field, derivative, diff1, forward_differences, gradient, integrate, multi_indices


@dataclass(frozen=True)
class DerivIndexCap:
    max_total: int = 2
    time_orders: tuple[int, ...] = (0, 1)

    def __post_init__(self):
        object.__setattr__(self, "time_orders", tuple(sorted(set(self.time_orders))))
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not 0 <= self.max_total <= 3:
            out.append(f"max_total must be in 0..3 (got {self.max_total})")
        if not self.time_orders or not set(self.time_orders) <= {0, 1}:
            out.append(f"time_orders must be a non-empty subset of {{0, 1}} (got {self.time_orders})")
        return out

    def indices(self, dims: int) -> list[tuple[tuple[int, ...], int]]:
        out = []
        for i0 in self.time_orders:
            for order in range(self.max_total - i0 + 1):
                out.extend((I, i0) for I in multi_indices(dims, order))
        return out


def index_label(I: tuple[int, ...], i0: int) -> str:
    return "I" + "".join(str(k) for k in I) + f"_t{i0}"


@dataclass
class EnergyReport:
    t: float
    n: int
    indices: tuple[tuple[tuple[int, ...], int], ...]
    E0: np.ndarray
    E1: np.ndarray
    e0: np.ndarray
    e1: np.ndarray
    sup_phi_t: float
    sup_grad: float
    min_denominator: float
    min_determinant_factor: float
    identity_residual: float = math.nan
    cap: DerivIndexCap = dc_field(default_factory=DerivIndexCap)

    @property
    def E(self) -> np.ndarray:
        return self.E0 + self.E1

    @property
    def weight(self) -> float:
        return math.exp((2 - self.n) * self.t / 2)

    @property
    def f(self) -> np.ndarray:
        return self.E * self.weight

    @property
    def F(self) -> float:
        return float(np.sum(self.f))

    @property
    def labels(self) -> list[str]:
        return [index_label(I, i0) for I, i0 in self.indices]

    def position(self, I: tuple[int, ...], i0: int = 0) -> int:
        return self.indices.index((tuple(I), i0))


def energy_sample(field: Field, t: float, eq: EquationKind, cap: DerivIndexCap | None = None) -> EnergyReport:
    cap = cap or DerivIndexCap()
    grid, n = field.grid, field.grid.dims
    idx = tuple(cap.indices(n))
    phi_tt = rhs(field, t, eq) if any(i0 == 1 for _, i0 in idx) else None
    vol = math.exp(n * t / 2)
    cell = grid.h**n
    E0, E1, e0, e1 = (np.zeros(len(idx)) for _ in range(4))
    for k, (I, i0) in enumerate(idx):
        if i0 == 0:
            w_t, w = derivative(field.phi_t, grid, I), derivative(field.phi, grid, I)
        else:
            w_t, w = derivative(phi_tt, grid, I), derivative(field.phi_t, grid, I)
        kin = 0.5 * integrate(w_t * w_t, grid)
        grad2 = 0.5 * cell * sum(float(np.sum(d * d)) for d in forward_differences(w, grid))
        e0[k], e1[k] = kin, grad2
        E0[k] = vol * kin
        E1[k] = vol * math.exp(-t) * grad2
    p = gradient(field.phi, grid)
    alpha = eq.alpha if eq.alpha is not None else 1.0
    st = timelike_status(field, t, alpha)
    return EnergyReport(
        t=float(t),
        n=n,
        indices=idx,
        E0=E0,
        E1=E1,
        e0=e0,
        e1=e1,
        sup_phi_t=float(np.max(np.abs(field.phi_t))),
        sup_grad=float(np.max(np.sqrt(sum(pi * pi for pi in p)))),
        min_denominator=st.min_denominator,
        min_determinant_factor=st.min_determinant_factor,
        cap=cap,
    )


def _column(series: Sequence[EnergyReport], attr: str, k: int) -> np.ndarray:
    return np.array([getattr(r, attr)[k] for r in series])


def identity_residual(series: Sequence[EnergyReport], n: int) -> np.ndarray:
    """dE/dt - [-(n+4)/2 E0 + (n-2)/2 E1] for the undifferentiated energy.

    dE/dt is a second-order finite difference of the sampled series (sample
    times need not be uniform).
    """
    if len(series) < 3:
        raise ValueError("identity_residual needs at least 3 samples")
    k = series[0].position((0,) * series[0].n, 0)
    ts = np.array([r.t for r in series])
    E0, E1 = _column(series, "E0", k), _column(series, "E1", k)
    dE = np.gradient(E0 + E1, ts, edge_order=2)
    return dE - (-(n + 4) / 2 * E0 + (n - 2) / 2 * E1)


def fill_identity_residual(series: list[EnergyReport], n: int) -> None:
    if len(series) >= 3:
        for r, v in zip(series, identity_residual(series, n)):
            r.identity_residual = float(v)


@dataclass
class MonotonicityReport:
    labels: list[str]
    non_increasing: list[bool]
    worst_relative_increase: list[float]
    measured_ratio: list[float]
    expected_ratio: float

    @property
    def ok(self) -> bool:
        return all(self.non_increasing)


def monotonicity_check(series: Sequence[EnergyReport], n: int, rel_slack: float = 1e-8) -> MonotonicityReport:
    """Check that each f^{|I|,0} never rises above its running maximum.

    The measured ratio (df/dt) / (e^{(2-n)t/2} E0) is reported as the median
    over samples with non-negligible E0; the identity for the linear flow gives
    -(n+1).
    """
    ts = np.array([r.t for r in series])
    out = MonotonicityReport([], [], [], [], -(n + 1.0))
    for k, (I, i0) in enumerate(series[0].indices):
        if i0 != 0:
            continue
        f = np.array([r.f[k] for r in series])
        runmax = np.maximum.accumulate(f)
        prev = np.concatenate([[f[0]], runmax[:-1]])
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(prev > 0, f / prev - 1.0, np.where(f > 0, np.inf, 0.0))
        worst = float(np.max(rel)) if len(rel) else 0.0
        ratio = math.nan
        if len(series) >= 3:
            E0 = _column(series, "E0", k)
            df = np.gradient(f, ts, edge_order=2)
            mask = E0 > 1e-3 * np.max(E0) if np.max(E0) > 0 else np.zeros_like(E0, bool)
            if mask.any():
                ratio = float(np.median(df[mask] / (np.exp((2 - n) * ts[mask] / 2) * E0[mask])))
        out.labels.append(index_label(I, i0))
        out.non_increasing.append(worst <= rel_slack)
        out.worst_relative_increase.append(worst)
        out.measured_ratio.append(ratio)
    return out


@dataclass
class DecayReport:
    structural_ok: bool
    max_structural_excess: float
    weighted_sup: np.ndarray
    growth_ratio: float
    bounded: bool


def decay_check(
    series: Sequence[EnergyReport],
    n: int,
    window: tuple[float, float] = (1.0, 10.0),
    factor: float = 3.0,
    tol: float = 1e-13,
) -> DecayReport:
    """Flat-energy bounds e0 <= e^{-t} f, e1 <= f and growth of sup|phi_t| e^{t/2}."""
    excess = 0.0
    for r in series:
        scale = max(1.0, float(np.max(r.f)))
        excess = max(excess, float(np.max(r.e0 - math.exp(-r.t) * r.f)) / scale)
        excess = max(excess, float(np.max(r.e1 - r.f)) / scale)
    ts = np.array([r.t for r in series])
    ws = np.array([r.sup_phi_t for r in series]) * np.exp(ts / 2)
    sel = (ts >= window[0] - 1e-12) & (ts <= window[1] + 1e-12)
    growth = math.nan
    if sel.any():
        ref = ws[int(np.argmin(np.abs(ts - window[0])))]
        peak = float(np.max(ws[sel]))
        growth = 0.0 if peak == 0 else (math.inf if ref == 0 else peak / ref)
    bounded = bool(np.isnan(growth) or growth <= factor)
    return DecayReport(excess <= tol, excess, ws, growth, bounded)


@dataclass
class LeibnizResidual:
    spatial: float
    temporal: float | None = None


def _q_self(field: Field, t: float) -> np.ndarray:
    p = gradient(field.phi, field.grid)
    return null_form_q(field.phi_t, p, field.phi_t, p, t)


def leibniz_q_check(
    field: Field,
    t: float,
    state_at: Callable[[float], Field] | None = None,
    delta: float = 1e-4,
) -> LeibnizResidual:
    """Residuals of D Q(phi,phi) = 2 Q(D phi, phi) and, when a trajectory is
    supplied, of d_t Q(phi,phi) = 2 Q(phi_t, phi) - e^{-t} |grad phi|^2.

    ``state_at(s)`` must return the state at time s; it is sampled at t +- delta
    for the time derivatives.
    """
    grid = field.grid
    q = _q_self(field, t)
    p = gradient(field.phi, grid)
    spatial = 0.0
    for ax in range(grid.dims):
        lhs = diff1(q, grid, ax)
        dphi = diff1(field.phi, grid, ax)
        du = diff1(field.phi_t, grid, ax)
        rhs_ = 2.0 * null_form_q(du, gradient(dphi, grid), field.phi_t, p, t)
        spatial = max(spatial, float(np.max(np.abs(lhs - rhs_))))
    temporal = None
    if state_at is not None:
        a, b = state_at(t - delta), state_at(t + delta)
        lhs = (_q_self(b, t + delta) - _q_self(a, t - delta)) / (2 * delta)
        phi_tt = (b.phi_t - a.phi_t) / (2 * delta)
        gu = gradient(field.phi_t, grid)
        q_tp = null_form_q(phi_tt, gu, field.phi_t, p, t)
        rhs_ = 2.0 * q_tp - math.exp(-t) * sum(pi * pi for pi in p)
        temporal = float(np.max(np.abs(lhs - rhs_)))
    return LeibnizResidual(spatial, temporal)
