"""Oracle comparisons, lifespan sweeps, cross-frame checks and convergence studies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .config import RunConfig
from .equations import EquationKind, Variant, area_functional
from .grid import BumpProfile, Field, GridSpec, Snapshot, make_initial_data
from .integrator import TAU_START, Monitors, RunOutcome, StepControl, evolve

ODE_RTOL = 1e-12
ODE_ATOL = 1e-14


def tau_of_t(t):
    return TAU_START * np.exp(-np.asarray(t, dtype=float) / 2)


def t_of_tau(tau):
    return -2.0 * np.log(np.asarray(tau, dtype=float) / TAU_START)


# --------------------------------------------------------------------------
# ODE oracles
# --------------------------------------------------------------------------


@dataclass
class OracleSolution:
    """Reference solution of a spatially constant reduction.

    ``phi(t)`` and ``u(t)`` evaluate the dense solution on [t0, end]; ``end`` is
    either the requested end point or the blow-up time when one occurs first.
    """

    eq: EquationKind
    t0: float
    end: float
    blowup_time: float | None
    closed_form: bool
    _dense: Callable = dc_field(repr=False)
    _u_exact: Callable | None = dc_field(default=None, repr=False)

    def phi(self, t):
        return self._dense(t)[0]

    def u(self, t):
        if self._u_exact is not None:
            return self._u_exact(np.asarray(t, dtype=float))
        return self._dense(t)[1]


def _homogeneous_accel(eq: EquationKind) -> Callable[[float, float], float]:
    """d u / d(time) for a state with vanishing spatial gradients."""
    n = eq.n
    k = (n + 2) / 2
    if eq.variant is Variant.LINEAR:
        return lambda t, u: -k * u
    if eq.variant is Variant.SEMILINEAR:
        return lambda t, u: -k * u + u * u
    if eq.variant in (Variant.GENERALIZED, Variant.EXTREMAL):
        a = 1.0 if eq.alpha is None else eq.alpha

        def acc(t, u):
            w = -math.exp(a * t) * u * u
            return (1.0 + w) * (-k * u) + 0.5 * a * u * w

        return acc
    return lambda tau, psi: (n + 1) / tau * psi * (1.0 - psi * psi)


def _riccati_blowup(u0: float, k: float) -> float | None:
    if u0 <= k:
        return None
    return -math.log(1.0 - k / u0) / k


def homogeneous_oracle(eq: EquationKind, u0: float, t_end: float, phi0: float = 0.0) -> OracleSolution:
    """Integrate the spatially constant reduction of ``eq`` from (phi0, u0).

    The linear and semilinear cases also carry their closed forms
    ``u0 e^{-kt}`` and ``k u0 e^{-kt} / (k - u0 (1 - e^{-kt}))`` with
    ``k = (n+2)/2``; the quasilinear ones stop where ``1 - e^{alpha t} u^2``
    reaches zero. For spatially constant states that cannot happen from
    |u0| < 1, since D = 1 - e^{alpha t} u^2 obeys D' = 2 alpha e^{alpha t} u^2 D
    (shown here for alpha = 1; the general case has the same sign structure).
    The tau-frame variant starts at tau = -2.
    """
    t0 = TAU_START if eq.tau_frame else 0.0
    if eq.tau_frame and not t0 < t_end < 0:
        raise ValueError("tau-frame oracle needs -2 < t_end < 0")
    if eq.variant in (Variant.GENERALIZED, Variant.EXTREMAL, Variant.BORN_INFELD) and not u0 * u0 < 1.0:
        raise ValueError(f"u0 = {u0} starts on or beyond the degenerate set |u0| >= 1")
    acc = _homogeneous_accel(eq)
    k = (eq.n + 2) / 2
    events = []
    if eq.variant is Variant.SEMILINEAR:
        events.append(lambda t, y: 1e8 - abs(y[1]))
    elif eq.variant in (Variant.GENERALIZED, Variant.EXTREMAL):
        a = 1.0 if eq.alpha is None else eq.alpha
        events.append(lambda t, y: 1.0 - math.exp(a * t) * y[1] ** 2)
    elif eq.tau_frame:
        events.append(lambda t, y: 1.0 - y[1] ** 2)
    for ev in events:
        ev.terminal = True
    sol = solve_ivp(
        lambda t, y: [y[1], acc(t, y[1])],
        (t0, t_end),
        [phi0, u0],
        method="DOP853",
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
        dense_output=True,
        events=events or None,
    )
    end = float(sol.t[-1])
    blowup = None
    exact = None
    closed = False
    if eq.variant is Variant.LINEAR:
        exact = lambda t: u0 * np.exp(-k * (t - t0))
        closed = True
    elif eq.variant is Variant.SEMILINEAR:
        blowup = _riccati_blowup(u0, k)
        exact = lambda t: k * u0 * np.exp(-k * t) / (k - u0 * (1.0 - np.exp(-k * t)))
        closed = True
        if blowup is not None and blowup <= t_end:
            end = blowup
    elif sol.status == 1:
        blowup = end
    return OracleSolution(eq, t0, end, blowup, closed, sol.sol, exact)


@dataclass
class FourierOracle:
    k: float
    n: int
    a0: float
    a1: float
    _dense: Callable = dc_field(repr=False)

    def a(self, t):
        return self._dense(t)[0]

    def a_t(self, t):
        return self._dense(t)[1]


def fourier_oracle(k: float, n: int, t_end: float, a0: float = 1.0, a1: float = 0.0) -> FourierOracle:
    """Mode amplitude of the linear flow: a'' + (n+2)/2 a' + e^{-t} k^2 a = 0."""
    c = (n + 2) / 2
    sol = solve_ivp(
        lambda t, y: [y[1], -c * y[1] - math.exp(-t) * k * k * y[0]],
        (0.0, t_end),
        [a0, a1],
        method="DOP853",
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
        dense_output=True,
    )
    return FourierOracle(k, n, a0, a1, sol.sol)


@dataclass
class ModeComparison:
    times: np.ndarray
    relative_errors: np.ndarray

    @property
    def max_relative_error(self) -> float:
        return float(np.max(self.relative_errors))


def fourier_mode_run(points: int = 256, period: float = 2 * math.pi, mode: int = 1, t_end: float = 5.0,
                     n: int = 1, a0: float = 1.0, cfl: float = 0.5, dt_max: float = 0.01) -> ModeComparison:
    """Evolve phi(0) = a0 sin(kx) on a periodic 1-D grid and compare with the mode ODE."""
    if n != 1:
        raise ValueError("the Fourier comparison runs on 1-D grids")
    grid = GridSpec(1, period / 2, points, "Periodic")
    k = 2 * math.pi * mode / period
    shape = np.sin(k * grid.axis)
    init = Field(grid, a0 * shape, np.zeros(grid.shape))
    out = evolve(init, EquationKind.linear(1), StepControl(t_end, cfl, dt_max), Monitors(energy=False))
    if not out.completed:
        raise RuntimeError(f"Fourier run stopped early: {out.message}")
    ref = fourier_oracle(k, n, t_end, a0)
    ts = np.array([s.t for s in out.trajectory])
    errs = np.array(
        [np.max(np.abs(s.phi - ref.a(s.t) * shape)) / abs(ref.a(s.t)) for s in out.trajectory]
    )
    return ModeComparison(ts, errs)


def homogeneous_pde_run(eq: EquationKind, u0: float, t_end: float, dt: float,
                        amplitude_cap: float = 1e6) -> RunOutcome:
    """Spatially constant data on a small periodic grid, fixed step ``dt``."""
    grid = GridSpec(eq.grid_dims, 1.0, 8, "Periodic")
    init = Field(grid, np.zeros(grid.shape), np.full(grid.shape, float(u0)))
    ctrl = StepControl(t_end, cfl=1.0, dt_max=dt, amplitude_cap=amplitude_cap)
    return evolve(init, eq, ctrl, Monitors(energy=False))


# --------------------------------------------------------------------------
# Lifespan sweeps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRecord:
    eps: float
    alpha: float
    lifespan_estimate: float
    censored: bool
    criterion: str | None
    resolution: tuple[float, float]
    lower_bound: float = math.nan


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    records_used: int


@dataclass
class SweepResult:
    records: list[SweepRecord]
    fit: FitResult | None
    t_end: float
    c_calibrated: float | None
    lower_bound_ok: bool
    monotone_ok: bool

    @property
    def all_censored(self) -> bool:
        return all(r.censored for r in self.records)


def fit_lifespans(records: Sequence[SweepRecord]) -> FitResult | None:
    """Least-squares slope of log T against log eps over uncensored records."""
    used = [r for r in records if not r.censored]
    if len(used) < 3:
        return None
    x = np.log([r.eps for r in used])
    y = np.log([r.lifespan_estimate for r in used])
    slope, intercept = np.polyfit(x, y, 1)
    return FitResult(float(slope), float(intercept), len(used))


def sweep_config(alpha: float, t_end: float = 20.0, dims: int = 1, points: int = 257,
                 extent: float = 3.5, radius: float = 1.0, dt_max: float = 0.01) -> RunConfig:
    """Bump data (f = g) for the generalized extremal equation."""
    from .config import DataSpec

    eq = EquationKind.generalized(alpha, dims)
    grid = GridSpec(dims, extent, points)
    bump = BumpProfile(radius)
    return RunConfig(eq, grid, DataSpec(1.0, bump, bump), StepControl(t_end, dt_max=dt_max),
                     Monitors(energy=False))


def lifespan_sweep(alpha: float, eps_list: Sequence[float], config: RunConfig) -> SweepResult:
    """One evolution per eps of the generalized extremal equation with the
    config's grid, bump shape and step control.

    Censored records (no event before t_end) are reported but never fitted.
    The lower-bound check calibrates c = eps_max * T(eps_max) at the largest
    uncensored eps and requires T(eps) >= c/eps (less one step) for every
    uncensored record. Monotonicity requires T non-increasing in eps with the
    same one-step slack.
    """
    if any(not e > 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    eq = EquationKind.generalized(alpha, config.grid.dims)
    ctrl = config.control
    mon = replace(config.monitors, energy=False)
    records = []
    for eps in eps_list:
        init = make_initial_data(config.data.f, config.data.g, eps, config.grid, config.data.margin)
        out = evolve(init, eq, ctrl, mon)
        if out.completed:
            rec = SweepRecord(eps, alpha, ctrl.t_end, True, None, (config.grid.h, ctrl.dt_max), out.final_time)
        else:
            crit = out.criterion.value if out.criterion is not None else out.status.value
            rec = SweepRecord(eps, alpha, out.lifespan_estimate, False, crit,
                              (config.grid.h, ctrl.dt_max), out.lifespan_lower_bound)
        records.append(rec)
    records.sort(key=lambda r: -r.eps)
    slack = ctrl.dt_max
    monotone = all(
        b.lifespan_estimate >= a.lifespan_estimate - slack for a, b in zip(records, records[1:])
    )
    uncensored = [r for r in records if not r.censored]
    c = None
    lower_ok = True
    if uncensored:
        top = uncensored[0]
        c = top.eps * top.lifespan_estimate
        lower_ok = all(r.lifespan_estimate >= c / r.eps - slack for r in uncensored)
    return SweepResult(records, fit_lifespans(records), ctrl.t_end, c, lower_ok, monotone)


# --------------------------------------------------------------------------
# t-frame versus tau-frame
# --------------------------------------------------------------------------


@dataclass
class CrossFrameResult:
    h: float
    t_checkpoints: np.ndarray
    tau_checkpoints: np.ndarray
    discrepancies: np.ndarray

    @property
    def discrepancy(self) -> float:
        return float(np.max(self.discrepancies)) if len(self.discrepancies) else 0.0


def coordinate_crosscheck(grid: GridSpec, eps: float, t_c: float = 4.0, profile_f: BumpProfile | None = None,
                          profile_g: BumpProfile | None = None, cfl: float = 0.5,
                          checkpoints: int = 8) -> CrossFrameResult:
    """Evolve the extremal surface equation (n = 1) in t and its Born-Infeld
    form in tau = -2 e^{-t/2} from the same data; compare phi at matched times.

    At t = 0 (tau = -2) the chain rule gives phi_tau = phi_t. Both frames use
    the CFL step with no dt_max clamp, so the step in tau is the image of the
    step in t and the time error refines with h.
    """
    if grid.dims != 1:
        raise ValueError("the cross-frame check runs on 1-D grids")
    profile_f = profile_f if profile_f is not None else BumpProfile()
    profile_g = profile_g if profile_g is not None else BumpProfile()
    init = make_initial_data(profile_f, profile_g, eps, grid)
    ts = np.linspace(0.0, t_c, checkpoints + 1)[1:]
    taus = tau_of_t(ts)
    a, b = init, init
    ta, tb = 0.0, TAU_START
    disc = []
    mon = Monitors(energy=False)
    for t_k, tau_k in zip(ts, taus):
        oa = evolve(a, EquationKind.extremal(1), StepControl(float(t_k), cfl, dt_max=1e9), mon, t0=ta)
        ob = evolve(b, EquationKind.born_infeld(1), StepControl(float(tau_k), cfl, dt_max=1e9), mon, t0=tb)
        for o, name in ((oa, "t"), (ob, "tau")):
            if not o.completed:
                raise RuntimeError(f"{name}-frame run degenerated: {o.message}")
        a = Field(grid, oa.final.phi, oa.final.phi_t)
        b = Field(grid, ob.final.phi, ob.final.phi_t)
        ta, tb = float(t_k), float(tau_k)
        disc.append(float(np.max(np.abs(a.phi - b.phi))))
    return CrossFrameResult(grid.h, ts, taus, np.array(disc))


def observed_orders(hs: Sequence[float], errors: Sequence[float]) -> list[float]:
    """Pairwise orders log(e_i/e_{i+1}) / log(h_i/h_{i+1})."""
    out = []
    for (h1, e1), (h2, e2) in zip(zip(hs, errors), zip(hs[1:], errors[1:])):
        if e1 > 0 and e2 > 0:
            out.append(math.log(e1 / e2) / math.log(h1 / h2))
        else:
            out.append(math.nan)
    return out


# --------------------------------------------------------------------------
# Convergence studies
# --------------------------------------------------------------------------


class ConvergenceRefused(RuntimeError):
    """A level did not reach the comparison time smoothly."""


@dataclass
class ConvergenceReport:
    refine: str
    t: float
    spacings: list[float]
    differences: list[float]
    orders: list[float]
    degenerate: bool = False
    message: str = ""


def _sample(values: np.ndarray, stride: int) -> np.ndarray:
    return values[(slice(None, None, stride),) * values.ndim]


def convergence_study(eq: EquationKind, config: RunConfig, levels: int = 3, refine: str = "space") -> ConvergenceReport:
    """Richardson order p = log2(|u_2h - u_h| / |u_h - u_h/2|) at ``config.control.t_end``.

    ``refine="space"`` halves h (and dt_max with it) per level and compares
    on the coarsest lattice; ``refine="time"`` keeps the lattice and halves
    both dt_max and the CFL number. Any level that stops before t_end is
    refused. All-zero differences are reported as degenerate.
    """
    if levels < 3:
        raise ValueError("levels must be >= 3")
    if refine not in ("space", "time"):
        raise ValueError("refine must be 'space' or 'time'")
    ctrl = config.control
    mon = replace(config.monitors, energy=False)
    finals, spacings = [], []
    for lvl in range(levels):
        if refine == "space":
            grid = config.grid if lvl == 0 else config.grid.refined(2**lvl)
            c = replace(ctrl, dt_max=ctrl.dt_max / 2**lvl)
            spacings.append(grid.h)
        else:
            grid = config.grid
            c = replace(ctrl, dt_max=ctrl.dt_max / 2**lvl, cfl=ctrl.cfl / 2**lvl)
            spacings.append(c.dt_max)
        init = make_initial_data(config.data.f, config.data.g, config.data.eps, grid, config.data.margin)
        out = evolve(init, eq, c, mon)
        if not out.completed:
            raise ConvergenceRefused(
                f"level {lvl} stopped at t={out.final_time:.6g} ({out.status.value}: {out.message}); "
                "convergence is only measured on smooth runs"
            )
        stride = 2**lvl if refine == "space" else 1
        finals.append(_sample(out.final.phi, stride))
    diffs = [float(np.max(np.abs(a - b))) for a, b in zip(finals, finals[1:])]
    if all(d == 0 for d in diffs):
        return ConvergenceReport(refine, ctrl.t_end, spacings, diffs, [], True,
                                 "all level differences are exactly zero; no order can be estimated")
    orders = [math.log2(a / b) if a > 0 and b > 0 else math.nan for a, b in zip(diffs, diffs[1:])]
    return ConvergenceReport(refine, ctrl.t_end, spacings, diffs, orders)


# --------------------------------------------------------------------------
# Area functional first variation
# --------------------------------------------------------------------------


def _bump1(x: np.ndarray, centre: float, half_width: float) -> tuple[np.ndarray, np.ndarray]:
    """Smooth bump and its derivative, supported on |x - centre| < half_width."""
    z = (np.asarray(x, dtype=float) - centre) / half_width
    v, dv = np.zeros_like(z), np.zeros_like(z)
    inside = np.abs(z) < 1
    zi = z[inside]
    v[inside] = np.exp(1.0 / (zi * zi - 1.0))
    dv[inside] = v[inside] * (-2.0 * zi / (zi * zi - 1.0) ** 2) / half_width
    return v, dv


@dataclass
class VariationReport:
    s_values: np.ndarray
    delta_solution: np.ndarray
    delta_reference: np.ndarray
    slope_solution: float
    slope_reference: float
    first_variation_solution: float
    first_variation_reference: float


def _perturbed(traj: Sequence[Snapshot], eta: Callable, s: float) -> list[Snapshot]:
    out = []
    for snap in traj:
        e, e_t = eta(snap.t)
        out.append(Snapshot(snap.t, snap.phi + s * e, snap.phi_t + s * e_t))
    return out


def variation_check(eps: float = 0.5, points: int = 257, extent: float = 3.5, t_end: float = 2.0,
                    s_values: Sequence[float] = (0.004, 0.002, 0.001, 0.0005)) -> VariationReport:
    """Compare A[phi + s eta] - A[phi] on a computed extremal surface (n = 1)
    against the same quantity on a frozen field phi(t) = phi(0), which is not a
    solution.

    eta(t, x) is a product of smooth bumps compactly supported inside the slab
    [0, t_end] x [-L, L]. A critical point gives a change of order s^2 (plus an
    O(h^2) first-variation defect), anything else a change of order s. The
    central quotient (A[+s] - A[-s]) / 2s at the smallest s is also reported.
    """
    grid = GridSpec(1, extent, points)
    bump = BumpProfile(1.0)
    init = make_initial_data(bump, bump, eps, grid)
    out = evolve(init, EquationKind.extremal(1), StepControl(t_end), Monitors(energy=False))
    if not out.completed:
        raise RuntimeError(f"extremal surface run stopped early: {out.message}")
    traj = out.trajectory
    frozen = [Snapshot(s.t, init.phi.copy(), np.zeros(grid.shape)) for s in traj]
    bx, _ = _bump1(grid.axis, 0.0, 1.5)

    def eta(t):
        bt, dbt = _bump1(np.array([t]), t_end / 2, t_end / 4)
        return bt[0] * bx, dbt[0] * bx

    s_values = np.asarray(s_values, dtype=float)
    out_d, out_v = [], []
    for base in (traj, frozen):
        a0 = area_functional(base, grid)
        d = np.array([area_functional(_perturbed(base, eta, s), grid) - a0 for s in s_values])
        s_min = float(s_values[-1])
        v = (area_functional(_perturbed(base, eta, s_min), grid)
             - area_functional(_perturbed(base, eta, -s_min), grid)) / (2 * s_min)
        out_d.append(d)
        out_v.append(float(v))
    slopes = [float(np.polyfit(np.log(s_values), np.log(np.abs(d)), 1)[0]) for d in out_d]
    return VariationReport(s_values, out_d[0], out_d[1], slopes[0], slopes[1], out_v[0], out_v[1])


# --------------------------------------------------------------------------
# Finite propagation
# --------------------------------------------------------------------------


@dataclass
class PropagationReport:
    h: float
    worst_ratio: float
    worst_time: float
    front_width: float

    @property
    def front_width_cells(self) -> float:
        return self.front_width / self.h


def propagation_check(outcome: RunOutcome, grid: GridSpec, radius: float, floor: float = 1e-10) -> PropagationReport:
    """Largest |phi| outside R + 2(1 - e^{-t/2}) + 2h relative to the current
    peak, over all stored snapshots of a ZeroPad run.

    ``front_width`` is the largest distance beyond the cone R + 2(1 - e^{-t/2})
    at which |phi| still exceeds ``floor`` times the peak.
    """
    if grid.periodic:
        raise ValueError("finite propagation is checked on ZeroPad grids")
    worst, worst_t, width = 0.0, 0.0, 0.0
    for snap in outcome.trajectory:
        cone = radius + 2.0 * (1.0 - math.exp(-snap.t / 2))
        peak = float(np.max(np.abs(snap.phi)))
        if peak == 0:
            continue
        outside = grid.radius > cone + 2 * grid.h
        if outside.any():
            ratio = float(np.max(np.abs(snap.phi[outside]))) / peak
            if ratio > worst:
                worst, worst_t = ratio, snap.t
        loud = np.abs(snap.phi) > floor * peak
        width = max(width, float(np.max(grid.radius[loud] - cone)))
    return PropagationReport(grid.h, worst, worst_t, max(width, 0.0))
