"""Method-of-lines RK4 time stepping with breakdown detection."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .energy import DerivIndexCap, EnergyReport, energy_sample, fill_identity_residual
from .equations import DegeneracyError, EquationKind, Variant, degeneracy, rhs
from .grid import Field, Snapshot

log = logging.getLogger(__name__)

TAU_START = -2.0


class RunStatus(str, enum.Enum):
    COMPLETED = "Completed"
    BLOW_UP = "BlowUp"
    STEP_FAILURE = "StepFailure"


class Criterion(str, enum.Enum):
    DENOMINATOR = "DenominatorDegenerate"
    TIMELIKE = "TimelikeViolation"
    AMPLITUDE = "AmplitudeThreshold"
    NON_FINITE = "NonFinite"


@dataclass(frozen=True)
class StepControl:
    t_end: float
    cfl: float = 0.5
    dt_max: float = 0.01
    snapshot_stride: int = 1
    amplitude_cap: float = 1e6
    dt_min: float = 1e-12

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not 0 < self.cfl <= 1:
            out.append(f"cfl must lie in (0, 1] (got {self.cfl})")
        if not self.dt_max > 0:
            out.append(f"dt_max must be positive (got {self.dt_max})")
        if not isinstance(self.snapshot_stride, (int, np.integer)) or self.snapshot_stride < 1:
            out.append(f"snapshot_stride must be a positive integer (got {self.snapshot_stride!r})")
        if not self.amplitude_cap > 0:
            out.append(f"amplitude_cap must be positive (got {self.amplitude_cap})")
        if not math.isfinite(self.t_end):
            out.append(f"t_end must be finite (got {self.t_end})")
        return out

    def dt(self, t: float, h: float, tau_frame: bool = False) -> float:
        """CFL step: wave speed is exp(-t/2) in t, and 1 in tau."""
        speed = 1.0 if tau_frame else math.exp(-t / 2)
        return min(self.dt_max, self.cfl * h / speed)


@dataclass(frozen=True)
class Monitors:
    energy: bool = True
    cap: DerivIndexCap = dc_field(default_factory=DerivIndexCap)
    detect: bool = True


@dataclass
class RunOutcome:
    status: RunStatus
    final_time: float
    trajectory: list[Snapshot]
    energy_series: list[EnergyReport]
    criterion: Criterion | None = None
    t_detect: float | None = None
    steps: int = 0
    last_dt: float = 0.0
    message: str = ""

    @property
    def completed(self) -> bool:
        return self.status is RunStatus.COMPLETED

    @property
    def lifespan_estimate(self) -> float:
        return self.t_detect if self.t_detect is not None else self.final_time

    @property
    def lifespan_lower_bound(self) -> float:
        """Last time at which the state was certified smooth."""
        return self.final_time

    @property
    def final(self) -> Snapshot:
        return self.trajectory[-1]


class StageError(RuntimeError):
    pass


def _eval(field: Field, t: float, eq: EquationKind) -> np.ndarray:
    try:
        with np.errstate(all="ignore"):
            out = rhs(field, t, eq)
    except DegeneracyError as err:
        err.t = t
        raise
    return out


def rk4_step(field: Field, t: float, dt: float, eq: EquationKind) -> Field:
    """Classical RK4 for (phi, phi_t)' = (phi_t, rhs)."""
    if not dt > 0:
        raise ValueError(f"dt must be positive (got {dt})")
    g = field.grid
    p0, v0 = field.phi, field.phi_t
    a1 = _eval(field, t, eq)
    p1, v1 = p0 + 0.5 * dt * v0, v0 + 0.5 * dt * a1
    a2 = _eval(Field(g, p1, v1), t + 0.5 * dt, eq)
    p2, v2 = p0 + 0.5 * dt * v1, v0 + 0.5 * dt * a2
    a3 = _eval(Field(g, p2, v2), t + 0.5 * dt, eq)
    p3, v3 = p0 + dt * v2, v0 + dt * a3
    a4 = _eval(Field(g, p3, v3), t + dt, eq)
    phi = p0 + dt / 6.0 * (v0 + 2.0 * v1 + 2.0 * v2 + v3)
    phi_t = v0 + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    return Field(g, phi, phi_t)


def _check_state(field: Field, t: float, eq: EquationKind, ctrl: StepControl):
    if not field.finite:
        return Criterion.NON_FINITE, "non-finite value in state"
    a, b = field.max_abs()
    if max(a, b) > ctrl.amplitude_cap:
        return Criterion.AMPLITUDE, f"max|phi|={a:.3g}, max|phi_t|={b:.3g} exceed cap {ctrl.amplitude_cap:g}"
    hit = degeneracy(field, t, eq)
    if hit is not None:
        return Criterion(hit[0]), f"degeneracy value {hit[1]:.6g}"
    return None


def evolve(
    init: Field,
    eq: EquationKind,
    ctrl: StepControl,
    monitors: Monitors | None = None,
    t0: float | None = None,
) -> RunOutcome:
    """Integrate from t0 (0, or tau = -2 in the tau frame) to ``ctrl.t_end``.

    Breakdown criteria are checked on accepted states only. A step whose RK
    stage hits a degeneracy is retried once with half the step before the
    event is declared.
    """
    monitors = monitors or Monitors()
    if init.grid.dims != eq.grid_dims:
        raise ValueError(f"{eq.variant.value} with n={eq.n} needs a {eq.grid_dims}-D grid")
    tau_frame = eq.tau_frame
    t = (TAU_START if tau_frame else 0.0) if t0 is None else float(t0)
    if tau_frame and ctrl.t_end >= 0:
        raise ValueError("tau-frame runs must end before tau = 0")
    want_energy = monitors.energy and not tau_frame
    h = init.grid.h

    state = init
    traj = [Snapshot.of(state, t)]
    series: list[EnergyReport] = []
    steps = 0
    dt = 0.0

    def finish(status, criterion=None, t_detect=None, message=""):
        if traj[-1].t != t:
            traj.append(Snapshot.of(state, t))
        if want_energy and eq.variant is Variant.LINEAR:
            fill_identity_residual(series, eq.n)
        return RunOutcome(status, t, traj, series, criterion, t_detect, steps, dt, message)

    if monitors.detect:
        bad = _check_state(state, t, eq, ctrl)
        if bad is not None:
            return finish(RunStatus.BLOW_UP, bad[0], t, bad[1])
    if want_energy:
        series.append(energy_sample(state, t, eq, monitors.cap))

    eps_t = 1e-12 * max(1.0, abs(ctrl.t_end))
    while t < ctrl.t_end - eps_t:
        dt = min(ctrl.dt(t, h, tau_frame), ctrl.t_end - t)
        if dt < ctrl.dt_min:
            return finish(RunStatus.STEP_FAILURE, message=f"dt={dt:.3g} below dt_min at t={t:.6g}")
        try:
            new = rk4_step(state, t, dt, eq)
        except DegeneracyError:
            dt *= 0.5
            try:
                new = rk4_step(state, t, dt, eq)
            except DegeneracyError as err:
                if not monitors.detect:
                    raise
                log.info("stage degeneracy at t=%.6g: %s", err.t, err)
                return finish(RunStatus.BLOW_UP, Criterion(err.criterion), err.t, str(err))
        t_new = t + dt
        if monitors.detect:
            bad = _check_state(new, t_new, eq, ctrl)
            if bad is not None:
                log.info("event %s at t=%.6g: %s", bad[0].value, t_new, bad[1])
                return finish(RunStatus.BLOW_UP, bad[0], t_new, bad[1])
        state, t = new, t_new
        steps += 1
        if want_energy:
            series.append(energy_sample(state, t, eq, monitors.cap))
        if steps % ctrl.snapshot_stride == 0:
            traj.append(Snapshot.of(state, t))
    return finish(RunStatus.COMPLETED)
