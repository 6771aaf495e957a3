"""Run configuration: a JSON document mapped onto the solver's dataclasses.

Every section is optional; omitted keys take the documented defaults and
``to_dict`` always writes them out, so ``parse -> to_dict -> parse`` is the
identity. Validation collects every violation with a dotted field path
instead of stopping at the first one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Any

from .energy import DerivIndexCap
from .equations import EquationKind, Variant
from .grid import DEFAULT_MARGIN, Boundary, BumpProfile, Field, GridSpec, make_initial_data, required_extent
from .integrator import TAU_START, Monitors, StepControl

#: Default tau-frame end point; it corresponds to coordinate time t = 4.
DEFAULT_TAU_END = TAU_START * math.exp(-2.0)


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` holds one message per violation."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class DataSpec:
    eps: float = 0.1
    f: BumpProfile | None = dc_field(default_factory=BumpProfile)
    g: BumpProfile | None = dc_field(default_factory=BumpProfile)
    margin: float = DEFAULT_MARGIN

    @property
    def radius(self) -> float:
        radii = [p.radius for p in (self.f, self.g) if p is not None]
        return max(radii) if radii else 0.0


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    series: bool = True
    snapshots: bool = True


@dataclass(frozen=True)
class RunConfig:
    equation: EquationKind
    grid: GridSpec
    data: DataSpec
    control: StepControl
    monitors: Monitors = dc_field(default_factory=Monitors)
    output: OutputSpec = dc_field(default_factory=OutputSpec)

    def initial_field(self) -> Field:
        return make_initial_data(self.data.f, self.data.g, self.data.eps, self.grid, self.data.margin)

    def to_dict(self) -> dict[str, Any]:
        eq, g, d, c, m, o = self.equation, self.grid, self.data, self.control, self.monitors, self.output
        bump = lambda p: None if p is None else {"radius": p.radius, "amplitude": p.amplitude}
        return {
            "equation": {"variant": eq.variant.value, "n": eq.n, "alpha": eq.alpha},
            "grid": {"dims": g.dims, "extent": g.extent, "points": g.points, "boundary": g.boundary.value},
            "data": {"eps": d.eps, "f": bump(d.f), "g": bump(d.g), "margin": d.margin},
            "control": {
                "t_end": c.t_end,
                "cfl": c.cfl,
                "dt_max": c.dt_max,
                "snapshot_stride": c.snapshot_stride,
                "amplitude_cap": c.amplitude_cap,
                "dt_min": c.dt_min,
            },
            "monitors": {
                "energy": m.energy,
                "detect": m.detect,
                "cap": {"max_total": m.cap.max_total, "time_orders": list(m.cap.time_orders)},
            },
            "output": {"directory": o.directory, "series": o.series, "snapshots": o.snapshots},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_SECTIONS = {
    "equation": {"variant", "n", "alpha"},
    "grid": {"dims", "extent", "points", "boundary"},
    "data": {"eps", "f", "g", "margin"},
    "control": {"t_end", "cfl", "dt_max", "snapshot_stride", "amplitude_cap", "dt_min"},
    "monitors": {"energy", "detect", "cap"},
    "output": {"directory", "series", "snapshots"},
}


class _Reader:
    """Typed lookups that record problems instead of raising."""

    def __init__(self):
        self.problems: list[str] = []

    def section(self, doc: dict, name: str) -> dict:
        sec = doc.get(name, {})
        if sec is None:
            sec = {}
        if not isinstance(sec, dict):
            self.problems.append(f"{name}: expected an object")
            return {}
        for key in sorted(set(sec) - _SECTIONS[name]):
            self.problems.append(f"{name}.{key}: unknown key")
        return sec

    def number(self, sec: dict, path: str, key: str, default, integer: bool = False):
        value = sec.get(key, default)
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if integer:
            ok = ok and float(value).is_integer()
        if not ok:
            kind = "an integer" if integer else "a number"
            self.problems.append(f"{path}.{key}: expected {kind} (got {value!r})")
            return default
        return int(value) if integer else float(value)

    def flag(self, sec: dict, path: str, key: str, default: bool) -> bool:
        value = sec.get(key, default)
        if not isinstance(value, bool):
            self.problems.append(f"{path}.{key}: expected true or false (got {value!r})")
            return default
        return value

    def bump(self, sec: dict, path: str, key: str) -> BumpProfile | None:
        if key not in sec:
            return BumpProfile()
        value = sec[key]
        if value is None:
            return None
        if not isinstance(value, dict):
            self.problems.append(f"{path}.{key}: expected an object or null")
            return BumpProfile()
        for extra in sorted(set(value) - {"radius", "amplitude"}):
            self.problems.append(f"{path}.{key}.{extra}: unknown key")
        radius = self.number(value, f"{path}.{key}", "radius", 1.0)
        amplitude = self.number(value, f"{path}.{key}", "amplitude", 1.0)
        if not radius > 0:
            self.problems.append(f"{path}.{key}.radius: must be positive (got {radius})")
            return BumpProfile()
        return BumpProfile(radius, amplitude)


def config_from_dict(doc: Any) -> RunConfig:
    """Build and validate a RunConfig; raises ConfigError listing all problems."""
    if not isinstance(doc, dict):
        raise ConfigError(["<root>: expected an object"])
    r = _Reader()
    for key in sorted(set(doc) - set(_SECTIONS)):
        r.problems.append(f"{key}: unknown section")

    sec = r.section(doc, "equation")
    variant = sec.get("variant", Variant.LINEAR.value)
    try:
        variant = Variant(variant)
    except ValueError:
        names = ", ".join(v.value for v in Variant)
        r.problems.append(f"equation.variant: unknown variant {variant!r} (expected one of {names})")
        variant = Variant.LINEAR
    n = r.number(sec, "equation", "n", 1, integer=True)
    alpha = sec.get("alpha")
    if alpha is not None:
        alpha = r.number(sec, "equation", "alpha", 1.0)
    eq = None
    probe = EquationKind.__new__(EquationKind)
    object.__setattr__(probe, "variant", variant)
    object.__setattr__(probe, "n", n)
    object.__setattr__(probe, "alpha", alpha)
    eq_problems = probe.violations()
    r.problems.extend(f"equation: {p}" for p in eq_problems)
    if not eq_problems:
        eq = EquationKind(variant, n, alpha)

    sec = r.section(doc, "grid")
    default_dims = eq.grid_dims if eq is not None else 1
    dims = r.number(sec, "grid", "dims", default_dims, integer=True)
    extent = r.number(sec, "grid", "extent", 3.5)
    points = r.number(sec, "grid", "points", 257, integer=True)
    boundary = sec.get("boundary", Boundary.ZERO_PAD.value)
    try:
        boundary = Boundary(boundary)
    except ValueError:
        r.problems.append(f"grid.boundary: expected 'ZeroPad' or 'Periodic' (got {boundary!r})")
        boundary = Boundary.ZERO_PAD
    grid = None
    probe = GridSpec.__new__(GridSpec)
    for k, v in (("dims", dims), ("extent", extent), ("points", points), ("boundary", boundary)):
        object.__setattr__(probe, k, v)
    grid_problems = probe.violations()
    r.problems.extend(f"grid: {p}" for p in grid_problems)
    if not grid_problems:
        grid = GridSpec(dims, extent, points, boundary)
    if eq is not None and dims != eq.grid_dims:
        r.problems.append(f"grid.dims: {eq.variant.value} with n={eq.n} needs dims={eq.grid_dims} (got {dims})")

    sec = r.section(doc, "data")
    eps = r.number(sec, "data", "eps", 0.1)
    if not eps >= 0:
        r.problems.append(f"data.eps: must be >= 0 (got {eps})")
    margin = r.number(sec, "data", "margin", DEFAULT_MARGIN)
    if not margin >= 0:
        r.problems.append(f"data.margin: must be >= 0 (got {margin})")
    data = DataSpec(eps, r.bump(sec, "data", "f"), r.bump(sec, "data", "g"), margin)
    if grid is not None and data.radius > 0:
        if grid.periodic and data.radius > grid.extent:
            r.problems.append(f"data: bump radius {data.radius} exceeds the periodic half-width {grid.extent}")
        elif not grid.periodic and grid.extent < required_extent(data.radius, margin):
            r.problems.append(
                f"grid.extent: L = {grid.extent} < R + 2 + margin = {required_extent(data.radius, margin)}"
            )

    sec = r.section(doc, "control")
    tau = eq is not None and eq.tau_frame
    t_end = r.number(sec, "control", "t_end", DEFAULT_TAU_END if tau else 10.0)
    if tau and not t_end < 0:
        r.problems.append(f"control.t_end: tau-frame runs must end before tau = 0 (got {t_end})")
    if tau and not t_end > TAU_START:
        r.problems.append(f"control.t_end: tau-frame runs start at tau = {TAU_START} (got {t_end})")
    ctrl_args = dict(
        t_end=t_end,
        cfl=r.number(sec, "control", "cfl", 0.5),
        dt_max=r.number(sec, "control", "dt_max", 0.01),
        snapshot_stride=r.number(sec, "control", "snapshot_stride", 1, integer=True),
        amplitude_cap=r.number(sec, "control", "amplitude_cap", 1e6),
        dt_min=r.number(sec, "control", "dt_min", 1e-12),
    )
    probe = StepControl.__new__(StepControl)
    for k, v in ctrl_args.items():
        object.__setattr__(probe, k, v)
    ctrl_problems = probe.violations()
    r.problems.extend(f"control: {p}" for p in ctrl_problems)

    sec = r.section(doc, "monitors")
    cap_doc = sec.get("cap", {}) or {}
    cap = DerivIndexCap()
    if not isinstance(cap_doc, dict):
        r.problems.append("monitors.cap: expected an object")
    else:
        for extra in sorted(set(cap_doc) - {"max_total", "time_orders"}):
            r.problems.append(f"monitors.cap.{extra}: unknown key")
        max_total = r.number(cap_doc, "monitors.cap", "max_total", 2, integer=True)
        orders = cap_doc.get("time_orders", [0, 1])
        if not isinstance(orders, list) or not all(isinstance(o, int) and not isinstance(o, bool) for o in orders):
            r.problems.append(f"monitors.cap.time_orders: expected a list of integers (got {orders!r})")
            orders = [0, 1]
        probe = DerivIndexCap.__new__(DerivIndexCap)
        object.__setattr__(probe, "max_total", max_total)
        object.__setattr__(probe, "time_orders", tuple(sorted(set(orders))))
        cap_problems = probe.violations()
        r.problems.extend(f"monitors.cap: {p}" for p in cap_problems)
        if not cap_problems:
            cap = DerivIndexCap(max_total, tuple(orders))
    monitors = Monitors(
        energy=r.flag(sec, "monitors", "energy", True),
        cap=cap,
        detect=r.flag(sec, "monitors", "detect", True),
    )

    sec = r.section(doc, "output")
    directory = sec.get("directory", "out")
    if not isinstance(directory, str) or not directory:
        r.problems.append(f"output.directory: expected a non-empty string (got {directory!r})")
        directory = "out"
    output = OutputSpec(directory, r.flag(sec, "output", "series", True), r.flag(sec, "output", "snapshots", True))

    if r.problems:
        raise ConfigError(r.problems)
    return RunConfig(eq, grid, data, StepControl(**ctrl_args), monitors, output)


def parse_config(path: str | Path) -> RunConfig:
    """Read a JSON config file; parse and validation failures raise ConfigError."""
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError([f"<file>: cannot read {path}: {err.strerror or err}"]) from err
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError([f"<file>: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}"]) from err
    return config_from_dict(doc)


def default_config(**sections: dict) -> RunConfig:
    """Defaults with per-section overrides, e.g. ``default_config(data={"eps": 0.2})``."""
    return config_from_dict(sections)
