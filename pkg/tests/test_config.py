import json
import math

import pytest

from dswave.config import DEFAULT_TAU_END, ConfigError, config_from_dict, default_config, parse_config
from dswave.equations import Variant
from dswave.grid import Boundary


def write(tmp_path, doc):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return p


def test_minimal_config_fills_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, {}))
    assert cfg.equation.variant is Variant.LINEAR and cfg.equation.n == 1 and cfg.equation.alpha is None
    assert cfg.grid.dims == 1 and cfg.grid.extent == 3.5 and cfg.grid.points == 257
    assert cfg.grid.boundary is Boundary.ZERO_PAD
    assert cfg.data.eps == 0.1 and cfg.data.f.radius == 1.0 and cfg.data.margin == 0.5
    assert cfg.control.t_end == 10.0 and cfg.control.cfl == 0.5 and cfg.control.dt_max == 0.01
    assert cfg.control.amplitude_cap == 1e6
    assert cfg.monitors.cap.max_total == 2 and cfg.monitors.cap.time_orders == (0, 1)


def test_alpha_above_one_is_rejected(tmp_path):
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, {"equation": {"variant": "GeneralizedExtremal", "alpha": 1.5}}))
    assert any("alpha ≤ 1" in p for p in err.value.problems)


def test_domain_rule(tmp_path):
    doc = {"grid": {"extent": 4.0}, "data": {"f": {"radius": 3.0}, "g": {"radius": 3.0}}}
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, doc))
    assert any("R + 2 + margin" in p and p.startswith("grid.extent") for p in err.value.problems)


def test_all_violations_are_listed():
    doc = {
        "equation": {"variant": "Nope"},
        "grid": {"points": 3, "boundary": "Mirror"},
        "control": {"cfl": 2.0, "snapshot_stride": 0},
        "monitors": {"cap": {"max_total": 9}},
        "output": {"directory": ""},
        "extra": {},
    }
    with pytest.raises(ConfigError) as err:
        config_from_dict(doc)
    text = " | ".join(err.value.problems)
    for path in ("equation.variant", "grid.boundary", "grid: points_per_axis", "control: cfl",
                 "control: snapshot_stride", "monitors.cap", "output.directory", "extra: unknown section"):
        assert path in text
    assert len(err.value.problems) >= 8


def test_type_errors_carry_paths():
    with pytest.raises(ConfigError) as err:
        config_from_dict({"grid": {"points": 12.5}, "data": {"eps": "big"}, "monitors": {"energy": "yes"}})
    text = " | ".join(err.value.problems)
    assert "grid.points" in text and "data.eps" in text and "monitors.energy" in text


def test_alpha_only_for_generalized():
    with pytest.raises(ConfigError, match="only allowed"):
        config_from_dict({"equation": {"variant": "LinearDissipative", "alpha": 0.5}})


def test_dims_follow_equation():
    cfg = config_from_dict({"equation": {"variant": "SemilinearNull", "n": 2}, "grid": {"points": 33}})
    assert cfg.grid.dims == 2
    with pytest.raises(ConfigError, match="dims=2"):
        config_from_dict({"equation": {"n": 2}, "grid": {"dims": 1}})


def test_tau_frame_defaults_and_checks():
    cfg = config_from_dict({"equation": {"variant": "BornInfeldTau"}})
    assert cfg.control.t_end == pytest.approx(DEFAULT_TAU_END)
    assert DEFAULT_TAU_END == pytest.approx(-2 * math.exp(-2))
    with pytest.raises(ConfigError, match="tau = 0"):
        config_from_dict({"equation": {"variant": "BornInfeldTau"}, "control": {"t_end": 1.0}})


def test_round_trip_is_lossless(tmp_path):
    doc = {
        "equation": {"variant": "GeneralizedExtremal", "alpha": 0.5, "n": 2},
        "grid": {"points": 65, "extent": 4.0},
        "data": {"eps": 0.3, "g": None, "f": {"radius": 1.2, "amplitude": 2.0}},
        "control": {"t_end": 3.0, "snapshot_stride": 10},
        "monitors": {"cap": {"max_total": 1, "time_orders": [0]}},
    }
    cfg = config_from_dict(doc)
    again = parse_config(write(tmp_path, cfg.dumps()))
    assert again == cfg
    assert again.dumps() == cfg.dumps()
    assert again.data.g is None


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(tmp_path / "missing.json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config(write(tmp_path, "{not json"))
    with pytest.raises(ConfigError, match="expected an object"):
        parse_config(write(tmp_path, "[1, 2]"))


def test_default_config_overrides():
    cfg = default_config(data={"eps": 0.0})
    assert cfg.data.eps == 0.0
    assert not cfg.initial_field().phi.any()
