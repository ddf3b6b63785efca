import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frictioncomp.config import (
    PRESETS,
    from_document,
    parse_config,
    preset_document,
    preset_names,
    serialize,
)
from frictioncomp.errors import ConfigError
from frictioncomp.integrator import integrate
from frictioncomp.io import (
    TRAJECTORY_COLUMNS,
    fmt,
    jsonable,
    read_trajectory_csv,
    write_events_csv,
    write_json,
    write_trajectory_csv,
)


def test_fig4_preset_values():
    p = parse_config("preset: fig4-limit-cycle\n").plant_params()
    assert (p.c_f, p.friction.s, p.gamma, p.k, p.c) == (50.0, 500.0, 60.0, 0.0, 0.0)
    assert p.presliding


def test_empty_document_rejected():
    with pytest.raises(ConfigError):
        parse_config("")
    with pytest.raises(ConfigError):
        from_document({})


def test_physical_scaling():
    doc = {"plant": {"k": 1.0, "c": 2.0, "c_f": 1.148, "gamma": 0.5},
           "physical": {"mass": 0.735, "force_constant": 3.28}}
    p = from_document(doc).plant_params()
    g = 3.28 / 0.735
    assert p.k == pytest.approx(g) and p.c == pytest.approx(2 * g)
    assert p.gamma == pytest.approx(0.5 * g)
    assert p.c_f == pytest.approx(1.148 / 0.735)


@pytest.mark.parametrize("doc,field", [
    ({"plant": {"kk": 1.0}}, "plant.kk"),
    ({"plant": {"c_f": -1.0}}, "plant"),
    ({"plant": {}, "bogus": 1}, "bogus"),
    ({"plant": {}, "simulation": {"t_end": -1.0}}, "simulation"),
    ({"plant": {}, "physical": {"mass": 0.0, "force_constant": 1.0}}, "physical.mass"),
    ({"plant": {}, "analysis": {"window_fraction": 2.0}}, "analysis.window_fraction"),
    ({"preset": "nope"}, "preset"),
])
def test_config_errors_name_field(doc, field):
    with pytest.raises(ConfigError) as info:
        from_document(doc)
    assert info.value.field == field


def test_malformed_text():
    with pytest.raises(ConfigError):
        parse_config("plant: [1, 2\n")


@pytest.mark.parametrize("name", preset_names())
def test_round_trip(name):
    cfg = parse_config(f"preset: {name}\n")
    assert parse_config(serialize(cfg)) == cfg


def test_presets_immutable():
    with pytest.raises(TypeError):
        PRESETS["lab-2mm"]["plant"]["k"] = 1.0
    doc = preset_document("lab-2mm")
    doc["plant"]["k"] = 1.0
    assert PRESETS["lab-2mm"]["plant"]["k"] == 5600.0


def test_override_merges_over_preset():
    cfg = parse_config("preset: lab-2mm\ninitial: {x1: 0.001}\n")
    assert cfg.initial.x1 == 0.001 and cfg.plant.k == 5600.0
    assert cfg.scenario().x0.x1 == pytest.approx(0.001 - 0.002)


def test_json_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"plant": {"c_f": 1.0, "gamma": 1.5},
                                "initial": {"x1": 1.0}}))
    assert parse_config(str(path)).plant.gamma == 1.5


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(v):
    assert float(fmt(v)) == v


def test_jsonable():
    out = jsonable({"a": float("inf"), "b": np.float64(float("nan")), "c": np.arange(2),
                    "d": (np.bool_(True), np.int64(3))})
    assert out == {"a": "inf", "b": "nan", "c": [0, 1], "d": [True, 3]}


def test_csv_round_trip(tmp_path):
    tr = integrate(parse_config("preset: fig4-limit-cycle\nsimulation: {t_end: 0.6}\n")
                   .scenario())
    path = write_trajectory_csv(tr, tmp_path / "t.csv")
    header = path.read_text().splitlines()[0]
    assert header == ",".join(TRAJECTORY_COLUMNS)
    back = read_trajectory_csv(path)
    for col in ("t", "x1", "x2", "u", "f", "z"):
        assert np.array_equal(back[col], getattr(tr, col))
    assert set(back["regime"]) <= {"presliding", "sliding", "none"}
    ev = write_events_csv(tr, tmp_path / "e.csv").read_text().splitlines()
    assert len(ev) == len(tr.events) + 1
    j = write_json({"x": 1.0}, tmp_path / "r.json")
    assert json.loads(j.read_text()) == {"x": 1.0}
