"""Scenario configuration documents and the built-in preset registry.

A configuration is one YAML (or JSON) document.  Positions in ``initial``
are absolute; the simulated ``x1`` is the error ``position - reference``.
When a ``physical`` block is present the plant gains are read in the
voltage domain (``k``, ``c``, ``gamma``) and newtons (``c_f``) and are
translated to the unit-mass plant with ``u = tau / m * V``.
"""

from __future__ import annotations

import copy
import dataclasses
import math
import types
from dataclasses import dataclass, fields

import yaml

from .errors import ConfigError, FrictionCompError
from .friction import FrictionModel, FrictionParams
from .integrator import Scenario
from .plant import PlantParams, SystemState


@dataclass(frozen=True)
class PlantConfig:
    k: float = 0.0
    c: float = 0.0
    c_f: float = 1.0
    gamma: float = 0.0
    f_bound: float = 0.0
    actuator_lag: float | None = None
    friction_model: str = "discontinuous"
    s: float | None = None


@dataclass(frozen=True)
class InitialConfig:
    x1: float = 0.0
    x2: float = 0.0


@dataclass(frozen=True)
class SimulationConfig:
    t_end: float = 10.0
    dt_max: float = 1e-3
    event_tol: float = 1e-10
    convergence_radius: float = 1e-6
    convergence_norm: str = "plain"
    rtol: float = 1e-10
    atol: float = 1e-13
    rest_tol: float = 1e-9


@dataclass(frozen=True)
class PhysicalConfig:
    mass: float
    force_constant: float
    voltage_limit: float | None = None


@dataclass(frozen=True)
class OutputsConfig:
    trajectory_csv: bool = True
    events_csv: bool = True
    report: bool = True
    plot: bool = False


@dataclass(frozen=True)
class AnalysisConfig:
    window_fraction: float = 0.2
    rel_tol: float = 0.01
    sweep_ratios: tuple | None = None
    sweep_workers: int | None = None
    search_interval: tuple = (1.001, 3.0)
    tail_fraction: float = 0.5


@dataclass(frozen=True)
class ScenarioConfig:
    plant: PlantConfig
    initial: InitialConfig = InitialConfig()
    simulation: SimulationConfig = SimulationConfig()
    reference: float = 0.0
    physical: PhysicalConfig | None = None
    outputs: OutputsConfig = OutputsConfig()
    analysis: AnalysisConfig = AnalysisConfig()
    preset: str | None = None

    def plant_params(self):
        pc = self.plant
        k, c, gamma, c_f = pc.k, pc.c, pc.gamma, pc.c_f
        f_bound = pc.f_bound
        if self.physical is not None:
            ph = self.physical
            gain = ph.force_constant / ph.mass
            k, c, gamma = k * gain, c * gain, gamma * gain
            c_f, f_bound = c_f / ph.mass, f_bound / ph.mass
        model = FrictionModel(pc.friction_model)
        try:
            fr = FrictionParams(c_f=c_f, s=pc.s, model=model)
            return PlantParams(k=k, c=c, friction=fr, gamma=gamma, f_bound=f_bound,
                               actuator_lag=pc.actuator_lag)
        except FrictionCompError as exc:
            raise ConfigError(f"invalid plant: {exc}", field="plant") from exc

    def scenario(self):
        sim = self.simulation
        x0 = SystemState(x1=self.initial.x1 - self.reference, x2=self.initial.x2)
        plant = self.plant_params()
        try:
            return Scenario(plant=plant, x0=x0, t_end=sim.t_end,
                            dt_max=sim.dt_max, event_tol=sim.event_tol,
                            convergence_radius=sim.convergence_radius,
                            convergence_norm=sim.convergence_norm, rtol=sim.rtol,
                            atol=sim.atol, rest_tol=sim.rest_tol)
        except FrictionCompError as exc:
            raise ConfigError(f"invalid simulation settings: {exc}",
                              field="simulation") from exc


_SECTIONS = {
    "plant": PlantConfig,
    "initial": InitialConfig,
    "simulation": SimulationConfig,
    "physical": PhysicalConfig,
    "outputs": OutputsConfig,
    "analysis": AnalysisConfig,
}


def _lab(ref, gamma):
    return {
        "plant": {"k": 5600.0, "c": 150.0, "c_f": 1.148, "gamma": gamma},
        "initial": {"x1": 0.0, "x2": 0.0},
        "reference": ref,
        "simulation": {"t_end": 1.0},
        "analysis": {"window_fraction": 0.2},
    }


_PRESETS = {
    "lab-2mm": _lab(0.002, 0.0),
    "lab-4mm": _lab(0.004, 0.0),
    "lab-6mm": _lab(0.006, 0.0),
    "lab-2mm-relay": _lab(0.002, 1.214),
    "lab-4mm-relay": _lab(0.004, 1.214),
    "lab-6mm-relay": _lab(0.006, 1.214),
    "fig4-limit-cycle": {
        "plant": {"k": 0.0, "c": 0.0, "c_f": 50.0, "s": 500.0, "gamma": 60.0,
                  "friction_model": "presliding"},
        "initial": {"x1": 1.0, "x2": 0.0},
        # the oscillation keeps contracting; do not stop at a small ball
        "simulation": {"t_end": 1.5, "convergence_radius": 0.0},
    },
    "twisting-baseline": {
        "plant": {"k": 0.0, "c": 0.0, "c_f": 1.0, "gamma": 1.5},
        "initial": {"x1": 1.0, "x2": 0.0},
        "simulation": {"t_end": 60.0},
        "analysis": {"sweep_ratios": [round(1.05 + 0.05 * i, 10) for i in range(40)],
                     "search_interval": [1.001, 3.0]},
    },
    "twisting-lag": {
        "plant": {"k": 0.0, "c": 0.0, "c_f": 1.0, "gamma": 1.5, "actuator_lag": 0.05},
        "initial": {"x1": 0.01, "x2": 0.0},
        "simulation": {"t_end": 40.0},
    },
}


def _freeze(obj):
    if isinstance(obj, dict):
        return types.MappingProxyType({k: _freeze(v) for k, v in obj.items()})
    if isinstance(obj, list):
        return tuple(_freeze(v) for v in obj)
    return obj


def _thaw(obj):
    if isinstance(obj, types.MappingProxyType | dict):
        return {k: _thaw(v) for k, v in obj.items()}
    if isinstance(obj, tuple | list):
        return [_thaw(v) for v in obj]
    return obj


PRESETS = types.MappingProxyType({k: _freeze(v) for k, v in _PRESETS.items()})


def preset_names():
    return sorted(PRESETS)


def preset_document(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(preset_names())}",
                          field="preset")
    doc = _thaw(PRESETS[name])
    doc["preset"] = name
    return doc


def _merge(base, over):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _number(val, name, allow_none=False):
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, int | float):
        raise ConfigError(f"{name} must be a number, got {val!r}", field=name)
    val = float(val)
    if math.isnan(val):
        raise ConfigError(f"{name} must not be NaN", field=name)
    return val


def _build(cls, data, prefix):
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix} must be a mapping", field=prefix)
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        name = f"{prefix}.{unknown[0]}"
        raise ConfigError(f"unknown field {name!r}", field=name)
    kwargs = {}
    for key, val in data.items():
        name = f"{prefix}.{key}"
        default = known[key].default
        if key in ("sweep_ratios", "search_interval"):
            if val is None:
                kwargs[key] = None
                continue
            if isinstance(val, dict):
                val = _ratio_range(val, name)
            if not isinstance(val, list | tuple) or not val:
                raise ConfigError(f"{name} must be a non-empty list", field=name)
            kwargs[key] = tuple(_number(v, name) for v in val)
        elif key in ("friction_model", "convergence_norm"):
            kwargs[key] = str(val)
        elif key == "sweep_workers":
            if val is not None and (isinstance(val, bool) or not isinstance(val, int)):
                raise ConfigError(f"{name} must be an integer", field=name)
            kwargs[key] = val
        elif isinstance(default, bool):
            if not isinstance(val, bool):
                raise ConfigError(f"{name} must be true or false", field=name)
            kwargs[key] = val
        else:
            kwargs[key] = _number(val, name, allow_none=default is None)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{prefix}: {exc}", field=prefix) from exc


def _ratio_range(spec, name):
    extra = set(spec) - {"start", "stop", "step"}
    if extra or not {"start", "stop", "step"} <= set(spec):
        raise ConfigError(f"{name} range needs start, stop, step", field=name)
    start, stop, step = (_number(spec[k], name) for k in ("start", "stop", "step"))
    if not step > 0:
        raise ConfigError(f"{name}.step must be positive", field=name)
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(max(n, 0))]


def _validate(cfg):
    pc = cfg.plant
    if pc.friction_model not in [m.value for m in FrictionModel]:
        raise ConfigError(f"plant.friction_model must be one of "
                          f"{[m.value for m in FrictionModel]}", field="plant.friction_model")
    if cfg.simulation.convergence_norm not in ("plain", "energy"):
        raise ConfigError("simulation.convergence_norm must be 'plain' or 'energy'",
                          field="simulation.convergence_norm")
    ph = cfg.physical
    if ph is not None:
        if not ph.mass > 0:
            raise ConfigError("physical.mass must be > 0", field="physical.mass")
        if not ph.force_constant > 0:
            raise ConfigError("physical.force_constant must be > 0",
                              field="physical.force_constant")
        if ph.voltage_limit is not None:
            if not ph.voltage_limit > 0:
                raise ConfigError("physical.voltage_limit must be > 0",
                                  field="physical.voltage_limit")
            if pc.gamma > ph.voltage_limit:
                raise ConfigError(f"relay amplitude {pc.gamma} V exceeds the voltage limit",
                                  field="plant.gamma")
    an = cfg.analysis
    if not 0 < an.window_fraction < 1:
        raise ConfigError("analysis.window_fraction must lie in (0, 1)",
                          field="analysis.window_fraction")
    if not 0 < an.tail_fraction < 1:
        raise ConfigError("analysis.tail_fraction must lie in (0, 1)",
                          field="analysis.tail_fraction")
    if len(an.search_interval) != 2:
        raise ConfigError("analysis.search_interval needs two values",
                          field="analysis.search_interval")
    cfg.scenario()  # plant and simulation invariants


def from_document(doc, preset=None):
    """Validate a parsed document (a dict), merging it over its preset."""
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a mapping at the top level")
    name = preset if preset is not None else doc.get("preset")
    if name is not None:
        base = preset_document(name)
        doc = _merge(base, {k: v for k, v in doc.items() if k != "preset"})
        doc["preset"] = name
    if not doc or set(doc) <= {"preset"}:
        raise ConfigError("empty configuration and no preset")
    top = {f.name for f in fields(ScenarioConfig)}
    unknown = sorted(set(doc) - top)
    if unknown:
        raise ConfigError(f"unknown field {unknown[0]!r}", field=unknown[0])
    if "plant" not in doc:
        raise ConfigError("missing plant section", field="plant")
    kwargs = {}
    for key, cls in _SECTIONS.items():
        if key in doc and doc[key] is not None:
            kwargs[key] = _build(cls, doc[key], key)
    if "reference" in doc:
        kwargs["reference"] = _number(doc["reference"], "reference")
    if doc.get("preset") is not None:
        kwargs["preset"] = str(doc["preset"])
    cfg = ScenarioConfig(**kwargs)
    _validate(cfg)
    return cfg


def parse_config(source, preset=None):
    """Parse a configuration from a path or from document text."""
    text = source
    if hasattr(source, "read_text"):
        text = source.read_text()
    elif isinstance(source, str) and "\n" not in source and source.endswith(
            (".yaml", ".yml", ".json")):
        try:
            with open(source) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {source}: {exc}") from exc
    try:
        doc = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed document: {exc}") from exc
    return from_document(doc, preset=preset)


def to_document(cfg):
    def conv(obj):
        if dataclasses.is_dataclass(obj):
            return {f.name: conv(getattr(obj, f.name)) for f in fields(obj)}
        if isinstance(obj, tuple):
            return [conv(v) for v in obj]
        return obj
    doc = conv(cfg)
    if doc.get("physical") is None:
        doc.pop("physical", None)
    if doc.get("preset") is None:
        doc.pop("preset", None)
    return doc


def serialize(cfg):
    return yaml.safe_dump(to_document(cfg), sort_keys=True)

