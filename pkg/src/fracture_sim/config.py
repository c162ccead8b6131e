"""JSON scenario files: dataclass schema, defaults and fail-closed validation."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from fracture_sim.engines import SlaConfig, SsConfig
from fracture_sim.errors import ConfigurationError
from fracture_sim.material import MaterialParams, StepFunction


@dataclass(frozen=True)
class Geometry:
    width: float = 0.2
    height: float = 0.3
    nx: int = 40
    ny: int = 30
    depth: float = 0.2


@dataclass(frozen=True)
class StripGeometry:
    width: float = 0.07
    thickness: float = 0.005
    eccentricity: float = 0.05
    rows: int = 1


@dataclass(frozen=True)
class RandomSpec:
    seed: int = 0
    E_min: float = 6300e6
    E_max: float = 7700e6
    patch_w: float = 0.02
    patch_h: float = 0.02
    # every patch gets materials.E_avg instead of a random draw
    constant_E: bool = False


@dataclass(frozen=True)
class EngineSpec:
    type: str = "ss"
    sla: SlaConfig = SlaConfig()
    ss: SsConfig = SsConfig()

    @property
    def config(self):
        return self.sla if self.type == "sla" else self.ss


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    # None -> engine default (every step for SLA, every 10 steps for SS)
    snapshot_every: int | None = None


@dataclass(frozen=True)
class Scenario:
    geometry: Geometry = Geometry()
    strip: StripGeometry = StripGeometry()
    materials: MaterialParams = MaterialParams()
    step_function: StepFunction = StepFunction()
    random: RandomSpec = RandomSpec()
    engine: EngineSpec = EngineSpec()
    output: OutputSpec = OutputSpec()

    def with_seed(self, seed: int) -> "Scenario":
        return dataclasses.replace(self, random=dataclasses.replace(self.random, seed=int(seed)))

    def engine_config(self):
        cfg = self.engine.config
        if self.output.snapshot_every is not None:
            cfg = dataclasses.replace(cfg, snapshot_every=self.output.snapshot_every)
        return cfg

    def to_dict(self) -> dict:
        g = dataclasses.asdict
        sla = g(self.engine.sla)
        ss = g(self.engine.ss)
        for d in (sla, ss):
            d.pop("snapshot_every")
        return {
            "geometry": g(self.geometry),
            "strip": g(self.strip),
            "materials": g(self.materials),
            "step_function": [list(p) for p in self.step_function.breakpoints],
            "random": g(self.random),
            "engine": {"type": self.engine.type, **(sla if self.engine.type == "sla" else ss)},
            "output": g(self.output),
        }


def _build(cls, data: Any, path: str, exclude: tuple[str, ...] = ()):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path or 'scenario'}: expected an object, got {type(data).__name__}")
    names = {f.name: f for f in dataclasses.fields(cls) if f.name not in exclude}
    unknown = sorted(set(data) - set(names))
    if unknown:
        key = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigurationError(f"unknown key '{key}'")
    kwargs = {}
    for name, value in data.items():
        default = getattr(cls(), name) if _has_default(cls) else None
        kwargs[name] = _coerce(value, default, f"{path}.{name}" if path else name)
    try:
        return cls(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path or 'scenario'}: {exc}") from exc
    except TypeError as exc:
        raise ConfigurationError(f"{path or 'scenario'}: {exc}") from exc


def _has_default(cls) -> bool:
    try:
        cls()
        return True
    except Exception:
        return False


def _coerce(value, default, path):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigurationError(f"'{path}' must be true or false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"'{path}' must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"'{path}' must be a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigurationError(f"'{path}' must be a string")
        return value
    if default is None:
        if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigurationError(f"'{path}' must be an integer or null")
        return value
    return value


def _geometry_checks(s: Scenario) -> None:
    g = s.geometry
    for name in ("width", "height", "depth"):
        if not getattr(g, name) > 0:
            raise ConfigurationError(f"'geometry.{name}' must be positive")
    if g.nx < 1 or g.ny < 1:
        raise ConfigurationError("'geometry.nx' and 'geometry.ny' must be >= 1")
    st = s.strip
    for name in ("width", "thickness"):
        if not getattr(st, name) > 0:
            raise ConfigurationError(f"'strip.{name}' must be positive")
    if st.rows < 1:
        raise ConfigurationError("'strip.rows' must be >= 1")
    r = s.random
    if not (r.patch_w > 0 and r.patch_h > 0):
        raise ConfigurationError("'random.patch_w' and 'random.patch_h' must be positive")
    if not (0 < r.E_min <= r.E_max):
        raise ConfigurationError("'random' needs 0 < E_min <= E_max")


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ConfigurationError("scenario must be a JSON object")
    known = {f.name for f in dataclasses.fields(Scenario)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"unknown key '{unknown[0]}'")

    kw: dict[str, Any] = {}
    if "geometry" in data:
        kw["geometry"] = _build(Geometry, data["geometry"], "geometry")
    if "strip" in data:
        kw["strip"] = _build(StripGeometry, data["strip"], "strip")
    if "materials" in data:
        kw["materials"] = _build(MaterialParams, data["materials"], "materials")
    if "step_function" in data:
        bp = data["step_function"]
        if not isinstance(bp, list) or not all(
            isinstance(p, list) and len(p) == 2 and all(isinstance(v, (int, float)) for v in p) for p in bp
        ):
            raise ConfigurationError("'step_function' must be a list of [e_star, E_star] pairs")
        try:
            kw["step_function"] = StepFunction(tuple(tuple(p) for p in bp))
        except ConfigurationError as exc:
            raise ConfigurationError(f"step_function: {exc}") from exc
    if "random" in data:
        kw["random"] = _build(RandomSpec, data["random"], "random")
    if "engine" in data:
        eng = data["engine"]
        if not isinstance(eng, dict):
            raise ConfigurationError("'engine' must be an object")
        etype = eng.get("type", "ss")
        if etype not in ("sla", "ss"):
            raise ConfigurationError(f"'engine.type' must be 'sla' or 'ss', got {etype!r}")
        body = {k: v for k, v in eng.items() if k != "type"}
        cls = SlaConfig if etype == "sla" else SsConfig
        cfg = _build(cls, body, "engine", exclude=("snapshot_every",))
        kw["engine"] = EngineSpec(type=etype, **{etype: cfg})
    if "output" in data:
        kw["output"] = _build(OutputSpec, data["output"], "output")
    scenario = Scenario(**kw)
    _geometry_checks(scenario)
    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(data)


def bundled_scenario(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``paper_sla.json``."""
    return Path(str(resources.files("fracture_sim") / "scenarios" / name))


