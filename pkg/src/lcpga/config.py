"""JSON run configuration with strict key checking.

Every section is a dataclass whose defaults reproduce the reference setup;
unknown keys anywhere are rejected with the dotted path of the offending key.
"""
from __future__ import annotations

import json
import typing
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError
from .evolver import ControlProblem, GaConfig, GeneBounds
from .model import Absorber, MolecularModel, build_grid
from .observables import FitnessConfig
from .pulse import PARAM_NAMES

COUPLING_REGIMES = {"intermediate": 0.003, "strong": 0.0075}


@dataclass
class AbsorberSection:
    enabled: bool = True
    r_start: float = 8.6
    r_end: float = 11.165625
    strength: float = 0.08
    power: float = 3.0


@dataclass
class ModelSection:
    mass: float = 1836.0
    de: float = 0.075
    omega_e: float = 0.0077782
    r_e: float = 4.125
    slope2: float = -0.008681
    slope3: float = -0.01736
    offset2: float = 0.1805
    offset3: float = 0.2
    wall_c: float = 0.25
    wall_d: float = 5.0
    r_ref: float = 3.15
    mu: float = 0.2
    dipole_a: float = 5.0
    r_x: float = 5.25
    coupling_regime: str = "intermediate"
    coupling_amplitude: float = 0.003
    interaction_prefactor: float = 1.0
    absorber: AbsorberSection = field(default_factory=AbsorberSection)


@dataclass
class GridSection:
    r_min: float = 0.9
    dr: float = 4.6875e-2
    n_r: int = 220


@dataclass
class TimeSection:
    dt_full: float = 0.1875
    n_steps: int = 8192


@dataclass
class DetectorSection:
    r_d: float = 8.4


@dataclass
class InitialStateSection:
    center: float = 4.125
    width: float = 0.265
    channel: int = 3


def _default_bounds() -> dict[str, list[float]]:
    b = GeneBounds()
    return {name: [lo, hi] for name, lo, hi in zip(PARAM_NAMES, b.lower, b.upper)}


@dataclass
class GaSection:
    n_lcp: int = 30
    pop_size: int = 64
    n_generations: int = 100
    pi_m: float = 0.1
    pi_x: float = 0.8
    seed: int = 0
    elitism: bool = True
    bounds: dict[str, list[float]] = field(default_factory=_default_bounds)


@dataclass
class FitnessSection:
    alpha_fluence: float = 0.0
    epsilon_floor: float = 1e-8


@dataclass
class OutputSection:
    dir: str = "out"
    stride: int = 16


@dataclass
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    grid: GridSection = field(default_factory=GridSection)
    time: TimeSection = field(default_factory=TimeSection)
    detector: DetectorSection = field(default_factory=DetectorSection)
    initial_state: InitialStateSection = field(default_factory=InitialStateSection)
    ga: GaSection = field(default_factory=GaSection)
    fitness: FitnessSection = field(default_factory=FitnessSection)
    output: OutputSection = field(default_factory=OutputSection)

    # -- conversion to domain objects -------------------------------------

    def molecular_model(self) -> MolecularModel:
        m = self.model
        if m.coupling_regime == "custom":
            amplitude = m.coupling_amplitude
        else:
            amplitude = COUPLING_REGIMES[m.coupling_regime]
        ab = m.absorber
        absorber = Absorber(ab.r_start, ab.r_end, ab.strength, ab.power) if ab.enabled else None
        kwargs = {f.name: getattr(m, f.name) for f in fields(m)
                  if f.name not in ("coupling_regime", "coupling_amplitude", "absorber")}
        return MolecularModel(coupling_amplitude=amplitude, absorber=absorber, **kwargs)

    def spatial_grid(self):
        return build_grid(self.grid.r_min, self.grid.dr, self.grid.n_r)

    def fitness_config(self) -> FitnessConfig:
        return FitnessConfig(self.fitness.alpha_fluence, self.fitness.epsilon_floor)

    def ga_config(self) -> GaConfig:
        g = self.ga
        bounds = GeneBounds(
            tuple(float(g.bounds[n][0]) for n in PARAM_NAMES),
            tuple(float(g.bounds[n][1]) for n in PARAM_NAMES),
        )
        return GaConfig(g.n_lcp, g.pop_size, g.n_generations, g.pi_m, g.pi_x, g.seed, g.elitism, bounds)

    def problem(self) -> ControlProblem:
        s = self.initial_state
        return ControlProblem.build(
            model=self.molecular_model(),
            grid=self.spatial_grid(),
            dt_full=self.time.dt_full,
            n_steps=self.time.n_steps,
            r_detector=self.detector.r_d,
            center=s.center,
            width=s.width,
            channel=s.channel,
            fitness_cfg=self.fitness_config(),
        )

    # -- validation and serialization -------------------------------------

    def validate(self) -> "RunConfig":
        m = self.model
        if m.coupling_regime not in (*COUPLING_REGIMES, "custom"):
            raise ConfigError("model.coupling_regime", "expected intermediate, strong or custom")
        if m.coupling_regime != "custom" and m.coupling_amplitude != COUPLING_REGIMES[m.coupling_regime]:
            raise ConfigError(
                "model.coupling_amplitude",
                f"conflicts with regime '{m.coupling_regime}'; use coupling_regime='custom'",
            )
        for key in ("mass", "de"):
            if not getattr(m, key) > 0:
                raise ConfigError(f"model.{key}", "must be positive")
        if m.absorber.enabled and not m.absorber.r_end > m.absorber.r_start:
            raise ConfigError("model.absorber.r_end", "must exceed r_start")
        if not self.grid.dr > 0:
            raise ConfigError("grid.dr", "must be positive")
        if self.grid.n_r < 8:
            raise ConfigError("grid.n_r", "need at least 8 points")
        if not self.time.dt_full > 0:
            raise ConfigError("time.dt_full", "must be positive")
        if self.time.n_steps < 1:
            raise ConfigError("time.n_steps", "must be positive")
        grid = self.spatial_grid()
        det = grid.nearest_index(self.detector.r_d)
        if not 4 <= det < grid.n_r - 4 or abs(grid.r[det] - self.detector.r_d) > grid.dr / 2:
            raise ConfigError("detector.r_d", "must lie inside the grid, clear of the edges")
        if self.initial_state.channel not in (1, 2, 3):
            raise ConfigError("initial_state.channel", "must be 1, 2 or 3")
        if set(self.ga.bounds) != set(PARAM_NAMES):
            raise ConfigError("ga.bounds", f"need exactly the keys {list(PARAM_NAMES)}")
        for name, pair in self.ga.bounds.items():
            if len(pair) != 2 or not all(isinstance(v, (int, float)) for v in pair) or pair[0] > pair[1]:
                raise ConfigError(f"ga.bounds.{name}", "expected [lower, upper] with lower <= upper")
        if self.output.stride < 1:
            raise ConfigError("output.stride", "must be >= 1")
        self.ga_config().validate()
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _check_value(value: Any, tp: Any, key: str) -> Any:
    origin = typing.get_origin(tp)
    if is_dataclass(tp):
        return _build(tp, value, key)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, "expected true or false")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, "expected an integer")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, "expected a number")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(key, "expected a string")
        return value
    if origin is dict:
        # only dict[str, list[float]] occurs (gene bounds)
        if not isinstance(value, dict):
            raise ConfigError(key, "expected an object")
        out = {}
        for k, v in value.items():
            if not isinstance(v, list):
                raise ConfigError(f"{key}.{k}", "expected a list of numbers")
            out[k] = [_check_value(x, float, f"{key}.{k}") for x in v]
        return out
    raise ConfigError(key, f"unsupported type {tp}")


def _build(cls, data: Any, prefix: str = ""):
    if not isinstance(data, dict):
        raise ConfigError(prefix or "<root>", "expected an object")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(f"{prefix}.{key}" if prefix else key, "unknown key")
    kwargs = {}
    for name in names:
        if name in data:
            kwargs[name] = _check_value(data[name], hints[name], f"{prefix}.{name}" if prefix else name)
    return cls(**kwargs)


def parse_config(data: dict) -> RunConfig:
    return _build(RunConfig, data).validate()


def loads_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"line {exc.lineno}: {exc.msg}") from exc
    return parse_config(data)


def load_config(path: Optional[str | Path]) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from exc
    return loads_config(text)
