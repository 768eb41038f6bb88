"""Named scenarios, sweep specifications and their YAML file format.

A scenario file looks like::

    name: my-run
    growth:            # Monod law
      kind: monod
      mu_max: 0.096    # 1/h
      k_s: 11.27       # g/L
    params:
      K_H: 0.176       # 1/h
      alpha: 0.2       # -
      k_d: 0.048       # 1/h
      Y_Bs: 1.19       # g/g
      inv_Y_Ps: 0.2    # g/g (reciprocal yield 1/Y_P/s)
      m_s: 0.0047      # 1/h
      m_P: 0.002       # 1/h
    initial: {X: 45, B: 15, s: 50, P: 0}   # g/L
    config: {h: 0.01, t_end: 2000}         # h

A file may instead start from a built-in scenario with ``base: validation-1``
and override any of the sections. Sweep files add a ``sweep`` section::

    base: validation-1
    sweep:
      parameter: initial.X
      values: [45, 90, 180, 360]
      labels: [X0=45, X0=90, X0=180, X0=360]   # optional
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .integrator import SimulationConfig
from .kinetics import DomainError, ModelParams, Monod, State


class ScenarioError(ValueError):
    """Malformed scenario or sweep description."""


GROWTH_LAWS = {"monod": Monod}
CONFIG_KEYS = {f.name for f in dataclasses.fields(SimulationConfig)} - {"initial"}


@dataclass(frozen=True)
class Scenario:
    name: str
    params: ModelParams
    initial: State
    config: dict[str, Any] = field(default_factory=dict)  # SimulationConfig overrides

    def __post_init__(self):
        object.__setattr__(self, "initial", State(*map(float, self.initial)))
        self.initial.check_nonnegative()
        unknown = set(self.config) - CONFIG_KEYS
        if unknown:
            raise ScenarioError(f"scenario {self.name!r}: unknown config keys {sorted(unknown)}")

    def simulation_config(self, **overrides) -> SimulationConfig:
        return SimulationConfig(initial=self.initial, **{**self.config, **overrides})


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    parameter: str
    values: tuple[float, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if len(self.values) < 1:
            raise ScenarioError("sweep needs at least one value")
        if self.labels is not None and len(self.labels) != len(self.values):
            raise ScenarioError("sweep labels and values differ in length")
        # fails early on an invalid path
        with_override(self.base, self.parameter, self.values[0])

    def scenarios(self) -> list[Scenario]:
        labels = self.labels or [f"{self.base.name}[{self.parameter}={v:g}]" for v in self.values]
        if len(set(labels)) != len(labels):
            raise ScenarioError("sweep labels must be unique")
        return [
            dataclasses.replace(with_override(self.base, self.parameter, v), name=label)
            for v, label in zip(self.values, labels)
        ]


def with_override(scenario: Scenario, path: str, value: float) -> Scenario:
    """Copy of ``scenario`` with one dotted-path quantity replaced.

    Paths: ``initial.<X|B|s|P>``, ``params.<coefficient>``,
    ``params.growth.<field>`` (or ``growth.<field>``), ``config.<key>``.
    """
    parts = path.split(".")
    if parts[0] == "growth":
        parts = ["params"] + parts
    try:
        if parts[0] == "initial" and len(parts) == 2 and parts[1] in State._fields:
            return dataclasses.replace(scenario, initial=scenario.initial._replace(**{parts[1]: value}))
        if parts[0] == "params" and len(parts) == 2 and parts[1] != "growth":
            if parts[1] not in {f.name for f in dataclasses.fields(ModelParams)}:
                raise ScenarioError(f"unknown parameter {parts[1]!r}")
            return dataclasses.replace(scenario, params=dataclasses.replace(scenario.params, **{parts[1]: value}))
        if parts[:2] == ["params", "growth"] and len(parts) == 3:
            growth = scenario.params.growth
            if parts[2] not in {f.name for f in dataclasses.fields(growth)}:
                raise ScenarioError(f"unknown growth-law field {parts[2]!r}")
            growth = dataclasses.replace(growth, **{parts[2]: value})
            return dataclasses.replace(scenario, params=dataclasses.replace(scenario.params, growth=growth))
        if parts[0] == "config" and len(parts) == 2 and parts[1] in CONFIG_KEYS:
            return dataclasses.replace(scenario, config={**scenario.config, parts[1]: value})
    except DomainError as exc:
        raise ScenarioError(f"{path}={value!r}: {exc}") from exc
    raise ScenarioError(f"invalid parameter path {path!r}")


# Reference parameter sets (units: 1/h, g/L, g/g).
BASELINE_PARAMS = ModelParams(
    K_H=0.176, alpha=0.2, k_d=0.048, Y_Bs=1.19, inv_Y_Ps=0.2, m_s=0.0047, m_P=0.002,
    growth=Monod(mu_max=0.096, k_s=11.27),
)
# The second validation set gives no mortality rate; it reuses k_d from BASELINE_PARAMS.
VALIDATION_2_PARAMS = dataclasses.replace(BASELINE_PARAMS, growth=Monod(mu_max=0.2, k_s=35.55))
KD_SWEEP_BASE = dataclasses.replace(BASELINE_PARAMS, growth=Monod(mu_max=0.2, k_s=11.27))

BUILTIN_SCENARIOS = {
    s.name: s
    for s in (
        Scenario("validation-1", BASELINE_PARAMS, State(45, 15, 50, 0)),
        Scenario("validation-2", VALIDATION_2_PARAMS, State(17, 5, 9.5, 1.5)),
        Scenario("kd-base", KD_SWEEP_BASE, State(45, 15, 50, 0)),
        Scenario("no-biomass", BASELINE_PARAMS, State(45, 0, 50, 0)),
    )
}

BUILTIN_SWEEPS = {
    "x0-sweep": SweepSpec(
        BUILTIN_SCENARIOS["validation-1"], "initial.X", (45.0, 90.0, 180.0, 360.0),
        ("X0=45", "X0=90", "X0=180", "X0=360"),
    ),
    "kd-sweep": SweepSpec(
        BUILTIN_SCENARIOS["kd-base"], "params.k_d", (0.03, 0.09, 0.12, 0.18),
        ("kd=0.03", "kd=0.09", "kd=0.12", "kd=0.18"),
    ),
}


def _section(data: dict, key: str) -> dict:
    v = data.get(key) or {}
    if not isinstance(v, dict):
        raise ScenarioError(f"section {key!r} must be a mapping")
    return v


def scenario_from_dict(data: dict, default_name: str = "scenario") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario document must be a mapping")
    base = None
    if "base" in data:
        base = BUILTIN_SCENARIOS.get(data["base"])
        if base is None:
            raise ScenarioError(f"unknown base scenario {data['base']!r}")
    try:
        growth_d = dict(_section(data, "growth"))
        if base is not None:
            g = base.params.growth
            growth_d = {"kind": g.kind, **dataclasses.asdict(g), **growth_d}
        kind = growth_d.pop("kind", "monod")
        if kind not in GROWTH_LAWS:
            raise ScenarioError(f"unknown growth law {kind!r}")
        growth = GROWTH_LAWS[kind](**growth_d)

        params_d = _section(data, "params")
        if base is not None:
            params_d = {**base.params.coefficients(), **params_d}
        params = ModelParams(**params_d, growth=growth)

        initial_d = _section(data, "initial")
        if base is not None:
            initial_d = {**base.initial._asdict(), **initial_d}
        initial = State(**initial_d)

        config = _section(data, "config")
        if base is not None:
            config = {**base.config, **config}
        return Scenario(str(data.get("name", default_name)), params, initial, dict(config))
    except TypeError as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc
    except DomainError as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(ref: str) -> Scenario:
    """Built-in scenario name or path to a YAML scenario file."""
    if ref in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[ref]
    data = _read_yaml(ref)
    return scenario_from_dict(data, default_name=Path(ref).stem)


def sweep_from_dict(data: dict, default_name: str = "sweep") -> SweepSpec:
    if not isinstance(data, dict) or "sweep" not in data:
        raise ScenarioError("sweep document needs a 'sweep' section")
    sweep = _section(data, "sweep")
    scenario_part = {k: v for k, v in data.items() if k != "sweep"}
    base = scenario_from_dict(scenario_part, default_name=default_name)
    try:
        values = tuple(float(v) for v in sweep["values"])
        parameter = str(sweep["parameter"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed sweep section: {exc}") from exc
    labels = sweep.get("labels")
    return SweepSpec(base, parameter, values, tuple(map(str, labels)) if labels else None)


def load_sweep(ref: str) -> SweepSpec:
    """Built-in sweep name (``x0-sweep``, ``kd-sweep``) or path to a YAML sweep file."""
    if ref in BUILTIN_SWEEPS:
        return BUILTIN_SWEEPS[ref]
    return sweep_from_dict(_read_yaml(ref), default_name=Path(ref).stem)


def _read_yaml(ref: str):
    path = Path(ref)
    if not path.is_file():
        raise ScenarioError(f"no built-in named {ref!r} and no such file")
    # OSError propagates as an I/O failure
    with path.open() as fh:
        try:
            return yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
