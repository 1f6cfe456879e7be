"""Sectioned key=value run configuration.

Format: ``[section]`` headers, ``key = value`` lines, ``#`` comments, blank
lines ignored.  Unknown sections or keys are errors with line numbers; every
key has a documented default, so the empty config is valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import StepperConfig
from .grid import Grid
from .initial import InitialSpec
from .material import ParameterSet, make_forcing, validate
from .tensor import ElasticTensor


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass
class ExperimentConfig:
    gronwall_c: float = 1.0
    tol_energy: float = 1e-6
    tol_step: float = 1e-10
    delta: float = 1e-3
    seed: int = 7


@dataclass
class RunConfig:
    grid: Grid
    params: ParameterSet
    elastic: ElasticTensor
    stepper: StepperConfig
    initial: InitialSpec
    experiment: ExperimentConfig
    forcing_spec: str = "zero"
    trace_path: str | None = None
    snapshot_dir: str | None = None

    def forcing(self):
        return make_forcing(self.forcing_spec)


_KNOWN = {
    "grid": {"dim", "n", "length", "bc"},
    "material": {
        "lambda", "gamma", "mu1", "mu2", "mu3", "mu4", "mu5", "mu6",
        "epsilon", "forcing", "elastic", "elastic_k", "elastic_entries",
    },
    "stepper": {
        "dt", "t_end", "poisson_tol", "poisson_max_iter", "output_every",
        "theta", "scheme",
    },
    "initial": {"kind", "director", "seed", "amplitude", "v_amplitude"},
    "experiment": {"gronwall_c", "tol_energy", "tol_step", "delta", "seed"},
    "output": {"trace", "snapshots"},
}


def _parse_sections(text: str):
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _KNOWN:
                raise ConfigError(f"unknown section [{current}]", lineno)
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigError("key outside any [section]", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN[current]:
            raise ConfigError(f"unknown key {key!r} in section [{current}]", lineno)
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in section [{current}]", lineno)
        sections[current][key] = (value, lineno)
    return sections


def _get(sections, section, key, default, convert):
    entry = sections.get(section, {}).get(key)
    if entry is None:
        return default
    value, lineno = entry
    try:
        return convert(value)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad value for {section}.{key}: {exc}", lineno)


def _floats(value: str):
    return [float(v) for v in value.replace(",", " ").split()]


def _ints(value: str):
    return [int(v) for v in value.replace(",", " ").split()]


def parse_config(text: str, allow_invalid: bool = False) -> RunConfig:
    sections = _parse_sections(text)

    dim = _get(sections, "grid", "dim", 2, int)
    if dim not in (2, 3):
        raise ConfigError("grid.dim must be 2 or 3")
    n = _get(sections, "grid", "n", [32] * dim, _ints)
    if len(n) == 1:
        n = n * dim
    length = _get(sections, "grid", "length", [1.0] * dim, _floats)
    if len(length) == 1:
        length = length * dim
    if len(n) != dim or len(length) != dim:
        raise ConfigError("grid.n / grid.length must match grid.dim")
    bc = _get(sections, "grid", "bc", "periodic", str)
    try:
        grid = Grid(n=tuple(n), h=tuple(length[i] / n[i] for i in range(dim)), bc=bc)
    except ValueError as exc:
        raise ConfigError(str(exc))

    params = ParameterSet(
        lam=_get(sections, "material", "lambda", 1.0, float),
        gamma=_get(sections, "material", "gamma", 1.0, float),
        mu1=_get(sections, "material", "mu1", 1.0, float),
        mu2=_get(sections, "material", "mu2", 0.5, float),
        mu3=_get(sections, "material", "mu3", 0.5, float),
        mu4=_get(sections, "material", "mu4", 1.0, float),
        mu5=_get(sections, "material", "mu5", 1.0, float),
        mu6=_get(sections, "material", "mu6", 1.0, float),
        epsilon=_get(sections, "material", "epsilon", 0.1, float),
        forcing=_get(sections, "material", "forcing", "zero", str),
    )
    violations = validate(params)
    if violations and not allow_invalid:
        raise ConfigError(
            "material parameters violate: " + "; ".join(violations)
        )

    elastic_kind = _get(sections, "material", "elastic", "isotropic", str)
    if elastic_kind == "isotropic":
        elastic = ElasticTensor.isotropic(_get(sections, "material", "elastic_k", 1.0, float))
    elif elastic_kind == "explicit":
        entries = _get(sections, "material", "elastic_entries", None, _floats)
        if entries is None or len(entries) != 81:
            raise ConfigError("elastic = explicit needs elastic_entries with 81 values")
        try:
            elastic = ElasticTensor.from_entries(entries)
        except ValueError as exc:
            raise ConfigError(str(exc))
    else:
        raise ConfigError(f"material.elastic must be isotropic or explicit, got {elastic_kind!r}")

    try:
        stepper = StepperConfig(
            dt=_get(sections, "stepper", "dt", 5e-4, float),
            t_end=_get(sections, "stepper", "t_end", 0.5, float),
            poisson_tol=_get(sections, "stepper", "poisson_tol", 1e-10, float),
            poisson_max_iter=_get(sections, "stepper", "poisson_max_iter", 500, int),
            output_every=_get(sections, "stepper", "output_every", 1, int),
            theta=_get(sections, "stepper", "theta", 0.3, float),
            scheme=_get(sections, "stepper", "scheme", "semi_implicit_theta", str),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))

    try:
        initial = InitialSpec(
            kind=_get(sections, "initial", "kind", "perturbed", str),
            director=tuple(_get(sections, "initial", "director", [0.0, 0.0, 1.0], _floats)),
            seed=_get(sections, "initial", "seed", 0, int),
            amplitude=_get(sections, "initial", "amplitude", 0.1, float),
            v_amplitude=_get(sections, "initial", "v_amplitude", 0.1, float),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))

    experiment = ExperimentConfig(
        gronwall_c=_get(sections, "experiment", "gronwall_c", 1.0, float),
        tol_energy=_get(sections, "experiment", "tol_energy", 1e-6, float),
        tol_step=_get(sections, "experiment", "tol_step", 1e-10, float),
        delta=_get(sections, "experiment", "delta", 1e-3, float),
        seed=_get(sections, "experiment", "seed", 7, int),
    )

    return RunConfig(
        grid=grid,
        params=params,
        elastic=elastic,
        stepper=stepper,
        initial=initial,
        experiment=experiment,
        forcing_spec=params.forcing,
        trace_path=_get(sections, "output", "trace", None, str),
        snapshot_dir=_get(sections, "output", "snapshots", None, str),
    )


def load_config(path: str, allow_invalid: bool = False) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), allow_invalid=allow_invalid)
