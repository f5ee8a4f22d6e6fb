"""Конфигурация конвейеров: единый JSON-документ, разобранный в неизменяемые dataclass-объекты"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path
from typing import Any

import pandas as pd

from stratiwave import axis as ax
from stratiwave import profiles as pr

MODES = ("laminar", "newton", "manufacture")
CHECKS = (
    "pde_residual", "symmetry", "no_stagnation", "flux", "bed", "dynamic", "kinematic", "bernoulli", "analyticity",
    "monotonicity", "moving_plane", "height_residual",
)


class ConfigError(ValueError):
    """Ошибка схемы конфигурации или входных данных"""

    pass


@dataclasses.dataclass(frozen=True)
class Profiles:
    rho: tuple[float, ...] = (1.0,)
    beta: tuple[float, ...] = (0.0,)

    def density(self) -> pr.DensityProfile:
        return pr.DensityProfile(self.rho)

    def bernoulli(self) -> pr.BernoulliFunction:
        return pr.BernoulliFunction(self.beta)


@dataclasses.dataclass(frozen=True)
class Geometry:
    d: float
    g: float = 9.8
    p_atm: float = 0.0


@dataclasses.dataclass(frozen=True)
class AxisSection:
    """Данные на оси: точки (y, u) в самом документе или путь к CSV со столбцами y, u"""

    c: float
    eta0: float
    samples: tuple[tuple[float, float], ...] | None = None
    csv_path: Path | None = None


@dataclasses.dataclass(frozen=True)
class Grid:
    nx: int = 41
    half_width: float | None = None
    nq: int = 64
    np: int = 40


@dataclasses.dataclass(frozen=True)
class Tolerances:
    pde: float = 1e-6
    symmetry: float = 1e-8
    flux: float = 1e-6
    dynamic: float = 1e-6
    bernoulli: float = 1e-4
    monotonicity: float = 1e-12


@dataclasses.dataclass(frozen=True)
class Numerics:
    order: int = 12
    nodes: int = 48
    grid: Grid = Grid()
    tolerances: Tolerances = Tolerances()
    hard_checks: tuple[str, ...] = ("pde_residual", "symmetry", "no_stagnation")
    seed: int = 0


@dataclasses.dataclass(frozen=True)
class Forward:
    Q: float | None = None
    c: float | None = None  # По умолчанию 1 для ламинарного режима и режима Ньютона, 0 для построенной волны
    lam: float = -4.0
    epsilon: float = 0.01
    amplitude: float = 1e-3
    max_iter: int = 15

    def wave_speed(self, mode: str) -> float:
        if self.c is not None:
            return self.c

        return 0.0 if mode == "manufacture" else 1.0


@dataclasses.dataclass(frozen=True)
class Config:
    geometry: Geometry
    profiles: Profiles = Profiles()
    axis: AxisSection | None = None
    numerics: Numerics = Numerics()
    forward: Forward = Forward()
    mode: str | None = None

    def require_axis(self) -> AxisSection:
        if self.axis is None:
            raise ConfigError("missing section: axis")

        return self.axis

    def require_mode(self) -> str:
        if self.mode is None:
            raise ConfigError("missing key: mode")

        return self.mode

    def to_dict(self) -> dict[str, Any]:
        """Документ конфигурации, из которого load_config восстановит тот же объект"""

        document = {
            "profiles": {"rho": list(self.profiles.rho), "beta": list(self.profiles.beta)},
            "geometry": {"d": self.geometry.d, "g": self.geometry.g, "P_atm": self.geometry.p_atm},
            "numerics": {
                "N": self.numerics.order,
                "M": self.numerics.nodes,
                "grid": dataclasses.asdict(self.numerics.grid),
                "tolerances": dataclasses.asdict(self.numerics.tolerances),
                "hard_checks": list(self.numerics.hard_checks),
                "seed": self.numerics.seed,
            },
        }

        if self.axis is not None:
            document["axis"] = {"c": self.axis.c, "eta0": self.axis.eta0}

            if self.axis.csv_path is not None:
                document["axis"]["csv_path"] = str(self.axis.csv_path)
            else:
                document["axis"]["samples"] = [list(sample) for sample in self.axis.samples]

        return document


def load_config(path: Path | str) -> Config:
    """Прочитать и проверить конфигурацию

    Путь csv_path разрешается относительно каталога конфигурации

    Raises:
        ConfigError: Файл не читается или нарушена схема
    """

    path = Path(path)

    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as error:
        raise ConfigError(f"cannot read config {path}: {error}") from error

    return parse_config(document, path.resolve().parent)


def parse_config(document: Any, base_dir: Path) -> Config:
    """Разобрать документ конфигурации

    Raises:
        ConfigError: Нарушена схема, в сообщении указан ключ
    """

    if not isinstance(document, dict):
        raise ConfigError("config must be a JSON object")

    mode = document.get("mode")

    if mode is not None and mode not in MODES:
        raise ConfigError(f"mode: expected one of {list(MODES)}, got {mode!r}")

    geometry_section = _section(document, "geometry", required=True)
    geometry = Geometry(
        _number(geometry_section, "d", "geometry.d"),
        _number(geometry_section, "g", "geometry.g", 9.8),
        _number(geometry_section, "P_atm", "geometry.P_atm", 0.0),
    )

    if not geometry.d > 0:
        raise ConfigError("geometry.d: depth must be positive")

    profiles_section = _section(document, "profiles")
    profiles = Profiles(
        _coefficients(profiles_section, "rho", "profiles.rho", (1.0,)),
        _coefficients(profiles_section, "beta", "profiles.beta", (0.0,)),
    )

    axis = _parse_axis(document["axis"], base_dir) if "axis" in document else None
    numerics = _parse_numerics(_section(document, "numerics"))
    forward_section = _section(document, "forward")
    Q = forward_section.get("Q")
    c = forward_section.get("c")
    forward = Forward(
        None if Q is None else _number(forward_section, "Q", "forward.Q"),
        None if c is None else _number(forward_section, "c", "forward.c"),
        _number(forward_section, "lambda", "forward.lambda", -4.0),
        _number(forward_section, "epsilon", "forward.epsilon", 0.01),
        _number(forward_section, "amplitude", "forward.amplitude", 1e-3),
        _integer(forward_section, "max_iter", "forward.max_iter", 15),
    )

    return Config(geometry, profiles, axis, numerics, forward, mode)


def load_axis(config: Config) -> ax.AxisData:
    """Данные на оси из точек конфигурации или из CSV со столбцами y, u

    Raises:
        ConfigError: Нет секции axis или CSV не читается
    """

    section = config.require_axis()

    if section.csv_path is not None:
        try:
            frame = pd.read_csv(section.csv_path)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as error:
            raise ConfigError(f"cannot read axis samples {section.csv_path}: {error}") from error

        if not {"y", "u"} <= set(frame.columns):
            raise ConfigError(f"axis samples {section.csv_path} need columns y and u")

        y, u = frame["y"].to_numpy(dtype=float), frame["u"].to_numpy(dtype=float)
    else:
        y = [sample[0] for sample in section.samples]
        u = [sample[1] for sample in section.samples]

    geometry = config.geometry

    return ax.AxisData(y, u, section.eta0, section.c, geometry.d, geometry.g, geometry.p_atm)


def _parse_axis(section: Any, base_dir: Path) -> AxisSection:
    if not isinstance(section, dict):
        raise ConfigError("axis: expected an object")

    c = _number(section, "c", "axis.c")
    eta0 = _number(section, "eta0", "axis.eta0")

    if ("samples" in section) == ("csv_path" in section):
        raise ConfigError("axis: exactly one of samples and csv_path is required")

    if "csv_path" in section:
        if not isinstance(section["csv_path"], str):
            raise ConfigError("axis.csv_path: expected a string")

        return AxisSection(c, eta0, csv_path=(base_dir / section["csv_path"]).resolve())

    samples = section["samples"]

    if not isinstance(samples, list) or not all(
            isinstance(sample, list) and len(sample) == 2 and all(_is_number(value) for value in sample)
            for sample in samples):
        raise ConfigError("axis.samples: expected a list of [y, u] pairs")

    return AxisSection(c, eta0, samples=tuple((float(y), float(u)) for y, u in samples))


def _parse_numerics(section: dict) -> Numerics:
    grid_section = _section(section, "grid")
    half_width = grid_section.get("half_width")
    grid = Grid(
        _integer(grid_section, "nx", "numerics.grid.nx", 41),
        None if half_width is None else _number(grid_section, "half_width", "numerics.grid.half_width"),
        _integer(grid_section, "nq", "numerics.grid.nq", 64),
        _integer(grid_section, "np", "numerics.grid.np", 40),
    )

    if grid.nx < 3 or grid.nx % 2 == 0:
        raise ConfigError("numerics.grid.nx: expected an odd integer >= 3")
    elif grid.nq < 4 or grid.nq % 2:
        raise ConfigError("numerics.grid.nq: expected an even integer >= 4")
    elif grid.np < 3:
        raise ConfigError("numerics.grid.np: expected an integer >= 3")
    elif grid.half_width is not None and not grid.half_width > 0:
        raise ConfigError("numerics.grid.half_width: expected a positive number")

    tolerance_section = _section(section, "tolerances")
    defaults = Tolerances()
    tolerances = Tolerances(**{
        field.name: _number(tolerance_section, field.name, f"numerics.tolerances.{field.name}",
                            getattr(defaults, field.name))
        for field in dataclasses.fields(Tolerances)
    })

    hard_checks = section.get("hard_checks", list(Numerics.hard_checks))

    if not isinstance(hard_checks, list) or any(check not in CHECKS for check in hard_checks):
        raise ConfigError(f"numerics.hard_checks: expected names from {list(CHECKS)}")

    numerics = Numerics(
        _integer(section, "N", "numerics.N", 12),
        _integer(section, "M", "numerics.M", 48),
        grid,
        tolerances,
        tuple(hard_checks),
        _integer(section, "seed", "numerics.seed", 0),
    )

    if numerics.order < 3:
        raise ConfigError("numerics.N: expected an integer >= 3")
    elif numerics.nodes < 4:
        raise ConfigError("numerics.M: expected an integer >= 4")

    return numerics


def _section(document: dict, key: str, required: bool = False) -> dict:
    if key not in document:
        if required:
            raise ConfigError(f"missing section: {key}")

        return {}

    section = document[key]

    if not isinstance(section, dict):
        raise ConfigError(f"{key}: expected an object")

    return section


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _number(section: dict, key: str, path: str, default: float | None = None) -> float:
    if key not in section:
        if default is None:
            raise ConfigError(f"missing key: {path}")

        return default

    if not _is_number(section[key]):
        raise ConfigError(f"{path}: expected a finite number")

    return float(section[key])


def _integer(section: dict, key: str, path: str, default: int) -> int:
    value = section.get(key, default)

    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{path}: expected an integer")

    return value


def _coefficients(section: dict, key: str, path: str, default: tuple[float, ...]) -> tuple[float, ...]:
    if key not in section:
        return default

    values = section[key]

    if not isinstance(values, list) or not values or not all(_is_number(value) for value in values):
        raise ConfigError(f"{path}: expected a non-empty list of finite numbers")

    return tuple(float(value) for value in values)
