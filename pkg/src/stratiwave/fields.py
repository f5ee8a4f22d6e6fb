"""Физические поля по восстановленному ряду psi: скорость, давление, постоянная Бернулли, свободная поверхность

Формулы
- u = c + psi_y / sqrt(rho(-psi)), v = -psi_x / sqrt(rho(-psi))
- Q = rho(0) * (u(0, eta0) - c)^2 + 2 * g * rho(0) * (eta0 + d), условие на поверхности в точке гребня, где v = 0
- E(psi) = E|eta - B(psi), B - первообразная beta, E|eta = Q/2 + P_atm - g * rho(0) * d
- P = E - rho/2 * ((u - c)^2 + v^2) - g * y * rho
- Поверхность eta(x) - корень psi(x, y) = 0 по y на отрезке [-d, eta0], единственный, так как psi_y < 0

Заполнение сетки выполняется по столбцам x, столбцы независимы и считаются параллельно
"""

from __future__ import annotations

import logging
import multiprocessing as mp
import os
from pathlib import Path
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy import optimize

from stratiwave import axis as ax
from stratiwave import profiles as pr
from stratiwave import recovery as rc
from stratiwave import series as sr
from stratiwave.algorithms import chebyshev as ch

_SURFACE_TOLERANCE = 1e-12  # Допустимое |psi| в точке поверхности, в долях max(1, ||a_0||)
_ROOT_XTOL = 1e-15  # Абсолютная точность корня по y
_SURFACE_MARGIN = 1e-12  # Зазор над поверхностью в долях высоты слоя
_ABOVE_SURFACE = 1e-9  # Допуск psi < 0 для точек на поверхности, в долях max(1, |p0|)
_FLUX_STATIONS = 9  # Количество сечений проверки расхода
_FIELD_POINTS = 41  # Количество узлов по x в сетке поля
_SLOPE_STEP = 1e-4  # Шаг центральной разности для eta'(x)
_FLOAT_FORMAT = "%.17g"  # 17 значащих цифр в CSV

FIELD_COLUMNS = ("x", "y", "psi", "u", "v", "P", "E")
SURFACE_COLUMNS = ("x", "eta")

logger = logging.getLogger(__name__)


class SurfaceEscapeError(ValueError):
    """Нет смены знака psi на отрезке [-d, eta0], точка вне восстановленной области"""

    pass


def compute_head(axis: ax.AxisData, rho: pr.DensityProfile) -> float:
    """Постоянная Бернулли Q по данным на оси"""

    density = rho.surface_density()
    relative = float(axis.velocity(axis.eta0)) - axis.c

    return density * relative ** 2 + 2 * axis.g * density * (axis.eta0 + axis.d)


def wave_parameters(axis: ax.AxisData, rho: pr.DensityProfile, p0: float) -> ax.WaveParameters:
    """Собрать параметры волны из данных на оси и найденного p0"""

    return ax.WaveParameters(axis.c, axis.d, axis.g, axis.p_atm, p0, compute_head(axis, rho))


def surface_height(psi: sr.EvenSeries, x: float) -> float:
    """Высота поверхности eta(x): корень psi(x, y) = 0 по y

    Корень ищется методом Брента (бисекция с секущими) на отрезке ряда [-d, eta0]

    Raises:
        SurfaceEscapeError: Нет смены знака на отрезке
    """

    lower, upper = psi.domain
    top = sr.evaluate_series(psi, x, upper)

    if abs(top) <= _SURFACE_TOLERANCE * max(1.0, psi[0].sup_norm()):
        return upper

    bottom = sr.evaluate_series(psi, x, lower)

    if not bottom > 0 > top:
        raise SurfaceEscapeError(f"no free surface crossing at x = {x:.17g}")

    return float(optimize.brentq(lambda y: sr.evaluate_series(psi, x, y), lower, upper, xtol=_ROOT_XTOL))


class Surface(NamedTuple):
    """Выборка свободной поверхности"""

    x: np.ndarray
    eta: np.ndarray


def recover_surface(psi: sr.EvenSeries, xs: np.ndarray | list[float]) -> Surface:
    """Высоты поверхности eta(x) в точках xs"""

    xs = np.asarray(xs, dtype=float)

    return Surface(xs, np.array([surface_height(psi, x) for x in xs]))


def _velocity(
        psi: sr.EvenSeries, rho: pr.DensityProfile, params: ax.WaveParameters, x: float | np.ndarray,
        y: float | np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Скорости u, v и значение psi без проверки положения точки"""

    value = sr.evaluate_series(psi, x, y)
    psi_x, psi_y = sr.evaluate_gradient(psi, x, y)
    root = np.sqrt(rho(-value))

    return params.c + psi_y / root, -psi_x / root, value


def _check_inside(value: float | np.ndarray, params: ax.WaveParameters) -> None:
    if np.any(np.asarray(value) < -_ABOVE_SURFACE * max(1.0, abs(params.p0))):
        raise sr.DomainError("point above the free surface")


def reconstruct_velocity(
        psi: sr.EvenSeries, rho: pr.DensityProfile, params: ax.WaveParameters, x: float, y: float
) -> tuple[float, float]:
    """Скорость (u, v) в точке жидкости

    Raises:
        DomainError: Точка выше свободной поверхности или вне отрезка ряда
    """

    u, v, value = _velocity(psi, rho, params, x, y)
    _check_inside(value, params)

    return float(u), float(v)


def surface_energy(params: ax.WaveParameters, rho: pr.DensityProfile) -> float:
    """E|eta = Q/2 + P_atm - g * rho(0) * d"""

    return params.Q / 2 + params.p_atm - params.g * rho.surface_density() * params.d


def reconstruct_pressure(
        psi: sr.EvenSeries, rho: pr.DensityProfile, beta: pr.BernoulliFunction, params: ax.WaveParameters,
        x: float, y: float
) -> float:
    """Давление P в точке жидкости по закону Бернулли

    Raises:
        DomainError: Точка выше свободной поверхности или вне отрезка ряда
    """

    u, v, value = _velocity(psi, rho, params, x, y)
    _check_inside(value, params)
    density = rho(-value)
    energy = surface_energy(params, rho) - beta.primitive(value)

    return float(energy - density / 2 * ((u - params.c) ** 2 + v ** 2) - params.g * y * density)


class FluidField:
    """Поля psi, u, v, P, E на сетке (x, y) и выборка свободной поверхности

    Точки выше поверхности хранятся как NaN

    Attributes:
        _x: Узлы по x, симметричные относительно 0
        _y: Узлы по y по возрастанию
        _grids: Словарь матриц len(y) x len(x) по именам psi, u, v, P, E
        _surface: Выборка поверхности
        _params: Параметры волны
    """

    def __init__(
            self, x: np.ndarray, y: np.ndarray, grids: dict[str, np.ndarray], surface: Surface,
            params: ax.WaveParameters
    ) -> None:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)

        for name in FIELD_COLUMNS[2:]:
            if name not in grids or grids[name].shape != (len(y), len(x)):
                raise sr.StructureError(f"grid {name} does not match the nodes")

        self._x, self._y = x, y
        self._grids = {name: np.asarray(grids[name], dtype=float) for name in FIELD_COLUMNS[2:]}
        self._surface = surface
        self._params = params

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(nx={len(self._x)}, ny={len(self._y)})"

    @property
    def x(self) -> np.ndarray:
        return self._x

    @property
    def y(self) -> np.ndarray:
        return self._y

    @property
    def surface(self) -> Surface:
        return self._surface

    @property
    def params(self) -> ax.WaveParameters:
        return self._params

    def __getitem__(self, name: str) -> np.ndarray:
        return self._grids[name]

    def fluid_mask(self) -> np.ndarray:
        return np.isfinite(self._grids["psi"])

    def with_grid(self, name: str, values: np.ndarray) -> FluidField:
        """Копия поля с замененной матрицей name"""

        grids = dict(self._grids)
        grids[name] = np.asarray(values, dtype=float)

        return FluidField(self._x, self._y, grids, self._surface, self._params)

    def to_frame(self) -> pd.DataFrame:
        """Таблица точек жидкости: столбцы x, y, psi, u, v, P, E, строки упорядочены по x, затем по y"""

        xx, yy = np.meshgrid(self._x, self._y)
        mask = self.fluid_mask().T
        columns = {"x": xx.T[mask], "y": yy.T[mask]}

        for name in FIELD_COLUMNS[2:]:
            columns[name] = self._grids[name].T[mask]

        return pd.DataFrame(columns, columns=list(FIELD_COLUMNS))

    def surface_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self._surface.x, "eta": self._surface.eta}, columns=list(SURFACE_COLUMNS))

    def write(self, directory: Path) -> None:
        """Записать field.csv и surface.csv"""

        directory.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(directory / "field.csv", index=False, float_format=_FLOAT_FORMAT)
        self.surface_frame().to_csv(directory / "surface.csv", index=False, float_format=_FLOAT_FORMAT)

    @classmethod
    def from_frames(
            cls, field: pd.DataFrame, surface: pd.DataFrame | None, params: ax.WaveParameters
    ) -> FluidField:
        """Восстановить поле из таблиц field.csv и surface.csv

        Raises:
            StructureError: Нет нужных столбцов
        """

        missing = set(FIELD_COLUMNS) - set(field.columns)

        if missing:
            raise sr.StructureError(f"missing field columns: {sorted(missing)}")

        x = np.sort(field["x"].unique())
        y = np.sort(field["y"].unique())
        grids = {}

        for name in FIELD_COLUMNS[2:]:
            table = field.pivot_table(index="y", columns="x", values=name, aggfunc="first", dropna=False)
            grids[name] = table.reindex(index=y, columns=x).to_numpy(dtype=float)

        if surface is None:
            surface_sample = Surface(np.empty(0), np.empty(0))
        else:
            surface_sample = Surface(surface["x"].to_numpy(dtype=float), surface["eta"].to_numpy(dtype=float))

        return cls(x, y, grids, surface_sample, params)


def symmetric_nodes(half_width: float, points: int) -> np.ndarray:
    """Симметричные относительно 0 узлы: x[::-1] == -x побитово"""

    if points < 3 or points % 2 == 0:
        raise ValueError("number of grid points must be odd and at least 3")

    half = np.linspace(0, half_width, (points + 1) // 2)

    return np.concatenate((-half[:0:-1], half))


def build_fluid_field(
        psi: sr.EvenSeries, rho: pr.DensityProfile, beta: pr.BernoulliFunction, params: ax.WaveParameters,
        half_width: float | None = None, points: int = _FIELD_POINTS, processes_num: int = 1
) -> FluidField:
    """Заполнить поле на сетке points x M: x симметричны на [-half_width, half_width], y в узлах ряда

    Args:
        psi: Восстановленный ряд
        rho: Плотность на линиях тока
        beta: Функция Бернулли
        params: Параметры волны
        half_width: Полуширина сетки, по умолчанию min(0.5, R/2)
        points: Нечетное количество узлов по x
        processes_num: Количество процессов для заполнения столбцов

    Returns:
        Поле с NaN выше поверхности

    Raises:
        StagnationError: В поле есть точка с u >= c
    """

    if half_width is None:
        half_width = rc.residual_half_width(psi)

    x = symmetric_nodes(half_width, points)

    if processes_num > 1:
        with mp.Pool(processes_num) as pool:
            jobs = [pool.apply_async(_field_column, (psi, rho, beta, params, value)) for value in x]
            columns = [job.get() for job in jobs]
    else:
        columns = [_field_column(psi, rho, beta, params, value) for value in x]

    grids = {name: np.column_stack([column[name] for column in columns]) for name in FIELD_COLUMNS[2:]}
    surface = Surface(x, np.array([column["eta"] for column in columns]))
    relative = np.where(np.isfinite(grids["u"]), grids["u"] - params.c, -1.0)

    if np.any(relative >= 0):
        row, col = np.unravel_index(int(np.argmax(relative)), relative.shape)
        raise ax.StagnationError(f"stagnation: u >= c at x = {x[col]:.17g}, y = {psi.nodes[::-1][row]:.17g}")

    logger.info("fluid field of %d x %d points, half width %.6g", len(psi.nodes), points, half_width)

    return FluidField(x, psi.nodes[::-1], grids, surface, params)


def _field_column(
        psi: sr.EvenSeries, rho: pr.DensityProfile, beta: pr.BernoulliFunction, params: ax.WaveParameters, x: float
) -> dict[str, np.ndarray | float]:
    """Столбец поля x = const в узлах ряда, точки выше поверхности заменяются на NaN"""

    eta = surface_height(psi, x)
    y = psi.nodes[::-1]
    squared = x * x
    values = psi.matrix()[:, ::-1]
    slopes = psi.derivative_matrix(1)[:, ::-1]

    value, psi_y, psi_x = values[-1], slopes[-1], np.zeros_like(y)

    for n in range(psi.order - 1, -1, -1):
        value = value * squared + values[n]
        psi_y = psi_y * squared + slopes[n]

    for n in range(psi.order, 0, -1):
        psi_x = psi_x * squared + 2 * n * values[n]

    psi_x = x * psi_x
    density = rho(-value)
    root = np.sqrt(density)
    u = params.c + psi_y / root
    v = -psi_x / root
    energy = surface_energy(params, rho) - beta.primitive(value)
    pressure = energy - density / 2 * ((u - params.c) ** 2 + v ** 2) - params.g * y * density

    above = y > eta + _SURFACE_MARGIN * (psi.domain[1] - psi.domain[0])
    column = {"psi": value, "u": u, "v": v, "P": pressure, "E": energy}

    for name in column:
        column[name] = np.where(above, np.nan, column[name])

    column["eta"] = eta

    return column


def read_field(path: Path, params: ax.WaveParameters) -> FluidField:
    """Прочитать таблицу поля и, если есть, соседний surface.csv"""

    surface_path = path.parent / "surface.csv"
    surface = pd.read_csv(surface_path) if surface_path.exists() else None

    return FluidField.from_frames(pd.read_csv(path), surface, params)


def flux_stations(psi: sr.EvenSeries, stations: int = _FLUX_STATIONS, half_width: float | None = None) -> np.ndarray:
    if half_width is None:
        half_width = rc.residual_half_width(psi)

    return np.linspace(-half_width, half_width, stations)


class FluxReport(NamedTuple):
    """Проверка независимости расхода от x"""

    x: np.ndarray
    flux: np.ndarray  # F(x) = int sqrt(rho) * (u - c) dy от -d до eta(x)
    p0: float
    deviation: float  # max |F(x) - p0| / |p0|


def flux_invariance(
        psi: sr.EvenSeries, rho: pr.DensityProfile, params: ax.WaveParameters, stations: int = _FLUX_STATIONS,
        half_width: float | None = None
) -> FluxReport:
    """Расход F(x) в нескольких сечениях квадратурой Кленшоу-Кертиса

    В каждом сечении строятся M узлов Чебышёва на [-d, eta(x)]
    """

    xs = flux_stations(psi, stations, half_width)
    fluxes = []

    for x in xs:
        eta = surface_height(psi, x)
        nodes = ch.lobatto_nodes(psi.nodes_amt, -params.d, eta)
        u, _, value = _velocity(psi, rho, params, x, nodes)
        fluxes.append(ch.clenshaw_curtis(np.sqrt(rho(-value)) * (u - params.c), -params.d, eta))

    fluxes = np.array(fluxes)

    return FluxReport(xs, fluxes, params.p0, float(np.max(np.abs(fluxes - params.p0)) / abs(params.p0)))


class BedReport(NamedTuple):
    """Условия на дне: psi = -p0 и v = 0 при y = -d"""

    x: np.ndarray
    stream_gap: np.ndarray  # psi(x, -d) + p0
    normal_velocity: np.ndarray  # v(x, -d)


def bed_residual(
        psi: sr.EvenSeries, rho: pr.DensityProfile, params: ax.WaveParameters, stations: int = _FLUX_STATIONS,
        half_width: float | None = None
) -> BedReport:
    """Невязки условий на дне в сечениях проверки расхода

    F(x) - p0 = -(psi(x, -d) + p0), поэтому отклонение расхода объясняется невязкой на дне
    """

    xs = flux_stations(psi, stations, half_width)
    _, v, value = _velocity(psi, rho, params, xs, np.full_like(xs, -params.d))

    return BedReport(xs, value + params.p0, v)


class DynamicReport(NamedTuple):
    """Условие Бернулли на поверхности"""

    x: np.ndarray
    residual: np.ndarray  # |grad psi|^2 + 2 * g * rho(0) * (eta + d) - Q
    relative: float  # max |residual| / Q
    explicit_gap: float  # max |eta - ((Q - |grad psi|^2) / (2 * g * rho(0)) - d)|


def surface_dynamic_residual(
        psi: sr.EvenSeries, rho: pr.DensityProfile, params: ax.WaveParameters, stations: int = _FLUX_STATIONS,
        half_width: float | None = None
) -> DynamicReport:
    """Невязка динамического условия на восстановленной поверхности и разрыв с явной формулой для eta"""

    surface = recover_surface(psi, flux_stations(psi, stations, half_width))
    psi_x, psi_y = sr.evaluate_gradient(psi, surface.x, surface.eta)
    density = rho.surface_density()
    kinetic = psi_x ** 2 + psi_y ** 2
    residual = kinetic + 2 * params.g * density * (surface.eta + params.d) - params.Q

    if params.g * density > 0:
        explicit = (params.Q - kinetic) / (2 * params.g * density) - params.d
        gap = float(np.max(np.abs(surface.eta - explicit)))
    else:
        gap = float("nan")

    return DynamicReport(surface.x, residual, float(np.max(np.abs(residual)) / params.Q), gap)


def kinematic_residual(
        psi: sr.EvenSeries, rho: pr.DensityProfile, params: ax.WaveParameters, stations: int = _FLUX_STATIONS,
        half_width: float | None = None
) -> float:
    """max |v - (u - c) * eta'(x)| на поверхности, eta' центральной разностью по восстановленной поверхности"""

    if half_width is None:
        half_width = rc.residual_half_width(psi)

    xs = flux_stations(psi, stations, half_width - _SLOPE_STEP)
    surface = recover_surface(psi, xs)
    slopes = (recover_surface(psi, xs + _SLOPE_STEP).eta - recover_surface(psi, xs - _SLOPE_STEP).eta) / (
            2 * _SLOPE_STEP)
    u, v, _ = _velocity(psi, rho, params, surface.x, surface.eta)

    return float(np.max(np.abs(v - (u - params.c) * slopes)))


def threads_from_environment() -> int:
    """Количество процессов из переменной окружения STRATIWAVE_THREADS

    По умолчанию 1, значение 0 означает половину логических процессоров

    Raises:
        ValueError: Отрицательное значение или больше количества процессоров
    """

    processes_num = int(os.environ.get("STRATIWAVE_THREADS", "1"))

    if processes_num < 0:
        raise ValueError("number of processes cannot be negative")
    elif processes_num > os.cpu_count():
        raise ValueError("number of processes cannot exceed the number of processors")
    elif not processes_num:
        processes_num = max(os.cpu_count() // 2, 1)

    return processes_num
