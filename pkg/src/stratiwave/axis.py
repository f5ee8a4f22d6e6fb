"""Данные на оси симметрии волны и функция тока на ней

По горизонтальной скорости u(0, y) на линии гребня и высоте волны eta(0) восстанавливаются
a0(y) = psi(0, y) и псевдо массовый расход p0.

Алгоритм
- Задача Коши a0'(y) = sqrt(rho(-a0)) * (u(0, y) - c), a0(eta(0)) = 0 ставится на поверхности, где psi = 0 известна
- Интегрирование ведется вниз методом RK4 от узла к узлу сетки Чебышёва, по 8 подшагов между узлами
- u(0, y) между узлами берется барицентрической интерполяцией
- p0 = -a0(-d), так как psi = -p0 на дне

Временная сложность O(M^2 * K), K - количество подшагов между узлами
"""

from __future__ import annotations

import logging
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import interpolate

from stratiwave import profiles as pr
from stratiwave import series as sr
from stratiwave.algorithms import chebyshev as ch
from stratiwave.algorithms import runge_kutta as rk

_GRAVITY = 9.8  # Ускорение свободного падения по умолчанию
_COVERAGE_SLACK = 1e-9  # Допуск совпадения концов выборки с [-d, eta0], в долях глубины
_NODES_SLACK = 1e-12  # Допуск совпадения выборки с узлами Чебышёва, в долях глубины
_SUBSTEPS = 8  # Шаги RK4 между соседними узлами

logger = logging.getLogger(__name__)


class StagnationError(ValueError):
    """Нарушено условие u < c, точка торможения потока"""

    pass


class ProfileRangeError(ValueError):
    """Плотность rho(-a0) неположительна на найденном решении"""

    pass


class AxisData:
    """Горизонтальная скорость на линии гребня x = 0 и параметры волны

    Attributes:
        _y: Точки выборки по убыванию, от eta0 до -d
        _u: Горизонтальная скорость в точках выборки, м/с
        _eta0: Высота волны eta(0), м
        _c: Скорость волны, м/с
        _d: Глубина, дно находится на y = -d, м
        _g: Ускорение свободного падения, м/с^2
        _p_atm: Атмосферное давление, Па
    """

    def __init__(
            self, y: Sequence[float] | np.ndarray, u: Sequence[float] | np.ndarray, eta0: float, c: float, d: float,
            g: float = _GRAVITY, p_atm: float = 0.0
    ) -> None:
        y = np.array(y, dtype=float)
        u = np.array(u, dtype=float)

        if y.ndim != 1 or y.shape != u.shape or len(y) < 4:
            raise ValueError("axis samples must be two vectors of equal length, at least 4")
        elif not d > 0:
            raise ValueError("depth must be positive")
        elif not eta0 > -d:
            raise ValueError("wave height must lie above the bed")
        elif not (np.all(np.isfinite(y)) and np.all(np.isfinite(u))):
            raise ValueError("non-finite axis samples")

        order = np.argsort(-y, kind="stable")  # Порядок узлов: от поверхности ко дну
        y, u = y[order], u[order]

        if np.any(np.diff(y) >= 0):
            raise ValueError("duplicate sample heights")

        slack = _COVERAGE_SLACK * (eta0 + d)

        if abs(y[0] - eta0) > slack or abs(y[-1] + d) > slack:
            raise ValueError(f"samples must cover [{-d:.17g}, {eta0:.17g}]")

        y[0], y[-1] = eta0, -d
        y.setflags(write=False)
        u.setflags(write=False)

        self._y, self._u = y, u
        self._eta0, self._c, self._d = float(eta0), float(c), float(d)
        self._g, self._p_atm = float(g), float(p_atm)
        self._interpolant: Callable[[np.ndarray], np.ndarray] | None = None

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(samples={len(self._y)}, eta0={self._eta0}, c={self._c}, d={self._d})"

    @classmethod
    def from_function(
            cls, velocity: Callable[[np.ndarray], np.ndarray], eta0: float, c: float, d: float, nodes_amt: int = 48,
            g: float = _GRAVITY, p_atm: float = 0.0
    ) -> AxisData:
        """Взять скорость u(0, y) в узлах Чебышёва на [-d, eta0]"""

        y = ch.lobatto_nodes(nodes_amt, -d, eta0)

        return cls(y, velocity(y), eta0, c, d, g, p_atm)

    @property
    def y(self) -> np.ndarray:
        return self._y

    @property
    def u(self) -> np.ndarray:
        return self._u

    @property
    def eta0(self) -> float:
        return self._eta0

    @property
    def c(self) -> float:
        return self._c

    @property
    def d(self) -> float:
        return self._d

    @property
    def g(self) -> float:
        return self._g

    @property
    def p_atm(self) -> float:
        return self._p_atm

    @property
    def domain(self) -> tuple[float, float]:
        return -self._d, self._eta0

    def is_chebyshev(self) -> bool:
        """Лежат ли точки выборки в узлах Чебышёва-Гаусса-Лобатто"""

        nodes = ch.lobatto_nodes(len(self._y), -self._d, self._eta0)

        return bool(np.max(np.abs(nodes - self._y)) <= _NODES_SLACK * (self._eta0 + self._d))

    def velocity(self, y: float | np.ndarray) -> np.ndarray:
        """Интерполянт u(0, y)

        В узлах Чебышёва используется барицентрическая интерполяция, для произвольной выборки кубический сплайн
        """

        if self._interpolant is None:
            if self.is_chebyshev():
                self._interpolant = interpolate.BarycentricInterpolator(self._y, self._u)
            else:
                self._interpolant = interpolate.CubicSpline(self._y[::-1], self._u[::-1])

        return self._interpolant(y)

    def on_nodes(self, nodes_amt: int) -> AxisData:
        """Та же скорость, пересчитанная в nodes_amt узлов Чебышёва"""

        if nodes_amt == len(self._y) and self.is_chebyshev():
            return self

        return AxisData.from_function(self.velocity, self._eta0, self._c, self._d, nodes_amt, self._g, self._p_atm)


class WaveParameters(NamedTuple):
    """Параметры волны: заданные и вычисленные по данным на оси"""

    c: float
    d: float
    g: float
    p_atm: float
    p0: float  # Псевдо массовый расход
    Q: float  # Постоянная Бернулли в условии на поверхности

    def to_document(self) -> dict[str, float]:
        return {"c": self.c, "d": self.d, "g": self.g, "P_atm": self.p_atm, "p0": self.p0, "Q": self.Q}

    @classmethod
    def from_document(cls, document: dict) -> WaveParameters:
        """Параметры из JSON-документа, отсутствующие p0 и Q заменяются на NaN"""

        return cls(
            float(document["c"]), float(document["d"]), float(document.get("g", _GRAVITY)),
            float(document.get("P_atm", 0.0)), _as_float(document.get("p0")), _as_float(document.get("Q"))
        )


def _as_float(value: float | str | None) -> float:
    return float("nan") if value is None else float(value)


class StagnationMargin(NamedTuple):
    """Запас до точки торможения"""

    margin: float  # min (c - u) по выборке
    y: float  # Точка, где достигается минимум


def check_no_stagnation(axis: AxisData) -> StagnationMargin:
    """Проверить условие u < c во всех точках выборки

    Returns:
        Минимальный запас c - u и точка его достижения

    Raises:
        StagnationError: Запас неположителен
    """

    margins = axis.c - axis.u
    worst = int(np.argmin(margins))
    result = StagnationMargin(float(margins[worst]), float(axis.y[worst]))

    if result.margin <= 0:
        raise StagnationError(f"stagnation: u >= c at y = {result.y:.17g}")

    return result


def solve_axis_streamfunction(
        axis: AxisData, rho: pr.DensityProfile, nodes: int | None = None, substeps: int = _SUBSTEPS
) -> tuple[sr.NodalFunction, float]:
    """Восстановить a0(y) = psi(0, y) и псевдо массовый расход p0

    Args:
        axis: Данные на оси симметрии
        rho: Плотность на линиях тока
        nodes: Количество узлов Чебышёва для a0, по умолчанию по количеству точек выборки
        substeps: Количество шагов RK4 между соседними узлами

    Returns:
        Кортеж из a0 в узлах на [-d, eta0] и p0

    Raises:
        StagnationError: В выборке есть точка с u >= c
        ProfileRangeError: Плотность rho(-a0) стала неположительной
        DivergenceError: Решение перестало быть конечным
    """

    nodes_amt = nodes or len(axis.y)
    check_no_stagnation(axis)
    stations = ch.lobatto_nodes(nodes_amt, *axis.domain)  # От поверхности ко дну

    def rhs(y: float, state: np.ndarray) -> np.ndarray:
        density = rho(-state[0])

        if not density > 0:
            raise ProfileRangeError(f"non-positive density {density:.17g} at p = {-state[0]:.17g}")

        return np.array([np.sqrt(density) * (float(axis.velocity(y)) - axis.c)])

    try:
        states = rk.march(rhs, np.zeros(1), stations, substeps)
    except rk.IntegrationError as error:
        raise sr.DivergenceError(str(error)) from error

    a0 = sr.NodalFunction(states[:, 0], axis.domain)
    p0 = -float(states[-1, 0])
    logger.info("axis stream function on %d nodes, p0 = %.17g", nodes_amt, p0)

    return a0, p0
