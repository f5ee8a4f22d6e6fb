"""Функция высоты h(q, p) на прямоугольнике [-pi, pi) x [p0, 0] и ее разностная дискретизация

Уравнения для функции высоты
    (1 + h_q^2) * h_pp - 2 * h_q * h_p * h_qp + h_p^2 * h_qq + [beta(-p) - g * (h - d) * rho'(p)] * h_p^3 = 0,
    1 + h_q^2 + h_p^2 * (2 * g * rho(0) * h - Q) = 0 при p = 0,
    h = 0 при p = p0

Дискретизация
- Равномерная сетка: q_j = -pi + 2 * pi * j / nq, p_i = p0 * (1 - i / (np - 1)), строка 0 лежит на дне
- Центральные разности второго порядка, по q периодические
- На поверхности односторонняя разность второго порядка для h_p
- Неизвестные: строки 1..np-1, номер неизвестной (i - 1) * nq + j
- Матрица Якоби собирается аналитически: 9-точечный шаблон внутри, 5-точечный на поверхности

Временная сложность сборки O(nq * np)
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy import interpolate
from scipy import optimize
from scipy import sparse

from stratiwave import axis as ax
from stratiwave import profiles as pr
from stratiwave import series as sr
from stratiwave.algorithms import chebyshev as ch
from stratiwave.reference import laminar as lm

_NODES = 48  # Количество узлов Чебышёва в выборке на оси
_FLOAT_FORMAT = "%.17g"  # 17 значащих цифр в CSV

HEIGHT_COLUMNS = ("q", "p", "h")

logger = logging.getLogger(__name__)


def uniform_grid(nq: int, np_amt: int, p0: float) -> tuple[np.ndarray, np.ndarray]:
    """Узлы q_j = -pi + 2 * pi * j / nq и p_i = p0 * (1 - i / (np - 1))

    Raises:
        ValueError: nq нечетно или меньше 4, np меньше 3, p0 >= 0
    """

    if nq < 4 or nq % 2:
        raise ValueError("number of q nodes must be even and at least 4")
    elif np_amt < 3:
        raise ValueError("at least three p nodes are required")
    elif not p0 < 0:
        raise ValueError("pseudo mass flux must be negative")

    q = -np.pi + 2 * np.pi * np.arange(nq) / nq
    p = p0 * (1 - np.arange(np_amt) / (np_amt - 1))
    p[-1] = 0.0

    return q, p


class SurfaceReport(NamedTuple):
    """Экстремумы и средний уровень поверхности eta(q) = h(q, 0) - d"""

    eta_max: float
    eta_min: float
    crest_q: float
    trough_q: float
    mean_level: float  # (1 / 2pi) * int eta dq, для периодической сетки равно среднему по узлам


class HeightField:
    """Функция высоты на сетке (p_i, q_j)

    Attributes:
        _h: Матрица np x nq, строка i соответствует p_i
        _params: Параметры волны, p0 задает сетку по p
    """

    def __init__(self, h: np.ndarray, params: ax.WaveParameters) -> None:
        h = np.array(h, dtype=float)

        if h.ndim != 2:
            raise sr.StructureError("height must be a matrix")

        self._q, self._p = uniform_grid(h.shape[1], h.shape[0], params.p0)

        if not np.all(np.isfinite(h)):
            raise sr.DivergenceError("non-finite height values")

        h.setflags(write=False)
        self._h = h
        self._params = params

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(nq={self.q_amt}, np={self.p_amt}, p0={self._params.p0})"

    @classmethod
    def from_laminar(
            cls, flow: lm.LaminarFlow, nq: int, np_amt: int, c: float = 1.0, p_atm: float = 0.0
    ) -> HeightField:
        """Ламинарное течение H(p), продолженное на сетку постоянным по q"""

        params = flow.params(c, p_atm)
        _, p = uniform_grid(nq, np_amt, params.p0)
        height = np.asarray(flow.height(p), dtype=float)
        height[0] = 0.0

        return cls(np.repeat(height[:, None], nq, axis=1), params)

    @property
    def h(self) -> np.ndarray:
        return self._h

    @property
    def q(self) -> np.ndarray:
        return self._q

    @property
    def p(self) -> np.ndarray:
        return self._p

    @property
    def params(self) -> ax.WaveParameters:
        return self._params

    @property
    def q_amt(self) -> int:
        return self._h.shape[1]

    @property
    def p_amt(self) -> int:
        return self._h.shape[0]

    @property
    def steps(self) -> tuple[float, float]:
        """Шаги сетки (dq, dp)"""

        return 2 * np.pi / self.q_amt, -self._params.p0 / (self.p_amt - 1)

    def with_height(self, h: np.ndarray, Q: float | None = None) -> HeightField:
        params = self._params if Q is None else self._params._replace(Q=float(Q))

        return HeightField(h, params)

    def crest_shifted(self) -> HeightField:
        """Циклический сдвиг по q, после которого максимум h(., 0) лежит в q = 0"""

        shift = self.q_amt // 2 - int(np.argmax(self._h[-1]))

        return self if not shift else HeightField(np.roll(self._h, shift, axis=1), self._params)

    def surface_report(self) -> SurfaceReport:
        eta = self._h[-1] - self._params.d
        crest, trough = int(np.argmax(eta)), int(np.argmin(eta))

        return SurfaceReport(
            float(eta[crest]), float(eta[trough]), float(self._q[crest]), float(self._q[trough]), float(np.mean(eta))
        )

    def streamlines(self) -> pd.DataFrame:
        """Линии тока в физических координатах: столбцы p, x, y, y = h(q, p) - d"""

        pp, qq = np.meshgrid(self._p, self._q, indexing="ij")

        return pd.DataFrame(
            {"p": pp.ravel(), "x": qq.ravel(), "y": self._h.ravel() - self._params.d}, columns=["p", "x", "y"]
        )

    def to_frame(self) -> pd.DataFrame:
        """Таблица q, p, h, строки упорядочены по p, затем по q"""

        pp, qq = np.meshgrid(self._p, self._q, indexing="ij")

        return pd.DataFrame({"q": qq.ravel(), "p": pp.ravel(), "h": self._h.ravel()}, columns=list(HEIGHT_COLUMNS))

    def metadata(self) -> dict:
        return {**self._params.to_document(), "nq": self.q_amt, "np": self.p_amt}

    def write(self, directory: Path, stem: str = "height") -> None:
        """Записать stem.csv и stem.json"""

        directory.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(directory / f"{stem}.csv", index=False, float_format=_FLOAT_FORMAT)
        (directory / f"{stem}.json").write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n",
                                                encoding="utf-8")

    @classmethod
    def read(cls, path: Path) -> HeightField:
        """Прочитать CSV с соседним JSON тех же имени и каталога

        Raises:
            StructureError: Нет столбцов q, p, h или количество строк не совпадает с сеткой
        """

        frame = pd.read_csv(path)
        metadata = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
        missing = set(HEIGHT_COLUMNS) - set(frame.columns)

        if missing:
            raise sr.StructureError(f"missing height columns: {sorted(missing)}")

        nq, np_amt = int(metadata["nq"]), int(metadata["np"])

        if len(frame) != nq * np_amt:
            raise sr.StructureError(f"expected {nq * np_amt} height rows, got {len(frame)}")

        return cls(frame["h"].to_numpy(dtype=float).reshape(np_amt, nq), ax.WaveParameters.from_document(metadata))


class Stencil(NamedTuple):
    """Разностные производные во внутренних узлах, массивы (np - 2) x nq"""

    h_q: np.ndarray
    h_p: np.ndarray
    h_qq: np.ndarray
    h_pp: np.ndarray
    h_qp: np.ndarray


def _interior_stencil(h: np.ndarray, dq: float, dp: float) -> Stencil:
    right, left = np.roll(h, -1, axis=1), np.roll(h, 1, axis=1)
    centre = h[1:-1]

    return Stencil(
        (right[1:-1] - left[1:-1]) / (2 * dq),
        (h[2:] - h[:-2]) / (2 * dp),
        (right[1:-1] - 2 * centre + left[1:-1]) / dq ** 2,
        (h[2:] - 2 * centre + h[:-2]) / dp ** 2,
        (right[2:] - left[2:] - right[:-2] + left[:-2]) / (4 * dq * dp),
    )


def _top_derivatives(h: np.ndarray, dq: float, dp: float) -> tuple[np.ndarray, np.ndarray]:
    """h_q и односторонняя h_p в строке p = 0"""

    top = h[-1]
    h_q = (np.roll(top, -1) - np.roll(top, 1)) / (2 * dq)
    h_p = (3 * top - 4 * h[-2] + h[-3]) / (2 * dp)

    return h_q, h_p


def _check_ellipticity(interior_slope: np.ndarray, top_slope: np.ndarray, p: np.ndarray, q: np.ndarray) -> None:
    if np.any(interior_slope <= 0):
        i, j = np.unravel_index(int(np.argmin(interior_slope)), interior_slope.shape)
        raise ax.StagnationError(f"stagnation: h_p <= 0 at q = {q[j]:.17g}, p = {p[i + 1]:.17g}")
    elif np.any(top_slope <= 0):
        j = int(np.argmin(top_slope))
        raise ax.StagnationError(f"stagnation: h_p <= 0 at q = {q[j]:.17g}, p = 0")


def height_residual(
        field: HeightField, rho: pr.DensityProfile, beta: pr.BernoulliFunction, Q: float | None = None
) -> np.ndarray:
    """Невязки в строках 1..np-1: внутреннее уравнение в строках 1..np-2, условие на поверхности в строке np-1

    Raises:
        StagnationError: h_p <= 0 в каком-то шаблоне
    """

    return height_residual_and_jacobian(field, rho, beta, Q, with_jacobian=False)[0]


def height_residual_and_jacobian(
        field: HeightField, rho: pr.DensityProfile, beta: pr.BernoulliFunction, Q: float | None = None,
        with_jacobian: bool = True
) -> tuple[np.ndarray, sparse.csr_matrix | None]:
    """Невязки разностной задачи и аналитическая матрица Якоби по неизвестным строкам 1..np-1

    Args:
        field: Функция высоты, строка 0 считается заданной
        rho: Плотность на линиях тока
        beta: Функция Бернулли
        Q: Постоянная Бернулли, по умолчанию из параметров поля
        with_jacobian: Собирать ли матрицу Якоби

    Returns:
        Матрица невязок (np - 1) x nq и разреженная матрица Якоби n x n, n = (np - 1) * nq

    Raises:
        StagnationError: h_p <= 0 в каком-то шаблоне
    """

    Q = field.params.Q if Q is None else Q
    h, p, q = field.h, field.p, field.q
    dq, dp = field.steps
    params = field.params
    surface_density = rho.surface_density()

    stencil = _interior_stencil(h, dq, dp)
    top_q, top_p = _top_derivatives(h, dq, dp)
    _check_ellipticity(stencil.h_p, top_p, p, q)

    levels = p[1:-1, None]
    forcing = beta(-levels) - params.g * (h[1:-1] - params.d) * rho.slope(levels)
    h_q, h_p = stencil.h_q, stencil.h_p
    interior = ((1 + h_q ** 2) * stencil.h_pp - 2 * h_q * h_p * stencil.h_qp + h_p ** 2 * stencil.h_qq
                + forcing * h_p ** 3)
    top = 1 + top_q ** 2 + top_p ** 2 * (2 * params.g * surface_density * h[-1] - Q)
    residual = np.vstack((interior, top))

    if not with_jacobian:
        return residual, None

    a_q = 2 * h_q * stencil.h_pp - 2 * h_p * stencil.h_qp
    a_p = -2 * h_q * stencil.h_qp + 2 * h_p * stencil.h_qq + 3 * forcing * h_p ** 2
    a_pp = 1 + h_q ** 2
    a_qq = h_p ** 2
    a_qp = -2 * h_q * h_p
    a_0 = -params.g * rho.slope(levels) * h_p ** 3
    cross = a_qp / (4 * dq * dp)

    interior_offsets = (
        (0, 0, -2 * a_pp / dp ** 2 - 2 * a_qq / dq ** 2 + a_0),
        (0, 1, a_q / (2 * dq) + a_qq / dq ** 2),
        (0, -1, -a_q / (2 * dq) + a_qq / dq ** 2),
        (1, 0, a_p / (2 * dp) + a_pp / dp ** 2),
        (-1, 0, -a_p / (2 * dp) + a_pp / dp ** 2),
        (1, 1, cross),
        (-1, -1, cross),
        (1, -1, -cross),
        (-1, 1, -cross),
    )

    b_q = 2 * top_q
    b_p = 2 * top_p * (2 * params.g * surface_density * h[-1] - Q)
    b_0 = 2 * params.g * surface_density * top_p ** 2

    top_offsets = (
        (0, 0, b_0 + 3 * b_p / (2 * dp)),
        (0, 1, b_q / (2 * dq)),
        (0, -1, -b_q / (2 * dq)),
        (-1, 0, -2 * b_p / dp),
        (-2, 0, b_p / (2 * dp)),
    )

    nq, rows_amt = field.q_amt, field.p_amt
    unknowns = (rows_amt - 1) * nq
    rows, columns, values = [], [], []

    def add(row_indices: np.ndarray, offsets: tuple) -> None:
        ii, jj = np.meshgrid(row_indices, np.arange(nq), indexing="ij")

        for di, dj, coefficient in offsets:
            target = ii + di
            known = target >= 1  # Строка 0 задана условием на дне
            coefficient = np.broadcast_to(coefficient, ii.shape)
            rows.append(((ii - 1) * nq + jj)[known])
            columns.append(((target - 1) * nq + (jj + dj) % nq)[known])
            values.append(coefficient[known])

    add(np.arange(1, rows_amt - 1), interior_offsets)
    add(np.array([rows_amt - 1]), top_offsets)

    jacobian = sparse.coo_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(columns))), shape=(unknowns, unknowns)
    ).tocsr()

    return residual, jacobian


def head_derivative(field: HeightField) -> np.ndarray:
    """Производная невязок по Q: -h_p^2 в строке поверхности, 0 внутри"""

    dq, dp = field.steps
    derivative = np.zeros((field.p_amt - 1, field.q_amt))
    derivative[-1] = -_top_derivatives(field.h, dq, dp)[1] ** 2

    return derivative


def sample_axis_from_height(
        field: HeightField, rho: pr.DensityProfile, c: float | None = None, nodes_amt: int = _NODES
) -> ax.AxisData:
    """Скорость на линии гребня u(0, y) = c - 1 / (sqrt(rho(p)) * h_p(0, p)), y = h(0, p) - d

    Поле сдвигается так, чтобы гребень лежал в q = 0. Столбец q = 0 приближается кубическим сплайном по p,
    уровни p узлов Чебышёва по y находятся обращением сплайна методом Брента

    Args:
        field: Функция высоты
        rho: Плотность на линиях тока
        c: Скорость волны, по умолчанию из параметров поля
        nodes_amt: Количество узлов Чебышёва

    Returns:
        Данные на оси в узлах Чебышёва на [-d, h(0, 0) - d]

    Raises:
        StagnationError: h_p <= 0 на столбце гребня
    """

    shifted = field.crest_shifted()
    params = shifted.params
    c = params.c if c is None else c
    column = shifted.h[:, shifted.q_amt // 2]
    spline = interpolate.CubicSpline(shifted.p, column)
    slope = spline.derivative()
    eta0 = float(column[-1]) - params.d

    y = ch.lobatto_nodes(nodes_amt, -params.d, eta0)
    levels = np.empty(nodes_amt)
    levels[0], levels[-1] = 0.0, params.p0

    for k in range(1, nodes_amt - 1):
        target = y[k] + params.d
        levels[k] = optimize.brentq(lambda level: spline(level) - target, params.p0, 0.0, xtol=1e-15)

    slopes = slope(levels)

    if np.any(slopes <= 0):
        k = int(np.argmin(slopes))
        raise ax.StagnationError(f"stagnation: h_p <= 0 at y = {y[k]:.17g}")

    u = c - 1 / (np.sqrt(rho(levels)) * slopes)
    logger.info("axis sampled from height field, eta0 = %.17g", eta0)

    return ax.AxisData(y, u, eta0, c, params.d, params.g, params.p_atm)
