"""Восстановление ряда psi(x, y) по функции тока на оси симметрии

Подстановка psi = sum a_2n(y) * x^2n в уравнение
    psi_xx + psi_yy - g * y * rho'(-psi) = -beta(psi)
и приравнивание коэффициентов при x^(2n-2) дает рекуррентную формулу

    a_2n = [g * y * b_2n-2 - c_2n-2 - a''_2n-2] / ((2n) * (2n - 1)),

где b_2k и c_2k - коэффициенты рядов rho'(-psi) и beta(psi). Коэффициенты порядка 2n-2 этих рядов зависят только
от a_0..a_2n-2, поэтому схема строго треугольная.

Алгоритм
- Для n = 1..N построить частичный ряд из a_0..a_2n-2
- Подставить его в rho' и beta схемой Горнера над рядами
- Вычислить a_2n поточечно в узлах, a'' - в пространстве коэффициентов Чебышёва
- Оценить уровень ошибки a_2n: округление числителя плюс ошибка a_2n-2, усиленная второй производной
  и подстановкой в rho' и beta
- Отсечь у a_2n хвост коэффициентов ниже этого уровня; если числитель сократился до округления, a_2n = 0
- a_0 хранится без изменений

Временная сложность O(N^3 * deg * M + N * M * logM)
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple

import numpy as np

from stratiwave import axis as ax
from stratiwave import profiles as pr
from stratiwave import series as sr
from stratiwave.algorithms import chebyshev as ch

_ORDER = 12  # Порядок усечения по умолчанию
_EPSILON = float(np.finfo(float).eps)  # Машинная точность
_CANCELLATION = 1e-9  # Числитель меньше этой доли своих слагаемых считается нулем
_RESIDUAL_POINTS = 41  # Количество точек по x в сетке проверки невязки
_RESIDUAL_HALF_WIDTH = 0.5  # Наибольшая полуширина сетки проверки невязки

logger = logging.getLogger(__name__)


def recover_series(
        a0: sr.NodalFunction, rho: pr.DensityProfile, beta: pr.BernoulliFunction, params: ax.WaveParameters,
        order: int = _ORDER, nodes: int | None = None, *, bernoulli_sign: int = -1
) -> sr.EvenSeries:
    """Построить ряд psi по a0 рекуррентной формулой

    Args:
        a0: Функция тока на оси симметрии
        rho: Плотность на линиях тока
        beta: Функция Бернулли
        params: Параметры волны, используется g
        order: Порядок усечения N
        nodes: Количество узлов M, по умолчанию как у a0
        bernoulli_sign: Знак слагаемого c_2n-2, оставлен для проверки соглашения о знаке

    Returns:
        Ряд с коэффициентами a_0..a_2N

    Raises:
        DivergenceError: Коэффициент перестал быть конечным, в сообщении указан порядок
    """

    if order < 0:
        raise ValueError("negative truncation order")
    elif bernoulli_sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")

    if nodes and nodes != a0.nodes_amt:
        a0 = sr.NodalFunction.from_function(a0, nodes, a0.domain)

    coefficients = [a0]
    gravity_height = params.g * a0.nodes
    slope = rho.slope.coefficients
    bernoulli = beta.polynomial.coefficients
    sensitivity = (
        float(np.max(np.abs(gravity_height * rho.slope(-a0.values, 1))))
        + float(np.max(np.abs(beta.polynomial(a0.values, 1))))
    )
    noise = _noise_level(a0)
    floor = 0.0  # a_0 дифференцируется без абсолютного порога

    for n in range(1, order + 1):
        partial = np.array([a.values for a in coefficients])
        gravity_term = gravity_height * sr.compose_matrix(slope, -1, partial)[n - 1]
        bernoulli_term = bernoulli_sign * sr.compose_matrix(bernoulli, 1, partial)[n - 1]
        previous = coefficients[n - 1]
        curvature = previous.derivative(2, floor).values
        numerator = gravity_term + bernoulli_term - curvature
        denominator = (2 * n) * (2 * n - 1)

        if not np.all(np.isfinite(numerator)):
            raise sr.DivergenceError(f"non-finite coefficient at order {n}")

        scale = max(np.max(np.abs(gravity_term)), np.max(np.abs(bernoulli_term)), np.max(np.abs(curvature)))
        gain = ch.second_derivative_gain(len(previous.significant_coefficients(floor)), *a0.domain)
        noise = (_EPSILON * scale + noise * (gain + sensitivity)) / denominator

        if np.max(np.abs(numerator)) <= _CANCELLATION * scale:
            coefficient = sr.NodalFunction.constant(0.0, a0.nodes_amt, a0.domain)
        else:
            coefficient = sr.NodalFunction(numerator / denominator, a0.domain).chopped(noise)

        coefficients.append(coefficient)
        floor = noise
        logger.debug(
            "coefficient a_%d recovered, sup norm %.3e, noise level %.3e", 2 * n, coefficient.sup_norm(), noise
        )

    psi = sr.EvenSeries(coefficients)
    logger.info("series of order %d recovered on %d nodes", order, a0.nodes_amt)

    return psi


def _noise_level(function: sr.NodalFunction) -> float:
    """Уровень ошибки коэффициентов Чебышёва: округление или отброшенный шумовой хвост, что больше"""

    coefficients = function.coefficients
    tail = coefficients[ch.chop_length(coefficients):]
    rounding = _EPSILON * float(np.max(np.abs(coefficients)))

    return max(rounding, float(np.max(np.abs(tail)))) if len(tail) else rounding


class ResidualSummary(NamedTuple):
    """Невязка уравнения для psi на сетке проверки"""

    residual: float  # sup |laplacian psi - g*y*rho'(-psi) + beta(psi)|
    laplacian: float  # sup |laplacian psi|
    half_width: float  # Полуширина сетки по x

    def passes(self, tolerance: float = 1e-6) -> bool:
        return self.residual <= tolerance * (1 + self.laplacian)


def residual_half_width(psi: sr.EvenSeries) -> float:
    """Полуширина области проверки min(0.5, R/2), R - оценка радиуса сходимости"""

    radius = sr.estimate_radius(psi) if psi.order >= 3 else math.inf

    return min(_RESIDUAL_HALF_WIDTH, radius / 2)


def pde_residual(
        psi: sr.EvenSeries, rho: pr.DensityProfile, beta: pr.BernoulliFunction, g: float,
        half_width: float | None = None, points: int = _RESIDUAL_POINTS
) -> ResidualSummary:
    """Невязка уравнения для psi на сетке points x M, |x| <= half_width, y в узлах ряда

    Лапласиан вычисляется по ряду: часть по x аналитически по коэффициентам, часть по y спектрально

    Returns:
        Сводка с sup-нормами невязки и лапласиана
    """

    if half_width is None:
        half_width = residual_half_width(psi)

    x = np.linspace(-half_width, half_width, points)[:, None]
    squared = x * x
    values = psi.matrix()
    curvatures = psi.derivative_matrix(2)

    psi_grid = np.zeros((points, psi.nodes_amt))
    laplacian = np.zeros((points, psi.nodes_amt))

    for n in range(psi.order, -1, -1):
        psi_grid = psi_grid * squared + values[n]
        laplacian = laplacian * squared + curvatures[n]  # Пока только psi_yy

    laplacian += _horizontal_part(values, squared)
    residual = laplacian - g * psi.nodes * rho.slope(-psi_grid) + beta(psi_grid)

    return ResidualSummary(float(np.max(np.abs(residual))), float(np.max(np.abs(laplacian))), float(half_width))


def _horizontal_part(values: np.ndarray, squared: np.ndarray) -> np.ndarray:
    """psi_xx = sum (2n) * (2n - 1) * a_2n * x^(2n-2), n >= 1"""

    order = len(values) - 1
    result = np.zeros((squared.shape[0], values.shape[1]))

    for n in range(order, 0, -1):
        result = result * squared + (2 * n) * (2 * n - 1) * values[n]

    return result
