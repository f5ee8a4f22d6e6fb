"""Ламинарные течения: решения задачи для функции высоты, не зависящие от q

Функция высоты H(p) удовлетворяет краевой задаче
    H'' + [beta(-p) - g * (H - d) * rho'(p)] * H'^3 = 0,  p0 < p < 0,
    H(p0) = 0,  1 + H'(0)^2 * (2 * g * rho(0) * H(0) - Q) = 0,  H(0) = d

Алгоритм (метод стрельбы)
- Неизвестные: p0 и наклон s = H'(p0)
- Начальное приближение по однородной жидкости: s = 1 / sqrt(Q - 2 * g * rho(0) * d), p0 = -d / s
- Задача Коши интегрируется RK4 от p0 до 0 по узлам Чебышёва
- Невязки [условие на поверхности, H(0) - d] обнуляются демпфированным методом Ньютона
  с матрицей Якоби 2 x 2 из односторонних разностей (scipy.optimize.approx_fprime)

Временная сложность O(I * M * K), I - количество итераций Ньютона
"""

from __future__ import annotations

import logging

import numpy as np
from scipy import optimize

from stratiwave import axis as ax
from stratiwave import profiles as pr
from stratiwave import series as sr
from stratiwave.algorithms import chebyshev as ch
from stratiwave.algorithms import runge_kutta as rk

_NODES = 48  # Количество узлов Чебышёва по p
_TOLERANCE = 1e-12  # Допустимая невязка стрельбы
_MAX_ITERATIONS = 50  # Наибольшее количество итераций Ньютона
_MAX_HALVINGS = 30  # Наибольшее количество делений шага пополам
_JACOBIAN_STEP = 1e-7  # Относительный шаг разностной матрицы Якоби

logger = logging.getLogger(__name__)


class NoLaminarFlowError(ValueError):
    """Для заданных Q и d нет ламинарного течения"""

    pass


class LaminarFlow:
    """Ламинарное течение H(p) на отрезке [p0, 0]

    Attributes:
        _height: H в узлах Чебышёва по p
        _slope: H' в тех же узлах
        _rho: Плотность на линиях тока
        _beta: Функция Бернулли
        _d: Глубина
        _Q: Постоянная Бернулли
        _g: Ускорение свободного падения
    """

    def __init__(
            self, height: sr.NodalFunction, slope: sr.NodalFunction, rho: pr.DensityProfile,
            beta: pr.BernoulliFunction, d: float, Q: float, g: float = 9.8
    ) -> None:
        self._height, self._slope = height, slope
        self._rho, self._beta = rho, beta
        self._d, self._Q, self._g = float(d), float(Q), float(g)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(p0={self.p0}, d={self._d}, Q={self._Q})"

    @property
    def height(self) -> sr.NodalFunction:
        return self._height

    @property
    def slope(self) -> sr.NodalFunction:
        return self._slope

    @property
    def p0(self) -> float:
        return self._height.domain[0]

    @property
    def d(self) -> float:
        return self._d

    @property
    def Q(self) -> float:
        return self._Q

    @property
    def g(self) -> float:
        return self._g

    @property
    def rho(self) -> pr.DensityProfile:
        return self._rho

    @property
    def beta(self) -> pr.BernoulliFunction:
        return self._beta

    @property
    def eta0(self) -> float:
        return float(self._height.values[0]) - self._d

    def params(self, c: float = 1.0, p_atm: float = 0.0) -> ax.WaveParameters:
        return ax.WaveParameters(c, self._d, self._g, p_atm, self.p0, self._Q)

    def ode_residual(self) -> float:
        """max |H'' + [beta(-p) - g * (H - d) * rho'(p)] * H'^3| в узлах"""

        p = self._height.nodes
        curvature = self._height.derivative(2).values
        forcing = self._beta(-p) - self._g * (self._height.values - self._d) * self._rho.slope(p)

        return float(np.max(np.abs(curvature + forcing * self._slope.values ** 3)))

    def surface_residual(self) -> float:
        """|1 + H'(0)^2 * (2 * g * rho(0) * H(0) - Q)|"""

        top, top_slope = float(self._height.values[0]), float(self._slope.values[0])

        return abs(1 + top_slope ** 2 * (2 * self._g * self._rho.surface_density() * top - self._Q))

    def streamline_level(self, y: float | np.ndarray) -> np.ndarray:
        """Значение p линии тока, проходящей на высоте y: корень H(p) = y + d"""

        y = np.atleast_1d(np.asarray(y, dtype=float))
        levels = np.empty_like(y)
        lower, upper = self._height.domain
        top = float(self._height.values[0])

        for i, level in enumerate(y + self._d):
            if level <= 0:
                levels[i] = lower
            elif level >= top:
                levels[i] = upper
            else:
                levels[i] = optimize.brentq(lambda p: self._height(p) - level, lower, upper, xtol=1e-15)

        return levels

    def stream_function(self, nodes_amt: int = _NODES) -> sr.NodalFunction:
        """psi(y) = -p(y) в узлах Чебышёва на [-d, eta0]"""

        domain = (-self._d, self.eta0)

        return sr.NodalFunction(-self.streamline_level(ch.lobatto_nodes(nodes_amt, *domain)), domain)

    def axis_data(self, c: float = 1.0, nodes_amt: int = _NODES, p_atm: float = 0.0) -> ax.AxisData:
        """Скорость u = c - 1 / (sqrt(rho(p)) * H'(p)) на линии x = 0 в узлах Чебышёва"""

        y = ch.lobatto_nodes(nodes_amt, -self._d, self.eta0)
        p = self.streamline_level(y)
        u = c - 1 / (np.sqrt(self._rho(p)) * self._slope(p))

        return ax.AxisData(y, u, self.eta0, c, self._d, self._g, p_atm)


def solve_laminar(
        rho: pr.DensityProfile, beta: pr.BernoulliFunction, d: float, Q: float, g: float = 9.8,
        nodes_amt: int = _NODES
) -> LaminarFlow:
    """Найти ламинарное течение с глубиной d и постоянной Бернулли Q

    Args:
        rho: Плотность на линиях тока
        beta: Функция Бернулли
        d: Глубина
        Q: Постоянная Бернулли
        g: Ускорение свободного падения
        nodes_amt: Количество узлов Чебышёва по p

    Returns:
        Ламинарное течение

    Raises:
        NoLaminarFlowError: Q <= 2 * g * rho(0) * d или стрельба не сошлась
    """

    if not d > 0:
        raise ValueError("depth must be positive")

    density = rho.surface_density()
    excess = Q - 2 * g * density * d

    if not excess > 0:
        raise NoLaminarFlowError(f"head {Q:.17g} does not exceed the hydrostatic level {Q - excess:.17g}")

    slope = 1 / np.sqrt(excess)
    unknowns = np.array([-d / slope, slope])

    def shoot(point: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p0, initial_slope = point

        if not (p0 < 0 and initial_slope > 0):
            return np.full(2, np.inf), np.empty((0, 2))

        stations = ch.lobatto_nodes(nodes_amt, p0, 0)[::-1]

        def rhs(p: float, state: np.ndarray) -> np.ndarray:
            forcing = beta(-p) - g * (state[0] - d) * rho.slope(p)

            return np.array([state[1], -forcing * state[1] ** 3])

        try:
            states = rk.march(rhs, np.array([0.0, initial_slope]), stations)
        except rk.IntegrationError:
            return np.full(2, np.inf), np.empty((0, 2))

        top, top_slope = states[-1]
        residual = np.array([1 + top_slope ** 2 * (2 * g * density * top - Q), top - d])

        return residual, states

    residual, states = shoot(unknowns)

    for iteration in range(_MAX_ITERATIONS + 1):
        norm = float(np.max(np.abs(residual)))
        logger.debug("laminar shooting iteration %d, residual %.3e", iteration, norm)

        if norm <= _TOLERANCE:
            break
        elif iteration == _MAX_ITERATIONS:
            raise NoLaminarFlowError(f"shooting did not converge in {_MAX_ITERATIONS} iterations")

        steps = _JACOBIAN_STEP * np.maximum(np.abs(unknowns), 1.0)
        jacobian = optimize.approx_fprime(unknowns, lambda point: shoot(point)[0], steps)

        try:
            direction = np.linalg.solve(jacobian, -residual)
        except np.linalg.LinAlgError as error:
            raise NoLaminarFlowError("singular shooting jacobian") from error

        fraction = 1.0

        for _ in range(_MAX_HALVINGS):
            trial = unknowns + fraction * direction
            trial_residual, trial_states = shoot(trial)

            if np.max(np.abs(trial_residual)) < norm:
                unknowns, residual, states = trial, trial_residual, trial_states
                break

            fraction /= 2
        else:
            raise NoLaminarFlowError(f"shooting stalled at residual {norm:.3e}")

    domain = (float(unknowns[0]), 0.0)
    flow = LaminarFlow(
        sr.NodalFunction(states[::-1, 0], domain), sr.NodalFunction(states[::-1, 1], domain), rho, beta, d, Q, g
    )
    logger.info("laminar flow found: p0 = %.17g, surface slope %.17g", flow.p0, states[-1, 1])

    return flow
