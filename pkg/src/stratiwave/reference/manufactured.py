"""Построенные решения для однородной жидкости с линейной функцией Бернулли

При rho = 1 и beta(p) = lambda * p уравнение для psi принимает вид laplacian psi = -lambda * psi.
Разделение переменных дает семейство
    psi = f(y) + eps * cos(x) * g(y),  f = -sinh(sqrt(-lambda) * y),  g = cosh(sqrt(1 - lambda) * (y + d))

Коэффициенты четного ряда по x известны в явном виде: a_0 = f + eps * g, a_2n = (-1)^n * eps * g / (2n)!

Такие волны не удовлетворяют динамическому условию на поверхности и условию psi = -p0 на дне,
поэтому годятся только для проверки рекурсии, поверхности как линии уровня и полей внутри жидкости
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from stratiwave import axis as ax
from stratiwave import profiles as pr
from stratiwave import series as sr
from stratiwave.algorithms import chebyshev as ch

_SCAN_POINTS = 1001  # Количество точек проверки psi_y < 0
_MAX_EXPANSIONS = 60  # Наибольшее количество удвоений отрезка поиска гребня
_ROOT_XTOL = 1e-15  # Абсолютная точность корней по y


class AmplitudeError(ValueError):
    """Амплитуда слишком велика: нарушено условие psi_y < 0"""

    pass


class ManufacturedWave:
    """Волна psi = f(y) + eps * cos(x) * g(y) в слое над дном y = -d

    Attributes:
        _lam: Наклон функции Бернулли lambda < 0
        _epsilon: Амплитуда возмущения
        _d: Глубина
        _c: Скорость волны
        _k: sqrt(-lambda)
        _m: sqrt(1 - lambda)
        _eta0: Высота волны на линии гребня
    """

    def __init__(self, lam: float, epsilon: float, d: float, c: float = 0.0) -> None:
        if not lam < 0:
            raise ValueError("bernoulli slope must be negative")
        elif not d > 0:
            raise ValueError("depth must be positive")

        self._lam, self._epsilon, self._d, self._c = float(lam), float(epsilon), float(d), float(c)
        self._k, self._m = math.sqrt(-lam), math.sqrt(1 - lam)
        self._eta0 = self._crest_height()

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(lam={self._lam}, epsilon={self._epsilon}, d={self._d}, c={self._c})"

    @property
    def lam(self) -> float:
        return self._lam

    @property
    def epsilon(self) -> float:
        return self._epsilon

    @property
    def d(self) -> float:
        return self._d

    @property
    def c(self) -> float:
        return self._c

    @property
    def eta0(self) -> float:
        return self._eta0

    @property
    def domain(self) -> tuple[float, float]:
        return -self._d, self._eta0

    @property
    def p0(self) -> float:
        """-psi(0, -d)"""

        return -float(self.psi(0.0, -self._d))

    @property
    def rho(self) -> pr.DensityProfile:
        return pr.DensityProfile([1.0])

    @property
    def beta(self) -> pr.BernoulliFunction:
        return pr.BernoulliFunction([0.0, self._lam])

    def base(self, y: float | np.ndarray) -> np.ndarray:
        """f(y) = -sinh(sqrt(-lambda) * y)"""

        return -np.sinh(self._k * np.asarray(y, dtype=float))

    def mode(self, y: float | np.ndarray) -> np.ndarray:
        """g(y) = cosh(sqrt(1 - lambda) * (y + d))"""

        return np.cosh(self._m * (np.asarray(y, dtype=float) + self._d))

    def psi(self, x: float | np.ndarray, y: float | np.ndarray) -> np.ndarray:
        return self.base(y) + self._epsilon * np.cos(x) * self.mode(y)

    def gradient(self, x: float | np.ndarray, y: float | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(psi_x, psi_y)"""

        y = np.asarray(y, dtype=float)
        psi_x = -self._epsilon * np.sin(x) * self.mode(y)
        psi_y = -self._k * np.cosh(self._k * y) + self._epsilon * np.cos(x) * self._m * np.sinh(
            self._m * (y + self._d))

        return psi_x, psi_y

    def laplacian(self, x: float | np.ndarray, y: float | np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)

        return self._k ** 2 * self.base(y) + self._epsilon * np.cos(x) * (self._m ** 2 - 1) * self.mode(y)

    def velocity(self, x: float | np.ndarray, y: float | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(u, v) при rho = 1"""

        psi_x, psi_y = self.gradient(x, y)

        return self._c + psi_y, -psi_x

    def coefficient(self, n: int, y: float | np.ndarray) -> np.ndarray:
        """Коэффициент a_2n(y) четного ряда по x"""

        if n == 0:
            return self.base(y) + self._epsilon * self.mode(y)

        return (-1) ** n * self._epsilon * self.mode(y) / math.factorial(2 * n)

    def truncated_psi(self, x: float | np.ndarray, y: float | np.ndarray, order: int) -> np.ndarray:
        """Ряд psi, усеченный на степени x^2N"""

        x = np.asarray(x, dtype=float)
        cosine = sum((-1) ** n * x ** (2 * n) / math.factorial(2 * n) for n in range(order + 1))

        return self.base(y) + self._epsilon * cosine * self.mode(y)

    def exact_series(self, order: int, nodes_amt: int = 48) -> sr.EvenSeries:
        """Точные коэффициенты a_0..a_2N в узлах Чебышёва на [-d, eta0]"""

        nodes = ch.lobatto_nodes(nodes_amt, *self.domain)

        return sr.EvenSeries([sr.NodalFunction(self.coefficient(n, nodes), self.domain) for n in range(order + 1)])

    def surface(self, x: float) -> float:
        """eta(x): корень psi(x, y) = 0 на [-d, eta0]"""

        if x == 0:
            return self._eta0

        return float(optimize.brentq(lambda y: self.psi(x, y), -self._d, self._eta0, xtol=_ROOT_XTOL))

    def bed_gap(self, x: float | np.ndarray) -> np.ndarray:
        """psi(x, -d) + p0 = eps * (cos(x) - 1)"""

        return self._epsilon * (np.cos(x) - 1)

    def axis_data(self, nodes_amt: int = 48, g: float = 9.8, p_atm: float = 0.0) -> ax.AxisData:
        """Скорость u(0, y) = c + f'(y) + eps * g'(y) в узлах Чебышёва на [-d, eta0]"""

        return ax.AxisData.from_function(
            lambda y: self.velocity(0.0, y)[0], self._eta0, self._c, self._d, nodes_amt, g, p_atm
        )

    def check_amplitude(self) -> float:
        """Наибольшее значение psi_y в полосе |x| <= pi, -d <= y <= eta0

        Raises:
            AmplitudeError: psi_y >= 0 в какой-то точке
        """

        y = np.linspace(-self._d, self._eta0, _SCAN_POINTS)
        worst = np.maximum(self.gradient(0.0, y)[1], self.gradient(np.pi, y)[1])
        index = int(np.argmax(worst))

        if worst[index] >= 0:
            raise AmplitudeError(f"psi_y >= 0 at y = {y[index]:.17g} for epsilon = {self._epsilon:.17g}")

        return float(worst[index])

    def _crest_height(self) -> float:
        """Корень psi(0, y) = 0, отрезок поиска расширяется вверх удвоением"""

        lower = -self._d

        if not self.psi(0.0, lower) > 0:
            raise AmplitudeError("stream function does not change sign above the bed")

        upper = self._d

        for _ in range(_MAX_EXPANSIONS):
            if self.psi(0.0, upper) < 0:
                break

            upper *= 2
        else:
            raise AmplitudeError("no free surface above the crest")

        if self.psi(0.0, 0.0) == 0:
            return 0.0

        return float(optimize.brentq(lambda y: self.psi(0.0, y), lower, upper, xtol=_ROOT_XTOL))


def manufacture_linear_wave(lam: float, epsilon: float, d: float, c: float = 0.0) -> ManufacturedWave:
    """Построить волну для beta(p) = lam * p и проверить условие psi_y < 0

    Args:
        lam: Наклон функции Бернулли, lam < 0
        epsilon: Амплитуда возмущения
        d: Глубина
        c: Скорость волны

    Returns:
        Волна с найденной высотой гребня

    Raises:
        AmplitudeError: Амплитуда слишком велика
    """

    wave = ManufacturedWave(lam, epsilon, d, c)
    wave.check_amplitude()

    return wave
