"""Профиль плотности на линиях тока rho(p) и функция Бернулли beta(p) в виде многочленов"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

_SCAN_POINTS = 1000  # Количество точек проверки профилей на отрезке [p0, 0]
_SLOPE_SLACK = 1e-12  # Допуск на положительную производную плотности, в долях max|rho|


class Polynomial:
    """Многочлен от p с коэффициентами по возрастанию степеней

    Attributes:
        _coefficients: Коэффициенты без нулевого хвоста, как минимум один элемент
    """

    def __init__(self, coefficients: Sequence[float] | np.ndarray) -> None:
        coefficients = np.atleast_1d(np.array(coefficients, dtype=float))

        if coefficients.ndim != 1 or not len(coefficients):
            raise ValueError("polynomial coefficients must be a non-empty vector")
        elif not np.all(np.isfinite(coefficients)):
            raise ValueError("non-finite polynomial coefficients")

        coefficients = npoly.polytrim(coefficients)
        coefficients.setflags(write=False)
        self._coefficients = coefficients

    def __eq__(self, other) -> bool:
        return np.array_equal(self._coefficients, other.coefficients)

    def __hash__(self) -> int:
        return hash(tuple(self._coefficients))

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self._coefficients.tolist()})"

    def __mul__(self, other: Polynomial) -> Polynomial:
        return Polynomial(npoly.polymul(self._coefficients, other.coefficients))

    @property
    def coefficients(self) -> np.ndarray:
        return self._coefficients

    @property
    def degree(self) -> int:
        return len(self._coefficients) - 1

    def __call__(self, p: float | np.ndarray, derivative: int = 0) -> float | np.ndarray:
        """Производная порядка derivative в точке p, порядок выше степени дает 0"""

        return evaluate_polynomial(self, derivative, p)

    def derivative(self, order: int = 1) -> Polynomial:
        return Polynomial(npoly.polyder(self._coefficients, order))

    def antiderivative(self) -> Polynomial:
        """Первообразная G с G(0) = 0"""

        return Polynomial(npoly.polyint(self._coefficients, lbnd=0))


def evaluate_polynomial(polynomial: Polynomial, order: int, p: float | np.ndarray) -> float | np.ndarray:
    """Производная многочлена порядка order в точке p: сдвиг коэффициентов и схема Горнера

    Args:
        polynomial: Многочлен
        order: Порядок производной, не меньше 0
        p: Точка или массив точек

    Returns:
        Значение производной
    """

    if order < 0:
        raise ValueError("negative derivative order")

    result = npoly.polyval(p, npoly.polyder(polynomial.coefficients, order))

    return float(result) if np.ndim(result) == 0 else result


def antiderivative(polynomial: Polynomial) -> Polynomial:
    """Первообразная G многочлена F с G(0) = 0"""

    return polynomial.antiderivative()


class DensityProfile:
    """Плотность на линиях тока rho(p), p = -psi

    Attributes:
        _rho: Многочлен плотности
        _slope: Производная rho'
    """

    def __init__(self, rho: Polynomial | Sequence[float]) -> None:
        self._rho = rho if isinstance(rho, Polynomial) else Polynomial(rho)
        self._slope = self._rho.derivative()

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self._rho.coefficients.tolist()})"

    @property
    def polynomial(self) -> Polynomial:
        return self._rho

    @property
    def slope(self) -> Polynomial:
        """Многочлен rho'"""

        return self._slope

    def __call__(self, p: float | np.ndarray) -> float | np.ndarray:
        return self._rho(p)

    def surface_density(self) -> float:
        """Плотность на свободной поверхности rho(0)"""

        return float(self._rho.coefficients[0])


class BernoulliFunction:
    """Функция Бернулли beta(psi) = -dE/dpsi

    Attributes:
        _beta: Многочлен beta
        _primitive: Первообразная B с B(0) = 0
    """

    def __init__(self, beta: Polynomial | Sequence[float]) -> None:
        self._beta = beta if isinstance(beta, Polynomial) else Polynomial(beta)
        self._primitive = self._beta.antiderivative()

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self._beta.coefficients.tolist()})"

    @property
    def polynomial(self) -> Polynomial:
        return self._beta

    @property
    def primitive(self) -> Polynomial:
        return self._primitive

    def __call__(self, psi: float | np.ndarray) -> float | np.ndarray:
        return self._beta(psi)


class ProfileCheck(NamedTuple):
    """Результат одной проверки профиля"""

    name: str
    passed: bool
    worst_p: float  # Точка с наихудшим значением
    worst_value: float


class ValidationReport(NamedTuple):
    """Отчет о проверке профилей"""

    checks: tuple[ProfileCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[ProfileCheck]:
        return [check for check in self.checks if not check.passed]


def validate_profiles(rho: DensityProfile, beta: BernoulliFunction, p0: float) -> ValidationReport:
    """Проверить профили на отрезке [p0, 0] сканированием по 1000 точкам

    Проверки
    - rho(p) > 0
    - rho'(p) <= 0, плотность не возрастает к поверхности
    - beta(-p) конечна

    Args:
        rho: Плотность на линиях тока
        beta: Функция Бернулли
        p0: Псевдо массовый расход, p0 < 0

    Returns:
        Отчет со списком проверок и точками наихудших значений
    """

    if not p0 < 0:
        raise ValueError("pseudo mass flux must be negative")

    p = np.linspace(p0, 0, _SCAN_POINTS)
    density = rho(p)
    slope = rho.slope(p)
    bernoulli = beta(-p)

    lowest = int(np.argmin(density))
    steepest = int(np.argmax(slope))
    largest = int(np.argmax(np.abs(bernoulli))) if np.all(np.isfinite(bernoulli)) else int(
        np.argmin(np.isfinite(bernoulli)))
    slack = _SLOPE_SLACK * max(1.0, float(np.max(np.abs(density))))

    checks = (
        ProfileCheck("density_positive", bool(density[lowest] > 0), float(p[lowest]), float(density[lowest])),
        ProfileCheck("density_nonincreasing", bool(slope[steepest] <= slack), float(p[steepest]),
                     float(slope[steepest])),
        ProfileCheck("bernoulli_finite", bool(np.all(np.isfinite(bernoulli))), float(p[largest]),
                     float(bernoulli[largest])),
    )

    return ValidationReport(checks)
