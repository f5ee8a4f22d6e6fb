"""Четные усеченные степенные ряды по x с коэффициентами-функциями от y

Ряд psi(x, y) = sum a_2n(y) * x^2n, n = 0..N, хранит только четные степени, поэтому четность по x задана структурно.
Коэффициенты a_2n хранятся значениями в узлах Чебышёва-Гаусса-Лобатто на отрезке [y_lo, y_hi].

Вторая производная по y вычисляется в пространстве коэффициентов Чебышёва
- Перейти от значений к коэффициентам дискретным косинусным преобразованием
- Отсечь шумовой хвост коэффициентов
- Продифференцировать ряд Чебышёва и вернуться к значениям в узлах

Это та же производная интерполянта, что и у квадрата матрицы спектрального дифференцирования,
но без роста ошибок округления порядка M^4 при многократном применении
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from stratiwave import profiles as pr
from stratiwave.algorithms import chebyshev as ch

_MIN_NODES = 4  # Наименьшее количество узлов
_DOMAIN_SLACK = 1e-12  # Допуск выхода за отрезок, в долях его длины
_RADIUS_FLOOR = 1e-14  # Коэффициенты с меньшей нормой считаются нулевыми при оценке радиуса сходимости


class StructureError(ValueError):
    """Несовместимые сетки, отрезки или порядки рядов"""

    pass


class DomainError(ValueError):
    """Точка вне области определения"""

    pass


class InsufficientDataError(ValueError):
    """Недостаточно коэффициентов для оценки"""

    pass


class DivergenceError(ArithmeticError):
    """Получено бесконечное значение или NaN"""

    pass


class NodalFunction:
    """Функция от y, заданная значениями в узлах Чебышёва-Гаусса-Лобатто

    Attributes:
        _values: Значения в узлах, узлы идут от y_hi к y_lo
        _domain: Отрезок (y_lo, y_hi)
        _coefficients: Коэффициенты Чебышёва, вычисляются при первом обращении
    """

    def __init__(self, values: Sequence[float] | np.ndarray, domain: tuple[float, float]) -> None:
        values = np.array(values, dtype=float)
        lower, upper = float(domain[0]), float(domain[1])

        if values.ndim != 1 or len(values) < _MIN_NODES:
            raise StructureError(f"at least {_MIN_NODES} nodal values are required")
        elif not lower < upper:
            raise StructureError("empty domain")
        elif not np.all(np.isfinite(values)):
            raise DivergenceError("non-finite nodal values")

        values.setflags(write=False)
        self._values = values
        self._domain = (lower, upper)
        self._coefficients: np.ndarray | None = None

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(nodes={len(self._values)}, domain={self._domain})"

    @classmethod
    def from_function(
            cls, function: Callable[[np.ndarray], np.ndarray], nodes_amt: int, domain: tuple[float, float]
    ) -> NodalFunction:
        """Взять значения функции в узлах отрезка"""

        return cls(function(ch.lobatto_nodes(nodes_amt, *domain)), domain)

    @classmethod
    def constant(cls, value: float, nodes_amt: int, domain: tuple[float, float]) -> NodalFunction:
        return cls(np.full(nodes_amt, float(value)), domain)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def domain(self) -> tuple[float, float]:
        return self._domain

    @property
    def nodes_amt(self) -> int:
        return len(self._values)

    @property
    def nodes(self) -> np.ndarray:
        return ch.lobatto_nodes(len(self._values), *self._domain)

    @property
    def coefficients(self) -> np.ndarray:
        """Коэффициенты Чебышёва интерполянта"""

        if self._coefficients is None:
            coefficients = ch.to_coefficients(self._values)
            coefficients.setflags(write=False)
            self._coefficients = coefficients

        return self._coefficients

    def __call__(self, y: float | np.ndarray) -> float | np.ndarray:
        """Значение интерполянта в точках отрезка

        Raises:
            DomainError: Точка вне отрезка
        """

        result = npcheb.chebval(ch.to_reference(check_domain(y, self._domain), *self._domain), self.coefficients)

        return float(result) if np.ndim(result) == 0 else result

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self._values)))

    def is_compatible(self, other: NodalFunction) -> bool:
        return self.nodes_amt == other.nodes_amt and self._domain == other.domain

    def significant_coefficients(self, floor: float = 0.0) -> np.ndarray:
        """Коэффициенты Чебышёва без шумового хвоста

        Хвост отсекается поиском плато огибающей и, если floor > 0, абсолютным порогом floor

        Args:
            floor: Абсолютный порог, ниже которого хвостовые коэффициенты считаются нулевыми

        Returns:
            Значимая часть коэффициентов, возможно пустая
        """

        length = ch.chop_length(self.coefficients)

        if floor > 0:
            length = min(length, ch.floor_length(self.coefficients, floor))

        return self.coefficients[:length]

    def chopped(self, floor: float = 0.0) -> NodalFunction:
        """Та же функция без шумового хвоста коэффициентов"""

        return NodalFunction(ch.to_values(self.significant_coefficients(floor), self.nodes_amt), self._domain)

    def derivative(self, order: int = 1, floor: float = 0.0) -> NodalFunction:
        """Производная заданного порядка по y

        Args:
            order: Порядок производной
            floor: Абсолютный порог отсечения хвоста коэффициентов перед дифференцированием

        Returns:
            Производная в тех же узлах
        """

        if order < 0:
            raise ValueError("negative derivative order")

        coefficients = self.significant_coefficients(floor)

        if len(coefficients) <= order:
            return NodalFunction.constant(0.0, self.nodes_amt, self._domain)

        lower, upper = self._domain
        derived = npcheb.chebder(coefficients, m=order, scl=2 / (upper - lower))

        return NodalFunction(ch.to_values(derived, self.nodes_amt), self._domain)


class EvenSeries:
    """Четный усеченный ряд psi(x, y) = sum a_2n(y) * x^2n, n = 0..N

    Attributes:
        _coefficients: Коэффициенты a_0, a_2, ..., a_2N на общей сетке
    """

    def __init__(self, coefficients: Sequence[NodalFunction]) -> None:
        coefficients = tuple(coefficients)

        if not coefficients:
            raise StructureError("series without coefficients")

        for coefficient in coefficients[1:]:
            if not coefficient.is_compatible(coefficients[0]):
                raise StructureError("series coefficients live on different grids")

        self._coefficients = coefficients
        self._derivatives: dict[int, np.ndarray] = {}  # Производные коэффициентов в узлах по порядку производной

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(order={self.order}, nodes={self.nodes_amt}, domain={self.domain})"

    def __len__(self) -> int:
        return len(self._coefficients)

    def __getitem__(self, n: int) -> NodalFunction:
        return self._coefficients[n]

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, domain: tuple[float, float]) -> EvenSeries:
        """Ряд по матрице значений: строка n содержит a_2n в узлах"""

        return cls([NodalFunction(row, domain) for row in np.atleast_2d(matrix)])

    @classmethod
    def zeros(cls, order: int, nodes_amt: int, domain: tuple[float, float]) -> EvenSeries:
        return cls.from_matrix(np.zeros((order + 1, nodes_amt)), domain)

    @property
    def coefficients(self) -> tuple[NodalFunction, ...]:
        return self._coefficients

    @property
    def order(self) -> int:
        """Порядок усечения N, старшая хранимая степень x^2N"""

        return len(self._coefficients) - 1

    @property
    def domain(self) -> tuple[float, float]:
        return self._coefficients[0].domain

    @property
    def nodes_amt(self) -> int:
        return self._coefficients[0].nodes_amt

    @property
    def nodes(self) -> np.ndarray:
        return self._coefficients[0].nodes

    def matrix(self) -> np.ndarray:
        """Значения коэффициентов в узлах, матрица (N+1) x M"""

        return np.array([coefficient.values for coefficient in self._coefficients])

    def derivative_matrix(self, order: int) -> np.ndarray:
        """Производные коэффициентов по y в узлах, матрица (N+1) x M"""

        if order not in self._derivatives:
            self._derivatives[order] = np.array([a.derivative(order).values for a in self._coefficients])

        return self._derivatives[order]

    def coefficient_values(self, y: float | np.ndarray, derivative: int = 0) -> np.ndarray:
        """Значения коэффициентов (или их производных по y) в произвольных точках

        Returns:
            Массив формы (N+1,) + shape(y)
        """

        lower, upper = self.domain
        reference = ch.to_reference(check_domain(y, self.domain), lower, upper)

        if derivative == 0:
            table = np.array([a.coefficients for a in self._coefficients])
        else:
            table = np.array([ch.to_coefficients(row) for row in self.derivative_matrix(derivative)])

        return npcheb.chebval(reference, table.T)


def check_domain(y: float | np.ndarray, domain: tuple[float, float]) -> np.ndarray:
    """Проверить, что точки лежат на отрезке, и прижать к отрезку точки в пределах допуска

    Raises:
        DomainError: Точка вне отрезка
    """

    lower, upper = domain
    y = np.asarray(y, dtype=float)
    slack = _DOMAIN_SLACK * (upper - lower)

    if np.any(y < lower - slack) or np.any(y > upper + slack) or np.any(np.isnan(y)):
        raise DomainError(f"point outside of [{lower:.17g}, {upper:.17g}]")

    return np.clip(y, lower, upper)


def add_series(a: EvenSeries, b: EvenSeries, alpha: float = 1.0, beta: float = 1.0) -> EvenSeries:
    """Линейная комбинация рядов alpha * a + beta * b

    Raises:
        StructureError: Ряды разных порядков или на разных сетках
    """

    _check_same_structure(a, b)

    return EvenSeries.from_matrix(alpha * a.matrix() + beta * b.matrix(), a.domain)


def multiply_series(a: EvenSeries, b: EvenSeries) -> EvenSeries:
    """Усеченное произведение Коши: c_2n = sum a_2k * b_2(n-k), степени выше x^2N отбрасываются

    Raises:
        StructureError: Ряды разных порядков или на разных сетках
    """

    _check_same_structure(a, b)

    return EvenSeries.from_matrix(_cauchy_product(a.matrix(), b.matrix()), a.domain)


def compose_polynomial(polynomial: pr.Polynomial, sign: int, psi: EvenSeries) -> EvenSeries:
    """Ряд функции F(sign * psi) для многочлена F

    Вычисляется схемой Горнера над рядами, поэтому результат точен с точностью до усечения

    Args:
        polynomial: Многочлен F
        sign: Знак аргумента, +1 или -1
        psi: Ряд, подставляемый в многочлен

    Returns:
        Ряд того же порядка на той же сетке

    Raises:
        DivergenceError: Переполнение при вычислении
    """

    matrix = compose_matrix(polynomial.coefficients, sign, psi.matrix())

    return EvenSeries.from_matrix(matrix, psi.domain)


def compose_matrix(coefficients: Sequence[float] | np.ndarray, sign: int, matrix: np.ndarray) -> np.ndarray:
    """Схема Горнера над рядами, заданными матрицами значений коэффициентов в узлах"""

    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")

    argument = sign * matrix
    result = np.zeros_like(matrix, dtype=float)
    result[0] = coefficients[-1]

    for coefficient in coefficients[-2::-1]:
        result = _cauchy_product(result, argument)
        result[0] += coefficient

    if not np.all(np.isfinite(result)):
        raise DivergenceError("non-finite value in polynomial composition")

    return result


def differentiate_twice(function: NodalFunction) -> NodalFunction:
    """Вторая производная по y"""

    return function.derivative(2)


def evaluate_series(psi: EvenSeries, x: float | np.ndarray, y: float | np.ndarray) -> float | np.ndarray:
    """Значение ряда sum a_2n(y) * x^2n, схема Горнера по x^2

    Raises:
        DomainError: y вне отрезка ряда
    """

    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    values = psi.coefficient_values(y)
    squared = x * x
    result = values[-1]

    for value in values[-2::-1]:
        result = result * squared + value

    return float(result) if np.ndim(result) == 0 else result


def evaluate_gradient(
        psi: EvenSeries, x: float | np.ndarray, y: float | np.ndarray
) -> tuple[float | np.ndarray, float | np.ndarray]:
    """Производные ряда psi_x и psi_y

    psi_x = x * sum 2n * a_2n(y) * x^(2n-2) нечетна по x по построению, psi_y четна

    Raises:
        DomainError: y вне отрезка ряда
    """

    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    squared = x * x
    values = psi.coefficient_values(y)
    slopes = psi.coefficient_values(y, derivative=1)

    psi_x = np.zeros_like(squared)

    for n in range(psi.order, 0, -1):
        psi_x = psi_x * squared + 2 * n * values[n]

    psi_x = x * psi_x
    psi_y = slopes[-1]

    for slope in slopes[-2::-1]:
        psi_y = psi_y * squared + slope

    if np.ndim(psi_x) == 0:
        return float(psi_x), float(psi_y)

    return psi_x, psi_y


def estimate_radius(psi: EvenSeries) -> float:
    """Оценка радиуса сходимости ряда по убыванию норм коэффициентов

    Алгоритм
    - Вычислить нормы ||a_2n|| для n = 1..N
    - Если все нормы ниже порога, ряд не зависит от x и радиус не ограничен
    - По последним ceil(N/2) ненулевым коэффициентам методом наименьших квадратов подобрать прямую
      log||a_2n|| = s * 2n + b, радиус равен exp(-s)

    Returns:
        Оценка радиуса, math.inf для неограниченного радиуса

    Raises:
        InsufficientDataError: Порядок ряда меньше 3
    """

    if psi.order < 3:
        raise InsufficientDataError("radius estimate needs series order of at least 3")

    norms = np.array([a.sup_norm() for a in psi.coefficients[1:]])
    orders = np.arange(1, psi.order + 1)
    nonzero = norms >= _RADIUS_FLOOR

    if np.count_nonzero(nonzero) < 2:
        return math.inf

    tail = math.ceil(psi.order / 2)
    powers = 2 * orders[nonzero][-tail:]
    slope = np.polyfit(powers, np.log(norms[nonzero][-tail:]), 1)[0]

    return float(np.exp(-slope))


def _check_same_structure(a: EvenSeries, b: EvenSeries) -> None:
    if a.order != b.order:
        raise StructureError("series of different truncation orders")
    elif not a[0].is_compatible(b[0]):
        raise StructureError("series live on different grids")


def _cauchy_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Усеченное произведение Коши матриц коэффициентов, произведения в узлах поточечные"""

    result = np.zeros_like(a, dtype=float)

    for n in range(len(a)):
        result[n] = np.sum(a[:n + 1] * b[n::-1], axis=0)

    return result
