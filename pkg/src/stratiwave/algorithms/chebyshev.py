"""Узлы Чебышёва-Гаусса-Лобатто, переход между узловыми значениями и коэффициентами Чебышёва

Алгоритм перехода к коэффициентам
- Значения в узлах cos(k*pi/(M-1)) связаны с коэффициентами разложения по многочленам Чебышёва
  дискретным косинусным преобразованием первого типа
- Крайние коэффициенты делятся пополам, остальные нормируются на M-1

Временная сложность O(M*logM)

Отсечение шума в хвосте коэффициентов выполняется поиском плато огибающей (алгоритм standardChop из Chebfun)
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy import fft

_EPSILON = float(np.finfo(float).eps)  # Машинная точность
_MIN_CHOP_LENGTH = 17  # Меньшие наборы коэффициентов не отсекаются


def lobatto_nodes(nodes_amt: int, lower: float, upper: float) -> np.ndarray:
    """Узлы Чебышёва-Гаусса-Лобатто, отображенные на отрезок [lower, upper]

    Узлы идут по убыванию: первый узел равен upper, последний равен lower

    Args:
        nodes_amt: Количество узлов M
        lower: Левый конец отрезка
        upper: Правый конец отрезка

    Returns:
        Массив из M узлов
    """

    if nodes_amt < 2:
        raise ValueError("at least two nodes are required")
    elif not lower < upper:
        raise ValueError("empty interval")

    reference = np.cos(np.pi * np.arange(nodes_amt) / (nodes_amt - 1))
    nodes = lower + (reference + 1) * ((upper - lower) / 2)
    nodes[0], nodes[-1] = upper, lower  # Концы отрезка без ошибок округления

    return nodes


def to_reference(points: np.ndarray | float, lower: float, upper: float) -> np.ndarray:
    """Перевести точки отрезка [lower, upper] на отрезок [-1, 1]"""

    return (2 * np.asarray(points, dtype=float) - (upper + lower)) / (upper - lower)


def to_coefficients(values: np.ndarray) -> np.ndarray:
    """Коэффициенты Чебышёва интерполянта по значениям в узлах Лобатто

    Args:
        values: Значения в узлах в порядке lobatto_nodes

    Returns:
        Коэффициенты c_0..c_{M-1} разложения по T_k
    """

    values = np.asarray(values, dtype=float)
    coefficients = fft.dct(values, type=1) / (len(values) - 1)
    coefficients[0] /= 2
    coefficients[-1] /= 2

    return coefficients


def to_values(coefficients: np.ndarray, nodes_amt: int) -> np.ndarray:
    """Значения в узлах Лобатто по коэффициентам Чебышёва

    Недостающие старшие коэффициенты считаются нулевыми

    Args:
        coefficients: Коэффициенты разложения по T_k, не больше nodes_amt штук
        nodes_amt: Количество узлов M

    Returns:
        Значения в M узлах в порядке lobatto_nodes
    """

    if len(coefficients) > nodes_amt:
        raise ValueError("more coefficients than nodes")

    padded = np.zeros(nodes_amt)
    padded[:len(coefficients)] = coefficients
    padded[1:-1] /= 2

    return fft.dct(padded, type=1)


def chop_length(coefficients: np.ndarray, tolerance: float = _EPSILON) -> int:
    """Количество значимых коэффициентов Чебышёва

    Алгоритм
    - Построить монотонную огибающую модулей коэффициентов, нормированную на первый элемент
    - Найти начало плато: место, где огибающая перестает убывать относительно уровня tolerance
    - Выбрать точку отсечения как минимум огибающей с линейным штрафом за длину

    Args:
        coefficients: Коэффициенты Чебышёва
        tolerance: Относительный уровень шума

    Returns:
        Длина значимой части, не меньше 1
    """

    length = len(coefficients)

    if length < _MIN_CHOP_LENGTH:
        return length

    envelope = np.maximum.accumulate(np.abs(coefficients)[::-1])[::-1]

    if envelope[0] == 0:
        return 1

    envelope = envelope / envelope[0]
    log_tolerance = np.log(tolerance)
    plateau_point, j2 = length, length

    for j in range(2, length + 1):  # Индексы с единицы, как в исходном описании алгоритма
        j2 = int(np.floor(1.25 * j + 5.5))

        if j2 > length:
            return length

        e1, e2 = envelope[j - 1], envelope[j2 - 1]

        if e1 == 0 or e2 / e1 > 3 * (1 - np.log(e1) / log_tolerance):
            plateau_point = j - 1
            break

    if envelope[plateau_point - 1] == 0:
        return plateau_point

    floor = tolerance ** (7 / 6)
    j3 = int(np.sum(envelope >= floor))

    if j3 < j2:
        j2 = j3 + 1
        envelope[j2 - 1] = floor

    penalized = np.log10(envelope[:j2]) + np.linspace(0, -np.log10(tolerance) / 3, j2)

    return max(int(np.argmin(penalized)), 1)


def floor_length(coefficients: np.ndarray, floor: float) -> int:
    """Длина набора коэффициентов без хвоста, лежащего ниже абсолютного порога floor

    Если ни один коэффициент не превышает порог, возвращается 0
    """

    above = np.nonzero(np.abs(coefficients) > floor)[0]

    return int(above[-1]) + 1 if len(above) else 0


def clenshaw_curtis(values: np.ndarray, lower: float, upper: float) -> float:
    """Квадратура Кленшоу-Кертиса по значениям в узлах Лобатто

    Интеграл интерполянта равен сумме c_k * int T_k, где int T_k = 2 / (1 - k^2) для четных k и 0 для нечетных

    Args:
        values: Значения подынтегральной функции в узлах в порядке lobatto_nodes
        lower: Нижний предел
        upper: Верхний предел

    Returns:
        Значение интеграла
    """

    coefficients = to_coefficients(values)
    orders = np.arange(len(coefficients))
    moments = np.zeros(len(coefficients))
    even = orders % 2 == 0
    moments[even] = 2 / (1 - orders[even] ** 2)

    return float(np.dot(coefficients, moments) * (upper - lower) / 2)


def second_derivative_gain(length: int, lower: float, upper: float) -> float:
    """Наибольший коэффициент второй производной ряда T_0 + ... + T_{length-1} на отрезке [lower, upper]

    Все коэффициенты второй производной такого ряда положительны, поэтому это оценка сверху
    роста ошибки коэффициентов, не превышающей единицы, при двукратном дифференцировании
    """

    if length < 3:
        return 0.0

    return float(np.max(npcheb.chebder(np.ones(length), m=2, scl=2 / (upper - lower))))
