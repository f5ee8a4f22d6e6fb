"""Классический метод Рунге-Кутты 4-го порядка с проходом по заданным станциям

Алгоритм
- Отрезок между соседними станциями делится на равные подшаги
- На каждом подшаге выполняется шаг RK4
- Состояние запоминается ровно в станциях, поэтому решение получается на заранее известной сетке

Временная сложность O(S*K), S - количество станций, K - количество подшагов между станциями
"""

from __future__ import annotations

from typing import Callable

import numpy as np

RightHandSide = Callable[[float, np.ndarray], np.ndarray]  # Правая часть системы y' = f(t, y)


class IntegrationError(Exception):
    """Решение перестало быть конечным"""

    pass


def rk4_step(rhs: RightHandSide, t: float, state: np.ndarray, step: float) -> np.ndarray:
    """Один шаг классического метода RK4"""

    k1 = rhs(t, state)
    k2 = rhs(t + step / 2, state + step / 2 * k1)
    k3 = rhs(t + step / 2, state + step / 2 * k2)
    k4 = rhs(t + step, state + step * k3)

    return state + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def march(rhs: RightHandSide, initial_state: np.ndarray, stations: np.ndarray, substeps: int = 8) -> np.ndarray:
    """Проинтегрировать систему от первой станции до последней

    Станции могут идти как по возрастанию, так и по убыванию аргумента

    Args:
        rhs: Правая часть f(t, y)
        initial_state: Состояние в первой станции
        stations: Станции, в которых нужно получить решение
        substeps: Количество шагов RK4 между соседними станциями

    Returns:
        Матрица состояний, строка i соответствует станции i

    Raises:
        IntegrationError: Состояние перестало быть конечным
    """

    if substeps < 1:
        raise ValueError("number of substeps must be positive")

    state = np.array(initial_state, dtype=float)
    states = [state]

    for start, finish in zip(stations[:-1], stations[1:]):
        step = (finish - start) / substeps

        for i in range(substeps):
            state = rk4_step(rhs, start + i * step, state, step)

        if not np.all(np.isfinite(state)):
            raise IntegrationError(f"non-finite state at t = {finish:.17g}")

        states.append(state)

    return np.array(states)
