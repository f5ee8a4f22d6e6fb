"""Метод Ньютона для разностной задачи о функции высоты

Алгоритм
- Вычислить невязки и аналитическую матрицу Якоби
- Решить разреженную систему для поправки
- Демпфировать шаг делением пополам, пока sup-норма невязки не уменьшится, но не меньше 2^-10
- Остановиться при sup-невязке <= 1e-10 или по исчерпании итераций
- Если начальное приближение четно по q, каждое пробное h заменяется своей четной частью

Вариант с заданной амплитудой: Q становится неизвестной, система дополняется уравнением
h(0, 0) - h(-pi, 0) = 2 * a и окаймляется столбцом производных невязок по Q
"""

from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.sparse import linalg

from stratiwave import profiles as pr
from stratiwave.reference import height as hg

_TOLERANCE = 1e-10  # Допустимая sup-невязка
_MAX_ITERATIONS = 15  # Наибольшее количество итераций по умолчанию
_MIN_FRACTION = 2.0 ** -10  # Наименьшая доля шага Ньютона
_EVEN_TOLERANCE = 1e-12  # Допустимая нечетная часть начального приближения в долях max|h|

logger = logging.getLogger(__name__)


class IterationRecord(NamedTuple):
    """Запись журнала итераций"""

    iteration: int
    residual: float  # sup-невязка после шага
    fraction: float  # Принятая доля шага
    Q: float


class NewtonResult(NamedTuple):
    """Результат метода Ньютона"""

    field: hg.HeightField  # Лучшее найденное поле
    converged: bool
    iterations: int  # Количество выполненных шагов
    residual: float  # sup-невязка лучшего поля
    log: tuple[IterationRecord, ...]


def _system_residual(
        field: hg.HeightField, rho: pr.DensityProfile, beta: pr.BernoulliFunction, Q: float,
        amplitude: float | None
) -> np.ndarray:
    residual = hg.height_residual(field, rho, beta, Q).ravel()

    if amplitude is None:
        return residual

    top = field.h[-1]

    return np.append(residual, top[field.q_amt // 2] - top[0] - 2 * amplitude)


def _mirror(nq: int) -> np.ndarray:
    """Индексы узлов, симметричных относительно q = 0"""

    return (nq - np.arange(nq)) % nq


def _is_even(h: np.ndarray) -> bool:
    if h.shape[1] % 2:
        return False

    return bool(np.max(np.abs(h - h[:, _mirror(h.shape[1])])) <= _EVEN_TOLERANCE * max(1.0, np.max(np.abs(h))))


def solve_height_newton(
        init: hg.HeightField, rho: pr.DensityProfile, beta: pr.BernoulliFunction, Q: float | None = None,
        max_iter: int = _MAX_ITERATIONS, amplitude: float | None = None, tolerance: float = _TOLERANCE
) -> NewtonResult:
    """Решить разностную задачу о функции высоты демпфированным методом Ньютона

    Args:
        init: Начальное приближение с положительной разностной h_p
        rho: Плотность на линиях тока
        beta: Функция Бернулли
        Q: Постоянная Бернулли, по умолчанию из параметров init; при заданной амплитуде - начальное приближение
        max_iter: Наибольшее количество итераций
        amplitude: Полуразность высот гребня и впадины; если задана, Q ищется вместе с h
        tolerance: Допустимая sup-невязка

    Returns:
        Результат с полем, признаком сходимости и журналом итераций

    Raises:
        StagnationError: h_p <= 0 у начального приближения
    """

    if max_iter < 0:
        raise ValueError("negative number of iterations")

    Q = init.params.Q if Q is None else float(Q)
    field = init.with_height(init.h, Q)
    nq = field.q_amt
    keep_even = _is_even(init.h)
    mirror = _mirror(nq)
    residual = _system_residual(field, rho, beta, Q, amplitude)
    norm = float(np.max(np.abs(residual)))
    log = []
    iteration = 0

    logger.info("newton start: residual %.3e, Q = %.17g", norm, Q)

    while norm > tolerance and iteration < max_iter:
        _, jacobian = hg.height_residual_and_jacobian(field, rho, beta, Q)

        if amplitude is not None:
            column = sparse.csr_matrix(hg.head_derivative(field).reshape(-1, 1))
            constraint = np.zeros((1, jacobian.shape[0]))
            constraint[0, (field.p_amt - 2) * nq + nq // 2] = 1.0
            constraint[0, (field.p_amt - 2) * nq] = -1.0
            jacobian = sparse.bmat([[jacobian, column], [sparse.csr_matrix(constraint), None]], format="csr")

        direction = linalg.spsolve(jacobian.tocsc(), -residual)

        if not np.all(np.isfinite(direction)):
            logger.warning("singular newton system at iteration %d", iteration + 1)
            break

        fraction = 1.0
        accepted = False

        while fraction >= _MIN_FRACTION:
            h = field.h.copy()
            h[1:] += fraction * direction[:h[1:].size].reshape(h[1:].shape)

            if keep_even:
                h = (h + h[:, mirror]) / 2

            trial_Q = Q + fraction * direction[-1] if amplitude is not None else Q

            try:
                trial = field.with_height(h, trial_Q)
                trial_residual = _system_residual(trial, rho, beta, trial_Q, amplitude)
            except (ValueError, ArithmeticError):  # Пробный шаг потерял эллиптичность
                trial_residual = None

            if trial_residual is not None and np.max(np.abs(trial_residual)) < norm:
                accepted = True
                break

            fraction /= 2

        if not accepted:
            logger.warning("line search failed at iteration %d, residual %.3e", iteration + 1, norm)
            break

        iteration += 1
        field, Q, residual = trial, trial_Q, trial_residual
        norm = float(np.max(np.abs(residual)))
        log.append(IterationRecord(iteration, norm, fraction, Q))
        logger.info("newton iteration %d: residual %.3e, step %.4g, Q = %.17g", iteration, norm, fraction, Q)

    converged = norm <= tolerance

    if not converged:
        logger.warning("newton did not converge: residual %.3e after %d iterations", norm, iteration)

    return NewtonResult(field, converged, iteration, norm, tuple(log))


def seed_from_laminar(laminar: hg.HeightField, amplitude: float) -> hg.HeightField:
    """Начальное приближение: ламинарное поле плюс amplitude * cos(q) * (p - p0) / (-p0)"""

    p0 = laminar.params.p0
    perturbation = amplitude * np.cos(laminar.q)[None, :] * ((laminar.p - p0) / -p0)[:, None]

    return laminar.with_height(laminar.h + perturbation)
