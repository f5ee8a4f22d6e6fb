"""Численные проверки качественных свойств волн: симметрия, монотонность линий тока, закон Бернулли,
убывание коэффициентов ряда и сканирование отраженных разностей

Все проверки только читают поля и возвращают отчеты
"""

from __future__ import annotations

import functools
import logging
import math
from typing import NamedTuple

import numpy as np

from stratiwave import fields as fd
from stratiwave import profiles as pr
from stratiwave import series as sr
from stratiwave.reference import height as hg

_MONOTONICITY_TOLERANCE = 1e-12  # Допуск нарушения монотонности
_REFLECTION_TOLERANCE = 1e-10  # Отрицательный минимум отраженной разности ниже этого порога считается нарушением
_SAMPLES = 200  # Количество пар точек для проверки закона Бернулли
_LEVEL_SPACING = 1e-12  # Пары с меньшей разностью уровней psi пропускаются, в долях max|psi|
_RADIUS_FLOOR = 1e-14  # Нормы коэффициентов ниже порога считаются нулевыми
_GRID_SLACK = 1e-12  # Допуск симметрии сетки по x, в долях max|x|

logger = logging.getLogger(__name__)


@functools.singledispatch
def symmetry_residual(field) -> float:
    """Нормированная sup-разность значений в зеркальных относительно линии гребня точках

    Для FluidField сравнивается psi(x, y) и psi(-x, y), для HeightField h(q, p) и h(-q, p)

    Raises:
        StructureError: Сетка несимметрична
    """

    raise TypeError(f"unsupported field type {type(field).__name__}")


@symmetry_residual.register
def _(field: fd.FluidField) -> float:
    x = field.x

    if np.max(np.abs(x + x[::-1])) > _GRID_SLACK * max(float(np.max(np.abs(x))), 1.0):
        raise sr.StructureError("x grid is not symmetric about the crest line")

    psi = field["psi"]
    mirrored = psi[:, ::-1]
    both = np.isfinite(psi) & np.isfinite(mirrored)
    scale = float(np.max(np.abs(psi[both]))) if np.any(both) else 0.0

    if not scale:
        return 0.0

    return float(np.max(np.abs(psi[both] - mirrored[both]))) / scale


@symmetry_residual.register
def _(field: hg.HeightField) -> float:
    nq = field.q_amt

    if nq % 2:
        raise sr.StructureError("q grid with an odd number of nodes has no mirror pairs")

    h = field.crest_shifted().h  # Ось симметрии - гребень
    mirror = (nq - np.arange(nq)) % nq
    scale = float(np.max(np.abs(h)))

    if not scale:
        return 0.0

    return float(np.max(np.abs(h - h[:, mirror]))) / scale


class MonotonicityReport(NamedTuple):
    """Проверка положения впадины и монотонности линий тока между впадиной и гребнем"""

    status: str  # "pass", "degenerate laminar" или "fail"
    trough_violation: float  # max (h(-pi, p) - h(q, p))
    trough_location: tuple[float, float]  # (q, p) худшего нарушения
    order_violation: float  # max (h(q_j, p) - h(q_j+1, p)) на [-pi, 0]
    order_location: tuple[float, float]
    strict_trough: bool  # h(-pi, 0) < h(q, 0) при q != -pi

    @property
    def passed(self) -> bool:
        return self.status != "fail"


def monotonicity_check(field: hg.HeightField, tolerance: float = _MONOTONICITY_TOLERANCE) -> MonotonicityReport:
    """Проверить, что каждая линия тока достигает минимума во впадине и не убывает от впадины к гребню

    Поле предварительно сдвигается так, чтобы гребень лежал в q = 0

    Args:
        field: Функция высоты
        tolerance: Допуск нарушения

    Returns:
        Отчет; поле без зависимости от q получает статус "degenerate laminar"
    """

    shifted = field.crest_shifted()
    h, q, p = shifted.h, shifted.q, shifted.p

    trough_gap = h[:, :1] - h
    i, j = np.unravel_index(int(np.argmax(trough_gap)), trough_gap.shape)
    trough_violation = float(trough_gap[i, j])
    trough_location = (float(q[j]), float(p[i]))

    rising = -np.diff(h[:, :shifted.q_amt // 2 + 1], axis=1)
    k, m = np.unravel_index(int(np.argmax(rising)), rising.shape)
    order_violation = float(rising[k, m])
    order_location = (float(q[m]), float(p[k]))

    strict_trough = bool(np.min(h[-1, 1:] - h[-1, 0]) > tolerance)

    if trough_violation > tolerance or order_violation > tolerance:
        status = "fail"
    elif strict_trough:
        status = "pass"
    else:
        status = "degenerate laminar"

    return MonotonicityReport(status, trough_violation, trough_location, order_violation, order_location,
                              strict_trough)


class BernoulliReport(NamedTuple):
    """Сравнение разностной производной dE/dpsi с -beta(psi)"""

    mismatch: float  # sup |dE/dpsi + beta| / (1 + |beta|)
    worst_point: tuple[float, float]  # (x, y) нижней точки худшей пары
    pairs: int  # Количество использованных пар
    skipped: int  # Пары с вырожденной разностью уровней


def bernoulli_residual(
        field: fd.FluidField, rho: pr.DensityProfile, beta: pr.BernoulliFunction, seed: int = 0,
        samples: int = _SAMPLES
) -> BernoulliReport:
    """Проверить dE/dpsi = -beta(psi) на случайных парах соседних по вертикали точек жидкости

    Энергия пересчитывается из давления и скоростей: E = P + rho/2 * ((u - c)^2 + v^2) + g * y * rho,
    поэтому искажение давления видно в отчете

    Args:
        field: Поле
        rho: Плотность на линиях тока
        beta: Функция Бернулли
        seed: Зерно генератора псевдослучайных чисел
        samples: Количество пар

    Returns:
        Отчет с наибольшим относительным расхождением
    """

    params = field.params
    psi = field["psi"]
    density = rho(-np.nan_to_num(psi))
    energy = (field["P"] + density / 2 * ((field["u"] - params.c) ** 2 + field["v"] ** 2)
              + params.g * field.y[:, None] * density)

    valid = np.isfinite(energy)
    lower_rows, columns = np.nonzero(valid[:-1] & valid[1:])

    if not len(lower_rows):
        return BernoulliReport(0.0, (math.nan, math.nan), 0, 0)

    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(lower_rows), size=min(samples, len(lower_rows)), replace=False)
    threshold = _LEVEL_SPACING * max(float(np.nanmax(np.abs(psi))), 1.0)

    mismatch, worst, skipped = 0.0, (math.nan, math.nan), 0

    for index in chosen:
        i, j = lower_rows[index], columns[index]
        spacing = psi[i + 1, j] - psi[i, j]

        if abs(spacing) <= threshold:
            skipped += 1
            continue

        slope = (energy[i + 1, j] - energy[i, j]) / spacing
        level = beta((psi[i + 1, j] + psi[i, j]) / 2)
        relative = abs(slope + level) / (1 + abs(level))

        if relative > mismatch:
            mismatch, worst = float(relative), (float(field.x[j]), float(field.y[i]))

    if skipped:
        logger.warning("%d bernoulli pairs skipped on degenerate level spacing", skipped)

    return BernoulliReport(mismatch, worst, len(chosen) - skipped, skipped)


class AnalyticityReport(NamedTuple):
    """Убывание норм коэффициентов ряда"""

    norms: tuple[float, ...]  # ||a_2n||, n = 0..N
    ratios: tuple[float, ...]  # ||a_2n+2|| / ||a_2n||, n = 1..N-1, NaN при нулевом знаменателе
    decay_rate: float  # Наклон log||a_2n|| по степени 2n, -inf для неограниченного радиуса
    radius: float
    monotone_decay: bool  # Строгое убывание по последним ceil(N/2) ненулевым коэффициентам
    message: str


def analyticity_report(psi: sr.EvenSeries) -> AnalyticityReport:
    """Таблица норм коэффициентов, скорость убывания и оценка радиуса сходимости

    Raises:
        InsufficientDataError: Порядок ряда меньше 3
    """

    radius = sr.estimate_radius(psi)
    norms = np.array([a.sup_norm() for a in psi.coefficients])
    higher = norms[1:]
    ratios = tuple(float(b / a) if a > 0 else math.nan for a, b in zip(higher[:-1], higher[1:]))

    if math.isinf(radius):
        return AnalyticityReport(tuple(norms.tolist()), ratios, -math.inf, radius, True,
                                 "all higher coefficients below floor; unbounded radius")

    tail = higher[higher >= _RADIUS_FLOOR][-math.ceil(psi.order / 2):]
    monotone = bool(np.all(np.diff(tail) < 0))
    message = f"radius estimate {radius:.6g}" + ("" if monotone else "; non-monotone coefficient decay")

    return AnalyticityReport(tuple(norms.tolist()), ratios, -math.log(radius), radius, monotone, message)


class MovingPlaneReport(NamedTuple):
    """Минимум отраженной разности h(2 * lam - q, p) - h(q, p) по подобластям max(2 * lam, -pi) < q < lam"""

    minimum: float
    location: tuple[float, float, float]  # (lam, q, p) точки минимума
    passed: bool


def moving_plane_scan(field: hg.HeightField, tolerance: float = _REFLECTION_TOLERANCE) -> MovingPlaneReport:
    """Пройти плоскостью q = lam по сетке lam_m = -pi + m * dq / 2, m = 1..nq-1

    Отражение узла j относительно lam_m - узел m - j. Строка дна пропускается
    """

    shifted = field.crest_shifted()
    h, q, p = shifted.h[1:], shifted.q, shifted.p[1:]
    dq = shifted.steps[0]
    minimum, location = math.inf, (math.nan, math.nan, math.nan)

    for m in range(1, shifted.q_amt):
        indices = np.arange(1, (m + 1) // 2)
        indices = indices[2 * indices < m]

        if not len(indices):
            continue

        reflected = h[:, m - indices] - h[:, indices]
        i, k = np.unravel_index(int(np.argmin(reflected)), reflected.shape)

        if reflected[i, k] < minimum:
            minimum = float(reflected[i, k])
            location = (float(-np.pi + m * dq / 2), float(q[indices[k]]), float(p[i]))

    if math.isinf(minimum):
        minimum = 0.0

    return MovingPlaneReport(minimum, location, minimum >= -tolerance)
