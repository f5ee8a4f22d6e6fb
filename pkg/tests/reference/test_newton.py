"""Тесты метода Ньютона для функции высоты"""


from __future__ import annotations

import numpy as np
import pytest

from stratiwave import axis as ax
from stratiwave import diagnostics as dg
from stratiwave import fields as fd
from stratiwave import profiles as pr
from stratiwave import recovery as rc
from stratiwave import series as sr
from stratiwave.reference import height as ht
from stratiwave.reference import laminar as lm
from stratiwave.reference import newton as nt

_RHO = pr.DensityProfile([1.0])
_BETA = pr.BernoulliFunction([0.0])
_BIFURCATION = 19.6 + 9.8 * np.tanh(1.0)  # Q, при котором от однородного потока ответвляется волна длины 2pi


def _uniform_field(Q: float = 20.6, nq: int = 16, np_amt: int = 9) -> ht.HeightField:
    return ht.HeightField.from_laminar(lm.solve_laminar(_RHO, _BETA, 1.0, Q), nq, np_amt)


def test_laminar_is_solution() -> None:
    """Ламинарное поле уже решение, шагов не требуется"""

    field = _uniform_field()
    result = nt.solve_height_newton(field, _RHO, _BETA)

    assert result.converged
    assert result.iterations <= 1
    assert result.residual <= 1e-10


def test_return_to_laminar() -> None:
    """При фиксированном Q вдали от бифуркации малое возмущение гасится"""

    laminar = _uniform_field()
    seed = nt.seed_from_laminar(laminar, 1e-3)
    result = nt.solve_height_newton(seed, _RHO, _BETA, max_iter=10)

    assert result.converged
    assert 1 <= result.iterations <= 10
    assert len(result.log) == result.iterations
    assert np.allclose(result.field.h, laminar.h, atol=1e-8)
    assert all(later.residual < earlier.residual for earlier, later in zip(result.log, result.log[1:]))
    assert dg.monotonicity_check(result.field, 1e-7).status == "degenerate laminar"


def test_seed() -> None:
    """Возмущение нулевое на дне и равно amplitude * cos(q) на поверхности"""

    laminar = _uniform_field()
    seed = nt.seed_from_laminar(laminar, 0.01)

    assert np.array_equal(seed.h[0], laminar.h[0])
    assert np.allclose(seed.h[-1] - laminar.h[-1], 0.01 * np.cos(laminar.q))


def test_fixed_amplitude() -> None:
    """Волна заданной амплитуды вблизи точки бифуркации"""

    laminar = ht.HeightField.from_laminar(lm.solve_laminar(_RHO, _BETA, 1.0, _BIFURCATION), 32, 16)
    seed = nt.seed_from_laminar(laminar, 1e-3)
    result = nt.solve_height_newton(seed, _RHO, _BETA, amplitude=1e-3)
    report = result.field.surface_report()

    assert result.converged
    assert (report.eta_max - report.eta_min) / 2 == pytest.approx(1e-3, abs=1e-9)
    assert report.crest_q == 0.0
    assert abs(result.field.params.Q - _BIFURCATION) <= 0.1
    assert np.all(result.field.h[1:] > result.field.h[:-1])  # h_p > 0

    axis = ht.sample_axis_from_height(result.field, _RHO)

    assert fd.compute_head(axis, _RHO) == pytest.approx(result.field.params.Q, abs=1e-4)



def _bifurcating_wave() -> nt.NewtonResult:
    """Волна амплитуды 1e-3 на сетке 64 x 40"""

    laminar = ht.HeightField.from_laminar(lm.solve_laminar(_RHO, _BETA, 1.0, _BIFURCATION), 64, 40)

    return nt.solve_height_newton(nt.seed_from_laminar(laminar, 1e-3), _RHO, _BETA, amplitude=1e-3)


def test_symmetric_wave() -> None:
    """Итерации из четного начального приближения остаются симметричными относительно гребня"""

    result = _bifurcating_wave()
    report = dg.monotonicity_check(result.field)

    assert result.converged
    assert result.iterations <= 15
    assert result.residual <= 1e-10
    assert dg.symmetry_residual(result.field) <= 1e-8
    assert report.status == "pass" and report.strict_trough


def test_recovered_stream_function() -> None:
    """Ряд, восстановленный по скорости на гребне, воспроизводит линии тока волны"""

    field = _bifurcating_wave().field.crest_shifted()
    axis = ht.sample_axis_from_height(field, _RHO)
    a0, p0 = ax.solve_axis_streamfunction(axis, _RHO)
    psi = rc.recover_series(a0, _RHO, _BETA, fd.wave_parameters(axis, _RHO, p0))
    near = np.abs(field.q) <= 0.5
    q, p = np.meshgrid(field.q[near], field.p, indexing="xy")
    y = field.h[:, near] - field.params.d

    assert p0 == pytest.approx(field.params.p0, abs=5e-4)
    assert np.max(np.abs(sr.evaluate_series(psi, q, y) + p)) <= 5e-4


def test_no_iterations() -> None:
    """Без итераций возвращается начальное приближение"""

    seed = nt.seed_from_laminar(_uniform_field(), 1e-3)
    result = nt.solve_height_newton(seed, _RHO, _BETA, max_iter=0)

    assert not result.converged
    assert result.iterations == 0 and result.log == ()
    assert np.array_equal(result.field.h, seed.h)


def test_wrong_iterations() -> None:
    """Отрицательное количество итераций"""

    with pytest.raises(ValueError):
        nt.solve_height_newton(_uniform_field(), _RHO, _BETA, max_iter=-1)


def test_stagnating_seed() -> None:
    """Начальное приближение с h_p <= 0"""

    params = ax.WaveParameters(1.0, 1.0, 9.8, 0.0, -1.0, 20.6)
    field = ht.HeightField(np.repeat(np.linspace(1.0, 0.0, 5)[:, None], 8, axis=1), params)

    with pytest.raises(ax.StagnationError):
        nt.solve_height_newton(field, _RHO, _BETA)
