"""Тесты полей скорости и давления, свободной поверхности и проверок расхода и граничных условий"""


from __future__ import annotations

import math

import numpy as np
import pytest

from stratiwave import axis as ax
from stratiwave import fields as fd
from stratiwave import profiles as pr
from stratiwave import recovery as rc
from stratiwave import series as sr
from stratiwave.reference import manufactured as mf

_RHO = pr.DensityProfile([1.0])
_BETA = pr.BernoulliFunction([0.0])


def _get_test_case(epsilon: float = 0.01) -> tuple[mf.ManufacturedWave, sr.EvenSeries, ax.WaveParameters]:
    """Волна rho = 1, beta(p) = -4p, d = 1 и ряд по точной a0"""

    wave = mf.manufacture_linear_wave(-4.0, epsilon, 1.0)
    a0 = sr.NodalFunction(wave.exact_series(0).matrix()[0], wave.domain)
    params = ax.WaveParameters(wave.c, wave.d, 9.8, 0.0, wave.p0, math.nan)

    return wave, rc.recover_series(a0, wave.rho, wave.beta, params), params


def _laminar_case() -> tuple[sr.EvenSeries, ax.WaveParameters]:
    """Однородный поток u = c - 1 при rho = 1, beta = 0, d = 1, eta0 = 0"""

    axis = ax.AxisData.from_function(lambda y: np.zeros_like(y), 0.0, 1.0, 1.0, 24)
    a0, p0 = ax.solve_axis_streamfunction(axis, _RHO)
    params = fd.wave_parameters(axis, _RHO, p0)

    return rc.recover_series(a0, _RHO, _BETA, params, order=6), params


def test_head() -> None:
    """Q = rho(0) * (u - c)^2 + 2 * g * rho(0) * (eta0 + d)"""

    _, params = _laminar_case()

    assert params.p0 == pytest.approx(-1.0, abs=1e-12)
    assert params.Q == pytest.approx(20.6, abs=1e-12)


def test_manufactured_velocity() -> None:
    """Скорость в точке (0.4, -0.3) совпадает с явной формулой"""

    wave, psi, params = _get_test_case()
    u, v = fd.reconstruct_velocity(psi, wave.rho, params, 0.4, -0.3)
    exact_u, exact_v = wave.velocity(0.4, -0.3)

    assert u == pytest.approx(float(exact_u), abs=1e-6)
    assert v == pytest.approx(float(exact_v), abs=1e-6)


def test_velocity_above_surface() -> None:
    """Точка выше поверхности отвергается"""

    wave, psi, params = _get_test_case()

    with pytest.raises(sr.DomainError):
        fd.reconstruct_velocity(psi, wave.rho, params, 1.0, wave.eta0)

    with pytest.raises(sr.DomainError):
        fd.reconstruct_pressure(psi, wave.rho, wave.beta, params, 0.0, 1.0)


def test_laminar_pressure() -> None:
    """Давление на поверхности атмосферное, на дне гидростатическое"""

    psi, params = _laminar_case()

    assert fd.surface_energy(params, _RHO) == pytest.approx(0.5, abs=1e-12)
    assert fd.reconstruct_pressure(psi, _RHO, _BETA, params, 0.0, 0.0) == pytest.approx(0.0, abs=1e-10)
    assert fd.reconstruct_pressure(psi, _RHO, _BETA, params, 0.3, -1.0) == pytest.approx(9.8, abs=1e-10)
    assert fd.reconstruct_velocity(psi, _RHO, params, 0.3, -0.5) == pytest.approx((0.0, 0.0), abs=1e-12)


arguments = ("x", "tolerance")
data = (
    (0.0, 1e-10),
    (0.3, 1e-8),
    (-0.3, 1e-8),
    (0.5, 1e-7),
)


@pytest.mark.parametrize(arguments, data)
def test_manufactured_surface(x: float, tolerance: float) -> None:
    """Поверхность совпадает с корнем явной функции тока"""

    wave, psi, _ = _get_test_case()

    assert fd.surface_height(psi, x) == pytest.approx(wave.surface(x), abs=tolerance)


def test_flat_surface() -> None:
    """При eps = 0 поверхность горизонтальна"""

    wave, psi, _ = _get_test_case(0.0)
    surface = fd.recover_surface(psi, [-0.25, 0.0, 0.1])

    assert wave.eta0 == 0.0
    assert np.allclose(surface.eta, 0.0, atol=1e-9)


def test_surface_escape() -> None:
    """psi не меняет знак на отрезке ряда"""

    psi = sr.EvenSeries([sr.NodalFunction.from_function(lambda y: y + 0.5, 16, (-1.0, 0.0))])

    with pytest.raises(fd.SurfaceEscapeError):
        fd.surface_height(psi, 0.1)


def test_symmetric_nodes() -> None:
    """Узлы симметричны побитово"""

    x = fd.symmetric_nodes(0.5, 41)

    assert len(x) == 41 and x[20] == 0.0
    assert np.array_equal(x[::-1], -x)

    with pytest.raises(ValueError):
        fd.symmetric_nodes(0.5, 40)


def test_fluid_field() -> None:
    """Сетка поля, маска жидкости и поверхность"""

    wave, psi, params = _get_test_case()
    field = fd.build_fluid_field(psi, wave.rho, wave.beta, params, half_width=0.5, points=11)
    mask = field.fluid_mask()
    lower, upper = psi.domain
    below = field.y[:, None] <= field.surface.eta[None, :] + 1e-12 * (upper - lower)

    assert field["psi"].shape == (48, 11)
    assert np.all(np.diff(field.y) > 0)
    assert np.array_equal(mask, below)
    assert mask[0].all() and mask[-1, 5] and not mask[-1, 0]  # Гребень в узле x = 0
    assert np.allclose(field.surface.eta, [wave.surface(x) for x in field.x], atol=1e-7)
    assert np.allclose(field["u"][mask], wave.velocity(*np.meshgrid(field.x, field.y))[0][mask], atol=1e-4)  # У границ отрезка ряда ошибка старших коэффициентов больше


def test_field_stagnation() -> None:
    """Поток с u >= c у дна"""

    a0 = sr.NodalFunction.from_function(lambda y: -y + y ** 2 + 1.5 * y ** 3, 24, (-1.0, 0.0))
    params = ax.WaveParameters(1.0, 1.0, 9.8, 0.0, -0.5, 20.0)
    psi = rc.recover_series(a0, _RHO, _BETA, params, order=4)

    with pytest.raises(ax.StagnationError):
        fd.build_fluid_field(psi, _RHO, _BETA, params, half_width=0.5, points=5)


def test_field_processes() -> None:
    """Параллельное заполнение дает то же поле"""

    wave, psi, params = _get_test_case()
    serial = fd.build_fluid_field(psi, wave.rho, wave.beta, params, points=7)
    parallel = fd.build_fluid_field(psi, wave.rho, wave.beta, params, points=7, processes_num=2)

    assert np.array_equal(serial["P"], parallel["P"], equal_nan=True)


def test_field_files(tmp_path) -> None:
    """Запись и чтение таблиц поля"""

    wave, psi, params = _get_test_case()
    field = fd.build_fluid_field(psi, wave.rho, wave.beta, params, points=9)
    field.write(tmp_path)
    frame = field.to_frame()
    restored = fd.read_field(tmp_path / "field.csv", params)

    assert list(frame.columns) == list(fd.FIELD_COLUMNS)
    assert len(frame) == int(field.fluid_mask().sum())
    assert frame["x"].is_monotonic_increasing
    assert np.array_equal(restored.x, field.x) and np.array_equal(restored.y, field.y)
    assert np.array_equal(restored["E"], field["E"], equal_nan=True)
    assert np.array_equal(restored.surface.eta, field.surface.eta)


def test_laminar_flux() -> None:
    """Расход однородного потока равен p0 во всех сечениях"""

    psi, params = _laminar_case()
    report = fd.flux_invariance(psi, _RHO, params)

    assert len(report.x) == 9
    assert report.deviation <= 1e-12


def test_flux_matches_bed() -> None:
    """F(x) - p0 = -(psi(x, -d) + p0)"""

    wave, psi, params = _get_test_case()
    flux = fd.flux_invariance(psi, wave.rho, params)
    bed = fd.bed_residual(psi, wave.rho, params)

    assert np.allclose(flux.flux - params.p0, -bed.stream_gap, atol=1e-9)
    assert np.allclose(bed.stream_gap, wave.bed_gap(bed.x), atol=1e-6)
    assert np.allclose(bed.normal_velocity, 0.01 * np.sin(bed.x), atol=1e-5)  # v = eps * sin(x) * g(-d)


def test_laminar_dynamic() -> None:
    """Условие на поверхности выполнено для однородного потока"""

    psi, params = _laminar_case()
    report = fd.surface_dynamic_residual(psi, _RHO, params)

    assert report.relative <= 1e-12
    assert report.explicit_gap <= 1e-12


def test_kinematic() -> None:
    """Поверхность - линия тока"""

    wave, psi, params = _get_test_case()

    assert fd.kinematic_residual(psi, wave.rho, params) <= 1e-6


arguments = ("value", "expected")
data = (
    ("1", 1),
    ("2", 2),
)


@pytest.mark.parametrize(arguments, data)
def test_threads(monkeypatch, value: str, expected: int) -> None:
    """Количество процессов из окружения"""

    monkeypatch.setattr(fd.os, "cpu_count", lambda: 4)
    monkeypatch.setenv("STRATIWAVE_THREADS", value)

    assert fd.threads_from_environment() == expected


def test_threads_default(monkeypatch) -> None:
    """По умолчанию один процесс, 0 - половина процессоров"""

    monkeypatch.setattr(fd.os, "cpu_count", lambda: 4)
    monkeypatch.delenv("STRATIWAVE_THREADS", raising=False)

    assert fd.threads_from_environment() == 1

    monkeypatch.setenv("STRATIWAVE_THREADS", "0")

    assert fd.threads_from_environment() == 2


arguments = ("value",)
data = (
    ("-1",),
    ("5",),
)


@pytest.mark.parametrize(arguments, data)
def test_wrong_threads(monkeypatch, value: str) -> None:
    """Недопустимое количество процессов"""

    monkeypatch.setattr(fd.os, "cpu_count", lambda: 4)
    monkeypatch.setenv("STRATIWAVE_THREADS", value)

    with pytest.raises(ValueError):
        fd.threads_from_environment()
