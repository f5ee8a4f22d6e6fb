"""Тесты построенных решений с линейной функцией Бернулли"""


from __future__ import annotations

import math

import numpy as np
import pytest

from stratiwave import axis as ax
from stratiwave.reference import manufactured as mf


def test_crest_height() -> None:
    """psi(0, eta0) = 0"""

    wave = mf.manufacture_linear_wave(-4.0, 0.01, 1.0)

    assert 0.02 < wave.eta0 < 0.03
    assert abs(float(wave.psi(0.0, wave.eta0))) <= 1e-14
    assert wave.p0 == pytest.approx(-(math.sinh(2.0) + 0.01), abs=1e-14)
    assert wave.surface(0.0) == wave.eta0


def test_flat_wave() -> None:
    """При eps = 0 гребень на уровне y = 0"""

    wave = mf.manufacture_linear_wave(-4.0, 0.0, 1.0)

    assert wave.eta0 == 0.0
    assert wave.surface(0.7) == pytest.approx(0.0, abs=1e-14)


def test_laplacian() -> None:
    """laplacian psi = -lambda * psi"""

    wave = mf.manufacture_linear_wave(-4.0, 0.01, 1.0)
    x, y = np.meshgrid(np.linspace(-1, 1, 5), np.linspace(-1, 0, 5))

    assert np.allclose(wave.laplacian(x, y), 4 * wave.psi(x, y), atol=1e-13)


def test_series_coefficients() -> None:
    """Ряд из явных коэффициентов совпадает с усеченной функцией тока"""

    wave = mf.manufacture_linear_wave(-4.0, 0.01, 1.0)
    series = wave.exact_series(12)

    assert series.order == 12 and series.domain == wave.domain
    assert np.allclose(series[1].values, -0.005 * np.cosh(math.sqrt(5) * (series.nodes + 1)))
    assert float(wave.truncated_psi(0.4, -0.3, 12)) == pytest.approx(float(wave.psi(0.4, -0.3)), abs=1e-15)


def test_axis_data() -> None:
    """Скорость на оси u = c + f' + eps * g' и запас до торможения"""

    wave = mf.manufacture_linear_wave(-4.0, 0.01, 1.0)
    axis = wave.axis_data(nodes_amt=32)
    y = axis.y
    exact = -2 * np.cosh(2 * y) + 0.01 * math.sqrt(5) * np.sinh(math.sqrt(5) * (y + 1))
    margin = ax.check_no_stagnation(axis)

    assert axis.c == 0.0 and axis.is_chebyshev()
    assert np.allclose(axis.u, exact, atol=1e-14)
    assert margin.margin == pytest.approx(float(np.min(-exact)))
    assert margin.margin > 0


def test_bed_gap() -> None:
    """psi(x, -d) + p0 = eps * (cos(x) - 1)"""

    wave = mf.manufacture_linear_wave(-4.0, 0.01, 1.0)
    x = np.linspace(-1, 1, 7)

    assert np.allclose(wave.psi(x, -1.0) + wave.p0, wave.bed_gap(x), atol=1e-14)


def test_amplitude() -> None:
    """Слишком большая амплитуда нарушает psi_y < 0"""

    assert mf.manufacture_linear_wave(-4.0, 0.01, 1.0).check_amplitude() < 0

    with pytest.raises(mf.AmplitudeError):
        mf.manufacture_linear_wave(-4.0, 1.0, 1.0)


arguments = ("lam", "d")
data = (
    (0.0, 1.0),
    (1.0, 1.0),
    (-4.0, 0.0),
)


@pytest.mark.parametrize(arguments, data)
def test_wrong_wave(lam: float, d: float) -> None:
    """Наклон функции Бернулли должен быть отрицательным, глубина положительной"""

    with pytest.raises(ValueError):
        mf.manufacture_linear_wave(lam, 0.01, d)
