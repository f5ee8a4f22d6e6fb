"""Тесты функции высоты, ее разностной невязки и матрицы Якоби"""


from __future__ import annotations

import json

import numpy as np
import pytest

from stratiwave import axis as ax
from stratiwave import profiles as pr
from stratiwave import series as sr
from stratiwave.reference import height as ht
from stratiwave.reference import laminar as lm

_RHO = pr.DensityProfile([1.0])
_BETA = pr.BernoulliFunction([0.0])


def _get_test_case() -> tuple[ht.HeightField, pr.DensityProfile, pr.BernoulliFunction]:
    """Возмущенное стратифицированное ламинарное течение на сетке 8 x 5"""

    rho = pr.DensityProfile([1.0, -0.05])
    beta = pr.BernoulliFunction([0.5, 0.2])
    flow = lm.solve_laminar(rho, beta, 1.0, 25.0)
    laminar = ht.HeightField.from_laminar(flow, 8, 5)
    ramp = (laminar.p - laminar.p[0]) / -laminar.p[0]
    h = laminar.h + 0.02 * ramp[:, None] * np.cos(laminar.q)[None, :]

    return laminar.with_height(h), rho, beta


arguments = ("nq", "np_amt", "p0")
data = (
    (7, 5, -1.0),
    (2, 5, -1.0),
    (8, 2, -1.0),
    (8, 5, 0.0),
)


@pytest.mark.parametrize(arguments, data)
def test_wrong_grid(nq: int, np_amt: int, p0: float) -> None:
    """Нечетное или слишком малое количество узлов, неотрицательный p0"""

    with pytest.raises(ValueError):
        ht.uniform_grid(nq, np_amt, p0)


def test_grid() -> None:
    """Строка 0 на дне, последняя на поверхности"""

    q, p = ht.uniform_grid(8, 5, -2.0)

    assert q[0] == -np.pi and q[4] == 0.0
    assert np.allclose(p, [-2.0, -1.5, -1.0, -0.5, 0.0])
    assert p[-1] == 0.0


def test_wrong_height() -> None:
    """Не матрица или бесконечные значения"""

    params = ax.WaveParameters(1.0, 1.0, 9.8, 0.0, -1.0, 20.6)

    with pytest.raises(sr.StructureError):
        ht.HeightField(np.zeros(8), params)

    with pytest.raises(sr.DivergenceError):
        ht.HeightField(np.full((5, 8), np.inf), params)


def test_laminar_residual() -> None:
    """Однородный поток - точное решение разностной задачи"""

    field = ht.HeightField.from_laminar(lm.solve_laminar(_RHO, _BETA, 1.0, 20.6), 16, 9)
    residual = ht.height_residual(field, _RHO, _BETA)

    assert residual.shape == (8, 16)
    assert np.max(np.abs(residual)) <= 1e-10


def test_jacobian() -> None:
    """Аналитическая матрица Якоби совпадает с центральными разностями"""

    field, rho, beta = _get_test_case()
    _, jacobian = ht.height_residual_and_jacobian(field, rho, beta)
    dense = jacobian.toarray()
    numeric = np.empty_like(dense)
    step = 1e-6

    for k in range(dense.shape[1]):
        i, j = divmod(k, field.q_amt)
        plus, minus = field.h.copy(), field.h.copy()
        plus[i + 1, j] += step
        minus[i + 1, j] -= step
        numeric[:, k] = (ht.height_residual(field.with_height(plus), rho, beta)
                         - ht.height_residual(field.with_height(minus), rho, beta)).ravel() / (2 * step)

    assert dense.shape == (32, 32)
    assert np.allclose(dense, numeric, rtol=0, atol=1e-5 * np.max(np.abs(dense)))


def test_head_derivative() -> None:
    """Производная невязок по Q"""

    field, rho, beta = _get_test_case()
    step = 1e-4
    numeric = (ht.height_residual(field, rho, beta, field.params.Q + step)
               - ht.height_residual(field, rho, beta, field.params.Q - step)) / (2 * step)

    assert np.allclose(ht.head_derivative(field), numeric, atol=1e-9)


def test_stagnation() -> None:
    """h убывает по p"""

    params = ax.WaveParameters(1.0, 1.0, 9.8, 0.0, -1.0, 20.6)
    field = ht.HeightField(np.repeat(np.linspace(1.0, 0.0, 5)[:, None], 8, axis=1), params)

    with pytest.raises(ax.StagnationError):
        ht.height_residual(field, _RHO, _BETA)


def test_crest_shift() -> None:
    """После сдвига гребень лежит в q = 0"""

    field, _, _ = _get_test_case()
    rolled = field.with_height(np.roll(field.h, 3, axis=1))
    shifted = rolled.crest_shifted()
    report = shifted.surface_report()

    assert int(np.argmax(shifted.h[-1])) == 4
    assert report.crest_q == 0.0 and report.trough_q == -np.pi
    assert report.eta_max - report.eta_min == pytest.approx(0.04, abs=1e-12)
    assert field.crest_shifted() is field


def test_streamlines() -> None:
    """Линии тока в физических координатах"""

    field, _, _ = _get_test_case()
    frame = field.streamlines()

    assert list(frame.columns) == ["p", "x", "y"]
    assert len(frame) == 40
    assert np.allclose(frame["y"][:8], -1.0)  # Дно


def test_height_files(tmp_path) -> None:
    """Запись и чтение функции высоты"""

    field, _, _ = _get_test_case()
    field.write(tmp_path)
    restored = ht.HeightField.read(tmp_path / "height.csv")
    metadata = json.loads((tmp_path / "height.json").read_text(encoding="utf-8"))

    assert metadata["nq"] == 8 and metadata["np"] == 5
    assert np.array_equal(restored.h, field.h)
    assert restored.params == field.params


def test_wrong_height_file(tmp_path) -> None:
    """Таблица без нужных столбцов или с неверным количеством строк"""

    field, _, _ = _get_test_case()
    field.write(tmp_path)
    frame = field.to_frame()
    frame.iloc[:-1].to_csv(tmp_path / "height.csv", index=False)

    with pytest.raises(sr.StructureError):
        ht.HeightField.read(tmp_path / "height.csv")

    frame.rename(columns={"h": "height"}).to_csv(tmp_path / "height.csv", index=False)

    with pytest.raises(sr.StructureError):
        ht.HeightField.read(tmp_path / "height.csv")


def test_uniform_axis() -> None:
    """Скорость на оси однородного потока"""

    field = ht.HeightField.from_laminar(lm.solve_laminar(_RHO, _BETA, 1.0, 20.6), 16, 9, c=2.0)
    axis = ht.sample_axis_from_height(field, _RHO, nodes_amt=16)

    assert axis.c == 2.0 and axis.is_chebyshev()
    assert np.allclose(axis.u, 1.0, atol=1e-10)


def test_stratified_axis() -> None:
    """Скорость на оси стратифицированного ламинарного течения"""

    rho = pr.DensityProfile([1.0, -0.05])
    flow = lm.solve_laminar(rho, pr.BernoulliFunction([0.5]), 1.0, 25.0)
    field = ht.HeightField.from_laminar(flow, 16, 40)
    axis = ht.sample_axis_from_height(field, rho)

    assert axis.eta0 == pytest.approx(flow.eta0, abs=1e-12)
    assert np.allclose(axis.u, flow.axis_data().u, atol=1e-4)
