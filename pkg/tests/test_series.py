"""Тесты четных рядов по x с коэффициентами в узлах Чебышёва"""


from __future__ import annotations

import math

import numpy as np
import pytest

from stratiwave import profiles as pr
from stratiwave import series as sr

_DOMAIN = (-1.0, 0.0)
_NODES = 24


def _get_series(*functions) -> sr.EvenSeries:
    """Ряд с коэффициентами-функциями от y на общей сетке"""

    return sr.EvenSeries([sr.NodalFunction.from_function(f, _NODES, _DOMAIN) for f in functions])


def _constant_series(*values: float) -> sr.EvenSeries:
    return sr.EvenSeries.from_matrix(np.outer(values, np.ones(_NODES)), _DOMAIN)


def test_nodal_function_interpolation() -> None:
    """Интерполянт многочлена точен вне узлов"""

    function = sr.NodalFunction.from_function(lambda y: y ** 3 - y, _NODES, _DOMAIN)

    assert function(-0.3) == pytest.approx(-0.027 + 0.3, abs=1e-13)
    assert function.nodes[0] == 0.0 and function.nodes[-1] == -1.0
    assert function.sup_norm() == pytest.approx(2 / 3 / math.sqrt(3), abs=1e-2)  # Максимум в узлах


def test_nodal_function_derivatives() -> None:
    """Производные многочлена и гладкой функции"""

    square = sr.NodalFunction.from_function(lambda y: y ** 2, _NODES, _DOMAIN)
    cosh = sr.NodalFunction.from_function(np.cosh, 32, _DOMAIN)

    assert np.allclose(square.derivative(2).values, 2, atol=1e-10)
    assert np.allclose(sr.differentiate_twice(cosh).values, np.cosh(cosh.nodes), atol=1e-9)
    assert np.allclose(cosh.derivative(1).values, np.sinh(cosh.nodes), atol=1e-11)
    assert np.allclose(square.derivative(3).values, 0, atol=1e-10)  # Порядок выше степени


def test_nodal_function_domain() -> None:
    """Точки вне отрезка отвергаются, точки в пределах допуска прижимаются"""

    function = sr.NodalFunction.from_function(lambda y: y, _NODES, _DOMAIN)

    with pytest.raises(sr.DomainError):
        function(0.1)

    with pytest.raises(sr.DomainError):
        function(np.nan)

    assert function(1e-14) == pytest.approx(0.0, abs=1e-13)


arguments = ("values", "domain", "error")
data = (
    ([1.0, 2.0, 3.0], (-1.0, 0.0), sr.StructureError),  # Мало узлов
    ([1.0, 2.0, 3.0, 4.0], (0.0, 0.0), sr.StructureError),  # Пустой отрезок
    ([1.0, np.nan, 3.0, 4.0], (-1.0, 0.0), sr.DivergenceError),
    ([[1.0, 2.0], [3.0, 4.0]], (-1.0, 0.0), sr.StructureError),  # Не вектор
)


@pytest.mark.parametrize(arguments, data)
def test_wrong_nodal_function(values, domain: tuple[float, float], error: type) -> None:
    """Недопустимые значения или отрезок"""

    with pytest.raises(error):
        sr.NodalFunction(values, domain)


def test_chopped_keeps_function() -> None:
    """Отсечение хвоста не меняет гладкую функцию"""

    function = sr.NodalFunction.from_function(np.exp, 64, _DOMAIN)
    chopped = function.chopped()

    assert len(function.significant_coefficients()) < 64
    assert np.allclose(chopped.values, function.values, atol=1e-14)
    assert len(function.significant_coefficients(floor=1e-3)) <= 7


def test_series_structure() -> None:
    """Порядок, отрезок и матрица значений ряда"""

    psi = _get_series(lambda y: y, lambda y: y ** 2, np.ones_like)

    assert len(psi) == 3 and psi.order == 2
    assert psi.domain == _DOMAIN and psi.nodes_amt == _NODES
    assert psi.matrix().shape == (3, _NODES)
    assert np.allclose(psi.derivative_matrix(1)[1], 2 * psi.nodes, atol=1e-11)


def test_series_on_different_grids() -> None:
    """Коэффициенты на разных сетках не образуют ряд"""

    with pytest.raises(sr.StructureError):
        sr.EvenSeries([sr.NodalFunction.constant(1.0, 8, _DOMAIN), sr.NodalFunction.constant(1.0, 9, _DOMAIN)])

    with pytest.raises(sr.StructureError):
        sr.EvenSeries([sr.NodalFunction.constant(1.0, 8, _DOMAIN), sr.NodalFunction.constant(1.0, 8, (-2.0, 0.0))])

    with pytest.raises(sr.StructureError):
        sr.EvenSeries([])


def test_evaluate_series() -> None:
    """psi = y + x^2 * (1 - y)"""

    psi = _get_series(lambda y: y, lambda y: 1 - y)

    assert sr.evaluate_series(psi, 2.0, -0.5) == pytest.approx(-0.5 + 4 * 1.5, abs=1e-13)
    assert np.allclose(sr.evaluate_series(psi, np.array([0.0, 1.0]), -1.0), [-1.0, 1.0], atol=1e-13)

    with pytest.raises(sr.DomainError):
        sr.evaluate_series(psi, 0.0, 0.5)


def test_evaluate_gradient() -> None:
    """Производная по x нечетна, по y четна"""

    psi = _get_series(lambda y: y, lambda y: 1 - y, lambda y: y ** 2)
    psi_x, psi_y = sr.evaluate_gradient(psi, 0.5, -0.5)
    mirrored_x, mirrored_y = sr.evaluate_gradient(psi, -0.5, -0.5)

    # psi_x = 2x(1 - y) + 4x^3 y^2, psi_y = 1 - x^2 + 2y x^4
    assert psi_x == pytest.approx(1.5 + 0.125, abs=1e-12)
    assert psi_y == pytest.approx(1 - 0.25 - 0.0625, abs=1e-12)
    assert mirrored_x == pytest.approx(-psi_x, abs=1e-15)
    assert mirrored_y == pytest.approx(psi_y, abs=1e-15)
    assert sr.evaluate_gradient(psi, 0.0, -0.2)[0] == 0.0


def test_add_series() -> None:
    """Линейная комбинация рядов"""

    a = _constant_series(1.0, 2.0)
    b = _constant_series(3.0, -1.0)

    assert np.allclose(sr.add_series(a, b, 2.0, -1.0).matrix()[:, 0], [-1.0, 5.0])

    with pytest.raises(sr.StructureError):
        sr.add_series(a, _constant_series(1.0, 2.0, 3.0))


arguments = ("a", "b", "product")
data = (
    ((1.0, 1.0, 0.0), (1.0, 1.0, 0.0), (1.0, 2.0, 1.0)),
    ((1.0, 1.0), (1.0, 1.0), (1.0, 2.0)),  # x^4 отбрасывается
    ((2.0, 0.0, 0.0), (1.0, -1.0, 3.0), (2.0, -2.0, 6.0)),
)


@pytest.mark.parametrize(arguments, data)
def test_multiply_series(a: tuple, b: tuple, product: tuple) -> None:
    """Усеченное произведение Коши"""

    result = sr.multiply_series(_constant_series(*a), _constant_series(*b))

    assert np.allclose(result.matrix(), np.outer(product, np.ones(_NODES)))


def test_compose_polynomial() -> None:
    """F(p) = 1 + p^2 от -psi, psi = y + x^2"""

    psi = _get_series(lambda y: y, np.ones_like, np.zeros_like)
    composed = sr.compose_polynomial(pr.Polynomial([1.0, 0.0, 1.0]), -1, psi)
    y = psi.nodes

    # (y + x^2)^2 + 1 = 1 + y^2 + 2y x^2 + x^4
    assert np.allclose(composed.matrix(), [1 + y ** 2, 2 * y, np.ones_like(y)], atol=1e-14)


def test_compose_wrong_sign() -> None:
    """Знак аргумента только +1 или -1"""

    with pytest.raises(ValueError):
        sr.compose_polynomial(pr.Polynomial([1.0]), 2, _constant_series(1.0, 0.0))


def test_compose_overflow() -> None:
    """Переполнение при подстановке"""

    with pytest.raises(sr.DivergenceError):
        sr.compose_polynomial(pr.Polynomial([0.0] * 40 + [1.0]), 1, _constant_series(1e10, 1e10))


def test_estimate_radius() -> None:
    """||a_2n|| = 2^(-2n) дает радиус 2"""

    psi = _constant_series(*(2.0 ** (-2 * n) for n in range(7)))

    assert sr.estimate_radius(psi) == pytest.approx(2.0, rel=1e-10)


def test_unbounded_radius() -> None:
    """Ряд без старших коэффициентов имеет неограниченный радиус"""

    assert sr.estimate_radius(_constant_series(1.0, 0.0, 0.0, 0.0, 0.0)) == math.inf


def test_radius_needs_coefficients() -> None:
    """Порядок меньше 3 не позволяет оценить радиус"""

    with pytest.raises(sr.InsufficientDataError):
        sr.estimate_radius(_constant_series(1.0, 0.5, 0.25))


def _random_series(rng: np.random.Generator, order: int = 4) -> sr.EvenSeries:
    return sr.EvenSeries.from_matrix(rng.uniform(-1, 1, size=(order + 1, _NODES)), _DOMAIN)


def test_product_algebra() -> None:
    """Произведение рядов коммутативно и ассоциативно"""

    rng = np.random.default_rng(11)
    a, b, c = (_random_series(rng) for _ in range(3))
    ab, ba = sr.multiply_series(a, b).matrix(), sr.multiply_series(b, a).matrix()
    left = sr.multiply_series(sr.multiply_series(a, b), c).matrix()
    right = sr.multiply_series(a, sr.multiply_series(b, c)).matrix()

    assert np.max(np.abs(ab - ba)) <= 1e-13 * np.max(np.abs(ab))
    assert np.max(np.abs(left - right)) <= 1e-13 * np.max(np.abs(left))


@pytest.mark.parametrize("seed", (1, 2, 3))
def test_compose_product(seed: int) -> None:
    """Подстановка в произведение многочленов равна произведению подстановок"""

    rng = np.random.default_rng(seed)
    f = pr.Polynomial(rng.uniform(-1, 1, size=rng.integers(1, 6)))
    g = pr.Polynomial(rng.uniform(-1, 1, size=rng.integers(1, 6)))
    psi = _random_series(rng)
    composed = sr.compose_polynomial(f * g, -1, psi).matrix()
    product = sr.multiply_series(sr.compose_polynomial(f, -1, psi), sr.compose_polynomial(g, -1, psi)).matrix()

    assert np.max(np.abs(composed - product)) <= 1e-12 * max(np.max(np.abs(composed)), 1.0)


def test_cosine_square() -> None:
    """cos(x)^2 = (1 + cos(2x)) / 2 до x^8"""

    orders = np.arange(5)
    factorials = np.array([math.factorial(2 * n) for n in orders], dtype=float)
    cosine = _constant_series(*((-1.0) ** orders / factorials))
    square = sr.multiply_series(cosine, cosine)
    expected = (-1.0) ** orders * 4.0 ** orders / (2 * factorials)
    expected[0] = 1.0

    assert np.allclose(square.matrix(), expected[:, None], rtol=0, atol=1e-12)


def test_evaluate_series_parity() -> None:
    """Значения ряда в x и -x совпадают побитово"""

    psi = _random_series(np.random.default_rng(5))
    x = np.linspace(0.0, 0.7, 8)

    assert np.array_equal(sr.evaluate_series(psi, x, -0.4), sr.evaluate_series(psi, -x, -0.4))


def test_spectral_second_derivative() -> None:
    """(sinh(2y))'' = 4 * sinh(2y) на 32 узлах"""

    function = sr.NodalFunction.from_function(lambda y: np.sinh(2 * y), 32, _DOMAIN)
    curvature = sr.differentiate_twice(function)

    assert np.max(np.abs(curvature.values - 4 * np.sinh(2 * function.nodes))) <= 1e-10
