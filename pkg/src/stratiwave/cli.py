"""Командная строка: восстановление волны по данным на оси, построение эталонных волн и проверка полей

Подкоманды
- recover <config>: данные на оси -> ряд psi -> поля -> проверки
- forward <config>: ламинарное течение, метод Ньютона или построенная волна и данные на оси для recover
- verify <config> <table...>: проверки готовых таблиц field.csv и height.csv

Коды возврата
- 0: все обязательные проверки пройдены
- 2: ошибка схемы конфигурации или разбора таблиц
- 3: торможение потока или недопустимый профиль
- 4: расходимость, выход из области, нет решения
- 5: не пройдена обязательная проверка
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, NamedTuple, Sequence

import numpy as np
import pandas as pd

from stratiwave import axis as ax
from stratiwave import config as cf
from stratiwave import diagnostics as dg
from stratiwave import fields as fd
from stratiwave import profiles as pr
from stratiwave import recovery as rc
from stratiwave import series as sr
from stratiwave.reference import height as hg
from stratiwave.reference import laminar as lm
from stratiwave.reference import manufactured as mf
from stratiwave.reference import newton as nt

_FLOAT_FORMAT = "%.17g"  # 17 значащих цифр в CSV
_LAMINAR_TOLERANCE = 1e-8  # Допустимые невязки ламинарного решения
_HEIGHT_TOLERANCE = 1e-8  # Допустимая невязка разностной задачи для функции высоты
_TABLE_RESIDUAL_CHECKS = ("bernoulli", "height_residual")  # Заменяют pde_residual при проверке таблиц

logger = logging.getLogger(__name__)


class ProfileValidationError(ValueError):
    """Профили не прошли проверку на отрезке [p0, 0]"""

    pass


class ConvergenceError(ArithmeticError):
    """Метод Ньютона не сошелся"""

    pass


class PipelineResult(NamedTuple):
    """Итог конвейера"""

    directory: Path
    report: dict[str, Any]
    passed: bool  # Пройдены ли все обязательные проверки


def run_recover(config: cf.Config, out: Path) -> PipelineResult:
    """Восстановить волну по данным на оси и записать psi_series.json, field.csv, surface.csv, report.json

    Raises:
        ConfigError: Нет данных на оси
        StagnationError: u >= c в данных или в поле
        ProfileValidationError: Профили не прошли проверку
        DivergenceError: Рекурсия или интегрирование дали бесконечные значения
    """

    numerics, tolerances = config.numerics, config.numerics.tolerances
    rho, beta = config.profiles.density(), config.profiles.bernoulli()
    axis = cf.load_axis(config)
    margin = ax.check_no_stagnation(axis)
    a0, p0 = ax.solve_axis_streamfunction(axis, rho, nodes=numerics.nodes)
    _validate_profiles(rho, beta, p0)

    params = fd.wave_parameters(axis, rho, p0)
    psi = rc.recover_series(a0, rho, beta, params, order=numerics.order)
    half_width = numerics.grid.half_width or rc.residual_half_width(psi)
    residual = rc.pde_residual(psi, rho, beta, params.g, half_width)
    field = fd.build_fluid_field(psi, rho, beta, params, half_width, numerics.grid.nx, _threads())

    flux = fd.flux_invariance(psi, rho, params, half_width=half_width)
    bed = fd.bed_residual(psi, rho, params, half_width=half_width)
    dynamic = fd.surface_dynamic_residual(psi, rho, params, half_width=half_width)
    kinematic = fd.kinematic_residual(psi, rho, params, half_width=half_width)
    bernoulli = dg.bernoulli_residual(field, rho, beta, numerics.seed)
    analyticity = dg.analyticity_report(psi)

    checks = {
        "pde_residual": _check(residual.residual / (1 + residual.laplacian), tolerances.pde),
        "symmetry": _check(dg.symmetry_residual(field), tolerances.symmetry),
        "no_stagnation": _check(margin.margin, 0.0, margin.margin > 0),
        "flux": _check(flux.deviation, tolerances.flux),
        "bed": _check(float(np.max(np.abs(bed.stream_gap))) / abs(p0), tolerances.flux),
        "dynamic": _check(dynamic.relative, tolerances.dynamic),
        "kinematic": _check(kinematic, tolerances.dynamic),
        "bernoulli": _check(bernoulli.mismatch, tolerances.bernoulli),
        "analyticity": _check(analyticity.radius, None, analyticity.monotone_decay),
    }

    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "psi_series.json", {
        "order": psi.order,
        "nodes_amt": psi.nodes_amt,
        "domain": list(psi.domain),
        "nodes": psi.nodes,
        "coefficients": psi.matrix(),
    })
    field.write(out)

    report = _report("recover", checks, numerics.hard_checks, {
        "params": params.to_document(),
        "order": psi.order,
        "nodes": psi.nodes_amt,
        "half_width": half_width,
        "flux": {"x": flux.x, "flux": flux.flux},
        "bed": {"stream_gap": bed.stream_gap, "normal_velocity": bed.normal_velocity},
        "dynamic": {"explicit_gap": dynamic.explicit_gap},
        "bernoulli": bernoulli._asdict(),
        "analyticity": analyticity._asdict(),
    })
    _write_json(out / "report.json", report)

    return PipelineResult(out, report, report["passed"])


def run_forward(config: cf.Config, out: Path) -> PipelineResult:
    """Построить эталонную волну и данные на оси для recover

    Режимы
    - laminar: height.csv, height.json, streamlines.csv, axis.csv, recover_config.json, report.json
    - newton: то же для волны, найденной методом Ньютона из ламинарного поля с возмущением cos(q)
    - manufacture: field_exact.csv, axis.csv, recover_config.json, report.json

    Raises:
        ConfigError: Нет режима или Q
        NoLaminarFlowError: Нет ламинарного течения
        AmplitudeError: Амплитуда построенной волны слишком велика
        ConvergenceError: Метод Ньютона не сошелся, отчет записан
    """

    mode = config.require_mode()
    out.mkdir(parents=True, exist_ok=True)

    if mode == "manufacture":
        return _forward_manufactured(config, out)

    forward, numerics, geometry = config.forward, config.numerics, config.geometry

    if forward.Q is None:
        raise cf.ConfigError("missing key: forward.Q")

    rho, beta = config.profiles.density(), config.profiles.bernoulli()
    c = forward.wave_speed(mode)
    flow = lm.solve_laminar(rho, beta, geometry.d, forward.Q, geometry.g, numerics.nodes)
    laminar = hg.HeightField.from_laminar(flow, numerics.grid.nq, numerics.grid.np, c, geometry.p_atm)
    extra = {"mode": mode, "laminar": {"p0": flow.p0, "ode_residual": flow.ode_residual(),
                                       "surface_residual": flow.surface_residual()}}

    if mode == "laminar":
        field = laminar
        axis = flow.axis_data(c, numerics.nodes, geometry.p_atm)
        laminar_residual = max(flow.ode_residual(), flow.surface_residual())
        checks = {"height_residual": _check(laminar_residual, _LAMINAR_TOLERANCE)}
    else:
        seed = nt.seed_from_laminar(laminar, forward.amplitude)
        result = nt.solve_height_newton(seed, rho, beta, forward.Q, forward.max_iter, forward.amplitude or None)
        field = result.field.crest_shifted()
        extra["newton"] = {"converged": result.converged, "iterations": result.iterations,
                           "residual": result.residual, "log": [record._asdict() for record in result.log]}

        if not result.converged:
            _write_json(out / "report.json", _report("forward", {}, numerics.hard_checks, extra))
            raise ConvergenceError(f"newton did not converge: residual {result.residual:.3e}")

        axis = hg.sample_axis_from_height(field, rho, c, numerics.nodes)
        monotonicity = dg.monotonicity_check(field, numerics.tolerances.monotonicity)
        moving_plane = dg.moving_plane_scan(field)
        checks = {
            "height_residual": _check(result.residual, _HEIGHT_TOLERANCE),
            "symmetry": _check(dg.symmetry_residual(field), numerics.tolerances.symmetry),
            "monotonicity": _check(monotonicity.trough_violation, numerics.tolerances.monotonicity,
                                   monotonicity.passed),
            "moving_plane": _check(moving_plane.minimum, None, moving_plane.passed),
        }
        extra["monotonicity"] = monotonicity._asdict()
        extra["moving_plane"] = moving_plane._asdict()

    field.write(out)
    field.streamlines().to_csv(out / "streamlines.csv", index=False, float_format=_FLOAT_FORMAT)
    extra["params"] = field.params.to_document()
    extra["surface"] = field.surface_report()._asdict()
    _write_axis(out, config, axis)

    report = _report("forward", checks, numerics.hard_checks, extra)
    _write_json(out / "report.json", report)

    return PipelineResult(out, report, report["passed"])


def _forward_manufactured(config: cf.Config, out: Path) -> PipelineResult:
    forward, numerics, geometry = config.forward, config.numerics, config.geometry
    wave = mf.manufacture_linear_wave(forward.lam, forward.epsilon, geometry.d, forward.wave_speed("manufacture"))
    axis = wave.axis_data(numerics.nodes, geometry.g, geometry.p_atm)

    half_width = numerics.grid.half_width or 0.5
    x = fd.symmetric_nodes(half_width, numerics.grid.nx)
    nodes = np.sort(axis.y)
    rows = []

    for value in x:
        surface = wave.surface(value)
        below = nodes[nodes <= surface]
        u, v = wave.velocity(value, below)
        rows.append(pd.DataFrame({"x": np.full(len(below), value), "y": below, "psi": wave.psi(value, below),
                                  "u": u, "v": v}))

    pd.concat(rows, ignore_index=True).to_csv(out / "field_exact.csv", index=False, float_format=_FLOAT_FORMAT)
    manufactured = dataclasses.replace(config, profiles=cf.Profiles((1.0,), (0.0, forward.lam)))
    _write_axis(out, manufactured, axis)

    report = _report("forward", {}, numerics.hard_checks, {
        "mode": "manufacture",
        "eta0": wave.eta0,
        "p0": wave.p0,
        "max_psi_y": wave.check_amplitude(),
    })
    _write_json(out / "report.json", report)

    return PipelineResult(out, report, report["passed"])


def run_verify(config: cf.Config, paths: Sequence[Path], out: Path) -> PipelineResult:
    """Проверить таблицы field.csv (с соседним surface.csv) и height.csv (с соседним height.json)

    Raises:
        ConfigError: Таблица не распознана или не читается
        StagnationError: В поле есть точка с u >= c или h_p <= 0
    """

    numerics = config.numerics
    inputs = {}
    failures = []

    for path in map(Path, paths):
        try:
            columns = set(pd.read_csv(path, nrows=0).columns)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as error:
            raise cf.ConfigError(f"cannot read {path}: {error}") from error

        if set(hg.HEIGHT_COLUMNS) <= columns:
            checks = _verify_height(config, path)
        elif set(fd.FIELD_COLUMNS) <= columns:
            checks = _verify_fluid(config, path)
        else:
            raise cf.ConfigError(f"unrecognised table {path}")

        annotated, failed = _annotate(checks, _table_hard_checks(numerics.hard_checks))
        inputs[path.name] = annotated
        failures.extend(f"{path.name}:{name}" for name in failed)

    report = {"pipeline": "verify", "inputs": inputs, "hard_failures": failures, "passed": not failures}
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "report.json", report)

    return PipelineResult(out, report, report["passed"])


def _verify_fluid(config: cf.Config, path: Path) -> dict[str, dict]:
    tolerances = config.numerics.tolerances
    rho, beta = config.profiles.density(), config.profiles.bernoulli()
    field = fd.read_field(path, _field_parameters(config, path))
    u = field["u"]
    finite = np.isfinite(u)

    if np.any(u[finite] >= field.params.c):
        raise ax.StagnationError("stagnation: u >= c in the field, diagnostics do not apply")

    margin = float(np.min(field.params.c - u[finite]))
    bernoulli = dg.bernoulli_residual(field, rho, beta, config.numerics.seed)

    return {
        "no_stagnation": _check(margin, 0.0, margin > 0),
        "symmetry": _check(dg.symmetry_residual(field), tolerances.symmetry),
        "bernoulli": _check(bernoulli.mismatch, tolerances.bernoulli),
    }


def _verify_height(config: cf.Config, path: Path) -> dict[str, dict]:
    tolerances = config.numerics.tolerances
    rho, beta = config.profiles.density(), config.profiles.bernoulli()

    try:
        field = hg.HeightField.read(path)
    except (OSError, KeyError, json.JSONDecodeError) as error:
        raise cf.ConfigError(f"cannot read height field {path}: {error}") from error

    residual = float(np.max(np.abs(hg.height_residual(field, rho, beta))))
    monotonicity = dg.monotonicity_check(field, tolerances.monotonicity)
    moving_plane = dg.moving_plane_scan(field)

    return {
        "no_stagnation": _check(0.0, 0.0, True),
        "height_residual": _check(residual, _HEIGHT_TOLERANCE),
        "symmetry": _check(dg.symmetry_residual(field), tolerances.symmetry),
        "monotonicity": _check(monotonicity.trough_violation, tolerances.monotonicity, monotonicity.passed),
        "moving_plane": _check(moving_plane.minimum, None, moving_plane.passed),
    }


def _field_parameters(config: cf.Config, path: Path) -> ax.WaveParameters:
    """Параметры из соседнего report.json, иначе из конфигурации без p0 и Q"""

    report_path = path.parent / "report.json"

    if report_path.exists():
        report = json.loads(report_path.read_text(encoding="utf-8"))

        if "params" in report:
            return ax.WaveParameters.from_document(report["params"])

    geometry = config.geometry
    c = config.axis.c if config.axis is not None else config.forward.wave_speed(config.mode or "laminar")

    return ax.WaveParameters(c, geometry.d, geometry.g, geometry.p_atm, math.nan, math.nan)


def _validate_profiles(rho: pr.DensityProfile, beta: pr.BernoulliFunction, p0: float) -> None:
    report = pr.validate_profiles(rho, beta, p0)

    if not report.passed:
        failure = report.failures()[0]
        raise ProfileValidationError(f"profile check {failure.name} failed at p = {failure.worst_p:.17g}")


def _write_axis(out: Path, config: cf.Config, axis: ax.AxisData) -> None:
    """Записать axis.csv и recover_config.json, который читает его"""

    pd.DataFrame({"y": axis.y, "u": axis.u}).to_csv(out / "axis.csv", index=False, float_format=_FLOAT_FORMAT)
    recover = dataclasses.replace(config, axis=cf.AxisSection(axis.c, axis.eta0, csv_path=Path("axis.csv")))
    _write_json(out / "recover_config.json", recover.to_dict())


def _threads() -> int:
    try:
        return fd.threads_from_environment()
    except ValueError as error:
        raise cf.ConfigError(f"STRATIWAVE_THREADS: {error}") from error


def _check(value: float, tolerance: float | None, passed: bool | None = None) -> dict[str, Any]:
    if passed is None:
        passed = bool(value <= tolerance)

    return {"value": value, "tolerance": tolerance, "passed": bool(passed)}


def _table_hard_checks(hard_checks: Sequence[str]) -> tuple[str, ...]:
    """Жесткие проверки таблиц: невязка уравнения по таблице не вычисляется, ее заменяют bernoulli и height_residual"""

    if "pde_residual" not in hard_checks:
        return tuple(hard_checks)

    return (*hard_checks, *_TABLE_RESIDUAL_CHECKS)


def _annotate(checks: dict[str, dict], hard_checks: Sequence[str]) -> tuple[dict[str, dict], list[str]]:
    annotated = {name: {**check, "hard": name in hard_checks} for name, check in checks.items()}
    failed = [name for name, check in annotated.items() if check["hard"] and not check["passed"]]

    return annotated, failed


def _report(pipeline: str, checks: dict[str, dict], hard_checks: Sequence[str], extra: dict) -> dict[str, Any]:
    annotated, failed = _annotate(checks, hard_checks)

    for name in failed:
        logger.warning("hard check %s failed: %s", name, annotated[name]["value"])

    return {"pipeline": pipeline, **extra, "checks": annotated, "hard_failures": failed, "passed": not failed}


def _jsonable(value: Any) -> Any:
    """Привести значение к типам JSON: бесконечности записываются строками, NaN - как null"""

    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    elif isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(item) for item in value]
    elif isinstance(value, (bool, np.bool_)):
        return bool(value)
    elif isinstance(value, (int, np.integer)):
        return int(value)
    elif isinstance(value, (float, np.floating)):
        value = float(value)

        if math.isnan(value):
            return None
        elif math.isinf(value):
            return "inf" if value > 0 else "-inf"

        return value
    elif isinstance(value, Path):
        return str(value)

    return value


def _write_json(path: Path, document: Any) -> None:
    path.write_text(json.dumps(_jsonable(document), indent=2, sort_keys=True, allow_nan=False) + "\n",
                    encoding="utf-8")


def exit_code(error: Exception) -> int:
    """Код возврата для исключения конвейера"""

    if isinstance(error, (ax.StagnationError, ax.ProfileRangeError, ProfileValidationError)):
        return 3
    elif isinstance(error, (sr.DivergenceError, sr.DomainError, sr.InsufficientDataError, fd.SurfaceEscapeError,
                            lm.NoLaminarFlowError, mf.AmplitudeError, ConvergenceError)):
        return 4
    elif isinstance(error, (cf.ConfigError, sr.StructureError, ValueError, KeyError, OSError)):
        return 2

    raise error


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stratiwave", description="Stratified periodic water wave recovery")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    recover = subparsers.add_parser("recover", help="Recover a wave from crest-line velocity data")
    recover.add_argument("config", type=Path)
    recover.add_argument("--out", type=Path, default=Path("out"))

    forward = subparsers.add_parser("forward", help="Generate a reference wave and its crest-line data")
    forward.add_argument("config", type=Path)
    forward.add_argument("--out", type=Path, default=Path("out"))

    verify = subparsers.add_parser("verify", help="Run diagnostics on field or height tables")
    verify.add_argument("config", type=Path)
    verify.add_argument("tables", type=Path, nargs="+")
    verify.add_argument("--out", type=Path, default=Path("out"))

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        config = cf.load_config(args.config)

        if args.command == "recover":
            result = run_recover(config, args.out)
        elif args.command == "forward":
            result = run_forward(config, args.out)
        else:
            result = run_verify(config, args.tables, args.out)
    except Exception as error:
        code = exit_code(error)
        logger.error("%s: %s", type(error).__name__, error)

        return code

    logger.info("artifacts written to %s", result.directory)

    return 0 if result.passed else 5


if __name__ == "__main__":
    sys.exit(main())
