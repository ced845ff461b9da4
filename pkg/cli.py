#!/usr/bin/env python3
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import scipy

from src import __app_name__, __version__
from src.core import init_context
from src.core.config import CLI_LOG_FILE, SETTINGS_FILE, bundled_scenarios, find_scenario
from src.core.errors import EXIT_VALIDATION, CondcastError, ValidationError, exit_code_for
from src.core.logging_utils import setup_logging as setup_core_logging
from src.core.runner import estimate_posterior, run_forecast, run_irf, save_estimation
from src.db.data_store import RunSettings, load_run_settings
from src.est import PosteriorDraws
from src.fmt.scenario import ScenarioFile, parse_scenario
from src.sim.bench import KIND_EQUALITY, KIND_INEQUALITY, full_grid, run_benchmark, write_bench_table

logger = logging.getLogger("condcast.cli")

BENCH_KINDS = (KIND_EQUALITY, KIND_INEQUALITY)


def _settings_from_args(args: argparse.Namespace) -> RunSettings:
    """Settings file overridden by the command-line flags."""
    config = getattr(args, "config", None)
    if config is None and SETTINGS_FILE.is_file():
        config = SETTINGS_FILE
    settings = load_run_settings(config)

    settings.update(
        log_level=getattr(args, "log_level", None),
        output_dir=getattr(args, "output_dir", None),
    )
    settings.data.update(
        path=getattr(args, "data", None),
        start=getattr(args, "start", None),
        end=getattr(args, "end", None),
    )
    settings.estimation.update(
        prior=getattr(args, "prior", None),
        lags=getattr(args, "lags", None),
        draws=getattr(args, "draws", None),
        burn_in=getattr(args, "burn_in", None),
        seed=getattr(args, "seed", None),
    )
    settings.forecast.update(
        threads=getattr(args, "threads", None),
        horizon=getattr(args, "horizon", None),
        irf_variable=getattr(args, "irf", None),
        irf_size=getattr(args, "irf_size", None),
        irf_horizon=getattr(args, "irf_horizon", None),
    )
    if getattr(args, "save_draws", False):
        settings.forecast.save_draws = True
    if getattr(args, "difference", False):
        settings.forecast.difference = True
    settings.validate()
    return settings


def _init(args: argparse.Namespace):
    settings = _settings_from_args(args)
    setup_core_logging(CLI_LOG_FILE, level=settings.log_level)
    output_dir = Path(args.output_dir) if getattr(args, "output_dir", None) else None
    return init_context(output_dir=output_dir, settings=settings, config_path=args.config)


def _load_scenario(name: str | None) -> ScenarioFile:
    if not name:
        return ScenarioFile()
    path = find_scenario(name)
    if path is None:
        raise ValidationError(
            f"scenario {name!r} not found; bundled: {', '.join(bundled_scenarios()) or '-'}"
        )
    return parse_scenario(path)


def cmd_estimate(args: argparse.Namespace) -> int:
    """Estimate the posterior and save the draws."""
    ctx = _init(args)
    data = ctx.data
    estimation = ctx.settings.estimation
    print(f"Оценка: {estimation.prior}, p={estimation.lags}, {data.n} рядов, {data.T} кварталов")

    posterior = estimate_posterior(data.values, estimation)
    files = save_estimation(posterior, data, estimation, ctx.output_dir)
    ctx.save_settings()

    print(f"[OK] Сохранено {len(posterior)} выборок параметров: {files['posterior']}")
    return 0


def cmd_forecast(args: argparse.Namespace) -> int:
    """Conditional (or unconditional) forecasts for a scenario file."""
    ctx = _init(args)
    data = ctx.data
    scenario = _load_scenario(args.scenario)
    estimation = scenario.apply_estimation(ctx.settings.estimation)

    if args.posterior:
        posterior = PosteriorDraws.load(args.posterior)
        print(f"Загружено {len(posterior)} выборок параметров: {args.posterior}")
    else:
        posterior = estimate_posterior(data.values, estimation)

    if args.irf:
        run = run_irf(data, posterior, ctx.settings.forecast, ctx.output_dir)
    else:
        run = run_forecast(
            data, posterior, scenario, ctx.settings.forecast, ctx.output_dir, seed=estimation.seed
        )
        print(f"Ограничения: {run.constraints.kind()}, строк: {run.constraints.n_rows()}")
    ctx.save_settings()

    for name, path in run.files.items():
        print(f"[OK] {name}: {path}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    """Timing comparison of the precision and dense samplers on simulated VARs."""
    ctx = _init(args)
    bench = ctx.settings.bench
    bench.update(
        draws=args.draws,
        repeats=args.repeats,
        seed=args.seed,
        param_source=args.param_source,
    )
    if args.naive:
        bench.include_naive = True
    bench.validate()

    kinds = BENCH_KINDS if args.kind == "both" else (args.kind,)
    for kind in kinds:
        suite = full_grid(kind) if args.full or not bench.configs else bench.configs
        print(f"Бенчмарк {kind}: {len(suite)} конфигураций, {bench.draws} выборок")
        results = run_benchmark(
            suite,
            kind,
            n_draws=bench.draws,
            repeats=bench.repeats,
            T=bench.T,
            seed=bench.seed,
            include_naive=bench.include_naive,
            param_source=bench.param_source,
            burn_in=bench.posterior_burn_in,
        )
        path = write_bench_table(results, ctx.output_path(f"bench_{kind}.csv"))
        print(f"[OK] {path}")
    return 0


def cmd_version(_args: argparse.Namespace) -> int:
    """Show version information."""
    print(f"{__app_name__} {__version__}")
    print(f"numpy {np.__version__}, scipy {scipy.__version__}")
    scenarios = bundled_scenarios()
    print(f"Сценарии: {', '.join(scenarios) if scenarios else 'нет'}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-c", "--config", type=Path, help="Файл настроек JSON")
    parser.add_argument("-o", "--output-dir", help="Каталог для результатов")
    parser.add_argument("--seed", type=int, help="Начальное значение генератора")
    parser.add_argument("--draws", type=int, help="Число выборок параметров")
    parser.add_argument(
        "--log-level", choices=["debug", "info", "warning", "error"], help="Уровень логирования"
    )


def _add_data(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-d", "--data", help="CSV в формате FRED-QD")
    parser.add_argument("--start", help="Первый квартал выборки (например, 1976Q3)")
    parser.add_argument("--end", help="Последний квартал выборки (например, 2019Q4)")
    parser.add_argument("--prior", choices=["niw", "acp"], help="Априорное распределение")
    parser.add_argument("--lags", type=int, help="Число лагов")
    parser.add_argument("--burn-in", type=int, help="Число отбрасываемых итераций Гиббса")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="condcast - условные прогнозы для байесовских VAR",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Примеры:\n"
        "  %(prog)s estimate -d fred_qd.csv --start 1976Q3 --end 2019Q4\n"
        "  %(prog)s forecast -d fred_qd.csv --start 1976Q3 --end 2019Q4 -s stress_baseline\n"
        "  %(prog)s forecast --posterior output/posterior.npz --irf GDPC1 ...\n"
        "  %(prog)s bench --kind equality --full\n"
        "  %(prog)s ver",
    )

    subparsers = parser.add_subparsers(dest="command", help="Команды")

    estimate_parser = subparsers.add_parser("estimate", help="Оценить апостериорное распределение")
    _add_common(estimate_parser)
    _add_data(estimate_parser)

    forecast_parser = subparsers.add_parser("forecast", help="Построить условный прогноз")
    _add_common(forecast_parser)
    _add_data(forecast_parser)
    forecast_parser.add_argument("-s", "--scenario", help="Файл сценария YAML или имя из core/scenarios")
    forecast_parser.add_argument("--posterior", help="Архив posterior.npz из команды estimate")
    forecast_parser.add_argument("--threads", type=int, help="Число потоков")
    forecast_parser.add_argument("--horizon", type=int, help="Горизонт прогноза, кварталов")
    forecast_parser.add_argument("--save-draws", action="store_true", help="Сохранить все выборки")
    forecast_parser.add_argument(
        "--difference", action="store_true", help="Таблица разности с безусловным прогнозом"
    )
    forecast_parser.add_argument("--irf", metavar="VARIABLE", help="Отклик на рост прогноза переменной")
    forecast_parser.add_argument("--irf-size", type=float, help="Величина сдвига (1.0 = 1%%)")
    forecast_parser.add_argument("--irf-horizon", type=int, help="Горизонт отклика, кварталов")

    bench_parser = subparsers.add_parser("bench", help="Сравнить время сэмплеров")
    _add_common(bench_parser)
    bench_parser.add_argument(
        "--kind", choices=[*BENCH_KINDS, "both"], default="both", help="Тип ограничений"
    )
    bench_parser.add_argument("--full", action="store_true", help="Полная сетка конфигураций")
    bench_parser.add_argument("--repeats", type=int, help="Число повторов замера")
    bench_parser.add_argument("--naive", action="store_true", help="Добавить наивный отбор")
    bench_parser.add_argument(
        "--param-source", choices=["truth", "posterior"], help="Параметры: истинные или апостериорные"
    )

    subparsers.add_parser("ver", help="Показать версию")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 0

    commands = {
        "estimate": cmd_estimate,
        "forecast": cmd_forecast,
        "bench": cmd_bench,
        "ver": cmd_version,
    }

    handler = commands.get(args.command)
    if not handler:
        parser.print_help()
        return 0

    try:
        return handler(args)
    except CondcastError as e:
        logger.error("%s: %s", type(e).__name__, e.message)
        print(f"[ERROR] {e.message}")
        print(json.dumps(e.to_record(), ensure_ascii=False, default=str), file=sys.stderr)
        return exit_code_for(e)
    except Exception as e:
        logger.exception("Unexpected failure in %s", args.command)
        record = {"error": type(e).__name__, "category": "numerical", "message": str(e)}
        if exit_code_for(e) == EXIT_VALIDATION:
            record["category"] = "validation"
        print(f"[ERROR] {e}")
        print(json.dumps(record, ensure_ascii=False), file=sys.stderr)
        return exit_code_for(e)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
