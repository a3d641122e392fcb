#!/usr/bin/env python3
"""
Командная строка advsec

    advsec <train|attack|seceval|poison|explain> --config experiment.json [--out DIR]
           [--workers N] [--seed S] [--log-level LEVEL]

Коды выхода: 0 успех, 2 ошибка конфигурации или аргументов,
3 ошибка выполнения (данные, модель, атака), 130 прервано пользователем.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import config
from cli.artifacts import RunArtifacts
from cli.commands import COMMANDS
from cli.config import load_config
from errors import AdvSecError, ConfigError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_INTERRUPTED = 130


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advsec", description='Оценка защищенности классификаторов от атак')
    parser.add_argument('command', choices=sorted(COMMANDS),
                        help='Команда: обучение, атака, кривая защищенности, отравление, объяснение')
    parser.add_argument('--config', type=str, required=True,
                        help='Путь к JSON-файлу эксперимента')
    parser.add_argument('--out', type=str, default=None,
                        help='Выходная директория (по умолчанию output_dir из конфигурации или runs/<команда>)')
    parser.add_argument('--workers', type=int, default=None,
                        help='Число потоков для обработки образцов (переопределяет конфигурацию)')
    parser.add_argument('--seed', type=int, default=None,
                        help='Общий seed (переопределяет конфигурацию)')
    parser.add_argument('--log-level', type=str, default=None,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Уровень логирования в консоль')
    return parser


def _fail(code: int, error: BaseException) -> int:
    print(f"❌ {type(error).__name__}: {error}", file=sys.stderr)
    return code


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config.setup_logging(level=args.log_level)

    try:
        cfg, _ = load_config(args.config, overrides={"seed": args.seed, "workers": args.workers})
    except ConfigError as e:
        logger.error(f"Ошибка конфигурации: {e}")
        return _fail(EXIT_CONFIG, e)

    out_dir = Path(args.out) if args.out else cfg.output_dir or config.DEFAULT_OUTPUT_DIR / args.command
    artifacts = RunArtifacts(out_dir, args.command, cfg.model_dump(mode="json"), cfg.seeds())
    config.setup_logging(log_file=artifacts.log_path, level=args.log_level)
    logger.info(f"🚀 advsec {args.command} (версия {config.VERSION}), результаты в {out_dir}")

    try:
        summary = COMMANDS[args.command](cfg, artifacts)
        artifacts.finalize(summary)
    except KeyboardInterrupt:
        logger.info("\nВыполнение прервано пользователем")
        return EXIT_INTERRUPTED
    except ConfigError as e:
        logger.error(f"Ошибка конфигурации: {e}")
        return _fail(EXIT_CONFIG, e)
    except AdvSecError as e:
        logger.error(f"Ошибка выполнения команды {args.command}: {e}")
        return _fail(EXIT_RUNTIME, e)
    except Exception as e:
        logger.error(f"Критическая ошибка: {e}")
        raise
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
