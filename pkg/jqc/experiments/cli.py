"""
Командная строка: jqc <sweep|gain|lambda-scan|reconstruct|dispersion|dump-h> --config FILE.

Флаги --seed, --out, --literal-weight и --threads переопределяют документ.
"""
import logging
import sys

import click

from jqc import __version__, create_app
from jqc.config import Config, DevelopmentConfig, ProductionConfig
from jqc.errors import JQCError
from jqc.experiments.commands import COMMANDS
from jqc.experiments.config import load_config

logger = logging.getLogger(__name__)

# Код выхода при ошибке конфигурации или вычисления
EXIT_FAILURE = 2


def config_class():
    """Выбор конфигурации в зависимости от переменной окружения JQC_ENV."""
    return DevelopmentConfig if Config.ENV == 'development' else ProductionConfig


def common_options(func):
    decorators = [
        click.option('--config', 'config_path', required=True,
                     type=click.Path(dir_okay=False), help='JSON-описание эксперимента'),
        click.option('--seed', type=click.IntRange(min=0), default=None,
                     help='Зерно генератора (переопределяет "seed")'),
        click.option('--out', type=click.Path(dir_okay=False), default=None,
                     help='Путь результата (переопределяет "output")'),
        click.option('--literal-weight', is_flag=True,
                     help='Вес exp(J) вместо exp(2J) при перевзвешивании'),
        click.option('--threads', type=click.IntRange(min=1), default=None,
                     help='Число процессов для строк сетки'),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


def run_command(kind, config_path, seed=None, out=None, literal_weight=False, threads=None):
    """Загружает конфигурацию, выполняет команду и сообщает результат."""
    try:
        cfg = load_config(config_path, kind).with_overrides(seed, out, literal_weight, threads)
        if kind != 'dump-h' and not cfg.output:
            cfg = cfg.with_overrides(output=f'results/{kind}.csv')
        result = COMMANDS[kind](cfg)
    except (JQCError, ValueError, OSError) as e:
        logger.error(f'{kind} failed: {e}')
        click.echo(f'Error: {e}', err=True)
        sys.exit(EXIT_FAILURE)

    if kind == 'dump-h':
        if not cfg.output:
            click.echo(result, nl=False)
        return result
    click.echo(f'{len(result)} {kind} rows written to {cfg.output}')
    return result


@click.group()
@click.version_option(__version__, prog_name='jqc')
def cli():
    """Jastrow-проецированные состояния квантовых схем: пакетные эксперименты."""
    create_app(config_class())


@cli.command()
@common_options
def sweep(config_path, seed, out, literal_weight, threads):
    """Энергии схемы и JQC по сетке параметра модели."""
    run_command('sweep', config_path, seed, out, literal_weight, threads)


@cli.command()
@common_options
def gain(config_path, seed, out, literal_weight, threads):
    """Вычислительный выигрыш по глубине и размеру."""
    run_command('gain', config_path, seed, out, literal_weight, threads)


@cli.command('lambda-scan')
@common_options
def lambda_scan(config_path, seed, out, literal_weight, threads):
    """Точная и выборочная энергия JQC вдоль масштаба lambda."""
    run_command('lambda-scan', config_path, seed, out, literal_weight, threads)


@cli.command()
@common_options
def reconstruct(config_path, seed, out, literal_weight, threads):
    """Восстановление вероятностей на случайных вещественных состояниях."""
    run_command('reconstruct', config_path, seed, out, literal_weight, threads)


@cli.command()
@common_options
def dispersion(config_path, seed, out, literal_weight, threads):
    """Разброс выборочной энергии при фиксированном бюджете измерений."""
    run_command('dispersion', config_path, seed, out, literal_weight, threads)


@cli.command('dump-h')
@common_options
def dump_h(config_path, seed, out, literal_weight, threads):
    """Текстовый дамп гамильтониана."""
    run_command('dump-h', config_path, seed, out, literal_weight, threads)
