import os

from jqc.experiments.cli import cli

# Выбор конфигурации делает сама группа команд по переменной JQC_ENV:
# development - подробный вывод в консоль, иначе - ротируемый лог в logs/
if __name__ == '__main__':
    cli(prog_name=os.environ.get('JQC_PROG_NAME', 'jqc'))
