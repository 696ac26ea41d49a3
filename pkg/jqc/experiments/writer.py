"""
Запись результатов: CSV с заголовком происхождения и необязательное JSON-зеркало.

Числа пишутся через repr, чтобы повторный запуск давал побайтно тот же файл.
"""
import csv
import json
import logging
import os

from jqc import __version__
from jqc.models import HEADERS

logger = logging.getLogger(__name__)


def format_cell(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (tuple, list)):
        return ';'.join(format_cell(float(v)) for v in value)
    return str(value)


def provenance_line(kind, seed, config_sha256):
    return f'# jqc {__version__} kind={kind} seed={seed} config_sha256={config_sha256}\n'


def _json_value(value):
    if isinstance(value, tuple):
        return [float(v) for v in value]
    return value


def write_results(records, path, kind, seed, config_sha256='', json_mirror=False):
    """
    Записывает строки результатов одного вида.

    Args:
        records: список ResultRecord в порядке строк сетки
        path: путь CSV
        kind: вид эксперимента (определяет заголовок)
        json_mirror: дополнительно записать <path без расширения>.json

    Returns:
        str: путь CSV
    """
    header = HEADERS[kind]
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(path, 'w', newline='', encoding='utf-8') as f:
        f.write(provenance_line(kind, seed, config_sha256))
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for record in records:
            writer.writerow([format_cell(v) for v in record.row()])

    if json_mirror:
        mirror = os.path.splitext(path)[0] + '.json'
        payload = {
            'provenance': {'version': __version__, 'kind': kind, 'seed': seed,
                           'config_sha256': config_sha256},
            'header': header,
            'rows': [{name: _json_value(record.values[name]) for name in header}
                     for record in records],
        }
        with open(mirror, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2)
            f.write('\n')
        logger.info(f'JSON mirror written to {mirror}')

    logger.info(f'{len(records)} {kind} rows written to {path}')
    return path


def read_results(path):
    """
    Читает CSV результатов.

    Returns:
        tuple: (строка происхождения без '# ', заголовок, список словарей-строк)
    """
    with open(path, 'r', encoding='utf-8', newline='') as f:
        provenance = f.readline().rstrip('\n')
        if not provenance.startswith('# jqc '):
            raise ValueError(f'{path}: missing provenance header')
        reader = csv.reader(f)
        header = next(reader)
        rows = [dict(zip(header, row)) for row in reader]
    return provenance[2:], header, rows
