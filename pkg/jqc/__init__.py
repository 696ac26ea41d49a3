import os
import logging
from logging.handlers import RotatingFileHandler

from jqc.config import Config

__version__ = '0.3.0'

logger = logging.getLogger('jqc')


def create_app(config_class=Config):
    """
    Фабрика окружения JQC.
    Настраивает логирование пакета согласно классу конфигурации
    и возвращает корневой логгер.
    """
    # Повторный вызов не должен дублировать обработчики
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    if config_class.DEBUG:
        console = logging.StreamHandler()
        console.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
        console.setLevel(logging.DEBUG)
        logger.addHandler(console)
        logger.setLevel(logging.DEBUG)
        return logger

    if not os.path.exists(config_class.LOG_DIR):
        os.makedirs(config_class.LOG_DIR, exist_ok=True)

    file_handler = RotatingFileHandler(
        os.path.join(config_class.LOG_DIR, config_class.LOG_FILE),
        maxBytes=config_class.LOG_MAX_BYTES,
        backupCount=config_class.LOG_BACKUP_COUNT
    )
    file_handler.setFormatter(logging.Formatter(
        '%(asctime)s %(levelname)s: %(message)s [%(pathname)s:%(lineno)d]'
    ))
    file_handler.setLevel(logging.INFO)
    logger.addHandler(file_handler)

    # Предупреждения дублируются в консоль, чтобы их видел пользователь CLI
    console = logging.StreamHandler()
    console.setLevel(logging.WARNING)
    console.setFormatter(logging.Formatter('%(levelname)s: %(message)s'))
    logger.addHandler(console)

    logger.setLevel(logging.INFO)
    logger.info('JQC startup')
    return logger
