import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    """Конфигурация JQC: окружение, логирование и численные допуски."""

    # ===== ОКРУЖЕНИЕ =====
    ENV = os.environ.get('JQC_ENV', 'production')
    DEBUG = False

    # ===== ЛОГИРОВАНИЕ =====
    LOG_DIR = os.environ.get('JQC_LOG_DIR', 'logs')
    LOG_FILE = 'jqc.log'
    LOG_MAX_BYTES = 10240000
    LOG_BACKUP_COUNT = 10

    # ===== ПАРАЛЛЕЛИЗМ И ЛИМИТЫ =====
    THREADS = int(os.environ.get('JQC_THREADS', 1))
    if THREADS < 1:
        raise ValueError(
            'КРИТИЧЕСКАЯ ОШИБКА: JQC_THREADS должен быть >= 1. '
            'Исправьте переменную окружения перед запуском.'
        )
    # Лимит времени на одну строку результата (секунды)
    ROW_TIMEOUT = float(os.environ.get('JQC_ROW_TIMEOUT', 300))
    if ROW_TIMEOUT <= 0:
        raise ValueError('КРИТИЧЕСКАЯ ОШИБКА: JQC_ROW_TIMEOUT должен быть положительным.')

    # ===== АЛГЕБРА ПАУЛИ =====
    COEFF_TOL = 1e-14  # Порог удаления нулевых коэффициентов

    # ===== STATE-VECTOR =====
    NORM_TOL = 1e-10
    IMAG_TOL = 1e-12  # Мнимый остаток ниже порога отбрасывается молча
    IMAG_ERROR_TOL = 1e-8  # Выше порога - ошибка
    MIN_NORM = 1e-300
    DENSE_SOLVER_MAX_QUBITS = 12
    EIGSH_TOL = 1e-10
    EIGSH_MAXITER = 5000
    MAX_QUBITS = 16

    # ===== JASTROW =====
    MAX_TRUNCATION_ORDER = 4
    LAMBDA_BOUND = 2.0
    MIN_DENOMINATOR = 1e-12

    # ===== ИЗМЕРЕНИЯ =====
    PROB_TOL = 1e-9
    CLIP_WARN_MASS = 1e-6  # Отсеченная отрицательная масса, выше - предупреждение
    DEFAULT_SHOTS = 8192
    DEFAULT_M_REP = 12
    DISPERSION_BUDGET = 320000  # L-кубитных измерений на точку
    SIGN_SOLVE_MAXITER = 40  # Итерации Powell
    SIGN_SOLVE_RESTARTS = 32  # Случайные старты дискретного поиска
    SIGN_PROJECTION_STEPS = 200
    SIGN_FLIP_MAX_STEPS = 4096
    SIGN_EXACT_TOL = 1e-10
    # До этого размера знаки перебираются полностью
    SIGN_EXHAUSTIVE_QUBITS = 3
    MAX_LAMBDA_QUBITS = 12

    # ===== ОПТИМИЗАТОР =====
    MAX_EVALUATIONS = 2000
    BFGS_MAXITER = 200
    FD_STEP = 1e-6
    GTOL = 1e-9
    RESTARTS = 5
    LAMBDA_PERTURBATION = 0.05
    GAIN_CAP = 1e10
    GAIN_TOL = 1e-10
    VARIATIONAL_TOL = 1e-9


class DevelopmentConfig(Config):
    """Конфигурация для разработки: подробный вывод в консоль."""
    ENV = 'development'
    DEBUG = True


class ProductionConfig(Config):
    """Конфигурация для пакетных запусков."""
    ENV = 'production'
    DEBUG = False
