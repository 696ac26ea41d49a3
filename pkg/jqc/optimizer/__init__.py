"""Вариационная минимизация энергий схемы и JQC, перезапуски и вычислительный выигрыш."""
