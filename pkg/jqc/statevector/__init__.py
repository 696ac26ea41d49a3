"""Плотная симуляция вектора состояния на 2^N амплитуд."""
