"""Алгебра строк Паули, модельные гамильтонианы и группировка по базисам измерения."""
