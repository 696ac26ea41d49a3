"""Путь запутанной копии: выборка, перевзвешивание и восстановление вероятностей."""
