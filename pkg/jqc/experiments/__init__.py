"""Пакетные эксперименты: конфигурация, команды, запись результатов и CLI."""
