"""Параметризация Ястрова: классы симметрии, классические веса и усеченный проектор."""
