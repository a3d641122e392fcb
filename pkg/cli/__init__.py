"""Командная строка advsec: конфигурация эксперимента, команды, артефакты запуска"""
