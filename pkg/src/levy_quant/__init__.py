"""Exponential-Lévy models: characteristic functions, simulation, pricing, calibration."""

__version__ = "0.1.0"
