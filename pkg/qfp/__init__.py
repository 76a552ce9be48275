"""Quantum floating-point arithmetic simulator."""
__version__ = "1.0.0"
