"""Cubic mean-field Ising laboratory"""

__version__ = "0.1.0"
