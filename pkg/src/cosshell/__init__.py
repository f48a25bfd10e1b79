"""Gamma-limit Cosserat membrane shell on a curved reference midsurface."""

__version__ = "0.1.0"
