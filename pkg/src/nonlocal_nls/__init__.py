"""Inverse-scattering pipeline and long-time asymptotics for the nonlocal NLS."""

__version__ = "0.1.0"
