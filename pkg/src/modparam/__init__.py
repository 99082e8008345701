"""Modular polynomials attached to modular parametrizations X0(N) -> E."""

__version__ = "0.1.0"
