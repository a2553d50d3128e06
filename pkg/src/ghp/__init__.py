"""Generalized Hermite polynomials and their elliptic root asymptotics."""

__version__ = "0.1.0"
