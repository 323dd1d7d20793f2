"""Exact polynomial Hartree-Fock for minimal-basis H2."""

__version__ = "0.1.0"
