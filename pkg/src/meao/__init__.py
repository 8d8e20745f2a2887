"""Entanglement-based bonding analysis for desk-scale fermionic states."""

from .errors import ScanPointError, SolverError, ValidationError

__version__ = "0.1.0"

__all__ = ["ValidationError", "SolverError", "ScanPointError", "__version__"]
