"""Exact lattice computations for twisted K3 surfaces."""

__version__ = "0.1.0"
