"""Admissible prime constellations across the cycles of gaps of Eratosthenes sieve."""

from .core import (
    Constellation,
    PrimeTable,
    extend_left,
    extend_right,
    head_child,
    is_admissible,
    is_nonconvex,
    nu,
    phi_primorial,
    pi,
    points,
    primorial,
    reverse,
    rho,
    tail_child,
)

__version__ = "0.1.0"
