"""Executable constructions for Fibonacci-like unimodal maps.

Cutting-time combinatorics, tent-map realizations with rigorous slope
enclosures, tower covers of the critical omega-limit set, the ordered
Bratteli-Vershik model, its invariant measure and dimension numerics.
"""

__version__ = "0.1.0"
