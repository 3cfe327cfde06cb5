"""Numerical toolkit for Hamiltonian circle actions on symplectic 4-manifolds
with contact-type boundary.

The package provides coordinate-chart models of such manifolds (a zoo of
closed-form constructions), exterior calculus on second-order jets to check
their structural identities, gradient-flow simulation with boundary events,
Legendrian orbit detection, and Morse-Bott analysis of the moment map.
"""

from __future__ import annotations

__version__ = "0.1.0"
