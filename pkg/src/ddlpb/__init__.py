"""Domain-decomposition solver for the linearized Poisson-Boltzmann
equation with analytical forces and optional fast-multipole acceleration."""

__version__ = "0.1.0"
