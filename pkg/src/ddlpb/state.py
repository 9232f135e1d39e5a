"""Coefficient containers for the coupled two-field solve."""

from dataclasses import dataclass

import numpy as np


@dataclass
class StateVector:
    """Spherical-harmonic coefficients of the two potentials.

    ``reaction`` holds the harmonic (Laplace) field coefficients and
    ``extension`` the screened-field coefficients; both are (M, nb).
    The same container is used for right-hand sides and adjoint
    solutions.
    """

    reaction: np.ndarray
    extension: np.ndarray

    def __post_init__(self):
        if self.reaction.shape != self.extension.shape:
            raise ValueError("block shapes differ")

    @classmethod
    def zeros(cls, n_spheres, nbasis):
        return cls(np.zeros((n_spheres, nbasis)), np.zeros((n_spheres, nbasis)))

    @classmethod
    def from_flat(cls, flat, n_spheres, nbasis):
        half = n_spheres * nbasis
        return cls(flat[:half].reshape(n_spheres, nbasis).copy(),
                   flat[half:].reshape(n_spheres, nbasis).copy())

    @property
    def shape(self):
        return self.reaction.shape

    def flat(self):
        return np.concatenate([self.reaction.ravel(), self.extension.ravel()])

    def copy(self):
        return StateVector(self.reaction.copy(), self.extension.copy())

    def dot(self, other):
        return (np.vdot(self.reaction, other.reaction)
                + np.vdot(self.extension, other.extension))

    def norm_inf(self):
        a = np.max(np.abs(self.reaction)) if self.reaction.size else 0.0
        b = np.max(np.abs(self.extension)) if self.extension.size else 0.0
        return max(a, b)

    def __add__(self, other):
        return StateVector(self.reaction + other.reaction,
                           self.extension + other.extension)

    def __sub__(self, other):
        return StateVector(self.reaction - other.reaction,
                           self.extension - other.extension)

    def __mul__(self, scalar):
        return StateVector(self.reaction * scalar, self.extension * scalar)

    __rmul__ = __mul__
