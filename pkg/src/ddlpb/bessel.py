"""Modified spherical Bessel functions of the first and second kind.

The second-kind functions use the ``exp(-x)/x`` prefactor convention
(no pi/2 factor); only ratios ``k_l(a)/k_l(b)`` and logarithmic
derivatives enter the solver, so the convention cancels everywhere it
matters.  All internal evaluation is exponentially scaled so that
arguments of several hundred (kappa times a large cavity diameter) stay
representable; unscaled values are exposed for moderate arguments.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError


@dataclass(frozen=True)
class BesselTable:
    """Values/derivatives of i_l and k_l at one argument, l = 0..lmax."""

    lmax: int
    argument: float
    i_values: np.ndarray
    i_derivs: np.ndarray
    k_values: np.ndarray
    k_derivs: np.ndarray


def _check_args(lmax, x):
    if lmax < 0:
        raise DomainError("lmax must be >= 0")
    if not x > 0:
        raise DomainError(f"argument must be positive, got {x}")


def bessel_i_scaled(lmax, x):
    """Return (exp(-x) i_l(x), exp(-x) i_l'(x)) arrays for l = 0..lmax."""
    _check_args(lmax, x)
    vals = np.empty(lmax + 1)
    derivs = np.empty(lmax + 1)
    _kernels.ihat_fill(lmax, float(x), vals, derivs)
    return vals, derivs


def bessel_k_scaled(lmax, x):
    """Return (x exp(x) k_l(x), x exp(x) k_l'(x)) arrays for l = 0..lmax."""
    _check_args(lmax, x)
    vals = np.empty(lmax + 1)
    derivs = np.empty(lmax + 1)
    _kernels.khat_fill(lmax, float(x), vals, derivs)
    return vals, derivs


def bessel_i(lmax, x):
    """Unscaled i_l(x), i_l'(x) for l = 0..lmax (moderate x only)."""
    vals, derivs = bessel_i_scaled(lmax, x)
    e = np.exp(x)
    return vals * e, derivs * e


def bessel_k(lmax, x):
    """Unscaled k_l(x), k_l'(x) with k_0(x) = exp(-x)/x."""
    vals, derivs = bessel_k_scaled(lmax, x)
    f = np.exp(-x) / x
    return vals * f, derivs * f


def bessel_table(lmax, x):
    iv, id_ = bessel_i(lmax, x)
    kv, kd = bessel_k(lmax, x)
    return BesselTable(lmax, float(x), iv, id_, kv, kd)
