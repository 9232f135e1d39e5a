"""Shared test utilities: synthetic molecule-like structures."""

import numpy as np

from ddlpb.cavity import Solute


def chain_cluster(m, seed=0, bond=1.5, rmin=1.2, rmax=2.0, qspan=0.8,
                  kappa=0.104, eps2=78.54):
    """Connected cluster grown like a branched molecule.

    Each sphere is attached at roughly bond distance from a random
    existing sphere, with a minimum separation enforced so the cavity
    looks like a molecule rather than a random gas.
    """
    rng = np.random.default_rng(seed)
    centers = [np.zeros(3)]
    while len(centers) < m:
        base = centers[rng.integers(len(centers))]
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        cand = base + direction * (bond + 0.4 * rng.random())
        dists = np.linalg.norm(np.asarray(centers) - cand, axis=1)
        if np.min(dists) > 1.1:
            centers.append(cand)
    centers = np.asarray(centers)
    radii = rng.uniform(rmin, rmax, m)
    charges = rng.uniform(-qspan, qspan, m)
    return Solute(centers, radii, charges, eps1=1.0, eps2=eps2, kappa=kappa)


def uniform_cloud(m, seed=0, density=0.02, rmin=1.0, rmax=1.6, kappa=0.104):
    """Uniform random cloud at a fixed number density (spheres per A^3)."""
    rng = np.random.default_rng(seed)
    box = (m / density) ** (1.0 / 3.0)
    centers = rng.uniform(0.0, box, size=(m, 3))
    radii = rng.uniform(rmin, rmax, m)
    charges = rng.uniform(-0.5, 0.5, m)
    return Solute(centers, radii, charges, kappa=kappa)
