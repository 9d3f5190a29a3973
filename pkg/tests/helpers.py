"""Shared test utilities."""

import numpy as np

from honls import SpectralField


def random_field(grid, rng, n_modes=16, scale=1.0):
    """Band-limited random field built from explicit lattice modes."""
    coeffs = np.zeros(grid.shape, dtype=complex)
    flat_idx = rng.choice(grid.n_total, size=n_modes, replace=False)
    vals = scale * (rng.standard_normal(n_modes) + 1j * rng.standard_normal(n_modes))
    coeffs.ravel()[flat_idx] = vals
    return SpectralField(grid, coeffs).field()
