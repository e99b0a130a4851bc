"""Shared fixtures and random-matrix helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def two_level_matrix(lam: float) -> np.ndarray:
    """[[i lam, 1], [1, -i lam]] in the (excited, ground) basis."""
    return np.array([[1j * lam, 1.0], [1.0, -1j * lam]], dtype=complex)


def random_real_spectrum_matrix(rng: np.random.Generator, dim: int):
    """Diagonalizable matrix with a real spectrum and modest conditioning.

    Returns (H, eigenvalues) with eigenvalue gaps >= 0.25 so nothing sits
    near a degeneracy.
    """
    eigs = np.sort(rng.uniform(-2.0, 2.0, size=dim))
    eigs += 0.25 * np.arange(dim)  # enforce gaps
    V = np.eye(dim) + 0.3 * rng.standard_normal((dim, dim))
    V = V + 0.3j * rng.standard_normal((dim, dim))
    H = V @ np.diag(eigs) @ np.linalg.inv(V)
    return H, eigs


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260818)
