"""Concrete model builders.

Three systems, all exposing the same small surface consumed by the
propagator and the work-statistics pipeline:

    dimension            basis size
    hamiltonian(v)       matrix at control value v
    metric(v)            intertwining metric at v
    metric_inverse(v)
    metric_rate(v, dv)   d(metric)/dt given dv/dt (zero when static)
    metric_is_static     True when the metric ignores the drive

The two-level system drives an imaginary detuning, the oscillator drives
its trap frequency with a fixed imaginary momentum shift, and the
tight-binding chain is static (its control value is ignored).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .tolerances import DEFAULT

__all__ = ["TwoLevel", "Oscillator", "HatanoNelson", "relaxation_time"]


@dataclass(frozen=True)
class TwoLevel:
    """Two-state system with real coupling and imaginary detuning.

    H(v) = [[i v, coupling], [coupling, -i v]] in the (upper, lower) basis.
    Eigenvalues are +/- sqrt(coupling^2 - v^2): real for |v| < coupling,
    coalescing at |v| = coupling, conjugate-imaginary beyond.
    """

    coupling: float = 1.0

    dimension = 2
    metric_is_static = False

    def hamiltonian(self, v: float) -> np.ndarray:
        return np.array([[1j * v, self.coupling], [self.coupling, -1j * v]], dtype=complex)

    def eigenvalues_closed_form(self, v: float) -> np.ndarray:
        root = np.emath.sqrt(self.coupling**2 - v**2)
        return np.sort_complex(np.array([-root, root]))

    def metric(self, v: float) -> np.ndarray:
        mu = v / self.coupling
        return np.array([[2.0, -2j * mu], [2j * mu, 2.0]], dtype=complex)

    def metric_inverse(self, v: float) -> np.ndarray:
        mu = v / self.coupling
        det = 2.0 * (1.0 - mu * mu)
        return np.array([[1.0, 1j * mu], [-1j * mu, 1.0]], dtype=complex) / det

    def metric_rate(self, v: float, dv_dt: float) -> np.ndarray:
        s = dv_dt / self.coupling
        return np.array([[0.0, -2j * s], [2j * s, 0.0]], dtype=complex)

    def metric_min_eigenvalue(self, v: float) -> float:
        # metric eigenvalues are 2 (1 +/- v/coupling)
        return 2.0 * (1.0 - abs(v) / self.coupling)


@dataclass(frozen=True)
class Oscillator:
    """Harmonic trap with an imaginary momentum shift, in a truncated
    number basis of the reference frequency.

    hamiltonian(w) = (P - i shift)^2 / (2 mass) + mass w^2 X^2 / 2 built
    from the truncated X and P of frequency omega_ref.  The static metric
    exp(2 shift X) makes the gauge term vanish; hermitian_frame(w) is the
    shift-free image P^2/(2 mass) + mass w^2 X^2/2, unitarily equivalent
    in the untruncated limit.
    """

    omega_ref: float
    shift: float = 0.0
    n_basis: int = 40
    mass: float = 1.0

    metric_is_static = True
    is_truncated = True

    def __post_init__(self):
        if self.omega_ref <= 0 or self.mass <= 0:
            raise ValueError("omega_ref and mass must be positive")
        if self.n_basis < 8:
            raise ValueError("n_basis must be at least 8")

    @property
    def dimension(self) -> int:
        return self.n_basis

    @cached_property
    def _ladder(self) -> np.ndarray:
        n = self.n_basis
        a = np.zeros((n, n), dtype=complex)
        a[np.arange(n - 1), np.arange(1, n)] = np.sqrt(np.arange(1, n))
        return a

    @cached_property
    def position(self) -> np.ndarray:
        a = self._ladder
        return (a + a.conj().T) / np.sqrt(2.0 * self.mass * self.omega_ref)

    @cached_property
    def momentum(self) -> np.ndarray:
        a = self._ladder
        return 1j * np.sqrt(self.mass * self.omega_ref / 2.0) * (a.conj().T - a)

    @cached_property
    def _x_eig(self):
        vals, vecs = np.linalg.eigh(self.position)
        return vals, vecs

    @cached_property
    def _padded_squares(self):
        # Rayleigh-Ritz convention: square in a padded basis, then project.
        # Squaring the truncated factors instead corrupts the corner element
        # and plants a spurious low eigenvalue at the reference frequency.
        n = self.n_basis
        a = np.zeros((n + 2, n + 2), dtype=complex)
        a[np.arange(n + 1), np.arange(1, n + 2)] = np.sqrt(np.arange(1, n + 2))
        x = (a + a.conj().T) / np.sqrt(2.0 * self.mass * self.omega_ref)
        p = 1j * np.sqrt(self.mass * self.omega_ref / 2.0) * (a.conj().T - a)
        return (x @ x)[:n, :n], (p @ p)[:n, :n]

    @cached_property
    def _p_squared(self) -> np.ndarray:
        return self._padded_squares[1]

    @cached_property
    def _x_squared(self) -> np.ndarray:
        return self._padded_squares[0]

    def hamiltonian(self, omega: float) -> np.ndarray:
        kin = (
            self._p_squared
            - 2j * self.shift * self.momentum
            - self.shift**2 * np.eye(self.n_basis)
        ) / (2.0 * self.mass)
        return kin + 0.5 * self.mass * omega**2 * self._x_squared

    def hermitian_frame(self, omega: float) -> np.ndarray:
        return self._p_squared / (2.0 * self.mass) + 0.5 * self.mass * omega**2 * self._x_squared

    def position_exponential(self, c: float) -> np.ndarray:
        """exp(c X) through the spectral decomposition of truncated X."""
        vals, vecs = self._x_eig
        return (vecs * np.exp(c * vals)) @ vecs.conj().T

    def metric(self, v: float = 0.0) -> np.ndarray:
        return self.position_exponential(2.0 * self.shift)

    def metric_inverse(self, v: float = 0.0) -> np.ndarray:
        return self.position_exponential(-2.0 * self.shift)

    def metric_rate(self, v: float, dv_dt: float) -> np.ndarray:
        return np.zeros((self.n_basis, self.n_basis), dtype=complex)

    def metric_min_eigenvalue(self, v: float = 0.0) -> float:
        vals, _ = self._x_eig
        return float(np.exp(2.0 * self.shift * vals.min())) if self.shift >= 0 else float(
            np.exp(2.0 * self.shift * vals.max())
        )

    def ladder_energies(self, omega: float, count: int | None = None) -> np.ndarray:
        n = self.n_basis if count is None else count
        return omega * (np.arange(n) + 0.5)


@dataclass(frozen=True)
class HatanoNelson:
    """Tight-binding chain with asymmetric hopping exp(+/- asymmetry).

    H[x, x+1] = -(hopping/2) e^{+asymmetry},
    H[x+1, x] = -(hopping/2) e^{-asymmetry}, plus on-site potential on the
    diagonal; periodic boundaries wrap both corners.  Open chains are
    similar to a hermitian chain under diag(e^{asymmetry * x}), hence an
    all-real spectrum and the diagonal metric e^{2 asymmetry x}; periodic
    chains at nonzero asymmetry have a conjugate-paired complex spectrum.
    """

    length: int
    hopping: float = 1.0
    asymmetry: float = 0.0
    potential: tuple = field(default=())
    boundary: str = "open"

    metric_is_static = True

    def __post_init__(self):
        if self.length < 2:
            raise ValueError("length must be at least 2")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.potential and len(self.potential) != self.length:
            raise ValueError("potential list must match the chain length")

    @property
    def dimension(self) -> int:
        return self.length

    def hamiltonian(self, v: float = 0.0) -> np.ndarray:
        L = self.length
        fwd = -(self.hopping / 2.0) * np.exp(self.asymmetry)
        bwd = -(self.hopping / 2.0) * np.exp(-self.asymmetry)
        H = np.zeros((L, L), dtype=complex)
        idx = np.arange(L - 1)
        H[idx, idx + 1] = fwd
        H[idx + 1, idx] = bwd
        if self.boundary == "periodic":
            H[L - 1, 0] = fwd
            H[0, L - 1] = bwd
        if self.potential:
            H[np.arange(L), np.arange(L)] = np.asarray(self.potential, dtype=float)
        return H

    def diagonal_metric(self) -> np.ndarray | None:
        """Closed-form diag(e^{2 asymmetry x}) metric; open chains only."""
        if self.boundary != "open":
            return None
        x = np.arange(self.length)
        return np.diag(np.exp(2.0 * self.asymmetry * x)).astype(complex)

    @cached_property
    def _metric_pair(self):
        diag = self.diagonal_metric()
        if diag is not None:
            x = np.arange(self.length)
            inv = np.diag(np.exp(-2.0 * self.asymmetry * x)).astype(complex)
            return diag, inv
        eigsys = linalg.eigendecompose(self.hamiltonian())
        op = linalg.build_metric(eigsys)
        return op.g, op.g_inverse

    def metric(self, v: float = 0.0) -> np.ndarray:
        return self._metric_pair[0]

    def metric_inverse(self, v: float = 0.0) -> np.ndarray:
        return self._metric_pair[1]

    def metric_rate(self, v: float, dv_dt: float) -> np.ndarray:
        return np.zeros((self.length, self.length), dtype=complex)


def relaxation_time(eigenvalues) -> float:
    """Inverse of the smallest pairwise eigenvalue separation.

    Diverges when two eigenvalues coalesce, which is how the approach to an
    exceptional point shows up in the dynamics.
    """
    w = np.asarray(eigenvalues, dtype=complex)
    if w.size < 2:
        raise ValueError("need at least two eigenvalues")
    diffs = np.abs(w[:, None] - w[None, :])
    gap = np.min(diffs[np.triu_indices(w.size, k=1)])
    if gap == 0.0:
        return np.inf
    return float(1.0 / gap)
