"""Exception hierarchy and warning categories."""

from __future__ import annotations


class PseudothermError(Exception):
    """Base class for all library errors."""


class DefectiveMatrixError(PseudothermError):
    """Matrix is not diagonalizable within tolerance (eigenvector coalescence)."""


class UnpairedSpectrumError(PseudothermError):
    """Spectrum is neither all-real nor closed under conjugation; no metric exists."""


class ProtocolRangeError(PseudothermError):
    """Time argument lies outside the protocol window."""


class SingularMetricError(PseudothermError):
    """Metric lost positive-definiteness (or invertibility) during an operation."""


class NotConvergedError(PseudothermError):
    """Step refinement hit the configured ceiling without meeting tolerance."""


class ComplexPartitionFunctionError(PseudothermError):
    """Partition function has an imaginary part beyond the reality tolerance."""


class NonRealSpectrumError(PseudothermError):
    """Operation requires an all-real spectrum but got complex eigenvalues."""


class NonRealResultError(PseudothermError):
    """A quantity that must be real came out complex beyond tolerance."""


class IsentropeNotFoundError(PseudothermError):
    """Constant-entropy solve failed to bracket or land on the target state."""


class ConfigError(PseudothermError):
    """Invalid run configuration; message names the offending field."""


class TruncationWarning(UserWarning):
    """Finite-basis tail carries non-negligible statistical weight."""
