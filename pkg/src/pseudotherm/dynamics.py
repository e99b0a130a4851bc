"""Drive protocols, the metric gauge correction, and propagation.

The central object is `propagate`, which integrates

    i*hbar dU/dt = (H_t + G_t) U,    G_t = -(i*hbar/2) g_t^{-1} dg_t/dt

with fixed-step classical RK4 and a step-doubling acceptance test.  The
gauge term G_t keeps U metric-unitary, U† g_t U = g_0, when the metric
family g_t moves with the drive; it vanishes for a static metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import erf as _erf

from .errors import (
    NotConvergedError,
    ProtocolRangeError,
    SingularMetricError,
)
from .linalg import MetricOperator, _as_square_matrix
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "Protocol",
    "PropagationResult",
    "hamiltonian_at",
    "gauge_field",
    "propagate",
    "unitarity_residual",
]

_KINDS = ("linear", "erf", "tabulated")


@dataclass(frozen=True)
class Protocol:
    """Scalar control schedule.

    linear:    value(t) = start + (end-start) * t/duration on [0, duration]
    erf:       value(t) = (start+end)/2 + (end-start)/2 * erf(t/duration)
               on [-window*duration, +window*duration]; window sized so the
               edges sit deep in the erf tails
    tabulated: piecewise-linear through (t, value) samples
    """

    kind: str
    start_value: float = 0.0
    end_value: float = 0.0
    duration: float = 1.0
    window: float = 3.0
    samples: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if self.kind == "tabulated":
            if len(self.samples) < 2:
                raise ValueError("tabulated protocol needs at least 2 samples")
            ts = [t for t, _ in self.samples]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("tabulated sample times must be strictly increasing")
        else:
            if self.duration <= 0:
                raise ValueError("protocol duration must be positive")
            if self.kind == "erf" and self.window <= 0:
                raise ValueError("erf window must be positive")

    @classmethod
    def linear(cls, start: float, end: float, duration: float) -> "Protocol":
        return cls("linear", start, end, duration)

    @classmethod
    def erf(cls, start: float, end: float, duration: float, window: float = 3.0) -> "Protocol":
        return cls("erf", start, end, duration, window)

    @classmethod
    def tabulated(cls, samples: Sequence[tuple]) -> "Protocol":
        return cls("tabulated", samples=tuple((float(t), float(v)) for t, v in samples))

    @property
    def t_start(self) -> float:
        if self.kind == "linear":
            return 0.0
        if self.kind == "erf":
            return -self.window * self.duration
        return self.samples[0][0]

    @property
    def t_end(self) -> float:
        if self.kind == "linear":
            return self.duration
        if self.kind == "erf":
            return self.window * self.duration
        return self.samples[-1][0]

    def _check_range(self, t: float) -> float:
        lo, hi = self.t_start, self.t_end
        slack = 1e-9 * (hi - lo)
        if t < lo - slack or t > hi + slack:
            raise ProtocolRangeError(
                f"t = {t:.6g} outside protocol window [{lo:.6g}, {hi:.6g}]"
            )
        return min(max(t, lo), hi)

    def value(self, t: float) -> float:
        t = self._check_range(t)
        if self.kind == "linear":
            return self.start_value + (self.end_value - self.start_value) * t / self.duration
        if self.kind == "erf":
            mid = 0.5 * (self.start_value + self.end_value)
            half = 0.5 * (self.end_value - self.start_value)
            return mid + half * float(_erf(t / self.duration))
        ts = np.array([s[0] for s in self.samples])
        vs = np.array([s[1] for s in self.samples])
        return float(np.interp(t, ts, vs))

    def rate(self, t: float) -> float:
        """Time derivative of value(t)."""
        t = self._check_range(t)
        if self.kind == "linear":
            return (self.end_value - self.start_value) / self.duration
        if self.kind == "erf":
            half = 0.5 * (self.end_value - self.start_value)
            x = t / self.duration
            return half * 2.0 / math.sqrt(math.pi) * math.exp(-x * x) / self.duration
        ts = [s[0] for s in self.samples]
        i = min(max(np.searchsorted(ts, t, side="right") - 1, 0), len(ts) - 2)
        (t0, v0), (t1, v1) = self.samples[i], self.samples[i + 1]
        return (v1 - v0) / (t1 - t0)


@dataclass(frozen=True)
class PropagationResult:
    """Final propagator with convergence and unitarity diagnostics.

    U has one column per column of the initial condition (the identity by
    default).  checkpoints holds (t, ||U† g_t U - M0||_F) at >= 10 interior
    times of the accepted run, M0 being the metric Gram matrix of the initial
    columns.  g_start/g_end are the metric family evaluated at the window
    edges; downstream two-time measurements must weigh overlaps with exactly
    these matrices, otherwise row sums drift away from 1.
    """

    U: np.ndarray
    checkpoints: tuple
    steps_used: int
    step_size: float
    g_start: np.ndarray
    g_end: np.ndarray
    t_start: float
    t_end: float
    entry_change: float


def hamiltonian_at(model, protocol: Protocol, t: float) -> np.ndarray:
    """H(value(t)); raises ProtocolRangeError outside the window."""
    return model.hamiltonian(protocol.value(t))


def gauge_field(g, dg_dt, hbar: float = 1.0) -> np.ndarray:
    """G = -(i*hbar/2) g^{-1} dg/dt."""
    D = _as_square_matrix(dg_dt)
    if isinstance(g, MetricOperator):
        ginv_D = g.g_inverse @ D
    else:
        G = _as_square_matrix(g)
        try:
            ginv_D = np.linalg.solve(G, D)
        except np.linalg.LinAlgError as exc:
            raise SingularMetricError(f"metric not invertible: {exc}") from exc
    return -0.5j * hbar * ginv_D


def unitarity_residual(U, g0, gt) -> float:
    """||U† g_t U - g_0||_F, the metric-unitarity defect of a propagator."""
    Um = np.asarray(U, dtype=complex)
    G0 = g0.g if isinstance(g0, MetricOperator) else np.asarray(g0, dtype=complex)
    Gt = gt.g if isinstance(gt, MetricOperator) else np.asarray(gt, dtype=complex)
    return float(np.linalg.norm(Um.conj().T @ Gt @ Um - G0))


class _MetricFamily:
    """Adapter bundling the metric callables a model exposes."""

    def __init__(self, model, protocol: Protocol, hbar: float, identity: bool):
        self.identity = identity
        self.dim = model.dimension
        self.hbar = hbar
        if identity:
            self.static = True
            self._g0 = np.eye(self.dim, dtype=complex)
            return
        self.static = bool(getattr(model, "metric_is_static", False))
        self._model = model
        self._protocol = protocol
        if self.static:
            v0 = protocol.value(protocol.t_start)
            self._g0 = model.metric(v0)
            self._min0 = self._min_eig_direct(self._g0)

    def g(self, t: float) -> np.ndarray:
        if self.identity or self.static:
            return self._g0
        return self._model.metric(self._protocol.value(t))

    def gauge(self, t: float) -> np.ndarray | None:
        """Gauge correction G_t, or None when it vanishes identically."""
        if self.identity or self.static:
            return None
        v = self._protocol.value(t)
        dg = self._model.metric_rate(v, self._protocol.rate(t))
        ginv = self._model.metric_inverse(v)
        return -0.5j * self.hbar * (ginv @ dg)

    @staticmethod
    def _min_eig_direct(g: np.ndarray) -> float:
        return float(np.min(np.linalg.eigvalsh(0.5 * (g + g.conj().T))))

    def min_eigenvalue(self, t: float) -> float:
        if self.identity:
            return 1.0
        if self.static:
            return self._min0
        v = self._protocol.value(t)
        fn = getattr(self._model, "metric_min_eigenvalue", None)
        if fn is not None:
            return float(fn(v))
        return self._min_eig_direct(self._model.metric(v))


def _scan_positive_definite(family: _MetricFamily, t0: float, t1: float, tol: Tolerances):
    """Refuse to integrate into a region where the metric degenerates."""
    if family.identity:
        return
    if family.static:
        m = family.min_eigenvalue(t0)
        if m <= tol.metric_min_eig:
            raise SingularMetricError(
                f"static metric is not positive definite (min eigenvalue {m:.3e})"
            )
        return
    ts = np.linspace(t0, t1, 1025)
    for t in ts:
        m = family.min_eigenvalue(float(t))
        if m <= tol.metric_min_eig:
            raise SingularMetricError(
                f"metric loses positive-definiteness at t = {t:.6g} "
                f"(min eigenvalue {m:.3e}); cannot propagate through"
            )


def propagate(
    model,
    protocol: Protocol,
    hbar: float = 1.0,
    steps: int | None = None,
    *,
    tol: Tolerances | None = None,
    entry_tol: float | None = None,
    max_steps: int = 1 << 23,
    checkpoint_count: int = 12,
    initial: np.ndarray | None = None,
    gauge_precondition: bool = False,
    t0: float | None = None,
    t1: float | None = None,
    unitarity_gate: float | None = None,
) -> PropagationResult:
    """Integrate the metric-corrected Schrodinger equation for U(t1, t0).

    steps seeds the refinement; the count doubles until no entry of U moves
    by more than entry_tol (relative to the largest entry) under halving the
    step, then the finer run is returned.  `initial` replaces the identity
    initial condition by an arbitrary (dim x k) column block, which evolves
    the given columns only.  With gauge_precondition the model's hermitian
    frame is integrated instead (identity metric, no gauge term).

    Raises SingularMetricError when the metric degenerates inside the window
    and NotConvergedError when max_steps is hit without acceptance.
    """
    tol = tol or DEFAULT
    entry_tol = tol.propagation if entry_tol is None else float(entry_tol)
    t0 = protocol.t_start if t0 is None else float(t0)
    t1 = protocol.t_end if t1 is None else float(t1)
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")

    if gauge_precondition:
        frame = getattr(model, "hermitian_frame", None)
        if frame is None:
            raise ValueError("model has no hermitian frame to precondition into")
        h_of = frame
    else:
        h_of = model.hamiltonian
    family = _MetricFamily(model, protocol, hbar, identity=gauge_precondition)
    _scan_positive_definite(family, t0, t1, tol)

    dim = model.dimension
    X0 = np.eye(dim, dtype=complex) if initial is None else np.asarray(initial, dtype=complex)
    if X0.ndim != 2 or X0.shape[0] != dim:
        raise ValueError(f"initial condition must be ({dim} x k), got {X0.shape}")

    g_start, g_end = family.g(t0), family.g(t1)
    M0 = X0.conj().T @ g_start @ X0
    gate = unitarity_gate
    if gate is None:
        gate = tol.propagation * max(1.0, float(np.linalg.norm(g_start)))

    def generator(t: float) -> np.ndarray:
        A = h_of(protocol.value(t))
        G = family.gauge(t)
        if G is not None:
            A = A + G
        return (-1j / hbar) * A

    def run(n: int):
        # Coarse passes can sit beyond the RK4 stability boundary and
        # overflow; return None so the doubling loop just keeps refining.
        dt = (t1 - t0) / n
        every = max(1, n // max(checkpoint_count, 10))
        marks = []
        U = X0.copy()
        A1 = generator(t0)
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(n):
                t = t0 + k * dt
                A2 = generator(t + 0.5 * dt)
                A3 = generator(t0 + (k + 1) * dt)
                k1 = A1 @ U
                k2 = A2 @ (U + (0.5 * dt) * k1)
                k3 = A2 @ (U + (0.5 * dt) * k2)
                k4 = A3 @ (U + dt * k3)
                U += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                A1 = A3
                if (k + 1) % every == 0 or k == n - 1:
                    if not np.all(np.isfinite(U.view(np.float64))):
                        return None, ()
                    tc = t0 + (k + 1) * dt
                    res = float(np.linalg.norm(U.conj().T @ family.g(tc) @ U - M0))
                    marks.append((tc, res))
        return U, tuple(marks)

    n = max(int(steps) if steps else 128, 2)
    U_prev, _ = run(n)
    change = np.inf
    while True:
        if 2 * n > max_steps:
            raise NotConvergedError(
                f"step doubling did not converge by {max_steps} steps "
                f"(last entry change {change:.3e})"
            )
        n *= 2
        U, checkpoints = run(n)
        if U is not None and U_prev is not None:
            change = float(np.max(np.abs(U - U_prev)))
            scale = max(1.0, float(np.max(np.abs(U))))
            if change <= entry_tol * scale:
                worst = max(r for _, r in checkpoints)
                if worst <= gate:
                    break
        U_prev = U

    return PropagationResult(
        U=U,
        checkpoints=checkpoints,
        steps_used=n,
        step_size=(t1 - t0) / n,
        g_start=g_start,
        g_end=g_end,
        t_start=t0,
        t_end=t1,
        entry_change=change,
    )
