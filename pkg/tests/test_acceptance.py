"""Numbered end-to-end acceptance checks.

Each test prints one `ACCEPTANCE NN PASS/FAIL` line (run pytest with -s to
see them) and then asserts, so a red criterion is visible both ways.
"""

from __future__ import annotations

import time
import warnings

import numpy as np
import pytest

from pseudotherm import (
    DEFAULT,
    HatanoNelson,
    NonRealResultError,
    Oscillator,
    Protocol,
    SingularMetricError,
    TruncationWarning,
    TwoLevel,
    eigendecompose,
    entropy,
    internal_energy,
    partition_function,
    propagate,
    quasistatic_cycle,
    thermal_state,
    two_time_work,
)
from pseudotherm.cli import main as cli_main
from pseudotherm.cli import random_metric_norms, read_csv
from pseudotherm.thermo import projector


def _verdict(num: int, ok: bool, detail: str):
    line = f"ACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, flush=True)
    assert ok, line


def test_01_two_level_jarzynski():
    t0 = time.perf_counter()
    res = two_time_work(TwoLevel(), Protocol.linear(0.0, 0.5, 1.0), 1.0)
    elapsed = time.perf_counter() - t0
    resid = res.report.relative_residual
    ok = resid < 1e-5 and elapsed < 1.0
    _verdict(1, ok, f"two-level exp(-bW) residual {resid:.2e} (< 1e-5), {elapsed:.2f} s (< 1 s)")


def test_02_oscillator_jarzynski_partial_sums():
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = two_time_work(
            Oscillator(omega_ref=0.2, shift=1.0, n_basis=40),
            Protocol.erf(0.2, 0.6, 0.5, window=3.0),
            1.0,
        )
    elapsed = time.perf_counter() - t0
    target = np.sinh(0.1) / np.sinh(0.3)
    rows = np.array(res.rows)
    cols = np.array(res.cols)
    boltz = np.exp(-(res.energies_final[cols][None, :] - res.energies_initial[rows][:, None]))
    weights = (res.p * boltz).real
    cutoffs = (5, 10, 15, 20, 25, 30, 35)
    partial = [weights[np.ix_(rows < N, cols < N)].sum() for N in cutoffs]
    errors = [abs(S / target - 1.0) for S in partial]
    converging = all(b < a for a, b in zip(errors, errors[1:]))
    ok = errors[-1] < 1e-3 and converging and elapsed < 60.0
    _verdict(
        2,
        ok,
        f"oscillator partial sums -> {partial[-1]:.5f} vs {target:.5f} "
        f"(rel err {errors[-1]:.2e} < 1e-3, monotone over cutoffs {cutoffs[0]}..{cutoffs[-1]}), "
        f"{elapsed:.1f} s (< 60 s)",
    )


def test_03_quasistatic_limit_of_irreversible_work(tmp_path):
    rc = cli_main(["fig1-right", "--out", str(tmp_path), "--workers", "4"])
    _, header, rows = read_csv(tmp_path / "fig1_right.csv")
    assert header == ["tau", "w_irr_erf", "w_irr_linear", "residual_erf", "residual_linear"]
    w_erf = [r[1] for r in rows]
    w_lin = [r[2] for r in rows]
    floor_ok = min(w_erf + w_lin) >= -1e-8
    quasi_ok = w_erf[-1] < 1e-3
    fast_ok = w_lin[0] > w_erf[0]
    ok = rc == 0 and floor_ok and quasi_ok and fast_ok
    _verdict(
        3,
        ok,
        f"W_irr floor {min(w_erf + w_lin):.2e} >= -1e-8, smooth protocol at tau={rows[-1][0]:.0f} "
        f"gives {w_erf[-1]:.2e} < 1e-3, linear {w_lin[0]:.4f} > erf {w_erf[0]:.4f} at tau={rows[0][0]}",
    )


def test_04_relaxation_time_divergence(tmp_path):
    rc = cli_main(["fig2-left", "--out", str(tmp_path), "--workers", "4"])
    _, header, rows = read_csv(tmp_path / "fig2_left.csv")
    lam = np.array([r[0] for r in rows])
    t_r = np.array([r[header.index("relaxation_time")] for r in rows])
    analytic = 1.0 / (2.0 * np.sqrt(1.0 - lam * lam))
    worst = float(np.max(np.abs(t_r - analytic)))
    ratio = t_r[np.argmin(np.abs(lam - 0.99))] / t_r[np.argmin(np.abs(lam - 0.2))]
    ok = rc == 0 and worst < 1e-12 and ratio > 6.0
    _verdict(
        4,
        ok,
        f"relaxation time matches 1/(2 sqrt(1-l^2)) to {worst:.1e} (< 1e-12) on "
        f"{len(rows)} grid points, T_r(0.99)/T_r(0.2) = {ratio:.3f} (> 6)",
    )


def test_05_broken_regime():
    norms = random_metric_norms(100, 42)
    n_pos = int((norms > 0).sum())
    n_neg = int((norms < 0).sum())
    raised = False
    try:
        propagate(TwoLevel(), Protocol.linear(0.0, 1.2, 1.0))
    except SingularMetricError:
        raised = True
    ok = n_pos > 0 and n_neg > 0 and n_pos + n_neg == 100 and raised
    _verdict(
        5,
        ok,
        f"seed-42 norms split {n_pos} positive / {n_neg} negative, "
        f"driving through the degeneracy raises SingularMetricError={raised}",
    )


def test_06_metric_unitarity_checkpoints():
    runs = [
        ("two-level linear", TwoLevel(), Protocol.linear(0.0, 0.5, 1.0), {}),
        ("two-level erf", TwoLevel(), Protocol.erf(0.0, 0.8, 0.5, window=3.0), {}),
        (
            "static asymmetric chain",
            HatanoNelson(length=8, hopping=1.0, asymmetry=0.5, boundary="open"),
            Protocol.linear(0.0, 0.0, 1.0),
            {},
        ),
        (
            "oscillator, hermitian frame",
            Oscillator(omega_ref=1.0, shift=0.5, n_basis=16),
            Protocol.linear(1.0, 1.4, 1.0),
            {"gauge_precondition": True},
        ),
    ]
    worst = 0.0
    count = 0
    for _, model, proto, kw in runs:
        res = propagate(model, proto, unitarity_gate=1e-8, **kw)
        assert len(res.checkpoints) >= 10
        worst = max(worst, max(defect for _, defect in res.checkpoints))
        count += len(res.checkpoints)
    ok = worst < 1e-8
    _verdict(
        6,
        ok,
        f"|U+ g_t U - g_0| <= {worst:.2e} (< 1e-8) over {count} checkpoints "
        f"across {len(runs)} propagations",
    )


def test_07_reality_of_thermodynamic_quantities():
    chain = HatanoNelson(length=8, hopping=1.0, asymmetry=0.5, boundary="periodic")
    w = eigendecompose(chain.hamiltonian()).eigenvalues
    beta = 1.0
    Z = partition_function(w, beta)
    q = np.exp(-beta * w)
    E_c = np.sum(w * q) / np.sum(q)
    S_c = beta * E_c + np.log(np.sum(q))
    # the library getters apply the same reality gates and must not raise
    state = thermal_state(w, beta)
    E = internal_energy(state)
    S = entropy(state)
    im_ok = max(abs(Z.imag), abs(E_c.imag), abs(S_c.imag)) < 1e-10
    triangular = np.array([[2 + 1j, 0.3, 0.0], [0.0, 1.0, 0.2], [0.0, 0.0, 3.0]], dtype=complex)
    generic = eigendecompose(triangular).eigenvalues
    with pytest.raises(NonRealResultError):
        internal_energy(thermal_state(generic, beta))
    ok = im_ok and np.isfinite(E) and np.isfinite(S)
    _verdict(
        7,
        ok,
        f"paired chain: |Im Z|={abs(Z.imag):.1e}, |Im E|={abs(E_c.imag):.1e}, "
        f"|Im S|={abs(S_c.imag):.1e} (< 1e-10); generic spectrum raises NonRealResultError",
    )


def test_08_carnot_bound():
    t0 = time.perf_counter()
    hermitian = quasistatic_cycle(
        lambda gap: np.array([[0.0, gap], [gap, 0.0]], dtype=complex),
        2.0,
        1.0,
        (1.0, 0.75, 0.375, 0.5),
        steps=10000,
    )
    g = 0.85
    legs = (0.0, 0.4, float(np.sqrt(g * g - 0.375**2)), float(np.sqrt(g * g - 0.425**2)))
    assert max(legs) < 0.8
    pseudo = quasistatic_cycle(TwoLevel(g), 2.0, 1.0, legs, steps=10000)
    elapsed = time.perf_counter() - t0
    ok = True
    for rep in (hermitian, pseudo):
        ok = ok and abs(rep.efficiency - 0.5) < 1e-3 and rep.efficiency <= 0.5 + 1e-6
    ok = ok and elapsed < 10.0
    _verdict(
        8,
        ok,
        f"eta(hermitian)-0.5 = {hermitian.efficiency - 0.5:+.1e}, "
        f"eta(pseudo)-0.5 = {pseudo.efficiency - 0.5:+.1e} (|dev| < 1e-3, overshoot <= 1e-6), "
        f"{elapsed:.1f} s (< 10 s)",
    )


def test_09_gauge_invariance_of_work_statistics():
    proto = Protocol.erf(2.0, 2.8, 0.5, window=2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        plain = two_time_work(
            Oscillator(omega_ref=2.0, shift=0.0, n_basis=30), proto, 1.0, entry_tol=1e-9
        )
        # raw shifted route: no preconditioning, loosened spectral-reality and
        # unitarity gates (truncation breaks exact pseudo-hermiticity at the
        # basis corner; the low block is what the comparison is about)
        shifted = two_time_work(
            Oscillator(omega_ref=2.0, shift=1.0, n_basis=30),
            proto,
            1.0,
            entry_tol=1e-9,
            gauge_precondition=False,
            tol=DEFAULT.with_(spectrum_imag=10.0),
            unitarity_gate=10.0,
        )
    block = 15
    rows = sorted(n for n in set(plain.rows) & set(shifted.rows) if n < block)
    cols = sorted(m for m in set(plain.cols) & set(shifted.cols) if m < block)
    assert len(rows) == block and len(cols) == block
    p0 = plain.p[np.ix_([plain.rows.index(n) for n in rows], [plain.cols.index(m) for m in cols])]
    p1 = shifted.p[
        np.ix_([shifted.rows.index(n) for n in rows], [shifted.cols.index(m) for m in cols])
    ]
    diff = float(np.max(np.abs(p0 - p1)))
    ok = diff < 1e-8
    _verdict(
        9,
        ok,
        f"shifted vs plain transition probabilities agree to {diff:.2e} (< 1e-8) "
        f"on the lower {block}x{block} block (raw row-sum defect "
        f"{shifted.row_sum_defect:.2f} is a truncation artifact, not gated)",
    )


def test_10_structural_properties():
    rng = np.random.default_rng(20260818)
    cases = []
    for _ in range(40):
        lam0, lam1 = rng.uniform(-0.85, 0.85, 2)
        cases.append((TwoLevel(), Protocol.linear(lam0, lam1, 1.0)))
    for _ in range(35):
        n_basis = int(rng.integers(10, 15))
        shift = rng.uniform(-0.5, 0.5)
        w0, w1 = rng.uniform(0.6, 1.4, 2)
        cases.append(
            (Oscillator(omega_ref=1.0, shift=shift, n_basis=n_basis), Protocol.linear(w0, w1, 1.0))
        )
    for _ in range(30):
        length = int(rng.integers(4, 9))
        alpha = rng.uniform(-1.0, 1.0)
        pot = tuple(rng.uniform(-0.3, 0.3, length))
        cases.append(
            (
                HatanoNelson(length=length, hopping=1.0, asymmetry=alpha, potential=pot, boundary="open"),
                Protocol.linear(0.0, 0.0, 1.0),
            )
        )

    worst_idem = worst_complete = worst_biortho = worst_rows = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        for model, proto in cases:
            H = model.hamiltonian(proto.value(proto.t_start))
            sysm = eigendecompose(H)
            dim = H.shape[0]
            total = np.zeros_like(H)
            for n in range(dim):
                P = projector(n, sysm)
                worst_idem = max(worst_idem, float(np.linalg.norm(P @ P - P)))
                total += P
            worst_complete = max(worst_complete, float(np.linalg.norm(total - np.eye(dim))))
            worst_biortho = max(worst_biortho, sysm.biortho_residual)
            res = two_time_work(model, proto, 1.0)
            worst_rows = max(worst_rows, res.row_sum_defect)

    ok = (
        len(cases) >= 100
        and worst_idem < 1e-12
        and worst_complete < 1e-12
        and worst_biortho < 1e-10
        and worst_rows < 1e-8
    )
    _verdict(
        10,
        ok,
        f"{len(cases)} draws: idempotence {worst_idem:.1e} (< 1e-12), "
        f"completeness {worst_complete:.1e} (< 1e-12), biorthonormality {worst_biortho:.1e} "
        f"(< 1e-10), row sums {worst_rows:.1e} (< 1e-8)",
    )
