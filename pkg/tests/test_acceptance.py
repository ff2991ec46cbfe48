"""End-to-end acceptance gate.

Each test covers one numbered claim about the finished tool, computes the
quantities at the stated tolerance, and prints a single PASS/FAIL line
(run with -s to see them on success). Tolerances are fixed here and are
not to be loosened to make a run pass.
"""

import json
import math
import time

import numpy as np
import pytest

from blochpos.bands import BrillouinGrid, check_convergence, compute_bands
from blochpos.central_eq import build, eigen_lowest
from blochpos.cli import main
from blochpos.positivity import (
    asympt_strong,
    cosine_sup_report,
    lambda_single,
    p_plus_multiband,
    p_plus_single,
    sup_p_plus_cosine,
)
from blochpos.oracle import OracleConfig, direct_p_plus
from blochpos.potential import cosine_for_strength, free_potential
from blochpos.wavepacket import (
    amplitude_from_config,
    make_bump,
    momentum_distribution,
    position_wavefunction_grid,
)

TWO_PI = 2 * math.pi

SWEEP_ALPHAS = (0.01, 0.1, 1.0, 10.0)


def _report(tag: str, ok: bool, detail: str):
    print(f"acceptance [{tag}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"[{tag}] {detail}"


def _two_band_amp(grid):
    return amplitude_from_config(
        grid,
        {
            "bands": [
                {"j": 0, "kind": "bump", "z0": 0.1, "w": 0.08},
                {"j": 1, "kind": "bump", "z0": 0.1, "w": 0.08, "weight": 0.9},
            ]
        },
    )


def test_01_lambda_curves(tmp_path):
    """Zone-resolved Lambda sweep: bounded, peaked at 0+, correct jump."""
    cfg_path = tmp_path / "lambda.toml"
    cfg_path.write_text("[sweep]\nalphas = [0.01, 0.1, 1.0, 10.0]\n")
    out = tmp_path / "art"
    started = time.perf_counter()
    code = main(["lambda", "--config", str(cfg_path), "--out", str(out)])
    elapsed = time.perf_counter() - started
    lines = (out / "lambda.csv").read_text().splitlines()
    meta = json.loads(lines[0])
    rows = [ln.split(",") for ln in lines[2:]]

    below_one = True
    for r in rows:
        below_one = below_one and (0.0 <= float(r[2]) < 1.0)
    flags = meta["sup_at_first_positive_z"]
    peaked = all(flags[repr(a)] for a in SWEEP_ALPHAS)

    max_jump_dev = 0.0
    tiny = BrillouinGrid(count=3)
    for alpha in SWEEP_ALPHAS:
        bt = compute_bands(cosine_for_strength(alpha), tiny, 0, 100)
        jump = lambda_single(bt, 0, 1e-8) - lambda_single(bt, 0, -1e-8)
        ref = TWO_PI * float(np.abs(bt.coefficients[0, tiny.zero_index, bt.M]) ** 2)
        max_jump_dev = max(max_jump_dev, abs(jump - ref))

    ok = (
        code == 0
        and len(rows) == 4 * 2001
        and below_one
        and peaked
        and max_jump_dev <= 1e-6
        and elapsed < 60.0
    )
    _report(
        "01 lambda curves",
        ok,
        f"4x2001 rows, Lambda<1 {below_one}, peak-at-0+ {peaked}, "
        f"jump dev {max_jump_dev:.2e} (tol 1e-6), runtime {elapsed:.1f}s (<60s)",
    )


def test_02_supremum_sweep(tmp_path):
    """Coupling sweep of sup P_+: monotone, with both asymptotic regimes."""
    cfg_path = tmp_path / "supp.toml"
    cfg_path.write_text("[sweep.log_range]\nstart = 0.01\nstop = 10.0\npoints = 50\n")
    out = tmp_path / "art"
    started = time.perf_counter()
    code = main(["supp-sweep", "--config", str(cfg_path), "--out", str(out)])
    lines = (out / "supp.csv").read_text().splitlines()
    rows = [ln.split(",") for ln in lines[2:]]
    sup = [float(r[1]) for r in rows]
    monotone = all(a > b for a, b in zip(sup, sup[1:]))

    weak_dev = abs(sup_p_plus_cosine(0.05) - (1.0 - 0.05**2))
    strong_dev = abs(sup[-1] - asympt_strong(10.0))
    gaps = [sup_p_plus_cosine(a, M=150) - asympt_strong(a) for a in (10.0, 100.0, 1000.0)]
    gaps_shrink = gaps[0] > gaps[1] > gaps[2] > 0.0
    elapsed = time.perf_counter() - started

    ok = (
        code == 0
        and len(sup) == 50
        and monotone
        and weak_dev <= 5e-5
        and strong_dev <= 0.01
        and gaps_shrink
        and elapsed < 120.0
    )
    _report(
        "02 supremum sweep",
        ok,
        f"monotone {monotone}, weak dev {weak_dev:.2e} (tol 5e-5), "
        f"strong dev {strong_dev:.2e} (tol 0.01), gaps {gaps[0]:.2e}>{gaps[1]:.2e}>{gaps[2]:.2e}, "
        f"runtime {elapsed:.1f}s (<120s)",
    )


def test_03_eigensolver_correctness():
    """Residuals and orthogonality on random samples; exact free spectrum."""
    rng = np.random.default_rng(20240817)
    M = 80
    worst_res = 0.0
    worst_orth = 0.0
    for _ in range(1000):
        alpha = float(10.0 ** rng.uniform(math.log10(0.05), math.log10(50.0)))
        z = float(rng.uniform(-0.499, 0.499))
        j = int(rng.integers(0, 4))
        m = build(cosine_for_strength(alpha), z, M)
        pairs = eigen_lowest(m, j + 1)
        scale = 1e-10 * (np.max(np.abs(pairs.eigenvalues)) + m.inf_norm)
        for b in range(j + 1):
            f = pairs.coefficients[b]
            r = m.matvec(f) - pairs.eigenvalues[b] * f
            res = float(np.linalg.norm(r) / np.linalg.norm(f))
            worst_res = max(worst_res, res / scale)
        gram = TWO_PI * (pairs.coefficients @ pairs.coefficients.conj().T)
        off = gram - np.diag(np.diag(gram))
        worst_orth = max(worst_orth, float(np.max(np.abs(off))))

    worst_free = 0.0
    p_free = free_potential()
    for _ in range(200):
        z = float(rng.uniform(0.01, 0.49)) * (1 if rng.uniform() < 0.5 else -1)
        pairs = eigen_lowest(build(p_free, z, 40), 3)
        exact = np.sort((z + np.arange(-40, 41)) ** 2)[:3]
        worst_free = max(worst_free, float(np.max(np.abs(pairs.eigenvalues - exact))))

    ok = worst_res <= 1.0 and worst_orth <= 1e-10 and worst_free <= 1e-13
    _report(
        "03 eigensolver",
        ok,
        f"1000 samples: residual/budget {worst_res:.3f} (<=1), "
        f"orthogonality {worst_orth:.2e} (tol 1e-10), free spectrum dev {worst_free:.2e} (tol 1e-13)",
    )


def test_04_normalization_suite(cosine1_table, cosine01_table):
    """Coefficient, momentum-space and position-space norms."""
    dev = 0.0
    for bt in (cosine1_table, cosine01_table):
        norms = np.sum(np.abs(bt.coefficients) ** 2, axis=2)
        dev = max(dev, float(np.max(np.abs(norms - 1.0 / TWO_PI))))

    amp2 = _two_band_amp(cosine1_table.grid)
    mom_dev = abs(momentum_distribution(cosine1_table, amp2, t=0.8).integral - 1.0)

    amp1 = make_bump(cosine1_table.grid, 0, 0.1, 0.1)
    X, S = 512.0, 2**16
    dx = 2.0 * X / S
    psi = position_wavefunction_grid(cosine1_table, amp1, 0.0, -X, dx, S)
    pos_dev = abs(dx * float(np.sum(np.abs(psi) ** 2)) - 1.0)

    ok = dev <= 1e-12 and mom_dev <= 1e-6 and pos_dev <= 1e-4
    _report(
        "04 normalization",
        ok,
        f"coefficient rows {dev:.2e} (tol 1e-12), momentum total {mom_dev:.2e} (tol 1e-6), "
        f"position window {pos_dev:.2e} (tol 1e-4)",
    )


def test_05_single_band_time_invariance(cosine01_table):
    """P_+ of a one-band packet does not move under the multiband path."""
    amp = make_bump(cosine01_table.grid, 0, 0.05, 0.03)
    rng = np.random.default_rng(5)
    times = rng.uniform(0.0, 50.0, size=10)
    report = p_plus_multiband(cosine01_table, amp, times)
    spread = float(np.std(report.p_plus))
    ok = spread <= 1e-12
    _report("05 time invariance", ok, f"std over 10 random times {spread:.2e} (tol 1e-12)")


def test_06_interference_averaging(cosine1_table):
    """Two-band oscillation averages to zero and dips negative."""
    bt = cosine1_table
    amp = _two_band_amp(bt.grid)
    idx = bt.grid.zero_index + 200
    beat = TWO_PI / abs(bt.energies[1, idx] - bt.energies[0, idx])
    times = np.linspace(0.0, 120.0 * beat, 4001)
    report = p_plus_multiband(bt, amp, times)
    mean_abs = abs(float(np.mean(report.p_tilde)))
    dips = float(np.min(report.p_tilde))
    ok = mean_abs <= 1e-3 and dips <= 0.0
    _report(
        "06 interference averaging",
        ok,
        f"|mean| over 120 beats {mean_abs:.2e} (tol 1e-3), min {dips:.2e} (<=0)",
    )


def test_07_oracle_equivalence(cosine1_table, cosine01_table):
    """Spectral and real-space routes agree for one- and two-band packets."""
    worst_single = 0.0
    for bt, z0 in ((cosine01_table, 0.15), (cosine1_table, 0.1)):
        amp = make_bump(bt.grid, 0, z0, 0.1)
        rep = direct_p_plus(bt, amp, OracleConfig())
        worst_single = max(worst_single, abs(rep.p_direct - p_plus_single(bt, amp)))

    amp2 = _two_band_amp(cosine1_table.grid)
    times = [0.0, 1.3, 2.6, 3.9, 5.2]
    spectral = p_plus_multiband(cosine1_table, amp2, times).p_plus
    worst_two = 0.0
    for t, ref in zip(times, spectral):
        rep = direct_p_plus(cosine1_table, amp2, OracleConfig(t=float(t)))
        worst_two = max(worst_two, abs(rep.p_direct - float(ref)))

    ok = worst_single <= 1e-4 and worst_two <= 1e-4
    _report(
        "07 oracle equivalence",
        ok,
        f"single-band dev {worst_single:.2e}, two-band dev over 5 times {worst_two:.2e} (tol 1e-4)",
    )


def test_08_perturbative_regime():
    """Weak coupling: zone-center coefficient and energy follow the
    second-order closed forms."""
    worst_f = 0.0
    worst_e = 0.0
    for alpha in (0.02, 0.05):
        rep = cosine_sup_report(alpha, M=60)
        ref = (1.0 - alpha * alpha) / math.sqrt(TWO_PI)
        worst_f = max(worst_f, abs(rep.f00 - ref) / ref / (10.0 * alpha**4))
        pairs = eigen_lowest(build(cosine_for_strength(alpha), 0.0, 60), 1)
        e0 = float(pairs.eigenvalues[0])
        worst_e = max(worst_e, abs(e0 - (-2.0 * alpha * alpha)) / (2.0 * alpha * alpha))
    ok = worst_f <= 1.0 and worst_e <= 0.05
    _report(
        "08 perturbative regime",
        ok,
        f"f00 dev/(10 a^4) {worst_f:.3f} (<=1), energy rel dev {worst_e:.2e} (tol 0.05)",
    )


def test_09_deep_well_regime():
    """Very strong coupling: zone-center coefficient matches the
    harmonic-well closed form."""
    alpha, M = 1e4, 450
    rep = cosine_sup_report(alpha, M=M)
    ref = alpha**-0.125 / (math.sqrt(2.0) * math.pi**0.75)
    rel = abs(rep.f00 - ref) / ref
    ok = rel <= 0.05
    _report("09 deep well", ok, f"alpha=1e4 M={M}: f00 rel dev {rel:.3f} (tol 0.05)")


def test_10_truncation_convergence():
    """Doubling the plane-wave span changes nothing beyond rounding."""
    grid = BrillouinGrid()
    worst = 0.0
    all_passed = True
    for alpha in SWEEP_ALPHAS:
        rep = check_convergence(cosine_for_strength(alpha), grid, 1, 100, threshold=1e-10)
        all_passed = all_passed and rep.passed
        worst = max(worst, rep.max_energy_deviation, rep.max_lambda_deviation)
    ok = all_passed and worst <= 1e-10
    _report(
        "10 truncation convergence",
        ok,
        f"M 100 -> 200 over alpha {SWEEP_ALPHAS}: max deviation {worst:.2e} (tol 1e-10)",
    )
