"""Wave packets: amplitudes, folding, momentum and position pictures."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from blochpos.bands import BrillouinGrid, compute_bands
from blochpos.errors import (
    ConfigError,
    FoldingSeamError,
    InvalidArgumentError,
    SupportViolationError,
)
from blochpos.potential import free_potential
from blochpos.wavepacket import (
    QuasiMomentumAmplitude,
    amplitude_from_config,
    amplitude_from_csv,
    fold_momentum,
    make_bump,
    momentum_distribution,
    momentum_wavefunction,
    position_wavefunction,
    position_wavefunction_grid,
)

TWO_PI = 2 * math.pi


def test_bump_is_normalized(default_grid):
    amp = make_bump(default_grid, 0, 0.1, 0.1)
    assert abs(amp.norm_squared() - 1.0) <= 1e-10
    assert amp.bands == [0]
    assert amp.is_single_band


def test_bump_support_is_contained(default_grid):
    amp = make_bump(default_grid, 0, 0.1, 0.1)
    lo, hi = amp.support(0)
    assert lo >= 0.0 and hi <= 0.2
    with pytest.raises(SupportViolationError):
        make_bump(default_grid, 0, 0.49, 0.05)
    with pytest.raises(SupportViolationError):
        make_bump(default_grid, 0, -0.46, 0.05)
    with pytest.raises(InvalidArgumentError):
        make_bump(default_grid, 0, 0.0, -0.1)


def test_bump_vanishes_smoothly_at_edges(default_grid):
    amp = make_bump(default_grid, 0, 0.0, 0.2)
    vals = np.abs(amp.samples[0])
    u = default_grid.z_values / 0.2
    outside = np.abs(u) >= 1.0
    assert np.all(vals[outside] == 0.0)
    inside = np.nonzero(~outside)[0]
    for i in list(inside[:8]) + list(inside[-8:]):
        s = 1.0 - u[i] ** 2
        assert vals[i] <= np.max(vals) * s**6


def test_amplitude_endpoint_support_enforced(default_grid):
    arr = np.zeros(default_grid.count, dtype=complex)
    arr[0] = 1e-3
    with pytest.raises(SupportViolationError):
        QuasiMomentumAmplitude(grid=default_grid, samples={0: arr})


def test_fold_momentum_values():
    assert fold_momentum(0.3, 1e-6) == (0, pytest.approx(0.3, abs=0))
    n, z = fold_momentum(0.7, 1e-6)
    assert n == 1 and abs(z - (-0.3)) < 1e-15
    n, z = fold_momentum(-1.2, 1e-6)
    assert n == -1 and abs(z - (-0.2)) < 1e-15
    n, z = fold_momentum(2.49, 1e-6)
    assert n == 2 and abs(z - 0.49) < 1e-15


def test_fold_momentum_seam_rejected():
    with pytest.raises(FoldingSeamError):
        fold_momentum(0.5, 1e-6)
    with pytest.raises(FoldingSeamError):
        fold_momentum(1.4999995, 1e-6)
    with pytest.raises(FoldingSeamError):
        fold_momentum(-0.5000002, 1e-6)


def test_free_particle_momentum_evolution(free_table):
    grid = free_table.grid
    amp = make_bump(grid, 0, 0.0, 0.3)
    z_star = float(grid.z_values[grid.zero_index + 20])
    base = momentum_wavefunction(free_table, amp, z_star, t=0.0)
    for t in (0.7, 4.2, 33.0):
        evolved = momentum_wavefunction(free_table, amp, z_star, t=t)
        expected = base * np.exp(-1j * z_star**2 * t)
        assert abs(evolved - expected) < 1e-12 * abs(base)


def test_single_band_momentum_modulus_static(cosine01_table):
    amp = make_bump(cosine01_table.grid, 0, 0.05, 0.03)
    ks = np.linspace(0.021, 0.079, 7)
    ref = np.abs(momentum_wavefunction(cosine01_table, amp, ks, t=0.0))
    for t in (1.3, 8.0, 120.0):
        cur = np.abs(momentum_wavefunction(cosine01_table, amp, ks, t=t))
        assert np.max(np.abs(cur - ref)) <= 1e-12


def test_momentum_time_argument_types(cosine01_table):
    amp = make_bump(cosine01_table.grid, 0, 0.05, 0.03)
    ks = np.array([0.04, 0.05, 1.05])
    a = momentum_wavefunction(cosine01_table, amp, ks, t=0)
    b = momentum_wavefunction(cosine01_table, amp, ks, t=0.0)
    assert np.array_equal(a, b)


def test_momentum_beyond_truncation_is_zero(free_table):
    amp = make_bump(free_table.grid, 0, 0.0, 0.3)
    assert momentum_wavefunction(free_table, amp, 31.2) == 0j


def test_grid_mismatch_rejected(cosine1_table):
    other = BrillouinGrid(count=201, delta_z=0.01)
    amp = make_bump(other, 0, 0.0, 0.2)
    with pytest.raises(InvalidArgumentError):
        momentum_wavefunction(cosine1_table, amp, 0.1)
    with pytest.raises(InvalidArgumentError):
        momentum_distribution(cosine1_table, amp)
    with pytest.raises(InvalidArgumentError):
        position_wavefunction(cosine1_table, amp, 0.0)


def test_momentum_distribution_parseval(cosine1_table):
    block = {
        "bands": [
            {"j": 0, "kind": "bump", "z0": 0.1, "w": 0.08},
            {"j": 1, "kind": "bump", "z0": 0.1, "w": 0.08, "weight": 0.7, "phase": 1.1},
        ]
    }
    amp = amplitude_from_config(cosine1_table.grid, block)
    dist = momentum_distribution(cosine1_table, amp, t=0.6)
    assert abs(dist.integral - 1.0) <= 1e-6
    assert np.all(dist.density >= 0.0)
    assert dist.time == 0.6


def test_momentum_distribution_free_segments(free_fine):
    amp = make_bump(free_fine.grid, 0, 0.1, 0.1)
    dist = momentum_distribution(free_fine, amp)
    assert set(np.unique(dist.folding_index)) == {0}
    assert abs(dist.integral - 1.0) <= 1e-10
    assert np.max(np.abs(dist.k_values)) < 0.5


def test_position_norm_on_window(free_fine):
    amp = make_bump(free_fine.grid, 0, 0.1, 0.05)
    dx = 0.25
    count = 4096
    psi = position_wavefunction_grid(free_fine, amp, 0.0, -512.0, dx, count)
    norm = dx * float(np.sum(np.abs(psi) ** 2))
    assert abs(norm - 1.0) <= 1e-4


def test_free_packet_against_adaptive_quadrature(free_fine):
    z0, w = 0.1, 0.1
    amp = make_bump(free_fine.grid, 0, z0, w)
    grid = free_fine.grid
    i_ref = int(np.argmax(np.abs(amp.samples[0])))
    u_ref = (float(grid.z_values[i_ref]) - z0) / w
    c = float(amp.samples[0][i_ref].real) / math.exp(-1.0 / (1.0 - u_ref**2))

    def profile(z):
        u = (z - z0) / w
        if abs(u) >= 1.0:
            return 0.0
        return c * math.exp(-1.0 / (1.0 - u * u))

    for x, t in ((0.0, 0.0), (3.7, 0.0), (10.0, 2.5), (-25.0, 7.3)):
        re = quad(
            lambda z: profile(z) * math.cos(z * x - z * z * t) / math.sqrt(TWO_PI),
            z0 - w, z0 + w, limit=200, epsabs=1e-13, epsrel=1e-12,
        )[0]
        im = quad(
            lambda z: profile(z) * math.sin(z * x - z * z * t) / math.sqrt(TWO_PI),
            z0 - w, z0 + w, limit=200, epsabs=1e-13, epsrel=1e-12,
        )[0]
        got = position_wavefunction(free_fine, amp, x, t=t)
        assert abs(got - complex(re, im)) <= 1e-8


def test_grid_synthesis_matches_pointwise(cosine1_table):
    block = {
        "bands": [
            {"j": 0, "kind": "bump", "z0": 0.1, "w": 0.08},
            {"j": 1, "kind": "bump", "z0": 0.1, "w": 0.08, "weight": 0.5},
        ]
    }
    amp = amplitude_from_config(cosine1_table.grid, block)
    x0, dx, count, t = -3.0, 0.37, 64, 1.7
    fast = position_wavefunction_grid(cosine1_table, amp, t, x0, dx, count)
    xs = x0 + dx * np.arange(count)
    direct = position_wavefunction(cosine1_table, amp, xs, t=t)
    scale = float(np.max(np.abs(direct)))
    assert np.max(np.abs(fast - direct)) <= 1e-8 * scale


def test_two_band_interference_formula(cosine1_table):
    bt = cosine1_table
    block = {
        "bands": [
            {"j": 0, "kind": "bump", "z0": 0.1, "w": 0.08},
            {"j": 1, "kind": "bump", "z0": 0.1, "w": 0.08, "weight": 0.8, "phase": 0.4},
        ]
    }
    amp = amplitude_from_config(bt.grid, block)
    idx = bt.grid.zero_index + 200
    k_star = float(bt.grid.z_values[idx])
    a = math.sqrt(TWO_PI) * amp.samples[0][idx] * bt.coefficients[0, idx, bt.M]
    b = math.sqrt(TWO_PI) * amp.samples[1][idx] * bt.coefficients[1, idx, bt.M]
    de = bt.energies[0, idx] - bt.energies[1, idx]
    for t in np.linspace(0.0, 12.0, 30):
        got = abs(momentum_wavefunction(bt, amp, k_star, t=float(t))) ** 2
        want = (
            abs(a) ** 2
            + abs(b) ** 2
            + 2 * (a * np.conj(b) * np.exp(-1j * de * t)).real
        )
        assert abs(got - want) <= 1e-8


def test_amplitude_config_superposition(default_grid):
    block = {
        "bands": [
            {"j": 0, "z0": -0.1, "w": 0.05},
            {"j": 0, "z0": 0.1, "w": 0.05, "weight": 2.0, "phase": math.pi / 2},
        ]
    }
    amp = amplitude_from_config(default_grid, block)
    assert amp.bands == [0]
    assert abs(amp.norm_squared() - 1.0) <= 1e-10
    i_left = int(np.argmin(np.abs(default_grid.z_values - (-0.1))))
    i_right = int(np.argmin(np.abs(default_grid.z_values - 0.1)))
    left = amp.samples[0][i_left]
    right = amp.samples[0][i_right]
    assert abs(left.imag) < 1e-15 and left.real > 0
    assert abs(right.real) < 1e-15 and right.imag > 0
    assert abs(abs(right) / abs(left) - 2.0) < 1e-10


def test_amplitude_config_rejects_bad_blocks(default_grid):
    with pytest.raises(ConfigError):
        amplitude_from_config(default_grid, {"bands": []})
    with pytest.raises(ConfigError):
        amplitude_from_config(default_grid, {"bands": [{"j": 0, "z0": 0.0, "w": 0.1, "x": 1}]})
    with pytest.raises(ConfigError):
        amplitude_from_config(default_grid, {"bands": [{"j": 0, "kind": "gauss", "z0": 0.0, "w": 0.1}]})
    with pytest.raises(ConfigError):
        amplitude_from_config(default_grid, {"bands": [{"j": 0, "z0": 0.0}]})


def test_amplitude_csv_round_trip(tmp_path, default_grid):
    src = make_bump(default_grid, 1, 0.05, 0.04)
    path = tmp_path / "amp.csv"
    rows = ["z,j,re,im"]
    for i in np.nonzero(np.abs(src.samples[1]))[0]:
        z = float(default_grid.z_values[i])
        v = complex(src.samples[1][i])
        rows.append(f"{z!r},1,{v.real!r},{v.imag!r}")
    path.write_text("\n".join(rows) + "\n")
    amp = amplitude_from_csv(default_grid, str(path))
    assert amp.bands == [1]
    assert abs(amp.norm_squared() - 1.0) <= 1e-12
    assert np.max(np.abs(amp.samples[1] - src.samples[1])) <= 1e-12


def test_amplitude_csv_rejects_off_grid(tmp_path, default_grid):
    path = tmp_path / "bad.csv"
    path.write_text("z,j,re,im\n0.12345,0,1.0,0.0\n")
    with pytest.raises(ConfigError):
        amplitude_from_csv(default_grid, str(path))
