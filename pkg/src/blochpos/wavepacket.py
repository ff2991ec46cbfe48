"""Bloch wave packets: per-band amplitudes, momentum and position pictures.

A packet is a superposition of Bloch waves from one or more bands,

    Psi(x, t) = sum_j integral dz phi_j(z) f^(j)(x; z) exp(-i eps_j(z) t),

with the amplitudes phi_j(z) compactly supported strictly inside the open
zone. Its momentum wave function lives on the unfolded k axis: the
component at k comes from zone coordinate z = k - n with n the nearest
integer, and equals sqrt(2 pi) phi_j(z) f_n^(j)(z) exp(-i eps_j(z) t)
summed over bands. All quantities here are dimensionless (k in units of q,
x in units of 1/q, energies scaled by (hbar q)^2 / (2 mu)).

Amplitudes are stored as samples on the band table's own z grid, so the
quadratures are plain Simpson sums with the grid's weights; off-grid
evaluation interpolates with cubic splines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import czt

from .bands import BandTable, BrillouinGrid
from .errors import (
    ConfigError,
    FoldingSeamError,
    InvalidArgumentError,
    SupportViolationError,
)
from .quadrature import simpson_weights

SQRT_TWO_PI = math.sqrt(2.0 * math.pi)

# plane-wave columns whose worst-case contribution is below this are skipped
# in grid synthesis; the skipped tail is orders below every stated tolerance
_NEGLIGIBLE = 1e-18


@dataclass(frozen=True)
class QuasiMomentumAmplitude:
    """Per-band amplitude samples phi_j(z) on a zone grid.

    Invariants: samples vanish at the first and last grid point (support
    stays delta_z clear of the zone boundary) and the total norm
    sum_j integral |phi_j|^2 dz is 1 after normalization.
    """

    grid: BrillouinGrid
    samples: dict = field(default_factory=dict)  # j -> complex ndarray (count,)

    def __post_init__(self):
        if not self.samples:
            raise InvalidArgumentError("amplitude needs at least one band")
        clean = {}
        for j, arr in self.samples.items():
            if j != int(j) or j < 0:
                raise InvalidArgumentError(f"band index must be a nonnegative integer, got {j!r}")
            arr = np.asarray(arr, dtype=complex)
            if arr.shape != (self.grid.count,):
                raise InvalidArgumentError(
                    f"band {j} samples have shape {arr.shape}, expected ({self.grid.count},)"
                )
            if arr[0] != 0 or arr[-1] != 0:
                raise SupportViolationError(
                    f"band {j} amplitude does not vanish at the zone-boundary margin"
                )
            if not np.all(np.isfinite(arr.view(float))):
                raise InvalidArgumentError(f"band {j} amplitude has non-finite samples")
            arr.setflags(write=False)
            clean[int(j)] = arr
        object.__setattr__(self, "samples", clean)

    @property
    def bands(self) -> list:
        return sorted(self.samples)

    @property
    def is_single_band(self) -> bool:
        return len(self.samples) == 1

    def norm_squared(self) -> float:
        w = simpson_weights(self.grid.count, self.grid.spacing)
        return float(sum(np.sum(w * np.abs(arr) ** 2) for arr in self.samples.values()))

    def normalized(self) -> "QuasiMomentumAmplitude":
        total = self.norm_squared()
        if total <= 0.0:
            raise InvalidArgumentError("cannot normalize a zero amplitude")
        s = 1.0 / math.sqrt(total)
        return QuasiMomentumAmplitude(
            grid=self.grid, samples={j: arr * s for j, arr in self.samples.items()}
        )

    def support(self, j: int):
        """(z_lo, z_hi) bounds of the nonzero samples of band j."""
        arr = self.samples[j]
        nz = np.nonzero(np.abs(arr))[0]
        if len(nz) == 0:
            return None
        return float(self.grid.z_values[nz[0]]), float(self.grid.z_values[nz[-1]])


def make_bump(grid: BrillouinGrid, j: int, z0: float, w: float) -> QuasiMomentumAmplitude:
    """Normalized C-infinity bump exp(-1/(1-u^2)), u = (z-z0)/w, in band j.

    The closed support [z0-w, z0+w] must sit strictly inside the grid's
    open span (-1/2+delta_z, 1/2-delta_z).
    """
    if not (w > 0):
        raise InvalidArgumentError(f"bump halfwidth must be positive, got {w!r}")
    lo, hi = z0 - w, z0 + w
    if lo <= -0.5 + grid.delta_z or hi >= 0.5 - grid.delta_z:
        raise SupportViolationError(
            f"bump support [{lo!r}, {hi!r}] touches the zone-boundary margin"
        )
    u = (grid.z_values - z0) / w
    vals = np.zeros(grid.count, dtype=complex)
    inside = np.abs(u) < 1.0
    vals[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return QuasiMomentumAmplitude(grid=grid, samples={int(j): vals}).normalized()


def amplitude_from_config(grid: BrillouinGrid, block: dict) -> QuasiMomentumAmplitude:
    """Amplitude from a config block: bump entries are superposed per band
    with complex weights weight*exp(i phase), then the whole packet is
    normalized.
    """
    if not isinstance(block, dict):
        raise ConfigError("amplitude block must be a table")
    extra = set(block) - {"bands"}
    if extra:
        raise ConfigError(f"unknown key in amplitude block: {sorted(extra)[0]!r}")
    entries = block.get("bands")
    if not entries:
        raise ConfigError("amplitude block needs a nonempty 'bands' list")
    acc: dict = {}
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError(f"amplitude.bands[{i}] must be a table")
        extra = set(entry) - {"j", "kind", "z0", "w", "weight", "phase"}
        if extra:
            raise ConfigError(f"unknown key in amplitude.bands[{i}]: {sorted(extra)[0]!r}")
        kind = entry.get("kind", "bump")
        if kind != "bump":
            raise ConfigError(f"amplitude.bands[{i}].kind must be 'bump', got {kind!r}")
        try:
            j = int(entry["j"])
            z0 = float(entry["z0"])
            w = float(entry["w"])
            weight = float(entry.get("weight", 1.0))
            phase = float(entry.get("phase", 0.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad amplitude.bands[{i}]: {exc}") from exc
        part = make_bump(grid, j, z0, w)
        c = weight * complex(math.cos(phase), math.sin(phase))
        acc[j] = acc.get(j, 0.0) + c * part.samples[j]
    return QuasiMomentumAmplitude(grid=grid, samples=acc).normalized()


def amplitude_from_csv(grid: BrillouinGrid, path: str) -> QuasiMomentumAmplitude:
    """Tabulated amplitude from CSV rows (z, j, re, im).

    Each z must coincide with a grid point (within 1e-9); bands are zero
    where no row is given. The packet is normalized after loading. Phases
    are interpreted in the same eigenvector gauge the band table files use.
    """
    acc: dict = {}
    with open(path, "r") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#") or line.lower().startswith("z,"):
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ConfigError(f"{path}:{ln}: expected 4 columns (z, j, re, im)")
            try:
                z, j, re, im = float(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])
            except ValueError as exc:
                raise ConfigError(f"{path}:{ln}: {exc}") from exc
            idx = grid.index_of(z, tol=1e-9)
            if idx is None:
                raise ConfigError(f"{path}:{ln}: z={z!r} is not a grid point")
            if j not in acc:
                acc[j] = np.zeros(grid.count, dtype=complex)
            acc[j][idx] = complex(re, im)
    if not acc:
        raise ConfigError(f"{path}: no amplitude rows found")
    return QuasiMomentumAmplitude(grid=grid, samples=acc).normalized()


def fold_momentum(k: float, delta_z: float):
    """Split k into (n, z) with n = [k] rounded half away from zero.

    Inputs within delta_z of a folding seam (half-integer k) are rejected;
    amplitudes vanish there anyway, so the seam is measure zero.
    """
    n = int(math.floor(abs(k) + 0.5)) * (1 if k >= 0 else -1)
    z = k - n
    if abs(z) >= 0.5 - delta_z:
        raise FoldingSeamError(f"momentum k={k!r} within delta_z of a folding seam")
    return n, z


def _band_splines(bt: BandTable, amp: QuasiMomentumAmplitude, j: int, n: int):
    zs = bt.grid.z_values
    return (
        CubicSpline(zs, amp.samples[j]),
        CubicSpline(zs, bt.coefficient_column(j, n)),
        CubicSpline(zs, bt.energies[j]),
    )


def momentum_wavefunction(bt: BandTable, amp: QuasiMomentumAmplitude, k, t: float = 0.0):
    """Momentum wave function phi(k, t) of the packet (scalar or array k)."""
    if amp.grid.count != bt.grid.count or amp.grid.delta_z != bt.grid.delta_z:
        raise InvalidArgumentError("amplitude grid does not match the band table grid")
    ks = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.zeros(ks.shape, dtype=complex)
    folded = [fold_momentum(float(kk), bt.grid.delta_z) for kk in ks]
    for j in amp.bands:
        bt.require_band(j)
        spline_cache = {}
        for i, (n, z) in enumerate(folded):
            if abs(n) > bt.M:
                continue  # no stored plane-wave weight that far out
            if n not in spline_cache:
                spline_cache[n] = _band_splines(bt, amp, j, n)
            phi_s, f_s, eps_s = spline_cache[n]
            idx = bt.grid.index_of(z)
            if idx is not None:
                phi_v = amp.samples[j][idx]
                f_v = bt.coefficients[j, idx, n + bt.M]
                eps_v = bt.energies[j, idx]
            else:
                phi_v, f_v, eps_v = phi_s(z), f_s(z), float(eps_s(z))
            out[i] += SQRT_TWO_PI * phi_v * f_v * np.exp(-1j * eps_v * t)
    if np.isscalar(k) or np.asarray(k).ndim == 0:
        return complex(out[0])
    return out


@dataclass(frozen=True)
class MomentumDistribution:
    """Sampled |phi(k, t)|^2 with band-folding metadata per sample."""

    k_values: np.ndarray
    density: np.ndarray
    time: float
    folding_index: np.ndarray
    integral: float


def momentum_distribution(
    bt: BandTable, amp: QuasiMomentumAmplitude, t: float = 0.0
) -> MomentumDistribution:
    """Density on the unfolded k axis, one zone-grid segment per relevant n.

    Segments where every stored coefficient is negligible are skipped; the
    total integral (Simpson per segment) reports Parseval against the unit
    amplitude norm.
    """
    if amp.grid.count != bt.grid.count or amp.grid.delta_z != bt.grid.delta_z:
        raise InvalidArgumentError("amplitude grid does not match the band table grid")
    for j in amp.bands:
        bt.require_band(j)
    w = simpson_weights(bt.grid.count, bt.grid.spacing)
    zs = bt.grid.z_values
    k_parts, d_parts, n_parts = [], [], []
    total = 0.0
    for n in range(-bt.M, bt.M + 1):
        peak = max(
            float(np.max(np.abs(bt.coefficient_column(j, n)) * np.abs(amp.samples[j])))
            for j in amp.bands
        )
        if peak < _NEGLIGIBLE:
            continue
        comp = np.zeros(bt.grid.count, dtype=complex)
        for j in amp.bands:
            comp += (
                SQRT_TWO_PI
                * amp.samples[j]
                * bt.coefficient_column(j, n)
                * np.exp(-1j * bt.energies[j] * t)
            )
        dens = np.abs(comp) ** 2
        total += float(np.sum(w * dens))
        k_parts.append(n + zs)
        d_parts.append(dens)
        n_parts.append(np.full(bt.grid.count, n))
    if total > 1.0 + 1e-8:
        raise InvalidArgumentError(f"momentum density integrates to {total!r} > 1")
    return MomentumDistribution(
        k_values=np.concatenate(k_parts),
        density=np.concatenate(d_parts),
        time=float(t),
        folding_index=np.concatenate(n_parts),
        integral=total,
    )


def position_wavefunction(bt: BandTable, amp: QuasiMomentumAmplitude, x, t: float = 0.0):
    """Psi(x, t) by direct quadrature over the zone for each band.

    For each band the integrand is phi_j(z) exp(i z x - i eps_j(z) t) times
    the plane-wave synthesis sum_n f_n^(j)(z) exp(i n x).
    """
    if amp.grid.count != bt.grid.count or amp.grid.delta_z != bt.grid.delta_z:
        raise InvalidArgumentError("amplitude grid does not match the band table grid")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    w = simpson_weights(bt.grid.count, bt.grid.spacing)
    zs = bt.grid.z_values
    n_idx = np.arange(-bt.M, bt.M + 1)
    out = np.zeros(xs.shape, dtype=complex)
    for j in amp.bands:
        bt.require_band(j)
        base = w * amp.samples[j] * np.exp(-1j * bt.energies[j] * t)
        for i, xv in enumerate(xs):
            synth = bt.coefficients[j] @ np.exp(1j * n_idx * xv)
            out[i] += np.sum(base * np.exp(1j * zs * xv) * synth)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return complex(out[0])
    return out


def position_wavefunction_grid(
    bt: BandTable,
    amp: QuasiMomentumAmplitude,
    t: float,
    x0: float,
    dx: float,
    count: int,
) -> np.ndarray:
    """Psi on the uniform grid x_p = x0 + p*dx, p = 0..count-1.

    Identical (to rounding) to calling position_wavefunction pointwise but
    evaluated with chirp-Z transforms: for each band and plane-wave index,
    sum_r g_r exp(i z_r x_p) factors into a CZT over the uniform z grid
    times the per-point phases exp(i z_0 p dx) and exp(i n x_p).
    """
    if amp.grid.count != bt.grid.count or amp.grid.delta_z != bt.grid.delta_z:
        raise InvalidArgumentError("amplitude grid does not match the band table grid")
    zs = bt.grid.z_values
    w = simpson_weights(bt.grid.count, bt.grid.spacing)
    p_idx = np.arange(count)
    xs = x0 + dx * p_idx
    chirp = np.exp(1j * bt.grid.spacing * dx)
    out = np.zeros(count, dtype=complex)
    for j in amp.bands:
        bt.require_band(j)
        base = w * amp.samples[j] * np.exp(-1j * bt.energies[j] * t) * np.exp(1j * zs * x0)
        for n in range(-bt.M, bt.M + 1):
            col = bt.coefficient_column(j, n)
            g = base * col
            if float(np.max(np.abs(g))) < _NEGLIGIBLE:
                continue
            out += czt(g, m=count, w=chirp, a=1.0 + 0j) * np.exp(1j * n * xs)
    out *= np.exp(1j * float(zs[0]) * dx * p_idx)
    return out
