"""Brillouin-zone sweeps: band tables, gauge fixing, convergence, files.

A BandTable holds eps^(j)(z) and the normalized coefficient rows f_n^(j)(z)
for j = 0..J_max over a symmetric z grid. Each eigenvector's overall phase
is arbitrary; cross-band interference needs a deterministic choice, so
every stored vector is rotated by a unit phase making its largest-modulus
component real and strictly positive (ties broken by the smallest index n).

The z grid is uniform, has an odd count so z = 0 is a grid point, and stays
delta_z away from the zone boundary where the Bloch normalization breaks
down. Grids are built from mirrored halves so the symmetry about z = 0 and
the z = 0 point itself are exact in floating point.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .central_eq import build, eigen_lowest
from .errors import BandOverlapError, ConfigError, InvalidArgumentError
from .potential import FourierPotential, potential_from_config

GAUGE_RULE = "largest-modulus coefficient real positive; ties -> smallest n"


@dataclass(frozen=True)
class BrillouinGrid:
    count: int = 2001
    delta_z: float = 1e-6
    z_values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.count % 2 == 0 or self.count < 3:
            raise InvalidArgumentError(f"grid count must be odd and >= 3, got {self.count}")
        if not (0.0 < self.delta_z < 0.25):
            raise InvalidArgumentError(f"delta_z must be in (0, 0.25), got {self.delta_z!r}")
        half = np.linspace(0.0, 0.5 - self.delta_z, (self.count + 1) // 2)
        z = np.concatenate([-half[:0:-1], half])
        z.setflags(write=False)
        object.__setattr__(self, "z_values", z)

    @property
    def spacing(self) -> float:
        return float(self.z_values[1] - self.z_values[0])

    @property
    def zero_index(self) -> int:
        return self.count // 2

    def refined(self) -> "BrillouinGrid":
        """Same span with the point count doubled (midpoints inserted)."""
        return BrillouinGrid(count=2 * self.count - 1, delta_z=self.delta_z)

    def index_of(self, z: float, tol: float = 1e-12):
        """Grid index whose z matches within tol, or None."""
        i = int(np.argmin(np.abs(self.z_values - z)))
        return i if abs(float(self.z_values[i]) - z) <= tol else None


def gauge_fix(coeffs: np.ndarray) -> np.ndarray:
    """Rotate a coefficient vector by a unit phase so its largest-modulus
    entry is real and strictly positive; ties go to the smallest index.

    The pivot's residual imaginary part after rotation is set to exactly
    zero, which makes the operation exactly idempotent.
    """
    v = np.asarray(coeffs)
    if v.ndim != 1 or v.size == 0:
        raise InvalidArgumentError("gauge_fix expects a nonempty 1-d vector")
    mags = np.abs(v)
    pivot = int(np.argmax(mags))  # first occurrence = smallest n in the [-M, M] layout
    if mags[pivot] == 0.0:
        raise InvalidArgumentError("gauge_fix: zero vector has no phase")
    if not np.iscomplexobj(v):
        return -v if v[pivot] < 0 else v.copy()
    phase = v[pivot] / mags[pivot]
    out = v * np.conj(phase)
    out[pivot] = out[pivot].real
    return out


@dataclass(frozen=True)
class BandTable:
    """Gauge-fixed eigendata of the lowest bands over a zone grid.

    energies has shape (J_max+1, count); coefficients has shape
    (J_max+1, count, 2M+1) with the last axis indexed by n + M.
    """

    potential: FourierPotential
    grid: BrillouinGrid
    M: int
    j_max: int
    energies: np.ndarray
    coefficients: np.ndarray
    gauge: str = GAUGE_RULE
    fingerprint: str = ""

    def __post_init__(self):
        nb = self.j_max + 1
        if self.energies.shape != (nb, self.grid.count):
            raise InvalidArgumentError("energies shape inconsistent with grid/j_max")
        if self.coefficients.shape != (nb, self.grid.count, 2 * self.M + 1):
            raise InvalidArgumentError("coefficients shape inconsistent with grid/M")
        norms = np.sum(np.abs(self.coefficients) ** 2, axis=2)
        if np.max(np.abs(norms - 1.0 / (2.0 * math.pi))) > 1e-12:
            raise InvalidArgumentError("coefficient rows not normalized to 1/(2 pi)")
        for j in range(nb - 1):
            sep = float(self.energies[j + 1].min() - self.energies[j].max())
            if sep <= 0.0:
                raise BandOverlapError(
                    f"bands {j} and {j + 1} overlap: separation {sep:.3e} <= 0"
                )
        if not self.fingerprint:
            object.__setattr__(self, "fingerprint", self.potential.fingerprint())

    def has_band(self, j: int) -> bool:
        return 0 <= j <= self.j_max

    def require_band(self, j: int):
        if not self.has_band(j):
            raise InvalidArgumentError(f"band {j} not present (table holds 0..{self.j_max})")

    def coefficient_column(self, j: int, n: int) -> np.ndarray:
        """f_n^(j)(z) over the grid."""
        self.require_band(j)
        if abs(n) > self.M:
            raise InvalidArgumentError(f"plane-wave index {n} outside [-M, M]")
        return self.coefficients[j, :, n + self.M]


def _solve_z_range(args):
    """Worker for compute_bands: solve a contiguous run of grid indices."""
    (q, coeff_items, z_list, j_max, M) = args
    p = FourierPotential(q=q, coeffs=dict(coeff_items))
    eps_rows = np.empty((len(z_list), j_max + 1))
    coeff_rows = np.empty((len(z_list), j_max + 1, 2 * M + 1), dtype=complex)
    for i, z in enumerate(z_list):
        pairs = eigen_lowest(build(p, z, M), j_max + 1)
        eps_rows[i] = pairs.eigenvalues
        for j in range(j_max + 1):
            coeff_rows[i, j] = gauge_fix(pairs.coefficients[j])
    return eps_rows, coeff_rows


def compute_bands(
    p: FourierPotential,
    grid: BrillouinGrid,
    j_max: int,
    M: int,
    workers: int = 1,
) -> BandTable:
    """Diagonalize on every grid point and assemble the gauge-fixed table.

    Grid points are independent, so the sweep may fan out over processes;
    chunks are reassembled in grid order and gauge fixing is per-point, so
    the result is identical to a serial run.
    """
    if j_max < 0:
        raise InvalidArgumentError(f"j_max must be >= 0, got {j_max}")
    zs = grid.z_values
    if workers and workers > 1:
        n_chunks = min(4 * workers, grid.count)
        bounds = np.linspace(0, grid.count, n_chunks + 1).astype(int)
        jobs = [
            (p.q, tuple(p.coeffs.items()), [float(z) for z in zs[a:b]], j_max, M)
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_solve_z_range, jobs))
    else:
        parts = [_solve_z_range((p.q, tuple(p.coeffs.items()), [float(z) for z in zs], j_max, M))]
    eps = np.concatenate([part[0] for part in parts], axis=0)
    coeffs = np.concatenate([part[1] for part in parts], axis=0)
    return BandTable(
        potential=p,
        grid=grid,
        M=M,
        j_max=j_max,
        energies=np.ascontiguousarray(eps.T),
        coefficients=np.ascontiguousarray(coeffs.transpose(1, 0, 2)),
    )


@dataclass(frozen=True)
class ConvergenceReport:
    M: int
    j_max: int
    max_energy_deviation: float
    max_lambda_deviation: float
    threshold: float
    passed: bool

    def summary(self) -> str:
        return (
            f"convergence M={self.M} vs {2 * self.M}: "
            f"max|d eps|={self.max_energy_deviation:.3e} "
            f"max|d Lambda|={self.max_lambda_deviation:.3e} "
            f"pass={self.passed}"
        )


def check_convergence(
    p: FourierPotential,
    grid: BrillouinGrid,
    j_max: int,
    M: int,
    threshold: float = 1e-10,
    workers: int = 1,
) -> ConvergenceReport:
    """Compare eigenvalues and the positivity weight between M and 2M.

    Truncation at M is accepted when neither the energies nor the Lambda
    sums move by more than `threshold` anywhere on the grid when the matrix
    size doubles.
    """
    from .positivity import lambda_table  # deferred: positivity consumes BandTable

    coarse = compute_bands(p, grid, j_max, M, workers=workers)
    fine = compute_bands(p, grid, j_max, 2 * M, workers=workers)
    d_eps = float(np.max(np.abs(coarse.energies - fine.energies)))
    d_lambda = float(
        max(
            np.max(np.abs(lambda_table(coarse, j) - lambda_table(fine, j)))
            for j in range(j_max + 1)
        )
    )
    passed = d_eps <= threshold and d_lambda <= threshold
    return ConvergenceReport(
        M=M,
        j_max=j_max,
        max_energy_deviation=d_eps,
        max_lambda_deviation=d_lambda,
        threshold=threshold,
        passed=passed,
    )


# ---------------------------------------------------------------------------
# serialization: one JSON header line, then CSV rows
# z, j, epsilon, f_re_n, f_im_n for n = -M..M. Floats are written with repr,
# which round-trips exactly, so save -> load -> save is byte-identical.


def _fmt(x: float) -> str:
    return repr(float(x))


def save_band_table(bt: BandTable, path: str) -> None:
    header = {
        "format": "blochpos-bands",
        "version": __version__,
        "potential": bt.potential.as_config(),
        "M": bt.M,
        "j_max": bt.j_max,
        "grid": {"count": bt.grid.count, "delta_z": bt.grid.delta_z},
        "gauge": bt.gauge,
        "fingerprint": bt.fingerprint,
    }
    buf = io.StringIO()
    buf.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
    cols = ["z", "j", "epsilon"]
    for n in range(-bt.M, bt.M + 1):
        cols.append(f"f_re_{n}")
        cols.append(f"f_im_{n}")
    buf.write(",".join(cols) + "\n")
    for j in range(bt.j_max + 1):
        for i, z in enumerate(bt.grid.z_values):
            row = [_fmt(z), str(j), _fmt(bt.energies[j, i])]
            c = bt.coefficients[j, i]
            for n in range(2 * bt.M + 1):
                row.append(_fmt(c[n].real))
                row.append(_fmt(c[n].imag))
            buf.write(",".join(row) + "\n")
    with open(path, "w", newline="\n") as fh:
        fh.write(buf.getvalue())


def load_band_table(path: str) -> BandTable:
    with open(path, "r") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: first line is not a JSON header: {exc}") from exc
        if header.get("format") != "blochpos-bands":
            raise ConfigError(f"{path}: not a band-table file")
        M = int(header["M"])
        j_max = int(header["j_max"])
        grid = BrillouinGrid(
            count=int(header["grid"]["count"]), delta_z=float(header["grid"]["delta_z"])
        )
        p = potential_from_config(header["potential"])
        fh.readline()  # column header
        nb = j_max + 1
        eps = np.empty((nb, grid.count))
        coeffs = np.empty((nb, grid.count, 2 * M + 1), dtype=complex)
        for j in range(nb):
            for i in range(grid.count):
                fields = fh.readline().split(",")
                if len(fields) != 3 + 2 * (2 * M + 1):
                    raise ConfigError(f"{path}: truncated or malformed row at band {j}, index {i}")
                eps[j, i] = float(fields[2])
                vals = np.array([float(s) for s in fields[3:]])
                coeffs[j, i] = vals[0::2] + 1j * vals[1::2]
    bt = BandTable(
        potential=p,
        grid=grid,
        M=M,
        j_max=j_max,
        energies=eps,
        coefficients=coeffs,
        gauge=header.get("gauge", GAUGE_RULE),
        fingerprint=header.get("fingerprint", ""),
    )
    if bt.fingerprint != p.fingerprint():
        raise ConfigError(f"{path}: potential fingerprint mismatch")
    return bt
