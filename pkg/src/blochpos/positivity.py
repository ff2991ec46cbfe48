"""Positive-momentum probability of Bloch wave packets.

For a single-band packet the probability that a momentum measurement is
positive is time independent and weighs the amplitude with

    Lambda(z) = 2 pi |f_0(z)|^2 Theta(z) + 2 pi sum_{n>=1} |f_n(z)|^2,

a number in [0, 1) for any nontrivial potential. The z = 0 value follows
the right-limit convention Theta(0) = 1, so Lambda(0) reports Lambda(0+).

Multi-band packets add an oscillating interference term built from the
cross weights Lambda^(j,j')(z); its time average vanishes, so P_+(t)
fluctuates around the stationary part P-bar.

For the cosine potential the largest attainable P_+ over all single-band
amplitudes comes from the z -> 0+ limit of Lambda on the lowest band and
reduces to 1/2 + pi |f_0^(0)(0)|^2, with closed-form weak- and
strong-coupling asymptotics implemented alongside for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bands import BandTable, gauge_fix
from .central_eq import build, eigen_lowest
from .errors import (
    InvalidArgumentError,
    NumericalFailureError,
    WrongOperationError,
)
from .potential import cosine_for_strength
from .quadrature import simpson_weights
from .wavepacket import QuasiMomentumAmplitude

TWO_PI = 2.0 * math.pi

# times are processed in chunks so long series never materialize a full
# (n_times x n_grid) phase matrix
_TIME_CHUNK = 512


def theta(z) -> np.ndarray:
    """Heaviside step with the right-limit convention Theta(0) = 1."""
    return np.where(np.asarray(z) >= 0.0, 1.0, 0.0)


def lambda_from_coefficients(coeffs: np.ndarray, M: int, z: float) -> float:
    """Lambda from one coefficient row f_n, n = -M..M."""
    c = np.asarray(coeffs)
    pos = float(np.sum(np.abs(c[M + 1 :]) ** 2))
    zero = float(np.abs(c[M]) ** 2) if z >= 0.0 else 0.0
    return TWO_PI * (pos + zero)


def lambda_table(bt: BandTable, j: int) -> np.ndarray:
    """Lambda over the whole stored grid for band j (vectorized)."""
    bt.require_band(j)
    c = bt.coefficients[j]
    pos = np.sum(np.abs(c[:, bt.M + 1 :]) ** 2, axis=1)
    zero = np.abs(c[:, bt.M]) ** 2 * theta(bt.grid.z_values)
    return TWO_PI * (pos + zero)


def _solve_at(bt: BandTable, z: float, count: int):
    """Fresh eigensolve at an off-grid z, gauge-fixed like the table."""
    pairs = eigen_lowest(build(bt.potential, z, bt.M), count)
    return [gauge_fix(pairs.coefficients[j]) for j in range(count)]


def lambda_single(bt: BandTable, J: int, z: float) -> float:
    """Lambda(z) for band J; grid points use stored data, anything else is
    solved fresh at the exact z requested."""
    bt.require_band(J)
    z = float(z)
    idx = bt.grid.index_of(z)
    if idx is not None:
        return float(lambda_table(bt, J)[idx])
    coeffs = _solve_at(bt, z, J + 1)[J]
    return lambda_from_coefficients(coeffs, bt.M, z)


def lambda_cross(bt: BandTable, j: int, jp: int, z: float) -> complex:
    """Cross-band weight Lambda^(j,j')(z); conjugate-symmetric in (j, j')."""
    if j == jp:
        raise WrongOperationError("lambda_cross needs two distinct bands; use lambda_single")
    bt.require_band(j)
    bt.require_band(jp)
    z = float(z)
    idx = bt.grid.index_of(z)
    if idx is not None:
        cj = bt.coefficients[j, idx]
        cjp = bt.coefficients[jp, idx]
    else:
        solved = _solve_at(bt, z, max(j, jp) + 1)
        cj, cjp = solved[j], solved[jp]
    M = bt.M
    cross = np.sum(np.conj(cj[M + 1 :]) * cjp[M + 1 :])
    if z >= 0.0:
        cross += np.conj(cj[M]) * cjp[M]
    return complex(TWO_PI * cross)


def _check_grids(bt: BandTable, amp: QuasiMomentumAmplitude):
    if amp.grid.count != bt.grid.count or amp.grid.delta_z != bt.grid.delta_z:
        raise InvalidArgumentError("amplitude grid does not match the band table grid")
    for j in amp.bands:
        bt.require_band(j)


def p_plus_single(bt: BandTable, amp: QuasiMomentumAmplitude) -> float:
    """P_+ of a single-band packet: Simpson sum of Lambda |phi|^2.

    Time independent, so no time argument exists here. The strict bound
    P_+ < 1 holds for every potential with at least one harmonic; the free
    particle saturates it (Lambda degenerates to the step function).
    """
    _check_grids(bt, amp)
    if not amp.is_single_band:
        raise WrongOperationError("amplitude occupies several bands; use p_plus_multiband")
    (j,) = amp.bands
    w = simpson_weights(bt.grid.count, bt.grid.spacing)
    value = float(np.sum(w * lambda_table(bt, j) * np.abs(amp.samples[j]) ** 2))
    _check_probability(value, strict=bt.potential.N >= 1)
    return value


def _check_probability(value: float, strict: bool):
    if not (-1e-8 <= value <= 1.0 + 1e-8):
        raise NumericalFailureError(f"P_+ = {value!r} outside [0, 1]")
    if strict and value >= 1.0:
        raise NumericalFailureError(f"strict bound violated: P_+ = {value!r} >= 1")


@dataclass(frozen=True)
class PositivityReport:
    """P_+ results for one packet: stationary part, oscillating part per
    time, Lambda diagnostics, and the tolerances the run was held to."""

    p_plus: np.ndarray
    times: np.ndarray
    p_bar: float
    p_tilde: np.ndarray
    lambda_max: float
    lambda_argmax: float
    im_residual: float
    fingerprint: str
    tolerances: dict = field(default_factory=dict)

    @property
    def is_time_dependent(self) -> bool:
        return bool(np.any(np.abs(self.p_tilde) > 0.0))


def p_plus_multiband(bt: BandTable, amp: QuasiMomentumAmplitude, times) -> PositivityReport:
    """P_+(t) = P-bar + P-tilde(t) for a packet occupying one or more bands.

    P-bar collects the per-band Lambda integrals; P-tilde sums the cross
    terms with phases exp(+i (eps_j - eps_j') t) over ordered band pairs,
    which is real up to rounding (the report tracks the imaginary residue
    and rejects it above 1e-10). A single-band packet is accepted and
    simply has P-tilde identically zero.
    """
    _check_grids(bt, amp)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise InvalidArgumentError("times must be nonempty")
    w = simpson_weights(bt.grid.count, bt.grid.spacing)
    zs = bt.grid.z_values
    th = theta(zs)
    M = bt.M

    p_bar = 0.0
    lam_max, lam_arg = -1.0, 0.0
    for j in amp.bands:
        lam = lambda_table(bt, j)
        p_bar += float(np.sum(w * lam * np.abs(amp.samples[j]) ** 2))
        i = int(np.argmax(lam))
        if lam[i] > lam_max:
            lam_max, lam_arg = float(lam[i]), float(zs[i])

    # sum over ordered pairs: conjugate terms cancel the imaginary part up
    # to rounding, so the residue of the complex total is a real error probe
    p_tilde_c = np.zeros(times.size, dtype=complex)
    pairs = [(j, jp) for j in amp.bands for jp in amp.bands if j != jp]
    for j, jp in pairs:
        cj = bt.coefficients[j]
        cjp = bt.coefficients[jp]
        cross = np.sum(np.conj(cj[:, M + 1 :]) * cjp[:, M + 1 :], axis=1)
        cross += np.conj(cj[:, M]) * cjp[:, M] * th
        integrand = w * TWO_PI * cross * np.conj(amp.samples[j]) * amp.samples[jp]
        d_eps = bt.energies[j] - bt.energies[jp]
        for a in range(0, times.size, _TIME_CHUNK):
            chunk = times[a : a + _TIME_CHUNK]
            p_tilde_c[a : a + _TIME_CHUNK] += np.exp(1j * np.outer(chunk, d_eps)) @ integrand
    im_residual = float(np.max(np.abs(p_tilde_c.imag))) if pairs else 0.0
    if im_residual > 1e-10:
        raise NumericalFailureError(f"imaginary residue {im_residual:.3e} above 1e-10")
    p_tilde = p_tilde_c.real.copy()

    strict = bt.potential.N >= 1
    _check_probability(p_bar, strict=strict)
    p_plus = p_bar + p_tilde
    if np.any(p_plus < -1e-8) or np.any(p_plus > 1.0 + 1e-8):
        raise NumericalFailureError("P_+(t) left [0, 1] beyond quadrature tolerance")
    return PositivityReport(
        p_plus=p_plus,
        times=times,
        p_bar=p_bar,
        p_tilde=p_tilde,
        lambda_max=lam_max,
        lambda_argmax=lam_arg,
        im_residual=im_residual,
        fingerprint=bt.fingerprint,
        tolerances={"im_residual": 1e-10, "probability_slack": 1e-8},
    )


# ---------------------------------------------------------------------------
# cosine-potential supremum and its asymptotics


@dataclass(frozen=True)
class CosineSupremum:
    """sup P_+ data for one cosine coupling, from the z = 0 eigenproblem."""

    alpha: float
    M: int
    value: float
    f00: float
    symmetry_residual: float


def cosine_sup_report(alpha: float, M: int = 100) -> CosineSupremum:
    """Largest attainable P_+ for the cosine potential at coupling alpha.

    Uses the z = 0 solve of the lowest band only: there f_{-n} = f_n, so
    the positive-n weight is (1 - 2 pi |f_0|^2)/2 and the supremum of
    Lambda(0+) is 1/2 + pi |f_0|^2. The reported symmetry residual
    max_n |f_{-n} - f_n| measures how well the solve honors that identity.
    """
    if not (alpha > 0):
        raise InvalidArgumentError(f"alpha must be positive, got {alpha!r}")
    pairs = eigen_lowest(build(cosine_for_strength(alpha), 0.0, M), 1)
    f = gauge_fix(pairs.coefficients[0])
    f00 = float(np.abs(f[M]))
    sym = float(np.max(np.abs(f[::-1] - f)))
    return CosineSupremum(
        alpha=float(alpha),
        M=M,
        value=0.5 + math.pi * f00 * f00,
        f00=f00,
        symmetry_residual=sym,
    )


def sup_p_plus_cosine(alpha: float, M: int = 100) -> float:
    return cosine_sup_report(alpha, M).value


def asympt_strong(alpha: float) -> float:
    """Strong-coupling form 1/2 + alpha^(-1/4) / (2 sqrt(pi))."""
    if not (alpha > 0):
        raise InvalidArgumentError(f"alpha must be positive, got {alpha!r}")
    return 0.5 + alpha ** -0.25 / (2.0 * math.sqrt(math.pi))


def asympt_weak(alpha: float) -> float:
    """Weak-coupling form 1 - alpha^2 (second-order perturbation theory)."""
    if alpha < 0:
        raise InvalidArgumentError(f"alpha must be >= 0, got {alpha!r}")
    return 1.0 - alpha * alpha


def perturbative_f00(alpha: float) -> float:
    """Second-order zone-center coefficient (1 - alpha^2) / sqrt(2 pi)."""
    if alpha < 0:
        raise InvalidArgumentError(f"alpha must be >= 0, got {alpha!r}")
    return (1.0 - alpha * alpha) / math.sqrt(TWO_PI)


def perturbative_g1(alpha: float) -> float:
    """First-order scaled neighbor coefficient g_{+-1} = -alpha."""
    if alpha < 0:
        raise InvalidArgumentError(f"alpha must be >= 0, got {alpha!r}")
    return -alpha


def harmonic_f00(alpha: float) -> float:
    """Deep-well zone-center coefficient alpha^(-1/8) / (sqrt(2) pi^(3/4))."""
    if not (alpha > 0):
        raise InvalidArgumentError(f"alpha must be positive, got {alpha!r}")
    return alpha ** -0.125 / (math.sqrt(2.0) * math.pi ** 0.75)


# ---------------------------------------------------------------------------
# figure-level diagnostics used by the sweep commands and acceptance checks


def grid_sup(bt: BandTable, j: int):
    """(max Lambda, arg z) over the stored grid for band j."""
    lam = lambda_table(bt, j)
    i = int(np.argmax(lam))
    return float(lam[i]), float(bt.grid.z_values[i])


def sup_at_first_positive_z(bt: BandTable, j: int) -> bool:
    """True when the grid sup of Lambda sits at z = 0 (the stored right
    limit) and the strictly-positive part peaks at the first z > 0 point."""
    lam = lambda_table(bt, j)
    zi = bt.grid.zero_index
    return int(np.argmax(lam)) == zi and int(np.argmax(lam[zi + 1 :])) == 0
