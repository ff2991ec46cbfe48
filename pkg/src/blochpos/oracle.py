"""First-principles cross-check of P_+ via real-space sampling.

The spectral route computes P_+ from Lambda weights on the zone grid. This
module deliberately ignores all of that: it samples Psi(x, t) on a wide
uniform window, Fourier transforms the samples, and integrates |phi(k)|^2
over k >= 0. Agreement between the two routes validates the band-folding
algebra end to end, because they share nothing beyond the band table.

Protocol: evaluate at the configured window/sample count, then again with
both doubled; accept only when successive estimates agree to 1e-6,
escalating once more if they do not. The window must hold the packet to a
norm deficit of 1e-6 and the momentum range must cover every stored
plane-wave index, otherwise the run is rejected rather than patched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bands import BandTable
from .errors import InvalidArgumentError, NumericalFailureError, NyquistError, WindowDeficitError
from .wavepacket import QuasiMomentumAmplitude, position_wavefunction_grid

SQRT_TWO_PI = math.sqrt(2.0 * math.pi)

CONVERGENCE_TOL = 1e-6
DEFICIT_TOL = 1e-6


@dataclass(frozen=True)
class OracleConfig:
    """Real-space window [-X, X) sampled at 2**samples_log2 points."""

    window: float = 512.0
    samples_log2: int = 16
    t: float = 0.0

    def __post_init__(self):
        if not (self.window > 0 and math.isfinite(self.window)):
            raise InvalidArgumentError(f"window must be positive, got {self.window!r}")
        if not (6 <= int(self.samples_log2) <= 26):
            raise InvalidArgumentError(
                f"samples_log2 must be in [6, 26], got {self.samples_log2!r}"
            )


@dataclass(frozen=True)
class OracleReport:
    p_direct: float
    p_spectral: float
    abs_diff: float
    window: float
    samples: int
    deficit: float
    t: float
    estimates: tuple = field(default_factory=tuple)


def _estimate(bt: BandTable, amp: QuasiMomentumAmplitude, t: float, window: float, samples: int):
    dx = 2.0 * window / samples
    psi = position_wavefunction_grid(bt, amp, t, x0=-window, dx=dx, count=samples)
    norm_inside = dx * float(np.sum(np.abs(psi) ** 2))
    deficit = abs(1.0 - norm_inside)
    if deficit > DEFICIT_TOL:
        raise WindowDeficitError(
            f"window [-{window}, {window}) holds norm {norm_inside!r}; "
            f"deficit {deficit:.3e} above {DEFICIT_TOL:.0e}"
        )
    k = 2.0 * math.pi * np.fft.fftfreq(samples, d=dx)
    phi = (dx / SQRT_TWO_PI) * np.exp(1j * k * window) * np.fft.fft(psi)
    dk = 2.0 * math.pi / (samples * dx)
    # the k = 0 bin goes to the positive side, matching the Theta(0+) rule
    p = dk * float(np.sum(np.abs(phi[k >= 0.0]) ** 2))
    return p, deficit


def direct_p_plus(bt: BandTable, amp: QuasiMomentumAmplitude, cfg: OracleConfig) -> OracleReport:
    """P_+ from transformed position samples, plus the spectral value.

    Raises nyquist-violation when the sampling cannot represent the
    packet's plane-wave content, window-deficit when probability leaks out
    of the window, and numerical-failure when the doubling protocol does
    not settle.
    """
    window = float(cfg.window)
    samples = 2 ** int(cfg.samples_log2)
    nyquist = math.pi * samples / (2.0 * window)
    if nyquist < (bt.M + 1):
        raise NyquistError(
            f"momentum range {nyquist:.1f} below the stored plane-wave span {bt.M + 1}"
        )

    estimates = []
    p_prev, deficit = _estimate(bt, amp, cfg.t, window, samples)
    estimates.append(p_prev)
    accepted = None
    for _ in range(2):
        window *= 2.0
        samples *= 2
        p_next, deficit = _estimate(bt, amp, cfg.t, window, samples)
        estimates.append(p_next)
        if abs(p_next - p_prev) < CONVERGENCE_TOL:
            accepted = p_next
            break
        p_prev = p_next
    if accepted is None:
        raise NumericalFailureError(
            f"oracle did not converge: successive estimates {estimates!r}"
        )

    # spectral route, shared code stops at the band table
    from .positivity import p_plus_multiband, p_plus_single

    if amp.is_single_band:
        p_spectral = p_plus_single(bt, amp)
    else:
        p_spectral = float(p_plus_multiband(bt, amp, [cfg.t]).p_plus[0])
    return OracleReport(
        p_direct=accepted,
        p_spectral=p_spectral,
        abs_diff=abs(accepted - p_spectral),
        window=window,
        samples=samples,
        deficit=deficit,
        t=float(cfg.t),
        estimates=tuple(estimates),
    )
