"""Finite-Fourier representation of a real periodic potential.

A potential V(x) with period L = 2*pi/q is stored through its complex
Fourier coefficients V_n on the reciprocal lattice, V(x) = sum_n V_n
exp(i n q x). Realness of V forces V_{-n} = conj(V_n), which is the
invariant everything downstream leans on (it makes the central-equation
matrix Hermitian). Coefficients are kept sparsely in a map so a potential
with a handful of harmonics at large |n| stays cheap.

Downstream solvers work in dimensionless form: energies are scaled by
(hbar*q)^2/(2*mu), so the matrix sees vt_n = 2*mu*V_n/(hbar*q)^2. With the
internal convention hbar = mu = 1 that is vt_n = 2*V_n/q^2; a cosine of
amplitude A and q = 1 therefore has off-diagonal coupling A/2 * 2 = A.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidArgumentError

_SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class FourierPotential:
    """Validated, immutable Fourier series of a real periodic potential."""

    q: float
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (isinstance(self.q, (int, float)) and math.isfinite(self.q) and self.q > 0):
            raise InvalidArgumentError(f"period parameter q must be positive and finite, got {self.q!r}")
        object.__setattr__(self, "q", float(self.q))
        clean = {}
        for n, v in self.coeffs.items():
            if n != int(n):
                raise InvalidArgumentError(f"harmonic index must be an integer, got {n!r}")
            v = complex(v)
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise InvalidArgumentError(f"coefficient V_{n} is not finite")
            if v != 0:
                # Adding 0.0 maps any negative zero part to +0.0, so that
                # equal potentials always hash to the same fingerprint.
                clean[int(n)] = complex(v.real + 0.0, v.imag + 0.0)
        scale = max((abs(v) for v in clean.values()), default=0.0)
        for n, v in clean.items():
            partner = clean.get(-n, 0.0)
            if abs(partner - v.conjugate()) > _SYMMETRY_RTOL * scale:
                raise InvalidArgumentError(
                    f"coefficients violate the realness condition V_-n = conj(V_n) at n={n}"
                )
        if abs(clean.get(0, 0j).imag) > _SYMMETRY_RTOL * scale:
            raise InvalidArgumentError("V_0 must be real")
        if 0 in clean:
            clean[0] = complex(clean[0].real, 0.0)
        object.__setattr__(self, "coeffs", clean)

    @property
    def N(self) -> int:
        """Highest nonzero harmonic index (0 for a constant potential)."""
        return max((abs(n) for n in self.coeffs), default=0)

    @property
    def v0(self) -> float:
        return self.coeffs.get(0, 0j).real

    def coefficient(self, n: int) -> complex:
        return self.coeffs.get(n, 0j)

    def dimensionless_coeffs(self) -> dict:
        """Map n -> vt_n = 2 V_n / q^2 (hbar = mu = 1)."""
        s = 2.0 / (self.q * self.q)
        return {n: v * s for n, v in self.coeffs.items()}

    def is_real_coefficients(self) -> bool:
        return all(v.imag == 0.0 for v in self.coeffs.values())

    def fingerprint(self) -> str:
        parts = [repr(self.q), repr(self.v0)]
        for n in sorted(self.coeffs):
            v = self.coeffs[n]
            parts.append(f"{n}:{v.real!r}:{v.imag!r}")
        return hashlib.sha256("|".join(parts).encode()).hexdigest()

    def as_config(self) -> dict:
        """Config-block form (n > 0 harmonics plus offset), for file headers."""
        harmonics = [
            {"n": n, "re": self.coeffs[n].real, "im": self.coeffs[n].imag}
            for n in sorted(self.coeffs)
            if n > 0
        ]
        return {"q": self.q, "v0": self.v0, "harmonics": harmonics}


def make_cosine(amplitude: float, q: float) -> FourierPotential:
    """V(x) = A cos(q x), i.e. V_{+-1} = A/2 and nothing else."""
    if not (isinstance(amplitude, (int, float)) and math.isfinite(amplitude) and amplitude > 0):
        raise InvalidArgumentError(f"cosine amplitude must be positive, got {amplitude!r}")
    if not (isinstance(q, (int, float)) and math.isfinite(q) and q > 0):
        raise InvalidArgumentError(f"q must be positive, got {q!r}")
    half = 0.5 * float(amplitude)
    return FourierPotential(q=float(q), coeffs={-1: half + 0j, 1: half + 0j})


def cosine_for_strength(alpha: float) -> FourierPotential:
    """Cosine potential whose dimensionless coupling is exactly alpha (q = 1)."""
    return make_cosine(amplitude=float(alpha), q=1.0)


def free_potential(q: float = 1.0, v0: float = 0.0) -> FourierPotential:
    return FourierPotential(q=q, coeffs={0: complex(v0)} if v0 else {})


def evaluate(p: FourierPotential, x):
    """V(x) for scalar or array x. The n and -n terms are paired, so the
    result is real by construction rather than by cancellation."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, p.v0, dtype=float)
    for n, v in p.coeffs.items():
        if n > 0:
            out += 2.0 * (v * np.exp(1j * n * p.q * x)).real
    if out.ndim == 0:
        return float(out)
    return out


def dimensionless_strength(A: float, mu: float, hbar: float, q: float) -> float:
    """alpha = mu A / (hbar q)^2, the single parameter controlling a cosine band problem."""
    for name, val in (("A", A), ("mu", mu), ("hbar", hbar), ("q", q)):
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
            raise InvalidArgumentError(f"{name} must be positive, got {val!r}")
    return mu * A / (hbar * hbar * q * q)


def potential_from_config(block: dict) -> FourierPotential:
    """Build a potential from a config block.

    Two forms are accepted::

        {"cosine": {"A": 1.0, "q": 1.0}}
        {"q": 1.0, "v0": 0.0, "harmonics": [{"n": 1, "re": 0.5, "im": 0.0}]}

    Harmonic entries carry only n > 0; the negative side is completed from
    the realness condition automatically.
    """
    if not isinstance(block, dict):
        raise ConfigError("potential block must be a table")
    if "cosine" in block:
        extra = set(block) - {"cosine"}
        if extra:
            raise ConfigError(f"unknown key in potential block: {sorted(extra)[0]!r}")
        cos = block["cosine"]
        if not isinstance(cos, dict):
            raise ConfigError("potential.cosine must be a table")
        extra = set(cos) - {"A", "q"}
        if extra:
            raise ConfigError(f"unknown key in potential.cosine: {sorted(extra)[0]!r}")
        try:
            return make_cosine(float(cos.get("A")), float(cos.get("q", 1.0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad potential.cosine values: {exc}") from exc
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from exc
    extra = set(block) - {"q", "v0", "harmonics"}
    if extra:
        raise ConfigError(f"unknown key in potential block: {sorted(extra)[0]!r}")
    if "q" not in block:
        raise ConfigError("potential block needs 'q' (or a 'cosine' table)")
    coeffs = {}
    v0 = block.get("v0", 0.0)
    if v0:
        coeffs[0] = complex(float(v0))
    for i, entry in enumerate(block.get("harmonics", [])):
        if not isinstance(entry, dict):
            raise ConfigError(f"potential.harmonics[{i}] must be a table")
        extra = set(entry) - {"n", "re", "im"}
        if extra:
            raise ConfigError(f"unknown key in potential.harmonics[{i}]: {sorted(extra)[0]!r}")
        try:
            n = int(entry["n"])
            v = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad potential.harmonics[{i}]: {exc}") from exc
        if n <= 0:
            raise ConfigError(f"potential.harmonics[{i}].n must be > 0 (negative side is implied)")
        coeffs[n] = coeffs.get(n, 0j) + v
    for n in [n for n in coeffs if n > 0]:
        coeffs[-n] = coeffs[n].conjugate()
    try:
        return FourierPotential(q=float(block["q"]), coeffs=coeffs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad potential block: {exc}") from exc
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
