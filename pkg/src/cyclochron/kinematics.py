"""Four-momentum and four-periodicity of a particle, and Lorentz boosts.

Energies are in eV and momenta in eV/c throughout, so ``p c`` is simply the
stored momentum. The temporal period of a state is ``h / E`` and each spatial
wavelength is ``h / p_i``; the rest-frame (Compton) period ``h / (M c^2)`` is
the tick of the particle's internal clock.

Boosts are *active*: ``boost_momentum(m, Boost(beta))`` returns the state of
the same particle after it has been set moving with velocity ``beta``, so a
particle at rest boosted by ``beta`` equals ``four_momentum(p, Boost(beta))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .constants import SI_2019, Constants, ParticleSpec
from .errors import DomainError, UnsupportedError

__all__ = [
    "MAX_SPEED",
    "Boost",
    "FourMomentum",
    "FourPeriodicity",
    "compton_period",
    "four_momentum",
    "photon_momentum",
    "periodicity_of",
    "boost_momentum",
    "boost_periodicity",
    "phase_harmony_residual",
    "phase_harmony_invariant",
]

MAX_SPEED = 1.0 - 1e-12

Vector3 = tuple[float, float, float]


def _vec3(v: Sequence[float]) -> Vector3:
    if len(v) != 3:
        raise DomainError(f"expected a 3-vector, got {len(v)} components")
    out = tuple(float(x) for x in v)
    if not all(math.isfinite(x) for x in out):
        raise DomainError("vector components must be finite")
    return out  # type: ignore[return-value]


def _dot(a: Sequence[float], b: Sequence[float]) -> float:
    return math.fsum(x * y for x, y in zip(a, b))


def _norm(v: Sequence[float]) -> float:
    return math.hypot(*v)


@dataclass(frozen=True)
class Boost:
    """Dimensionless velocity ``beta = v / c`` with ``|beta| < 1``."""

    velocity: Vector3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "velocity", _vec3(self.velocity))
        if self.speed > MAX_SPEED:
            raise DomainError(f"|beta| = {self.speed!r} must be below {MAX_SPEED!r}")

    @classmethod
    def from_gamma(cls, gamma: float, direction: Sequence[float] = (1.0, 0.0, 0.0)) -> "Boost":
        if gamma < 1:
            raise DomainError("gamma must be >= 1")
        n = _norm(direction)
        if n == 0:
            raise DomainError("boost direction must be non-zero")
        speed = math.sqrt((gamma - 1.0) * (gamma + 1.0)) / gamma
        return cls(tuple(speed * x / n for x in direction))

    @property
    def speed(self) -> float:
        return _norm(self.velocity)

    @property
    def gamma(self) -> float:
        b = self.speed
        return 1.0 / math.sqrt((1.0 - b) * (1.0 + b))

    def __neg__(self) -> "Boost":
        return Boost(tuple(-x for x in self.velocity))


@dataclass(frozen=True)
class FourMomentum:
    energy: float  # eV
    momentum: Vector3 = (0.0, 0.0, 0.0)  # eV/c

    def __post_init__(self):
        object.__setattr__(self, "momentum", _vec3(self.momentum))
        if not (math.isfinite(self.energy) and self.energy >= 0):
            raise DomainError(f"energy must be finite and >= 0, got {self.energy!r}")

    @property
    def momentum_norm(self) -> float:
        return _norm(self.momentum)

    @property
    def mass_squared(self) -> float:
        """Invariant ``(M c^2)^2`` in eV^2, factored to limit cancellation."""
        p = self.momentum_norm
        return (self.energy - p) * (self.energy + p)

    @property
    def invariant_mass(self) -> float:
        """``M c^2`` in eV; zero for null (photon-like) states."""
        m2 = self.mass_squared
        if m2 <= 8 * 2.0**-52 * self.energy**2:
            return 0.0
        return math.sqrt(m2)

    def mass_shell_residual(self, rest_mass_energy: float) -> float:
        """``|E^2 - |pc|^2 - (Mc^2)^2| / E^2``."""
        return abs(self.mass_squared - rest_mass_energy**2) / self.energy**2


@dataclass(frozen=True)
class FourPeriodicity:
    temporal_period: float  # s
    spatial_wavelengths: Vector3  # m, +inf where the momentum component vanishes
    proper_period: float  # s, +inf for massless states


def compton_period(p: ParticleSpec, k: Constants = SI_2019) -> float:
    """Rest-frame period ``h / (M c^2)`` in seconds; ``inf`` for massless particles."""
    if p.massless:
        return math.inf
    return k.h_ev / p.rest_mass_energy


def four_momentum(p: ParticleSpec, b: Boost = Boost(), k: Constants = SI_2019) -> FourMomentum:
    if p.massless:
        raise UnsupportedError(
            f"{p.name} is massless and cannot be boosted from rest; use photon_momentum(energy, direction)"
        )
    mc2 = p.rest_mass_energy
    gamma = b.gamma
    return FourMomentum(gamma * mc2, tuple(gamma * mc2 * x for x in b.velocity))


def photon_momentum(energy: float, direction: Sequence[float] = (1.0, 0.0, 0.0)) -> FourMomentum:
    """Null four-momentum of the given energy (eV) travelling along ``direction``."""
    n = _norm(direction)
    if n == 0:
        raise DomainError("photon direction must be non-zero")
    return FourMomentum(energy, tuple(energy * x / n for x in direction))


def periodicity_of(m: FourMomentum, k: Constants = SI_2019) -> FourPeriodicity:
    if m.energy <= 0:
        raise DomainError("periodicity requires positive energy")
    h = k.h_ev
    wavelengths = tuple(math.inf if pc == 0 else h * k.c / pc for pc in m.momentum)
    mass = m.invariant_mass
    proper = math.inf if mass == 0 else h / mass
    return FourPeriodicity(h / m.energy, wavelengths, proper)


def boost_momentum(m: FourMomentum, b: Boost, k: Constants = SI_2019) -> FourMomentum:
    beta = b.velocity
    beta2 = _dot(beta, beta)
    if beta2 == 0:
        return m
    gamma = b.gamma
    bp = _dot(beta, m.momentum)
    coeff = (gamma - 1.0) * bp / beta2 + gamma * m.energy
    energy = gamma * (m.energy + bp)
    return FourMomentum(energy, tuple(p + coeff * x for p, x in zip(m.momentum, beta)))


def boost_periodicity(T: FourPeriodicity, b: Boost, k: Constants = SI_2019) -> FourPeriodicity:
    """Boost a four-periodicity directly through its frequencies.

    The temporal frequency ``1/T_t`` and the wave numbers ``c/lambda_i`` form
    a four-vector proportional to the four-momentum, so this is the same
    transformation as :func:`boost_momentum`, carried out on periods instead
    of energies (relativistic Doppler modulation of the clock).
    """
    beta = b.velocity
    beta2 = _dot(beta, beta)
    if beta2 == 0:
        return T
    gamma = b.gamma
    nu = 1.0 / T.temporal_period
    kappa = tuple(0.0 if math.isinf(lam) else k.c / lam for lam in T.spatial_wavelengths)
    bk = _dot(beta, kappa)
    coeff = (gamma - 1.0) * bk / beta2 + gamma * nu
    nu_b = gamma * (nu + bk)
    kappa_b = tuple(q + coeff * x for q, x in zip(kappa, beta))
    wavelengths = tuple(math.inf if q == 0 else k.c / q for q in kappa_b)
    return FourPeriodicity(1.0 / nu_b, wavelengths, T.proper_period)


def phase_harmony_residual(p: ParticleSpec, b: Boost, t: float, k: Constants = SI_2019) -> float:
    """Wave phase on the worldline minus the internal-clock phase, in cycles.

    The de Broglie wave phase along ``x = beta c t`` is ``(E t - p.x) / h``;
    the internal clock accumulates ``tau / T_tau`` with ``tau = t / gamma``.
    Both are written as ``t / period`` so that the rest frame gives exactly 0.
    """
    if p.massless:
        raise UnsupportedError(f"{p.name} is massless: its rest clock is frozen")
    if t < 0:
        raise DomainError("t must be >= 0")
    m = four_momentum(p, b, k)
    wave_frequency_ev = m.energy - _dot(b.velocity, m.momentum)
    wave_phase = t / (k.h_ev / wave_frequency_ev)
    clock_phase = t / (b.gamma * compton_period(p, k))
    return wave_phase - clock_phase


def phase_harmony_invariant(p: ParticleSpec, b: Boost, k: Constants = SI_2019) -> float:
    """``T_tau * (p_mu u^mu) / c^2`` in eV s; equals ``h`` for every boost."""
    if p.massless:
        raise UnsupportedError(f"{p.name} is massless")
    m = four_momentum(p, b, k)
    gamma = b.gamma
    pu = gamma * (m.energy - _dot(b.velocity, m.momentum))
    return compton_period(p, k) * pu
