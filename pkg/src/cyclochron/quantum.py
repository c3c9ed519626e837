"""Periodicity as a quantization condition, and the winding/mode propagator identity.

Propagators are Euclidean (imaginary time) free kernels on a circle of
circumference ``L`` in natural units (hbar = 1). Summing the free Gaussian
over all winding images of the end point equals, by Poisson summation, the
sum over the harmonic modes ``k`` of the circle; both sums converge
absolutely and are evaluated here independently of each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .constants import SI_2019, Constants, ParticleSpec
from .cycles import CycleClock, phases_at
from .errors import AliasingError, DomainError, UnsupportedError
from .kinematics import Boost, four_momentum, periodicity_of

__all__ = [
    "SpectrumLine",
    "CompactPropagatorConfig",
    "PropagatorValue",
    "PhaseHistogram",
    "harmonic_spectrum",
    "winding_sum_propagator",
    "mode_sum_propagator",
    "winding_sum",
    "mode_sum",
    "phase_density_sample",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpectrumLine:
    n: int
    energy: float  # eV


def harmonic_spectrum(p: ParticleSpec, b: Boost = Boost(), k: Constants = SI_2019,
                      n_max: int = 1) -> list[SpectrumLine]:
    """Harmonics ``E_n = n h / T_t`` of a particle's (boosted) temporal period."""
    if p.massless:
        raise UnsupportedError(f"{p.name} is massless: no finite period to quantize")
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    period = periodicity_of(four_momentum(p, b, k), k).temporal_period
    fundamental = k.h_ev / period
    return [SpectrumLine(n, n * fundamental) for n in range(1, n_max + 1)]


@dataclass(frozen=True)
class CompactPropagatorConfig:
    circumference: float = 1.0
    mass: float = 1.0
    imaginary_time: float = 0.1
    truncation_tolerance: float = 1e-13

    def __post_init__(self):
        for name in ("circumference", "mass", "imaginary_time", "truncation_tolerance"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and positive")
        if self.truncation_tolerance < 100 * _EPS:
            raise DomainError(f"truncation tolerance must be >= {100 * _EPS!r}")


@dataclass(frozen=True)
class PropagatorValue:
    value: float
    terms: int


def _check_points(cfg: CompactPropagatorConfig, x: float, x0: float) -> None:
    L = cfg.circumference
    if not (0 <= x < L and 0 <= x0 < L):
        raise DomainError(f"points must lie in [0, {L!r})")


def _outward(term, tol: float) -> tuple[list[float], int]:
    """Collect terms for w = 0, +1, +2, ... and -1, -2, ... until both tails are negligible.

    ``term(w)`` returns ``(value, envelope)``; a direction stops once the
    envelope, which is monotone beyond ``|w| = 1``, drops below ``tol`` times
    the running sum of envelopes.
    """
    value, env = term(0)
    terms = [value]
    running = env
    for sign in (1, -1):
        w = sign
        while True:
            value, env = term(w)
            terms.append(value)
            running += env
            if abs(w) > 1 and env < tol * running:
                break
            w += sign
    return terms, len(terms)


def winding_sum(cfg: CompactPropagatorConfig, x: float, x0: float) -> PropagatorValue:
    _check_points(cfg, x, x0)
    L, m, beta = cfg.circumference, cfg.mass, cfg.imaginary_time
    norm = math.sqrt(m / (2 * math.pi * beta))
    xi = x - x0

    def term(w: int) -> tuple[float, float]:
        d = xi + w * L
        g = norm * math.exp(-m * d * d / (2 * beta))
        return g, g

    terms, n = _outward(term, cfg.truncation_tolerance)
    return PropagatorValue(math.fsum(terms), n)


def mode_sum(cfg: CompactPropagatorConfig, x: float, x0: float) -> PropagatorValue:
    _check_points(cfg, x, x0)
    L, m, beta = cfg.circumference, cfg.mass, cfg.imaginary_time
    xi = x - x0

    def term(q: int) -> tuple[float, float]:
        kq = 2 * math.pi * q / L
        env = math.exp(-beta * kq * kq / (2 * m)) / L
        return env * math.cos(kq * xi), env

    terms, n = _outward(term, cfg.truncation_tolerance)
    return PropagatorValue(math.fsum(terms), n)


def winding_sum_propagator(cfg: CompactPropagatorConfig, x: float, x0: float) -> float:
    """Circle kernel as a sum of free Gaussians over winding numbers."""
    return winding_sum(cfg, x, x0).value


def mode_sum_propagator(cfg: CompactPropagatorConfig, x: float, x0: float) -> float:
    """Circle kernel as a sum over harmonic modes ``exp(-beta E_k) cos(2 pi k (x - x0) / L) / L``."""
    return mode_sum(cfg, x, x0).value


@dataclass(frozen=True)
class PhaseHistogram:
    edges: np.ndarray
    counts: np.ndarray
    n_samples: int

    @property
    def masses(self) -> list[Fraction]:
        """Exact bin masses; they sum to exactly 1."""
        return [Fraction(int(c), self.n_samples) for c in self.counts]

    @property
    def total_mass(self) -> Fraction:
        return sum(self.masses, Fraction(0))

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.n_samples * np.diff(self.edges))


def phase_density_sample(c: CycleClock, sampler_step: float, n_samples: int, seed: int = 0,
                         bins: int = 50, jitter: float = 1e-6) -> PhaseHistogram:
    """Histogram of a clock's phase seen by a slow stroboscopic observer.

    Samples are taken at ``j * sampler_step * (1 + u_j)`` with ``u_j`` uniform
    in ``[-jitter, jitter]`` from ``seed``. The sampling step must exceed the
    period by at least 10^3 and must not be commensurate with it (no
    ``q * step / period`` within 1e-6 of an integer for ``q <= 64``).
    """
    period = float(c.period)
    ratio = sampler_step / period
    if ratio < 1e3:
        raise AliasingError(f"sampling step / period = {ratio!r} is below 1e3")
    r = Fraction(sampler_step) / Fraction(c.period)
    for q in range(1, 65):
        x = q * r
        if abs(x - round(x)) < Fraction(1, 10**6):
            raise AliasingError(f"sampling step is commensurate with the period (q = {q})")
    if n_samples < 10**4:
        raise DomainError("need at least 1e4 samples")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-jitter, jitter, n_samples)
    times = np.arange(n_samples) * sampler_step * (1.0 + u)
    phases = phases_at(c, times)
    counts, edges = np.histogram(phases, bins=bins, range=(0.0, 1.0))
    return PhaseHistogram(edges, counts, n_samples)
