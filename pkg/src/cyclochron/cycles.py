"""Internal clocks: phase evolution, tick counting and helicity.

Phases are measured in cycles in ``[0, 1)``. A clock's period may be a float
or an exact rational (``int`` / ``Fraction``); when every input to
:func:`phase_at` or :func:`tick_count` is exact the result is exact too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._numerics import frac_ratio, is_exact, wrap_unit
from .constants import SI_2019, Constants, ParticleSpec
from .errors import ConflictError, DomainError, UnsupportedError
from .kinematics import Boost, four_momentum, periodicity_of

__all__ = [
    "CAESIUM_PERIOD",
    "CycleClock",
    "ExternalAxis",
    "ClockEnsemble",
    "phase_at",
    "phases_at",
    "tick_count",
    "clock_from_particle",
    "invert_helicity",
    "caesium_clock",
]

# SI second: 9 192 631 770 hyperfine cycles of Cs-133.
CAESIUM_PERIOD = Fraction(1, 9_192_631_770)


@dataclass(frozen=True)
class CycleClock:
    period: float | Fraction
    initial_phase: float | Fraction = 0
    helicity: int = 1
    label: str = "clock"

    def __post_init__(self):
        if isinstance(self.period, float) and not math.isfinite(self.period):
            raise UnsupportedError("infinite-period clocks are represented by ExternalAxis")
        if not self.period > 0:
            raise DomainError(f"clock period must be positive, got {self.period!r}")
        if not 0 <= self.initial_phase < 1:
            raise DomainError(f"initial phase must lie in [0, 1), got {self.initial_phase!r}")
        if self.helicity not in (1, -1):
            raise DomainError(f"helicity must be +1 or -1, got {self.helicity!r}")

    @property
    def exact(self) -> bool:
        return is_exact(self.period) and is_exact(self.initial_phase)


@dataclass(frozen=True)
class ExternalAxis:
    """Non-cyclic reference time axis (the infinite-period limit of a clock)."""

    origin: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.origin):
            raise DomainError("axis origin must be finite")

    def time_of_tick(self, clock: CycleClock, n: int):
        """Instant of the ``n``-th tick of ``clock`` at or after the origin (``n >= 0``)."""
        if n < 0:
            raise DomainError("tick index must be >= 0")
        n0 = _first_tick_offset(clock, self.origin)
        t = (n0 + n - Fraction(clock.initial_phase)) * Fraction(clock.period)
        return t if clock.exact and is_exact(self.origin) else float(t)


@dataclass(frozen=True)
class ClockEnsemble:
    clocks: tuple[CycleClock, ...]

    def __init__(self, clocks: Iterable[CycleClock]):
        clocks = tuple(clocks)
        labels = [c.label for c in clocks]
        if len(set(labels)) != len(labels):
            raise ConflictError(f"clock labels must be unique, got {labels}")
        object.__setattr__(self, "clocks", clocks)

    @classmethod
    def from_periods(cls, periods: Sequence, phases: Sequence | None = None,
                     helicities: Sequence[int] | None = None) -> "ClockEnsemble":
        n = len(periods)
        phases = [0] * n if phases is None else list(phases)
        helicities = [1] * n if helicities is None else list(helicities)
        if not len(phases) == len(helicities) == n:
            raise DomainError("periods, phases and helicities must have equal length")
        return cls(CycleClock(p, f, h, f"c{i}") for i, (p, f, h)
                   in enumerate(zip(periods, phases, helicities)))

    def __len__(self) -> int:
        return len(self.clocks)

    def __iter__(self):
        return iter(self.clocks)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.clocks)

    @property
    def periods(self) -> tuple:
        return tuple(c.period for c in self.clocks)

    @property
    def exact(self) -> bool:
        return all(c.exact for c in self.clocks)


def phase_at(c: CycleClock, t):
    """Phase of ``c`` at time ``t``: ``frac(initial_phase + helicity * t / period)``.

    Evaluated in exact rational arithmetic, so phases stay correct after any
    number of cycles. The result is a ``Fraction`` when the clock and ``t``
    are exact, a float otherwise.
    """
    if isinstance(t, float) and not math.isfinite(t):
        raise DomainError("t must be finite")
    x = Fraction(c.initial_phase) + c.helicity * Fraction(t) / Fraction(c.period)
    x = x - math.floor(x)
    if c.exact and is_exact(t):
        return x
    return wrap_unit(float(x))


def phases_at(c: CycleClock, times) -> np.ndarray:
    """Vectorised :func:`phase_at` in floating point with compensated reduction."""
    f = frac_ratio(times, float(c.period))
    return wrap_unit(float(c.initial_phase) + c.helicity * f)


def _first_tick_offset(c: CycleClock, t) -> int:
    # Ticks sit where initial_phase + t/period is an integer.
    return math.ceil(Fraction(c.initial_phase) + Fraction(t) / Fraction(c.period))


def tick_count(c: CycleClock, t0, t1) -> int:
    """Number of ticks falling in the half-open interval ``[t0, t1)``.

    A tick is an instant at which the unwrapped cycle count
    ``initial_phase + t / period`` is an integer. Helicity only sets the sense
    of rotation and does not change the count. Half-open intervals make the
    count exactly additive.
    """
    if t1 < t0:
        raise DomainError(f"t1 ({t1!r}) must be >= t0 ({t0!r})")
    return _first_tick_offset(c, t1) - _first_tick_offset(c, t0)


def clock_from_particle(p: ParticleSpec, b: Boost = Boost(), k: Constants = SI_2019,
                        phase0=0, helicity: int = 1) -> CycleClock:
    """Internal clock of a (possibly moving) massive particle; period ``h / E``."""
    if p.massless:
        raise UnsupportedError(
            f"{p.name} is massless: its rest clock is frozen; use ExternalAxis as the reference axis"
        )
    period = periodicity_of(four_momentum(p, b, k), k).temporal_period
    return CycleClock(period, phase0, helicity, p.name)


def invert_helicity(c: CycleClock) -> CycleClock:
    """Reverse the sense of rotation (particle <-> antiparticle)."""
    return replace(c, helicity=-c.helicity)


def caesium_clock(label: str = "Cs-133") -> CycleClock:
    return CycleClock(CAESIUM_PERIOD, 0, 1, label)
