"""Interaction events as retarded, phase-continuous modulations of clock periods.

An event at time ``t0`` and position ``x0`` exchanges energy among clocks.
Each participating clock at distance ``d`` switches to its new period
``h / (E + dE)`` exactly at ``t0 + d / c``; the phase runs on continuously
through the switch. Clock positions are static.
"""

from __future__ import annotations

import bisect
import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ._numerics import frac_ratio, wrap_unit
from .constants import SI_2019, Constants, ParticleSpec, particle_by_name
from .cycles import ClockEnsemble, CycleClock, clock_from_particle
from .errors import ConflictError, CyclochronError, DomainError, ParseError, PhysicalValidityError, ResolutionError
from .kinematics import Boost, four_momentum
from .relational_time import EnsembleKind, classify

__all__ = [
    "InteractionEvent",
    "PositionedClock",
    "Segment",
    "ModulationTimeline",
    "RegimeChange",
    "Arrival",
    "Regime",
    "RegimeReport",
    "apply_events",
    "sample_timelines",
    "detect_regime_changes",
    "causal_order",
    "regime_classify",
    "load_scenario",
]

Vector3 = tuple[float, float, float]


def _vec3(v) -> Vector3:
    v = tuple(float(x) for x in v)
    if len(v) != 3 or not all(math.isfinite(x) for x in v):
        raise DomainError(f"expected a finite 3-vector, got {v!r}")
    return v  # type: ignore[return-value]


@dataclass(frozen=True)
class InteractionEvent:
    time: float
    position: Vector3
    energy_exchange: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position))
        object.__setattr__(self, "energy_exchange", dict(self.energy_exchange))
        values = list(self.energy_exchange.values())
        scale = max((abs(v) for v in values), default=0.0)
        # fsum is exact; the slack only absorbs the decimal -> binary rounding of inputs
        if abs(math.fsum(values)) > 1e-12 * scale:
            raise DomainError(f"energy exchange must sum to zero, got {math.fsum(values)!r} eV")

    @property
    def nonzero(self) -> bool:
        return any(v != 0 for v in self.energy_exchange.values())


@dataclass(frozen=True)
class PositionedClock:
    clock: CycleClock
    position: Vector3
    energy: float  # eV, the running energy backing the period

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position))
        if not self.energy > 0:
            raise PhysicalValidityError(f"clock {self.label} needs positive energy")

    @classmethod
    def from_energy(cls, label: str, energy: float, position=(0.0, 0.0, 0.0), k: Constants = SI_2019,
                    phase0=0.0, helicity: int = 1) -> "PositionedClock":
        return cls(CycleClock(k.h_ev / energy, phase0, helicity, label), position, energy)

    @classmethod
    def from_period(cls, label: str, period: float, position=(0.0, 0.0, 0.0), k: Constants = SI_2019,
                    phase0=0.0, helicity: int = 1) -> "PositionedClock":
        return cls(CycleClock(period, phase0, helicity, label), position, k.h_ev / float(period))

    @property
    def label(self) -> str:
        return self.clock.label

    def check_consistency(self, k: Constants = SI_2019, rtol: float = 1e-12) -> None:
        expected = k.h_ev / self.energy
        if abs(float(self.clock.period) - expected) > rtol * expected:
            raise PhysicalValidityError(
                f"clock {self.label}: period {self.clock.period!r} s inconsistent with h/E = {expected!r} s"
            )


@dataclass(frozen=True)
class Segment:
    start_time: float
    period: float
    phase_at_start: float
    energy: float


@dataclass(frozen=True)
class ModulationTimeline:
    label: str
    helicity: int
    segments: tuple[Segment, ...]

    def segment_index(self, t: float) -> int:
        starts = [s.start_time for s in self.segments]
        return max(bisect.bisect_right(starts, t) - 1, 0)

    def phase_at(self, t: float, segment: int | None = None) -> float:
        """Phase at ``t``; ``segment`` forces evaluation on a given piece."""
        s = self.segments[self.segment_index(t) if segment is None else segment]
        return float(wrap_unit(s.phase_at_start + self.helicity * frac_ratio(t - s.start_time, s.period)))

    def phases_at(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        starts = np.array([s.start_time for s in self.segments])
        idx = np.maximum(np.searchsorted(starts, times, side="right") - 1, 0)
        start = starts[idx]
        period = np.array([s.period for s in self.segments])[idx]
        phase0 = np.array([s.phase_at_start for s in self.segments])[idx]
        return wrap_unit(phase0 + self.helicity * frac_ratio(times - start, period))

    @property
    def switch_times(self) -> tuple[float, ...]:
        return tuple(s.start_time for s in self.segments[1:])


def _distance(a: Vector3, b: Vector3) -> float:
    return math.dist(a, b)


def apply_events(system: Sequence[PositionedClock], events: Sequence[InteractionEvent],
                 k: Constants = SI_2019) -> dict[str, ModulationTimeline]:
    """Piecewise-constant period history of every clock, starting at ``t = 0``.

    A modulation arriving exactly at ``t = 0`` replaces the initial period;
    arrivals before ``t = 0`` are rejected. Two modulations reaching the same
    clock at the same instant are an error: there is no rule for composing
    them.
    """
    by_label = {c.label: c for c in system}
    if len(by_label) != len(system):
        raise ConflictError("clock labels must be unique")
    for prev, ev in zip(events, events[1:]):
        if ev.time < prev.time:
            raise DomainError("events must be sorted by time")

    arrivals: dict[str, list[tuple[float, int, float]]] = {label: [] for label in by_label}
    for idx, ev in enumerate(events):
        for label, de in ev.energy_exchange.items():
            if label not in by_label:
                raise DomainError(f"event {idx} references unknown clock {label!r}")
            if de == 0:
                continue
            arrival = ev.time + _distance(ev.position, by_label[label].position) / k.c
            if arrival < 0:
                raise DomainError(f"event {idx} reaches clock {label!r} before t = 0")
            arrivals[label].append((arrival, idx, de))

    timelines = {}
    for label, pc in by_label.items():
        energy = pc.energy
        seg = Segment(0.0, float(pc.clock.period), float(pc.clock.initial_phase), energy)
        segments = [seg]
        hits = sorted(arrivals[label])
        for (t1, i1, _), (t2, i2, _) in zip(hits, hits[1:]):
            if t1 == t2:
                raise ConflictError(f"events {i1} and {i2} reach clock {label!r} simultaneously at t = {t1!r}")
        for arrival, idx, de in hits:
            energy = energy + de
            if energy <= 0:
                raise PhysicalValidityError(
                    f"event {idx} drives clock {label!r} to non-positive energy {energy!r} eV"
                )
            last = segments[-1]
            period = k.h_ev / energy
            if arrival == last.start_time:
                segments[-1] = Segment(last.start_time, period, last.phase_at_start, energy)
                continue
            phase = float(wrap_unit(last.phase_at_start
                                    + pc.clock.helicity * frac_ratio(arrival - last.start_time, last.period)))
            segments.append(Segment(arrival, period, phase, energy))
        timelines[label] = ModulationTimeline(label, pc.clock.helicity, tuple(segments))
    return timelines


def sample_timelines(timelines: Mapping[str, ModulationTimeline], until: float, step: float):
    """Sample every timeline on ``t = 0, step, 2 step, ... <= until``.

    Returns ``(times, {label: phases})``.
    """
    if step <= 0 or until < 0:
        raise DomainError("need step > 0 and until >= 0")
    n = int(math.floor(until / step * (1 + 1e-12))) + 1
    times = np.arange(n) * step
    return times, {label: tl.phases_at(times) for label, tl in timelines.items()}


@dataclass(frozen=True)
class RegimeChange:
    time: float
    old_period: float
    new_period: float


def detect_regime_changes(times, phases, sample_step: float | None = None,
                          rel_tol: float = 1e-9) -> list[RegimeChange]:
    """Recover period switches from a sampled phase history.

    The history is unwrapped sample to sample, which is unambiguous while the
    phase advances less than 1/8 cycle per step. The instantaneous frequency
    is then piecewise constant; the one sampling interval that straddles a
    switch carries a blend of the two frequencies, and the switch instant is
    solved from that blend.
    """
    times = np.asarray(times, dtype=float)
    phases = np.asarray(phases, dtype=float)
    if times.shape != phases.shape or times.ndim != 1 or times.size < 3:
        raise DomainError("need matching 1-D time and phase arrays with at least 3 samples")
    dt = np.diff(times)
    if np.any(dt <= 0):
        raise DomainError("sample times must be strictly increasing")
    if sample_step is not None and np.any(np.abs(dt - sample_step) > 1e-6 * sample_step):
        raise DomainError("sample times are not spaced by sample_step")
    dphi = np.mod(np.diff(phases) + 0.5, 1.0) - 0.5
    if np.max(np.abs(dphi)) > 0.125:
        raise ResolutionError(
            "phase advances more than 1/8 cycle per sample; resample with step <= min_period / 8"
        )
    freq = dphi / dt

    # stable runs: maximal stretches of (relatively) equal frequency, >= 2 intervals long
    breaks = np.abs(np.diff(freq)) > rel_tol * np.maximum(np.abs(freq[1:]), np.abs(freq[:-1]))
    bounds = np.concatenate(([0], np.nonzero(breaks)[0] + 1, [freq.size]))
    runs = [(s, e) for s, e in zip(bounds[:-1], bounds[1:]) if e - s >= 2]

    changes = []
    for (s0, e0), (s1, e1) in zip(runs, runs[1:]):
        f_old = float(np.mean(freq[s0:e0]))
        f_new = float(np.mean(freq[s1:e1]))
        gap = s1 - e0
        if gap == 0:
            t_switch = float(times[s1])
        elif gap == 1:
            # blended interval [t_k, t_k+1]: phase = f_old (s - t_k) + f_new (t_k+1 - s)
            k = e0
            advance = dphi[k]
            t_switch = float(times[k] + (advance - f_new * dt[k]) / (f_old - f_new))
            t_switch = min(max(t_switch, float(times[k])), float(times[k + 1]))
        else:
            raise ResolutionError(
                f"switches between t = {times[e0]!r} and t = {times[s1]!r} are closer than two samples"
            )
        changes.append(RegimeChange(t_switch, 1.0 / abs(f_old), 1.0 / abs(f_new)))
    return changes


@dataclass(frozen=True)
class Arrival:
    event: int
    time: float
    tied: bool = False


def causal_order(events: Sequence[InteractionEvent], observers: Sequence[PositionedClock],
                 k: Constants = SI_2019) -> dict[str, list[Arrival]]:
    """Order in which each observer receives the events (arrival ``t0 + d / c``).

    Arrivals at exactly the same instant are flagged ``tied``; their relative
    order then follows emission order and carries no causal meaning.
    """
    out = {}
    for obs in observers:
        arr = sorted(
            ((ev.time + _distance(ev.position, obs.position) / k.c, i) for i, ev in enumerate(events)),
        )
        times = [t for t, _ in arr]
        out[obs.label] = [
            Arrival(i, t, times.count(t) > 1) for t, i in arr
        ]
    return out


class Regime(enum.Enum):
    CYCLIC = "cyclic"
    ERGODIC = "ergodic"
    CHAOTIC = "chaotic"


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    system_period: float | Fraction | None = None
    notes: tuple[str, ...] = field(default=())


def regime_classify(system: Sequence[PositionedClock], events: Sequence[InteractionEvent] = (),
                    rationalization_tolerance: float = 1e-12) -> RegimeReport:
    """Cyclic (one free clock, or commensurate free clocks), ergodic, or chaotic."""
    if any(ev.nonzero for ev in events):
        return RegimeReport(Regime.CHAOTIC, None, ("interaction events modulate the clocks",))
    if not system:
        raise DomainError("empty system")
    if len(system) == 1:
        c = system[0].clock
        return RegimeReport(Regime.CYCLIC, c.period, ("single free clock",))
    cls = classify(ClockEnsemble(pc.clock for pc in system), rationalization_tolerance)
    if cls.kind is EnsembleKind.ERGODIC:
        return RegimeReport(Regime.ERGODIC, None, ("incommensurate periods",))
    return RegimeReport(Regime.CYCLIC, cls.system_period, ("commensurate periods",))


def load_scenario(text: str, k: Constants = SI_2019, particles: Sequence[ParticleSpec] | None = None
                  ) -> tuple[list[PositionedClock], list[InteractionEvent]]:
    """Parse a scenario document.

    ``{"clocks": [{"label", "period_s" | "particle" [+ "beta"], "position_m",
    "phase0", "helicity"}], "events": [{"t0_s", "position_m", "exchange": {label: dE_eV}}]}``
    """
    try:
        doc = json.loads(text)
        clocks = []
        for entry in doc["clocks"]:
            label = entry["label"]
            pos = entry.get("position_m", (0.0, 0.0, 0.0))
            phase0 = entry.get("phase0", 0.0)
            helicity = entry.get("helicity", 1)
            if "period_s" in entry:
                clocks.append(PositionedClock.from_period(label, float(entry["period_s"]), pos, k, phase0, helicity))
            else:
                particle = particle_by_name(entry["particle"], particles)
                b = Boost(entry.get("beta", (0.0, 0.0, 0.0)))
                clock = clock_from_particle(particle, b, k, phase0, helicity)
                energy = four_momentum(particle, b, k).energy
                clocks.append(PositionedClock(CycleClock(clock.period, phase0, helicity, label), pos, energy))
        events = [
            InteractionEvent(float(ev["t0_s"]), ev.get("position_m", (0.0, 0.0, 0.0)),
                             {str(key): float(v) for key, v in ev.get("exchange", {}).items()})
            for ev in doc.get("events", [])
        ]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, CyclochronError):
            raise
        raise ParseError(f"malformed scenario: {exc!r}") from exc
    return clocks, events
