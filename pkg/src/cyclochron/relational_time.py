"""Relational time: encode instants as phase fingerprints and decode them back.

For every clock, the instants at which its phase lies within ``tol`` of a
target phase form evenly spaced closed intervals of half-width
``tol * period``. Matching a whole fingerprint is therefore an intersection
of interval trains, which :func:`_sweep` computes directly in floating
point. Ensembles whose periods and phases are exact rationals are decoded
with the Chinese remainder theorem instead, and the answer is exact.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from ._numerics import is_exact, rational_lcm, rationalize, torus_distance, wrap_unit
from .cycles import ClockEnsemble, phase_at
from .errors import DomainError, NotFoundError, UsageError

__all__ = [
    "Fingerprint",
    "EnsembleKind",
    "EnsembleClassification",
    "MAX_DENOMINATOR",
    "fingerprint_at",
    "fingerprint_distance",
    "classify",
    "decode_time",
    "recurrence_time",
    "distinguishability_gap",
]

MAX_DENOMINATOR = 10**6
DEFAULT_HORIZON_PERIODS = 1e7


@dataclass(frozen=True)
class Fingerprint:
    phases: tuple
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.phases) != len(self.labels):
            raise DomainError("fingerprint phases and labels differ in length")
        if not all(0 <= p < 1 for p in self.phases):
            raise DomainError("fingerprint phases must lie in [0, 1)")

    @property
    def exact(self) -> bool:
        return all(is_exact(p) for p in self.phases)

    def conjugate(self) -> "Fingerprint":
        """Phase ``p -> 1 - p (mod 1)``: the fingerprint seen with all helicities reversed."""
        return Fingerprint(tuple(wrap_unit(1 - p) for p in self.phases), self.labels)


class EnsembleKind(enum.Enum):
    PERIODIC = "periodic"
    ERGODIC = "ergodic"


@dataclass(frozen=True)
class EnsembleClassification:
    kind: EnsembleKind
    system_period: float | Fraction | None = None
    duplicate_periods: tuple[tuple[str, str], ...] = ()


def fingerprint_at(e: ClockEnsemble, t) -> Fingerprint:
    if len(e) == 0:
        raise UsageError("fingerprint of an empty ensemble")
    return Fingerprint(tuple(phase_at(c, t) for c in e), e.labels)


def fingerprint_distance(a: Fingerprint, b: Fingerprint) -> float:
    """Largest per-clock torus distance between two fingerprints."""
    if a.labels != b.labels:
        raise DomainError("fingerprints belong to different ensembles")
    return float(np.max(torus_distance(np.array(a.phases, dtype=float), np.array(b.phases, dtype=float))))


def classify(e: ClockEnsemble, rationalization_tolerance: float = 1e-12) -> EnsembleClassification:
    """Decide whether the clock periods are pairwise commensurate.

    Exact rational periods are handled exactly. Float periods are compared to
    the first period; a ratio counts as rational only if one of its
    continued-fraction convergents with denominator at most ``MAX_DENOMINATOR``
    reproduces it to ``rationalization_tolerance`` (relative).
    """
    tol = rationalization_tolerance
    if not 0 <= tol <= 1e-6:
        raise UsageError(f"rationalization tolerance must lie in [0, 1e-6], got {tol!r}")
    if len(e) == 0:
        raise UsageError("cannot classify an empty ensemble")
    periods = e.periods
    exact = all(is_exact(p) for p in periods)
    if not exact and tol == 0:
        raise UsageError("tolerance 0 requires every period to be an exact rational")

    if exact:
        ratios = [Fraction(p) / Fraction(periods[0]) for p in periods]
    else:
        ratios = []
        for p in periods:
            r = rationalize(float(p) / float(periods[0]), tol, MAX_DENOMINATOR)
            if r is None:
                return EnsembleClassification(EnsembleKind.ERGODIC, None, _duplicates(e, None))
            ratios.append(r)

    lcm = rational_lcm(ratios)
    system_period = lcm * Fraction(periods[0]) if exact else float(lcm) * float(periods[0])
    return EnsembleClassification(EnsembleKind.PERIODIC, system_period, _duplicates(e, ratios))


def _duplicates(e: ClockEnsemble, ratios) -> tuple[tuple[str, str], ...]:
    out = []
    for i, j in itertools.combinations(range(len(e)), 2):
        same = ratios[i] == ratios[j] if ratios is not None else e.periods[i] == e.periods[j]
        if same:
            out.append((e.labels[i], e.labels[j]))
    return tuple(out)


# -- interval sweep ---------------------------------------------------------

def _sweep(offsets: np.ndarray, periods: np.ndarray, halfwidths: np.ndarray,
           lo: float, hi: float, chunk: int = 1 << 18) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield, in time order, the intervals where every clock is inside its window.

    Clock ``i`` is inside on ``[offsets[i] + k periods[i] +- halfwidths[i]]``
    for integer ``k``. The clock with the shortest period is the anchor; each
    anchor interval is intersected with the (at most three) nearby intervals
    of every other clock.
    """
    a_idx = int(np.argmin(periods))
    pa, ca, wa = periods[a_idx], offsets[a_idx], halfwidths[a_idx]
    k_first = math.ceil((lo - wa - ca) / pa)
    k_last = math.floor((hi + wa - ca) / pa)
    others = [i for i in range(len(periods)) if i != a_idx]
    for k0 in range(k_first, k_last + 1, chunk):
        k = np.arange(k0, min(k0 + chunk, k_last + 1), dtype=float)
        centre = ca + k * pa
        a, b = centre - wa, centre + wa
        for j in others:
            pj, cj, wj = periods[j], offsets[j], halfwidths[j]
            kj = np.round(((a + b) / 2 - cj) / pj)
            cand_a, cand_b = [], []
            for d in (-1.0, 0.0, 1.0):
                cj_k = cj + (kj + d) * pj
                cand_a.append(np.maximum(a, cj_k - wj))
                cand_b.append(np.minimum(b, cj_k + wj))
            a = np.concatenate(cand_a)
            b = np.concatenate(cand_b)
            keep = a <= b
            a, b = a[keep], b[keep]
            order = np.argsort(a, kind="stable")
            a, b = a[order], b[order]
            if a.size == 0:
                break
        if a.size:
            yield a, b


def _targets(e: ClockEnsemble, f: Fingerprint) -> np.ndarray:
    """Time offsets, within one period, at which each clock shows the phase in ``f``."""
    out = []
    for c, target in zip(e, f.phases):
        shift = wrap_unit(float(c.helicity * (Fraction(target) - Fraction(c.initial_phase))))
        out.append(shift * float(c.period))
    return np.array(out)


def _best_point(a: float, b: float, centres: np.ndarray, periods: np.ndarray) -> tuple[float, float]:
    """Point of ``[a, b]`` minimising ``max_i |t - centres[i]| / periods[i]``."""
    cand = [a, b, *centres]
    n = len(centres)
    for i in range(n):
        for j in range(i + 1, n):
            cand.append((centres[i] * periods[j] + centres[j] * periods[i]) / (periods[i] + periods[j]))
    cand = np.array([t for t in cand if a <= t <= b])
    cost = np.max(np.abs(cand[:, None] - centres[None, :]) / periods[None, :], axis=1)
    i = int(np.argmin(cost))
    return float(cand[i]), float(cost[i])


def decode_time(e: ClockEnsemble, f: Fingerprint, window: Sequence, phase_tolerance: float = 1e-6) -> list:
    """All instants in ``[t_lo, t_hi)`` whose fingerprint matches ``f``.

    Matching is per clock in the torus metric, within ``phase_tolerance``
    cycles. Exact ensembles with exact fingerprints are solved by the
    Chinese remainder theorem and return ``Fraction`` instants.
    """
    if len(e) == 0:
        raise UsageError("cannot decode against an empty ensemble")
    if len(f.phases) != len(e):
        raise UsageError(f"fingerprint has {len(f.phases)} phases for {len(e)} clocks")
    if not 0 < phase_tolerance < 0.5:
        raise DomainError("phase tolerance must lie in (0, 0.5)")
    lo, hi = window
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise DomainError(f"invalid window [{lo!r}, {hi!r})")

    if e.exact and f.exact:
        return _decode_crt(e, f, Fraction(lo), Fraction(hi))

    periods = np.array([float(p) for p in e.periods])
    offsets = _targets(e, f)
    halfwidths = phase_tolerance * periods
    merge = phase_tolerance * periods.min()
    found: list[float] = []
    for a, b in _sweep(offsets, periods, halfwidths, float(lo), float(hi)):
        for ai, bi in zip(a, b):
            ai, bi = max(ai, float(lo)), min(bi, float(hi))
            if ai > bi or ai >= hi:
                continue
            mid = (ai + bi) / 2
            centres = offsets + np.round((mid - offsets) / periods) * periods
            t, _ = _best_point(ai, bi, centres, periods)
            if t >= hi:
                continue
            if found and t - found[-1] <= merge:
                continue
            found.append(t)
    return found


def _decode_crt(e: ClockEnsemble, f: Fingerprint, lo: Fraction, hi: Fraction) -> list[Fraction]:
    residues, moduli = [], []
    for c, target in zip(e, f.phases):
        p = Fraction(c.period)
        r = wrap_unit(c.helicity * (Fraction(target) - Fraction(c.initial_phase))) * p
        residues.append(r)
        moduli.append(p)
    scale = 1
    for v in residues + moduli:
        scale = math.lcm(scale, v.denominator)
    x, m = 0, 1
    for r, p in zip(residues, moduli):
        ri, pi = int(r * scale), int(p * scale)
        g = math.gcd(m, pi)
        if (ri - x) % g:
            return []
        step = ((ri - x) // g * pow(m // g, -1, pi // g)) % (pi // g)
        x += m * step
        m = m // g * pi
        x %= m
    # solutions: (x + j m) / scale in [lo, hi)
    j0 = math.ceil((lo * scale - x) / m)
    out = []
    j = j0
    while True:
        t = Fraction(x + j * m, scale)
        if t >= hi:
            return out
        out.append(t)
        j += 1


def _first_return(e: ClockEnsemble, epsilon: float, horizon: float) -> tuple[float, float] | None:
    """First closed interval after ``t = 0`` on which every clock is back within ``epsilon``.

    Returns ``None`` when the ensemble does not return before ``horizon``.
    """
    if not 0 < epsilon < 0.5:
        raise DomainError("epsilon must lie in (0, 0.5)")
    if len(e) == 0:
        raise UsageError("empty ensemble")
    periods = np.array([float(p) for p in e.periods])
    offsets = np.zeros_like(periods)
    halfwidths = epsilon * periods
    for a, b in _sweep(offsets, periods, halfwidths, 0.0, horizon):
        later = a > 0
        if np.any(later):
            i = int(np.argmax(later))
            if a[i] <= horizon:
                return float(a[i]), float(b[i])
            return None
    return None


def _best_anchor_tick(periods: np.ndarray, horizon: float, chunk: int = 1 << 20) -> tuple[float, float]:
    pa = periods.min()
    n = int(horizon // pa)
    best = (math.nan, math.inf)
    for k0 in range(1, n + 1, chunk):
        t = np.arange(k0, min(k0 + chunk, n + 1), dtype=float) * pa
        d = np.max(torus_distance(t[:, None] / periods[None, :], 0.0), axis=1)
        i = int(np.argmin(d))
        if d[i] < best[1]:
            best = (float(t[i]), float(d[i]))
    return best


def recurrence_time(e: ClockEnsemble, epsilon: float, horizon: float | None = None):
    """Smallest ``t > 0`` at which the ensemble re-enters its ``epsilon`` ball.

    The initial ball itself (the stretch right after ``t = 0``) does not count.
    For a periodic ensemble whose first return contains the system period,
    the system period itself is returned (exactly, for exact periods).
    """
    if horizon is None:
        horizon = DEFAULT_HORIZON_PERIODS * max(float(p) for p in e.periods)
    found = _first_return(e, epsilon, float(horizon))
    if found is None:
        periods = np.array([float(p) for p in e.periods])
        best = _best_anchor_tick(periods, float(horizon))
        raise NotFoundError(
            f"no return within epsilon={epsilon} before horizon {horizon!r}; "
            f"closest anchor tick t={best[0]!r} at distance {best[1]!r}",
            best=best,
        )
    a, b = found
    kind = classify(e) if e.exact else _try_classify(e)
    if kind is not None and kind.kind is EnsembleKind.PERIODIC:
        if a <= float(kind.system_period) <= b:
            return kind.system_period
    return a


def _try_classify(e: ClockEnsemble) -> EnsembleClassification | None:
    try:
        return classify(e)
    except UsageError:
        return None


def distinguishability_gap(e: ClockEnsemble, epsilon: float, window: float) -> float:
    """Shortest separation ``dt <= window`` at which two instants alias within ``epsilon``.

    The fingerprint distance between ``t`` and ``t + dt`` depends only on
    ``dt``, so this is the first return of the flow restricted to
    ``[0, window]``. Returns ``window`` when no aliasing occurs.
    """
    if window <= 0:
        raise DomainError("window must be positive")
    found = _first_return(e, epsilon, float(window))
    if found is None:
        return float(window)
    return min(found[0], float(window))
