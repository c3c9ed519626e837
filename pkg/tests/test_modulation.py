import json
import math

import numpy as np
import pytest

from cyclochron.constants import SI_2019
from cyclochron.errors import ConflictError, DomainError, ParseError, PhysicalValidityError, ResolutionError
from cyclochron.modulation import (InteractionEvent, PositionedClock, Regime, apply_events, causal_order,
                                   detect_regime_changes, load_scenario, regime_classify, sample_timelines)

C = SI_2019.c
H = SI_2019.h_ev  # energy of a 1 Hz clock, eV


def test_switch_at_light_delay():
    clock = PositionedClock.from_energy("a", H, (C, 0, 0))
    tl = apply_events([clock], [InteractionEvent(0.0, (0, 0, 0), {"a": 0.0})])
    assert tl["a"].switch_times == ()
    far = PositionedClock.from_energy("a", H, (C, 0, 0))
    near = PositionedClock.from_energy("b", H)
    tl = apply_events([far, near], [InteractionEvent(0.0, (0, 0, 0), {"a": H / 2, "b": -H / 2})])
    assert tl["a"].switch_times == (1.0,)
    assert tl["b"].switch_times == ()  # emitter at distance 0: switch replaces the t = 0 segment


@pytest.mark.parametrize("t0,d", [(0.25, 1.0), (3.0, 12345.678), (1e-3, 7.5e8)])
def test_switch_time_machine_exact(t0, d):
    a = PositionedClock.from_energy("a", H, (0, d, 0))
    b = PositionedClock.from_energy("b", H)
    tl = apply_events([a, b], [InteractionEvent(t0, (0, 0, 0), {"a": 0.1 * H, "b": -0.1 * H})])
    assert tl["a"].switch_times == (t0 + d / C,)


def test_period_halves():
    a = PositionedClock.from_energy("a", H, (C, 0, 0))
    b = PositionedClock.from_energy("b", 3 * H)
    tl = apply_events([a, b], [InteractionEvent(0.0, (0, 0, 0), {"a": H, "b": -H})])
    assert tl["a"].segments[0].period == pytest.approx(1.0, rel=1e-15)
    assert tl["a"].segments[1].period == pytest.approx(0.5, rel=1e-15)


def test_exchange_ratios():
    e = 2.0
    a = PositionedClock.from_energy("recv", e, (10.0, 0, 0))
    b = PositionedClock.from_energy("emit", e, (0, 0, 0))
    tl = apply_events([a, b], [InteractionEvent(0.0, (0, 0, 0), {"recv": 0.3 * e, "emit": -0.3 * e})])
    p0 = H / e
    assert tl["recv"].segments[-1].period == pytest.approx(p0 / 1.3, rel=1e-14)
    assert tl["emit"].segments[-1].period == pytest.approx(p0 / 0.7, rel=1e-14)


def _random_system(rng, n=4):
    return [PositionedClock.from_energy(f"k{i}", float(rng.uniform(1, 5)) * H, tuple(rng.uniform(-1e8, 1e8, 3)),
                                        phase0=float(rng.uniform(0, 1)), helicity=int(rng.choice([1, -1])))
            for i in range(n)]


def _random_events(rng, system, m=5):
    events = []
    for t in np.sort(rng.uniform(0, 1, m)):
        a, b = rng.choice(len(system), 2, replace=False)
        de = float(rng.uniform(0.01, 0.2)) * H
        events.append(InteractionEvent(float(t), tuple(rng.uniform(-1e8, 1e8, 3)),
                                       {system[a].label: de, system[b].label: -de}))
    return events


def test_phase_continuity():
    rng = np.random.default_rng(9)
    for _ in range(20):
        system = _random_system(rng)
        tls = apply_events(system, _random_events(rng, system))
        for tl in tls.values():
            for k in range(1, len(tl.segments)):
                t = tl.segments[k].start_time
                before = tl.phase_at(t, segment=k - 1)
                after = tl.segments[k].phase_at_start
                d = abs(before - after)
                assert min(d, 1 - d) <= 1e-12


def test_energy_bookkeeping():
    rng = np.random.default_rng(4)
    system = _random_system(rng)
    events = _random_events(rng, system, 8)
    tls = apply_events(system, events)
    start = math.fsum(c.energy for c in system)
    end = math.fsum(tl.segments[-1].energy for tl in tls.values())
    assert end == pytest.approx(start, rel=1e-14)
    for tl in tls.values():
        for s in tl.segments:
            assert s.period == pytest.approx(H / s.energy, rel=1e-12)


def test_no_action_at_a_distance():
    system = [PositionedClock.from_energy(x, H) for x in "abc"]
    tls = apply_events(system, [InteractionEvent(0.5, (0, 0, 0), {"a": H / 4, "b": -H / 4, "c": 0.0})])
    assert len(tls["c"].segments) == 1


def test_non_positive_energy():
    system = [PositionedClock.from_energy("a", H), PositionedClock.from_energy("b", H)]
    with pytest.raises(PhysicalValidityError, match="event 0 .* 'b'"):
        apply_events(system, [InteractionEvent(0.0, (0, 0, 0), {"a": H, "b": -H})])


def test_simultaneous_arrivals_conflict():
    system = [PositionedClock.from_energy("a", 2 * H, (0, 0, 0)), PositionedClock.from_energy("b", 2 * H, (C, 0, 0))]
    events = [InteractionEvent(0.0, (2 * C, 0, 0), {"a": 0.1, "b": -0.1}),
              InteractionEvent(1.0, (C, 0, 0), {"a": 0.2, "b": -0.2})]
    with pytest.raises(ConflictError):
        apply_events(system, events)


def test_event_validation():
    with pytest.raises(DomainError):
        InteractionEvent(0.0, (0, 0, 0), {"a": 1.0, "b": -0.5})
    system = [PositionedClock.from_energy("a", H)]
    with pytest.raises(DomainError):
        apply_events(system, [InteractionEvent(0.0, (0, 0, 0), {"zz": 0.0})])
    with pytest.raises(DomainError):
        apply_events(system, [InteractionEvent(1.0, (0, 0, 0), {}), InteractionEvent(0.5, (0, 0, 0), {})])


def test_positioned_clock_consistency():
    pc = PositionedClock.from_period("a", 0.5)
    pc.check_consistency()
    from cyclochron.cycles import CycleClock
    with pytest.raises(PhysicalValidityError):
        PositionedClock(CycleClock(0.5, label="x"), (0, 0, 0), H).check_consistency()


# -- detection --------------------------------------------------------------

def _one_switch():
    a = PositionedClock.from_energy("a", H, (C, 0, 0))
    b = PositionedClock.from_energy("b", 10 * H)
    return apply_events([a, b], [InteractionEvent(0.0, (0, 0, 0), {"a": H, "b": -H})])


def test_detect_round_trip():
    times, phases = sample_timelines(_one_switch(), 3.0, 0.01)
    (ch,) = detect_regime_changes(times, phases["a"], 0.01)
    assert abs(ch.time - 1.0) <= 0.02
    assert ch.old_period == pytest.approx(1.0, rel=1e-3)
    assert ch.new_period == pytest.approx(0.5, abs=5e-4)


def test_detect_off_grid_switch():
    a = PositionedClock.from_energy("a", H, (0.6180339 * C, 0, 0))
    b = PositionedClock.from_energy("b", 10 * H)
    tl = apply_events([a, b], [InteractionEvent(0.0, (0, 0, 0), {"a": 0.5 * H, "b": -0.5 * H})])
    times, phases = sample_timelines(tl, 3.0, 0.01)
    (ch,) = detect_regime_changes(times, phases["a"])
    assert abs(ch.time - 0.6180339) <= 0.02
    assert ch.new_period / ch.old_period == pytest.approx(1 / 1.5, rel=1e-3)


def test_detect_constant_history():
    times, phases = sample_timelines({"a": _one_switch()["b"]}, 0.05, 0.001)
    assert detect_regime_changes(times, phases["a"]) == []


def test_detect_two_switches():
    a = PositionedClock.from_energy("a", 2 * H, (0, 0, 0))
    b = PositionedClock.from_energy("b", 10 * H, (0, 0, 0))
    events = [InteractionEvent(1.0, (0, 0, 0), {"a": H, "b": -H}),
              InteractionEvent(2.5, (0, 0, 0), {"a": -1.5 * H, "b": 1.5 * H})]
    tl = apply_events([a, b], events)
    times, phases = sample_timelines(tl, 4.0, 0.01)
    found = detect_regime_changes(times, phases["a"], 0.01)
    assert [round(c.time, 1) for c in found] == [1.0, 2.5]
    for c, seg_old, seg_new in zip(found, tl["a"].segments, tl["a"].segments[1:]):
        assert c.old_period == pytest.approx(seg_old.period, rel=1e-3)
        assert c.new_period == pytest.approx(seg_new.period, rel=1e-3)


def test_detect_negative_helicity():
    a = PositionedClock.from_energy("a", H, (C, 0, 0), helicity=-1)
    b = PositionedClock.from_energy("b", 10 * H)
    tl = apply_events([a, b], [InteractionEvent(0.0, (0, 0, 0), {"a": H, "b": -H})])
    times, phases = sample_timelines(tl, 3.0, 0.01)
    (ch,) = detect_regime_changes(times, phases["a"])
    assert abs(ch.time - 1.0) <= 0.02 and ch.new_period == pytest.approx(0.5, rel=1e-3)


def test_detect_under_sampled():
    times, phases = sample_timelines(_one_switch(), 3.0, 0.2)
    with pytest.raises(ResolutionError):
        detect_regime_changes(times, phases["a"])


# -- causal order -----------------------------------------------------------

def test_co_located_observer_sees_emission_order():
    obs = PositionedClock.from_energy("o", H)
    events = [InteractionEvent(t, (0, 0, 0), {}) for t in (0.0, 0.5, 2.0)]
    assert [a.event for a in causal_order(events, [obs])["o"]] == [0, 1, 2]


def test_far_early_event_arrives_late():
    obs = PositionedClock.from_energy("o", H)
    a = InteractionEvent(0.0, (3 * C, 0, 0), {})
    b = InteractionEvent(1.0, (0.5 * C, 0, 0), {})
    arrivals = causal_order([a, b], [obs])["o"]
    assert [x.event for x in arrivals] == [1, 0]
    assert [x.time for x in arrivals] == [1.5, 3.0]


def test_equidistant_tie():
    obs = PositionedClock.from_energy("o", H)
    events = [InteractionEvent(0.0, (C, 0, 0), {}), InteractionEvent(0.0, (-C, 0, 0), {})]
    arrivals = causal_order(events, [obs])["o"]
    assert all(x.tied for x in arrivals)


# -- regimes ----------------------------------------------------------------

def test_regime_single_clock(electron):
    from cyclochron.cycles import clock_from_particle
    pc = PositionedClock(clock_from_particle(electron), (0, 0, 0), electron.rest_mass_energy)
    assert regime_classify([pc]).regime is Regime.CYCLIC


def test_regime_ergodic():
    system = [PositionedClock.from_period("a", 1.0), PositionedClock.from_period("b", math.sqrt(2))]
    assert regime_classify(system).regime is Regime.ERGODIC


def test_regime_commensurate_is_cyclic():
    system = [PositionedClock.from_period("a", 1.0), PositionedClock.from_period("b", 1.5)]
    r = regime_classify(system)
    assert r.regime is Regime.CYCLIC and r.system_period == pytest.approx(3.0)


def test_regime_chaotic():
    system = [PositionedClock.from_period("a", 1.0), PositionedClock.from_period("b", 2.0)]
    ev = InteractionEvent(0.0, (0, 0, 0), {"a": 1e-20, "b": -1e-20})
    assert regime_classify(system, [ev]).regime is Regime.CHAOTIC
    zero = InteractionEvent(0.0, (0, 0, 0), {"a": 0.0, "b": 0.0})
    assert regime_classify(system, [zero]).regime is Regime.CYCLIC


# -- scenario files ---------------------------------------------------------

def test_load_scenario():
    text = json.dumps({
        "clocks": [{"label": "a", "period_s": 1.0, "position_m": [C, 0, 0]},
                   {"label": "e", "particle": "electron", "beta": [0.6, 0, 0], "phase0": 0.25, "helicity": -1}],
        "events": [{"t0_s": 0.0, "position_m": [0, 0, 0], "exchange": {"a": 1e-15, "e": -1e-15}}],
    })
    clocks, events = load_scenario(text)
    assert clocks[0].energy == pytest.approx(H)
    assert clocks[1].energy == pytest.approx(510998.95 * 1.25)
    assert clocks[1].clock.helicity == -1 and clocks[1].clock.initial_phase == 0.25
    clocks[1].check_consistency()
    assert apply_events(clocks, events)["a"].switch_times == (1.0,)


@pytest.mark.parametrize("text", ["{", "{}", '{"clocks": [{"label": "a"}]}',
                                  '{"clocks": [{"label": "a", "particle": "nope"}]}'])
def test_load_scenario_errors(text):
    with pytest.raises(ParseError):
        load_scenario(text)
