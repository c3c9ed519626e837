"""Intrinsically periodic particles as clocks: kinematics, relational time and
the winding/mode correspondence on a compact dimension."""

from .constants import SI_2019, Constants, ParticleSpec, constants_from_config, default_particles, load_particle_table
from .cycles import CycleClock, ClockEnsemble, ExternalAxis, clock_from_particle, invert_helicity, phase_at, tick_count
from .errors import CyclochronError
from .kinematics import (Boost, FourMomentum, FourPeriodicity, boost_momentum, compton_period, four_momentum,
                         periodicity_of, phase_harmony_residual, photon_momentum)
from .modulation import (InteractionEvent, PositionedClock, apply_events, causal_order, detect_regime_changes,
                         regime_classify)
from .quantum import (CompactPropagatorConfig, harmonic_spectrum, mode_sum_propagator, phase_density_sample,
                      winding_sum_propagator)
from .relational_time import Fingerprint, classify, decode_time, distinguishability_gap, fingerprint_at, recurrence_time

__version__ = "0.1.0"
