import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chi2

from cyclochron.cycles import CycleClock, clock_from_particle
from cyclochron.errors import AliasingError, DomainError, UnsupportedError
from cyclochron.kinematics import Boost, compton_period
from cyclochron.quantum import (CompactPropagatorConfig, harmonic_spectrum, mode_sum, mode_sum_propagator,
                                phase_density_sample, winding_sum, winding_sum_propagator)


def grid(L, n=32):
    return [L * i / n for i in range(n)]


# -- spectrum ---------------------------------------------------------------

def test_spectrum_electron(electron):
    lines = harmonic_spectrum(electron, n_max=3)
    assert [l.n for l in lines] == [1, 2, 3]
    assert lines[0].energy == pytest.approx(510998.95, rel=1e-14)
    assert lines[2].energy == pytest.approx(3 * 510998.95, rel=1e-14)


def test_spectrum_boosted(electron):
    lines = harmonic_spectrum(electron, Boost.from_gamma(2.0), n_max=2)
    assert lines[1].energy == pytest.approx(4 * 510998.95, rel=1e-12)


def test_spectrum_linear(muon):
    e = [l.energy for l in harmonic_spectrum(muon, n_max=50)]
    assert np.allclose(np.diff(e), e[0], rtol=1e-12)


def test_spectrum_errors(photon, electron):
    with pytest.raises(UnsupportedError):
        harmonic_spectrum(photon)
    with pytest.raises(DomainError):
        harmonic_spectrum(electron, n_max=0)


# -- propagator ---------------------------------------------------------------

@pytest.mark.parametrize("beta", [0.05, 0.1, 1.0])
def test_winding_equals_mode_sum(beta):
    cfg = CompactPropagatorConfig(1.0, 1.0, beta)
    worst = 0.0
    for x in grid(1.0):
        for x0 in grid(1.0):
            w, m = winding_sum_propagator(cfg, x, x0), mode_sum_propagator(cfg, x, x0)
            worst = max(worst, abs(w - m) / abs(m))
    assert worst <= 1e-10


def test_theta_function_closed_form():
    # at x = x0 with L = 1, m = 1, beta = 1 / (2 pi): both sums are sum_n exp(-pi n^2) = 1.0864348112133...
    cfg = CompactPropagatorConfig(1.0, 1.0, 1 / (2 * math.pi))
    assert mode_sum_propagator(cfg, 0.0, 0.0) == pytest.approx(1.0864348112133080, rel=1e-15)
    assert winding_sum_propagator(cfg, 0.0, 0.0) == pytest.approx(1.0864348112133080, rel=1e-15)


def test_large_beta_limit():
    L = 2.0
    cfg = CompactPropagatorConfig(L, 1.0, 100.0)
    for x in (0.0, 0.7, 1.9):
        assert winding_sum_propagator(cfg, x, 0.3) == pytest.approx(1 / L, abs=1e-6)


def test_symmetry():
    cfg = CompactPropagatorConfig(1.5, 0.7, 0.2)
    for x, x0 in [(0.1, 1.2), (0.0, 0.75), (1.4, 0.3)]:
        assert winding_sum_propagator(cfg, x, x0) == pytest.approx(winding_sum_propagator(cfg, x0, x), rel=1e-14)
        assert mode_sum_propagator(cfg, x, x0) == pytest.approx(mode_sum_propagator(cfg, x0, x), rel=1e-14)


def test_normalisation():
    # periodic trapezoid rule is spectrally accurate for this smooth integrand
    cfg = CompactPropagatorConfig(1.0, 1.0, 0.1)
    n = 256
    xs = [i / n for i in range(n)]
    total = math.fsum(winding_sum_propagator(cfg, x, 0.25) for x in xs) / n
    assert total == pytest.approx(1.0, abs=1e-10)


def test_semigroup():
    L, m, n = 1.0, 1.0, 256
    b1, b2 = 0.07, 0.11
    c1, c2 = CompactPropagatorConfig(L, m, b1), CompactPropagatorConfig(L, m, b2)
    c12 = CompactPropagatorConfig(L, m, b1 + b2)
    xs = [L * i / n for i in range(n)]
    x, x0 = 0.3, 0.8
    conv = math.fsum(winding_sum_propagator(c2, x, y) * winding_sum_propagator(c1, y, x0) for y in xs) * L / n
    assert conv == pytest.approx(winding_sum_propagator(c12, x, x0), rel=1e-8)


def test_truncation_is_sound():
    tight = CompactPropagatorConfig(1.0, 1.0, 0.3, truncation_tolerance=1e-13)
    loose = CompactPropagatorConfig(1.0, 1.0, 0.3, truncation_tolerance=1e-6)
    for x in (0.0, 0.25, 0.5):
        ref = mode_sum(tight, x, 0.0).value
        approx = mode_sum(loose, x, 0.0)
        assert abs(approx.value - ref) <= 1e-6 * sum(math.exp(-0.3 * (2 * math.pi * q) ** 2 / 2) for q in range(-50, 51))
        assert approx.terms <= mode_sum(tight, x, 0.0).terms
        assert winding_sum(loose, x, 0.0).value == pytest.approx(winding_sum(tight, x, 0.0).value, rel=1e-6)


def test_mode_sum_not_fooled_by_cosine_zeros():
    # x - x0 = L / 4 zeroes every odd mode; truncation must still go on
    cfg = CompactPropagatorConfig(1.0, 1.0, 0.01)
    assert mode_sum_propagator(cfg, 0.25, 0.0) == pytest.approx(winding_sum_propagator(cfg, 0.25, 0.0), rel=1e-12)


def test_propagator_validation():
    with pytest.raises(DomainError):
        CompactPropagatorConfig(0.0)
    with pytest.raises(DomainError):
        CompactPropagatorConfig(truncation_tolerance=1e-16)
    with pytest.raises(DomainError):
        winding_sum_propagator(CompactPropagatorConfig(), 1.0, 0.0)


# -- phase density ----------------------------------------------------------

def chi_square(counts, n):
    expected = n / len(counts)
    return float(np.sum((counts - expected) ** 2) / expected)


def test_histogram_mass_is_exactly_one(electron):
    h = phase_density_sample(clock_from_particle(electron), 1e-15, 10**5)
    assert h.total_mass == 1
    assert isinstance(h.masses[0], Fraction)
    assert int(h.counts.sum()) == 10**5


@pytest.mark.parametrize("seed", range(5))
def test_uniform_density(electron, seed):
    h = phase_density_sample(clock_from_particle(electron), 1e-15, 10**5, seed=seed)
    assert chi_square(h.counts, h.n_samples) < chi2.ppf(0.95, 49)
    # about 2000 counts per bin: 10 % is a 4.5 sigma band
    assert np.allclose(h.density, 1.0, atol=0.1)


def test_density_deterministic(electron):
    c = clock_from_particle(electron)
    a = phase_density_sample(c, 1e-15, 10**4, seed=7)
    b = phase_density_sample(c, 1e-15, 10**4, seed=7)
    assert np.array_equal(a.counts, b.counts)


def test_density_aliasing_errors():
    c = CycleClock(1.0)
    with pytest.raises(AliasingError):
        phase_density_sample(c, 999.0, 10**4)
    with pytest.raises(AliasingError):
        phase_density_sample(c, 1000.5, 10**4)  # 2 * step / period is an integer
    with pytest.raises(DomainError):
        phase_density_sample(c, 1000 * math.sqrt(2), 10**3)
