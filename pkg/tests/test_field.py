import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import analytic_spectrum
from thzorient.field import (
    PreconditionError,
    PulseShape,
    fourier_magnitude,
    overlap_report,
    pulse_area,
    spectrum,
    waveform,
)
from thzorient.thermal import build_ensemble
from thzorient.units import DomainError


def test_waveform_against_mpmath():
    p = PulseShape(4.0, 2.0, 3.0)
    mpmath.mp.dps = 30
    t = mpmath.mpf("0.375")
    ref = 4 * mpmath.cos(mpmath.pi * t / 3) ** 2 * mpmath.sin(2 * mpmath.pi * 2 * t)
    assert waveform(p, 0.375) == pytest.approx(float(ref), abs=1e-12)


def test_waveform_zero_outside_support():
    p = PulseShape(4.0, 2.0, 3.0)
    assert np.all(waveform(p, np.array([-1.5000001, 1.6, -7.0, 40.0])) == 0.0)
    assert waveform(p, 0.0) == 0.0


pulses = st.builds(
    PulseShape,
    A=st.floats(0.0, 200.0),
    F=st.floats(0.05, 20.0),
    D=st.floats(0.01, 30.0),
)


@settings(max_examples=100, deadline=None)
@given(p=pulses, u=st.floats(0.0, 1.0))
def test_waveform_is_odd(p, u):
    t = u * p.D / 2
    assert waveform(p, -t) == -waveform(p, t)


@settings(max_examples=50, deadline=None)
@given(p=pulses)
def test_area_vanishes(p):
    assert abs(pulse_area(p)) <= 1e-12 * max(p.A, 1.0)


def test_rectified_area_positive():
    assert pulse_area(PulseShape(4.0, 2.0, 3.0), rectified=True) > 0.1


def test_area_precondition():
    with pytest.raises(PreconditionError):
        pulse_area(PulseShape(1.0, 1.0, 1.0), resolution=999)


def test_pulse_domain():
    with pytest.raises(DomainError):
        PulseShape(1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        PulseShape(-1.0, 1.0, 1.0)


@pytest.mark.parametrize("D", [1.0, 2.0, 3.0, 6.0])
def test_spectrum_matches_analytic(D):
    s = spectrum(PulseShape(4.0, 2.0, D))
    ref = analytic_spectrum(4.0, 2.0, D, s.frequencies)
    assert np.max(np.abs(s.magnitudes - ref)) < 1e-8 * ref.max()


def test_direct_transform_matches_analytic():
    nu = np.linspace(0, 6, 37)
    ref = analytic_spectrum(3.0, 1.5, 2.5, nu)
    np.testing.assert_allclose(fourier_magnitude(PulseShape(3.0, 1.5, 2.5), nu), ref, atol=1e-8)


@pytest.mark.parametrize("D", [1.0, 3.0, 6.0])
def test_spectrum_peak_near_carrier(D):
    s = spectrum(PulseShape(4.0, 2.0, D))
    assert abs(s.peak_frequency - 2.0) <= 0.05 + 1 / D


def test_spectrum_has_no_dc():
    s = spectrum(PulseShape(4.0, 2.0, 3.0))
    assert s.frequencies[0] == 0.0
    assert s.magnitudes[0] < 1e-8 * s.magnitudes.max()


def test_shorter_pulse_is_broader():
    assert spectrum(PulseShape(4, 2, 1)).fwhm() > spectrum(PulseShape(4, 2, 3)).fwhm()


def test_bandwidth_time_product_constant():
    products = [spectrum(PulseShape(4, 2, D)).fwhm() * D for D in (1, 2, 3, 6)]
    assert max(products) / min(products) < 1.05


def test_spectrum_covers_sidebands_and_resolution():
    p = PulseShape(4.0, 2.0, 3.0)
    s = spectrum(p)
    assert s.frequencies[-1] >= p.F + 10 / p.D
    assert s.resolution <= 1 / (20 * p.D)


def test_spectrum_preconditions():
    p = PulseShape(4.0, 2.0, 3.0)
    with pytest.raises(PreconditionError):
        spectrum(p, resolution=1 / (10 * p.D))
    with pytest.raises(PreconditionError):
        spectrum(p, samples_per_period=16)


def test_overlap_populations_cold():
    rep = overlap_report(PulseShape(4, 2.5, 3), build_ensemble(1e-6), 10)
    P = [line.P for line in rep.lines]
    assert P[0] == pytest.approx(0.5, abs=1e-12)
    assert max(P[1:]) < 1e-12
    assert rep.lines[0].omega == 2.0


def test_overlap_line_magnitudes_are_transform_values():
    p = PulseShape(4, 2.5, 3)
    rep = overlap_report(p, build_ensemble(50.0), 12)
    om = np.array([line.omega for line in rep.lines])
    ref = analytic_spectrum(4, 2.5, 3, om / (2 * math.pi))
    np.testing.assert_allclose([line.magnitude for line in rep.lines], ref, atol=1e-8)


def test_overlap_score_grows_with_temperature():
    p = PulseShape(4, 2.5, 3)
    cold = overlap_report(p, build_ensemble(1e-6), 30).score
    warm = overlap_report(p, build_ensemble(50.0), 30).score
    assert cold / warm < 1e-3
