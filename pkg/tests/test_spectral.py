"""Amplitude spectra, frequency-component maps, and nonlinearity metrics."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopstress.signals import ShapeKind, TestCase, render_reference
from loopstress.spectral import (
    ComponentSet,
    Spectrum,
    Trace,
    degree_of_nonlinearity,
    dft_amplitude,
    dof_profile,
    fa_map,
)

from conftest import brute_force_spectrum

random_signals = st.integers(min_value=2, max_value=512).flatmap(
    lambda n: st.lists(
        st.floats(min_value=-100.0, max_value=100.0, allow_nan=False),
        min_size=n,
        max_size=n,
    )
)


def sine_trace(amp=2.0, periods=3, dt=0.001):
    case = TestCase(
        shape=ShapeKind.SINE, amp_gain=amp, time_gain=1.0, periods=periods, sample_interval=dt
    )
    return render_reference(case)


# ---------------------------------------------------------------------------
# dft_amplitude
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [10, 11, 50, 51])
def test_constant_series_concentrates_at_zero_frequency(n):
    spec = dft_amplitude(np.full(n, 3.0), 0.01)
    assert spec.amplitudes[0] == pytest.approx(3.0, abs=1e-12)
    assert np.all(spec.amplitudes[1:] < 1e-12)
    assert spec.frequencies[0] == 0.0


def test_pure_tone_recovers_unit_amplitude():
    t = np.arange(200) * 0.01
    spec = dft_amplitude(np.sin(2.0 * np.pi * 5.0 * t), 0.01)
    idx = int(np.argmin(np.abs(spec.frequencies - 5.0)))
    assert spec.frequencies[idx] == pytest.approx(5.0)
    assert spec.amplitudes[idx] == pytest.approx(1.0, abs=1e-9)
    others = np.delete(spec.amplitudes, idx)
    assert np.all(others < 1e-9)


def test_frequency_axis_spacing():
    spec = dft_amplitude(np.ones(100), 0.02)
    assert spec.frequencies.size == 51
    np.testing.assert_allclose(np.diff(spec.frequencies), 1.0 / (100 * 0.02))


def test_square_wave_odd_harmonics():
    case = TestCase(
        shape=ShapeKind.SQUARE, amp_gain=1.0, time_gain=1.0, periods=1, sample_interval=0.001
    )
    spec = dft_amplitude(render_reference(case), 0.001)

    def amp_at(f):
        return spec.amplitudes[int(np.argmin(np.abs(spec.frequencies - f)))]

    assert amp_at(0.0) == pytest.approx(0.5, abs=1e-9)
    assert amp_at(1.0) == pytest.approx(2.0 / math.pi, rel=1e-2)
    assert amp_at(3.0) == pytest.approx(2.0 / (3.0 * math.pi), rel=1e-2)
    assert amp_at(2.0) < 1e-9  # even harmonics vanish


@given(samples=random_signals)
@settings(max_examples=40, deadline=None)
def test_matches_brute_force_oracle(samples):
    x = np.asarray(samples)
    spec = dft_amplitude(x, 0.001)
    freqs, amps = brute_force_spectrum(x, 0.001)
    np.testing.assert_allclose(spec.frequencies, freqs, rtol=0.0, atol=1e-9)
    np.testing.assert_allclose(spec.amplitudes, amps, rtol=0.0, atol=1e-9)


@given(samples=random_signals)
@settings(max_examples=40, deadline=None)
def test_parseval_energy_identity(samples):
    # With this normalisation, sum(x^2) = N * (a_0^2 + a_nyq^2 + sum interior a_k^2 / 2).
    x = np.asarray(samples)
    n = x.size
    spec = dft_amplitude(x, 0.001)
    a = spec.amplitudes
    energy = a[0] ** 2
    if n % 2 == 0:
        energy += a[-1] ** 2
        energy += np.sum(a[1:-1] ** 2) / 2.0
    else:
        energy += np.sum(a[1:] ** 2) / 2.0
    lhs = float(np.sum(x**2))
    assert lhs == pytest.approx(n * energy, rel=1e-9, abs=1e-9)


@given(samples=random_signals, c=st.floats(min_value=0.01, max_value=100.0, allow_nan=False))
@settings(max_examples=40, deadline=None)
def test_amplitude_spectrum_is_homogeneous(samples, c):
    x = np.asarray(samples)
    base = dft_amplitude(x, 0.001).amplitudes
    scaled = dft_amplitude(c * x, 0.001).amplitudes
    np.testing.assert_allclose(scaled, c * base, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize(
    "samples, dt",
    [
        (np.array([]), 0.001),
        (np.array([1.0]), 0.001),
        (np.ones(10), 0.0),
        (np.ones(10), -0.1),
        (np.ones((5, 2)), 0.001),
    ],
)
def test_dft_amplitude_rejects_degenerate_input(samples, dt):
    with pytest.raises(ValueError):
        dft_amplitude(samples, dt)


# ---------------------------------------------------------------------------
# fa_map
# ---------------------------------------------------------------------------


def test_fa_map_pure_sinusoid_single_component():
    t = np.arange(1000) * 0.001
    comps = fa_map(np.sin(2.0 * np.pi * 5.0 * t), 0.001)
    assert len(comps) == 1
    assert comps.frequencies[0] == pytest.approx(5.0)
    assert comps.amplitudes[0] == pytest.approx(1.0, abs=1e-9)


def test_fa_map_square_reference_components():
    case = TestCase(
        shape=ShapeKind.SQUARE, amp_gain=1.0, time_gain=1.0, periods=1, sample_interval=0.001
    )
    comps = fa_map(render_reference(case), 0.001)
    # Mean plus odd harmonics above one tenth of the strongest line.
    np.testing.assert_allclose(comps.frequencies, [0.0, 1.0, 3.0, 5.0, 7.0, 9.0])
    assert comps.amplitudes[0] == pytest.approx(0.5, abs=1e-9)
    assert comps.amplitudes[1] == pytest.approx(2.0 / math.pi, rel=1e-2)


def test_fa_map_threshold_is_strict():
    # rfft([1, 0, 0, 0]) == [1, 1, 1] exactly, giving amplitudes
    # [0.25, 0.5, 0.25].  With rho = 0.5 the cut sits exactly at 0.25 and
    # the strictly-greater rule must drop the mean and Nyquist bins.
    comps = fa_map(np.array([1.0, 0.0, 0.0, 0.0]), 1.0, rho=0.5)
    assert list(comps.frequencies) == [0.25]
    assert comps.amplitudes[0] == 0.5
    assert list(comps.bin_indices) == [1]


def test_fa_map_largest_line_always_included():
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.normal(size=64)
        comps = fa_map(x, 0.001, rho=0.3)
        spec = dft_amplitude(x, 0.001)
        assert float(spec.amplitudes.max()) in set(comps.amplitudes)


@given(
    samples=random_signals,
    rho_pair=st.tuples(
        st.floats(min_value=0.01, max_value=0.98),
        st.floats(min_value=0.011, max_value=0.99),
    ),
)
@settings(max_examples=30, deadline=None)
def test_fa_map_component_count_shrinks_as_rho_grows(samples, rho_pair):
    x = np.asarray(samples)
    if float(np.max(np.abs(dft_amplitude(x, 0.001).amplitudes))) == 0.0:
        return  # all-zero signal is rejected; covered elsewhere
    lo, hi = sorted(rho_pair)
    assert len(fa_map(x, 0.001, rho=hi)) <= len(fa_map(x, 0.001, rho=lo))


def test_fa_map_rejects_all_zero_signal():
    with pytest.raises(ValueError):
        fa_map(np.zeros(16), 0.001)


@pytest.mark.parametrize("rho", [0.0, 1.0, -0.5, 1.5])
def test_fa_map_rejects_rho_outside_open_interval(rho):
    with pytest.raises(ValueError):
        fa_map(np.ones(8), 0.001, rho=rho)


def test_fa_map_as_dict_round_trip():
    comps = fa_map(np.array([1.0, 0.0, 0.0, 0.0]), 1.0, rho=0.5)
    d = comps.as_dict()
    assert d == {0.25: 0.5}


def test_fa_map_invariant_under_extra_repetitions():
    fast = TestCase(
        shape=ShapeKind.TRIANGLE, amp_gain=2.0, time_gain=1.0, periods=1, sample_interval=0.001
    )
    slow = TestCase(
        shape=ShapeKind.TRIANGLE, amp_gain=2.0, time_gain=1.0, periods=5, sample_interval=0.001
    )
    one = fa_map(render_reference(fast), 0.001)
    five = fa_map(render_reference(slow), 0.001)
    np.testing.assert_allclose(five.frequencies, one.frequencies, atol=1e-12)
    np.testing.assert_allclose(five.amplitudes, one.amplitudes, atol=1e-9)


def test_repetitions_expose_subharmonic_content():
    # A disturbance at half the reference frequency is invisible after one
    # period (no bin exists for it) but shows up once repetitions insert
    # intermediate bins.
    dt = 0.001
    case1 = TestCase(shape=ShapeKind.SINE, amp_gain=2.0, time_gain=1.0, periods=1, sample_interval=dt)
    case4 = TestCase(shape=ShapeKind.SINE, amp_gain=2.0, time_gain=1.0, periods=4, sample_interval=dt)
    r1 = render_reference(case1)
    r4 = render_reference(case4)
    sub1 = 0.5 * np.sin(2.0 * np.pi * 0.5 * np.arange(r1.size) * dt)
    sub4 = 0.5 * np.sin(2.0 * np.pi * 0.5 * np.arange(r4.size) * dt)
    dnl_1 = degree_of_nonlinearity(Trace(reference=r1, output=r1 + sub1, sample_interval=dt))
    dnl_4 = degree_of_nonlinearity(Trace(reference=r4, output=r4 + sub4, sample_interval=dt))
    # The rendered sine carries a unit oscillating line (plus a unit mean),
    # so once repetitions make the half-frequency tone an exact bin the full
    # ratio 0.5 / 1.0 is recovered; over one period it only leaks.
    assert dnl_4 == pytest.approx(0.5, abs=1e-9)
    assert dnl_1 < dnl_4


# ---------------------------------------------------------------------------
# Trace / degree_of_nonlinearity
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "ref, out",
    [
        (np.ones(3), np.ones(4)),
        (np.ones(1), np.ones(1)),
        (np.ones((2, 2)), np.ones((2, 2))),
        (np.array([1.0, math.inf]), np.array([1.0, 1.0])),
        (np.array([1.0, 1.0]), np.array([math.nan, 1.0])),
    ],
)
def test_trace_rejects_malformed_pairs(ref, out):
    with pytest.raises(ValueError):
        Trace(reference=ref, output=out, sample_interval=0.001)


def test_dnl_zero_for_perfect_tracking_of_sine():
    r = sine_trace()
    dnl = degree_of_nonlinearity(Trace(reference=r, output=r.copy(), sample_interval=0.001))
    assert dnl < 1e-9


def test_dnl_recovers_injected_tone_ratio():
    dt = 0.001
    t = np.arange(3000) * dt
    r = 3.0 * np.sin(2.0 * np.pi * 1.0 * t)
    y = r + 0.2 * 3.0 * np.sin(2.0 * np.pi * 7.0 * t)
    dnl = degree_of_nonlinearity(Trace(reference=r, output=y, sample_interval=dt))
    assert dnl == pytest.approx(0.2, abs=1e-9)


def test_dnl_scale_reference_switch():
    # With the mean included, a large offset dominates the scale; without
    # it, the oscillatory line sets the scale.
    dt = 0.001
    t = np.arange(2000) * dt
    r = 5.0 + 1.0 * np.sin(2.0 * np.pi * 1.0 * t)
    y = r + 0.3 * np.sin(2.0 * np.pi * 9.0 * t)
    trace = Trace(reference=r, output=y, sample_interval=dt)
    with_mean = degree_of_nonlinearity(trace)
    without_mean = degree_of_nonlinearity(trace, include_mean_in_scale=False)
    assert with_mean == pytest.approx(0.3 / 5.0, abs=1e-9)
    assert without_mean == pytest.approx(0.3 / 1.0, abs=1e-9)


def test_dnl_rejects_zero_reference():
    z = np.zeros(16)
    with pytest.raises(ValueError):
        degree_of_nonlinearity(Trace(reference=z, output=np.ones(16), sample_interval=0.001))


@given(
    c=st.floats(min_value=0.01, max_value=100.0, allow_nan=False),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
@settings(max_examples=40, deadline=None)
def test_dnl_invariant_under_joint_scaling(c, seed):
    rng = np.random.default_rng(seed)
    r = sine_trace()
    y = r + rng.normal(scale=0.2, size=r.size)
    base = degree_of_nonlinearity(Trace(reference=r, output=y, sample_interval=0.001))
    scaled = degree_of_nonlinearity(Trace(reference=c * r, output=c * y, sample_interval=0.001))
    assert abs(scaled - base) <= 1e-12


# ---------------------------------------------------------------------------
# dof_profile
# ---------------------------------------------------------------------------


def test_dof_zero_when_output_equals_reference():
    r = sine_trace()
    prof = dof_profile(Trace(reference=r, output=r.copy(), sample_interval=0.001))
    assert prof  # at least the fundamental
    assert all(v == 0.0 for v in prof.values())


def test_dof_one_when_output_is_zero():
    r = sine_trace()
    prof = dof_profile(Trace(reference=r, output=np.zeros_like(r), sample_interval=0.001))
    assert all(v == 1.0 for v in prof.values())


def test_dof_negative_for_amplified_output():
    r = sine_trace()
    prof = dof_profile(Trace(reference=r, output=2.0 * r, sample_interval=0.001))
    assert all(v == -1.0 for v in prof.values())


def test_dof_keys_match_reference_component_frequencies():
    r = sine_trace()
    prof = dof_profile(Trace(reference=r, output=0.5 * r, sample_interval=0.001))
    comps = fa_map(r, 0.001)
    assert sorted(prof.keys()) == sorted(comps.frequencies)


def test_dof_lookup_of_absent_frequency_raises_key_error():
    r = sine_trace()
    prof = dof_profile(Trace(reference=r, output=r, sample_interval=0.001))
    with pytest.raises(KeyError):
        prof[123.456]


@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_dof_never_exceeds_one(seed):
    rng = np.random.default_rng(seed)
    r = sine_trace()
    y = rng.normal(scale=2.0, size=r.size)
    prof = dof_profile(Trace(reference=r, output=y, sample_interval=0.001))
    assert all(v <= 1.0 for v in prof.values())


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------


def test_spectrum_exposes_parallel_arrays():
    spec = dft_amplitude(np.ones(8), 0.5)
    assert isinstance(spec, Spectrum)
    assert spec.frequencies.shape == spec.amplitudes.shape


def test_component_set_len_and_dict_agree():
    comps = fa_map(np.array([1.0, 0.0, 0.0, 0.0]), 1.0, rho=0.4)
    assert isinstance(comps, ComponentSet)
    assert len(comps) == len(comps.as_dict())
