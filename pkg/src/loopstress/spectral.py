"""Amplitude spectra and frequency-domain test metrics.

Everything here works on single-sided amplitude spectra of real, periodic,
bin-aligned series (the renderer in :mod:`loopstress.signals` guarantees the
alignment).  Three metrics summarise a closed-loop run:

* ``fa_map`` -- the frequency/amplitude pairs of the reference components
  that carry meaningful energy (above a fraction ``rho`` of the strongest
  component).
* ``degree_of_nonlinearity`` (dnl) -- how much energy the loop created at
  frequencies *absent* from the reference, relative to the strongest
  reference component.  A linear time-invariant loop in periodic steady
  state scores ~0; values near 1 mean the response is dominated by new
  frequencies.
* ``dof_profile`` (degree of filtering) -- per relevant component,
  ``1 - |Y(f)| / |R(f)|``: 0 is perfect tracking, 1 is complete filtering,
  negative values are amplification.  Only meaningful when the loop behaved
  linearly (low dnl).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Spectrum",
    "ComponentSet",
    "Trace",
    "dft_amplitude",
    "fa_map",
    "degree_of_nonlinearity",
    "dof_profile",
]


@dataclass(frozen=True)
class Spectrum:
    """Single-sided amplitude spectrum: ``amplitudes[k]`` at ``frequencies[k]``."""

    frequencies: np.ndarray
    amplitudes: np.ndarray


@dataclass(frozen=True)
class ComponentSet:
    """Relevant reference components: a frequency -> amplitude map plus ``rho``."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    rho: float
    bin_indices: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.frequencies)

    def as_dict(self) -> dict[float, float]:
        return {float(f): float(a) for f, a in zip(self.frequencies, self.amplitudes)}


@dataclass(frozen=True)
class Trace:
    """Reference and measured output of one closed-loop run, same sampling."""

    reference: np.ndarray
    output: np.ndarray
    sample_interval: float

    def __post_init__(self):
        ref = np.asarray(self.reference, dtype=float)
        out = np.asarray(self.output, dtype=float)
        object.__setattr__(self, "reference", ref)
        object.__setattr__(self, "output", out)
        if ref.ndim != 1 or out.ndim != 1 or len(ref) != len(out):
            raise ValueError("reference and output must be 1-D and equally long")
        if len(ref) < 2:
            raise ValueError("trace must contain at least two samples")
        if self.sample_interval <= 0.0:
            raise ValueError("sample_interval must be positive")
        if not (np.all(np.isfinite(ref)) and np.all(np.isfinite(out))):
            raise ValueError("trace contains non-finite samples")


def dft_amplitude(samples: np.ndarray, sample_interval: float) -> Spectrum:
    """Single-sided amplitude spectrum of a real series.

    Scaling is chosen so amplitudes read in the units of the signal: a pure
    bin-aligned sinusoid of amplitude ``a`` produces a single component of
    amplitude ``a``, and a constant series ``c`` produces ``c`` at 0 Hz.
    Interior bins are scaled ``2/N``; the 0 Hz bin and (for even ``N``) the
    Nyquist bin are scaled ``1/N``.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("need a 1-D series with at least two samples")
    if sample_interval <= 0.0:
        raise ValueError("sample_interval must be positive")
    n = len(x)
    amps = np.abs(np.fft.rfft(x)) / n
    amps[1:] *= 2.0
    if n % 2 == 0:
        amps[-1] /= 2.0  # Nyquist bin has no mirror image
    freqs = np.fft.rfftfreq(n, d=sample_interval)
    return Spectrum(frequencies=freqs, amplitudes=amps)


def fa_map(samples: np.ndarray, sample_interval: float, rho: float = 0.1) -> ComponentSet:
    """Return the components whose amplitude exceeds ``rho`` times the maximum.

    The comparison is strict, so with ``0 < rho < 1`` the largest component is
    always a member.  An all-zero series has no meaningful components and is
    rejected.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie strictly between 0 and 1")
    spec = dft_amplitude(samples, sample_interval)
    peak = float(spec.amplitudes.max())
    if peak == 0.0:
        raise ValueError("all-zero series has no components above threshold")
    keep = spec.amplitudes > rho * peak
    idx = np.flatnonzero(keep)
    return ComponentSet(
        frequencies=spec.frequencies[idx],
        amplitudes=spec.amplitudes[idx],
        rho=rho,
        bin_indices=idx,
    )


def degree_of_nonlinearity(
    trace: Trace,
    rho: float = 0.1,
    *,
    include_mean_in_scale: bool = True,
) -> float:
    """Energy the loop created at frequencies absent from the reference.

    Computed as the largest output amplitude over the DFT bins *not* in the
    reference component set, divided by the largest reference amplitude.
    Rendering the reference with several repeated periods inserts extra bins
    between the reference harmonics, which is what makes spectrum broadening
    (dropped periodicity, subharmonics, intermodulation) observable.

    ``include_mean_in_scale=False`` excludes the 0 Hz bin from the
    denominator's maximum (the numerator's bin set is unaffected).
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie strictly between 0 and 1")
    ref_spec = dft_amplitude(trace.reference, trace.sample_interval)
    out_spec = dft_amplitude(trace.output, trace.sample_interval)
    ra = ref_spec.amplitudes
    peak = float(ra.max())
    if peak == 0.0:
        raise ValueError("all-zero reference has no components above threshold")
    new_bins = ~(ra > rho * peak)
    scale = peak if include_mean_in_scale else float(ra[1:].max())
    if scale == 0.0:
        raise ValueError("reference has no non-mean component to scale against")
    if not np.any(new_bins):
        return 0.0
    return float(out_spec.amplitudes[new_bins].max()) / scale


def dof_profile(trace: Trace, rho: float = 0.1) -> dict[float, float]:
    """Degree of filtering ``1 - |Y(f)|/|R(f)|`` per relevant reference component.

    Returns a frequency -> dof map over exactly the components of
    ``fa_map(reference)``.  Values: 0 for perfect tracking, 1 for complete
    filtering, negative for amplification.  The caller is responsible for
    only interpreting the profile when the run was linear (low dnl).
    """
    comps = fa_map(trace.reference, trace.sample_interval, rho)
    out_spec = dft_amplitude(trace.output, trace.sample_interval)
    out_amps = out_spec.amplitudes[comps.bin_indices]
    dof = 1.0 - out_amps / comps.amplitudes
    return {float(f): float(d) for f, d in zip(comps.frequencies, dof)}
