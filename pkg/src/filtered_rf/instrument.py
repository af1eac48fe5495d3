"""Detector and measurement-apparatus models.

Gaussian instrument-response convolution for correlation traces (timing
blur) and sampled spectra (spectral blur), plus the registry of the real
spectral filters used on the optical table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filtercorr import CorrelationTrace

__all__ = [
    "GaussianIRF",
    "FilterPreset",
    "FILTER_PRESETS",
    "filter_preset",
    "irf_convolve",
    "spectral_irf_convolve",
    "etalon_bandwidth",
]

# Kernel support, in standard deviations; < 1e-6 of the mass lies outside.
_KERNEL_SIGMAS = 5.0
# The sampling grid must resolve the kernel: spacing < fwhm / this.
_MIN_SAMPLES_PER_FWHM = 8.0


@dataclass(frozen=True)
class GaussianIRF:
    """Gaussian response of FWHM ``fwhm`` (time units for detectors,
    energy units for spectral instruments)."""

    fwhm: float

    def __post_init__(self):
        if not math.isfinite(self.fwhm) or self.fwhm <= 0.0:
            raise ValueError(f"IRF fwhm must be finite and > 0, got {self.fwhm}")

    @property
    def sigma(self):
        return self.fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class FilterPreset:
    name: str
    fwhm_ueV: float
    shape: str = "lorentzian"


# Bandwidths of the spectral filters on the experiment, plus short aliases.
FILTER_PRESETS = (
    FilterPreset("Free-space Fabry-Perot", 0.25),
    FilterPreset("Etalon - 1.6mm fused silica", 5.8),
    FilterPreset("Fibre Fabry-Perot", 17.0),
    FilterPreset("1200 l mm-1 grating spectrometer", 97.0),
    FilterPreset("4f tunable filter (narrow)", 454.0),
    FilterPreset("4f tunable filter (broad)", 3050.0),
)

_ALIASES = {
    "free-space fp": "Free-space Fabry-Perot",
    "etalon": "Etalon - 1.6mm fused silica",
    "fibre fp": "Fibre Fabry-Perot",
    "spectrometer": "1200 l mm-1 grating spectrometer",
    "4f narrow": "4f tunable filter (narrow)",
    "4f broad": "4f tunable filter (broad)",
}


def _normalize(name):
    return " ".join(name.lower().split())


def filter_preset(name):
    """Look up a filter preset by name or alias, case-insensitively."""
    wanted = _normalize(name)
    wanted = _normalize(_ALIASES.get(wanted, wanted))
    for preset in FILTER_PRESETS:
        if _normalize(preset.name) == wanted:
            return preset
    known = ", ".join(p.name for p in FILTER_PRESETS)
    raise KeyError(f"unknown filter preset {name!r}; known presets: {known}")


def _uniform_spacing(grid, what):
    grid = np.asarray(grid, dtype=float)
    if grid.size < 3:
        raise ValueError(f"{what} needs at least 3 points")
    steps = np.diff(grid)
    if not np.allclose(steps, steps[0], rtol=1e-8, atol=0.0):
        raise ValueError(f"{what} must be uniform")
    return float(steps[0])


def _kernel(fwhm, dt):
    half = int(math.ceil(_KERNEL_SIGMAS * (fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))) / dt))
    x = np.arange(-half, half + 1) * dt
    k = np.exp(-4.0 * math.log(2.0) * (x / fwhm) ** 2)
    return k / k.sum()


def irf_convolve(trace, irf):
    """Convolve a g2 trace with the detector response.

    The trace is extended to negative delay by even symmetry, padded at
    both ends with its asymptotic value, convolved with the truncated and
    renormalized Gaussian kernel, and the nonnegative-delay part returned.
    """
    dt = _uniform_spacing(trace.taus, "tau grid")
    if trace.taus[0] != 0.0:
        raise ValueError("tau grid must start at 0 for the even extension")
    if dt >= irf.fwhm / _MIN_SAMPLES_PER_FWHM:
        raise ValueError(
            f"tau grid spacing {dt:.3g} too coarse for IRF fwhm {irf.fwhm:.3g}; "
            f"need spacing < fwhm/{_MIN_SAMPLES_PER_FWHM:.0f}"
        )
    kernel = _kernel(irf.fwhm, dt)
    half = kernel.size // 2

    extended = np.concatenate([trace.values[:0:-1], trace.values])
    tail = trace.values[-1]
    padded = np.concatenate([np.full(half, tail), extended, np.full(half, tail)])
    smeared = np.convolve(padded, kernel, mode="valid")
    out = smeared[trace.values.size - 1 :]

    metadata = dict(trace.metadata)
    metadata.update(irf_applied=True, irf_fwhm=irf.fwhm)
    return CorrelationTrace(taus=trace.taus.copy(), values=out, metadata=metadata)


def spectral_irf_convolve(omegas, values, irf):
    """Gaussian smoothing of a sampled spectrum on a uniform grid."""
    domega = _uniform_spacing(omegas, "omega grid")
    if domega >= irf.fwhm / _MIN_SAMPLES_PER_FWHM:
        raise ValueError(
            f"omega grid spacing {domega:.3g} too coarse for IRF fwhm {irf.fwhm:.3g}; "
            f"need spacing < fwhm/{_MIN_SAMPLES_PER_FWHM:.0f}"
        )
    values = np.asarray(values, dtype=float)
    kernel = _kernel(irf.fwhm, domega)
    half = kernel.size // 2
    padded = np.concatenate([np.full(half, values[0]), values, np.full(half, values[-1])])
    return np.convolve(padded, kernel, mode="valid")


def etalon_bandwidth(fsr, finesse):
    """Bandwidth of a scanning-cavity filter: free spectral range / finesse."""
    if fsr <= 0.0 or finesse <= 0.0:
        raise ValueError(f"fsr and finesse must be > 0, got {fsr}, {finesse}")
    return fsr / finesse
