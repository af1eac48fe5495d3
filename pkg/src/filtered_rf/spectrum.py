"""Emission spectra, coherent/incoherent decomposition, filter transmission.

The spectrum is obtained from the poles of the emitter Liouvillian: each
nonzero eigenvalue lambda_k contributes a (generally complex-residue)
Lorentzian centered at -Im(lambda_k) with half-width -Re(lambda_k), and
the zero mode carries the elastically scattered component at the laser
frequency.  Filter-weighted areas come out in closed form, so component
fractions need no numerical quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmath
from .dynamics import steady_state
from .system import EmitterParams, SystemModel, build_liouvillian

__all__ = [
    "SpectralComponent",
    "SpectrumDecomposition",
    "coherent_fraction",
    "emission_spectrum",
    "lorentzian_transmission",
    "filtered_fractions",
]

COMPONENT_KINDS = ("coherent", "rayleigh", "mollow_red", "mollow_blue", "other")

# Eigenvalues within this fraction of the spectral radius count as the
# stationary (elastic) mode.
_ZERO_MODE_TOL = 1e-9


@dataclass
class SpectralComponent:
    """One spectral line: classification, position, width, and weight.

    weight is the fractional area (real part of the residue over total
    emission); the dispersive part of a complex residue changes the shape
    but integrates to zero, so weights still sum to one.  At moderate drive
    individual pole weights can be slightly negative -- the poles are not
    resolved peaks there and only the classified group sums are physical.
    """

    kind: str
    center: float
    hwhm: float
    weight: float
    residue: complex


@dataclass
class SpectrumDecomposition:
    """Spectral components plus a sampled total spectrum."""

    components: list
    omegas: np.ndarray
    values: np.ndarray
    emitter: EmitterParams

    def weight(self, kind):
        return sum(c.weight for c in self.components if c.kind == kind)


def coherent_fraction(emitter):
    """Fraction of the emission that is elastically scattered: 1/(1 + 2 rabi^2/gamma^2)."""
    return 1.0 / (1.0 + 2.0 * emitter.rabi**2 / emitter.gamma**2)


def _sideband_splitting(emitter):
    """Damped Rabi splitting sqrt(rabi^2 - (gamma/4)^2); None below threshold."""
    arg = emitter.rabi**2 - (emitter.gamma / 4.0) ** 2
    if arg <= 0.0:
        return None
    return math.sqrt(arg)


def _classify(center, splitting):
    if splitting is None or abs(center) < 0.5 * splitting:
        return "rayleigh"
    return "mollow_red" if center < 0.0 else "mollow_blue"


def _pole_components(emitter):
    """Elastic weight, total emission, and incoherent pole data (residue, eigenvalue)."""
    model = SystemModel(emitter)
    L = build_liouvillian(model)
    rho = steady_state(L).rho
    sigma = model.sigma
    total = float(np.real(np.trace(sigma.conj().T @ sigma @ rho)))
    elastic = float(abs(np.trace(sigma @ rho)) ** 2)

    evals, evecs = np.linalg.eig(L)
    weights = np.linalg.solve(evecs, qmath.vec(sigma @ rho))
    probe = qmath.vec(sigma.conj().T.T)  # vec of sigma_dag transposed, for tr[s_dag . X]
    residues = (probe @ evecs) * weights

    scale = float(np.max(np.abs(evals)))
    poles = []
    elastic_residue = 0.0
    for lam, res in zip(evals, residues):
        if abs(lam) <= _ZERO_MODE_TOL * scale:
            elastic_residue += res
        else:
            poles.append((complex(res), complex(lam)))
    # The stationary mode factorizes into <sigma_dag><sigma>.
    if abs(elastic_residue - elastic) > 1e-9 * max(1.0, total):
        raise RuntimeError(
            f"zero-mode residue {elastic_residue:.3e} does not match "
            f"|<sigma>|^2 = {elastic:.3e}"
        )
    return elastic, total, poles


def emission_spectrum(emitter, omegas):
    """Spectrum decomposition and sampled S(omega) on the given grid.

    The incoherent part is the half-range Fourier transform of
    g1(tau) - |<sigma>|^2, evaluated through the Liouvillian poles; the
    coherent part is a Lorentzian of the laser linewidth.  The grid must
    span at least +-max(5 gamma, 2 rabi + 5 gamma).
    """
    omegas = np.asarray(omegas, dtype=float).reshape(-1)
    need = max(5.0 * emitter.gamma, 2.0 * emitter.rabi + 5.0 * emitter.gamma)
    if omegas.size < 2 or omegas.min() > -need or omegas.max() < need:
        raise ValueError(
            f"grid too narrow: need at least +-{need:.3g}, got "
            f"[{omegas.min():.3g}, {omegas.max():.3g}]"
        )
    if emitter.laser_linewidth <= 0.0:
        raise ValueError(
            "sampling the coherent peak requires laser_linewidth > 0 "
            "(the elastic line inherits the laser lineshape)"
        )

    elastic, total, poles = _pole_components(emitter)
    splitting = _sideband_splitting(emitter)

    components = [
        SpectralComponent(
            kind="coherent",
            center=0.0,
            hwhm=emitter.laser_linewidth / 2.0,
            weight=elastic / total,
            residue=complex(elastic),
        )
    ]
    values = _lorentzian(omegas, 0.0, emitter.laser_linewidth / 2.0) * elastic
    for res, lam in poles:
        center = -lam.imag
        hwhm = -lam.real
        components.append(
            SpectralComponent(
                kind=_classify(center, splitting),
                center=center,
                hwhm=hwhm,
                weight=res.real / total,
                residue=res,
            )
        )
        values = values + np.real(res / (-lam - 1j * omegas)) / np.pi
    return SpectrumDecomposition(
        components=components, omegas=omegas, values=values, emitter=emitter
    )


def _lorentzian(x, center, hwhm):
    """Area-normalized Lorentzian."""
    return (hwhm / np.pi) / ((x - center) ** 2 + hwhm**2)


def lorentzian_transmission(line_fwhm, filter_fwhm, offset=0.0):
    """Transmitted fraction of a Lorentzian line through a Lorentzian filter.

    The line has unit area and FWHM line_fwhm, sitting offset away from the
    center of a peak-normalized filter of FWHM filter_fwhm.  The overlap
    integral of two Lorentzians is again a Lorentzian, giving the closed
    form g (a + g) / (offset^2 + (a + g)^2) with half-widths a and g; at
    zero offset this is filter_fwhm / (filter_fwhm + line_fwhm).
    """
    if line_fwhm < 0.0:
        raise ValueError(f"line width must be >= 0, got {line_fwhm}")
    if filter_fwhm <= 0.0:
        raise ValueError(f"filter width must be > 0, got {filter_fwhm}")
    g = filter_fwhm / 2.0
    a = line_fwhm / 2.0
    return g * (a + g) / (offset**2 + (a + g) ** 2)


def filtered_fractions(emitter, filter_fwhm):
    """Fraction of the filtered spectrum carried by each component kind.

    Each component is weighted by its transmission through a Lorentzian
    filter of FWHM filter_fwhm centered on the laser.  Complex residues are
    integrated exactly: the filter-weighted area of a pole (residue c,
    eigenvalue lambda) is (Gamma/2) Re[c / (Gamma/2 - lambda)], which
    reduces to weight x transmission for a real residue.
    """
    if filter_fwhm <= 0.0:
        raise ValueError(f"filter width must be > 0, got {filter_fwhm}")
    elastic, total, poles = _pole_components(emitter)
    splitting = _sideband_splitting(emitter)
    g = filter_fwhm / 2.0

    areas = dict.fromkeys(COMPONENT_KINDS, 0.0)
    areas["coherent"] = elastic * lorentzian_transmission(
        emitter.laser_linewidth, filter_fwhm, 0.0
    )
    for res, lam in poles:
        kind = _classify(-lam.imag, splitting)
        areas[kind] += g * (res / (g - lam)).real
    norm = sum(areas.values())
    return {kind: areas[kind] / norm for kind in COMPONENT_KINDS}
