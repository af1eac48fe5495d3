"""Frequency-filtered second-order correlations via weak auxiliary sensors.

Two damped two-level sensors are attached to the emitter; their decay rate
plays the role of the filter bandwidth, and the normalized cross
coincidence of their populations is the filtered g2.  The defining limit
is vanishing emitter-sensor coupling eta, realized here as a finite-eta
ladder with a halving convergence check.

Numerical conditioning: steady-state sector populations scale as eta^2 per
sensor excitation, which for the smallest protocol couplings would sink
below double precision relative to the unit-trace sector.  All sensor
solves and propagations therefore run in an exactly rescaled basis, each
basis state weighted by the inverse of (eta over the slowest relevant
rate) per sensor excitation: a similarity transform that leaves every
observable identical while keeping all sectors at comparable magnitude,
independent of the overall choice of units.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from . import qmath
from .dynamics import default_tau_grid, steady_state, two_time_correlator, _check_taus
from .system import SensorConfig, SystemModel, build_liouvillian

__all__ = [
    "CorrelationTrace",
    "BackgroundCalibration",
    "EtaConvergence",
    "EtaConvergenceError",
    "BackgroundCalibrationError",
    "SensorPipeline",
    "default_eta",
    "filtered_g2",
    "unfiltered_g2",
    "eta_convergence",
    "calibrate_background",
    "sweep_g2_zero",
]

DEFAULT_ETA_FACTOR = 1e-3
ETA_TOL = 1e-3
MAX_HALVINGS = 4
MAX_BACKGROUND = 0.2
IMAG_TOL = 1e-9

# Filter widths below this fraction of gamma stress the default tau grid.
NARROW_WIDTH_WARN = 1e-4


class EtaConvergenceError(RuntimeError):
    """Sensor coupling ladder failed to converge (back-action too strong)."""


class BackgroundCalibrationError(RuntimeError):
    """No background amplitude reproduces the requested fraction."""


@dataclass
class CorrelationTrace:
    """g2 values on a tau grid plus the parameters that produced them."""

    taus: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.taus = np.asarray(self.taus, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.taus.shape != self.values.shape:
            raise ValueError(
                f"tau grid shape {self.taus.shape} != values shape {self.values.shape}"
            )


@dataclass
class BackgroundCalibration:
    """Solved background amplitude b for a requested background fraction."""

    beta: float
    solved_b: float
    forward_ratio: float


@dataclass
class EtaConvergence:
    """Outcome of the coupling-halving protocol at one parameter point."""

    eta: float
    g2_ref: float
    g2_half: float
    accepted: bool
    halvings: int


def default_eta(emitter, filter_width):
    """Protocol coupling: 1e-3 times the smallest rate in the problem."""
    return DEFAULT_ETA_FACTOR * min(emitter.gamma, filter_width)


def _real_part(values, context):
    values = np.asarray(values)
    scale = max(1.0, float(np.max(np.abs(values.real))) if values.size else 1.0)
    worst = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if worst > IMAG_TOL * scale:
        raise RuntimeError(
            f"{context}: imaginary part {worst:.3e} exceeds {IMAG_TOL:.1e} "
            "(convention bug or numerical breakdown)"
        )
    return values.real.copy()


class SensorPipeline:
    """One assembled two-sensor model at fixed coupling and background.

    Solves the steady state in the sector-rescaled basis at construction;
    zero-delay quantities are then direct sector sums, and full traces reuse
    one propagator of the rescaled generator.
    """

    def __init__(self, emitter, filter_width, filter_center=0.0, eta=None, background_b=0.0):
        if eta is None:
            eta = default_eta(emitter, filter_width)
        sensor = SensorConfig(
            nu=filter_center, width=filter_width, eta=eta, background=background_b
        )
        self.emitter = emitter
        self.eta = float(eta)
        self.background_b = float(background_b)
        self.model = SystemModel(emitter, (sensor, sensor))

        L = build_liouvillian(self.model)
        counts = self.model.sensor_excitations()
        # Sector rescale base: the coupling in units of the slowest relevant
        # rate.  Using the dimensionless ratio (not eta itself) keeps the
        # rescaled generator's conditioning invariant under an overall
        # change of units.
        self._scale_base = self.eta / min(emitter.gamma, filter_width)
        state_scale = self._scale_base ** (-counts.astype(float))
        w = np.kron(state_scale, state_scale)
        self._state_scale = state_scale
        self._inv_scale_sq = (1.0 / state_scale) ** 2
        self.scaled_liouvillian = (w[:, None] * L) * (1.0 / w)[None, :]

        # Uniqueness of the fixed point is structural here (gamma, width,
        # eta all > 0), so skip the SVD nullity classification, which
        # misreads the rescaled generator's non-normality as degeneracy.
        v = qmath.steady_vector(self.scaled_liouvillian, check_degeneracy=False)
        rho_scaled = qmath.unvec(v)
        diag_phys = np.real(np.diag(rho_scaled)) * self._inv_scale_sq
        trace = diag_phys.sum()
        self.rho_scaled = rho_scaled / trace
        diag_phys = diag_phys / trace

        n1_mask = np.real(np.diag(self.model.sensor_number[0])) > 0.5
        n2_mask = np.real(np.diag(self.model.sensor_number[1])) > 0.5
        self.n1_pop = float(diag_phys[n1_mask].sum())
        self.n2_pop = float(diag_phys[n2_mask].sum())
        self._coincidence = float(diag_phys[n1_mask & n2_mask].sum())
        self._n2_mask = n2_mask
        self._propagator = None

    def sensor_populations(self):
        return self.n1_pop, self.n2_pop

    def g2_zero(self):
        """Normalized zero-delay coincidence tr[n1 n2 rho] / (<n1><n2>)."""
        return self._coincidence / (self.n1_pop * self.n2_pop)

    def g2_values(self, taus, jump_sensor=0, probe_sensor=1):
        """Filtered g2 on a tau grid: tr[n_p exp(L tau)(theta_j rho theta_j^dag)]
        over <n_j><n_p>."""
        taus = _check_taus(taus)
        if np.all(taus == 0.0):
            return np.full(taus.shape, self.g2_zero())

        lower = self.model.sensor_lower[jump_sensor]
        # Scaled frame: D theta D^-1 = base * theta, so the jumped state
        # D (theta rho theta^dag) D equals base^2 theta rho_scaled theta^dag.
        x0 = (self._scale_base**2) * (lower @ self.rho_scaled @ lower.conj().T)
        if self._propagator is None:
            self._propagator = qmath.Propagator(self.scaled_liouvillian)
        evolved = self._propagator.apply_grid(qmath.vec(x0), taus)

        probe_mask = np.real(np.diag(self.model.sensor_number[probe_sensor])) > 0.5
        d = self.model.dim
        diag_rows = np.arange(d) * (d + 1)
        weights = np.where(probe_mask, self._inv_scale_sq, 0.0)
        numerator = weights @ evolved[diag_rows, :]
        pops = (self.n1_pop, self.n2_pop)
        values = _real_part(numerator, "filtered g2") / (pops[jump_sensor] * pops[probe_sensor])
        return values


def unfiltered_g2(emitter, taus=None):
    """Bare-emitter g2 via regression on the two-level master equation."""
    if taus is None:
        taus = default_tau_grid(emitter)
    taus = _check_taus(taus)
    model = SystemModel(emitter)
    L = build_liouvillian(model)
    sigma = model.sigma
    number = sigma.conj().T @ sigma
    pop = float(np.real(np.trace(number @ steady_state(L).rho)))
    raw = two_time_correlator(L, sigma, sigma.conj().T, number, taus)
    values = _real_part(raw, "unfiltered g2") / pop**2
    return CorrelationTrace(
        taus=taus,
        values=values,
        metadata={
            "kind": "unfiltered",
            "gamma": emitter.gamma,
            "rabi": emitter.rabi,
            "detuning": emitter.detuning,
            "irf_applied": False,
        },
    )


def _background_only_population(filter_width, filter_center, eta, background_b):
    """Steady sensor population with the emitter decoupled, same drive b*eta.

    A single driven, damped two-level sensor; solved in the same rescaled
    basis for uniformity (the drive scales to strength b, the refill term
    to eta^2 * width).
    """
    lower = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    number = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    H = filter_center * number + background_b * eta * (lower + lower.conj().T)
    from .system import dissipator  # local import to avoid cycle at module load

    L = -1j * (qmath.spre(H) - qmath.spost(H)) + dissipator(lower, filter_width)
    state_scale = np.array([1.0, filter_width / eta])
    w = np.kron(state_scale, state_scale)
    Ls = (w[:, None] * L) * (1.0 / w)[None, :]
    v = qmath.steady_vector(Ls, check_degeneracy=False)
    diag_phys = np.real(np.diag(qmath.unvec(v))) / state_scale**2
    return float(diag_phys[1] / diag_phys.sum())


def calibrate_background(emitter, filter_width, beta, filter_center=0.0, eta=None, b_max=1.0):
    """Solve for the background amplitude b giving background fraction beta.

    beta is the share of the total detected (sensor) population that the
    laser background alone would produce; the solve brackets the monotone
    ratio and refines with Brent's method.
    """
    beta = float(beta)
    if not 0.0 <= beta <= MAX_BACKGROUND:
        raise ValueError(f"beta must lie in [0, {MAX_BACKGROUND}], got {beta}")
    if beta == 0.0:
        return BackgroundCalibration(beta=0.0, solved_b=0.0, forward_ratio=0.0)
    if eta is None:
        eta = default_eta(emitter, filter_width)

    def ratio(b):
        if b == 0.0:
            return 0.0
        total = SensorPipeline(emitter, filter_width, filter_center, eta, b).n1_pop
        alone = _background_only_population(filter_width, filter_center, eta, b)
        return alone / total

    hi = float(b_max)
    for _ in range(40):
        if ratio(hi) >= beta:
            break
        hi *= 2.0
    else:
        raise BackgroundCalibrationError(
            f"background fraction {beta} not bracketed up to b = {hi:.3e}; "
            "pass a larger b_max"
        )

    solved = scipy.optimize.brentq(lambda b: ratio(b) - beta, 0.0, hi, rtol=1e-14)
    forward = ratio(solved)
    if abs(forward - beta) > 1e-6:
        raise BackgroundCalibrationError(
            f"forward check failed: ratio({solved:.6e}) = {forward:.8f} != {beta}"
        )
    return BackgroundCalibration(beta=beta, solved_b=float(solved), forward_ratio=forward)


def eta_convergence(
    emitter,
    filter_width,
    filter_center=0.0,
    beta=0.0,
    tau_probe=0.0,
    eta0=None,
    tol=ETA_TOL,
    max_halvings=MAX_HALVINGS,
    _calibration=None,
):
    """Coupling-halving acceptance check for the vanishing-eta limit.

    Accepts when g2 at eta and at eta/2 agree to tol * max(1, g2); on
    failure the reference coupling is halved, up to max_halvings times.
    """
    if eta0 is None:
        eta0 = default_eta(emitter, filter_width)
    calibration = _calibration
    if calibration is None:
        calibration = calibrate_background(emitter, filter_width, beta, filter_center, eta0)

    cache = {}

    def g2_at(eta):
        if eta not in cache:
            pipe = SensorPipeline(emitter, filter_width, filter_center, eta, calibration.solved_b)
            if tau_probe == 0.0:
                cache[eta] = pipe.g2_zero()
            else:
                cache[eta] = float(pipe.g2_values(np.array([0.0, tau_probe]))[-1])
        return cache[eta]

    eta = float(eta0)
    for halvings in range(max_halvings + 1):
        g2_ref = g2_at(eta)
        g2_half = g2_at(eta / 2.0)
        if abs(g2_ref - g2_half) < tol * max(1.0, abs(g2_half)):
            return EtaConvergence(
                eta=eta, g2_ref=g2_ref, g2_half=g2_half, accepted=True, halvings=halvings
            )
        eta /= 2.0
    raise EtaConvergenceError(
        f"no eta convergence after {max_halvings} halvings from {eta0:.3e} "
        f"(last |delta| = {abs(g2_ref - g2_half):.3e}); coupling too large or "
        "numerics breaking down"
    )


def filtered_g2(emitter, filter_width, filter_center=0.0, beta=0.0, taus=None, eta=None):
    """Frequency-filtered g2(tau) of the driven emitter.

    Builds the two-sensor model at the protocol coupling (convergence
    checked unless eta is forced), calibrates the laser background to the
    requested fraction beta, and evaluates the normalized sensor
    coincidence on the tau grid.
    """
    if filter_width <= 0.0:
        raise ValueError(f"filter width must be > 0, got {filter_width}")
    if filter_width < NARROW_WIDTH_WARN * emitter.gamma:
        warnings.warn(
            f"filter width {filter_width:.3e} is below 1e-4 gamma; make sure the "
            "tau grid resolves the filter response",
            stacklevel=2,
        )
    if taus is None:
        taus = default_tau_grid(emitter, (filter_width,))
    taus = _check_taus(taus)
    if eta is not None and eta > 1e-2 * min(emitter.gamma, filter_width):
        raise ValueError(
            f"eta = {eta:.3e} is too large for a vanishing-coupling result; "
            f"need eta <= 1e-2 * min(gamma, width) = {1e-2 * min(emitter.gamma, filter_width):.3e}"
        )

    calibration = calibrate_background(emitter, filter_width, beta, filter_center, eta)
    if eta is None:
        conv = eta_convergence(emitter, filter_width, filter_center, beta, _calibration=calibration)
        eta = conv.eta
    pipe = SensorPipeline(emitter, filter_width, filter_center, eta, calibration.solved_b)
    values = pipe.g2_values(taus)
    return CorrelationTrace(
        taus=taus,
        values=values,
        metadata={
            "kind": "filtered",
            "gamma": emitter.gamma,
            "rabi": emitter.rabi,
            "detuning": emitter.detuning,
            "filter_width": filter_width,
            "filter_center": filter_center,
            "eta": float(eta),
            "beta": float(beta),
            "background_b": calibration.solved_b,
            "irf_applied": False,
        },
    )


def _g2_zero_point(emitter, filter_width, filter_center, beta):
    """g2(0) at one parameter point, with the full protocol, no propagation."""
    calibration = calibrate_background(emitter, filter_width, beta, filter_center)
    conv = eta_convergence(emitter, filter_width, filter_center, beta, _calibration=calibration)
    pipe = SensorPipeline(emitter, filter_width, filter_center, conv.eta, calibration.solved_b)
    return pipe.g2_zero()


DEFAULT_SWEEP_POINTS = 2001


def _g2_zero_convolved(emitter, filter_width, filter_center, beta, irf):
    """IRF-smeared g2(0): full trace on an adequate grid, convolved, value at 0."""
    from . import instrument  # deferred: instrument imports CorrelationTrace

    span = default_tau_grid(emitter, (filter_width,))[-1]
    span = max(span, 8.0 * irf.fwhm)
    n = max(DEFAULT_SWEEP_POINTS, int(np.ceil(span / (irf.fwhm / 10.0))) + 1)
    taus = np.linspace(0.0, span, n)
    trace = filtered_g2(emitter, filter_width, filter_center, beta, taus)
    smeared = instrument.irf_convolve(trace, irf)
    return float(smeared.values[0])


def sweep_g2_zero(
    emitter,
    axis,
    points,
    filter_width=None,
    filter_center=0.0,
    beta_bounds=(0.0, 0.0),
    irf=None,
):
    """g2(0) along a filter-width or drive-strength sweep.

    Returns one row per point: the ideal value (no background, no IRF) and
    the values at the two background bounds, IRF-convolved when an IRF is
    given.  Rows come back in input order.
    """
    if axis not in ("filter_width", "rabi"):
        raise ValueError(f"axis must be 'filter_width' or 'rabi', got {axis!r}")
    points = [float(x) for x in points]
    if not points:
        raise ValueError("sweep needs at least one point")
    if any(x <= 0.0 for x in points):
        raise ValueError("sweep points must be positive")
    beta_lo, beta_hi = (float(b) for b in beta_bounds)
    if beta_lo > beta_hi:
        raise ValueError(f"beta bounds out of order: {beta_lo} > {beta_hi}")
    if axis == "rabi" and filter_width is None:
        raise ValueError("a fixed filter_width is required when sweeping rabi")

    rows = []
    for x in points:
        rows.append(
            sweep_point(emitter, axis, x, filter_width, filter_center, beta_lo, beta_hi, irf)
        )
    return rows


def sweep_point(emitter, axis, x, filter_width, filter_center, beta_lo, beta_hi, irf):
    """One sweep row; separated out so callers can farm points to workers."""
    if axis == "filter_width":
        em, width = emitter, x
    else:
        em, width = replace(emitter, rabi=x), filter_width

    row = {"x": x, "g2_ideal": _g2_zero_point(em, width, filter_center, 0.0)}
    for key, beta in (("g2_lo", beta_lo), ("g2_hi", beta_hi)):
        if irf is None:
            row[key] = row["g2_ideal"] if beta == 0.0 else _g2_zero_point(
                em, width, filter_center, beta
            )
        else:
            row[key] = _g2_zero_convolved(em, width, filter_center, beta, irf)
    return row
