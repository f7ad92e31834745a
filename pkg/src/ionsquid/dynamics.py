"""Time-domain check of the exchange rate.

The linearised circuit and the ion motion are integrated as classical
oscillators in units where omega_0 = 1 and each mode has unit action scale:

    X' = P + kappa Z                    P'  = -(1 + eta cos(omega_d t)) X
    Z' = r Pz                           Pz' = -r Z - kappa P

with r = omega_i/omega_0 and kappa = (z0/d) xi gamma_0, gamma_0 being the
flux parameter at W = omega_0.  X, P are the circuit flux and charge, Z, Pz
the ion position and momentum.  For a quadratic Hamiltonian these equations
are exact for the first moments of the quantum dynamics.

Because the equations are periodic in the drive period, long runs compose the
one-period propagator instead of re-integrating: sample n is M^(n s) x0 for a
stride s, so a swap spanning 1e8 drive periods costs one short integration.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.ndimage import uniform_filter1d
from scipy.optimize import curve_fit

from .coupling import flux_parameter, resonant_drive_ratio, resonant_k
from .errors import DynamicsInstabilityError, IntegrationError, NoCleanExchangeError
from .floquet import DEFAULT_TOL, solve_mathieu
from .params import SystemParams
from .stability import boundary_eta

MAP_TOL_FLOOR = 3e-14
GROWTH_LIMIT = 1e6
MIN_CONTRAST = 0.5
MAX_FIT_RESIDUAL = 0.05
KAPPA_FRACTION = 1 / 40


@dataclass(frozen=True)
class ScaledSystem:
    """Dimensionless circuit-ion system; rates in units of ``omega_0``."""

    ratio: float
    kappa: float
    eta: float
    omega_d: float  # units of omega_0
    omega_0: float = 1.0  # rad/s, only used to report SI rates

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise ValueError(f"ratio must lie in (0, 1), got {self.ratio!r}")
        if self.kappa < 0 or self.eta < 0 or self.omega_d <= 0:
            raise ValueError("kappa, eta must be >= 0 and omega_d > 0")

    @property
    def tau(self) -> float:
        return 2 * math.pi / self.omega_d


def scaled_system(params: SystemParams) -> ScaledSystem:
    """Dimensionless view of physical parameters."""
    d = params.derived
    gamma0 = flux_parameter(params.circuit.C_sigma, d.omega_0, params.circuit.phi0_tilde)
    return ScaledSystem(
        ratio=d.omega_i / d.omega_0,
        kappa=d.z_0 / params.ion.d * params.ion.xi * gamma0,
        eta=params.drive.eta,
        omega_d=params.drive.omega_d / d.omega_0,
        omega_0=d.omega_0,
    )


def default_kappa(ratio, eta) -> float:
    """Coupling small enough that the dispersive shift ~kappa^2 stays well below Omega ~ kappa r eta / 4."""
    return KAPPA_FRACTION * ratio * eta


def initial_state(ion=1.0, circuit=0.0) -> np.ndarray:
    """State with the given actions in the ion and circuit modes (zero phase)."""
    return np.array([math.sqrt(2 * circuit), 0.0, math.sqrt(2 * ion), 0.0])


def _rhs(system: ScaledSystem):
    k, r, eta, wd = system.kappa, system.ratio, system.eta, system.omega_d

    def rhs(t, y):
        X, P, Z, Pz = y
        return [P + k * Z, -(1.0 + eta * math.cos(wd * t)) * X, r * Pz, -r * Z - k * P]

    return rhs


def period_map(system: ScaledSystem, tol=DEFAULT_TOL) -> np.ndarray:
    """Propagator over one drive period (columns are images of unit vectors)."""
    rtol = max(tol * 1e-3, MAP_TOL_FLOOR)
    rhs = _rhs(system)
    cols = []
    for j in range(4):
        e = np.zeros(4)
        e[j] = 1.0
        sol = solve_ivp(rhs, (0.0, system.tau), e, method="DOP853", rtol=rtol, atol=rtol * 1e-3)
        if sol.status < 0:
            raise IntegrationError(f"period map failed: {sol.message}", at=sol.t[-1])
        cols.append(sol.y[:, -1])
    return np.array(cols).T


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled run.  ``state`` rows are (X, P, Z, Pz)."""

    times: np.ndarray
    state: np.ndarray
    ion_energy: np.ndarray
    circuit_energy: np.ndarray
    system: ScaledSystem
    mode: str = "direct"

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def rows(self, stride=1):
        for j in range(0, len(self.times), stride):
            X, P, Z, Pz = self.state[j]
            yield (self.times[j], X, P, Z, Pz, self.ion_energy[j], self.circuit_energy[j])


TRAJECTORY_COLUMNS = ("t", "phi", "q", "z", "p", "E_ion", "E_circ")


def _energies(state):
    ion = 0.5 * (state[:, 2] ** 2 + state[:, 3] ** 2)
    circ = 0.5 * (state[:, 0] ** 2 + state[:, 1] ** 2)
    return ion, circ


def _check_growth(state, x0):
    scale = max(float(np.linalg.norm(x0)), 1e-300)
    norms = np.linalg.norm(state, axis=1)
    bad = np.flatnonzero(~np.isfinite(norms) | (norms > GROWTH_LIMIT * scale))
    if len(bad):
        raise DynamicsInstabilityError(
            f"state norm grew beyond {GROWTH_LIMIT:g} x initial at sample {bad[0]}; "
            "the drive is parametrically unstable"
        )


def integrate(
    system: ScaledSystem,
    initial=None,
    duration=None,
    n_samples=4000,
    tol=DEFAULT_TOL,
    mode="stroboscopic",
) -> Trajectory:
    """Integrate from ``initial`` (default: unit action in the ion) for ``duration``.

    ``mode="direct"`` integrates continuously and resamples the dense output on
    a uniform grid.  ``mode="stroboscopic"`` samples at whole drive periods by
    composing the one-period map; it is exact up to the map's accuracy and
    makes very long runs cheap.
    """
    x0 = initial_state() if initial is None else np.asarray(initial, dtype=float)
    if duration is None or duration <= 0:
        raise ValueError("duration must be positive")
    if mode == "direct":
        times = np.linspace(0.0, duration, n_samples)
        sol = solve_ivp(
            _rhs(system),
            (0.0, duration),
            x0,
            method="DOP853",
            t_eval=times,
            rtol=tol,
            atol=tol * 1e-3 * max(1.0, float(np.linalg.norm(x0))),
        )
        if sol.status < 0:
            raise IntegrationError(f"integration failed: {sol.message}", at=sol.t[-1])
        state = sol.y.T
    elif mode == "stroboscopic":
        periods = duration / system.tau
        stride = max(1, int(math.ceil(periods / n_samples)))
        M = period_map(system, tol)
        if np.max(np.abs(np.linalg.eigvals(M))) > 1 + 1e-6:
            raise DynamicsInstabilityError(
                "one-period propagator has an eigenvalue outside the unit circle"
            )
        step = np.linalg.matrix_power(M, stride)
        n = min(n_samples, int(periods // stride) + 1)
        state = np.empty((n, 4))
        x = x0.copy()
        for j in range(n):
            state[j] = x
            x = step @ x
        times = np.arange(n) * stride * system.tau
    else:
        raise ValueError(f"unknown mode {mode!r}")
    _check_growth(state, x0)
    ion, circ = _energies(state)
    return Trajectory(times, state, ion, circ, system, mode)


def _model(t, E0, omega, phase):
    return E0 * np.cos(omega * t + phase) ** 2


@dataclass(frozen=True)
class ExchangeFit:
    Omega: float
    E0: float
    phase: float
    residual: float
    contrast: float


def fit_exchange(t, E, max_residual=MAX_FIT_RESIDUAL, min_contrast=MIN_CONTRAST) -> ExchangeFit:
    """Least-squares fit of E(t) = E0 cos^2(Omega t + phi).

    The starting frequency is the dominant FFT bin of E - mean(E).

    Raises:
        NoCleanExchangeError: flat envelope or fit residual above ``max_residual``
            (RMS residual relative to max E).
    """
    t = np.asarray(t, dtype=float)
    E = np.asarray(E, dtype=float)
    peak = float(np.max(E))
    if peak <= 0:
        raise NoCleanExchangeError("energy identically zero", residual=math.inf)
    swing = (peak - float(np.min(E))) / peak
    if swing < min_contrast:
        raise NoCleanExchangeError(
            f"energy swing {swing:.3g} of its peak; no exchange visible", residual=swing
        )
    dt = t[1] - t[0]
    spec = np.abs(np.fft.rfft(E - E.mean()))
    freqs = np.fft.rfftfreq(len(E), dt)
    j = int(np.argmax(spec[1:])) + 1
    omega0 = math.pi * freqs[j]  # cos^2 oscillates at 2 Omega
    phase0 = -0.5 * math.atan2(
        float(np.sum((E - E.mean()) * np.sin(2 * omega0 * t))),
        float(np.sum((E - E.mean()) * np.cos(2 * omega0 * t))),
    )
    try:
        popt, _ = curve_fit(_model, t, E, p0=[peak, omega0, phase0], maxfev=20000)
    except RuntimeError as exc:
        raise NoCleanExchangeError(f"fit did not converge: {exc}", residual=math.inf) from None
    resid = float(np.sqrt(np.mean((_model(t, *popt) - E) ** 2)) / peak)
    if resid > max_residual:
        raise NoCleanExchangeError(
            f"fit residual {resid:.3g} exceeds {max_residual:g}", residual=resid
        )
    contrast = peak / max(float(np.min(E)), 1e-300)
    return ExchangeFit(abs(float(popt[1])), float(popt[0]), float(popt[2]), resid, contrast)


def slow_envelope(traj: Trajectory, omega_i) -> np.ndarray:
    """Ion energy averaged over one ion period (unchanged if samples are sparser)."""
    if traj.dt <= 0:
        return traj.ion_energy
    width = int(round(2 * math.pi / omega_i / traj.dt))
    if width <= 1:
        return traj.ion_energy
    return uniform_filter1d(traj.ion_energy, size=width, mode="nearest")


def measure_exchange(traj, omega_i=None, max_residual=MAX_FIT_RESIDUAL) -> ExchangeFit:
    """Exchange rate from a Trajectory or a ``(times, energy)`` pair.

    Rates share the time unit of the samples.
    """
    if isinstance(traj, Trajectory):
        omega_i = traj.system.ratio if omega_i is None else omega_i
        return fit_exchange(traj.times, slow_envelope(traj, omega_i), max_residual)
    t, E = traj
    return fit_exchange(t, E, max_residual)


@dataclass(frozen=True)
class Prediction:
    Omega: float
    mu: float
    k: int
    detuning: float
    c_k_abs: float
    W: float


def predicted_rate(system: ScaledSystem, n_samples=1024, tol=DEFAULT_TOL) -> Prediction:
    """Floquet prediction (omega_d/4) kappa sqrt(omega_0/W) |mu + 2k| |c_k| in units of omega_0."""
    A = 4.0 / system.omega_d**2
    sol = solve_mathieu(A, -system.eta * A / 2, n_samples=n_samples, tol=tol)
    mu = float(np.real(sol.mu))
    k, det = resonant_k(mu, system.omega_d, system.ratio, warn_threshold=None)
    W = sol.W * system.omega_d / 2
    c = abs(sol.coefficient(k))
    omega = system.omega_d / 4 * system.kappa / math.sqrt(W) * abs(mu + 2 * k) * c
    return Prediction(omega, mu, k, det, c, W)


@dataclass(frozen=True)
class ExchangeReport:
    """Measured against predicted exchange rate, rates in rad/s."""

    Omega_measured: float
    Omega_predicted: float
    relative_error: float
    contrast: float
    fit_residual: float
    ratio: float
    eta: float
    kappa: float
    omega_d_over_omega_0: float
    mu: float
    k: int
    drive_periods: float
    degenerate: bool = False
    message: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def rwa_validate(
    ratio,
    eta=None,
    kappa=None,
    tune=True,
    tol=DEFAULT_TOL,
    swaps=1.25,
    n_samples=4000,
    excite="ion",
    omega_0=1.0,
    keep_trajectory=False,
):
    """Integrate the coupled system and compare the exchange rate with the Floquet prediction.

    ``eta`` defaults to half the stability boundary at ``ratio``; ``kappa``
    to :func:`default_kappa`.  With ``tune`` the drive frequency is placed on
    the exact sideband resonance, otherwise omega_d = omega_0 - omega_i.
    The run spans ``swaps`` full energy oscillations (period pi/Omega).
    Returns an ExchangeReport, or ``(report, trajectory)`` with
    ``keep_trajectory`` (trajectory is None in the undriven case).
    """
    if eta is None:
        eta = 0.5 * boundary_eta(ratio, tol=1e-6)
    if kappa is None:
        kappa = default_kappa(ratio, eta)
    wd = resonant_drive_ratio(ratio, eta, n_samples=256) if tune and eta > 0 else 1.0 - ratio
    system = ScaledSystem(ratio=ratio, kappa=kappa, eta=eta, omega_d=wd, omega_0=omega_0)
    pred = predicted_rate(system)
    base = dict(
        ratio=ratio,
        eta=eta,
        kappa=kappa,
        omega_d_over_omega_0=wd,
        mu=pred.mu,
        k=pred.k,
    )
    if pred.Omega <= 0 or eta == 0:
        report = ExchangeReport(
            Omega_measured=0.0,
            Omega_predicted=pred.Omega * omega_0,
            relative_error=math.nan,
            contrast=1.0,
            fit_residual=math.nan,
            drive_periods=0.0,
            degenerate=True,
            message="no drive: predicted rate is zero and no exchange can be measured",
            **base,
        )
        return (report, None) if keep_trajectory else report
    duration = swaps * math.pi / pred.Omega
    initial = initial_state(ion=1.0) if excite == "ion" else initial_state(ion=0.0, circuit=1.0)
    traj = integrate(system, initial, duration, n_samples=n_samples, tol=tol)
    if excite != "ion":
        # the ion energy then follows sin^2; fit the circuit-side complement
        traj = replace(traj, ion_energy=traj.ion_energy.max() - traj.ion_energy)
    fit = measure_exchange(traj)
    report = ExchangeReport(
        Omega_measured=fit.Omega * omega_0,
        Omega_predicted=pred.Omega * omega_0,
        relative_error=abs(fit.Omega - pred.Omega) / pred.Omega,
        contrast=fit.contrast,
        fit_residual=fit.residual,
        drive_periods=duration / system.tau,
        **base,
    )
    return (report, traj) if keep_trajectory else report
