"""Resonance condition, flux parameter and the ion-circuit exchange rate.

The circuit mode f(u) = exp(i mu u) sum_k c_k exp(2iku) couples to the ion
through the sideband whose frequency (mu + 2k) omega_d / 2 matches omega_i.
Rates are angular (rad/s) unless a name ends in ``_hz``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NearResonanceWarning, UnstableError
from .floquet import DEFAULT_SAMPLES, DEFAULT_TOL, FloquetSolution, solve_mathieu
from .params import E_CHARGE, HBAR, SystemParams, to_dimensionless

DEFAULT_K_MAX = 8
DEFAULT_WARN_DETUNING = 1e-3


def flux_parameter(C_sigma, W, phi0=HBAR / (2 * E_CHARGE)) -> float:
    """gamma = sqrt(hbar / (2 C_sigma W)) / phi0, with W in rad/s."""
    if C_sigma <= 0 or W <= 0:
        raise ValueError(f"C_sigma and W must be positive, got {C_sigma!r}, {W!r}")
    return math.sqrt(HBAR / (2 * C_sigma * W)) / phi0


def characteristic_charge(C_sigma, W) -> float:
    return math.sqrt(HBAR * C_sigma * W / 2)


def resonant_k(mu, omega_d, omega_i, k_max=DEFAULT_K_MAX, warn_threshold=DEFAULT_WARN_DETUNING):
    """Integer k in [-k_max, k_max] minimising |(mu + 2k) - 2 omega_i/omega_d|.

    Returns ``(k, detuning)``.  Warns with NearResonanceWarning when the
    dimensionless detuning exceeds ``warn_threshold``.
    """
    mu = float(np.real(mu))
    target = 2.0 * omega_i / omega_d
    k = int(np.clip(round((target - mu) / 2.0), -k_max, k_max))
    detuning = abs(mu + 2 * k - target)
    if warn_threshold is not None and detuning > warn_threshold:
        warnings.warn(
            f"off resonance: |mu + 2k - 2 omega_i/omega_d| = {detuning:.3g} at k={k}",
            NearResonanceWarning,
            stacklevel=2,
        )
    return k, detuning


@dataclass(frozen=True)
class CouplingResult:
    """Exchange rate at one drive point.

    ``Omega`` carries the |mu + 2k| factor; ``Omega_resonant`` replaces it by
    2 omega_i/omega_d.  They differ by the relative detuning.
    """

    k: int
    detuning: float
    gamma: float
    c_k: complex
    Omega: float
    Omega_resonant: float
    Omega_cap: float
    Q_0: float
    mu: float
    W: float
    eta: float
    omega_d: float
    omega_i: float
    k_natural: int

    @property
    def Omega_hz(self) -> float:
        return self.Omega / (2 * math.pi)

    @property
    def Omega_cap_hz(self) -> float:
        return self.Omega_cap / (2 * math.pi)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["c_k"] = [self.c_k.real, self.c_k.imag]
        out["c_k_abs"] = abs(self.c_k)
        out["Omega_hz"] = self.Omega_hz
        out["Omega_resonant_hz"] = self.Omega_resonant / (2 * math.pi)
        out["Omega_cap_hz"] = self.Omega_cap_hz
        return out


def _prefactor(params: SystemParams, gamma):
    return params.derived.z_0 / params.ion.d * params.ion.xi * gamma


def coupling_strength(
    sol: FloquetSolution, params: SystemParams, k_max=DEFAULT_K_MAX, warn=True
) -> CouplingResult:
    """Evaluate the exchange rate for the circuit mode ``sol`` of ``params``.

    The mode frequency scale W = Im(f* f') omega_d/2 sets gamma, so the rate
    includes the drive-induced change of the mode normalisation.
    """
    if not sol.stable:
        raise UnstableError(im_mu=sol.im_mu, trace=sol.trace)
    wd = params.drive.omega_d
    wi = params.derived.omega_i
    mu = float(np.real(sol.mu))
    k, detuning = resonant_k(mu, wd, wi, k_max, warn_threshold=None)
    c_k = sol.coefficient(k)
    W = sol.W * wd / 2
    gamma = flux_parameter(params.circuit.C_sigma, W, params.circuit.phi0_tilde)
    pre = _prefactor(params, gamma)
    omega = wd / 4 * pre * abs(mu + 2 * k) * abs(c_k)
    omega_res = wi / 2 * pre * abs(c_k)
    omega_cap, q0 = capacitive_comparison(params)
    if warn and detuning * wd / 2 > omega / 10:
        warnings.warn(
            f"detuning {detuning * wd / 2:.3g} rad/s exceeds Omega/10 = {omega / 10:.3g} rad/s; "
            "the beam-splitter picture does not hold",
            NearResonanceWarning,
            stacklevel=2,
        )
    ref = sol.coeff.reference_exponent
    k_nat = k - round((ref - mu) / 2)
    return CouplingResult(
        k=k,
        detuning=detuning,
        gamma=gamma,
        c_k=c_k,
        Omega=omega,
        Omega_resonant=omega_res,
        Omega_cap=omega_cap,
        Q_0=q0,
        mu=mu,
        W=W,
        eta=params.drive.eta,
        omega_d=wd,
        omega_i=wi,
        k_natural=k_nat,
    )


def circuit_mode(params: SystemParams, n_samples=DEFAULT_SAMPLES, tol=DEFAULT_TOL) -> FloquetSolution:
    s = to_dimensionless(params)
    return solve_mathieu(s.A, s.Q, n_samples=n_samples, tol=tol)


def evaluate(params: SystemParams, n_samples=DEFAULT_SAMPLES, tol=DEFAULT_TOL, warn=True):
    """Solve the circuit mode for ``params`` and return its CouplingResult."""
    return coupling_strength(circuit_mode(params, n_samples, tol), params, warn=warn)


def perturbative_coupling(params: SystemParams, W=None):
    """Small-drive estimate (omega_i/4)(z0/d) xi gamma eta.

    Assumes the sideband amplitude |c| = eta/2 and W = omega_0 unless given.
    Returns ``(estimate, bound)`` where the bound uses eta = 2 sqrt(omega_i/omega_0).
    """
    d = params.derived
    W = d.omega_0 if W is None else W
    gamma = flux_parameter(params.circuit.C_sigma, W, params.circuit.phi0_tilde)
    scale = d.omega_i / 4 * _prefactor(params, gamma)
    return scale * params.drive.eta, scale * 2 * math.sqrt(d.omega_i / d.omega_0)


def capacitive_comparison(params: SystemParams, eta=None, W=None):
    """Rate (e Q0 / C_sigma)(xi z0 / d) eta / hbar of a modulated-capacitor scheme.

    Returns ``(Omega_cap, Q_0)``; W defaults to omega_0.
    """
    eta = params.drive.eta if eta is None else eta
    W = params.derived.omega_0 if W is None else W
    C = params.circuit.C_sigma
    q0 = characteristic_charge(C, W)
    omega = E_CHARGE * q0 / C * params.ion.xi * params.derived.z_0 / params.ion.d * eta / HBAR
    return omega, q0


def resonant_drive_ratio(ratio, eta, tol=DEFAULT_TOL, n_samples=256, step=None) -> float:
    """Drive frequency (units of omega_0) at which mu omega_d / 2 = omega_i.

    Scans downward from omega_0 - omega_i in steps of ``step`` (default
    ratio/4) until the principal exponent crosses the ion frequency, then
    refines with brentq.
    """
    step = ratio / 4 if step is None else step

    def mismatch(wd):
        A = 4.0 / wd**2
        sol = solve_mathieu(A, -eta * A / 2, n_samples=n_samples, tol=tol)
        return float(np.real(sol.mu)) * wd / 2 - ratio

    hi = 1.0 - ratio
    if mismatch(hi) >= 0:
        lo, hi = hi, hi + step
        while mismatch(hi) >= 0:
            lo, hi = hi, hi + step
            if hi >= 1.0:
                raise ValueError(f"no resonant drive below omega_0 at eta={eta}")
    else:
        lo = hi - step
        while mismatch(lo) < 0:
            hi, lo = lo, lo - step
            if lo <= 1.0 - 4 * ratio:
                raise ValueError(f"no resonant drive near omega_0 - omega_i at eta={eta}")
    return brentq(mismatch, lo, hi, xtol=1e-15, rtol=1e-15)


def resonant_drive(params: SystemParams, tol=DEFAULT_TOL, n_samples=256) -> SystemParams:
    """``params`` with omega_d tuned so the sideband sits exactly on omega_i."""
    d = params.derived
    wd = resonant_drive_ratio(d.omega_i / d.omega_0, params.drive.eta, tol, n_samples)
    return params.with_drive(omega_d=wd * d.omega_0)


SWEEP_COLUMNS = (
    "eta",
    "omega_d_over_omega_0",
    "mu",
    "k",
    "detuning",
    "c_k_abs",
    "gamma",
    "Omega_hz",
    "Omega_cap_hz",
)


def _sweep_point(args):
    params, n_samples, tol = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearResonanceWarning)
        r = evaluate(params, n_samples, tol, warn=False)
    return (
        r.eta,
        r.omega_d / params.derived.omega_0,
        r.mu,
        r.k,
        r.detuning,
        abs(r.c_k),
        r.gamma,
        r.Omega_hz,
        r.Omega_cap_hz,
    )


def sweep_eta(params: SystemParams, etas, n_samples=1024, tol=DEFAULT_TOL, threads=1):
    """Coupling along an eta sweep at fixed omega_d; rows in input order."""
    jobs = [(params.with_drive(eta=float(e)), n_samples, tol) for e in etas]
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]
