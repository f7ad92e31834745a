"""Classical flux trajectory and the external flux that produces it.

The trajectory is pinned by beta cos(phi_c / phi0) = eta cos(omega_d t), which
makes the linearised inverse inductance (1 + eta cos omega_d t) / L.  Flux is
in units of the reduced flux quantum and time enters through x = omega_d t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import DriveTooStrongError, IntegrationError, SynthesisMismatchError

MAX_DRIVE_FRACTION = 0.99


def _parts(x, a):
    c = np.cos(x)
    s = np.sqrt(1.0 - (a * c) ** 2)  # = sin(phi_c) on the principal branch
    return c, s


def phi_c_closed(x, a):
    return np.arccos(a * np.cos(x))


def dphi_c_dx(x, a):
    c, s = _parts(x, a)
    return a * np.sin(x) / s


def d2phi_c_dx2(x, a):
    c, s = _parts(x, a)
    return a * (1.0 - a * a) * c / s**3


def phi_x_closed(x, a, beta, wd_over_w0):
    """External flux (units of phi0) driving the closed-form trajectory."""
    c, s = _parts(x, a)
    return np.arccos(a * c) + beta * s + wd_over_w0**2 * a * (1.0 - a * a) * c / s**3


@dataclass(frozen=True, eq=False)
class ClassicalDrive:
    """Sampled drive over one period, t_j = j tau / n.

    ``phi_c`` and ``phi_x`` are in units of phi0.  ``q_c`` is in units of
    C_sigma phi0 (rad/s); multiply by C_sigma phi0 for coulombs.
    """

    t: np.ndarray
    phi_c: np.ndarray
    q_c: np.ndarray
    eta: float
    omega_d: float
    beta: float
    phi_x: np.ndarray | None = None
    omega_0: float | None = None

    @property
    def tau(self) -> float:
        return 2 * math.pi / self.omega_d

    @property
    def ratio(self) -> float:
        return self.eta / self.beta

    def q_c_coulomb(self, c_sigma, phi0) -> np.ndarray:
        return self.q_c * c_sigma * phi0

    def phi_x_function(self):
        """Closed-form phi_x as a function of t (seconds)."""
        if self.omega_0 is None:
            raise ValueError("phi_x not synthesised yet")
        a, beta, wd, r = self.ratio, self.beta, self.omega_d, self.omega_d / self.omega_0
        return lambda t: phi_x_closed(wd * np.asarray(t), a, beta, r)


def classical_solution(eta, beta, omega_d, n_samples=1024) -> ClassicalDrive:
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta!r}")
    if eta >= MAX_DRIVE_FRACTION * beta:
        raise DriveTooStrongError(
            f"eta={eta} >= {MAX_DRIVE_FRACTION} beta={MAX_DRIVE_FRACTION * beta:.6g}: "
            "as eta -> beta the trajectory degenerates into a sawtooth with no second derivative"
        )
    t = np.arange(n_samples) * (2 * math.pi / omega_d) / n_samples
    x = omega_d * t
    a = eta / beta
    return ClassicalDrive(
        t=t,
        phi_c=phi_c_closed(x, a),
        q_c=omega_d * dphi_c_dx(x, a),
        eta=eta,
        omega_d=omega_d,
        beta=beta,
    )


def synthesize_flux(d: ClassicalDrive, omega_0) -> ClassicalDrive:
    x = d.omega_d * d.t
    phi_x = phi_x_closed(x, d.ratio, d.beta, d.omega_d / omega_0)
    return replace(d, phi_x=phi_x, omega_0=omega_0)


def verify_roundtrip(
    d: ClassicalDrive,
    omega_0=None,
    periods=10,
    tol=1e-6,
    ode_tol=1e-12,
    from_samples=False,
) -> float:
    """Integrate the nonlinear circuit under phi_x and compare with the target.

    Solves phi'' (omega_d/omega_0)^2 + phi + beta sin(phi) = phi_x(x) from the
    closed-form initial data and returns
    max |beta cos(phi_num) - eta cos(x)| over ``periods`` drive periods.

    With ``from_samples`` the drive is a periodic cubic spline through the
    stored ``phi_x`` samples instead of the closed form.

    Raises:
        SynthesisMismatchError: residual above ``tol``.
    """
    if d.phi_x is None:
        raise ValueError("phi_x not synthesised; call synthesize_flux first")
    omega_0 = d.omega_0 if omega_0 is None else omega_0
    k2 = (omega_0 / d.omega_d) ** 2
    a, beta = d.ratio, d.beta
    n = len(d.t)
    two_pi = 2 * math.pi

    if from_samples:
        xs = np.append(d.omega_d * d.t, two_pi)
        spline = CubicSpline(xs, np.append(d.phi_x, d.phi_x[0]), bc_type="periodic")

        def drive(x):
            return spline(x % two_pi)

        max_step = 0.5 * two_pi / n
    else:
        r = d.omega_d / omega_0

        def drive(x):
            return phi_x_closed(x, a, beta, r)

        max_step = np.inf

    def rhs(x, y):
        return [y[1], k2 * (drive(x) - y[0] - beta * math.sin(y[0]))]

    x_eval = np.arange(periods * n + 1) * two_pi / n
    y0 = [math.acos(a), 0.0]
    sol = solve_ivp(
        rhs,
        (0.0, x_eval[-1]),
        y0,
        method="DOP853",
        t_eval=x_eval,
        rtol=ode_tol,
        atol=ode_tol * 1e-2,
        max_step=max_step,
    )
    if sol.status < 0:
        raise IntegrationError(f"round-trip integration failed: {sol.message}", at=sol.t[-1])
    residual = float(np.max(np.abs(beta * np.cos(sol.y[0]) - d.eta * np.cos(x_eval))))
    if residual > tol:
        raise SynthesisMismatchError(residual, tol)
    return residual


WAVEFORM_COLUMNS = ("t_over_tau", "phi_c", "q_c", "phi_x")


def waveform_rows(d: ClassicalDrive, c_sigma, phi0):
    q = d.q_c_coulomb(c_sigma, phi0)
    for j in range(len(d.t)):
        yield (d.t[j] / d.tau, d.phi_c[j], q[j], d.phi_x[j])
