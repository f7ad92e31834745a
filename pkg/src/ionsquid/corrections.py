"""Size of the nonlinear terms dropped by linearising the junction.

Expanding -E_J cos(phi/phi0) about the classical trajectory phi_c gives
terms of order k >= 3 with time-dependent coefficients

    c_k(x) = d^k/dy^k cos(y) at y = phi_c(x),  x = omega_d t,

so c_3 = sin(phi_c) = sqrt(1 - a^2 cos^2 x) and c_4 = cos(phi_c) = a cos x
with a = eta/beta.  Their size relative to hbar omega_i is
(gamma beta omega_0/omega_i)^2 at leading order; an array of N junctions
maps beta -> beta/N and gamma -> gamma/N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import flux_parameter
from .floquet import FloquetSolution
from .params import SystemParams

DEFAULT_K_MAX = 8
_N_PHASE = 512  # includes x = pi/2, where |c_k| peaks for odd k


def _check_domain(beta, eta):
    if beta < 0 or eta < 0:
        raise ValueError("beta and eta must be >= 0")
    if eta > beta:
        raise ValueError(f"eta={eta} exceeds beta={beta}; no classical trajectory")


def taylor_coefficients(beta, eta, x):
    """Return ``(c3, c4)`` at drive phase ``x``; multiply by beta for beta c_k."""
    _check_domain(beta, eta)
    if beta == 0:
        x = np.asarray(x, dtype=float)
        return np.ones_like(x), np.zeros_like(x)
    c4 = eta / beta * np.cos(x)
    return np.sqrt(1.0 - c4**2), c4


def taylor_coefficient(k, beta, eta, x):
    """General c_k(x) = cos^(k)(phi_c); agrees with :func:`taylor_coefficients` for k = 3, 4."""
    c3, c4 = taylor_coefficients(beta, eta, x)
    # derivatives of cos cycle through cos, -sin, -cos, sin
    return (c4, -c3, -c4, c3)[k % 4]


@dataclass(frozen=True)
class CorrectionEstimate:
    """Energy scales of the dropped terms in units of hbar omega_i.

    ``k_terms[k]`` is (omega_0/omega_i max|beta c_k| gamma^(k-2) 3!/k!)^2, so
    the k = 3 entry coincides with ``leading_magnitude``.
    """

    leading_magnitude: float
    k_terms: dict = field(default_factory=dict)
    N: int = 1
    beta: float = 0.0
    gamma: float = 0.0
    ratio: float = 0.0
    params_rescaled: tuple = (0.0, 0.0)

    def to_dict(self) -> dict:
        return {
            "leading_magnitude": self.leading_magnitude,
            "k_terms": {str(k): v for k, v in self.k_terms.items()},
            "N": self.N,
            "beta": self.beta,
            "gamma": self.gamma,
            "omega_i_over_omega_0": self.ratio,
            "params_rescaled": list(self.params_rescaled),
        }


def estimate(beta, gamma, ratio, eta_over_beta=0.0, N=1, k_max=DEFAULT_K_MAX) -> CorrectionEstimate:
    """Correction scales for single-junction (beta, gamma) split over N junctions.

    The drive shape eta/beta is kept, so each junction sees the same c_k(x).
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be an integer >= 1, got {N!r}")
    if not 0 <= eta_over_beta <= 1:
        raise ValueError("eta/beta must lie in [0, 1]")
    N = int(N)
    b, g = beta / N, gamma / N
    leading = (g * b / ratio) ** 2
    x = np.linspace(0, 2 * math.pi, _N_PHASE, endpoint=False)
    terms = {}
    for k in range(3, k_max + 1):
        peak = b * float(np.max(np.abs(taylor_coefficient(k, 1.0, eta_over_beta, x))))
        terms[k] = (peak * g ** (k - 2) * 6.0 / math.factorial(k) / ratio) ** 2
    return CorrectionEstimate(
        leading_magnitude=leading,
        k_terms=terms,
        N=N,
        beta=beta,
        gamma=gamma,
        ratio=ratio,
        params_rescaled=(b, g),
    )


def _gamma(params: SystemParams, sol: FloquetSolution | None, gamma):
    if gamma is not None:
        return gamma
    W = params.derived.omega_0 if sol is None else sol.W * params.drive.omega_d / 2
    return flux_parameter(params.circuit.C_sigma, W, params.circuit.phi0_tilde)


def leading_correction(
    params: SystemParams, sol: FloquetSolution | None = None, gamma=None, k_max=DEFAULT_K_MAX
) -> CorrectionEstimate:
    """Estimate for ``params``; gamma from the Floquet W of ``sol`` (omega_0 if absent)."""
    return junction_array(params, 1, sol, gamma, k_max)


def junction_array(
    params: SystemParams, N, sol: FloquetSolution | None = None, gamma=None, k_max=DEFAULT_K_MAX
) -> CorrectionEstimate:
    d = params.derived
    beta = d.beta
    _check_domain(beta, params.drive.eta)
    shape = params.drive.eta / beta if beta else 0.0
    return estimate(beta, _gamma(params, sol, gamma), d.omega_i / d.omega_0, shape, N, k_max)


def required_N_for(leading, threshold) -> int:
    """Smallest N with leading / N^4 < threshold."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if leading < threshold:
        return 1
    N = max(1, math.ceil((leading / threshold) ** 0.25))
    while leading / N**4 >= threshold:
        N += 1
    while N > 1 and leading / (N - 1) ** 4 < threshold:
        N -= 1
    return N


def required_N(params: SystemParams, sol: FloquetSolution | None = None, threshold=1.0, gamma=None):
    return required_N_for(leading_correction(params, sol, gamma).leading_magnitude, threshold)
