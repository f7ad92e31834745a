"""Floquet analysis of f'' + q(u) f = 0 with q of period pi.

The Mathieu case q(u) = A - 2Q cos 2u is a one-harmonic Hill coefficient.
Everything is computed from the numerically integrated fundamental matrix;
no continued fractions or tabulated characteristic values are used.

Branch convention: the characteristic exponent is reported on the principal
branch mu in [0, 2) and the sign of the eigenvector is chosen so that the
Wronskian W = Im(conj(f) f') is positive.  Relabelling to another branch
(mu + 2n, with c_k -> c_{k+n}) is available through
:meth:`FloquetSolution.shifted`.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DecompositionError,
    DegenerateFloquetError,
    IntegrationError,
    MarginalStabilityWarning,
    ResolutionError,
    UnstableError,
)

DEFAULT_TOL = 1e-10
DEFAULT_SAMPLES = 4096
EPS_MARGINAL = 1e-6
PERIOD = math.pi


@dataclass(frozen=True)
class HillCoefficient:
    """q(u) = mean + sum_n Re(a_n exp(2 i n u)), period pi in u."""

    mean: float
    harmonics: tuple = ()

    def __post_init__(self):
        cleaned = []
        for n, amp in self.harmonics:
            if int(n) != n or n < 1:
                raise ValueError(f"harmonic index must be a positive integer, got {n!r}")
            cleaned.append((int(n), complex(amp)))
        object.__setattr__(self, "harmonics", tuple(cleaned))
        object.__setattr__(self, "mean", float(self.mean))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.full(u.shape, self.mean)
        for n, a in self.harmonics:
            out = out + a.real * np.cos(2 * n * u) - a.imag * np.sin(2 * n * u)
        return out

    def _scalar(self):
        # Fast scalar evaluator for the ODE right-hand side.
        mean = self.mean
        terms = [(2 * n, a.real, a.imag) for n, a in self.harmonics]

        def q(u):
            val = mean
            for w, re, im in terms:
                val += re * math.cos(w * u) - im * math.sin(w * u)
            return val

        return q

    @property
    def reference_exponent(self) -> float:
        """Exponent of the undriven problem, sqrt(mean) (0 if mean <= 0)."""
        return math.sqrt(self.mean) if self.mean > 0 else 0.0


def mathieu(A: float, Q: float) -> HillCoefficient:
    return HillCoefficient(mean=A, harmonics=((1, complex(-2.0 * Q)),))


def propagate(coeff: HillCoefficient, y0, u_eval, tol: float = DEFAULT_TOL):
    """Integrate ``y0 = [f, f']`` (real or complex) and return values at ``u_eval``.

    Returns an array of shape (2, len(u_eval)) with the dtype of ``y0``.
    """
    y0 = np.asarray(y0)
    cplx = np.iscomplexobj(y0)
    state = np.concatenate([y0.real, y0.imag]) if cplx else y0.astype(float)
    u_eval = np.asarray(u_eval, dtype=float)
    Y = _integrate(coeff, state, (0.0, float(u_eval[-1])), u_eval, tol)
    if cplx:
        return Y[0:2] + 1j * Y[2:4]
    return Y


def _integrate(coeff, state, span, u_eval, tol, max_step=np.inf):
    q = coeff._scalar()

    def rhs(u, y):
        qu = q(u)
        dy = np.empty_like(y)
        dy[0::2] = y[1::2]
        dy[1::2] = -qu * y[0::2]
        return dy

    sol = solve_ivp(
        rhs,
        span,
        state,
        method="DOP853",
        t_eval=u_eval,
        rtol=tol,
        atol=tol * 1e-4,
        max_step=max_step,
    )
    if sol.status < 0:
        raise IntegrationError(f"integrator failure: {sol.message}", at=float(sol.t[-1]))
    return sol.y


def _fundamental(coeff, u_eval, tol):
    """Columns (y1, y1', y2, y2') with identity initial data, at u_eval (last = pi)."""
    return _integrate(coeff, np.array([1.0, 0.0, 0.0, 1.0]), (0.0, PERIOD), u_eval, tol)


def monodromy(coeff: HillCoefficient, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Fundamental matrix [[y1, y2], [y1', y2']] after one period."""
    Y = _fundamental(coeff, np.array([PERIOD]), tol)[:, -1]
    return np.array([[Y[0], Y[2]], [Y[1], Y[3]]])


def exponent_from_trace(trace: float) -> complex:
    """Principal exponent with cos(pi mu) = trace/2; Re(mu) in [0, 1], Im(mu) >= 0."""
    mu = cmath.acos(trace / 2) / math.pi
    return mu.conjugate() if mu.imag < 0 else mu


@dataclass(frozen=True, eq=False)
class FloquetSolution:
    """Quasi-periodic solution f(u + pi) = exp(i mu pi) f(u), f(0) = 1.

    ``samples`` and ``derivative`` hold f and df/du on u_j = j pi / N.
    ``coefficients`` is the full discrete spectrum ordered by ``k_values``.
    ``W`` is in units of omega_d / 2; multiply by omega_d / 2 for rad/s.
    """

    mu: complex
    W: float
    samples: np.ndarray
    derivative: np.ndarray
    trace: float
    stable: bool
    marginal: bool
    coeff: HillCoefficient
    coefficients: np.ndarray = field(repr=False, default=None)
    k_values: np.ndarray = field(repr=False, default=None)
    branch: int = 0

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def u(self) -> np.ndarray:
        return np.arange(self.n_samples) * PERIOD / self.n_samples

    @property
    def im_mu(self) -> float:
        return abs(float(np.imag(self.mu)))

    def periodic_part(self) -> np.ndarray:
        return np.exp(-1j * self.mu * self.u) * self.samples

    def coefficient(self, k: int) -> complex:
        kmax = self.n_samples // 2
        if not -kmax < k < kmax:
            raise ResolutionError(f"k={k} beyond Nyquist limit {kmax - 1}")
        return complex(self.coefficients[k + kmax])

    def shifted(self, n: int) -> FloquetSolution:
        """Relabel onto the branch mu + 2n (c_k of the result is c_{k+n} here)."""
        n = int(n)
        coeffs = np.roll(self.coefficients, -n)
        return FloquetSolution(
            mu=self.mu + 2 * n,
            W=self.W,
            samples=self.samples,
            derivative=self.derivative,
            trace=self.trace,
            stable=self.stable,
            marginal=self.marginal,
            coeff=self.coeff,
            coefficients=coeffs,
            k_values=self.k_values,
            branch=self.branch + n,
        )

    def natural(self, reference: float | None = None) -> FloquetSolution:
        """Branch continuous with the undriven exponent (default sqrt(mean))."""
        ref = self.coeff.reference_exponent if reference is None else reference
        return self.shifted(round((ref - float(np.real(self.mu))) / 2))

    def to_dict(self) -> dict:
        return {
            "mu": [float(np.real(self.mu)), float(np.imag(self.mu))],
            "W": self.W,
            "trace": self.trace,
            "stable": self.stable,
            "marginal": self.marginal,
            "branch": self.branch,
            "coefficient": {
                "mean": self.coeff.mean,
                "harmonics": [[n, [a.real, a.imag]] for n, a in self.coeff.harmonics],
            },
            "samples": [[float(z.real), float(z.imag)] for z in self.samples],
            "derivative": [[float(z.real), float(z.imag)] for z in self.derivative],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> FloquetSolution:
        coeff = HillCoefficient(
            mean=doc["coefficient"]["mean"],
            harmonics=tuple((n, complex(*a)) for n, a in doc["coefficient"]["harmonics"]),
        )
        samples = np.array([complex(*z) for z in doc["samples"]])
        deriv = np.array([complex(*z) for z in doc["derivative"]])
        mu = complex(*doc["mu"])
        k_values, coeffs = _spectrum(samples, mu)
        return cls(
            mu=mu if mu.imag else mu.real,
            W=doc["W"],
            samples=samples,
            derivative=deriv,
            trace=doc["trace"],
            stable=doc["stable"],
            marginal=doc["marginal"],
            coeff=coeff,
            coefficients=coeffs,
            k_values=k_values,
            branch=doc.get("branch", 0),
        )


def _spectrum(samples, mu):
    n = len(samples)
    u = np.arange(n) * PERIOD / n
    p = np.exp(-1j * mu * u) * samples
    spec = np.fft.fftshift(np.fft.fft(p)) / n
    k_values = np.arange(-(n // 2), n - n // 2)
    return k_values, spec


def solve(
    coeff: HillCoefficient,
    n_samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_TOL,
    allow_unstable: bool = False,
    eps_marginal: float = EPS_MARGINAL,
) -> FloquetSolution:
    """Floquet solution normalised to f(0) = 1 with W > 0.

    Raises:
        UnstableError: |trace| > 2 and ``allow_unstable`` is false.
        DegenerateFloquetError: the monodromy is +-identity (tongue edge).
    """
    if n_samples < 4 or n_samples % 2:
        raise ValueError("n_samples must be an even integer >= 4")
    u = np.arange(n_samples + 1) * PERIOD / n_samples
    Y = _fundamental(coeff, u, tol)
    M = np.array([[Y[0, -1], Y[2, -1]], [Y[1, -1], Y[3, -1]]])
    trace = float(M[0, 0] + M[1, 1])
    stable = abs(trace) <= 2.0
    marginal = abs(2.0 - abs(trace)) < eps_marginal
    mu0 = exponent_from_trace(trace)

    if not stable and not allow_unstable:
        raise UnstableError(im_mu=abs(mu0.imag), trace=trace)
    if marginal:
        scale = max(1.0, abs(M).max())
        if abs(M[0, 1]) < 1e-8 * scale and abs(M[1, 0]) < 1e-8 * scale:
            raise DegenerateFloquetError(
                f"monodromy is degenerate (trace={trace:.12g}); Floquet mode undefined"
            )
        warnings.warn(
            f"marginal stability: 2 - |trace| = {2 - abs(trace):.3e}",
            MarginalStabilityWarning,
            stacklevel=2,
        )

    if stable:
        theta = math.acos(max(-1.0, min(1.0, trace / 2)))
        candidates = [theta / math.pi, 2.0 - theta / math.pi]
    else:
        candidates = [mu0, -mu0]

    best = None
    for mu in candidates:
        lam = cmath.exp(1j * math.pi * mu)
        s = _eigen_slope(M, lam)
        if best is None or s.imag > best[1].imag:
            best = (mu, s)
    mu, s = best
    if stable:
        mu = float(np.real(mu)) % 2.0

    f = Y[0, :-1] + s * Y[2, :-1]
    df = Y[1, :-1] + s * Y[3, :-1]
    k_values, coeffs = _spectrum(f, mu)
    return FloquetSolution(
        mu=mu,
        W=float(s.imag),
        samples=f,
        derivative=df,
        trace=trace,
        stable=stable,
        marginal=marginal,
        coeff=coeff,
        coefficients=coeffs,
        k_values=k_values,
    )


def _eigen_slope(M, lam):
    """Return s with M @ (1, s) = lam (1, s), using the better-conditioned row."""
    first = M[0, 1]
    second = lam - M[1, 1]
    if abs(first) >= abs(second):
        return (lam - M[0, 0]) / first
    return M[1, 0] / second


def solve_mathieu(A: float, Q: float, **kwargs) -> FloquetSolution:
    return solve(mathieu(A, Q), **kwargs)


def fourier_coefficients(sol: FloquetSolution, k_range) -> dict:
    """c_k = (1/pi) int_0^pi exp(-i mu u) f(u) exp(-2iku) du for k in ``k_range``."""
    if not sol.stable:
        raise UnstableError(im_mu=sol.im_mu, trace=sol.trace)
    return {int(k): sol.coefficient(int(k)) for k in k_range}


@dataclass(frozen=True, eq=False)
class PolarDecomposition:
    """f = r exp(i theta) on the sample grid.

    ``chi`` is (1/2) r'/r and ``F`` is (1/2) log r; multiply ``chi`` by
    C_sigma omega_d / 2 to get the SI admittance-like quantity.
    """

    u: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    dr: np.ndarray
    dtheta: np.ndarray
    chi: np.ndarray
    F: np.ndarray


def polar(sol: FloquetSolution) -> PolarDecomposition:
    r = np.abs(sol.samples)
    if np.any(r <= 0):
        raise DecompositionError("|f| vanishes on the sample grid; polar form undefined")
    theta = np.unwrap(np.angle(sol.samples))
    theta = theta - theta[0]
    cross = np.conj(sol.samples) * sol.derivative
    dr = cross.real / r
    dtheta = cross.imag / r**2
    return PolarDecomposition(
        u=sol.u,
        r=r,
        theta=theta,
        dr=dr,
        dtheta=dtheta,
        chi=0.5 * dr / r,
        F=0.5 * np.log(r),
    )
