"""Stability of the near-resonant drive omega_d = omega_0 - omega_i.

A grid point is parameterised by (omega_i/omega_0, eta).  Two mappings to
the Mathieu plane are supported:

* ``"drive"`` (default): A = 4 (omega_0/omega_d)^2 = 4/(1-r)^2, Q = -eta A/2
* ``"inverted"``: A = 4 (omega_d/omega_0)^2 = 4 (1-r)^2, Q = -2 eta (1-r)^2
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryNotFoundError
from .floquet import DEFAULT_TOL, exponent_from_trace, mathieu, monodromy

CONVENTIONS = ("drive", "inverted")


def canonical(ratio, eta, convention="drive"):
    if convention == "drive":
        A = 4.0 / (1.0 - ratio) ** 2
        return A, -eta * A / 2.0
    if convention == "inverted":
        s = (1.0 - ratio) ** 2
        return 4.0 * s, -2.0 * eta * s
    raise ValueError(f"unknown convention {convention!r}")


def _check(ratio, eta):
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio!r}")
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta!r}")


def trace_at(ratio, eta, tol=DEFAULT_TOL, convention="drive") -> float:
    _check(ratio, eta)
    return float(np.trace(monodromy(mathieu(*canonical(ratio, eta, convention)), tol)))


def is_stable(ratio, eta, tol=DEFAULT_TOL, convention="drive"):
    """Return ``(stable, trace)`` for the drive at (ratio, eta)."""
    trace = trace_at(ratio, eta, tol, convention)
    return abs(trace) <= 2.0, trace


def boundary_eta(ratio, eta_max=None, tol=1e-4, ode_tol=DEFAULT_TOL, convention="drive"):
    """Bisect the first stable->unstable transition in eta on [0, eta_max].

    ``eta_max`` defaults to 3 sqrt(ratio), which brackets the near-resonant
    boundary (~2 sqrt(ratio)).
    """
    if eta_max is None:
        eta_max = 3.0 * math.sqrt(ratio)

    def margin(eta):
        return 2.0 - abs(trace_at(ratio, eta, ode_tol, convention))

    lo, hi = 0.0, float(eta_max)
    if margin(lo) < 0:
        raise BoundaryNotFoundError(f"unstable already at eta=0 for ratio={ratio}")
    if margin(hi) >= 0:
        raise BoundaryNotFoundError(
            f"no instability found in [0, {eta_max}] for ratio={ratio}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class GridSpec:
    ratio_min: float = 1e-4
    ratio_max: float = 1e-2
    n_ratio: int = 50
    eta_min: float = 0.0
    eta_max: float = 0.3
    n_eta: int = 50
    log_ratio: bool = True

    def __post_init__(self):
        for name in ("n_ratio", "n_eta"):
            n = getattr(self, name)
            if int(n) != n or n < 1:
                raise ValueError(f"{name} must be a positive integer, got {n!r}")
        if self.n_ratio > 1 and not self.ratio_max > self.ratio_min:
            raise ValueError("ratio axis must be strictly increasing")
        if self.n_eta > 1 and not self.eta_max > self.eta_min:
            raise ValueError("eta axis must be strictly increasing")
        if not 0 < self.ratio_min < 1 or not 0 < self.ratio_max < 1:
            raise ValueError("ratios must lie in (0, 1)")
        if self.eta_min < 0:
            raise ValueError("eta must be >= 0")

    def axes(self):
        if self.n_ratio == 1:
            ratios = np.array([self.ratio_min])
        elif self.log_ratio:
            ratios = np.geomspace(self.ratio_min, self.ratio_max, self.n_ratio)
        else:
            ratios = np.linspace(self.ratio_min, self.ratio_max, self.n_ratio)
        if self.n_eta == 1:
            etas = np.array([self.eta_min])
        else:
            etas = np.linspace(self.eta_min, self.eta_max, self.n_eta)
        return ratios, etas


@dataclass(frozen=True, eq=False)
class StabilityMap:
    """Cells indexed [i_ratio, i_eta]."""

    ratios: np.ndarray
    etas: np.ndarray
    trace_abs: np.ndarray
    im_mu: np.ndarray
    stable: np.ndarray
    errors: tuple
    convention: str = "drive"

    def boundary(self):
        """Per ratio column: midpoint between the last stable and first unstable eta.

        NaN where the column never turns unstable.
        """
        out = np.full(len(self.ratios), np.nan)
        for i in range(len(self.ratios)):
            bad = np.flatnonzero(~self.stable[i])
            if len(bad) and bad[0] > 0:
                j = bad[0]
                out[i] = 0.5 * (self.etas[j - 1] + self.etas[j])
        return out

    def rows(self):
        for i, r in enumerate(self.ratios):
            for j, e in enumerate(self.etas):
                yield (r, e, self.trace_abs[i, j], self.im_mu[i, j], bool(self.stable[i, j]))


CSV_COLUMNS = ("ratio", "eta", "trace_abs", "im_mu", "stable")


def _cell(args):
    ratio, eta, tol, convention = args
    try:
        trace = trace_at(ratio, eta, tol, convention)
    except Exception as exc:  # recorded in-band
        return math.nan, math.nan, False, f"{type(exc).__name__}: {exc}"
    t = abs(trace)
    im = abs(exponent_from_trace(trace).imag) if t > 2 else 0.0
    return t, im, t <= 2.0, None


def stability_map(grid: GridSpec = GridSpec(), tol=DEFAULT_TOL, threads=1, convention="drive"):
    ratios, etas = grid.axes()
    jobs = [(float(r), float(e), tol, convention) for r in ratios for e in etas]
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_cell, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        results = [_cell(j) for j in jobs]
    shape = (len(ratios), len(etas))
    trace_abs = np.array([r[0] for r in results]).reshape(shape)
    im_mu = np.array([r[1] for r in results]).reshape(shape)
    stable = np.array([r[2] for r in results], dtype=bool).reshape(shape)
    errors = tuple(r[3] for r in results)
    return StabilityMap(ratios, etas, trace_abs, im_mu, stable, errors, convention)
