"""Physical parameters of the circuit, ion and drive, plus unit conversion.

All inputs are SI.  Solvers work in the canonical Mathieu variables
``u = omega_d t / 2`` with ``A = 4 (omega_0/omega_d)^2`` and
``Q = -eta A / 2``; the conversion lives here and nowhere else.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ParameterError

# CODATA 2018 (exact in the 2019 SI)
HBAR = 1.054571817e-34
E_CHARGE = 1.602176634e-19
PHI0_TILDE = HBAR / (2 * E_CHARGE)


def _require_positive(obj, names):
    for name in names:
        value = getattr(obj, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ParameterError(name, f"must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class CircuitParams:
    """rf-SQUID shunting the trap capacitor.

    Attributes:
        L: loop inductance (H)
        C: coupling capacitance (F)
        C_J: junction capacitance (F)
        E_J: Josephson energy (J)
        phi0_tilde: reduced flux quantum hbar/2e (Wb)
    """

    L: float
    C: float
    C_J: float
    E_J: float
    phi0_tilde: float = PHI0_TILDE

    def __post_init__(self):
        _require_positive(self, ("L", "C", "C_J", "E_J", "phi0_tilde"))

    @property
    def C_sigma(self) -> float:
        return self.C + self.C_J

    @property
    def I_c(self) -> float:
        return self.E_J / self.phi0_tilde


@dataclass(frozen=True)
class IonParams:
    """Trapped ion facing the capacitor plates.

    Attributes:
        m: ion mass (kg)
        omega_z: bare trap frequency (rad/s)
        d: plate separation (m)
        xi: geometric factor of the capacitor, in [0, 1]
    """

    m: float
    omega_z: float
    d: float
    xi: float

    def __post_init__(self):
        _require_positive(self, ("m", "omega_z", "d"))
        if not (isinstance(self.xi, (int, float)) and 0 <= self.xi <= 1):
            raise ParameterError("xi", f"must lie in [0, 1], got {self.xi!r}")


@dataclass(frozen=True)
class DriveParams:
    """Sinusoidal modulation of the inverse inductance."""

    eta: float
    omega_d: float

    def __post_init__(self):
        if not (isinstance(self.eta, (int, float)) and math.isfinite(self.eta) and self.eta >= 0):
            raise ParameterError("eta", f"must be finite and >= 0, got {self.eta!r}")
        _require_positive(self, ("omega_d",))

    @property
    def tau(self) -> float:
        return 2 * math.pi / self.omega_d


@dataclass(frozen=True)
class DerivedQuantities:
    omega_0: float
    beta: float
    omega_i: float
    z_0: float


def dressing_term(circuit: CircuitParams, ion: IonParams) -> float:
    """Squared frequency shift e^2 xi^2 / (d^2 C_sigma m) of the ion."""
    return (E_CHARGE * ion.xi / ion.d) ** 2 / (circuit.C_sigma * ion.m)


def derive(circuit: CircuitParams, ion: IonParams) -> DerivedQuantities:
    omega_0 = 1.0 / math.sqrt(circuit.L * circuit.C_sigma)
    beta = circuit.L * circuit.E_J / circuit.phi0_tilde**2
    omega_i = math.sqrt(ion.omega_z**2 + dressing_term(circuit, ion))
    z_0 = math.sqrt(HBAR / (2 * ion.m * omega_i))
    return DerivedQuantities(omega_0=omega_0, beta=beta, omega_i=omega_i, z_0=z_0)


@dataclass(frozen=True)
class SystemParams:
    circuit: CircuitParams
    ion: IonParams
    drive: DriveParams
    derived: DerivedQuantities = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "derived", derive(self.circuit, self.ion))

    def with_drive(self, eta=None, omega_d=None) -> SystemParams:
        drive = DriveParams(
            eta=self.drive.eta if eta is None else eta,
            omega_d=self.drive.omega_d if omega_d is None else omega_d,
        )
        return SystemParams(self.circuit, self.ion, drive)

    def to_dict(self) -> dict:
        return {
            "circuit": asdict(self.circuit),
            "ion": asdict(self.ion),
            "drive": asdict(self.drive),
        }


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless view: Mathieu (A, Q) plus the ratios the solvers need."""

    A: float
    Q: float
    ratio: float  # omega_i / omega_0
    beta: float
    eta: float

    @property
    def omega_d_over_omega_0(self) -> float:
        return 2.0 / math.sqrt(self.A)


def mathieu_AQ(eta: float, omega_d_over_omega_0: float) -> tuple[float, float]:
    A = 4.0 / omega_d_over_omega_0**2
    return A, -eta * A / 2.0


def to_dimensionless(p: SystemParams) -> ScaledParams:
    d = p.derived
    A, Q = mathieu_AQ(p.drive.eta, p.drive.omega_d / d.omega_0)
    return ScaledParams(A=A, Q=Q, ratio=d.omega_i / d.omega_0, beta=d.beta, eta=p.drive.eta)


def from_dimensionless(s: ScaledParams, omega_0: float) -> dict:
    """Invert :func:`to_dimensionless` given the LC frequency (rad/s)."""
    return {
        "omega_d": omega_0 * 2.0 / math.sqrt(s.A),
        "eta": -2.0 * s.Q / s.A,
        "omega_i": s.ratio * omega_0,
        "beta": s.beta,
    }


def ion_for_dressed_frequency(omega_i, circuit: CircuitParams, m, d, xi) -> IonParams:
    """Build IonParams whose dressed frequency equals ``omega_i``."""
    probe = IonParams(m=m, omega_z=omega_i, d=d, xi=xi)
    shift = dressing_term(circuit, probe)
    if shift >= omega_i**2:
        raise ParameterError("omega_z", "capacitive dressing exceeds requested omega_i")
    return IonParams(m=m, omega_z=math.sqrt(omega_i**2 - shift), d=d, xi=xi)


def paper_params(eta=None, omega_d=None) -> SystemParams:
    """Be+ ion at 1 MHz beside a 1 GHz, 46 fF rf-SQUID with beta = 0.08.

    The drive defaults to omega_d = omega_0 - omega_i at the nominal stability
    limit eta = 2 sqrt(omega_i/omega_0).
    """
    c_sigma = 46e-15
    omega_0 = 2 * math.pi * 1e9
    L = 1.0 / (omega_0**2 * c_sigma)
    beta = 0.08
    circuit = CircuitParams(L=L, C=40e-15, C_J=6e-15, E_J=beta * PHI0_TILDE**2 / L)
    omega_i = 2 * math.pi * 1e6
    ion = ion_for_dressed_frequency(omega_i, circuit, m=1.5e-26, d=25e-6, xi=0.25)
    drive = DriveParams(
        eta=2 * math.sqrt(omega_i / omega_0) if eta is None else eta,
        omega_d=omega_0 - omega_i if omega_d is None else omega_d,
    )
    return SystemParams(circuit, ion, drive)


_SECTIONS = {"circuit": CircuitParams, "ion": IonParams, "drive": DriveParams}


def params_from_dict(doc: dict) -> SystemParams:
    """Parse ``{"circuit": ..., "ion": ..., "drive": ...}``; unknown keys are errors."""
    if not isinstance(doc, dict):
        raise ParameterError("<root>", "parameter document must be a JSON object")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ParameterError(sorted(unknown)[0], "unknown top-level key")
    parts = {}
    for name, cls in _SECTIONS.items():
        if name not in doc:
            raise ParameterError(name, "missing section")
        section = doc[name]
        allowed = {f.name for f in fields(cls)}
        bad = set(section) - allowed
        if bad:
            raise ParameterError(f"{name}.{sorted(bad)[0]}", "unknown key")
        try:
            parts[name] = cls(**section)
        except TypeError as exc:
            raise ParameterError(name, str(exc)) from None
    return SystemParams(parts["circuit"], parts["ion"], parts["drive"])


def load_params(path) -> SystemParams:
    with open(Path(path)) as fh:
        return params_from_dict(json.load(fh))
