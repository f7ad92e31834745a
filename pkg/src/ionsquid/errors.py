"""Exception and warning types shared across the package.

The CLI maps these onto exit codes, so every failure mode that a user can
trigger from the command line has its own class here.
"""


class ParameterError(ValueError):
    """Invalid physical or numerical input. ``field`` names the offender."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class IntegrationError(RuntimeError):
    """The ODE integrator gave up (usually step-size underflow)."""

    def __init__(self, message, at=None):
        self.at = at
        if at is not None:
            message = f"{message} (at u={at:.6g})"
        super().__init__(message)


class UnstableError(RuntimeError):
    """The Floquet exponent has a nonzero imaginary part."""

    def __init__(self, im_mu, trace):
        self.im_mu = im_mu
        self.trace = trace
        super().__init__(
            f"unstable regime: |trace|={abs(trace):.12g} > 2, Im(mu)={im_mu:.6g}"
        )


class DegenerateFloquetError(RuntimeError):
    """Monodromy has a repeated eigenvalue; no unique Floquet mode exists."""


class MarginalStabilityWarning(UserWarning):
    pass


class ResolutionError(ValueError):
    """Requested Fourier index exceeds what the sample grid resolves."""


class DecompositionError(ValueError):
    pass


class BoundaryNotFoundError(RuntimeError):
    pass


class DriveTooStrongError(ValueError):
    pass


class SynthesisMismatchError(RuntimeError):
    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(f"round-trip residual {residual:.3e} exceeds tol {tol:.1e}")


class NearResonanceWarning(UserWarning):
    pass


class NoCleanExchangeError(RuntimeError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class DynamicsInstabilityError(RuntimeError):
    pass
