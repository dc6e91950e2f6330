"""Exception hierarchy shared by all engines."""


class BowtieCapError(Exception):
    """Base class for every error raised by this package."""


class MalformedSpec(BowtieCapError, ValueError):
    """A weight specification is structurally invalid."""


class NonIntegrable(BowtieCapError, ValueError):
    """The radial density is not integrable near the origin."""


class OutOfRange(BowtieCapError, ValueError):
    """Parameters fall outside the domain of a closed-form classifier."""


class QuadratureFailure(BowtieCapError, ArithmeticError):
    """Adaptive quadrature ran out of budget before meeting its tolerance."""


class EssinfUnresolved(BowtieCapError, ArithmeticError):
    """The essential infimum could not be bracketed."""


class OracleDisagreement(BowtieCapError, ArithmeticError):
    """The two solution paths of the discrete capacity oracle disagree."""


class WindowTooNarrow(BowtieCapError, ValueError):
    """A radius window yields too few sample pairs for an estimate."""


class ReproductionMismatch(BowtieCapError):
    """A scripted reproduction recipe failed one or more claims."""

    def __init__(self, failures, bundle=None):
        self.failures = list(failures)
        self.bundle = bundle
        lines = [f"{f['claim']}: measured {f['measured']}" for f in self.failures]
        super().__init__("reproduction failed:\n  " + "\n  ".join(lines))
