"""Exception hierarchy shared by the solver, spectra and CLI layers."""


class SimulationError(Exception):
    """Base class for every error raised by this package."""

    #: short machine-readable tag written into CLI error records
    code = "simulation_error"


class DegeneratePumps(SimulationError):
    code = "degenerate_pumps"


class UnequalOccupations(SimulationError):
    code = "unequal_occupations"


class NonHermitianResult(SimulationError):
    code = "non_hermitian_result"


class SidebandOverflow(SimulationError):
    code = "sideband_overflow"


class PhaseConditionViolated(SimulationError):
    code = "phase_condition_violated"


class NotConverged(SimulationError):
    code = "not_converged"


class ExtractionIllConditioned(SimulationError):
    code = "extraction_ill_conditioned"


class IllConditioned(SimulationError):
    code = "ill_conditioned"


class ParseError(SimulationError):
    code = "parse_error"


class ValidationError(SimulationError):
    code = "validation_error"


class RegimeWarning(UserWarning):
    """Parameters leave the regime where the approximations are trustworthy."""
