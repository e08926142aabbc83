"""Frequency-domain simulator for two-tone backaction-evading detection of
two-mode mechanical squeezing in a cavity optomechanical system."""
from .errors import (
    DegeneratePumps, ExtractionIllConditioned, IllConditioned, NonHermitianResult,
    NotConverged, ParseError, PhaseConditionViolated, RegimeWarning, SidebandOverflow,
    SimulationError, UnequalOccupations, ValidationError,
)
from .model import (
    BogolyubovCoeffs, EffectiveProbe, ProbeParams, SystemParams, bogolyubov, chi_cavity,
    chi_mech, denominator_Delta, effective_probe, etas,
)
from .linfield import (
    Bath, CorrelatorTable, LinearField, NoiseLabel, bogolyubov_bath_correlators, dagger_of,
    original_correlators, symmetrized_spectrum,
)
from .perturb import (
    OrderedSolution, first_order_cavity, first_order_quadrature_form, next_order,
    solve_orders, zeroth_order,
)
from .spectra import (
    READOUT_TABLE, DuanResult, Method, QuadratureSelector, SpectrumCurve, duan_quantity,
    extract_quadrature_spectrum, integrate_variance, output_spectrum, quadrature_spectrum,
    shifted_quadrature_field, sweep_duan,
)
from .bae import backaction_on_quadratures, bae_report, second_order_cavity_factor
from .floquet import SidebandSystem, oracle_output_spectrum, solve_sidebands
from .config import RunConfig, parse_config, serialize_config

__version__ = "0.1.0"
