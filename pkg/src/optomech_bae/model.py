"""Scalar building blocks of the linearised two-pump, four-probe model.

Frequencies are in units of the total cavity linewidth, hbar = 1.  Every
function accepts scalar or array ``omega`` and broadcasts.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DegeneratePumps, RegimeWarning, ValidationError

#: phases closer than this to 0 or pi (mod 2 pi) satisfy the BAE condition
BAE_PHASE_TOL = 1e-10


@dataclass(frozen=True)
class SystemParams:
    kappa_E: float = 0.9
    kappa_I: float = 0.1
    gamma: float = 1e-5
    delta: float = 0.1
    G_minus: float = 4.8e-2
    G_plus: float = 4.0e-2
    n_1: float = 10.0
    n_2: float = 10.0
    n_E: float = 0.0
    n_I: float = 0.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ValidationError(f"{name}: must be finite, got {value!r}")
        if self.kappa_E < 0 or self.kappa_I < 0:
            raise ValidationError("kappa_E, kappa_I: must be >= 0")
        if self.kappa <= 0:
            raise ValidationError("kappa_E + kappa_I: total linewidth must be > 0")
        if self.gamma <= 0:
            raise ValidationError("gamma: must be > 0")
        if self.delta < 0:
            raise ValidationError("delta: must be >= 0")
        if self.G_plus < 0 or self.G_minus < 0:
            raise ValidationError("G_minus, G_plus: must be >= 0")
        for name in ("n_1", "n_2", "n_E", "n_I"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name}: occupation must be >= 0")

    @property
    def kappa(self) -> float:
        return self.kappa_E + self.kappa_I

    def replace(self, **changes) -> "SystemParams":
        return SystemParams(**{**asdict(self), **changes})

    def regime_warnings(self) -> list[str]:
        out = []
        if not self.gamma < 0.1 * self.delta:
            out.append(f"gamma={self.gamma:g} is not << delta={self.delta:g}")
        if not self.delta < self.kappa:
            out.append(f"delta={self.delta:g} is not < kappa={self.kappa:g}")
        return out

    def check_regime(self) -> None:
        for msg in self.regime_warnings():
            warnings.warn(msg, RegimeWarning, stacklevel=2)


@dataclass(frozen=True)
class ProbeParams:
    G_p: float = 0.0
    G_q: float = 0.0
    phi_p: float = 0.0
    phi_q: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if self.G_p < 0 or self.G_q < 0:
            raise ValidationError("G_p, G_q: probe amplitudes must be >= 0")
        if self.lam < 0:
            raise ValidationError("lambda: must be >= 0")
        for name in ("phi_p", "phi_q"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name}: must be finite")

    def replace(self, **changes) -> "ProbeParams":
        return ProbeParams(**{**asdict(self), **changes})

    @property
    def scale(self) -> float:
        return max(self.G_p, self.G_q)

    def weakness_warning(self, params: SystemParams) -> str | None:
        calG2 = params.G_minus**2 - params.G_plus**2
        if calG2 > 0 and self.scale > 0.1 * math.sqrt(calG2):
            return (f"probe amplitude {self.scale:g} exceeds 0.1*calG; "
                    "perturbative truncation may be inaccurate")
        return None


@dataclass(frozen=True)
class BogolyubovCoeffs:
    u: float
    v: float
    calG: float


@dataclass(frozen=True)
class EffectiveProbe:
    calG_p: float
    calG_q: float
    phi_1: float
    phi_2: float
    bae_phase_ok: bool
    # sideband couplings of the probe tones in the Bogolyubov frame:
    # (upper tone on beta, upper tone on beta^+, lower tone on beta, lower tone on beta^+)
    g_sidebands: tuple[complex, complex, complex, complex] = field(repr=False)

    @property
    def phase_difference(self) -> float:
        return self.phi_1 - self.phi_2


def chi_cavity(omega, params: SystemParams):
    """Cavity susceptibility ``1 / (kappa/2 - i omega)``."""
    return 1.0 / (params.kappa / 2 - 1j * np.asarray(omega, dtype=float))


def chi_mech(omega, params: SystemParams):
    """Mechanical susceptibility ``1 / (gamma/2 - i omega)``."""
    return 1.0 / (params.gamma / 2 - 1j * np.asarray(omega, dtype=float))


def bogolyubov(params: SystemParams) -> BogolyubovCoeffs:
    """Bogolyubov weights for beta_1 = u b_1 + v b_2^+, beta_2 = u b_2 + v b_1^+."""
    if not params.G_minus > params.G_plus:
        raise DegeneratePumps(
            f"G_minus={params.G_minus!r} must exceed G_plus={params.G_plus!r}")
    calG = math.sqrt((params.G_minus - params.G_plus) * (params.G_minus + params.G_plus))
    return BogolyubovCoeffs(params.G_minus / calG, params.G_plus / calG, calG)


def _branch_phase(u: float, v: float, phi: float) -> float:
    # two-argument form of arctan[(u+v)/(u-v) tan(phi)]
    return math.atan2((u + v) * math.sin(phi), (u - v) * math.cos(phi))


def phase_condition_ok(phi_1: float, phi_2: float, tol: float = BAE_PHASE_TOL) -> bool:
    d = math.remainder(phi_1 - phi_2, math.pi)
    return abs(d) <= tol


def effective_probe(params: SystemParams, probe: ProbeParams) -> EffectiveProbe:
    bc = bogolyubov(params)
    u, v = bc.u, bc.v
    lam = probe.lam

    def pair(G, phi):
        g_lo = G * complex(math.cos(phi), math.sin(phi))   # G_{., -} = G e^{+i phi}
        g_hi = G * complex(math.cos(phi), -math.sin(phi))  # G_{., +} = G e^{-i phi}
        return lam * (u * g_lo - v * g_hi), lam * (u * g_hi - v * g_lo)

    g1, g3 = pair(probe.G_p, probe.phi_p)
    g2, g4 = pair(probe.G_q, probe.phi_q)
    calG_p = abs(u * np.exp(-1j * probe.phi_p) - v * np.exp(1j * probe.phi_p)) * probe.G_p
    calG_q = abs(u * np.exp(-1j * probe.phi_q) - v * np.exp(1j * probe.phi_q)) * probe.G_q
    phi_1 = _branch_phase(u, v, probe.phi_p)
    phi_2 = _branch_phase(u, v, probe.phi_q)
    return EffectiveProbe(
        calG_p=float(calG_p), calG_q=float(calG_q), phi_1=phi_1, phi_2=phi_2,
        # with one tone off there is no relative phase to constrain
        bae_phase_ok=(probe.G_p == 0 or probe.G_q == 0 or phase_condition_ok(phi_1, phi_2)),
        g_sidebands=(g1, g3, g2, g4),
    )


def denominator_Delta(omega, params: SystemParams):
    calG = bogolyubov(params).calG
    d = params.delta
    return 1 + calG**2 * chi_cavity(omega + d, params) * (
        chi_mech(omega - d, params) + chi_mech(omega + d, params))


def etas(omega, params: SystemParams):
    """``(eta_1, eta_2)`` with eta_{1,2} = 1 + calG^2 chi_a(w+d) chi_m(w -/+ d)."""
    calG = bogolyubov(params).calG
    d = params.delta
    ca = chi_cavity(omega + d, params)
    return (1 + calG**2 * ca * chi_mech(omega - d, params),
            1 + calG**2 * ca * chi_mech(omega + d, params))
