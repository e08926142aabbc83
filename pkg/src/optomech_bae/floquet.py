"""Harmonic-balance solution of the time-periodic linearised equations.

The probe tones modulate the couplings at ``e^{+-i delta t}``, so in the
frequency domain every field at ``omega`` couples to its copies at
``omega +- delta``.  Truncating the comb to sidebands ``-K..K`` gives a dense
block-tridiagonal system of size ``6 (2K+1)`` per frequency, solved directly
in the original (a, b_1, b_2) basis with no perturbative or on-resonance
approximation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, NotConverged, ValidationError
from .linfield import Bath, FieldFn, LinearField, NoiseLabel, original_correlators, spectrum_of
from .model import ProbeParams, SystemParams

DEFAULT_K = 6
COND_LIMIT = 1e12
CONVERGENCE_RTOL = 1e-10

# state vector per sideband: a, a^+, b1, b1^+, b2, b2^+
MODES = ("a", "b1", "b2")
_NOISE = ((Bath.EXT, 0), (Bath.INT, 0), (Bath.MECH1, 2), (Bath.MECH2, 4))


def coupling_matrices(params: SystemParams, probe: ProbeParams | None) -> dict[int, np.ndarray]:
    """Drift matrices ``M_k`` multiplying ``e^{i k delta t}`` in ``dx/dt = sum_k M_k x e^{ik delta t}``."""
    probe = probe or ProbeParams()
    lam = probe.lam
    d = params.delta
    g_minus = {0: params.G_minus,
               1: lam * probe.G_p * complex(math.cos(probe.phi_p), math.sin(probe.phi_p)),
               -1: lam * probe.G_q * complex(math.cos(probe.phi_q), math.sin(probe.phi_q))}
    g_plus = {0: params.G_plus,
              1: lam * probe.G_p * complex(math.cos(probe.phi_p), -math.sin(probe.phi_p)),
              -1: lam * probe.G_q * complex(math.cos(probe.phi_q), -math.sin(probe.phi_q))}
    M = {k: np.zeros((6, 6), dtype=complex) for k in (-1, 0, 1)}
    M[0][0, 0] = -(params.kappa / 2 - 1j * d)
    M[0][2, 2] = -(params.gamma / 2 + 1j * d)
    M[0][4, 4] = -(params.gamma / 2 - 1j * d)
    for k in (-1, 0, 1):
        for b in (2, 4):
            # da/dt  = -i [G_-(t) b + G_+(t) b^+]
            M[k][0, b] += -1j * g_minus[k]
            M[k][0, b + 1] += -1j * g_plus[k]
            # db/dt  = -i [G_-(t)^* a + G_+(t) a^+]
            M[-k][b, 0] += -1j * np.conj(g_minus[k])
            M[k][b, 1] += -1j * g_plus[k]
    for k in (-1, 0, 1):
        for r in (0, 2, 4):
            for c in (0, 2, 4):
                M[k][r + 1, c + 1] = np.conj(M[-k][r, c])
                M[k][r + 1, c] = np.conj(M[-k][r, c + 1])
    return M


def _noise_labels(K: int) -> list[NoiseLabel]:
    return [NoiseLabel(bath, dag, m) for m in range(-K, K + 1)
            for bath, _ in _NOISE for dag in (False, True)]


@dataclass
class SidebandSystem:
    """Truncated harmonic-balance system at a set of frequencies."""

    params: SystemParams
    probe: ProbeParams | None
    K: int = DEFAULT_K

    def __post_init__(self):
        if self.K < 0:
            raise ValidationError("K: sideband truncation must be >= 0")
        self.M = coupling_matrices(self.params, self.probe)
        self.labels = _noise_labels(self.K)
        n = 2 * self.K + 1
        src = np.zeros((6 * n, len(self.labels)))
        col = {lab: i for i, lab in enumerate(self.labels)}
        rates = {Bath.EXT: self.params.kappa_E, Bath.INT: self.params.kappa_I,
                 Bath.MECH1: self.params.gamma, Bath.MECH2: self.params.gamma}
        for mi, m in enumerate(range(-self.K, self.K + 1)):
            for bath, row in _NOISE:
                for dag in (False, True):
                    src[6 * mi + row + dag, col[NoiseLabel(bath, dag, m)]] = math.sqrt(rates[bath])
        self.source = src

    @property
    def size(self) -> int:
        return 6 * (2 * self.K + 1)

    def matrix(self, omega) -> np.ndarray:
        """Batched system matrices, shape ``(len(omega), size, size)``."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        n = 2 * self.K + 1
        L = np.zeros((omega.size, self.size, self.size), dtype=complex)
        eye = np.eye(6)
        for mi, m in enumerate(range(-self.K, self.K + 1)):
            s = slice(6 * mi, 6 * mi + 6)
            Om = omega + m * self.params.delta
            L[:, s, s] = -1j * Om[:, None, None] * eye - self.M[0]
            if mi + 1 < n:
                L[:, s, 6 * (mi + 1):6 * (mi + 2)] = -self.M[1]
            if mi > 0:
                L[:, s, 6 * (mi - 1):6 * mi] = -self.M[-1]
        return L

    def condition_numbers(self, omega) -> np.ndarray:
        return np.linalg.cond(self.matrix(omega))

    def solve(self, omega, check_condition: bool = True, chunk: int = 256) -> np.ndarray:
        """Response of every state component to every noise label.

        Returns shape ``(len(omega), size, n_labels)``.
        """
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        out = np.empty((omega.size, self.size, len(self.labels)), dtype=complex)
        for i in range(0, omega.size, chunk):
            L = self.matrix(omega[i:i + chunk])
            if check_condition:
                cond = np.linalg.cond(L)
                if np.any(~np.isfinite(cond)) or np.max(cond) > COND_LIMIT:
                    raise IllConditioned(
                        f"sideband system condition number {np.max(cond):.3e} exceeds {COND_LIMIT:g}")
            out[i:i + chunk] = np.linalg.solve(L, np.broadcast_to(self.source, (L.shape[0],) + self.source.shape))
        return out

    def field(self, x: np.ndarray, omega, mode: str, sideband: int = 0, dagger: bool = False) -> LinearField:
        """LinearField of ``mode^(dagger)(omega + sideband delta)`` from a ``solve`` result."""
        if abs(sideband) > self.K:
            raise ValidationError(f"sideband {sideband} outside truncation K={self.K}")
        row = 6 * (sideband + self.K) + 2 * MODES.index(mode) + int(dagger)
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        coeffs = x[:, row, :]
        terms = {lab: coeffs[:, j] for j, lab in enumerate(self.labels)
                 if np.any(coeffs[:, j] != 0)}
        return LinearField(omega, terms)


@dataclass(frozen=True)
class SidebandSolution:
    """Central-sideband fields (a, b_1, b_2) and access to all sidebands."""

    system: SidebandSystem
    omega: np.ndarray
    x: np.ndarray

    @property
    def a(self) -> LinearField:
        return self.system.field(self.x, self.omega, "a")

    @property
    def b1(self) -> LinearField:
        return self.system.field(self.x, self.omega, "b1")

    @property
    def b2(self) -> LinearField:
        return self.system.field(self.x, self.omega, "b2")

    def sideband(self, mode: str, m: int, dagger: bool = False) -> LinearField:
        return self.system.field(self.x, self.omega, mode, m, dagger)


def _central(x: np.ndarray, K: int) -> np.ndarray:
    return x[:, 6 * K:6 * K + 6, :]


def convergence_residual(params: SystemParams, probe: ProbeParams | None, omega,
                         K: int = DEFAULT_K) -> float:
    """Relative change of the central-sideband response between K and K+2."""
    lo = SidebandSystem(params, probe, K)
    hi = SidebandSystem(params, probe, K + 2)
    x_lo = _central(lo.solve(omega), K)
    x_hi = _central(hi.solve(omega), K + 2)
    # the K+2 system has two extra noise sidebands on each side; compare common labels
    idx = [hi.labels.index(lab) for lab in lo.labels]
    x_hi = x_hi[:, :, idx]
    scale = max(np.max(np.abs(x_hi)), np.finfo(float).tiny)
    return float(np.max(np.abs(x_hi - x_lo)) / scale)


def solve_sidebands(params: SystemParams, probe: ProbeParams | None, omega,
                    K: int = DEFAULT_K, check_convergence: bool = True) -> SidebandSolution:
    """Harmonic-balance fields at ``omega`` with sidebands truncated at K."""
    if K < 2:
        raise ValidationError("K: sideband truncation must be >= 2")
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    system = SidebandSystem(params, probe, K)
    x = system.solve(omega)
    if check_convergence:
        res = convergence_residual(params, probe, omega, K)
        if res > CONVERGENCE_RTOL:
            raise NotConverged(f"sideband truncation K={K}: relative change {res:.3e} "
                               f"to K+2 exceeds {CONVERGENCE_RTOL:g}")
    return SidebandSolution(system, omega, x)


def oracle_fields(params: SystemParams, probe: ProbeParams | None,
                  K: int = DEFAULT_K) -> tuple[FieldFn, FieldFn, FieldFn]:
    """Field functions ``omega -> LinearField`` for a, b_1, b_2 from the oracle."""
    system = SidebandSystem(params, probe, K)

    def make(mode):
        def F(omega):
            omega = np.atleast_1d(np.asarray(omega, dtype=float))
            return system.field(system.solve(omega), omega, mode)
        return F
    return make("a"), make("b1"), make("b2")


def oracle_output_spectrum(params: SystemParams, probe: ProbeParams | None, theta: float,
                           grid, K: int = DEFAULT_K, check_convergence: bool = True):
    """Homodyne spectrum of the output field from the full sideband solution."""
    from .spectra import SpectrumCurve, homodyne_field, fingerprint

    grid = np.asarray(grid, dtype=float)
    if check_convergence:
        res = convergence_residual(params, probe, grid, K)
        if res > CONVERGENCE_RTOL:
            raise NotConverged(f"sideband truncation K={K}: relative change {res:.3e}")
    a, _, _ = oracle_fields(params, probe, K)
    X = homodyne_field(a, theta, params)
    values = spectrum_of(X, grid, original_correlators(params))
    return SpectrumCurve.build(grid, values, fingerprint(params, probe, theta=theta, K=K,
                                                         kind="oracle_output"))
