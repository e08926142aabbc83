"""Linear combinations of frequency-shifted input-noise operators.

A :class:`LinearField` evaluated on a frequency array ``omega`` stores, for
every noise label ``(bath, dagger, shift)``, the complex coefficient array
multiplying ``xi_bath^(dagger)(omega + shift * delta)``.  Solutions are
passed around as *field functions* ``omega -> LinearField`` so that they can
be re-evaluated at shifted or mirrored frequencies.

Second moments follow ``<xi_k(w) xi_l(w')> = C_kl delta(w + w')`` and spectra
are densities against ``d omega / 2 pi``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple

import numpy as np

from .errors import NonHermitianResult, SidebandOverflow, UnequalOccupations
from .model import SystemParams, bogolyubov

DEFAULT_MAX_SHIFT = 8


class Bath(enum.Enum):
    EXT = "aE"
    INT = "aI"
    MECH1 = "b1"
    MECH2 = "b2"
    BETA1 = "beta1"
    BETA2 = "beta2"


ORIGINAL_BATHS = (Bath.EXT, Bath.INT, Bath.MECH1, Bath.MECH2)
BOGOLYUBOV_BATHS = (Bath.EXT, Bath.INT, Bath.BETA1, Bath.BETA2)


class NoiseLabel(NamedTuple):
    bath: Bath
    dagger: bool
    shift: int

    def __str__(self):
        return f"{self.bath.value}{'+' if self.dagger else ''}[{self.shift:+d}]"


@dataclass
class LinearField:
    omega: np.ndarray
    terms: dict[NoiseLabel, np.ndarray]

    # make ``ndarray * field`` dispatch to __rmul__ instead of broadcasting
    __array_ufunc__ = None

    @classmethod
    def zero(cls, omega) -> "LinearField":
        return cls(np.asarray(omega, dtype=float), {})

    @classmethod
    def noise(cls, omega, bath: Bath, dagger: bool = False, shift: int = 0,
              coeff=1.0) -> "LinearField":
        omega = np.asarray(omega, dtype=float)
        c = np.broadcast_to(np.asarray(coeff, dtype=complex), omega.shape).copy()
        return cls(omega, {NoiseLabel(bath, dagger, shift): c})

    def __add__(self, other: "LinearField") -> "LinearField":
        terms = {k: v.copy() for k, v in self.terms.items()}
        for k, v in other.terms.items():
            if k in terms:
                terms[k] = terms[k] + v
            else:
                terms[k] = v.copy()
        return LinearField(self.omega, terms)

    def __sub__(self, other: "LinearField") -> "LinearField":
        return self + (-1) * other

    def __mul__(self, c) -> "LinearField":
        return LinearField(self.omega, {k: c * v for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return -1 * self

    @property
    def max_shift(self) -> int:
        return max((abs(k.shift) for k in self.terms), default=0)

    def norm(self) -> np.ndarray:
        """Euclidean norm of the coefficient vector at each frequency."""
        total = np.zeros(self.omega.shape)
        for v in self.terms.values():
            total = total + np.abs(v) ** 2
        return np.sqrt(total)

    def relabel(self, dshift: int, max_shift: int = DEFAULT_MAX_SHIFT) -> "LinearField":
        terms = {}
        for k, v in self.terms.items():
            s = k.shift + dshift
            if abs(s) > max_shift:
                raise SidebandOverflow(f"shift {s} exceeds max sideband order {max_shift}")
            terms[NoiseLabel(k.bath, k.dagger, s)] = v
        return LinearField(self.omega, terms)

    def pruned(self, atol: float = 0.0) -> "LinearField":
        return LinearField(self.omega, {k: v for k, v in self.terms.items()
                                        if np.any(np.abs(v) > atol)})


FieldFn = Callable[[np.ndarray], LinearField]


def zero_fn(omega) -> LinearField:
    return LinearField.zero(omega)


def dagger_of(F: FieldFn) -> FieldFn:
    """Field function of the Hermitian conjugate operator.

    Each term ``c(w) xi(w + s d)`` becomes ``conj(c(-w)) xi^+(w - s d)``.
    """
    def Fd(omega):
        omega = np.asarray(omega, dtype=float)
        src = F(-omega)
        terms = {NoiseLabel(k.bath, not k.dagger, -k.shift): np.conj(v)
                 for k, v in src.terms.items()}
        return LinearField(omega, terms)
    return Fd


def shifted(F: FieldFn, k: int, delta: float) -> FieldFn:
    """``omega -> F(omega + k delta)``; every label shift moves by ``k``."""
    if k == 0:
        return F

    def Fs(omega):
        omega = np.asarray(omega, dtype=float)
        out = F(omega + k * delta)
        return LinearField(omega, out.terms).relabel(k, max_shift=np.iinfo(np.int64).max)
    return Fs


def combine(*pairs) -> FieldFn:
    """Linear combination ``sum c_i F_i`` of field functions.

    Each coefficient may be a constant or a callable of omega.
    """
    def Fc(omega):
        omega = np.asarray(omega, dtype=float)
        acc = LinearField.zero(omega)
        for c, F in pairs:
            cval = c(omega) if callable(c) else c
            acc = acc + cval * F(omega)
        return acc
    return Fc


def scaled(c, F: FieldFn) -> FieldFn:
    return combine((c, F))


def check_max_shift(field: LinearField, max_shift: int = DEFAULT_MAX_SHIFT) -> LinearField:
    if field.max_shift > max_shift:
        raise SidebandOverflow(
            f"field reaches sideband {field.max_shift}, limit is {max_shift}")
    return field


# --------------------------------------------------------------------------
# correlators

@dataclass(frozen=True)
class CorrelatorTable:
    """Second moments ``C[(bath_k, dag_k), (bath_l, dag_l)]`` of the inputs."""

    moments: Mapping[tuple[tuple[Bath, bool], tuple[Bath, bool]], float]
    basis: str

    def get(self, k, l) -> float:
        return self.moments.get((k, l), 0.0)

    def symmetrized(self, k, l) -> float:
        """Coefficient of ``1/2 <{xi_k, xi_l^+}>``."""
        lbar = (l[0], not l[1])
        return 0.5 * (self.get(k, lbar) + self.get(lbar, k))

    def is_hermitian(self, atol: float = 1e-14) -> bool:
        for (k, l), c in self.moments.items():
            kb, lb = (k[0], not k[1]), (l[0], not l[1])
            if abs(c - np.conj(self.get(lb, kb))) > atol:
                return False
        return True

    def keys(self):
        ks = set()
        for k, l in self.moments:
            ks.add(k)
            ks.add(l)
        return sorted(ks, key=lambda x: (x[0].value, x[1]))


def _thermal(bath: Bath, n: float, out: dict) -> None:
    out[((bath, False), (bath, True))] = n + 1.0
    out[((bath, True), (bath, False))] = n


def original_correlators(params: SystemParams) -> CorrelatorTable:
    m: dict = {}
    _thermal(Bath.EXT, params.n_E, m)
    _thermal(Bath.INT, params.n_I, m)
    _thermal(Bath.MECH1, params.n_1, m)
    _thermal(Bath.MECH2, params.n_2, m)
    return CorrelatorTable(m, "original")


def bogolyubov_bath_correlators(params: SystemParams,
                                extra_one: bool = False) -> CorrelatorTable:
    """Correlated thermal moments of beta_in = u b_in + v b_in'^+.

    ``extra_one`` adds a spurious ``+1`` to <beta beta^+>; it exists only so
    that the basis change check can show that variant to be inconsistent.
    """
    if params.n_1 != params.n_2:
        raise UnequalOccupations(
            f"n_1={params.n_1!r} and n_2={params.n_2!r} must be equal")
    bc = bogolyubov(params)
    u, v, n = bc.u, bc.v, params.n_1
    m: dict = {}
    _thermal(Bath.EXT, params.n_E, m)
    _thermal(Bath.INT, params.n_I, m)
    bb_dag = (n + 1) * u**2 + n * v**2 + (1.0 if extra_one else 0.0)
    b_dag_b = (n + 1) * v**2 + n * u**2
    cross = (2 * n + 1) * u * v
    for beta in (Bath.BETA1, Bath.BETA2):
        m[((beta, False), (beta, True))] = bb_dag
        m[((beta, True), (beta, False))] = b_dag_b
    for dag in (False, True):
        m[((Bath.BETA1, dag), (Bath.BETA2, dag))] = cross
        m[((Bath.BETA2, dag), (Bath.BETA1, dag))] = cross
    return CorrelatorTable(m, "bogolyubov")


def to_original_basis(field: LinearField, params: SystemParams) -> LinearField:
    """Rewrite Bogolyubov input labels in terms of the mechanical baths."""
    if not any(k.bath in (Bath.BETA1, Bath.BETA2) for k in field.terms):
        return field
    bc = bogolyubov(params)
    partner = {Bath.BETA1: (Bath.MECH1, Bath.MECH2), Bath.BETA2: (Bath.MECH2, Bath.MECH1)}
    out = LinearField.zero(field.omega)
    for k, c in field.terms.items():
        if k.bath in partner:
            own, other = partner[k.bath]
            out = out + LinearField(field.omega, {
                NoiseLabel(own, k.dagger, k.shift): bc.u * c,
                NoiseLabel(other, not k.dagger, k.shift): bc.v * c,
            })
        else:
            out = out + LinearField(field.omega, {k: c})
    return out


def cross_spectrum(F: LinearField, G: LinearField, table: CorrelatorTable) -> np.ndarray:
    """``1/2 <{F(w), G^+(-w)}>``: sesquilinear in (F, G), complex in general.

    Both fields must be evaluated on the same ``omega``; only label pairs with
    equal shifts contribute (the stationary part of the correlation).
    """
    if F.omega.shape != G.omega.shape or not np.array_equal(F.omega, G.omega):
        raise ValueError("fields evaluated on different frequency grids")
    by_shift: dict[int, list] = {}
    for k, d in G.terms.items():
        by_shift.setdefault(k.shift, []).append((k, d))
    out = np.zeros(F.omega.shape, dtype=complex)
    for k, c in F.terms.items():
        for l, d in by_shift.get(k.shift, ()):
            m = table.symmetrized((k.bath, k.dagger), (l.bath, l.dagger))
            if m != 0.0:
                out = out + m * c * np.conj(d)
    return out


def symmetrized_spectrum(F: LinearField, G: LinearField | None,
                         table: CorrelatorTable) -> np.ndarray:
    """Real symmetrized spectrum of F (``G is None`` or ``G is F``) or the
    complex cross spectrum of the pair."""
    if G is not None and G is not F:
        return cross_spectrum(F, G, table)
    s = cross_spectrum(F, F, table)
    re, im = s.real, s.imag
    bad = np.abs(im) > 1e-9 * np.maximum(np.abs(re), 1e-300)
    if np.any(bad & (np.abs(im) > 1e-300)):
        raise NonHermitianResult(
            f"imaginary residue {np.max(np.abs(im)):.3e} in auto-spectrum")
    return re


def spectrum_of(F: FieldFn, omega, table: CorrelatorTable) -> np.ndarray:
    return symmetrized_spectrum(F(np.asarray(omega, dtype=float)), None, table)
