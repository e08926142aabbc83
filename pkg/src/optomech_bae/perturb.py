"""Hierarchical (probe-perturbative) solution in the Bogolyubov frame.

Order 0 and the step 0 -> 1 are exact.  Steps to order >= 2 use the
on-resonance approximation: the Bogolyubov modes answer the probe force only
through their resonant, pump-dressed susceptibility, and the cavity keeps only
the resonant mechanical sidebands.  Under the phase condition
``phi_1 - phi_2 in {0, pi}`` this makes the protected collective quadratures
receive exactly zero correction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linfield import (
    Bath, FieldFn, LinearField, check_max_shift, combine, dagger_of, shifted,
    DEFAULT_MAX_SHIFT,
)
from .model import (
    ProbeParams, SystemParams, bogolyubov, chi_cavity, chi_mech,
    denominator_Delta, effective_probe,
)


@dataclass(frozen=True)
class OrderedSolution:
    order: int
    a: FieldFn
    beta1: FieldFn
    beta2: FieldFn
    params: SystemParams
    probe: ProbeParams | None = None
    max_shift: int = DEFAULT_MAX_SHIFT


def _guard(F: FieldFn, max_shift: int) -> FieldFn:
    return lambda omega: check_max_shift(F(omega), max_shift)


def _solve_block(params: SystemParams, A: FieldFn, B1: FieldFn, B2: FieldFn):
    """Exact solution of the pumped cavity + Bogolyubov-mode block for given sources."""
    calG = bogolyubov(params).calG
    d = params.delta
    g2 = calG**2

    def chis(omega):
        ca = chi_cavity(omega + d, params)
        c1 = chi_mech(omega - d, params)
        c2 = chi_mech(omega + d, params)
        D = 1 + g2 * ca * (c1 + c2)
        return ca, c1, c2, D

    def a(omega):
        ca, c1, c2, D = chis(omega)
        return (ca / D) * (A(omega) + (-1j * calG * c1) * B1(omega)
                           + (-1j * calG * c2) * B2(omega))

    def beta1(omega):
        ca, c1, c2, D = chis(omega)
        eta2 = 1 + g2 * ca * c2
        return (c1 / D) * (eta2 * B1(omega) + (-1j * calG * ca) * A(omega)
                           + (-g2 * ca * c2) * B2(omega))

    def beta2(omega):
        ca, c1, c2, D = chis(omega)
        eta1 = 1 + g2 * ca * c1
        return (c2 / D) * (eta1 * B2(omega) + (-1j * calG * ca) * A(omega)
                           + (-g2 * ca * c1) * B1(omega))

    return a, beta1, beta2


def zeroth_order(params: SystemParams, max_shift: int = DEFAULT_MAX_SHIFT) -> OrderedSolution:
    sk_E, sk_I, sg = math.sqrt(params.kappa_E), math.sqrt(params.kappa_I), math.sqrt(params.gamma)

    def A0(omega):
        return (LinearField.noise(omega, Bath.EXT, coeff=sk_E)
                + LinearField.noise(omega, Bath.INT, coeff=sk_I))

    def B1(omega):
        return LinearField.noise(omega, Bath.BETA1, coeff=sg)

    def B2(omega):
        return LinearField.noise(omega, Bath.BETA2, coeff=sg)

    a, b1, b2 = _solve_block(params, A0, B1, B2)
    return OrderedSolution(0, a, b1, b2, params, None, max_shift)


def probe_sources(params: SystemParams, probe: ProbeParams, sol: OrderedSolution):
    """Cavity and mechanical sources of order n+1 generated by the order-n fields."""
    g1, g3, g2, g4 = effective_probe(params, probe).g_sidebands
    d = params.delta
    S = combine((1, sol.beta1), (1, sol.beta2))
    Sd = dagger_of(S)
    ad = dagger_of(sol.a)
    A = combine((-1j * g1, shifted(S, 1, d)), (-1j * g3, shifted(Sd, 1, d)),
                (-1j * g2, shifted(S, -1, d)), (-1j * g4, shifted(Sd, -1, d)))
    B = combine((-1j * np.conj(g1), shifted(sol.a, -1, d)),
                (-1j * np.conj(g2), shifted(sol.a, 1, d)),
                (-1j * g3, shifted(ad, 1, d)),
                (-1j * g4, shifted(ad, -1, d)))
    return A, B


def resonant_response(omega, params: SystemParams):
    """Pump-dressed resonant mechanical response chi_m / (1 + calG^2 chi_m chi_a)."""
    calG = bogolyubov(params).calG
    cm = chi_mech(omega, params)
    return cm / (1 + calG**2 * cm * chi_cavity(omega, params))


def resonant_cavity_source(params: SystemParams, probe: ProbeParams,
                           sol: OrderedSolution) -> FieldFn:
    """Cavity source keeping only the mechanical sidebands resonant near omega = 0."""
    g1, g3, g2, g4 = effective_probe(params, probe).g_sidebands
    d = params.delta
    return combine((-1j * g1, shifted(sol.beta1, 1, d)),
                   (-1j * g3, shifted(dagger_of(sol.beta2), 1, d)),
                   (-1j * g2, shifted(sol.beta2, -1, d)),
                   (-1j * g4, shifted(dagger_of(sol.beta1), -1, d)))


def next_order(params: SystemParams, probe: ProbeParams, sol: OrderedSolution,
               exact: bool | None = None) -> OrderedSolution:
    """Order n+1 fields from order n.

    ``exact=None`` uses the exact step for 0 -> 1 and the on-resonance step
    afterwards; ``True``/``False`` force one or the other.
    """
    if exact is None:
        exact = sol.order == 0
    d = params.delta
    A, B = probe_sources(params, probe, sol)
    if exact:
        a, b1, b2 = _solve_block(params, A, B, B)
    else:
        def cav_factor(omega):
            return chi_cavity(omega + d, params) / denominator_Delta(omega, params)

        a = combine((cav_factor, resonant_cavity_source(params, probe, sol)))
        b1 = combine((lambda w: resonant_response(w - d, params), B))
        b2 = combine((lambda w: resonant_response(w + d, params), B))
    m = sol.max_shift
    return OrderedSolution(sol.order + 1, _guard(a, m), _guard(b1, m), _guard(b2, m),
                           params, probe, m)


def solve_orders(params: SystemParams, probe: ProbeParams, n_max: int,
                 exact: bool | None = None,
                 max_shift: int = DEFAULT_MAX_SHIFT) -> list[OrderedSolution]:
    sols = [zeroth_order(params, max_shift)]
    for _ in range(n_max):
        sols.append(next_order(params, probe, sols[-1], exact))
    return sols


def first_order_cavity(params: SystemParams, probe: ProbeParams) -> FieldFn:
    """Exact first-order cavity field a^(1)."""
    return next_order(params, probe, zeroth_order(params), exact=True).a


def mechanical_fields(params: SystemParams, sol: OrderedSolution) -> tuple[FieldFn, FieldFn]:
    """``(b_1, b_2)`` from the Bogolyubov fields via the inverse map."""
    bc = bogolyubov(params)
    b1 = combine((bc.u, sol.beta1), (-bc.v, dagger_of(sol.beta2)))
    b2 = combine((bc.u, sol.beta2), (-bc.v, dagger_of(sol.beta1)))
    return b1, b2


# --------------------------------------------------------------------------
# quadrature form of the first-order cavity field

@dataclass(frozen=True)
class QuadratureCoefficients:
    A_plus: float
    A_minus: float
    B_plus: float
    B_minus: float


def quadrature_coefficients(probe: ProbeParams, convention: str = "bare",
                            params: SystemParams | None = None) -> QuadratureCoefficients:
    """Weights of the collective quadratures in the first-order cavity field.

    ``convention="bare"`` uses the probe amplitudes G_p, G_q and phases
    phi_p, phi_q; ``"dressed"`` uses calG_p, calG_q and phi_1, phi_2.  Only
    the bare form reproduces the solver (see ``first_order_quadrature_form``).
    """
    if convention == "bare":
        Gp, Gq, pp, pq = probe.G_p, probe.G_q, probe.phi_p, probe.phi_q
    elif convention == "dressed":
        ep = effective_probe(params, probe)
        Gp, Gq, pp, pq = ep.calG_p, ep.calG_q, ep.phi_1, ep.phi_2
    else:
        raise ValueError(f"unknown convention {convention!r}")
    lam = probe.lam
    return QuadratureCoefficients(
        A_plus=lam * (Gp * math.cos(pp) + Gq * math.cos(pq)),
        A_minus=lam * (Gp * math.cos(pp) - Gq * math.cos(pq)),
        B_plus=lam * (Gp * math.sin(pp) + Gq * math.sin(pq)),
        B_minus=lam * (Gp * math.sin(pp) - Gq * math.sin(pq)),
    )


def cavity_transfer(omega, params: SystemParams):
    """``chi_a(omega + delta) / Delta(omega)``."""
    return chi_cavity(np.asarray(omega) + params.delta, params) / denominator_Delta(omega, params)


def first_order_quadrature_form(params: SystemParams, probe: ProbeParams,
                                convention: str = "bare") -> FieldFn:
    """Resonant part of a^(1) written through order-0 shifted quadratures.

    a^(1) ~ -i c / sqrt2 [A+ X^Sigma - B+ Y^Sigma + i (B- X^Delta + A- Y^Delta)]
    with c = chi_a(omega + delta) / Delta(omega) and Y = -i (b - b^+) / sqrt2.
    """
    from .spectra import QuadratureSelector, shifted_quadrature_field

    k = quadrature_coefficients(probe, convention, params)
    sel = QuadratureSelector
    q = {s: shifted_quadrature_field(s, 0, params, None) for s in sel}
    r2 = math.sqrt(2.0)
    inner = combine((k.A_plus, q[sel.X_SIGMA]), (-k.B_plus, q[sel.Y_SIGMA]),
                    (1j * k.B_minus, q[sel.X_DELTA]), (1j * k.A_minus, q[sel.Y_DELTA]))
    return combine((lambda w: -1j * cavity_transfer(w, params) / r2, inner))


def resonant_first_order_cavity(params: SystemParams, probe: ProbeParams) -> FieldFn:
    """c(omega) times the resonant-sideband cavity source built from order 0."""
    src = resonant_cavity_source(params, probe, zeroth_order(params))
    return combine((lambda w: cavity_transfer(w, params), src))
