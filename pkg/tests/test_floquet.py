import math

import numpy as np
import pytest

from optomech_bae import (
    ProbeParams, SystemParams, ValidationError, chi_cavity, solve_orders, zeroth_order,
)
from optomech_bae.errors import IllConditioned, NotConverged
from optomech_bae.floquet import (
    SidebandSystem, convergence_residual, coupling_matrices, oracle_output_spectrum,
    solve_sidebands,
)
from optomech_bae.linfield import combine, to_original_basis
from optomech_bae.spectra import field_spectrum, homodyne_field

GRID = np.linspace(-0.02, 0.02, 9)


def test_zeroth_order_matches_oracle(params):
    orc = solve_sidebands(params, None, GRID).a
    ref = to_original_basis(zeroth_order(params).a(GRID), params)
    keys = set(orc.terms) | set(ref.terms)
    gap = max(np.max(np.abs(orc.terms.get(k, 0) - ref.terms.get(k, 0))) for k in keys)
    assert gap <= 1e-9 * np.max(ref.norm())


def test_probes_off_has_no_sideband_coupling(params):
    m = coupling_matrices(params, None)
    assert not np.any(m[1]) and not np.any(m[-1])
    m = coupling_matrices(params, ProbeParams(1e-3, 1e-3))
    assert np.any(m[1]) and np.any(m[-1])


def test_truncation_converges(params, probe):
    assert convergence_residual(params, probe, GRID, 6) < 1e-10


def test_truncation_check_raises(params, calG):
    strong = ProbeParams(0.5 * calG, 0.5 * calG)
    with pytest.raises(NotConverged):
        solve_sidebands(params, strong, GRID, K=2)


def test_small_K_rejected(params):
    with pytest.raises(ValidationError):
        solve_sidebands(params, None, GRID, K=1)


def test_oracle_output_matches_zeroth_order_homodyne(params):
    orc = oracle_output_spectrum(params, None, 0.3, GRID)
    pert = field_spectrum(homodyne_field(zeroth_order(params).a, 0.3, params), GRID, params)
    np.testing.assert_allclose(orc.values, pert, rtol=1e-9)


def test_oracle_output_without_pumps_is_reflected_vacuum():
    # decoupled cavity in the frame where it sits at -delta; the internal
    # bath leaks into the output alongside the reflected external noise
    p = SystemParams(G_minus=0.0, G_plus=0.0, n_E=0.25, n_I=1.5)
    orc = oracle_output_spectrum(p, None, 0.0, GRID)
    def one_sided(w):
        ca = chi_cavity(w + p.delta, p)
        return (np.abs(p.kappa_E * ca - 1) ** 2 * (p.n_E + 0.5)
                + p.kappa_E * p.kappa_I * np.abs(ca) ** 2 * (p.n_I + 0.5))

    # a homodyne quadrature mixes a(w) with a^+(w), so the spectrum is even
    expected = 0.5 * (one_sided(GRID) + one_sided(-GRID))
    np.testing.assert_allclose(orc.values, expected, rtol=1e-12)


def test_oracle_agrees_with_second_order_solution(params, calG):
    # BAE phases: after the exact order-2 solution the residual is quartic
    gaps = []
    eps = (1e-2, 3e-3)
    for e in eps:
        pr = ProbeParams(e * calG, e * calG)
        orc = oracle_output_spectrum(params, pr, 0.0, GRID, check_convergence=False).values
        sols = solve_orders(params, pr, 2, exact=True)
        a = combine((1, sols[0].a), (1, sols[1].a), (1, sols[2].a))
        gaps.append(np.max(np.abs(orc - field_spectrum(homodyne_field(a, 0.0, params), GRID, params))))
    slope = math.log(gaps[0] / gaps[1]) / math.log(eps[0] / eps[1])
    assert abs(slope - 4.0) < 0.2


def test_oracle_spectra_nonnegative(params, calG):
    pr = ProbeParams(0.05 * calG, 0.05 * calG, 0.0, math.pi / 2)
    orc = oracle_output_spectrum(params, pr, 1.0, GRID, check_convergence=False)
    assert np.all(orc.values >= 0)


def test_sideband_accessor_shapes(params, probe):
    sol = solve_sidebands(params, probe, GRID, check_convergence=False)
    side = sol.sideband("a", 1)
    assert side.omega.shape == GRID.shape
    assert np.max(side.norm()) > 0


def test_ill_conditioned_raises():
    # undamped cavity at exact resonance with no decay on the mechanics
    p = SystemParams(kappa_E=1e-14, kappa_I=0.0, gamma=1e-300, delta=0.0, G_minus=1e-300, G_plus=0.0)
    system = SidebandSystem(p, None, 2)
    with pytest.raises(IllConditioned):
        system.solve(np.array([0.0]))
