import math

import numpy as np
import pytest
from hypothesis import given, settings

from optomech_bae import (
    READOUT_TABLE, ExtractionIllConditioned, Method, NotConverged, PhaseConditionViolated,
    ProbeParams, QuadratureSelector, SystemParams, duan_quantity, extract_quadrature_spectrum,
    integrate_variance, output_spectrum, quadrature_spectrum, shifted_quadrature_field,
    sweep_duan,
)
from optomech_bae.spectra import (
    background_spectrum, default_window, field_spectrum, integrate_whole_line,
    unshifted_quadrature_field,
)

from conftest import admissible_params

S = QuadratureSelector


def lorentzian(A, G):
    return lambda w: (G / 2) ** 2 * A / ((G / 2) ** 2 + w**2)


@pytest.mark.parametrize("A,G", [(1.0, 1e-3), (3.0, 0.02), (0.5, 1.0)])
def test_lorentzian_integral(A, G):
    # int dw/2pi of the Lorentzian is A G / 4
    assert integrate_variance(lorentzian(A, G), 50 * G) == pytest.approx(A * G / 4, rel=1e-7)
    assert integrate_whole_line(lorentzian(A, G), [0.0], G) == pytest.approx(A * G / 4, rel=1e-9)


def test_flat_integrand_has_no_tail():
    with pytest.raises(NotConverged):
        integrate_variance(lambda w: np.ones_like(w), 1.0)


def test_tol_below_rounding_raises_instead_of_growing():
    noisy = lambda w: 1 / (1 + w**2) + 1e-6 * np.sin(1e7 * w)  # noqa: E731
    with pytest.raises(NotConverged):
        integrate_variance(noisy, 5.0, tol=1e-16)


def test_uncoupled_thermal_variance():
    # calG -> 0: each shifted collective quadrature carries 2 (n + 1/2)
    p = SystemParams(G_minus=1e-9, G_plus=0.0)
    W = default_window(p)
    for sel in S:
        c = quadrature_spectrum(sel, p, np.linspace(-W, W, 11))
        assert integrate_variance(c, W) == pytest.approx(21.0, rel=1e-9)


def _variance_sums(p):
    scale = default_window(p) / 50
    pts = [-p.delta, 0.0, p.delta]
    out = []
    for make in (lambda s: shifted_quadrature_field(s, 0, p), lambda s: unshifted_quadrature_field(s, p)):
        out.append(sum(integrate_whole_line(lambda w, F=make(s): field_spectrum(F, w, p), pts, scale)
                       for s in (S.X_SIGMA, S.Y_DELTA)))
    return out


def test_shifted_and_unshifted_variance_sums_agree(params):
    shifted, unshifted = _variance_sums(params)
    assert shifted == pytest.approx(unshifted, rel=1e-8)


@settings(max_examples=5)
@given(admissible_params())
def test_shifted_and_unshifted_variance_sums_agree_random(p):
    p = p.replace(n_2=p.n_1)
    shifted, unshifted = _variance_sums(p)
    assert shifted == pytest.approx(unshifted, rel=1e-8)


@settings(max_examples=10)
@given(admissible_params())
def test_quadrature_spectra_even_and_positive(p):
    p = p.replace(n_2=p.n_1)
    w = np.linspace(-0.05, 0.05, 21)
    for sel in S:
        F = shifted_quadrature_field(sel, 0, p)
        s = field_spectrum(F, w, p)
        np.testing.assert_allclose(s, s[::-1], rtol=1e-10)
        assert np.all(s > 0)


def test_bogolyubov_basis_spectra_match(params):
    w = np.linspace(-0.01, 0.01, 11)
    for sel in S:
        a = quadrature_spectrum(sel, params, w, "original").values
        b = quadrature_spectrum(sel, params, w, "bogolyubov").values
        np.testing.assert_allclose(b, a, rtol=1e-10)


# independent harmonic-balance route, frozen
@pytest.mark.parametrize("ratio,expected", [
    (0.0, 2.0479767928994015),
    (0.04 / 0.048, 0.33878412454181317),
    (0.9, 0.3573048223243327),
])
def test_duan_frozen(ratio, expected):
    p = SystemParams(G_plus=ratio * 0.048)
    r = duan_quantity(p)
    assert r.duan_sum == pytest.approx(expected, rel=1e-9)
    assert r.violated is (expected < 1)
    assert r.varXSigma == pytest.approx(r.varYDelta, rel=1e-10)


def test_background_without_probes():
    p = SystemParams(G_minus=0.0, G_plus=0.0, n_E=0.7)
    w = np.linspace(-2, 2, 41)
    curve = output_spectrum(0.0, p, None, w)
    chi = 1 / (p.kappa / 2 - 1j * w)
    np.testing.assert_allclose(curve.values, np.abs(p.kappa_E * chi - 1) ** 2 * 1.2, rtol=1e-12)
    np.testing.assert_allclose(background_spectrum(1.1, p, w), curve.values, rtol=1e-12)


@pytest.mark.parametrize("row", READOUT_TABLE, ids=lambda r: r.selector.short)
def test_readout_table_extraction(params, probe, row):
    pr = probe.replace(phi_p=row.phi_p, phi_q=row.phi_q)
    W = default_window(params)
    grid = np.linspace(-W, W, 201)
    curve = output_spectrum(row.theta, params, pr, grid)
    ext = extract_quadrature_spectrum(curve, row.theta, params, pr)
    assert ext.meta["selector"] == row.selector.short
    direct = quadrature_spectrum(row.selector, params, grid).values
    np.testing.assert_allclose(ext.values, direct, rtol=1e-9)


def test_readout_row1_prefactor(params, probe):
    # S^(1) = |chi_a(w+d)/Delta|^2 (G_p + G_q)^2 S^Sigma,0 ; kappa_E multiplies it in S_out
    from optomech_bae.perturb import cavity_transfer
    w = np.linspace(-0.01, 0.01, 11)
    curve = output_spectrum(0.0, params, probe, w)
    direct = quadrature_spectrum(S.X_SIGMA, params, w).values
    expected = params.kappa_E * np.abs(cavity_transfer(w, params)) ** 2 \
        * (probe.G_p + probe.G_q) ** 2 * direct
    np.testing.assert_allclose(curve.parts["mechanical"], expected, rtol=1e-12)


def test_phase_condition_enforced(params, probe):
    with pytest.raises(PhaseConditionViolated):
        output_spectrum(0.0, params, probe.replace(phi_q=math.pi / 4))


def test_mixed_homodyne_angle_is_ill_conditioned(params, probe):
    curve = output_spectrum(math.pi / 4, params, probe, np.linspace(-0.01, 0.01, 5))
    with pytest.raises(ExtractionIllConditioned):
        extract_quadrature_spectrum(curve, math.pi / 4, params, probe)


def test_global_probe_phase_invariance(params, probe):
    w = np.linspace(-0.01, 0.01, 11)
    for row in READOUT_TABLE:
        a = probe.replace(phi_p=row.phi_p, phi_q=row.phi_q)
        b = probe.replace(phi_p=row.phi_p + math.pi, phi_q=row.phi_q + math.pi)
        np.testing.assert_allclose(output_spectrum(row.theta, params, b, w).values,
                                   output_spectrum(row.theta, params, a, w).values, rtol=1e-12)
    d1 = duan_quantity(params, probe, Method.OUTPUT)
    d2 = duan_quantity(params, probe.replace(phi_p=math.pi, phi_q=math.pi), Method.OUTPUT)
    assert d2.duan_sum == pytest.approx(d1.duan_sum, rel=1e-9)


def test_methods_agree(params, probe):
    d = duan_quantity(params)
    o = duan_quantity(params, probe, "OutputExtraction")
    assert o.duan_sum == pytest.approx(d.duan_sum, rel=1e-8)
    assert o.method is Method.OUTPUT


def test_sampled_curve_integration(params):
    W = default_window(params)
    fine = quadrature_spectrum(S.X_SIGMA, params, np.linspace(-W, W, 4001))
    stored = type(fine)(fine.grid, fine.values, fine.meta)
    adaptive = integrate_variance(fine, W, tails=False)
    assert integrate_variance(stored, tol=1e-6) == pytest.approx(adaptive, rel=1e-6)
    coarse = quadrature_spectrum(S.X_SIGMA, params, np.linspace(-W, W, 9))
    with pytest.raises(NotConverged):
        integrate_variance(type(coarse)(coarse.grid, coarse.values, coarse.meta), tol=1e-10)


def test_sweep_ordering_and_threads(params):
    ratios = [0.0, 0.5, 0.8, 0.95]
    serial = sweep_duan(params, None, ratios)
    threaded = sweep_duan(params, None, ratios, threads=4)
    assert [r for r, _ in serial] == ratios
    assert [d.duan_sum for _, d in serial] == [d.duan_sum for _, d in threaded]


def test_sweep_rejects_bad_ratio(params):
    from optomech_bae import ValidationError
    with pytest.raises(ValidationError):
        sweep_duan(params, None, [1.0])


def test_extraction_requires_probes(params):
    from optomech_bae import ValidationError
    with pytest.raises(ValidationError):
        duan_quantity(params, ProbeParams(), Method.OUTPUT)
