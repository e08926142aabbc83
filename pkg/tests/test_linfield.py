import numpy as np
import pytest
from hypothesis import given, strategies as st

from optomech_bae import (
    Bath, LinearField, NoiseLabel, SystemParams, UnequalOccupations, bogolyubov,
    bogolyubov_bath_correlators, dagger_of, original_correlators, symmetrized_spectrum,
)
from optomech_bae.errors import SidebandOverflow
from optomech_bae.linfield import (
    ORIGINAL_BATHS, check_max_shift, combine, cross_spectrum, shifted, to_original_basis,
)

from conftest import admissible_params

W = np.linspace(-0.3, 0.3, 7)
DELTA = 0.1


def _noise(bath, dagger=False, shift=0, coeff=1.0):
    return lambda w: LinearField.noise(w, bath, dagger, shift, coeff)


def test_dagger_examples():
    F = dagger_of(_noise(Bath.EXT))(W)
    assert list(F.terms) == [NoiseLabel(Bath.EXT, True, 0)]
    np.testing.assert_array_equal(F.terms[NoiseLabel(Bath.EXT, True, 0)], 1.0)

    G = dagger_of(_noise(Bath.MECH1, shift=1, coeff=1j))(W)
    assert list(G.terms) == [NoiseLabel(Bath.MECH1, True, -1)]
    np.testing.assert_array_equal(G.terms[NoiseLabel(Bath.MECH1, True, -1)], -1j)


coeffs = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))


def _random_field(c):
    a, b, k = c

    def F(w):
        return (LinearField.noise(w, Bath.MECH1, coeff=(a + 1j * b) / (0.5 - 1j * w))
                + LinearField.noise(w, Bath.EXT, True, 1, coeff=k * w + 1j))
    return F


@given(coeffs)
def test_dagger_is_involution(c):
    F = _random_field(c)
    once, twice = F(W), dagger_of(dagger_of(F))(W)
    assert set(once.terms) == set(twice.terms)
    for k in once.terms:
        np.testing.assert_allclose(twice.terms[k], once.terms[k], rtol=0, atol=1e-15)


def test_vacuum_variance():
    table = original_correlators(SystemParams(n_E=0.0))
    S = symmetrized_spectrum(LinearField.noise(W, Bath.EXT), None, table)
    np.testing.assert_allclose(S, 0.5, rtol=0, atol=1e-15)


def test_two_mode_contraction():
    n, u, v = 10.0, 1.80906806747, 1.50755672289
    table = original_correlators(SystemParams(n_1=n, n_2=n))
    F = LinearField.noise(W, Bath.MECH1, coeff=u) + LinearField.noise(W, Bath.MECH2, True, coeff=v)
    S = symmetrized_spectrum(F, None, table)
    expected = 0.5 * ((n + 1) * u**2 + n * v**2) + 0.5 * (n * u**2 + (n + 1) * v**2)
    np.testing.assert_allclose(S, expected, rtol=1e-14)


def test_independent_baths():
    table = original_correlators(SystemParams())
    out = cross_spectrum(LinearField.noise(W, Bath.EXT), LinearField.noise(W, Bath.MECH1), table)
    np.testing.assert_array_equal(out, 0.0)


def test_mismatched_shifts_do_not_contract():
    table = original_correlators(SystemParams())
    out = cross_spectrum(LinearField.noise(W, Bath.EXT, shift=1),
                         LinearField.noise(W, Bath.EXT, shift=0), table)
    np.testing.assert_array_equal(out, 0.0)


@given(admissible_params(), coeffs)
def test_spectrum_is_nonnegative(p, c):
    S = symmetrized_spectrum(_random_field(c)(W), None, original_correlators(p))
    assert np.all(S >= -1e-12)


@given(coeffs, coeffs, st.floats(-2, 2))
def test_spectrum_bilinearity(c1, c2, t):
    table = original_correlators(SystemParams(n_E=0.3))
    F, G = _random_field(c1)(W), _random_field(c2)(W)
    lhs = symmetrized_spectrum(F + t * G, None, table)
    rhs = (symmetrized_spectrum(F, None, table) + t**2 * symmetrized_spectrum(G, None, table)
           + 2 * t * cross_spectrum(F, G, table).real)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_shifted_relabels():
    F = _noise(Bath.MECH1, coeff=2.0)
    Fs = shifted(F, 1, DELTA)(W)
    assert list(Fs.terms) == [NoiseLabel(Bath.MECH1, False, 1)]
    Fm = shifted(F, -2, DELTA)(W)
    assert list(Fm.terms) == [NoiseLabel(Bath.MECH1, False, -2)]


def test_combine_callable_coefficients():
    F = combine((lambda w: w, _noise(Bath.EXT)), (2.0, _noise(Bath.EXT)))(W)
    np.testing.assert_allclose(F.terms[NoiseLabel(Bath.EXT, False, 0)], W + 2.0)


def test_sideband_overflow():
    f = LinearField.noise(W, Bath.EXT, shift=9)
    with pytest.raises(SidebandOverflow):
        check_max_shift(f, 8)
    assert check_max_shift(f, 9) is f


def test_table_hermitian(params):
    assert original_correlators(params).is_hermitian()
    assert bogolyubov_bath_correlators(params).is_hermitian()


def test_bogolyubov_table_vacuum_identity():
    p = SystemParams(G_minus=0.03, G_plus=0.0, n_1=0.0, n_2=0.0)
    t = bogolyubov_bath_correlators(p)
    assert t.get((Bath.BETA1, False), (Bath.BETA1, True)) == 1.0
    assert t.get((Bath.BETA1, False), (Bath.BETA2, False)) == 0.0


def _beta(w, bath, dagger, coeff):
    return LinearField.noise(w, bath, dagger, 0, coeff)


@given(admissible_params(), coeffs)
def test_bogolyubov_table_matches_original(p, c):
    p = p.replace(n_2=p.n_1)
    a, b, k = c
    F = (_beta(W, Bath.BETA1, False, a + 1j * b) + _beta(W, Bath.BETA2, True, k - 0.5j)
         + _beta(W, Bath.BETA2, False, 0.3) + LinearField.noise(W, Bath.EXT, coeff=b))
    via_orig = symmetrized_spectrum(to_original_basis(F, p), None, original_correlators(p))
    direct = symmetrized_spectrum(F, None, bogolyubov_bath_correlators(p))
    np.testing.assert_allclose(direct, via_orig, rtol=1e-12)


def test_extra_one_disagrees(params):
    F = LinearField.noise(W, Bath.BETA1)
    via_orig = symmetrized_spectrum(to_original_basis(F, params), None, original_correlators(params))
    variant = symmetrized_spectrum(F, None, bogolyubov_bath_correlators(params, True))
    assert np.all(np.abs(variant - via_orig) > 0.4)


def test_to_original_basis_weights(params):
    b = bogolyubov(params)
    out = to_original_basis(LinearField.noise(W, Bath.BETA1, shift=1), params)
    np.testing.assert_allclose(out.terms[NoiseLabel(Bath.MECH1, False, 1)], b.u)
    np.testing.assert_allclose(out.terms[NoiseLabel(Bath.MECH2, True, 1)], b.v)
    assert all(k.bath in ORIGINAL_BATHS for k in out.terms)


def test_unequal_occupations_rejected():
    with pytest.raises(UnequalOccupations):
        bogolyubov_bath_correlators(SystemParams(n_1=1.0, n_2=2.0))
