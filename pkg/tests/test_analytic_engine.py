"""Operator trees, matrix elements and the transcendental checks."""

import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgv import analytic_engine as ae
from qgv.qweyl_symbolic import mono
from qgv.representations import build_sl2_rep, conjugated_form
from qgv.special_functions import GbPoleError, gb_eval, mp_new

B = 0.75
Q = B + 1 / B
REP = build_sl2_rep()
E = conjugated_form(REP, "E")
K = REP.K[0]

small = st.floats(min_value=-0.8, max_value=0.8, allow_nan=False)


def test_gaussian_values():
    f = ae.gaussian(2.0, 0.3, 0.5)
    z = 0.7 - 0.2j
    assert abs(f(z) - cmath.exp(-2 * math.pi * (z - 0.3) ** 2 + 0.5 * z)) < 1e-15
    with pytest.raises(ValueError):
        ae.gaussian(-1.0)


def test_mp_and_numpy_contexts_agree():
    tree = ae.Product((ae.gaussian(1, 0.1, 0.2), ae.GFactor(1, 1.0, 0.4j), ae.GbFactor(-1, 2.0, 0.3)))
    z = 0.35 + 0.1j
    lo = ae.eval_testfn(tree, z)
    hi = ae.eval_testfn(tree, z, prec=128)
    assert abs(lo - complex(hi)) < 1e-13 * abs(hi)


def test_gfactor_matches_evaluator():
    mp = mp_new(B)
    z = 0.4 + 0.3j
    assert abs(ae.GFactor(1, 1.0, 0.0)(z) - complex(gb_eval(mp, z).value)) < 1e-13


def test_pole_raises():
    with pytest.raises(GbPoleError):
        ae.eval_testfn(ae.GFactor(1, 1.0, 0.0), 0.0)


def test_sum_and_scalar():
    f, g = ae.gaussian(1.0), ae.gaussian(2.0, 0.5)
    z = 0.3 - 0.1j
    assert abs((f + g)(z) - (f(z) + g(z))) < 1e-15
    assert abs((3 * f)(z) - 3 * f(z)) < 1e-15
    assert abs(ae.eval_testfn(f + g, z, prec=96) - (f(z) + g(z))) < 1e-14


def test_conj_is_conjugate_on_real_line():
    f = ae.Product((ae.gaussian(1.0, 0.2j, 0.3j), ae.GFactor(1, -1j, 0.4j)))
    x = np.linspace(-1, 1, 7)
    assert np.allclose(ae.Conj(f)(x), np.conj(f(x)), rtol=1e-14, atol=0)


def test_monomial_is_multiplication_or_shift():
    f = ae.gaussian(1.0, 0.1, 0.2)
    z = 0.2 + 0.05j
    mul = ae.apply_monomial(mono("u"), f, b=B)
    assert abs(mul(z) - cmath.exp(math.pi * B * z) * f(z)) < 1e-14
    sh = ae.apply_monomial(mono("du"), f, b=B)
    assert abs(sh(z) - f(z + 1j * B)) < 1e-14


@settings(max_examples=25, deadline=None)
@given(small, small)
def test_imaginary_powers_compose(s, t):
    f = ae.gaussian(1.0, 0.1, 0.2)
    m = mono("u - du")
    one = ae.apply_monomial(m, ae.apply_monomial(m, f, s=t, b=B), s=s, b=B)
    both = ae.apply_monomial(m, f, s=s + t, b=B)
    z = 0.3 + 0.1j
    assert abs(one(z) - both(z)) < 1e-12 * max(1.0, abs(both(z)))


def test_k_power_is_pointwise():
    f = ae.gaussian(1.0)
    out = ae.apply_operator(K, 0.4, f, nu=0.3, b=B)
    x = np.linspace(-1, 1, 5)
    assert np.allclose(np.abs(out(x)), np.abs(f(x)), rtol=1e-13)


def test_e_power_tree_structure():
    tree = ae.apply_operator(E, 0.3, ae.gaussian(1.0), nu=0.4, b=B)
    assert isinstance(tree, ae.Product)
    assert isinstance(tree.factors[0], ae.GbFactor) and tree.factors[0].sign == 1
    assert all(np.isfinite(tree(np.linspace(-2, 2, 9))))


def test_operator_unitarity():
    f = ae.gaussian(1.0, 0.1, 0.2)
    n0 = ae.matrix_element(f, [], f)
    n1 = ae.matrix_element(ae.apply_operator(E, 0.3, f, 0.4, B), [], ae.apply_operator(E, 0.3, f, 0.4, B))
    assert abs(n1 / n0 - 1) < 1e-10


def test_matrix_element_closed_form():
    f = ae.gaussian(1.0)
    assert abs(ae.matrix_element(f, [], f) - 1 / math.sqrt(2)) < 1e-13
    assert abs(ae.matrix_element(f, [], f, method="de") - 1 / math.sqrt(2)) < 1e-12
    # <f, e^{pi b u} f> = int e^{-2 pi u^2 + pi b u} du
    exact = math.exp(math.pi * B * B / 8) / math.sqrt(2)
    assert abs(ae.matrix_element(f, [(ae.MonomialSum.from_terms([mono("u")]), None)], f) - exact) < 1e-12


def test_matrix_element_bilinear():
    f, g = ae.gaussian(1.0, 0.1, 0.2), ae.gaussian(1.5, -0.2, 0.1)
    word = [(K, 0.2)]
    a = ae.matrix_element(f, word, g, nu=0.4)
    assert abs(ae.matrix_element(2 * f, word, 3 * g, nu=0.4) - 6 * a) < 1e-12 * abs(a)


@pytest.mark.parametrize("name", ["K", "E", "F"])
def test_hermiticity(name):
    rep = ae.hermiticity_check(name, ae.gaussian(1.0, 0.1, 0.2), ae.gaussian(1.5, -0.2, -0.1))
    assert rep.passed, rep.residual


def test_kac_spec_validation():
    with pytest.raises(ValueError):
        ae.KacCheckSpec(-0.1, 0.5, 0.4)
    with pytest.raises(ValueError):
        ae.KacCheckSpec(0.3, 0.5, 0.4, eps=1.5)
    assert ae.KacCheckSpec(0.3, 0.5, 0.4, f=3 * ae.gaussian()).cache_key() is None


def test_phi_lambda_symmetry_and_tree(mp):
    for u in (-1 - 0.2j, -0.3 - 0.2j, 0.4 - 0.2j, 0.9 + 0.3j, 1.5 - 0.1j):
        a = ae.phi_lambda_eval(mp, 0.7, u, 128)
        assert abs(a - ae.phi_lambda_eval(mp, -0.7, u, 128)) < 1e-30 * abs(a)
        assert abs(ae.phi_lambda_tree(0.7)(u) - complex(a)) < 1e-12 * abs(a)


def test_eigen_spec_rejects_bad_line():
    with pytest.raises(ValueError):
        ae.EigenCheckSpec(0.5, 0.3j, eps=0.5)


def test_eigen_ratio_constant():
    spec = ae.EigenCheckSpec(0.5, 0.3j, us=(-0.4 + 0.4j, 0.5 + 0.4j))
    r = ae.eigen_ratios(spec)
    assert abs(r[0] / r[1] - 1) < 1e-10
    assert abs(r[0] - 1) < 1e-10


def test_transform_measure():
    spec = ae.TransformSpec()
    lam = np.array([0.1, 1.0])
    assert np.all(spec.measure(lam) > 0)
    assert abs(spec.measure(0.5, 2) - spec.measure(1.0)) < 1e-12
    with pytest.raises(ValueError):
        ae.TransformSpec(eps=0.0)


def test_identify_phase_roundtrip():
    ph = ae.identify_phase(cmath.exp(1j * math.pi * (B * B + 1 / (B * B)) / 12), B)
    assert str(ph) == "q^{1/12} * qd^{1/12}"
    assert ae.identify_phase(cmath.exp(0.123456j), B) is None


def test_fourier_integral_matches_evaluator(mp):
    x = 0.8
    with mpmath.workprec(192):
        lhs = ae.fourier_integral(B, x)
    rep = ae.fourier_check(mp, xs=(x,))[0]
    assert rep.passed and np.isfinite(lhs)


@pytest.mark.slow
def test_kac_deviation_invariant_under_scaling_and_nodes():
    base = dict(s=0.3, t=0.5, nu=0.4, half_width=5.0)
    r0 = ae.kac_evaluate(ae.KacCheckSpec(h=0.2, **base))
    r1 = ae.kac_evaluate(ae.KacCheckSpec(h=0.2, f=2 * ae.gaussian(1.0, 0.1, 0.2),
                                         g=3 * ae.gaussian(1.0, -0.2, -0.3), **base))
    r2 = ae.kac_evaluate(ae.KacCheckSpec(h=0.1, **base))
    assert abs(r1.lhs / r0.lhs - 6) < 1e-10
    for r in (r0, r1, r2):
        assert r.deviation(B) < 1e-4
        assert abs(r.deviation(1.0) - r0.deviation(1.0)) < 1e-4
    assert abs(r2.ratio / r0.ratio - 1) < 1e-8
