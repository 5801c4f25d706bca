"""Exact algebra of exponentiated Weyl monomials."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qgv.qweyl_symbolic import (
    BASIS, ONE, MonomialSum, PhaseScalar, QuadExp, Transposition, conj_by_perm, conj_by_quad,
    format_linear, mono, mono_inv, mono_mul, omega, parse_linear, parse_monomial, qcommute_check,
)

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
linear_forms = st.tuples(*[coeffs] * len(BASIS))


def test_canonical_pair_commutes_with_q_inverse():
    assert qcommute_check(mono("u"), mono("du")) == PhaseScalar.q(-1)
    assert omega(mono("u").lin, mono("du").lin) == -1


def test_product_carries_half_phase():
    p = mono_mul(mono("u"), mono("du"))
    assert p.lin == mono("u + du").lin
    assert p.phase == PhaseScalar.q(Fraction(-1, 2))


def test_inverse_is_two_sided():
    m = mono("2*u - dv + nu", phase=PhaseScalar.q(3))
    assert mono_mul(m, mono_inv(m)) == mono()
    assert mono_mul(mono_inv(m), m) == mono()


def test_quadratic_conjugation_shifts_momentum():
    out = conj_by_quad(QuadExp.parse("1/2*w*w"), mono("dw"))
    assert out == mono("-w + dw")


def test_transposition_swaps_labels():
    out = conj_by_perm(Transposition("u", "v"), mono("u - dv + nu"))
    assert out == mono("v - du + nu")


def test_non_nilpotent_quadratic_rejected():
    with pytest.raises(ValueError):
        QuadExp.parse("-u*du")


def test_phase_arithmetic():
    a = PhaseScalar(Fraction(3, 2), 1, -2)
    assert (a * a.inv()).is_one()
    assert a.signed() == (-1, PhaseScalar(Fraction(1, 2), 1, -2))
    assert abs(PhaseScalar(1).evaluate(0.75) + 1) < 1e-15
    assert str(ONE) == "1"


def test_monomial_sum_cancels():
    s = MonomialSum.from_terms([mono("u"), mono("v")])
    assert (s - s).is_zero()
    assert len(s) == 2
    assert str(MonomialSum()) == "0"


@given(linear_forms, linear_forms)
def test_omega_antisymmetric(l1, l2):
    assert omega(l1, l2) == -omega(l2, l1)


@given(linear_forms, linear_forms)
def test_qcommute_matches_omega(l1, l2):
    a, b = mono(l1), mono(l2)
    lhs = mono_mul(a, b)
    rhs = mono_mul(mono_mul(b, a), mono(phase=qcommute_check(a, b)))
    assert lhs == rhs


@given(linear_forms)
def test_linear_roundtrip(lin):
    assert parse_linear(format_linear(lin)) == tuple(Fraction(c) for c in lin)


@given(linear_forms, st.fractions(min_value=-3, max_value=3, max_denominator=6))
def test_monomial_roundtrip(lin, r):
    m = mono(lin, phase=PhaseScalar(0, r, 0))
    assert parse_monomial(str(m)) == m
