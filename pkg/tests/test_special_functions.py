import cmath

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from qgv.contour_quadrature import residue
from qgv.special_functions import (
    AsymptoticRegimeError,
    GbPoleError,
    gb_asymptotic,
    gb_eval,
    gb_log_eval,
    gb_np,
    inversion_constant,
    lattice_classify,
    log_gb_np,
    mp_new,
    smallg_eval,
)


def G(mp, z, prec=192):
    return gb_eval(mp, mpmath.mpc(z), prec).value


def test_modular_parameter_basic():
    m = mp_new(1)
    assert m.Q == 2
    assert abs(complex(m.q) + 1) < 1e-30
    m = mp_new(0.75)
    assert abs(m.Q - (0.75 + 4 / 3.0)) < 1e-15
    assert abs(abs(m.zeta_b) - 1) < 1e-30
    with pytest.raises(ValueError):
        mp_new(0)


def test_symmetric_point(mp, prec):
    lhs = G(mp, mp.Q / 2) ** 2
    assert abs(lhs / mpmath.exp(-1j * mpmath.pi * mp.Q ** 2 / 4) - 1) < 1e-30


def test_shift_equation_at_sample(mp, prec):
    z = mpmath.mpc("0.3", "0.1")
    r = G(mp, z + mp.b) / G(mp, z) - (1 - mpmath.exp(2j * mpmath.pi * mp.b * z))
    assert abs(r) < 1e-30


def test_pole_at_origin_raises(mp):
    with pytest.raises(GbPoleError) as exc:
        gb_eval(mp, 0)
    assert exc.value.point.kind == "pole"


def test_log_consistency_and_branch(mp, prec):
    rng = np.random.default_rng(7)
    for _ in range(10):
        z = mpmath.mpc(rng.uniform(0.1, float(mp.Q) - 0.1), rng.uniform(-2, 2))
        v = gb_eval(mp, z)
        assert abs(mpmath.exp(v.log_value) / v.value - 1) < 1e-30
    lq = gb_log_eval(mp, mp.Q / 2)
    assert -mpmath.pi < lq.imag <= mpmath.pi


def test_reflection_in_log_form(mp, prec):
    z = mpmath.mpc("-1.7", "0.6")
    d = gb_log_eval(mp, z) + gb_log_eval(mp, mp.Q - z) - 1j * mpmath.pi * z * (z - mp.Q)
    k = d.imag / (2 * mpmath.pi)
    assert abs(d.real) < 1e-30 and abs(k - mpmath.nint(k)) < 1e-30


def test_smallg_unitary_and_base_point(mp, prec):
    assert abs(abs(smallg_eval(mp, 2.7)) - 1) < 1e-30
    ref = mpmath.conj(mp.zeta_b) / G(mp, mp.Q / 2)
    assert abs(smallg_eval(mp, 1) - ref) < 1e-30


def test_inversion_constant_value(mp, prec):
    c = inversion_constant(mp, 1.9)
    target = mpmath.exp(1j * mpmath.pi * (mp.b ** 2 + mp.b ** -2) / 12)
    assert abs(c - target) < 1e-30


def test_lattice_classify(mp):
    p = lattice_classify(mp, -mp.b, 1e-12)
    assert (p.kind, p.n1, p.n2) == ("pole", 1, 0)
    z = lattice_classify(mp, mp.Q, 1e-12)
    assert (z.kind, z.n1, z.n2) == ("zero", 0, 0)
    assert lattice_classify(mp, mp.Q / 2, 1e-12).kind == "regular"
    p = lattice_classify(mp, -2 * mp.b - 1 / mp.b, 1e-12)
    assert (p.kind, p.n1, p.n2) == ("pole", 2, 1)


@pytest.mark.parametrize("z", ["0.4+50j", "0.7-50j"])
def test_asymptotic_regimes(mp, prec, z):
    z = mpmath.mpc(complex(z))
    assert abs(G(mp, z) / gb_asymptotic(mp, z) - 1) < 1e-20


def test_asymptotic_band_rejected(mp):
    with pytest.raises(AsymptoticRegimeError):
        gb_asymptotic(mp, 0.3 + 0.1j)


def test_self_duality(prec):
    a, b = mp_new(0.75), mp_new(1 / mpmath.mpf(0.75))
    for z in ("0.5+0.3j", "1.2-0.4j", "-0.8+1.1j"):
        z = mpmath.mpc(complex(z))
        assert abs(G(a, z) / G(b, z) - 1) < 1e-30


@pytest.mark.parametrize("pole", [0.0, -0.75, -4 / 3])
def test_poles_are_simple(mp, prec, pole):
    # (z - p) G_b(z) has a finite nonzero limit; the O(eps) drift confirms order one
    vals = [eps * G(mp, pole + eps) for eps in (mpmath.mpf("1e-4"), mpmath.mpf("1e-5"))]
    assert abs(vals[1]) > 1e-6
    assert abs(vals[0] / vals[1] - 1) < 1e-2


def test_residue_at_origin():
    res, err = residue(lambda z: gb_np(0.75, z), 0.0, 0.2, n=64)
    assert abs(res - 1 / (2 * np.pi)) < 1e-13 and err < 1e-12


def test_numpy_evaluator_matches_mp(mp, prec):
    zs = np.array([0.3 + 0.1j, -2.1 + 1.7j, 4.2 - 2.3j, 1.0 - 0.4j, 0.5 + 6j, 0.5 - 6j])
    ref = np.array([complex(G(mp, z)) for z in zs])
    assert np.max(np.abs(gb_np(0.75, zs) / ref - 1)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-3, 5), y=st.floats(0.2, 3))
def test_numpy_shift_equations(x, y):
    b = 0.75
    z = np.array([complex(x, y)])
    for step in (b, 1 / b):
        r = np.exp(log_gb_np(b, z + step) - log_gb_np(b, z))[0]
        assert abs(r / (1 - cmath.exp(2j * cmath.pi * step * z[0])) - 1) < 1e-10
