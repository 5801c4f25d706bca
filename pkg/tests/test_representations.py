"""Positive representations of U_q(sl2) and U_q(sl3) as exact monomial sums."""

import dataclasses

import mpmath
import pytest

from qgv.qweyl_symbolic import MonomialSum, mono
from qgv.representations import (
    build_rep, check_all, check_relation, conjugated_form, consistency, divided_power_prefactor,
    expand_conjugated, load_manifest, relation_ids, swap_indices,
)
from qgv.special_functions import mp_new

REPS = {
    "sl2": build_rep("sl2"),
    "s1s2s1": build_rep("sl3", "s1s2s1"),
    "s2s1s2": build_rep("sl3", "s2s1s2"),
}


def test_manifest_counts():
    m = load_manifest()
    assert len(m["sl2"]) == 9
    assert len(m["sl3"]) == 21
    assert relation_ids("sl2")[0] == "KK(1,1)"


@pytest.mark.parametrize("tag", REPS)
def test_all_relations_exact(tag):
    results = check_all(REPS[tag])
    assert results
    bad = [r.relation_id for r in results if not r.passed]
    assert bad == []


def test_sl2_generators_as_printed():
    rep = REPS["sl2"]
    assert rep.E[0] == MonomialSum.from_terms([mono("nu + u - du"), mono("-nu - u - du")])
    assert rep.F[0] == MonomialSum.from_terms([mono("nu - u + du"), mono("-nu + u + du")])


def test_sl3_term_counts():
    assert REPS["s1s2s1"].term_counts() == {"E1": 2, "E2": 4, "F1": 4, "F2": 2}
    assert REPS["s2s1s2"].term_counts() == {"E1": 4, "E2": 2, "F1": 2, "F2": 4}


def test_flipped_sign_breaks_ef():
    rep = REPS["sl2"]
    bad = dataclasses.replace(rep, F=(-rep.F[0],))
    r = check_relation(bad, "EF(1,1)")
    assert not r.passed
    assert r.residual_terms > 0


def test_dropped_term_breaks_relations():
    rep = REPS["s1s2s1"]
    terms = list(rep.E[0].terms())
    bad = dataclasses.replace(rep, E=(MonomialSum.from_terms(terms[:-1]), rep.E[1]))
    failed = {r.relation_id for r in check_all(bad) if not r.passed}
    assert "EF(1,1)" in failed


def test_unknown_relation():
    with pytest.raises(ValueError):
        check_relation(REPS["sl2"], "XY(1)")


@pytest.mark.parametrize("tag,gen", [("sl2", "E"), ("sl2", "F")]
                         + [(w, g) for w in ("s1s2s1", "s2s1s2") for g in ("E1", "E2", "F1", "F2")])
def test_conjugated_forms_consistent(tag, gen):
    assert consistency(REPS[tag], gen)


def test_expand_sl2_e():
    cg = conjugated_form(REPS["sl2"], "E")
    assert (expand_conjugated(cg) - REPS["sl2"].E[0]).is_zero()
    with pytest.raises(ValueError):
        conjugated_form(REPS["sl2"], "E3")


@pytest.mark.parametrize("word", ["s1s2s1", "s2s1s2"])
def test_swap_is_involution(word):
    rep = REPS[word]
    back = swap_indices(swap_indices(rep))
    assert (back.K, back.E, back.F) == (rep.K, rep.E, rep.F)


def test_divided_power_prefactor_pole_and_value(prec):
    mp = mp_new(0.75)
    v = divided_power_prefactor(mp, 0.3)
    assert mpmath.isfinite(v) and abs(v) > 0
