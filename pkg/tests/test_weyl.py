import json

import numpy as np
import pytest

from qmiddle.errors import ConstraintError, IndeterminatePointError, InvalidInputError
from qmiddle.qpvi import random_qpvi_params, rel_diff
from qmiddle.reports import CheckReport
from qmiddle.weyl import (ACTED_FIELDS, PROP41_WORD, KNYParams, WeylWord, apply_generator, apply_word,
                          check_relations, deviation, js_to_kny, kny_to_js, l1_operator,
                          random_kny_params, relation_order, relation_table, verify_prop41,
                          verify_propA1)


def test_word_parsing():
    assert WeylWord.parse("s5s2s1").letters == (5, 2, 1)
    assert WeylWord.parse("5 2 1") == WeylWord.parse("521")
    assert str(WeylWord.parse("s2s0") * WeylWord.parse("s1")) == "s2s0s1"
    assert str(WeylWord(())) == "id"
    with pytest.raises(InvalidInputError):
        WeylWord((6,))


def test_relation_table_is_complete():
    table = relation_table()
    pairs = [(i, j) for i, j, _ in table if i != j]
    assert len(table) == 21 and len(pairs) == 15
    assert relation_order(2, 3) == 3 and relation_order(0, 1) == 2 and relation_order(4, 5) == 2


def test_relations_and_constraint(rng):
    rel, cons = check_relations(10, rng=rng)
    assert rel.passed and cons.passed
    assert len(rel.details) == 21


def test_braid_relation_is_not_commutation(rng):
    # s2 and s3 are joined in the diagram, so they do not commute
    k = random_kny_params(rng)
    assert deviation(apply_word(WeylWord((2, 3)) ** 2, k), k) > 1e-3


def test_generators_are_involutions(rng):
    k = random_kny_params(rng)
    for i in range(6):
        assert deviation(apply_generator(i, apply_generator(i, k)), k) < 1e-12


def test_indeterminate_point(rng):
    k = random_kny_params(rng)
    k = k.replace(f=k.nu3, nu7=k.kappa1 / k.nu3)
    with pytest.raises(IndeterminatePointError):
        apply_generator(2, k)


def test_kny_constraint_check(rng):
    k = random_kny_params(rng)
    assert k.check() is k
    with pytest.raises(ConstraintError):
        k.replace(nu1=2 * k.nu1).check()
    assert KNYParams.from_json(json.loads(json.dumps(k.to_json()))) == k


def test_dictionary_roundtrip(rng):
    p = random_qpvi_params(rng)
    back = kny_to_js(js_to_kny(p, 1.3, 0.4j), t=p.t, w=p.w)
    assert max(rel_diff(getattr(p, n), getattr(back, n)) for n in ("a1", "a2", "a3", "a4", "chi1", "chi2",
                                                                   "theta1", "theta2", "y", "z")) < 1e-13
    assert js_to_kny(p, 1.3, 0.4j).constraint_residual() < 1e-13


def test_convolution_word(rng):
    report = CheckReport("word", 1e-9)
    for _ in range(10):
        verify_prop41(random_qpvi_params(rng), report, kappa=(0.8 + 0.1j, 1.4))
    assert report.passed


def test_word_order_matters(rng):
    # the reversed word is a different map, so the composition order is pinned
    k = js_to_kny(random_qpvi_params(rng))
    reverse = WeylWord(tuple(reversed(PROP41_WORD.letters)))
    assert deviation(apply_word(reverse, k), apply_word(PROP41_WORD, k)) > 1e-3


def test_chi1_reflection(rng):
    report = CheckReport("refl", 1e-9)
    for _ in range(10):
        verify_propA1(random_qpvi_params(rng), report)
    assert report.passed


def test_l1_operator_annihilates_lattice_solution(rng):
    from qmiddle.jackson import js_lattice_solution, kny_solution, lattice_scalar_residual

    p = random_qpvi_params(rng)
    kny = js_to_kny(p, 0.9, 1.1j)
    y = kny_solution(js_lattice_solution(p, rng, 10), kny)
    assert lattice_scalar_residual(y, l1_operator(kny)) < 1e-9


def test_acted_fields():
    assert "q" not in ACTED_FIELDS and len(ACTED_FIELDS) == 12
