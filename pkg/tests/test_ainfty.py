import random
from fractions import Fraction

import pytest

from cychodge.ainfty import (
    AInftyModel,
    ainfty_defect,
    check_ainfty,
    check_degrees,
    check_euler,
    check_functor,
    check_functor_grading,
    check_functor_unit,
    check_unit,
    dagger,
    eval_table,
    generate_gauge_functor,
    koszul_data,
    object_inclusion,
    reduced_sum,
    subset_interleave_sign,
    vec_eq,
    zeta_weight,
)
from cychodge.errors import NotNilpotent
from cychodge.generators import (
    add_curvature,
    contraction_pair,
    default_spec,
    dual_numbers,
    exterior_two,
    random_gauge_model,
)

SPEC = default_spec(t_order=3)


@pytest.fixture(scope="module")
def models():
    return {
        "dual": dual_numbers(SPEC),
        "ext2": exterior_two(SPEC),
        "pair": contraction_pair(SPEC),
    }


def test_sign_data():
    assert reduced_sum((1, 2, 1)) == 1
    assert dagger((1, 2, 1)) == 0
    assert zeta_weight((1, 2, 1)) == 3
    assert subset_interleave_sign((1, 1, 2), (2,)) == 4
    kd = koszul_data((1, 2, 1), (2,), n=2)
    assert kd["zeta_perp"] == 1 + 2 + 2


def test_base_models_satisfy_relations(models):
    for m in models.values():
        assert check_ainfty(m) == []
        assert check_unit(m) == []
        assert check_euler(m) == []
        assert check_degrees(m) == []


def test_curved_models_satisfy_relations(models):
    c = SPEC.monomial(q=Fraction(1), e=1, t=(0, 0), coeff=Fraction(3))
    for m in models.values():
        curved = add_curvature(m, c)
        assert curved.is_curved()
        assert check_ainfty(curved) == []
        assert check_unit(curved) == []


def test_defect_detects_broken_sign(models):
    bad = dual_numbers(SPEC)
    bad.m[2][("x", "e")] = {"x": SPEC.one()}  # drop the Koszul sign
    assert check_ainfty(bad) != []


def test_eval_extraction_signs(models):
    ext = models["ext2"]
    s = SPEC.t("s")
    pv, qv = ext.basis_vec("p"), ext.basis_vec("q")
    sp = {"p": s}
    sq = {"q": s}
    # m_2(s p, q) = -s m_2(p, q) = s w ; m_2(p, s q) likewise
    got = eval_table(ext, ext.table(2), [sp, qv], op_parity=1)
    assert vec_eq(got, {"w": s})
    got = eval_table(ext, ext.table(2), [pv, sq], op_parity=1)
    assert vec_eq(got, {"w": s})
    # mixed-parity coefficients split linearly
    mixed = {"p": SPEC.one() + s}
    got = eval_table(ext, ext.table(2), [mixed, qv], op_parity=1)
    assert vec_eq(got, {"w": -SPEC.one() + s})


def test_defect_is_zero_pointwise(models):
    ext = models["ext2"]
    assert ainfty_defect(ext, ("p", "q", "p")) == {}


def test_gauge_scaling_cochain():
    ext = exterior_two(SPEC)
    t = SPEC.t("t")
    cochain = {1: {("p",): {"p": t}}}
    F, pushed = generate_gauge_functor(ext, cochain)
    assert check_functor(F) == []
    assert check_functor_unit(F) == []
    assert check_functor_grading(F) == []
    assert check_ainfty(pushed) == []
    assert check_unit(pushed) == []
    assert check_euler(pushed) == []
    one = SPEC.one()
    inv = one - t + t * t  # (1+t)^{-1} at this truncation
    assert vec_eq(pushed.table(2)[("p", "q")], {"w": -inv})


def test_gauge_arity_raising_cochain():
    ext = exterior_two(SPEC)
    t = SPEC.t("t")
    cochain = {2: {("p", "q"): {"p": t}}}
    F, pushed = generate_gauge_functor(ext, cochain)
    assert check_functor(F) == []
    assert check_ainfty(pushed) == []
    assert check_unit(pushed) == []
    assert check_euler(pushed) == []
    assert vec_eq(pushed.table(3).get(("p", "q", "q"), {}), {"w": t})


def test_gauge_rejects_non_ideal_cochain():
    ext = exterior_two(SPEC)
    cochain = {1: {("p",): {"q": SPEC.one()}}}
    with pytest.raises(NotNilpotent):
        generate_gauge_functor(ext, cochain)


def test_object_inclusion_curved():
    c = SPEC.monomial(q=Fraction(1), e=1, t=(0, 0), coeff=Fraction(1))
    target = add_curvature(dual_numbers(SPEC), c)
    F, K = object_inclusion(target)
    assert check_ainfty(K) == []
    assert check_functor(F) == []
    assert check_functor_unit(F) == []


def test_random_gauge_models_satisfy_relations():
    for seed in range(6):
        F, model = random_gauge_model(seed)
        assert check_functor(F) == [], f"seed {seed}"
        assert check_ainfty(model) == [], f"seed {seed}"
        assert check_unit(model) == [], f"seed {seed}"
        assert check_euler(model) == [], f"seed {seed}"


def test_random_models_are_reproducible():
    _, a = random_gauge_model(11)
    _, b = random_gauge_model(11)
    for k, tab in a.m.items():
        for key, val in tab.items():
            assert vec_eq(val, b.m[k][key])
