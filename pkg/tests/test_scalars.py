"""Exactness and algebra laws for the truncated scalar ring."""

import random
from fractions import Fraction

import pytest

from cychodge.errors import LogObstruction, NotAUnit, SpecMismatch
from cychodge.scalars import (
    RingSpec,
    derive,
    exp_euler,
    integrate_qlog,
    invert,
    zeta_q,
)


SPEC = RingSpec(
    novikov_denominator=2,
    q_order=Fraction(4),
    u_order=4,
    e_window=8,
    t_order=3,
    bulk_vars=(("t1", -1), ("t2", 1), ("s", -2)),
)


def random_element(spec, rng, size=4, allow_u=True, allow_e=True):
    out = spec.zero()
    for _ in range(size):
        q = Fraction(rng.randrange(0, 5), spec.novikov_denominator)
        u = rng.randrange(0, 3) if allow_u else 0
        e = rng.randrange(-2, 3) if allow_e else 0
        t = {}
        for name, d in spec.bulk_vars:
            k = rng.randrange(0, 2 if d % 2 else 3)
            if k:
                t[name] = k
        c = Fraction(rng.randrange(-6, 7), rng.randrange(1, 4))
        out = out + spec.monomial(q=q, u=u, e=e, t=t, coeff=c)
    return out


def test_zeta_q_frozen_values():
    spec = SPEC
    assert zeta_q(spec.one()) == 0
    x = spec.monomial(q=Fraction(1, 2), t={"t1": 1})
    assert zeta_q(x) == Fraction(3, 2)
    y = spec.q(2) + spec.t("t1") * spec.t("t2")
    assert zeta_q(y) == 2
    assert zeta_q(spec.zero()) is None
    # e and u carry no zeta weight
    assert zeta_q(spec.e(2)) == 0
    assert zeta_q(spec.u()) == 0


def test_ring_axioms_randomized():
    rng = random.Random(7)
    for _ in range(30):
        x = random_element(SPEC, rng)
        y = random_element(SPEC, rng)
        z = random_element(SPEC, rng)
        assert (x + y) * z == x * z + y * z
        assert (x * y) * z == x * (y * z)
        assert x * SPEC.one() == x
        assert x - x == SPEC.zero()


def test_supercommutativity():
    rng = random.Random(11)
    for _ in range(40):
        x = random_element(SPEC, rng, size=2)
        y = random_element(SPEC, rng, size=2)
        xe, xo = x.parity_parts()
        ye, yo = y.parity_parts()
        assert xe * ye == ye * xe
        assert xe * yo == yo * xe
        assert xo * yo == -(yo * xo)


def test_odd_variable_squares_to_zero():
    t1 = SPEC.t("t1")
    assert (t1 * t1).is_zero()
    assert not (SPEC.t("s") * SPEC.t("s")).is_zero()


def test_mixed_spec_arithmetic_raises():
    other = RingSpec(q_order=2, u_order=2, t_order=1)
    with pytest.raises(SpecMismatch):
        SPEC.one() + other.one()


def test_truncation_is_an_ideal():
    # re-truncating to smaller q/u/t bounds commutes with + and *
    small = RingSpec(
        novikov_denominator=2,
        q_order=Fraction(2),
        u_order=2,
        e_window=8,
        t_order=2,
        bulk_vars=SPEC.bulk_vars,
    )
    rng = random.Random(23)
    for _ in range(30):
        x = random_element(SPEC, rng)
        y = random_element(SPEC, rng)
        assert (x * y).truncate(small) == x.truncate(small) * y.truncate(small)
        assert (x + y).truncate(small) == x.truncate(small) + y.truncate(small)


def test_derivation_leibniz():
    rng = random.Random(5)
    fields = [
        SPEC.d_dt("t1"),
        SPEC.d_dt("t2"),
        SPEC.d_dt("s"),
        SPEC.e_de(),
        SPEC.q_dq(),
        SPEC.euler_field(),
    ]
    # A plain d/dt derivation maps the t-order-N quotient onto the
    # t-order-(N-1) quotient, so Leibniz is compared one order down;
    # Euler-type derivations preserve monomials and are exact on the nose.
    down = SPEC.with_t_order(SPEC.t_order - 1)
    for v in fields:
        plain = bool(v.d_t)
        for _ in range(12):
            x = random_element(SPEC, rng, size=3)
            y = random_element(SPEC, rng, size=3)
            lhs = v(x * y)
            rhs = SPEC.zero()
            xe, xo = x.parity_parts()
            rhs = rhs + v(x) * y
            sgn = -1 if v.parity else 1
            rhs = rhs + xe * v(y) + (sgn * xo) * v(y)
            if plain:
                assert lhs.truncate(down) == rhs.truncate(down)
            else:
                assert lhs == rhs


def test_derivation_commutator_matches_action():
    rng = random.Random(31)
    fields = [
        SPEC.d_dt("t1"),
        SPEC.d_dt("t2"),
        SPEC.euler_t("t1", 2),
        SPEC.e_de(),
        SPEC.euler_field(),
        SPEC.q_dq() + SPEC.e_de(),
    ]
    for v in fields:
        for w in fields:
            c = v.commutator(w)
            for _ in range(6):
                x = random_element(SPEC, rng, size=3)
                sgn = -1 if (v.parity and w.parity) else 1
                assert c(x) == v(w(x)) - sgn * w(v(x))


def test_euler_field_picks_out_half_degrees():
    # E = e d/de + sum (deg t_i / 2) t_i d/dt_i doubles to the degree
    rng = random.Random(3)
    E = SPEC.euler_field()
    for _ in range(20):
        x = random_element(SPEC, rng, size=1, allow_u=False)
        if x.is_zero():
            continue
        ((mon, c),) = x.terms.items()
        d = SPEC.monomial_degree(mon)
        assert (2 * E(x)) == d * x


def test_integrate_qlog_values():
    spec = SPEC
    assert integrate_qlog(spec.q()) == spec.q()
    assert integrate_qlog(3 * spec.q(2)) == Fraction(3, 2) * spec.q(2)
    got = integrate_qlog(spec.q() + 4 * spec.q(2))
    assert got == spec.q() + 2 * spec.q(2)
    with pytest.raises(LogObstruction):
        integrate_qlog(spec.one())
    with pytest.raises(ValueError):
        integrate_qlog(spec.u())
    # round trip: q d/dq of the primitive gives back the input
    h = spec.q() + Fraction(7, 2) * spec.q(3) + spec.q(2) * spec.t("t1")
    assert spec.q_dq()(integrate_qlog(h)) == h


def test_invert_geometric_series():
    spec = SPEC
    x = spec.one() - spec.q()
    inv = invert(x)
    expected = spec.zero()
    k = 0
    while True:
        term = spec.q() ** k
        if term.is_zero():
            break
        expected = expected + term
        k += 1
    assert inv == expected
    assert inv * x == spec.one()


def test_invert_random_units():
    rng = random.Random(17)
    for _ in range(15):
        x = random_element(SPEC, rng, size=3, allow_e=False)
        # force unitality: nonzero constant, strip zero-weight tails
        x = x - x.constant_term() + 1
        x = SPEC.element(
            {
                m: c
                for m, c in x.terms.items()
                if m[0] > 0 or m[1] > 0 or sum(m[3]) > 0
            }
        ) + 1
        inv = invert(x)
        assert inv * x == SPEC.one()


def test_invert_non_units_raise():
    with pytest.raises(NotAUnit):
        invert(SPEC.q())
    with pytest.raises(NotAUnit):
        invert(SPEC.zero())
    with pytest.raises(NotAUnit):
        invert(SPEC.one() + SPEC.e())  # e-power is not nilpotent


def test_u_shift_and_pole_bookkeeping():
    x = SPEC.one() + SPEC.u(2)
    shifted = x.u_shift(-1)
    assert shifted.min_u_exp() == -1
    assert shifted.u_shift(1) == x
    # shifting up can truncate; that loss is the adic quotient, not a bug
    top = SPEC.u(SPEC.u_order - 1)
    assert top.u_shift(1).is_zero()


def test_exp_euler_matches_series():
    # exp(t2 * e d/de) e^2 = e^2 * (1 + 2 t2 + 2 t2^2 + ...) at t-order 3
    spec = RingSpec(
        q_order=2, u_order=2, e_window=4, t_order=3, bulk_vars=(("t2", 0),)
    )
    x = spec.e(2)
    got = exp_euler(spec.e_de(), x, "t2")
    t = spec.t("t2")
    expected = x + 2 * t * x + 2 * (t * t) * x
    assert got == expected


def test_derive_module_function():
    v = SPEC.d_dt("t1")
    x = SPEC.t("t1") * SPEC.q()
    assert derive(v, x) == SPEC.q()
