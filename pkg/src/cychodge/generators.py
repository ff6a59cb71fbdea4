"""Seeded generators for finite models used across the test surface.

Every randomized construction takes an explicit seed and uses
``random.Random`` so runs are reproducible bit for bit.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .ainfty import (
    AInftyModel,
    EulerData,
    generate_gauge_functor,
    reduced_sum,
)
from .scalars import RingSpec


def default_spec(t_order: int = 2, u_order: int = 4) -> RingSpec:
    """Ring used by the model generators: one even and one odd bulk variable."""
    return RingSpec(
        novikov_denominator=1,
        q_order=Fraction(3),
        u_order=u_order,
        e_window=40,
        t_order=t_order,
        bulk_vars=(("t", 0), ("s", 1)),
    )


def _with_euler(model: AInftyModel) -> AInftyModel:
    model.euler = EulerData(
        field=model.spec.euler_field(),
        shift={l: d for l, d in model.degrees.items()},
    )
    return model


def dual_numbers(spec: RingSpec) -> AInftyModel:
    """k[x]/(x^2) with x odd of degree 1."""
    one = spec.one()
    m2 = {
        ("e", "e"): {"e": one},
        ("e", "x"): {"x": one},
        ("x", "e"): {"x": -one},
    }
    return _with_euler(AInftyModel(
        spec=spec,
        labels=("e", "x"),
        degrees={"e": 0, "x": 1},
        unit="e",
        m={2: m2},
        n=1,
        pairing={("e", "x"): one, ("x", "e"): one},
        name="dual",
    ))


def exterior_two(spec: RingSpec) -> AInftyModel:
    """Exterior algebra on two odd degree-1 generators."""
    one = spec.one()
    m2 = {}
    labels = ("e", "p", "q", "w")
    degrees = {"e": 0, "p": 1, "q": 1, "w": 2}
    for x in labels:
        m2[("e", x)] = {x: one}
        if x != "e":
            sgn = -one if degrees[x] % 2 else one
            m2[(x, "e")] = {x: sgn}
    # m_2(a, b) = (-1)^{|a|} a ^ b on the generators
    m2[("p", "q")] = {"w": -one}
    m2[("q", "p")] = {"w": one}
    return _with_euler(AInftyModel(
        spec=spec,
        labels=labels,
        degrees=degrees,
        unit="e",
        m={2: m2},
        n=2,
        pairing={("e", "w"): one, ("w", "e"): one, ("p", "q"): one,
                 ("q", "p"): -one},
        name="ext2",
    ))


def contraction_pair(spec: RingSpec) -> AInftyModel:
    """Two-element model with m_1(y) = e; the unit bounds."""
    one = spec.one()
    m1 = {("y",): {"e": one}}
    m2 = {
        ("e", "e"): {"e": one},
        ("e", "y"): {"y": one},
        ("y", "e"): {"y": -one},
    }
    return _with_euler(AInftyModel(
        spec=spec,
        labels=("e", "y"),
        degrees={"e": 0, "y": -1},
        unit="e",
        m={1: m1, 2: m2},
        n=0,
        name="pair",
    ))


BASE_BUILDERS = (dual_numbers, exterior_two, contraction_pair)


def add_curvature(model: AInftyModel, coeff) -> AInftyModel:
    """Return the weakly curved model with m_0 = coeff * e added."""
    c = coeff if not isinstance(coeff, (int, Fraction)) else \
        model.spec.scalar(coeff)
    m = {k: {key: dict(v) for key, v in tab.items()}
         for k, tab in model.m.items()}
    m0 = dict(m.get(0, {}).get((), {}))
    cur = m0.get(model.unit)
    m0[model.unit] = c if cur is None else cur + c
    m.setdefault(0, {})[()] = m0
    out = AInftyModel(
        spec=model.spec,
        labels=model.labels,
        degrees=dict(model.degrees),
        unit=model.unit,
        m=m,
        mode=model.mode,
        n=model.n,
        pairing=model.pairing,
        euler=model.euler,
        arity_cutoff=model.arity_cutoff,
        name=model.name + "+curv",
    )
    return out


def _ideal_scalar_of_degree(spec: RingSpec, rng: random.Random, degree: int):
    """A homogeneous scalar of the given degree inside the ideal (q, t)."""
    odd_vars = [nm for nm, d in spec.bulk_vars if d % 2]
    even_vars = [nm for nm, d in spec.bulk_vars if d % 2 == 0]
    coeff = Fraction(rng.choice([1, -1, 2, -2, 1, -1]),
                     rng.choice([1, 1, 2]))
    t_exps = [0] * len(spec.bulk_vars)
    t_deg = 0
    if degree % 2:
        if not odd_vars:
            return None
        nm = rng.choice(odd_vars)
        t_exps[spec.t_index(nm)] = 1
        t_deg = dict(spec.bulk_vars)[nm]
    elif even_vars and rng.random() < 0.7:
        nm = rng.choice(even_vars)
        t_exps[spec.t_index(nm)] = 1
        t_deg = dict(spec.bulk_vars)[nm]
    rem = degree - t_deg
    if rem % 2:
        return None
    e_exp = rem // 2
    q_exp = Fraction(0)
    if sum(t_exps) == 0 or rng.random() < 0.4:
        q_exp = Fraction(rng.choice([1, 1, 2]), spec.novikov_denominator)
    if q_exp >= spec.q_order or sum(t_exps) >= spec.t_order:
        return None
    if abs(e_exp) > spec.e_window:
        return None
    return spec.monomial(q=q_exp, e=e_exp, t=tuple(t_exps), coeff=coeff)


def random_cochain(model: AInftyModel, rng: random.Random,
                   max_arity: int = 2, entries: int = 4) -> dict:
    """A random normalized degree-0 cochain with ideal coefficients."""
    spec = model.spec
    non_unit = [l for l in model.labels if l != model.unit]
    cochain: dict = {}
    attempts = 0
    placed = 0
    while placed < entries and attempts < 60:
        attempts += 1
        k = rng.randint(1, max_arity)
        key = tuple(rng.choice(non_unit) for _ in range(k))
        z = rng.choice(list(model.labels))
        if z == model.unit and k == 1:
            continue  # keep F_1 unipotent on the non-unit block
        want = reduced_sum([model.degrees[x] for x in key]) \
            - (model.degrees[z] - 1)
        c = _ideal_scalar_of_degree(spec, rng, want)
        if c is None:
            continue
        tab = cochain.setdefault(k, {})
        vec = tab.setdefault(key, {})
        vec[z] = vec.get(z, spec.zero()) + c
        placed += 1
    for tab in cochain.values():
        for key in list(tab):
            tab[key] = {z: c for z, c in tab[key].items() if not c.is_zero()}
            if not tab[key]:
                del tab[key]
    return cochain


def random_chain(model: AInftyModel, rng: random.Random, max_len: int = 3,
                 terms: int = 4, allow_u: bool = True) -> dict:
    """Random cyclic chain with normalized tails and mixed coefficients."""
    spec = model.spec
    non_unit = [l for l in model.labels if l != model.unit] or list(model.labels)
    out: dict = {}
    for _ in range(terms):
        k = rng.randint(0, max_len)
        word = (rng.choice(list(model.labels)),) + tuple(
            rng.choice(non_unit) for _ in range(k))
        mon = spec.monomial(
            q=Fraction(rng.choice([0, 0, 1]), spec.novikov_denominator),
            u=rng.choice([0, 0, 1, 2]) if allow_u else 0,
            e=rng.choice([0, 0, 1, -1]),
            t={nm: rng.choice([0, 0, 1]) for nm, _ in spec.bulk_vars},
            coeff=Fraction(rng.choice([1, -1, 2, 3]), rng.choice([1, 1, 2])),
        )
        cur = out.get(word)
        out[word] = mon if cur is None else cur + mon
    return {w: c for w, c in out.items() if not c.is_zero()}


def random_gauge_model(seed: int, spec: RingSpec | None = None,
                       curved: bool | None = None,
                       cutoff: int = 4):
    """Seeded model: random base algebra pushed along a random gauge.

    Returns (functor, model); the model may carry weak curvature.
    """
    rng = random.Random(seed)
    spec = spec or default_spec()
    base = BASE_BUILDERS[rng.randrange(len(BASE_BUILDERS))](spec)
    base.arity_cutoff = cutoff
    cochain = random_cochain(base, rng)
    functor, pushed = generate_gauge_functor(base, cochain, cutoff=cutoff)
    if curved is None:
        curved = rng.random() < 0.5
    if curved:
        c = spec.monomial(q=Fraction(1), e=1,
                          t=(0,) * len(spec.bulk_vars),
                          coeff=Fraction(rng.choice([1, -1, 2])))
        pushed = add_curvature(pushed, c)
    return functor, pushed
