"""Finite curved A-infinity models over the truncated scalar ring.

Structure tables are stored in the shifted (bar) convention: ``m[k]`` maps a
tuple of basis labels to a sparse vector, and the defining relations carry
only reduced-degree prefix signs,

    sum_{j,s} (-1)^{|x_1|'+...+|x_j|'} m(x_1..x_j, m(x_{j+1}..x_{j+s}), ...) = 0.

In particular the binary table of a graded associative algebra appears here
as ``m_2(a,b) = (-1)^{|a|} a*b`` and the strict unit satisfies
``m_2(e,x) = x`` and ``m_2(x,e) = (-1)^{|x|} x``.

All multilinear evaluation goes through :func:`eval_table`, which implements
the Koszul bookkeeping exactly once: coefficients extracted past an operator
of parity p and past earlier slots, and optional "inserted operator" tags for
coderivation-style prefix signs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CutoffExceeded, MissingEulerData, NotNilpotent
from .scalars import DerivationSpec, ScalarElement, zeta_q

# A Vector is a sparse map {basis label: ScalarElement}.
Vector = dict


def vzero() -> Vector:
    return {}


def vadd(a: Vector, b: Vector) -> Vector:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k)
        s = v if s is None else s + v
        if s.is_zero():
            out.pop(k, None)
        else:
            out[k] = s
    return out


def vscale(f, a: Vector) -> Vector:
    """Left multiplication by a scalar (or exact rational)."""
    out = {}
    for k, v in a.items():
        w = f * v if not isinstance(f, ScalarElement) else f * v
        if not w.is_zero():
            out[k] = w
    return out


def vneg(a: Vector) -> Vector:
    return {k: -v for k, v in a.items()}


def vec_is_zero(a: Vector) -> bool:
    return all(v.is_zero() for v in a.values())


def vec_eq(a: Vector, b: Vector) -> bool:
    return vec_is_zero(vadd(a, vneg(b)))


def vderive(v: DerivationSpec, a: Vector) -> Vector:
    """Apply a derivation to the coefficients of a vector."""
    out = {}
    for k, c in a.items():
        w = v(c)
        if not w.is_zero():
            out[k] = w
    return out


# -- classical Koszul sign data ----------------------------------------------


def reduced_sum(degrees) -> int:
    """epsilon: sum of reduced degrees |a_i| - 1."""
    return sum(d - 1 for d in degrees)


def dagger(degrees) -> int:
    """Sum over i<j of |a_i|'|a_j|'."""
    ds = [d - 1 for d in degrees]
    out = 0
    for i in range(len(ds)):
        for j in range(i + 1, len(ds)):
            out += ds[i] * ds[j]
    return out


def zeta_weight(degrees) -> int:
    """1 + sum_j j * |a_j|'."""
    return 1 + sum((j + 1) * (d - 1) for j, d in enumerate(degrees))


def zeta_perp(degrees, gamma_degrees, n: int) -> int:
    """|alpha|' + |gamma| + n for a point-constrained operation."""
    return reduced_sum(degrees) + sum(gamma_degrees) + n


def subset_interleave_sign(gamma_degrees, subset) -> int:
    """Koszul exponent for extracting the subset I from an ordered tuple.

    Counts pairs i in I, j not in I with j < i, weighted by the product of
    (unreduced) degrees, i.e. the sign of un-shuffling gamma_I to the front.
    """
    inside = set(subset)
    out = 0
    for i in subset:
        for j in range(len(gamma_degrees)):
            if j < i and j not in inside:
                out += gamma_degrees[i] * gamma_degrees[j]
    return out


def koszul_data(degrees, gamma_degrees=(), n: int = 0) -> dict:
    """Bundle of the standard sign quantities for a tuple of degrees."""
    return {
        "eps": reduced_sum(degrees),
        "dagger": dagger(degrees),
        "zeta": zeta_weight(degrees),
        "zeta_perp": zeta_perp(degrees, gamma_degrees, n),
    }


# -- models ------------------------------------------------------------------


@dataclass
class EulerData:
    field: DerivationSpec
    shift: dict  # label -> int, the grading operator on basis elements


@dataclass
class AInftyModel:
    """A finite (possibly weakly curved) strictly unital A-infinity model."""

    spec: RingSpec
    labels: tuple
    degrees: dict
    unit: str | None
    m: dict = field(default_factory=dict)  # arity -> {label tuple -> Vector}
    mode: str = "Z"  # "Z" or "Z2"
    n: int = 0  # pairing dimension
    pairing: dict | None = None  # (label, label) -> ScalarElement
    euler: EulerData | None = None
    arity_cutoff: int = 4
    name: str = ""

    def __post_init__(self):
        for l in self.labels:
            if l not in self.degrees:
                raise ValueError(f"no degree for label {l!r}")

    def degree(self, label) -> int:
        return self.degrees[label]

    def parity(self, label) -> int:
        return self.degrees[label] % 2

    def reduced_parity(self, label) -> int:
        return (self.degrees[label] + 1) % 2

    def table(self, k: int) -> dict:
        return self.m.get(k, {})

    def m0(self) -> Vector:
        return dict(self.table(0).get((), {}))

    def is_curved(self) -> bool:
        return not vec_is_zero(self.m0())

    def basis_vec(self, label, coeff=1) -> Vector:
        c = coeff if isinstance(coeff, ScalarElement) else self.spec.scalar(coeff)
        return {label: c}

    def max_arity(self) -> int:
        return max((k for k, t in self.m.items() if t), default=0)

    def pair(self, x: Vector, y: Vector) -> ScalarElement:
        """Evaluate the cyclic pairing on two vectors.

        The pairing is bilinear over the scalars with the coefficient of the
        second slot extracted past the first slot's basis label.
        """
        if self.pairing is None:
            raise MissingEulerData("model has no pairing")
        out = self.spec.zero()
        for a, fa in x.items():
            for b, fb in y.items():
                val = self.pairing.get((a, b))
                if val is None or val.is_zero():
                    continue
                ev, od = fb.parity_parts()
                coeff = fa * ev
                if not od.is_zero():
                    sgn = -1 if self.parity(a) else 1
                    coeff = coeff + sgn * (fa * od)
                out = out + coeff * val
        return out


def eval_table(model: AInftyModel, table: dict, args, op_parity: int = 0,
               tags=None) -> Vector:
    """Multilinear evaluation with exact Koszul signs.

    ``args`` are sparse vectors over ``model``'s basis.  The coefficient of
    slot i is extracted to the front past the operator (parity
    ``op_parity``), past the basis labels of slots j < i, and past any
    inserted-operator tags at slots > i.  ``tags`` maps slot index to the
    parity of an operator applied *inside* that slot (coderivation-style
    insertions); each tag also contributes its own prefix sign over the
    basis labels of the earlier slots.
    """
    k = len(args)
    if k == 0:
        return dict(table.get((), {}))
    tags = tags or {}
    tag_after = [0] * (k + 1)
    for i in range(k - 1, -1, -1):
        tag_after[i] = tag_after[i + 1] + tags.get(i, 0)
    out: Vector = {}
    supports = []
    for a in args:
        sup = []
        for l, c in a.items():
            if c.is_zero():
                continue
            if c.parity() is None:
                ev, od = c.parity_parts()
                if not ev.is_zero():
                    sup.append((l, ev))
                if not od.is_zero():
                    sup.append((l, od))
            else:
                sup.append((l, c))
        if not sup:
            return {}
        supports.append(sup)
    for combo in itertools.product(*supports):
        key = tuple(l for l, _ in combo)
        val = table.get(key)
        if not val:
            continue
        sign_exp = 0
        prefix_red = 0
        coeff = None
        for i, (l, c) in enumerate(combo):
            if c.parity():
                sign_exp += op_parity + prefix_red + tag_after[i + 1]
            sign_exp += tags.get(i, 0) * prefix_red
            prefix_red += model.reduced_parity(l)
            coeff = c if coeff is None else coeff * c
        if sign_exp % 2:
            coeff = -coeff
        for z, h in val.items():
            add = coeff * h
            if add.is_zero():
                continue
            cur = out.get(z)
            cur = add if cur is None else cur + add
            if cur.is_zero():
                out.pop(z, None)
            else:
                out[z] = cur
    return out


def apply_m(model: AInftyModel, args, tags=None) -> Vector:
    return eval_table(model, model.table(len(args)), args, op_parity=1,
                      tags=tags)


# -- structure checks --------------------------------------------------------


def _basis_tuples(model: AInftyModel, k: int):
    return itertools.product(model.labels, repeat=k)


def ainfty_defect(model: AInftyModel, xs) -> Vector:
    """Left-hand side of the A-infinity relation on a basis tuple."""
    k = len(xs)
    out: Vector = {}
    curved = model.is_curved()
    for j in range(k + 1):
        for s in range(k - j + 1):
            if s == 0 and not curved:
                continue
            if s == 0:
                inner = model.m0()
            else:
                inner = model.table(s).get(tuple(xs[j:j + s]), {})
            if not inner or vec_is_zero(inner):
                continue
            outer_args = (
                [model.basis_vec(x) for x in xs[:j]]
                + [inner]
                + [model.basis_vec(x) for x in xs[j + s:]]
            )
            out = vadd(
                out,
                eval_table(model, model.table(k - s + 1), outer_args,
                           op_parity=1, tags={j: 1}),
            )
    return out


def check_ainfty(model: AInftyModel, max_len: int | None = None) -> list:
    """All violated A-infinity relations up to the cutoff (empty = pass)."""
    top = model.arity_cutoff if max_len is None else max_len
    bad = []
    for k in range(0, top + 1):
        for xs in _basis_tuples(model, k):
            defect = ainfty_defect(model, xs)
            if not vec_is_zero(defect):
                bad.append((xs, defect))
    return bad


def check_unit(model: AInftyModel) -> list:
    """Strict unit axioms; returns a list of human-readable violations."""
    e = model.unit
    if e is None:
        return ["model has no unit"]
    bad = []
    one = model.spec.one()
    t1 = model.table(1).get((e,), {})
    if not vec_is_zero(t1):
        bad.append("m_1(e) != 0")
    for x in model.labels:
        got = model.table(2).get((e, x), {})
        if not vec_eq(got, {x: one}):
            bad.append(f"m_2(e, {x}) != {x}")
        got = model.table(2).get((x, e), {})
        sgn = -1 if model.parity(x) else 1
        if not vec_eq(got, {x: sgn * one}):
            bad.append(f"m_2({x}, e) != (-1)^|{x}| {x}")
    for k, tab in model.m.items():
        if k < 3:
            continue
        for key, val in tab.items():
            if e in key and not vec_is_zero(val):
                bad.append(f"m_{k} nonzero on unit-containing tuple {key}")
    m0 = model.m0()
    for l, c in m0.items():
        if l != e and not c.is_zero():
            bad.append("curvature is not a multiple of the unit")
    return bad


def check_euler(model: AInftyModel) -> list:
    """Euler-grading compatibility of all structure tables and the pairing."""
    if model.euler is None:
        raise MissingEulerData("model has no Euler grading data")
    if model.mode != "Z":
        raise MissingEulerData("Euler grading needs a Z-graded model")
    E = model.euler.field
    shift = model.euler.shift
    bad = []
    if model.unit is not None and shift.get(model.unit, 0) != 0:
        bad.append("Gr(e) != 0")
    for k, tab in model.m.items():
        for key, val in tab.items():
            want = sum(shift[x] for x in key) + 2 - k
            for z, f in val.items():
                lhs = 2 * E(f) + shift[z] * f
                if lhs != want * f:
                    bad.append((k, key, z))
    if model.pairing is not None:
        for (a, b), f in model.pairing.items():
            if f.is_zero():
                continue
            # scalar degree of <a, b> is |a| + |b| - n
            want = model.degrees[a] + model.degrees[b] - model.n
            if 2 * E(f) != want * f:
                bad.append(("pairing", a, b))
    return bad


def check_degrees(model: AInftyModel) -> list:
    """Structure maps have degree 2 - k (mod 2 in Z/2 mode)."""
    bad = []
    for k, tab in model.m.items():
        for key, val in tab.items():
            want = sum(model.degrees[x] for x in key) + 2 - k
            for z, f in val.items():
                d = f.degree()
                if d is None:
                    if model.mode == "Z":
                        bad.append((k, key, z, "inhomogeneous coefficient"))
                        continue
                    d = 0 if f.parity() == 0 else 1
                got = model.degrees[z] + d
                if model.mode == "Z":
                    if got != want:
                        bad.append((k, key, z, got, want))
                else:
                    if (got - want) % 2:
                        bad.append((k, key, z, got, want))
    return bad


# -- functors ----------------------------------------------------------------


@dataclass
class AInftyFunctor:
    source: AInftyModel
    target: AInftyModel
    f: dict  # arity >= 1 -> {label tuple -> Vector over target}
    name: str = ""

    def table(self, k: int) -> dict:
        return self.f.get(k, {})

    def max_arity(self) -> int:
        return max((k for k, t in self.f.items() if t), default=1)


def functor_defect(F: AInftyFunctor, xs) -> Vector:
    """F(sum m-insertions) - sum m'(F-blocks) on a source basis tuple."""
    C, D = F.source, F.target
    k = len(xs)
    lhs: Vector = {}
    curved = C.is_curved()
    for j in range(k + 1):
        for s in range(k - j + 1):
            if s == 0 and not curved:
                continue
            inner = C.m0() if s == 0 else C.table(s).get(tuple(xs[j:j + s]), {})
            if not inner or vec_is_zero(inner):
                continue
            args = (
                [C.basis_vec(x) for x in xs[:j]]
                + [inner]
                + [C.basis_vec(x) for x in xs[j + s:]]
            )
            lhs = vadd(lhs, eval_table(C, F.table(k - s + 1), args,
                                       op_parity=0, tags={j: 1}))
    rhs: Vector = {}
    if k == 0:
        rhs = D.m0()
    for part in compositions(k):
        blocks = split_blocks(xs, part)
        gs = [F.table(len(b)).get(tuple(b), {}) for b in blocks]
        if any(vec_is_zero(g) for g in gs):
            continue
        rhs = vadd(rhs, eval_table(D, D.table(len(gs)), gs, op_parity=1))
    return vadd(lhs, vneg(rhs))


def compositions(k: int):
    """All ordered partitions of k into positive parts."""
    if k == 0:
        return
    for bits in itertools.product((0, 1), repeat=k - 1):
        part = []
        size = 1
        for b in bits:
            if b:
                part.append(size)
                size = 1
            else:
                size += 1
        part.append(size)
        yield tuple(part)


def split_blocks(xs, part):
    out = []
    i = 0
    for p in part:
        out.append(tuple(xs[i:i + p]))
        i += p
    return out


def check_functor(F: AInftyFunctor, max_len: int | None = None) -> list:
    top = max_len
    if top is None:
        top = min(F.source.arity_cutoff, F.target.arity_cutoff)
    bad = []
    lo = 0 if (F.source.is_curved() or F.target.is_curved()) else 1
    for k in range(lo, top + 1):
        for xs in _basis_tuples(F.source, k):
            d = functor_defect(F, xs)
            if not vec_is_zero(d):
                bad.append((xs, d))
    return bad


def check_functor_unit(F: AInftyFunctor) -> list:
    bad = []
    e, eD = F.source.unit, F.target.unit
    if e is None or eD is None:
        return ["functor unit check needs units on both sides"]
    if not vec_eq(F.table(1).get((e,), {}), {eD: F.target.spec.one()}):
        bad.append("F_1(e) != e")
    for k, tab in F.f.items():
        if k < 2:
            continue
        for key, val in tab.items():
            if e in key and not vec_is_zero(val):
                bad.append(f"F_{k} nonzero on unit-containing tuple {key}")
    return bad


def check_functor_grading(F: AInftyFunctor) -> list:
    """Gr_D F^k = F^k Gr_C + (1 - k) F^k, entrywise."""
    if F.source.euler is None or F.target.euler is None:
        raise MissingEulerData("functor grading check needs Euler data")
    E = F.target.euler.field
    sC = F.source.euler.shift
    sD = F.target.euler.shift
    bad = []
    for k, tab in F.f.items():
        for key, val in tab.items():
            want = sum(sC[x] for x in key) + 1 - k
            for z, f in val.items():
                if 2 * E(f) + sD[z] * f != want * f:
                    bad.append((k, key, z))
    return bad


# -- gauge functors ----------------------------------------------------------


def identity_table(model: AInftyModel) -> dict:
    one = model.spec.one()
    return {(x,): {x: one} for x in model.labels}


def _mat_apply(model: AInftyModel, table1: dict, vec: Vector) -> Vector:
    """Apply an arity-1 table (a matrix) to a vector; parity-0 map."""
    return eval_table(model, table1, [vec], op_parity=0)


def invert_arity_one(model: AInftyModel, table1: dict) -> dict:
    """Invert id + nilpotent given as an arity-1 table."""
    one = model.spec.one()
    n_table = {}
    for x in model.labels:
        row = dict(table1.get((x,), {}))
        row[x] = row.get(x, model.spec.zero()) - one
        n_table[(x,)] = {k: v for k, v in row.items() if not v.is_zero()}
    out = identity_table(model)
    power = identity_table(model)
    sign = -1
    for _ in range(80):
        nxt = {}
        nonzero = False
        for x in model.labels:
            img = _mat_apply(model, n_table, power.get((x,), {}))
            if not vec_is_zero(img):
                nonzero = True
            nxt[(x,)] = img
        power = nxt
        if not nonzero:
            break
        for x in model.labels:
            out[(x,)] = vadd(out[(x,)], vscale(Fraction(sign), power[(x,)]))
        sign = -sign
    else:
        raise NotNilpotent("arity-1 part is not unipotent at this truncation")
    return out


def coalgebra_inverse(model: AInftyModel, f_tables: dict, cutoff: int) -> dict:
    """Inverse of a degree-0 coalgebra morphism given by its components."""
    g: dict = {1: invert_arity_one(model, f_tables.get(1, {}))}
    for k in range(2, cutoff + 1):
        table = {}
        for xs in _basis_tuples(model, k):
            ys = [_mat_apply(model, g[1], model.basis_vec(x)) for x in xs]
            acc: Vector = {}
            for part in compositions(k):
                if len(part) == k:
                    continue  # the all-singleton term carries the unknown
                blocks = split_blocks(list(range(k)), part)
                inner = []
                for b in blocks:
                    fb = eval_table(model, f_tables.get(len(b), {}),
                                    [ys[i] for i in b], op_parity=0)
                    inner.append(fb)
                if any(vec_is_zero(w) for w in inner):
                    continue
                acc = vadd(acc, eval_table(model, g.get(len(inner), {}),
                                           inner, op_parity=0))
            if acc:
                table[tuple(xs)] = vneg(acc)
        g[k] = table
    return g


def pushforward_structure(model: AInftyModel, f_tables: dict, g_tables: dict,
                          arity: int) -> Vector | dict:
    """Cogenerators of F o M o G at the given arity."""
    out_table = {}
    for xs in _basis_tuples(model, arity):
        acc: Vector = {}
        for part in compositions(arity):
            s = len(part)
            blocks = split_blocks(xs, part)
            gs = [g_tables.get(len(b), {}).get(tuple(b), {}) for b in blocks]
            if any(vec_is_zero(v) for v in gs):
                continue
            for p in range(s):
                for r in range(1, s - p + 1):
                    outer_arity = s - r + 1
                    f_tab = f_tables.get(outer_arity, {})
                    if not f_tab:
                        continue
                    inner = eval_table(model, model.table(r),
                                       gs[p:p + r], op_parity=1)
                    if vec_is_zero(inner):
                        continue
                    args = gs[:p] + [inner] + gs[p + r:]
                    acc = vadd(acc, eval_table(model, f_tab, args,
                                               op_parity=0, tags={p: 1}))
        if acc and not vec_is_zero(acc):
            out_table[tuple(xs)] = acc
    return out_table


def validate_gauge_cochain(model: AInftyModel, cochain: dict):
    """Degree-0, normalized, coefficients in the deformation ideal."""
    e = model.unit
    for k, tab in cochain.items():
        if k < 1:
            raise ValueError("gauge cochain components start at arity 1")
        for key, val in tab.items():
            if e is not None and e in key:
                if not vec_is_zero(val):
                    raise ValueError("gauge cochain must be normalized")
            for z, c in val.items():
                if c.is_zero():
                    continue
                w = zeta_q(c)
                if w is None or w <= 0:
                    raise NotNilpotent(
                        "gauge cochain coefficients must sit in the ideal"
                    )
                if model.mode == "Z":
                    want = reduced_sum([model.degrees[x] for x in key])
                    d = c.degree()
                    if d is None or d + model.degrees[z] - 1 != want:
                        raise ValueError(
                            f"cochain entry {key}->{z} is not degree 0"
                        )


def generate_gauge_functor(model: AInftyModel, cochain: dict,
                           cutoff: int | None = None):
    """Formal-diffeomorphism functor from a degree-0 normalized cochain.

    Returns (functor, pushed-forward model).  The pushforward is checked to
    vanish one arity past the cutoff so the finite tables are the whole
    structure at this truncation.
    """
    if model.is_curved():
        raise ValueError("gauge generation expects an uncurved source")
    validate_gauge_cochain(model, cochain)
    cutoff = cutoff or model.arity_cutoff
    f_tables: dict = {1: identity_table(model)}
    for k, tab in cochain.items():
        if k == 1:
            for key, val in tab.items():
                f_tables[1][key] = vadd(f_tables[1].get(key, {}), val)
        else:
            f_tables[k] = {k2: dict(v) for k2, v in tab.items()}
    g_tables = coalgebra_inverse(model, f_tables, cutoff)
    new_m = {}
    for k in range(1, cutoff + 1):
        tab = pushforward_structure(model, f_tables, g_tables, k)
        if tab:
            new_m[k] = tab
    overflow = pushforward_structure(model, f_tables, g_tables, cutoff + 1)
    if overflow:
        raise CutoffExceeded(
            f"pushforward has nonzero arity-{cutoff + 1} component"
        )
    target = AInftyModel(
        spec=model.spec,
        labels=model.labels,
        degrees=dict(model.degrees),
        unit=model.unit,
        m=new_m,
        mode=model.mode,
        n=model.n,
        pairing=None,
        euler=model.euler,
        arity_cutoff=cutoff,
        name=model.name + "~gauge",
    )
    functor = AInftyFunctor(source=model, target=target, f=f_tables,
                            name="gauge")
    return functor, target


def object_inclusion(target: AInftyModel):
    """The one-object functor K -> D hitting the (possibly curved) unit."""
    spec = target.spec
    e = "e"
    m0 = target.m0()
    c = m0.get(target.unit, spec.zero()) if target.unit else spec.zero()
    m = {2: {(e, e): {e: spec.one()}}}
    if not c.is_zero():
        m[0] = {(): {e: c}}
    euler = None
    if target.euler is not None:
        euler = EulerData(field=target.euler.field, shift={e: 0})
    K = AInftyModel(
        spec=spec,
        labels=(e,),
        degrees={e: 0},
        unit=e,
        m=m,
        mode=target.mode,
        n=target.n,
        euler=euler,
        arity_cutoff=target.arity_cutoff,
        name="K",
    )
    f = {1: {(e,): {target.unit: spec.one()}}}
    return AInftyFunctor(source=K, target=target, f=f, name="inclusion"), K


# -- table utilities ---------------------------------------------------------


def derive_tables(v: DerivationSpec, tables: dict) -> dict:
    """Apply a derivation to every coefficient of a table family."""
    out = {}
    for k, tab in tables.items():
        dt = {}
        for key, val in tab.items():
            dv = vderive(v, val)
            if not vec_is_zero(dv):
                dt[key] = dv
        if dt:
            out[k] = dt
    return out


def tables_equal(a: dict, b: dict) -> bool:
    keys = set(a) | set(b)
    for k in keys:
        ta, tb = a.get(k, {}), b.get(k, {})
        for key in set(ta) | set(tb):
            if not vec_eq(ta.get(key, {}), tb.get(key, {})):
                return False
    return True
