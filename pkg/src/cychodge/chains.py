"""Cyclic chains of a finite model and their standard operators.

A word is a tuple of basis labels (head, tail...); the tail is reduced, so
words with the unit in a tail slot are treated as zero.  A chain is a sparse
dict {word: ScalarElement}.  Degrees are |head| + sum of reduced tail
degrees plus the coefficient degree, which makes the Hochschild operator and
u times the rotation operator both degree +1.

Sign conventions are the all-reduced ones: the head contributes its reduced
degree to every prefix sign, and cyclic rotations carry the Koszul sign of
moving the rotated block past the rest of the word.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .ainfty import AInftyFunctor, AInftyModel, vadd, vec_eq, vec_is_zero, vneg
from .errors import Infeasible
from .linalg import LinearSolver
from .scalars import RingSpec, ScalarElement


# -- words -------------------------------------------------------------------


def word_degree(model: AInftyModel, word) -> int:
    return model.degrees[word[0]] + sum(model.degrees[x] - 1 for x in word[1:])


def word_parity(model: AInftyModel, word) -> int:
    return word_degree(model, word) % 2


def normalize_chain(model: AInftyModel, chain: dict) -> dict:
    e = model.unit
    return {w: c for w, c in chain.items()
            if e not in w[1:] and not c.is_zero()}


def chain_parity_parts(model: AInftyModel, chain: dict):
    """Split a chain into its even and odd homogeneous parts."""
    even: dict = {}
    odd: dict = {}
    for w, c in chain.items():
        wp = word_parity(model, w)
        ce, co = c.parity_parts()
        if wp:
            ce, co = co, ce
        if not ce.is_zero():
            even[w] = even.get(w, model.spec.zero()) + ce
        if not co.is_zero():
            odd[w] = odd.get(w, model.spec.zero()) + co
    return even, odd


def chain_degree(model: AInftyModel, chain: dict):
    """Total degree if homogeneous, else None."""
    degs = set()
    for w, c in chain.items():
        if c.is_zero():
            continue
        d = c.degree()
        if d is None:
            return None
        degs.add(word_degree(model, w) + d)
    if len(degs) != 1:
        return None
    return degs.pop()


def _red(model: AInftyModel, label) -> int:
    return model.reduced_parity(label)


def prefix_reduced(model: AInftyModel, word, upto: int) -> int:
    """Parity of |a_0|' + ... + |a_{upto-1}|'."""
    return sum(_red(model, x) for x in word[:upto]) % 2


def rotation_sign(model: AInftyModel, word, i: int) -> int:
    """Koszul parity for rotating (a_i..a_k) to the front of the word."""
    block = sum(_red(model, x) for x in word[i:]) % 2
    rest = prefix_reduced(model, word, i)
    return (block * rest) % 2


def _word_operator(model: AInftyModel, chain: dict, fn, op_parity: int = 1):
    """Extend a word-level operator to chains, Koszul-commuting coefficients."""
    out: dict = {}
    for w, c in chain.items():
        if c.is_zero():
            continue
        ev, od = c.parity_parts()
        for part, par in ((ev, 0), (od, 1)):
            if part.is_zero():
                continue
            img = fn(w)
            if not img:
                continue
            sgn = -1 if (par * op_parity) % 2 else 1
            for w2, c2 in img.items():
                add = sgn * (part * c2)
                if add.is_zero():
                    continue
                cur = out.get(w2)
                cur = add if cur is None else cur + add
                if cur.is_zero():
                    out.pop(w2, None)
                else:
                    out[w2] = cur
    return normalize_chain(model, out)


def _emit(model, out, word, coeff, sign_exp):
    if model.unit in word[1:]:
        return
    if coeff.is_zero():
        return
    if sign_exp % 2:
        coeff = -coeff
    cur = out.get(word)
    cur = coeff if cur is None else cur + coeff
    if cur.is_zero():
        out.pop(word, None)
    else:
        out[word] = cur


def _b_word(model: AInftyModel, word) -> dict:
    """Hochschild operator on a single word."""
    k = len(word) - 1
    out: dict = {}
    head_red = _red(model, word[0])
    # runs inside the tail, including empty runs (curvature insertions)
    for i in range(1, k + 2):
        pre = (head_red + sum(_red(model, x) for x in word[1:i])) % 2
        for j in range(i - 1, k + 1):
            if j == i - 1:
                val = model.m0()
            else:
                val = model.table(j - i + 1).get(tuple(word[i:j + 1]), {})
            if not val:
                continue
            for z, h in val.items():
                hp = h.parity()
                parts = [(h, hp)] if hp is not None else \
                    [(p, n) for p, n in zip(h.parity_parts(), (0, 1))
                     if not p.is_zero()]
                for hval, hpar in parts:
                    new = (word[0],) + word[1:i] + (z,) + word[j + 1:]
                    _emit(model, out, new, hval, pre * (1 + hpar))
    # runs through the head: rotate then apply
    for i in range(1, k + 2):
        rot = rotation_sign(model, word, i)
        rotated = word[i:] + word[:i]
        for j in range(i):  # new tail is word[j+1:i]
            arity = (k + 1 - i) + 1 + j
            val = model.table(arity).get(rotated[:arity], {})
            if not val:
                continue
            for z, h in val.items():
                new = (z,) + word[j + 1:i]
                _emit(model, out, new, h, rot)
    return out


def hochschild_b(model: AInftyModel, chain: dict) -> dict:
    return _word_operator(model, chain, lambda w: _b_word(model, w))


def _B_word(model: AInftyModel, word) -> dict:
    e = model.unit
    out: dict = {}
    k = len(word) - 1
    one = model.spec.one()
    for i in range(k + 1):
        rot = rotation_sign(model, word, i) if i else 0
        new = (e,) + word[i:] + word[:i]
        _emit(model, out, new, one, rot)
    return out


def connes_B(model: AInftyModel, chain: dict) -> dict:
    """Rotation operator; zero on words headed by the unit after reduction."""
    return _word_operator(model, chain, lambda w: _B_word(model, w))


def cyclic_differential(model: AInftyModel, chain: dict) -> dict:
    """b + u B, the degree-+1 differential of the u-completed theory."""
    u = model.spec.u(1)
    b = hochschild_b(model, chain)
    B = connes_B(model, chain)
    return vadd(b, {w: u * c for w, c in B.items()})


# -- functor pushforward -----------------------------------------------------


def _compositions_upto(n: int, parts_at_most):
    """Ordered partitions of n into at most the available block sizes."""
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        if first not in parts_at_most:
            continue
        for rest in _compositions_upto(n - first, parts_at_most):
            yield (first,) + rest


def _functor_word(F: AInftyFunctor, word) -> dict:
    C, D = F.source, F.target
    k = len(word) - 1
    sizes = {s for s, t in F.f.items() if t}
    out: dict = {}
    for i in range(1, k + 2):
        rot = rotation_sign(C, word, i)
        rotated = word[i:] + word[:i]
        head_len_min = (k + 1 - i) + 1
        for j in range(i):
            head_len = head_len_min + j
            head_tab = F.table(head_len)
            if not head_tab:
                continue
            head_val = head_tab.get(rotated[:head_len], {})
            if not head_val:
                continue
            remains = word[j + 1:i]
            for part in _compositions_upto(len(remains), sizes):
                blocks = []
                pos = 0
                dead = False
                for s in part:
                    bl = F.table(s).get(tuple(remains[pos:pos + s]), {})
                    pos += s
                    if not bl:
                        dead = True
                        break
                    blocks.append(bl)
                if dead:
                    continue
                for combo in itertools.product(
                        head_val.items(), *[b.items() for b in blocks]):
                    labels = [z for z, _ in combo]
                    coeffs = [h for _, h in combo]
                    # Koszul: move each coefficient out past earlier labels
                    sign = rot
                    pre = 0
                    coeff = None
                    for z, h in zip(labels, coeffs):
                        hp = h.parity()
                        if hp is None:
                            raise Infeasible(
                                "functor tables must be parity-homogeneous"
                            )
                        sign += hp * pre
                        pre += (D.degrees[z] + 1) % 2
                        coeff = h if coeff is None else coeff * h
                    _emit(D, out, tuple(labels), coeff, sign)
    return out


def functor_push(F: AInftyFunctor, chain: dict) -> dict:
    """Induced map of cyclic complexes (degree 0, parity-even)."""
    for tab in F.f.values():
        for val in tab.values():
            for h in val.values():
                if h.parity() is None:
                    raise Infeasible(
                        "functor tables must have parity-homogeneous entries"
                    )
    return _word_operator(F.source, chain, lambda w: _functor_word(F, w),
                          op_parity=0)


# -- mapping cone ------------------------------------------------------------


@dataclass
class RelChain:
    """Pair (src, tgt): src lives in the shifted source complex."""

    src: dict
    tgt: dict

    def is_zero(self) -> bool:
        return vec_is_zero(self.src) and vec_is_zero(self.tgt)


def rel_zero() -> RelChain:
    return RelChain({}, {})


def rel_add(a: RelChain, b: RelChain) -> RelChain:
    return RelChain(vadd(a.src, b.src), vadd(a.tgt, b.tgt))


def rel_neg(a: RelChain) -> RelChain:
    return RelChain(vneg(a.src), vneg(a.tgt))


def rel_eq(a: RelChain, b: RelChain) -> bool:
    return vec_eq(a.src, b.src) and vec_eq(a.tgt, b.tgt)


def rel_scale(f, a: RelChain) -> RelChain:
    return RelChain({w: f * c for w, c in a.src.items()},
                    {w: f * c for w, c in a.tgt.items()})


def cone_differential(F: AInftyFunctor, rc: RelChain) -> RelChain:
    """d(src, tgt) = (d src, d tgt + (-1)^{|src|} F src)."""
    ds = cyclic_differential(F.source, rc.src)
    dt = cyclic_differential(F.target, rc.tgt)
    ev, od = chain_parity_parts(F.source, rc.src)
    push = vadd(functor_push(F, ev), vneg(functor_push(F, od)))
    return RelChain(ds, vadd(dt, push))


# -- flattening and homology -------------------------------------------------


def enumerate_monomials(spec: RingSpec, max_slots: int = 20000):
    """All scalar monomials inside the truncation window."""
    qs = []
    step = Fraction(1, spec.novikov_denominator)
    q = Fraction(0)
    while q < spec.q_order:
        qs.append(q)
        q += step
    us = list(range(spec.u_order))
    es = list(range(-spec.e_window, spec.e_window + 1))
    t_ranges = []
    for _, d in spec.bulk_vars:
        t_ranges.append([0, 1] if d % 2 else list(range(spec.t_order)))
    out = []
    for q in qs:
        for u in us:
            for e in es:
                for ts in itertools.product(*t_ranges) if t_ranges else [()]:
                    if sum(ts) >= spec.t_order:
                        continue
                    out.append((q, u, e, tuple(ts)))
                    if len(out) > max_slots:
                        raise Infeasible("monomial window too large to span")
    return out


def words_up_to(model: AInftyModel, max_len: int):
    non_unit = [l for l in model.labels if l != model.unit]
    out = []
    for k in range(max_len + 1):
        for head in model.labels:
            for tail in itertools.product(non_unit, repeat=k):
                out.append((head,) + tail)
    return out


def flatten_chain(chain: dict, tag=None) -> dict:
    out = {}
    for w, c in chain.items():
        for mon, coeff in c.terms.items():
            if coeff:
                key = (tag, w, mon) if tag is not None else (w, mon)
                out[key] = out.get(key, Fraction(0)) + coeff
    return {k: v for k, v in out.items() if v}


def slot_chain(model: AInftyModel, word, mon) -> dict:
    q, u, e, ts = mon
    return {word: model.spec.monomial(q=q, u=u, e=e, t=ts)}


@dataclass
class FlatComplex:
    """Finite window of a cyclic complex, flattened over the rationals.

    ``op`` maps chains to chains and must be degree +1.  Degrees of words
    must be strictly decreasing in length (all reduced tail degrees
    negative), otherwise a fixed degree meets infinitely many words and the
    window cannot be complete; that situation raises Infeasible.
    """

    model: AInftyModel
    max_len: int
    op: object = None
    mode: str = "Z"

    def __post_init__(self):
        if self.op is None:
            self.op = lambda ch: cyclic_differential(self.model, ch)
        if self.mode == "Z":
            for x in self.model.labels:
                if x != self.model.unit and self.model.degrees[x] - 1 >= 0:
                    raise Infeasible(
                        "degreewise-finite window needs negative reduced "
                        "tail degrees"
                    )
        self._slots = {}
        mons = enumerate_monomials(self.model.spec)
        for w in words_up_to(self.model, self.max_len):
            wd = word_degree(self.model, w)
            for mon in mons:
                q, u, e, ts = mon
                md = self.model.spec.monomial_degree(mon)
                d = wd + md
                if self.mode == "Z2":
                    d %= 2
                self._slots.setdefault(d, []).append((w, mon))

    def degrees(self):
        return sorted(self._slots)

    def slots(self, d):
        return self._slots.get(d, [])

    def boundaries_into(self, d) -> LinearSolver:
        solver = LinearSolver()
        for w, mon in self.slots(d - 1):
            img = self.op(slot_chain(self.model, w, mon))
            solver.insert(flatten_chain(img))
        return solver

    def cycles(self, d) -> list:
        solver = LinearSolver()
        reps = []
        for w, mon in self.slots(d):
            ch = slot_chain(self.model, w, mon)
            img = self.op(ch)
            rel = solver.insert(flatten_chain(img), tag=(w, mon))
            if rel is not None:
                vec = {}
                for (w2, mon2), c in rel.items():
                    vec = sadd_chain(vec, slot_chain(self.model, w2, mon2), c)
                reps.append(vec)
        return reps

    def homology_rank(self, d) -> int:
        cyc = self.cycles(d)
        bnd = self.boundaries_into(d)
        rank = 0
        for z in cyc:
            if bnd.insert(flatten_chain(z)) is None:
                rank += 1
        return rank


def sadd_chain(a: dict, b: dict, c=1) -> dict:
    out = dict(a)
    for w, v in b.items():
        cur = out.get(w)
        add = c * v
        cur = add if cur is None else cur + add
        if cur.is_zero():
            out.pop(w, None)
        else:
            out[w] = cur
    return out


def solve_primitive(model: AInftyModel, target: dict, max_len: int,
                    op=None):
    """Find x with op(x) = target over the flattened window, or None."""
    if op is None:
        op = lambda ch: cyclic_differential(model, ch)
    d = chain_degree(model, target)
    if d is None:
        raise Infeasible("target must be degree-homogeneous")
    comp = FlatComplex(model, max_len, op=op)
    solver = LinearSolver()
    for w, mon in comp.slots(d - 1):
        img = op(slot_chain(model, w, mon))
        solver.insert(flatten_chain(img), tag=(w, mon))
    combo = solver.express(flatten_chain(target))
    if combo is None:
        return None
    out: dict = {}
    for (w, mon), c in combo.items():
        out = sadd_chain(out, slot_chain(model, w, mon), c)
    return out


def unit_class_primitive(model: AInftyModel, max_len: int):
    """A primitive of the unit head-word under b + uB, if one exists."""
    target = {(model.unit,): model.spec.one()}
    return solve_primitive(model, target, max_len)


# -- long exact sequence of a functor ---------------------------------------


@dataclass
class ConeComplex:
    """Flattened window of the mapping cone of a functor."""

    F: AInftyFunctor
    max_len: int

    def __post_init__(self):
        self.src = FlatComplex(self.F.source, self.max_len)
        self.tgt = FlatComplex(self.F.target, self.max_len)

    def degrees(self):
        # a source chain of degree a sits in cone degree a - 1, so that the
        # pushforward component of the differential is degree +1 overall
        ds = set(self.tgt.degrees())
        ds.update(d - 1 for d in self.src.degrees())
        return sorted(ds)

    def slots(self, d):
        out = [("s", w, mon) for (w, mon) in self.src.slots(d + 1)]
        out += [("t", w, mon) for (w, mon) in self.tgt.slots(d)]
        return out

    def slot_chain(self, slot) -> RelChain:
        tag, w, mon = slot
        ch = slot_chain(self.F.source if tag == "s" else self.F.target,
                        w, mon)
        return RelChain(ch, {}) if tag == "s" else RelChain({}, ch)

    def op(self, rc: RelChain) -> RelChain:
        return cone_differential(self.F, rc)

    def flatten(self, rc: RelChain) -> dict:
        out = flatten_chain(rc.src, tag="s")
        out.update(flatten_chain(rc.tgt, tag="t"))
        return out

    def boundaries_into(self, d) -> LinearSolver:
        solver = LinearSolver()
        for slot in self.slots(d - 1):
            solver.insert(self.flatten(self.op(self.slot_chain(slot))))
        return solver

    def cycles(self, d) -> list:
        solver = LinearSolver()
        reps = []
        for slot in self.slots(d):
            rc = self.slot_chain(slot)
            rel = solver.insert(self.flatten(self.op(rc)), tag=slot)
            if rel is not None:
                acc = rel_zero()
                for slot2, c in rel.items():
                    acc = rel_add(acc, rel_scale(
                        self.F.source.spec.scalar(c), self.slot_chain(slot2)))
                reps.append(acc)
        return reps

    def homology_rank(self, d) -> int:
        bnd = self.boundaries_into(d)
        rank = 0
        for z in self.cycles(d):
            if bnd.insert(self.flatten(z)) is None:
                rank += 1
        return rank


def _induced_rank(images, target_boundaries: LinearSolver) -> int:
    rank = 0
    for img in images:
        if target_boundaries.insert(img) is None:
            rank += 1
    return rank


def exactness_report(F: AInftyFunctor, max_len: int, degrees=None) -> dict:
    """Degreewise ranks and exactness of the cone long exact sequence.

    The sequence reads, with d the cone degree,

        ... -> H^d(tgt) -> H^d(cone) -> H^{d+1}(src) -> H^{d+1}(tgt) -> ...

    where the connecting map is induced by the pushforward.  For each d the
    report lists the three homology ranks, the ranks of the induced
    inclusion/projection/connecting maps, and rank equations equivalent to
    exactness at the three spots visible from degree d (composites of
    consecutive maps vanish identically, so rank equalities are exactness).
    """
    cone = ConeComplex(F, max_len)
    if degrees is None:
        degrees = cone.degrees()
    out = {}
    conn_cache = {}

    def conn_rank(sd):
        # connecting H^{sd}(src) -> H^{sd}(tgt), induced by the pushforward
        if sd not in conn_cache:
            tgt_bnd = cone.tgt.boundaries_into(sd)
            conn_cache[sd] = _induced_rank(
                [flatten_chain(functor_push(F, z))
                 for z in cone.src.cycles(sd)], tgt_bnd)
        return conn_cache[sd]

    for d in degrees:
        h_tgt = cone.tgt.homology_rank(d)
        h_cone = cone.homology_rank(d)
        h_src = cone.src.homology_rank(d + 1)  # appears in cone degree d
        tgt_cycles = cone.tgt.cycles(d)
        cone_bnd = cone.boundaries_into(d)
        incl_rank = _induced_rank(
            [cone.flatten(RelChain({}, z)) for z in tgt_cycles], cone_bnd)
        src_bnd = cone.src.boundaries_into(d + 1)
        proj_rank = _induced_rank(
            [flatten_chain(z.src) for z in cone.cycles(d)], src_bnd)
        out[d] = {
            "h_tgt": h_tgt,
            "h_cone": h_cone,
            "h_src_shifted": h_src,
            "rank_incl": incl_rank,
            "rank_proj": proj_rank,
            "rank_conn_out": conn_rank(d + 1),
            "rank_conn_in": conn_rank(d),
            "exact_at_cone": h_cone == incl_rank + proj_rank,
            "exact_at_tgt": h_tgt == incl_rank + conn_rank(d),
            "exact_at_src": h_src == proj_rank + conn_rank(d + 1),
        }
    return out
