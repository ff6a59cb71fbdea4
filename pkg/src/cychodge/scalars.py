"""Truncated exact-rational coefficient ring.

The ring has four kinds of variables:

* ``q``   -- a formal area variable with exponents in (1/D) * Z_{>=0},
             truncated adically at ``q_order``;
* ``u``   -- the circle-equivariant variable, degree 2, truncated at
             ``u_order`` (negative exponents are tolerated in intermediate
             results so that operators weighted by 1/u stay total maps);
* ``e``   -- an invertible degree-2 unit with integer Laurent exponents.
             ``e_window`` is a loudness bound: arithmetic never silently
             drops ``e`` powers, it raises if the window is exceeded;
* ``t_i`` -- finitely many graded deformation variables with declared
             integer degrees, truncated adically in total t-degree at
             ``t_order``.  Odd-degree variables square to zero and
             anticommute.

Coefficients are ``fractions.Fraction``; all operations are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import LogObstruction, NotAUnit, SpecMismatch

# A monomial is (q_exp, u_exp, e_exp, t_exps).
Monomial = tuple


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class RingSpec:
    """Shape of the coefficient ring: variables, degrees and truncations."""

    novikov_denominator: int = 1
    q_order: Fraction = Fraction(8)
    u_order: int = 4
    e_window: int = 1000
    t_order: int = 1
    bulk_vars: tuple = ()  # ((name, degree), ...)

    def __post_init__(self):
        if self.novikov_denominator < 1:
            raise ValueError("novikov_denominator must be >= 1")
        object.__setattr__(self, "q_order", _as_fraction(self.q_order))
        if self.q_order <= 0 or self.u_order < 1 or self.t_order < 1:
            raise ValueError("truncation orders must be positive")
        if self.e_window < 0:
            raise ValueError("e_window must be >= 0")
        names = [n for n, _ in self.bulk_vars]
        if len(set(names)) != len(names):
            raise ValueError("duplicate bulk variable names")
        object.__setattr__(
            self, "bulk_vars", tuple((n, int(d)) for n, d in self.bulk_vars)
        )

    # -- variable bookkeeping -------------------------------------------------

    def t_index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.bulk_vars):
            if n == name:
                return i
        raise KeyError(f"unknown bulk variable {name!r}")

    def t_degree(self, name: str) -> int:
        return self.bulk_vars[self.t_index(name)][1]

    def monomial_degree(self, mon: Monomial) -> int:
        """Cohomological degree: q is degree 0, u and e are degree 2."""
        q, u, e, ts = mon
        return 2 * u + 2 * e + sum(k * d for k, (_, d) in zip(ts, self.bulk_vars))

    def monomial_parity(self, mon: Monomial) -> int:
        _, _, _, ts = mon
        return sum(k * d for k, (_, d) in zip(ts, self.bulk_vars)) % 2

    def _check_monomial(self, mon: Monomial):
        q, u, e, ts = mon
        if q < 0 or q * self.novikov_denominator % 1 != 0:
            raise ValueError(f"bad q-exponent {q}")
        if len(ts) != len(self.bulk_vars):
            raise ValueError("t-exponent tuple has wrong length")
        for k, (name, d) in zip(ts, self.bulk_vars):
            if k < 0:
                raise ValueError("negative t-exponent")
            if d % 2 and k > 1:
                raise ValueError(f"odd variable {name} with exponent {k}")
        if abs(e) > self.e_window:
            raise OverflowError(
                f"e-exponent {e} outside window +-{self.e_window}"
            )

    def _keep(self, mon: Monomial) -> bool:
        q, u, _, ts = mon
        if q >= self.q_order:
            return False
        if u >= self.u_order:
            return False
        if sum(ts) >= self.t_order:
            return False
        return True

    # -- element constructors -------------------------------------------------

    def with_t_order(self, t_order: int) -> "RingSpec":
        """Same spec with a different t-adic truncation order.

        Plain d/dt derivations lower t-weight by one, so they are exact as
        maps from the order-N quotient to the order-(N-1) quotient; checks
        involving k such derivatives compare results at order N-k.
        """
        return RingSpec(
            novikov_denominator=self.novikov_denominator,
            q_order=self.q_order,
            u_order=self.u_order,
            e_window=self.e_window,
            t_order=t_order,
            bulk_vars=self.bulk_vars,
        )

    def element(self, terms: Mapping[Monomial, Fraction]) -> "ScalarElement":
        return ScalarElement._make(self, dict(terms))

    def zero(self) -> "ScalarElement":
        return ScalarElement._make(self, {})

    def scalar(self, c) -> "ScalarElement":
        c = _as_fraction(c)
        mon = (Fraction(0), 0, 0, (0,) * len(self.bulk_vars))
        return ScalarElement._make(self, {mon: c})

    def one(self) -> "ScalarElement":
        return self.scalar(1)

    def monomial(self, q=0, u=0, e=0, t=None, coeff=1) -> "ScalarElement":
        ts = [0] * len(self.bulk_vars)
        if isinstance(t, (tuple, list)):
            if len(t) != len(self.bulk_vars):
                raise ValueError("wrong number of bulk exponents")
            ts = [int(k) for k in t]
        else:
            for name, k in (t or {}).items():
                ts[self.t_index(name)] = int(k)
        mon = (_as_fraction(q), int(u), int(e), tuple(ts))
        return ScalarElement._make(self, {mon: _as_fraction(coeff)})

    def q(self, exp=1) -> "ScalarElement":
        return self.monomial(q=exp)

    def u(self, exp=1) -> "ScalarElement":
        return self.monomial(u=exp)

    def e(self, exp=1) -> "ScalarElement":
        return self.monomial(e=exp)

    def t(self, name: str, exp=1) -> "ScalarElement":
        return self.monomial(t={name: exp})

    # -- standard derivations -------------------------------------------------

    def d_dt(self, name: str) -> "DerivationSpec":
        return DerivationSpec(
            self, d_t=((name, Fraction(1)),), parity=self.t_degree(name) % 2
        )

    def euler_t(self, name: str, coeff=1) -> "DerivationSpec":
        return DerivationSpec(self, euler=((name, _as_fraction(coeff)),))

    def e_de(self) -> "DerivationSpec":
        return DerivationSpec(self, euler=(("e", Fraction(1)),))

    def u_du(self) -> "DerivationSpec":
        return DerivationSpec(self, euler=(("u", Fraction(1)),))

    def q_dq(self) -> "DerivationSpec":
        return DerivationSpec(self, euler=(("q", Fraction(1)),))

    def gamma_u(self) -> "DerivationSpec":
        """Sum of t_i d/dt_i over all bulk variables."""
        return DerivationSpec(
            self, euler=tuple((n, Fraction(1)) for n, _ in self.bulk_vars)
        )

    def euler_u(self) -> "DerivationSpec":
        """Sum of (deg t_i / 2) t_i d/dt_i."""
        return DerivationSpec(
            self, euler=tuple((n, Fraction(d, 2)) for n, d in self.bulk_vars)
        )

    def euler_field(self) -> "DerivationSpec":
        """The full Euler vector field e*d/de + sum (deg t_i/2) t_i d/dt_i."""
        return self.e_de() + self.euler_u()


def _mul_monomials(spec: RingSpec, m1: Monomial, m2: Monomial):
    """Product of two monomials; returns (monomial, sign) or None if zero."""
    q1, u1, e1, t1 = m1
    q2, u2, e2, t2 = m2
    sign = 1
    ts = []
    # Koszul sign: each odd generator of m2 moves left past the odd
    # generators of m1 that sit at strictly later variable positions.
    odd_tail = 0  # odd exponents of m1 at positions > current, scanned right to left
    for i in range(len(t1) - 1, -1, -1):
        d = spec.bulk_vars[i][1]
        if d % 2:
            if t2[i]:
                if t1[i]:
                    return None  # odd variable squared
                if odd_tail % 2:
                    sign = -sign
            odd_tail += t1[i]
    for a, b in zip(t1, t2):
        ts.append(a + b)
    return (q1 + q2, u1 + u2, e1 + e2, tuple(ts)), sign


class ScalarElement:
    """Sparse exact element of a :class:`RingSpec` ring.

    Instances are immutable by convention: all operations return new
    elements, nothing mutates ``terms`` after construction.
    """

    __slots__ = ("spec", "terms")

    def __init__(self, spec: RingSpec, terms: dict):
        self.spec = spec
        self.terms = terms

    @classmethod
    def _make(cls, spec: RingSpec, terms: dict) -> "ScalarElement":
        clean = {}
        for mon, c in terms.items():
            c = _as_fraction(c)
            if c == 0:
                continue
            spec._check_monomial(mon)
            if spec._keep(mon):
                clean[mon] = c
        return cls(spec, clean)

    # -- basics ---------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.spec.scalar(other)
        if not isinstance(other, ScalarElement):
            return NotImplemented
        return self.spec == other.spec and self.terms == other.terms

    def __hash__(self):
        return hash((self.spec, frozenset(self.terms.items())))

    def _require_same_spec(self, other: "ScalarElement"):
        if self.spec != other.spec:
            raise SpecMismatch("mixed-spec arithmetic")

    def coefficient(self, mon: Monomial) -> Fraction:
        return self.terms.get(tuple(mon), Fraction(0))

    def constant_term(self) -> Fraction:
        mon = (Fraction(0), 0, 0, (0,) * len(self.spec.bulk_vars))
        return self.terms.get(mon, Fraction(0))

    def min_u_exp(self):
        """Smallest u-exponent present, or None for the zero element."""
        if not self.terms:
            return None
        return min(m[1] for m in self.terms)

    # -- ring operations ------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.spec.scalar(other)
        self._require_same_spec(other)
        terms = dict(self.terms)
        for mon, c in other.terms.items():
            acc = terms.get(mon, Fraction(0)) + c
            if acc:
                terms[mon] = acc
            else:
                terms.pop(mon, None)
        return ScalarElement(self.spec, terms)

    __radd__ = __add__

    def __neg__(self):
        return ScalarElement(self.spec, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.spec.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if c == 0:
                return self.spec.zero()
            return ScalarElement(
                self.spec, {m: c * v for m, v in self.terms.items()}
            )
        self._require_same_spec(other)
        spec = self.spec
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                prod = _mul_monomials(spec, m1, m2)
                if prod is None:
                    continue
                mon, sign = prod
                if not spec._keep(mon):
                    continue
                spec._check_monomial(mon)
                acc = terms.get(mon, Fraction(0)) + sign * c1 * c2
                if acc:
                    terms[mon] = acc
                else:
                    terms.pop(mon, None)
        return ScalarElement(spec, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("use invert() for negative powers")
        out = self.spec.one()
        for _ in range(n):
            out = out * self
        return out

    def u_shift(self, k: int) -> "ScalarElement":
        """Multiply by u^k; ``k`` may be negative (1/u-weighted operators)."""
        terms = {}
        for (q, u, e, ts), c in self.terms.items():
            mon = (q, u + k, e, ts)
            if self.spec._keep(mon):
                terms[mon] = c
        return ScalarElement(self.spec, terms)

    # -- grading --------------------------------------------------------------

    def parity_parts(self):
        """Split into (even part, odd part) with respect to total degree."""
        ev, od = {}, {}
        for mon, c in self.terms.items():
            (od if self.spec.monomial_parity(mon) else ev)[mon] = c
        return ScalarElement(self.spec, ev), ScalarElement(self.spec, od)

    def parity(self):
        """0, 1, or None for a parity-inhomogeneous element."""
        ps = {self.spec.monomial_parity(m) for m in self.terms}
        if not ps:
            return 0
        if len(ps) > 1:
            return None
        return ps.pop()

    def degree(self):
        """Cohomological degree, or None if inhomogeneous / zero."""
        ds = {self.spec.monomial_degree(m) for m in self.terms}
        if len(ds) == 1:
            return ds.pop()
        return None

    # -- truncation -----------------------------------------------------------

    def truncate(self, spec: RingSpec) -> "ScalarElement":
        """Re-truncate to a (smaller) spec over the same variables."""
        if spec.bulk_vars != self.spec.bulk_vars:
            raise SpecMismatch("truncation must preserve the variable list")
        if spec.novikov_denominator % self.spec.novikov_denominator:
            raise SpecMismatch("q-denominator must stay compatible")
        return ScalarElement._make(spec, self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for mon in sorted(self.terms, key=_mon_sort_key):
            q, u, e, ts = mon
            c = self.terms[mon]
            factors = []
            if q:
                factors.append(f"q^{q}")
            if u:
                factors.append(f"u^{u}")
            if e:
                factors.append(f"e^{e}")
            for k, (name, _) in zip(ts, self.spec.bulk_vars):
                if k == 1:
                    factors.append(name)
                elif k:
                    factors.append(f"{name}^{k}")
            body = "*".join(factors)
            if not body:
                bits.append(str(c))
            elif c == 1:
                bits.append(body)
            elif c == -1:
                bits.append(f"-{body}")
            else:
                bits.append(f"{c}*{body}")
        return " + ".join(bits).replace("+ -", "- ")


def _mon_sort_key(mon):
    q, u, e, ts = mon
    return (q, u, e, ts)


@dataclass(frozen=True)
class DerivationSpec:
    """A parity-homogeneous derivation of the scalar ring.

    The derivation is a rational combination of plain derivatives d/dt_i
    and Euler-type terms x d/dx for x one of q, u, e or a bulk variable.
    """

    spec: RingSpec
    d_t: tuple = ()  # ((name, Fraction), ...)
    euler: tuple = ()  # ((key, Fraction), ...) with key in {'q','u','e'} | t-names
    parity: int = 0

    def __post_init__(self):
        for name, _ in self.d_t:
            if self.spec.t_degree(name) % 2 != self.parity % 2:
                raise ValueError(
                    f"d/d{name} has parity {self.spec.t_degree(name) % 2}, "
                    f"declared {self.parity}"
                )
        for key, _ in self.euler:
            if key not in ("q", "u", "e"):
                self.spec.t_index(key)  # raises on unknown name
            if self.parity % 2:
                raise ValueError("Euler terms are even derivations")
        object.__setattr__(self, "parity", self.parity % 2)
        object.__setattr__(
            self, "d_t", tuple((n, _as_fraction(c)) for n, c in self.d_t)
        )
        object.__setattr__(
            self, "euler", tuple((k, _as_fraction(c)) for k, c in self.euler)
        )

    def is_zero(self) -> bool:
        return all(c == 0 for _, c in self.d_t) and all(
            c == 0 for _, c in self.euler
        )

    def __add__(self, other: "DerivationSpec") -> "DerivationSpec":
        if self.spec != other.spec:
            raise SpecMismatch("mixed-spec derivations")
        if not self.is_zero() and not other.is_zero():
            if self.parity != other.parity:
                raise ValueError("cannot add derivations of different parity")
        dt: dict = {}
        for n, c in self.d_t + other.d_t:
            dt[n] = dt.get(n, Fraction(0)) + c
        eu: dict = {}
        for k, c in self.euler + other.euler:
            eu[k] = eu.get(k, Fraction(0)) + c
        parity = other.parity if self.is_zero() else self.parity
        return DerivationSpec(
            self.spec,
            d_t=tuple((n, c) for n, c in dt.items() if c),
            euler=tuple((k, c) for k, c in eu.items() if c),
            parity=parity,
        )

    def __mul__(self, c) -> "DerivationSpec":
        c = _as_fraction(c)
        return DerivationSpec(
            self.spec,
            d_t=tuple((n, c * v) for n, v in self.d_t),
            euler=tuple((k, c * v) for k, v in self.euler),
            parity=self.parity,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * Fraction(-1)

    def apply(self, x: ScalarElement) -> ScalarElement:
        if x.spec != self.spec:
            raise SpecMismatch("derivation and element over different specs")
        spec = self.spec
        out = spec.zero()
        for key, coeff in self.euler:
            terms = {}
            for mon, c in x.terms.items():
                q, u, e, ts = mon
                if key == "q":
                    w = q
                elif key == "u":
                    w = Fraction(u)
                elif key == "e":
                    w = Fraction(e)
                else:
                    w = Fraction(ts[spec.t_index(key)])
                if w:
                    terms[mon] = terms.get(mon, Fraction(0)) + coeff * w * c
            out = out + ScalarElement._make(spec, terms)
        for name, coeff in self.d_t:
            i = spec.t_index(name)
            odd = spec.t_degree(name) % 2
            terms = {}
            for mon, c in x.terms.items():
                q, u, e, ts = mon
                k = ts[i]
                if not k:
                    continue
                sign = 1
                if odd:
                    # the odd derivative moves past earlier odd generators
                    crossings = sum(
                        ts[j]
                        for j in range(i)
                        if spec.bulk_vars[j][1] % 2
                    )
                    if crossings % 2:
                        sign = -1
                new_ts = ts[:i] + (k - 1,) + ts[i + 1 :]
                mon2 = (q, u, e, new_ts)
                val = coeff * k * sign * c
                terms[mon2] = terms.get(mon2, Fraction(0)) + val
            out = out + ScalarElement._make(spec, terms)
        return out

    def __call__(self, x: ScalarElement) -> ScalarElement:
        return self.apply(x)

    def commutator(self, other: "DerivationSpec") -> "DerivationSpec":
        """Graded commutator [self, other]; Euler terms all commute."""
        if self.spec != other.spec:
            raise SpecMismatch("mixed-spec derivations")
        a_eu = dict(self.euler)
        b_eu = dict(other.euler)
        dt: dict = {}
        for n, c in self.d_t:
            dt[n] = dt.get(n, Fraction(0)) + c * b_eu.get(n, Fraction(0))
        for n, c in other.d_t:
            dt[n] = dt.get(n, Fraction(0)) - c * a_eu.get(n, Fraction(0))
        return DerivationSpec(
            self.spec,
            d_t=tuple((n, c) for n, c in dt.items() if c),
            euler=(),
            parity=(self.parity + other.parity) % 2,
        )


# -- module-level operations -------------------------------------------------


def zeta_q(x: ScalarElement):
    """Total (q + t)-valuation; None for the zero element."""
    if x.is_zero():
        return None
    return min(q + sum(ts) for (q, _, _, ts) in x.terms)


def derive(v: DerivationSpec, x: ScalarElement) -> ScalarElement:
    return v.apply(x)


def integrate_qlog(h: ScalarElement) -> ScalarElement:
    """Solve q dg/dq = h for g with zero constant term.

    Raises LogObstruction if h has a monomial with q-exponent 0 (and a
    nonzero coefficient), since those would integrate to log q.  The input
    must not involve u or e.
    """
    for (q, u, e, _), c in h.terms.items():
        if u or e:
            raise ValueError("integrate_qlog input must be u- and e-free")
        if q == 0 and c != 0:
            raise LogObstruction(f"coefficient {c} at q^0 has no primitive")
    terms = {}
    for mon, c in h.terms.items():
        q = mon[0]
        terms[mon] = c / q
    return ScalarElement._make(h.spec, terms)


def invert(x: ScalarElement) -> ScalarElement:
    """Invert an element whose leading term is a nonzero rational constant.

    Every other monomial must have positive (q,u,t)-weight so that the
    geometric series terminates under truncation.  Pure e-power terms are
    not nilpotent and make the element a non-unit here.
    """
    c0 = x.constant_term()
    if c0 == 0:
        raise NotAUnit("no constant leading term")
    spec = x.spec
    rest_terms = dict(x.terms)
    rest_terms.pop((Fraction(0), 0, 0, (0,) * len(spec.bulk_vars)))
    for (q, u, _, ts) in rest_terms:
        if q == 0 and u <= 0 and sum(ts) == 0:
            raise NotAUnit("non-constant term of zero truncation weight")
    rest = ScalarElement(spec, rest_terms)
    # x = c0 (1 + n) with n nilpotent at this truncation.
    n = rest * (Fraction(1) / c0)
    out = spec.zero()
    power = spec.one()
    sign = Fraction(1)
    bound = (
        int(spec.q_order * spec.novikov_denominator)
        + spec.u_order
        + spec.t_order
        + 2
    )
    for _ in range(bound):
        out = out + power * sign
        power = power * n
        sign = -sign
        if power.is_zero():
            break
    else:
        raise NotAUnit("geometric series did not terminate")
    return out * (Fraction(1) / c0)


def exp_nilpotent(x: ScalarElement) -> ScalarElement:
    """exp of an element all of whose terms have positive truncation weight."""
    for (q, u, _, ts) in x.terms:
        if q == 0 and u <= 0 and sum(ts) == 0:
            raise ValueError("exp needs a nilpotent argument at this truncation")
    out = x.spec.one()
    power = x.spec.one()
    k = 0
    while True:
        k += 1
        power = power * x
        if power.is_zero():
            break
        out = out + power * Fraction(1, _factorial(k))
        if k > 200:
            raise ValueError("exp argument is not nilpotent")
    return out


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def exp_euler(v: DerivationSpec, x: ScalarElement, t_name: str) -> ScalarElement:
    """Apply exp(t * v) to x, truncated in the t-adic order of the spec.

    ``v`` must not involve ``t_name``, so successive terms gain one power
    of t each and the series terminates.
    """
    spec = x.spec
    t = spec.t(t_name)
    out = x
    term = x
    k = 0
    while True:
        k += 1
        term = v.apply(term)
        contrib = (t ** k) * term * Fraction(1, _factorial(k))
        if contrib.is_zero():
            break
        out = out + contrib
        if k > spec.t_order + 2:
            break
    return out
