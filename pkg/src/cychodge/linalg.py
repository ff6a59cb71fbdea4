"""Incremental exact linear algebra over the rationals.

Vectors are sparse dicts mapping arbitrary hashable slot keys to Fractions.
The solver keeps a row-echelon span with combination tracking, so it can
report dependencies among inserted vectors and express new vectors in terms
of them, all in exact arithmetic.
"""

from __future__ import annotations

from fractions import Fraction


def sadd(a: dict, b: dict, c=1) -> dict:
    """a + c*b on sparse Fraction dicts."""
    out = dict(a)
    for k, v in b.items():
        w = out.get(k, 0) + c * v
        if w:
            out[k] = w
        else:
            out.pop(k, None)
    return out


def sscale(c, a: dict) -> dict:
    return {k: c * v for k, v in a.items()} if c else {}


class LinearSolver:
    """Echelon span of inserted vectors with dependency tracking."""

    def __init__(self):
        self._rows = []  # (pivot, vector, combo)
        self.count = 0

    @property
    def rank(self) -> int:
        return len(self._rows)

    def _reduce(self, vec: dict):
        vec = dict(vec)
        combo: dict = {}
        for pivot, row, rc in self._rows:
            c = vec.get(pivot)
            if c:
                vec = sadd(vec, row, -c)
                combo = sadd(combo, rc, -c)
        return vec, combo

    def insert(self, vec: dict, tag=None):
        """Add a vector to the span.

        Returns None if it was independent, otherwise a dict of tags with
        sum(coeff * vector_tag) = 0, including this vector's own tag.
        """
        if tag is None:
            tag = self.count
        self.count += 1
        red, combo = self._reduce(vec)
        combo = sadd(combo, {tag: Fraction(1)})
        if not red:
            return combo
        pivot = min(red, key=repr)
        inv = Fraction(1) / red[pivot]
        self._rows.append((pivot, sscale(inv, red), sscale(inv, combo)))
        return None

    def contains(self, vec: dict) -> bool:
        red, _ = self._reduce(vec)
        return not red

    def express(self, vec: dict):
        """Write vec as a combination of previously inserted vectors.

        Returns {tag: coeff} with vec = sum(coeff * vector_tag), or None if
        vec lies outside the span.
        """
        red, combo = self._reduce(vec)
        if red:
            return None
        return {t: -c for t, c in combo.items() if c}
