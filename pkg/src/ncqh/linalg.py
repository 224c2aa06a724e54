"""Exact sparse linear algebra over the rationals.

Vectors are dicts ``{row_key: Fraction}``; a system is a list of column
vectors.  Elimination is plain Gaussian elimination with a sparsity-first
pivot choice, which is adequate for the few-thousand-column systems the
structure layer builds.
"""

from __future__ import annotations

from fractions import Fraction


def _axpy(target: dict, coef, src: dict) -> None:
    for k, v in src.items():
        nv = target.get(k, 0) + coef * v
        if nv:
            target[k] = nv
        else:
            target.pop(k, None)


class Echelon:
    """Incrementally reduced set of sparse vectors with combination tracking."""

    def __init__(self):
        self.pivots: dict = {}  # pivot key -> (vector with leading 1 at key, combo)

    def reduce(self, vec: dict, combo: dict | None = None) -> tuple[dict, dict]:
        vec = dict(vec)
        combo = dict(combo or {})
        # pivot vectors are mutually reduced, so one pass suffices
        for k in [k for k in vec if k in self.pivots]:
            c = vec.get(k)
            if c:
                piv = self.pivots[k]
                _axpy(vec, -c, piv[0])
                _axpy(combo, -c, piv[1])
        return vec, combo

    def add(self, vec: dict, label) -> bool:
        """Add a column; returns False if it was dependent."""
        red, combo = self.reduce(vec, {label: Fraction(1)})
        if not red:
            return False
        key = min(red)
        inv = 1 / red[key]
        red = {k: v * inv for k, v in red.items()}
        combo = {k: v * inv for k, v in combo.items()}
        # keep the basis fully reduced with respect to the new pivot
        for pk, (pv, pc) in self.pivots.items():
            c = pv.get(key)
            if c:
                _axpy(pv, -c, red)
                _axpy(pc, -c, combo)
        self.pivots[key] = (red, combo)
        return True

    def rank(self) -> int:
        return len(self.pivots)


def solve(columns: dict, rhs: dict):
    """Find ``x`` with ``sum_j x_j columns[j] = rhs``; returns {label: Fraction} or None."""
    ech = Echelon()
    for label, col in columns.items():
        if col:
            ech.add(col, label)
    red, combo = ech.reduce(rhs, {})
    if red:
        return None
    return {k: -v for k, v in combo.items() if v}


def rank(vectors) -> int:
    ech = Echelon()
    for i, v in enumerate(vectors):
        if v:
            ech.add(v, i)
    return ech.rank()


def matrix_rank(rows) -> int:
    """Rank of a dense matrix given as a list of rows (Fractions or ints)."""
    vecs = [{j: Fraction(x) for j, x in enumerate(r) if x} for r in rows]
    return rank(vecs)
