"""Projective points and lines over tower levels, and dense exact linear
algebra over finite fields.

Points and lines carry raw coefficient tuples plus a level reference, the
same value-like convention as `ff`.  A line is stored by two spanning
points together with its normalized Pluecker 6-vector; line equality is
Pluecker-key equality, which is chart-independent.
"""

from __future__ import annotations

import itertools

from . import ff


class GeometryError(Exception):
    pass


def normalize(level, vec):
    """Scale so the first nonzero coordinate is 1; reject the zero vector."""
    pivot = next((c for c in vec if not level.is_zero(c)), None)
    if pivot is None:
        raise GeometryError("zero vector does not define a projective point")
    if pivot == level.one:
        return tuple(vec)
    inv = level.inv(pivot)
    return tuple(level.mul(inv, c) for c in vec)


class ProjPoint:
    """Point of P^n with normalized homogeneous coordinates."""

    __slots__ = ("level", "coords")

    def __init__(self, level, coords):
        self.level = level
        self.coords = normalize(level, coords)

    @classmethod
    def from_ints(cls, level, ints):
        p = level.base.p
        if level.base.k == 1:
            ints = [c % p for c in ints]
        return cls(level, tuple(level.lift_base(c) for c in ints))

    @property
    def dim(self):
        return len(self.coords) - 1

    def __eq__(self, other):
        return (
            isinstance(other, ProjPoint)
            and self.level is other.level
            and self.coords == other.coords
        )

    def __hash__(self):
        return hash((id(self.level), self.coords))

    def frobenius(self):
        L = self.level
        return ProjPoint(L, tuple(L.frob(c) for c in self.coords))

    def degree(self):
        return len(galois_orbit(self))

    def embed(self, target_level):
        tw = self.level.tower
        return ProjPoint(
            target_level, tuple(tw.embed(c, self.level.r, target_level.r) for c in self.coords)
        )

    def __repr__(self):
        return f"ProjPoint({self.coords})"


_PLUECKER_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def plucker(a, b, level):
    """Normalized Pluecker 6-vector of the line through two coordinate
    4-tuples; None if the points coincide projectively."""
    vec = []
    for i, j in _PLUECKER_PAIRS:
        vec.append(level.sub(level.mul(a[i], b[j]), level.mul(a[j], b[i])))
    if all(level.is_zero(c) for c in vec):
        return None
    return normalize(level, vec)


def plucker_relation(vec, level):
    """p01 p23 - p02 p13 + p03 p12, zero exactly on the Grassmannian."""
    t1 = level.mul(vec[0], vec[5])
    t2 = level.mul(vec[1], vec[4])
    t3 = level.mul(vec[2], vec[3])
    return level.add(level.sub(t1, t2), t3)


def lines_meet(key1, key2, level):
    """Incidence of two lines from Pluecker keys: the polarized quadric
    p01 q23 - p02 q13 + p03 q12 + p12 q03 - p13 q02 + p23 q01 vanishes."""
    acc = level.zero
    for (i, j, sign) in ((0, 5, 1), (1, 4, -1), (2, 3, 1), (3, 2, 1), (4, 1, -1), (5, 0, 1)):
        t = level.mul(key1[i], key2[j])
        acc = level.add(acc, t if sign > 0 else level.neg(t))
    return level.is_zero(acc)


class ProjLine:
    """Line in P^3 spanned by two distinct points over one level."""

    __slots__ = ("level", "a", "b", "key")

    def __init__(self, level, a, b):
        self.level = level
        self.a = tuple(a)
        self.b = tuple(b)
        key = plucker(self.a, self.b, level)
        if key is None:
            raise GeometryError("coincident spanning points")
        self.key = key

    @classmethod
    def through(cls, p1: ProjPoint, p2: ProjPoint):
        if p1.level is not p2.level:
            raise GeometryError("spanning points live on different levels")
        return cls(p1.level, p1.coords, p2.coords)

    def __eq__(self, other):
        return (
            isinstance(other, ProjLine)
            and self.level is other.level
            and self.key == other.key
        )

    def __hash__(self):
        return hash((id(self.level), self.key))

    def frobenius(self):
        L = self.level
        return ProjLine(L, tuple(L.frob(c) for c in self.a), tuple(L.frob(c) for c in self.b))

    def degree(self):
        return len(galois_orbit(self))

    def embed(self, target_level):
        tw = self.level.tower
        r1, r2 = self.level.r, target_level.r
        return ProjLine(
            target_level,
            tuple(tw.embed(c, r1, r2) for c in self.a),
            tuple(tw.embed(c, r1, r2) for c in self.b),
        )

    def meets(self, other) -> bool:
        return lines_meet(self.key, other.key, self.level)

    def contains(self, pt: ProjPoint) -> bool:
        rows = [list(self.a), list(self.b), list(pt.coords)]
        return rank(rows, self.level) <= 2

    def points(self):
        """All rational points of the line over its own level."""
        L = self.level
        yield ProjPoint(L, self.a)
        for lam in L.elements():
            coords = tuple(L.add(L.mul(lam, ai), bi) for ai, bi in zip(self.a, self.b))
            yield ProjPoint(L, coords)

    def __repr__(self):
        return f"ProjLine(key={self.key})"


def galois_orbit(obj):
    """Orbit of a point or line under coordinate-wise x -> x^q."""
    orbit = [obj]
    cur = obj.frobenius()
    while cur != obj:
        orbit.append(cur)
        cur = cur.frobenius()
        if len(orbit) > obj.level.r:
            raise GeometryError("Frobenius orbit does not close; tower corrupt")
    return orbit


# ---------------------------------------------------------------------------
# Dense linear algebra over a level (rows = lists of raw element tuples).


def rref(rows, level):
    """Reduced row echelon form; returns (rows, pivot column list)."""
    rows = [list(r) for r in rows]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    rank_ = 0
    for col in range(ncols):
        piv = next((i for i in range(rank_, len(rows)) if not level.is_zero(rows[i][col])), None)
        if piv is None:
            continue
        rows[rank_], rows[piv] = rows[piv], rows[rank_]
        inv = level.inv(rows[rank_][col])
        rows[rank_] = [level.mul(inv, c) for c in rows[rank_]]
        for i in range(len(rows)):
            if i != rank_ and not level.is_zero(rows[i][col]):
                c = rows[i][col]
                rows[i] = [level.sub(x, level.mul(c, y)) for x, y in zip(rows[i], rows[rank_])]
        pivots.append(col)
        rank_ += 1
        if rank_ == len(rows):
            break
    return rows, pivots


def rank(rows, level):
    return len(rref(rows, level)[1])


def kernel(rows, level, ncols=None):
    """Echelon basis of the right null space of the matrix."""
    if not rows:
        if ncols is None:
            raise GeometryError("kernel of an empty matrix needs ncols")
        eye = []
        for i in range(ncols):
            v = [level.zero] * ncols
            v[i] = level.one
            eye.append(v)
        return eye
    ncols = len(rows[0])
    red, pivots = rref(rows, level)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for fc in free:
        v = [level.zero] * ncols
        v[fc] = level.one
        for i, pc in enumerate(pivots):
            v[pc] = level.neg(red[i][fc])
        basis.append(v)
    return basis


def solve(rows, rhs, level):
    """One solution of rows * x = rhs, or None."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, level)
    ncols = len(rows[0])
    for row in red:
        if all(level.is_zero(c) for c in row[:ncols]) and not level.is_zero(row[ncols]):
            return None
    x = [level.zero] * ncols
    for i, pc in enumerate(pivots):
        if pc == ncols:
            return None
        x[pc] = red[i][ncols]
    return x


def det(rows, level):
    """Determinant by Gaussian elimination with exact inverses."""
    n = len(rows)
    m = [list(r) for r in rows]
    result = level.one
    for col in range(n):
        piv = next((i for i in range(col, n) if not level.is_zero(m[i][col])), None)
        if piv is None:
            return level.zero
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            result = level.neg(result)
        result = level.mul(result, m[col][col])
        inv = level.inv(m[col][col])
        for i in range(col + 1, n):
            if not level.is_zero(m[i][col]):
                c = level.mul(m[i][col], inv)
                m[i] = [level.sub(x, level.mul(c, y)) for x, y in zip(m[i], m[col])]
    return result


def enumerate_proj(n, level):
    """All points of P^n over the level, each exactly once, normalized.

    Yields (Q^(n+1) - 1)/(Q - 1) points for Q the level cardinality.
    """
    for lead in range(n + 1):
        prefix = (level.zero,) * lead + (level.one,)
        for tail in itertools.product(level.elements(), repeat=n - lead):
            yield ProjPoint(level, prefix + tail)


def proj_count(n, Q):
    return (Q ** (n + 1) - 1) // (Q - 1)
