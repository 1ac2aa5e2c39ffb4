"""Cubic surfaces over finite fields: smoothness, point counts over
extensions, the 27 lines, and Frobenius conjugacy class identification.

A surface is a 20-coefficient cubic form over a tower level, normalized
so the first nonzero coefficient is 1.  Monomials are ordered by
`MONOMIALS` (x0^3, x0^2 x1, ..., x3^3); the CLI and all certificates use
this order.

The line finder works chartwise: a line with Pluecker coordinate
p_ij != 0 is the row space of [e_i + a e_k + b e_l, e_j + c e_k + d e_l],
and substituting into the cubic gives four polynomial conditions on
(a, b, c, d) which are solved by resultant elimination (or, over GF(2),
by sweeping (a, b) with numpy tables).  Solutions are closed under
Frobenius and deduplicated by Pluecker key; a smooth surface must end up
with exactly 27 verified lines, which is asserted rather than trusted.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from . import ff, projgeom, weyl, _elim, _tables
from ._elim import MPoly


class CubicError(Exception):
    pass


class InconclusiveSmoothness(CubicError):
    pass


# monomial exponent vectors for degree 3 in x0..x3, in the order
# x0^3, x0^2 x1, x0^2 x2, ..., x3^3
MONOMIALS = []
for combo in itertools.combinations_with_replacement(range(4), 3):
    e = [0, 0, 0, 0]
    for v in combo:
        e[v] += 1
    MONOMIALS.append(tuple(e))
MONOMIALS = tuple(MONOMIALS)

MONOMIAL_INDEX = {e: i for i, e in enumerate(MONOMIALS)}


class CubicSurface:
    """20-coefficient cubic form over a tower level."""

    __slots__ = ("level", "coeffs")

    def __init__(self, level, coeffs):
        coeffs = tuple(coeffs)
        if len(coeffs) != 20:
            raise CubicError("a cubic surface needs 20 coefficients")
        pivot = next((c for c in coeffs if not level.is_zero(c)), None)
        if pivot is None:
            raise CubicError("the zero form is not a surface")
        if pivot != level.one:
            inv = level.inv(pivot)
            coeffs = tuple(level.mul(inv, c) for c in coeffs)
        self.level = level
        self.coeffs = coeffs

    @classmethod
    def from_ints(cls, level, ints):
        if len(ints) != 20:
            raise CubicError("expected 20 coefficients")
        if level.base.k == 1:
            ints = [c % level.base.p for c in ints]
        return cls(level, tuple(level.lift_base(c) for c in ints))

    @property
    def tower(self):
        return self.level.tower

    @property
    def q(self):
        return self.level.cardinality

    def __eq__(self, other):
        return (
            isinstance(other, CubicSurface)
            and self.level is other.level
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((id(self.level), self.coeffs))

    def evaluate(self, point):
        L = self.level
        acc = L.zero
        for c, e in zip(self.coeffs, MONOMIALS):
            if L.is_zero(c):
                continue
            t = c
            for v in range(4):
                for _ in range(e[v]):
                    t = L.mul(t, point[v])
            acc = L.add(acc, t)
        return acc

    def partial_coeffs(self, v):
        """Coefficients of d f / d x_v as {deg-2 exponent tuple: coeff}."""
        L = self.level
        p = L.base.p
        out = {}
        for c, e in zip(self.coeffs, MONOMIALS):
            if e[v] == 0 or L.is_zero(c):
                continue
            m = e[v] % p
            if m == 0:
                continue
            ne = list(e)
            ne[v] -= 1
            ne = tuple(ne)
            prev = out.get(ne, L.zero)
            out[ne] = L.add(prev, L.mul_base(c, m))
        return out

    def as_mpoly(self):
        L = self.level
        return MPoly(L, 4, {e: c for e, c in zip(MONOMIALS, self.coeffs) if not L.is_zero(c)})

    def gradient_mpolys(self):
        L = self.level
        out = []
        for v in range(4):
            out.append(MPoly(L, 4, self.partial_coeffs(v)))
        return out

    def lift(self, target_level):
        tw = self.tower
        return CubicSurface(
            target_level,
            tuple(tw.embed(c, self.level.r, target_level.r) for c in self.coeffs),
        )

    def coordinate_change(self, M):
        """Surface with equation f(M x); M is a 4x4 matrix (rows) over
        the surface's level."""
        L = self.level
        lin = []
        for v in range(4):
            terms = {}
            for u in range(4):
                if not L.is_zero(M[v][u]):
                    e = [0, 0, 0, 0]
                    e[u] = 1
                    terms[tuple(e)] = M[v][u]
            lin.append(MPoly(L, 4, terms))
        total = MPoly.zero(L, 4)
        for c, e in zip(self.coeffs, MONOMIALS):
            if L.is_zero(c):
                continue
            t = MPoly.const(L, 4, c)
            for v in range(4):
                for _ in range(e[v]):
                    t = t * lin[v]
            total = total + t
        out = [total.terms.get(e, L.zero) for e in MONOMIALS]
        return CubicSurface(L, out)

    def int_coeffs(self):
        """Base-field integer codes of the coefficients (level 1 only)."""
        if self.level.r != 1:
            raise CubicError("integer coefficients only at the base level")
        return [c[0] for c in self.coeffs]

    def __repr__(self):
        return f"CubicSurface(q={self.q}, coeffs={self.coeffs})"


# ---------------------------------------------------------------------------
# Smoothness.


class SmoothnessEvidence:
    __slots__ = ("smooth", "strategy", "witness", "seeds")

    def __init__(self, smooth, strategy, witness=None, seeds=()):
        self.smooth = smooth
        self.strategy = strategy
        self.witness = witness  # (level, coords) of a singular point, if any
        self.seeds = tuple(seeds)

    def __bool__(self):
        return self.smooth

    def to_json(self):
        out = {"smooth": self.smooth, "strategy": self.strategy, "seeds": list(self.seeds)}
        if self.witness is not None:
            lvl, pt = self.witness
            out["witness"] = {"rel_degree": lvl.r, "coords": [list(c) for c in pt]}
        return out


def _independent_off_points(X, rng, tries=4000):
    """Four linearly independent points where the form does not vanish,
    as the rows of an invertible matrix; None if the level is too small."""
    L = X.level
    found = []
    if L.cardinality**3 < 20000:
        pool = [pt.coords for pt in projgeom.enumerate_proj(3, L)]
        rng.shuffle(pool)
    else:
        pool = None

    def candidates():
        if pool is not None:
            yield from pool
        else:
            for _ in range(tries):
                yield tuple(L.rand(rng) for _ in range(4))

    for coords in candidates():
        if L.is_zero(X.evaluate(coords)):
            continue
        if projgeom.rank(found + [list(coords)], L) == len(found) + 1:
            found.append(list(coords))
            if len(found) == 4:
                return [list(r) for r in found]
    return None


def _chart_singular_system(X, chart_var):
    """System {f, partials} restricted to the affine chart x_chart = 1."""
    L = X.level
    polys = [X.as_mpoly()] + X.gradient_mpolys()
    out = []
    for p in polys:
        if p.is_zero():
            continue
        q = p.substitute(chart_var, L.one)
        out.append(q)
    return out


def _verify_singular(X, lvl, chart_var, pt3):
    """Check that a chart point is a genuine singular point; returns the
    full projective coordinate tuple or None."""
    coords = list(pt3)
    coords.insert(chart_var, lvl.one)
    Xl = X.lift(lvl)
    if not lvl.is_zero(Xl.evaluate(coords)):
        return None
    for v in range(4):
        acc = lvl.zero
        for e, c in Xl.partial_coeffs(v).items():
            t = c
            for u in range(4):
                for _ in range(e[u]):
                    t = lvl.mul(t, coords[u])
            acc = lvl.add(acc, t)
        if not lvl.is_zero(acc):
            return None
    return tuple(coords)


def is_smooth(X: CubicSurface, seed=0) -> SmoothnessEvidence:
    """Decide smoothness of the projective surface f = 0.

    Chartwise resultant elimination over the algebraic closure is the
    primary strategy; each candidate point is verified by substitution.
    Degenerate eliminations retry under seeded coordinate changes, then
    fall back to a bounded direct search; if everything fails the answer
    is an explicit exception, never a silent default.
    """
    seeds_used = []
    work = X
    for rebase in (1, 2):
        if rebase == 2:
            lvl2 = X.tower.ensure_level(X.level.r * 2)
            work = X.lift(lvl2)
        rng = random.Random((seed, "smooth", rebase))
        for attempt in range(4):
            seeds_used.append((rebase, attempt))
            rows = _independent_off_points(work, rng)
            if rows is None:
                break
            Mc = _transpose(rows)  # columns are off-points: all x_v^3 coeffs nonzero
            Xc = work.coordinate_change(Mc)
            if any(work.level.is_zero(Xc.coeffs[MONOMIAL_INDEX[_cube(v)]]) for v in range(4)):
                continue
            verdict = _smooth_by_elimination(work, Xc, Mc, seed=(seed, rebase, attempt))
            if verdict is not None:
                verdict.seeds = tuple(seeds_used)
                return verdict
    verdict = _smooth_by_search(X, max_degree=6)
    if verdict is not None:
        return verdict
    raise InconclusiveSmoothness("all smoothness strategies failed")


def _cube(v):
    e = [0, 0, 0, 0]
    e[v] = 3
    return tuple(e)


def _transpose(M):
    return [list(r) for r in zip(*M)]


def _dotrow(L, u, v):
    acc = L.zero
    for a, b in zip(u, v):
        acc = L.add(acc, L.mul(a, b))
    return acc


def _random_invertible(L, rng, tries=50):
    for _ in range(tries):
        M = [[L.rand(rng) for _ in range(4)] for _ in range(4)]
        if not L.is_zero(projgeom.det(M, L)):
            return M
    return None


def _smooth_by_elimination(X_work, Xc, change, seed):
    """Run the chart eliminations on the changed surface.  Returns the
    evidence, or None when a chart degenerates (caller retries)."""
    L = Xc.level
    for chart_var in range(4):
        polys = _chart_singular_system(Xc, chart_var)
        try:
            res = _elim.solve_system(polys, max_abs_degree=12 * L.r, seed=hash(seed) & 0xFFFF)
        except _elim.DegenerateSystem:
            probe = _probe_chart(Xc, chart_var, polys, seed)
            if probe is not None:
                lvl, pt = probe
                orig_pt = _map_back(Xc, change, lvl, pt)
                return SmoothnessEvidence(False, "elimination+probe", witness=orig_pt)
            return None
        for lvl, pt3 in res.solutions:
            full = _verify_singular(Xc, lvl, chart_var, pt3)
            if full is not None:
                orig_pt = _map_back(Xc, change, lvl, full)
                return SmoothnessEvidence(False, "elimination", witness=orig_pt)
    return SmoothnessEvidence(True, "elimination")


def _map_back(Xc, change, lvl, pt):
    """Translate a point of the changed surface into original
    coordinates: p maps to change . p."""
    L = Xc.level
    Mlift = [[lvl.tower.embed(c, L.r, lvl.r) for c in row] for row in change]
    orig = tuple(_dotrow(lvl, row, pt) for row in Mlift)
    return (lvl, projgeom.normalize(lvl, orig))


def _probe_chart(Xc, chart_var, polys, seed):
    """On a degenerate elimination, pin the first variable at a few
    values and look for singular points directly."""
    L = Xc.level
    rng = random.Random((hash(seed) & 0xFFFF, "probe"))
    values = list(itertools.islice(L.elements(), 6))
    for _ in range(4):
        values.append(L.rand(rng))
    for val in values:
        sub = [p.substitute(0, val) for p in polys]
        sub = [p for p in sub if not p.is_zero()]
        if not sub:
            full = _verify_singular(Xc, L, chart_var, (val, L.zero, L.zero))
            if full is not None:
                return (L, full)
            continue
        try:
            res = _elim.solve_system(sub, max_abs_degree=12 * L.r, seed=1)
        except _elim.DegenerateSystem:
            continue
        for lvl, pt2 in res.solutions:
            val_l = L.tower.embed(val, L.r, lvl.r)
            full = _verify_singular(Xc, lvl, chart_var, (val_l,) + tuple(pt2))
            if full is not None:
                return (lvl, full)
    return None


def _smooth_by_search(X, max_degree=6):
    """Bounded direct search for singular closed points of degree <= cap.

    Only run when the enumeration fits a small budget; returns None when
    the budget is exceeded (the caller then reports inconclusive).
    """
    L = X.level
    budget = 3 * 10**6
    for d in range(1, max_degree + 1):
        if projgeom.proj_count(3, L.cardinality**d) > budget:
            if d == 1:
                return None
            break
        lvl = X.tower.ensure_level(L.r * d)
        Xl = X.lift(lvl)
        grads = [Xl.partial_coeffs(v) for v in range(4)]
        for pt in projgeom.enumerate_proj(3, lvl):
            coords = pt.coords
            if not lvl.is_zero(Xl.evaluate(coords)):
                continue
            singular = True
            for g in grads:
                acc = lvl.zero
                for e, c in g.items():
                    t = c
                    for u in range(4):
                        for _ in range(e[u]):
                            t = lvl.mul(t, coords[u])
                    acc = lvl.add(acc, t)
                if not lvl.is_zero(acc):
                    singular = False
                    break
            if singular:
                return SmoothnessEvidence(False, f"search(d<={max_degree})", witness=(lvl, coords))
    return SmoothnessEvidence(True, f"search(d<={max_degree})")


# ---------------------------------------------------------------------------
# Point counting.


def count_points(X: CubicSurface, n: int) -> int:
    """#X(F_(q^n)), counted fiberwise over P^2.

    P^3 minus (1:0:0:0) fibers into affine lines over P^2; the fiber
    count is the number of roots in x0 of the restricted cubic, with an
    identically-zero restriction contributing a full q^n.
    """
    if n < 1:
        raise CubicError("n must be >= 1")
    if X.level.r != 1:
        raise CubicError("point counts are taken over the tower base")
    tower = X.tower
    lvl = tower.ensure_level(n)
    Q = lvl.cardinality
    if Q <= _tables.TABLE_CARD_LIMIT:
        return _count_points_table(X, lvl)
    if Q * Q > 3 * 10**7:
        raise CubicError(f"point count over GF(q^{n}) exceeds the budget")
    return _count_points_python(X, lvl)


def _fiber_coeff_polys(X):
    """Group the cubic by x0-degree: four ternary forms in (x1,x2,x3)."""
    by_deg = {0: {}, 1: {}, 2: {}, 3: {}}
    for c, e in zip(X.coeffs, MONOMIALS):
        if X.level.is_zero(c):
            continue
        by_deg[e[0]][e[1:]] = c
    return by_deg


def _count_points_table(X, lvl):
    t = _tables.get_tables(lvl)
    MUL, ADD = t.MUL, t.ADD
    Q = t.Q
    Xl = X.lift(lvl)
    by_deg = _fiber_coeff_polys(Xl)
    Px, Py, Pz = _tables.proj_plane_arrays(t)
    npts = Px.shape[0]

    def eval_ternary(terms):
        acc = np.zeros(npts, dtype=np.int64)
        first = True
        for e, c in terms.items():
            ci = t.idx(c)
            val = np.full(npts, ci, dtype=np.int64)
            for arr, k in ((Px, e[0]), (Py, e[1]), (Pz, e[2])):
                for _ in range(k):
                    val = MUL[val, arr].astype(np.int64)
            if first:
                acc = val
                first = False
            else:
                acc = ADD[acc, val].astype(np.int64)
        return acc

    # c_d = coefficient of x0^d, a ternary form of degree 3-d
    c3 = eval_ternary(by_deg[3])
    c2 = eval_ternary(by_deg[2])
    c1 = eval_ternary(by_deg[1])
    c0 = eval_ternary(by_deg[0])
    total = 0
    for v in range(Q):
        val = c3
        for coefarr in (c2, c1, c0):
            val = ADD[MUL[val, v], coefarr].astype(np.int64)
        total += int((val == 0).sum())
    # the special point (1:0:0:0)
    e0 = (lvl.one, lvl.zero, lvl.zero, lvl.zero)
    if lvl.is_zero(Xl.evaluate(e0)):
        total += 1
    return total


def _count_points_python(X, lvl):
    Xl = X.lift(lvl)
    by_deg = _fiber_coeff_polys(Xl)
    total = 0
    for pt in projgeom.enumerate_proj(2, lvl):
        x1, x2, x3 = pt.coords
        coeffs = []
        for d in range(4):
            acc = lvl.zero
            for e, c in by_deg[d].items():
                term = c
                for val, k in ((x1, e[0]), (x2, e[1]), (x3, e[2])):
                    for _ in range(k):
                        term = lvl.mul(term, val)
                acc = lvl.add(acc, term)
            coeffs.append(acc)
        g = ff.UniPoly(lvl, coeffs)
        if g.is_zero():
            total += lvl.cardinality
        else:
            total += ff.count_roots(g)
    e0 = (lvl.one, lvl.zero, lvl.zero, lvl.zero)
    if lvl.is_zero(Xl.evaluate(e0)):
        total += 1
    return total


def count_points_brute(X: CubicSurface, n: int, budget=4 * 10**6) -> int:
    """Independent oracle: enumerate P^3(F_(q^n)) and evaluate."""
    tower = X.tower
    lvl = tower.ensure_level(n)
    if projgeom.proj_count(3, lvl.cardinality) > budget:
        raise CubicError("brute-force enumeration exceeds the budget")
    Xl = X.lift(lvl)
    count = 0
    for pt in projgeom.enumerate_proj(3, lvl):
        if lvl.is_zero(Xl.evaluate(pt.coords)):
            count += 1
    return count


def trace_vector(X: CubicSurface, N: int):
    """(t_1..t_N) with #X(F_(q^n)) = q^(2n) + t_n q^n + 1; each t_n must
    be an integer of absolute value <= 7."""
    if N > 12:
        raise CubicError("trace vector length is capped at 12")
    q = X.q
    out = []
    for n in range(1, N + 1):
        cnt = count_points(X, n)
        num = cnt - q ** (2 * n) - 1
        if num % (q**n):
            raise CubicError(f"non-integral trace at n={n}; surface singular or count bug")
        t = num // (q**n)
        if abs(t) > 7:
            raise CubicError(f"|t_{n}| = {abs(t)} > 7; surface singular or count bug")
        out.append(t)
    return tuple(out)


# ---------------------------------------------------------------------------
# The 27 lines.


CHARTS = tuple(itertools.combinations(range(4), 2))


class LineOnSurface:
    """A line on the surface, stored over its minimal field of definition."""

    __slots__ = ("level", "degree", "a", "b", "key", "chart")

    def __init__(self, level, a, b, chart=None):
        self.level = level
        self.a = tuple(a)
        self.b = tuple(b)
        key = projgeom.plucker(self.a, self.b, level)
        if key is None:
            raise CubicError("degenerate line")
        self.key = key
        self.chart = chart
        self.degree = None  # set after orbit closure

    def to_json(self):
        return {
            "rel_degree": self.level.r,
            "degree": self.degree,
            "chart": self.chart,
            "point_a": [list(c) for c in self.a],
            "point_b": [list(c) for c in self.b],
            "plucker": [list(c) for c in self.key],
        }


def _chart_frames(L, chart):
    i, j = chart
    rest = [v for v in range(4) if v not in chart]
    k, l = rest
    return i, j, k, l


def _restrict_to_line(Xl, lvl, A, B):
    """Coefficients (s^3, s^2 t, s t^2, t^3) of f(s A + t B)."""
    g = [lvl.zero] * 4
    for c, e in zip(Xl.coeffs, MONOMIALS):
        if lvl.is_zero(c):
            continue
        vars_ = []
        for v in range(4):
            vars_.extend([v] * e[v])
        # product over the three coordinate slots of (s A_v + t B_v)
        acc = {0: c}  # t-degree -> coefficient
        for v in vars_:
            nxt = {}
            for td, cc in acc.items():
                if not lvl.is_zero(A[v]):
                    val = lvl.mul(cc, A[v])
                    nxt[td] = lvl.add(nxt.get(td, lvl.zero), val)
                if not lvl.is_zero(B[v]):
                    val = lvl.mul(cc, B[v])
                    nxt[td + 1] = lvl.add(nxt.get(td + 1, lvl.zero), val)
            acc = nxt
        for td, cc in acc.items():
            g[td] = lvl.add(g[td], cc)
    return g


def _line_on_surface(X, lvl, A, B):
    Xl = X.lift(lvl)
    g = _restrict_to_line(Xl, lvl, A, B)
    return all(lvl.is_zero(c) for c in g)


def _chart_line_system(X, chart):
    """The four MPoly conditions in (a, b, d, c) for chart (i, j).

    Variable order puts c last and d second-to-last, which is the order
    the eliminator consumes; a is the final univariate variable.
    """
    L = X.level
    i, j, k, l = _chart_frames(L, chart)
    VA, VB = {}, {}
    # var indices: a=0, b=1, d=2, c=3
    one = MPoly.const(L, 4, L.one)
    zero = MPoly.zero(L, 4)
    va = MPoly.var(L, 4, 0)
    vb = MPoly.var(L, 4, 1)
    vd = MPoly.var(L, 4, 2)
    vc = MPoly.var(L, 4, 3)
    A = {i: one, j: zero, k: va, l: vb}
    B = {i: zero, j: one, k: vc, l: vd}
    g = [MPoly.zero(L, 4) for _ in range(4)]
    for coeff, e in zip(X.coeffs, MONOMIALS):
        if L.is_zero(coeff):
            continue
        vars_ = []
        for v in range(4):
            vars_.extend([v] * e[v])
        acc = {0: MPoly.const(L, 4, coeff)}
        for v in vars_:
            nxt = {}
            for td, poly in acc.items():
                if not A[v].is_zero():
                    p = poly * A[v]
                    nxt[td] = nxt.get(td, MPoly.zero(L, 4)) + p
                if not B[v].is_zero():
                    p = poly * B[v]
                    nxt[td + 1] = nxt.get(td + 1, MPoly.zero(L, 4)) + p
            acc = nxt
        for td, poly in acc.items():
            g[td] = g[td] + poly
    return g


def _lines_from_chart_elimination(X, chart, seed, max_degree):
    """Solve the chart system by elimination; one line per Galois orbit."""
    g = _chart_line_system(X, chart)
    res = _elim.solve_system([p for p in g if not p.is_zero()], max_abs_degree=max_degree, seed=seed)
    if not res.finite:
        raise CubicError("infinitely many lines in a chart; surface is singular")
    L = X.level
    i, j, k, l = _chart_frames(L, chart)
    out = []
    for lvl, (a, b, d, c) in res.solutions:
        A = [lvl.zero] * 4
        B = [lvl.zero] * 4
        A[i] = lvl.one
        A[k] = a
        A[l] = b
        B[j] = lvl.one
        B[k] = c
        B[l] = d
        if _line_on_surface(X, lvl, A, B):
            out.append(LineOnSurface(lvl, A, B, chart=chart))
    return out


def _solve_cd_pointwise(lvl, g1, g2, g3):
    """Solutions (c, d) in the level itself of the specialized chart
    system; g1 is linear in (c, d) by construction.

    Variables here are MPoly slots 1 = d, 0 = c after two substitutions
    collapsed (a, b); the inputs are 2-variable MPolys in (d, c) order
    (slot 0 = d, slot 1 = c).
    """
    L = lvl
    alpha = g1.terms.get((0, 1), L.zero)  # coeff of c
    beta = g1.terms.get((1, 0), L.zero)  # coeff of d
    gamma = g1.terms.get((0, 0), L.zero)
    out = []

    def poly_in_d_after_c(expr_c):
        # substitute c = expr_c (UniPoly in d) into g2, g3
        res = []
        for g in (g2, g3):
            acc = ff.UniPoly.zero(L)
            for (ed, ec), coeff in g.terms.items():
                term = ff.UniPoly.constant(L, coeff).shift(ed)
                for _ in range(ec):
                    term = term * expr_c
                acc = acc + term
            res.append(acc)
        return res

    if not L.is_zero(alpha):
        inv = L.inv(alpha)
        # c = -(beta d + gamma)/alpha
        expr = ff.UniPoly(L, (L.neg(L.mul(gamma, inv)), L.neg(L.mul(beta, inv))))
        u2, u3 = poly_in_d_after_c(expr)
        g = u2.gcd(u3) if not (u2.is_zero() or u3.is_zero()) else (u3 if u2.is_zero() else u2)
        if g.is_zero():
            raise CubicError("one-dimensional line family; surface is singular")
        for d0 in g.roots():
            c0 = expr.evaluate(d0)
            out.append((c0, d0))
        return out
    if not L.is_zero(beta):
        d0 = L.neg(L.mul(gamma, L.inv(beta)))
        u = []
        for g in (g2, g3):
            acc = {}
            for (ed, ec), coeff in g.terms.items():
                t = L.mul(coeff, L.pow(d0, ed)) if ed else coeff
                acc[ec] = L.add(acc.get(ec, L.zero), t)
            deg = max(acc) if acc else 0
            u.append(ff.UniPoly(L, [acc.get(i2, L.zero) for i2 in range(deg + 1)]))
        u2, u3 = u
        g = u2.gcd(u3) if not (u2.is_zero() or u3.is_zero()) else (u3 if u2.is_zero() else u2)
        if g.is_zero():
            raise CubicError("one-dimensional line family; surface is singular")
        for c0 in g.roots():
            out.append((c0, d0))
        return out
    if not L.is_zero(gamma):
        return []
    # g1 vanished identically: fall back to the generic solver
    res = _elim.solve_system([p for p in (g2, g3) if not p.is_zero()], max_abs_degree=lvl.r, seed=3)
    for slvl, (d0, c0) in res.solutions:
        if slvl.r == lvl.r:
            out.append((c0, d0))
    return out


def _lines_from_chart_sweep(X, chart, degrees):
    """GF(2) path: sweep (a, b) over each needed level with numpy tables,
    then solve the residual linear-in-(c,d) system pointwise.

    The sweep at level d finds every line whose chart coordinates lie in
    GF(2^d); sweeping all needed degrees therefore finds every line
    visible in the chart."""
    L = X.level
    if L.cardinality != 2:
        raise CubicError("the sweep solver is a GF(2) path")
    tower = X.tower
    g = _chart_line_system(X, chart)
    g0 = g[0]  # depends only on (a, b)
    if g0.is_zero():
        raise CubicError("a coordinate divides the form; surface is singular")
    i, j, k, l = _chart_frames(L, chart)
    found = []
    for d in sorted(set(degrees)):
        lvl = tower.ensure_level(d)
        t = _tables.get_tables(lvl)
        Q = t.Q
        aa, bb = np.meshgrid(np.arange(Q), np.arange(Q), indexing="ij")
        aa = aa.ravel()
        bb = bb.ravel()
        acc = None
        for e, cc in g0.lift(lvl).terms.items():
            val = np.full(Q * Q, t.idx(cc), dtype=np.int64)
            for _ in range(e[0]):
                val = t.MUL[val, aa].astype(np.int64)
            for _ in range(e[1]):
                val = t.MUL[val, bb].astype(np.int64)
            acc = val if acc is None else t.ADD[acc, val].astype(np.int64)
        roots = np.nonzero(acc == 0)[0]
        elems = t.elements
        g123 = [p.lift(lvl) for p in g[1:]]
        for rr in roots:
            aval = elems[int(aa[rr])]
            bval = elems[int(bb[rr])]
            s1, s2, s3 = (p.substitute(0, aval).substitute(0, bval) for p in g123)
            for c0, d0 in _solve_cd_pointwise(lvl, s1, s2, s3):
                A = [lvl.zero] * 4
                B = [lvl.zero] * 4
                A[i] = lvl.one
                A[k] = aval
                A[l] = bval
                B[j] = lvl.one
                B[k] = c0
                B[l] = d0
                if _line_on_surface(X, lvl, A, B):
                    found.append(LineOnSurface(lvl, A, B, chart=chart))
    return found


def _minimal_field_line(line, tower):
    """Compress a line to its true field of definition."""
    lvl = line.level
    # degree = orbit length of the Pluecker key under Frobenius
    key = line.key
    d = 1
    cur = tuple(lvl.frob(c) for c in key)
    while cur != key:
        cur = tuple(lvl.frob(c) for c in cur)
        d += 1
    if d == lvl.r:
        return line
    small = tower.ensure_level(d)
    # find two spanning points over the small field: x F-invariant points
    # of the line exist since the line itself is F^d-stable
    a, b = _descend_line(line, small)
    out = LineOnSurface(small, a, b, chart=line.chart)
    return out


def _descend_line(line, small):
    """Spanning points over the minimal field of a line whose normalized
    Pluecker key is fixed by Frobenius^small.r.

    The antisymmetric matrix P with P[i][j] = p_ij (i < j) equals
    A B^T - B A^T up to scale, so its nonzero columns span the line; the
    key entries descend to the small field, hence so do the columns.
    """
    lvl = line.level
    tower = lvl.tower
    key_small = [tower.section(c, lvl.r, small.r) for c in line.key]
    if any(c is None for c in key_small):
        raise CubicError("Pluecker key does not descend; orbit bookkeeping bug")
    P = [[small.zero] * 4 for _ in range(4)]
    for (i, j), c in zip(projgeom._PLUECKER_PAIRS, key_small):
        P[i][j] = c
        P[j][i] = small.neg(c)
    cols = [[P[i][j] for i in range(4)] for j in range(4)]
    span = []
    for col in cols:
        if all(small.is_zero(c) for c in col):
            continue
        if projgeom.rank(span + [col], small) == len(span) + 1:
            span.append(col)
        if len(span) == 2:
            break
    if len(span) != 2:
        raise CubicError("descended line is not a line")
    return tuple(span[0]), tuple(span[1])


def find_lines(X: CubicSurface, seed=0, expected_degrees=None, assume_smooth=False):
    """The 27 lines of a smooth cubic surface.

    Returns (lines, cycle_type) where lines live over their minimal
    fields and cycle_type is the multiset of their degrees.  Fails loudly
    unless exactly 27 distinct verified lines emerge.
    """
    if X.level.r != 1:
        raise CubicError("find_lines expects a surface over the tower base")
    tower = X.tower
    L = X.level
    max_degree = 12 if expected_degrees is None else max(expected_degrees)
    rng = random.Random((seed, "lines"))
    attempts = []
    last_error = None
    for attempt in range(8):
        if attempt == 0:
            Xw, change = X, None
        else:
            rows = _independent_off_points(X, rng)
            change = _transpose(rows) if rows is not None else _random_invertible(L, rng)
            if change is None:
                continue
            Xw = X.coordinate_change(change)
        try:
            raw = []
            if L.cardinality == 2:
                degs = expected_degrees if attempt == 0 else None
                if degs is None and attempt == 0:
                    degs = _predicted_degrees(X)
                if degs is None:
                    degs = range(1, 13)
                for chart in CHARTS:
                    raw.extend(_lines_from_chart_sweep(Xw, chart, degs))
            else:
                for chart in CHARTS:
                    raw.extend(
                        _lines_from_chart_elimination(
                            Xw, chart, seed=(seed * 131 + attempt), max_degree=max_degree
                        )
                    )
            lines = _close_and_dedupe(Xw, raw, max_degree)
        except (CubicError, _elim.EliminationError) as exc:
            last_error = exc
            attempts.append(attempt)
            continue
        if len(lines) == 27:
            if change is not None:
                lines = [_change_line_back(X, change, ln) for ln in lines]
                lines = _close_and_dedupe(X, lines, max_degree)
                if len(lines) != 27:
                    attempts.append(attempt)
                    continue
            ct = _cycle_type_of_lines(lines)
            _assert_line_geometry(X, lines)
            return lines, ct
        attempts.append(attempt)
        last_error = CubicError(f"found {len(lines)} lines instead of 27")
    raise CubicError(
        f"line solver failed after {len(attempts)} attempts: {last_error}"
    )


def _cycle_type_of_lines(lines):
    """Orbit-size partition of 27: each degree-d orbit is one part d."""
    counts = {}
    for ln in lines:
        counts[ln.degree] = counts.get(ln.degree, 0) + 1
    parts = []
    for d, c in counts.items():
        if c % d:
            raise CubicError("line degrees do not group into Frobenius orbits")
        parts.extend([d] * (c // d))
    return tuple(sorted(parts, reverse=True))


def _predicted_degrees(X):
    """Guess the line degrees from the trace prefix.

    Only a search hint: the sweep levels it selects are verified by the
    27-count and the recomputed orbit degrees, and a wrong guess falls
    back to the blind sweep."""
    try:
        prefix = trace_vector(X, 4)
        table = weyl.get_table(6)
        cands = table.by_trace_prefix(prefix)
        if len(cands) == 1:
            return set(cands[0].cycle_type)
    except (CubicError, weyl.WeylError):
        pass
    return None


def _change_line_back(X, change, line):
    lvl = line.level
    Mlift = [[lvl.tower.embed(c, X.level.r, lvl.r) for c in row] for row in change]
    a = tuple(_dotrow(lvl, row, line.a) for row in Mlift)
    b = tuple(_dotrow(lvl, row, line.b) for row in Mlift)
    return LineOnSurface(lvl, a, b, chart=line.chart)


def _close_and_dedupe(X, raw_lines, max_degree):
    """Embed everything in one level, close under Frobenius, dedupe by
    Pluecker key, verify incidence with the surface, set degrees."""
    if not raw_lines:
        return []
    tower = X.tower
    degrees = set()
    compressed = []
    for ln in raw_lines:
        lnm = _minimal_field_line(ln, tower)
        degrees.add(lnm.level.r)
        compressed.append(lnm)
    N = 1
    for d in degrees:
        N = N * d // _gcd(N, d)
    if N > max_degree * 3:
        raise CubicError(f"inconsistent line degrees (lcm {N})")
    big = tower.ensure_level(N)
    seen = {}
    queue = []
    for ln in compressed:
        lnb = LineOnSurface(big, *_embed_pair(tower, ln, big), chart=ln.chart)
        queue.append(lnb)
    while queue:
        ln = queue.pop()
        if ln.key in seen:
            continue
        if not _line_on_surface(X, big, list(ln.a), list(ln.b)):
            raise CubicError("candidate line does not lie on the surface")
        seen[ln.key] = ln
        conj = LineOnSurface(
            big,
            tuple(big.frob(c) for c in ln.a),
            tuple(big.frob(c) for c in ln.b),
            chart=ln.chart,
        )
        queue.append(conj)
    lines = list(seen.values())
    for ln in lines:
        # degree of definition from the key orbit
        key = ln.key
        d = 1
        cur = tuple(big.frob(c) for c in key)
        while cur != key:
            cur = tuple(big.frob(c) for c in cur)
            d += 1
        ln.degree = d
    return lines


def _embed_pair(tower, line, big):
    a = tuple(tower.embed(c, line.level.r, big.r) for c in line.a)
    b = tuple(tower.embed(c, line.level.r, big.r) for c in line.b)
    return a, b


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _assert_line_geometry(X, lines):
    """Classical incidence: 27 lines, each meeting exactly 10 others."""
    if len(lines) != 27:
        raise CubicError("not 27 lines")
    big = lines[0].level
    for ln in lines:
        if not big.is_zero(projgeom.plucker_relation(ln.key, big)):
            raise CubicError("Pluecker relation violated")
    keys = [ln.key for ln in lines]
    for i, ln in enumerate(lines):
        met = sum(
            1
            for j, other in enumerate(lines)
            if j != i and projgeom.lines_meet(keys[i], keys[j], big)
        )
        if met != 10:
            raise CubicError(f"line meets {met} others, expected 10")
    # Galois stability of the configuration
    keyset = set(keys)
    for k in keys:
        fk = projgeom.normalize(big, tuple(big.frob(c) for c in k))
        if fk not in keyset:
            raise CubicError("line set is not Galois stable")


# ---------------------------------------------------------------------------
# Classification.


def classify(X: CubicSurface, seed=0, lines=None, cycle_type=None):
    """Frobenius conjugacy class of a smooth cubic surface.

    Cycle type from the 27 lines, disambiguated and cross-validated by
    the Weil traces; inconsistencies raise instead of guessing.
    """
    table = weyl.get_table(6)
    if cycle_type is None:
        if lines is None:
            lines, cycle_type = find_lines(X, seed=seed)
        else:
            cycle_type = _cycle_type_of_lines(lines)
    cands = table.by_cycle_type(cycle_type)
    if not cands:
        raise CubicError(f"no class with cycle type {cycle_type}")
    traces = trace_vector(X, 2)
    cands = [c for c in cands if c.traces[:2] == traces]
    if len(cands) > 1 and X.q <= 11:
        t3 = trace_vector(X, 3)
        cands = [c for c in cands if c.traces[:3] == t3]
    if not cands:
        raise CubicError("cycle type and traces are inconsistent; internal error")
    if len(cands) > 1:
        raise CubicError(
            "ambiguous classification: " + ", ".join(c.class_id for c in cands)
        )
    rec = cands[0]
    if rec.cycle_type != tuple(cycle_type):
        raise CubicError("classifier inconsistency")
    return rec


def point_off_lines(X: CubicSurface, lines=None, seed=0):
    """A rational point of X on none of the 27 lines."""
    if lines is None:
        lines, _ = find_lines(X, seed=seed)
    L = X.level
    big = lines[0].level
    rational = []
    for pt in projgeom.enumerate_proj(3, L):
        if L.is_zero(X.evaluate(pt.coords)):
            rational.append(pt)
    if not rational:
        raise CubicError("no rational point; Chevalley-Warning violated?!")
    for pt in rational:
        ptb = pt.embed(big)
        on_any = False
        for ln in lines:
            rows = [list(ln.a), list(ln.b), list(ptb.coords)]
            if projgeom.rank(rows, big) <= 2:
                on_any = True
                break
        if not on_any:
            return pt
    raise CubicError("every rational point lies on a line")


# ---------------------------------------------------------------------------
# Split surfaces from six points in the plane.


PLANE_CUBIC_MONOMIALS = []
for combo in itertools.combinations_with_replacement(range(3), 3):
    e = [0, 0, 0]
    for v in combo:
        e[v] += 1
    PLANE_CUBIC_MONOMIALS.append(tuple(e))
PLANE_CUBIC_MONOMIALS = tuple(PLANE_CUBIC_MONOMIALS)

CONIC_MONOMIALS = tuple(
    tuple(sum(1 for v in combo if v == u) for u in range(3))
    for combo in itertools.combinations_with_replacement(range(3), 2)
)


def in_general_position(pts, level):
    """Six distinct plane points, no three collinear, not all on a conic."""
    if len(pts) != 6 or len({p.coords for p in pts}) != 6:
        return False
    for trio in itertools.combinations(pts, 3):
        rows = [list(p.coords) for p in trio]
        if level.is_zero(projgeom.det(rows, level)):
            return False
    rows = []
    for p in pts:
        row = []
        for e in CONIC_MONOMIALS:
            t = level.one
            for v in range(3):
                for _ in range(e[v]):
                    t = level.mul(t, p.coords[v])
            row.append(t)
        rows.append(row)
    return not level.is_zero(projgeom.det(rows, level))


def split_cubic_from_points(pts, check=True) -> CubicSurface:
    """Anticanonical image of the plane blown up in six general points.

    The four plane cubics through the points map P^2 to a cubic surface
    in P^3; its equation is the one cubic relation among them.
    """
    level = pts[0].level
    if check and not in_general_position(pts, level):
        raise CubicError("points are not in general position")
    rows = []
    for p in pts:
        row = []
        for e in PLANE_CUBIC_MONOMIALS:
            t = level.one
            for v in range(3):
                for _ in range(e[v]):
                    t = level.mul(t, p.coords[v])
            row.append(t)
        rows.append(row)
    basis = projgeom.kernel(rows, level)
    if len(basis) != 4:
        raise CubicError("expected a 4-dimensional space of cubics through the points")
    F = []
    for vec in basis:
        terms = {}
        for e, c in zip(PLANE_CUBIC_MONOMIALS, vec):
            if not level.is_zero(c):
                terms[e] = c
        F.append(MPoly(level, 3, terms))
    # expand every quaternary cubic monomial in the F's
    deg9 = list(
        tuple(sum(1 for v in combo if v == u) for u in range(3))
        for combo in itertools.combinations_with_replacement(range(3), 9)
    )
    deg9_index = {e: i for i, e in enumerate(deg9)}
    rows = [[level.zero] * 20 for _ in range(len(deg9))]
    for col, e in enumerate(MONOMIALS):
        prod = MPoly.const(level, 3, level.one)
        for v in range(4):
            for _ in range(e[v]):
                prod = prod * F[v]
        for ee, c in prod.terms.items():
            rows[deg9_index[ee]][col] = c
    ker = projgeom.kernel(rows, level)
    if len(ker) != 1:
        raise CubicError(f"expected one cubic relation, found {len(ker)}")
    return CubicSurface(level, ker[0])
