"""Internal zero-dimensional system solver used by the smoothness tests
and the line finder.

Sparse multivariate polynomials over a tower level are eliminated one
variable at a time through pairwise resultants against a pivot.  Each
resultant lies in the ideal, so projections of common zeros are never
lost; spurious factors are filtered by back-substitution and
verification.  Roots are only lifted while their absolute degree over the
tower base stays within the caller's cap, and solutions are returned one
representative per Galois orbit (callers close orbits when they need all
conjugates).

Resultants with respect to one variable are computed on a tensor grid of
evaluation points in a large enough registered level, followed by
coordinate-wise Lagrange interpolation; grids touching a vanishing
leading coefficient are re-drawn from a seeded stream.
"""

from __future__ import annotations

import itertools
import random

from . import ff


class EliminationError(Exception):
    pass


class DegenerateSystem(EliminationError):
    """Every elimination route collapsed; the caller should change
    coordinates or fall back to a direct search."""


class MPoly:
    """Sparse multivariate polynomial: {exponent tuple: nonzero coeff}."""

    __slots__ = ("level", "nvars", "terms")

    def __init__(self, level, nvars, terms=None):
        self.level = level
        self.nvars = nvars
        if terms:
            self.terms = {e: c for e, c in terms.items() if not level.is_zero(c)}
        else:
            self.terms = {}

    @classmethod
    def zero(cls, level, nvars):
        return cls(level, nvars)

    @classmethod
    def const(cls, level, nvars, c):
        return cls(level, nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, level, nvars, i, power=1):
        e = [0] * nvars
        e[i] = power
        return cls(level, nvars, {tuple(e): level.one})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        L = self.level
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = L.add(out.get(e, L.zero), c)
            if L.is_zero(s):
                out.pop(e, None)
            else:
                out[e] = s
        return MPoly(L, self.nvars, out)

    def __neg__(self):
        L = self.level
        return MPoly(L, self.nvars, {e: L.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        L = self.level
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = L.mul(c1, c2)
                if L.is_zero(prod):
                    continue
                s = L.add(out.get(e, L.zero), prod)
                if L.is_zero(s):
                    out.pop(e, None)
                else:
                    out[e] = s
        return MPoly(L, self.nvars, out)

    def scale(self, c):
        L = self.level
        return MPoly(L, self.nvars, {e: L.mul(c, v) for e, v in self.terms.items()})

    def degree_in(self, i):
        return max((e[i] for e in self.terms), default=-1)

    def coeff_of_var_power(self, i, k):
        """Coefficient of x_i^k, an MPoly in the same variable slots."""
        out = {}
        for e, c in self.terms.items():
            if e[i] == k:
                out[e[:i] + (0,) + e[i + 1 :]] = c
        return MPoly(self.level, self.nvars, out)

    def substitute(self, i, value):
        """Plug a level element into variable i; drops that slot."""
        L = self.level
        powers = {0: L.one}
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k not in powers:
                powers[k] = L.pow(value, k)
            prod = L.mul(c, powers[k])
            if L.is_zero(prod):
                continue
            ne = e[:i] + e[i + 1 :]
            s = L.add(out.get(ne, L.zero), prod)
            if L.is_zero(s):
                out.pop(ne, None)
            else:
                out[ne] = s
        return MPoly(L, self.nvars - 1, out)

    def lift(self, target_level):
        tw = self.level.tower
        r1, r2 = self.level.r, target_level.r
        if r1 == r2:
            return self
        return MPoly(
            target_level,
            self.nvars,
            {e: tw.embed(c, r1, r2) for e, c in self.terms.items()},
        )

    def evaluate(self, point):
        L = self.level
        acc = L.zero
        for e, c in self.terms.items():
            t = c
            for i, k in enumerate(e):
                if k:
                    t = L.mul(t, L.pow(point[i], k))
            acc = L.add(acc, t)
        return acc

    def as_unipoly(self):
        if self.nvars != 1:
            raise EliminationError("not univariate")
        L = self.level
        deg = self.degree_in(0)
        coeffs = [L.zero] * (deg + 1)
        for e, c in self.terms.items():
            coeffs[e[0]] = c
        return ff.UniPoly(L, coeffs)

    @classmethod
    def from_unipoly(cls, poly, nvars=1, var=0):
        out = {}
        for k, c in enumerate(poly.coeffs):
            if not poly.level.is_zero(c):
                e = [0] * nvars
                e[var] = k
                out[tuple(e)] = c
        return cls(poly.level, nvars, out)

    def __repr__(self):
        return f"MPoly(nvars={self.nvars}, terms={len(self.terms)})"


def _pick_eval_level(level, min_card):
    """Smallest extension of `level` with at least min_card elements."""
    tower = level.tower
    r = level.r
    j = 1
    while level.cardinality**j < min_card:
        j += 1
    return tower.ensure_level(r * j)


def resultant_wrt(f: MPoly, g: MPoly, var, seed=0):
    """Res_var(f, g) as an MPoly in the remaining variables.

    Tensor-grid evaluation and interpolation; exact, and an element of
    the ideal (f, g), so no common zero is ever dropped.
    """
    L = f.level
    df, dg = f.degree_in(var), g.degree_in(var)
    if df < 0 or dg < 0:
        raise EliminationError("resultant with a zero polynomial")
    if df == 0 and dg == 0:
        raise EliminationError("resultant needs a positive degree in the variable")
    others = [i for i in range(f.nvars) if i != var]
    bounds = [dg * f.degree_in(i) + df * g.degree_in(i) for i in others]
    if f.nvars == 1:
        r = _uni_res_scalar(L, f, g, var)
        return MPoly(L, 0, {(): r})
    lc_f = f.coeff_of_var_power(var, df)
    lc_g = g.coeff_of_var_power(var, dg)
    need = max(bounds) + 1
    E = _pick_eval_level(L, 4 * need + 16)
    fE, gE = f.lift(E), g.lift(E)
    lcfE, lcgE = lc_f.lift(E), lc_g.lift(E)
    rng = random.Random((seed, "res-grid", var, tuple(bounds)))
    elems = None
    for _attempt in range(32):
        axes = []
        if E.cardinality <= 4096:
            if elems is None:
                elems = list(E.elements())
            for b in bounds:
                axes.append(rng.sample(elems, b + 1))
        else:
            for b in bounds:
                chosen = set()
                while len(chosen) < b + 1:
                    chosen.add(E.rand(rng))
                axes.append(list(chosen))
        grid_ok = True
        values = {}
        for combo in itertools.product(*[range(len(a)) for a in axes]):
            pt = [axes[i][combo[i]] for i in range(len(axes))]
            if E.is_zero(lcfE.evaluate(pt)) or E.is_zero(lcgE.evaluate(pt)):
                grid_ok = False
                break
            fa = _specialize_others(fE, var, others, pt)
            ga = _specialize_others(gE, var, others, pt)
            values[combo] = ff._uni_resultant(E, fa, ga)
        if grid_ok:
            result_E = _tensor_interpolate(E, axes, values, bounds)
            tower = L.tower
            out = {}
            for e, c in result_E.terms.items():
                s = tower.section(c, E.r, L.r)
                if s is None:
                    raise EliminationError("resultant does not descend to the base level")
                out[e] = s
            full = {}
            for e, c in out.items():
                fe = list(e)
                fe.insert(var, 0)
                full[tuple(fe)] = c
            return MPoly(L, f.nvars, full)
    raise EliminationError("no clean evaluation grid found")


def _specialize_others(p, var, others, pt):
    """Substitute values for all variables except `var`; returns UniPoly."""
    L = p.level
    deg = p.degree_in(var)
    coeffs = [L.zero] * (deg + 1)
    powcache = [dict() for _ in others]
    for e, c in p.terms.items():
        t = c
        for idx, i in enumerate(others):
            k = e[i]
            if k:
                cache = powcache[idx]
                if k not in cache:
                    cache[k] = L.pow(pt[idx], k)
                t = L.mul(t, cache[k])
        coeffs[e[var]] = L.add(coeffs[e[var]], t)
    return ff.UniPoly(L, coeffs)


def _uni_res_scalar(L, f, g, var):
    return ff._uni_resultant(L, f.as_unipoly(), g.as_unipoly())


def _tensor_interpolate(E, axes, values, bounds):
    """Interpolate a grid of scalars into an MPoly over E (len(axes) vars)."""
    k = len(axes)

    def rec(axis, index_prefix):
        if axis == k:
            return MPoly(E, k, {(0,) * k: values[tuple(index_prefix)]})
        pts = []
        for i in range(bounds[axis] + 1):
            sub = rec(axis + 1, index_prefix + [i])
            pts.append((axes[axis][i], sub))
        # Lagrange in this axis with MPoly values
        result = MPoly.zero(E, k)
        xs = [p[0] for p in pts]
        master = ff.UniPoly.one(E)
        for x in xs:
            master = master * ff.UniPoly(E, (E.neg(x), E.one))
        for xi, yi in pts:
            if yi.is_zero():
                continue
            num = [E.zero] * (len(master.coeffs) - 1)
            acc = E.zero
            for kk in range(len(master.coeffs) - 1, 0, -1):
                acc = E.add(E.mul(acc, xi), master.coeffs[kk])
                num[kk - 1] = acc
            numpoly = ff.UniPoly(E, num)
            denom = numpoly.evaluate(xi)
            inv = E.inv(denom)
            for power, cc in enumerate(numpoly.coeffs):
                if E.is_zero(cc):
                    continue
                mono = MPoly(E, k, {_unit_exp(k, axis, power): E.mul(cc, inv)})
                result = result + mono * yi
        return result

    return rec(0, [])


def _unit_exp(n, i, power):
    e = [0] * n
    e[i] = power
    return tuple(e)


# ---------------------------------------------------------------------------
# Root lifting.


def roots_up_to_degree(poly: ff.UniPoly, max_abs_degree, seed=0):
    """Distinct roots of poly in extensions of its level, one per
    Frobenius orbit, capped by absolute degree over the tower base.

    Returns [(level, root)] sorted deterministically.
    """
    L = poly.level
    tower = L.tower
    sf = poly.squarefree_part()
    out = []
    for d, bucket in sorted(sf.ddf().items()):
        if L.r * d > max_abs_degree:
            continue
        if d == 1:
            for r in bucket.roots(seed=seed):
                out.append((L, r))
            continue
        target = tower.ensure_level(L.r * d)
        rng = random.Random((seed, "edf-lift", d))
        for fac in bucket._edf_split(d, rng):
            root = ff.edf_find_root(fac, target, seed=seed)
            out.append((target, root.coeffs))
    return out


# ---------------------------------------------------------------------------
# System solving.


class SolveResult:
    __slots__ = ("solutions", "finite")

    def __init__(self, solutions, finite):
        self.solutions = solutions  # list of (level, coordinate tuple)
        self.finite = finite


def solve_system(polys, max_abs_degree, seed=0, _depth=0):
    """Common zeros of a finite polynomial system over a tower level.

    One representative per Galois orbit, absolute degree capped.  Raises
    DegenerateSystem when every elimination route collapses; returns
    finite=False when a positive-dimensional fiber was certified (the
    witness point on it is still reported).
    """
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        raise DegenerateSystem("system vanished identically")
    L = polys[0].level
    n = polys[0].nvars
    if n == 1:
        g = None
        for p in polys:
            u = p.as_unipoly()
            g = u if g is None else g.gcd(u)
        if g.is_zero():
            raise DegenerateSystem("univariate gcd is zero")
        if g.degree() == 0:
            return SolveResult([], True)
        sols = [(lvl, (root,)) for lvl, root in roots_up_to_degree(g, max_abs_degree, seed)]
        return SolveResult(sols, True)

    var = n - 1
    with_var = [p for p in polys if p.degree_in(var) > 0]
    free = [p.substitute(var, L.zero) for p in polys if p.degree_in(var) == 0]
    if not with_var:
        sub = solve_system(free, max_abs_degree, seed, _depth + 1)
        sols = [(lvl, pt + (lvl.zero,)) for lvl, pt in sub.solutions]
        return SolveResult(sols, False)

    # pivot preference: constant leading coefficient, then low degree
    def pivot_key(p):
        d = p.degree_in(var)
        lc = p.coeff_of_var_power(var, d)
        monic = all(k == 0 for e in lc.terms for k in e)
        return (0 if monic and lc.terms else 1, d, len(p.terms))

    order = sorted(with_var, key=pivot_key)
    reduced = None
    for pivot in order:
        cand = list(free)
        any_nonzero = bool(free)
        ok = True
        for p in with_var:
            if p is pivot:
                continue
            try:
                r = resultant_wrt(pivot, p, var, seed=seed)
            except EliminationError:
                ok = False
                break
            r = r.substitute(var, L.zero)
            if not r.is_zero():
                any_nonzero = True
                cand.append(r)
        if ok and any_nonzero:
            reduced = cand
            break
    if reduced is None:
        raise DegenerateSystem("all elimination routes degenerate")

    sub = solve_system(reduced, max_abs_degree, seed, _depth + 1)
    out = []
    finite = sub.finite
    tower = L.tower
    for lvl, pt in sub.solutions:
        fiber = []
        for p in polys:
            # substitute prefix coordinates (vars 0..n-2), keep var `var`
            q = p.lift(lvl)
            for i in range(n - 2, -1, -1):
                q = q.substitute(i, pt[i])
            fiber.append(q.as_unipoly())
        nonzero = [u for u in fiber if not u.is_zero()]
        if not nonzero:
            out.append((lvl, pt + (lvl.zero,)))
            finite = False
            continue
        g = None
        for u in nonzero:
            g = u if g is None else g.gcd(u)
        if g.degree() == 0:
            continue
        for rl, root in roots_up_to_degree(g, max_abs_degree, seed):
            lifted_pt = tuple(tower.embed(c, lvl.r, rl.r) for c in pt)
            out.append((rl, lifted_pt + (root,)))
    # verification: insurance against interpolation or lifting slips
    verified = []
    for lvl, pt in out:
        good = True
        for p in polys:
            if not lvl.is_zero(p.lift(lvl).evaluate(pt)):
                good = False
                break
        if good:
            verified.append((lvl, pt))
    return SolveResult(verified, finite)
