"""Finite field towers and univariate polynomial arithmetic.

The base field GF(q) = GF(p^k) is table-driven: its elements are the
integers 0..q-1, encoding coefficient vectors over GF(p) in base p, and
addition/multiplication/inversion are precomputed lookup tables.

Extension levels GF(q^r) are explicit quotients GF(q)[y]/(m_r) with m_r a
monic irreducible found by seeded random search.  A level element is a
plain tuple of r base-field integers (low degree first); tuples are
value-like, hashable and safe to share between workers.  `Level` carries
the arithmetic; `FieldElement` is a thin wrapper used at API boundaries.

Embeddings GF(q^r) -> GF(q^R) for r | R are fixed once per tower by
storing the image of the lower generator (the lexicographically smallest
root of m_r in the upper level), and are GF(q)-linear by construction.

Polynomials over a level are `UniPoly` objects holding a coefficient
tuple (low first, no trailing zeros).  The toolkit covers divmod, gcd,
modular powering, squarefree decomposition, distinct-degree and
equal-degree factorization, root finding, interpolation and bivariate
resultants (evaluation/interpolation with an exact Sylvester fallback).
"""

from __future__ import annotations

import itertools
import random


class FFError(Exception):
    pass


def is_prime(n):
    if n < 2:
        return False
    for d in range(2, int(n**0.5) + 1):
        if n % d == 0:
            return False
    return True


def _prime_divisors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# Base field GF(p^k), table-driven, elements are ints 0..q-1.


def _fp_poly_mul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    while out and out[-1] == 0:
        out.pop()
    return out


def _fp_poly_mod(a, m, p):
    # m monic
    a = list(a)
    dm = len(m) - 1
    inv_lead = 1  # monic
    while len(a) - 1 >= dm and a:
        if a[-1] == 0:
            a.pop()
            continue
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def _fp_irreducible(m, p):
    """Irreducibility of monic m over GF(p) by the Frobenius criterion."""
    r = len(m) - 1
    if r == 1:
        return True
    x = [0, 1]

    def powq(f):
        # f^p mod m by square and multiply
        result = [1]
        base = list(f)
        e = p
        while e:
            if e & 1:
                result = _fp_poly_mod(_fp_poly_mul(result, base, p), m, p)
            base = _fp_poly_mod(_fp_poly_mul(base, base, p), m, p)
            e >>= 1
        return result

    h = list(x)
    powers = {0: list(x)}
    for i in range(1, r + 1):
        h = powq(h)
        powers[i] = list(h)
    if h != x:
        return False
    for ell in _prime_divisors(r):
        g = powers[r // ell][:]
        # gcd(g - x, m) must be 1
        diff = list(g)
        while len(diff) < 2:
            diff.append(0)
        diff[1] = (diff[1] - 1) % p
        while diff and diff[-1] == 0:
            diff.pop()
        if not diff:
            return False
        a, b = list(m), diff
        while b:
            # reduce a mod b (b not nec. monic)
            inv = pow(b[-1], p - 2, p)
            while len(a) >= len(b) and a:
                c = a[-1] * inv % p
                shift = len(a) - len(b)
                for i, bi in enumerate(b):
                    a[shift + i] = (a[shift + i] - c * bi) % p
                while a and a[-1] == 0:
                    a.pop()
            a, b = b, a
        if len(a) != 1:
            return False
    return True


class BaseField:
    """GF(p^k) with dense operation tables; elements are ints 0..q-1."""

    def __init__(self, p, k, seed=0):
        if not is_prime(p):
            raise FFError(f"{p} is not prime")
        self.p = p
        self.k = k
        self.q = p**k
        q = self.q
        rng = random.Random((seed, "base-modulus", p, k))
        if k == 1:
            self.modulus = [0, 1]
        else:
            for _ in range(10000):
                m = [rng.randrange(p) for _ in range(k)] + [1]
                if _fp_irreducible(m, p):
                    self.modulus = m
                    break
            else:
                raise FFError("no irreducible base modulus found")

        def enc(vec):
            v = 0
            for c in reversed(vec):
                v = v * p + c
            return v

        def dec(n):
            vec = []
            for _ in range(k):
                n, r = divmod(n, p)
                vec.append(r)
            return vec

        self._dec = dec
        add = [[0] * q for _ in range(q)]
        mul = [[0] * q for _ in range(q)]
        for a in range(q):
            va = dec(a)
            for b in range(a, q):
                vb = dec(b)
                s = enc([(x + y) % p for x, y in zip(va, vb)])
                add[a][b] = s
                add[b][a] = s
                pr = enc(_fp_poly_mod(_fp_poly_mul(va, vb, p), self.modulus, p) + [0] * k)
                mul[a][b] = pr
                mul[b][a] = pr
        self.add = add
        self.mul = mul
        self.neg = [add[a].index(0) for a in range(q)]
        inv = [0] * q
        for a in range(1, q):
            inv[a] = mul[a].index(1)
        self.inv = inv
        # x -> x^p, the GF(p)-Frobenius generating Gal(GF(q)/GF(p))
        self.frobp = [self._pow(a, p) for a in range(q)]

    def _pow(self, a, n):
        r = 1
        while n:
            if n & 1:
                r = self.mul[r][a]
            a = self.mul[a][a]
            n >>= 1
        return r

    def pow(self, a, n):
        if a == 0:
            return 0 if n else 1
        n %= self.q - 1
        return self._pow(a, n)


# ---------------------------------------------------------------------------
# Extension levels.


class Level:
    """GF(q^r) as GF(q)[y]/(m); elements are r-tuples of base ints."""

    def __init__(self, tower, rel_degree, modulus):
        self.tower = tower
        self.base = tower.base
        self.r = rel_degree
        self.modulus = tuple(modulus)  # length r+1, monic, base ints
        self.q = self.base.q
        self.cardinality = self.q**self.r
        self.zero = (0,) * self.r
        one = [0] * self.r
        one[0] = 1
        self.one = tuple(one)
        self.gen = tuple(1 if i == 1 else 0 for i in range(self.r)) if self.r > 1 else (1,)
        # reduction rows: y^(r+j) mod m for j = 0..r-2
        B = self.base
        red = []
        cur = [B.neg[c] for c in self.modulus[:-1]]
        red.append(tuple(cur))
        for _ in range(self.r - 2):
            shifted = [0] + list(cur)
            top = shifted.pop()
            if top:
                first = red[0]
                shifted = [B.add[shifted[i]][B.mul[top][first[i]]] for i in range(self.r)]
            cur = shifted
            red.append(tuple(cur))
        self._red = red
        self._frob_matrix = None

    # -- scalar ops on raw tuples ------------------------------------------

    def add(self, a, b):
        ba = self.base.add
        return tuple(ba[x][y] for x, y in zip(a, b))

    def neg(self, a):
        bn = self.base.neg
        return tuple(bn[x] for x in a)

    def sub(self, a, b):
        ba, bn = self.base.add, self.base.neg
        return tuple(ba[x][bn[y]] for x, y in zip(a, b))

    def mul(self, a, b):
        r = self.r
        if r == 1:
            return (self.base.mul[a[0]][b[0]],)
        bm, ba = self.base.mul, self.base.add
        conv = [0] * (2 * r - 1)
        for i, ai in enumerate(a):
            if ai:
                row = bm[ai]
                for j, bj in enumerate(b):
                    if bj:
                        conv[i + j] = ba[conv[i + j]][row[bj]]
        out = conv[:r]
        for j in range(r - 1):
            c = conv[r + j]
            if c:
                row = bm[c]
                redj = self._red[j]
                out = [ba[out[i]][row[redj[i]]] for i in range(r)]
        return tuple(out)

    def mul_base(self, a, c):
        row = self.base.mul[c]
        return tuple(row[x] for x in a)

    def lift_base(self, c):
        """Embed a base-field int as a level element."""
        out = [0] * self.r
        out[0] = c
        return tuple(out)

    def is_zero(self, a):
        return not any(a)

    def inv(self, a):
        if not any(a):
            raise ZeroDivisionError("inverting zero field element")
        if self.r == 1:
            return (self.base.inv[a[0]],)
        # extended Euclid on coefficient polys over the base
        B = self.base
        m = list(self.modulus)
        f = list(a)
        while f and f[-1] == 0:
            f.pop()
        s_prev, s_cur = [], [1]  # coefficients of a in the Bezout combos
        r_prev, r_cur = m, f
        while True:
            if len(r_cur) == 1:
                c = B.inv[r_cur[0]]
                out = [B.mul[c][x] for x in s_cur]
                out += [0] * (self.r - len(out))
                return tuple(out[: self.r])
            q, rem = _bp_divmod(B, r_prev, r_cur)
            s_next = _bp_sub(B, s_prev, _bp_mul(B, q, s_cur))
            r_prev, r_cur = r_cur, rem
            s_prev, s_cur = s_cur, s_next
            if not r_cur:
                raise FFError("modulus not irreducible")

    def pow(self, a, n):
        if n < 0:
            return self.pow(self.inv(a), -n)
        if self.is_zero(a):
            return self.zero if n else self.one
        n %= self.cardinality - 1
        result = self.one
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def frob(self, a):
        """x -> x^q, GF(q)-linear, via a cached matrix on the y-power basis."""
        if self.r == 1:
            return a
        if self._frob_matrix is None:
            cols = [self.pow(self.gen, self.q * i) if i else self.one for i in range(self.r)]
            self._frob_matrix = cols
        ba = self.base.add
        out = self.zero
        for i, c in enumerate(a):
            if c:
                out = self.add(out, self.mul_base(self._frob_matrix[i], c))
        return out

    def frob_power(self, a, i):
        i %= self.r
        for _ in range(i):
            a = self.frob(a)
        return a

    def element_degree(self, a):
        """Least n >= 1 with a^(q^n) = a; divides the relative degree."""
        x = self.frob(a)
        n = 1
        while x != a:
            x = self.frob(x)
            n += 1
        return n

    def elements(self):
        for digits in itertools.product(range(self.q), repeat=self.r):
            yield digits

    def rand(self, rng):
        return tuple(rng.randrange(self.q) for _ in range(self.r))

    def __repr__(self):
        return f"GF({self.base.p}^{self.base.k * self.r})"


def _bp_divmod(B, a, b):
    """Divmod of base-coefficient polys (lists of ints over BaseField B)."""
    a = list(a)
    inv = B.inv[b[-1]]
    q = [0] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b) and a:
        if a[-1] == 0:
            a.pop()
            continue
        c = B.mul[a[-1]][inv]
        shift = len(a) - len(b)
        q[shift] = c
        for i, bi in enumerate(b):
            a[shift + i] = B.add[a[shift + i]][B.neg[B.mul[c][bi]]]
        while a and a[-1] == 0:
            a.pop()
    while q and q[-1] == 0:
        q.pop()
    return q, a


def _bp_mul(B, a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            row = B.mul[ai]
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] = B.add[out[i + j]][row[bj]]
    while out and out[-1] == 0:
        out.pop()
    return out


def _bp_sub(B, a, b):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    out = [B.add[x][B.neg[y]] for x, y in zip(a, b)]
    while out and out[-1] == 0:
        out.pop()
    return out


# ---------------------------------------------------------------------------
# Field elements (API wrapper).


class FieldElement:
    __slots__ = ("level", "coeffs")

    def __init__(self, level, coeffs):
        self.level = level
        self.coeffs = tuple(coeffs)

    def __eq__(self, other):
        return (
            isinstance(other, FieldElement)
            and self.level is other.level
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((id(self.level), self.coeffs))

    def __add__(self, other):
        return FieldElement(self.level, self.level.add(self.coeffs, other.coeffs))

    def __sub__(self, other):
        return FieldElement(self.level, self.level.sub(self.coeffs, other.coeffs))

    def __mul__(self, other):
        return FieldElement(self.level, self.level.mul(self.coeffs, other.coeffs))

    def __pow__(self, n):
        return FieldElement(self.level, self.level.pow(self.coeffs, n))

    def inverse(self):
        return FieldElement(self.level, self.level.inv(self.coeffs))

    def is_zero(self):
        return self.level.is_zero(self.coeffs)

    def __repr__(self):
        return f"FieldElement({self.level!r}, {self.coeffs})"


def frobenius(x: FieldElement, base_power: int = 1) -> FieldElement:
    """x -> x^(q^i) for the tower's base cardinality q."""
    if base_power < 0:
        raise FFError("base_power must be nonnegative")
    return FieldElement(x.level, x.level.frob_power(x.coeffs, base_power))


def element_degree(x: FieldElement) -> int:
    return x.level.element_degree(x.coeffs)


# ---------------------------------------------------------------------------
# Tower.


class FieldTower:
    """A compatible system of levels GF(q^r) over the base GF(q) = GF(p^k).

    Levels are immutable after construction; `ensure_level` may register
    further extensions (single-writer step, done up front in pipelines).
    Embeddings between comparable levels are fixed the first time they are
    requested and cached for the tower's lifetime.
    """

    def __init__(self, p, base_degree, seed=0):
        self.p = p
        self.seed = seed
        self.base_degree = base_degree
        self.base = BaseField(p, base_degree, seed)
        self.q = self.base.q
        base_level = Level(self, 1, (self.base.neg[1], 1))  # y - 1, unused modulus
        self.levels = {1: base_level}
        self._embeddings = {}

    def ensure_level(self, r):
        if r in self.levels:
            return self.levels[r]
        rng = random.Random((self.seed, "modulus", self.q, r))
        base_level = self.levels[1]
        for _ in range(4000):
            coeffs = [(rng.randrange(self.q),) for _ in range(r)] + [(1,)]
            m = UniPoly(base_level, coeffs)
            if m.degree() == r and m.is_irreducible():
                level = Level(self, r, tuple(c[0] for c in coeffs))
                self.levels[r] = level
                return level
        raise FFError(f"no irreducible modulus of degree {r} found (internal fault)")

    def level(self, r):
        if r not in self.levels:
            raise FFError(f"level of relative degree {r} not registered")
        return self.levels[r]

    def embedding(self, r_small, r_big):
        """Image of the degree-r_small generator inside level r_big, plus
        the powers needed to map arbitrary elements."""
        if r_big % r_small:
            raise FFError(f"no embedding GF(q^{r_small}) -> GF(q^{r_big})")
        key = (r_small, r_big)
        if key in self._embeddings:
            return self._embeddings[key]
        small = self.ensure_level(r_small)
        big = self.ensure_level(r_big)
        if r_small == 1:
            powers = [big.one]
        else:
            m = UniPoly(big, [big.lift_base(c) for c in small.modulus])
            roots = m.roots()
            if not roots:
                raise FFError("modulus has no root upstairs; tower corrupt")
            g = min(roots)  # lexicographically smallest root: the fixed choice
            powers = [big.one]
            for _ in range(r_small - 1):
                powers.append(big.mul(powers[-1], g))
        emb = _Embedding(small, big, powers)
        self._embeddings[key] = emb
        return emb

    def embed(self, coeffs, r_small, r_big):
        if r_small == r_big:
            return coeffs
        return self.embedding(r_small, r_big).apply(coeffs)

    def section(self, coeffs, r_big, r_small):
        """Preimage under the fixed embedding, or None if not in the image."""
        if r_small == r_big:
            return coeffs
        return self.embedding(r_small, r_big).section(coeffs)

    def descriptor(self):
        return {
            "p": self.p,
            "base_degree": self.base_degree,
            "seed": self.seed,
            "base_modulus": list(self.base.modulus),
            "level_moduli": {str(r): list(lv.modulus) for r, lv in sorted(self.levels.items()) if r > 1},
        }


class _Embedding:
    def __init__(self, small, big, gen_powers):
        self.small = small
        self.big = big
        self.gen_powers = gen_powers
        self._section_rows = None

    def apply(self, coeffs):
        big = self.big
        out = big.zero
        for c, gp in zip(coeffs, self.gen_powers):
            if c:
                out = big.add(out, big.mul_base(gp, c))
        return out

    def section(self, coeffs):
        # solve the GF(q)-linear system  sum_j x_j * gen_powers[j] = coeffs
        B = self.big.base
        if self._section_rows is None:
            cols = [list(gp) for gp in self.gen_powers]
            self._section_rows = _base_solver(B, cols, self.big.r)
        return _base_apply_solver(B, self._section_rows, list(coeffs), self.small.r)


def _base_solver(B, cols, nrows):
    """Row-reduce [cols | I] over the base; returns data to solve col-combos."""
    ncols = len(cols)
    aug = []
    for i in range(nrows):
        row = [cols[j][i] for j in range(ncols)] + [0] * nrows
        row[ncols + i] = 1
        aug.append(row)
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = None
        for i in range(rank, nrows):
            if aug[i][col]:
                piv = i
                break
        if piv is None:
            continue
        aug[rank], aug[piv] = aug[piv], aug[rank]
        inv = B.inv[aug[rank][col]]
        aug[rank] = [B.mul[inv][x] for x in aug[rank]]
        for i in range(nrows):
            if i != rank and aug[i][col]:
                c = aug[i][col]
                aug[i] = [B.add[x][B.neg[B.mul[c][y]]] for x, y in zip(aug[i], aug[rank])]
        pivots.append(col)
        rank += 1
    return aug, pivots, ncols, nrows


def _base_apply_solver(B, solver, rhs, out_len):
    aug, pivots, ncols, nrows = solver
    # y = R * rhs where R is the recorded row operations; then check consistency
    vals = []
    for i in range(nrows):
        acc = 0
        for j in range(nrows):
            c = aug[i][ncols + j]
            if c and rhs[j]:
                acc = B.add[acc][B.mul[c][rhs[j]]]
        vals.append(acc)
    x = [0] * ncols
    for i, col in enumerate(pivots):
        x[col] = vals[i]
    for i in range(len(pivots), nrows):
        if vals[i]:
            return None
    return tuple(x[:out_len])


def make_field(p, degrees, seed=0) -> FieldTower:
    """Build a tower; `degrees` are absolute degrees over GF(p), the first
    entry being the base."""
    if not is_prime(p):
        raise FFError(f"{p} is not prime")
    if not degrees or any(d < 1 for d in degrees):
        raise FFError("degrees must be a nonempty sequence of integers >= 1")
    base = degrees[0]
    tower = FieldTower(p, base, seed)
    for d in degrees[1:]:
        if d % base:
            raise FFError(f"degree {d} is not a multiple of the base degree {base}")
        tower.ensure_level(d // base)
    return tower


# ---------------------------------------------------------------------------
# Univariate polynomials over a level.


class UniPoly:
    """Dense univariate polynomial; coeffs low-first, no trailing zeros."""

    __slots__ = ("level", "coeffs")

    def __init__(self, level, coeffs):
        while coeffs and level.is_zero(coeffs[-1]):
            coeffs = coeffs[:-1]
        self.level = level
        self.coeffs = tuple(coeffs)

    @classmethod
    def zero(cls, level):
        return cls(level, ())

    @classmethod
    def one(cls, level):
        return cls(level, (level.one,))

    @classmethod
    def x(cls, level):
        return cls(level, (level.zero, level.one))

    @classmethod
    def from_ints(cls, level, ints):
        """Build from base-field integer codes; over a prime base, any
        integers (reduced mod p)."""
        if level.base.k == 1:
            ints = [c % level.base.p for c in ints]
        return cls(level, [level.lift_base(c) for c in ints])

    @classmethod
    def constant(cls, level, c):
        return cls(level, (c,))

    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def lc(self):
        return self.coeffs[-1]

    def __eq__(self, other):
        return (
            isinstance(other, UniPoly)
            and self.level is other.level
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((id(self.level), self.coeffs))

    def __add__(self, other):
        L = self.level
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = L.add(out[i], c)
        return UniPoly(L, out)

    def __neg__(self):
        L = self.level
        return UniPoly(L, [L.neg(c) for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        L = self.level
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return UniPoly(L, ())
        out = [L.zero] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if not L.is_zero(ai):
                for j, bj in enumerate(b):
                    if not L.is_zero(bj):
                        out[i + j] = L.add(out[i + j], L.mul(ai, bj))
        return UniPoly(L, out)

    def scale(self, c):
        L = self.level
        return UniPoly(L, [L.mul(c, a) for a in self.coeffs])

    def shift(self, n):
        """Multiply by x^n."""
        if not self.coeffs:
            return self
        return UniPoly(self.level, (self.level.zero,) * n + self.coeffs)

    def monic(self):
        if not self.coeffs:
            return self
        L = self.level
        lead = self.coeffs[-1]
        if lead == L.one:
            return self
        return self.scale(L.inv(lead))

    def divmod(self, other):
        L = self.level
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        a = list(self.coeffs)
        b = other.coeffs
        db = len(b) - 1
        inv = L.inv(b[-1])
        q = [L.zero] * max(0, len(a) - db)
        while len(a) - 1 >= db and a:
            if L.is_zero(a[-1]):
                a.pop()
                continue
            c = L.mul(a[-1], inv)
            shift = len(a) - 1 - db
            q[shift] = c
            for i, bi in enumerate(b):
                a[shift + i] = L.sub(a[shift + i], L.mul(c, bi))
            while a and L.is_zero(a[-1]):
                a.pop()
        return UniPoly(L, q), UniPoly(L, a)

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def gcd(self, other):
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def mulmod(self, other, m):
        return (self * other) % m

    def powmod(self, e, m):
        L = self.level
        result = UniPoly.one(L)
        base = self % m
        while e:
            if e & 1:
                result = result.mulmod(base, m)
            base = base.mulmod(base, m)
            e >>= 1
        return result

    def derivative(self):
        L = self.level
        p = L.base.p
        out = []
        for i, c in enumerate(self.coeffs[1:], start=1):
            out.append(L.mul_base(c, i % p))
        return UniPoly(L, out)

    def evaluate(self, x):
        L = self.level
        acc = L.zero
        for c in reversed(self.coeffs):
            acc = L.add(L.mul(acc, x), c)
        return acc

    def pth_root(self):
        """For f with f' = 0, so f = g(x^p): recover g.

        Coefficient-wise p-th roots: c^(1/p) = c^(|L|/p).
        """
        L = self.level
        p = L.base.p
        card = L.cardinality
        out = []
        for i in range(0, len(self.coeffs), p):
            out.append(L.pow(self.coeffs[i], card // p))
        return UniPoly(L, out)

    def squarefree_part(self):
        """Product of the distinct monic irreducible factors of self.

        Standard characteristic-p splitting: factors with multiplicity
        prime to p survive in f / gcd(f, f'); the rest form a p-th power
        handled through pth_root.
        """
        f = self.monic()
        if f.degree() <= 1:
            return f
        d = f.derivative()
        if d.is_zero():
            return f.pth_root().squarefree_part()
        g = f.gcd(d)
        w = (f // g).monic()
        if g.degree() == 0:
            return w
        # strip every w-factor out of f; the remainder has all
        # multiplicities divisible by p and is coprime to w
        rest = f
        while True:
            c = rest.gcd(w)
            if c.degree() == 0:
                break
            rest = (rest // c).monic()
        if rest.degree() > 0:
            return (w * rest.squarefree_part()).monic()
        return w

    def is_irreducible(self):
        f = self.monic()
        r = f.degree()
        if r <= 0:
            return False
        if r == 1:
            return True
        L = self.level
        Q = L.cardinality
        x = UniPoly.x(L)
        h = x
        powers = {}
        for i in range(1, r + 1):
            h = h.powmod(Q, f)
            powers[i] = h
        if powers[r] != x % f:
            return False
        for ell in _prime_divisors(r):
            g = (powers[r // ell] - x).gcd(f)
            if g.degree() != 0:
                return False
        return True

    def ddf(self):
        """Distinct-degree factorization of a squarefree monic polynomial.

        Returns {d: product of the irreducible factors of degree d}.
        """
        if self.is_zero():
            raise FFError("ddf of the zero polynomial")
        L = self.level
        f = self.monic()
        Q = L.cardinality
        x = UniPoly.x(L)
        out = {}
        h = x
        d = 0
        while f.degree() > 0:
            d += 1
            if 2 * d > f.degree():
                out[f.degree()] = f
                break
            h = h.powmod(Q, f)
            g = (h - x).gcd(f)
            if g.degree() > 0:
                out[d] = g
                f = (f // g).monic()
                h = h % f
        return out

    def _edf_split(self, d, rng):
        """Split a product of degree-d irreducibles (Cantor-Zassenhaus)."""
        L = self.level
        f = self.monic()
        if f.degree() == d:
            return [f]
        n = f.degree()
        p = L.base.p
        while True:
            u = UniPoly(L, [L.rand(rng) for _ in range(n)])
            if u.degree() < 1:
                continue
            if p == 2:
                m = d * L.r * L.base.k
                t = u % f
                acc = t
                for _ in range(m - 1):
                    t = t.mulmod(t, f)
                    acc = acc + t
                g = acc.gcd(f)
            else:
                e = (L.cardinality**d - 1) // 2
                w = u.powmod(e, f)
                g = (w - UniPoly.one(L)).gcd(f)
            if 0 < g.degree() < n:
                left = g
                right = (f // g).monic()
                return left._edf_split(d, rng) + right._edf_split(d, rng)

    def factor_squarefree(self, seed=0):
        """All monic irreducible factors of a squarefree polynomial."""
        rng = random.Random((seed, "edf", self.coeffs[:4] if self.coeffs else ()))
        out = []
        for d, bucket in sorted(self.ddf().items()):
            out.extend(bucket._edf_split(d, rng))
        return out

    def roots(self, seed=0):
        """All distinct roots in the coefficient level."""
        L = self.level
        f = self.monic() if not self.is_zero() else self
        if f.is_zero():
            raise FFError("roots of the zero polynomial")
        if f.degree() == 0:
            return []
        f = f.squarefree_part()
        x = UniPoly.x(L)
        xq = x.powmod(L.cardinality, f)
        lin = (xq - x).gcd(f)
        if lin.degree() == 0:
            return []
        rng = random.Random((seed, "roots"))
        out = []
        for fac in lin._edf_split(1, rng):
            out.append(L.neg(fac.coeffs[0]))
        return sorted(out)

    @classmethod
    def interpolate(cls, level, points):
        """Lagrange interpolation through [(x_i, y_i)] with distinct x_i.

        Quadratic time: one master product, then a synthetic division and
        an evaluation per node.
        """
        L = level
        master = cls.one(L)
        for xi, _ in points:
            master = master * cls(L, (L.neg(xi), L.one))
        result = cls.zero(L)
        for xi, yi in points:
            if L.is_zero(yi):
                continue
            # num = master / (x - xi) by synthetic division
            num = [L.zero] * (len(master.coeffs) - 1)
            acc = L.zero
            for k in range(len(master.coeffs) - 1, 0, -1):
                acc = L.add(L.mul(acc, xi), master.coeffs[k])
                num[k - 1] = acc
            numpoly = cls(L, num)
            denom = numpoly.evaluate(xi)
            result = result + numpoly.scale(L.mul(yi, L.inv(denom)))
        return result

    def __repr__(self):
        return f"UniPoly({self.level!r}, deg={self.degree()})"


def count_roots(f: UniPoly, level=None) -> int:
    """Number of distinct roots of f in `level` (default: its own level)."""
    if f.is_zero():
        raise FFError("count_roots of the zero polynomial")
    L = f.level if level is None else level
    if L is not f.level:
        tower = L.tower
        coeffs = [tower.embed(c, f.level.r, L.r) for c in f.coeffs]
        f = UniPoly(L, coeffs)
    if f.degree() == 0:
        return 0
    f = f.monic()
    x = UniPoly.x(L)
    xq = x.powmod(L.cardinality, f)
    return (xq - x).gcd(f).degree()


def ddf(f: UniPoly):
    return f.ddf()


def edf_find_root(f: UniPoly, target_level, seed=0) -> FieldElement:
    """One root of an irreducible f inside `target_level`.

    f has degree d over its level GF(q^m); roots generate GF(q^(m d)),
    so m*d must divide the target's relative degree.
    """
    L = f.level
    d = f.degree()
    if d == 1:
        c = L.mul(L.neg(f.coeffs[0]), L.inv(f.coeffs[1]))
        emb = target_level.tower.embed(c, L.r, target_level.r)
        return FieldElement(target_level, emb)
    if (L.r * d) and target_level.r % (L.r * d):
        raise FFError(
            f"roots of this factor generate GF(q^{L.r * d}), "
            f"which does not embed in GF(q^{target_level.r})"
        )
    tower = target_level.tower
    lifted = UniPoly(target_level, [tower.embed(c, L.r, target_level.r) for c in f.coeffs])
    x = UniPoly.x(target_level)
    xq = x.powmod(target_level.cardinality, lifted)
    lin = (xq - x).gcd(lifted)
    if lin.degree() < 1:
        raise FFError("irreducible factor has no root in target level")
    rng = random.Random((seed, "edf-root", d))
    fac = lin._edf_split(1, rng)[0]
    root = target_level.neg(fac.coeffs[0])
    assert target_level.is_zero(lifted.evaluate(root))
    return FieldElement(target_level, root)


# ---------------------------------------------------------------------------
# Bivariate resultants.  A bivariate polynomial in (x, y) is represented as
# a list of UniPoly-in-x, index = power of y.


def _strip_bi(f):
    while f and f[-1].is_zero():
        f = f[:-1]
    return f


def bi_degree_x(f):
    return max((c.degree() for c in f), default=-1)


def _uni_resultant(level, a, b):
    """Resultant of two univariate polys over a field level (scalar)."""
    L = level
    if a.is_zero() or b.is_zero():
        return L.zero
    res = L.one
    f, g = a, b
    while True:
        m, n = f.degree(), g.degree()
        if n == 0:
            return L.mul(res, L.pow(g.coeffs[0], m))
        r = f % g
        if r.is_zero():
            return L.zero
        # Res(f,g) = (-1)^(m n) lc(g)^(m - deg r) Res(g, r)
        if (m * n) & 1 and L.base.p != 2:
            res = L.neg(res)
        res = L.mul(res, L.pow(g.lc(), m - r.degree()))
        f, g = g, r


def resultant(f, g, level, eval_level=None):
    """Res_y of two bivariate polynomials (lists of UniPoly-in-x by y-power).

    Evaluation/interpolation over a sufficiently large registered level,
    with an exact Sylvester/Bareiss fallback when none is available.
    """
    f = _strip_bi(list(f))
    g = _strip_bi(list(g))
    if not f and not g:
        raise FFError("resultant of two zero polynomials")
    if not f or not g:
        return UniPoly.zero(level)
    m, n = len(f) - 1, len(g) - 1
    if m == 0 and n == 0:
        return UniPoly.one(level)
    if m == 0:
        out = UniPoly.one(level)
        for _ in range(n):
            out = out * f[0]
        return out
    if n == 0:
        out = UniPoly.one(level)
        for _ in range(m):
            out = out * g[0]
        return out
    dxf, dxg = bi_degree_x(f), bi_degree_x(g)
    bound = n * dxf + m * dxg
    lcf, lcg = f[-1], g[-1]
    needed = bound + 1 + max(0, lcf.degree()) + max(0, lcg.degree())
    E = eval_level
    if E is None:
        candidates = [r for r in level.tower.levels if r % level.r == 0]
        for r in sorted(candidates):
            if level.tower.levels[r].cardinality >= needed:
                E = level.tower.levels[r]
                break
    if E is None:
        return _sylvester_resultant(f, g, level)
    tower = level.tower
    if E is level:
        lift = lambda c: c
    else:
        lift = lambda c: tower.embed(c, level.r, E.r)

    def lift_poly(p):
        return UniPoly(E, [lift(c) for c in p.coeffs])

    fE = [lift_poly(c) for c in f]
    gE = [lift_poly(c) for c in g]
    lcfE, lcgE = fE[-1], gE[-1]
    points = []
    for alpha in E.elements():
        if len(points) > bound:
            break
        if E.is_zero(lcfE.evaluate(alpha)) or E.is_zero(lcgE.evaluate(alpha)):
            continue
        fa = UniPoly(E, [c.evaluate(alpha) for c in fE])
        ga = UniPoly(E, [c.evaluate(alpha) for c in gE])
        points.append((alpha, _uni_resultant(E, fa, ga)))
    if len(points) <= bound:
        return _sylvester_resultant(f, g, level)
    res_E = UniPoly.interpolate(E, points)
    if E is level:
        return res_E
    out = []
    for c in res_E.coeffs:
        s = tower.section(c, E.r, level.r)
        if s is None:
            raise FFError("interpolated resultant does not descend; tower corrupt")
        out.append(s)
    return UniPoly(level, out)


def _sylvester_resultant(f, g, level):
    """Exact Sylvester determinant via fraction-free Bareiss over k[x]."""
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    zero = UniPoly.zero(level)
    M = [[zero] * size for _ in range(size)]
    for i in range(n):
        for j, c in enumerate(reversed(f)):
            M[i][i + j] = c
    for i in range(m):
        for j, c in enumerate(reversed(g)):
            M[n + i][i + j] = c
    sign = 1
    prev = UniPoly.one(level)
    for k in range(size - 1):
        if M[k][k].is_zero():
            pivot = next((i for i in range(k + 1, size) if not M[i][k].is_zero()), None)
            if pivot is None:
                return zero
            M[k], M[pivot] = M[pivot], M[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                num = M[k][k] * M[i][j] - M[i][k] * M[k][j]
                q, r = num.divmod(prev)
                assert r.is_zero(), "Bareiss division not exact"
                M[i][j] = q
            M[i][k] = zero
        prev = M[k][k]
    det = M[size - 1][size - 1]
    if sign < 0:
        det = -det
    return det
