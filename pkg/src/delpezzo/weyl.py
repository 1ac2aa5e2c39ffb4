"""Picard lattices of del Pezzo surfaces of degree 3 and 2, their Weyl
groups as permutation groups of the exceptional curves, and the conjugacy
class tables used to identify Frobenius actions.

The lattice Z^(1,r) has basis (h, e_1..e_r), intersection form
diag(+1, -1, ..., -1) and canonical class K = -3h + sum e_i.  For r = 6
there are 27 exceptional classes, for r = 7 there are 56.  The group
generated by the simple-root reflections acts faithfully on the
exceptional set, so elements are stored as permutations of 27 or 56
symbols; the lattice matrix of an element is recovered from the
permutation when needed.

Class tables are computed by closing conjugation orbits (vectorized with
numpy) and carry, per class: a representative, the class size, element
order, cycle type on the exceptional curves, the characteristic
polynomial on the lattice and the trace vector t_1..t_12.  The table
build aborts unless the class sizes sum to the full group order and the
full signatures (cycle type, characteristic polynomial) are pairwise
distinct; every classifier in this package rests on those two checks.

Only labels that are pinned by structural properties are given aliases:
E6 C1 (identity) and C14 (the unique class of order divisible by 9);
E7 47 (the unique order-9 class), 56 (its Geiser twist), 35 (the unique
class with lattice eigenvalues {1,1,-1,-1,i,-i,i,-i}) and 28 (its Geiser
twist).  All other classes carry only invariant-keyed internal ids.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

E6_ORDER = 51840
E7_ORDER = 2903040
TRACE_LEN = 12


class WeylError(Exception):
    pass


# ---------------------------------------------------------------------------
# Lattice and exceptional curves.


def _curves(r):
    curves = []
    for i in range(r):
        e = [0] * (r + 1)
        e[1 + i] = 1
        curves.append(tuple(e))
    for i, j in itertools.combinations(range(r), 2):
        v = [1] + [0] * r
        v[1 + i] = -1
        v[1 + j] = -1
        curves.append(tuple(v))
    if r == 6:
        for i in range(r):
            v = [2] + [-1] * r
            v[1 + i] = 0
            curves.append(tuple(v))
    elif r == 7:
        for sub in itertools.combinations(range(r), 5):
            v = [2] + [0] * r
            for i in sub:
                v[1 + i] = -1
            curves.append(tuple(v))
        for i in range(r):
            v = [3] + [-1] * r
            v[1 + i] = -2
            curves.append(tuple(v))
    else:
        raise WeylError("rank must be 6 or 7")
    return tuple(curves)


class PicLattice:
    """Z^(1,r) with its exceptional-curve list and simple-root reflections."""

    def __init__(self, r):
        if r not in (6, 7):
            raise WeylError("rank must be 6 or 7")
        self.r = r
        self.rank = r + 1
        self.labels = ("h",) + tuple(f"e{i+1}" for i in range(r))
        self.K = tuple([-3] + [1] * r)
        self.curves = _curves(r)
        self.curve_index = {c: i for i, c in enumerate(self.curves)}
        self.simple_roots = tuple(
            tuple(
                (0 if k == 0 else (1 if k == 1 + i else (-1 if k == 2 + i else 0)))
                for k in range(r + 1)
            )
            for i in range(r - 1)
        ) + (tuple([1, -1, -1, -1] + [0] * (r - 3)),)

    def dot(self, x, y):
        acc = x[0] * y[0]
        for a, b in zip(x[1:], y[1:]):
            acc -= a * b
        return acc

    def reflect(self, x, alpha):
        c = self.dot(x, alpha)
        return tuple(xi + c * ai for xi, ai in zip(x, alpha))

    def reflection_perm(self, alpha):
        perm = []
        for c in self.curves:
            img = self.reflect(c, alpha)
            perm.append(self.curve_index[img])
        return tuple(perm)

    def generators(self):
        return [self.reflection_perm(a) for a in self.simple_roots]

    def geiser_perm(self):
        """The central involution c -> -K - c on the 56 curves (r = 7)."""
        if self.r != 7:
            raise WeylError("Geiser involution lives on the degree-2 lattice")
        perm = []
        for c in self.curves:
            img = tuple(-k - x for k, x in zip(self.K, c))
            perm.append(self.curve_index[img])
        return tuple(perm)

    def matrix_of_perm(self, perm):
        """Integer matrix on (h, e_1..e_r) induced by a curve permutation.

        The first r curves are e_1..e_r and curve r (the first h-e_i-e_j
        entry) is h - e_1 - e_2, so these r+1 curves form a lattice basis.
        """
        n = self.rank
        basis_idx = list(range(self.r)) + [self.r]
        B = [[self.curves[bi][row] for bi in basis_idx] for row in range(n)]
        Bimg = [[self.curves[perm[bi]][row] for bi in basis_idx] for row in range(n)]
        Binv = _int_inverse(B)
        return _int_matmul(Bimg, Binv)


def build_lattice(r) -> PicLattice:
    return PicLattice(r)


# ---------------------------------------------------------------------------
# Exact integer matrix helpers (entries stay small; rank <= 8).


def _int_matmul(A, B):
    n, m, k = len(A), len(B[0]), len(B)
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def _int_inverse(A):
    """Inverse of a unimodular integer matrix via adjugate/Bareiss."""
    n = len(A)
    d = _int_det(A)
    if d not in (1, -1):
        raise WeylError("basis matrix is not unimodular")
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[A[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            adj[j][i] = (-1) ** (i + j) * _int_det(minor)
    if d == -1:
        adj = [[-x for x in row] for row in adj]
    return adj


def _int_det(A):
    n = len(A)
    if n == 0:
        return 1
    M = [row[:] for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if M[i][k]), None)
            if piv is None:
                return 0
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[k][k] * M[i][j] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def char_poly(A):
    """Monic characteristic polynomial, low-degree-first integer tuple.

    Faddeev-LeVerrier; exact over the integers.
    """
    n = len(A)
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    M = [[0] * n for _ in range(n)]
    c = 1
    for k in range(1, n + 1):
        # M <- A (M + c I)
        for i in range(n):
            M[i][i] += c
        M = _int_matmul(A, M)
        tr = sum(M[i][i] for i in range(n))
        if tr % k:
            raise WeylError("Faddeev-LeVerrier trace not divisible; bug")
        c = -tr // k
        coeffs[n - k] = c
    return tuple(coeffs)


def matrix_traces(A, N=TRACE_LEN):
    out = []
    P = A
    for _ in range(N):
        out.append(sum(P[i][i] for i in range(len(A))))
        P = _int_matmul(P, A)
    return tuple(out)


def newton_traces(cp, N=TRACE_LEN):
    """Power sums of the roots of a monic integer polynomial (low-first)."""
    n = len(cp) - 1
    c = [cp[n - i] for i in range(n + 1)]  # c[0]=1, c[i] = coeff of x^(n-i)
    s = [0] * (N + 1)
    for m in range(1, N + 1):
        acc = -m * c[m] if m <= n else 0
        for i in range(1, min(m - 1, n) + 1):
            acc -= c[i] * s[m - i]
        s[m] = acc
    return tuple(s[1:])


_CYCLO_CACHE = {}


def cyclotomic(d):
    """Integer coefficients of the d-th cyclotomic polynomial, low-first."""
    if d in _CYCLO_CACHE:
        return _CYCLO_CACHE[d]
    # x^d - 1 divided by the cyclotomics of proper divisors
    poly = [-1] + [0] * (d - 1) + [1]
    for e in range(1, d):
        if d % e == 0:
            poly = _int_poly_div(poly, cyclotomic(e))
    _CYCLO_CACHE[d] = tuple(poly)
    return _CYCLO_CACHE[d]


def _int_poly_div(a, b):
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        q, r = divmod(a[-1], b[-1])
        if r:
            raise WeylError("inexact cyclotomic division")
        out[len(a) - len(b)] = q
        for i, bi in enumerate(b):
            a[len(a) - len(b) + i] -= q * bi
        while a and a[-1] == 0:
            a.pop()
    if any(a):
        raise WeylError("inexact cyclotomic division")
    return out


def cyclotomic_factorization(cp, max_order=40):
    """Factor a product of cyclotomics: {d: multiplicity}."""
    rem = list(cp)
    out = {}
    d = 1
    while len(rem) > 1 and d <= max_order:
        phi = list(cyclotomic(d))
        while len(rem) >= len(phi):
            try:
                rem_new = _int_poly_div(rem, phi)
            except WeylError:
                break
            rem = rem_new
            out[d] = out.get(d, 0) + 1
        d += 1
    if len(rem) != 1 or rem[0] != 1:
        raise WeylError("characteristic polynomial is not a product of cyclotomics")
    return out


# ---------------------------------------------------------------------------
# Permutations (tuples, image convention perm[i] = image of i).


def perm_compose(p, q):
    """p after q: (p o q)(i) = p[q[i]]."""
    return tuple(p[j] for j in q)


def perm_inverse(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def perm_cycle_type(p):
    seen = [False] * len(p)
    lens = []
    for i in range(len(p)):
        if seen[i]:
            continue
        n = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            n += 1
        lens.append(n)
    return tuple(sorted(lens, reverse=True))


def perm_order(p):
    out = 1
    for n in set(perm_cycle_type(p)):
        out = out * n // math.gcd(out, n)
    return out


class WeylElement:
    """Group element: permutation of the exceptional curves plus the
    derived lattice matrix."""

    __slots__ = ("lattice", "perm", "_matrix")

    def __init__(self, lattice, perm):
        self.lattice = lattice
        self.perm = tuple(perm)
        self._matrix = None

    def matrix(self):
        if self._matrix is None:
            self._matrix = self.lattice.matrix_of_perm(self.perm)
        return self._matrix

    def __mul__(self, other):
        return WeylElement(self.lattice, perm_compose(self.perm, other.perm))

    def __eq__(self, other):
        return isinstance(other, WeylElement) and self.perm == other.perm

    def __hash__(self):
        return hash(self.perm)


# ---------------------------------------------------------------------------
# Schreier-Sims order computation: the independent oracle for group sizes.


def permutation_group_order(gens):
    """Order of <gens> inside S_n by deterministic Schreier-Sims.

    Textbook verification loop: keep a base, a strong generating list and
    per-level transversals; push every Schreier generator through the
    chain and extend with the residue until all of them sift to the
    identity.  The order is then the product of the orbit sizes.
    """
    n = len(gens[0])
    identity = tuple(range(n))
    strong = [tuple(g) for g in gens if tuple(g) != identity]
    if not strong:
        return 1
    base = []

    def extend_base(g):
        if all(g[b] == b for b in base):
            base.append(next(i for i in range(n) if g[i] != i))

    for g in strong:
        extend_base(g)

    def level_gens(i):
        return [g for g in strong if all(g[base[j]] == base[j] for j in range(i))]

    def transversal(i, gl):
        b = base[i]
        tr = {b: identity}
        queue = [b]
        while queue:
            pt = queue.pop()
            for g in gl:
                img = g[pt]
                if img not in tr:
                    tr[img] = perm_compose(g, tr[pt])
                    queue.append(img)
        return tr

    while True:
        chain = []
        for i in range(len(base)):
            gl = level_gens(i)
            chain.append((transversal(i, gl), gl))
        new_gen = None
        for i in range(len(base) - 1, -1, -1):
            tr, gl = chain[i]
            for pt, t in tr.items():
                for g in gl:
                    residue = perm_compose(perm_inverse(tr[g[pt]]), perm_compose(g, t))
                    if residue == identity:
                        continue
                    # sift through the lower part of the chain
                    h = residue
                    for j in range(i + 1, len(base)):
                        trj, _ = chain[j]
                        img = h[base[j]]
                        if img not in trj:
                            break
                        h = perm_compose(perm_inverse(trj[img]), h)
                    if h != identity:
                        new_gen = h
                        break
                if new_gen:
                    break
            if new_gen:
                break
        if new_gen is None:
            order = 1
            for tr, _ in chain:
                order *= len(tr)
            return order
        strong.append(new_gen)
        extend_base(new_gen)


# ---------------------------------------------------------------------------
# Conjugacy class computation.


def _fingerprint_factory(n, seed=12345):
    rng = np.random.default_rng(seed)
    mult = rng.integers(1, 2**63, size=n, dtype=np.uint64) | np.uint64(1)

    def fp(arr):
        h = (arr.astype(np.uint64) * mult).sum(axis=1, dtype=np.uint64)
        h ^= h >> np.uint64(33)
        h *= np.uint64(0xFF51AFD7ED558CCD)
        h ^= h >> np.uint64(33)
        h *= np.uint64(0xC4CEB9FE1A85EC53)
        h ^= h >> np.uint64(33)
        return h

    return fp


def _conj_closure(seed_perm, gen_arrs, geninv_arrs, fp):
    """All conjugates of seed_perm under the group generated by gen_arrs.

    Fingerprint-based dedup; a collision can only undercount, which the
    caller's total-order check catches.
    """
    members = [seed_perm[None, :].copy()]
    sorted_fps = np.sort(fp(members[0]))
    frontier = members[0]
    while frontier.shape[0]:
        parts = []
        for G, Gi in zip(gen_arrs, geninv_arrs):
            parts.append(G[frontier[:, Gi]])
        cand = np.concatenate(parts, axis=0)
        cf = fp(cand)
        uniq, idx = np.unique(cf, return_index=True)
        cand = cand[idx]
        pos = np.searchsorted(sorted_fps, uniq)
        pos = np.clip(pos, 0, sorted_fps.size - 1)
        fresh = sorted_fps[pos] != uniq
        frontier = cand[fresh]
        if frontier.shape[0]:
            members.append(frontier)
            sorted_fps = np.sort(np.concatenate([sorted_fps, uniq[fresh]]))
    return np.concatenate(members, axis=0), sorted_fps


@dataclass
class ClassRecord:
    """One conjugacy class with every invariant the classifiers consume."""

    class_id: str
    order: int
    size: int
    cycle_type: tuple
    char_poly: tuple
    traces: tuple
    rep: tuple
    cyclo: dict = field(default_factory=dict)
    alias: str = ""

    def signature(self):
        return (self.cycle_type, self.char_poly)

    def eigenvalue_counts(self):
        """{d: number of primitive d-th roots of unity}, with multiplicity."""
        from math import gcd

        out = {}
        for d, m in self.cyclo.items():
            out[d] = out.get(d, 0) + m * sum(1 for k in range(1, d + 1) if gcd(k, d) == 1)
        return out

    def to_json(self):
        return {
            "id": self.class_id,
            "alias": self.alias,
            "order": self.order,
            "size": self.size,
            "cycle_type": list(self.cycle_type),
            "char_poly": list(self.char_poly),
            "traces": list(self.traces),
            "rep": list(self.rep),
            "cyclo": {str(k): v for k, v in self.cyclo.items()},
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            class_id=d["id"],
            alias=d.get("alias", ""),
            order=d["order"],
            size=d["size"],
            cycle_type=tuple(d["cycle_type"]),
            char_poly=tuple(d["char_poly"]),
            traces=tuple(d["traces"]),
            rep=tuple(d["rep"]),
            cyclo={int(k): v for k, v in d["cyclo"].items()},
        )


class WeylTable:
    """Finished, immutable class table for W(E6) or W(E7)."""

    def __init__(self, r, records, geiser_map=None, blowup_map=None):
        self.r = r
        self.group_order = E6_ORDER if r == 6 else E7_ORDER
        self.records = sorted(records, key=lambda c: (c.order, c.cycle_type, c.char_poly))
        for i, rec in enumerate(self.records):
            rec.class_id = f"E{r}-{i+1:02d}"
        self.by_id = {rec.class_id: rec for rec in self.records}
        self.geiser_map = geiser_map or {}
        self.blowup_map = blowup_map or {}
        self._lattice = None
        self._check()
        self._assign_aliases()

    def _check(self):
        total = sum(c.size for c in self.records)
        if total != self.group_order:
            raise WeylError(
                f"class sizes sum to {total}, expected {self.group_order}; table rejected"
            )
        expected = 25 if self.r == 6 else 60
        if len(self.records) != expected:
            raise WeylError(f"found {len(self.records)} classes, expected {expected}")
        sigs = {}
        for rec in self.records:
            s = rec.signature()
            if s in sigs:
                raise WeylError(
                    f"signature collision between {sigs[s]} and {rec.class_id}: "
                    "cycle type + characteristic polynomial do not separate classes"
                )
            sigs[s] = rec.class_id

    def _assign_aliases(self):
        n = len(self.records[0].rep)
        identity_ct = tuple([1] * n)
        for rec in self.records:
            if rec.cycle_type == identity_ct:
                rec.alias = "C1" if self.r == 6 else ""
        if self.r == 6:
            nines = [rec for rec in self.records if rec.order % 9 == 0]
            if len(nines) != 1 or nines[0].order != 9:
                raise WeylError("expected exactly one class of order divisible by 9")
            nines[0].alias = "C14"
        else:
            nines = [rec for rec in self.records if rec.order == 9]
            if len(nines) != 1:
                raise WeylError("expected exactly one order-9 class in W(E7)")
            nines[0].alias = "47"
            tw = self.by_id[self.geiser_map[nines[0].class_id]]
            tw.alias = "56"
            target = {1: 2, 2: 2, 4: 2}  # char poly (t-1)^2 (t+1)^2 (t^2+1)^2
            eig = [rec for rec in self.records if rec.cyclo == target]
            if len(eig) != 1:
                raise WeylError("expected exactly one class with eigenvalues 1,1,-1,-1,i,-i,i,-i")
            eig[0].alias = "35"
            tw2 = self.by_id[self.geiser_map[eig[0].class_id]]
            if tw2 is eig[0]:
                raise WeylError("Geiser twist of the eigenvalue-anchored class is itself")
            tw2.alias = "28"

    # -- lookups ------------------------------------------------------------

    def lattice(self):
        if self._lattice is None:
            self._lattice = build_lattice(self.r)
        return self._lattice

    def by_alias(self, alias):
        for rec in self.records:
            if rec.alias == alias:
                return rec
        raise WeylError(f"no class with alias {alias!r}")

    def by_cycle_type(self, ct):
        ct = tuple(sorted(ct, reverse=True))
        return [rec for rec in self.records if rec.cycle_type == ct]

    def by_char_poly(self, cp):
        return [rec for rec in self.records if rec.char_poly == tuple(cp)]

    def by_trace_prefix(self, prefix):
        prefix = tuple(prefix)
        return [rec for rec in self.records if rec.traces[: len(prefix)] == prefix]

    def lookup(self, cycle_type=None, trace_prefix=None, cyclo=None):
        """Unique class matching the given signature; raises on 0 or >1."""
        cands = list(self.records)
        if cycle_type is not None:
            ct = tuple(sorted(cycle_type, reverse=True))
            cands = [c for c in cands if c.cycle_type == ct]
        if trace_prefix is not None:
            tp = tuple(trace_prefix)
            cands = [c for c in cands if c.traces[: len(tp)] == tp]
        if cyclo is not None:
            cands = [c for c in cands if c.cyclo == dict(cyclo)]
        if not cands:
            raise WeylError("no class matches the given signature (invalid surface data?)")
        if len(cands) > 1:
            raise WeylError(
                "ambiguous signature, candidates: " + ", ".join(c.class_id for c in cands)
            )
        return cands[0]

    def class_of_perm(self, perm):
        """Class of an explicit permutation, via the full signature."""
        lat = self.lattice()
        m = lat.matrix_of_perm(perm)
        sig = (perm_cycle_type(perm), char_poly(m))
        for rec in self.records:
            if rec.signature() == sig:
                return rec
        raise WeylError("permutation does not match any class; not a Weyl element?")

    def separating_prefix_length(self):
        """Shortest m such that (t_1..t_m) distinguishes all classes, or
        None if full trace vectors collide (same char poly twice)."""
        for m in range(1, TRACE_LEN + 1):
            seen = set()
            ok = True
            for rec in self.records:
                key = rec.traces[:m]
                if key in seen:
                    ok = False
                    break
                seen.add(key)
            if ok:
                return m
        return None

    def geiser_twist(self, rec: ClassRecord) -> ClassRecord:
        if self.r != 7:
            raise WeylError("Geiser twist is defined on the degree-2 table")
        return self.by_id[self.geiser_map[rec.class_id]]

    def to_csv_rows(self):
        head = ["id", "alias", "order", "cycle_type", "class_size", "char_poly"] + [
            f"t{i}" for i in range(1, TRACE_LEN + 1)
        ]
        rows = [head]
        for rec in self.records:
            rows.append(
                [
                    rec.class_id,
                    rec.alias,
                    str(rec.order),
                    "+".join(map(str, rec.cycle_type)),
                    str(rec.size),
                    " ".join(map(str, rec.char_poly)),
                ]
                + [str(t) for t in rec.traces]
            )
        return rows

    def to_json(self):
        return {
            "schema": "delpezzo/weyl-table/1",
            "r": self.r,
            "classes": [rec.to_json() for rec in self.records],
            "geiser": self.geiser_map,
            "blowup": self.blowup_map,
        }

    @classmethod
    def from_json(cls, data):
        records = [ClassRecord.from_json(d) for d in data["classes"]]
        table = cls.__new__(cls)
        table.r = data["r"]
        table.group_order = E6_ORDER if table.r == 6 else E7_ORDER
        table.records = records
        table.by_id = {rec.class_id: rec for rec in records}
        table.geiser_map = dict(data.get("geiser", {}))
        table.blowup_map = dict(data.get("blowup", {}))
        table._lattice = None
        table._check()
        return table


def _discover_classes(lattice, expected_order, rng_seed=0):
    """All conjugacy classes: seeded + sampled discovery, exact closure
    per class, abort unless sizes account for the whole group."""
    gens = lattice.generators()
    n = len(lattice.curves)
    gen_arrs = [np.array(g, dtype=np.uint8) for g in gens]
    geninv_arrs = [np.array(perm_inverse(g), dtype=np.uint8) for g in gens]
    fp = _fingerprint_factory(n)
    rng = np.random.default_rng(rng_seed)

    identity = tuple(range(n))
    seeds = [identity] + [tuple(g) for g in gens]
    if lattice.r == 7:
        gamma = lattice.geiser_perm()
        seeds.append(gamma)
        seeds.extend(perm_compose(gamma, g) for g in gens)

    found = []  # (rep tuple, members fps sorted, size)
    all_fp_chunks = []

    def known(perm):
        h = fp(np.array(perm, dtype=np.uint8)[None, :])[0]
        for chunk in all_fp_chunks:
            i = np.searchsorted(chunk, h)
            if i < chunk.size and chunk[i] == h:
                return True
        return False

    def close(perm):
        arr = np.array(perm, dtype=np.uint8)
        members, fps = _conj_closure(arr, gen_arrs, geninv_arrs, fp)
        found.append((tuple(perm), members.shape[0]))
        all_fp_chunks.append(fps)

    def consider(perm):
        if not known(perm):
            close(perm)
            # powers of a new representative reach low-order classes cheaply
            p = perm
            while True:
                p = perm_compose(p, perm)
                if p == identity:
                    break
                if not known(p):
                    close(p)

    for s in seeds:
        consider(s)

    def total():
        return sum(size for _, size in found)

    budget = 0
    word = identity
    while total() != expected_order:
        budget += 1
        if budget > 200000:
            raise WeylError("class discovery exhausted its sampling budget")
        # extend a random word; also occasionally mix with products of reps
        g = gens[int(rng.integers(len(gens)))]
        word = perm_compose(word, g)
        if budget % 3 == 0:
            word = perm_compose(word, found[int(rng.integers(len(found)))][0])
        consider(word)
        if budget % 500 == 0:
            for (r1, _), (r2, _) in itertools.product(found[:40], found[:40]):
                consider(perm_compose(r1, r2))
                if total() == expected_order:
                    break
    if total() != expected_order:
        raise WeylError("class sizes do not sum to the group order; aborting")
    return found


def _build_records(lattice, found):
    records = []
    for rep, size in found:
        m = lattice.matrix_of_perm(rep)
        cp = char_poly(m)
        tr = matrix_traces(m)
        if tr != newton_traces(cp):
            raise WeylError("trace cross-check failed: matrix powers vs Newton identities")
        records.append(
            ClassRecord(
                class_id="",
                order=perm_order(rep),
                size=size,
                cycle_type=perm_cycle_type(rep),
                char_poly=cp,
                traces=tr,
                rep=rep,
                cyclo=cyclotomic_factorization(cp),
            )
        )
    return records


def build_table(r, seed=0) -> WeylTable:
    """Compute the full class table for W(E6) (r=6) or W(E7) (r=7)."""
    lattice = build_lattice(r)
    expected = E6_ORDER if r == 6 else E7_ORDER
    for alpha in lattice.simple_roots:
        if lattice.dot(alpha, alpha) != -2:
            raise WeylError("simple root of wrong norm")
        m = lattice.matrix_of_perm(lattice.reflection_perm(alpha))
        _assert_isometry(lattice, m)
    found = _discover_classes(lattice, expected, rng_seed=seed)
    records = _build_records(lattice, found)
    geiser_map = {}
    if r == 7:
        # provisional ids for the twist map, then rebuild properly
        records_sorted = sorted(records, key=lambda c: (c.order, c.cycle_type, c.char_poly))
        for i, rec in enumerate(records_sorted):
            rec.class_id = f"E7-{i+1:02d}"
        gamma = lattice.geiser_perm()
        sig_index = {rec.signature(): rec.class_id for rec in records_sorted}
        for rec in records_sorted:
            tw = perm_compose(gamma, rec.rep)
            sig = (perm_cycle_type(tw), char_poly(lattice.matrix_of_perm(tw)))
            geiser_map[rec.class_id] = sig_index[sig]
        for a, b in geiser_map.items():
            if geiser_map[b] != a:
                raise WeylError("Geiser twist is not an involution on classes")
        records = records_sorted
    return WeylTable(r, records, geiser_map=geiser_map)


def _assert_isometry(lattice, m):
    n = lattice.rank
    G = [[0] * n for _ in range(n)]
    G[0][0] = 1
    for i in range(1, n):
        G[i][i] = -1
    mt = [[m[j][i] for j in range(n)] for i in range(n)]
    if _int_matmul(mt, _int_matmul(G, m)) != G:
        raise WeylError("generator does not preserve the intersection form")
    K = list(lattice.K)
    img = [sum(m[i][j] * K[j] for j in range(n)) for i in range(n)]
    if img != K:
        raise WeylError("generator does not fix the canonical class")


def blowup_embed_perm(e6_perm, e6_lattice, e7_lattice):
    """Extend an E6 element to Z^(1,7), fixing e_7, as a 56-curve perm."""
    m6 = e6_lattice.matrix_of_perm(e6_perm)
    n = 8
    m7 = [[0] * n for _ in range(n)]
    for i in range(7):
        for j in range(7):
            m7[i][j] = m6[i][j]
    m7[7][7] = 1
    perm = []
    for c in e7_lattice.curves:
        img = tuple(sum(m7[i][j] * c[j] for j in range(n)) for i in range(n))
        perm.append(e7_lattice.curve_index[img])
    return tuple(perm)


def blowup_embed(e6_record: ClassRecord, e6_table: WeylTable, e7_table: WeylTable) -> ClassRecord:
    """E7 class of the extension of an E6 class (blow-up at a point).

    The map is stored on the E7 table, keyed by E6 class ids.
    """
    key = e6_record.class_id
    if key in e7_table.blowup_map:
        return e7_table.by_id[e7_table.blowup_map[key]]
    lat6 = e6_table.lattice()
    lat7 = e7_table.lattice()
    perm7 = blowup_embed_perm(e6_record.rep, lat6, lat7)
    rec = e7_table.class_of_perm(perm7)
    e7_table.blowup_map[key] = rec.class_id
    return rec


def geiser_twist(record: ClassRecord, e7_table: WeylTable) -> ClassRecord:
    return e7_table.geiser_twist(record)


def enumerate_group(lattice: PicLattice, force=False):
    """Every element of the Weyl group as a permutation array.

    The E7 group (2.9M permutations of 56 symbols) is only enumerated
    when forced; class computations never need the full store.
    """
    if lattice.r == 7 and not force:
        raise WeylError("full W(E7) store not enabled; pass force=True (about 160 MB)")
    gens = lattice.generators()
    n = len(lattice.curves)
    gen_arrs = [np.array(g, dtype=np.uint8) for g in gens]
    fp = _fingerprint_factory(n, seed=777)
    frontier = np.array([tuple(range(n))], dtype=np.uint8)
    members = [frontier]
    sorted_fps = np.sort(fp(frontier))
    while frontier.shape[0]:
        parts = [G[frontier] for G in gen_arrs]
        cand = np.concatenate(parts, axis=0)
        cf = fp(cand)
        uniq, idx = np.unique(cf, return_index=True)
        cand = cand[idx]
        pos = np.clip(np.searchsorted(sorted_fps, uniq), 0, sorted_fps.size - 1)
        fresh = sorted_fps[pos] != uniq
        frontier = cand[fresh]
        if frontier.shape[0]:
            members.append(frontier)
            sorted_fps = np.sort(np.concatenate([sorted_fps, uniq[fresh]]))
    return np.concatenate(members, axis=0)


# ---------------------------------------------------------------------------
# Cached access.


_TABLES = {}


def workdir():
    d = os.environ.get("DELPEZZO_WORKDIR", "")
    if d:
        os.makedirs(d, exist_ok=True)
    return d


def get_table(r, rebuild=False) -> WeylTable:
    """Session-cached (and optionally disk-cached) class table."""
    if not rebuild and r in _TABLES:
        return _TABLES[r]
    path = None
    d = workdir()
    if d:
        path = os.path.join(d, f"weyl-e{r}.json")
        if not rebuild and os.path.exists(path):
            try:
                with open(path) as fh:
                    table = WeylTable.from_json(json.load(fh))
                table._assign_aliases()
                _TABLES[r] = table
                return table
            except (WeylError, KeyError, json.JSONDecodeError):
                pass
    table = build_table(r)
    if r == 7:
        # fill the blow-up map eagerly so cached tables carry it
        t6 = get_table(6)
        for rec in t6.records:
            blowup_embed(rec, t6, table)
    _TABLES[r] = table
    if path:
        with open(path, "w") as fh:
            json.dump(table.to_json(), fh)
    return table
