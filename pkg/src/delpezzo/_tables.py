"""Dense numpy arithmetic tables for small field levels.

Elements of a level GF(q^r) are indexed 0..Q-1 by their base-q digit
encoding.  Multiplication tables are built through discrete logs (one
generator search plus two gathers), addition tables digit-wise.  Used by
the vectorized point counters; everything exact integer indexing.
"""

from __future__ import annotations

import numpy as np

TABLE_CARD_LIMIT = 4200

_CACHE = {}


class LevelTables:
    def __init__(self, level):
        if level.cardinality > TABLE_CARD_LIMIT:
            raise ValueError(f"level too large for dense tables ({level.cardinality})")
        self.level = level
        Q = level.cardinality
        self.Q = Q
        q = level.q
        elems = list(level.elements())  # digit-lex order == index order
        self.elements = elems
        index = {e: i for i, e in enumerate(elems)}
        self.index = index
        dtype = np.uint16 if Q <= 4096 else np.uint32

        # additive table, digit-wise over the base
        base_add = np.array(level.base.add, dtype=dtype)
        idx = np.arange(Q, dtype=np.int64)
        digits = []
        rest = idx.copy()
        for _ in range(level.r):
            digits.append(rest % q)
            rest //= q
        A = np.zeros((Q, Q), dtype=dtype)
        for d in range(level.r):
            da = digits[d][:, None]
            db = digits[d][None, :]
            A += base_add[da, db].astype(dtype) * (q**d)
        self.ADD = A

        # multiplicative table via discrete logs
        gen = None
        for cand in elems[1:]:
            seen = 1
            x = cand
            while x != level.one:
                x = level.mul(x, cand)
                seen += 1
            if seen == Q - 1:
                gen = cand
                break
        if gen is None:
            raise ValueError("no multiplicative generator found")
        log = np.zeros(Q, dtype=np.int64)
        exp = np.zeros(Q - 1, dtype=np.int64)
        x = level.one
        for k in range(Q - 1):
            xi = index[x]
            log[xi] = k
            exp[k] = xi
            x = level.mul(x, gen)
        logs_a = log[:, None] + log[None, :]
        M = exp[logs_a % (Q - 1)].astype(dtype)
        M[0, :] = 0
        M[:, 0] = 0
        self.MUL = M
        self.NEG = np.array([index[level.neg(e)] for e in elems], dtype=dtype)

    def idx(self, raw):
        return self.index[raw]

    def idx_from_lower(self, raw, from_r):
        """Index of an element embedded from a lower level."""
        tw = self.level.tower
        return self.index[tw.embed(raw, from_r, self.level.r)]


def get_tables(level) -> LevelTables:
    key = (id(level.tower), level.r)
    if key not in _CACHE:
        _CACHE[key] = LevelTables(level)
    return _CACHE[key]


def proj_plane_arrays(tables):
    """Index arrays (x, y, z) of all points of P^2 over the level,
    normalized representatives, concatenated by leading-one stratum."""
    Q = tables.Q
    one = tables.index[tables.level.one]
    ys, zs = np.meshgrid(np.arange(Q), np.arange(Q), indexing="ij")
    x0 = np.full(Q * Q, one, dtype=np.int64)
    y0 = ys.ravel()
    z0 = zs.ravel()
    x1 = np.zeros(Q, dtype=np.int64)
    y1 = np.full(Q, one, dtype=np.int64)
    z1 = np.arange(Q)
    x2 = np.array([0])
    y2 = np.array([0])
    z2 = np.array([one])
    X = np.concatenate([x0, x1, x2])
    Y = np.concatenate([y0, y1, y2])
    Z = np.concatenate([z0, z1, z2])
    return X, Y, Z
