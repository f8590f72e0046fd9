"""Monomial trees: tries over exponent prefixes with mod 2^64 substitution.

Level k (1 = top) holds one node per distinct prefix of the reordered
exponent vectors; level D holds the coefficients.  ``push`` substitutes an
integer for the deepest unsubstituted variable by folding level L into level
L-1.  ``pop_to_level`` only moves the cursor, so undoing any suffix of the
substitutions costs nothing.

Node layout per level: ``values`` (uint64), ``parent`` (uint32 index into the
previous level) and ``exponent`` (uint8), i.e. 13 bytes per node.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadMagicError,
    EmptyPolynomialError,
    ParseError,
    StackUnderflowError,
    TreeStateError,
    TruncatedError,
)
from .forms import exponent_index
from .sparse import SparsePoly

MASK64 = (1 << 64) - 1
TREE_MAGIC = b"TQT1"

# top-to-bottom variable order used for Delta_4
QUARTIC_ORDER_NAMES = (
    (4, 0, 0), (3, 1, 0), (3, 0, 1), (2, 2, 0), (2, 0, 2), (1, 3, 0), (0, 4, 0), (1, 0, 3),
    (0, 0, 4), (0, 3, 1), (0, 1, 3), (0, 2, 2), (2, 1, 1), (1, 2, 1), (1, 1, 2),
)
QUARTIC_LEVEL_SIZES = (
    10, 67, 328, 1772, 8128, 48_856, 246_759, 1_197_716, 3_957_952, 11_218_852,
    27_045_996, 50_767_957, 50_767_957, 50_767_957, 50_767_957,
)


def quartic_order() -> list[int]:
    idx = exponent_index(4)
    return [idx[u] for u in QUARTIC_ORDER_NAMES]


def default_order(degrees: Sequence[int]) -> list[int]:
    """Variables sorted by degree, lowest at the top; ties by index."""
    return sorted(range(len(degrees)), key=lambda i: (degrees[i], i))


def to_signed(v: int) -> int:
    v &= MASK64
    return v - (1 << 64) if v >> 63 else v


def power_table(c: int, emax: int) -> np.ndarray:
    return np.array([pow(c, e, 1 << 64) for e in range(emax + 1)], dtype=np.uint64)


def _poly_arrays(P: SparsePoly):
    items = P.items()
    exps = np.array([e for e, _ in items], dtype=np.uint8).reshape(len(items), P.nvars)
    coeffs = np.array([c & MASK64 for _, c in items], dtype=np.uint64)
    return exps, coeffs


class MonomialTree:
    def __init__(self, order, exponents, parents, leaf_values, bound=None):
        self.order = list(order)
        self.depth = len(self.order)
        # index 0 is the root level (a single node)
        self.exponents = exponents
        self.parents = parents
        self.child_starts = [None] * (self.depth + 1)
        for k in range(1, self.depth + 1):
            p = parents[k]
            self.child_starts[k - 1] = np.concatenate(([0], np.flatnonzero(np.diff(p)) + 1)).astype(np.intp)
        self.max_exp = [0] + [int(e.max()) if len(e) else 0 for e in exponents[1:]]
        self.values = [np.zeros(len(p), dtype=np.uint64) for p in parents]
        self.values[self.depth] = leaf_values
        self.level = self.depth
        self.stack: list[int] = []
        self.bound = bound

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, P: SparsePoly, order: Sequence[int] | None = None, bound=None) -> "MonomialTree":
        if P.is_zero():
            raise EmptyPolynomialError("cannot build a monomial tree for the zero polynomial")
        exps, coeffs = _poly_arrays(P)
        return cls.from_arrays(exps, coeffs, order, bound)

    @classmethod
    def from_arrays(cls, exps: np.ndarray, coeffs: np.ndarray, order=None, bound=None) -> "MonomialTree":
        """Build from a (terms x nvars) exponent array and coefficients (reduced mod 2^64)."""
        if len(coeffs) == 0:
            raise EmptyPolynomialError("cannot build a monomial tree for the zero polynomial")
        nvars = exps.shape[1]
        if order is None:
            order = default_order(exps.max(axis=0).tolist())
        order = list(order)
        if sorted(order) != list(range(nvars)):
            raise ValueError(f"order {order} is not a permutation of {nvars} variables")
        E = np.ascontiguousarray(exps[:, order])
        coeffs = np.asarray(coeffs)
        if coeffs.dtype != np.uint64:
            coeffs = np.array([int(c) & MASK64 for c in coeffs.tolist()], dtype=np.uint64)
        perm = np.lexsort(E.T[::-1])
        E = E[perm]
        coeffs = coeffs[perm]
        D = nvars
        T = len(E)
        changed = np.zeros(T, dtype=bool)
        changed[0] = True
        exponents = [np.zeros(1, dtype=np.uint8)]
        parents = [np.zeros(1, dtype=np.uint32)]
        prev_ids = np.zeros(T, dtype=np.int64)
        for k in range(D):
            if T > 1:
                changed[1:] |= E[1:, k] != E[:-1, k]
            starts = np.flatnonzero(changed)
            ids = np.cumsum(changed) - 1
            exponents.append(E[starts, k].astype(np.uint8))
            parents.append(prev_ids[starts].astype(np.uint32))
            prev_ids = ids
        if len(exponents[D]) != T:
            raise ValueError("duplicate exponent vectors")
        return cls(order, exponents, parents, coeffs, bound)

    # -- structure ---------------------------------------------------------

    def level_sizes(self) -> list[int]:
        return [len(p) for p in self.parents[1:]]

    def node_count(self) -> int:
        return sum(self.level_sizes())

    def nbytes(self) -> int:
        return sum(v.nbytes + p.nbytes + e.nbytes for v, p, e in zip(self.values[1:], self.parents[1:], self.exponents[1:]))

    # -- the arboreal stack --------------------------------------------------

    def push(self, c: int) -> None:
        """Substitute ``c`` for the variable at the current level."""
        L = self.level
        if L < 1:
            raise StackUnderflowError("all variables are already substituted")
        if self.bound is not None and abs(c) > self.bound:
            raise ValueError(f"|{c}| exceeds the coefficient bound {self.bound}")
        pw = power_table(c, self.max_exp[L])
        vals = self.values[L] * pw[self.exponents[L]]
        self.values[L - 1] = np.add.reduceat(vals, self.child_starts[L - 1])
        self.level = L - 1
        self.stack.append(c)

    def pop_to_level(self, n: int) -> None:
        if n > self.depth:
            raise IndexError(f"level {n} is below the tree depth {self.depth}")
        if n < self.level:
            raise IndexError(f"cannot pop to level {n} above the cursor {self.level}")
        self.level = n
        del self.stack[self.depth - n:]

    def assignment(self) -> list[int]:
        """Substituted values ``c_D, ..., c_{L+1}``."""
        return list(self.stack)

    def level_values(self, level: int | None = None) -> np.ndarray:
        return self.values[self.level if level is None else level]

    def extract_univariate(self) -> np.ndarray:
        """Coefficients of the top variable, indexed by exponent (uint64)."""
        if self.level != 1:
            raise TreeStateError(f"cursor is at level {self.level}, expected 1")
        g = np.zeros(self.max_exp[1] + 1, dtype=np.uint64)
        g[self.exponents[1]] = self.values[1]
        return g

    def scan_block(self, cvals: Sequence[int]) -> np.ndarray:
        """Values mod 2^64 for every assignment of ``cvals`` to the levels above the cursor.

        With the cursor at level L the result has shape ``(len(cvals),) * L``;
        axis 0 is level L and the last axis is level 1.  Does not move the
        cursor.
        """
        L = self.level
        if L < 1:
            raise TreeStateError("no unsubstituted levels left")
        w = len(cvals)
        V = self.values[L][None, :]
        for k in range(L, 1, -1):
            P = np.stack([power_table(c, self.max_exp[k]) for c in cvals])[:, self.exponents[k]]
            V = (V[:, None, :] * P[None, :, :]).reshape(-1, P.shape[1])
            V = np.add.reduceat(V, self.child_starts[k - 1], axis=1)
        P1 = np.stack([power_table(c, self.max_exp[1]) for c in cvals])[:, self.exponents[1]]
        return (V @ P1.T).reshape((w,) * L)

    def full_value(self) -> int:
        if self.level != 0:
            raise TreeStateError(f"cursor is at level {self.level}, expected 0")
        return int(self.values[0][0])

    def upper_copy(self) -> "MonomialTree":
        """A tree holding only levels above the cursor, with private values.

        Structural arrays are shared (read-only); the current level's values
        become the new leaves.
        """
        L = self.level
        if L < 1:
            raise TreeStateError("nothing left to copy")
        t = MonomialTree.__new__(MonomialTree)
        t.order = self.order[:L]
        t.depth = L
        t.exponents = self.exponents[: L + 1]
        t.parents = self.parents[: L + 1]
        t.child_starts = self.child_starts[:L] + [None]
        t.max_exp = self.max_exp[: L + 1]
        t.values = [np.zeros(len(p), dtype=np.uint64) for p in t.parents]
        t.values[L] = self.values[L].copy()
        t.level = L
        t.stack = []
        t.bound = self.bound
        return t

    # -- cache file ----------------------------------------------------------

    def save(self, path) -> None:
        D = self.depth
        head = struct.pack("<4sHH", TREE_MAGIC, 1, D)
        head += bytes(self.order)
        head += struct.pack(f"<{D}Q", *self.level_sizes())
        with open(path, "wb") as fh:
            fh.write(head)
            for k in range(1, D + 1):
                fh.write(self.exponents[k].tobytes())
                fh.write(self.parents[k].astype("<u4").tobytes())
            fh.write(self.values[D].astype("<u8").tobytes())

    @classmethod
    def load(cls, path, bound=None) -> "MonomialTree":
        data = Path(path).read_bytes()
        if data[:4] != TREE_MAGIC:
            raise BadMagicError(f"bad tree cache magic {data[:4]!r}")
        if len(data) < 8:
            raise TruncatedError("truncated tree header")
        version, D = struct.unpack_from("<HH", data, 4)
        if version != 1:
            raise ParseError(f"unsupported tree cache version {version}")
        off = 8
        order = list(data[off: off + D])
        off += D
        sizes = struct.unpack_from(f"<{D}Q", data, off)
        off += 8 * D
        need = off + sum(5 * s for s in sizes) + 8 * sizes[-1]
        if len(data) != need:
            raise TruncatedError(f"tree cache has {len(data)} bytes, header implies {need}")
        exponents = [np.zeros(1, dtype=np.uint8)]
        parents = [np.zeros(1, dtype=np.uint32)]
        for s in sizes:
            exponents.append(np.frombuffer(data, dtype=np.uint8, count=s, offset=off))
            off += s
            parents.append(np.frombuffer(data, dtype="<u4", count=s, offset=off).astype(np.uint32))
            off += 4 * s
        leaves = np.frombuffer(data, dtype="<u8", count=sizes[-1], offset=off).astype(np.uint64)
        return cls(order, exponents, parents, leaves, bound)


def build_tree(P: SparsePoly, order: Sequence[int] | None = None, bound=None) -> MonomialTree:
    return MonomialTree.build(P, order, bound)

