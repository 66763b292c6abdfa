"""Bounded-total-occupation Fock space: ordering, ranking and unranking.

States are occupancy vectors ``(n_0, ..., n_{N-1})`` with ``sum(n) <= m``.
They are ordered by total occupation first; ties are broken by comparing
entries from the highest mode index downwards, the vector with the smaller
entry at the first difference being smaller.  The rank of a state is its
0-based position in that order.  Index 0 is always the vacuum and indices
``1..N`` are the single excitations ``e_0..e_{N-1}``.

Two representations are used:

* dense occupancy tuples, for the scalar API;
* "mode tables": each state written as the multiset of its occupied modes,
  sorted in descending order and padded with ``-1`` to width ``m``.  Within
  a sector the ordering above is exactly lexicographic order of these rows,
  which gives a closed-form vectorised rank used by the operator assembly.
"""

from __future__ import annotations

import math
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ContractError, TruncationError

INDEX_LIMIT = np.iinfo(np.int64).max

__all__ = [
    "TruncatedFockBasis",
    "binomial_table",
    "compare",
    "dimension",
    "rank",
    "rank_mode_table",
    "unrank",
]


def _checked(value: int) -> int:
    if value > INDEX_LIMIT:
        raise OverflowError(f"basis index {value} exceeds the int64 index range")
    return value


def dimension(N: int, m: int) -> int:
    """Number of occupancy vectors of length ``N`` with total at most ``m``."""
    if N < 1 or m < 0:
        raise ContractError(f"need N >= 1 and m >= 0, got N={N}, m={m}")
    return _checked(math.comb(N + m, m))


def sector_start(N: int, K: int) -> int:
    """First index of the total-``K`` sector (0 for the vacuum)."""
    return 0 if K == 0 else math.comb(N + K - 1, N)


def compare(a: Sequence[int], b: Sequence[int]) -> int:
    """Three-way comparison under the basis order: -1, 0 or 1."""
    if len(a) != len(b):
        raise ContractError(f"length mismatch: {len(a)} vs {len(b)}")
    ta, tb = sum(a), sum(b)
    if ta != tb:
        return -1 if ta < tb else 1
    for x, y in zip(reversed(a), reversed(b)):
        if x != y:
            return -1 if x < y else 1
    return 0


def rank(occ: Sequence[int]) -> int:
    """Closed-form index of ``occ`` (exact integer arithmetic)."""
    occ = [int(v) for v in occ]
    if any(v < 0 for v in occ):
        raise ContractError(f"negative occupation in {occ}")
    N = len(occ)
    K = sum(occ)
    if K == 0:
        return 0
    g = math.comb(N + K - 1, N)
    suffix = 0  # sum of n_l for l > k
    for k in range(N - 1, 0, -1):
        nk = occ[k]
        for j in range(nk):
            g += math.comb(K - suffix - j + k - 1, k - 1)
        suffix += nk
    return _checked(g)


def unrank(idx: int, basis: "TruncatedFockBasis") -> tuple[int, ...]:
    """Inverse of :func:`rank` on ``basis`` via a greedy sector walk."""
    return basis.unrank(idx)


def _unrank_walk(idx: int, N: int, m: int) -> tuple[int, ...]:
    K = 0
    while K < m and sector_start(N, K + 1) <= idx:
        K += 1
    r = idx - sector_start(N, K)
    occ = [0] * N
    remaining = K
    for k in range(N - 1, 0, -1):
        j = 0
        while j < remaining:
            block = math.comb(remaining - j + k - 1, k - 1)
            if r < block:
                break
            r -= block
            j += 1
        occ[k] = j
        remaining -= j
    occ[0] = remaining
    return tuple(occ)


def binomial_table(n_max: int, k_max: int) -> np.ndarray:
    """``table[n, k] = C(n, k)`` as int64 for ``0 <= n <= n_max``, ``k <= k_max``."""
    table = np.zeros((n_max + 1, k_max + 1), dtype=np.int64)
    for k in range(k_max + 1):
        for n in range(k, n_max + 1):
            table[n, k] = _checked(math.comb(n, k))
    return table


def rank_mode_table(table: np.ndarray, N: int, binom: np.ndarray | None = None) -> np.ndarray:
    """Vectorised rank of states given as descending, ``-1``-padded mode rows.

    For a sector-``K`` row ``d_1 >= ... >= d_K`` the index is
    ``C(N+K-1, N) + sum_t C(d_t + K - t, K - t + 1)``: the multiset
    combinatorial number system in colex order.
    """
    table = np.asarray(table)
    width = table.shape[-1]
    if binom is None:
        binom = binomial_table(N + width, width + 1)
    occupied = table >= 0
    K = occupied.sum(axis=-1)
    out = np.where(K > 0, binom[N + K - 1, np.maximum(K - 1, 0)], 0)
    for t in range(width):
        d = table[..., t]
        live = occupied[..., t]
        kk = K - t  # size of the tail multiset starting at position t
        n = np.where(live, d + kk - 1, 0)
        k = np.where(live, kk, 0)
        out = out + np.where(live, binom[n, k], 0)
    return out


def _mode_rows(N: int, K: int) -> np.ndarray:
    """All descending mode tuples of size ``K`` in lexicographic order."""
    if K == 0:
        return np.zeros((1, 0), dtype=np.int32)
    prev = _mode_rows(N, K - 1)
    blocks = []
    for d1 in range(N):
        count = math.comb(d1 + K - 1, K - 1)
        head = np.full((count, 1), d1, dtype=np.int32)
        blocks.append(np.hstack([head, prev[:count]]))
    return np.vstack(blocks)


class TruncatedFockBasis:
    """The ``N``-mode Fock basis truncated to total occupation ``<= m``.

    Ranks are 0-based throughout.  Scalar ``rank``/``unrank`` use exact
    integer arithmetic and need no tables; :attr:`mode_table` materialises
    the whole basis in index order for vectorised work.
    """

    #: bases at most this large memoise the dense occupancy table on demand
    MEMO_LIMIT = 20_000

    def __init__(self, mode_count: int, truncation_order: int):
        if mode_count < 1:
            raise ContractError(f"mode_count must be >= 1, got {mode_count}")
        if truncation_order < 0:
            raise ContractError(f"truncation_order must be >= 0, got {truncation_order}")
        self.mode_count = int(mode_count)
        self.truncation_order = int(truncation_order)
        self.dimension = dimension(self.mode_count, self.truncation_order)

    N = property(lambda self: self.mode_count)
    m = property(lambda self: self.truncation_order)

    def __repr__(self):
        return (f"TruncatedFockBasis(N={self.mode_count}, m={self.truncation_order}, "
                f"D={self.dimension})")

    def __eq__(self, other):
        return (isinstance(other, TruncatedFockBasis)
                and other.mode_count == self.mode_count
                and other.truncation_order == self.truncation_order)

    def __hash__(self):
        return hash((self.mode_count, self.truncation_order))

    def __len__(self):
        return self.dimension

    def _check(self, occ: Sequence[int]) -> None:
        if len(occ) != self.mode_count:
            raise ContractError(f"expected {self.mode_count} modes, got {len(occ)}")
        total = sum(int(v) for v in occ)
        if total > self.truncation_order:
            raise TruncationError(
                f"total occupation {total} exceeds truncation order {self.truncation_order}")

    def rank(self, occ: Sequence[int]) -> int:
        self._check(occ)
        return rank(occ)

    def unrank(self, idx: int) -> tuple[int, ...]:
        idx = int(idx)
        if not 0 <= idx < self.dimension:
            raise IndexError(f"index {idx} outside [0, {self.dimension})")
        if self.dimension <= self.MEMO_LIMIT:
            return tuple(int(v) for v in self.occupations[idx])
        return _unrank_walk(idx, self.mode_count, self.truncation_order)

    def sector_range(self, K: int) -> range:
        """Index range occupied by states of total occupation ``K``."""
        if not 0 <= K <= self.truncation_order:
            raise TruncationError(f"sector {K} outside [0, {self.truncation_order}]")
        return range(sector_start(self.mode_count, K), sector_start(self.mode_count, K + 1))

    @cached_property
    def binom(self) -> np.ndarray:
        w = self.truncation_order
        return binomial_table(self.mode_count + w + 1, w + 1)

    @cached_property
    def mode_table(self) -> np.ndarray:
        """``(D, m)`` int32 rows of occupied modes (descending, ``-1``-padded)."""
        m = self.truncation_order
        blocks = []
        for K in range(m + 1):
            rows = _mode_rows(self.mode_count, K)
            pad = np.full((rows.shape[0], m - K), -1, dtype=np.int32)
            blocks.append(np.hstack([rows, pad]))
        return np.vstack(blocks)

    @cached_property
    def totals(self) -> np.ndarray:
        return (self.mode_table >= 0).sum(axis=1).astype(np.int16)

    @cached_property
    def occupations(self) -> np.ndarray:
        """Dense ``(D, N)`` occupancy table; 8-bit unless ``m`` needs more."""
        dtype = np.int8 if self.truncation_order <= 127 else np.int32
        occ = np.zeros((self.dimension, self.mode_count), dtype=dtype)
        table = self.mode_table
        rows = np.arange(self.dimension)
        for t in range(table.shape[1]):
            live = table[:, t] >= 0
            np.add.at(occ, (rows[live], table[live, t]), 1)
        return occ

    def rank_modes(self, table: np.ndarray) -> np.ndarray:
        """Vectorised rank of mode rows (descending, ``-1``-padded)."""
        return rank_mode_table(table, self.mode_count, self.binom)

    def label(self, idx: int) -> str:
        """Compact occupancy string such as ``"0102"``, or sparse form for big N."""
        occ = self.unrank(idx)
        if self.mode_count <= 32 and self.truncation_order < 10:
            return "".join(str(v) for v in occ)
        return ";".join(f"{j}:{v}" for j, v in enumerate(occ) if v)
