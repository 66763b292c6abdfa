"""Sparse-access oracles and an explicit Hermitian block encoding for small matrices.

Registers, in tensor order: two flag qubits ``q1, q2``, index registers
``L`` and ``K`` of size ``s_pad`` (``s`` rounded up to a power of two), and
``X, Y`` of size ``2^(w+1)``.  With

    V = O_C . O_A . (D (x) D)

where ``D`` maps ``|0>`` to a uniform superposition of the first ``s``
states, ``O_A`` rotates ``q1`` by the square root of the looked-up entry and
``O_C`` XORs the looked-up row index into ``Y``, the product
``V^dag SWAP V`` (``SWAP`` exchanging ``q1<->q2, L<->K, X<->Y``) carries
``A / (s^2 A_max)`` in the block where every register except ``X`` is zero.

The pairing yields ``conj(r_ji) r_ij`` for the chosen square roots
``r_ij ~ sqrt(A_ij / A_max)``.  Off-diagonal signs survive when the branch
is chosen per ordered pair (``branch="ordered"``: full phase on the upper
triangle, none below).  A diagonal entry always pairs with itself and comes
out as ``|A_ii|``, so negative diagonal entries cannot be represented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, ContractError
from .kvn_hamiltonian import SparseHamiltonian

DENSE_CAP = 4096
UNITARY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SparseAccessOracle:
    """Column-wise nonzero tables of a Hermitian matrix.

    ``cols[j, l]`` is the row of the ``l``-th nonzero in column ``j``, or the
    sentinel ``j + 2^w`` when the column has fewer than ``l + 1`` nonzeros;
    ``entries[j, l]`` is the matching value (0 for sentinels).
    """

    cols: np.ndarray
    entries: np.ndarray
    s: int
    a_max: float
    w: int
    dim: int

    @property
    def s_pad(self) -> int:
        return 1 << max(0, math.ceil(math.log2(self.s))) if self.s > 1 else 1

    @property
    def padded(self) -> int:
        return 1 << self.w

    def column(self, j: int) -> list[tuple[int, complex]]:
        return [(int(r), complex(v)) for r, v in zip(self.cols[j], self.entries[j])
                if r < self.padded]


def _as_matrix(H):
    if isinstance(H, SparseHamiltonian):
        return H.matrix.tocsc()
    if sp.issparse(H):
        return sp.csc_matrix(H)
    return sp.csc_matrix(np.atleast_2d(np.asarray(H, dtype=complex)))


def build_oracles(H, tol: float = 1e-12) -> SparseAccessOracle:
    mat = _as_matrix(H).astype(complex)
    mat.eliminate_zeros()
    if mat.shape[0] != mat.shape[1]:
        raise ContractError(f"matrix must be square, got {mat.shape}")
    D = mat.shape[0]
    a_max = float(np.abs(mat.data).max()) if mat.nnz else 0.0
    herm = mat - mat.conj().T
    if herm.nnz and np.abs(herm.data).max() > tol * max(a_max, 1e-300):
        raise ContractError("block encoding requires a Hermitian matrix")
    counts = np.diff(mat.indptr)
    s = max(1, int(counts.max()) if D else 1)
    if isinstance(H, SparseHamiltonian) and s > H.s_col_bound:
        raise ContractError(f"column sparsity {s} exceeds the bound {H.s_col_bound}")
    w = max(0, math.ceil(math.log2(D))) if D > 1 else 0
    cols = np.empty((D, s), dtype=np.int64)
    entries = np.zeros((D, s), dtype=complex)
    for j in range(D):
        lo, hi = mat.indptr[j], mat.indptr[j + 1]
        order = np.argsort(mat.indices[lo:hi])
        rows = mat.indices[lo:hi][order]
        cols[j, :] = j + (1 << w)
        cols[j, :len(rows)] = rows
        entries[j, :len(rows)] = mat.data[lo:hi][order]
    return SparseAccessOracle(cols, entries, s, a_max, w, D)


def _entry_root(value: complex, row: int, col: int, a_max: float, branch: str) -> complex:
    if a_max == 0 or value == 0:
        return 0.0
    mag = math.sqrt(abs(value) / a_max)
    if branch == "principal":
        return complex(np.sqrt(complex(value) / a_max))
    if branch == "ordered":
        return mag * np.exp(1j * np.angle(value)) if row < col else complex(mag)
    raise ContractError(f"unknown branch {branch!r}")


def _uniform_prep(s: int, size: int) -> np.ndarray:
    """Unitary whose first column is uniform over the first ``s`` entries."""
    v = np.zeros(size)
    v[:s] = 1 / math.sqrt(s)
    # Householder reflection taking e_0 to v
    e0 = np.zeros(size)
    e0[0] = 1.0
    u = e0 - v
    if np.linalg.norm(u) < 1e-15:
        return np.eye(size)
    u /= np.linalg.norm(u)
    return np.eye(size) - 2 * np.outer(u, u)


@dataclass
class Encoding:
    unitary: sp.csr_matrix
    shape: tuple[int, ...]
    oracle: SparseAccessOracle
    branch: str

    def todense(self) -> np.ndarray:
        return self.unitary.toarray()

    def top_block(self) -> np.ndarray:
        """``<0..0, i| U |0..0, j>`` over the unpadded system indices."""
        idx = [np.ravel_multi_index((0, 0, 0, x, 0, 0), self.shape)
               for x in range(self.oracle.dim)]
        return self.unitary[idx][:, idx].toarray()

    def unitarity_defect(self) -> float:
        U = self.unitary
        diff = (U.conj().T @ U - sp.identity(U.shape[0], format="csr")).tocoo()
        return float(np.abs(diff.data).max()) if diff.nnz else 0.0


def encoding_parts(orc: SparseAccessOracle, branch: str = "ordered"):
    """``(V, SWAP, shape)`` as sparse matrices."""
    sp_ = orc.s_pad
    nx = 2 << orc.w
    shape = (2, 2, sp_, nx, sp_, nx)
    total = int(np.prod(shape))
    idx = np.arange(total)
    q1, q2, L, X, K, Y = np.unravel_index(idx, shape)

    Dm = _uniform_prep(orc.s, sp_)
    prep = sp.kron(sp.kron(sp.identity(4 * 1), sp.csr_matrix(Dm)), sp.identity(nx))
    prep = sp.kron(sp.kron(prep, sp.csr_matrix(Dm)), sp.identity(nx), format="csr")

    # O_A: on |l, x> rotate q1 by [[a, -b*], [b, a*]]
    amp = np.zeros((sp_, nx), dtype=complex)
    for x in range(orc.dim):
        for l in range(orc.s):
            r = orc.cols[x, l]
            amp[l, x] = _entry_root(orc.entries[x, l], r, x, orc.a_max, branch)
    a = amp[L, X]
    b = np.sqrt(np.maximum(0.0, 1.0 - np.abs(a) ** 2))
    flip = np.ravel_multi_index((1 - q1, q2, L, X, K, Y), shape)
    # column with q1=0 -> a|0> + b|1> ; column with q1=1 -> -b*|0> + a*|1>
    diag = np.where(q1 == 0, a, a.conj())
    off = np.where(q1 == 0, b, -b)
    oa = sp.csr_matrix((np.concatenate([diag, off]),
                        (np.concatenate([idx, flip]), np.concatenate([idx, idx]))),
                       shape=(total, total))

    # O_C: y -> y xor c(x, l) for system indices x
    cxl = np.zeros((sp_, nx), dtype=np.int64)
    for x in range(orc.dim):
        for l in range(orc.s):
            cxl[l, x] = orc.cols[x, l]
        cxl[orc.s:, x] = x + (1 << orc.w)
    for x in range(orc.dim, 1 << orc.w):
        cxl[:, x] = x + (1 << orc.w)
    target = np.ravel_multi_index((q1, q2, L, X, K, Y ^ cxl[L, X]), shape)
    oc = sp.csr_matrix((np.ones(total), (target, idx)), shape=(total, total))

    V = (oc @ oa @ prep).tocsr()
    V.eliminate_zeros()
    swap_target = np.ravel_multi_index((q2, q1, K, Y, L, X), shape)
    S = sp.csr_matrix((np.ones(total), (swap_target, idx)), shape=(total, total))
    return V, S, shape


def assemble_dense_encoding(orc: SparseAccessOracle, branch: str = "ordered",
                            cap: int = DENSE_CAP) -> Encoding:
    """Explicit ``V^dag SWAP V`` for a small oracle; unitarity is checked."""
    total = 4 * orc.s_pad ** 2 * (2 << orc.w) ** 2
    if total > cap:
        raise CapacityError(f"encoding workspace {total} exceeds cap {cap}")
    V, S, shape = encoding_parts(orc, branch)
    U = (V.conj().T @ S @ V).tocsr()
    U.data[np.abs(U.data) < 1e-15] = 0
    U.eliminate_zeros()
    enc = Encoding(U, shape, orc, branch)
    defect = enc.unitarity_defect()
    if defect > UNITARY_TOLERANCE:
        raise ContractError(f"encoding is not unitary (defect {defect:.2e})")
    return enc


@dataclass
class BlockReport:
    max_deviation: float
    normalization: float
    block: np.ndarray
    target: np.ndarray

    @property
    def ok(self) -> bool:
        return self.max_deviation < 1e-12


def verify_block(orc: SparseAccessOracle, A=None, branch: str = "ordered") -> BlockReport:
    """Compare the encoded top-left block with ``A / (s^2 A_max)``."""
    dense = np.zeros((orc.dim, orc.dim), dtype=complex)
    for j in range(orc.dim):
        for r, v in orc.column(j):
            dense[r, j] = v
    if A is None:
        A = dense
    A = _as_matrix(A).toarray()
    norm = orc.s ** 2 * orc.a_max
    if norm == 0:
        return BlockReport(0.0 if not np.any(A) else float(np.abs(A).max()),
                           0.0, np.zeros_like(A), np.zeros_like(A))
    block = assemble_dense_encoding(orc, branch).top_block()
    target = A / norm
    return BlockReport(float(np.abs(block - target).max()), float(norm), block, target)


def random_sparse_hermitian(rng: np.random.Generator, dim: int, s: int,
                            diagonal: bool = True) -> np.ndarray:
    """Dense Hermitian test matrix with at most ``s`` nonzeros per column.

    Off-diagonal entries are complex normal; diagonal entries (when enabled)
    are real normal and may be negative.
    """
    A = np.zeros((dim, dim), dtype=complex)
    counts = np.zeros(dim, dtype=int)
    pairs = [(i, j) for i in range(dim) for j in range(i, dim) if diagonal or i != j]
    for k in rng.permutation(len(pairs)):
        i, j = pairs[k]
        if i == j:
            if counts[i] < s:
                A[i, i] = rng.normal()
                counts[i] += 1
        elif counts[i] < s and counts[j] < s:
            v = rng.normal() + 1j * rng.normal()
            A[i, j], A[j, i] = v, np.conj(v)
            counts[i] += 1
            counts[j] += 1
    return A
