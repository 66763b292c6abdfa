"""Truncated Koopman-von Neumann Hamiltonian of a divergence-free polynomial ODE.

For an interaction ``p`` with couplings ``alpha`` the Hamiltonian contains

    sum_{j in p} alpha_j / Lambda^(|p|-2) * k_j * prod_{l in p, l != j} x_l

with ``x = (a + a^dag)/sqrt(2)`` and ``k = (a - a^dag)/(sqrt(2) i)``.  Since
the members of ``p`` are distinct modes, every term expands into ladder
monomials ``prod_{l in A} a_l prod_{l in C} a_l^dag`` with ``A`` and ``C``
a partition of ``p``.  The coefficient of a monomial is

    -i 2^(-|p|/2) Lambda^(2-|p|) sum_j alpha_j s_j,   s_j = +1 (j in A), -1 (j in C)

The all-annihilation and all-creation monomials vanish because the couplings
sum to zero.  Acting on a basis state ``rest + A`` a monomial yields
``rest + C`` with amplitude ``prod_{l in A u C} sqrt(1 + rest_l)``; the fast
assembler enumerates ``rest`` over the truncated basis and ranks both ends in
bulk.  Truncation is the projection ``P_m H P_m``: a monomial contributes only
if both ends have total occupation ``<= m``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.io
import scipy.linalg as sla
import scipy.sparse as sp

from .emhd_model import OdeSystem, validate_system
from .errors import CapacityError, ConfigurationError, ContractError, EstimationError
from .fock_basis import TruncatedFockBasis

PRUNE_RELATIVE = 1e-15
HERMITIAN_TOLERANCE = 1e-12
DEFAULT_CAPACITY_BYTES = 3 * 2**30
# COO triplet (complex value, two int64 indices) plus the compressed copy
BYTES_PER_ENTRY = 2 * (16 + 8 + 8)
DENSE_NORM_LIMIT = 1500


def ladder_apply(occ: Sequence[int], j: int, kind: str, m: int):
    """Apply ``a_j`` (``"annihilate"``) or ``a_j^dag`` (``"create"``) to ``|occ>``.

    Returns ``(occ', amplitude)`` or ``None`` when the result is zero or
    leaves the total-occupation ``<= m`` subspace.
    """
    occ = list(occ)
    nj = occ[j]
    if kind == "annihilate":
        if nj == 0:
            return None
        occ[j] = nj - 1
        return tuple(occ), math.sqrt(nj)
    if kind == "create":
        if sum(occ) + 1 > m:
            return None
        occ[j] = nj + 1
        return tuple(occ), math.sqrt(nj + 1)
    raise ContractError(f"unknown ladder kind {kind!r}")


def eta(sys: OdeSystem, Lambda: float) -> float:
    """``max |alpha_{p->j}| / Lambda^(|p|-2)`` over all interactions."""
    if Lambda < 1:
        raise ConfigurationError(f"rescale Lambda must be >= 1, got {Lambda}")
    best = 0.0
    for it in sys.interactions:
        scale = Lambda ** (len(it) - 2)
        for a in it.alphas:
            best = max(best, abs(a) / scale)
    return best


def monomials(sys: OdeSystem, Lambda: float):
    """Ladder monomials of the Hamiltonian as ``{(|A|,|C|): (A, C, coef)}``.

    ``A`` and ``C`` are int arrays of shape ``(M, |A|)`` and ``(M, |C|)``;
    ``coef`` is complex with the Lambda scaling applied.  Zero monomials are
    dropped.
    """
    collected: dict[tuple[int, int], tuple[list, list, list]] = {}
    for r, (idx, alpha) in sys.groups.items():
        scale = 2.0 ** (-r / 2) / Lambda ** (r - 2)
        for signs in itertools.product((1, -1), repeat=r):
            s = np.array(signs, dtype=float)
            coef = -1j * scale * (alpha @ s)
            keep = np.abs(coef) > 0
            if not keep.any():
                continue
            ann = [t for t in range(r) if signs[t] == 1]
            cre = [t for t in range(r) if signs[t] == -1]
            bucket = collected.setdefault((len(ann), len(cre)), ([], [], []))
            bucket[0].append(idx[keep][:, ann])
            bucket[1].append(idx[keep][:, cre])
            bucket[2].append(coef[keep])
    return {key: (np.vstack(a), np.vstack(c), np.concatenate(k))
            for key, (a, c, k) in sorted(collected.items())}


def estimate_entries(sys: OdeSystem, m: int) -> int:
    """Upper bound on stored COO triplets before duplicate summation."""
    basis = TruncatedFockBasis(sys.N, m) if m >= 0 else None
    total = 0
    for (na, nc), (A, _, _) in monomials(sys, 1.0).items():
        kr = m - max(na, nc)
        if kr < 0:
            continue
        total += A.shape[0] * math.comb(basis.N + kr, kr)
    return total


def _merge_rank(basis: TruncatedFockBasis, rest: np.ndarray, legs: np.ndarray) -> np.ndarray:
    """Rank of every ``rest[r] + legs[k]`` multiset; returns ``(K, R)``."""
    M, R = legs.shape[0], rest.shape[0]
    width = basis.m
    merged = np.full((M, R, width), -1, dtype=np.int64)
    kr, kl = rest.shape[1], legs.shape[1]
    merged[:, :, :kr] = rest[None, :, :]
    merged[:, :, kr:kr + kl] = legs[:, None, :]
    merged[:, :, :kr + kl] = -np.sort(-merged[:, :, :kr + kl], axis=-1)
    return basis.rank_modes(merged)


def _leg_amplitude(rest: np.ndarray, legs: np.ndarray) -> np.ndarray:
    """``prod_l sqrt(1 + count of l in rest)`` for each (leg set, rest) pair."""
    amp = np.ones((legs.shape[0], rest.shape[0]))
    for t in range(legs.shape[1]):
        counts = (rest[None, :, :] == legs[:, t, None, None]).sum(axis=-1)
        amp *= np.sqrt(1.0 + counts)
    return amp


@dataclass
class SparseHamiltonian:
    """Truncated Hamiltonian with the norm metadata used by error budgets."""

    basis: TruncatedFockBasis
    matrix: sp.csc_matrix
    Lambda: float
    eta: float
    s_col_bound: int
    _alpha_spec: float | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    @property
    def a_max(self) -> float:
        return float(np.abs(self.matrix.data).max()) if self.matrix.nnz else 0.0

    @property
    def s_col(self) -> int:
        """Largest number of stored entries in any column."""
        return int(np.diff(self.matrix.indptr).max()) if self.matrix.shape[1] else 0

    @property
    def alpha_spec(self) -> float:
        if self._alpha_spec is None:
            self._alpha_spec = spectral_norm_estimate(self)
        return self._alpha_spec

    @property
    def frobenius(self) -> float:
        return frobenius_norm(self)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def assemble(sys: OdeSystem, m: int, Lambda: float, *,
             capacity_bytes: int = DEFAULT_CAPACITY_BYTES,
             chunk_elements: int = 4_000_000,
             validate: bool = True) -> SparseHamiltonian:
    """Sparse ``P_m H P_m`` over the ``N``-mode basis truncated at ``m``."""
    if Lambda < 1:
        raise ConfigurationError(f"rescale Lambda must be >= 1, got {Lambda}")
    if m < 0:
        raise ConfigurationError(f"truncation order must be >= 0, got {m}")
    if validate:
        report = validate_system(sys)
        if not report.ok:
            raise ConfigurationError(f"system fails validation:\n{report}")
    basis = TruncatedFockBasis(sys.N, m)
    need = estimate_entries(sys, m) * BYTES_PER_ENTRY
    if need > capacity_bytes:
        raise CapacityError(
            f"assembly needs about {need / 2**20:.0f} MiB, above the cap of "
            f"{capacity_bytes / 2**20:.0f} MiB (N={sys.N}, m={m}, D={basis.dimension})")

    rows, cols, vals = [], [], []
    table = basis.mode_table if m > 0 else np.zeros((1, 0), dtype=np.int32)
    totals = basis.totals if m > 0 else np.zeros(1, dtype=np.int16)
    for (na, nc), (A, C, coef) in monomials(sys, Lambda).items():
        for kr in range(0, m - max(na, nc) + 1):
            rest = table[totals == kr, :kr].astype(np.int64)
            step = max(1, chunk_elements // max(1, rest.shape[0] * max(m, 1)))
            for lo in range(0, A.shape[0], step):
                a, c, k = A[lo:lo + step], C[lo:lo + step], coef[lo:lo + step]
                col = _merge_rank(basis, rest, a)
                row = _merge_rank(basis, rest, c)
                amp = _leg_amplitude(rest, a) * _leg_amplitude(rest, c)
                rows.append(row.ravel())
                cols.append(col.ravel())
                vals.append((k[:, None] * amp).ravel())
    return _finish(sys, basis, Lambda, rows, cols, vals)


def _finish(sys, basis, Lambda, rows, cols, vals) -> SparseHamiltonian:
    D = basis.dimension
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals)
    else:
        r = c = np.zeros(0, dtype=np.int64)
        v = np.zeros(0, dtype=complex)
    mat = sp.csc_matrix((v, (r, c)), shape=(D, D), dtype=complex)
    mat.sum_duplicates()
    if mat.nnz:
        a_max = np.abs(mat.data).max()
        mat.data[np.abs(mat.data) < PRUNE_RELATIVE * a_max] = 0
        mat.eliminate_zeros()
    mat.sort_indices()
    H = SparseHamiltonian(basis=basis, matrix=mat, Lambda=float(Lambda),
                          eta=eta(sys, Lambda) if sys.interactions else 0.0,
                          s_col_bound=max(basis.m, 1) * sys.c * 2 ** sys.d)
    defect = hermiticity_defect(H)
    if defect > HERMITIAN_TOLERANCE * max(H.a_max, 1e-300):
        raise ContractError(f"assembled operator is not Hermitian (defect {defect:.3e})")
    return H


def assemble_reference(sys: OdeSystem, m: int, Lambda: float) -> SparseHamiltonian:
    """Slow column-by-column assembly by explicit ladder chains.

    Each term ``k_j prod x_l`` is expanded into creation/annihilation
    strings applied to every basis column with :func:`ladder_apply`.
    Annihilators act before creators so intermediate states stay inside the
    truncated space exactly when the final state does.
    """
    if Lambda < 1:
        raise ConfigurationError(f"rescale Lambda must be >= 1, got {Lambda}")
    basis = TruncatedFockBasis(sys.N, m)
    rows, cols, vals = [], [], []
    for col in range(basis.dimension):
        occ = basis.unrank(col)
        for it in sys.interactions:
            r = len(it)
            for j, a_j in zip(it.indices, it.alphas):
                if a_j == 0:
                    continue
                pref = a_j / Lambda ** (r - 2) / math.sqrt(2) ** r
                for choice in itertools.product(("annihilate", "create"), repeat=r):
                    # k_j = -i (a_j - a_j^dag)/sqrt2 ; x_l = (a_l + a_l^dag)/sqrt2
                    w = -1j * pref
                    ops = sorted(zip(choice, it.indices), key=lambda t: t[0] != "annihilate")
                    state, ok = occ, True
                    for kind, l in ops:
                        res = ladder_apply(state, l, kind, m)
                        if res is None:
                            ok = False
                            break
                        state, amp = res
                        w *= amp
                    if not ok:
                        continue
                    if choice[it.indices.index(j)] == "create":
                        w = -w
                    rows.append(basis.rank(state))
                    cols.append(col)
                    vals.append(w)
    return _finish(sys, basis, Lambda, [np.array(rows, dtype=np.int64)],
                   [np.array(cols, dtype=np.int64)], [np.array(vals, dtype=complex)])


def hermiticity_defect(H) -> float:
    """``max |H_ij - conj(H_ji)|``."""
    mat = H.matrix if isinstance(H, SparseHamiltonian) else sp.csc_matrix(H)
    diff = (mat - mat.conj().T).tocoo()
    return float(np.abs(diff.data).max()) if diff.nnz else 0.0


def frobenius_norm(H) -> float:
    mat = H.matrix if isinstance(H, SparseHamiltonian) else sp.csc_matrix(H)
    return float(np.sqrt(np.sum(np.abs(mat.data) ** 2)))


def norm_upper_bound(H) -> float:
    """Certified spectral-norm upper bound: ``min(Frobenius, max column 1-norm)``."""
    mat = H.matrix if isinstance(H, SparseHamiltonian) else sp.csc_matrix(H)
    if mat.nnz == 0:
        return 0.0
    col1 = float(abs(mat).sum(axis=0).max())
    return min(frobenius_norm(mat), col1)


def spectral_norm_bracket(H, tol: float = 1e-6, maxiter: int = 2000, seed: int = 0):
    """``(lower, estimate, upper)`` for the spectral norm of a Hermitian operator.

    Small operators are diagonalised.  Otherwise a Lanczos recurrence runs
    until the extreme Ritz value settles to ``tol * 1e-4`` relative; Ritz
    values are Rayleigh quotients, so ``lower`` is a certified bound, and
    ``upper`` is :func:`norm_upper_bound`.
    """
    mat = H.matrix if isinstance(H, SparseHamiltonian) else sp.csc_matrix(H)
    upper = norm_upper_bound(mat)
    if mat.nnz == 0:
        return 0.0, 0.0, 0.0
    D = mat.shape[0]
    if D <= DENSE_NORM_LIMIT:
        w = np.linalg.eigvalsh(mat.toarray())
        est = float(np.abs(w).max())
        return est, est, upper
    op = mat.tocsr()
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    q /= np.linalg.norm(q)
    q_prev = np.zeros_like(q)
    alphas, betas = [], []
    beta = 0.0
    best, history = 0.0, []
    for it in range(maxiter):
        w = op @ q - beta * q_prev
        a = np.vdot(q, w).real
        w -= a * q
        alphas.append(a)
        beta = float(np.linalg.norm(w))
        if it % 5 == 4 or beta < 1e-14:
            ritz = sla.eigvalsh_tridiagonal(np.array(alphas), np.array(betas)) \
                if betas else np.array(alphas)
            best = float(np.abs(ritz).max())
            history.append(best)
            if beta < 1e-14 or (len(history) >= 3 and
                                history[-1] - history[-3] <= tol * 1e-4 * history[-1]):
                return best, best, upper
        betas.append(beta)
        q_prev, q = q, w / beta
    raise EstimationError("spectral norm iteration did not converge",
                          lower=best, upper=upper)


def spectral_norm_estimate(H, tol: float = 1e-6, maxiter: int = 2000) -> float:
    """Lanczos estimate of ``||H||_2`` (exact diagonalisation for small ``D``)."""
    return spectral_norm_bracket(H, tol=tol, maxiter=maxiter)[1]


def sector_band(H: SparseHamiltonian) -> int:
    """Largest ``|K - K'|`` between the sectors of any stored entry."""
    coo = H.matrix.tocoo()
    if coo.nnz == 0:
        return 0
    totals = H.basis.totals.astype(np.int64) if H.basis.m > 0 else np.zeros(H.dimension, int)
    return int(np.abs(totals[coo.row] - totals[coo.col]).max())


def save_matrix_market(H, path: str | Path) -> None:
    mat = H.matrix if isinstance(H, SparseHamiltonian) else sp.csc_matrix(H)
    scipy.io.mmwrite(str(path), sp.coo_matrix(mat, dtype=complex), field="complex",
                     symmetry="general", precision=17)


def load_matrix_market(path: str | Path) -> sp.csc_matrix:
    return sp.csc_matrix(scipy.io.mmread(str(path)), dtype=complex)
