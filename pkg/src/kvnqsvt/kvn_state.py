"""Encoding classical vectors as truncated KvN states and reading them back.

A position state expands in orthonormal Hermite functions; after dropping
the Gaussian weight (a global scalar that underflows at large rescale) the
amplitude of ``|n_0 ... n_{N-1}>`` is proportional to

    prod_j  H_{n_j}(Lambda x_j) / H_0

with ``H_k`` the orthonormal Hermite polynomials.  The single-excitation
amplitudes are ``sqrt(2) Lambda x_j`` times the vacuum amplitude, which is
what :func:`decode` inverts.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ContractError, DecodeError
from .fock_basis import TruncatedFockBasis

VACUUM_FLOOR = 1e-14


def hermite_ratios(y: np.ndarray, kmax: int) -> np.ndarray:
    """``H_k(y)/H_0`` for ``k = 0..kmax`` by the orthonormal three-term recurrence.

    Returns shape ``(len(y), kmax + 1)``.
    """
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape + (kmax + 1,))
    out[..., 0] = 1.0
    if kmax >= 1:
        out[..., 1] = math.sqrt(2.0) * y
    for k in range(1, kmax):
        out[..., k + 1] = (y * math.sqrt(2.0 / (k + 1)) * out[..., k]
                           - math.sqrt(k / (k + 1)) * out[..., k - 1])
    return out


@dataclass(frozen=True, eq=False)
class KvnState:
    """Amplitude vector over a truncated Fock basis."""

    basis: TruncatedFockBasis
    amplitudes: np.ndarray
    Lambda: float = 1.0

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.basis.dimension,):
            raise ContractError(
                f"amplitude vector of length {amp.size} does not match D={self.basis.dimension}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "KvnState":
        nrm = self.norm
        if nrm == 0:
            raise DecodeError("cannot normalise the zero vector")
        return KvnState(self.basis, self.amplitudes / nrm, self.Lambda)

    def with_amplitudes(self, amp: np.ndarray) -> "KvnState":
        return KvnState(self.basis, amp, self.Lambda)

    @classmethod
    def vacuum(cls, basis: TruncatedFockBasis, Lambda: float = 1.0) -> "KvnState":
        amp = np.zeros(basis.dimension, dtype=complex)
        amp[0] = 1.0
        return cls(basis, amp, Lambda)


def encode(x0, Lambda: float, basis: TruncatedFockBasis) -> KvnState:
    """Unit-normalised KvN state of the classical vector ``x0``."""
    if Lambda < 1:
        raise ConfigurationError(f"rescale Lambda must be >= 1, got {Lambda}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (basis.mode_count,):
        raise ContractError(f"x0 has length {x0.size}, basis has {basis.mode_count} modes")
    m = basis.truncation_order
    ratios = hermite_ratios(Lambda * x0, m)
    amp = np.ones(basis.dimension)
    if m > 0:
        table = basis.mode_table
        # rows are descending, so equal modes are adjacent: multiply in the
        # ratio at the last position of each run, indexed by the run length
        run = np.ones(table.shape, dtype=np.int64)
        for t in range(1, m):
            same = (table[:, t] == table[:, t - 1]) & (table[:, t] >= 0)
            run[:, t] = np.where(same, run[:, t - 1] + 1, 1)
        for t in range(m):
            live = table[:, t] >= 0
            if t + 1 < m:
                last = live & (table[:, t + 1] != table[:, t])
            else:
                last = live
            modes = np.where(last, table[:, t], 0)
            amp = amp * np.where(last, ratios[modes, run[:, t]], 1.0)
    amp = amp / np.linalg.norm(amp)
    return KvnState(basis, amp.astype(complex), float(Lambda))


def decode_with_residual(state: KvnState, floor: float = VACUUM_FLOOR):
    """``(x, imag_residual)`` read from the single-excitation amplitudes.

    The global phase is fixed by rotating the vacuum amplitude onto the
    positive real axis; the largest discarded imaginary part (in units of
    ``x``) is returned as a diagnostic.
    """
    amp = state.amplitudes
    a0 = amp[0]
    if abs(a0) <= floor:
        raise DecodeError(f"vacuum amplitude {abs(a0):.3e} at or below floor {floor:.1e}")
    N = state.basis.mode_count
    if state.basis.truncation_order < 1:
        return np.zeros(N), 0.0
    ratio = amp[1:N + 1] / a0 / (math.sqrt(2.0) * state.Lambda)
    resid = float(np.abs(ratio.imag).max()) if N else 0.0
    return ratio.real.copy(), resid


def decode(state: KvnState, floor: float = VACUUM_FLOOR) -> np.ndarray:
    return decode_with_residual(state, floor)[0]


def l2_of_decoded(state: KvnState, floor: float = VACUUM_FLOOR) -> float:
    return float(np.linalg.norm(decode(state, floor)))


def overlap(a: KvnState, b: KvnState) -> complex:
    """``<a|b>``."""
    if a.basis != b.basis:
        raise ContractError(f"basis mismatch: {a.basis!r} vs {b.basis!r}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def write_snapshot(state: KvnState, path: str | Path, threshold: float = 0.0) -> None:
    """CSV with columns ``index, occupancy, re, im`` (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "occupancy", "re", "im"])
        for i in np.flatnonzero(np.abs(state.amplitudes) > threshold):
            z = state.amplitudes[i]
            w.writerow([int(i), state.basis.label(int(i)), f"{z.real:.17g}", f"{z.imag:.17g}"])


def read_snapshot(path: str | Path, basis: TruncatedFockBasis, Lambda: float = 1.0) -> KvnState:
    amp = np.zeros(basis.dimension, dtype=complex)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            amp[int(row["index"])] = complex(float(row["re"]), float(row["im"]))
    return KvnState(basis, amp, Lambda)
