"""Reference engines: exact exponentiation of the KvN Hamiltonian and classical RK4."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .emhd_model import OdeSystem, classical_rhs
from .errors import ConfigurationError, ContractError, DivergenceError, EstimationError
from .kvn_hamiltonian import SparseHamiltonian
from .kvn_state import KvnState

DENSE_LIMIT = 6000


@dataclass(frozen=True)
class ExpmConfig:
    """``method`` is ``"auto"``, ``"dense"`` or ``"krylov"``."""

    method: str = "auto"
    krylov_dim: int = 30
    tol: float = 1e-10
    dense_limit: int = DENSE_LIMIT
    max_substeps: int = 1_000_000

    def __post_init__(self):
        if self.method not in ("auto", "dense", "krylov"):
            raise ConfigurationError(f"unknown expm method {self.method!r}")
        if self.krylov_dim < 2:
            raise ConfigurationError("krylov_dim must be at least 2")

    def resolve(self, D: int) -> str:
        if self.method == "auto":
            return "dense" if D <= self.dense_limit else "krylov"
        if self.method == "dense" and D > self.dense_limit:
            raise ConfigurationError(
                f"dense exponentiation refused for D={D} > {self.dense_limit}")
        return self.method


def _operator(H):
    if isinstance(H, SparseHamiltonian):
        return H.matrix
    if sp.issparse(H):
        return H.tocsr()
    return np.asarray(H)


def _dense(H) -> np.ndarray:
    op = _operator(H)
    return op.toarray() if sp.issparse(op) else np.asarray(op, dtype=complex)


class DensePropagator:
    """``exp(-iHt)`` from one Hermitian eigendecomposition."""

    def __init__(self, H):
        self.w, self.V = np.linalg.eigh(_dense(H))

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        c = self.V.conj().T @ psi
        return self.V @ (np.exp(-1j * self.w * t) * c)

    def amplitudes(self, psi: np.ndarray, times, rows=None) -> np.ndarray:
        """Amplitudes at each time, optionally only for the selected rows."""
        c = self.V.conj().T @ psi
        Vr = self.V if rows is None else self.V[rows]
        phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), self.w))
        return (phases * c[None, :]) @ Vr.T


def lanczos_expmv(H, psi: np.ndarray, t: float, krylov_dim: int = 30,
                  tol: float = 1e-10, max_substeps: int = 1_000_000) -> np.ndarray:
    """``exp(-iHt) psi`` for Hermitian ``H`` by Lanczos with adaptive time splitting.

    Each substep projects onto a Krylov space of at most ``krylov_dim``
    vectors; the substep is halved until the a posteriori error estimate
    ``beta_k |e_k^T exp(-iTh) e_1|`` falls below ``tol * h / t``.
    """
    op = _operator(H)
    v = np.asarray(psi, dtype=complex).copy()
    if t == 0 or not np.any(v):
        return v
    remaining = float(t)
    sign = 1.0 if t > 0 else -1.0
    remaining = abs(remaining)
    h = remaining
    substeps = 0
    total = abs(float(t))
    while remaining > 0:
        nrm = np.linalg.norm(v)
        Q = np.zeros((v.size, krylov_dim + 1), dtype=complex)
        alpha = np.zeros(krylov_dim)
        beta = np.zeros(krylov_dim)
        Q[:, 0] = v / nrm
        k = krylov_dim
        breakdown = False
        for j in range(krylov_dim):
            w = op @ Q[:, j]
            alpha[j] = np.vdot(Q[:, j], w).real
            w = w - alpha[j] * Q[:, j] - (beta[j - 1] * Q[:, j - 1] if j else 0)
            # full reorthogonalisation keeps the small basis clean
            w -= Q[:, :j + 1] @ (Q[:, :j + 1].conj().T @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] <= 1e-14 * max(1.0, abs(alpha[j])):
                k = j + 1
                breakdown = True
                break
            Q[:, j + 1] = w / beta[j]
        T = np.diag(alpha[:k]) + np.diag(beta[:k - 1], 1) + np.diag(beta[:k - 1], -1)
        h = min(h, remaining)
        while True:
            E = sla.expm(-1j * sign * h * T)
            err = 0.0 if breakdown else beta[k - 1] * abs(E[k - 1, 0]) * nrm
            if err <= tol * h / total or h < 1e-300:
                break
            h *= 0.5
        v = nrm * (Q[:, :k] @ E[:, 0])
        remaining -= h
        substeps += 1
        if substeps > max_substeps:
            raise EstimationError(f"Krylov exponential exceeded {max_substeps} substeps",
                                  lower=err, upper=err)
        if err < 0.1 * tol * h / total:
            h *= 2.0
    return v


def evolve_expm(H, psi0, T: float, cfg: ExpmConfig | None = None):
    """``exp(-iHT) psi0``; accepts and returns a :class:`KvnState` or an array."""
    cfg = cfg or ExpmConfig()
    state = psi0 if isinstance(psi0, KvnState) else None
    psi = np.asarray(state.amplitudes if state is not None else psi0, dtype=complex)
    op = _operator(H)
    if op.shape != (psi.size, psi.size):
        raise ContractError(f"operator {op.shape} does not match state of length {psi.size}")
    if cfg.resolve(psi.size) == "dense":
        out = DensePropagator(H).apply(psi, T)
    else:
        out = lanczos_expmv(op, psi, T, cfg.krylov_dim, cfg.tol, cfg.max_substeps)
    return state.with_amplitudes(out) if state is not None else out


def expm_trajectory(H, psi0, times, cfg: ExpmConfig | None = None, rows=None) -> np.ndarray:
    """Amplitudes of ``exp(-iHt) psi0`` at each of ``times`` (sorted, ``>= 0``).

    ``rows`` restricts the output to selected basis indices, which lets the
    dense path avoid forming full states when only the read-out is needed.
    """
    cfg = cfg or ExpmConfig()
    psi = np.asarray(psi0.amplitudes if isinstance(psi0, KvnState) else psi0, dtype=complex)
    times = np.asarray(times, dtype=float)
    if cfg.resolve(psi.size) == "dense":
        return DensePropagator(H).amplitudes(psi, times, rows)
    op = _operator(H)
    out = []
    t_prev = 0.0
    v = psi
    for t in times:
        v = lanczos_expmv(op, v, t - t_prev, cfg.krylov_dim, cfg.tol, cfg.max_substeps)
        t_prev = t
        out.append(v if rows is None else v[rows])
    return np.array(out)


def rk4_integrate(sys: OdeSystem, x0, dt: float, steps: int, record_every: int = 1,
                  eta_hint: float | None = None) -> np.ndarray:
    """Classic RK4 on :func:`classical_rhs`; returns recorded states including ``x0``."""
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (sys.N,):
        raise ContractError(f"x0 of length {x.size} does not match N={sys.N}")
    rate = eta_hint if eta_hint is not None else sys.max_coupling()
    if dt * rate * max(np.linalg.norm(x), 1.0) > 0.5:
        warnings.warn(f"dt={dt} may be outside the RK4 stability region "
                      f"(dt * rate * |x0| = {dt * rate * np.linalg.norm(x):.3g})",
                      RuntimeWarning, stacklevel=2)
    out = [x.copy()]
    f = lambda v: classical_rhs(sys, v)
    for n in range(1, steps + 1):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"non-finite state at RK4 step {n}", step=n)
        if n % record_every == 0:
            out.append(x.copy())
    return np.array(out)


def harmonic_solution(u0, E0, omega: float, t):
    """Closed form of ``du/dt = w E, dE/dt = -w u``."""
    t = np.asarray(t, dtype=float)
    c, s = np.cos(omega * t), np.sin(omega * t)
    return u0 * c + E0 * s, E0 * c - u0 * s
