"""Matrix-level emulation of QSVT Hamiltonian simulation plus error budgets.

One step applies the truncated Jacobi-Anger polynomial

    cos(x tau) ~ J_0(tau) + 2 sum_{k=1}^R (-1)^k J_{2k}(tau) T_{2k}(x)
    sin(x tau) ~ 2 sum_{k=0}^R (-1)^k J_{2k+1}(tau) T_{2k+1}(x)

to ``x = H / alpha`` so that ``P_cos - i P_sin ~ exp(-i H tau / alpha)``.
Both parities come out of a single Chebyshev sweep with ``2R + 1``
operator applications.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, ContractError, DivergenceError, SpectralLeakError
from .kvn_hamiltonian import SparseHamiltonian, spectral_norm_estimate
from .kvn_state import KvnState, decode_with_residual

LEAK_SLACK = 1e-9
COLLAPSE_NORM = 1e-6


# --- Bessel functions -------------------------------------------------------------

def bessel_j(n_max: int, x: float) -> np.ndarray:
    """``J_0(x) .. J_{n_max}(x)`` by Miller backward recurrence.

    The unnormalised recurrence ``J_{k-1} = (2k/x) J_k - J_{k+1}`` is run down
    from well above ``max(n_max, |x|)`` and normalised with
    ``J_0 + 2 sum J_{2k} = 1``.  Negative ``x`` uses ``J_n(-x) = (-1)^n J_n(x)``.
    """
    if not math.isfinite(x):
        raise ConfigurationError(f"Bessel argument must be finite, got {x}")
    if n_max < 0:
        raise ConfigurationError("n_max must be non-negative")
    out = np.zeros(n_max + 1)
    if x == 0:
        out[0] = 1.0
        return out
    ax = abs(x)
    top = int(max(n_max, ax) + 30 + 2 * math.sqrt(40 * max(n_max, ax)))
    top += top % 2
    vals = np.zeros(top + 2)
    vals[top] = 1e-300
    for k in range(top, 0, -1):
        vals[k - 1] = (2.0 * k / ax) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1:] *= 1e-250
    norm = vals[0] + 2.0 * vals[2:top + 1:2].sum()
    out[:] = vals[:n_max + 1] / norm
    if x < 0:
        out[1::2] *= -1
    return out


# --- plans ------------------------------------------------------------------------

@dataclass(frozen=True)
class QsvtPlan:
    """Jacobi-Anger coefficients for one step of normalised time ``tau``."""

    tau: float
    R: int
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    alpha: float | None = None

    @property
    def degree(self) -> int:
        return 2 * self.R + 1

    def chebyshev_series(self) -> np.ndarray:
        """Complex coefficients of ``T_0..T_{2R+1}`` in ``P_cos - i P_sin``."""
        c = np.zeros(2 * self.R + 2, dtype=complex)
        c[0::2] = self.cos_coeffs
        c[1::2] = -1j * self.sin_coeffs
        return c

    def cos_poly(self, x) -> np.ndarray:
        return np.polynomial.chebyshev.chebval(x, _interleave(self.cos_coeffs, even=True))

    def sin_poly(self, x) -> np.ndarray:
        return np.polynomial.chebyshev.chebval(x, _interleave(self.sin_coeffs, even=False))

    def __call__(self, x) -> np.ndarray:
        return self.cos_poly(x) - 1j * self.sin_poly(x)


def _interleave(coeffs: np.ndarray, even: bool) -> np.ndarray:
    out = np.zeros(2 * len(coeffs))
    if even:
        out[0::2] = coeffs
    else:
        out[1::2] = coeffs
    return out


def jacobi_anger_coefficients(tau: float, R: int, alpha: float | None = None) -> QsvtPlan:
    if R < 0:
        raise ConfigurationError(f"truncation index R must be >= 0, got {R}")
    if not math.isfinite(tau):
        raise ConfigurationError(f"tau must be finite, got {tau}")
    J = bessel_j(2 * R + 1, tau)
    k = np.arange(R + 1)
    sign = (-1.0) ** k
    cos_c = 2.0 * sign * J[0::2]
    cos_c[0] = J[0]
    sin_c = 2.0 * sign * J[1::2]
    return QsvtPlan(float(tau), int(R), cos_c, sin_c, alpha)


# --- application ------------------------------------------------------------------

def _as_operator(H):
    if isinstance(H, SparseHamiltonian):
        return H.matrix
    if sp.issparse(H):
        return H.tocsr()
    return np.asarray(H)


def _spectral(H) -> float:
    if isinstance(H, SparseHamiltonian):
        return H.alpha_spec
    return spectral_norm_estimate(sp.csc_matrix(_as_operator(H)))


def check_normalization(H, alpha: float) -> None:
    spec = _spectral(H)
    if alpha < spec * (1 - LEAK_SLACK):
        raise SpectralLeakError(
            f"normalisation alpha={alpha:.6g} is below the spectral norm {spec:.6g}")


class _Counter:
    """Operator wrapper that counts applications."""

    def __init__(self, op):
        self.op = op
        self.calls = 0

    def __matmul__(self, v):
        self.calls += 1
        return self.op @ v


def chebyshev_sweep(op, alpha: float, psi: np.ndarray, plan: QsvtPlan) -> np.ndarray:
    """``(P_cos - i P_sin)(op/alpha) psi`` by the three-term recurrence."""
    c = plan.chebyshev_series()
    t_prev = np.asarray(psi, dtype=complex)
    acc = c[0] * t_prev
    t_cur = (op @ t_prev) / alpha
    acc = acc + c[1] * t_cur
    for k in range(2, len(c)):
        t_next = 2.0 * (op @ t_cur) / alpha - t_prev
        acc = acc + c[k] * t_next
        t_prev, t_cur = t_cur, t_next
    return acc


def chebyshev_apply(H, alpha: float, psi, plan: QsvtPlan, check: bool = True):
    """One QSVT step on a :class:`KvnState` or amplitude array."""
    if check:
        check_normalization(H, alpha)
    if plan.alpha is not None and not math.isclose(plan.alpha, alpha, rel_tol=1e-12):
        raise ContractError(f"plan built for alpha={plan.alpha}, applied with {alpha}")
    state = psi if isinstance(psi, KvnState) else None
    vec = state.amplitudes if state is not None else np.asarray(psi, dtype=complex)
    out = chebyshev_sweep(_as_operator(H), alpha, vec, plan)
    return state.with_amplitudes(out) if state is not None else out


@dataclass
class QsvtTrajectory:
    """Per-step record of an evolution; index 0 is the initial state."""

    times: np.ndarray
    norms: np.ndarray
    budget: np.ndarray
    decoded: np.ndarray | None
    imag_residual: np.ndarray | None
    final: KvnState
    states: list = field(default_factory=list)
    matvecs: int = 0
    alpha: float = 0.0
    tau: float = 0.0


def evolve_qsvt(H, psi0: KvnState, steps: int, tau: float, R: int, alpha: float | None = None,
                renormalize: bool = True, keep_states: bool = False,
                decode_every: int = 1, final_time: float | None = None) -> QsvtTrajectory:
    """Repeat QSVT steps; each advances real time by ``tau / alpha``.

    ``alpha`` defaults to the Frobenius norm of ``H``.  With ``final_time``
    the step count follows from it and a final partial step rescales ``tau``.
    ``norms`` holds the state norm before any renormalisation.
    """
    from .kvn_hamiltonian import frobenius_norm

    if steps < 0:
        raise ConfigurationError("steps must be non-negative")
    if alpha is None:
        alpha = frobenius_norm(H if isinstance(H, SparseHamiltonian) else sp.csc_matrix(H))
    dt = tau / alpha if alpha else 0.0
    step_taus = [tau] * steps
    if final_time is not None:
        n_full = int(math.floor(final_time / dt + 1e-12)) if dt else 0
        step_taus = [tau] * n_full
        rest = final_time - n_full * dt
        if rest > 1e-12 * max(final_time, 1.0):
            step_taus.append(rest * alpha)
    if alpha > 0 and step_taus:
        check_normalization(H, alpha)
    op = _Counter(_as_operator(H))
    plans = {}
    psi = psi0.amplitudes.copy()
    times, norms, budget = [0.0], [float(np.linalg.norm(psi))], [0.0]
    decoded, resid, states = [], [], []

    def record(vec):
        if keep_states:
            states.append(psi0.with_amplitudes(vec.copy()))
        if decode_every and (len(times) - 1) % decode_every == 0:
            x, r = decode_with_residual(psi0.with_amplitudes(vec))
            decoded.append(x)
            resid.append(r)

    record(psi)
    t = 0.0
    for n, tk in enumerate(step_taus, start=1):
        if tk not in plans:
            plans[tk] = jacobi_anger_coefficients(tk, R)
        psi = chebyshev_sweep(op, alpha, psi, plans[tk]) if alpha else psi
        nrm = float(np.linalg.norm(psi))
        if not math.isfinite(nrm):
            raise DivergenceError(f"non-finite state at QSVT step {n}", step=n)
        if renormalize:
            psi = psi / nrm
        elif nrm < COLLAPSE_NORM:
            raise DivergenceError(f"state norm collapsed to {nrm:.2e} at step {n}", step=n)
        t += tk / alpha if alpha else 0.0
        times.append(t)
        norms.append(nrm)
        budget.append(budget[-1] + qsvt_error_bound(alpha, tk / alpha, R) if alpha else 0.0)
        record(psi)
    return QsvtTrajectory(
        times=np.array(times), norms=np.array(norms), budget=np.array(budget),
        decoded=np.array(decoded) if decoded else None,
        imag_residual=np.array(resid) if resid else None,
        final=psi0.with_amplitudes(psi), states=states, matvecs=op.calls,
        alpha=float(alpha), tau=float(tau))


# --- error and stability budgets ------------------------------------------------

def qsvt_error_bound(alpha: float, T: float, R: int) -> float:
    """Jacobi-Anger truncation bound for ``exp(-iHT)`` with ``||H|| <= alpha``."""
    z = math.e * abs(alpha * T)
    return (1.25 * (z / (4 * (R + 1))) ** (2 * R + 2)
            + 1.25 * (z / (2 * (2 * R + 3))) ** (2 * R + 3))


def analytic_alpha(C: float, Nx: int, c: int, m: int) -> float:
    """Worst-case normalisation ``2^{3/2} 3 C Nx c m^{5/2}``."""
    return 2 ** 1.5 * 3 * C * Nx * c * m ** 2.5


def lambda_floor(C: float, Nx: int, c: int, T: float, m: int) -> float:
    return 2 ** -0.5 * 27 * (C * Nx) ** 2 * c * T * m ** 3


@dataclass(frozen=True)
class TruncationBound:
    value: float
    floor: float | None
    valid: bool | None  # None when the floor could not be evaluated


def kvn_truncation_bound(C: float, Nx: int, Lambda: float, m: int,
                         c: int | None = None, T: float | None = None) -> TruncationBound:
    """``(C Nx / Lambda)^q + 2 / (6^q q!)`` with ``q = ceil((m-1)/3)``.

    The big-O constant is taken as 1.  When ``c`` and ``T`` are given the
    rescale floor is checked and reported; the value is returned either way.
    """
    q = math.ceil((m - 1) / 3)
    value = (C * Nx / Lambda) ** q + 2.0 / (6 ** q * math.factorial(q))
    floor = valid = None
    if c is not None and T is not None:
        floor = lambda_floor(C, Nx, c, T, m)
        valid = Lambda >= floor
    return TruncationBound(value, floor, valid)


@dataclass(frozen=True)
class StabilityReport:
    satisfied: bool
    margin: float
    binding_term: str
    lhs: float
    kvn_limit: float
    qsvt_limit: float


def stability_check(C: float, c: int, m: int, Lambda: float, R: int, Nx: int,
                    T: float) -> StabilityReport:
    """``Nx T < min(kvn_limit, qsvt_limit)``; ``margin`` is ``limit / (Nx T)``."""
    kvn = math.sqrt(2) * Lambda / (27 * C ** 2 * Nx * c * m ** 3)
    qsvt = math.sqrt(2) * (R + 1) / (3 * math.e * C * c * m ** 2.5)
    limit = min(kvn, qsvt)
    lhs = Nx * T
    margin = math.inf if lhs == 0 else limit / lhs
    return StabilityReport(lhs < limit, margin, "kvn" if kvn <= qsvt else "qsvt", lhs, kvn, qsvt)


@dataclass(frozen=True)
class ErrorBudget:
    C: float
    c: int
    d: int
    m: int
    Lambda: float
    Nx: int
    T: float
    R: int

    def __post_init__(self):
        for name in ("C", "c", "d", "m", "Lambda", "Nx", "R"):
            if getattr(self, name) <= 0 and name != "R":
                raise ConfigurationError(f"{name} must be positive")

    @property
    def kvn(self) -> TruncationBound:
        return kvn_truncation_bound(self.C, self.Nx, self.Lambda, self.m, self.c, self.T)

    @property
    def qsvt(self) -> float:
        return qsvt_error_bound(analytic_alpha(self.C, self.Nx, self.c, self.m), self.T, self.R)

    @property
    def stability(self) -> StabilityReport:
        return stability_check(self.C, self.c, self.m, self.Lambda, self.R, self.Nx, self.T)
