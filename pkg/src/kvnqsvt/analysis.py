"""Trajectory metrics: norm deviation, oscillation period and growth rates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .emhd_model import OdeSystem, jacobian
from .errors import ContractError, EstimationError, MeasurementError

RESIDUAL_FLAG = 0.05


def l2_deviation(traj) -> np.ndarray:
    """``|‖x(t)‖ - ‖x(0)‖|`` for a ``(steps, N)`` array of decoded vectors."""
    traj = np.asarray(traj, dtype=float)
    if traj.ndim != 2 or traj.shape[0] == 0:
        raise ContractError("trajectory must be a non-empty (steps, N) array")
    norms = np.linalg.norm(traj, axis=1)
    return np.abs(norms - norms[0])


def zero_crossings(series, dt: float, t0: float = 0.0) -> np.ndarray:
    """Linearly interpolated times at which the series changes sign."""
    y = np.asarray(series, dtype=float)
    t = t0 + dt * np.arange(y.size)
    s = np.sign(y)
    hits = []
    for k in range(y.size - 1):
        if s[k] == 0:
            if not hits or hits[-1] != t[k]:
                hits.append(t[k])
        elif s[k] * s[k + 1] < 0:
            hits.append(t[k] - y[k] * (t[k + 1] - t[k]) / (y[k + 1] - y[k]))
    return np.array(hits)


def extract_period(series, dt: float) -> float:
    """Twice the mean spacing of interpolated zero crossings (both directions)."""
    z = zero_crossings(series, dt)
    if z.size < 3:
        raise MeasurementError(f"need at least 3 zero crossings, found {z.size}")
    return float(2.0 * (z[-1] - z[0]) / (z.size - 1))


@dataclass(frozen=True)
class GrowthFit:
    gamma: float
    intercept: float
    residual: float
    window: tuple[float, float]

    @property
    def flagged(self) -> bool:
        """Large log-residual: the series is not exponential on the window."""
        return self.residual > RESIDUAL_FLAG


def growth_rate_fit(series, dt: float, window: tuple[float, float] | None = None,
                    t0: float = 0.0) -> GrowthFit:
    """Least-squares slope of ``log(series)`` over ``window`` (inclusive, in time)."""
    y = np.asarray(series, dtype=float)
    t = t0 + dt * np.arange(y.size)
    lo, hi = window if window is not None else (t[0], t[-1])
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    if sel.sum() < 2:
        raise MeasurementError(f"window {lo, hi} holds fewer than two samples")
    ys = y[sel]
    if np.any(ys <= 0) or not np.all(np.isfinite(ys)):
        raise MeasurementError("growth fit needs strictly positive finite values on the window")
    ts = t[sel]
    A = np.vstack([ts, np.ones_like(ts)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(ys), rcond=None)
    resid = np.log(ys) - A @ coef
    return GrowthFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid ** 2))),
                     (float(lo), float(hi)))


@dataclass(frozen=True)
class StabilityMode:
    gamma: float
    eigenvalue: complex
    eigenvector: np.ndarray

    @property
    def time_scale(self) -> float:
        """``2 pi / |Im lambda|`` when oscillatory, else ``1 / gamma``."""
        if abs(self.eigenvalue.imag) > 1e-9 * max(1.0, abs(self.eigenvalue)):
            return 2 * math.pi / abs(self.eigenvalue.imag)
        return 1.0 / self.gamma if self.gamma > 0 else math.inf


def linear_stability_growth_rate(sys: OdeSystem, x_background) -> StabilityMode:
    """Dominant eigenpair of the analytic Jacobian at ``x_background``."""
    xb = np.asarray(x_background, dtype=float)
    if xb.shape != (sys.N,):
        raise ContractError(f"background of length {xb.size} does not match N={sys.N}")
    J = jacobian(sys, xb)
    try:
        w, V = np.linalg.eig(J)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(J)
        raise EstimationError(f"eigen-solve failed ({exc}); cond(J) = {cond:.3e}") from exc
    k = int(np.argmax(w.real))
    return StabilityMode(float(w[k].real), complex(w[k]), V[:, k])


def relative_error(a, b) -> float:
    """``max |a - b| / max |b|``."""
    a, b = np.asarray(a), np.asarray(b)
    scale = np.abs(b).max()
    return float(np.abs(a - b).max() / scale) if scale else float(np.abs(a).max())
