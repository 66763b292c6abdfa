"""Case drivers: plasma oscillation, advection sweeps and the Kelvin-Helmholtz run.

Every driver takes an :class:`ExperimentConfig` and returns
:class:`Artifacts` (CSV tables, scalar metrics and a text report);
:func:`emit` writes them to disk.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (extract_period, growth_rate_fit, l2_deviation,
                       linear_stability_growth_rate, relative_error)
from .config import ExperimentConfig, dump_config
from .emhd_model import FieldGrid, GridSpec, OdeSystem, PhysicalParams, build_system, transform_fields
from .errors import ConfigurationError, DecodeError, DivergenceError, KvnError
from .kvn_hamiltonian import SparseHamiltonian, assemble, frobenius_norm, save_matrix_market
from .kvn_state import encode
from .qsvt_engine import evolve_qsvt, qsvt_error_bound, stability_check
from .reference_solvers import ExpmConfig, expm_trajectory, harmonic_solution, rk4_integrate

SQRT2 = math.sqrt(2.0)


@dataclass
class Artifacts:
    case: str
    config: ExperimentConfig
    tables: dict = field(default_factory=dict)   # name -> (header, rows)
    metrics: dict = field(default_factory=dict)
    report: list = field(default_factory=list)
    operators: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def table(self, name: str, header: list[str]) -> list:
        if name not in self.tables:
            self.tables[name] = (header, [])
        return self.tables[name][1]


@dataclass
class EngineRun:
    """Decoded trajectories of one (grid, m) configuration."""

    sys: OdeSystem
    H: SparseHamiltonian | None
    alpha: float
    x0: np.ndarray
    times: dict = field(default_factory=dict)     # engine -> (T,)
    decoded: dict = field(default_factory=dict)   # engine -> (T, N)
    norms: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)


# --- set-up -----------------------------------------------------------------------

def make_grid(cfg: ExperimentConfig, nx: int) -> GridSpec:
    if cfg.dim == 1:
        return GridSpec((nx,), (cfg.dx,))
    return GridSpec((nx, cfg.ny), (cfg.dx, cfg.dy))


def make_params(cfg: ExperimentConfig) -> PhysicalParams:
    return PhysicalParams.from_plasma_frequency(cfg.omega_p, density=cfg.density)


def initial_state(cfg: ExperimentConfig, grid: GridSpec, params: PhysicalParams,
                  perturbed: bool = True) -> np.ndarray:
    """Transformed initial vector on the centred grid ``[-L/2, L/2)``."""
    coords = grid.coordinates(centered=True)
    X = coords[0]
    if cfg.initial == "uniform":
        u, E, B = {1: cfg.u_init}, {1: cfg.e_init}, {}
    elif cfg.initial == "sine":
        k = 2 * math.pi * cfg.wave_cycles / (grid.shape[0] * grid.spacing[0])
        u, E, B = {1: cfg.u_init * np.sin(k * X)}, {1: cfg.e_init}, {}
    else:
        Y = coords[1]
        inside = np.abs(Y) <= cfg.shear_halfwidth * grid.spacing[1] + 1e-12
        pert = cfg.eps * np.sin(cfg.kx * X + cfg.ky * Y) if perturbed else 0.0
        u = {1: np.where(inside, cfg.u0 + pert, -cfg.u0), 2: 0.0}
        E, B = {1: 0.0, 2: 0.0}, {3: cfg.b0}
    return transform_fields(u, E, B, params, grid).to_vector()


def rk4_at_times(sys: OdeSystem, x0: np.ndarray, times: np.ndarray, dt: float) -> np.ndarray:
    """RK4 sampled at ``times``; each gap uses equal substeps no longer than ``dt``."""
    out = [np.asarray(x0, dtype=float)]
    x = out[0]
    for t0, t1 in zip(times[:-1], times[1:]):
        n = max(1, int(math.ceil((t1 - t0) / dt - 1e-9)))
        x = rk4_integrate(sys, x, (t1 - t0) / n, n, record_every=n, eta_hint=0.0)[-1]
        out.append(x)
    return np.array(out)


def run_engines(cfg: ExperimentConfig, grid: GridSpec, m: int, nt: int,
                t_ref: float | None = None, x0=None, horizon_cap: float | None = None,
                artifacts: Artifacts | None = None, tag: str = "") -> EngineRun:
    """Run the configured engines for one grid and truncation order.

    QSVT advances ``tau / alpha`` per step.  The references are sampled on
    a uniform grid ending at ``t_ref`` (default: the QSVT horizon) with as
    many samples as the QSVT record.  An engine that diverges or loses
    its vacuum amplitude is dropped and recorded as ``failed_<engine>``;
    the run raises only when every engine fails.
    """
    params = make_params(cfg)
    sys = build_system(grid, params)
    if x0 is None:
        x0 = initial_state(cfg, grid, params)
    kvn = {"kvn-qsvt", "kvn-expm"} & set(cfg.engines)
    run = EngineRun(sys, None, 0.0, x0)
    tick = time.perf_counter()
    if kvn:
        run.H = assemble(sys, m, cfg.Lambda, capacity_bytes=cfg.capacity_mb * 2**20)
        run.alpha = frobenius_norm(run.H) if cfg.alpha_norm == "frobenius" else run.H.alpha_spec
    dt_step = cfg.tau / run.alpha if run.alpha else 0.0
    steps = nt
    if horizon_cap is not None and dt_step:
        steps = min(nt, int(math.ceil(horizon_cap / dt_step - 1e-9)))
    t_qsvt = steps * dt_step
    if t_ref is None or t_ref <= 0:
        t_ref = t_qsvt if t_qsvt > 0 else (horizon_cap or 0.0)
    n_samples = steps // cfg.sample_every + 1 if "kvn-qsvt" in cfg.engines else \
        (cfg.expm_samples or 201)
    ref_times = np.linspace(0.0, t_ref, max(n_samples, 2))

    failures = {}

    def attempt(engine, fn):
        if engine not in cfg.engines:
            return
        try:
            fn()
        except (DivergenceError, DecodeError) as exc:
            failures[engine] = exc
            for store in (run.times, run.decoded, run.norms, run.budget):
                store.pop(engine, None)

    def qsvt():
        psi0 = encode(x0, cfg.Lambda, run.H.basis)
        tr = evolve_qsvt(run.H, psi0, steps, cfg.tau, cfg.R, alpha=run.alpha,
                         renormalize=cfg.renormalize, decode_every=cfg.sample_every)
        run.times["kvn-qsvt"] = tr.times[::cfg.sample_every]
        run.decoded["kvn-qsvt"] = tr.decoded
        run.norms["kvn-qsvt"] = tr.norms[::cfg.sample_every]
        run.budget["kvn-qsvt"] = tr.budget[::cfg.sample_every]

    def expm():
        psi0 = encode(x0, cfg.Lambda, run.H.basis)
        ecfg = ExpmConfig(method=cfg.expm_method, krylov_dim=cfg.krylov_dim, tol=cfg.expm_tol)
        amps = expm_trajectory(run.H, psi0, ref_times, ecfg, rows=slice(0, sys.N + 1))
        ratio = amps[:, 1:] / amps[:, :1]
        run.times["kvn-expm"] = ref_times
        run.decoded["kvn-expm"] = ratio.real / (SQRT2 * cfg.Lambda)
        run.norms["kvn-expm"] = np.ones(ref_times.size)
        run.budget["kvn-expm"] = np.zeros(ref_times.size)

    def rk4():
        run.times["classical-rk4"] = ref_times
        run.decoded["classical-rk4"] = rk4_at_times(sys, x0, ref_times, cfg.rk4_dt)
        run.norms["classical-rk4"] = np.ones(ref_times.size)
        run.budget["classical-rk4"] = np.zeros(ref_times.size)

    attempt("kvn-qsvt", qsvt)
    attempt("kvn-expm", expm)
    attempt("classical-rk4", rk4)
    if failures and not run.decoded:
        raise DivergenceError("; ".join(f"{e}: {exc}" for e, exc in failures.items()))
    if artifacts is not None:
        artifacts.timing[f"engines{tag}"] = time.perf_counter() - tick
        if run.H is not None:
            artifacts.operators[tag or "op"] = run.H
            artifacts.metrics[f"dimension{tag}"] = run.H.dimension
            artifacts.metrics[f"nnz{tag}"] = run.H.nnz
            artifacts.metrics[f"alpha{tag}"] = run.alpha
            if "kvn-qsvt" in cfg.engines:
                artifacts.metrics[f"qsvt_steps{tag}"] = steps
                artifacts.metrics[f"qsvt_horizon{tag}"] = t_qsvt
                artifacts.metrics[f"qsvt_step_bound{tag}"] = qsvt_error_bound(
                    run.alpha, dt_step, cfg.R)
        for eng, exc in failures.items():
            artifacts.metrics[f"failed_{eng}{tag}"] = str(exc)
            artifacts.report.append(f"{eng}{tag} failed: {exc}")
        for eng in run.decoded:
            _trajectory_table(artifacts, run, eng, tag)
    return run


def _trajectory_table(art: Artifacts, run: EngineRun, engine: str, tag: str) -> None:
    N = run.sys.N
    rows = art.table(f"trajectory_{engine}{tag}",
                     ["step", "t", "norm", "budget"] + [f"x{j}" for j in range(N)])
    for k, t in enumerate(run.times[engine]):
        rows.append([k, t, run.norms[engine][k], run.budget[engine][k], *run.decoded[engine][k]])


# --- case drivers ---------------------------------------------------------------------

def run_case_a(cfg: ExperimentConfig) -> Artifacts:
    """Linear plasma oscillation: period and error against the harmonic solution."""
    art = Artifacts("a", cfg)
    nx, m, nt = cfg.sweep[0]
    grid = make_grid(cfg, nx)
    params = make_params(cfg)
    run = run_engines(cfg, grid, m, nt, artifacts=art)
    probe = nx // 2  # x = 0 on the centred grid
    omega = cfg.omega_p
    exact_period = 2 * math.pi / abs(omega) if omega else math.inf
    x0 = run.x0
    rows = art.table("probe", ["engine", "t", "u", "E", "u_exact", "E_exact"])
    for eng, traj in run.decoded.items():
        t = run.times[eng]
        u_ex, e_ex = harmonic_solution(x0[:nx][None, :], x0[nx:][None, :], omega, t[:, None])
        exact = np.hstack([u_ex, e_ex])
        for k in range(t.size):
            rows.append([eng, t[k], traj[k, probe], traj[k, nx + probe],
                         exact[k, probe], exact[k, nx + probe]])
        err = relative_error(traj, exact)
        art.metrics[f"relative_error_{eng}"] = err
        dt = t[1] - t[0] if t.size > 1 else 0.0
        try:
            period = extract_period(traj[:, probe], dt)
        except KvnError:
            period = float("nan")
        art.metrics[f"period_{eng}"] = period
        art.report.append(f"{eng}: period {period:.4f} (exact {exact_period:.4f}), "
                          f"max relative error {err:.3e}")
    art.metrics["exact_period"] = exact_period
    horizon = max(t[-1] for t in run.times.values()) if run.times else 0.0
    art.metrics["horizon"] = horizon
    art.metrics["periods_covered"] = horizon / exact_period if exact_period else 0.0
    if run.H is not None:
        art.metrics["spectral_norm"] = run.H.alpha_spec
        art.metrics["frobenius_norm"] = frobenius_norm(run.H)
        C = run.sys.max_coupling() / nx
        rep = stability_check(C, run.sys.c, max(m, 1), cfg.Lambda, cfg.R, nx,
                              cfg.tau / run.alpha)
        art.metrics["stability_satisfied"] = rep.satisfied
        art.metrics["stability_binding"] = rep.binding_term
        art.report.insert(0, f"alpha = {run.alpha:.6g} ({cfg.alpha_norm}); spectral norm "
                             f"{run.H.alpha_spec:.6g}; step dt = {cfg.tau / run.alpha:.6g}")
    art.report.append(f"horizon {horizon:.4g} covers {art.metrics['periods_covered']:.3f} periods")
    return art


def _delta_sweep(cfg: ExperimentConfig, case: str, label: str) -> Artifacts:
    art = Artifacts(case, cfg)
    rows = art.table("deltas", [label, "engine", "t", "delta"])
    for nx, m, nt in cfg.sweep:
        value = m if label == "m" else nx
        tag = f"_{label}{value}"
        grid = make_grid(cfg, nx)
        t_ref = cfg.t_end if cfg.t_end > 0 else None
        run = run_engines(cfg, grid, m, nt, t_ref=t_ref, artifacts=art, tag=tag)
        for eng, traj in run.decoded.items():
            d = l2_deviation(traj)
            for t, v in zip(run.times[eng], d):
                rows.append([value, eng, t, v])
            art.metrics[f"delta_final_{eng}{tag}"] = float(d[-1])
            art.metrics[f"t_final_{eng}{tag}"] = float(run.times[eng][-1])
            art.metrics[f"delta_mean_{eng}{tag}"] = float(d.mean())
        line = [f"{label}={value}: alpha {run.alpha:.5g}, QSVT horizon "
                f"{art.metrics.get(f'qsvt_horizon{tag}', 0):.4g}"]
        for eng in run.decoded:
            line.append(f"{eng} final delta {art.metrics[f'delta_final_{eng}{tag}']:.4e}")
        art.report.append("; ".join(line))
    return art


def run_case_b(cfg: ExperimentConfig) -> Artifacts:
    """Advection with a sweep over the truncation order."""
    return _delta_sweep(cfg, "b", "m")


def run_case_c(cfg: ExperimentConfig) -> Artifacts:
    """Advection with a sweep over the grid size."""
    return _delta_sweep(cfg, "c", "nx")


def vorticity(u1: np.ndarray, u2: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Central-difference ``d u2/dx - d u1/dy`` on the periodic grid."""
    dx, dy = grid.spacing
    du2 = (np.roll(u2, -1, axis=0) - np.roll(u2, 1, axis=0)) / (2 * dx)
    du1 = (np.roll(u1, -1, axis=1) - np.roll(u1, 1, axis=1)) / (2 * dy)
    return du2 - du1


def shear_localization(u1, u2, u1_0, u2_0, grid: GridSpec, halfwidth: int) -> tuple[float, float]:
    """Row profile of perturbation vorticity: ``(boundary share, peak distance)``.

    The boundary share is the fraction of mean absolute vorticity carried
    by rows within one cell of the shear interfaces; the peak distance is
    how far (in cells) the two strongest rows sit from the interfaces.
    """
    w = np.abs(vorticity(u1 - u1_0, u2 - u2_0, grid))
    profile = w.mean(axis=0)
    y = grid.coordinates()[1][0] / grid.spacing[1]
    edges = np.array([-(halfwidth + 0.5), halfwidth + 0.5])
    dist = np.min(np.abs(y[:, None] - edges[None, :]), axis=1)
    near = dist <= 1.0
    share = float(profile[near].sum() / profile.sum()) if profile.sum() else 0.0
    top = np.argsort(profile)[-2:]
    return share, float(dist[top].max())


def run_case_d(cfg: ExperimentConfig) -> Artifacts:
    """Kelvin-Helmholtz shear layer: growth of the u2 perturbation."""
    art = Artifacts("d", cfg)
    nx, m, nt = cfg.sweep[0]
    grid = make_grid(cfg, nx)
    params = make_params(cfg)
    sys = build_system(grid, params)
    background = initial_state(cfg, grid, params, perturbed=False)
    tick = time.perf_counter()
    mode = linear_stability_growth_rate(sys, background)
    art.timing["eigen"] = time.perf_counter() - tick
    t_e = mode.time_scale
    art.metrics["gamma_eigen"] = mode.gamma
    art.metrics["eigen_imag"] = mode.eigenvalue.imag
    art.metrics["t_eigen"] = t_e
    cap = cfg.t_end_eigen * t_e if cfg.t_end_eigen > 0 else None
    run = run_engines(cfg, grid, m, nt, horizon_cap=cap, artifacts=art)
    P = grid.n_points
    u2_0 = run.x0[P:2 * P]
    u1_0 = run.x0[:P]
    lo, hi = (f * t_e for f in cfg.fit_window)
    art.metrics["fit_window_lo"] = lo
    art.metrics["fit_window_hi"] = hi
    pert_rows = art.table("perturbation", ["engine", "t", "max_du2"])
    snap_rows = art.table("snapshots", ["engine", "fraction", "t", "x", "y", "u1", "u2"])
    X, Y = grid.coordinates()
    for eng, traj in run.decoded.items():
        t = run.times[eng]
        series = np.abs(traj[:, P:2 * P] - u2_0).max(axis=1)
        for tk, v in zip(t, series):
            pert_rows.append([eng, tk, v])
        try:
            fit = growth_rate_fit(series, t[1] - t[0], (lo, hi))
            art.metrics[f"gamma_fit_{eng}"] = fit.gamma
            art.metrics[f"fit_residual_{eng}"] = fit.residual
            ratio = fit.gamma / mode.gamma if mode.gamma else math.nan
            art.metrics[f"gamma_ratio_{eng}"] = ratio
            art.report.append(f"{eng}: fitted growth {fit.gamma:.4g} on [{lo:.3g}, {hi:.3g}] "
                              f"vs eigen {mode.gamma:.4g} (ratio {ratio:.3f}, "
                              f"log residual {fit.residual:.3g})")
        except KvnError as exc:
            art.metrics[f"gamma_fit_{eng}"] = math.nan
            art.report.append(f"{eng}: growth fit failed: {exc}")
        for frac in cfg.snapshots:
            k = int(np.argmin(np.abs(t - frac * t_e)))
            fg = FieldGrid.from_vector(traj[k], grid)
            for idx in np.ndindex(grid.shape):
                snap_rows.append([eng, frac, t[k], X[idx], Y[idx], fg["u1"][idx], fg["u2"][idx]])
            if frac > 0:
                share, dist = shear_localization(fg["u1"], fg["u2"], u1_0.reshape(grid.shape),
                                                 u2_0.reshape(grid.shape), grid,
                                                 cfg.shear_halfwidth)
                art.metrics[f"boundary_share_{eng}_{frac:g}"] = share
                art.metrics[f"peak_distance_{eng}_{frac:g}"] = dist
    if "classical-rk4" in run.decoded:
        # perturbation measured against the unperturbed flow, as a diagnostic
        t = run.times["classical-rk4"]
        base = rk4_at_times(sys, background, t, cfg.rk4_dt)
        diff = np.abs(run.decoded["classical-rk4"][:, P:2 * P] - base[:, P:2 * P]).max(axis=1)
        try:
            fit = growth_rate_fit(diff, t[1] - t[0], (lo, hi))
            art.metrics["gamma_fit_rk4_vs_background"] = fit.gamma
        except KvnError:
            art.metrics["gamma_fit_rk4_vs_background"] = math.nan
    art.report.insert(0, f"eigen growth rate {mode.gamma:.5g}, eigenvalue {mode.eigenvalue:.5g}, "
                         f"time scale {t_e:.4g}")
    return art


CASES = {"a": run_case_a, "b": run_case_b, "c": run_case_c, "d": run_case_d}


def run_case(cfg: ExperimentConfig) -> Artifacts:
    if cfg.case not in CASES:
        raise ConfigurationError(f"unknown case {cfg.case!r}")
    tick = time.perf_counter()
    art = CASES[cfg.case](cfg)
    art.timing["total"] = time.perf_counter() - tick
    return art


# --- output ---------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def emit(art: Artifacts, out_dir: str | Path, dump_operator: bool = False,
         deterministic: bool = False) -> list[Path]:
    """Write CSV tables, metrics, the report and a manifest; returns the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []

    def write(path: Path, fn):
        try:
            with open(path, "w", newline="") as fh:
                fn(fh)
        except OSError as exc:
            raise OSError(f"failed writing {path}: {exc}") from exc
        written.append(path)

    for name, (header, rows) in sorted(art.tables.items()):
        def body(fh, header=header, rows=rows):
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_cell(v) for v in r])
        write(out / f"{name}.csv", body)

    def metrics(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in art.metrics.items():
            w.writerow([k, _cell(v)])
    write(out / "metrics.csv", metrics)
    write(out / "report.txt", lambda fh: fh.write(
        f"case {art.case}\n" + "\n".join(art.report) + "\n"))
    comments = {"code_version": __version__}
    if not deterministic:
        comments.update({f"time_{k}_s": f"{v:.3f}" for k, v in art.timing.items()})
    write(out / "manifest.cfg", lambda fh: fh.write(dump_config(art.config, comments)))
    if dump_operator:
        for tag, H in art.operators.items():
            path = out / f"operator{tag if tag != 'op' else ''}.mtx"
            save_matrix_market(H, path)
            written.append(path)
    return written
