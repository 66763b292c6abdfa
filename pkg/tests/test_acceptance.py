"""Acceptance suite: one PASS/FAIL line per criterion.

The lines are collected in ``RESULTS`` and printed in the pytest terminal
summary (see conftest.py); running this file directly prints them too.
Cases B, C and D are full runs and take most of the suite's wall time.
"""

import math
import time

import numpy as np
import pytest

from kvnqsvt.block_encoding import build_oracles, random_sparse_hermitian, verify_block
from kvnqsvt.config import builtin_config, load_config, builtin_config_path
from kvnqsvt.emhd_model import (FieldGrid, GridSpec, PhysicalParams, build_system,
                                discrete_nonlinear_term)
from kvnqsvt.experiments import make_grid, run_case, run_engines
from kvnqsvt.fock_basis import TruncatedFockBasis, compare, dimension, rank
from kvnqsvt.kvn_hamiltonian import assemble, hermiticity_defect, sector_band
from kvnqsvt.qsvt_engine import chebyshev_apply, jacobi_anger_coefficients, qsvt_error_bound
from kvnqsvt.reference_solvers import evolve_expm

RESULTS = []
ROUNDOFF = 1e-13


def report(n, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} [{n}] {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def rows_of(art, name):
    header, rows = art.tables[name]
    return header, np.array([[float(v) for v in r] for r in rows])


@pytest.fixture(scope="module")
def case_b():
    tick = time.perf_counter()
    art = run_case(builtin_config("b"))
    return art, time.perf_counter() - tick


# 1 ------------------------------------------------------------------------------------

def test_criterion_1_case_a():
    tick = time.perf_counter()
    art = run_case(builtin_config("a"))
    elapsed = time.perf_counter() - tick
    M = art.metrics
    spec = M["spectral_norm"]
    checks = {
        "spectral estimate 4.00 +- 1%": abs(spec - 4.0) <= 0.04,
        "period 6.25 +- 0.05": all(abs(M[f"period_{e}"] - 6.25) <= 0.05
                                   for e in ("kvn-qsvt", "kvn-expm")),
        "relative error < 1e-2": all(M[f"relative_error_{e}"] < 1e-2
                                     for e in ("kvn-qsvt", "kvn-expm")),
        ">= 7.9 periods": M["periods_covered"] >= 7.9,
        "runtime < 10 s": elapsed < 10,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = (f"spectral norm {spec:.4f}, Frobenius (alpha used) {M['frobenius_norm']:.4f}; "
              f"period qsvt {M['period_kvn-qsvt']:.4f} expm {M['period_kvn-expm']:.4f} "
              f"(exact {M['exact_period']:.4f}); rel. error qsvt "
              f"{M['relative_error_kvn-qsvt']:.2e} expm {M['relative_error_kvn-expm']:.2e}; "
              f"{M['periods_covered']:.3f} periods; {elapsed:.1f} s")
    if failed:
        detail += "; failed: " + ", ".join(failed)
    report(1, "Case A reproduction", not failed, detail)


# 2 ------------------------------------------------------------------------------------

def test_criterion_2_qsvt_certificate():
    rng = np.random.default_rng(2024)
    tick = time.perf_counter()
    violations, below_floor, worst_excess = 0, 0, 0.0
    for k in range(100):
        dim = int(rng.integers(2, 65))
        R = 2 + k % 7
        A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        H = (A + A.conj().T) / 2
        norm = np.linalg.norm(H, 2)
        alpha = norm * rng.uniform(1.0, 2.0)
        tau = rng.choice([0.5, 1.0, 2.0])
        plan = jacobi_anger_coefficients(tau, R)
        eye = np.eye(dim, dtype=complex)
        P = chebyshev_apply(H, alpha, eye, plan, check=True)
        U = np.column_stack([evolve_expm(H, eye[:, j], tau / alpha) for j in range(dim)])
        err = np.linalg.norm(P - U, 2)
        bound = qsvt_error_bound(alpha, tau / alpha, R)
        # the analytic bound falls below double precision for large R
        violations += err > bound + ROUNDOFF
        below_floor += bound < err <= bound + ROUNDOFF
        worst_excess = max(worst_excess, err - bound)
    elapsed = time.perf_counter() - tick
    report(2, "QSVT vs expm certificate", violations == 0 and elapsed < 60,
           f"{violations} violations in 100 operators (R = 2..8) with a {ROUNDOFF:g} roundoff "
           f"allowance; {below_floor} exceed the bare bound by at most {worst_excess:.1e}; "
           f"{elapsed:.1f} s")


# 3 ------------------------------------------------------------------------------------

def test_criterion_3_case_b_trend(case_b):
    art, elapsed = case_b
    M = art.metrics
    ms = (2, 3, 4)
    expm = [M[f"delta_final_kvn-expm_m{m}"] for m in ms]
    qsvt = [M[f"delta_final_kvn-qsvt_m{m}"] for m in ms]
    t_end = [M[f"t_final_kvn-expm_m{m}"] for m in ms]
    horizons = ", ".join(f"{M['qsvt_horizon_m' + str(m)]:.4g}" for m in ms)
    decreasing = all(b < a for a, b in zip(expm, expm[1:]))
    ok = decreasing and elapsed < 900 and all(abs(t - 100) < 1e-9 for t in t_end)
    report(3, "Case B trend", ok,
           f"expm delta(100) m=2,3,4: {', '.join(f'{v:.4g}' for v in expm)}"
           f" ({'decreasing' if decreasing else 'not decreasing'}); qsvt final: "
           f"{', '.join(f'{v:.4g}' for v in qsvt)} at t = "
           f"{horizons}; largest D "
           f"{M['dimension_m4']}; {elapsed:.0f} s")


# 4 ------------------------------------------------------------------------------------

def test_criterion_4_case_c_trend():
    tick = time.perf_counter()
    art = run_case(builtin_config("c"))
    elapsed = time.perf_counter() - tick
    M = art.metrics
    nxs = (11, 22, 33, 44)
    expm = [M[f"delta_final_kvn-expm_nx{n}"] for n in nxs]
    qsvt = [M[f"delta_final_kvn-qsvt_nx{n}"] for n in nxs]
    decreasing = all(b < a for a, b in zip(expm, expm[1:]))
    downward = qsvt[-1] < qsvt[0]
    horizons = ", ".join(f"{M['qsvt_horizon_nx' + str(n)]:.4g}" for n in nxs)
    ok = decreasing and downward and elapsed < 900
    report(4, "Case C trend", ok,
           f"expm final delta nx=11,22,33,44: {', '.join(f'{v:.4g}' for v in expm)}; "
           f"qsvt: {', '.join(f'{v:.4g}' for v in qsvt)} at t = "
           f"{horizons}; {elapsed:.0f} s")


# 5 ------------------------------------------------------------------------------------

def test_criterion_5_case_d_reduced():
    cfg = load_config(builtin_config_path("d_reduced"))
    assert cfg.nx == [12] and cfg.ny == 12 and cfg.m == [2]
    tick = time.perf_counter()
    art = run_case(cfg)
    elapsed = time.perf_counter() - tick
    M = art.metrics
    engines = [e for e in cfg.engines if f"gamma_fit_{e}" in M]
    failed = {e: M[f"failed_{e}"] for e in cfg.engines if f"failed_{e}" in M}
    ratios = {e: M.get(f"gamma_ratio_{e}", math.nan) for e in engines}
    within = all(abs(r - 1) <= 0.2 for r in ratios.values())
    dist = {e: M.get(f"peak_distance_{e}_1", math.nan) for e in engines}
    localized = all(d <= 1.0 for d in dist.values())
    ok = within and localized and not failed and elapsed < 7200
    report(5, "Case D growth at 12x12", ok,
           f"eigen gamma {M['gamma_eigen']:.4g} (T_e {M['t_eigen']:.4g}); fitted "
           + ", ".join(f"{e} {M['gamma_fit_' + e]:.4g} (ratio {ratios[e]:.3f})" for e in engines)
           + "; vorticity peak distance from y=+-3.5dy at T_e: "
           + ", ".join(f"{e} {dist[e]:.1f}" for e in engines)
           + "".join(f"; {e} failed ({msg})" for e, msg in failed.items())
           + f"; QSVT per-step bound {M.get('qsvt_step_bound', math.nan):.3g}"
           + f"; D {M['dimension']}; {elapsed:.0f} s")


# 6 ------------------------------------------------------------------------------------

def _kvn_vs_rk4(cfg, nx, m, t_end):
    cfg.engines = ["kvn-expm", "classical-rk4"]
    cfg.expm_samples = 101
    run = run_engines(cfg, make_grid(cfg, nx), m, 0, t_ref=t_end)
    diff = np.abs(run.decoded["kvn-expm"] - run.decoded["classical-rk4"]).max()
    return diff / np.abs(run.x0).max()


def test_criterion_6_linearization(case_b):
    a = builtin_config("a")
    period_a = 2 * math.pi / abs(a.omega_p)
    err_a = _kvn_vs_rk4(a, a.nx[0], a.m[0], period_a)
    small = builtin_config("b")
    small.omega_p, small.Lambda = -1.0, 1e4
    err_small = _kvn_vs_rk4(small, 5, 3, 2 * math.pi)

    art, _ = case_b
    dis, mean = [], []
    for m in (2, 3, 4):
        _, e = rows_of(art, f"trajectory_kvn-expm_m{m}")
        _, r = rows_of(art, f"trajectory_classical-rk4_m{m}")
        keep = e[:, 1] <= 10 + 1e-9
        gap = np.linalg.norm(e[keep, 4:] - r[keep, 4:], axis=1)
        dis.append(gap.max())
        mean.append(gap.mean())
    mono = all(b < a_ for a_, b in zip(dis, dis[1:]))
    ok = err_a <= 1e-4 and err_small <= 1e-4 and mono
    report(6, "Linearization oracle", ok,
           f"Lambda=1e4 one-period max error / max|x0|: Case A {err_a:.2e}, nonlinear 1D "
           f"(nx=5, m=3, u amplitude 1) {err_small:.2e}; Lambda=1 Case B t<=10 "
           f"max L2 disagreement m=2,3,4: {', '.join(f'{v:.3e}' for v in dis)} "
           f"(time-mean, diagnostic only: {', '.join(f'{v:.3e}' for v in mean)})")


# 7 ------------------------------------------------------------------------------------

def test_criterion_7_combinatorics():
    import itertools
    bijective = dims_ok = True
    for N in range(1, 7):
        for m in range(0, 5):
            b = TruncatedFockBasis(N, m)
            states = [s for s in itertools.product(range(m + 1), repeat=N) if sum(s) <= m]
            dims_ok &= dimension(N, m) == len(states) == b.dimension
            bijective &= all(b.rank(b.unrank(g)) == g for g in range(b.dimension))
            bijective &= sorted(b.rank(s) for s in states) == list(range(b.dimension))
    rng = np.random.default_rng(7)
    N, m = 8, 6
    b = TruncatedFockBasis(N, m)
    idx = rng.integers(0, b.dimension, size=(100_000, 2))
    occ = b.occupations
    bad = 0
    for i, j in idx:
        c = compare(occ[i], occ[j])
        bad += c != (rank(occ[i]) > rank(occ[j])) - (rank(occ[i]) < rank(occ[j]))
    report(7, "Combinatorics", bijective and dims_ok and bad == 0,
           f"bijection N<=6, m<=4: {bijective}; dimension formula: {dims_ok}; "
           f"order violations in 1e5 pairs: {bad}")


# 8 ------------------------------------------------------------------------------------

def test_criterion_8_hamiltonian_structure():
    p1 = PhysicalParams.from_plasma_frequency(-1.0)
    p01 = PhysicalParams.from_plasma_frequency(-0.1)
    cases = [(GridSpec((8,)), p1, 1, 1e4), (GridSpec((8,)), p01, 2, 1.0),
             (GridSpec((8,)), p01, 3, 1.0), (GridSpec((8,)), p01, 4, 1.0),
             (GridSpec((11,)), p01, 2, 1.0), (GridSpec((6, 6)), p1, 2, 1.0)]
    herm = sparse = band = sums = True
    worst = []
    for grid, params, m, lam in cases:
        sys = build_system(grid, params)
        H = assemble(sys, m, lam)
        d = hermiticity_defect(H)
        herm &= d < 1e-12 * H.a_max
        sparse &= H.s_col <= m * sys.c * 2 ** sys.d
        band &= sector_band(H) <= 2
        amax = sys.max_coupling()
        sums &= all(abs(sum(it.alphas)) <= 1e-12 * amax for it in sys.interactions)
        worst.append(f"D={H.dimension}: s={H.s_col}/{m * sys.c * 2 ** sys.d}, "
                     f"band {sector_band(H)}")
    report(8, "Hamiltonian structure", herm and sparse and band and sums,
           f"hermitian {herm}, sparsity {sparse}, band {band}, zero sums {sums}; "
           + "; ".join(worst))


# 9 ------------------------------------------------------------------------------------

def test_criterion_9_block_encoding():
    rng = np.random.default_rng(0)
    devs, negdiag = [], 0
    for _ in range(50):
        A = random_sparse_hermitian(rng, 4, 2)
        rep = verify_block(build_oracles(A), A)
        devs.append(rep.max_deviation)
        negdiag += rep.max_deviation >= 1e-12 and bool(np.any(np.diag(A).real < 0))
    failures = sum(d >= 1e-12 for d in devs)
    sys = build_system(GridSpec((5,)), PhysicalParams.from_plasma_frequency(-1.0))
    H = assemble(sys, 1, 1.0)
    rep = verify_block(build_oracles(H))
    ok = failures == 0 and rep.max_deviation < 1e-12
    report(9, "Block encoding", ok,
           f"random instances failing: {failures}/50 ({negdiag} of them with a negative "
           f"diagonal entry), worst {max(devs):.2e}; assembled H (D={H.dimension}) "
           f"deviation {rep.max_deviation:.2e}")


# 10 -----------------------------------------------------------------------------------

def _continuum(fields, grads, i, dim):
    # -sum_k ( 1/2 d_k u_k u_i + u_k d_k u_i ) for unit density
    return -sum(0.5 * grads[k][k] * fields[i] + fields[k] * grads[i][k] for k in range(dim))


def _order_errors_1d(ns):
    unit = PhysicalParams()
    errs = []
    for n in ns:
        dx = 2 * math.pi / n
        g = GridSpec((n,), (dx,))
        x = np.arange(n) * dx
        u = np.sin(x) + 0.5 * np.cos(2 * x)
        du = np.cos(x) - np.sin(2 * x)
        exact = _continuum([u], [[du]], 0, 1)
        fg = FieldGrid(g, {"u1": u})
        got = np.array([discrete_nonlinear_term(fg, g, unit, 1, (p,)) for p in range(n)])
        errs.append(np.abs(got - exact).max())
    return errs


def _order_errors_2d(ns):
    unit = PhysicalParams()
    errs = []
    for n in ns:
        d = 2 * math.pi / n
        g = GridSpec((n, n), (d, d))
        X, Y = np.meshgrid(np.arange(n) * d, np.arange(n) * d, indexing="ij")
        u = [np.sin(X) * np.cos(Y), np.cos(X + Y)]
        grads = [[np.cos(X) * np.cos(Y), -np.sin(X) * np.sin(Y)],
                 [-np.sin(X + Y), -np.sin(X + Y)]]
        fg = FieldGrid(g, {"u1": u[0], "u2": u[1]})
        worst = 0.0
        for i in (0, 1):
            exact = _continuum(u, grads, i, 2)
            got = np.array([[discrete_nonlinear_term(fg, g, unit, i + 1, (a, b))
                             for b in range(n)] for a in range(n)])
            worst = max(worst, np.abs(got - exact).max())
        errs.append(worst)
    return errs


def test_criterion_10_discretization_order():
    e1 = _order_errors_1d((16, 32, 64))
    e2 = _order_errors_2d((8, 16, 32))
    orders = [math.log2(e[k] / e[k + 1]) for e in (e1, e2) for k in range(2)]
    ok = all(0.9 <= p <= 1.1 for p in orders)
    report(10, "Discretization order", ok,
           f"observed orders 1D {orders[0]:.3f}, {orders[1]:.3f}; 2D {orders[2]:.3f}, "
           f"{orders[3]:.3f} (window [0.9, 1.1])")


if __name__ == "__main__":
    import sys
    code = pytest.main([__file__, "-q"])
    sys.exit(code)
