import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kvnqsvt.emhd_model import (FieldGrid, GridSpec, Interaction, Layout, OdeSystem,
                                PhysicalParams, build_system, build_system_1d,
                                build_system_2d, build_system_3d, classical_rhs,
                                discrete_nonlinear_term, dumps_system, energy,
                                inverse_transform, jacobian, levi_civita, loads_system,
                                nonlinear_term_field, stencil_rhs, transform_fields,
                                validate_system)
from kvnqsvt.errors import ConfigurationError, ContractError

UNIT = PhysicalParams()


def literal_1d_rhs(u, E, omega, dx):
    """Direct 1D equations on arrays, no interaction lists."""
    up1, up2 = np.roll(u, -1), np.roll(u, -2)
    um1, um2 = np.roll(u, 1), np.roll(u, 2)
    du = -(up1 * up2 - um1 * um2) / (4 * dx) + omega * E
    dE = -omega * u
    return du, dE


def test_levi_civita():
    assert levi_civita(1, 2, 3) == 1
    assert levi_civita(1, 3, 2) == -1
    assert levi_civita(1, 1, 2) == 0
    with pytest.raises(ContractError):
        levi_civita(0, 1, 2)


def test_transform_examples():
    g = GridSpec((5,), (1.0,))
    z = transform_fields({}, {}, {}, UNIT, g)
    assert not np.any(z.to_vector())
    ident = transform_fields({1: 0.7}, {1: -0.2}, {}, UNIT, g)
    assert np.allclose(ident["u1"], 0.7) and np.allclose(ident["E1"], -0.2)
    dense = transform_fields({1: 1.0}, {}, {}, PhysicalParams(density=4.0), g)
    assert np.allclose(dense["u1"], 2.0)


@pytest.mark.parametrize("params", [UNIT, PhysicalParams(density=4.0),
                                    PhysicalParams(eps0=2.0, mu0=0.5, m_q=3.0, density=0.3)])
def test_inverse_transform_roundtrip(params, rng):
    g = GridSpec((5, 6), (1.0, 0.5))
    u = {1: rng.normal(size=g.shape), 2: rng.normal(size=g.shape)}
    E = {1: rng.normal(size=g.shape), 2: rng.normal(size=g.shape)}
    B = {3: rng.normal(size=g.shape)}
    u2, E2, B2 = inverse_transform(transform_fields(u, E, B, params, g), params)
    for a, b in ((u, u2), (E, E2), (B, B2)):
        for k in a:
            assert np.allclose(a[k], b[k], rtol=1e-14)


def test_nonpositive_density_rejected():
    with pytest.raises(ConfigurationError):
        PhysicalParams(density=0.0)
    with pytest.raises(ConfigurationError):
        PhysicalParams(density=np.array([1.0, -1.0]))


def test_nonlinear_term_uniform_field_vanishes():
    g = GridSpec((6, 7), (1.0, 1.0))
    fg = FieldGrid(g, {"u1": 0.4, "u2": -1.3})
    assert abs(discrete_nonlinear_term(fg, g, UNIT, 1, (2, 3))) < 1e-15
    assert np.abs(nonlinear_term_field(fg, UNIT, 2)).max() < 1e-15


def test_nonlinear_term_support():
    # one nonzero site: products u_{j+1} u_{j+2} need two nonzero neighbours, so
    # the stencil output vanishes; with two adjacent nonzero sites exactly two
    # output sites are hit per axis
    g = GridSpec((9,), (1.0,))
    u = np.zeros(9)
    u[4] = 1.0
    out = nonlinear_term_field(FieldGrid(g, {"u1": u}), UNIT, 1)
    assert np.count_nonzero(out) == 0
    u[5] = 2.0
    out = nonlinear_term_field(FieldGrid(g, {"u1": u}), UNIT, 1)
    assert sorted(np.flatnonzero(out)) == [3, 6]


def test_nonlinear_term_pointwise_matches_field():
    g = GridSpec((6, 5), (0.7, 1.3))
    rng = np.random.default_rng(0)
    params = PhysicalParams(density=rng.uniform(0.5, 2.0, size=g.shape))
    fg = FieldGrid(g, {"u1": rng.normal(size=g.shape), "u2": rng.normal(size=g.shape)})
    full = nonlinear_term_field(fg, params, 2)
    for p in [(0, 0), (3, 4), (5, 2)]:
        assert discrete_nonlinear_term(fg, g, params, 2, p) == pytest.approx(full[p], abs=1e-14)


def _continuum_error(n):
    L = 2 * math.pi
    dx = L / n
    g = GridSpec((n,), (dx,))
    x = np.arange(n) * dx
    u = np.sin(x)
    exact = -1.5 * np.sin(x) * np.cos(x)
    got = nonlinear_term_field(FieldGrid(g, {"u1": u}), UNIT, 1)
    return np.abs(got - exact).max()


def test_nonlinear_term_continuum_limit_is_second_order():
    # the stencil is centred, so the error against -3/2 u u' falls as dx^2
    errs = [_continuum_error(n) for n in (32, 64, 128)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert errs[-1] < 5e-3
    assert all(1.9 < p < 2.1 for p in orders)


def test_system_sizes_and_incidence():
    s1 = build_system_1d(GridSpec((8,)), PhysicalParams.from_plasma_frequency(-1.0))
    assert s1.N == 16 and s1.c == 4
    s2 = build_system_2d(GridSpec((5, 5)), UNIT)
    assert s2.N == 125 and s2.c == 8
    s3 = build_system_3d(GridSpec((5, 5, 5)), UNIT)
    assert s3.N == 9 * 125 and s3.c == 14
    for s in (s1, s2, s3):
        inc = s.incidence()
        assert inc.min() >= 1 and inc.max() <= s.c
        assert validate_system(s).ok


def test_case_d_variable_count():
    g = GridSpec((20, 20))
    assert Layout(g).size == 2000


def test_dimension_mismatch_and_small_grid():
    with pytest.raises(ConfigurationError):
        build_system_2d(GridSpec((8,)), UNIT)
    with pytest.raises(ConfigurationError):
        build_system(GridSpec((4,)), UNIT)


def test_plasma_pairs_in_1d():
    w = -1.0
    s = build_system_1d(GridSpec((8,)), PhysicalParams.from_plasma_frequency(w))
    plasma = [it for it in s.interactions if it.kind == "plasma"]
    assert len(plasma) == 8
    for j, it in enumerate(sorted(plasma, key=lambda it: it.indices)):
        assert it.indices == (j, 8 + j)
        assert it.alphas == (w, -w)


def test_coupling_sums_vanish():
    for g in (GridSpec((6,)), GridSpec((5, 6)), GridSpec((5, 5, 5))):
        s = build_system(g, PhysicalParams.from_plasma_frequency(-0.7))
        for it in s.interactions:
            assert abs(math.fsum(it.alphas)) <= 1e-12 * max(map(abs, it.alphas))


def test_validation_reports_each_violation():
    bad = OdeSystem(N=5, interactions=[
        Interaction((0, 1), (1.0, 0.0)),             # condition 3
        Interaction((1, 2, 3, 4), (1.0, -1.0, 0.0, 0.0)),  # condition 1
    ], c=4)
    rep = validate_system(bad)
    conds = sorted(v.condition for v in rep.violations)
    assert conds == [1, 3]
    assert not rep.ok


def test_validation_flags_missing_variable():
    s = OdeSystem(N=3, interactions=[Interaction((0, 1), (1.0, -1.0))], c=4)
    rep = validate_system(s)
    assert [v.condition for v in rep.violations] == [2]


def test_rhs_at_zero_and_case_a_start():
    s = build_system_1d(GridSpec((8,)), PhysicalParams.from_plasma_frequency(-1.0))
    assert not np.any(classical_rhs(s, np.zeros(16)))
    x = np.concatenate([np.ones(8), np.zeros(8)])
    F = classical_rhs(s, x)
    assert np.allclose(F[:8], 0.0)
    assert np.allclose(F[8:], 1.0)


def test_rhs_length_mismatch():
    s = build_system_1d(GridSpec((5,)), UNIT)
    with pytest.raises(ContractError):
        classical_rhs(s, np.zeros(3))


@pytest.mark.parametrize("shape", [(5,), (9,), (5, 6), (6, 5), (5, 5, 5)])
def test_rhs_matches_literal_stencils(shape, rng):
    g = GridSpec(shape, tuple(rng.uniform(0.5, 1.5, size=len(shape))))
    params = PhysicalParams(q=-0.6, eps0=1.3, mu0=0.8, m_q=1.1,
                            density=rng.uniform(0.5, 2.0, size=shape))
    s = build_system(g, params)
    for _ in range(3):
        x = rng.normal(size=s.N)
        want = stencil_rhs(FieldGrid.from_vector(x, g), params).to_vector()
        got = classical_rhs(s, x)
        assert np.abs(got - want).max() <= 1e-13 * np.abs(want).max()


def test_rhs_matches_hand_written_1d(rng):
    g = GridSpec((7,), (0.8,))
    s = build_system(g, PhysicalParams.from_plasma_frequency(-0.3))
    x = rng.normal(size=14)
    du, dE = literal_1d_rhs(x[:7], x[7:], -0.3, 0.8)
    assert np.allclose(classical_rhs(s, x), np.concatenate([du, dE]), rtol=0, atol=1e-14)


def test_divergence_free(rng):
    s = build_system(GridSpec((5, 5)), PhysicalParams.from_plasma_frequency(-1.0))
    x = rng.normal(size=s.N)
    h = 1e-6
    div = 0.0
    for j in range(s.N):
        e = np.zeros(s.N)
        e[j] = h
        div += (classical_rhs(s, x + e)[j] - classical_rhs(s, x - e)[j]) / (2 * h)
    assert abs(div) < 1e-8 * np.linalg.norm(classical_rhs(s, x))
    assert abs(np.trace(jacobian(s, x))) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([(5,), (8,), (5, 6)]))
def test_norm_is_conserved_by_the_flow(seed, shape):
    rng = np.random.default_rng(seed)
    s = build_system(GridSpec(shape), PhysicalParams.from_plasma_frequency(rng.uniform(-2, 2)))
    x = rng.normal(size=s.N)
    F = classical_rhs(s, x)
    assert abs(x @ F) <= 1e-12 * np.linalg.norm(x) * max(np.linalg.norm(F), 1.0)


def test_energy():
    g = GridSpec((5, 5), (0.5, 2.0))
    assert energy(np.zeros(125), g) == 0.0
    x = np.linspace(-1, 1, 125)
    assert energy(2 * x, g) == pytest.approx(4 * energy(x, g))
    assert energy(x, g) == pytest.approx(0.5 * (x @ x) * 1.0)


def test_text_roundtrip(tmp_path):
    s = build_system(GridSpec((5, 5), (0.3, 0.7)), PhysicalParams.from_plasma_frequency(-0.9))
    back = loads_system(dumps_system(s))
    assert back.N == s.N and back.c == s.c
    assert [it.indices for it in back.interactions] == [it.indices for it in s.interactions]
    assert [it.alphas for it in back.interactions] == [it.alphas for it in s.interactions]


def test_layout_roundtrip():
    lay = Layout(GridSpec((5, 6)))
    for idx in (0, 29, 30, 149):
        assert lay.index(*lay.locate(idx)) == idx
    assert not lay.has("E3")
    with pytest.raises(ContractError):
        lay.offset("B1")
