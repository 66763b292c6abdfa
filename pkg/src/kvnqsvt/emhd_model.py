"""Discretised electromagnetic two-fluid equations as a divergence-free ODE system.

The physical fields are rescaled so that the energy density becomes a plain
sum of squares::

    u~ = sqrt(n) u,   E~ = sqrt(eps0 / m_q) E,   B~ = B / sqrt(mu0 m_q)

and the periodic finite-difference equations for ``(u~, E~, B~)`` are written
as a family of interactions.  An interaction is an index set ``p`` with one
coupling per member; it contributes ``alpha[j] * prod(x[l] for l in p if l != j)``
to ``dx_j/dt``.  Couplings of every interaction sum to zero, which makes the
flow divergence free and norm preserving.

Variable layout (C order over grid points, component blocks in this order):

* 1D: ``u1, E1``                         (N = 2 Nx)
* 2D: ``u1, u2, E1, E2, B3``              (N = 5 Nx Ny)
* 3D: ``u1, u2, u3, E1, E2, E3, B1, B2, B3`` (N = 9 Nx Ny Nz)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, ContractError

MIN_POINTS_PER_AXIS = 5
DEGREE_BOUND = 3
INCIDENCE_BOUND = {1: 4, 2: 8, 3: 14}

COMPONENTS = {
    1: ("u1", "E1"),
    2: ("u1", "u2", "E1", "E2", "B3"),
    3: ("u1", "u2", "u3", "E1", "E2", "E3", "B1", "B2", "B3"),
}


def levi_civita(k1: int, k2: int, k3: int) -> int:
    """Permutation symbol on 1-based indices."""
    for k in (k1, k2, k3):
        if k not in (1, 2, 3):
            raise ContractError(f"Levi-Civita index {k} outside {{1, 2, 3}}")
    if (k1, k2, k3) in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        return 1
    if (k1, k2, k3) in ((1, 3, 2), (2, 1, 3), (3, 2, 1)):
        return -1
    return 0


@dataclass(frozen=True)
class PhysicalParams:
    """Species and vacuum constants plus a time-stationary density field.

    ``density`` is a scalar or an array with the grid shape.  The default
    nondimensional convention sets ``eps0 = mu0 = m_q = 1`` so that the
    plasma frequency at unit density equals ``q``.
    """

    q: float = 1.0
    m_q: float = 1.0
    eps0: float = 1.0
    mu0: float = 1.0
    density: float | np.ndarray = 1.0

    def __post_init__(self):
        n = np.asarray(self.density, dtype=float)
        if not np.all(np.isfinite(n)) or np.any(n <= 0):
            raise ConfigurationError("density must be strictly positive everywhere")
        if self.m_q <= 0 or self.eps0 <= 0 or self.mu0 <= 0:
            raise ConfigurationError("m_q, eps0 and mu0 must be positive")

    @classmethod
    def from_plasma_frequency(cls, omega_p: float, density=1.0, **kw) -> "PhysicalParams":
        """Pick ``q`` so that the plasma frequency is ``omega_p`` at unit density."""
        m_q = kw.get("m_q", 1.0)
        eps0 = kw.get("eps0", 1.0)
        return cls(q=omega_p * math.sqrt(eps0 * m_q), density=density, **kw)

    def density_on(self, shape: tuple[int, ...]) -> np.ndarray:
        n = np.asarray(self.density, dtype=float)
        if n.ndim == 0:
            return np.full(shape, float(n))
        if n.shape != tuple(shape):
            raise ConfigurationError(f"density shape {n.shape} does not match grid {shape}")
        return n

    def plasma_frequency(self, shape: tuple[int, ...]) -> np.ndarray:
        return np.sqrt(self.density_on(shape) / (self.eps0 * self.m_q)) * self.q

    @property
    def lorentz_coupling(self) -> float:
        return math.sqrt(self.mu0 / self.m_q) * self.q

    @property
    def light_speed(self) -> float:
        return 1.0 / math.sqrt(self.eps0 * self.mu0)


@dataclass(frozen=True)
class GridSpec:
    """Periodic uniform grid with 1 to 3 axes."""

    shape: tuple[int, ...]
    spacing: tuple[float, ...] = ()

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        spacing = tuple(float(d) for d in self.spacing) or (1.0,) * len(shape)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "spacing", spacing)
        if len(shape) not in (1, 2, 3):
            raise ConfigurationError(f"spatial dimension must be 1, 2 or 3, got {len(shape)}")
        if len(spacing) != len(shape):
            raise ConfigurationError("spacing must give one value per axis")
        if any(d <= 0 for d in spacing):
            raise ConfigurationError("grid spacings must be positive")
        if any(s < 1 for s in shape):
            raise ConfigurationError("grid axes need at least one point")

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def n_points(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def wrap(self, point: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(p) % s for p, s in zip(point, self.shape))

    def shift(self, point: Sequence[int], axis: int, steps: int) -> tuple[int, ...]:
        """Periodic neighbour of ``point`` along 1-based ``axis``."""
        p = list(point)
        p[axis - 1] += steps
        return self.wrap(p)

    def flat(self, point: Sequence[int]) -> int:
        return int(np.ravel_multi_index(self.wrap(point), self.shape))

    def points(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*(range(s) for s in self.shape))

    def coordinates(self, centered: bool = True) -> list[np.ndarray]:
        """Mesh coordinates per axis; centred grids span ``[-L/2, L/2)``."""
        axes = []
        for n, d in zip(self.shape, self.spacing):
            x = np.arange(n) * d
            if centered:
                x = x - (n // 2) * d
            axes.append(x)
        return list(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True)
class Layout:
    """Bijection between (component, grid point) and flat variable index."""

    grid: GridSpec

    @property
    def components(self) -> tuple[str, ...]:
        return COMPONENTS[self.grid.dim]

    @property
    def size(self) -> int:
        return len(self.components) * self.grid.n_points

    def offset(self, component: str) -> int:
        try:
            return self.components.index(component) * self.grid.n_points
        except ValueError:
            raise ContractError(
                f"component {component!r} not present in {self.grid.dim}D layout") from None

    def index(self, component: str, point: Sequence[int]) -> int:
        return self.offset(component) + self.grid.flat(point)

    def locate(self, index: int) -> tuple[str, tuple[int, ...]]:
        block, flat = divmod(int(index), self.grid.n_points)
        point = tuple(int(v) for v in np.unravel_index(flat, self.grid.shape))
        return self.components[block], point

    def has(self, component: str) -> bool:
        return component in self.components


@dataclass
class FieldGrid:
    """Transformed fields ``u~, E~, B~`` keyed by component name."""

    grid: GridSpec
    components: dict[str, np.ndarray]

    def __post_init__(self):
        names = COMPONENTS[self.grid.dim]
        fields = {}
        for name in names:
            arr = np.asarray(self.components.get(name, 0.0), dtype=float)
            fields[name] = np.broadcast_to(arr, self.grid.shape).astype(float, copy=True)
        extra = set(self.components) - set(names)
        if extra:
            raise ContractError(f"components {sorted(extra)} not in the {self.grid.dim}D layout")
        self.components = fields

    def __getitem__(self, name: str) -> np.ndarray:
        return self.components[name]

    def get(self, name: str) -> np.ndarray:
        """Component array, or zeros when the component is absent from the layout."""
        return self.components.get(name, np.zeros(self.grid.shape))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.components[c].ravel() for c in COMPONENTS[self.grid.dim]])

    @classmethod
    def from_vector(cls, x: np.ndarray, grid: GridSpec) -> "FieldGrid":
        names = COMPONENTS[grid.dim]
        x = np.asarray(x, dtype=float)
        if x.shape != (len(names) * grid.n_points,):
            raise ContractError(f"vector of length {x.size} does not match layout")
        parts = x.reshape(len(names), *grid.shape)
        return cls(grid, {c: parts[i] for i, c in enumerate(names)})


def transform_fields(u: Mapping, E: Mapping, B: Mapping, params: PhysicalParams,
                     grid: GridSpec) -> FieldGrid:
    """Map raw ``u, E, B`` (dicts keyed ``1..3``) to energy-normalised fields."""
    n = params.density_on(grid.shape)
    scale_e = math.sqrt(params.eps0 / params.m_q)
    scale_b = math.sqrt(1.0 / (params.mu0 * params.m_q))
    comps = {}
    for name in COMPONENTS[grid.dim]:
        kind, axis = name[0], int(name[1])
        src = {"u": u, "E": E, "B": B}[kind]
        raw = np.broadcast_to(np.asarray(src.get(axis, 0.0), dtype=float), grid.shape)
        comps[name] = raw * {"u": np.sqrt(n), "E": scale_e, "B": scale_b}[kind]
    return FieldGrid(grid, comps)


def inverse_transform(fg: FieldGrid, params: PhysicalParams) -> tuple[dict, dict, dict]:
    """Undo :func:`transform_fields`; returns ``(u, E, B)`` dicts keyed ``1..3``."""
    n = params.density_on(fg.grid.shape)
    scale_e = math.sqrt(params.eps0 / params.m_q)
    scale_b = math.sqrt(1.0 / (params.mu0 * params.m_q))
    out = {"u": {}, "E": {}, "B": {}}
    for name, arr in fg.components.items():
        kind, axis = name[0], int(name[1])
        div = {"u": np.sqrt(n), "E": scale_e, "B": scale_b}[kind]
        out[kind][axis] = arr / div
    return out["u"], out["E"], out["B"]


# --- literal finite-difference stencils ---------------------------------------

def _roll(a: np.ndarray, axis: int, steps: int) -> np.ndarray:
    """Array whose value at ``j`` is ``a[j + steps * e_axis]`` (1-based axis)."""
    return np.roll(a, -steps, axis=axis - 1)


def nonlinear_term_field(fg: FieldGrid, params: PhysicalParams, component: int) -> np.ndarray:
    """Advection stencil for velocity component ``component`` at every grid point."""
    grid = fg.grid
    inv_sqrt_n = 1.0 / np.sqrt(params.density_on(grid.shape))
    ui = fg.get(f"u{component}")
    out = np.zeros(grid.shape)
    for k in range(1, grid.dim + 1):
        flux = inv_sqrt_n * fg.get(f"u{k}")
        fwd = _roll(flux, k, 1) * _roll(ui, k, 2)
        bwd = _roll(flux, k, -1) * _roll(ui, k, -2)
        out -= (fwd - bwd) / (4.0 * grid.spacing[k - 1])
    return out


def discrete_nonlinear_term(fg: FieldGrid, grid: GridSpec, params: PhysicalParams,
                            component: int, point: Sequence[int]) -> float:
    """Advection stencil value for ``u~_component`` at one grid point."""
    if tuple(fg.grid.shape) != tuple(grid.shape):
        raise ContractError("field grid does not match grid spec")
    if not 1 <= component <= 3:
        raise ContractError(f"velocity component {component} outside 1..3")
    n = params.density_on(grid.shape)
    ui = fg.get(f"u{component}")
    total = 0.0
    for k in range(1, grid.dim + 1):
        uk = fg.get(f"u{k}")
        p1, p2 = grid.shift(point, k, 1), grid.shift(point, k, 2)
        m1, m2 = grid.shift(point, k, -1), grid.shift(point, k, -2)
        fwd = uk[p1] * ui[p2] / math.sqrt(n[p1])
        bwd = uk[m1] * ui[m2] / math.sqrt(n[m1])
        total -= (fwd - bwd) / (4.0 * grid.spacing[k - 1])
    return float(total)


def stencil_rhs(fg: FieldGrid, params: PhysicalParams) -> FieldGrid:
    """Time derivative of all layout components, written directly as stencils.

    Independent of the interaction lists; used to cross-check them.
    """
    grid = fg.grid
    wp = params.plasma_frequency(grid.shape)
    beta = params.lorentz_coupling
    cl = params.light_speed
    axes = range(1, grid.dim + 1)
    out = {}
    for name in COMPONENTS[grid.dim]:
        kind, i = name[0], int(name[1])
        d = np.zeros(grid.shape)
        if kind == "u":
            d += nonlinear_term_field(fg, params, i)
            d += wp * fg.get(f"E{i}")
            for k2, k3 in itertools.product((1, 2, 3), repeat=2):
                eps = levi_civita(i, k2, k3)
                if eps:
                    d += beta * eps * fg.get(f"u{k2}") * fg.get(f"B{k3}")
        else:
            src = "B" if kind == "E" else "E"
            sign = 1.0 if kind == "E" else -1.0
            for k2 in axes:
                for k3 in (1, 2, 3):
                    eps = levi_civita(i, k2, k3)
                    if eps:
                        f = fg.get(f"{src}{k3}")
                        d += sign * cl * eps * (_roll(f, k2, 1) - _roll(f, k2, -1)) \
                            / (2.0 * grid.spacing[k2 - 1])
            if kind == "E":
                d -= wp * fg.get(f"u{i}")
        out[name] = d
    return FieldGrid(grid, out)


# --- interaction systems -------------------------------------------------------

@dataclass(frozen=True)
class Interaction:
    """Index set ``p`` with per-member couplings, stored sorted by index."""

    indices: tuple[int, ...]
    alphas: tuple[float, ...]
    kind: str = ""

    def __post_init__(self):
        if len(self.indices) != len(self.alphas):
            raise ContractError("indices and alphas must have equal length")
        order = sorted(range(len(self.indices)), key=lambda t: self.indices[t])
        object.__setattr__(self, "indices", tuple(int(self.indices[t]) for t in order))
        object.__setattr__(self, "alphas", tuple(float(self.alphas[t]) for t in order))

    def __len__(self):
        return len(self.indices)

    def coupling(self, j: int) -> float:
        return self.alphas[self.indices.index(j)]


@dataclass
class Violation:
    condition: int
    interaction: int | None
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "valid"
        return "\n".join(f"condition {v.condition}: {v.message}" for v in self.violations)


@dataclass
class OdeSystem:
    """Polynomial ODE ``dx_j/dt = sum_{p ∋ j} alpha_{p->j} prod_{l in p\\{j}} x_l``."""

    N: int
    interactions: list[Interaction]
    c: int
    d: int = DEGREE_BOUND
    layout: Layout | None = None
    params: PhysicalParams | None = None

    @cached_property
    def groups(self) -> dict[int, tuple[np.ndarray, np.ndarray]]:
        """Interactions grouped by size as ``(indices, alphas)`` arrays."""
        by_size: dict[int, list[Interaction]] = {}
        for it in self.interactions:
            by_size.setdefault(len(it), []).append(it)
        return {
            r: (np.array([it.indices for it in its], dtype=np.int64),
                np.array([it.alphas for it in its], dtype=float))
            for r, its in sorted(by_size.items())
        }

    def incidence(self) -> np.ndarray:
        counts = np.zeros(self.N, dtype=np.int64)
        for it in self.interactions:
            for j in it.indices:
                if 0 <= j < self.N:
                    counts[j] += 1
        return counts

    def max_coupling(self) -> float:
        return max((abs(a) for it in self.interactions for a in it.alphas), default=0.0)


def _rhs_plan(sys: OdeSystem):
    """Per-leg gather indices and one sparse scatter matrix, cached on ``sys``."""
    plan = sys.__dict__.get("_rhs_plan")
    if plan is None:
        gathers, coefs, targets = [], [], []
        for r, (idx, alpha) in sys.groups.items():
            for t in range(r):
                gathers.append(np.delete(idx, t, axis=1))
                coefs.append(alpha[:, t])
                targets.append(idx[:, t])
        tgt = np.concatenate(targets) if targets else np.zeros(0, dtype=np.int64)
        coef = np.concatenate(coefs) if coefs else np.zeros(0)
        scatter = sp.csr_matrix((coef, (tgt, np.arange(tgt.size))), shape=(sys.N, tgt.size))
        plan = sys.__dict__["_rhs_plan"] = (gathers, scatter)
    return plan


def classical_rhs(sys: OdeSystem, x: np.ndarray) -> np.ndarray:
    """Evaluate ``F(x)`` from the interaction lists."""
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.N,):
        raise ContractError(f"state of length {x.size} does not match N={sys.N}")
    gathers, scatter = _rhs_plan(sys)
    if not gathers:
        return np.zeros(sys.N)
    terms = np.concatenate([x[g].prod(axis=1) for g in gathers])
    return scatter @ terms


def jacobian(sys: OdeSystem, x: np.ndarray) -> np.ndarray:
    """Dense analytic Jacobian ``dF_j/dx_l``."""
    x = np.asarray(x, dtype=float)
    J = np.zeros((sys.N, sys.N))
    for r, (idx, alpha) in sys.groups.items():
        vals = x[idx]
        for t in range(r):          # row: the leg receiving the contribution
            for u in range(r):      # column: the variable being differentiated
                if u == t:
                    continue
                keep = [v for v in range(r) if v not in (t, u)]
                rest = np.prod(vals[:, keep], axis=1) if keep else 1.0
                np.add.at(J, (idx[:, t], idx[:, u]), alpha[:, t] * rest)
    return J


def energy(x: np.ndarray, grid: GridSpec, params: PhysicalParams | None = None) -> float:
    """Discrete field energy ``sum 1/2 m_q (|u~|^2 + |E~|^2 + |B~|^2) dV``."""
    m_q = 1.0 if params is None else params.m_q
    x = np.asarray(x, dtype=float)
    return 0.5 * m_q * float(x @ x) * grid.cell_volume


def validate_system(sys: OdeSystem) -> ValidationReport:
    """Check every interaction against the solvable-class conditions.

    Never stops early; each violation is reported with its interaction.
    """
    report = ValidationReport()
    seen: dict[tuple[int, ...], int] = {}
    for n, it in enumerate(sys.interactions):
        size = len(set(it.indices))
        if size != len(it.indices):
            report.violations.append(Violation(1, n, f"interaction {n} repeats an index: {it.indices}"))
        if not 2 <= len(it.indices) <= sys.d:
            report.violations.append(
                Violation(1, n, f"interaction {n} has |p|={len(it.indices)} outside [2, {sys.d}]"))
        if any(j < 0 or j >= sys.N for j in it.indices):
            report.violations.append(Violation(1, n, f"interaction {n} indexes outside [0, {sys.N})"))
        scale = max((abs(a) for a in it.alphas), default=0.0)
        total = math.fsum(it.alphas)
        if abs(total) > 1e-12 * scale:
            report.violations.append(
                Violation(3, n, f"interaction {n} couplings sum to {total!r}, not 0"))
        if it.indices in seen:
            report.violations.append(
                Violation(1, n, f"interaction {n} duplicates index set of interaction {seen[it.indices]}"))
        seen.setdefault(it.indices, n)
    counts = sys.incidence()
    for j in np.flatnonzero(counts == 0):
        report.violations.append(Violation(2, None, f"variable {j} appears in no interaction"))
    for j in np.flatnonzero(counts > sys.c):
        report.violations.append(
            Violation(2, None, f"variable {j} appears in {counts[j]} interactions (> c={sys.c})"))
    return report


def build_system(grid: GridSpec, params: PhysicalParams) -> OdeSystem:
    """Interaction family of the discretised equations on ``grid``."""
    for s in grid.shape:
        if s < MIN_POINTS_PER_AXIS:
            raise ConfigurationError(
                f"each axis needs at least {MIN_POINTS_PER_AXIS} points "
                f"so stencil index sets stay distinct; got shape {grid.shape}")
    layout = Layout(grid)
    dim = grid.dim
    n = params.density_on(grid.shape)
    wp = params.plasma_frequency(grid.shape)
    beta = params.lorentz_coupling
    cl = params.light_speed
    comps = layout.components
    out: list[Interaction] = []

    def idx(name, point):
        return layout.index(name, point)

    for point in grid.points():
        # advection: {u_i,j ; u_k,j+e_k ; u_i,j+2e_k}
        for i in range(1, 4):
            if f"u{i}" not in comps:
                continue
            for k in range(1, dim + 1):
                p1, p2 = grid.shift(point, k, 1), grid.shift(point, k, 2)
                coef = 1.0 / (4.0 * grid.spacing[k - 1] * math.sqrt(n[p1]))
                out.append(Interaction(
                    (idx(f"u{i}", point), idx(f"u{k}", p1), idx(f"u{i}", p2)),
                    (-coef, 0.0, coef), "advection"))
        # plasma oscillation: {u_i,j ; E_i,j}
        for i in range(1, 4):
            if f"u{i}" in comps and f"E{i}" in comps:
                w = float(wp[point])
                out.append(Interaction((idx(f"u{i}", point), idx(f"E{i}", point)),
                                       (w, -w), "plasma"))
        # Lorentz force: {u_a, u_b, B_c}, zero coupling on the B leg
        for a, b, c in ((1, 2, 3), (1, 3, 2), (2, 3, 1)):
            names = (f"u{a}", f"u{b}", f"B{c}")
            if all(nm in comps for nm in names):
                sgn = levi_civita(a, b, c)
                out.append(Interaction(tuple(idx(nm, point) for nm in names),
                                       (sgn * beta, -sgn * beta, 0.0), "lorentz"))
        # curl coupling: {E_k1,j ; B_k3,j±e_k2}
        for k1, k2, k3 in itertools.permutations((1, 2, 3)):
            if k2 > dim or f"E{k1}" not in comps or f"B{k3}" not in comps:
                continue
            coef = cl / (2.0 * grid.spacing[k2 - 1])
            e_fwd, e_bwd = levi_civita(k1, k2, k3), levi_civita(k3, k2, k1)
            for step in (1, -1):
                nb = grid.shift(point, k2, step)
                out.append(Interaction((idx(f"E{k1}", point), idx(f"B{k3}", nb)),
                                       (step * coef * e_fwd, step * coef * e_bwd), "curl"))

    sys = OdeSystem(N=layout.size, interactions=out, c=INCIDENCE_BOUND[dim],
                    layout=layout, params=params)
    report = validate_system(sys)
    if not report.ok:
        raise ConfigurationError(f"generated system is invalid:\n{report}")
    return sys


def _expect_dim(grid: GridSpec, dim: int) -> None:
    if grid.dim != dim:
        raise ConfigurationError(f"expected a {dim}D grid, got shape {grid.shape}")


def build_system_1d(grid: GridSpec, params: PhysicalParams) -> OdeSystem:
    _expect_dim(grid, 1)
    return build_system(grid, params)


def build_system_2d(grid: GridSpec, params: PhysicalParams) -> OdeSystem:
    _expect_dim(grid, 2)
    return build_system(grid, params)


def build_system_3d(grid: GridSpec, params: PhysicalParams) -> OdeSystem:
    _expect_dim(grid, 3)
    return build_system(grid, params)


# --- text serialisation ----------------------------------------------------------

def dumps_system(sys: OdeSystem) -> str:
    """One interaction per line: ``i0 i1 [i2] | a0 a1 [a2]`` (17 significant digits)."""
    lines = [f"# kvn-ode N={sys.N} c={sys.c} d={sys.d} interactions={len(sys.interactions)}"]
    for it in sys.interactions:
        idx = " ".join(str(j) for j in it.indices)
        al = " ".join(f"{a:.17g}" for a in it.alphas)
        lines.append(f"{idx} | {al}")
    return "\n".join(lines) + "\n"


def loads_system(text: str) -> OdeSystem:
    header, *body = [ln for ln in text.splitlines() if ln.strip()]
    if not header.startswith("# kvn-ode"):
        raise ContractError("missing '# kvn-ode' header")
    meta = dict(tok.split("=") for tok in header.split()[2:])
    interactions = []
    for ln in body:
        left, right = ln.split("|")
        interactions.append(Interaction(tuple(int(v) for v in left.split()),
                                        tuple(float(v) for v in right.split())))
    return OdeSystem(N=int(meta["N"]), interactions=interactions,
                     c=int(meta["c"]), d=int(meta["d"]))


def save_system(sys: OdeSystem, path: str | Path) -> None:
    Path(path).write_text(dumps_system(sys))


def load_system(path: str | Path) -> OdeSystem:
    return loads_system(Path(path).read_text())
