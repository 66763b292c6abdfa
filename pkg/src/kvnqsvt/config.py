"""Flat ``key = value`` experiment configuration with a typed schema.

Lines are ``key = value``; ``#`` starts a comment; lists are comma
separated.  Unknown keys and malformed values are errors, and every problem
in a file is reported at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigurationError

REQUIRED = object()


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(conv):
    def parse(text: str):
        items = [t.strip() for t in text.split(",") if t.strip()]
        return [conv(t) for t in items]
    return parse


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


# key -> (parser, default, description with units)
SCHEMA = {
    "case": (str, REQUIRED, "experiment id: a | b | c | d"),
    "dim": (int, REQUIRED, "spatial dimension (1 or 2)"),
    "nx": (_list(int), REQUIRED, "grid points along x; several values sweep the grid"),
    "ny": (int, 0, "grid points along y (2D only)"),
    "dx": (float, 1.0, "grid spacing along x [Debye-free length units]"),
    "dy": (float, 1.0, "grid spacing along y"),
    "omega_p": (float, REQUIRED, "signed plasma frequency sqrt(n/(eps0 m)) q [1/time]"),
    "density": (float, 1.0, "uniform number density n"),
    "initial": (str, REQUIRED, "initial condition: uniform | sine | kelvin_helmholtz"),
    "u_init": (float, 1.0, "uniform value or sine amplitude of u1 [velocity]"),
    "e_init": (float, 0.0, "uniform value of E1 [field units]"),
    "wave_cycles": (float, -1.0, "sine wavenumber k = 2 pi cycles / (Nx dx)"),
    "u0": (float, 1.0, "shear-flow speed [velocity]"),
    "b0": (float, 2.0, "uniform out-of-plane magnetic field B3"),
    "eps": (float, 0.1, "perturbation amplitude"),
    "kx": (float, 0.99, "perturbation wavenumber along x [1/length]"),
    "ky": (float, 0.2, "perturbation wavenumber along y [1/length]"),
    "shear_halfwidth": (int, 3, "shear layer |y| <= halfwidth * dy"),
    "m": (_list(int), REQUIRED, "KvN truncation orders; several values sweep m"),
    "Lambda": (float, 1.0, "rescale parameter (>= 1)"),
    "tau": (float, 1.0, "normalised time per QSVT step"),
    "R": (int, 5, "Jacobi-Anger truncation index"),
    "nt": (_list(int), REQUIRED, "QSVT step counts, one per sweep entry"),
    "renormalize": (_bool, True, "renormalise the state after every QSVT step"),
    "alpha_norm": (str, "frobenius", "QSVT normalisation: frobenius | spectral"),
    "t_end": (float, 0.0, "reference horizon [time]; 0 uses the QSVT horizon"),
    "t_end_eigen": (float, 0.0, "horizon in units of the unstable-mode time scale (case d)"),
    "engines": (_list(str), ["kvn-qsvt", "kvn-expm", "classical-rk4"],
                "engines: kvn-qsvt, kvn-expm, classical-rk4"),
    "rk4_dt": (float, 1e-3, "RK4 step [time]"),
    "expm_method": (str, "auto", "auto | dense | krylov"),
    "krylov_dim": (int, 30, "Krylov subspace size"),
    "expm_tol": (float, 1e-10, "Krylov tolerance"),
    "sample_every": (int, 1, "record every k-th QSVT step"),
    "expm_samples": (int, 0, "reference sample count when QSVT is off; 0 = 201"),
    "fit_window": (_list(float), [0.05, 0.5], "growth fit window as fractions of the eigen time scale"),
    "snapshots": (_list(float), [0.0, 0.5, 1.0], "snapshot times as fractions of the eigen time scale"),
    "capacity_mb": (int, 3072, "memory cap for operator assembly [MiB]"),
}

ENGINES = ("kvn-qsvt", "kvn-expm", "classical-rk4")


@dataclass
class ExperimentConfig:
    case: str
    dim: int
    nx: list
    omega_p: float
    initial: str
    m: list
    nt: list
    ny: int = 0
    dx: float = 1.0
    dy: float = 1.0
    density: float = 1.0
    u_init: float = 1.0
    e_init: float = 0.0
    wave_cycles: float = -1.0
    u0: float = 1.0
    b0: float = 2.0
    eps: float = 0.1
    kx: float = 0.99
    ky: float = 0.2
    shear_halfwidth: int = 3
    Lambda: float = 1.0
    tau: float = 1.0
    R: int = 5
    renormalize: bool = True
    alpha_norm: str = "frobenius"
    t_end: float = 0.0
    t_end_eigen: float = 0.0
    engines: list = field(default_factory=lambda: list(ENGINES))
    rk4_dt: float = 1e-3
    expm_method: str = "auto"
    krylov_dim: int = 30
    expm_tol: float = 1e-10
    sample_every: int = 1
    expm_samples: int = 0
    fit_window: list = field(default_factory=lambda: [0.05, 0.5])
    snapshots: list = field(default_factory=lambda: [0.0, 0.5, 1.0])
    capacity_mb: int = 3072

    @property
    def sweep(self) -> list[tuple[int, int, int]]:
        """``(nx, m, nt)`` per run; a single value broadcasts against a list."""
        n = max(len(self.nx), len(self.m), len(self.nt))
        def pick(seq, i):
            return seq[i] if len(seq) > 1 else seq[0]
        return [(pick(self.nx, i), pick(self.m, i), pick(self.nt, i)) for i in range(n)]

    def validate(self) -> list[str]:
        errs = []
        if self.case not in ("a", "b", "c", "d"):
            errs.append(f"case must be a, b, c or d, got {self.case!r}")
        if self.dim not in (1, 2):
            errs.append(f"dim must be 1 or 2, got {self.dim}")
        if self.dim == 2 and self.ny < 5:
            errs.append("2D runs need ny >= 5")
        if any(v < 5 for v in self.nx):
            errs.append("every nx must be >= 5")
        if self.initial not in ("uniform", "sine", "kelvin_helmholtz"):
            errs.append(f"unknown initial condition {self.initial!r}")
        if self.initial == "kelvin_helmholtz" and self.dim != 2:
            errs.append("kelvin_helmholtz needs dim = 2")
        if self.Lambda < 1:
            errs.append("Lambda must be >= 1")
        if any(v < 0 for v in self.m):
            errs.append("m must be >= 0")
        if any(v < 0 for v in self.nt):
            errs.append("nt must be >= 0")
        if self.R < 0:
            errs.append("R must be >= 0")
        if self.density <= 0:
            errs.append("density must be positive")
        if self.alpha_norm not in ("frobenius", "spectral"):
            errs.append(f"alpha_norm must be frobenius or spectral, got {self.alpha_norm!r}")
        if self.expm_method not in ("auto", "dense", "krylov"):
            errs.append(f"unknown expm_method {self.expm_method!r}")
        bad = [e for e in self.engines if e not in ENGINES]
        if bad:
            errs.append(f"unknown engines {bad}")
        lens = {len(v) for v in (self.nx, self.m, self.nt) if len(v) > 1}
        if len(lens) > 1:
            errs.append("nx, m and nt lists must have matching lengths when swept")
        if self.sample_every < 1:
            errs.append("sample_every must be >= 1")
        if len(self.fit_window) != 2 or not 0 <= self.fit_window[0] < self.fit_window[1]:
            errs.append("fit_window needs two increasing non-negative fractions")
        for name in ("dx", "dy", "tau", "rk4_dt", "expm_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                errs.append(f"{name} must be positive and finite")
        return errs


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    values, errs = {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errs.append(f"{source}:{lineno}: expected 'key = value'")
            continue
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in SCHEMA:
            errs.append(f"{source}:{lineno}: unknown key {key!r}")
            continue
        if key in values:
            errs.append(f"{source}:{lineno}: duplicate key {key!r}")
            continue
        try:
            values[key] = SCHEMA[key][0](val)
        except ValueError as exc:
            errs.append(f"{source}:{lineno}: bad value for {key}: {exc}")
    for key, (_, default, _) in SCHEMA.items():
        if default is REQUIRED and key not in values:
            errs.append(f"{source}: missing required key {key!r}")
    if errs:
        raise ConfigurationError("\n".join(errs))
    cfg = ExperimentConfig(**values)
    problems = cfg.validate()
    if problems:
        raise ConfigurationError("\n".join(f"{source}: {p}" for p in problems))
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def dump_config(cfg: ExperimentConfig, comments: dict | None = None) -> str:
    """Config text that parses back to ``cfg``; ``comments`` become ``#`` lines."""
    lines = [f"# {k}: {v}" for k, v in (comments or {}).items()]
    for f in fields(cfg):
        lines.append(f"{f.name} = {_fmt(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def builtin_config_path(case: str) -> Path:
    return Path(__file__).with_name("configs") / f"case_{case}.cfg"


def builtin_config(case: str) -> ExperimentConfig:
    return load_config(builtin_config_path(case))
