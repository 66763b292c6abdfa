"""Command line entry point: ``kvnqsvt run-a|run-b|run-c|run-d|verify-be|selftest``.

Exit codes: 0 success, 2 configuration or contract failure, 3 numerical
divergence, 1 for anything else (including capacity refusals).
"""

from __future__ import annotations

import argparse
import os
import sys

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2, 3
THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
               "VECLIB_MAXIMUM_THREADS", "NUMEXPR_NUM_THREADS")


def _pin_threads() -> None:
    # must run before numpy loads BLAS
    for var in THREAD_VARS:
        os.environ[var] = "1"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kvnqsvt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for case in "abcd":
        s = sub.add_parser(f"run-{case}", help=f"run case {case.upper()}")
        s.add_argument("--config", help="config file (default: the built-in case config)")
        s.add_argument("--out", default=f"out/case_{case}", help="output directory")
        s.add_argument("--engines", help="comma list overriding the config's engines")
        s.add_argument("--deterministic", action="store_true",
                       help="single-threaded BLAS and no timing in the manifest")
        s.add_argument("--dump-operator", action="store_true",
                       help="write the KvN operator(s) in Matrix Market format")
    s = sub.add_parser("verify-be", help="check the block encoding on random and assembled operators")
    s.add_argument("--instances", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--deterministic", action="store_true")
    s = sub.add_parser("selftest", help="quick internal consistency checks")
    s.add_argument("--deterministic", action="store_true")
    return p


def _load(args):
    from .config import builtin_config, load_config, ENGINES
    from .errors import ConfigurationError
    case = args.command[-1]
    cfg = load_config(args.config) if args.config else builtin_config(case)
    if cfg.case != case:
        raise ConfigurationError(f"config is for case {cfg.case!r}, command is {args.command}")
    if args.engines:
        cfg.engines = [e.strip() for e in args.engines.split(",") if e.strip()]
        bad = [e for e in cfg.engines if e not in ENGINES]
        if bad:
            raise ConfigurationError(f"unknown engines {bad}; choose from {', '.join(ENGINES)}")
    problems = cfg.validate()
    if problems:
        raise ConfigurationError("\n".join(problems))
    return cfg


def cmd_run(args) -> int:
    from .experiments import emit, run_case
    cfg = _load(args)
    art = run_case(cfg)
    paths = emit(art, args.out, dump_operator=args.dump_operator,
                 deterministic=args.deterministic)
    print("\n".join(art.report))
    print(f"wrote {len(paths)} files to {args.out}")
    return EXIT_OK


def cmd_verify_be(args) -> int:
    import numpy as np
    from .block_encoding import build_oracles, random_sparse_hermitian, verify_block
    from .emhd_model import GridSpec, PhysicalParams, build_system
    from .kvn_hamiltonian import assemble

    rng = np.random.default_rng(args.seed)
    worst, failures, negdiag = 0.0, 0, 0
    for _ in range(args.instances):
        A = random_sparse_hermitian(rng, 4, 2)
        rep = verify_block(build_oracles(A), A)
        worst = max(worst, rep.max_deviation)
        failures += not rep.ok
        negdiag += not rep.ok and bool(np.any(np.diag(A).real < 0))
    print(f"random instances: {args.instances}, failures {failures} "
          f"({negdiag} with a negative diagonal entry), worst deviation {worst:.3e}")
    sys_ = build_system(GridSpec((5,), (1.0,)), PhysicalParams.from_plasma_frequency(-1.0))
    H = assemble(sys_, 1, 1.0)
    rep = verify_block(build_oracles(H))
    print(f"assembled H (D={H.dimension}, s={H.s_col}): deviation {rep.max_deviation:.3e}, "
          f"normalization {rep.normalization:.6g}")
    return EXIT_OK if failures == 0 and rep.ok else EXIT_FAIL


def cmd_selftest(args) -> int:
    import numpy as np
    from .emhd_model import GridSpec, PhysicalParams, build_system, validate_system
    from .fock_basis import TruncatedFockBasis
    from .kvn_hamiltonian import assemble, hermiticity_defect
    from .kvn_state import encode
    from .qsvt_engine import evolve_qsvt
    from .reference_solvers import evolve_expm

    checks = []
    basis = TruncatedFockBasis(4, 3)
    checks.append(("rank/unrank bijection",
                   all(basis.rank(basis.unrank(g)) == g for g in range(basis.dimension))))
    sys_ = build_system(GridSpec((5,), (1.0,)), PhysicalParams.from_plasma_frequency(-0.1))
    checks.append(("interaction validation", validate_system(sys_).ok))
    H = assemble(sys_, 2, 1.0)
    checks.append(("hermiticity", hermiticity_defect(H) < 1e-12 * H.a_max))
    x0 = 0.5 * np.sin(np.linspace(0, 2 * np.pi, sys_.N, endpoint=False))
    psi = encode(x0, 1.0, H.basis)
    tr = evolve_qsvt(H, psi, 4, 1.0, 8, renormalize=False)
    exact = evolve_expm(H, psi, tr.times[-1]).amplitudes
    checks.append(("qsvt vs expm", np.linalg.norm(tr.final.amplitudes - exact) < 1e-8))
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "deterministic", False):
        _pin_threads()
    from .errors import (CapacityError, ConfigurationError, ContractError, DecodeError,
                         DivergenceError, KvnError)
    try:
        if args.command.startswith("run-"):
            return cmd_run(args)
        if args.command == "verify-be":
            return cmd_verify_be(args)
        return cmd_selftest(args)
    except (ConfigurationError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, DecodeError) as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except CapacityError as exc:
        print(f"error: {exc}\nhint: use a reduced grid, e.g. --config with nx = ny = 12 "
              f"(configs/case_d_reduced.cfg)", file=sys.stderr)
        return EXIT_FAIL
    except KvnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
