"""Koopman-von Neumann linearisation of discretised two-fluid plasma models.

The nonlinear grid ODE is embedded in a truncated Fock space, the resulting
sparse Hermitian generator is exponentiated by a Jacobi-Anger polynomial
(emulating QSVT) or exactly, and decoded trajectories are compared with
classical integration.

Submodules load on first attribute access so that the command line can pin
BLAS threads before numpy is imported.
"""

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "errors": ("CapacityError", "ConfigurationError", "ContractError", "DecodeError",
               "DivergenceError", "EstimationError", "KvnError", "MeasurementError",
               "SpectralLeakError", "TruncationError"),
    "fock_basis": ("TruncatedFockBasis", "dimension", "rank", "unrank"),
    "emhd_model": ("GridSpec", "OdeSystem", "PhysicalParams", "build_system", "validate_system"),
    "kvn_hamiltonian": ("SparseHamiltonian", "assemble", "spectral_norm_estimate"),
    "kvn_state": ("KvnState", "decode", "encode"),
    "qsvt_engine": ("chebyshev_apply", "evolve_qsvt", "jacobi_anger_coefficients"),
    "reference_solvers": ("evolve_expm", "rk4_integrate"),
    "block_encoding": ("build_oracles", "verify_block"),
}
_WHERE = {name: mod for mod, names in _EXPORTS.items() for name in names}
__all__ = sorted(_WHERE)


def __getattr__(name):
    if name in _WHERE:
        return getattr(importlib.import_module(f".{_WHERE[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
