import numpy as np
import pytest

from kvnqsvt.block_encoding import (assemble_dense_encoding, build_oracles,
                                    random_sparse_hermitian, verify_block)
from kvnqsvt.emhd_model import GridSpec, Interaction, OdeSystem, PhysicalParams, build_system
from kvnqsvt.errors import CapacityError, ContractError
from kvnqsvt.kvn_hamiltonian import assemble


def nonneg_diagonal(rng, dim=4, s=2):
    A = random_sparse_hermitian(rng, dim, s)
    np.fill_diagonal(A, np.abs(np.diag(A)))
    return A


def test_diagonal_tables():
    orc = build_oracles(np.diag([0.5, 2.0, 1.0]))
    assert orc.s == 1
    assert list(orc.cols[:, 0]) == [0, 1, 2]
    assert orc.a_max == 2.0 and orc.w == 2


def test_tables_match_nonzero_scan():
    A = np.array([[0, 1j, 0], [-1j, 0, 0.5], [0, 0.5, 0]])
    orc = build_oracles(A)
    for j in range(3):
        want = [(i, A[i, j]) for i in range(3) if A[i, j] != 0]
        assert orc.column(j) == want
    # padding slots hold the sentinel j + 2^w with zero amplitude
    assert orc.cols[0, 1] == 0 + 4 and orc.entries[0, 1] == 0


def test_assembled_sparsity_bound():
    sys = build_system(GridSpec((5,)), PhysicalParams.from_plasma_frequency(-0.4))
    for m in (1, 2, 3):
        H = assemble(sys, m, 1.0)
        assert build_oracles(H).s <= m * sys.c * 2 ** sys.d


def test_non_hermitian_rejected():
    with pytest.raises(ContractError):
        build_oracles(np.array([[0, 1.0], [0.5, 0]]))


def test_scalar_case():
    rep = verify_block(build_oracles(np.array([[0.3]])))
    assert rep.block[0, 0] == pytest.approx(1.0)
    assert rep.max_deviation < 1e-15


def test_zero_matrix():
    rep = verify_block(build_oracles(np.zeros((4, 4))), np.zeros((4, 4)))
    assert rep.max_deviation == 0.0


def test_random_instances_are_unitary(rng):
    for _ in range(10):
        enc = assemble_dense_encoding(build_oracles(random_sparse_hermitian(rng, 4, 2)))
        assert enc.unitarity_defect() < 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_block_equals_scaled_matrix(seed):
    A = nonneg_diagonal(np.random.default_rng(seed))
    orc = build_oracles(A)
    rep = verify_block(orc, A)
    assert rep.normalization == pytest.approx(orc.s ** 2 * orc.a_max)
    assert rep.max_deviation < 1e-12


def test_real_symmetric_signs_survive():
    A = np.array([[0, -1.0, 0, 0], [-1.0, 0, 0, 0.5], [0, 0, 0, -2.0], [0, 0.5, -2.0, 0]])
    assert verify_block(build_oracles(A), A).max_deviation < 1e-12


def test_principal_branch_loses_negative_off_diagonal_signs():
    A = np.array([[0, -1.0], [-1.0, 0]])
    rep = verify_block(build_oracles(A), A, branch="principal")
    assert np.allclose(rep.block, -rep.target)


def test_negative_diagonal_comes_out_as_magnitude():
    # a diagonal entry pairs with itself, so the construction yields |A_ii|
    A = np.diag([1.0, -1.0])
    rep = verify_block(build_oracles(A), A)
    assert np.allclose(rep.block, np.eye(2))
    assert rep.max_deviation == pytest.approx(2.0)


def test_tiny_assembled_operator():
    sys = OdeSystem(N=2, interactions=[Interaction((0, 1), (0.8, -0.8))], c=1)
    H = assemble(sys, 1, 1.0, validate=False)
    assert H.dimension == 3
    rep = verify_block(build_oracles(H))
    assert rep.max_deviation < 1e-12
    assert build_oracles(H).padded == 4


def test_assembled_case_a_like_operator():
    sys = build_system(GridSpec((5,)), PhysicalParams.from_plasma_frequency(-1.0))
    H = assemble(sys, 1, 1.0)
    assert verify_block(build_oracles(H)).max_deviation < 1e-12


def test_capacity_guard():
    with pytest.raises(CapacityError):
        assemble_dense_encoding(build_oracles(np.eye(64)), cap=100)
