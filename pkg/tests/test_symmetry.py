import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pseudospin.errors import DimensionError, DomainError, ResourceError
from pseudospin.symmetry import (PseudospinLabel, SymmetryBasis, abundance, block_diagonalize,
                                 build_symmetry_basis, collective_operators, fixture_basis,
                                 format_half, interaction_hamiltonian, ladder_coefficient,
                                 multiplet_table, twice)


def weight_count_abundance(n, j):
    # independent oracle: states at m = j minus states at m = j + 1
    k = int(round(n / 2 + j))
    return math.comb(n, k) - (math.comb(n, k + 1) if k + 1 <= n else 0)


# frozen tables from the integer formula, cross-checked against the oracle above
FROZEN = {
    2: {1.0: 1, 0.0: 1},
    3: {1.5: 1, 0.5: 2},
    4: {2.0: 1, 1.0: 3, 0.0: 2},
    5: {2.5: 1, 1.5: 4, 0.5: 5},
    6: {3.0: 1, 2.0: 5, 1.0: 9, 0.0: 5},
}


@pytest.mark.parametrize("n", sorted(FROZEN))
def test_frozen_abundance(n):
    assert multiplet_table(n).as_dict() == FROZEN[n]


@pytest.mark.parametrize("n", range(1, 25))
def test_abundance_oracle_and_sum_rule(n):
    table = multiplet_table(n)
    for j, ab in table.rows:
        assert ab == weight_count_abundance(n, j)
    assert table.dimension() == 2**n


def test_abundance_rejects_bad_j():
    with pytest.raises(DomainError):
        abundance(3, 1)
    with pytest.raises(DomainError):
        abundance(3, 2.5)
    with pytest.raises(DomainError):
        twice(0.3)


def test_label_validation():
    PseudospinLabel(1.5, -0.5)
    for bad in [(1.5, 1.0), (1, 2), (0.5, 0.5, -1)]:
        with pytest.raises(DomainError):
            PseudospinLabel(*bad)
    assert format_half(1.5) == "3/2" and format_half(-2) == "-2"


def test_qubit_cap():
    with pytest.raises(ResourceError):
        collective_operators(13)
    with pytest.raises(ResourceError):
        build_symmetry_basis(5, cap=4)


@pytest.mark.parametrize("n", range(1, 7))
def test_basis_properties(n):
    basis = build_symmetry_basis(n)
    jp, jm, jz, j2 = collective_operators(n)
    u = basis.matrix
    assert np.abs(u.conj().T @ u - np.eye(2**n)).max() < 1e-12
    for c, lab in enumerate(basis.labels):
        v = u[:, c]
        assert np.abs(j2 @ v - lab.j * (lab.j + 1) * v).max() < 1e-10
        assert np.abs(jz @ v - lab.m * v).max() < 1e-12
        if lab.m > -lab.j:
            low = basis.state(lab.j, lab.m - 1, lab.copy)
            assert np.abs(jm @ v - ladder_coefficient(lab.j, lab.m - 1) * low).max() < 1e-10
    assert basis.multiplicities() == multiplet_table(n).as_dict()


def test_basis_is_deterministic_and_json_roundtrip():
    a, b = build_symmetry_basis(4), build_symmetry_basis(4)
    assert np.array_equal(a.matrix, b.matrix)
    c = SymmetryBasis.from_json(a.to_json())
    assert c.labels == a.labels and np.array_equal(c.matrix, a.matrix)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_fixture_basis_spans_same_sectors(n):
    fx, built = fixture_basis(n), build_symmetry_basis(n)
    _, _, jz, j2 = collective_operators(n)
    u = fx.matrix
    assert np.abs(u.conj().T @ u - np.eye(2**n)).max() < 1e-12
    for c, lab in enumerate(fx.labels):
        v = u[:, c]
        assert np.abs(j2 @ v - lab.j * (lab.j + 1) * v).max() < 1e-12
        assert np.abs(jz @ v - lab.m * v).max() < 1e-12
    for j in fx.multiplicities():
        assert np.abs(fx.sector_projector(j) - built.sector_projector(j)).max() < 1e-12


def test_fixture_three_qubit_doublet_ladder_sign():
    fx = fixture_basis(3)
    _, jm, _, _ = collective_operators(3)
    for copy in (0, 1):
        assert np.abs(jm @ fx.state(0.5, 0.5, copy) + fx.state(0.5, -0.5, copy)).max() < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("n_max", [0, 3, 5])
def test_block_diagonalization(n, n_max):
    h = interaction_hamiltonian(n, n_max, 1.3, 0.0)
    rep = block_diagonalize(h, build_symmetry_basis(n), n_max, 1.3, 0.0)
    assert rep.off_block_max < 1e-10
    assert rep.sector_residual < 1e-10
    assert len(rep.blocks) == sum(multiplet_table(n).as_dict().values())


def test_block_diagonalization_with_detuning():
    rep = block_diagonalize(interaction_hamiltonian(3, 3, 1.0, 0.7), build_symmetry_basis(3), 3, 1.0, 0.7)
    assert rep.off_block_max < 1e-10 and rep.sector_residual < 1e-10


def test_block_diagonalize_shape_mismatch():
    with pytest.raises(DimensionError):
        block_diagonalize(np.eye(5), build_symmetry_basis(2), 3)


def _permute_qubits(n, perm):
    p = np.zeros((2**n, 2**n))
    for i in range(2**n):
        bits = [(i >> (n - 1 - q)) & 1 for q in range(n)]
        new = [bits[perm[q]] for q in range(n)]
        p[int("".join(map(str, new)), 2), i] = 1
    return p


@given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.just(n), st.permutations(range(n)))))
def test_collective_operators_permutation_symmetric(case):
    n, perm = case
    p = _permute_qubits(n, perm)
    for op in collective_operators(n):
        assert np.abs(p @ op @ p.T - op).max() < 1e-12
    h = interaction_hamiltonian(n, 2, 1.0, 0.3)
    pf = np.kron(p, np.eye(3))
    assert np.abs(pf @ h @ pf.T - h).max() < 1e-12


def test_interaction_hamiltonian_hermitian_and_conserves_excitations():
    n, n_max = 3, 4
    h = interaction_hamiltonian(n, n_max, 0.8, 0.2)
    assert np.abs(h - h.conj().T).max() < 1e-14
    exc = np.array([bin(q).count("1") + p for q in range(2**n) for p in range(n_max + 1)])
    nz = np.abs(h) > 0
    i, k = np.nonzero(nz & ~np.eye(len(exc), dtype=bool))
    assert np.all(exc[i] == exc[k])
