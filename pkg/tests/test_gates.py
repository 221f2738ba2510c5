import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pseudospin.errors import DimensionError, DomainError, SwitchSearchError
from pseudospin.gates import (FIXTURE_IDS, Circuit, ConditionalPhaseGate, apply_circuit,
                              apply_circuit_density, circuit_from_phases, dft_switch_k1, dicke_state,
                              fixture_circuit, fixture_input, fixture_residual, kernel_dimension,
                              lower, lowering_block, solve_switch, switch_protocol, weight_subsets)
from pseudospin.symmetry import collective_operators


@pytest.mark.parametrize("name", FIXTURE_IDS)
def test_fixture_circuits_reach_lower_ladder(name):
    assert fixture_residual(name) < 1e-9
    c = fixture_circuit(name)
    out = apply_circuit(c, fixture_input(name))
    assert abs(np.linalg.norm(out) - 1) < 1e-12
    # the output has left the fully symmetric ladder
    k = int(round(np.sum(np.abs(out) ** 2 * [bin(i).count("1") for i in range(out.size)])))
    assert abs(np.vdot(dicke_state(c.n_qubits, k), out)) < 1e-9


def test_three_qubit_fixture_phases():
    c = fixture_circuit("q3_quartet_to_doublet")
    d = c.diagonal()
    # single-excitation amplitudes pick up 1, w, w^2 (or the conjugate ladder)
    phases = np.angle(d[[4, 2, 1]] / d[4])
    w = 2 * np.pi / 3
    assert np.allclose(np.sort(np.mod(phases, 2 * np.pi)), [0, w, 2 * w], atol=1e-12)


@pytest.mark.parametrize("n", range(2, 9))
def test_dft_switch(n):
    for branch in range(1, n):
        sol = dft_switch_k1(n, branch)
        assert sol.residual < 1e-14
        assert sol.magnitude_spread() < 1e-15


def test_dft_switch_invalid():
    with pytest.raises(DomainError):
        dft_switch_k1(1)
    with pytest.raises(DomainError):
        dft_switch_k1(4, 4)


@pytest.mark.parametrize("n", range(1, 9))
def test_kernel_dimension(n):
    for k in range(0, min(4, n) + 1):
        expected = math.comb(n, k) - (math.comb(n, k - 1) if k else 0)
        assert kernel_dimension(n, k) == max(expected, 0)


@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_lower_matches_collective_operator(n, seed):
    r = np.random.default_rng(seed)
    psi = r.normal(size=2**n) + 1j * r.normal(size=2**n)
    _, jm, _, _ = collective_operators(n)
    assert np.abs(lower(psi, n) - jm @ psi).max() < 1e-12


@pytest.mark.parametrize("n,k", [(4, 2), (5, 2), (6, 2), (6, 3)])
def test_solve_switch(n, k):
    sol = solve_switch(n, k)
    assert sol.residual < 1e-10
    assert sol.magnitude_spread() < 1e-12
    assert abs(np.vdot(dicke_state(n, k), sol.state())) < 1e-10
    assert solve_switch(n, k).amplitudes.tolist() == sol.amplitudes.tolist()


def test_solve_switch_reports_failure():
    # seven qubits at weight three: no equal-magnitude kernel vector is found
    with pytest.raises(SwitchSearchError) as info:
        solve_switch(7, 3, restarts=2, iterations=50)
    assert info.value.null_space.shape == (35, 14)


def test_solve_switch_domain():
    with pytest.raises(DomainError):
        solve_switch(4, 3)


@given(st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n // 2))),
       st.integers(0, 2**31 - 1))
def test_circuit_from_phases_realizes_amplitudes(case, seed):
    n, k = case
    subsets = weight_subsets(n, k)
    phases = np.exp(1j * np.random.default_rng(seed).uniform(-np.pi, np.pi, len(subsets)))
    amps = phases / math.sqrt(len(subsets))
    out = apply_circuit(circuit_from_phases(n, subsets, amps), dicke_state(n, k))
    target = np.zeros(2**n, dtype=complex)
    for s, a in zip(subsets, amps):
        target[sum(1 << (n - 1 - q) for q in s)] = a
    # realized up to the global phase of the first amplitude
    assert np.abs(out * amps[0] / abs(amps[0]) - target).max() < 1e-12


def test_circuit_from_phases_needs_equal_magnitudes():
    with pytest.raises(DomainError):
        circuit_from_phases(2, [(0,), (1,)], [1.0, 0.5])


def test_gate_validation_and_json():
    with pytest.raises(DomainError):
        ConditionalPhaseGate(0, 1.0, {0: 1})
    with pytest.raises(DomainError):
        ConditionalPhaseGate(0, 1.0, {1: 2})
    with pytest.raises(DimensionError):
        Circuit(2, [ConditionalPhaseGate(2, 1.0)])
    c = fixture_circuit("q6_to_singlet")
    back = Circuit.from_json(c.to_json())
    assert back == c


def test_gate_mask_msb_convention():
    g = ConditionalPhaseGate(0, np.pi, {2: 0})
    assert np.flatnonzero(g.mask(3)).tolist() == [4, 6]


def test_density_application_matches_vector():
    c = fixture_circuit("q4_quintet_to_triplet")
    psi = np.random.default_rng(3).normal(size=32) + 0j
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    out = apply_circuit(c, psi)
    assert np.abs(apply_circuit_density(c, rho) - np.outer(out, out.conj())).max() < 1e-14
    with pytest.raises(DimensionError):
        apply_circuit(c, np.ones(6))


def test_lowering_block_shape():
    assert lowering_block(4, 2).shape == (4, 6)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (5, 1), (8, 1), (4, 2), (6, 3)])
def test_switch_protocol(n, k):
    trace = switch_protocol(n, k)
    assert trace.passed
    assert trace.diagnostics["prepared_overlap"] == pytest.approx(1, abs=1e-12)
    d = trace.to_dict()
    assert d["N"] == n and d["passed"]
