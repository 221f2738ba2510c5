import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from pseudospin.linalg import (canonical_phase, eig_hermitian, expm_i, expm_i_series, is_hermitian,
                               is_unitary, kron, kron_all)

from conftest import random_hermitian

seeds = st.integers(0, 2**31 - 1)
dims = st.integers(1, 6)


@given(seeds, dims)
def test_eig_reconstructs(seed, d):
    h = random_hermitian(np.random.default_rng(seed), d)
    dec = eig_hermitian(h)
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    assert np.abs(dec.reconstruct() - h).max() < 1e-12
    assert is_unitary(dec.eigenvectors)


def test_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        eig_hermitian(np.zeros((2, 3)))


def test_degenerate_eigenvectors_are_canonical():
    # two different bases of the same degenerate subspace give the same output
    d = np.diag([1.0, 1.0, 2.0])
    q, _ = np.linalg.qr(np.array([[1.0, 2.0, 0.0], [3.0, -1.0, 0.0], [0.0, 0.0, 1.0]]))
    a = eig_hermitian(d).eigenvectors
    b = eig_hermitian(q @ d @ q.T).eigenvectors
    pa = a[:, :2] @ a[:, :2].conj().T
    pb = b[:, :2] @ b[:, :2].conj().T
    assert np.abs(pa - pb).max() < 1e-12
    assert np.abs(eig_hermitian(q @ d @ q.T).eigenvectors - b).max() < 1e-14


@given(seeds, dims, st.floats(-5, 5))
def test_expm_matches_scipy(seed, d, t):
    h = random_hermitian(np.random.default_rng(seed), d)
    assert np.abs(expm_i(h, t) - expm(1j * t * h)).max() < 1e-10


@given(seeds, dims, st.floats(-3, 3), st.floats(-3, 3))
def test_group_property(seed, d, s, t):
    h = random_hermitian(np.random.default_rng(seed), d)
    assert np.abs(expm_i(h, s) @ expm_i(h, t) - expm_i(h, s + t)).max() < 1e-10


@given(seeds, dims, st.floats(-10, 10))
def test_propagator_unitary_with_unit_circle_spectrum(seed, d, t):
    u = expm_i(random_hermitian(np.random.default_rng(seed), d), t)
    assert is_unitary(u)
    assert np.abs(np.abs(np.linalg.eigvals(u)) - 1).max() < 1e-10


def test_series_matches_single(rng):
    h = random_hermitian(rng, 4)
    ts = np.linspace(0, 3, 7)
    series = expm_i_series(h, ts)
    for t, u in zip(ts, series):
        assert np.abs(u - expm_i(h, t)).max() < 1e-12


@given(seeds)
def test_kron_associative_and_matches_numpy(seed):
    r = np.random.default_rng(seed)
    a, b, c = (r.normal(size=(r.integers(1, 4), r.integers(1, 4))) for _ in range(3))
    assert np.allclose(kron(a, b), np.kron(a, b), atol=0)
    assert np.abs(kron(kron(a, b), c) - kron(a, kron(b, c))).max() < 1e-14
    assert np.abs(kron_all(a, b, c) - np.kron(np.kron(a, b), c)).max() < 1e-14


def test_canonical_phase_real_positive():
    v = np.array([0.0, 1j, -1.0]) / np.sqrt(2)
    w = canonical_phase(v)
    nz = np.flatnonzero(np.abs(w) > 1e-10)
    lead = w[nz[np.argmax(np.abs(w[nz]))]]
    assert abs(lead.imag) < 1e-15 and lead.real > 0


def test_is_hermitian():
    assert is_hermitian(np.array([[1, 1j], [-1j, 2]]))
    assert not is_hermitian(np.array([[1, 1j], [1j, 2]]))
