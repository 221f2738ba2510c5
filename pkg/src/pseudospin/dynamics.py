"""Population dynamics on single blocks and in the full qubits ⊗ Fock space."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .blocks import SystemParams, block_hamiltonian, nu_tilde
from .errors import DimensionError, DomainError, ResourceError
from .linalg import eig_hermitian, kron
from .symmetry import SymmetryBasis, build_symmetry_basis, format_half, interaction_hamiltonian

FULL_SPACE_QUBIT_CAP = 8


def default_times(t_end: float = 20.0, points: int = 1000, t_start: float = 0.0) -> np.ndarray:
    if points < 2:
        raise DomainError("need at least two time points")
    return np.linspace(t_start, t_end, points)


@dataclass
class TimeSeries:
    """Populations sampled on a time grid; ``values[:, c]`` belongs to ``labels[c]``."""

    times: np.ndarray
    labels: list
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def column(self, label) -> np.ndarray:
        return self.values[:, self.labels.index(label)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.labels])
        for t, row in zip(self.times, self.values):
            w.writerow([f"{t:.17g}", *(f"{v:.17g}" for v in row)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"meta": self.meta, "t": self.times.tolist(),
                           "series": {l: self.values[:, c].tolist() for c, l in enumerate(self.labels)}})


def _evolve_columns(h: np.ndarray, psi0: np.ndarray, times) -> np.ndarray:
    """Rows are exp(i t H) psi0 for each t."""
    dec = eig_hermitian(h)
    v = dec.eigenvectors
    coeff = v.conj().T @ psi0
    phases = np.exp(1j * np.outer(np.asarray(times, dtype=float), dec.eigenvalues))
    return (phases * coeff) @ v.T


def populations_block(j, n_photons: int, m0, params: SystemParams = SystemParams(),
                      times=None) -> TimeSeries:
    """Populations of |j, m>|n'> when starting from |j, m0>|n_photons>.

    The block is the one whose top state carries ``n_photons - (j - m0)``
    photons, so every sample sums to one.
    """
    nu_tilde(j, m0)  # validates m0
    times = default_times() if times is None else np.asarray(times, dtype=float)
    i0 = int(round(j - m0))
    n_top = n_photons - i0
    blk = block_hamiltonian(j, n_top, params)
    psi0 = np.zeros(blk.dim, dtype=complex)
    psi0[i0 - blk.first] = 1.0
    pops = np.abs(_evolve_columns(blk.matrix, psi0, times)) ** 2
    labels = [f"m={format_half(m)},n={p}" for m, p in zip(blk.m_values(), blk.photons())]
    meta = {"j": float(j), "m0": float(m0), "n_photons": int(n_photons),
            "g": params.g, "delta": params.delta}
    return TimeSeries(times, labels, pops, meta)


def population_000(n_photons: int, params: SystemParams = SystemParams(), times=None) -> TimeSeries:
    """Population of |000> for three qubits starting in |000>|n_photons>."""
    full = populations_block(1.5, n_photons, -1.5, params, times)
    label = f"m=-3/2,n={n_photons}"
    ts = TimeSeries(full.times, ["000"], full.column(label)[:, None], dict(full.meta, N=3))
    return ts


@dataclass(frozen=True)
class InitialState:
    """An initial qubits ⊗ Fock state in one of three forms.

    Use :meth:`sector`, :meth:`computational` or :meth:`from_amplitudes`.
    """

    kind: str
    j: float | None = None
    m: float | None = None
    copy: int = 0
    bitstring: str | None = None
    n_photons: int = 0
    amplitudes: tuple | None = None
    n_max: int | None = None

    @classmethod
    def sector(cls, j, m, n_photons: int, copy: int = 0) -> "InitialState":
        nu_tilde(j, m)
        return cls("sector", j=j, m=m, copy=copy, n_photons=n_photons)

    @classmethod
    def computational(cls, bitstring: str, n_photons: int) -> "InitialState":
        if not bitstring or set(bitstring) - {"0", "1"}:
            raise DomainError(f"invalid bitstring {bitstring!r}")
        return cls("computational", bitstring=bitstring, n_photons=n_photons)

    @classmethod
    def from_amplitudes(cls, amplitudes, n_max: int) -> "InitialState":
        a = np.asarray(amplitudes, dtype=complex)
        if abs(np.linalg.norm(a) - 1) > 1e-12:
            raise DomainError("amplitudes must be normalized")
        return cls("amplitudes", amplitudes=tuple(a), n_max=n_max)

    def excitations(self, n_qubits: int) -> int:
        """Largest total excitation number present in the state."""
        if self.kind == "sector":
            return int(round(self.m + n_qubits / 2)) + self.n_photons
        if self.kind == "computational":
            return self.bitstring.count("1") + self.n_photons
        nf = self.n_max + 1
        a = np.asarray(self.amplitudes).reshape(2**n_qubits, nf)
        occ = [bin(q).count("1") + p for q in range(2**n_qubits) for p in range(nf)
               if abs(a[q, p]) > 0]
        return max(occ)

    def vector(self, n_qubits: int, n_max: int, basis: SymmetryBasis | None = None) -> np.ndarray:
        nf = n_max + 1
        if self.kind == "amplitudes":
            a = np.asarray(self.amplitudes).reshape(2**n_qubits, self.n_max + 1)
            if self.n_max > n_max:
                if np.any(a[:, nf:]):
                    raise DimensionError("state exceeds the Fock truncation")
                a = a[:, :nf]
            out = np.zeros((2**n_qubits, nf), dtype=complex)
            out[:, : a.shape[1]] = a
            return out.ravel()
        photon = np.zeros(nf)
        if self.n_photons > n_max:
            raise DimensionError("photon number exceeds the Fock truncation")
        photon[self.n_photons] = 1.0
        if self.kind == "computational":
            if len(self.bitstring) != n_qubits:
                raise DimensionError("bitstring length differs from the qubit count")
            q = np.zeros(2**n_qubits)
            q[int(self.bitstring, 2)] = 1.0
        else:
            basis = basis or build_symmetry_basis(n_qubits)
            q = basis.state(self.j, self.m, self.copy)
        return kron(q[:, None], photon[:, None]).ravel().astype(complex)


def full_space_evolve(n_qubits: int, initial: InitialState, params: SystemParams, t,
                      basis: SymmetryBasis | None = None) -> np.ndarray:
    """State at time(s) ``t`` under exp(i t H) on 2^N ⊗ Fock(0..K+1).

    ``K`` is the excitation content of ``initial``; the truncation is exact
    because the Hamiltonian conserves total excitations.  A scalar ``t`` gives
    one vector; an array gives one row per time.
    """
    if n_qubits > FULL_SPACE_QUBIT_CAP:
        raise ResourceError(f"N={n_qubits} exceeds the full-space cap {FULL_SPACE_QUBIT_CAP}")
    n_max = initial.excitations(n_qubits) + 1
    h = interaction_hamiltonian(n_qubits, n_max, params.g, params.delta)
    psi0 = initial.vector(n_qubits, n_max, basis)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = _evolve_columns(h, psi0, ts)
    return out[0] if np.ndim(t) == 0 else out


def excitation_operator(n_qubits: int, n_max: int) -> np.ndarray:
    """Diagonal of the total excitation number (qubit excitations + photons)."""
    q = np.array([bin(i).count("1") for i in range(2**n_qubits)], dtype=float)
    p = np.arange(n_max + 1, dtype=float)
    return (q[:, None] + p[None, :]).ravel()


def sector_populations(states: np.ndarray, basis: SymmetryBasis, j, copy: int, n_max: int) -> dict:
    """Populations of |j, m>_copy |p> for every m and photon number p."""
    states = np.atleast_2d(states)
    nf = n_max + 1
    amps = states.reshape(states.shape[0], -1, nf)
    out = {}
    for c in basis.columns_of(j, copy):
        lab = basis.labels[c]
        proj = np.einsum("q,tqp->tp", basis.matrix[:, c].conj(), amps)
        for p in range(nf):
            out[(lab.m, p)] = np.abs(proj[:, p]) ** 2
    return out


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray  # angular frequency
    magnitudes: np.ndarray


def discrete_spectrum(series, times) -> Spectrum:
    """Magnitudes of the plain DFT of the mean-removed series on a uniform grid."""
    times = np.asarray(times, dtype=float)
    x = np.asarray(series, dtype=float)
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=1e-12):
        raise DomainError("the time grid must be uniform")
    mags = np.abs(np.fft.rfft(x - x.mean())) / len(x)
    freqs = 2 * np.pi * np.fft.rfftfreq(len(x), dt)
    return Spectrum(freqs, mags)


def spectral_peaks(spec: Spectrum, rel_height: float = 0.05) -> np.ndarray:
    """Angular frequencies of local maxima above ``rel_height`` times the largest."""
    if spec.magnitudes.size == 0 or spec.magnitudes.max() == 0:
        return np.array([])
    idx, _ = find_peaks(spec.magnitudes, height=rel_height * spec.magnitudes.max())
    return spec.frequencies[idx]


def expected_frequencies(j, n_top: int, params: SystemParams = SystemParams()) -> np.ndarray:
    """All distinct positive eigenvalue differences of the (j, n_top) block."""
    w = eig_hermitian(block_hamiltonian(j, n_top, params).matrix).eigenvalues
    d = np.abs(w[:, None] - w[None, :]).ravel()
    d = np.unique(np.round(d[d > 1e-9], 12))
    return d
