"""Conditional-phase circuits that move states between pseudospin ladders.

A state of a symmetric ladder with k excitations has equal amplitudes on all
weight-k bitstrings.  Re-phasing those amplitudes so that the collective
lowering operator annihilates the result turns it into the bottom state of a
lower-j ladder, which no longer exchanges photons with an empty cavity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import least_squares

from .blocks import SystemParams
from .errors import DimensionError, DomainError, SwitchSearchError
from .linalg import kron

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ConditionalPhaseGate:
    """Multiply by exp(i phase) when ``target`` is 1 and every control matches."""

    target: int
    phase: float
    controls: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.target in self.controls:
            raise DomainError("the target qubit cannot also be a control")
        if any(b not in (0, 1) for b in self.controls.values()):
            raise DomainError("control values must be 0 or 1")
        object.__setattr__(self, "target", int(self.target))
        object.__setattr__(self, "phase", float(self.phase))
        object.__setattr__(self, "controls", {int(k): int(v) for k, v in sorted(self.controls.items())})

    def mask(self, n_qubits: int) -> np.ndarray:
        """Boolean mask over computational indices where the phase applies."""
        idx = np.arange(2**n_qubits)
        on = (idx >> (n_qubits - 1 - self.target)) & 1 == 1
        for q, b in self.controls.items():
            on &= ((idx >> (n_qubits - 1 - q)) & 1) == b
        return on


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if not 0 <= g.target < self.n_qubits or any(not 0 <= q < self.n_qubits for q in g.controls):
                raise DimensionError("gate index outside the register")

    def diagonal(self) -> np.ndarray:
        """Diagonal of the circuit unitary over the 2^N computational basis."""
        phase = np.zeros(2**self.n_qubits)
        for g in self.gates:
            phase[g.mask(self.n_qubits)] += g.phase
        return np.exp(1j * phase)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal())

    def to_json(self) -> str:
        return json.dumps({"N": self.n_qubits, "gates": [
            {"target": g.target, "controls": {str(k): v for k, v in g.controls.items()},
             "phase_radians": g.phase} for g in self.gates]})

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        data = json.loads(text)
        gates = [ConditionalPhaseGate(g["target"], float(g["phase_radians"]),
                                      {int(k): int(v) for k, v in g["controls"].items()})
                 for g in data["gates"]]
        return cls(int(data["N"]), gates)


def apply_circuit(circuit: Circuit, state) -> np.ndarray:
    """Apply a circuit to a qubit or qubit ⊗ Fock state vector."""
    state = np.asarray(state)
    dq = 2**circuit.n_qubits
    if state.ndim != 1 or state.size % dq:
        raise DimensionError(f"state of length {state.size} does not fit {circuit.n_qubits} qubits")
    nf = state.size // dq
    return (state.reshape(dq, nf) * circuit.diagonal()[:, None]).ravel()


def apply_circuit_density(circuit: Circuit, rho) -> np.ndarray:
    rho = np.asarray(rho)
    dq = 2**circuit.n_qubits
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] % dq:
        raise DimensionError("density matrix does not fit the register")
    d = np.repeat(circuit.diagonal(), rho.shape[0] // dq)
    return d[:, None] * rho * d.conj()[None, :]


# --- kernel of the lowering operator -----------------------------------------

def weight_subsets(n_qubits: int, k: int) -> list:
    """Excited-qubit sets of size k in lexicographic order."""
    return list(combinations(range(n_qubits), k))


def subset_index(n_qubits: int, subset) -> int:
    return sum(1 << (n_qubits - 1 - q) for q in subset)


def lower(psi, n_qubits: int) -> np.ndarray:
    """Apply J- = sum of single-qubit lowering operators to a qubit state."""
    psi = np.asarray(psi)
    out = np.zeros(2**n_qubits, dtype=complex)
    idx = np.arange(2**n_qubits)
    for q in range(n_qubits):
        bit = 1 << (n_qubits - 1 - q)
        src = idx[(idx & bit) != 0]
        np.add.at(out, src ^ bit, psi[src])
    return out


def lowering_block(n_qubits: int, k: int) -> np.ndarray:
    """Matrix of J- from weight-k states to weight-(k-1) states (subset bases)."""
    rows = {s: r for r, s in enumerate(weight_subsets(n_qubits, k - 1))}
    cols = weight_subsets(n_qubits, k)
    a = np.zeros((len(rows), len(cols)))
    for c, s in enumerate(cols):
        for q in s:
            a[rows[tuple(x for x in s if x != q)], c] = 1.0
    return a


def kernel_dimension(n_qubits: int, k: int) -> int:
    """Numerical nullity of the weight-k lowering block."""
    if not 0 <= k <= n_qubits:
        raise DomainError("need 0 <= k <= N")
    if k == 0:
        return 1
    a = lowering_block(n_qubits, k)
    return a.shape[1] - int(np.linalg.matrix_rank(a))


@dataclass(frozen=True)
class SwitchSolution:
    n_qubits: int
    k: int
    subsets: tuple
    amplitudes: np.ndarray
    residual: float
    method: str = ""

    def state(self) -> np.ndarray:
        psi = np.zeros(2**self.n_qubits, dtype=complex)
        for s, c in zip(self.subsets, self.amplitudes):
            psi[subset_index(self.n_qubits, s)] = c
        return psi

    def magnitude_spread(self) -> float:
        a = np.abs(self.amplitudes)
        return float(a.max() - a.min())


def _solution(n_qubits, k, subsets, amps, method) -> SwitchSolution:
    amps = np.asarray(amps, dtype=complex)
    amps = amps / np.linalg.norm(amps)
    amps = amps * (abs(amps[0]) / amps[0])
    sol = SwitchSolution(n_qubits, k, tuple(subsets), amps, 0.0, method)
    res = float(np.linalg.norm(lower(sol.state(), n_qubits)))
    return SwitchSolution(n_qubits, k, tuple(subsets), amps, res, method)


def dft_switch_k1(n_qubits: int, branch: int = 1) -> SwitchSolution:
    """c_q = exp(2 pi i q r / N) / sqrt(N) on the state with only qubit q excited."""
    if n_qubits < 2:
        raise DomainError("need at least two qubits")
    if branch % n_qubits == 0:
        raise DomainError("branch 0 is the symmetric state, not a switch")
    q = np.arange(n_qubits)
    amps = np.exp(2j * np.pi * q * branch / n_qubits) / math.sqrt(n_qubits)
    sol = SwitchSolution(n_qubits, 1, tuple((i,) for i in q), amps, 0.0, "dft")
    res = float(np.linalg.norm(lower(sol.state(), n_qubits)))
    return SwitchSolution(n_qubits, 1, sol.subsets, amps, res, "dft")


def _roots_guess(n_qubits: int, k: int, subsets) -> np.ndarray:
    d = n_qubits - k + 1
    return np.array([np.exp(2j * np.pi * (sum(s) % d) / d) for s in subsets])


def solve_switch(n_qubits: int, k: int, seed: int = 0, restarts: int = 20,
                 iterations: int = 500) -> SwitchSolution:
    """Equal-magnitude weight-k state annihilated by J-.

    First tries phases that are roots of unity of order N - k + 1 indexed by
    the position sum of each subset.  If that fails, alternates between the
    exact null space of the lowering block and the equal-magnitude set from
    seeded random starts, then polishes the phases by least squares.
    """
    if not 1 <= k <= n_qubits / 2:
        raise DomainError("need 1 <= k <= N/2")
    subsets = weight_subsets(n_qubits, k)
    guess = _solution(n_qubits, k, subsets, _roots_guess(n_qubits, k, subsets), "roots-of-unity")
    if guess.residual < RESIDUAL_TOL:
        return guess

    a = lowering_block(n_qubits, k)
    kern = null_space(a)
    proj = kern @ kern.T
    size = len(subsets)
    rng = np.random.default_rng(seed)

    def resid(theta):
        r = a @ np.exp(1j * theta) / math.sqrt(size)
        return np.concatenate([r.real, r.imag])

    for _ in range(restarts):
        x = kern @ (rng.normal(size=kern.shape[1]) + 1j * rng.normal(size=kern.shape[1]))
        for _ in range(iterations):
            y = np.exp(1j * np.angle(x))
            x = proj @ y
            if np.linalg.norm(x - y) < 1e-6 * math.sqrt(size):
                break
        fit = least_squares(resid, np.angle(x), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        cand = _solution(n_qubits, k, subsets, np.exp(1j * fit.x), "null-space search")
        if cand.residual < RESIDUAL_TOL:
            return cand
    raise SwitchSearchError(f"no equal-magnitude kernel vector found for N={n_qubits}, k={k}", kern)


def dicke_state(n_qubits: int, k: int) -> np.ndarray:
    """Symmetric weight-k state |j=N/2, m=k-N/2>."""
    psi = np.zeros(2**n_qubits, dtype=complex)
    subsets = weight_subsets(n_qubits, k)
    for s in subsets:
        psi[subset_index(n_qubits, s)] = 1.0
    return psi / math.sqrt(len(subsets))


def circuit_from_phases(n_qubits: int, subsets, amplitudes, tol: float = 1e-14) -> Circuit:
    """Circuit mapping the equal-weight superposition of ``subsets`` to ``amplitudes``.

    One gate per bitstring with a nontrivial phase: its last excited qubit is
    the target and every other qubit is a control fixed to its value.
    """
    amplitudes = np.asarray(amplitudes, dtype=complex)
    mags = np.abs(amplitudes)
    if mags.max() - mags.min() > 1e-9 * mags.max():
        raise DomainError("a diagonal phase circuit needs equal-magnitude amplitudes")
    ref = amplitudes[0] / abs(amplitudes[0])
    gates = []
    for s, c in zip(subsets, amplitudes):
        angle = float(np.angle(c / ref))
        if abs(angle) <= tol or not s:
            continue
        target = max(s)
        controls = {q: int(q in s) for q in range(n_qubits) if q != target}
        gates.append(ConditionalPhaseGate(target, angle, controls))
    return Circuit(n_qubits, gates)


# --- reference circuits --------------------------------------------------------

def _others(n_qubits, target, ones=()):
    return {q: int(q in ones) for q in range(n_qubits) if q != target}


def _q3():
    w = 2 * np.pi / 3
    return Circuit(3, [ConditionalPhaseGate(1, w, {0: 0, 2: 0}),
                       ConditionalPhaseGate(2, -w, {0: 0, 1: 0})])


def _q4_quintet():
    h = np.pi / 2
    return Circuit(4, [ConditionalPhaseGate(3, h, _others(4, 3)),
                       ConditionalPhaseGate(2, np.pi, _others(4, 2)),
                       ConditionalPhaseGate(1, -h, _others(4, 1))])


def _q4_triplet():
    h = np.pi / 2
    return Circuit(4, [ConditionalPhaseGate(3, -h, {0: 1, 1: 0, 2: 0}),
                       ConditionalPhaseGate(2, h, {0: 0, 1: 1, 3: 0}),
                       ConditionalPhaseGate(1, np.pi, {0: 1, 2: 0, 3: 0})])


def _q6_septet():
    return Circuit(6, [ConditionalPhaseGate(t, t * np.pi / 3, _others(6, t)) for t in range(1, 6)])


_Q6_TRIPLET = [  # (target, angle / (pi/5), qubits set to 1 among the controls)
    (1, 8, (0,)), (2, 4, (0,)), (2, 2, (1,)), (3, 6, (0,)), (3, 8, (2,)),
    (4, 4, (1,)), (4, 6, (2,)), (4, 2, (3,)), (5, 2, (0,)), (5, 6, (1,)),
    (5, 4, (3,)), (5, 8, (4,)),
]

_Q6_SINGLET = [  # (target, angle / (pi/2), qubits set to 1 among the controls)
    (3, 3, (0, 1)), (3, 2, (0, 2)), (3, 1, (1, 2)), (4, 1, (0, 1)), (4, 2, (0, 2)),
    (4, 3, (1, 2)), (4, 2, (1, 3)), (5, 2, (0, 1)), (5, 2, (1, 2)), (5, 1, (0, 3)),
    (5, 3, (2, 3)), (5, 3, (0, 4)), (5, 1, (2, 4)), (5, 2, (3, 4)),
]


def _table_circuit(rows, unit):
    return Circuit(6, [ConditionalPhaseGate(t, a * unit, _others(6, t, ones)) for t, a, ones in rows])


FIXTURE_IDS = ("q3_quartet_to_doublet", "q4_quintet_to_triplet", "q4_triplet_to_singlet",
               "q6_septet_to_quintet", "q6_to_triplet", "q6_to_singlet")


def fixture_circuit(name: str) -> Circuit:
    """Reference circuits for 3, 4 and 6 qubits; qubit 0 is the top wire."""
    builders = {
        "q3_quartet_to_doublet": _q3,
        "q4_quintet_to_triplet": _q4_quintet,
        "q4_triplet_to_singlet": _q4_triplet,
        "q6_septet_to_quintet": _q6_septet,
        "q6_to_triplet": lambda: _table_circuit(_Q6_TRIPLET, np.pi / 5),
        "q6_to_singlet": lambda: _table_circuit(_Q6_SINGLET, np.pi / 2),
    }
    if name not in builders:
        raise DomainError(f"unknown fixture circuit {name!r}")
    return builders[name]()


def _raise_op(psi, n_qubits):
    out = np.zeros(2**n_qubits, dtype=complex)
    idx = np.arange(2**n_qubits)
    for q in range(n_qubits):
        bit = 1 << (n_qubits - 1 - q)
        src = idx[(idx & bit) == 0]
        np.add.at(out, src | bit, psi[src])
    return out


def fixture_input(name: str) -> np.ndarray:
    """The state each fixture circuit is designed to act on."""
    if name == "q3_quartet_to_doublet":
        return dicke_state(3, 1)
    if name == "q4_quintet_to_triplet":
        return dicke_state(4, 1)
    if name == "q4_triplet_to_singlet":
        v = _raise_op(apply_circuit(fixture_circuit("q4_quintet_to_triplet"), dicke_state(4, 1)), 4)
        return v / np.linalg.norm(v)
    if name == "q6_septet_to_quintet":
        return dicke_state(6, 1)
    if name == "q6_to_triplet":
        return dicke_state(6, 2)
    if name == "q6_to_singlet":
        return dicke_state(6, 3)
    raise DomainError(f"unknown fixture circuit {name!r}")


def fixture_residual(name: str) -> float:
    c = fixture_circuit(name)
    out = apply_circuit(c, fixture_input(name))
    return float(np.linalg.norm(lower(out, c.n_qubits)))


# --- end-to-end switching protocol ---------------------------------------------

@dataclass
class ProtocolTrace:
    n_qubits: int
    k: int
    evolve_time: float | None
    prepared: np.ndarray
    circuit: Circuit
    final: np.ndarray
    lowering_residual: float
    photon_leak: float
    stationarity: float
    symmetric_overlap: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return max(self.lowering_residual, self.photon_leak, self.stationarity,
                   self.symmetric_overlap) < 1e-9

    def to_dict(self) -> dict:
        return {"N": self.n_qubits, "k": self.k, "evolve_time": self.evolve_time,
                "circuit": json.loads(self.circuit.to_json()),
                "lowering_residual": self.lowering_residual, "photon_leak": self.photon_leak,
                "stationarity": self.stationarity, "symmetric_overlap": self.symmetric_overlap,
                "passed": self.passed, **self.diagnostics}


def switch_protocol(n_qubits: int, k: int = 1, params: SystemParams = SystemParams(),
                    seed: int = 0) -> ProtocolTrace:
    """Prepare a symmetric weight-k state with an empty cavity and switch ladders.

    For k = 1 the state is made from |0...0>|1> by evolving for
    pi / (2 g sqrt(N)) and the circuit is the roots-of-unity phase ladder.
    For k > 1 the symmetric state is taken as given and the circuit comes
    from :func:`solve_switch`.
    """
    from .dynamics import InitialState, full_space_evolve
    from .symmetry import interaction_hamiltonian

    if k == 1:
        t = math.pi / (2 * params.g * math.sqrt(n_qubits))
        psi = full_space_evolve(n_qubits, InitialState.computational("0" * n_qubits, 1), params, t)
        n_max = 2
        sol = dft_switch_k1(n_qubits, 1)
    else:
        t = None
        n_max = k + 1
        psi = kron(dicke_state(n_qubits, k)[:, None], np.eye(n_max + 1)[:, :1]).ravel()
        sol = solve_switch(n_qubits, k, seed=seed)
    circ = circuit_from_phases(n_qubits, sol.subsets, sol.amplitudes)
    final = apply_circuit(circ, psi)
    amps = final.reshape(2**n_qubits, n_max + 1)
    qubits = amps[:, 0]
    leak = float(np.linalg.norm(amps[:, 1:]))
    h = interaction_hamiltonian(n_qubits, n_max, params.g, params.delta)
    stat = float(np.linalg.norm(h @ final))
    sym = dicke_state(n_qubits, k)
    overlap = 0.0
    for kk in range(n_qubits + 1):
        overlap = max(overlap, abs(np.vdot(dicke_state(n_qubits, kk), qubits)))
    diag = {"prepared_overlap": float(abs(np.vdot(kron(sym[:, None], np.eye(n_max + 1)[:, :1]).ravel(), psi)))}
    return ProtocolTrace(n_qubits, k, t, psi, circ, final,
                         float(np.linalg.norm(lower(qubits, n_qubits))), leak, stat, overlap, diag)
