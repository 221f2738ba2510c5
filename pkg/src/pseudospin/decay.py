"""Single-qubit decay in a register prepared by photon absorption, and its undoing.

A register holding one collective excitation loses it with probability 1/N
when one qubit decays.  What remains is either the dead state |0...0>|0> or
a "dormant" combination of lower-ladder ground states that no longer couples
to the cavity.  Reading the cavity transmittance at the bare frequency tells
the symmetric (hybridized) state apart from the rest, and cycling the
roots-of-unity phase circuit wakes the dormant part up one ladder at a time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .blocks import SystemParams, block_for_excitations
from .dynamics import InitialState, full_space_evolve
from .errors import DimensionError, DomainError
from .gates import apply_circuit_density, circuit_from_phases, dft_switch_k1, dicke_state, fixture_circuit
from .linalg import eig_hermitian, kron
from .symmetry import build_symmetry_basis

EXACT_TOL = 1e-12


def exact_fraction(p: float, max_den: int = 10_000) -> Fraction:
    """Nearest simple fraction; raises if it is further than 1e-12 from ``p``."""
    f = Fraction(p).limit_denominator(max_den)
    if abs(float(f) - p) > EXACT_TOL:
        raise DomainError(f"{p!r} is not a simple rational within {EXACT_TOL}")
    return f


def _qubit_kraus(n_qubits: int, n_fock: int, qubit: int):
    if not 0 <= qubit < n_qubits:
        raise DimensionError(f"qubit {qubit} outside a {n_qubits}-qubit register")
    k0 = np.array([[1.0, 0.0], [0.0, 0.0]])  # |0><0|
    k1 = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|
    out = []
    for k in (k0, k1):
        op = np.ones((1, 1))
        for q in range(n_qubits):
            op = kron(op, k if q == qubit else np.eye(2))
        out.append(kron(op, np.eye(n_fock)))
    return out


def amplitude_damp(rho, qubit: int, n_qubits: int) -> np.ndarray:
    """Complete decay of one qubit: K0 = |0><0|, K1 = |0><1| on that qubit.

    ``rho`` lives on qubits ⊗ Fock; the Fock dimension is inferred.
    """
    rho = np.asarray(rho)
    dq = 2**n_qubits
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] % dq:
        raise DimensionError("density matrix does not fit the register")
    return sum(k @ rho @ k.conj().T for k in _qubit_kraus(n_qubits, rho.shape[0] // dq, qubit))


@dataclass
class BranchNode:
    """One step of the protocol.

    ``probability`` is conditional on the parent.  ``weights`` splits the
    node's state into recovered (symmetric ladder), dormant and dead parts.
    """

    label: str
    action: str
    probability: float
    weights: dict
    rho: np.ndarray | None = field(default=None, repr=False)
    children: list = field(default_factory=list)

    def add(self, child: "BranchNode") -> "BranchNode":
        self.children.append(child)
        return child

    def check(self, tol: float = EXACT_TOL) -> float:
        """Largest deviation of children probabilities from summing to one."""
        worst = 0.0
        if self.children:
            worst = abs(sum(c.probability for c in self.children) - 1)
        for c in self.children:
            worst = max(worst, c.check(tol))
        return worst

    def leaves(self, prob: float = 1.0):
        """Yield (node, absolute probability) for every leaf."""
        p = prob * self.probability
        if not self.children:
            yield self, p
        for c in self.children:
            yield from c.leaves(p)

    def to_dict(self, exact: bool = True) -> dict:
        def render(x):
            if not exact:
                return x
            f = exact_fraction(x)
            return {"numerator": f.numerator, "denominator": f.denominator}
        return {"label": self.label, "action": self.action,
                "probability": render(self.probability),
                "weights": {k: render(v) for k, v in self.weights.items()},
                "children": [c.to_dict(exact) for c in self.children]}


@dataclass
class DecayReport:
    n_qubits: int
    tree: BranchNode
    recovery_probability: float
    dead_probability: float
    dormant_state: np.ndarray
    phase_steps: int

    def to_json(self) -> str:
        return json.dumps({"N": self.n_qubits,
                           "recovery_probability": _frac_dict(self.recovery_probability),
                           "dead_probability": _frac_dict(self.dead_probability),
                           "phase_steps": self.phase_steps,
                           "tree": self.tree.to_dict()}, indent=2)


def _frac_dict(x):
    f = exact_fraction(x)
    return {"numerator": f.numerator, "denominator": f.denominator, "value": float(x)}


def _switch_circuit(n_qubits: int):
    if n_qubits == 3:
        return fixture_circuit("q3_quartet_to_doublet")
    sol = dft_switch_k1(n_qubits, 1)
    return circuit_from_phases(n_qubits, sol.subsets, sol.amplitudes)


def decay_recovery_protocol(params: SystemParams = SystemParams(), n_qubits: int = 3,
                            decayed_qubit: int = 0) -> DecayReport:
    """Exact branch tree of the detect-and-recover protocol.

    Steps: prepare |0...0>|1>, evolve for pi / (2 g sqrt(N)) onto the
    symmetric one-excitation state, let ``decayed_qubit`` decay, then
    alternate transmittance readouts with the phase circuit that advances
    each one-excitation Fourier mode by one step.  A "no transmittance"
    outcome projects onto the symmetric state with an empty cavity.
    """
    if params.delta != 0:
        raise DomainError("the protocol assumes resonance")
    n = n_qubits
    t = math.pi / (2 * params.g * math.sqrt(n))
    psi = full_space_evolve(n, InitialState.computational("0" * n, 1), params, t)
    nf = psi.size // 2**n
    vac = np.eye(nf)[:, :1]
    sym = kron(dicke_state(n, 1)[:, None], vac).ravel()
    dead = kron(np.eye(2**n)[:, :1], vac).ravel()
    proj_sym = np.outer(sym, sym.conj())
    proj_dead = np.outer(dead, dead.conj())

    def weights(rho):
        tr = float(np.trace(rho).real)
        rec = float(np.real(np.trace(proj_sym @ rho))) / tr
        dd = float(np.real(np.trace(proj_dead @ rho))) / tr
        return {"recovered": rec, "dead": dd, "dormant": max(0.0, 1 - rec - dd)}

    rho = np.outer(psi, psi.conj())
    root = BranchNode("prepared", f"evolve {t:.17g} from |{'0' * n}>|1>", 1.0, weights(rho), rho)
    rho = amplitude_damp(rho, decayed_qubit, n)
    node = root.add(BranchNode("decayed", f"qubit {decayed_qubit} decays", 1.0, weights(rho), rho))

    # dormant part right after the decay
    rest = rho - proj_sym @ rho @ proj_sym - proj_dead @ rho @ proj_dead
    rest = rest - proj_sym @ rest - rest @ proj_sym + proj_sym @ rest @ proj_sym
    dormant = eig_hermitian(0.5 * (rest + rest.conj().T)).eigenvectors[:, -1]

    circuit = _switch_circuit(n)
    recovered, steps = 0.0, 0
    weight_path = 1.0
    while True:
        p_no = float(np.real(np.trace(proj_sym @ rho)))
        p_no = min(max(p_no, 0.0), 1.0)
        comp = np.eye(rho.shape[0]) - proj_sym
        rec_rho = proj_sym @ rho @ proj_sym
        node.add(BranchNode("recovered", "readout: no transmittance", p_no,
                            {"recovered": 1.0, "dead": 0.0, "dormant": 0.0}, rec_rho / max(p_no, 1e-300)))
        recovered += weight_path * p_no
        rho_t = comp @ rho @ comp
        p_yes = 1.0 - p_no
        if p_yes < EXACT_TOL:
            node.children[-1].probability = 1.0
            break
        rho = rho_t / p_yes
        w = weights(rho)
        nxt = BranchNode("transmittance", "readout: transmittance", p_yes, w, rho)
        node.add(nxt)
        weight_path *= p_yes
        if w["dormant"] < EXACT_TOL or steps >= n - 1:
            break
        rho = apply_circuit_density(circuit, rho)
        steps += 1
        node = nxt.add(BranchNode("shifted", f"phase circuit #{steps}", 1.0, weights(rho), rho))
    dead_total = 1.0 - recovered
    return DecayReport(n, root, recovered, dead_total, dormant, steps)


# --- spectroscopy after a decay with more photons -------------------------------

@dataclass(frozen=True)
class SectorLine:
    j: float
    copy: int
    excitations: int
    weight: float
    splittings: tuple


def decay_spectroscopy(n_photons: int, n_qubits: int = 3, t: float | None = None,
                       params: SystemParams = SystemParams(), decayed_qubit: int = 0,
                       min_weight: float = 1e-12) -> dict:
    """Rabi-splitting sets of every sector populated before and after a decay.

    The register starts in |0...0>|n_photons>, evolves for ``t`` (default a
    quarter period of the lowest transition), and one qubit decays.  Each
    populated (j, copy, total excitations) sector is listed with its weight
    and its block eigenvalues.  ``distinguishable`` is true when the set of
    splitting tuples after the decay differs from the set before it.
    """
    n = n_qubits
    if t is None:
        t = math.pi / (2 * params.g * math.sqrt(n * n_photons)) if n_photons else 0.0
    psi = full_space_evolve(n, InitialState.computational("0" * n, n_photons), params, t)
    nf = psi.size // 2**n
    rho0 = np.outer(psi, psi.conj())
    rho1 = amplitude_damp(rho0, decayed_qubit, n)
    basis = build_symmetry_basis(n)
    rot = kron(basis.matrix, np.eye(nf))

    def lines(rho):
        r = rot.conj().T @ rho @ rot
        pops = np.real(np.diag(r)).reshape(len(basis.labels), nf)
        acc: dict = {}
        for c, lab in enumerate(basis.labels):
            for p in range(nf):
                if pops[c, p] > min_weight:
                    key = (lab.j, lab.copy, int(round(lab.m + lab.j)) + p)
                    acc[key] = acc.get(key, 0.0) + pops[c, p]
        out = []
        for (j, copy, exc), wgt in sorted(acc.items(), key=lambda kv: (-kv[0][0], kv[0][1], kv[0][2])):
            vals = eig_hermitian(block_for_excitations(j, exc, params).matrix).eigenvalues
            out.append(SectorLine(float(j), copy, exc, wgt, tuple(round(float(v), 12) + 0.0 for v in vals)))
        return out

    before, after = lines(rho0), lines(rho1)
    sig = lambda ls: {l.splittings for l in ls}
    return {"before": before, "after": after,
            "distinguishable": sig(before) != sig(after),
            "dead_or_dormant_weight": sum(l.weight for l in after if len(l.splittings) == 1 and
                                          abs(l.splittings[0]) < 1e-12)}


def spectroscopy_to_json(report: dict) -> str:
    def enc(ls):
        return [{"j": l.j, "copy": l.copy, "excitations": l.excitations, "weight": l.weight,
                 "splittings": list(l.splittings)} for l in ls]
    return json.dumps({"before": enc(report["before"]), "after": enc(report["after"]),
                       "distinguishable": report["distinguishable"],
                       "dead_or_dormant_weight": report["dead_or_dormant_weight"]}, indent=2)


__all__ = ["amplitude_damp", "BranchNode", "DecayReport", "decay_recovery_protocol",
           "decay_spectroscopy", "exact_fraction", "spectroscopy_to_json"]
