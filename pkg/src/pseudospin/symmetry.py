"""Pseudospin decomposition of N identical qubits.

Conventions
-----------
* Qubit 0 is the leftmost character of a bitstring and the most significant
  bit of a computational-basis index, so ``int("011", 2)`` is |011>.
* |1> is the excited qubit state; sigma^+ maps |0> to |1>.
* Joint qubit-cavity vectors are ordered qubits ⊗ Fock, i.e. the index of
  |b>|p> is ``int(b, 2) * (n_max + 1) + p``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DimensionError, DomainError, ResourceError
from .linalg import canonical_span_basis, kron, max_abs

DEFAULT_QUBIT_CAP = 12

SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]])
SIGMA_MINUS = SIGMA_PLUS.T


def twice(x) -> int:
    """Return 2x as an int, raising DomainError if x is not a half-integer."""
    y = 2 * Fraction(x).limit_denominator(64)
    if y.denominator != 1 or abs(float(y) - 2 * float(x)) > 1e-9:
        raise DomainError(f"{x!r} is not a half-integer")
    return int(y)


def format_half(x) -> str:
    """Render 1.5 as '3/2', -0.5 as '-1/2', 2.0 as '2'."""
    t = twice(x)
    return str(t // 2) if t % 2 == 0 else f"{t}/2"


def _check_admissible(n_qubits: int, j) -> int:
    tj = twice(j)
    if n_qubits < 1:
        raise DomainError("need at least one qubit")
    if tj < 0 or tj > n_qubits or (n_qubits - tj) % 2:
        raise DomainError(f"j={j} is not admissible for N={n_qubits}")
    return tj


@dataclass(frozen=True, order=True)
class PseudospinLabel:
    """|j, m> of the ``copy``-th multiplet with pseudospin j."""

    j: float
    m: float
    copy: int = 0

    def __post_init__(self):
        tj, tm = twice(self.j), twice(self.m)
        if tj < 0 or abs(tm) > tj or (tj - tm) % 2:
            raise DomainError(f"invalid pseudospin label j={self.j}, m={self.m}")
        if self.copy < 0:
            raise DomainError("copy index must be non-negative")

    def __str__(self):
        return f"|j={format_half(self.j)},m={format_half(self.m)}>_{self.copy}"


def abundance(n_qubits: int, j) -> int:
    """Number of independent spin-j multiplets among N qubits.

    (2j+1) N! / ((N/2 - j)! (N/2 + j + 1)!), evaluated in integers.
    """
    tj = _check_admissible(n_qubits, j)
    a = (n_qubits - tj) // 2
    b = (n_qubits + tj) // 2 + 1
    num = (tj + 1) * math.factorial(n_qubits)
    den = math.factorial(a) * math.factorial(b)
    assert num % den == 0
    return num // den


@dataclass(frozen=True)
class MultipletTable:
    n_qubits: int
    rows: tuple  # ((j, abundance), ...) with j descending

    def dimension(self) -> int:
        return sum(int(twice(j) + 1) * ab for j, ab in self.rows)

    def as_dict(self) -> dict:
        return {float(j): ab for j, ab in self.rows}


def multiplet_table(n_qubits: int) -> MultipletTable:
    if n_qubits < 1:
        raise DomainError("need at least one qubit")
    rows = tuple((tj / 2, abundance(n_qubits, tj / 2)) for tj in range(n_qubits, -1, -2))
    return MultipletTable(n_qubits, rows)


def _check_cap(n_qubits: int, cap: int) -> None:
    if n_qubits < 1:
        raise DomainError("need at least one qubit")
    if n_qubits > cap:
        raise ResourceError(f"N={n_qubits} exceeds the qubit cap {cap}")


def single_qubit_operator(op, qubit: int, n_qubits: int) -> np.ndarray:
    out = np.ones((1, 1))
    for q in range(n_qubits):
        out = kron(out, op if q == qubit else np.eye(2))
    return out


def collective_operators(n_qubits: int, cap: int = DEFAULT_QUBIT_CAP):
    """Return (J+, J-, Jz, J^2) on the 2^N computational basis.

    J+ is the sum of single-qubit raising operators; Jz = [J+, J-]/2 and
    J^2 = (J+J- + J-J+)/2 + Jz^2.  All four are real matrices.
    """
    _check_cap(n_qubits, cap)
    dim = 2**n_qubits
    jp = np.zeros((dim, dim))
    idx = np.arange(dim)
    for q in range(n_qubits):
        bit = 1 << (n_qubits - 1 - q)
        src = idx[(idx & bit) == 0]
        jp[src | bit, src] = 1.0
    jm = jp.T.copy()
    jz = 0.5 * (jp @ jm - jm @ jp)
    j2 = 0.5 * (jp @ jm + jm @ jp) + jz @ jz
    return jp, jm, jz, j2


def popcount_indices(n_qubits: int, k: int) -> np.ndarray:
    """Computational indices with exactly k excited qubits, ascending."""
    idx = np.arange(2**n_qubits)
    counts = np.array([bin(i).count("1") for i in idx])
    return idx[counts == k]


def annihilation(n_max: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on photon numbers 0..n_max."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def interaction_hamiltonian(n_qubits: int, n_max: int, g: float = 1.0, delta: float = 0.0,
                            cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """g (J+ a + J- a^dag) + delta Jz on qubits ⊗ Fock(0..n_max)."""
    jp, jm, jz, _ = collective_operators(n_qubits, cap)
    a = annihilation(n_max)
    h = g * (kron(jp, a) + kron(jm, a.T))
    if delta:
        h = h + delta * kron(jz, np.eye(n_max + 1))
    return h


@dataclass
class SymmetryBasis:
    """Unitary change of basis from the computational basis to |j, m>_copy states.

    ``matrix[:, c]`` is the state labelled ``labels[c]``.  Columns are ordered
    by j descending, then copy, then m descending.
    """

    n_qubits: int
    labels: list
    matrix: np.ndarray
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (2**self.n_qubits, len(self.labels)):
            raise DimensionError("basis matrix does not match labels")
        self._index = {(twice(l.j), twice(l.m), l.copy): c for c, l in enumerate(self.labels)}

    def column_index(self, j, m, copy: int = 0) -> int:
        return self._index[(twice(j), twice(m), copy)]

    def state(self, j, m, copy: int = 0) -> np.ndarray:
        return self.matrix[:, self.column_index(j, m, copy)]

    def multiplets(self) -> list:
        """Distinct (j, copy) pairs in column order."""
        seen = []
        for l in self.labels:
            if (l.j, l.copy) not in seen:
                seen.append((l.j, l.copy))
        return seen

    def multiplicities(self) -> dict:
        out: dict = {}
        for j, _ in self.multiplets():
            out[j] = out.get(j, 0) + 1
        return out

    def columns_of(self, j, copy: int | None = None) -> list:
        tj = twice(j)
        return [c for c, l in enumerate(self.labels)
                if twice(l.j) == tj and (copy is None or l.copy == copy)]

    def sector_projector(self, j) -> np.ndarray:
        v = self.matrix[:, self.columns_of(j)]
        return v @ v.conj().T

    def to_json(self) -> str:
        cols = []
        for c, l in enumerate(self.labels):
            amps = self.matrix[:, c]
            cols.append({"j": float(l.j), "m": float(l.m), "copy": l.copy,
                         "amplitudes": [[float(a.real), float(a.imag)] for a in amps]})
        return json.dumps({"N": self.n_qubits, "columns": cols})

    @classmethod
    def from_json(cls, text: str) -> "SymmetryBasis":
        data = json.loads(text)
        labels = [PseudospinLabel(c["j"], c["m"], c["copy"]) for c in data["columns"]]
        mat = np.array([[complex(re, im) for re, im in c["amplitudes"]] for c in data["columns"]]).T
        return cls(data["N"], labels, mat)


def ladder_coefficient(j, m) -> float:
    """Amplitude of |j, m+1> in J+|j, m>: sqrt((j - m)(1 + j + m))."""
    return math.sqrt(max((j - m) * (1 + j + m), 0.0))


def build_symmetry_basis(n_qubits: int, cap: int = DEFAULT_QUBIT_CAP) -> SymmetryBasis:
    """Highest-weight construction of an orthonormal |j, m>_copy basis.

    For each weight m >= 0 the kernel of J+ on that weight space holds the
    top states of the j = m multiplets; its canonical basis (index-seeded
    Gram-Schmidt, first component real positive) fixes the copies, and the
    ladders follow from normalized applications of J-.  With this choice
    J-|j, m>_c = nu(j, m-1) |j, m-1>_c holds exactly.
    """
    _check_cap(n_qubits, cap)
    jp, jm, _, _ = collective_operators(n_qubits, cap)
    dim = 2**n_qubits
    ladders = []  # (j, copy, [columns from m=j down to m=-j])
    for k in range(n_qubits, (n_qubits - 1) // 2, -1):
        j = k - n_qubits / 2
        if j < 0:
            break
        src = popcount_indices(n_qubits, k)
        if k < n_qubits:
            dst = popcount_indices(n_qubits, k + 1)
            block = jp[np.ix_(dst, src)]
            _, s, vh = np.linalg.svd(block)
            rank = int(np.sum(s > 1e-10 * max(1.0, s.max() if s.size else 1.0)))
            kernel = vh[rank:].conj().T
        else:
            kernel = np.eye(len(src))
        if kernel.shape[1] == 0:
            continue
        kernel = canonical_span_basis(kernel)
        for copy in range(kernel.shape[1]):
            top = np.zeros(dim, dtype=complex)
            top[src] = kernel[:, copy]
            cols = [top]
            m = j
            while m > -j:
                nxt = jm @ cols[-1]
                cols.append(nxt / ladder_coefficient(j, m - 1))
                m -= 1
            ladders.append((j, copy, cols))
    ladders.sort(key=lambda item: (-item[0], item[1]))
    labels, columns = [], []
    for j, copy, cols in ladders:
        for i, col in enumerate(cols):
            labels.append(PseudospinLabel(j, j - i, copy))
            columns.append(col)
    return SymmetryBasis(n_qubits, labels, np.column_stack(columns))


def _ket(n_qubits: int, terms: dict) -> np.ndarray:
    v = np.zeros(2**n_qubits, dtype=complex)
    for bits, amp in terms.items():
        v[int(bits, 2)] += amp
    return v


def _fixture_columns(n_qubits: int):
    w = np.exp(2j * np.pi / 3)
    if n_qubits == 2:
        r = 1 / math.sqrt(2)
        return [
            ((1, 1, 0), {"11": 1}),
            ((1, 0, 0), {"01": r, "10": r}),
            ((1, -1, 0), {"00": 1}),
            ((0, 0, 0), {"01": r, "10": -r}),
        ]
    if n_qubits == 3:
        r = 1 / math.sqrt(3)
        return [
            ((1.5, 1.5, 0), {"111": 1}),
            ((1.5, 0.5, 0), {"011": r, "101": r, "110": r}),
            ((1.5, -0.5, 0), {"001": r, "010": r, "100": r}),
            ((1.5, -1.5, 0), {"000": 1}),
            ((0.5, 0.5, 0), {"011": r, "101": r * w, "110": r * w.conjugate()}),
            ((0.5, -0.5, 0), {"100": r, "010": r * w, "001": r * w.conjugate()}),
            ((0.5, 0.5, 1), {"011": r, "101": r * w.conjugate(), "110": r * w}),
            ((0.5, -0.5, 1), {"100": r, "010": r * w.conjugate(), "001": r * w}),
        ]
    if n_qubits == 4:
        h, r6 = 0.5, 1 / math.sqrt(6)
        ph = np.exp(-3j * np.pi / 4)
        wc = w.conjugate()
        return [
            ((2, 2, 0), {"1111": 1}),
            ((2, 1, 0), {"1110": h, "1101": h, "1011": h, "0111": h}),
            ((2, 0, 0), {b: r6 for b in ("0011", "0101", "0110", "1001", "1010", "1100")}),
            ((2, -1, 0), {"0001": h, "0010": h, "0100": h, "1000": h}),
            ((2, -2, 0), {"0000": 1}),
            ((1, 1, 0), {"0111": h, "1011": -1j * h, "1101": -h, "1110": 1j * h}),
            ((1, 0, 0), {"0011": ph * 1j * h, "0110": -ph * h, "1001": ph * h, "1100": -ph * 1j * h}),
            ((1, -1, 0), {"0001": -1j * h, "0010": h, "0100": 1j * h, "1000": -h}),
            ((1, 1, 1), {"0111": h, "1011": -h, "1101": h, "1110": -h}),
            ((1, 0, 1), {"0101": 1 / math.sqrt(2), "1010": -1 / math.sqrt(2)}),
            ((1, -1, 1), {"0001": h, "0010": -h, "0100": h, "1000": -h}),
            ((1, 1, 2), {"0111": h, "1011": 1j * h, "1101": -h, "1110": -1j * h}),
            ((1, 0, 2), {"0011": -ph * h, "0110": ph * 1j * h, "1001": -ph * 1j * h, "1100": ph * h}),
            ((1, -1, 2), {"0001": 1j * h, "0010": h, "0100": -1j * h, "1000": -h}),
            ((0, 0, 0), {"0011": r6, "0101": r6 * wc, "0110": r6 * w,
                         "1001": r6 * w, "1010": r6 * wc, "1100": r6}),
            ((0, 0, 1), {"0011": r6, "0101": r6 * w, "0110": r6 * wc,
                         "1001": r6 * wc, "1010": r6 * w, "1100": r6}),
        ]
    raise DomainError("fixture bases exist only for N in {2, 3, 4}")


def fixture_basis(n_qubits: int) -> SymmetryBasis:
    """Hand-written bases for N = 2, 3, 4.

    N = 3 uses the roots-of-unity doublets; N = 4 uses the three complex
    triplets T1..T3 and the roots-of-unity singlets.  The two N = 3 doublet
    ladders follow J-|1/2, 1/2> = -|1/2, -1/2>, i.e. opposite to the ladder
    phase used by :func:`build_symmetry_basis`.
    """
    entries = _fixture_columns(n_qubits)
    labels = [PseudospinLabel(*lab) for lab, _ in entries]
    cols = [_ket(n_qubits, terms) for _, terms in entries]
    return SymmetryBasis(n_qubits, labels, np.column_stack(cols))


@dataclass
class BlockReport:
    """Result of rotating an interaction Hamiltonian into a symmetry basis.

    ``blocks[(j, copy)]`` is ordered (m descending) ⊗ (photon ascending).
    ``sector_residual`` is the largest deviation of any excitation sector of
    any block from :func:`pseudospin.blocks.block_hamiltonian` (None when no
    coupling parameters were supplied).
    """

    blocks: dict
    off_block_max: float
    sector_residual: float | None = None
    sectors_checked: int = 0


def block_diagonalize(h_int, basis: SymmetryBasis, n_max: int, g: float | None = None,
                      delta: float = 0.0) -> BlockReport:
    h_int = np.asarray(h_int)
    nf = n_max + 1
    dim = basis.matrix.shape[0] * nf
    if h_int.shape != (dim, dim):
        raise DimensionError(f"H has shape {h_int.shape}, expected {(dim, dim)}")
    rot = kron(basis.matrix, np.eye(nf))
    h_rot = rot.conj().T @ h_int @ rot
    group = np.empty(dim, dtype=int)
    blocks, members = {}, {}
    for gi, (j, copy) in enumerate(basis.multiplets()):
        cols = basis.columns_of(j, copy)
        idx = np.concatenate([np.arange(c * nf, (c + 1) * nf) for c in cols])
        group[idx] = gi
        blocks[(j, copy)] = h_rot[np.ix_(idx, idx)]
        members[(j, copy)] = idx
    off = max_abs(h_rot[group[:, None] != group[None, :]])

    report = BlockReport(blocks, off)
    if g is None:
        return report
    from .blocks import SystemParams, block_hamiltonian

    params = SystemParams(g, delta)
    worst, checked = 0.0, 0
    for (j, copy), blk in blocks.items():
        d = twice(j) + 1
        for total in range(n_max + 1):
            n_top = total - twice(j)
            # state i of the sector is |j, j - i>|n_top + i>
            pos = [i * nf + n_top + i for i in range(d) if 0 <= n_top + i <= n_max]
            ref = block_hamiltonian(j, n_top, params).matrix
            worst = max(worst, max_abs(blk[np.ix_(pos, pos)] - ref))
            checked += 1
    report.sector_residual = worst
    report.sectors_checked = checked
    return report
