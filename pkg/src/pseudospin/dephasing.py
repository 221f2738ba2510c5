"""One qubit, one cavity mode and qubit dephasing, solved in the doubled space.

A density matrix rho = sum rho_ab(n1, n2) |a, n1><b, n2| is stored as the
vector ``rho~`` with four qubit blocks in the order (11, 10, 01, 00); inside
a block the entry (n1, n2) sits at ``n1 * (n2_max + 1) + n2``.  Operators
acting from the right become transposed operators on the second (bra)
factor, so on that factor ``a2`` raises the photon index and ``a2^dag``
lowers it.

The generator conserves n1 - (qubit ket excitation) and n2 - (qubit bra
excitation) separately, so it splits into 4x4 sectors

    [rho11(n1, n2), rho10(n1, n2+1), rho01(n1+1, n2), rho00(n1+1, n2+1)].

Sectors with n1 = -1 or n2 = -1 keep only the components with
non-negative photon numbers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, DomainError, UnsupportedParameterError
from .linalg import kron
from .symmetry import annihilation

BLOCKS = ((1, 1), (1, 0), (0, 1), (0, 0))


@dataclass(frozen=True)
class DephasingParams:
    g: float = 1.0
    delta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not self.g > 0:
            raise DomainError("coupling g must be positive")
        if self.phi < 0:
            raise DomainError("dephasing rate must be non-negative")


@dataclass(frozen=True)
class DoubledSpaceState:
    """Vectorized density matrix in block order (11, 10, 01, 00)."""

    amplitudes: np.ndarray
    n1_max: int
    n2_max: int

    def __post_init__(self):
        if self.amplitudes.shape != (4 * (self.n1_max + 1) * (self.n2_max + 1),):
            raise DimensionError("amplitude vector does not match the truncations")

    def block(self, a: int, b: int) -> np.ndarray:
        f1, f2 = self.n1_max + 1, self.n2_max + 1
        k = BLOCKS.index((a, b))
        return self.amplitudes[k * f1 * f2:(k + 1) * f1 * f2].reshape(f1, f2)

    def to_density(self) -> np.ndarray:
        """Matrix on qubit ⊗ Fock; the qubit index 1 is the excited state."""
        if self.n1_max != self.n2_max:
            raise DimensionError("a density matrix needs equal ket and bra truncations")
        f = self.n1_max + 1
        rho = np.zeros((2 * f, 2 * f), dtype=complex)
        for a, b in BLOCKS:
            rho[a * f:(a + 1) * f, b * f:(b + 1) * f] = self.block(a, b)
        return rho

    @classmethod
    def from_density(cls, rho) -> "DoubledSpaceState":
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] % 2:
            raise DimensionError("expected a square matrix on qubit ⊗ Fock")
        f = rho.shape[0] // 2
        parts = [rho[a * f:(a + 1) * f, b * f:(b + 1) * f].ravel() for a, b in BLOCKS]
        return cls(np.concatenate(parts), f - 1, f - 1)


def _block_ops(n1_max: int, n2_max: int):
    f1, f2 = n1_max + 1, n2_max + 1
    a = annihilation(n1_max)
    b = annihilation(n2_max)
    a1 = kron(a, np.eye(f2))
    a1d = kron(a.T, np.eye(f2))
    a2 = kron(np.eye(f1), b.T)  # raises the bra photon number
    a2d = kron(np.eye(f1), b)
    return a1, a1d, a2, a2d


def dephasing_generator(params: DephasingParams, n1_max: int, n2_max: int) -> np.ndarray:
    """Non-Hermitian generator with d rho~/dt = G rho~.

    Blocks (rows act on 11, 10, 01, 00):

        [[0,        ig a2^dag,  -ig a1,     0        ],
         [ig a2,    -phi+i d,   0,          -ig a1   ],
         [-ig a1^dag, 0,        -phi-i d,   ig a2^dag],
         [0,        -ig a1^dag, ig a2,      0        ]]

    where ``d`` is the detuning and the diagonal entries multiply identities.
    """
    if n1_max < 0 or n2_max < 0:
        raise DimensionError("truncations must be non-negative")
    g, phi, d = params.g, params.phi, params.delta
    a1, a1d, a2, a2d = _block_ops(n1_max, n2_max)
    eye = np.eye(a1.shape[0])
    z = np.zeros_like(eye)
    ig = 1j * g
    rows = [
        [z, ig * a2d, -ig * a1, z],
        [ig * a2, (-phi + 1j * d) * eye, z, -ig * a1],
        [-ig * a1d, z, (-phi - 1j * d) * eye, ig * a2d],
        [z, -ig * a1d, ig * a2, z],
    ]
    return np.block(rows)


def master_equation_superoperator(params: DephasingParams, n_max: int) -> np.ndarray:
    """Independent route: build -i[H, .] + (phi/2)(sz . sz - .) from Kronecker products.

    Row-major vectorization maps A rho B to (A ⊗ B^T) vec(rho).  The
    qubit-frequency term is -(delta/2) sigma_z, which is the sign and scale
    that reproduce the +-i delta entries of :func:`dephasing_generator`.  The
    result is permuted into the block order of the doubled space.
    """
    f = n_max + 1
    a = annihilation(n_max)
    sp = np.array([[0.0, 0.0], [1.0, 0.0]])  # |1><0| in (|0>, |1>) order
    sz = np.diag([-1.0, 1.0])
    h = params.g * (kron(sp, a) + kron(sp.T, a.T)) - 0.5 * params.delta * kron(sz, np.eye(f))
    eye = np.eye(2 * f)
    szf = kron(sz, np.eye(f))
    sup = -1j * (kron(h, eye) - kron(eye, h.T)) + 0.5 * params.phi * (kron(szf, szf.T) - kron(eye, eye))
    perm = []
    for qa, qb in BLOCKS:
        for n1 in range(f):
            for n2 in range(f):
                perm.append((qa * f + n1) * 2 * f + qb * f + n2)
    perm = np.array(perm)
    return sup[np.ix_(perm, perm)]


def evolve_doubled(params: DephasingParams, rho0, t: float) -> np.ndarray:
    """exp(G t) rho~ for a density matrix ``rho0``; returns the density matrix."""
    state = DoubledSpaceState.from_density(rho0)
    gen = dephasing_generator(params, state.n1_max, state.n2_max)
    out = expm(gen * t) @ state.amplitudes
    return DoubledSpaceState(out, state.n1_max, state.n2_max).to_density()


# --- sectors ----------------------------------------------------------------

def sector_members(n1: int, n2: int) -> list:
    """(block, ket photons, bra photons) of every component of sector (n1, n2)."""
    if n1 < -1 or n2 < -1:
        raise DomainError("sector labels start at -1")
    cand = [((1, 1), n1, n2), ((1, 0), n1, n2 + 1), ((0, 1), n1 + 1, n2), ((0, 0), n1 + 1, n2 + 1)]
    return [(i, blk, p, q) for i, (blk, p, q) in enumerate(cand) if p >= 0 and q >= 0]


def sector_indices(n1: int, n2: int, n1_max: int, n2_max: int) -> list:
    f1, f2 = n1_max + 1, n2_max + 1
    out = []
    for _, blk, p, q in sector_members(n1, n2):
        if p > n1_max or q > n2_max:
            raise DimensionError(f"sector ({n1}, {n2}) exceeds the truncation")
        out.append(BLOCKS.index(blk) * f1 * f2 + p * f2 + q)
    return out


def sector_generator(params: DephasingParams, n1: int, n2: int) -> np.ndarray:
    """The generator restricted to sector (n1, n2)."""
    g, phi, d = params.g, params.phi, params.delta
    s1, s2 = np.sqrt(max(n1 + 1, 0)), np.sqrt(max(n2 + 1, 0))
    ig = 1j * g
    full = np.array([
        [0, ig * s2, -ig * s1, 0],
        [ig * s2, -phi + 1j * d, 0, -ig * s1],
        [-ig * s1, 0, -phi - 1j * d, ig * s2],
        [0, -ig * s1, ig * s2, 0],
    ], dtype=complex)
    keep = [i for i, *_ in sector_members(n1, n2)]
    return full[np.ix_(keep, keep)]


# --- closed form --------------------------------------------------------------

def _lam(params: DephasingParams, u: float, v: float, sign: int) -> complex:
    """sqrt(4 g^2 (sqrt(u) +- sqrt(v))^2 - phi^2) as a principal complex root."""
    r = np.sqrt(max(u, 0.0)) + sign * np.sqrt(max(v, 0.0))
    return np.sqrt(complex(4 * params.g**2 * r * r - params.phi**2))


def _half_sin_over(lam: complex, t: float) -> complex:
    """sin(lam t / 2) / lam, continuous through lam = 0."""
    if abs(lam) < 1e-12:
        return t / 2
    return np.sin(lam * t / 2) / lam


@dataclass(frozen=True)
class _Trig:
    c_m: complex
    c_p: complex
    s_m: complex  # phi sin(lam t/2) / lam
    s_p: complex
    q_m: complex  # sin(lam t/2) / lam, i.e. s / phi without dividing by phi
    q_p: complex


def _trig(params: DephasingParams, t: float, u: float, v: float) -> _Trig:
    lm, lp = _lam(params, u, v, -1), _lam(params, u, v, +1)
    qm, qp = _half_sin_over(lm, t), _half_sin_over(lp, t)
    return _Trig(np.cos(lm * t / 2), np.cos(lp * t / 2), params.phi * qm, params.phi * qp, qm, qp)


# Subscripts (x, y) of lambda used by each function when written with the
# operator arguments it is evaluated at.  The corrected values make every
# entry of a sector share one pair of frequencies; the swapped set exchanges
# the pair for F2, F3 and for the S factors of F7 and F9 and is kept only
# for comparison.
CORRECTED_SUBSCRIPTS = {"F2": (1, 0), "F3": (0, 1), "F7": (0, 1), "F9": (1, 0)}
SWAPPED_SUBSCRIPTS = {"F2": (0, 1), "F3": (1, 0), "F7": (1, 0), "F9": (0, 1)}


def f_functions(params: DephasingParams, t: float, n1: float, n2: float,
                subscripts: dict = CORRECTED_SUBSCRIPTS) -> dict:
    """Evaluate F1..F10 at operator arguments (n1, n2).

    The factor (ig/phi) S is evaluated as ig sin(lam t/2)/lam so that phi = 0
    is allowed.  F6 and F10 carry 1/sqrt((n1+1)(n2+1)) and are returned
    multiplied by that root (key suffix ``_scaled``) to stay finite at the
    sector edges.
    """
    g = params.g
    e = np.exp(-params.phi * t / 2)
    ig = 1j * g
    t11 = _trig(params, t, n1 + 1, n2 + 1)
    t00 = _trig(params, t, n1, n2)
    x2, x3 = subscripts["F2"], subscripts["F3"]
    t2 = _trig(params, t, n1 + x2[0], n2 + x2[1])
    t3 = _trig(params, t, n1 + x3[0], n2 + x3[1])
    x7, x9 = subscripts["F7"], subscripts["F9"]
    t7 = _trig(params, t, n1 + x7[0], n2 + x7[1])
    t9 = _trig(params, t, n1 + x9[0], n2 + x9[1])
    r12 = np.sqrt(max(n1 + 1, 0) / (n2 + 1)) if n2 + 1 > 0 else 0.0
    r21 = np.sqrt(max(n2 + 1, 0) / (n1 + 1)) if n1 + 1 > 0 else 0.0
    r12_01 = np.sqrt(max(n1, 0) / (n2 + 1)) if n2 + 1 > 0 else 0.0
    r21_01 = np.sqrt(max(n2, 0) / (n1 + 1)) if n1 + 1 > 0 else 0.0
    return {
        "F1": 0.5 * e * (t11.c_m + t11.c_p + t11.s_m + t11.s_p),
        "F2": 0.5 * e * (t2.c_m + t2.c_p - t2.s_m - t2.s_p),
        "F3": 0.5 * e * (t3.c_m + t3.c_p - t3.s_m - t3.s_p),
        "F4": 0.5 * e * (t00.c_m + t00.c_p + t00.s_m + t00.s_p),
        "F5": ig * e * ((1 - r12) * t11.q_m + (1 + r12) * t11.q_p),
        "F6_scaled": 0.5 * e * (t11.c_m - t11.c_p - t11.s_m + t11.s_p),
        "F7": ig * e * ((1 - r12_01) * t7.q_m + (1 + r12_01) * t7.q_p),
        "F8": -ig * e * ((1 - r21) * t11.q_m + (1 + r21) * t11.q_p),
        "F9": -ig * e * ((1 - r21_01) * t9.q_m + (1 + r21_01) * t9.q_p),
        "F10_scaled": 0.5 * e * (t11.c_m - t11.c_p + t11.s_m - t11.s_p),
    }


def dephasing_closed_form(params: DephasingParams, t: float, n1: int, n2: int,
                          subscripts: dict = CORRECTED_SUBSCRIPTS) -> np.ndarray:
    """Sector (n1, n2) block of exp(G t) assembled from F1..F10.

    Each function is evaluated at the photon numbers of the row it acts on
    and multiplied by the matrix element of its ladder operators, e.g. the
    (rho00 <- rho10) entry is sqrt(n1 + 1) F9(n1, n2 + 1).
    """
    if params.delta != 0:
        raise UnsupportedParameterError("the closed form assumes zero detuning")
    s1, s2 = np.sqrt(max(n1 + 1, 0)), np.sqrt(max(n2 + 1, 0))
    f = f_functions(params, t, n1, n2, subscripts)
    f_10 = f_functions(params, t, n1, n2 + 1, subscripts)
    f01 = f_functions(params, t, n1 + 1, n2, subscripts)
    f11 = f_functions(params, t, n1 + 1, n2 + 1, subscripts)
    p = np.empty((4, 4), dtype=complex)
    p[0, 0] = f["F1"]
    p[1, 1] = f_10["F2"]
    p[2, 2] = f01["F3"]
    p[3, 3] = f11["F4"]
    p[0, 1] = p[1, 0] = s2 * f["F5"]
    p[0, 2] = p[2, 0] = s1 * f["F8"]
    p[0, 3] = p[3, 0] = f["F10_scaled"]
    p[1, 2] = p[2, 1] = f["F6_scaled"]
    p[1, 3] = p[3, 1] = s1 * f_10["F9"]
    p[2, 3] = p[3, 2] = s2 * f01["F7"]
    keep = [i for i, *_ in sector_members(n1, n2)]
    return p[np.ix_(keep, keep)]


def closed_form_propagator(params: DephasingParams, t: float, n_max: int) -> np.ndarray:
    """Full doubled-space propagator for truncation ``n_max`` from sector closed forms.

    Only sectors that fit entirely inside the truncation are filled; the rest
    of the matrix is left zero, so compare on :func:`complete_sector_indices`.
    """
    f = n_max + 1
    out = np.zeros((4 * f * f, 4 * f * f), dtype=complex)
    for n1 in range(-1, n_max):
        for n2 in range(-1, n_max):
            idx = sector_indices(n1, n2, n_max, n_max)
            out[np.ix_(idx, idx)] = dephasing_closed_form(params, t, n1, n2)
    return out


def complete_sector_indices(n_max: int) -> list:
    idx = []
    for n1 in range(-1, n_max):
        for n2 in range(-1, n_max):
            idx.extend(sector_indices(n1, n2, n_max, n_max))
    return sorted(idx)


@dataclass(frozen=True)
class SubscriptAudit:
    """Deviation of the swapped and corrected subscripts from exp(G t)."""

    swapped: float
    corrected: float


def audit_subscripts(params: DephasingParams, t: float, n1: int, n2: int) -> SubscriptAudit:
    ref = expm(sector_generator(params, n1, n2) * t)
    swp = dephasing_closed_form(params, t, n1, n2, SWAPPED_SUBSCRIPTS)
    cor = dephasing_closed_form(params, t, n1, n2, CORRECTED_SUBSCRIPTS)
    return SubscriptAudit(float(np.abs(swp - ref).max()), float(np.abs(cor - ref).max()))


# --- long-time limit ---------------------------------------------------------

def initial_pure_state(theta: float, alpha: float, n: int, m: int, n_max: int) -> np.ndarray:
    """cos(theta)|up, n> + exp(i alpha) sin(theta)|down, m> as a density matrix."""
    f = n_max + 1
    if max(n, m) > n_max:
        raise DimensionError("photon numbers exceed the truncation")
    psi = np.zeros(2 * f, dtype=complex)
    psi[f + n] += np.cos(theta)
    psi[m] += np.exp(1j * alpha) * np.sin(theta)
    return np.outer(psi, psi.conj())


def dephasing_steady_state(theta: float, alpha: float, n: int, m: int,
                           params: DephasingParams = DephasingParams(phi=1.0),
                           n_max: int | None = None) -> np.ndarray:
    """t -> infinity limit of the dephasing evolution from the pure state above.

    Populations are shared equally between |up, k> and |down, k+1>; all
    coherences vanish.  The ground state |down, 0> does not couple and keeps
    its full weight.
    """
    if params.phi <= 0:
        raise DomainError("no steady state without dephasing")
    if params.delta != 0:
        raise UnsupportedParameterError("the steady state assumes zero detuning")
    n_max = max(n, m) + 1 if n_max is None else n_max
    f = n_max + 1
    c, s = np.cos(theta) ** 2, np.sin(theta) ** 2
    rho = np.zeros((2 * f, 2 * f))
    up = lambda k: f + k
    down = lambda k: k
    rho[up(n), up(n)] += c / 2
    rho[down(n + 1), down(n + 1)] += c / 2
    if m == 0:
        rho[down(0), down(0)] += s
    else:
        rho[down(m), down(m)] += s / 2
        rho[up(m - 1), up(m - 1)] += s / 2
    return rho


def steady_state_limit_operator(params: DephasingParams, n1: int, n2: int) -> np.ndarray:
    """Limit of exp(G t) on one sector: projector onto the zero mode, if any."""
    a = sector_generator(params, n1, n2)
    w, v = np.linalg.eig(a)
    out = np.zeros_like(a)
    for k in np.flatnonzero(np.abs(w) < 1e-10):
        vec = v[:, k]
        out += np.outer(vec, vec) / (vec @ vec)  # symmetric generator: left = right^T
    return out


# --- characteristic polynomial -------------------------------------------------

def char_poly_coefficients(params: DephasingParams, n1: int, n2: int) -> np.ndarray:
    """Quartic coefficients (x^4 .. x^0) of the sector generator.

    The x^4 .. x^1 coefficients follow from the traces of the generator; the
    constant term g^4 (n1 - n2)^2 is the determinant of the sector.
    """
    g2, phi, d = params.g**2, params.phi, params.delta
    return np.array([
        1.0,
        2 * phi,
        2 * n1 * g2 + 2 * n2 * g2 + 4 * g2 + d * d + phi * phi,
        4 * phi * g2 + 2 * phi * n1 * g2 + 2 * phi * n2 * g2,
        g2 * g2 * (n1 - n2) ** 2,
    ])


def char_poly_roots(params: DephasingParams, n1: int, n2: int) -> np.ndarray:
    return np.roots(char_poly_coefficients(params, n1, n2))


def sector_eigenvalues(params: DephasingParams, n1: int, n2: int) -> np.ndarray:
    return np.linalg.eigvals(sector_generator(params, n1, n2))


def zero_detuning_roots(params: DephasingParams, n1: int, n2: int) -> np.ndarray:
    """-phi/2 +- (i/2) lambda_{+-} with lambda = sqrt(4 g^2 (s1 +- s2)^2 - phi^2)."""
    lams = [_lam(params, n1 + 1, n2 + 1, s) for s in (+1, -1)]
    return np.array([-params.phi / 2 + sgn * 0.5j * l for l in lams for sgn in (+1, -1)])


def full_rate_root_family(params: DephasingParams, n1: int, n2: int) -> np.ndarray:
    """The family -phi +- i lambda (twice the true rates), kept for comparison."""
    lams = [_lam(params, n1 + 1, n2 + 1, s) for s in (+1, -1)]
    return np.array([-params.phi + sgn * 1j * l for l in lams for sgn in (+1, -1)])


def match_root_sets(a, b) -> float:
    """Largest distance after greedily pairing two equal-size root sets."""
    a, b = list(np.asarray(a)), list(np.asarray(b))
    if len(a) != len(b):
        raise DimensionError("root sets differ in size")
    worst = 0.0
    for x in a:
        k = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b.pop(k)))
    return worst


# --- trajectories -------------------------------------------------------------

def trajectory(params: DephasingParams, rho0, times) -> list:
    """Density matrices at each time (one generator exponential per step)."""
    state = DoubledSpaceState.from_density(rho0)
    gen = dephasing_generator(params, state.n1_max, state.n2_max)
    times = np.asarray(times, dtype=float)
    out = []
    vec = state.amplitudes
    prev = 0.0
    for t in times:
        vec = expm(gen * (t - prev)) @ vec
        prev = t
        out.append(DoubledSpaceState(vec, state.n1_max, state.n2_max).to_density())
    return out


def purity(rho) -> float:
    return float(np.real(np.trace(rho @ rho)))


def trajectory_to_csv(times, rhos) -> str:
    """t, trace, purity, qubit excited population, mean photon number."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "trace", "purity", "p_up", "mean_photons"])
    for t, rho in zip(times, rhos):
        f = rho.shape[0] // 2
        diag = np.real(np.diag(rho))
        photons = np.arange(f)
        w.writerow([f"{t:.17g}", f"{diag.sum():.17g}", f"{purity(rho):.17g}",
                    f"{diag[f:].sum():.17g}", f"{(diag[:f] * photons + diag[f:] * photons).sum():.17g}"])
    return buf.getvalue()
