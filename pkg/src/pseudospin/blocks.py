"""Single-multiplet physics: ladder coefficients, excitation-sector
Hamiltonians, Rabi splittings and propagators.

Sector convention
-----------------
A block ``(j, n)`` is labelled by the photon number ``n`` that accompanies the
top ladder state |j, j>.  State ``i`` of the block is |j, j - i>|n + i>, so
every step down the ladder trades one qubit excitation for one photon.  When
``n < 0`` the upper part of the ladder is unreachable; those states (with a
negative photon number) are dropped and the block has
``min(2j + 1, n + 2j + 1)`` states.  ``block_for_excitations`` offers the same
blocks labelled by the total excitation count above |j, -j>|0>.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceError, UnsupportedParameterError
from .linalg import eig_hermitian, expm_i, max_abs
from .symmetry import twice


@dataclass(frozen=True)
class SystemParams:
    """Coupling ``g`` (sets the frequency unit) and qubit detuning ``delta``."""

    g: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if not self.g > 0:
            raise DomainError("coupling g must be positive")


def nu_tilde(j, m) -> float:
    """Ladder coefficient sqrt((j - m)(1 + j + m)); zero at the top (m = j)."""
    tj, tm = twice(j), twice(m)
    if tj < 0 or abs(tm) > tj or (tj - tm) % 2:
        raise DomainError(f"m={m} is not on the j={j} ladder")
    return math.sqrt((tj - tm) * (2 + tj + tm) / 4)


@dataclass(frozen=True)
class BlockHamiltonian:
    """Excitation-sector Hamiltonian of one pseudospin ladder.

    ``matrix[r, c]`` couples the states ``first + r`` and ``first + c`` of the
    ladder, where ``first = max(0, -n)`` skips unreachable states.
    """

    j: float
    n: int
    matrix: np.ndarray = field(repr=False)
    first: int = 0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def excitations(self) -> int:
        """Total excitation count above |j, -j>|0>."""
        return self.n + twice(self.j)

    def m_values(self) -> list:
        return [self.j - i for i in range(self.first, self.first + self.dim)]

    def photons(self) -> list:
        return [self.n + i for i in range(self.first, self.first + self.dim)]


def block_hamiltonian(j, n: int, params: SystemParams = SystemParams()) -> BlockHamiltonian:
    tj = twice(j)
    if tj < 0:
        raise DomainError("j must be non-negative")
    n = int(n)
    if n < -tj:
        raise DomainError(f"n={n} leaves no reachable state on the j={j} ladder")
    first = max(0, -n)
    idx = np.arange(first, tj + 1)
    m = j - idx
    off = np.array([nu_tilde(j, j - i - 1) * math.sqrt(n + i + 1) for i in idx[:-1]])
    h = np.diag(params.g * off, 1) + np.diag(params.g * off, -1) + np.diag(params.delta * m)
    return BlockHamiltonian(j, n, h.astype(float), first)


def block_for_excitations(j, excitations: int, params: SystemParams = SystemParams()) -> BlockHamiltonian:
    """Block holding ``excitations`` quanta above |j, -j>|0>; dim = min(2j+1, K+1)."""
    if excitations < 0:
        raise DomainError("excitation count must be non-negative")
    return block_hamiltonian(j, excitations - twice(j), params)


@dataclass(frozen=True)
class RabiSpectrum:
    j: float
    n: int
    values: np.ndarray
    route: str

    def positive(self) -> np.ndarray:
        return self.values[self.values > 1e-12]


def _analytic_values(j, n: int) -> np.ndarray | None:
    tj = twice(j)
    if tj == 1:
        r = math.sqrt(n + 1)
        return np.array([-r, r])
    if tj == 2:
        r = 2 * math.sqrt(n + 1.5)
        return np.array([-r, 0.0, r])
    if tj == 3:
        x = n + 2
        root = math.sqrt(16 * x * x + 9)
        lo, hi = math.sqrt(5 * x - root), math.sqrt(5 * x + root)
        return np.array([-hi, -lo, lo, hi])
    if tj == 4:
        x = n + 2.5
        root = 6 * math.sqrt(x * x + 2)
        lo, hi = math.sqrt(10 * x - root), math.sqrt(10 * x + root)
        return np.array([-hi, -lo, 0.0, lo, hi])
    return None


def numeric_splittings(j, n: int, params: SystemParams = SystemParams()) -> RabiSpectrum:
    vals = eig_hermitian(block_hamiltonian(j, n, params).matrix).eigenvalues
    return RabiSpectrum(j, n, vals, "numeric")


def rabi_splittings(j, n: int, params: SystemParams = SystemParams()) -> RabiSpectrum:
    """Eigenfrequencies of the (j, n) block in units where H = g * (...).

    Closed forms are used for j <= 2 on full ladders (n >= 0) at zero
    detuning; everything else goes through the eigensolver.
    """
    vals = _analytic_values(j, n) if (params.delta == 0 and n >= 0) else None
    if vals is None:
        return numeric_splittings(j, n, params)
    return RabiSpectrum(j, n, params.g * vals, "analytic")


def asymptotic_splittings(j, n) -> np.ndarray:
    """Large-n reference values +-k sqrt(n) for k = 2j, 2j-2, ... (ascending)."""
    if n < 1:
        raise DomainError("n must be at least 1")
    tj = twice(j)
    ks = np.arange(-tj, tj + 1, 2, dtype=float)
    return ks * math.sqrt(n)


def asymptotic_fit(j, total: int) -> np.ndarray:
    """Fitted large-n curves (2j - 2k) sqrt(total - 2k), k = 0 .. floor(j - 1/2).

    ``total`` counts all excitations in the sector.  For j = 4 this is the
    four-curve family (8 - 2k) sqrt(n - 2k).  Values are returned descending.
    """
    tj = twice(j)
    ks = np.arange(0, (tj + 1) // 2)
    return (tj - 2 * ks) * np.sqrt(total - 2 * ks)


@dataclass(frozen=True)
class AsymptoticReport:
    j: float
    total: int
    eigen: np.ndarray
    fit: np.ndarray
    rel_error: np.ndarray
    top_rel_error: float


def asymptotic_report(j, total: int, params: SystemParams = SystemParams()) -> AsymptoticReport:
    """Compare the largest positive eigenvalues of a sector with the fit family."""
    fit = asymptotic_fit(j, total)
    vals = numeric_splittings(j, total - twice(j), params).values / params.g
    eigen = np.sort(vals[vals > 1e-9])[::-1][: len(fit)]
    rel = np.abs(eigen - fit) / fit
    top = abs(eigen[0] - twice(j) * math.sqrt(total)) / (twice(j) * math.sqrt(total))
    return AsymptoticReport(j, total, eigen, fit, rel, top)


def propagator_numeric(j, n: int, params: SystemParams, t: float) -> np.ndarray:
    """exp(i t H) on the (j, n) block."""
    return expm_i(block_hamiltonian(j, n, params).matrix, t)


# --- closed-form propagator for the quadruplet -------------------------------

def _lam(x):
    x = np.asarray(x, dtype=complex)
    root = np.sqrt(16 * x * x + 9)
    return 5 * x + root, 5 * x - root


def _trig(lp, lm, tau):
    wp, wm = np.sqrt(lp), np.sqrt(lm)
    return wp, wm, np.cos(wp * tau), np.cos(wm * tau), np.sin(wp * tau), np.sin(wm * tau)


# Entry functions.  Each takes the photon number ``nu`` of the row it sits on
# and the reduced time tau = g t.  ``p`` and ``q`` are the shifted photon
# numbers left free in the odd-parity entries; the
# values that reproduce the exact propagator are p = nu + 2 and q = nu.

def _f01(nu, tau):
    x = nu + 2
    lp, lm = _lam(x)
    _, _, cp, cm, _, _ = _trig(lp, lm, tau)
    return ((lm + 4 * x - lp + 6) * cp - (-lm + 4 * x + lp + 6) * cm) / (2 * (lm - lp))


def _f02(nu, tau):
    x = nu + 1
    lp, lm = _lam(x)
    _, _, cp, cm, _, _ = _trig(lp, lm, tau)
    return ((lm - lp + 4 * x - 6) * cm + (lm - lp - 4 * x + 6) * cp) / (2 * (lm - lp))


def _f03(nu, tau):
    x = nu
    lp, lm = _lam(x)
    _, _, cp, cm, _, _ = _trig(lp, lm, tau)
    return ((lm + 4 * x - lp + 6) * cm - (-lm + 4 * x + lp + 6) * cp) / (2 * (lm - lp))


def _f04(nu, tau):
    x = nu - 1
    lp, lm = _lam(x)
    _, _, cp, cm, _, _ = _trig(lp, lm, tau)
    return ((-4 * x + lm - lp + 6) * cm + (4 * x + lm - lp - 6) * cp) / (2 * (lm - lp))


def _f11(nu, tau, p=None):
    x = nu + 2
    p = x if p is None else p
    lp, lm = _lam(x)
    wp, wm, _, _, sp, sm = _trig(lp, lm, tau)
    num = wm * (lm - 4 * x - lp - 6) * sm + wp * (lm + 4 * x - lp + 6) * sp
    return 1j * num / (2 * math.sqrt(3) * (p - 1) * (lm - lp))


def _f12(nu, tau):
    lp, lm = _lam(nu + 1)
    wp, wm, _, _, sp, sm = _trig(lp, lm, tau)
    return 2j * (wm * sm - wp * sp) / (lm - lp)


def _f13(nu, tau, q=None):
    x = nu
    q = x if q is None else q
    lp, lm = _lam(x)
    wp, wm, _, _, sp, sm = _trig(lp, lm, tau)
    num = wm * (lm - 4 * x - lp + 6) * sm + wp * (lm + 4 * x - lp - 6) * sp
    return 1j * num / (2 * math.sqrt(3) * (q + 1) * (lm - lp))


def _f21(nu, tau):
    lp, lm = _lam(nu + 2)
    _, _, cp, cm, _, _ = _trig(lp, lm, tau)
    return 2 * math.sqrt(3) * (cm - cp) / (lm - lp)


def _f22(nu, tau):
    lp, lm = _lam(nu + 1)
    _, _, cp, cm, _, _ = _trig(lp, lm, tau)
    return 2 * math.sqrt(3) * (cm - cp) / (lm - lp)


def _f31(nu, tau, p=None):
    x = nu + 2
    p = x if p is None else p
    lp, lm = _lam(x)
    wp, wm, _, _, sp, sm = _trig(lp, lm, tau)
    num = wm * (-lm + 10 * x + lp) * sm + wp * (-lm - 10 * x + lp) * sp
    return 1j * num / (3 * (p * p - 1) * (lm - lp))


# (distance above the diagonal, ladder row counted from 1) -> function
THREE_HALF_FUNCTIONS = {
    (0, 1): _f01, (0, 2): _f02, (0, 3): _f03, (0, 4): _f04,
    (1, 1): _f11, (1, 2): _f12, (1, 3): _f13,
    (2, 1): _f21, (2, 2): _f22,
    (3, 1): _f31,
}


def three_half_function(a: int, b: int, nu, tau):
    """Evaluate the closed-form entry function with label (a, b)."""
    return THREE_HALF_FUNCTIONS[(a, b)](nu, tau)


def propagator_closed_form_3half(n: int, t: float, g: float = 1.0, delta: float = 0.0) -> np.ndarray:
    """Closed-form exp(i t H) on the j = 3/2 block with top photon number ``n``.

    Upper-triangle entry (p, q) is F_{q-p, p+1}(n + p) times the matrix
    element of a^(q-p) between photon numbers n + q and n + p; the lower
    triangle is its mirror image.  Only full ladders (n >= 0) are covered.
    """
    if delta != 0:
        raise UnsupportedParameterError("the closed form assumes zero detuning")
    if n < 0:
        raise UnsupportedParameterError("the closed form covers full ladders only (n >= 0)")
    tau = g * t
    u = np.empty((4, 4), dtype=complex)
    for p in range(4):
        for q in range(p, 4):
            ladder = math.sqrt(math.prod(range(n + p + 1, n + q + 1)))
            val = complex(three_half_function(q - p, p + 1, n + p, tau)) * ladder
            u[p, q] = u[q, p] = val
    return u


@dataclass(frozen=True)
class EntryFormAudit:
    """Which slot each listed entry expression matches, and how well.

    ``rows`` holds (listed name, listed position, matched slot, shift,
    max deviation).  ``shift`` is the offset c in p = nu + c (or q = nu + c)
    that gave the best match, or None for expressions without p, q.
    """

    rows: list

    def as_dicts(self) -> list:
        keys = ("listed", "position", "slot", "shift", "max_deviation")
        return [dict(zip(keys, r)) for r in self.rows]


def audit_entry_forms_3half(ns=(0, 1, 2, 5, 9), times=(0.37, 1.3, 2.9)) -> EntryFormAudit:
    """Compare each listed entry function against every slot of the exact propagator.

    The reference for slot (a, b) is the numeric propagator entry divided by
    its ladder factor.  Expressions with undefined shifts are tried with
    p = nu + c over a small range of c.
    """
    params = SystemParams()
    ref = {}
    for n in ns:
        for t in times:
            u = propagator_numeric(1.5, n, params, t)
            for p in range(4):
                for q in range(p, 4):
                    ladder = math.sqrt(math.prod(range(n + p + 1, n + q + 1)))
                    ref[(q - p, p + 1, n, t)] = (n + p, u[p, q] / ladder)
    listed = [
        ("F_{0,1}", _f01, False), ("F_{0,2}", _f02, False), ("F_{0,3}", _f03, False),
        ("F_{0,4}", _f04, False), ("F_{2,1}", _f11, True), ("F_{1,2}", _f12, False),
        ("F_{1,3}", _f13, True), ("F_{2,1}", _f21, False), ("F_{2,2}", _f22, False),
        ("F_{3,1}", _f31, True),
    ]
    rows = []
    for pos, (name, fn, shifted) in enumerate(listed, start=1):
        best = (None, None, math.inf)
        shifts = range(-3, 4) if shifted else [None]
        for slot in THREE_HALF_FUNCTIONS:
            for c in shifts:
                dev = 0.0
                with np.errstate(all="ignore"):
                    for n in ns:
                        for t in times:
                            nu, target = ref[(slot[0], slot[1], n, t)]
                            if c is None:
                                val = fn(nu, t)
                            else:
                                val = fn(nu, t, nu + c)
                            d = abs(complex(val) - target)
                            dev = max(dev, d if np.isfinite(d) else math.inf)
                if dev < best[2]:
                    best = (slot, c, dev)
        rows.append((name, pos, best[0], best[1], best[2]))
    return EntryFormAudit(rows)


# --- parity recursion ---------------------------------------------------------

MAX_RECURSION_POWER = 20


@dataclass(frozen=True)
class RecursionReport:
    """Recursion values against direct matrix powers.

    ``entries[k]`` maps a function name to (recursion value, matrix value).
    """

    j: float
    n: int
    k_max: int
    entries: list
    max_rel_error: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < 1e-6


def _rel(a, b) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _geometric_3half(n: int, k: int) -> dict:
    """Closed-form geometric solutions of the even-parity recursions."""
    lp, lm = (float(v.real) for v in _lam(n + 2))
    f01 = (lm**k * (lm - lp - 4 * (n + 2) - 6) + lp**k * (lm - lp + 4 * (n + 2) + 6)) / (2 * (lm - lp))
    f21 = 2 * math.sqrt(3) * (lm**k - lp**k) / (lm - lp)
    nu = n + 1
    mp, mm = (float(v.real) for v in _lam(nu + 1))
    f02 = (mm**k * (mm - mp + 4 * (nu + 1) - 6) + mp**k * (mm - mp - 4 * (nu + 1) + 6)) / (2 * (mm - mp))
    f22 = 2 * math.sqrt(3) * (mm**k - mp**k) / (mm - mp)
    nu = n + 2
    pp, pm = (float(v.real) for v in _lam(nu))
    f03 = (pm**k * (4 * nu + pm - pp + 6) - pp**k * (4 * nu - pm + pp + 6)) / (2 * (pm - pp))
    nu = n + 3
    kp, km = (float(v.real) for v in _lam(nu - 1))
    f04 = (km**k * (km - kp - 4 * (nu - 1) + 6) + kp**k * (km - kp + 4 * (nu - 1) - 6)) / (2 * (km - kp))
    return {"f01": f01, "f21": f21, "f02": f02, "f22": f22, "f03": f03, "f04": f04}


def parity_recursion_check(j, k_max: int, n: int) -> RecursionReport:
    """Run the even/odd parity recursions and compare with powers of H.

    For j = 3/2 the even functions obey two coupled 2x2 recursions (rows 1
    and 2 of the ladder) plus two driven scalar recursions (rows 3 and 4);
    the odd functions follow from one further multiplication by H.  The
    geometric closed forms of the even functions are checked as well.  For
    j = 1/2 the recursion is scalar: f^(k+1) = (n + 1) f^(k).
    """
    if k_max > MAX_RECURSION_POWER:
        raise ResourceError(f"k_max={k_max} exceeds {MAX_RECURSION_POWER}; powers overflow")
    if k_max < 0 or n < 0:
        raise DomainError("k_max and n must be non-negative")
    tj = twice(j)
    if tj not in (1, 3):
        raise DomainError("the parity recursion is implemented for j = 1/2 and j = 3/2")
    h = block_hamiltonian(j, n).matrix
    h2 = h @ h
    entries, worst = [], 0.0
    power = np.eye(h.shape[0])
    s3 = math.sqrt(3)

    if tj == 1:
        f = 1.0
        for k in range(k_max + 1):
            odd = (power @ h)[0, 1] / math.sqrt(n + 1)
            row = {"f01": (f, power[0, 0]), "f11": (f, odd)}
            worst = max(worst, *(_rel(a, b) for a, b in row.values()))
            entries.append(row)
            f = (n + 1) * f
            power = power @ h2
        return RecursionReport(j, n, k_max, entries, worst)

    f01, f21 = 1.0, 0.0  # rows evaluated at nu = n
    f02, f22 = 1.0, 0.0  # nu = n + 1
    f03, f04 = 1.0, 1.0  # nu = n + 2, n + 3
    for k in range(k_max + 1):
        odd = power @ h
        row = {
            "f01": (f01, power[0, 0]),
            "f21": (f21, power[0, 2] / math.sqrt((n + 1) * (n + 2))),
            "f02": (f02, power[1, 1]),
            "f22": (f22, power[1, 3] / math.sqrt((n + 2) * (n + 3))),
            "f03": (f03, power[2, 2]),
            "f04": (f04, power[3, 3]),
            "f11": (s3 * f01 + 2 * (n + 2) * f21, odd[0, 1] / math.sqrt(n + 1)),
            "f31": (s3 * f21, odd[0, 3] / math.sqrt((n + 1) * (n + 2) * (n + 3))),
            "f12": (2 * f02 + s3 * (n + 3) * f22, odd[1, 2] / math.sqrt(n + 2)),
            "f13": (s3 * f03, odd[2, 3] / math.sqrt(n + 3)),
        }
        geo = _geometric_3half(n, k)
        for name, val in geo.items():
            row[name + "_geometric"] = (val, row[name][1])
        worst = max(worst, *(_rel(a, b) for a, b in row.values()))
        entries.append(row)
        # step every recursion once: f^(k+1) from f^(k)
        nu = n
        f01, f21, f03 = (
            3 * (nu + 1) * f01 + 2 * s3 * (nu + 1) * (nu + 2) * f21,
            2 * s3 * f01 + (7 * nu + 17) * f21,
            (7 * (n + 2) + 3) * f03 + 2 * s3 * (n + 1) * (n + 2) * f21,
        )
        nu = n + 1
        f02, f22, f04 = (
            (7 * nu + 4) * f02 + 2 * s3 * (nu + 1) * (nu + 2) * f22,
            2 * s3 * f02 + 3 * (nu + 2) * f22,
            3 * (n + 3) * f04 + 2 * s3 * (n + 2) * (n + 3) * f22,
        )
        power = power @ h2
    return RecursionReport(j, n, k_max, entries, worst)


# --- exports ------------------------------------------------------------------

def spectra_to_csv(spectra) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "n", "index", "value", "route"])
    for s in spectra:
        for i, v in enumerate(s.values):
            w.writerow([repr(float(s.j)), s.n, i, f"{float(v):.17g}", s.route])
    return buf.getvalue()


def spectra_to_json(spectra) -> str:
    return json.dumps([{"j": float(s.j), "n": s.n, "route": s.route,
                        "values": [float(v) for v in s.values]} for s in spectra], indent=2)


def propagator_to_json(u: np.ndarray, **meta) -> str:
    return json.dumps({**meta, "real": np.real(u).tolist(), "imag": np.imag(u).tolist()})


def max_unitarity_error(u) -> float:
    u = np.asarray(u)
    return max_abs(u.conj().T @ u - np.eye(u.shape[0]))
