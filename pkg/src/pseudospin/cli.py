"""Command-line front end.

Every subcommand writes CSV or JSON to stdout (or ``--output``) and exits
with status 0 when its internal residual checks pass, 1 when a check fails
and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np
from scipy.linalg import expm

from . import blocks, decay, dephasing, dynamics, gates, symmetry
from .errors import PseudospinError

FORMATS = ("csv", "json")


@dataclass
class RunConfig:
    subcommand: str
    g: float = 1.0
    delta: float = 0.0
    phi: float = 1.0
    N: int = 3
    j: list | None = None
    n: list | None = None
    k: int = 1
    m: float | None = None
    t_start: float = 0.0
    t_end: float = 20.0
    t_points: int = 1000
    output: str | None = None
    format: str = "json"
    seed: int = 0
    mode: str = "block"
    bitstring: str | None = None
    fixture: str | None = None
    theta: float = math.pi / 4
    alpha: float = 0.0
    m_photons: int = 0
    n_max: int | None = None

    def validate(self):
        if self.t_points < 2:
            raise UsageError("--t-points must be at least 2")
        if not self.g > 0:
            raise UsageError("--g must be positive")
        if self.format not in FORMATS:
            raise UsageError(f"--format must be one of {FORMATS}")
        if self.phi < 0:
            raise UsageError("--phi must be non-negative")

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.t_points)


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


# --- subcommands -----------------------------------------------------------------

def cmd_splittings(cfg: RunConfig):
    js = cfg.j if cfg.j is not None else [0.5, 1.0, 1.5, 2.0, 2.5]
    ns = cfg.n if cfg.n is not None else [0]
    params = blocks.SystemParams(cfg.g, cfg.delta)
    rows, ok = [], True
    for j in js:
        for n in ns:
            n = int(n)
            spec = blocks.rabi_splittings(j, n, params)
            num = blocks.numeric_splittings(j, n, params).values
            fit = None
            total = n + symmetry.twice(j)
            if total >= 1 and cfg.delta == 0:
                fit = blocks.asymptotic_fit(j, total) * cfg.g
            pos = np.sort(num[num > 1e-9])[::-1]
            for i, (v, w) in enumerate(zip(spec.values, num)):
                diff = abs(v - w)
                ok &= diff < 1e-10 * max(1.0, abs(w))
                row = {"j": float(j), "n": n, "index": i, "value": float(v), "numeric": float(w),
                       "route": spec.route, "abs_diff": float(diff), "fit": None, "fit_rel_error": None}
                if fit is not None and w > 1e-9:
                    rank = int(np.flatnonzero(np.isclose(pos, w, rtol=0, atol=1e-12))[0])
                    if rank < len(fit) and fit[rank] > 0:
                        row["fit"] = float(fit[rank])
                        row["fit_rel_error"] = float(abs(w - fit[rank]) / fit[rank])
                rows.append(row)
    if cfg.format == "json":
        return _dumps({"rows": rows, "passed": bool(ok)}), ok
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = ["j", "n", "index", "value", "numeric", "route", "abs_diff", "fit", "fit_rel_error"]
    w.writerow(keys)
    for r in rows:
        w.writerow([_fmt(r[k]) if isinstance(r[k], float) else ("" if r[k] is None else r[k]) for k in keys])
    return buf.getvalue(), ok


def cmd_populations(cfg: RunConfig):
    params = blocks.SystemParams(cfg.g, cfg.delta)
    times = cfg.times()
    n_ph = int(cfg.n[0]) if cfg.n else 4
    if cfg.mode == "block":
        j = float(cfg.j[0]) if cfg.j else 1.5
        m0 = -j if cfg.m is None else cfg.m
        ts = dynamics.populations_block(j, n_ph, m0, params, times)
    elif cfg.mode == "full":
        bits = cfg.bitstring or "0" * cfg.N
        if len(bits) != cfg.N:
            raise UsageError("--bitstring length must equal --N")
        init = dynamics.InitialState.computational(bits, n_ph)
        states = dynamics.full_space_evolve(cfg.N, init, params, times)
        nf = states.shape[1] // 2**cfg.N
        pops = np.abs(states.reshape(len(times), 2**cfg.N, nf)) ** 2
        labels, cols = [], []
        for q in range(2**cfg.N):
            for p in range(nf):
                if pops[:, q, p].max() > 1e-14:
                    labels.append(f"{q:0{cfg.N}b},n={p}")
                    cols.append(pops[:, q, p])
        ts = dynamics.TimeSeries(times, labels, np.column_stack(cols),
                                 {"N": cfg.N, "bitstring": bits, "n_photons": n_ph,
                                  "g": cfg.g, "delta": cfg.delta})
    else:
        raise UsageError("--mode must be 'block' or 'full'")
    ok = bool(np.abs(ts.values.sum(axis=1) - 1).max() < 1e-9)
    return (ts.to_csv() if cfg.format == "csv" else ts.to_json() + "\n"), ok


def cmd_decompose(cfg: RunConfig):
    n = cfg.N
    table = symmetry.multiplet_table(n)
    if cfg.fixture:
        basis = symmetry.fixture_basis(n)
    else:
        basis = symmetry.build_symmetry_basis(n)
    jp, jm, jz, j2 = symmetry.collective_operators(n)
    mat = basis.matrix
    unitarity = float(np.abs(mat.conj().T @ mat - np.eye(2**n)).max())
    eig_res, ladder = 0.0, 0.0
    for c, lab in enumerate(basis.labels):
        v = mat[:, c]
        eig_res = max(eig_res, float(np.abs(j2 @ v - lab.j * (lab.j + 1) * v).max()),
                      float(np.abs(jz @ v - lab.m * v).max()))
        if lab.m > -lab.j and not cfg.fixture:
            ref = blocks.nu_tilde(lab.j, lab.m - 1) * basis.state(lab.j, lab.m - 1, lab.copy)
            ladder = max(ladder, float(np.abs(jm @ v - ref).max()))
    n_max = 3 if cfg.n_max is None else cfg.n_max
    h_int = symmetry.interaction_hamiltonian(n, n_max, cfg.g, cfg.delta)
    if cfg.fixture:
        # hand-written ladders may carry other phases: compare block spectra instead
        rep = symmetry.block_diagonalize(h_int, basis, n_max)
        params = blocks.SystemParams(cfg.g, cfg.delta)
        worst = 0.0
        nf = n_max + 1
        for (j, _), blk in rep.blocks.items():
            tj = symmetry.twice(j)
            for total in range(n_max + 1):
                n_top = total - tj
                pos = [i * nf + n_top + i for i in range(tj + 1) if 0 <= n_top + i <= n_max]
                ref = blocks.numeric_splittings(j, n_top, params).values
                got = np.linalg.eigvalsh(blk[np.ix_(pos, pos)])
                worst = max(worst, float(np.abs(ref - got).max()))
        rep.sector_residual = worst
    else:
        rep = symmetry.block_diagonalize(h_int, basis, n_max, cfg.g, cfg.delta)
    mult = {symmetry.format_half(j): c for j, c in sorted(basis.multiplicities().items(), reverse=True)}
    expected = {symmetry.format_half(j): ab for j, ab in table.rows}
    ok = (unitarity < 1e-10 and eig_res < 1e-9 and ladder < 1e-9 and rep.off_block_max < 1e-10
          and rep.sector_residual < 1e-10 and mult == expected)
    out = {"N": n, "abundance": expected, "multiplicities": mult,
           "dimension_sum": table.dimension(), "unitarity_error": unitarity,
           "eigen_residual": eig_res, "ladder_residual": ladder, "n_max": n_max,
           "off_block_max": rep.off_block_max, "sector_residual": rep.sector_residual,
           "passed": bool(ok)}
    if cfg.format == "json":
        out["basis"] = json.loads(basis.to_json())
        return _dumps(out), ok
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "abundance", "found"])
    for j, ab in table.rows:
        w.writerow([symmetry.format_half(j), ab, mult.get(symmetry.format_half(j), 0)])
    return buf.getvalue(), ok


def cmd_switch(cfg: RunConfig):
    params = blocks.SystemParams(cfg.g, cfg.delta)
    if cfg.fixture:
        circ = gates.fixture_circuit(cfg.fixture)
        res = gates.fixture_residual(cfg.fixture)
        ok = res < 1e-9
        out = {"fixture": cfg.fixture, "circuit": json.loads(circ.to_json()),
               "lowering_residual": res, "passed": bool(ok)}
    else:
        trace = gates.switch_protocol(cfg.N, cfg.k, params, seed=cfg.seed)
        ok = trace.passed
        out = trace.to_dict()
    if cfg.format == "json":
        return _dumps(out), ok
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["target", "phase_radians", "controls"])
    for g in gates.Circuit.from_json(json.dumps(out["circuit"])).gates:
        w.writerow([g.target, _fmt(g.phase), " ".join(f"{q}:{b}" for q, b in g.controls.items())])
    return buf.getvalue(), ok


def cmd_decay(cfg: RunConfig):
    params = blocks.SystemParams(cfg.g, 0.0)
    rep = decay.decay_recovery_protocol(params, cfg.N)
    ok = rep.tree.check() < 1e-12
    expected = (cfg.N - 1) / cfg.N
    ok &= abs(rep.recovery_probability - expected) < 1e-12
    out = json.loads(rep.to_json())
    out["passed"] = bool(ok)
    n_ph = int(cfg.n[0]) if cfg.n else 1
    if n_ph > 1:
        out["spectroscopy"] = json.loads(decay.spectroscopy_to_json(
            decay.decay_spectroscopy(n_ph, cfg.N, params=params)))
    if cfg.format == "json":
        return _dumps(out), ok
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "probability", "numerator", "denominator"])

    def walk(node, path, prob):
        p = prob * node.probability
        name = f"{path}/{node.label}" if path else node.label
        f = decay.exact_fraction(p)
        w.writerow([name, _fmt(p), f.numerator, f.denominator])
        for c in node.children:
            walk(c, name, p)
    walk(rep.tree, "", 1.0)
    return buf.getvalue(), ok


def cmd_dephasing(cfg: RunConfig):
    p = dephasing.DephasingParams(cfg.g, cfg.delta, cfg.phi)
    n = int(cfg.n[0]) if cfg.n else 0
    m = cfg.m_photons
    n_max = max(n, m) + 2 if cfg.n_max is None else cfg.n_max
    rho0 = dephasing.initial_pure_state(cfg.theta, cfg.alpha, n, m, n_max)
    checks = {}
    rho_end = dephasing.evolve_doubled(p, rho0, cfg.t_end)
    checks["trace_error"] = float(abs(np.trace(rho_end) - 1))
    checks["hermiticity_error"] = float(np.abs(rho_end - rho_end.conj().T).max())
    ok = checks["trace_error"] < 1e-9 and checks["hermiticity_error"] < 1e-9
    if cfg.delta == 0:
        worst = 0.0
        for t in np.linspace(cfg.t_start, cfg.t_end, 5):
            full = dephasing.closed_form_propagator(p, t, n_max)
            ref = expm(dephasing.dephasing_generator(p, n_max, n_max) * t)
            idx = dephasing.complete_sector_indices(n_max)
            worst = max(worst, float(np.abs(full[np.ix_(idx, idx)] - ref[np.ix_(idx, idx)]).max()))
        checks["closed_form_max_deviation"] = worst
        ok &= worst < 1e-8
        roots = max(dephasing.match_root_sets(dephasing.char_poly_roots(p, a, b),
                                              dephasing.sector_eigenvalues(p, a, b))
                    for a in range(n_max) for b in range(n_max))
        checks["char_poly_root_error"] = float(roots)
        ok &= roots < 1e-9
        if cfg.phi > 0:
            ss = dephasing.dephasing_steady_state(cfg.theta, cfg.alpha, n, m, p, n_max)
            dev = float(np.abs(rho_end - ss).max())
            checks["steady_state_deviation"] = dev
            checks["steady_state_reached"] = dev < 1e-6
    else:
        roots = max(dephasing.match_root_sets(dephasing.char_poly_roots(p, a, b),
                                              dephasing.sector_eigenvalues(p, a, b))
                    for a in range(n_max) for b in range(n_max))
        checks["char_poly_root_error"] = float(roots)
        ok &= roots < 1e-9
    if cfg.format == "csv":
        times = cfg.times()
        return dephasing.trajectory_to_csv(times, dephasing.trajectory(p, rho0, times)), ok
    out = {"g": cfg.g, "delta": cfg.delta, "phi": cfg.phi, "theta": cfg.theta, "alpha": cfg.alpha,
           "n": n, "m": m, "t_end": cfg.t_end, "n_max": n_max, **checks, "passed": bool(ok)}
    return _dumps(out), ok


COMMANDS = {
    "splittings": cmd_splittings,
    "populations": cmd_populations,
    "decompose": cmd_decompose,
    "switch": cmd_switch,
    "decay": cmd_decay,
    "dephasing": cmd_dephasing,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pseudospin",
                                     description="Pseudospin blocks of N qubits coupled to one cavity mode.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file whose keys override the flags")
        p.add_argument("--g", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--phi", type=float)
        p.add_argument("--N", type=int)
        p.add_argument("--j", type=float, nargs="+")
        p.add_argument("--n", type=int, nargs="+")
        p.add_argument("--k", type=int)
        p.add_argument("--m", type=float, help="initial m for block populations")
        p.add_argument("--m-photons", type=int, help="photon number of the |down> part (dephasing)")
        p.add_argument("--t-start", type=float)
        p.add_argument("--t-end", type=float)
        p.add_argument("--t-points", type=int)
        p.add_argument("--output", "-o")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--seed", type=int)
        p.add_argument("--mode", choices=("block", "full"))
        p.add_argument("--bitstring")
        p.add_argument("--fixture", nargs="?", const="1")
        p.add_argument("--theta", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--n-max", type=int)
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
        known = {f.name for f in fields(RunConfig)}
        bad = set(overrides) - known
        if bad:
            raise UsageError(f"unknown config keys: {sorted(bad)}")
        values.update(overrides)
    for key in ("j", "n"):
        if key in values and not isinstance(values[key], list):
            values[key] = [values[key]]
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        if cfg.subcommand == "switch" and cfg.fixture == "1":
            raise UsageError(f"--fixture needs one of {gates.FIXTURE_IDS}")
        text, ok = COMMANDS[cfg.subcommand](cfg)
    except (UsageError, PseudospinError, OSError, json.JSONDecodeError) as exc:
        print(f"pseudospin {args.subcommand}: error: {exc}", file=sys.stderr)
        return 2
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
