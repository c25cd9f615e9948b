"""Command-line front end: named experiments emitting JSON or CSV tables.

All quantities are in natural units (hbar = c = 1).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import ALPHA, __version__
from . import spinor as sp
from ._newton import default_tol
from .errors import ConvergenceError, StgraphError

COMMANDS = ("hydrogen-ground", "hydrogen-spectrum", "oscillator", "free-particle",
            "lorentz-trajectory", "sphere-grid", "opzeros")

DEFAULTS = {"alpha": ALPHA, "mass": 1.0}

# allowed parameters per command, with defaults
PARAMS = {
    "hydrogen-ground": {},
    "hydrogen-spectrum": {"kappa": None, "nr": None, "kappa_max": 3, "nr_max": 2},
    "oscillator": {"n": 2},
    "free-particle": {"steps": 100, "beta": 0.0},
    "lorentz-trajectory": {"steps": 50, "dtau": 1e-2, "beta": 0.5,
                           "field": {"type": "uniform_electric", "strength": 8e-4, "axis": "z"}},
    "sphere-grid": {"m_half": 1, "h": 1},
    "opzeros": {"family": "hermite", "n": 4, "gamma": 0.5, "lam": 0.5, "m_half": 1},
}
COMMON = ("alpha", "mass", "format", "out", "plot")

UNITS = "natural units (hbar = c = 1)"


class UsageError(StgraphError, ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        allowed = set(PARAMS[self.command]) | set(COMMON)
        unknown = sorted(k for k, v in self.params.items() if k not in allowed and v is not None)
        if unknown:
            raise UsageError(f"{self.command} does not accept: {', '.join(unknown)}")

    def resolved(self) -> dict:
        out = dict(DEFAULTS)
        out.update(PARAMS[self.command])
        out.update({k: v for k, v in self.params.items() if v is not None and k not in ("out", "plot", "format")})
        return out


@dataclass
class ResultRecord:
    command: str
    inputs: dict
    outputs: dict
    series_columns: list = field(default_factory=list)
    series: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    wall_time: float = 0.0   # reported on stderr only, never written to files

    def to_dict(self) -> dict:
        d = {"command": self.command, "inputs": self.inputs, "outputs": self.outputs,
             "provenance": self.provenance}
        if self.series:
            d["series"] = {"columns": self.series_columns, "rows": self.series}
        return d


def _clean(x):
    """JSON-safe conversion; complex -> [re, im]."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


# ------------------------------------------------------------------ commands

def _hydrogen_ground(p):
    from .graph import graph_to_json, lagrangian_stationary, stationary_field_residual, stationary_node_residual
    from .stationary import ground_state_dirac, schroedinger_ground

    g = ground_state_dirac(p["mass"], p["alpha"])
    sg = g.graph()
    s = schroedinger_ground(p["alpha"], p["mass"])
    out = {
        "epsilon": g.epsilon, "r": g.r, "h": g.h, "kind": g.kind,
        "epsilon_exact": p["mass"] * math.sqrt(1 - p["alpha"] ** 2),
        "schroedinger_E": s.E, "schroedinger_r": s.r,
        "residuals": {
            "field": float(np.abs(stationary_field_residual(sg)).max()),
            "nodes": float(np.abs(stationary_node_residual(sg)).max()),
            "lagrangian": float(abs(lagrangian_stationary(sg))),
        },
        "graph": json.loads(graph_to_json(sg)),
    }
    return out, [], []


def _hydrogen_spectrum(p):
    from .stationary import AtomParams, radial_solve, sommerfeld_energy

    kappas = [p["kappa"]] if p["kappa"] is not None else range(1, p["kappa_max"] + 1)
    nrs = [p["nr"]] if p["nr"] is not None else range(0, p["nr_max"] + 1)
    rows, states = [], []
    for k in kappas:
        for nr in nrs:
            ap = AtomParams(p["mass"], p["alpha"], int(k), int(nr) + 1)
            st = radial_solve(ap)
            exact = sommerfeld_energy(ap)
            rows.append([int(nr), int(k), st.epsilon, exact, st.residual])
            states.append({"n_r": int(nr), "kappa": int(k), "epsilon": st.epsilon, "sommerfeld": exact,
                           "gamma": st.gamma, "lambda": st.lambda_exp, "radii": st.rs,
                           "f": st.fs, "g": st.gs, "residual": st.residual})
    return {"states": states}, ["n_r", "kappa", "epsilon", "sommerfeld", "residual"], rows


def _oscillator(p):
    from .stationary import oscillator_solve

    st = oscillator_solve(int(p["n"]))
    out = {"n": st.n, "E": st.E, "zeros": st.xs, "psi": st.psi, "nonstandard": st.nonstandard,
           "residuals": {"field": st.residual_field, "nodes": st.residual_nodes}}
    rows = [[k, float(x), float(a), st.E] for k, (x, a) in enumerate(zip(st.xs, st.psi))]
    return out, ["k", "x", "psi", "E"], rows


def _free_particle(p):
    from .dynamics import free_propagate
    from .graph import free_chain, free_field_residual, spinors_to_reals

    m, beta, steps = p["mass"], float(p["beta"]), int(p["steps"])
    if not abs(beta) < 1:
        raise UsageError("--beta must satisfy |beta| < 1")
    P0 = sp.boost(math.atanh(beta), (1, 0, 0))
    tr_ = free_propagate(m, sp.encode(np.zeros(4)), P0, steps)
    chain = free_chain(tr_.nodes, tr_.spinors)
    res = np.abs(free_field_residual(chain, m)).reshape(len(tr_.spinors), -1).max(axis=1)
    # dL/d(Re P, Im P) = 2 (Re R, Im R) with R the field residual
    grad = 2 * spinors_to_reals(free_field_residual(chain, m))
    X = np.array([sp._components(x) for x in tr_.nodes])
    rows = [[k, *map(float, X[k]), float(res[k - 1]) if k else 0.0] for k in range(len(X))]
    out = {"det_dx": float(sp.det(tr_.dx).real), "dx": sp._components(tr_.dx),
           "velocity": sp._components(tr_.dx)[1:] / sp._components(tr_.dx)[0], "momentum": sp._components(tr_.momentum),
           "residuals": {"field": float(res.max()), "gradient": float(np.linalg.norm(grad)),
                         "det_dx": abs(float(sp.det(tr_.dx).real) - 1 / m ** 2)}}
    return out, ["k", "t", "x", "y", "z", "residual"], rows


def _lorentz_trajectory(p):
    from .dynamics import lorentz_experiment
    from .fields import field_from_spec

    spec = p["field"]
    if isinstance(spec, str):
        spec = json.loads(spec)
    f = field_from_spec(spec)
    ex = lorentz_experiment(f, p["mass"], steps=int(p["steps"]), beta=float(p["beta"]), dtau_ref=float(p["dtau"]))
    X = ex.trajectory.coords
    cons = ex.trajectory.conservation
    rows = [[k, *map(float, X[k]), float(cons[k - 1]) if k else 0.0] for k in range(len(X))]
    out = {"field": spec, "error": ex.error, "rel_error": ex.rel_error,
           "max_field_ratio": ex.max_field_ratio, "sigmas": ex.trajectory.sigmas,
           "residuals": {"conservation": ex.max_conservation}}
    return out, ["k", "t", "x", "y", "z", "residual"], rows


def _sphere_grid(p):
    from .sphere import angles_from_chi, build_grid, grid_to_json

    g = build_grid(int(p["m_half"]), int(p["h"]))
    doc = json.loads(grid_to_json(g))
    rows = [[*angles_from_chi(c)] for c in g.chis]
    return {"grid": doc, "kappa": doc["kappa"], "l": g.l, "n": g.n,
            "residuals": doc["residuals"]}, ["theta", "phi"], rows


def _opzeros(p):
    from .orthopoly import OdeSpec, christoffel_weights, master_integral, solve_zeros, weight_constants

    fam = p["family"]
    if fam == "hermite":
        spec = OdeSpec.hermite()
    elif fam == "laguerre":
        spec = OdeSpec.laguerre(float(p["gamma"]), float(p["lam"]))
    elif fam in ("legendre", "legendre-like"):
        spec = OdeSpec.legendre_like(int(p["m_half"]))
    else:
        raise UsageError(f"unknown family {fam!r}")
    n = int(p["n"])
    zs = solve_zeros(spec, n)
    mi = master_integral(spec, n)
    ws = weight_constants(spec, zs, mi)
    cw = christoffel_weights(zs, ws)
    out = {"family": spec.family, "zeros": zs.xs, "rho": ws.rhos, "k": ws.k_const,
           "master_integral": mi, "quadrature_weights": cw, "residuals": {"zeros": zs.residual}}
    rows = [[k, float(x), float(r), float(w)] for k, (x, r, w) in enumerate(zip(zs.xs, ws.rhos, cw))]
    return out, ["k", "x", "rho", "weight"], rows


_DISPATCH = {
    "hydrogen-ground": _hydrogen_ground,
    "hydrogen-spectrum": _hydrogen_spectrum,
    "oscillator": _oscillator,
    "free-particle": _free_particle,
    "lorentz-trajectory": _lorentz_trajectory,
    "sphere-grid": _sphere_grid,
    "opzeros": _opzeros,
}


def run(config: RunConfig) -> ResultRecord:
    p = config.resolved()
    t0 = time.perf_counter()
    outputs, cols, rows = _DISPATCH[config.command](p)
    wall = time.perf_counter() - t0
    prov = {"stgraph": __version__, "numpy": np.__version__, "tolerance": default_tol()}
    return ResultRecord(config.command, _clean(p), _clean(outputs), cols, _clean(rows), prov, wall)


# ------------------------------------------------------------------ output

def format_json(record: ResultRecord) -> str:
    # float repr is the shortest string that round-trips exactly (<= 17 digits)
    return json.dumps(record.to_dict(), indent=2, sort_keys=False) + "\n"


def _csv_value(v):
    if isinstance(v, float):
        return format(v, ".12g")
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return str(v)


def _flatten(d, prefix=""):
    for k, v in d.items():
        if isinstance(v, dict):
            yield from _flatten(v, f"{prefix}{k}.")
        else:
            yield f"{prefix}{k}", v


def _write_table(buf, cols, rows):
    buf.write(f"# {UNITS}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_csv_value(v) for v in r])


def format_csv(record: ResultRecord) -> str:
    buf = io.StringIO()
    if record.series:
        _write_table(buf, record.series_columns, record.series)
    else:
        items = [(k, v) for k, v in _flatten(record.outputs) if not isinstance(v, (list, dict))]
        _write_table(buf, [k for k, _ in items], [[v for _, v in items]])
    return buf.getvalue()


def emit_plotdata(record: ResultRecord, path) -> None:
    """Write the record's series as CSV with a units header."""
    if not record.series:
        raise ValueError(f"record of {record.command!r} has no series")
    buf = io.StringIO()
    _write_table(buf, record.series_columns, record.series)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def load_record(text: str) -> ResultRecord:
    d = json.loads(text)
    s = d.get("series", {})
    return ResultRecord(d["command"], d["inputs"], d["outputs"], s.get("columns", []), s.get("rows", []),
                        d.get("provenance", {}))


# ------------------------------------------------------------------ argparse

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=None, help=f"coupling (default {ALPHA!r})")
    common.add_argument("--mass", type=float, default=None, help="particle mass (default 1)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--plot", default=None, metavar="PATH", help="also render a figure to PATH")

    ap = argparse.ArgumentParser(prog="stgraph", description="Spinor-graph experiments.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("hydrogen-ground", parents=[common], help="two-node Dirac ground state")
    s = sub.add_parser("hydrogen-spectrum", parents=[common], help="radial states vs closed form")
    s.add_argument("--kappa", type=int, default=None)
    s.add_argument("--nr", type=int, default=None)
    s.add_argument("--kappa-max", dest="kappa_max", type=int, default=None)
    s.add_argument("--nr-max", dest="nr_max", type=int, default=None)
    s = sub.add_parser("oscillator", parents=[common], help="collinear oscillator states")
    s.add_argument("--n", type=int, default=None)
    s = sub.add_parser("free-particle", parents=[common], help="free spinor chain")
    s.add_argument("--steps", type=int, default=None)
    s.add_argument("--beta", type=float, default=None)
    s = sub.add_parser("lorentz-trajectory", parents=[common], help="discrete stepper vs classical path")
    s.add_argument("--steps", type=int, default=None)
    s.add_argument("--dtau", type=float, default=None, help="RK4 reference step")
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--field", default=None, help="potential as JSON, e.g. '{\"type\": \"coulomb\", \"alpha\": 0.1}'")
    s = sub.add_parser("sphere-grid", parents=[common], help="latitude/longitude sphere grid")
    s.add_argument("--m-half", dest="m_half", type=int, default=None)
    s.add_argument("--h", type=int, default=None)
    s = sub.add_parser("opzeros", parents=[common], help="orthogonal-polynomial zeros and weights")
    s.add_argument("--family", choices=("hermite", "laguerre", "legendre"), default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--gamma", type=float, default=None)
    s.add_argument("--lam", type=float, default=None)
    s.add_argument("--m-half", dest="m_half", type=int, default=None)
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        if params.get("field") is not None:
            params["field"] = json.loads(params["field"])
        cfg = RunConfig(args.command, params)
        rec = run(cfg)
    except (UsageError, json.JSONDecodeError) as exc:
        ap.error(str(exc))
    except ConvergenceError as exc:
        print(f"solver failed: {exc}\n  best residual: {exc.best_residual:.3e}\n  iterations: {exc.iterations}",
              file=sys.stderr)
        return 3
    except (StgraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    text = format_json(rec) if args.format == "json" else format_csv(rec)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        from .plotting import plot_record

        try:
            plot_record(rec, args.plot)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 4
    print(f"wall time {rec.wall_time:.3f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
