"""Command line front end: build, verify, simulate, suite.

Exit codes: 0 pass, 1 a requested condition failed, 2 input error,
3 guard breach or construction refusal.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import DEFAULT_TOL, __version__
from . import acceptance
from . import catalog as cat
from . import compose as comp
from . import hierarchy as hier
from . import recipes
from . import simulate as sim
from .report import Report, fmt17

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3
GUARDS = (sim.GuardError, comp.GuardError, hier.GuardError)


class InputError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex) or isinstance(x, np.complexfloating):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _versions():
    import scipy
    return {"biunitary_lab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


_ACTIVE = []


class Run:
    """Collects outputs of one command and writes the manifest at the end."""

    def __init__(self, args, command):
        _ACTIVE.append(self)
        self.args = args
        self.command = command
        self.out = getattr(args, "out", None) or "."
        self.outputs = []
        self.recipe = None
        self.t0 = time.perf_counter()
        os.makedirs(self.out, exist_ok=True)

    def path(self, name):
        p = os.path.join(self.out, name)
        self.outputs.append(name)
        return p

    def write_json(self, name, obj):
        with open(self.path(name), "w") as fh:
            json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, name, header, rows):
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])

    def finish(self, extra=None):
        man = {"command": self.command, "argv": sys.argv[1:], "recipe": self.recipe,
               "seed": getattr(self.args, "seed", 0),
               "tolerance": fmt17(getattr(self.args, "tolerance", DEFAULT_TOL)),
               "outputs": list(self.outputs), "versions": _versions(),
               "wall_time": time.perf_counter() - self.t0}
        if extra:
            man.update(extra)
        with open(os.path.join(self.out, "manifest.json"), "w") as fh:
            json.dump(_jsonable(man), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------- inputs

def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON ({e.msg} at line {e.lineno})") from None


def _gate_from_args(args, run=None):
    if getattr(args, "recipe", None):
        recipe = _read_json(args.recipe)
        if run is not None:
            run.recipe = recipe
        return recipes.build_from_recipe(recipe, args.seed)
    if getattr(args, "gate", None):
        return recipes.gate_from_json(_read_json(args.gate))
    raise InputError("need --recipe or --gate")


def _as_gate2(g):
    if isinstance(g, cat.Gate2):
        return g
    if isinstance(g, comp.NestedKagome):
        return g.dense()
    if isinstance(g, np.ndarray) and g.ndim == 2:
        n = round(np.sqrt(g.shape[0]))
        if n * n == g.shape[0]:
            return cat.Gate2.from_matrix(g, n)
    raise InputError(f"expected a two-site gate, got {type(g).__name__}")


def _int_list(s):
    return [int(x) for x in s.split(",") if x.strip()] if s else []


# ---------------------------------------------------------------- build

def cmd_build(args):
    run = Run(args, "build")
    try:
        obj = _gate_from_args(args, run)
    except cat.InvalidInput as e:
        print(json.dumps({"error": str(e), "residuals": {k: fmt17(v) for k, v in e.residuals.items()}}))
        run.finish({"status": "refused"})
        return EXIT_GUARD
    with open(run.path("gate.json"), "w") as fh:
        json.dump(recipes.gate_to_json(obj), fh)
    run.finish({"status": "ok", "gate_kind": recipes.gate_to_json(obj)["kind"]})
    print(json.dumps({"gate": os.path.join(run.out, "gate.json")}))
    return EXIT_OK


# ---------------------------------------------------------------- verify

KNOWN_CONDITIONS = ("U", "DU", "DU2", "DU3", "TRI", "TUIRF")


def cmd_verify(args):
    run = Run(args, "verify")
    g = _gate_from_args(args, run)
    conds = [c.strip().upper() for c in args.conditions.split(",") if c.strip()]
    bad = [c for c in conds if c not in KNOWN_CONDITIONS]
    if bad:
        raise InputError(f"unknown conditions {bad}; choose from {', '.join(KNOWN_CONDITIONS)}")
    tol = args.tolerance
    res = {}
    if "TRI" in conds:
        res.update({f"TRI:{k}": v for k, v in hier.check_triunitary(g, tol).residuals.items()})
    if "TUIRF" in conds:
        res.update({f"TUIRF:{k}": v for k, v in hier.check_tuirf(g, tol).residuals.items()})
    two = [c for c in conds if c in ("U", "DU", "DU2", "DU3")]
    schmidt = None
    if two or args.schmidt:
        g2 = _as_gate2(g)
        if two:
            res.update(hier.hierarchy_report(g2, two, tol).residuals)
        if args.schmidt:
            schmidt = hier.schmidt_analyze(g2)
    rep = Report(res, tol)
    doc = {"conditions": conds, "report": rep.to_json()}
    if schmidt is not None:
        doc["schmidt"] = schmidt.to_json()
    run.write_json("report.json", doc)
    run.finish({"passed": rep.passed})
    print(json.dumps(_jsonable(doc), sort_keys=True))
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------- simulate

def _sim_correlations(args, run):
    g = _as_gate2(_gate_from_args(args, run))
    L = None if args.L == 0 else (args.L or 8)
    spec = sim.ChainSpec(L, g.d, g, boundary="periodic")
    t_max = 3 if args.t is None else args.t
    xs = _int_list(args.x) or [2, 3]
    basis = hier.pauli_basis(g.d)
    jobs = [(x, i, j) for x in xs for i in range(len(basis)) for j in range(len(basis))]

    def work(job):
        x, i, j = job
        return job, sim.correlation_grid(spec, basis[i], basis[j], t_max, x=x)

    with ThreadPoolExecutor(max_workers=sim.n_threads()) as ex:
        grids = list(ex.map(work, jobs))
    worst, where = 0.0, None
    rows = []
    for (x, i, j), grid in grids:
        for t, xx, y, re, im in grid.rows():
            rows.append((i, j, t, xx, y, re, im))
        for t in range(grid.values.shape[0]):
            on = set(sim.ray_sites(x, t, L).values())
            for k, y in enumerate(grid.ys):
                yy = y % L if L else y
                if yy not in on and abs(grid.values[t, k]) > worst:
                    worst, where = abs(grid.values[t, k]), (t, x, y)
    rows.sort()
    run.write_csv("correlations.csv", ["sigma", "rho", "t", "x", "y", "re", "im"], rows)
    if args.plot:
        from .plotting import plot_correlations
        (x, i, j), grid = grids[-1]
        plot_correlations(grid, run.path("correlations.png"), f"sigma={i} rho={j} x={x}")
    summary = {"kind": "correlations", "L": L, "t_max": t_max, "max_offray": worst,
               "basis_size": len(basis)}
    if where:
        t, x, y = where
        summary["max_offray_at"] = {"t": t, "x_site": x, "y_site": y,
                                    "x_cell": x // 2, "y_cell": y // 2}
    return summary


def _entropy_rows(ents):
    return [(t, n, s) for n in sorted(ents) for t, s in enumerate(ents[n])]


def _slope(s):
    inc = [s[t] - s[t - 1] for t in range(1, len(s))]
    return (float(np.mean(inc)) if inc else 0.0), inc


def _sim_quench(args, run):
    g = _gate_from_args(args, run)
    t_max = 3 if args.t is None else args.t
    if isinstance(g, comp.TuirfGate):
        L = args.L or 16
        rep = sim.tuirf_quench(g, L, t_max, args.cut)
        d, circuit = g.tensor.shape[0], "tuirf"
    else:
        g = _as_gate2(g)
        d = g.d
        L = args.L or 16
        spec = sim.ChainSpec(L, d, g, t_max, boundary=args.boundary)
        region = _int_list(args.region) or list(range(L // 2))
        if args.placement == "site":
            bell = cat.solvable_bell_state(_sqrt_dim(d))
        else:
            bell = cat.solvable_bell_state(d)
        rep = sim.quench(spec, bell, t_max, region, args.offset, args.placement, args.tolerance)
        circuit = "brickwork"
    run.write_csv("entropy.csv", ["t", "n", "S"], _entropy_rows(rep.entropies))
    if args.plot:
        from .plotting import plot_entropies
        plot_entropies(rep.entropies, run.path("entropy.png"))
    s2 = rep.entropies[2]
    slope, inc = _slope(s2)
    return {"kind": "quench", "circuit": circuit, "L": L, "t_max": t_max, "region": rep.region,
            "slope": slope, "slopes": inc, "intercept": s2[0], "v_E": slope / (2 * np.log(d)),
            "renyi_spread": max(abs(rep.entropies[n][t] - s2[t]) for n in (1, 3) for t in range(len(s2))),
            "norm_drift": rep.norm_drift}


def _sqrt_dim(d):
    r = round(np.sqrt(d))
    if r * r != d:
        raise InputError(f"site placement needs a square site dimension, got {d}")
    return r


def _sim_thermalize(args, run):
    g = _as_gate2(_gate_from_args(args, run))
    d = g.d
    size = args.region_size
    t_max = size // 2 + 1 if args.t is None else args.t
    L = args.L or 10
    start = args.region_start
    region = list(range(start, start + size))
    if region[-1] >= L:
        raise InputError(f"region {region} does not fit on L={L}")
    placement = args.placement
    if placement == "auto":
        placement = "site" if round(np.sqrt(d)) ** 2 == d else "bond"
    spec = sim.ChainSpec(L, d, g, t_max, boundary="open")
    bell = cat.solvable_bell_state(_sqrt_dim(d) if placement == "site" else d)
    dist, step = sim.thermalization_check(spec, bell, region, t_max, args.offset, placement,
                                          args.tolerance)
    run.write_csv("thermalization.csv", ["t", "distance"], list(enumerate(dist)))
    if args.plot:
        from .plotting import plot_series
        plot_series(dist, run.path("thermalization.png"), "||rho_A - 1/D||", log=True)
    return {"kind": "thermalize", "L": L, "region": region, "placement": placement,
            "distances": dist, "therm_step": step}


def _sim_solitons(args, run):
    g = _as_gate2(_gate_from_args(args, run))
    factors = tuple(_int_list(args.factors)) or (g.d_left,)
    if int(np.prod(factors)) != g.d_left:
        raise InputError(f"factors {factors} do not multiply to the site dimension {g.d_left}")
    sols = hier.soliton_scan(g, factors=(factors, factors), tol=args.tolerance)
    L = args.L or 12
    t_max = 3 if args.t is None else args.t
    spec = sim.ChainSpec(L, g.d, g)
    rows, worst = [], 0.0
    basis = hier.pauli_basis(factors[0]) if len(set(factors)) == 1 else []
    for k, s in enumerate(sols):
        site, fac = s.source
        x = 4 + site if L > 6 else site
        tr = sim.soliton_transport(spec, s.operator, x, fac - len(factors) * site, factors,
                                   t_max, args.tolerance)
        r = max(tr["residuals"]) if tr["residuals"] else 0.0
        worst = max(worst, r)
        op_id = next((i for i, b in enumerate(basis) if np.allclose(b, s.operator)), -1)
        rows.append((k, op_id, s.source[0], s.source[1], s.target[0], s.target[1],
                     s.displacement, float(np.real(s.phase)), float(np.imag(s.phase)), r))
    run.write_csv("solitons.csv", ["index", "operator", "source_site", "source_factor",
                                   "target_site", "target_factor", "displacement",
                                   "phase_re", "phase_im", "transport_residual"], rows)
    counts = {}
    for s in sols:
        counts[str(s.displacement)] = counts.get(str(s.displacement), 0) + 1
    return {"kind": "solitons", "count": len(sols), "by_displacement": counts,
            "max_transport_residual": worst, "L": L, "t_max": t_max}


def _sim_du3control(args, run):
    g = _as_gate2(_gate_from_args(args, run))
    p, u = args.p, args.u
    if p * u != g.d_left:
        raise InputError(f"layer dimensions {p}x{u} do not match the site dimension {g.d_left}")
    top = _int_list(args.top) or [0, 1, 1, 0, 1, 0]
    t_max = 3 if args.t is None else args.t
    r = sim.du3_control_dynamics(g, p, u, top, t_max=t_max, bottom_L=args.L or 16)
    rows = [(t, 2, s) for t, s in enumerate(r["bottom_S2"])]
    run.write_csv("entropy.csv", ["t", "n", "S"], rows)
    run.write_csv("layers.csv", ["t", "inter_layer_S2", "top_fidelity"],
                  [(t, a, b) for t, (a, b) in enumerate(zip(r["inter_layer_S2"], r["top_fidelity"]))])
    if args.plot:
        from .plotting import plot_entropies
        plot_entropies({2: r["bottom_S2"]}, run.path("entropy.png"))
    slope, _ = _slope(r["bottom_S2"])
    return {"kind": "du3control", "slope": slope, "slopes": r["bottom_slopes"], "v_E": r["v_E"],
            "max_inter_layer_S2": max(abs(x) for x in r["inter_layer_S2"]),
            "min_top_fidelity": min(r["top_fidelity"]),
            "control_identity": r["control_identity"]}


SIMULATIONS = {"correlations": _sim_correlations, "quench": _sim_quench,
               "thermalize": _sim_thermalize, "solitons": _sim_solitons,
               "du3control": _sim_du3control}


def cmd_simulate(args):
    run = Run(args, f"simulate {args.kind}")
    summary = SIMULATIONS[args.kind](args, run)
    run.write_json("summary.json", summary)
    run.finish()
    print(json.dumps(_jsonable(summary), sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------- suite

def cmd_suite(args):
    run = Run(args, "suite")
    results = acceptance.run(args.filter, args.tolerance, args.seed)
    if not results:
        raise InputError(f"no criterion matches {args.filter!r}")
    for r in results:
        print(r.line(), flush=True)
    failing = [r.number for r in results if not r.passed]
    run.write_json("suite_report.json", {
        "tolerance": fmt17(args.tolerance), "seed": args.seed,
        "criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                      "seconds": r.seconds, "details": r.details} for r in results],
        "failing": failing})
    run.finish({"failing": failing})
    if failing:
        print("failing criteria: " + " ".join(str(n) for n in failing))
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=".", help="output directory")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--recipe", help="construction recipe (JSON)")
    source.add_argument("--gate", help="serialized gate (JSON)")

    p = argparse.ArgumentParser(prog="biunitary-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="build a gate from a recipe")
    b.add_argument("--recipe", required=True)

    v = sub.add_parser("verify", parents=[common, source], help="check solvability conditions")
    v.add_argument("--conditions", default="U,DU,DU2,DU3",
                   help="comma separated subset of " + ",".join(KNOWN_CONDITIONS))
    v.add_argument("--schmidt", action="store_true", help="add the operator Schmidt analysis")

    s = sub.add_parser("simulate", parents=[common, source], help="run a circuit simulation")
    s.add_argument("kind", choices=sorted(SIMULATIONS))
    s.add_argument("--L", type=int, default=None, help="chain length (0: infinite, correlations only)")
    s.add_argument("--t", type=int, default=None, help="number of time steps")
    s.add_argument("--x", default=None, help="source sites for correlations, e.g. 2,3")
    s.add_argument("--region", default=None, help="quench region sites, e.g. 0,1,2,3")
    s.add_argument("--region-size", type=int, default=4)
    s.add_argument("--region-start", type=int, default=3)
    s.add_argument("--cut", type=int, default=None, help="TUIRF entanglement cut")
    s.add_argument("--placement", default=None, choices=["bond", "site", "auto"])
    s.add_argument("--offset", type=int, default=1)
    s.add_argument("--boundary", default="open", choices=["open", "periodic"])
    s.add_argument("--factors", default=None, help="tensor factors of one site, e.g. 2,2")
    s.add_argument("--p", type=int, default=2, help="bottom layer dimension")
    s.add_argument("--u", type=int, default=2, help="top layer dimension")
    s.add_argument("--top", default=None, help="top layer basis values, e.g. 0,1,1,0")
    s.add_argument("--plot", action="store_true", help="also write PNG figures")

    u = sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    u.add_argument("--filter", default=None, help="criterion name or number")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "placement", "x") is None:
        args.placement = "auto" if args.kind == "thermalize" else "bond"
    handlers = {"build": cmd_build, "verify": cmd_verify, "simulate": cmd_simulate,
                "suite": cmd_suite}
    _ACTIVE.clear()
    try:
        return handlers[args.command](args)
    except recipes.RecipeError as e:
        return _fail(EXIT_INPUT, f"invalid input at {e.path or '<root>'}: {e}")
    except InputError as e:
        return _fail(EXIT_INPUT, str(e))
    except GUARDS as e:
        return _fail(EXIT_GUARD, f"guard: {e}")
    except cat.InvalidInput as e:
        return _fail(EXIT_GUARD, f"refused: {e}", e.residuals)
    except (ValueError, KeyError, TypeError) as e:
        return _fail(EXIT_INPUT, str(e))


def _fail(code, msg, residuals=None):
    print(f"error: {msg}", file=sys.stderr)
    extra = {"status": "error", "exit_code": code, "error": msg}
    if residuals:
        extra["residuals"] = {k: fmt17(v) for k, v in residuals.items()}
        print(json.dumps({"residuals": extra["residuals"]}), file=sys.stderr)
    if _ACTIVE:
        run = _ACTIVE[-1]
        run.outputs = [o for o in run.outputs if os.path.exists(os.path.join(run.out, o))]
        run.finish(extra)
    return code


if __name__ == "__main__":
    sys.exit(main())
