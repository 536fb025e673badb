"""Command-line entry point: ``qantenna <command> [options]``.

Every command accepts ``--config FILE`` (a JSON object whose keys are the
long option names with dashes replaced by underscores); explicit flags win
over the file.  Next to each output a ``<output>.params.json`` file echoes
the full parameter set.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import design, factory, mbloch, patterns
from .geometry import AngularGrid, AntennaGeometry, compound, equispaced
from .states import ExcitationState, load_state, save_state, tuple_basis

log = logging.getLogger("qantenna")

FAMILIES = ("antidiagonal", "dicke", "dark", "subdiagonal", "triples")
MODES = ("co-directional", "contra-directional", "dark", "directivity", "custom")


class CLIError(Exception):
    pass


def _weights(text: str) -> dict[int, float]:
    try:
        return {int(k): float(v) for k, v in (item.split(":") for item in text.split(","))}
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'l:c,l:c,...', got {text!r}") from None


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return a, b


def _add_geometry(p, n=20, k_delta=2.0):
    p.add_argument("--n", type=int, default=n, help="number of emitters")
    p.add_argument("--k-delta", type=float, default=k_delta, help="pitch k*Delta in radians")
    p.add_argument("--u", type=float, default=None, help="compound array pitch ratio; --n is then per arm")


def _add_common(p):
    p.add_argument("--config", type=Path, help="JSON file with option values")
    p.add_argument("--out", type=Path, required=False, help="output file")


_FMT = argparse.ArgumentDefaultsHelpFormatter


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qantenna", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pattern", formatter_class=_FMT, help="correlation pattern of a state")
    _add_common(p)
    _add_geometry(p)
    p.add_argument("--state", type=Path, help="state file (overrides --family)")
    p.add_argument("--family", choices=FAMILIES, default="antidiagonal", help="analytic state family")
    p.add_argument("--sigma", type=float, default=factory.DEFAULT_DARK_SIGMA, help="dark-state width")
    p.add_argument("--weights", type=_weights, default={1: 1.0}, help="sub-diagonal weights 'l:c,...'")
    p.add_argument("--grid", type=int, default=100, help="angles per detector")
    p.add_argument("--normalize", action="store_true", help="scale the peak to 1")

    p = sub.add_parser("optimize", formatter_class=_FMT, help="design a two-excitation state")
    _add_common(p)
    _add_geometry(p, n=10)
    p.add_argument("--mode", default="co-directional", help=f"one of {', '.join(MODES)}")
    p.add_argument("--problem", type=Path, help="problem file (JSON), required for mode=custom")
    p.add_argument("--grid", type=int, default=100, help="angles per detector")
    p.add_argument("--target-value", type=float, default=None, help="target p0; 2N if omitted")
    p.add_argument("--visibility-weight", type=float, default=None, help="10 / number of grid pairs if omitted")
    p.add_argument("--target-weight", type=float, default=None, help="10 / number of targets if omitted")
    p.add_argument("--thetas", type=_pair, default=(np.pi / 2, np.pi / 2), help="directivity detector pair")
    p.add_argument("--regularization", type=float, default=1.0, help="directivity visibility shift")
    p.add_argument("--restarts", type=int, default=20, help="random restarts")
    p.add_argument("--max-iter", type=int, default=5000, help="iterations per restart")
    p.add_argument("--tol", type=float, default=1e-8, help="projected-gradient tolerance")
    p.add_argument("--field", choices=("auto", "real", "complex"), default="auto", help="coefficient field; auto is complex for N <= 10")
    p.add_argument("--seed", type=int, default=0, help="base seed of the restarts")

    p = sub.add_parser("feasibility", formatter_class=_FMT, help="joint range of two detection probabilities")
    _add_common(p)
    _add_geometry(p)
    p.add_argument("--a", type=_pair, default=(0.0, 0.0), help="cosines of the first detector pair")
    p.add_argument("--b", type=_pair, default=(0.0, 0.05), help="cosines of the second detector pair")
    p.add_argument("--sweep", type=int, default=360, help="number of sweep directions")
    p.add_argument("--normalize", action="store_true", help="divide by the largest eigenvalues")

    p = sub.add_parser("mbloch", formatter_class=_FMT, help="post-semiclassical Maxwell-Bloch G2")
    _add_common(p)
    _add_geometry(p, n=3, k_delta=4.5)
    p.add_argument("--state", type=Path, help="pair state file; adjacent pairs with equal weights if omitted")
    p.add_argument("--tau1", type=float, default=1000.0, help="population relaxation time")
    p.add_argument("--tau2", type=float, default=1000.0, help="polarization relaxation time")
    p.add_argument("--dt", type=float, default=1e-3, help="RK4 step")
    p.add_argument("--t-end", type=float, default=60.0, help="integration horizon")
    p.add_argument("--noise", type=float, default=1e-3, help="Langevin amplitude")
    p.add_argument("--realizations", type=int, default=100, help="noise realizations")
    p.add_argument("--seed", type=int, default=0, help="base noise seed")
    p.add_argument("--noise-mode", choices=("mirrored", "uncorrelated"), default="mirrored", help="noise assignment between component runs")
    p.add_argument("--time-factor", type=float, default=1.0, help="detection time / pulse peak time")
    p.add_argument("--grid", type=int, default=100, help="angles per detector")
    p.add_argument("--normalize", action="store_true", help="scale the peak to 1")
    p.add_argument("--trajectory", type=Path, help="also write realization 0 of the first component")

    p = sub.add_parser("oracle-check", formatter_class=_FMT, help="compare the fast pattern path against the operator oracle")
    _add_common(p)
    _add_geometry(p, n=4)
    p.add_argument("--order", type=int, choices=(2, 3), default=2, help="number of excitations")
    p.add_argument("--states", type=int, default=10, help="random states to compare")
    p.add_argument("--grid", type=int, default=30, help="angles per detector")
    p.add_argument("--seed", type=int, default=0, help="seed of the random states")
    p.add_argument("--rtol", type=float, default=1e-10, help="relative tolerance")
    return parser


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None) is not None:
        if not args.config.is_file():
            parser.error(f"config file not found: {args.config}")
        cfg = json.loads(args.config.read_text())
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _geometry(args) -> AntennaGeometry:
    if args.n < (1 if args.u is not None else 2):
        raise CLIError("--n is too small")
    if args.k_delta <= 0:
        raise CLIError("--k-delta must be positive")
    if args.u is not None:
        if args.u < 1:
            raise CLIError("--u must be >= 1")
        return compound(args.n, args.k_delta, args.u)
    return equispaced(args.n, args.k_delta)


def _grid(n: int) -> AngularGrid:
    if n < 1:
        raise CLIError("--grid must be positive")
    return AngularGrid.uniform(n)


def _require_out(args, default: str) -> Path:
    return args.out if args.out is not None else Path(default)


def _echo(args, out: Path, extra=None):
    params = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    if extra:
        params.update(extra)
    Path(str(out) + ".params.json").write_text(json.dumps(params, indent=1, sort_keys=True, default=str) + "\n")


def _family_state(args, N) -> ExcitationState:
    f = args.family
    if f == "antidiagonal":
        return factory.antidiagonal_state(N)
    if f == "dicke":
        return factory.dicke_state(N)
    if f == "dark":
        return factory.dark_state(N, factory.DarkSpec(args.sigma))
    if f == "subdiagonal":
        return factory.subdiagonal_state(N, args.weights)
    return factory.nn_triples_state(N)


def cmd_pattern(args) -> int:
    g = _geometry(args)
    state = load_state(args.state) if args.state else _family_state(args, g.N)
    if state.N != g.N:
        raise CLIError(f"state has N={state.N} but the geometry has {g.N} emitters")
    p = patterns.pattern(g, state, _grid(args.grid), normalize=args.normalize)
    out = _require_out(args, "pattern.csv")
    patterns.export_pattern(p, out)
    _echo(args, out, {"max_value": p.max()})
    log.info("wrote %s (max %.3e)", out, p.max())
    return 0


def _problem_from_file(path: Path) -> design.DesignProblem:
    if not path.is_file():
        raise CLIError(f"problem file not found: {path}")
    doc = json.loads(path.read_text())
    geo = doc.get("geometry", {})
    if "positions" in geo:
        g = AntennaGeometry(geo["positions"])
    elif "u" in geo:
        g = compound(geo["N"], geo["k_delta"], geo["u"])
    else:
        g = equispaced(geo["N"], geo["k_delta"])
    grid = AngularGrid.uniform(int(doc.get("grid", 100)))
    mode = doc.get("mode", "custom")
    if mode in ("co-directional", "contra-directional"):
        build = design.co_directional_problem if mode == "co-directional" else design.contra_directional_problem
        return build(g, grid, doc.get("target_value"), doc.get("visibility_weight"), doc.get("target_weight"))
    targets = tuple(design.Target(*t) for t in doc.get("targets", []))
    return design.DesignProblem(g, grid, float(doc.get("visibility_weight", 1.0)), targets, "custom")


def cmd_optimize(args) -> int:
    if args.mode not in MODES:
        raise CLIError(f"invalid mode {args.mode!r}; choose from {', '.join(MODES)}")
    out = _require_out(args, "state.json")
    records = ()
    if args.mode == "custom" or args.problem is not None:
        if args.problem is None:
            raise CLIError("mode=custom needs --problem")
        problem = _problem_from_file(args.problem)
    else:
        g = _geometry(args)
        grid = _grid(args.grid)
    if args.mode == "dark":
        state = design.dark_optimize(g, grid)
        objective = design.expectation(design.visibility_matrix(g, grid), state)
    elif args.mode == "directivity":
        state = design.directivity_optimize(g, grid, args.thetas, args.regularization)
        objective = design.directivity_ratio(g, grid, args.thetas, state, args.regularization)
    else:
        if args.problem is None:
            build = design.co_directional_problem if args.mode == "co-directional" else design.contra_directional_problem
            problem = build(g, grid, args.target_value, args.visibility_weight, args.target_weight)
        opts = design.OptimizeOptions(args.restarts, args.max_iter, args.tol, args.field, args.seed)
        res = design.optimize(problem, opts)
        state, objective, records = res.state, res.objective, res.diagnostics
    save_state(state, out)
    diag = Path(str(out) + ".diagnostics.csv")
    with diag.open("w") as fh:
        fh.write("restart,iterations,objective,grad_norm,converged\n")
        for r in records:
            fh.write(f"{r.restart},{r.iterations},{r.objective:.11e},{r.grad_norm:.11e},{int(r.converged)}\n")
        if not records:
            fh.write(f"0,0,{objective:.11e},0,1\n")
    _echo(args, out, {"objective": objective})
    return 0


def cmd_feasibility(args) -> int:
    if args.sweep < 8:
        raise CLIError("--sweep must be >= 8")
    g = _geometry(args)
    for c in (*args.a, *args.b):
        if not -1 <= c <= 1:
            raise CLIError("cosines must lie in [-1, 1]")
    fa = design.pi_form(g, *np.arccos(args.a))
    fb = design.pi_form(g, *np.arccos(args.b))
    pts = design.feasibility_boundary(fa, fb, args.sweep)
    if args.normalize:
        pts = pts / np.array([design.probability_range(fa)[1], design.probability_range(fb)[1]])
    centered = pts - pts.mean(axis=0)
    # all points on one line: report the segment end points only
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(1.0, float(np.abs(pts).max()))
    if sv.size < 2 or sv[1] <= 1e-9 * scale * np.sqrt(len(pts)):
        proj = centered @ vt[0]
        pts = pts[[int(np.argmin(proj)), int(np.argmax(proj))]]
        pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
        print("warning: the two forms give a degenerate (segment) region", file=sys.stderr)
    out = _require_out(args, "feasibility.csv")
    np.savetxt(out, pts, fmt="%.11e", delimiter=",", header="p_a,p_b", comments="")
    _echo(args, out, {"convex": design.is_convex_polygon(pts) if len(pts) > 2 else True})
    return 0


def cmd_mbloch(args) -> int:
    g = _geometry(args)
    if args.state is not None:
        state = load_state(args.state)
    else:
        state = ExcitationState.from_terms(g.N, {(j + 1, j): 1.0 for j in range(1, g.N)}, order=2)
    try:
        params = mbloch.MBParams(
            geometry=g,
            tau1=args.tau1,
            tau2=args.tau2,
            dt=args.dt,
            t_end=args.t_end,
            noise_amplitude=args.noise,
            realizations=args.realizations,
            base_seed=args.seed,
            noise_mode=args.noise_mode,
        )
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    spec = mbloch.ComponentSpec.from_state(state)
    run = mbloch.run_components(params, spec, time_factor=args.time_factor, keep_trajectories=args.trajectory is not None)
    p = run.pattern(_grid(args.grid), normalize=args.normalize)
    out = _require_out(args, "mbloch_pattern.csv")
    patterns.export_pattern(p, out)
    if args.trajectory is not None:
        mbloch.export_trajectory(run.trajectories[0][0], args.trajectory)
    _echo(args, out, {"failed_realizations": run.failed.tolist()})
    return 0


def cmd_oracle_check(args) -> int:
    g = _geometry(args)
    rng = np.random.default_rng(args.seed)
    grid = _grid(args.grid)
    dim = len(tuple_basis(g.N, args.order))
    worst = 0.0
    for _ in range(args.states):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        s = ExcitationState.from_vector(g.N, args.order, v)
        a = patterns.pattern(g, s, grid).values
        b = patterns.brute_force_pattern(g, s, grid).values
        worst = max(worst, float(np.abs(a - b).max() / b.max()))
    ok = worst <= args.rtol
    print(f"max relative deviation {worst:.3e} ({'PASS' if ok else 'FAIL'} at rtol {args.rtol:g})")
    if args.out is not None:
        _echo(args, args.out, {"max_relative_deviation": worst, "passed": ok})
        args.out.write_text(f"{worst:.11e}\n")
    return 0 if ok else 1


COMMANDS = {
    "pattern": cmd_pattern,
    "optimize": cmd_optimize,
    "feasibility": cmd_feasibility,
    "mbloch": cmd_mbloch,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    args = _parse(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CLIError, ValueError, FileNotFoundError) as exc:
        print(f"qantenna {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
