"""Command-line front end: ``mdlpoly <subcommand> [options]``, JSON on stdout.

Exit status is 0 on success, 1 on a domain error (parameters out of range,
invalid behavior, ...) and 2 on a usage error. Rationals are written as
``num/den``; decimals are rejected. Randomness comes only from ``--seed``
(default 0).
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .rational import format_rational, parse_rational

DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _rational_list(text: str) -> list:
    return [_rational(t) for t in text.split(",") if t.strip()]


def _jsonable(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _scenario(args):
    from .scenario import Scenario
    return Scenario.parse(args.scenario)


def _params(args, scenario):
    from .scenario import validate_mdl_params
    if args.l is None or args.h is None:
        raise UsageError("--l and --h are required")
    return validate_mdl_params(scenario, args.l, args.h)


def _ineq(args):
    from .inequalities import Inequality, catalog
    if getattr(args, "ineq_file", None):
        with open(args.ineq_file) as f:
            return Inequality.from_json(json.load(f))
    if not args.ineq:
        raise UsageError("--ineq or --ineq-file is required")
    names = {"l": args.l, "h": args.h, "n": args.n, "N": args.N}
    from .inequalities import _CATALOG
    if args.ineq not in _CATALOG:
        raise UsageError(f"unknown inequality {args.ineq!r}; known: {sorted(_CATALOG)}")
    wanted = _CATALOG[args.ineq][1]
    missing = [k for k in wanted if names[k] is None]
    if missing:
        raise UsageError(f"{args.ineq} needs {', '.join('--' + k for k in missing)}")
    return catalog(args.ineq, **{k: names[k] for k in wanted})


# -- subcommands -----------------------------------------------------------------

def cmd_vertices(args):
    from .polytope import mdl_vertices
    sc = _scenario(args)
    return mdl_vertices(sc, _params(args, sc), minimize=not args.no_minimize).to_json()


def cmd_facets(args):
    from .polytope import facet_enumeration, mdl_vertices
    sc = _scenario(args)
    return facet_enumeration(mdl_vertices(sc, _params(args, sc))).to_json()


def cmd_membership(args):
    from .lp import membership
    from .polytope import mdl_vertices
    from .scenario import JointBehavior, behavior_from_json
    sc = _scenario(args)
    with open(args.behavior) as f:
        behavior = behavior_from_json(json.load(f))
    if not isinstance(behavior, JointBehavior):
        raise ValueError("membership expects a joint behavior")
    verts = mdl_vertices(sc, _params(args, sc))
    res = membership(behavior.values, verts.vertices)
    if res:
        return {"inside": True, "weights": [[k, format_rational(w)] for k, w in res.weights],
                "vertices": verts.to_json()["vertices"]}
    return {"inside": False, "a": _jsonable(res.a), "bound": format_rational(res.bound),
            "margin": format_rational(res.margin)}


def cmd_transform(args):
    from .inequalities import bell_to_mdl
    sc = _scenario(args)
    return bell_to_mdl(_ineq(args), _params(args, sc)).to_json()


def cmd_mdl_bound(args):
    from .inequalities import CONDITIONAL, bell_to_mdl, mdl_bound
    from .polytope import mdl_vertices
    ineq = _ineq(args)
    sc = ineq.scenario
    params = _params(args, sc)
    transformed = ineq.space == CONDITIONAL
    if transformed:
        ineq = bell_to_mdl(ineq, params)
    bound = mdl_bound(ineq, mdl_vertices(sc, params))
    return {"inequality": ineq.to_json(), "transformed": transformed,
            "mdl_bound": format_rational(bound), "stated_bound": format_rational(ineq.bound)}


def _table_params(args):
    if args.table == "B1":
        if args.l is None:
            raise UsageError("table B1 needs --l")
        return {"l": args.l}
    if args.table == "B2":
        if args.h is None:
            raise UsageError("table B2 needs --h")
        return {"h": args.h}
    if args.hx is None or args.hy is None:
        raise UsageError("table C needs --hx and --hy")
    return {"hx": args.hx, "hy": args.hy}


def cmd_verify_table(args):
    from .facet_tables.tables import load_table, table_vertices, verify_table
    table = load_table(args.table)
    params = _table_params(args)
    report = verify_table(table, params, table_vertices(table, params), args.allow_boundary)
    return {"table": table.id, "params": report.params, "summary": report.summary,
            "rows": [r.to_json() for r in report.rows]}


def cmd_completeness(args):
    from .facet_tables.tables import completeness_check, load_table, table_vertices
    table = load_table(args.table)
    params = _table_params(args)
    rep = completeness_check(table, params, table_vertices(table, params),
                             conditional_output_flips=not args.literal_group)
    return rep.to_json()


def _model(args):
    from .quantum import (MeasurementSet, StateVector, hardy_model, maximally_entangled,
                          psi_n_model, two_n_two_model)
    if args.state_file:
        with open(args.state_file) as f:
            state = StateVector.from_json(json.load(f))
        if not args.measurements_file:
            raise UsageError("--state-file needs --measurements-file")
        with open(args.measurements_file) as f:
            meas = MeasurementSet.from_json(json.load(f))
        return state, meas
    if args.model == "hardy":
        return hardy_model()
    if args.model == "psi_n":
        if args.N is None:
            raise UsageError("model psi_n needs --N")
        return psi_n_model(args.N)
    if args.model == "two_n_two":
        if args.n is None:
            raise UsageError("model two_n_two needs --n")
        return two_n_two_model(args.n)
    if args.model == "me":
        # maximally entangled state with the Hardy-model bases
        _, meas = hardy_model()
        return maximally_entangled(), meas
    raise UsageError("choose --model or --state-file")


def cmd_quantum_eval(args):
    """Behavior of a model; joint-space inequalities are evaluated with uniform inputs."""
    from .inequalities import JOINT, evaluate, evaluate_float
    from .quantum import born_behavior
    from .scenario import InputDistribution, behavior_to_json, conditional_to_joint
    state, meas = _model(args)
    uniform = InputDistribution.uniform(meas.scenario())
    cond = born_behavior(state, meas, exact=True)
    shown = conditional_to_joint(cond, uniform) if args.inputs == "uniform" else cond
    out = {"behavior": behavior_to_json(shown)}
    if args.ineq or args.ineq_file:
        ineq = _ineq(args)
        if ineq.space == JOINT:
            out["value"] = evaluate_float(ineq, born_behavior(state, meas, uniform))
            out["exact_value"] = format_rational(evaluate(ineq, cond, uniform))
        else:
            out["value"] = evaluate_float(ineq, born_behavior(state, meas))
            out["exact_value"] = format_rational(evaluate(ineq, cond))
        out["bound"] = format_rational(ineq.bound)
    return out


def cmd_optimize(args):
    from .quantum import hardy_angles, maximally_entangled, optimize_violation
    from .scenario import InputDistribution
    ineq = _ineq(args)
    inputs = InputDistribution.uniform(ineq.scenario) if ineq.space == "joint" else None
    state = None
    initial = initial_state = None
    if args.state == "me":
        state = maximally_entangled()
    elif args.state == "hardy":
        from .quantum import hardy_model
        initial_state, _ = hardy_model()
        initial = hardy_angles()
    res = optimize_violation(ineq, inputs, state, args.restarts, args.budget, args.seed,
                             initial, initial_state, workers=args.threads)
    return {"inequality": ineq.name, "bound": format_rational(ineq.bound), **res.to_json()}


def cmd_me_scan(args):
    from .quantum import maximally_entangled_scan
    grid = args.l_grid or [Fraction(1, 10), Fraction(7, 50), Fraction(1, 5)]
    entries = maximally_entangled_scan(grid, args.restarts, args.budget, args.seed,
                                       workers=args.threads)
    return {"scan": [e.to_json() for e in entries]}


def cmd_detection_test(args):
    from .detection import (DetectionParams, check_sample, map_params, postselect,
                            sample_ldl_behavior)
    from .lp import membership
    from .polytope import mdl_vertices
    sc = _scenario(args)
    params = _params(args, sc)
    if args.eta_min is None or args.eta_max is None:
        raise UsageError("--eta-min and --eta-max are required")
    det = DetectionParams(args.eta_min, args.eta_max)
    mapped = map_params(params, det, sc)
    verts = mdl_vertices(sc, mapped.params).vertices
    samples = []
    for k in range(args.samples):
        lossy = sample_ldl_behavior(args.seed + k, sc, params, det, args.lambda_count)
        ok = check_sample(lossy, params, det) and bool(membership(postselect(lossy).values, verts))
        samples.append({"seed": args.seed + k, "pass": ok})
    return {"mapped": {"l": format_rational(mapped.params.l), "h": format_rational(mapped.params.h),
                       "clamped": mapped.clamped, "unclamped_h": format_rational(mapped.unclamped_h)},
            "passed": sum(s["pass"] for s in samples), "failed": sum(not s["pass"] for s in samples),
            "samples": samples}


def cmd_ns_intersect(args):
    from .facet_tables.tables import load_table, table_hrep, table_vertices
    from .inequalities import JOINT, Inequality, inequality_key, symmetry_orbit
    from .lp import intersect_with_equalities
    from .polytope import ns_joint_equalities
    from .scenario import InputDistribution, Scenario
    if args.h is None:
        raise UsageError("--h is required")
    table = load_table("B2")
    params = {"h": args.h}
    hrep = table_hrep(table, params, table_vertices(table, params))
    sc = Scenario.uniform(2, 2, 2)
    out, info = intersect_with_equalities(
        hrep, ns_joint_equalities(sc, InputDistribution.uniform(sc)), report=True)
    families = {}
    for flips in (False, True):
        remaining = {inequality_key(a, b, out.eqs) for a, b in out.ineqs}
        count = 0
        while remaining:
            a, b = min(remaining)
            count += 1
            remaining -= {inequality_key(o.beta, o.bound, out.eqs)
                          for o in symmetry_orbit(Inequality(sc, JOINT, a, b), flips, out.eqs)}
        families["extended_group" if flips else "literal_group"] = count
    return {"input_rows": info.input_count, "duplicates": info.duplicates,
            "irredundant": info.kept, "families": families, "hrep": out.to_json()}


COMMANDS = {
    "vertices": cmd_vertices, "facets": cmd_facets, "membership": cmd_membership,
    "transform": cmd_transform, "mdl-bound": cmd_mdl_bound, "verify-table": cmd_verify_table,
    "completeness": cmd_completeness, "quantum-eval": cmd_quantum_eval, "optimize": cmd_optimize,
    "me-scan": cmd_me_scan, "detection-test": cmd_detection_test, "ns-intersect": cmd_ns_intersect,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default="2,2,2", help="N,m,k (default 2,2,2)")
    common.add_argument("--l", type=_rational, help="lower input bound, num/den")
    common.add_argument("--h", type=_rational, help="upper input bound, num/den")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("--config", help="JSON file of option values; unknown keys are rejected")
    common.add_argument("--output", help="write the JSON report here instead of stdout")

    ineq = argparse.ArgumentParser(add_help=False)
    ineq.add_argument("--ineq", help="catalog name (eberhard, chsh, chsh_joint, golden, ...)")
    ineq.add_argument("--ineq-file", help="inequality JSON file")
    ineq.add_argument("--n", type=int, help="inputs per party for two_n_two")
    ineq.add_argument("--N", type=int, help="party count for n_party_*")

    table = argparse.ArgumentParser(add_help=False)
    table.add_argument("--table", choices=["B1", "B2", "C"], required=True)
    table.add_argument("--hx", type=_rational)
    table.add_argument("--hy", type=_rational)

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--restarts", type=int, default=64)
    search.add_argument("--budget", type=int, default=4000, help="evaluations per restart")

    p = argparse.ArgumentParser(prog="mdlpoly", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("vertices", parents=[common], help="MDL polytope vertices")
    s.add_argument("--no-minimize", action="store_true", help="keep every candidate product")
    sub.add_parser("facets", parents=[common], help="facet enumeration of MDL(l, h)")
    s = sub.add_parser("membership", parents=[common], help="exact membership in MDL(l, h)")
    s.add_argument("--behavior", required=True, help="joint behavior JSON file")
    sub.add_parser("transform", parents=[common, ineq], help="Bell inequality to MDL inequality")
    sub.add_parser("mdl-bound", parents=[common, ineq], help="maximum over MDL(l, h) vertices")
    s = sub.add_parser("verify-table", parents=[common, table], help="check a bundled facet table")
    s.add_argument("--allow-boundary", action="store_true")
    s = sub.add_parser("completeness", parents=[common, table], help="orbits of table rows vs facets")
    s.add_argument("--literal-group", action="store_true",
                   help="omit input-conditioned outcome flips from the symmetry group")
    s = sub.add_parser("quantum-eval", parents=[common, ineq], help="Born-rule behavior of a model")
    s.add_argument("--model", choices=["hardy", "psi_n", "two_n_two", "me"], default="hardy")
    s.add_argument("--state-file")
    s.add_argument("--measurements-file")
    s.add_argument("--inputs", choices=["conditional", "uniform"], default="conditional")
    s = sub.add_parser("optimize", parents=[common, ineq, search], help="search for a violation")
    s.add_argument("--state", choices=["free", "me", "hardy"], default="free",
                   help="me fixes the maximally entangled state; hardy seeds restart 0")
    s = sub.add_parser("me-scan", parents=[common, search], help="B1 families on the maximally entangled state")
    s.add_argument("--l-grid", type=_rational_list, help="comma-separated l values")
    s.set_defaults(budget=1500)
    s = sub.add_parser("detection-test", parents=[common], help="limited-detection inclusion test")
    s.add_argument("--eta-min", type=_rational)
    s.add_argument("--eta-max", type=_rational)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--lambda-count", type=int, default=4)
    sub.add_parser("ns-intersect", parents=[common], help="B2 facets cut by nonsignaling equalities")
    return p


def _apply_config(parser, args, argv):
    with open(args.config) as f:
        cfg = json.load(f)
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    known = {k for k in vars(args) if k not in ("command", "config")}
    unknown = set(k.replace("-", "_") for k in cfg) - known
    if unknown:
        raise UsageError(f"unknown config fields: {sorted(unknown)}")
    # command-line options win over the file
    flat = [args.command]
    for k, v in cfg.items():
        flat += [f"--{k.replace('_', '-')}", str(v)] if not isinstance(v, bool) else (
            [f"--{k.replace('_', '-')}"] if v else [])
    merged = parser.parse_args(flat + [a for a in argv if a != args.command])
    return merged


def _config_json(args) -> dict:
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("output",)}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.config:
            args = _apply_config(parser, args, argv)
        result = COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"mdlpoly: error: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, ZeroDivisionError, OSError) as e:
        report = {"version": __version__, "command": args.command, "config": _config_json(args),
                  "error": f"{type(e).__name__}: {e}"}
        print(json.dumps(report), file=sys.stderr)
        return 1
    report = {"version": __version__, "command": args.command, "config": _config_json(args),
              "result": result}
    text = json.dumps(report, indent=None)
    if args.output:
        with open(args.output, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
