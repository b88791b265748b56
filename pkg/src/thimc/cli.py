"""Command-line interface: ``thimc <command> ...``.

Commands read and write JSON artifacts (surface data, immersions and
verification reports) plus OBJ/CSV meshes.  Exit status is 0 when every
gated check passes, 1 for invalid input or configuration and 2 when an
invariant fails (the report is still written).
"""
import argparse
import json
import os
import sys
import warnings

import numpy as np
import sympy as sp

from . import hazzidakis as hz
from . import transforms as tr
from . import zoo
from .errors import ThimcError
from .surface import IsothermicStructure, NullGrid, SurfaceData
from .sym import ImmersionGrid, h31_surface, s31_surface, sym_surface, deformed_quantities
from .verify import report as oracle_report
from .verify import verification_report
from .config import tol, tolerances


class ConfigError(Exception):
    """Invalid command line or configuration file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _range(text):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    return lo, hi


def parse_function(text, var="s"):
    """Vectorised callable from an expression in ``var`` such as ``1/s``."""
    sym = sp.Symbol(var)
    try:
        expr = sp.sympify(text, locals={var: sym})
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"cannot parse function {text!r}: {exc}")
    extra = expr.free_symbols - {sym}
    if extra:
        raise ConfigError(f"function {text!r} uses unknown symbols {sorted(map(str, extra))}")
    fn = sp.lambdify(sym, expr, "numpy")
    return lambda s: float(fn(s)) if np.ndim(s) == 0 else np.broadcast_to(fn(s), np.shape(s))


# artifact io -------------------------------------------------------------------

def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}")


def load_surface(path):
    try:
        return SurfaceData.from_dict(_read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path} is not a surface data file: {exc}")


def load_immersion(path):
    try:
        return ImmersionGrid.from_dict(_read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path} is not an immersion file: {exc}")


def _emit(args, data=None, imm=None, report=None, extra=None):
    """Write surface.json / immersion.json / report.json (+ mesh) into ``args.out``."""
    os.makedirs(args.out, exist_ok=True)
    written = {}
    if data is not None:
        written["surface"] = os.path.join(args.out, "surface.json")
        data.to_json(written["surface"])
    if imm is not None:
        written["immersion"] = os.path.join(args.out, "immersion.json")
        imm.to_json(written["immersion"])
        fmt = getattr(args, "export", None)
        if fmt == "obj":
            written["mesh"] = os.path.join(args.out, "mesh.obj")
            imm.to_obj(written["mesh"])
        elif fmt == "csv":
            written["mesh"] = os.path.join(args.out, "immersion.csv")
            imm.to_csv(written["mesh"])
    report = dict(report or {})
    report.update(extra or {})
    report["files"] = written
    _write_json(os.path.join(args.out, "report.json"), report)
    return report


def _full_report(data, imm=None, oracle_gate="order"):
    rep = verification_report(data, imm, oracle_gate=oracle_gate)
    rep["thimc_pass"] = rep["checks"]["thimc"]
    return rep


# generate -------------------------------------------------------------------------

def _grid(args):
    return NullGrid.from_bounds(args.u_range, args.v_range, args.n)


def _gen_cylinder(args):
    spec = zoo.CurveSpec(args.curve, args.C1, args.C2)
    grid = _grid(args)
    if not np.isclose(grid.du, grid.dv):
        raise ConfigError("cylinders need equal u and v spacing")
    return zoo.thimc_cylinder(spec, grid)


def _gen_bscroll(args):
    kappa = parse_function(args.kappa)
    tau = parse_function(args.tau_fn)
    imm, data, frame = zoo.b_scroll(kappa, tau, _grid(args))
    return imm, data


def _gen_revolution(args):
    if args.profile == "null":
        prof = zoo.solve_null_axis(args.c1, args.a0, args.domain, args.n, variant=args.variant)
        extra = {"quadrature_discrepancy": prof.discrepancy}
    else:
        prof = zoo.solve_painleve_profile(args.profile, args.phi0, args.dphi0, args.domain, args.n,
                                          branch=args.branch)
        extra = {"ode_residual": prof.ode_residual, "branch": prof.branch,
                 "anomalous": prof.anomalous}
    imm, data = zoo.revolution_surface(prof.spec)
    return imm, data.with_fields(meta=dict(data.meta, **extra))


def _gen_hazzidakis(args):
    grid = _grid(args)
    real = hz.realization(args.realization, grid, args.eps)
    t = hz.t_field(grid, args.eps)
    pad = 0.02 * (t.max() - t.min())
    if args.exact:
        sol = hz.case1_closed_form(args.theta, args.eps, (t.min() - pad, t.max() + pad), 801,
                                   args.family)
    else:
        scale = 1.0 if args.realization == "identity" else 4.0
        t0 = t.min() - pad
        p = hz.HazzidakisParams(args.family, args.eps, args.theta, t0, args.q0, args.q1, args.q2,
                                t.max() + pad, s_scale=scale,
                                coefficient_sign=args.coefficient_sign)
        sol = hz.solve_hazzidakis(p)
    data = hz.reconstruct_surface(sol, real, grid)
    if args.solution_csv:
        import csv
        with open(args.solution_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "q", "dq", "ddq"])
            for row in sol.to_csv_rows():
                w.writerow(row)
    return None, data.with_fields(meta=dict(data.meta, star_residual=sol.residual))


def _gen_cmc(args):
    return None, zoo.cmc_data(args.k, _grid(args))


def _gen_sym(args):
    data = load_surface(args.input)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        imm = sym_surface(data, args.tau)
    if args.tau != 0:
        data = deformed_quantities(data, args.tau)
    return imm, data


GENERATORS = {"cylinder": _gen_cylinder, "bscroll": _gen_bscroll, "revolution": _gen_revolution,
              "hazzidakis": _gen_hazzidakis, "cmc": _gen_cmc, "sym": _gen_sym}


def cmd_generate(args):
    imm, data = GENERATORS[args.model](args)
    rep = _full_report(data, imm)
    _emit(args, data, imm, rep, {"model": args.model})
    return 0 if rep["pass"] else 2


# other commands ---------------------------------------------------------------------

def cmd_verify(args):
    data = load_surface(args.surface)
    imm = load_immersion(args.immersion) if args.immersion else None
    rep = _full_report(data, imm)
    path = args.report or os.path.splitext(args.surface)[0] + ".report.json"
    rep["files"] = {"report": path}
    _write_json(path, rep)
    print(json.dumps({"pass": rep["pass"], "failed": rep["failed"]}))
    return 0 if rep["pass"] else 2


def cmd_deform(args):
    data = load_surface(args.surface)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if args.ambient == "E31":
            imm = sym_surface(data, args.tau)
            new = deformed_quantities(data, args.tau)
            rep = _full_report(new, imm)
            _emit(args, new, imm, rep, {"tau": args.tau, "ambient": "E31"})
            return 0 if rep["pass"] else 2
        if args.ambient == "H31":
            imm = h31_surface(data, args.tau, two_param=args.two_param)
        else:
            imm = s31_surface(data, args.tau, two_param=args.two_param)
    rep = {k: v for k, v in oracle_report(imm).items()}
    ok = rep["quadric_defect"] <= tol("immersion_det")
    rep.update(checks={"quadric": ok}, failed=[] if ok else ["quadric"], passed=ok)
    rep["pass"] = ok
    _emit(args, None, imm, rep, {"tau": args.tau, "ambient": args.ambient,
                                 "two_param": args.two_param})
    return 0 if ok else 2


def cmd_dualize(args):
    data = load_surface(args.surface)
    rho, sigma = np.ones(data.grid.nu), np.ones(data.grid.nv)
    q = IsothermicStructure.recover_q(data.Q, data.R, rho, sigma, args.eps)
    structure = IsothermicStructure(args.eps, args.theta, q, rho, sigma)
    if args.mode == "christoffel":
        if not args.immersion:
            raise ConfigError("the christoffel mode needs --immersion")
        imm = load_immersion(args.immersion)
        out, dual, cert = tr.christoffel_dual(data, imm, structure, strict=False)
        rep = _full_report(dual, out, oracle_gate="h2")
        rep["checks"]["path_independence"] = cert["pass"]
        rep["certificate"] = cert
        rep["failed"] = sorted(k for k, v in rep["checks"].items() if not v and k != "thimc")
        rep["pass"] = not rep["failed"]
        _emit(args, dual, out, rep, {"mode": "christoffel"})
        return 0 if rep["pass"] else 2
    dual, info = tr.dual_bonnet_data(data, structure)
    rep = verification_report(dual)
    rep["dual"] = info
    rep["failed"] = sorted(k for k, v in rep["checks"].items() if not v and k != "thimc")
    rep["pass"] = not rep["failed"]
    _emit(args, dual, None, rep, {"mode": "bonnet"})
    return 0 if rep["pass"] else 2


def cmd_lawson(args):
    data = load_surface(args.surface)
    if args.to_c0:
        new = tr.lawson_transform(tr.to_inverse_ratio(data))
    else:
        new = tr.inverse_lawson(data, args.from_c0)
    rep = _full_report(new)
    _emit(args, new, None, rep, {"lawson": "to_c0" if args.to_c0 else f"from_c0:{args.from_c0}"})
    return 0 if rep["pass"] else 2


def cmd_export(args):
    imm = load_immersion(args.immersion)
    if args.format == "obj":
        imm.to_obj(args.output)
    else:
        imm.to_csv(args.output)
    return 0


# parser ---------------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="thimc", description="Build, deform, transform and verify timelike THIMC surfaces (1/H harmonic).")
    p.add_argument("--config", help="JSON file with default option values")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="build an example surface")
    g.add_argument("model", choices=sorted(GENERATORS))
    g.add_argument("--out", default=".")
    g.add_argument("--export", choices=("obj", "csv"))
    g.add_argument("--n", type=int, default=129)
    g.add_argument("--u-range", type=_range, default=(0.5, 1.0))
    g.add_argument("--v-range", type=_range, default=(0.5, 1.0))
    g.add_argument("--curve", choices=zoo.CURVE_KINDS, default="log_spiral")
    g.add_argument("--C1", type=float, default=1.0)
    g.add_argument("--C2", type=float, default=0.5)
    g.add_argument("--kappa", default="0")
    g.add_argument("--tau-fn", default="1/s")
    g.add_argument("--profile", choices=zoo.PAINLEVE_KINDS + ("null",), default="trig")
    g.add_argument("--phi0", type=float, default=0.5)
    g.add_argument("--dphi0", type=float, default=0.0)
    g.add_argument("--domain", type=_range, default=(1.0, 1.5))
    g.add_argument("--branch")
    g.add_argument("--variant", choices=("uncorrected", "consistent"), default="uncorrected")
    g.add_argument("--c1", type=float, default=0.0)
    g.add_argument("--a0", type=float, default=1.0)
    g.add_argument("--family", choices=sorted(hz.S_BASE), default="C")
    g.add_argument("--eps", type=int, choices=(1, -1), default=1)
    g.add_argument("--theta", type=float, default=1.0)
    g.add_argument("--q0", type=float, default=-0.5)
    g.add_argument("--q1", type=float, default=-0.5)
    g.add_argument("--q2", type=float, default=0.0)
    g.add_argument("--coefficient-sign", type=int, choices=(1, -1), default=1)
    g.add_argument("--realization", choices=("identity", "tan", "tanh"), default="identity")
    g.add_argument("--exact", action="store_true", help="use the closed-form case-1 solution")
    g.add_argument("--solution-csv")
    g.add_argument("--k", type=float, default=1.0)
    g.add_argument("--input")
    g.add_argument("--tau", type=float, default=0.0)
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="check a surface data file")
    v.add_argument("surface")
    v.add_argument("--immersion")
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("deform", help="member tau of the associated family")
    d.add_argument("surface")
    d.add_argument("--tau", type=float, required=True)
    d.add_argument("--ambient", choices=("E31", "H31", "S31"), default="E31")
    d.add_argument("--two-param", action="store_true")
    d.add_argument("--out", default=".")
    d.add_argument("--export", choices=("obj", "csv"))
    d.set_defaults(func=cmd_deform)

    du = sub.add_parser("dualize", help="Christoffel dual or dual Bonnet data")
    du.add_argument("surface")
    du.add_argument("--mode", choices=("christoffel", "bonnet"), required=True)
    du.add_argument("--immersion")
    du.add_argument("--eps", type=int, choices=(1, -1), default=1,
                    help="sign of the isothermic structure")
    du.add_argument("--theta", type=float, default=0.0,
                    help="theta of the isothermic structure (twice the Hazzidakis theta)")
    du.add_argument("--out", default=".")
    du.add_argument("--export", choices=("obj", "csv"))
    du.set_defaults(func=cmd_dualize)

    lw = sub.add_parser("lawson", help="Lawson map to or from c = 0")
    grp = lw.add_mutually_exclusive_group(required=True)
    grp.add_argument("--to-c0", action="store_true")
    grp.add_argument("--from-c0", type=int, choices=(1, -1))
    lw.add_argument("surface")
    lw.add_argument("--out", default=".")
    lw.set_defaults(func=cmd_lawson)

    ex = sub.add_parser("export", help="write an immersion as OBJ or CSV")
    ex.add_argument("immersion")
    ex.add_argument("--format", choices=("obj", "csv"), required=True)
    ex.add_argument("--output", required=True)
    ex.set_defaults(func=cmd_export)
    return p


def _apply_config(parser, argv):
    """Load ``--config`` values as subcommand defaults, then parse again."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cfg = _read_json(args.config)
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    for key, value in cfg.items():
        if isinstance(value, list):
            cfg[key] = tuple(value)
    sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def run(argv=None):
    """Entry point; returns the exit status."""
    parser = build_parser()
    try:
        try:
            tolerances()
        except ValueError as exc:
            raise ConfigError(str(exc))
        args = _apply_config(parser, argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"thimc: error: {exc}", file=sys.stderr)
        return 1
    except ThimcError as exc:
        print(f"thimc: invariant failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        out = getattr(args, "out", None)
        if out:
            os.makedirs(out, exist_ok=True)
            _write_json(os.path.join(out, "report.json"),
                        {"pass": False, "error": type(exc).__name__, "message": str(exc)})
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
