"""Command line front end.

    superholonomy <command> --model FILE [--kmax N] [--lprime N] [--seed N] [--out report.json]

Commands: curvature, transport, holonomy, compare, twofold, derham-wu,
``fppf audit`` and ``fppf glue``.  Reports are JSON with sorted keys;
rationals are "p/q" strings and Grassmann elements are sorted term lists, so
identical inputs give byte-identical output.

Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 bad model file or
arguments, 3 a mathematical precondition failed.
"""

import argparse
import json
import sys
import time
from fractions import Fraction

from .errors import ModelError, SuperholonomyError
from .fppf import (
    equivalence_audit,
    glue_sections,
    random_rank1_audit,
)
from .geometry import curvature
from .grassmann import GrassmannElement, GrassmannMorphism, bits
from .holonomy import (
    HolonomyEngine,
    comparison_check,
    holonomy_report,
    invariance_submodule,
    invariance_vector,
)
from .models import load_model_file
from .parser import element_json, format_any
from .superlinalg import LieSubalgebra, SuperMatrix
from .transport import parallel_transport

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_MATH = 0, 1, 2, 3


# serialisation


def to_json(value):
    """Convert results to plain JSON data; exact values become strings."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return format(value, ".12e")
    if isinstance(value, GrassmannElement):
        return element_json(value)
    if isinstance(value, SuperMatrix):
        return {"row_parity": list(value.row_par), "col_parity": list(value.col_par),
                "entries": [[to_json(e) for e in row] for row in value.entries]}
    if isinstance(value, LieSubalgebra):
        return {"dim": value.dim, "basis": [to_json(b) for b in value.basis()]}
    if isinstance(value, GrassmannMorphism):
        return {"source": value.source.total, "target": value.target.total,
                "images": [to_json(im) for im in value.images]}
    if isinstance(value, dict):
        return {str(k): to_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json(v) for v in value]
    if hasattr(value, "tolist"):
        return to_json(value.tolist())
    if hasattr(value, "terms"):
        return element_json(value)
    return format_any(value)


def dumps(report):
    return json.dumps(to_json(report), sort_keys=True, indent=2) + "\n"


# commands


def cmd_curvature(model, args):
    conn = model.connection()
    R = curvature(conn)
    base = model.base
    n = conn.patch.dim
    names = conn.patch.names
    comps = {}
    for a in range(n):
        for b in range(n):
            m = base.pull_back_matrix(R[(a, b)])
            if not m.is_zero():
                comps[f"{names[a]},{names[b]}"] = m
    return {"components_at_base": comps, "flat": not comps}, True


def cmd_transport(model, args):
    conn = model.connection()
    out = {}
    ok = True
    odd = conn.patch.q + conn.patch.L + conn.patch.Lprime
    for name, (kind, path) in sorted(model.paths.items()):
        op = parallel_transport(conn, path)
        entry = {"kind": kind, "mode": op.mode}
        if op.mode == "exact":
            back = parallel_transport(conn, path.reverse(), mode="exact")
            inverse_ok = (back.matrix @ op.matrix) == SuperMatrix.identity(conn.frame_par, op.matrix.proto)
            bound_ok = op.max_iterations <= odd + 1
            entry.update(matrix=op.matrix, iterations=op.iterations, inversion=inverse_ok,
                         iteration_bound=bound_ok)
            ok &= inverse_ok and bound_ok
        else:
            entry["numeric"] = {",".join(op.path.patch.context.label(b) for b in bits(m)) or "1": v
                                for m, v in sorted(op.numeric.items())}
        out[name] = entry
    return {"paths": out}, ok


def _engine(model, args):
    conn = model.connection()
    spec = model.sample_spec(args.kmax)
    return conn, spec, HolonomyEngine(conn, spec)


def cmd_holonomy(model, args):
    conn, spec, eng = _engine(model, args)
    rep = holonomy_report(conn, spec, lprime=args.lprime, engine=eng)
    return {
        "galaev": rep.galaev,
        "galaev_real_span": rep.galaev_real_span,
        "coefficient": rep.coefficient,
        "functorial_dims": rep.functorial_dims,
        "coefficient_dims": rep.coefficient_dims,
        "threshold": rep.threshold,
        "lprime": rep.lprime,
        "comparison": rep.comparison,
    }, rep.comparison


def cmd_compare(model, args):
    conn, spec, eng = _engine(model, args)
    res = comparison_check(conn, spec, lprime=args.lprime, engine=eng)
    return res, res["equal"]


def _twofold_lprime(eng, spec, args):
    if args.lprime is not None:
        return args.lprime
    from .splitting import stabilized_lprime

    return stabilized_lprime(eng, spec)


def cmd_twofold(model, args):
    conn, spec, eng = _engine(model, args)
    lp = _twofold_lprime(eng, spec, args)
    vectors = {name: invariance_vector(conn, spec, v, lp, engine=eng) for name, v in sorted(model.vectors.items())}
    subs = {}
    for name, members in sorted(model.submodules.items()):
        subs[name] = invariance_submodule(conn, spec, [model.vectors[v] for v in members], lp, engine=eng)
    ok = all(r["agree"] for r in list(vectors.values()) + list(subs.values()))
    return {"lprime": lp, "vectors": vectors, "submodules": subs, "all_agree": ok}, ok


def cmd_derham_wu(model, args):
    from .splitting import derham_wu_split, product_holonomy_check

    conn, spec, eng = _engine(model, args)
    metric = model.metric_model()
    if metric is None:
        raise ModelError("derham-wu needs a metric")
    split = derham_wu_split(conn, metric, spec, lprime=args.lprime, engine=eng)
    out = {
        "lprime": split.lprime,
        "algebra": split.algebra,
        "flat_candidate": split.candidate,
        "complement": split.complement,
        "block_diagonal": split.block_diagonal,
        "blocks": [{"vectors": b.vectors, "invariant": b.invariant, "flat": b.flat,
                    "weak_irreducibility": b.irreducibility} for b in split.blocks],
    }
    ok = split.holds
    if model.factors:
        f1, f2 = model.factor_models()
        pc = product_holonomy_check(f1.connection(), f1.sample_spec(args.kmax),
                                    f2.connection(), f2.sample_spec(args.kmax), conn, spec)
        out["product"] = {k: pc[k] for k in ("connection_matches", "lprime", "product_dim", "factor_dims", "equal")}
        ok &= pc["equal"] and pc["connection_matches"]
    return out, ok


def cmd_fppf_audit(model, args):
    table = {name: equivalence_audit(phi) for name, phi in sorted(model.morphisms.items())}
    ok = all(r["agree"] for r in table.values())
    out = {"morphisms": table}
    if args.random:
        n, bad = random_rank1_audit(args.random, seed=args.seed)
        out["random"] = {"count": n, "seed": args.seed, "disagreements": bad}
        ok &= not bad
    return out, ok


def cmd_fppf_glue(model, args):
    out = {}
    ok = True
    for sname, values in sorted(model.sections.items()):
        cover_name = next((c for c, members in sorted(model.covers.items()) if set(members) == set(values)), None)
        if cover_name is None:
            raise ModelError(f"section {sname} does not match any declared cover")
        members = model.covers[cover_name]
        cover = [model.morphisms[m] for m in members]
        family = [values[m] for m in members]
        try:
            res = glue_sections(cover, family, family="eta")
            out[sname] = {"cover": cover_name, "glued": res.section, "pairs": res.checked_pairs}
        except SuperholonomyError as exc:
            out[sname] = {"cover": cover_name, "error": exc.code, "message": str(exc)}
            ok = False
    return {"sections": out}, ok


COMMANDS = {
    "curvature": cmd_curvature,
    "transport": cmd_transport,
    "holonomy": cmd_holonomy,
    "compare": cmd_compare,
    "twofold": cmd_twofold,
    "derham-wu": cmd_derham_wu,
    "fppf audit": cmd_fppf_audit,
    "fppf glue": cmd_fppf_glue,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="superholonomy", description="Exact super holonomy computations.")
    parser.add_argument("command", nargs="+", help="one of: " + ", ".join(COMMANDS))
    parser.add_argument("--model", required=True, help="model file")
    parser.add_argument("--kmax", type=int, default=None)
    parser.add_argument("--lprime", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--random", type=int, default=0, help="random morphisms for fppf audit")
    parser.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    parser.add_argument("--timings", action="store_true", help="include wall-clock timings (not reproducible)")
    return parser


def run_command(model, command, args):
    """Dispatch one command; returns (report dict, pass flag)."""
    fn = COMMANDS.get(command)
    if fn is None:
        raise KeyError(command)
    return fn(model, args)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    command = " ".join(args.command)
    report = {"command": command, "model": args.model,
              "options": {"kmax": args.kmax, "lprime": args.lprime, "seed": args.seed}}
    if command not in COMMANDS:
        report["error"] = {"code": "unknown_command", "message": f"unknown command {command!r}"}
        code = EXIT_INPUT
    else:
        start = time.perf_counter()
        try:
            model = load_model_file(args.model)
            results, ok = run_command(model, command, args)
            report["results"] = results
            report["verdict"] = "pass" if ok else "fail"
            code = EXIT_PASS if ok else EXIT_FAIL
        except OSError as exc:
            report["error"] = {"code": "io_error", "message": str(exc)}
            code = EXIT_INPUT
        except ModelError as exc:
            report["error"] = {"code": exc.code, "message": exc.message, "line": exc.line, "column": exc.column}
            code = EXIT_INPUT
        except SuperholonomyError as exc:
            report["error"] = {"code": exc.code, "message": str(exc)}
            code = EXIT_MATH
        if args.timings:
            report["seconds"] = round(time.perf_counter() - start, 3)
    text = dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
