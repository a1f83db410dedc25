"""``totpos`` command line.

Every subcommand prints one JSON report on stdout.  Exit codes: 0 success or
property holds, 1 property fails or counterexample found, 2 usage/IO/parse
error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import mpmath

from . import checker, completion, transforms, witnesses
from .expr import ParseError
from .io import MatrixFileError, matrix_to_dict, read_matrix, write_matrix
from .numkernel import DomainError, Matrix, default_precision, format_scalar, parse_scalar

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _json(value, prec):
    if isinstance(value, Matrix):
        return matrix_to_dict(value)
    if isinstance(value, (Fraction, mpmath.mpf)):
        return format_scalar(value, prec)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str, float)):
        return value
    if isinstance(value, dict):
        return {str(k): _json(v, prec) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json(v, prec) for v in value]
    return str(value)


def _certificate(cert: checker.Certificate) -> dict:
    out = {"verdict": cert.verdict.value, "property": cert.property, "method": cert.method,
           "exact": cert.exact, "checked": cert.checked, "indeterminate": cert.indeterminate}
    if cert.witness is not None:
        out["witness"] = {"rows": list(cert.witness.rows), "cols": list(cert.witness.cols),
                          "value": cert.value}
    return out


def _verdict_code(cert: checker.Certificate) -> int:
    return {checker.Verdict.HOLDS: EXIT_OK, checker.Verdict.FAILS: EXIT_FAIL,
            checker.Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}[cert.verdict]


def _scalars(text: str, count: int | None = None):
    try:
        vals = [parse_scalar(t) for t in text.split(",")]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if count is not None and len(vals) != count:
        raise UsageError(f"expected {count} comma-separated values, got {text!r}")
    return vals


def _ints(text: str, count: int):
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"expected integers, got {text!r}") from exc
    if len(vals) != count:
        raise UsageError(f"expected {count} comma-separated integers")
    return vals


def _function(args):
    if getattr(args, "fn", None):
        return transforms.descriptor_from_text(args.fn)
    if getattr(args, "power", None):
        c, alpha = _scalars(args.power, 2)
        if c == 0:
            return transforms.Constant(0)
        return transforms.Power(c, alpha)
    raise UsageError("give --fn EXPR or --power c,alpha")


def _load(args) -> Matrix:
    M = read_matrix(args.file, args.precision)
    if getattr(args, "float", False) and M.exact:
        M = M.to_float(args.precision or default_precision())
    elif getattr(args, "exact", False) and not M.exact:
        M = M.to_exact()
    return M


# subcommands ---------------------------------------------------------------


def cmd_check(args):
    M = _load(args)
    prop = args.property.upper()
    req = checker.CheckRequest(M, prop, args.order, args.deterministic, args.full,
                               args.tol, args.strict_boundary, args.size_guard)
    cert = checker.check(req)
    return {"matrix": M, "certificate": _certificate(cert), "verdict": cert.verdict.value}, \
        _verdict_code(cert)


def cmd_apply(args):
    M = _load(args)
    F = _function(args)
    B = transforms.apply_entrywise(M, F, args.precision, positive=args.positive)
    if args.output:
        write_matrix(B, args.output)
    return {"function": F.describe(), "result": B, "verdict": "ok"}, EXIT_OK


def _query(args):
    return transforms.PreserverQuery(transforms.Mode.parse(args.mode), args.delta)


def cmd_classify(args):
    cls = transforms.classify_preservers(_query(args))
    return {"mode": args.mode.upper(), "delta": args.delta, "class": cls.kind,
            "alphas": str(cls.alphas) if cls.alphas else None,
            "constants": cls.constants, "report": cls.description, "verdict": "ok"}, EXIT_OK


def cmd_is_preserver(args):
    c, alpha = _scalars(args.power, 2)
    ok = transforms.is_power_preserver(_query(args), c, alpha)
    return {"mode": args.mode.upper(), "delta": args.delta, "c": c, "alpha": alpha,
            "preserver": ok, "verdict": "holds" if ok else "fails"}, EXIT_OK if ok else EXIT_FAIL


def cmd_falsify(args):
    F = _function(args)
    errors = []
    cx = transforms.falsify(F, _query(args), args.budget, args.seed, args.precision, errors)
    report = {"function": F.describe(), "mode": args.mode.upper(), "delta": args.delta,
              "budget": args.budget, "seed": args.seed, "skipped": len(errors)}
    if cx is None:
        report["verdict"] = "no counterexample"
        return report, EXIT_OK
    report.update({"verdict": "counterexample", "family": cx.family, "params": cx.params,
                   "matrix": cx.matrix, "transformed": cx.transformed,
                   "violation": _certificate(cx.violation), "tried": cx.tried})
    return report, EXIT_FAIL


WITNESS_FAMILIES = {
    "A": (witnesses.family_A, ("x", "y")),
    "B": (witnesses.family_B, ("x", "y")),
    "A_tp": (witnesses.family_A_tp, ("x", "y", "eps")),
    "B_tp": (witnesses.family_B_tp, ("x", "y", "eps")),
    "sym_rank1": (witnesses.sym_rank1, ("x", "y")),
    "monotone_pair": (witnesses.monotone_pair, ("x", "y")),
    "M_tp": (witnesses.family_M_tp, ("x", "y", "eps")),
    "A_sym": (witnesses.family_A_sym, ("x", "y")),
    "B_sym": (witnesses.family_B_sym, ("x", "y")),
    "C": (lambda: witnesses.matrix_C(), ()),
    "C_rational": (witnesses.matrix_C_rational, ("b",)),
    "N": (witnesses.family_N, ("eps", "x")),
    "T": (witnesses.family_T, ("x",)),
    "D": (lambda x, size: witnesses.moment_two_point(x, int(size)), ("x", "size")),
    "hilbert": (lambda size: witnesses.hilbert(int(size)), ("size",)),
}


def cmd_witness(args):
    if args.family not in WITNESS_FAMILIES:
        raise UsageError(f"unknown family {args.family!r}; choose from {sorted(WITNESS_FAMILIES)}")
    fn, names = WITNESS_FAMILIES[args.family]
    params = {}
    for item in filter(None, (args.params or "").split(",")):
        if "=" not in item:
            raise UsageError(f"parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        params[k.strip()] = _scalars(v)[0]
    missing = [n for n in names if n not in params]
    extra = [k for k in params if k not in names]
    if missing or extra:
        raise UsageError(f"family {args.family} takes parameters {names}")
    M = fn(*[params[n] for n in names])
    report = {"family": args.family, "params": params, "matrix": M}
    if M.is_square and M.m <= checker.DEFAULT_SIZE_GUARD:
        report["tn"] = _certificate(checker.is_tn(M))
    report["verdict"] = "ok"
    return report, EXIT_OK


def _two_by_two(args) -> Matrix:
    if args.file:
        return read_matrix(args.file, args.precision)
    if args.entries:
        a, b, c, d = _scalars(args.entries, 4)
        return Matrix([[a, b], [c, d]])
    raise UsageError("give --file or --entries a,b,c,d")


def cmd_embed(args):
    A = _two_by_two(args)
    emb = completion.embed_2x2_vandermonde(A, args.m, args.n, args.precision)
    return {"parameters": emb.record(), "matrix": emb.realize(args.m, args.n),
            "verdict": "holds"}, EXIT_OK


def cmd_embed_at(args):
    A = _two_by_two(args)
    emb = completion.embed_2x2_at_position(A, args.m, args.n, _ints(args.rows, 2),
                                           _ints(args.cols, 2), args.precision)
    return {"parameters": emb.record(), "matrix": emb.realize(args.m, args.n),
            "verdict": "holds"}, EXIT_OK


def cmd_complete_hankel(args):
    a, b, c = _scalars(args.abc, 3)
    if args.n is not None:
        done = completion.embed_equally_spaced(a, b, c, args.n, args.k, args.N, args.precision)
    else:
        done = completion.complete_hankel_sym(a, b, c, args.delta, args.precision)
    return {"parameters": done.record(), "matrix": done.matrix, "verdict": "holds"}, EXIT_OK


def cmd_extend_backwards(args):
    moments = _scalars(args.moments)
    margin = _scalars(args.margin, 1)[0] if args.margin is not None else None
    ext, seq = completion.extend_backwards(moments, margin, args.precision)
    return {"parameters": {"s_minus1": ext.s_minus1, "s_minus2": ext.s_minus2,
                           "margin": ext.margin, "roots": ext.roots},
            "moments": list(seq), "matrix": completion.hankel_from_moments(seq, args.precision),
            "verdict": "holds"}, EXIT_OK


def cmd_densify(args):
    M = read_matrix(args.file, args.precision)
    tol = _scalars(args.tol, 1)[0]
    B, delta = completion.densify_to_tp(M, tol)
    if args.output:
        write_matrix(B, args.output)
    return {"parameters": {"delta": delta, "tol": tol, "distance": B.distance(M.to_exact() if not M.exact else M)},
            "matrix": B, "verdict": "holds"}, EXIT_OK


# parser ----------------------------------------------------------------------


def _precision(text: str) -> int:
    v = int(text)
    if v < 53:
        raise argparse.ArgumentTypeError("precision must be at least 53 bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="totpos", description=__doc__.splitlines()[0])
    p.add_argument("--precision", type=_precision, default=None,
                   help="float precision in bits (default: TOTPOS_PRECISION or 128)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(handler=fn)
        sp.add_argument("--precision", type=_precision, default=argparse.SUPPRESS)
        return sp

    sp = add("check", cmd_check, "check TN/TP/PD/PSD/Hankel-TP of a matrix file")
    sp.add_argument("--property", required=True,
                    choices=["tn", "tp", "tn_r", "tp_r", "pd", "psd", "tp_hankel"], type=str.lower)
    sp.add_argument("--file", required=True)
    sp.add_argument("--order", type=int)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="convert float input to its exact value")
    g.add_argument("--float", action="store_true", help="convert rational input to floats")
    sp.add_argument("--tol", type=float, help="relative sign tolerance for float minors")
    sp.add_argument("--deterministic", action="store_true")
    sp.add_argument("--full", action="store_true", help="TP: enumerate every minor")
    sp.add_argument("--strict-boundary", action="store_true",
                    help="TN: report float minors near zero as inconclusive")
    sp.add_argument("--size-guard", type=int, default=checker.DEFAULT_SIZE_GUARD)

    for name, fn, help_ in (("apply", cmd_apply, "apply F entrywise"),
                            ("falsify", cmd_falsify, "search for a counterexample")):
        sp = add(name, fn, help_)
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--fn", help="expression in x, e.g. 'exp(x)-1'")
        g.add_argument("--power", help="c,alpha for F(x) = c*x^alpha")
        if name == "apply":
            sp.add_argument("--file", required=True)
            sp.add_argument("--output")
            sp.add_argument("--positive", action="store_true", help="domain (0, inf)")
        else:
            sp.add_argument("--mode", required=True)
            sp.add_argument("--delta", type=int, required=True)
            sp.add_argument("--budget", type=int, default=500)
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--deterministic", action="store_true")

    sp = add("classify", cmd_classify, "preserver class for a mode and dimension")
    sp.add_argument("--mode", required=True)
    sp.add_argument("--delta", type=int, default=2)

    sp = add("is-preserver", cmd_is_preserver, "is c*x^alpha a preserver")
    sp.add_argument("--mode", required=True)
    sp.add_argument("--delta", type=int, default=2)
    sp.add_argument("--power", required=True)

    sp = add("witness", cmd_witness, "build a named test matrix")
    sp.add_argument("--family", required=True)
    sp.add_argument("--params", default="")

    for name, fn in (("embed", cmd_embed), ("embed-at", cmd_embed_at)):
        sp = add(name, fn, "embed a TP 2x2 into a generalized Vandermonde matrix")
        sp.add_argument("--file")
        sp.add_argument("--entries", help="a,b,c,d")
        sp.add_argument("--m", type=int, required=True)
        sp.add_argument("--n", type=int, required=True)
        if name == "embed-at":
            sp.add_argument("--rows", required=True, help="p,p' (0-based)")
            sp.add_argument("--cols", required=True, help="q,q' (0-based)")

    sp = add("complete-hankel", cmd_complete_hankel, "TP Hankel completion of [[a,b],[b,c]]")
    sp.add_argument("--abc", required=True, help="a,b,c")
    sp.add_argument("--delta", type=int, default=3)
    sp.add_argument("--n", type=int, help="equally spaced: s_n=a, s_(n+k)=b, s_(n+2k)=c")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--N", type=int)

    sp = add("extend-backwards", cmd_extend_backwards, "prepend s_-2, s_-1 to a TP Hankel sequence")
    sp.add_argument("--moments", required=True, help="s_0,...,s_2N")
    sp.add_argument("--margin")

    sp = add("densify", cmd_densify, "TP approximation of a full-rank TN matrix")
    sp.add_argument("--file", required=True)
    sp.add_argument("--tol", default="1/1000")
    sp.add_argument("--output")
    return p


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    prec = args.precision or default_precision()
    args.precision = prec
    if args.command == "complete-hankel" and args.n is not None and args.N is None:
        print("error: --n requires --N", file=sys.stderr)
        return EXIT_USAGE
    try:
        report, code = args.handler(args)
    except completion.VerificationError as exc:
        report = {"verdict": "fails", "error": str(exc)}
        if exc.certificate is not None:
            report["certificate"] = _certificate(exc.certificate)
        code = EXIT_INCONCLUSIVE if exc.certificate is not None and \
            exc.certificate.verdict is checker.Verdict.INCONCLUSIVE else EXIT_FAIL
    except (UsageError, MatrixFileError, ParseError, DomainError, completion.UnsupportedError,
            checker.SizeGuardError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        report = {"verdict": "error", "error": str(exc)}
        code = EXIT_USAGE
    report = {"command": args.command, **report}
    stdout.write(json.dumps(_json(report, prec), indent=2) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
