"""Command-line front end.

    arithpde define  --group gm --nu 1 --lam 1
    arithpde basic   --group ga --mu "xq+xp-1" --kappa 1 --alpha 1
    arithpde apply   --group ga --mu "xq+xp-1" --series u.txt
    arithpde solve   --group gm --nu 1 --lam 1 --q0 5 --datum 3
    arithpde tate    beta=1 eta=-1 gamma=1 M=40
    arithpde verify  axioms --seed 7

Exit status: 0 ok, 1 a check failed or a computation was refused,
2 malformed input.
"""

from __future__ import annotations

import argparse
import sys

from .characters import (
    Character,
    EllipticPoint,
    apply_character,
    basic_series,
    bvp_at_q0,
    characteristic_integers,
    elliptic_character,
    ga_character,
    gm_character,
    solve_inhomogeneous,
)
from .errors import ArithPDEError, ContextMismatch, ParseError
from .formal_groups import WeierstrassCurve
from .opalg import SymbolPoly
from .padic_core import PadicContext, Scalar
from .qseries import QSeries
from .suites import SUITES, JobConfig, run_suite
from .tate import TateEquations, TateParams, tate_curve


class UsageError(Exception):
    pass


# -- argument plumbing ------------------------------------------------------------------------

def _common(parser: argparse.ArgumentParser):
    g = parser.add_argument_group("context")
    g.add_argument("--p", type=int, default=5, help="residue characteristic (prime)")
    g.add_argument("--s", type=int, default=1, help="degree of the unramified extension")
    g.add_argument("--prec-p", type=int, default=8, dest="N", help="p-adic precision N")
    g.add_argument("--prec-q", type=int, default=125, dest="M", help="q-truncation M")
    g.add_argument("--kmax", type=int, default=64, dest="Kmax", help="characteristic integer bound")
    g.add_argument("--seed", type=int, default=0, help="RNG seed")
    g.add_argument("--shift-budget", type=int, default=None, dest="shift_budget",
                   help="largest allowed power of p in denominators")


def _character_args(parser: argparse.ArgumentParser):
    g = parser.add_argument_group("character")
    g.add_argument("--char", help="character in its text form (overrides the options below)")
    g.add_argument("--group", choices=("ga", "gm", "ell"))
    g.add_argument("--mu", help="additive symbol, e.g. 'xq+xp-1'")
    g.add_argument("--nu", help="symbol acting on psi_q (gm, ell)")
    g.add_argument("--lam", help="symbol in xp acting on psi_p (gm, ell)")
    g.add_argument("--curve", help="'a4=<scalar> a6=<scalar>'")
    g.add_argument("--height", type=int, choices=(1, 2))
    g.add_argument("--gamma0")
    g.add_argument("--gamma1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arithpde",
                                     description="Arithmetic differential equations on q-series.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("define", help="print a character or curve in canonical text form")
    _common(p)
    _character_args(p)

    p = sub.add_parser("basic", help="basic series u_{kappa,alpha}")
    _common(p)
    _character_args(p)
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--alpha", default="1")

    p = sub.add_parser("apply", help="apply a character to a series")
    _common(p)
    _character_args(p)
    p.add_argument("--series", required=True, help="file with a series text ('-' for stdin)")
    p.add_argument("--torsion", help="root-of-unity tag (elliptic points)")

    p = sub.add_parser("solve", help="inhomogeneous solve or boundary-value problem")
    _common(p)
    _character_args(p)
    p.add_argument("--rhs", help="file with the right-hand side series ('-' for stdin)")
    p.add_argument("--q0", help="boundary point in pR")
    p.add_argument("--datum", help="boundary value (formal part for elliptic characters)")

    p = sub.add_parser("tate", help="Tate curve and its convection character")
    _common(p)
    p.add_argument("params", nargs="+", help="beta=<scalar> [eta=<scalar>] [gamma=<scalar>] M=<int>")
    p.add_argument("--basic", type=int, default=None, metavar="KAPPA",
                   help="also print u_{E,KAPPA,1}")

    p = sub.add_parser("verify", help="run a verification suite")
    _common(p)
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--count", type=int, default=200, help="random series for the axioms suite")
    p.add_argument("--samples", type=int, default=10, help="samples for propagator checks")
    p.add_argument("--curve", default="a4=1 a6=1")
    p.add_argument("--mutate-delta-p", action="store_true", dest="mutate",
                   help="deliberately corrupt delta_p (the axioms suite must then fail)")
    p.add_argument("--timing", action="store_true", help="append elapsed seconds (not reproducible)")
    return parser


def _context(args) -> PadicContext:
    if args.N < 1 or args.M < 0:
        raise UsageError("precisions must be positive")
    return PadicContext(args.p, args.s, args.N, args.shift_budget)


def _scalar(ctx, text, what):
    try:
        return Scalar.parse(ctx, text)
    except ParseError as exc:
        raise UsageError(f"{what}: {exc}") from exc


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _character(ctx, args) -> Character:
    if args.char:
        return Character.parse(ctx, args.char)
    if args.group is None:
        raise UsageError("give --char or --group")
    if args.group == "ga":
        if not args.mu:
            raise UsageError("ga characters need --mu")
        return ga_character(ctx, SymbolPoly.parse(ctx, args.mu))
    nu = SymbolPoly.parse(ctx, args.nu or "0")
    lam = SymbolPoly.parse(ctx, args.lam or "0")
    if args.group == "gm":
        return gm_character(ctx, nu, lam)
    if not args.curve:
        raise UsageError("elliptic characters need --curve")
    curve = WeierstrassCurve.parse(ctx, args.curve)
    g0 = _scalar(ctx, args.gamma0, "--gamma0") if args.gamma0 else None
    g1 = _scalar(ctx, args.gamma1, "--gamma1") if args.gamma1 else None
    return elliptic_character(curve, nu, lam, args.height, g0, g1)


# -- commands ---------------------------------------------------------------------------------

def cmd_define(args, out) -> int:
    ctx = _context(args)
    if args.group is None and not args.char and args.curve:
        curve = WeierstrassCurve.parse(ctx, args.curve)
        out.write(curve.to_text() + "\n")
        return 0
    ch = _character(ctx, args)
    K = characteristic_integers(ch, args.Kmax)
    out.write(ch.to_text() + "\n")
    out.write(f"charpoly {ch.characteristic_polynomial.to_text()}\n")
    out.write(f"picard-fuchs {ch.picard_fuchs.to_text()}\n")
    out.write(f"characteristic plus={K.plus} minus={K.minus}\n")
    return 0


def cmd_basic(args, out) -> int:
    ctx = _context(args)
    ch = _character(ctx, args)
    sol = basic_series(ch, args.kappa, _scalar(ctx, args.alpha, "--alpha"), args.M)
    out.write(sol.u.to_text())
    return 0


def cmd_apply(args, out) -> int:
    ctx = _context(args)
    ch = _character(ctx, args)
    u = QSeries.parse(_read(args.series), ctx)
    if ch.kind == "ell":
        tag = _scalar(ctx, args.torsion, "--torsion") if args.torsion else None
        u = EllipticPoint(u, tag)
    out.write(apply_character(ch, u).to_text())
    return 0


def cmd_solve(args, out) -> int:
    ctx = _context(args)
    ch = _character(ctx, args)
    if args.rhs:
        phi = QSeries.parse(_read(args.rhs), ctx)
        sol = solve_inhomogeneous(ch, phi, args.Kmax)
        u = sol.u.formal if isinstance(sol.u, EllipticPoint) else sol.u
        for k in sorted(sol.alphas):
            out.write(f"alpha[{k}] {sol.alphas[k].to_text()}\n")
        out.write(f"residual_zero={int(sol.residual_zero)} normalization={int(sol.normalization_ok)} "
                  f"short={int(sol.short_support)} unmixed={int(sol.unmixed)} "
                  f"hypothesis={int(sol.transcendence_hypothesis)}\n")
        out.write(u.to_text())
        return 0 if sol.residual_zero else 1
    if args.q0 is None or args.datum is None:
        raise UsageError("solve needs --rhs, or --q0 with --datum")
    q0 = _scalar(ctx, args.q0, "--q0")
    g = _scalar(ctx, args.datum, "--datum")
    sol = bvp_at_q0(ch, q0, g, args.M, args.Kmax)
    out.write(f"kappa {sol.kappa}\n")
    out.write(f"alpha {sol.alpha.to_text()}\n")
    if sol.torsion is not None:
        out.write(f"torsion {sol.torsion.to_text()}\n")
    out.write(sol.basic.u.to_text())
    return 0


def parse_tate_params(ctx, tokens) -> TateParams:
    fields = {}
    for tok in tokens:
        for part in tok.split():
            if part == "tate":
                continue
            key, sep, value = part.partition("=")
            if not sep or key not in ("beta", "eta", "gamma", "M", "c"):
                raise UsageError(f"bad tate parameter {part!r}")
            fields[key] = value
    if "beta" not in fields:
        raise UsageError("tate needs beta=<scalar>")
    M = int(fields.get("M", 125))
    beta = _scalar(ctx, fields["beta"], "beta")
    eta = _scalar(ctx, fields["eta"], "eta") if "eta" in fields else None
    gamma = _scalar(ctx, fields.get("gamma", "1"), "gamma")
    c = _scalar(ctx, fields.get("c", "1"), "c")
    return TateParams.make(ctx, beta, eta, gamma, M, c)


def cmd_tate(args, out) -> int:
    ctx = _context(args)
    params = parse_tate_params(ctx, args.params)
    eq = TateEquations(params)
    out.write(params.to_text() + "\n")
    out.write(tate_curve(ctx, params.M, params.beta).to_text() + "\n")
    out.write(f"charpoly {eq.mu.to_text()}\n")
    out.write(f"picard-fuchs {eq.picard_fuchs.to_text()}\n")
    out.write(f"characteristic {eq.characteristic_set(args.Kmax)}\n")
    rep = eq.quantize(args.Kmax, params.M) if args.basic is None else None
    if args.basic is not None:
        sol = eq.basic_series(args.basic, 1, params.M)
        out.write(sol.u.to_text())
        return 0
    if rep.kappa is None:
        out.write(f"solutions only-zero certified={int(rep.verified)}\n")
    else:
        out.write(f"solutions basis kappa={rep.kappa} verified={int(rep.verified)}\n")
    return 0 if rep.verified else 1


def format_report(suite: str, cfg: JobConfig, checks, timing: bool = False) -> str:
    lines = [f"# arithpde verify {suite}", f"# {cfg.header()}"]
    extra = f"count={cfg.count} samples={cfg.samples} curve=\"{cfg.curve}\""
    if cfg.mutate_delta_p:
        extra += " mutate_delta_p=1"
    lines.append(f"# {extra}")
    width = max((len(c.name) for c in checks), default=0)
    for c in checks:
        line = (f"{c.name.ljust(width)}  {c.status.ljust(17)}  prec=(p^{c.prec_p}, q^{c.prec_q})"
                f"  \"{c.anchor}\"")
        if c.detail:
            line += f"  [{c.detail}]"
        if timing:
            line += f"  {c.elapsed:.2f}s"
        lines.append(line)
    counts = {k: sum(1 for c in checks if c.status == k) for k in ("pass", "fail", "precision-limited")}
    lines.append(f"# result: {counts['pass']} pass, {counts['fail']} fail, "
                 f"{counts['precision-limited']} precision-limited")
    return "\n".join(lines) + "\n"


def cmd_verify(args, out) -> int:
    cfg = JobConfig(args.p, args.s, args.N, args.M, args.Kmax, args.seed, args.shift_budget,
                    args.count, args.samples, args.curve, args.mutate)
    _context(args)
    checks = run_suite(args.suite, cfg)
    out.write(format_report(args.suite, cfg, checks, args.timing))
    return 1 if any(c.failed for c in checks) else 0


COMMANDS = {
    "define": cmd_define,
    "basic": cmd_basic,
    "apply": cmd_apply,
    "solve": cmd_solve,
    "tate": cmd_tate,
    "verify": cmd_verify,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, ParseError, ContextMismatch, ValueError, OSError) as exc:
        print(f"arithpde: error: {exc}", file=sys.stderr)
        return 2
    except ArithPDEError as exc:
        print(f"arithpde: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
