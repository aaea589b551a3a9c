"""Verification batteries behind ``arithpde verify``.

Each suite takes a JobConfig and returns a list of Check records.  Every
random choice comes from ``random.Random(config.seed)``, so a suite run is a
pure function of its configuration.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .characters import (
    artin_schreier_witness,
    apply_character,
    basic_series,
    bvp_at_q0,
    characteristic_integers,
    elliptic_character,
    energy_character,
    ga_family,
    gm_family,
    huygens_check,
    reconstruct_from_boundary,
    solve_inhomogeneous,
    stationary_split,
    verify_diagonalization,
)
from .formal_groups import (
    WeierstrassCurve,
    fg_check_suite,
    fit_frobenius,
    formal_log,
    weierstrass_formal_group,
)
from .opalg import pf_to_frechet
from .padic_core import INF, PadicContext
from .qseries import MINUS, PLUS, QSeries, dwork_check
from .tate import (
    TateEquations,
    TateParams,
    cubic_residual,
    divisor_sum,
    eisenstein,
    tate_curve,
    tate_huygens_check,
    torsion_embed,
    torsion_is_homomorphism,
)

SUITES = ("axioms", "diagonalize", "dwork", "reconstruct", "bvp", "huygens",
          "artin-schreier", "honda", "tate")


@dataclass
class JobConfig:
    p: int = 5
    s: int = 1
    N: int = 8
    M: int = 125
    Kmax: int = 64
    seed: int = 0
    shift_budget: int = None
    count: int = 200
    samples: int = 10
    curve: str = "a4=1 a6=1"
    mutate_delta_p: bool = False

    def context(self) -> PadicContext:
        return PadicContext(self.p, self.s, self.N, self.shift_budget)

    def header(self) -> str:
        budget = "none" if self.shift_budget is None else self.shift_budget
        return (f"p={self.p} s={self.s} N={self.N} M={self.M} Kmax={self.Kmax} "
                f"seed={self.seed} shift_budget={budget}")


@dataclass
class Check:
    name: str
    anchor: str
    status: str                  # pass, fail or precision-limited
    prec_p: object               # certified p-adic digits (int or "inf")
    prec_q: int                  # certified q-order
    detail: str = ""
    elapsed: float = field(default=0.0, compare=False)

    @property
    def failed(self) -> bool:
        return self.status == "fail"


def _status(ok: bool, prec_p, need_p) -> str:
    if not ok:
        return "fail"
    if need_p is not None and prec_p != INF and prec_p < need_p:
        return "precision-limited"
    return "pass"


class _Recorder:
    def __init__(self):
        self.checks = []
        self._t = time.perf_counter()

    def add(self, name, anchor, ok, prec_p, prec_q, need_p=None, detail=""):
        now = time.perf_counter()
        pp = "inf" if prec_p == INF else prec_p
        self.checks.append(Check(name, anchor, _status(bool(ok), prec_p, need_p), pp, prec_q,
                                 detail, now - self._t))
        self._t = now


def _rng(cfg: JobConfig) -> random.Random:
    return random.Random(cfg.seed)


def _unit(ctx, rng):
    while True:
        a = ctx.random_scalar(rng)
        if a.is_unit():
            return a


def _prec(*series):
    return min(x.prec for x in series)


# -- axioms ---------------------------------------------------------------------------------

def suite_axioms(cfg: JobConfig) -> list:
    ctx = cfg.context()
    rng = _rng(cfg)
    p = ctx.p
    M = cfg.M
    xs = [QSeries.random(ctx, rng, M) for _ in range(cfg.count)]
    spike = QSeries.monomial(ctx, 1, 1, M)

    def dp(x):
        out = x.delta_p()
        return out + spike if cfg.mutate_delta_p else out

    need = cfg.N - 2
    rec = _Recorder()
    results = {k: [True, INF] for k in ("add", "mul", "dq", "phi", "mixed")}

    def note(key, resid):
        results[key][0] &= resid.is_zero()
        results[key][1] = min(results[key][1], resid.prec)

    for i, x in enumerate(xs):
        y = xs[(i + 1) % len(xs)]
        xp, yp = x ** p, y ** p
        carry = (xp + yp - (x + y) ** p).mul_p_power(-1)
        note("add", dp(x + y) - dp(x) - dp(y) - carry)
        dx, dy = dp(x), dp(y)
        note("mul", dp(x * y) - xp * dy - yp * dx - (dx * dy).mul_p_power(1))
        note("dq", (x * y).delta_q() - x * y.delta_q() - y * x.delta_q())
        note("phi", x.phi_p().delta_q() - x.delta_q().phi_p().mul_p_power(1))
        qx = x.delta_q()
        note("mixed", dx.delta_q() - dp(qx).mul_p_power(1) - qx ** p + x ** (p - 1) * qx)
    rec.add("axioms.delta_p_additivity", "Fermat quotient of a sum carries the C_p term",
            *results["add"], M, need)
    rec.add("axioms.delta_p_leibniz", "p-derivation product rule", *results["mul"], M, need)
    rec.add("axioms.delta_q_leibniz", "delta_q is a derivation", *results["dq"], M, need)
    rec.add("axioms.delta_q_phi_p", "delta_q phi_p = p phi_p delta_q", *results["phi"], M, need)
    rec.add("axioms.mixed_commutation", "delta_q delta_p against delta_p delta_q",
            *results["mixed"], M, need)
    return rec.checks


# -- characters -----------------------------------------------------------------------------

def _b_formula(ctx, j, r, s):
    x = ctx.p ** (s * r)
    F = 1
    for i in range(1, j + 1):
        F *= x ** i - 1
    return ctx.scalar(Fraction((-1) ** j, F))


def _ga_grid():
    return [(r, s, k) for r, s in ((1, 1), (1, 2), (2, 1), (2, 2)) for k in (1, 2, 3)]


def _curve(cfg, ctx):
    return WeierstrassCurve.parse(ctx, cfg.curve)


def suite_diagonalize(cfg: JobConfig) -> list:
    ctx = cfg.context()
    rng = _rng(cfg)
    M = cfg.M
    rec = _Recorder()
    coeff_ok, kernel_ok, nonchar_ok = True, True, True
    prec = INF
    for r, s, k in _ga_grid():
        ch = ga_family(ctx, r, s, k ** r)
        alpha = ctx.random_scalar(rng)
        sol = basic_series(ch, k, alpha, M)
        for n, bn in enumerate(sol.b):
            expected = _b_formula(ctx, n // s, r, s) if n % s == 0 else ctx.zero()
            coeff_ok &= bn == expected
        val = apply_character(ch, sol.u)
        kernel_ok &= val.is_zero()
        prec = min(prec, val.prec)
        nonchar_ok &= verify_diagonalization(ch, k + 1, alpha, M)
    rec.add("diagonalize.ga_coefficients", "basic coefficients are signed reciprocals of F_j",
            coeff_ok, INF, M)
    rec.add("diagonalize.ga_kernel", "basic series solve the additive equation", kernel_ok, prec, M)
    rec.add("diagonalize.ga_noncharacteristic", "basic series diagonalize the additive character",
            nonchar_ok, prec, M)

    gm = gm_family(ctx, 1, [1])
    alpha = _unit(ctx, rng)
    sol = basic_series(gm, 1, alpha, M)
    val = apply_character(gm, sol.u)
    rec.add("diagonalize.gm_kernel", "multiplicative convection basic series is a solution",
            val.is_zero(), val.prec, M)
    rec.add("diagonalize.gm_noncharacteristic", "multiplicative basic series diagonalize",
            verify_diagonalization(gm, 2, alpha, M), val.prec, M)

    E = _curve(cfg, ctx)
    ell = elliptic_character(E, 1, -1)
    sol = basic_series(ell, 1, alpha, M)
    val = apply_character(ell, sol.point)
    rec.add("diagonalize.ell_kernel", "elliptic basic series is a solution",
            val.is_zero(), val.prec, M)
    rec.add("diagonalize.ell_noncharacteristic", "elliptic basic series diagonalize",
            verify_diagonalization(ell, 2, alpha, M), val.prec, M)

    fam = [ga_family(ctx, r, s, k ** r) for r, s, k in _ga_grid()]
    fam += [gm, gm_family(ctx, 2, [1, 2]), ell]
    sym_ok = all(pf_to_frechet(ch.picard_fuchs) == ch.frechet_symbol for ch in fam)
    sym_ok &= all(ch.frechet_symbol == ch.characteristic_polynomial for ch in fam if ch.kind != "ga")
    rec.add("diagonalize.symbol_layer", "Picard-Fuchs symbol determines the linearization",
            sym_ok, INF, M)
    return rec.checks


def suite_dwork(cfg: JobConfig) -> list:
    ctx = cfg.context()
    rng = _rng(cfg)
    M = cfg.M
    rec = _Recorder()
    gm = gm_family(ctx, 1, [1])
    hyp, concl, prec = True, True, INF
    for kappa in (1, 2, 3):
        sol = basic_series(gm, kappa, _unit(ctx, rng), M)
        res = dwork_check(sol.u)
        hyp &= res["hypothesis_holds"]
        concl &= res["conclusion_holds"] and sol.u.is_integral()
        prec = min(prec, res["precision"])
    rec.add("dwork.hypothesis", "phi(v)/v^p lies in 1 + pqR[[q]]", hyp, prec, M)
    rec.add("dwork.integrality", "multiplicative basic series has integral coefficients",
            concl, prec, M)
    return rec.checks


def suite_reconstruct(cfg: JobConfig) -> list:
    ctx = cfg.context()
    rng = _rng(cfg)
    M = cfg.M
    rec = _Recorder()
    ok, prec = True, INF
    for r, s, k in _ga_grid():
        if r % 2:
            continue
        ch = ga_family(ctx, r, s, k ** r)
        K = characteristic_integers(ch, cfg.Kmax)
        ok &= k in K.plus and -k in K.minus
        for kappa in (k, -k):
            sol = basic_series(ch, kappa, ctx.random_scalar(rng), M)
            res = reconstruct_from_boundary(ch, sol.u, cfg.Kmax, strict=False)
            ok &= res.residual_zero
            prec = min(prec, res.residual.prec)
    rec.add("reconstruct.ga_even_order", "both directions carry a basis and rebuild exactly",
            ok, prec, M)
    for name, ch in (("gm", gm_family(ctx, 1, [1])), ("ell", elliptic_character(_curve(cfg, ctx), 1, -1))):
        sol = basic_series(ch, 1, _unit(ctx, rng), M)
        res = reconstruct_from_boundary(ch, sol.point, cfg.Kmax, strict=False)
        rec.add(f"reconstruct.{name}", "boundary values rebuild the solution",
                res.residual_zero, res.residual.prec, M)
    gm = gm_family(ctx, 1, [1])
    zeta = ctx.roots_of_unity()[-1]
    sol = basic_series(gm, 1, _unit(ctx, rng), M)
    split = stationary_split(gm, sol.u.scale(zeta))
    exact = split.verified and split.stationary.coeff(0) == zeta and (split.moving - sol.u).is_zero()
    rec.add("reconstruct.stationary_split", "torsion part and formal part separate exactly",
            exact, sol.u.prec, M)
    return rec.checks


def _round_trip(ch, ctx, rng, q0, M, Kmax):
    alpha = ctx.random_scalar(rng)
    sol = basic_series(ch, 1, alpha, M)
    g = sol.u.evaluate_at(q0)
    if ch.kind == "gm":
        g = g * ctx.roots_of_unity()[-1]
    back = bvp_at_q0(ch, q0, g, M, Kmax)
    diff = back.alpha - alpha
    return diff, back.alpha.prec


def suite_bvp(cfg: JobConfig) -> list:
    ctx = cfg.context()
    rng = _rng(cfg)
    M = cfg.M
    rec = _Recorder()
    need = cfg.N - 2
    for name, ch in (("ga", ga_family(ctx, 1, 1, 1)), ("gm", gm_family(ctx, 1, [1]))):
        ok, prec = True, INF
        for zeta in ctx.roots_of_unity():
            diff, pr = _round_trip(ch, ctx, rng, zeta * ctx.p, M, cfg.Kmax)
            if not diff.is_zero():
                ok &= diff.valuation() >= need
            prec = min(prec, pr)
        rec.add(f"bvp.{name}_round_trip", "a boundary value at q0 pins down alpha",
                ok, prec, M, need)
    return rec.checks


def suite_huygens(cfg: JobConfig) -> list:
    ctx = cfg.context()
    M = cfg.M
    rec = _Recorder()
    roots = ctx.roots_of_unity()
    z1, z2 = roots[1 % len(roots)], roots[-1]
    q0 = roots[0] * ctx.p
    for name, ch in (("ga", ga_family(ctx, 1, 1, 1)), ("gm", gm_family(ctx, 1, [1]))):
        ok = huygens_check(ch, q0, z1, z2, cfg.samples, _rng(cfg), M, cfg.Kmax)
        rec.add(f"huygens.{name}", "propagators compose along roots of unity", ok, ctx.N - 2, M)
    eq = TateEquations(TateParams.make(ctx, eta=-1, M=M))
    ok = tate_huygens_check(eq, 1, q0, z1, z2, cfg.samples, _rng(cfg))
    rec.add("huygens.tate", "conjugated Tate propagators compose along roots of unity",
            ok, ctx.N - 2, M)
    return rec.checks


def suite_artin_schreier(cfg: JobConfig) -> list:
    ctx = cfg.context()
    rng = _rng(cfg)
    M = cfg.M
    rec = _Recorder()
    for name, ch in (("gm", gm_family(ctx, 1, [1])), ("ga", ga_family(ctx, 1, 1, 1))):
        sol = basic_series(ch, 1, _unit(ctx, rng), M)
        w = artin_schreier_witness(ch, sol.u, cfg.Kmax)
        rec.add(f"artin-schreier.{name}", "mod p reduction satisfies an additive equation",
                w.verified, 1, M, detail=f"degree={w.degree} unmixed={w.unmixed}")
    return rec.checks


def suite_honda(cfg: JobConfig) -> list:
    ctx = cfg.context()
    rng = _rng(cfg)
    rec = _Recorder()
    E = _curve(cfg, ctx)
    count = E.count_points_mod_p()
    ap = ctx.p + 1 - count
    order = ctx.p ** 3
    L = ctx.lift(4)
    EL = WeierstrassCurve(E.a4.lift_rational(L), E.a6.lift_rational(L), L)
    fit = fit_frobenius(formal_log(EL, order), 2, order)
    g0 = fit.gamma0.to_ctx(ctx)
    g1 = fit.gamma1.to_ctx(ctx)
    rec.add("honda.gamma0", "curves over Z_p have gamma0 = 1", g0 == 1, fit.precision, order,
            detail=f"gamma0={g0.to_text()}")
    diff = g1 + ap
    ok = diff.is_zero() or diff.valuation() >= min(fit.precision, ctx.N)
    rec.add("honda.gamma1", "gamma1 equals minus the trace of Frobenius", ok, fit.precision, order,
            detail=f"gamma1={g1.to_text()} a_p={ap} #E={count}")
    fg = weierstrass_formal_group(E, 30)
    res = fg_check_suite(fg, rng)
    rec.add("honda.formal_group", "formal group invariants to T-degree 30", all(res.values()),
            ctx.N, 30, detail=" ".join(f"{k}={int(v)}" for k, v in sorted(res.items())))
    return rec.checks


def suite_tate(cfg: JobConfig) -> list:
    ctx = cfg.context()
    rng = _rng(cfg)
    M = cfg.M
    rec = _Recorder()
    e4, e6 = eisenstein(ctx, M)
    top = min(50, M)
    ok = all(e4.coeff(k) == 240 * divisor_sum(k, 3) and e6.coeff(k) == -504 * divisor_sum(k, 5)
             for k in range(1, top + 1)) and e4.coeff(0) == 1 and e6.coeff(0) == 1
    rec.add("tate.eisenstein", "Eisenstein coefficients are divisor sums", ok, INF, top)

    curve = tate_curve(ctx, M)
    ok, prec = True, INF
    for zeta in ctx.roots_of_unity():
        if (zeta - 1).is_zero():
            continue
        res = cubic_residual(curve, torsion_embed(ctx, zeta, M))
        ok &= res.is_zero()
        prec = min(prec, res.prec)
    rec.add("tate.torsion_cubic", "torsion points lie on the Tate curve", ok, prec, M, ctx.N - 2)
    rec.add("tate.torsion_homomorphism", "roots of unity embed multiplicatively",
            torsion_is_homomorphism(ctx, M), prec, M)

    ok, prec = True, INF
    wave_ok = True
    for kappa in (1, 2):
        eq = TateEquations(TateParams.make(ctx, eta=Fraction(-1, kappa), M=M))
        sol = eq.basic_series(kappa, _unit(ctx, rng), M)
        val = eq.psi1_pq(sol.u)
        ok &= val.is_zero()
        prec = min(prec, val.prec)
        wave_ok &= eq.wave(sol.u, kappa ** 3).is_zero()
    rec.add("tate.quantized_solution", "eta/gamma = -1/kappa admits the basic solution",
            ok, prec, M, ctx.N - 3, detail="eta normalization c=1")
    rec.add("tate.wave_solution", "wave character with lambda = kappa^3 shares the basis",
            wave_ok, prec, M)

    rep = TateEquations(TateParams.make(ctx, eta=1, M=M)).quantize(cfg.Kmax, M)
    worst = max(v for _, v in rep.pivots)
    rec.add("tate.only_zero", "no characteristic integer forces the zero solution",
            rep.only_zero, INF, M, detail=f"max pivot valuation={worst}")

    eq = TateEquations(TateParams.make(ctx, beta=_unit(ctx, rng), M=min(M, 60)))
    u = QSeries.random(ctx, rng, min(M, 60), constant=False)
    r1 = eq.first_relation_residual(u)
    r2 = eq.second_relation_residual(u)
    rec.add("tate.relations", "psi^1_pq, psi^2_q and psi^2_p satisfy the linear relations",
            r1.is_zero() and r2.is_zero(), min(r1.prec, r2.prec), min(M, 60))
    torsion_beta = TateParams.make(ctx, beta=ctx.roots_of_unity()[-1], M=M)
    rec.add("tate.eta_vanishing", "eta vanishes exactly for torsion beta",
            torsion_beta.eta.is_zero() and not eq.params.eta.is_zero(), ctx.N - 1, M)
    return rec.checks


def suite_inhomogeneous(cfg: JobConfig) -> list:
    """Not a named CLI suite; used by ``solve`` demos and the tests."""
    ctx = cfg.context()
    rng = _rng(cfg)
    rec = _Recorder()
    for name, ch in (("ga", ga_family(ctx, 1, 1, 1)), ("gm", gm_family(ctx, 1, [1]))):
        K = characteristic_integers(ch, cfg.Kmax)
        ks = [k for k in range(2, cfg.M + 1) if K.is_totally_noncharacteristic(k)]
        a, b = sorted(rng.sample(ks[:10], 2))
        phi = QSeries.from_dict(ctx, {a: _unit(ctx, rng), b: _unit(ctx, rng)}, cfg.M)
        sol = solve_inhomogeneous(ch, phi, cfg.Kmax)
        rec.add(f"inhomogeneous.{name}", "non-characteristic right-hand sides are solvable",
                sol.residual_zero and sol.normalization_ok, ctx.N - 1, cfg.M,
                detail=f"support={a},{b} hypothesis={int(sol.transcendence_hypothesis)}")
    return rec.checks


def euler_lagrange_sets(ctx: PadicContext, triples, Kmax: int = 64) -> dict:
    """{(a, b, c): positive characteristic integers of the energy character}."""
    return {t: characteristic_integers(energy_character("gm", *t, ctx), Kmax).plus for t in triples}


RUNNERS = {
    "axioms": suite_axioms,
    "diagonalize": suite_diagonalize,
    "dwork": suite_dwork,
    "reconstruct": suite_reconstruct,
    "bvp": suite_bvp,
    "huygens": suite_huygens,
    "artin-schreier": suite_artin_schreier,
    "honda": suite_honda,
    "tate": suite_tate,
}


def run_suite(name: str, cfg: JobConfig) -> list:
    if name not in RUNNERS:
        raise KeyError(f"unknown suite {name!r}")
    return sorted(RUNNERS[name](cfg), key=lambda c: c.name)
