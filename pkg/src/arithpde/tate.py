"""Tate curves over R[[q]] and the arithmetic convection and wave equations on them.

The curve is E_{beta q}: y^2 = x^3 - E4(beta q)/48 x + E6(beta q)/864.
All equations act on a point u in qR[[q]] through its formal logarithm
l(u), which has coefficients in R[[q]] itself.  Only the part of the
coefficient of T^n below q^(M+1-n) can influence l(u) mod q^(M+1), so the
logarithm is built with that cap and padded with zeros afterwards.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .characters import (
    EllipticPoint,
    _basic_ga,
    _lift_symbol,
    _series_at_scalar,
    _vmax,
    _widen,
    basic_coefficients,
    guard_digits,
    hensel_solve,
    log_inverse,
    psi_p_scalar,
)
from .errors import (
    DatumOutsideRange,
    NonIntegralCoefficient,
    NotRootOfUnity,
    TorsionAtIdentity,
)
from .formal_groups import TSeries, WeierstrassCurve, formal_log
from .opalg import SymbolPoly
from .padic_core import INF, PadicContext, Scalar
from .qseries import PLUS, QSeries, is_root_of_unity


# -- Eisenstein series and the curve ---------------------------------------------------------

@lru_cache(maxsize=None)
def divisor_sum(n: int, m: int) -> int:
    """sigma_m(n) = sum of d^m over the divisors d of n."""
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d ** m
            e = n // d
            if e != d:
                total += e ** m
        d += 1
    return total


def _beta_powers(ctx: PadicContext, beta, M: int):
    beta = ctx.one() if beta is None else ctx.scalar(beta)
    out = [ctx.one()]
    for _ in range(M):
        out.append(out[-1] * beta)
    return out


def divisor_sum_series(ctx: PadicContext, m: int, M: int, beta=None) -> QSeries:
    """sum_{n >= 1} sigma_m(n) (beta q)^n up to q^M."""
    powers = _beta_powers(ctx, beta, M)
    return QSeries.from_dict(ctx, {n: powers[n] * divisor_sum(n, m) for n in range(1, M + 1)}, M)


def eisenstein(ctx: PadicContext, M: int, beta=None):
    """(E4, E6) in the variable beta*q."""
    e4 = divisor_sum_series(ctx, 3, M, beta).scale(240) + 1
    e6 = divisor_sum_series(ctx, 5, M, beta).scale(-504) + 1
    return e4, e6


def tate_curve(ctx: PadicContext, M: int, beta=None) -> WeierstrassCurve:
    if ctx.p < 5:
        raise ValueError("the short Weierstrass model needs p >= 5")
    e4, e6 = eisenstein(ctx, M, beta)
    return WeierstrassCurve(e4.scale(Fraction(-1, 48)), e6.scale(Fraction(1, 864)), ctx)


def specialize_curve(curve: WeierstrassCurve, q0) -> WeierstrassCurve:
    """The curve over R obtained by q -> q0."""
    q0 = curve.ctx.scalar(q0)
    return WeierstrassCurve(curve.a4.evaluate_at(q0), curve.a6.evaluate_at(q0), curve.ctx)


def capped_log(curve: WeierstrassCurve, M: int) -> TSeries:
    """Formal logarithm over R[[q]], exact for T -> u in qR[[q]] modulo q^(M+1).

    Every coefficient is padded back to the full window: the dropped terms
    only reach q-degrees above M.
    """
    total = M + 1
    log = formal_log(curve, total, total)
    padded = [None if a is None else _widen(a, total) if isinstance(a, QSeries) else a
              for a in log.c]
    return TSeries(curve.ctx, padded, log.D)


# -- parameters ------------------------------------------------------------------------------

@dataclass
class TateParams:
    """beta (a unit), the coefficients eta and gamma, and the q-window M."""
    ctx: PadicContext
    beta: Scalar
    eta: Scalar
    gamma: Scalar
    M: int = 125

    @classmethod
    def make(cls, ctx: PadicContext, beta=1, eta=None, gamma=1, M: int = 125, c=1) -> "TateParams":
        beta = ctx.scalar(beta)
        if not beta.is_unit():
            raise ValueError("beta must be a unit")
        if eta is None:
            eta = psi_p_scalar(beta) * c
        gamma = ctx.scalar(gamma)
        if not gamma.is_unit():
            raise ValueError("gamma must be a unit")
        return cls(ctx, beta, ctx.scalar(eta), gamma, M)

    @property
    def beta_is_torsion(self) -> bool:
        return is_root_of_unity(self.beta)

    def to_text(self) -> str:
        return f"tate beta={self.beta} eta={self.eta} gamma={self.gamma} M={self.M}"


@dataclass
class TatePoint:
    """tau(torsion) + iota(formal): a root of unity tag and a series in qR[[q]]."""
    formal: QSeries
    torsion: object = None


def _formal(u) -> QSeries:
    if isinstance(u, (TatePoint, EllipticPoint)):
        u = u.formal
    if not u.is_integral():
        raise NonIntegralCoefficient("formal coordinate must be integral")
    return u


# -- the equations ---------------------------------------------------------------------------

@dataclass
class QuantizationReport:
    kappa: object                    # the characteristic integer, or None
    basis: object                    # basic series u_{E,kappa,1} or None
    verified: bool
    pivots: list = field(default_factory=list)   # (n, valuation of eta n + gamma)

    @property
    def only_zero(self) -> bool:
        return self.kappa is None and self.verified


class TateEquations:
    """psi^1_pq, psi^2_q and psi^2_p on points of E_{beta q}."""

    def __init__(self, params: TateParams):
        self.params = params
        self.ctx = params.ctx
        self._cache = {}

    # symbols
    @property
    def mu(self) -> SymbolPoly:
        """Characteristic polynomial of psi^1_pq: eta xq - gamma xp + gamma."""
        P = self.params
        return SymbolPoly(self.ctx, {(0, 1): P.eta, (1, 0): -P.gamma, (0, 0): P.gamma})

    @property
    def picard_fuchs(self) -> SymbolPoly:
        P = self.params
        p = self.ctx.p
        return SymbolPoly(self.ctx, {(0, 1): P.eta * p, (1, 0): -P.gamma, (0, 0): P.gamma * p})

    def characteristic_set(self, Kmax: int = 64) -> list:
        """Integers 0 < |k| <= Kmax with eta k + gamma = 0."""
        P = self.params
        return [k for k in range(-Kmax, Kmax + 1) if k and (P.eta * k + P.gamma).is_zero()]

    # lifted data
    def lifted(self, M: int):
        """(L, curve over L, capped log) for windows up to M."""
        if M not in self._cache:
            L = self.ctx.lift(guard_digits(self.ctx, M))
            curve = tate_curve(L, M + 1, self.params.beta.lift_exact(L))
            self._cache[M] = (L, curve, capped_log(curve, M))
        return self._cache[M]

    def _coeffs(self, L):
        P = self.params
        return P.eta.lift_rational(L), P.gamma.lift_rational(L)

    def log_of(self, u):
        """l(u) computed in the lifted context, with that context (torsion tags drop out)."""
        u = _formal(u)
        if u.sign != PLUS or (not u.is_zero() and u.q_order() < 1):
            raise ValueError("points must lie in qR[[q]]")
        L, _, log = self.lifted(u.M)
        return L, log.evaluate(u.lift_exact(L))

    def _finish(self, val: QSeries, u, loss: int) -> QSeries:
        return val.to_ctx(self.ctx).with_prec(_formal(u).prec - loss)

    def psi1_pq(self, u) -> QSeries:
        """(1/p)(p eta delta_q - gamma phi_p + p gamma) l(u)."""
        L, ell = self.log_of(u)
        eta, gamma = self._coeffs(L)
        val = ell.delta_q().scale(eta) + ell.scale(gamma) - ell.phi_p().scale(gamma).mul_p_power(-1)
        return self._finish(val, u, 1)

    def psi2_q(self, u) -> QSeries:
        """gamma delta_q^2 l(u)."""
        L, ell = self.log_of(u)
        _, gamma = self._coeffs(L)
        return self._finish(ell.delta_q().delta_q().scale(gamma), u, 0)

    def psi2_p(self, u) -> QSeries:
        """(1/p)(eta phi_p^2 - (eta^phi + p eta) phi_p + p eta^phi) l(u)."""
        L, ell = self.log_of(u)
        eta, _ = self._coeffs(L)
        eta_f = eta.frobenius()
        f1 = ell.phi_p()
        f2 = f1.phi_p()
        val = ((f2.scale(eta) - f1.scale(eta_f)).mul_p_power(-1)
               - f1.scale(eta) + ell.scale(eta_f))
        return self._finish(val, u, 1)

    def wave(self, u: QSeries, lam) -> QSeries:
        """psi^2_q + lam psi^2_p."""
        return self.psi2_q(u) + self.psi2_p(u).scale(self.ctx.scalar(lam))

    # relations between the three
    def first_relation_residual(self, u: QSeries) -> QSeries:
        """gamma delta_q^2 psi1 - (eta delta_q - p gamma phi_p + gamma) psi2_q."""
        P = self.params
        a = self.psi1_pq(u)
        b = self.psi2_q(u)
        M = min(a.M, b.M)
        a, b = a.truncate(M), b.truncate(M)
        lhs = a.delta_q().delta_q().scale(P.gamma)
        rhs = b.delta_q().scale(P.eta) - b.phi_p().scale(P.gamma).mul_p_power(1) + b.scale(P.gamma)
        return lhs - rhs

    def second_relation_residual(self, u: QSeries) -> QSeries:
        """(gamma eta^(phi+1) delta_q + gamma^2 eta phi_p - gamma^2 eta^phi) psi1
        - eta^(phi+2) psi2_q + gamma^3 psi2_p."""
        P = self.params
        eta, gamma = P.eta, P.gamma
        eta_f = eta.frobenius()
        a = self.psi1_pq(u)
        b = self.psi2_q(u)
        c = self.psi2_p(u)
        M = min(a.M, b.M, c.M)
        a, b, c = a.truncate(M), b.truncate(M), c.truncate(M)
        lhs = (a.delta_q().scale(gamma * eta_f * eta) + a.phi_p().scale(gamma * gamma * eta)
               - a.scale(gamma * gamma * eta_f))
        return lhs - b.scale(eta_f * eta * eta) + c.scale(gamma ** 3)

    # solutions
    def basic_series(self, kappa: int, alpha=1, M: int = None) -> "TateBasic":
        """u_{E,kappa,alpha}: the point with l(u) = integral of the basic series u_a."""
        ctx = self.ctx
        M = self.params.M if M is None else M
        if kappa <= 0 or kappa % ctx.p == 0:
            raise ValueError("kappa must be a positive integer prime to p")
        alpha = ctx.scalar(alpha)
        L, _, log = self.lifted(M)
        muL = _lift_symbol(self.mu, L)
        ua, b = _basic_ga(muL, kappa, alpha.lift_exact(L), M)
        h = ua.integrate_dlog()
        y = log_inverse(log, h)
        u = y.to_ctx(ctx)
        if not u.is_integral():
            raise NonIntegralCoefficient("the Tate basic series is not integral")
        return TateBasic(kappa, alpha, u, ua.to_ctx(ctx), [x.to_ctx(ctx) for x in b])

    def quantize(self, Kmax: int = 64, M: int = None) -> QuantizationReport:
        """Describe the solutions of psi^1_pq u = 0 in qR[[q]] modulo q^(M+1).

        The q^n coefficient of psi^1_pq(u) is (eta n + gamma) u_n plus a
        polynomial in u_1..u_(n-1), because l(T) = T + O(T^2).  So when no
        eta n + gamma vanishes the only solution is 0; when eta kappa + gamma
        vanishes the solutions are the u_{E,kappa,alpha}.
        """
        P = self.params
        M = P.M if M is None else M
        pivots = []
        kappa = None
        for n in range(1, M + 1):
            piv = P.eta * n + P.gamma
            if piv.is_zero():
                if n <= Kmax and kappa is None:
                    kappa = n
                pivots.append((n, INF))
            else:
                pivots.append((n, piv.valuation()))
        if kappa is None:
            return QuantizationReport(None, None, all(v != INF for _, v in pivots), pivots)
        if kappa % self.ctx.p == 0:
            return QuantizationReport(kappa, None, False, pivots)
        sol = self.basic_series(kappa, 1, M)
        return QuantizationReport(kappa, sol, self.psi1_pq(sol.u).is_zero(), pivots)


@dataclass
class TateBasic:
    kappa: int
    alpha: Scalar
    u: QSeries
    u_a: QSeries
    b: list

    @property
    def point(self) -> TatePoint:
        return TatePoint(self.u)


def convection_character(params: TateParams) -> TateEquations:
    return TateEquations(params)


def tate_formal_log(params: TateParams, M: int = None):
    """(L, l_E) with l_E over R[[q]] in a lifted context, capped for windows up to M."""
    L, _, log = TateEquations(params).lifted(params.M if M is None else M)
    return L, log


def tate_basic_series(params: TateParams, kappa: int, alpha=1, M: int = None) -> TateBasic:
    return TateEquations(params).basic_series(kappa, alpha, M)


def quantization_solver(params: TateParams, Kmax: int = 64, M: int = None) -> QuantizationReport:
    return TateEquations(params).quantize(Kmax, M)


def specialize_at_q0(obj, q0):
    """q -> q0 on a series, curve, affine point or TatePoint."""
    if isinstance(obj, WeierstrassCurve):
        return specialize_curve(obj, q0)
    if isinstance(obj, CurvePoint):
        return obj.specialize(q0)
    if isinstance(obj, TatePoint):
        return EllipticPoint(obj.formal.evaluate_at(q0), obj.torsion)
    return obj.evaluate_at(q0)


# -- torsion points ----------------------------------------------------------------------------

@dataclass
class CurvePoint:
    """An affine point (x, y) with coordinates in R[[q]] (or R after specializing)."""
    x: object
    y: object

    def specialize(self, q0) -> "CurvePoint":
        q0 = self.x.ctx.scalar(q0)
        return CurvePoint(self.x.evaluate_at(q0), self.y.evaluate_at(q0))


def torsion_embed(ctx: PadicContext, zeta, M: int, beta=None) -> CurvePoint:
    """The image of a root of unity zeta != 1 on E_{beta q}, as a pair of q-series."""
    zeta = ctx.scalar(zeta)
    if not is_root_of_unity(zeta):
        raise NotRootOfUnity(f"{zeta} is not a root of unity")
    if (zeta - 1).is_zero():
        raise TorsionAtIdentity("zeta = 1 maps to the point at infinity")
    if not (zeta - 1).is_unit():
        raise TorsionAtIdentity("zeta must not reduce to 1")
    inv = zeta.inverse()
    up = [ctx.one()]
    down = [ctx.one()]
    for _ in range(M):
        up.append(up[-1] * zeta)
        down.append(down[-1] * inv)
    powers = _beta_powers(ctx, beta, M)
    xs = {}
    ys = {}
    one_minus = (ctx.one() - zeta).inverse()
    X0 = zeta * one_minus * one_minus
    Y0 = zeta * zeta * one_minus ** 3
    xs[0] = X0
    ys[0] = Y0
    for k in range(1, M + 1):
        sx = ctx.zero()
        sy = ctx.zero()
        for m in _divisors(k):
            sx = sx + (up[m] + down[m] - 2) * m
            sy = sy + up[m] * (m * (m - 1) // 2) - down[m] * (m * (m + 1) // 2) + m
        xs[k] = sx * powers[k]
        ys[k] = sy * powers[k]
    X = QSeries.from_dict(ctx, xs, M)
    Y = QSeries.from_dict(ctx, ys, M)
    x = X + Fraction(1, 12)
    y = -Y - X.scale(Fraction(1, 2))
    return CurvePoint(x, y)


def _divisors(n: int):
    return [d for d in range(1, n + 1) if n % d == 0]


def cubic_residual(curve: WeierstrassCurve, P: CurvePoint):
    """y^2 - x^3 - a4 x - a6 (zero exactly when P lies on the curve)."""
    x, y = P.x, P.y
    if isinstance(x, QSeries):
        M = min(x.M, y.M, curve.a4.M, curve.a6.M)
        x, y = x.truncate(M), y.truncate(M)
        a4, a6 = curve.a4.truncate(M), curve.a6.truncate(M)
    else:
        a4, a6 = curve.a4, curve.a6
    return y * y - x * x * x - a4 * x - a6


def chord_add(curve: WeierstrassCurve, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    """P + Q by the chord or tangent construction (the needed denominator must be a unit)."""
    dx = Q.x - P.x
    if _unit_like(dx):
        slope = (Q.y - P.y) * _inv(dx)
    else:
        two_y = P.y * 2
        if not _unit_like(two_y):
            raise ValueError("chord construction needs a unit denominator")
        a4 = curve.a4
        slope = (P.x * P.x * 3 + a4) * _inv(two_y) if isinstance(P.x, QSeries) \
            else (P.x * P.x * 3 + a4) / two_y
    x3 = slope * slope - P.x - Q.x
    y3 = -(P.y + slope * (x3 - P.x))
    return CurvePoint(x3, y3)


def _unit_like(a) -> bool:
    if isinstance(a, QSeries):
        return a.is_integral() and a.coeff(0).is_unit()
    return a.is_unit()


def _inv(a):
    return a.inverse()


def points_equal(P: CurvePoint, Q: CurvePoint) -> bool:
    if isinstance(P.x, QSeries):
        M = min(P.x.M, Q.x.M)
        return (P.x.truncate(M) - Q.x.truncate(M)).is_zero() and \
            (P.y.truncate(M) - Q.y.truncate(M)).is_zero()
    return (P.x - Q.x).is_zero() and (P.y - Q.y).is_zero()


def torsion_is_homomorphism(ctx: PadicContext, M: int, beta=None, pairs=None) -> bool:
    """tau(z1) + tau(z2) = tau(z1 z2) on pairs of roots of unity (chord addition)."""
    curve = tate_curve(ctx, M, beta)
    roots = [z for z in ctx.roots_of_unity() if (z - 1).is_unit()]
    if pairs is None:
        pairs = [(a, b) for a in roots for b in roots if (a * b - 1).is_unit()]
    ok = True
    cache = {}

    def tau(z):
        key = tuple(z.unit)
        if key not in cache:
            cache[key] = torsion_embed(ctx, z, M, beta)
        return cache[key]

    for a, b in pairs:
        S = chord_add(curve, tau(a), tau(b))
        ok = ok and points_equal(S, tau(a * b))
    return ok


# -- specialization, boundary values and propagators ------------------------------------------

class SpecializedCurve:
    """E_{beta q0} over R with its scalar formal logarithm (in a lifted context)."""

    def __init__(self, eq: TateEquations, q0: Scalar):
        ctx = eq.ctx
        self.q0 = q0
        nu = q0.valuation()
        self.D = _scalar_degree(ctx, nu)
        self.L = ctx.lift(guard_digits(ctx, self.D))
        series_curve = tate_curve(self.L, self.D + ctx.N + 2, eq.params.beta.lift_exact(self.L))
        q0L = q0.lift_exact(self.L)
        self.curve = specialize_curve(series_curve, q0L)
        self.log = formal_log(self.curve, self.D)

    def log_at(self, t: Scalar) -> Scalar:
        return _series_at_scalar(self.log, t.lift_exact(self.L))

    def log_inverse(self, h: Scalar) -> Scalar:
        """The t in pR with l(t) = h, by Newton's method."""
        dl = self.log.derivative()
        t = h
        for _ in range(2 * self.L.N.bit_length() + 4):
            step = (_series_at_scalar(self.log, t) - h) / _eval_with_constant(dl, t)
            t = t - step
            if step.is_zero():
                break
        return t


def _eval_with_constant(f: TSeries, t: Scalar) -> Scalar:
    return _series_at_scalar(f, t) + f.coeff(0)


def _scalar_degree(ctx: PadicContext, nu: int) -> int:
    """A T-degree past which l(t) and its inverse change nothing for v(t) >= nu."""
    D = ctx.N + 2
    while True:
        L_N = ctx.N + guard_digits(ctx, D)
        if D * nu - _vmax(D, ctx.p) - D // (ctx.p - 1) > L_N:
            return D
        D += max(1, D // 4)


@dataclass
class TateBVP:
    kappa: int
    alpha: Scalar
    torsion: object
    basic: TateBasic


def _h_coefficients(eq: TateEquations, kappa: int, q0: Scalar, L, count: int):
    """c'_n = b_n q0^(kappa(p^n - 1)) / p^n in L."""
    p = eq.ctx.p
    muL = _lift_symbol(eq.mu, L)
    b = basic_coefficients(muL, kappa, count)
    q0L = q0.lift_exact(L)
    return [bn * q0L ** (kappa * (p ** n - 1)) for n, bn in enumerate(b)]


def _count_for(eq, kappa, nu, prec):
    p = eq.ctx.p
    count = 0
    while nu * kappa * (p ** (count + 1) - 1) - (count + 1) < prec + 2:
        count += 1
    return count


def solution_value(eq: TateEquations, kappa: int, alpha, q0, special: SpecializedCurve = None) -> Scalar:
    """u_{E,kappa,alpha}(q0) without expanding the series: e_{q0}(h_alpha(q0))."""
    ctx = eq.ctx
    q0 = ctx.scalar(q0)
    special = special or SpecializedCurve(eq, q0)
    L = special.L
    p = ctx.p
    alpha = ctx.scalar(alpha).lift_exact(L)
    count = _count_for(eq, kappa, q0.valuation(), L.N)
    cs = _h_coefficients(eq, kappa, q0, L, count)
    h = L.zero()
    for n, cn in enumerate(cs):
        h = h + (cn * alpha.frobenius(n)).mul_p_power(-n)
    h = h * q0.lift_exact(L) ** kappa / kappa
    return special.log_inverse(h).to_ctx(ctx)


def tate_bvp(eq: TateEquations, kappa: int, q0, g, M: int = None,
             special: SpecializedCurve = None, with_series: bool = True) -> TateBVP:
    """Solve u(q0) = g for u = torsion + u_{E,kappa,alpha}; g is an EllipticPoint or a scalar."""
    ctx = eq.ctx
    q0 = ctx.scalar(q0)
    nu = q0.valuation()
    if nu < 1:
        raise ValueError("q0 must lie in pR")
    point = g if isinstance(g, EllipticPoint) else EllipticPoint(ctx.scalar(g))
    gf = ctx.scalar(point.formal)
    if not gf.is_zero() and gf.valuation() < kappa * nu:
        raise DatumOutsideRange("formal part must lie in p^(kappa nu) R")
    special = special or SpecializedCurve(eq, q0)
    ell = special.log_at(gf).to_ctx(ctx).with_prec(gf.prec if gf.prec != INF else ctx.N)
    target = ell * kappa / q0 ** kappa
    prec = ctx.N if target.prec == INF else target.prec
    count = _count_for(eq, kappa, nu, prec)
    cs = [c.to_ctx(ctx).mul_p_power(-n)
          for n, c in enumerate(_h_coefficients(eq, kappa, q0, special.L, count))]
    alpha = hensel_solve(cs, target)
    basic = eq.basic_series(kappa, alpha, M) if with_series else None
    return TateBVP(kappa, alpha, point.torsion, basic)


def _h_value(eq: TateEquations, kappa: int, alpha: Scalar, q: Scalar) -> Scalar:
    """l(u_{E,kappa,alpha}) at q0 = q, the sum of b_n alpha^(phi^n) q^(kappa p^n) / (kappa p^n)."""
    ctx = eq.ctx
    count = _count_for(eq, kappa, q.valuation(), ctx.N)
    h = ctx.zero()
    for n, cn in enumerate(_h_coefficients(eq, kappa, q, ctx, count)):
        h = h + (cn * alpha.frobenius(n)).mul_p_power(-n)
    return h * q ** kappa / kappa


def _alpha_from_h(eq: TateEquations, kappa: int, q: Scalar, h: Scalar) -> Scalar:
    ctx = eq.ctx
    if not h.is_zero() and h.valuation() < kappa * q.valuation():
        raise DatumOutsideRange("log datum must lie in p^(kappa nu) R")
    target = h * kappa / q ** kappa
    prec = ctx.N if target.prec == INF else target.prec
    count = _count_for(eq, kappa, q.valuation(), prec)
    cs = [c.mul_p_power(-n) for n, c in enumerate(_h_coefficients(eq, kappa, q, ctx, count))]
    return hensel_solve(cs, target)


def tate_propagate(eq: TateEquations, kappa: int, q1, q2, a, coordinate: str = "log", curves=None):
    """The conjugated propagator in coordinates (torsion part unchanged).

    A datum a stands for the point tau(xi) + iota(t) on E_{beta q} with
    t = exp_q(p a) (coordinate="log") or t = p a (coordinate="formal").
    The map solves for alpha at q1 and reads the coordinate of
    u_{E,kappa,alpha}(q2) back off.
    """
    ctx = eq.ctx
    q1, q2 = ctx.scalar(q1), ctx.scalar(q2)
    a = ctx.scalar(a)
    if coordinate == "log":
        alpha = _alpha_from_h(eq, kappa, q1, a.mul_p_power(1))
        return _h_value(eq, kappa, alpha, q2).mul_p_power(-1)
    if coordinate != "formal":
        raise ValueError(f"unknown coordinate {coordinate!r}")
    curves = curves if curves is not None else {}

    def curve_at(q):
        key = tuple(q.unit) + (q.val,)
        if key not in curves:
            curves[key] = SpecializedCurve(eq, q)
        return curves[key]

    sol = tate_bvp(eq, kappa, q1, a.mul_p_power(1), special=curve_at(q1), with_series=False)
    return solution_value(eq, kappa, sol.alpha, q2, curve_at(q2)).mul_p_power(-1)


def tate_huygens_check(eq: TateEquations, kappa: int, q0, zeta1, zeta2, samples: int = 10,
                       rng: random.Random = None, coordinate: str = "log") -> bool:
    """S_{q0, z1 z2 q0} = S_{q0, z2 q0} o S_{q0, z1 q0} for the conjugated propagators."""
    ctx = eq.ctx
    rng = rng or random.Random(0)
    q0 = ctx.scalar(q0)
    curves = {}
    ok = True
    for _ in range(samples):
        a = ctx.random_scalar(rng)
        direct = tate_propagate(eq, kappa, q0, q0 * zeta1 * zeta2, a, coordinate, curves)
        step = tate_propagate(eq, kappa, q0, q0 * zeta1, a, coordinate, curves)
        twice = tate_propagate(eq, kappa, q0, q0 * zeta2, step, coordinate, curves)
        ok = ok and (direct - twice).is_zero()
    return ok


__all__ = [
    "divisor_sum", "divisor_sum_series", "eisenstein", "tate_curve", "specialize_curve",
    "capped_log", "TateParams", "QuantizationReport", "TateEquations", "TateBasic",
    "CurvePoint", "TatePoint", "convection_character", "tate_formal_log", "tate_basic_series",
    "quantization_solver", "specialize_at_q0", "torsion_embed", "cubic_residual", "chord_add", "points_equal",
    "torsion_is_homomorphism", "SpecializedCurve", "TateBVP", "solution_value", "tate_bvp",
    "tate_propagate", "tate_huygens_check",
]
