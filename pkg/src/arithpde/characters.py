"""{delta_p, delta_q}-characters of G_a, G_m and elliptic curves over R.

A character is stored by its symbols: mu for the additive group, (nu, lam)
for the multiplicative group and for elliptic curves, together with the
Frobenius data (gamma0, gamma1) of the curve.  Points are q-series; elliptic
points are formal coordinates in qR[[q]], optionally carrying a torsion tag.

Pipelines that pass through a logarithm (integrate_dlog, l_E) run in a
context with guard digits and are truncated back, see ``guard_digits``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (ArithPDEError, DatumOutsideRange, Degenerate, MultipleCharacteristicIntegers,
                     NoConvergence, NonIntegralCoefficient, NonUnitDenominator, NonUnitLead,
                     NonzeroResidual, NotFormalPoint, NotUnitSeries, ParseError,
                     PrecisionExhausted, ReductionUndefined, SupportNotTotallyNonCharacteristic)
from .formal_groups import (FrobeniusFit, TSeries, WeierstrassCurve, fit_frobenius, formal_log,
                            weierstrass_formal_group)
from .opalg import SymbolPoly, mu_p_twist, operator_apply, symbol_to_operator
from .padic_core import (INF, PadicContext, ResidueElem, Scalar, padic_log_unit,
                         rational_reconstruct, teichmuller)
from .qseries import MINUS, PLUS, GroupRingElem, QSeries, ResidueSeries, is_short

KINDS = ("ga", "gm", "ell")


# -- small helpers ----------------------------------------------------------------------

def _vmax(M: int, p: int) -> int:
    v = 0
    while p ** (v + 1) <= M:
        v += 1
    return v


def guard_digits(ctx: PadicContext, M: int) -> int:
    """Extra digits for pipelines that divide by exponents up to M.

    Every Newton step through a logarithm costs about 2*floor(log_p M)
    digits of tracked precision; this leaves room for all of them.
    """
    v = _vmax(M, ctx.p)
    steps = (M + 1).bit_length() + 1
    return (2 * v + 2) * (steps + 1) + 4


def _lift_symbol(sym: SymbolPoly, L: PadicContext) -> SymbolPoly:
    return SymbolPoly(L, {k: a.lift_rational(L) for k, a in sym.coeffs.items()})


def _low_part(u: QSeries, m: int) -> QSeries:
    """Keep the terms q^(+-k) with k < m (the rest is not yet determined)."""
    if m > u.M:
        return u
    c = [list(col[:m]) + [0] * (u.M + 1 - m) for col in u.c]
    return QSeries._norm(u.ctx, u.sign, u.M, u.prec, u.den, c)


def _widen(u: QSeries, M: int) -> QSeries:
    if M <= u.M:
        return u.truncate(M)
    c = [list(col) + [0] * (M - u.M) for col in u.c]
    return QSeries(u.ctx, u.sign, M, u.prec, u.den, tuple(c))


def _drop_q(u: QSeries, n: int) -> QSeries:
    """Divide by q^(sign*n); the window shrinks by n."""
    if n == 0:
        return u
    c = [list(col[n:]) for col in u.c]
    return QSeries(u.ctx, u.sign, u.M - n, u.prec, u.den, tuple(c))


def _fraction_of(x: Scalar):
    """Small rational congruent to x, or None (s = 1, integral x only)."""
    ctx = x.ctx
    if ctx.s != 1 or not x.is_integral():
        return None
    if x.is_zero():
        return Fraction(0)
    prec = x.prec if x.prec != INF else ctx.N
    return rational_reconstruct(x.unit[0] * ctx.p ** x.val, ctx.p ** prec, ctx.p)


def _series_at_scalar(f: TSeries, t: Scalar) -> Scalar:
    """f(t) for v(t) >= 1, summing the terms that can still matter."""
    ctx = t.ctx
    total = ctx.zero()
    power = ctx.one()
    for n in range(1, f.D + 1):
        power = power * t
        a = f.c[n]
        if a is not None:
            total = total + a * power
    return total


def _xp(ctx):
    return SymbolPoly(ctx, {(1, 0): 1})


def _xq(ctx):
    return SymbolPoly(ctx, {(0, 1): 1})


def _const(ctx, a):
    return SymbolPoly(ctx, {(0, 0): a})


# -- points on elliptic curves ----------------------------------------------------------

@dataclass
class EllipticPoint:
    """A formal coordinate in qR[[q]] plus an optional torsion tag."""
    formal: QSeries
    torsion: object = None


def _formal_part(u) -> QSeries:
    formal = u.formal if isinstance(u, EllipticPoint) else u
    if not isinstance(formal, QSeries):
        raise NotFormalPoint("expected a q-series")
    if not formal.is_integral() or not formal.coeff(0).is_zero():
        raise NotFormalPoint("elliptic points must lie in qR[[q]]")
    return formal


# -- the character object ----------------------------------------------------------------

class Character:
    """A {delta_p, delta_q}-character given by its symbols."""

    def __init__(self, kind: str, ctx: PadicContext, nu: SymbolPoly, lam: SymbolPoly = None,
                 curve: WeierstrassCurve = None, gamma0=None, gamma1=None, height: int = None):
        if kind not in KINDS:
            raise ValueError(f"unknown character kind {kind!r}")
        self.kind = kind
        self.ctx = ctx
        self.nu = nu
        self.lam = lam if lam is not None else SymbolPoly(ctx, {})
        if kind != "ga" and any(j for _, j in self.lam.coeffs):
            raise ValueError("lambda must be a polynomial in xi_p alone")
        self.curve = curve
        self.height = height
        self.gamma0 = None if gamma0 is None else ctx.scalar(gamma0)
        self.gamma1 = None if gamma1 is None else ctx.scalar(gamma1)
        if kind == "ell":
            if curve is None or curve.over_series():
                raise ValueError("elliptic characters need a curve over R")
            if height not in (1, 2) or self.gamma0 is None or (height == 2 and self.gamma1 is None):
                raise ValueError("elliptic characters need height and gamma data")
        self._cp = None
        self._pf = None
        self._fg = {}

    @property
    def mu(self) -> SymbolPoly:
        return self.characteristic_polynomial

    def _frobenius_factor(self, for_pf: bool) -> SymbolPoly:
        ctx = self.ctx
        xp = _xp(ctx)
        p = ctx.p
        if self.kind == "gm":
            return xp - _const(ctx, p if for_pf else 1)
        if self.height == 2:
            lead = xp * xp if for_pf else xp * xp * p
            g0 = self.gamma0 * p if for_pf else self.gamma0
            return lead + xp * self.gamma1 + _const(ctx, g0)
        return xp + _const(ctx, self.gamma0 * p if for_pf else self.gamma0)

    @property
    def characteristic_polynomial(self) -> SymbolPoly:
        if self._cp is None:
            if self.kind == "ga":
                self._cp = self.nu
            else:
                self._cp = (mu_p_twist(self.nu) * _xq(self.ctx)
                            + mu_p_twist(self.lam) * self._frobenius_factor(False))
        return self._cp

    @property
    def picard_fuchs(self) -> SymbolPoly:
        if self._pf is None:
            p = self.ctx.p
            if self.kind == "ga":
                self._pf = self.nu * p
            else:
                self._pf = self.nu * _xq(self.ctx) * p + self.lam * self._frobenius_factor(True)
        return self._pf

    @property
    def frechet_symbol(self) -> SymbolPoly:
        """Symbol of the linearization with xi_p standing for phi_p/p."""
        if self.kind == "ga":
            return mu_p_twist(self.nu)
        return self.characteristic_polynomial

    @property
    def order(self) -> int:
        return max((i + j for i, j in self.picard_fuchs.coeffs), default=0)

    def is_nondegenerate(self) -> bool:
        return self.characteristic_polynomial.coeff(0, 0).is_unit()

    def formal_group(self, L: PadicContext, D: int):
        """Formal group of the curve over the (lifted) context L, log to degree D."""
        key = (L.N, D)
        if key not in self._fg:
            curve = WeierstrassCurve(self.curve.a4.lift_rational(L), self.curve.a6.lift_rational(L), L)
            self._fg[key] = weierstrass_formal_group(curve, D, with_law=False, with_exp=False)
        return self._fg[key]

    def to_text(self) -> str:
        parts = [f"char kind={self.kind}", f"nu={self.nu.to_text()}", f"lambda={self.lam.to_text()}"]
        if self.kind == "ell":
            parts.append(f"height={self.height}")
            parts.append(f"gamma0={self.gamma0.to_text()}")
            if self.gamma1 is not None:
                parts.append(f"gamma1={self.gamma1.to_text()}")
            parts.append(f"curve={self.curve.to_text()}")
        return " ".join(parts)

    @classmethod
    def parse(cls, ctx: PadicContext, text: str) -> "Character":
        text = text.strip()
        if not text.startswith("char"):
            raise ParseError("character text must start with 'char'")
        keys = list(re.finditer(r"\b(kind|nu|lambda|height|gamma0|gamma1|curve)=", text))
        fields = {}
        for i, m in enumerate(keys):
            end = keys[i + 1].start() if i + 1 < len(keys) else len(text)
            fields[m.group(1)] = text[m.end():end].strip()
        kind = fields.get("kind")
        if kind not in KINDS:
            raise ParseError(f"bad or missing kind in {text!r}")
        if "nu" not in fields:
            raise ParseError("missing nu")
        nu = SymbolPoly.parse(ctx, fields["nu"])
        lam = SymbolPoly.parse(ctx, fields["lambda"]) if "lambda" in fields else None
        if kind != "ell":
            return cls(kind, ctx, nu, lam)
        if "curve" not in fields:
            raise ParseError("elliptic characters need curve=")
        curve = WeierstrassCurve.parse(ctx, fields["curve"])
        g0 = Scalar.parse(ctx, fields["gamma0"]) if "gamma0" in fields else None
        g1 = Scalar.parse(ctx, fields["gamma1"]) if "gamma1" in fields else None
        if "height" in fields or g0 is not None:
            height = int(fields["height"]) if "height" in fields else (2 if g1 is not None else 1)
            if g0 is None:
                return elliptic_character(curve, nu, lam, height=height)
            return cls(kind, ctx, nu, lam, curve, g0, g1, height)
        return elliptic_character(curve, nu, lam)

    def __repr__(self):
        return f"Character({self.to_text()})"


def _symbol(ctx, x) -> SymbolPoly:
    if isinstance(x, SymbolPoly):
        return x
    if isinstance(x, str):
        return SymbolPoly.parse(ctx, x)
    return _const(ctx, x)


def ga_character(ctx: PadicContext, mu) -> Character:
    return Character("ga", ctx, _symbol(ctx, mu))


def gm_character(ctx: PadicContext, nu, lam) -> Character:
    return Character("gm", ctx, _symbol(ctx, nu), _symbol(ctx, lam))


def elliptic_character(curve: WeierstrassCurve, nu, lam, height: int = None,
                       gamma0=None, gamma1=None, fit_order: int = None) -> Character:
    """Elliptic character; missing Frobenius data is derived from the curve.

    For coefficients in Z_p the height-2 data is exact: gamma0 = 1 and
    gamma1 = -a_p with a_p from a point count.  Otherwise the data comes from
    fit_frobenius on the formal logarithm.
    """
    ctx = curve.ctx
    nu, lam = _symbol(ctx, nu), _symbol(ctx, lam)
    if gamma0 is not None:
        height = height or (2 if gamma1 is not None else 1)
        return Character("ell", ctx, nu, lam, curve, gamma0, gamma1, height)
    in_zp = curve.is_frobenius_fixed()
    if in_zp:
        try:
            curve.residue_coefficients()
        except ValueError:
            in_zp = False
    if in_zp and height in (None, 2):
        return Character("ell", ctx, nu, lam, curve, 1, -curve.trace_of_frobenius(), 2)
    order = fit_order or ctx.p ** 3
    fit = fit_frobenius(formal_log(curve, order), height, order)
    return Character("ell", ctx, nu, lam, curve, fit.gamma0, fit.gamma1, fit.height)


def ga_family(ctx: PadicContext, r: int, s: int, lam) -> Character:
    """mu = xi_q^r + lam xi_p^s - lam (convection, heat, sideways heat, wave)."""
    lam = ctx.scalar(lam)
    return ga_character(ctx, SymbolPoly(ctx, {(0, r): 1, (s, 0): lam, (0, 0): -lam}))


def gm_family(ctx: PadicContext, r: int, lams) -> Character:
    """psi = delta_q^(r-1) psi_q + (sum lams[i] phi^i) psi_p."""
    lam = SymbolPoly(ctx, {(i, 0): a for i, a in enumerate(lams)})
    return gm_character(ctx, SymbolPoly(ctx, {(0, r - 1): 1}), lam)


def elliptic_family(curve: WeierstrassCurve, r: int, lams, **kw) -> Character:
    ctx = curve.ctx
    lam = SymbolPoly(ctx, {(i, 0): a for i, a in enumerate(lams)})
    return elliptic_character(curve, SymbolPoly(ctx, {(0, r - 1): 1}), lam, **kw)


def energy_character(group: str, a, b, c, ctx: PadicContext, curve=None, gamma0=None) -> Character:
    """Euler-Lagrange character of a f_q^2 + 2b f_p f_q + c f_p^2."""
    from .opalg import euler_lagrange_energy
    if group == "gm":
        nu, lam = euler_lagrange_energy("gm", a, b, c, ctx)
        return gm_character(ctx, nu, lam)
    g0 = 1 if gamma0 is None else gamma0
    nu, lam = euler_lagrange_energy("elliptic", a, b, c, ctx, g0)
    return Character("ell", ctx, nu, lam, curve, g0, None, 1)


# -- characteristic integers -----------------------------------------------------------

@dataclass
class CharacteristicData:
    plus: list
    minus: list
    exact: dict
    kmax: int
    mu: SymbolPoly = field(repr=False, default=None)

    @property
    def all(self):
        return sorted(self.minus + self.plus)

    def is_totally_noncharacteristic(self, kappa: int) -> bool:
        p = self.mu.ctx.p
        return kappa % p != 0 and self.mu.at_zero(kappa).valuation() == 0


def characteristic_integers(ch: Character, Kmax: int = 64) -> CharacteristicData:
    if not ch.is_nondegenerate():
        raise Degenerate("mu(0,0) is not a unit")
    mu = ch.characteristic_polynomial
    p = ch.ctx.p
    rational = {}
    for (i, j), a in mu.coeffs.items():
        if i == 0:
            rational[j] = _fraction_of(a)
    all_rational = all(v is not None for v in rational.values())
    plus, minus, exact = [], [], {}
    for k in range(1, Kmax + 1):
        if k % p == 0:
            continue
        for kappa in (k, -k):
            if mu.at_zero(kappa).is_zero():
                (plus if kappa > 0 else minus).append(kappa)
                exact[kappa] = all_rational and sum(c * kappa ** j for j, c in rational.items()) == 0
    return CharacteristicData(plus, sorted(minus, reverse=True), exact, Kmax, mu)


# -- basic series -------------------------------------------------------------------------

@dataclass
class BasicSolution:
    kind: str
    kappa: int
    alpha: Scalar
    u: QSeries
    u_a: QSeries
    b: list
    precision: int

    @property
    def point(self):
        return EllipticPoint(self.u) if self.kind == "ell" else self.u


def basic_coefficients(mu: SymbolPoly, kappa: int, count: int) -> list:
    """b_0 = 1, b_1, ..., b_count from the recursion attached to mu."""
    ctx = mu.ctx
    p = ctx.p
    rows = {}
    for (i, j), a in mu.coeffs.items():
        rows.setdefault(i, []).append((j, a))
    b = [ctx.one()]
    for n in range(1, count + 1):
        den = ctx.zero()
        for j, a in rows.get(0, []):
            den = den + a * (kappa ** j * p ** (j * n))
        if not den.is_unit():
            raise NonUnitDenominator(f"recursion denominator at n={n} is not a unit")
        num = ctx.zero()
        for t in range(1, n + 1):
            if t not in rows:
                continue
            coef = ctx.zero()
            for j, a in rows[t]:
                coef = coef + a * (kappa ** j * p ** (j * (n - t)))
            if not coef.is_zero():
                num = num + coef * b[n - t].frobenius(t)
        b.append(-num / den)
    return b


def _basic_ga(mu: SymbolPoly, kappa: int, alpha: Scalar, M: int):
    ctx = mu.ctx
    p = ctx.p
    count = 0
    while abs(kappa) * p ** (count + 1) <= M:
        count += 1
    if abs(kappa) > M:
        raise ValueError(f"q^{kappa} lies outside the window M={M}")
    b = basic_coefficients(mu, kappa, count)
    sign = PLUS if kappa > 0 else MINUS
    terms = {kappa * p ** n: b[n] * alpha.frobenius(n) for n in range(count + 1)}
    return QSeries.from_dict(ctx, terms, M, sign), b


def _log_series(y: QSeries) -> QSeries:
    return (y.delta_q() * y.inverse()).integrate_dlog()


def exp_series(h: QSeries) -> QSeries:
    """exp(h) for h with zero constant term, by Newton's y <- y(1 + h - log y)."""
    ctx = h.ctx
    y = QSeries.one(ctx, 0, h.sign)
    m = 1
    while m <= h.M:
        m = min(2 * m, h.M + 1)
        hw = h.truncate(m - 1)
        y = _widen(y, m - 1)
        y = _low_part(y * (hw - _log_series(y) + 1), m)
    return y


def log_inverse(log: TSeries, h: QSeries) -> QSeries:
    """The u in qR[[q]] with log(u) = h, by q-adic Newton iteration."""
    ctx = h.ctx
    dl = log.derivative()
    u = QSeries.zero(ctx, 0, h.sign)
    m = 1
    while m <= h.M:
        m = min(2 * m, h.M + 1)
        hw = h.truncate(m - 1)
        u = _widen(u, m - 1)
        if u.is_zero():
            u = _low_part(hw, m)
            continue
        resid = log.evaluate(u) - hw
        u = _low_part(u - resid * dl.evaluate(u).inverse(), m)
    return u


def basic_series(ch: Character, kappa: int, alpha, M: int) -> BasicSolution:
    ctx = ch.ctx
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    if ch.kind != "ga" and kappa % ctx.p == 0:
        raise ValueError("kappa must be coprime to p")
    if not ch.is_nondegenerate():
        raise NonUnitDenominator("the character is degenerate")
    alpha = ctx.scalar(alpha)
    if ch.kind == "ga":
        u, b = _basic_ga(ch.mu, kappa, alpha, M)
        return BasicSolution("ga", kappa, alpha, u, u, b, u.prec)
    L = ctx.lift(guard_digits(ctx, M))
    muL = _lift_symbol(ch.mu, L)
    ua_L, bL = _basic_ga(muL, kappa, alpha.lift_exact(L), M)
    h = ua_L.integrate_dlog()
    if ch.kind == "gm":
        y = exp_series(h)
    else:
        y = log_inverse(ch.formal_group(L, M).log, h)
    u = y.to_ctx(ctx)
    if not u.is_integral():
        raise NonIntegralCoefficient("basic series is not integral")
    ua = ua_L.to_ctx(ctx)
    return BasicSolution(ch.kind, kappa, alpha, u, ua, [x.to_ctx(ctx) for x in bL], u.prec)


# -- evaluating characters ------------------------------------------------------------------

@dataclass
class UnitDecomposition:
    zeta: Scalar
    n: int
    lead: Scalar
    one_unit: QSeries


def unit_decomposition(u: QSeries) -> UnitDecomposition:
    """u = lead * q^(sign n) * (1 + w) with lead = zeta * (1 + pR)."""
    if not isinstance(u, QSeries) or u.is_zero() or not u.is_integral():
        raise NotUnitSeries("expected an integral nonzero series")
    n = u.q_order()
    lead = u.coeff(u.sign * n)
    if not lead.is_unit():
        raise NotUnitSeries("leading coefficient is not a unit")
    y = _drop_q(u, n).scale(lead.inverse())
    return UnitDecomposition(teichmuller(lead.residue()), n, lead, y)


def psi_p_scalar(b: Scalar) -> Scalar:
    """(1/p) log(phi(b)/b^p) for a unit b."""
    if not b.is_unit():
        raise NotUnitSeries("psi_p needs a unit")
    ctx = b.ctx
    x = b.frobenius() / b ** ctx.p
    return padic_log_unit(x).mul_p_power(-1)


def psi_p_one_unit(y: QSeries) -> QSeries:
    """(1/p) log(phi_p(y)/y^p) as sum (-1)^(k+1) p^(k-1) z^k / k, z = delta_p(y)/y^p."""
    ctx = y.ctx
    p = ctx.p
    z = y.delta_p() * (y ** p).inverse()
    total = z
    power = z
    k = 1
    while True:
        k += 1
        # k - 1 - floor(log_p k) bounds v(p^(k-1)/k) for this and all later k
        if k - 1 - _vmax(k, p) >= z.prec:
            break
        power = power * z
        total = total + power.scale(Fraction((-1) ** (k + 1) * p ** (k - 1), k))
    return total


def psi_q_gm(u: QSeries) -> QSeries:
    d = unit_decomposition(u)
    y = d.one_unit
    return y.delta_q() * y.inverse() + u.sign * d.n


def psi_p_gm(u: QSeries) -> QSeries:
    d = unit_decomposition(u)
    return psi_p_one_unit(d.one_unit) + psi_p_scalar(d.lead)


def _ell_log_lifted(ch: Character, formal: QSeries):
    L = ch.ctx.lift(guard_digits(ch.ctx, formal.M))
    fg = ch.formal_group(L, formal.M)
    return L, fg, formal.lift_exact(L)


def psi_q_of(kind, u) -> QSeries:
    """Kolchin logarithmic derivative: u, delta_q u / u, or delta_q l_E(u).

    ``kind`` is a kind string or a Character; elliptic points need the
    Character (for its curve).
    """
    ch = kind if isinstance(kind, Character) else None
    kind = ch.kind if ch is not None else kind
    if kind == "ga":
        return u
    if kind == "gm":
        return psi_q_gm(u)
    if kind == "ell":
        if ch is None:
            raise ValueError("elliptic psi_q needs the character (for the curve)")
        formal = _formal_part(u)
        L, fg, uL = _ell_log_lifted(ch, formal)
        val = fg.log.derivative().evaluate(uL) * uL.delta_q()
        return val.to_ctx(ch.ctx).with_prec(formal.prec)
    raise ValueError(f"unknown kind {kind!r}")


def apply_character(ch: Character, u) -> QSeries:
    ctx = ch.ctx
    if ch.kind == "ga":
        return operator_apply(symbol_to_operator(ch.nu), u)
    if ch.kind == "gm":
        a = operator_apply(symbol_to_operator(ch.nu), psi_q_gm(u))
        b = operator_apply(symbol_to_operator(ch.lam), psi_p_gm(u))
        return a + b.truncate(a.M) if b.M > a.M else a.truncate(b.M) + b
    formal = _formal_part(u)
    L, fg, uL = _ell_log_lifted(ch, formal)
    ell = fg.log.evaluate(uL)
    w = operator_apply(symbol_to_operator(_lift_symbol(ch.picard_fuchs, L)), ell).mul_p_power(-1)
    # a change of u below p^prec moves the value by p^(prec-1) at most
    return w.to_ctx(ctx).with_prec(formal.prec - 1)


def diagonal_value(ch: Character, kappa: int, alpha, M: int) -> QSeries:
    """mu(0,kappa) alpha q^kappa (G_a) or mu(0,kappa) alpha q^kappa / kappa."""
    ctx = ch.ctx
    c = ch.mu.at_zero(kappa) * ctx.scalar(alpha)
    if ch.kind != "ga":
        c = c / kappa
    return QSeries.monomial(ctx, kappa, c, M)


def verify_diagonalization(ch: Character, kappa: int, alpha, M: int = 125) -> bool:
    basic = basic_series(ch, kappa, alpha, M)
    val = apply_character(ch, basic.point)
    expected = diagonal_value(ch, kappa, alpha, val.M)
    return (val - expected).is_zero()


def boundary_Bk0(kind, u, kappa: int) -> Scalar:
    """Gamma_kappa psi_q u, the coefficient of q^kappa after psi_q."""
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    return psi_q_of(kind, u).coeff(kappa)


# -- group structure on points ----------------------------------------------------------

def group_identity(ch: Character, M: int, sign=PLUS):
    ctx = ch.ctx
    if ch.kind == "gm":
        return QSeries.one(ctx, M, sign)
    z = QSeries.zero(ctx, M, sign)
    return EllipticPoint(z) if ch.kind == "ell" else z


def group_combine(ch: Character, a, b):
    """The group law on points: sum, product, or formal sum (torsion tags kept)."""
    if ch.kind == "ga":
        return a + b
    if ch.kind == "gm":
        return a * b
    fa, fb = _formal_part(a), _formal_part(b)
    if fa.is_zero():
        out = fb
    elif fb.is_zero():
        out = fa
    else:
        L = ch.ctx.lift(guard_digits(ch.ctx, fa.M))
        fg = ch.formal_group(L, fa.M)
        h = fg.log.evaluate(fa.lift_exact(L)) + fg.log.evaluate(fb.lift_exact(L))
        out = log_inverse(fg.log, h).to_ctx(ch.ctx).with_prec(min(fa.prec, fb.prec))
    tags = [t for t in (getattr(a, "torsion", None), getattr(b, "torsion", None)) if t is not None]
    torsion = None if not tags else (tags[0] if len(tags) == 1 else tuple(tags))
    return EllipticPoint(out, torsion)


def group_power(ch: Character, u, m: int):
    """m-fold group multiple of a point (m >= 0)."""
    M = (u.formal if isinstance(u, EllipticPoint) else u).M
    out = group_identity(ch, M, (u.formal if isinstance(u, EllipticPoint) else u).sign)
    for _ in range(m):
        out = group_combine(ch, out, u)
    return out


def convolve_point(ch: Character, f: GroupRingElem, u):
    """f * u = sum_zeta f(zeta) u(zeta q) in the group of points."""
    formal = u.formal if isinstance(u, EllipticPoint) else u
    out = group_identity(ch, formal.M, formal.sign)
    for zeta, wt in f.items():
        moved = formal.scale_q(zeta)
        if ch.kind == "ell":
            moved = EllipticPoint(moved)
        if wt < 0:
            if ch.kind == "ga":
                moved = -moved
            elif ch.kind == "gm":
                moved = moved.inverse()
            else:
                raise ValueError("negative weights need the formal inverse; use positive weights")
        out = group_combine(ch, out, group_power(ch, moved, abs(wt)))
    return out


def _points_equal(ch, a, b) -> bool:
    fa = a.formal if isinstance(a, EllipticPoint) else a
    fb = b.formal if isinstance(b, EllipticPoint) else b
    return (fa - fb).is_zero()


# -- solution spaces ---------------------------------------------------------------------

@dataclass
class SolutionClassReport:
    tag: str
    basis: list
    kset: list

    def __post_init__(self):
        assert len(self.basis) == len(self.kset)


@dataclass
class Reconstruction:
    pairs: list
    basis: list
    rebuilt: object
    residual: QSeries
    tag: str

    @property
    def residual_zero(self) -> bool:
        return self.residual.is_zero()


def solution_class_report(ch: Character, sign=PLUS, Kmax: int = 64, M: int = 125) -> SolutionClassReport:
    K = characteristic_integers(ch, Kmax)
    ks = [k for k in (K.plus if sign == PLUS else K.minus) if abs(k) <= M]
    basis = [basic_series(ch, k, 1, M) for k in ks]
    return SolutionClassReport("U_1" if sign == PLUS else "U_-1", basis, ks)


def reconstruct_from_boundary(ch: Character, u, Kmax: int = 64, strict: bool = True) -> Reconstruction:
    formal = u.formal if isinstance(u, EllipticPoint) else u
    M, sign = formal.M, formal.sign
    K = characteristic_integers(ch, Kmax)
    ks = [k for k in (K.plus if sign == PLUS else K.minus) if abs(k) <= M]
    psi_q = psi_q_of(ch, u)
    rebuilt = group_identity(ch, M, sign)
    pairs, basis = [], []
    for k in ks:
        alpha = psi_q.coeff(k)
        pairs.append((k, alpha))
        sol = basic_series(ch, k, alpha, M)
        basis.append(sol)
        rebuilt = group_combine(ch, rebuilt, sol.point)
    rf = rebuilt.formal if isinstance(rebuilt, EllipticPoint) else rebuilt
    residual = formal - rf.truncate(formal.M) if rf.M >= formal.M else formal.truncate(rf.M) - rf
    if strict and not residual.is_zero():
        raise NonzeroResidual("the boundary data do not rebuild the solution")
    return Reconstruction(pairs, basis, rebuilt, residual, "U_1" if sign == PLUS else "U_-1")


def is_unmixed(mu: SymbolPoly) -> bool:
    """mu_ij = 0 mod p whenever i >= 1 and j >= 1."""
    return all(a.valuation() >= 1 for (i, j), a in mu.coeffs.items() if i and j)


@dataclass
class InhomogeneousSolution:
    u: object
    alphas: dict
    residual_zero: bool
    normalization_ok: bool
    short_support: bool
    unmixed: bool

    @property
    def transcendence_hypothesis(self) -> bool:
        """Short support and unmixed symbol (a flag, nothing is proved)."""
        return self.short_support and self.unmixed


def solve_inhomogeneous(ch: Character, phi: QSeries, Kmax: int = 64) -> InhomogeneousSolution:
    ctx = ch.ctx
    if not phi.coeff(0).is_zero():
        raise ValueError("the right-hand side must have zero constant term")
    K = characteristic_integers(ch, Kmax)
    supp = sorted(phi.support(), key=abs)
    for k in supp:
        if not K.is_totally_noncharacteristic(k):
            raise SupportNotTotallyNonCharacteristic(f"q^{k} is not totally non-characteristic")
    u = group_identity(ch, phi.M, phi.sign)
    alphas = {}
    for k in supp:
        a = phi.coeff(k) / ch.mu.at_zero(k)
        if ch.kind != "ga":
            a = a * k
        alphas[k] = a
        u = group_combine(ch, u, basic_series(ch, k, a, phi.M).point)
    val = apply_character(ch, u)
    residual_zero = (val - phi.truncate(val.M)).is_zero()
    psi_q = psi_q_of(ch, u)
    normalization_ok = not (set(psi_q.support()) & set(K.all))
    short = bool(supp) and is_short(supp, ctx.p)
    return InhomogeneousSolution(u, alphas, residual_zero, normalization_ok, short, is_unmixed(ch.mu))


# -- Hensel, boundary values and propagators ------------------------------------------------

def hensel_solve(c, g, max_iter: int = None) -> Scalar:
    """The alpha with sum_n c_n alpha^(phi^n) = g, by fixed-point iteration."""
    c = list(c)
    ctx = c[0].ctx
    g = ctx.scalar(g)
    if not c[0].is_unit():
        raise NonUnitLead("c_0 must be a unit")
    for cn in c[1:]:
        if not cn.is_zero() and cn.valuation() < 1:
            raise ValueError("c_n must lie in pR for n >= 1")
    inv0 = c[0].inverse()
    alpha = g * inv0
    limit = max_iter if max_iter is not None else (ctx.N if g.prec == INF else g.prec) + 5
    for _ in range(limit):
        acc = g
        for n, cn in enumerate(c[1:], start=1):
            if not cn.is_zero():
                acc = acc - cn * alpha.frobenius(n)
        nxt = acc * inv0
        if (nxt - alpha).is_zero():
            return nxt
        alpha = nxt
    raise NoConvergence("fixed-point iteration did not settle")


@dataclass
class BVPSolution:
    kind: str
    kappa: int
    alpha: Scalar
    torsion: object
    basic: BasicSolution
    u: object

    def value_at(self, q):
        formal = self.basic.u
        val = formal.evaluate_at(q)
        if self.kind == "gm":
            return val * self.torsion if self.torsion is not None else val
        if self.kind == "ell":
            return EllipticPoint(val, self.torsion)
        return val


def _single_kappa(ch: Character, Kmax: int) -> int:
    K = characteristic_integers(ch, Kmax)
    if len(K.plus) != 1:
        raise MultipleCharacteristicIntegers(f"positive characteristic integers {K.plus}")
    return K.plus[0]


def _coefficient_sequence(ch: Character, kappa: int, q0: Scalar, prec: int):
    """c'_n with u(q0) / (leading term at q0) = sum c'_n alpha^(phi^n)."""
    ctx = ch.ctx
    p = ctx.p
    nu = q0.valuation()
    count = 0
    while nu * kappa * (p ** (count + 1) - 1) - (count + 1) < prec + 2:
        count += 1
    b = basic_coefficients(ch.mu, kappa, count)
    out = []
    for n, bn in enumerate(b):
        cn = bn * q0 ** (kappa * (p ** n - 1))
        if ch.kind != "ga":
            cn = cn.mul_p_power(-n)
        out.append(cn)
    return out


def bvp_at_q0(ch: Character, q0, g, M: int = 125, Kmax: int = 64) -> BVPSolution:
    ctx = ch.ctx
    q0 = ctx.scalar(q0)
    nu = q0.valuation()
    if nu < 1:
        raise ValueError("q0 must lie in pR")
    kappa = _single_kappa(ch, Kmax)
    lead = q0 ** kappa
    torsion = None
    if ch.kind == "ga":
        g = ctx.scalar(g)
        if not g.is_zero() and g.valuation() < kappa * nu:
            raise DatumOutsideRange("datum must lie in p^(kappa nu) R")
        target = g / lead
    elif ch.kind == "gm":
        g = ctx.scalar(g)
        if not g.is_unit():
            raise DatumOutsideRange("datum must be a unit")
        torsion = teichmuller(g.residue())
        logv = padic_log_unit(g / torsion)
        if not logv.is_zero() and logv.valuation() < kappa * nu:
            raise DatumOutsideRange("log of the datum must lie in p^(kappa nu) R")
        target = logv * kappa / lead
    else:
        point = g if isinstance(g, EllipticPoint) else EllipticPoint(g)
        torsion = point.torsion
        gf = ctx.scalar(point.formal)
        if not gf.is_zero() and gf.valuation() < kappa * nu:
            raise DatumOutsideRange("formal part must lie in p^(kappa nu) R")
        L = ctx.lift(guard_digits(ctx, M))
        fg = ch.formal_group(L, M)
        ell = _series_at_scalar(fg.log, gf.lift_exact(L)).to_ctx(ctx).with_prec(gf.prec)
        target = ell * kappa / lead
    prec = ctx.N if target.prec == INF else target.prec
    alpha = hensel_solve(_coefficient_sequence(ch, kappa, q0, prec), target)
    basic = basic_series(ch, kappa, alpha, M)
    if ch.kind == "gm":
        u = basic.u.scale(torsion)
    elif ch.kind == "ell":
        u = EllipticPoint(basic.u, torsion)
    else:
        u = basic.u
    return BVPSolution(ch.kind, kappa, alpha, torsion, basic, u)


def propagate(ch: Character, q1, q2, g, M: int = 125, Kmax: int = 64):
    """S_{q1,q2}(g) = u(q2) for the solution with u(q1) = g."""
    return bvp_at_q0(ch, q1, g, M, Kmax).value_at(q2)


def _datum_equal(a, b) -> bool:
    if isinstance(a, EllipticPoint):
        return a.torsion == b.torsion and a.formal == b.formal
    return a == b


def huygens_check(ch: Character, q0, zeta1, zeta2, samples: int = 10, rng=None,
                  M: int = 125, Kmax: int = 64) -> bool:
    """S_{q0, z1 z2 q0} = S_{q0, z2 q0} o S_{q0, z1 q0} on sampled boundary data."""
    import random as _random
    ctx = ch.ctx
    rng = rng or _random.Random(0)
    q0 = ctx.scalar(q0)
    kappa = _single_kappa(ch, Kmax)
    roots = ctx.roots_of_unity()
    ok = True
    for _ in range(samples):
        alpha = ctx.random_scalar(rng)
        sol = basic_series(ch, kappa, alpha, M)
        g = sol.u.evaluate_at(q0)
        if ch.kind == "gm":
            g = g * rng.choice(roots)
        elif ch.kind == "ell":
            g = EllipticPoint(g)
        direct = propagate(ch, q0, zeta1 * zeta2 * q0, g, M, Kmax)
        step = propagate(ch, q0, zeta1 * q0, g, M, Kmax)
        twice = propagate(ch, q0, zeta2 * q0, step, M, Kmax)
        ok = ok and _datum_equal(direct, twice)
    return ok


# -- mod p algebraicity ---------------------------------------------------------------------

@dataclass
class ArtinSchreierWitness:
    additive: dict          # s -> residue coefficient of t^(p^s)
    constant: ResidueSeries  # g(q)
    verified: bool
    unmixed: bool
    pairs: list

    @property
    def degree(self) -> int:
        p = self.constant.ctx.p
        return max((p ** s for s, a in self.additive.items() if not a.is_zero()), default=0)


def _residue(a: Scalar) -> ResidueElem:
    if not a.is_integral():
        raise ReductionUndefined(f"{a} is not integral")
    return a.residue()


def artin_schreier_witness(ch: Character, u, Kmax: int = 64) -> ArtinSchreierWitness:
    ctx = ch.ctx
    p = ctx.p
    formal = u.formal if isinstance(u, EllipticPoint) else u
    M, sign = formal.M, formal.sign
    if ch.kind == "ga" and not formal.is_integral():
        raise ReductionUndefined("the series is not integral")
    rec = reconstruct_from_boundary(ch, u, Kmax, strict=False)
    mu = ch.mu
    mubar = {key: _residue(a) for key, a in mu.coeffs.items()}
    zero = ResidueElem(ctx, ctx._zero_vec)
    additive = {i: a for (i, j), a in mubar.items() if j == 0}
    terms = {}

    def add(k, val):
        if abs(k) <= M and not val.is_zero():
            terms[abs(k)] = terms.get(abs(k), zero) + val

    for kappa, alpha in rec.pairs:
        abar = _residue(alpha)
        if abar.is_zero():
            continue
        kb = ResidueElem(ctx, (kappa % p,) + (0,) * (ctx.s - 1))
        for (i, j), a in mubar.items():
            if i >= 1 and j >= 1:
                add(kappa * p ** i, a * kb ** j * abar.frobenius(i))
        add(kappa, -(mubar.get((0, 0), zero) * abar))
    g_series = ResidueSeries(ctx, sign, M, terms)
    psi = psi_q_of(ch, u)
    if not psi.is_integral():
        raise ReductionUndefined("psi_q u is not integral")
    ubar = psi.reduce_mod_p()
    total = g_series
    for s, a in additive.items():
        total = total + ubar.frobenius_power(s) * a
    verified = total.is_zero() and rec.residual_zero
    return ArtinSchreierWitness(additive, g_series, verified,
                                all(a.is_zero() for (i, j), a in mubar.items() if i and j), rec.pairs)


# -- stationary part -----------------------------------------------------------------------

@dataclass
class StationarySplit:
    stationary: object
    moving: object
    verified: bool


def stationary_split(ch: Character, u) -> StationarySplit:
    """u = u0 (+) u1 with u0 constant in q and u1 vanishing at q^(+-1) = 0."""
    ctx = ch.ctx
    if ch.kind == "ga":
        c0 = u.coeff(0)
        u0 = QSeries.constant(ctx, c0, u.M, u.sign)
        u1 = u - u0
    elif ch.kind == "gm":
        c0 = u.coeff(0)
        if not c0.is_unit():
            raise NotUnitSeries("constant term must be a unit")
        u0 = QSeries.constant(ctx, c0, u.M, u.sign)
        u1 = u.scale(c0.inverse())
    else:
        point = u if isinstance(u, EllipticPoint) else EllipticPoint(u)
        u0 = EllipticPoint(QSeries.zero(ctx, point.formal.M, point.formal.sign), point.torsion)
        u1 = EllipticPoint(point.formal)
    verified = apply_character(ch, u0).is_zero() and apply_character(ch, u1).is_zero()
    return StationarySplit(u0, u1, verified)


__all__ = [
    "KINDS", "Character", "EllipticPoint", "BasicSolution", "CharacteristicData",
    "SolutionClassReport", "Reconstruction", "InhomogeneousSolution", "BVPSolution",
    "ArtinSchreierWitness", "StationarySplit", "UnitDecomposition",
    "guard_digits", "ga_character", "gm_character", "elliptic_character", "ga_family",
    "gm_family", "elliptic_family", "energy_character", "characteristic_integers",
    "basic_coefficients", "basic_series", "exp_series", "log_inverse", "unit_decomposition",
    "psi_p_scalar", "psi_p_one_unit", "psi_q_gm", "psi_p_gm", "psi_q_of", "apply_character",
    "diagonal_value", "verify_diagonalization", "boundary_Bk0", "group_identity",
    "group_combine", "group_power", "convolve_point", "solution_class_report",
    "reconstruct_from_boundary", "is_unmixed", "solve_inhomogeneous", "hensel_solve",
    "bvp_at_q0", "propagate", "huygens_check", "artin_schreier_witness", "stationary_split",
]
