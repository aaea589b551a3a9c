"""One-parameter formal group laws: multiplicative group and Weierstrass curves.

Univariate series in T are TSeries, generic over the coefficient ring:
plain Scalars or QSeries (for curves over R[[q]]).  Two-variable laws over
Scalars are BiSeries whose rows are QSeries in T2.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    Inconsistent,
    InsufficientOrder,
    NonUnitConstantTerm,
    NonzeroConstantTerm,
    ParseError,
)
from .padic_core import INF, PadicContext, Scalar
from .qseries import PLUS, QSeries


# -- coefficient ring helpers ----------------------------------------------------

def _is_zero(x):
    return x is None or x.is_zero()


def _add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if isinstance(b, QSeries) and not isinstance(a, QSeries):
        return b + a
    return a + b


def _mul(a, b):
    if a is None or b is None:
        return None
    if isinstance(a, QSeries) and not isinstance(b, QSeries):
        return a.scale(b)
    if isinstance(b, QSeries) and not isinstance(a, QSeries):
        return b.scale(a)
    return a * b


def _scale(a, c):
    if a is None:
        return None
    if isinstance(a, QSeries):
        return a.scale(c)
    return a * c


def _neg(a):
    return None if a is None else -a


def _frob(a, times=1):
    if a is None:
        return None
    if isinstance(a, QSeries):
        return a.phi_p(times)
    return a.frobenius(times)


def _invert(a):
    if isinstance(a, QSeries):
        return a.inverse()
    return a.inverse()


class TSeries:
    """sum_{n <= D} c_n T^n with coefficients Scalars or QSeries (None = 0)."""

    __slots__ = ("ctx", "D", "c")

    def __init__(self, ctx: PadicContext, coeffs, D=None):
        self.ctx = ctx
        coeffs = list(coeffs)
        self.D = len(coeffs) - 1 if D is None else D
        coeffs = coeffs[:self.D + 1] + [None] * (self.D + 1 - len(coeffs))
        self.c = [None if _is_zero(x) else x for x in coeffs]

    @classmethod
    def variable(cls, ctx, D):
        return cls(ctx, [None, ctx.one()], D)

    @classmethod
    def constant(cls, ctx, a, D):
        return cls(ctx, [a], D)

    @classmethod
    def from_qseries(cls, u: QSeries):
        return cls(u.ctx, [u.coeff(k) for k in range(u.M + 1)], u.M)

    def to_qseries(self) -> QSeries:
        return QSeries.from_dict(self.ctx, {n: a for n, a in enumerate(self.c) if a is not None}, self.D)

    def coeff(self, n):
        if n > self.D:
            raise IndexError(f"T^{n} beyond degree {self.D}")
        return self.c[n] if self.c[n] is not None else self.ctx.zero()

    def __getitem__(self, n):
        return self.coeff(n)

    def order(self):
        for n, a in enumerate(self.c):
            if a is not None:
                return n
        return INF

    def truncate(self, D):
        return TSeries(self.ctx, self.c[:D + 1], min(D, self.D))

    def __add__(self, other):
        if not isinstance(other, TSeries):
            other = TSeries.constant(self.ctx, other, self.D)
        D = min(self.D, other.D)
        return TSeries(self.ctx, [_add(a, b) for a, b in zip(self.c[:D + 1], other.c[:D + 1])], D)

    __radd__ = __add__

    def __neg__(self):
        return TSeries(self.ctx, [_neg(a) for a in self.c], self.D)

    def __sub__(self, other):
        if not isinstance(other, TSeries):
            other = TSeries.constant(self.ctx, other, self.D)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TSeries):
            return self.scale(other)
        D = min(self.D, other.D)
        out = [None] * (D + 1)
        nz_b = [(j, b) for j, b in enumerate(other.c[:D + 1]) if b is not None]
        for i, a in enumerate(self.c[:D + 1]):
            if a is None:
                continue
            for j, b in nz_b:
                if i + j > D:
                    break
                out[i + j] = _add(out[i + j], _mul(a, b))
        return TSeries(self.ctx, out, D)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, a):
        if isinstance(a, (int, Fraction)):
            a = self.ctx.scalar(a)
        return TSeries(self.ctx, [_mul(x, a) if x is not None else None for x in self.c], self.D)

    def __pow__(self, e: int):
        result = TSeries.constant(self.ctx, self.ctx.one(), self.D)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def shift(self, k: int):
        """Multiply by T^k (k may be negative when low terms vanish)."""
        if k >= 0:
            return TSeries(self.ctx, [None] * k + self.c[:self.D + 1 - k], self.D)
        if any(a is not None for a in self.c[:-k]):
            raise ValueError("cannot divide by T: low terms present")
        return TSeries(self.ctx, self.c[-k:], self.D + k)

    def derivative(self):
        return TSeries(self.ctx, [_scale(a, n) for n, a in enumerate(self.c) if n > 0], self.D - 1)

    def integral(self):
        """Antiderivative with zero constant term."""
        out = [None] + [_scale(a, Fraction(1, n + 1)) for n, a in enumerate(self.c)]
        return TSeries(self.ctx, out, self.D + 1)

    def inverse(self):
        c0 = self.c[0]
        if c0 is None:
            raise NonUnitConstantTerm("series with zero constant term has no inverse")
        inv0 = _invert(c0)
        out = [inv0]
        nz = [(k, a) for k, a in enumerate(self.c) if k > 0 and a is not None]
        for n in range(1, self.D + 1):
            acc = None
            for k, a in nz:
                if k > n:
                    break
                acc = _add(acc, _mul(a, out[n - k]))
            out.append(_neg(_mul(acc, inv0)) if acc is not None else None)
        return TSeries(self.ctx, out, self.D)

    def compose(self, inner: "TSeries") -> "TSeries":
        """self(inner) for inner of positive T-order."""
        if inner.c[0] is not None:
            raise NonzeroConstantTerm("inner series must have zero constant term")
        D = min(self.D, inner.D)
        inner = inner.truncate(D)
        acc = TSeries.constant(self.ctx, self.c[min(self.D, D)], D)
        for n in range(min(self.D, D) - 1, -1, -1):
            acc = acc * inner + TSeries.constant(self.ctx, self.c[n], D)
        return acc

    def evaluate(self, u: QSeries) -> QSeries:
        """Substitute a q-series of positive q-order for T."""
        order = u.q_order()
        if order == 0:
            raise NonzeroConstantTerm("T must be replaced by a series in qR[[q]]")
        if order == INF:
            c0 = self.c[0]
            base = QSeries.zero(u.ctx, u.M, u.sign, u.prec)
            return base if c0 is None else base + c0
        top = min(self.D, u.M // order)
        acc = QSeries.zero(u.ctx, u.M, u.sign, u.prec)
        for n in range(top, -1, -1):
            if n < top:
                acc = acc * u
            a = self.c[n]
            if a is not None:
                acc = acc + a
        if top < u.M // order:
            # terms beyond T^D are unknown
            acc = acc.truncate((top + 1) * order - 1)
        return acc

    def frobenius(self, times=1):
        return TSeries(self.ctx, [_frob(a, times) for a in self.c], self.D)

    def is_integral(self) -> bool:
        for a in self.c:
            if a is None:
                continue
            if isinstance(a, QSeries):
                if not a.is_integral():
                    return False
            elif not a.is_integral():
                return False
        return True

    def is_zero(self) -> bool:
        return all(a is None for a in self.c)

    def __eq__(self, other):
        if not isinstance(other, TSeries):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def revert(self) -> "TSeries":
        """Compositional inverse of a series congruent to T mod T^2 (Newton)."""
        if self.c[0] is not None:
            raise NonzeroConstantTerm("series must vanish at 0")
        if not self.coeff(1) == 1:
            raise NonUnitConstantTerm("linear coefficient must be 1")
        D = self.D
        dl = self.derivative()
        e = TSeries.variable(self.ctx, min(D, 1))
        d = 1
        while d < D:
            d = min(2 * d, D)
            e = TSeries(self.ctx, e.c, d)
            ld = self.truncate(d).compose(e)
            resid = ld - TSeries.variable(self.ctx, d)
            deriv = dl.truncate(d).compose(e) if d > 0 else dl
            e = e - resid * deriv.truncate(d).inverse()
        return e

    def __repr__(self):
        terms = [f"({a})T^{n}" for n, a in enumerate(self.c) if a is not None][:6]
        return "TSeries[" + " + ".join(terms or ["0"]) + f"; D={self.D}]"


# -- two-variable series -----------------------------------------------------------

class BiSeries:
    """sum c_ij T1^i T2^j of total degree <= D over Scalars; row i is a QSeries in T2."""

    def __init__(self, ctx, rows, D):
        self.ctx = ctx
        self.D = D
        self.rows = []
        for i in range(D + 1):
            r = rows[i] if i < len(rows) and rows[i] is not None else None
            if r is not None:
                r = r.truncate(D - i)
                if r.is_zero():
                    r = None
            self.rows.append(r)

    @classmethod
    def zero(cls, ctx, D):
        return cls(ctx, [], D)

    @classmethod
    def from_terms(cls, ctx, terms, D):
        rows = []
        for i in range(D + 1):
            entries = {j: a for (ii, j), a in terms.items() if ii == i and i + j <= D}
            rows.append(QSeries.from_dict(ctx, entries, D - i) if entries else None)
        return cls(ctx, rows, D)

    @classmethod
    def in_first(cls, f: TSeries, D=None):
        """f(T1)."""
        D = f.D if D is None else D
        return cls(f.ctx, [QSeries.constant(f.ctx, f.coeff(i), D - i) if i <= f.D and f.c[i] is not None
                           else None for i in range(D + 1)], D)

    @classmethod
    def in_second(cls, f: TSeries, D=None):
        """f(T2)."""
        D = f.D if D is None else D
        fq = QSeries.from_dict(f.ctx, {n: a for n, a in enumerate(f.c[:D + 1]) if a is not None}, D)
        return cls(f.ctx, [fq], D)

    def coeff(self, i, j):
        r = self.rows[i] if i <= self.D else None
        if r is None or j > r.M:
            return self.ctx.zero()
        return r.coeff(j)

    def __add__(self, other):
        if not isinstance(other, BiSeries):
            other = BiSeries.from_terms(self.ctx, {(0, 0): other}, self.D)
        D = min(self.D, other.D)
        rows = [_add(a, b) for a, b in zip(self.rows[:D + 1], other.rows[:D + 1])]
        return BiSeries(self.ctx, rows, D)

    __radd__ = __add__

    def __neg__(self):
        return BiSeries(self.ctx, [_neg(r) for r in self.rows], self.D)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, BiSeries):
            return BiSeries(self.ctx, [r.scale(other) if r is not None else None for r in self.rows], self.D)
        D = min(self.D, other.D)
        out = [None] * (D + 1)
        nz = [(j, b) for j, b in enumerate(other.rows[:D + 1]) if b is not None]
        for i, a in enumerate(self.rows[:D + 1]):
            if a is None:
                continue
            for j, b in nz:
                if i + j > D:
                    break
                prod = a.truncate(D - i - j) * b.truncate(D - i - j)
                out[i + j] = prod if out[i + j] is None else out[i + j] + prod
        return BiSeries(self.ctx, out, D)

    __rmul__ = __mul__

    def is_zero(self):
        return all(r is None or r.is_zero() for r in self.rows)

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def transpose(self) -> "BiSeries":
        terms = {}
        for i, r in enumerate(self.rows):
            if r is None:
                continue
            for j, a in r.coefficients().items():
                terms[(j, i)] = a
        return BiSeries.from_terms(self.ctx, terms, self.D)

    def is_integral(self) -> bool:
        return all(r is None or r.is_integral() for r in self.rows)

    def compose_outer(self, f: TSeries) -> "BiSeries":
        """f(self) for self without constant term."""
        if self.rows[0] is not None and not self.rows[0].coeff(0).is_zero():
            raise NonzeroConstantTerm("inner series must vanish at the origin")
        D = min(self.D, f.D)
        acc = BiSeries.from_terms(self.ctx, {(0, 0): f.coeff(D)}, D)
        for n in range(D - 1, -1, -1):
            acc = acc * self + BiSeries.from_terms(self.ctx, {(0, 0): f.coeff(n)}, D)
        return acc

    def evaluate(self, a: QSeries, b: QSeries) -> QSeries:
        """F(a(t), b(t)) for series a, b of positive order in t.

        Terms of total degree above D are unknown, so the result is cut at
        q-order (D+1)*min(ord a, ord b) - 1.
        """
        oa, ob = a.q_order(), b.q_order()
        if oa == 0 or ob == 0:
            raise NonzeroConstantTerm("both arguments need positive q-order")
        M = min(a.M, b.M)
        low = min(oa, ob)
        if low != INF:
            M = min(M, (self.D + 1) * low - 1)
        a, b = a.truncate(M), b.truncate(M)
        total = QSeries.zero(a.ctx, M, PLUS, min(a.prec, b.prec))
        apow = QSeries.one(a.ctx, M)
        for i, r in enumerate(self.rows):
            if i > 0:
                apow = apow * a
                if apow.is_zero():
                    break
            if r is None:
                continue
            row = TSeries(a.ctx, [r.coeff(j) for j in range(r.M + 1)], M)
            row_val = row.evaluate(b) if ob != INF else QSeries.constant(a.ctx, r.coeff(0), M)
            total = total + apow * row_val
        return total

    def __repr__(self):
        return f"BiSeries(D={self.D})"


# -- curves ------------------------------------------------------------------------

class WeierstrassCurve:
    """y^2 = x^3 + a4 x + a6 with coefficients Scalars or QSeries."""

    def __init__(self, a4, a6, ctx: PadicContext = None):
        if ctx is None:
            ctx = a4.ctx if hasattr(a4, "ctx") else a6.ctx
        self.ctx = ctx
        self.a4 = a4 if isinstance(a4, QSeries) else ctx.scalar(a4)
        self.a6 = a6 if isinstance(a6, QSeries) else ctx.scalar(a6)

    def discriminant(self):
        return _add(_mul(_mul(_mul(self.a4, self.a4), self.a4), self.ctx.scalar(4)),
                    _mul(_mul(self.a6, self.a6), self.ctx.scalar(27)))

    def is_smooth(self) -> bool:
        d = self.discriminant()
        if d is None:
            return False
        if isinstance(d, QSeries):
            return d.is_integral() and d.coeff(0).is_unit()
        return d.is_unit()

    def over_series(self) -> bool:
        return isinstance(self.a4, QSeries) or isinstance(self.a6, QSeries)

    def is_frobenius_fixed(self) -> bool:
        if self.over_series():
            return False
        return self.a4.frobenius() == self.a4 and self.a6.frobenius() == self.a6

    def residue_coefficients(self):
        """(a4 mod p, a6 mod p) as integers, for curves with coefficients in Z_p."""
        vals = []
        for a in (self.a4, self.a6):
            if not a.is_integral():
                raise ValueError("coefficients must be integral")
            r = a.residue().vec
            if any(r[1:]):
                raise ValueError("coefficient is not in Z_p")
            vals.append(r[0])
        return tuple(vals)

    def count_points_mod_p(self) -> int:
        """#E(F_p) including the point at infinity (exhaustive count)."""
        p = self.ctx.p
        a4, a6 = self.residue_coefficients()
        squares = {}
        for y in range(p):
            squares[y * y % p] = squares.get(y * y % p, 0) + 1
        total = 1
        for x in range(p):
            total += squares.get((x ** 3 + a4 * x + a6) % p, 0)
        return total

    def trace_of_frobenius(self) -> int:
        return self.ctx.p + 1 - self.count_points_mod_p()

    def to_text(self) -> str:
        def fmt(a):
            return a.to_text().replace("\n", "; ") if isinstance(a, QSeries) else a.to_text()
        return f"curve a4={fmt(self.a4)} a6={fmt(self.a6)}"

    @classmethod
    def parse(cls, ctx: PadicContext, text: str) -> "WeierstrassCurve":
        m = re.match(r"^\s*(?:curve\s+)?a4\s*=\s*(.+?)\s+a6\s*=\s*(.+?)\s*$", text)
        if not m:
            raise ParseError(f"bad curve text {text!r}")
        return cls(Scalar.parse(ctx, m.group(1)), Scalar.parse(ctx, m.group(2)), ctx)

    def __repr__(self):
        return f"WeierstrassCurve(a4={self.a4}, a6={self.a6})"


def _cap(a, total, n):
    """Drop q-terms of a T^n coefficient that cannot reach q^total."""
    if total is None or not isinstance(a, QSeries):
        return a
    return a.truncate(max(total - n, 0))


def weierstrass_w_expansion(curve: WeierstrassCurve, D: int, total: int = None) -> TSeries:
    """W(T) = T^3 + a4 T W^2 + a6 W^3, solved degree by degree.

    With ``total`` set (curves over R[[q]]) the coefficient of T^n is kept
    only below q^(total - n), which is all that matters once T is replaced
    by a series in qR[[q]].
    """
    ctx = curve.ctx
    a4 = None if _is_zero(curve.a4) else curve.a4
    a6 = None if _is_zero(curve.a6) else curve.a6
    W = [None] * (D + 1)
    W2 = [None] * (D + 1)
    W3 = [None] * (D + 1)

    def sq(k):
        acc = None
        for i in range(3, k - 2):
            if W[i] is not None and W[k - i] is not None:
                acc = _add(acc, _mul(W[i], W[k - i]))
        return acc

    def cube(k):
        acc = None
        for i in range(3, k - 5):
            if W[i] is not None and W2[k - i] is not None:
                acc = _add(acc, _mul(W[i], W2[k - i]))
        return acc

    for n in range(D + 1):
        if n >= 6:
            W2[n - 3] = _cap(sq(n - 3), total, n - 3) if n - 3 >= 6 else None
        val = ctx.one() if n == 3 else None
        if n >= 7 and a4 is not None:
            W2[n - 1] = _cap(sq(n - 1), total, n - 1)
            val = _add(val, _mul(a4, W2[n - 1]))
        if n >= 9 and a6 is not None:
            val = _add(val, _mul(a6, cube(n)))
        W[n] = _cap(val, total, n)
    return TSeries(ctx, W, D)


def _capped(f: TSeries, total) -> TSeries:
    if total is None:
        return f
    return TSeries(f.ctx, [_cap(a, total, n) for n, a in enumerate(f.c)], f.D)


def formal_log(curve: WeierstrassCurve, D: int, total: int = None) -> TSeries:
    """Logarithm of the invariant differential dx/(2y), normalized to T + O(T^2).

    ``total`` caps coefficients as in :func:`weierstrass_w_expansion`.
    """
    ctx = curve.ctx
    if ctx.p < 5:
        raise ValueError("Weierstrass formal groups here need p >= 5")
    inner = None if total is None else total + 3
    W = weierstrass_w_expansion(curve, D + 3, inner)
    w = W.shift(-3)                                   # W = T^3 w, w(0) = 1
    tdw = TSeries(ctx, [_scale(a, n) for n, a in enumerate(w.c)], w.D)
    ratio = _capped(tdw, total) * _capped(w.inverse(), total)   # T w'/w
    dl = TSeries.constant(ctx, ctx.one(), D) + ratio.truncate(D).scale(Fraction(1, 2))
    return _capped(dl.truncate(D - 1).integral(), total)


@dataclass
class FormalGroupLaw:
    ctx: PadicContext
    D: int
    log: TSeries
    exp: TSeries = None
    law: BiSeries = None
    inverse: TSeries = None
    source: str = "custom"
    curve: WeierstrassCurve = None

    def ensure_exp(self):
        if self.exp is None:
            self.exp = formal_exp(self.log)
        return self.exp

    def sum_along(self, a: QSeries, b: QSeries) -> QSeries:
        """F(a, b) for points a, b of positive order."""
        if self.law is not None:
            return self.law.evaluate(a, b)
        return log_to_point(self, self.log_of(a) + self.log_of(b))

    def log_of(self, u: QSeries) -> QSeries:
        return self.log.evaluate(u)


def gm_formal_group(ctx: PadicContext, D: int) -> FormalGroupLaw:
    log = TSeries(ctx, [None] + [ctx.scalar(Fraction((-1) ** (n + 1), n)) for n in range(1, D + 1)], D)
    fact = 1
    exp = [None]
    for n in range(1, D + 1):
        fact *= n
        exp.append(ctx.scalar(Fraction(1, fact)))
    law = BiSeries.from_terms(ctx, {(1, 0): 1, (0, 1): 1, (1, 1): 1}, D)
    inverse = TSeries(ctx, [None] + [ctx.scalar((-1) ** n) for n in range(1, D + 1)], D)
    return FormalGroupLaw(ctx, D, log, TSeries(ctx, exp, D), law, inverse, "gm")


def formal_exp(log: TSeries) -> TSeries:
    return log.revert()


def group_law_from_log(log: TSeries, exp: TSeries = None) -> BiSeries:
    """F = e(l(T1) + l(T2)) over Scalars."""
    exp = formal_exp(log) if exp is None else exp
    S = BiSeries.in_first(log) + BiSeries.in_second(log)
    return S.compose_outer(exp)


def weierstrass_group_law(curve: WeierstrassCurve, D: int, W: TSeries = None) -> BiSeries:
    """Chord-tangent addition on the (z, w) model, integral over R."""
    ctx = curve.ctx
    W = weierstrass_w_expansion(curve, D + 1) if W is None else W
    lam_terms = {}
    for n in range(1, min(W.D, D + 1) + 1):
        wn = W.c[n]
        if wn is None:
            continue
        for a in range(n):
            b = n - 1 - a
            if a + b <= D:
                key = (a, b)
                lam_terms[key] = lam_terms[key] + wn if key in lam_terms else wn
    lam = BiSeries.from_terms(ctx, lam_terms, D)
    z1 = BiSeries.from_terms(ctx, {(1, 0): 1}, D)
    z2 = BiSeries.from_terms(ctx, {(0, 1): 1}, D)
    nu = BiSeries.in_first(W.truncate(D), D) - lam * z1
    lam2 = lam * lam
    lam3 = lam2 * lam
    num = (lam * nu) * (2 * curve.a4) + (lam2 * nu) * (3 * curve.a6)
    den_minus_one = lam2 * curve.a4 + lam3 * curve.a6
    # 1/(1 + X) for X of order >= 4
    inv = BiSeries.from_terms(ctx, {(0, 0): 1}, D)
    power = BiSeries.from_terms(ctx, {(0, 0): 1}, D)
    for _ in range(D // 4 + 1):
        power = -(power * den_minus_one)
        if power.is_zero():
            break
        inv = inv + power
    return z1 + z2 + num * inv


def weierstrass_formal_group(curve: WeierstrassCurve, D: int, with_law: bool = True,
                             with_exp: bool = True) -> FormalGroupLaw:
    log = formal_log(curve, D)
    exp = formal_exp(log) if with_exp else None
    law = weierstrass_group_law(curve, D) if with_law and not curve.over_series() else None
    inverse = TSeries(curve.ctx, [None, -curve.ctx.one()], D)
    return FormalGroupLaw(curve.ctx, D, log, exp, law, inverse, "weierstrass", curve)


def mult_by_m(fg: FormalGroupLaw, m: int) -> TSeries:
    """[m](T) = e(m l(T))."""
    exp = fg.ensure_exp()
    return exp.compose(fg.log.scale(m))


def log_to_point(fg: FormalGroupLaw, h: QSeries, iterations: int = None) -> QSeries:
    """Solve l(u) = h for u in qR[[q]] by Newton iteration on q-series."""
    dl = fg.log.derivative()
    u = h
    steps = iterations if iterations is not None else (h.M + 1).bit_length() + 2
    for _ in range(steps):
        resid = fg.log.evaluate(u) - h
        if resid.is_zero():
            break
        u = u - resid * dl.evaluate(u).inverse()
    return u


# -- Frobenius fitting ---------------------------------------------------------------

@dataclass
class FrobeniusFit:
    height: int
    gamma0: Scalar
    gamma1: Scalar = None
    precision: int = 0
    gamma0_normalized: bool = False
    conditions: int = 0

    def as_tuple(self):
        return (self.gamma0,) if self.height == 1 else (self.gamma1, self.gamma0)


def solve_linear_congruences(ctx: PadicContext, rows, nvars: int):
    """Solve sum_i a_i x_i + b in R for x in R^nvars.

    rows holds (a: list of Scalars, b: Scalar) over K.  Returns (values,
    precisions); an undetermined unknown gets value 0 and precision 0.
    Raises Inconsistent if no integral solution exists.
    """
    p = ctx.p
    work = []
    for a, b in rows:
        vals = [x.valuation() for x in a if not x.is_zero()] + ([b.valuation()] if not b.is_zero() else [])
        d = max([0] + [-v for v in vals])
        if d == 0:
            continue
        a2 = [x.mul_p_power(d) for x in a]
        b2 = b.mul_p_power(d)
        e = min([d] + [x.prec for x in a2] + [b2.prec])
        work.append([a2, b2, e])
    pivots = []
    remaining = list(range(nvars))
    while True:
        best = None
        for r, (a, b, e) in enumerate(work):
            for c in remaining:
                v = a[c].valuation()
                # rows with moduli p^e behave like p^(E-e) * row at a common modulus
                if v < e and (best is None or e - v > best[0]):
                    best = (e - v, v, r, c)
        if best is None:
            break
        _, v, r, c = best
        a_r, b_r, e_r = work.pop(r)
        for row in work:
            a_k, b_k, e_k = row
            if a_k[c].is_zero() or a_k[c].valuation() >= e_k:
                a_k[c] = ctx.zero()
                continue
            f = a_k[c] / a_r[c]
            e_new = min(e_k, e_r + f.valuation())
            row[0] = [ak - f * ar for ak, ar in zip(a_k, a_r)]
            row[0][c] = ctx.zero()
            row[1] = b_k - f * b_r
            row[2] = e_new
        pivots.append((c, a_r, b_r, e_r, v))
        remaining.remove(c)
    for a, b, e in work:
        if not b.is_zero() and b.valuation() < e:
            raise Inconsistent("integrality conditions have no common solution")
    values = {c: ctx.zero() for c in range(nvars)}
    precs = {c: 0 for c in range(nvars)}
    for c, a, b, e, v in reversed(pivots):
        rhs = -b
        prec = e - v
        for i in range(nvars):
            if i != c and not a[i].is_zero():
                rhs = rhs - a[i] * values[i]
                prec = min(prec, precs[i] + a[i].valuation() - v)
        if not rhs.is_zero() and rhs.valuation() < min(v, e):
            raise Inconsistent("pivot congruence is not solvable")
        x = (rhs.with_prec(e) / a[c]) if not rhs.is_zero() else ctx.zero()
        prec = max(prec, 0)
        values[c] = _integral_rep(ctx, x, prec)
        precs[c] = prec
    return [values[c] for c in range(nvars)], [precs[c] for c in range(nvars)]


def _integral_rep(ctx, x: Scalar, prec: int) -> Scalar:
    """The unique representative with digits below p^prec, as an exact integral scalar."""
    if prec <= 0 or x.is_zero() or x.valuation() >= prec:
        return ctx.zero()
    vec = x.as_vector(0, prec)
    return Scalar._make(ctx, vec, 0, prec)


def fit_frobenius(log: TSeries, height: int = None, M: int = None, gamma0=None) -> FrobeniusFit:
    """Scalars making (1/p)(phi^2 + g1 phi + p g0) l or (1/p)(phi + p g0) l integral.

    height None tries 1 and falls back to 2 on Inconsistent.  For a curve with
    Frobenius-fixed coefficients the height-2 solutions form a family; pass
    gamma0 (or rely on the automatic gamma0 = 1 normalization) to pin it.
    """
    ctx = log.ctx
    p = ctx.p
    M = log.D if M is None else M
    if M > log.D:
        raise InsufficientOrder(f"log known to degree {log.D} < M={M}")
    if M < p:
        raise InsufficientOrder("order M must reach at least p")
    if height is None:
        try:
            return fit_frobenius(log, 1, M, gamma0)
        except Inconsistent:
            return fit_frobenius(log, 2, M, gamma0)
    ell = [log.coeff(n) for n in range(M + 1)]
    ell_phi = [a.frobenius() for a in ell]
    ell_phi2 = [a.frobenius(2) for a in ell]
    inv_p = ctx.scalar(Fraction(1, p))
    zero = ctx.zero()

    def rows_for(fixed_g0):
        rows = []
        for n in range(1, M + 1):
            b = zero
            if height == 1 and n % p == 0:
                b = ell_phi[n // p] * inv_p
            elif height == 2 and n % (p * p) == 0:
                b = ell_phi2[n // (p * p)] * inv_p
            if height == 1:
                a = [ell[n]]
            else:
                a1 = ell_phi[n // p] * inv_p if n % p == 0 else zero
                a = [ell[n], a1]
            if fixed_g0 is not None:
                b = b + a[0] * fixed_g0
                a = a[1:]
            rows.append((a, b))
        return rows

    if height == 1:
        (g0,), (pr,) = solve_linear_congruences(ctx, rows_for(None), 1)
        if pr < 1:
            raise InsufficientOrder("order M too small to determine gamma0")
        return FrobeniusFit(1, g0, None, pr, False, M)
    if gamma0 is not None:
        g0 = ctx.scalar(gamma0)
        (g1,), (pr,) = solve_linear_congruences(ctx, rows_for(g0), 1)
        if pr < 1:
            raise InsufficientOrder("order M too small to determine gamma1")
        return FrobeniusFit(2, g0, g1, pr, True, M)
    (g0, g1), (p0, p1) = solve_linear_congruences(ctx, rows_for(None), 2)
    if min(p0, p1) >= 1:
        return FrobeniusFit(2, g0, g1, min(p0, p1), False, M)
    # underdetermined: normalize gamma0 = 1 when that member of the family exists
    one = ctx.one()
    try:
        (g1,), (pr,) = solve_linear_congruences(ctx, rows_for(one), 1)
    except Inconsistent:
        raise InsufficientOrder("height-2 data undetermined and gamma0 = 1 is not a solution")
    if pr < 1:
        raise InsufficientOrder("order M too small to determine gamma1")
    return FrobeniusFit(2, one, g1, pr, True, M)


# -- checks ----------------------------------------------------------------------

def fg_check_suite(fg: FormalGroupLaw, rng: random.Random = None, samples: int = 3) -> dict:
    """Run the formal group invariants; returns {check name: bool}."""
    rng = rng or random.Random(0)
    ctx = fg.ctx
    D = fg.D
    out = {}
    exp = fg.ensure_exp()
    t = TSeries.variable(ctx, D)
    out["exp_of_log"] = exp.compose(fg.log) == t
    out["log_of_exp"] = fg.log.compose(exp) == t
    out["log_linear_term"] = fg.log.coeff(1) == 1 and fg.log.c[0] is None
    tq = QSeries.monomial(ctx, 1, 1, D)
    cs = [[ctx.random_scalar(rng) for _ in range(3)] for _ in range(samples)]
    if fg.law is not None:
        F = fg.law
        out["identity"] = all(F.coeff(i, 0) == (1 if i == 1 else 0) for i in range(D + 1))
        out["symmetry"] = F == F.transpose()
        out["integral"] = F.is_integral()
        assoc = True
        hom = True
        for c1, c2, c3 in cs:
            a, b, c = tq.scale(c1), tq.scale(c2), tq.scale(c3)
            left = F.evaluate(F.evaluate(a, b), c)
            right = F.evaluate(a, F.evaluate(b, c))
            assoc &= left == right
            hom &= fg.log.evaluate(F.evaluate(a, b)) == fg.log.evaluate(a) + fg.log.evaluate(b)
        out["associativity"] = assoc
        out["log_homomorphism"] = hom
    else:
        ok = True
        for c1, c2, _ in cs:
            lhs = exp.compose(fg.log.compose(TSeries.variable(ctx, D).scale(c1))
                              + fg.log.compose(TSeries.variable(ctx, D).scale(c2)))
            ok &= lhs.is_integral()
        out["law_integral_on_lines"] = ok
    return out
