"""Truncated q-series over the p-adic scalars.

A series in q (direction +1) or in q^-1 (direction -1) is stored densely by
the magnitude k = |n| of the exponent, as s integer lists (one per basis
coordinate of W(F_{p^s})) sharing a common denominator p^den.  The value is
known modulo p^prec (absolute, global for the series) and modulo q^(M+1).

Products use Kronecker substitution: each coordinate list is packed into one
big integer, so a truncated product costs s^2 big-integer multiplications.
"""

from __future__ import annotations

import math
import random
import re
from fractions import Fraction

from .errors import (
    ContextMismatch,
    DirectionMismatch,
    InsufficientTruncation,
    MixedSigns,
    NonIntegralCoefficient,
    NonUnitConstantTerm,
    NonzeroConstantTerm,
    NotRootOfUnity,
    ParseError,
    PrecisionExhausted,
    ShiftBudgetExceeded,
)
from .padic_core import INF, PadicContext, ResidueElem, Scalar, vp_int

PLUS = 1
MINUS = -1


def _sign_text(sign):
    return "+" if sign == PLUS else "-"


# -- raw helpers on coordinate lists -----------------------------------------

def _pack(vals, nbytes):
    return int.from_bytes(b"".join(v.to_bytes(nbytes, "little") for v in vals), "little")


def _unpack(x, nbytes, count):
    total = nbytes * count
    x &= (1 << (8 * total)) - 1
    bs = x.to_bytes(total, "little")
    return [int.from_bytes(bs[i:i + nbytes], "little") for i in range(0, total, nbytes)]


def raw_mul(ctx: PadicContext, A, B, L: int, mod: int):
    """Truncated product of coordinate lists, reduced modulo mod."""
    s = ctx.s
    la = min(len(A[0]), L)
    lb = min(len(B[0]), L)
    if la == 0 or lb == 0:
        return [[0] * L for _ in range(s)]
    bound = mod.bit_length()
    nbytes = (2 * bound + (min(la, lb) * s).bit_length() + 2 * s + 8) // 8 + 1
    if la <= 2 or lb <= 2:
        return _small_mul(ctx, A, B, L, la, lb, mod)
    # slots are sized for entries below mod
    pa = [_pack([x % mod for x in a[:la]], nbytes) for a in A]
    pb = [_pack([x % mod for x in b[:lb]], nbytes) for b in B]
    prod = [0] * (2 * s - 1)
    for i in range(s):
        if pa[i]:
            for j in range(s):
                if pb[j]:
                    prod[i + j] += pa[i] * pb[j]
    cols = [_unpack(c, nbytes, L) if c else None for c in prod]
    out = [cols[i] if cols[i] is not None else [0] * L for i in range(s)]
    for k in range(2 * s - 2, s - 1, -1):
        ck = cols[k]
        if ck is None:
            continue
        r = ctx._red[k - s]
        for i in range(s):
            ri = r[i]
            if ri:
                oi = out[i]
                out[i] = [x + ri * y for x, y in zip(oi, ck)]
    return [[x % mod for x in o] for o in out]


def _small_mul(ctx, A, B, L, la, lb, mod):
    s = ctx.s
    out = [[0] * L for _ in range(s)]
    for i in range(la):
        va = tuple(a[i] for a in A)
        if not any(va):
            continue
        for j in range(min(lb, L - i)):
            vb = tuple(b[j] for b in B)
            if not any(vb):
                continue
            w = ctx.vmul(va, vb, mod)
            for t in range(s):
                out[t][i + j] += w[t]
    return [[x % mod for x in o] for o in out]


def raw_frob(ctx: PadicContext, C, k: int, times: int = 1):
    """Frobenius on each coordinate vector, modulo p^k."""
    mod = ctx.p ** k
    if ctx.s == 1 or times % ctx.s == 0:
        return [[x % mod for x in c] for c in C]
    cols = ctx._frobenius_columns(max(k, 1))
    s = ctx.s
    for _ in range(times % s):
        out = []
        for i in range(s):
            acc = [0] * len(C[0])
            for j in range(s):
                cij = cols[j][i]
                if cij:
                    acc = [a + cij * x for a, x in zip(acc, C[j])]
            out.append([a % mod for a in acc])
        C = out
    return C


def raw_inverse(ctx: PadicContext, A, L: int, prec: int):
    """Inverse of an integral series with unit constant term, modulo p^prec."""
    mod = ctx.p ** prec
    c0 = tuple(a[0] for a in A)
    inv0 = ctx.vinv(c0, prec)
    V = [[inv0[i]] for i in range(ctx.s)]
    k = 1
    while k < L:
        k2 = min(2 * k, L)
        Vk = [v + [0] * (k2 - len(v)) for v in V]
        UV = raw_mul(ctx, A, Vk, k2, mod)
        E = [[(-x) % mod for x in c] for c in UV]
        E[0][0] = (E[0][0] + 1) % mod
        VE = raw_mul(ctx, Vk, E, k2, mod)
        V = [[(x + y) % mod for x, y in zip(v, w)] for v, w in zip(Vk, VE)]
        k = k2
    return V


class QSeries:
    """Truncated series sum_n c_n q^n (n >= 0) or sum_n c_n q^n (n <= 0)."""

    __slots__ = ("ctx", "sign", "M", "prec", "den", "c")

    def __init__(self, ctx, sign, M, prec, den, c):
        self.ctx = ctx
        self.sign = sign
        self.M = M
        self.prec = prec
        self.den = den
        self.c = c

    # -- construction ----------------------------------------------------------

    @staticmethod
    def _norm(ctx, sign, M, prec, den, c) -> "QSeries":
        if prec > ctx.N:
            prec = ctx.N
        if prec < 1:
            raise PrecisionExhausted(f"series precision {prec} < 1")
        p = ctx.p
        mod = p ** (prec + den)
        c = [[x % mod for x in col] for col in c]
        while den > 0 and all(x % p == 0 for col in c for x in col):
            c = [[x // p for x in col] for col in c]
            den -= 1
        if ctx.shift_budget is not None and den > ctx.shift_budget:
            raise ShiftBudgetExceeded(f"denominator p^{den} exceeds the shift budget")
        return QSeries(ctx, sign, M, prec, den, tuple(c))

    @classmethod
    def zero(cls, ctx, M, sign=PLUS, prec=None) -> "QSeries":
        prec = ctx.N if prec is None else min(prec, ctx.N)
        return cls(ctx, sign, M, prec, 0, tuple([0] * (M + 1) for _ in range(ctx.s)))

    @classmethod
    def constant(cls, ctx, a, M, sign=PLUS) -> "QSeries":
        return cls.from_dict(ctx, {0: a}, M, sign)

    @classmethod
    def one(cls, ctx, M, sign=PLUS) -> "QSeries":
        return cls.constant(ctx, 1, M, sign)

    @classmethod
    def monomial(cls, ctx, n, coeff, M, sign=None) -> "QSeries":
        if sign is None:
            sign = MINUS if n < 0 else PLUS
        return cls.from_dict(ctx, {n: coeff}, M, sign)

    @classmethod
    def from_dict(cls, ctx, coeffs, M, sign=PLUS, prec=None) -> "QSeries":
        """Build from {exponent: scalar-like}; exponents carry their sign."""
        items = []
        best = ctx.N if prec is None else min(prec, ctx.N)
        den = 0
        for n, a in coeffs.items():
            if n * sign < 0:
                raise DirectionMismatch(f"exponent {n} has the wrong sign")
            k = abs(n)
            if k > M:
                raise ValueError(f"exponent {n} outside the window M={M}")
            a = ctx.scalar(a)
            best = min(best, a.prec)
            if not a.is_zero():
                den = max(den, -a.val)
                items.append((k, a))
        if best < 1:
            raise PrecisionExhausted("coefficient precision below 1")
        c = [[0] * (M + 1) for _ in range(ctx.s)]
        for k, a in items:
            vec = a.as_vector(den, best)
            for i in range(ctx.s):
                c[i][k] = vec[i]
        return cls._norm(ctx, sign, M, best, den, c)

    @classmethod
    def from_list(cls, ctx, values, sign=PLUS, prec=None) -> "QSeries":
        return cls.from_dict(ctx, {sign * k: v for k, v in enumerate(values)},
                             len(values) - 1, sign, prec)

    @classmethod
    def random(cls, ctx, rng: random.Random, M, sign=PLUS, constant=True,
               density=1.0) -> "QSeries":
        mod = ctx.p ** ctx.N
        c = [[0] * (M + 1) for _ in range(ctx.s)]
        for k in range(M + 1):
            if k == 0 and not constant:
                continue
            if density >= 1.0 or rng.random() < density:
                for i in range(ctx.s):
                    c[i][k] = rng.randrange(mod)
        return cls._norm(ctx, sign, M, ctx.N, 0, c)

    # -- inspection -------------------------------------------------------------

    def coeff(self, n) -> Scalar:
        k = abs(n)
        if n * self.sign < 0 and n != 0:
            return self.ctx.zero()
        if k > self.M:
            raise InsufficientTruncation(f"q^{n} lies outside the window M={self.M}")
        vec = tuple(col[k] for col in self.c)
        return Scalar._make(self.ctx, vec, -self.den, self.prec)

    def __getitem__(self, n):
        return self.coeff(n)

    def coefficients(self) -> dict:
        out = {}
        for k in range(self.M + 1):
            if any(col[k] for col in self.c):
                out[self.sign * k] = self.coeff(self.sign * k)
        return out

    def support(self) -> set:
        return {self.sign * k for k in range(self.M + 1) if any(col[k] for col in self.c)}

    def is_zero(self) -> bool:
        return not any(x for col in self.c for x in col)

    def valuation(self):
        """Least p-adic valuation of a coefficient (prec if all vanish)."""
        v = INF
        p = self.ctx.p
        for col in self.c:
            for x in col:
                if x:
                    k = 0
                    while x % p == 0:
                        x //= p
                        k += 1
                    if k < v:
                        v = k
                        if v == 0:
                            return -self.den
        if v == INF:
            return self.prec
        return min(v - self.den, self.prec)

    def q_order(self):
        for k in range(self.M + 1):
            if any(col[k] for col in self.c):
                return k
        return INF

    def is_integral(self) -> bool:
        return self.den == 0

    def _check(self, other):
        if not isinstance(other, QSeries):
            raise TypeError("expected a QSeries")
        if other.ctx is not self.ctx:
            raise ContextMismatch(f"{self.ctx} vs {other.ctx}")
        if other.sign != self.sign:
            raise DirectionMismatch("series directions differ")

    def _coerce(self, other):
        if isinstance(other, QSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, Scalar)):
            return QSeries.constant(self.ctx, other, self.M, self.sign)
        return NotImplemented

    # -- arithmetic ------------------------------------------------------------

    def _aligned(self, other, M):
        den = max(self.den, other.den)
        p = self.ctx.p
        fa = p ** (den - self.den)
        fb = p ** (den - other.den)
        A = [col[:M + 1] if fa == 1 else [x * fa for x in col[:M + 1]] for col in self.c]
        B = [col[:M + 1] if fb == 1 else [x * fb for x in col[:M + 1]] for col in other.c]
        return den, A, B

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        M = min(self.M, other.M)
        den, A, B = self._aligned(other, M)
        c = [[x + y for x, y in zip(a, b)] for a, b in zip(A, B)]
        return QSeries._norm(self.ctx, self.sign, M, min(self.prec, other.prec), den, c)

    __radd__ = __add__

    def __neg__(self):
        c = [[-x for x in col] for col in self.c]
        return QSeries._norm(self.ctx, self.sign, self.M, self.prec, self.den, c)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        M = min(self.M, other.M)
        den, A, B = self._aligned(other, M)
        c = [[x - y for x, y in zip(a, b)] for a, b in zip(A, B)]
        return QSeries._norm(self.ctx, self.sign, M, min(self.prec, other.prec), den, c)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def scale(self, a) -> "QSeries":
        """Multiply by a scalar."""
        a = self.ctx.scalar(a)
        if a.is_exact_zero():
            return QSeries.zero(self.ctx, self.M, self.sign, self.prec)
        va = a.val
        prec = min(self.prec + va, a.prec + self.valuation())
        if a.is_zero():
            return QSeries.zero(self.ctx, self.M, self.sign, prec)
        den = self.den - va
        extra = 0
        if den < 0:
            extra, den = -den, 0
        mod = self.ctx.p ** (prec + den)
        unit = a.unit
        if extra:
            unit = tuple(x * self.ctx.p ** extra for x in unit)
        c = _scale_cols(self.ctx, self.c, unit, mod)
        return QSeries._norm(self.ctx, self.sign, self.M, prec, den, c)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            return self.scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        self._check(other)
        M = min(self.M, other.M)
        prec = min(self.prec + other.valuation(), other.prec + self.valuation())
        den = self.den + other.den
        if prec + den < 1:
            raise PrecisionExhausted("product has no known digits")
        mod = self.ctx.p ** (max(prec, 1) + den)
        c = raw_mul(self.ctx, self.c, other.c, M + 1, mod)
        return QSeries._norm(self.ctx, self.sign, M, prec, den, c)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            return self.scale(1 / self.ctx.scalar(other))
        if isinstance(other, QSeries):
            return self * other.inverse()
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = QSeries.one(self.ctx, self.M, self.sign)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def inverse(self) -> "QSeries":
        if not self.is_integral():
            raise NonIntegralCoefficient("inverse implemented for integral series")
        c0 = tuple(col[0] for col in self.c)
        if self.ctx.vval(c0) != 0:
            raise NonUnitConstantTerm("constant term is not a unit")
        V = raw_inverse(self.ctx, self.c, self.M + 1, self.prec)
        return QSeries._norm(self.ctx, self.sign, self.M, self.prec, 0, V)

    def truncate(self, M: int) -> "QSeries":
        if M >= self.M:
            return self
        return QSeries(self.ctx, self.sign, M, self.prec, self.den,
                       tuple(col[:M + 1] for col in self.c))

    def with_prec(self, prec: int) -> "QSeries":
        if prec >= self.prec:
            return self
        return QSeries._norm(self.ctx, self.sign, self.M, prec, self.den, self.c)

    def mul_p_power(self, k: int) -> "QSeries":
        """Exact multiplication by p^k."""
        if k >= 0:
            f = self.ctx.p ** k
            take = min(k, self.den)
            den = self.den - take
            rest = k - take
            c = self.c if rest == 0 else [[x * self.ctx.p ** rest for x in col] for col in self.c]
            return QSeries._norm(self.ctx, self.sign, self.M, self.prec + k, den, c)
        return QSeries._norm(self.ctx, self.sign, self.M, self.prec + k, self.den - k, self.c)

    def shift_q(self, k: int) -> "QSeries":
        """Multiply by q^(sign*k) for k >= 0 (moves the window)."""
        if k == 0:
            return self
        c = [[0] * k + col[:self.M + 1 - k] for col in self.c]
        return QSeries(self.ctx, self.sign, self.M, self.prec, self.den, tuple(c))

    def to_ctx(self, ctx: PadicContext) -> "QSeries":
        if ctx is self.ctx:
            return self
        if not ctx.compatible(self.ctx):
            raise ContextMismatch(f"{self.ctx} vs {ctx}")
        return QSeries._norm(ctx, self.sign, self.M, min(self.prec, ctx.N), self.den, self.c)

    def lift_exact(self, ctx: PadicContext) -> "QSeries":
        """Reinterpret the stored numerators as exact in a finer context."""
        return QSeries(ctx, self.sign, self.M, ctx.N, self.den, self.c)

    # -- operators of the theory -------------------------------------------------

    def delta_q(self) -> "QSeries":
        sg = self.sign
        c = [[x * sg * k for k, x in enumerate(col)] for col in self.c]
        return QSeries._norm(self.ctx, self.sign, self.M, self.prec, self.den, c)

    def frob_coeffs(self, times: int = 1) -> "QSeries":
        c = raw_frob(self.ctx, self.c, self.prec + self.den, times)
        return QSeries(self.ctx, self.sign, self.M, self.prec, self.den, tuple(c))

    def phi_p(self, times: int = 1) -> "QSeries":
        """Frobenius on coefficients composed with q -> q^p (times-fold)."""
        if times == 0:
            return self
        step = self.ctx.p ** times
        top = self.M // step
        src = [col[:top + 1] for col in self.c]
        src = raw_frob(self.ctx, src, self.prec + self.den, times)
        c = []
        for col in src:
            out = [0] * (self.M + 1)
            out[0:top * step + 1:step] = col
            c.append(out)
        return QSeries(self.ctx, self.sign, self.M, self.prec, self.den, tuple(c))

    def delta_p(self) -> "QSeries":
        if not self.is_integral():
            raise NonIntegralCoefficient("delta_p needs integral coefficients")
        if self.prec - 1 < 1:
            raise PrecisionExhausted("delta_p would leave no precision")
        diff = self.phi_p() - self ** self.ctx.p
        p = self.ctx.p
        mod = p ** (self.prec - 1)
        c = []
        for col in diff.c:
            row = []
            for x in col:
                if x % p:
                    raise ArithmeticError("Fermat quotient not integral")
                row.append((x // p) % mod)
            c.append(row)
        return QSeries._norm(self.ctx, self.sign, self.M, self.prec - 1, 0, c)

    def integrate_dlog(self) -> "QSeries":
        """Divide the coefficient of q^n by n."""
        if any(col[0] for col in self.c):
            raise NonzeroConstantTerm("constant term must vanish")
        p = self.ctx.p
        vmax = 0
        while p ** (vmax + 1) <= self.M:
            vmax += 1
        prec = self.prec - vmax
        den = self.den + vmax
        if self.ctx.shift_budget is not None and den > self.ctx.shift_budget:
            raise ShiftBudgetExceeded(f"integration needs p^{den}, budget {self.ctx.shift_budget}")
        mod = p ** (prec + den)
        mults = [0] * (self.M + 1)
        for k in range(1, self.M + 1):
            v = vp_int(k, p)
            unit = k // p ** v
            mults[k] = pow(self.sign * unit, -1, mod) * p ** (vmax - v) % mod
        c = [[x * m for x, m in zip(col, mults)] for col in self.c]
        return QSeries._norm(self.ctx, self.sign, self.M, prec, den, c)

    def scale_q(self, zeta: Scalar) -> "QSeries":
        """Substitute q -> zeta*q for a root of unity zeta."""
        ctx = self.ctx
        zeta = ctx.scalar(zeta)
        if not is_root_of_unity(zeta):
            raise NotRootOfUnity(f"{zeta} is not a root of unity")
        prec = min(self.prec, zeta.prec)
        mod = ctx.p ** (prec + self.den)
        w = zeta.unit if self.sign == PLUS else zeta.inverse().unit
        w = tuple(x % mod for x in w)
        cur = tuple(x % mod for x in ctx._one_vec)
        c = [[0] * (self.M + 1) for _ in range(ctx.s)]
        for k in range(self.M + 1):
            vec = tuple(col[k] for col in self.c)
            if any(vec):
                out = ctx.vmul(vec, cur, mod)
                for i in range(ctx.s):
                    c[i][k] = out[i]
            cur = ctx.vmul(cur, w, mod)
        return QSeries._norm(ctx, self.sign, self.M, prec, self.den, c)

    def evaluate_at(self, q0: Scalar, target=None) -> Scalar:
        """Specialize q -> q0 with v(q0) >= 1."""
        ctx = self.ctx
        q0 = ctx.scalar(q0)
        if self.sign != PLUS:
            raise DirectionMismatch("evaluation needs a series in q")
        if not self.is_integral():
            raise NonIntegralCoefficient("evaluation implemented for integral series")
        nu = q0.valuation()
        if nu < 1:
            raise ValueError("q0 must have positive valuation")
        res = min(self.prec, nu * (self.M + 1) if nu != INF else INF, q0.prec)
        if target is not None and res < target:
            raise InsufficientTruncation(f"only {res} digits certified, {target} requested")
        if res < 1:
            raise InsufficientTruncation("no digits certified")
        mod = ctx.p ** res
        if q0.is_zero():
            return Scalar._make(ctx, tuple(col[0] for col in self.c), 0, res)
        qv = tuple((x * ctx.p ** nu) % mod for x in q0.unit)
        acc = ctx._zero_vec
        for k in range(self.M, -1, -1):
            acc = ctx.vmul(acc, qv, mod)
            acc = tuple((a + col[k]) % mod for a, col in zip(acc, self.c))
        return Scalar._make(ctx, acc, 0, res)

    def reduce_mod_p(self) -> "ResidueSeries":
        if not self.is_integral():
            raise NonIntegralCoefficient("reduction needs integral coefficients")
        p = self.ctx.p
        terms = {}
        for k in range(self.M + 1):
            vec = tuple(col[k] % p for col in self.c)
            if any(vec):
                terms[k] = ResidueElem(self.ctx, vec)
        return ResidueSeries(self.ctx, self.sign, self.M, terms)

    # -- comparison and text -------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            other = QSeries.constant(self.ctx, other, self.M, self.sign)
        if not isinstance(other, QSeries):
            return NotImplemented
        try:
            return (self - other).is_zero()
        except (ContextMismatch, DirectionMismatch):
            return False

    __hash__ = None

    def to_text(self) -> str:
        lines = [f"series p={self.ctx.p} s={self.ctx.s} N={self.prec} "
                 f"dir={_sign_text(self.sign)} M={self.M}"]
        for k in range(self.M + 1):
            if any(col[k] for col in self.c):
                n = self.sign * k
                lines.append(f"{n}: {self.coeff(n).to_text()}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, ctx: PadicContext = None) -> "QSeries":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ParseError("empty series text")
        m = re.match(r"^series\s+p=(\d+)\s+s=(\d+)\s+N=(-?\d+)\s+dir=([+-])\s+M=(\d+)$", lines[0])
        if not m:
            raise ParseError(f"bad series header {lines[0]!r}")
        p, s, N, d, M = int(m.group(1)), int(m.group(2)), int(m.group(3)), m.group(4), int(m.group(5))
        if ctx is None:
            ctx = PadicContext(p, s, max(N, 1))
        elif (ctx.p, ctx.s) != (p, s):
            raise ContextMismatch("series header does not match the context")
        sign = PLUS if d == "+" else MINUS
        coeffs = {}
        for ln in lines[1:]:
            mm = re.match(r"^(-?\d+)\s*:\s*(.+)$", ln)
            if not mm:
                raise ParseError(f"bad series line {ln!r}")
            n = int(mm.group(1))
            if n in coeffs:
                raise ParseError(f"duplicate exponent {n}")
            if abs(n) > M or (n != 0 and (n > 0) != (sign == PLUS)):
                raise ParseError(f"exponent {n} outside the window")
            coeffs[n] = Scalar.parse(ctx, mm.group(2))
        return cls.from_dict(ctx, coeffs, M, sign, prec=N)

    def __repr__(self):
        terms = []
        for n, a in sorted(self.coefficients().items(), key=lambda t: abs(t[0]))[:6]:
            terms.append(f"({a})q^{n}")
        tail = " + ..." if len(self.support()) > 6 else ""
        return f"QSeries[{' + '.join(terms) or '0'}{tail}; M={self.M}, prec={self.prec}]"


def _scale_cols(ctx, cols, unit, mod):
    s = ctx.s
    if s == 1:
        u = unit[0]
        return [[(x * u) % mod for x in cols[0]]]
    L = len(cols[0])
    out = [[0] * L for _ in range(s)]
    for k in range(L):
        vec = tuple(col[k] for col in cols)
        if any(vec):
            w = ctx.vmul(vec, unit, mod)
            for i in range(s):
                out[i][k] = w[i]
    return out


def is_root_of_unity(zeta: Scalar) -> bool:
    if not zeta.is_unit():
        return False
    return zeta ** (zeta.ctx.q_residue - 1) == 1


class ResidueSeries:
    """Series over the residue field, as produced by reduce_mod_p."""

    def __init__(self, ctx, sign, M, terms):
        self.ctx = ctx
        self.sign = sign
        self.M = M
        self.terms = {k: v for k, v in terms.items() if not v.is_zero() and k <= M}

    def coeff(self, n) -> ResidueElem:
        return self.terms.get(abs(n), ResidueElem(self.ctx, self.ctx._zero_vec))

    def support(self) -> set:
        return {self.sign * k for k in self.terms}

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other):
        if other.sign != self.sign:
            raise DirectionMismatch("series directions differ")

    def __add__(self, other):
        self._check(other)
        M = min(self.M, other.M)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return ResidueSeries(self.ctx, self.sign, M, out)

    def __neg__(self):
        return ResidueSeries(self.ctx, self.sign, self.M, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (ResidueElem, int)):
            return ResidueSeries(self.ctx, self.sign, self.M,
                                 {k: v * other for k, v in self.terms.items()})
        self._check(other)
        M = min(self.M, other.M)
        out = {}
        for i, a in self.terms.items():
            for j, b in other.terms.items():
                if i + j <= M:
                    out[i + j] = out[i + j] + a * b if i + j in out else a * b
        return ResidueSeries(self.ctx, self.sign, M, out)

    __rmul__ = __mul__

    def frobenius_power(self, t: int) -> "ResidueSeries":
        """The p^t-th power, which in characteristic p acts termwise."""
        step = self.ctx.p ** t
        return ResidueSeries(self.ctx, self.sign, self.M,
                             {k * step: v.frobenius(t) for k, v in self.terms.items()
                              if k * step <= self.M})

    def __eq__(self, other):
        if not isinstance(other, ResidueSeries):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        body = " + ".join(f"{v}q^{self.sign * k}" for k, v in sorted(self.terms.items())[:6])
        return f"ResidueSeries[{body or '0'}; M={self.M}]"


class GroupRingElem:
    """Finitely supported integer combination of roots of unity."""

    def __init__(self, ctx, weights=None):
        self.ctx = ctx
        self.w = {}
        for zeta, weight in (weights or {}).items() if isinstance(weights, dict) else weights or []:
            self._add(zeta, weight)

    def _add(self, zeta, weight):
        zeta = self.ctx.scalar(zeta)
        if not is_root_of_unity(zeta):
            raise NotRootOfUnity(f"{zeta} is not a root of unity")
        key = zeta.residue().vec
        if key in self.w:
            z, old = self.w[key]
            weight += old
        if weight:
            self.w[key] = (zeta, weight)
        else:
            self.w.pop(key, None)

    @classmethod
    def delta(cls, zeta, weight=1):
        zeta_ctx = zeta.ctx
        return cls(zeta_ctx, [(zeta, weight)])

    def items(self):
        return [self.w[k] for k in sorted(self.w)]

    def __add__(self, other):
        out = GroupRingElem(self.ctx, self.items())
        for z, wt in other.items():
            out._add(z, wt)
        return out

    def __mul__(self, other):
        """Convolution product in Z[mu(R)]."""
        out = GroupRingElem(self.ctx)
        for z1, w1 in self.items():
            for z2, w2 in other.items():
                out._add(_teich_of(z1 * z2), w1 * w2)
        return out

    def kappa(self, kappa: int) -> "GroupRingElem":
        """f^[kappa](zeta) = f(zeta^kappa)."""
        out = GroupRingElem(self.ctx)
        table = {k: wt for k, (z, wt) in self.w.items()}
        for zeta in self.ctx.roots_of_unity():
            key = (zeta ** kappa).residue().vec
            if key in table:
                out._add(zeta, table[key])
        return out

    def sharp(self) -> Scalar:
        total = self.ctx.zero()
        for z, wt in self.items():
            total = total + z * wt
        return total

    def __eq__(self, other):
        return isinstance(other, GroupRingElem) and \
            {k: v[1] for k, v in self.w.items()} == {k: v[1] for k, v in other.w.items()}

    __hash__ = None

    def __repr__(self):
        return "GroupRingElem(" + ", ".join(f"{wt}*[{z.residue()}]" for z, wt in self.items()) + ")"


def _teich_of(x: Scalar) -> Scalar:
    from .padic_core import teichmuller
    return teichmuller(x.residue())


# -- module level operations ----------------------------------------------------

def delta_q(u: QSeries) -> QSeries:
    return u.delta_q()


def phi_p_series(u: QSeries) -> QSeries:
    return u.phi_p()


def delta_p_series(u: QSeries) -> QSeries:
    return u.delta_p()


def integrate_dlog(u: QSeries) -> QSeries:
    return u.integrate_dlog()


def scale_q(u: QSeries, zeta: Scalar) -> QSeries:
    return u.scale_q(zeta)


def convolve(f: GroupRingElem, u: QSeries) -> QSeries:
    total = QSeries.zero(u.ctx, u.M, u.sign, u.prec)
    for zeta, wt in f.items():
        total = total + u.scale_q(zeta).scale(wt)
    return total


def group_ring_kappa(f: GroupRingElem, kappa: int) -> GroupRingElem:
    return f.kappa(kappa)


def group_ring_sharp(f: GroupRingElem) -> Scalar:
    return f.sharp()


def reduce_mod_p(u: QSeries) -> ResidueSeries:
    return u.reduce_mod_p()


def support(u) -> set:
    return u.support()


def is_short(S, p: int) -> bool:
    S = set(S)
    if not S:
        raise ValueError("shortness is defined for non-empty sets")
    if 0 in S:
        raise ValueError("0 is not allowed in a support set")
    pos = [n for n in S if n > 0]
    neg = [n for n in S if n < 0]
    if pos and neg:
        raise MixedSigns("support meets both signs")
    vals = [abs(n) for n in S]
    return Fraction(max(vals), min(vals)) < Fraction(p, 2)


def evaluate_at(u: QSeries, q0, target=None) -> Scalar:
    return u.evaluate_at(q0, target)


def compose_univariate(f: QSeries, u: QSeries) -> QSeries:
    """f(u) for f a series in T with f(0) = 0 and u of positive q-order."""
    if f.sign != PLUS:
        raise DirectionMismatch("the outer series must be a power series")
    if any(col[0] for col in f.c):
        raise NonzeroConstantTerm("outer series must have zero constant term")
    if any(col[0] for col in u.c):
        raise NonzeroConstantTerm("inner series must have zero constant term")
    order = u.q_order()
    if order == INF:
        return QSeries.zero(u.ctx, u.M, u.sign, min(u.prec, f.prec))
    M = min(u.M, (f.M + 1) * order - 1)
    u = u.truncate(M)
    top = min(f.M, M // order)
    acc = QSeries.constant(u.ctx, f.coeff(top), M, u.sign)
    for k in range(top - 1, 0, -1):
        acc = acc * u + f.coeff(k)
    return acc * u


def dwork_check(v: QSeries) -> dict:
    """Check Dwork's hypothesis phi(v)/v^p in 1 + pqR[[q]] and integrality of v."""
    ctx = v.ctx
    if not (v.coeff(0) - 1).is_zero():
        raise ValueError("v must be congruent to 1 mod q")
    num = v.phi_p()
    den = v ** ctx.p
    quotient = _series_quotient(num, den)
    hyp = quotient[0] - 1
    hypothesis = hyp.is_zero() and all(
        c.is_zero() or c.valuation() >= 1 for c in quotient[1:])
    conclusion = all(v.coeff(v.sign * k).is_integral() for k in range(v.M + 1))
    return {"hypothesis_holds": hypothesis, "conclusion_holds": conclusion,
            "precision": min(c.prec for c in quotient)}


def _series_quotient(a: QSeries, b: QSeries):
    """Coefficient list of a/b for b with constant term 1 (works over K)."""
    ctx = a.ctx
    M = min(a.M, b.M)
    A = [a.coeff(a.sign * k) for k in range(M + 1)]
    B = [b.coeff(b.sign * k) for k in range(M + 1)]
    b0inv = B[0].inverse()
    Q = []
    for n in range(M + 1):
        acc = A[n]
        for k in range(1, n + 1):
            if not B[k].is_zero() and not Q[n - k].is_zero():
                acc = acc - B[k] * Q[n - k]
        Q.append(acc * b0inv)
    return Q


def functional_equation_check(mus, f: QSeries) -> bool:
    """Is (mu_0 + sum_i (mu_i/p) phi_p^i) f integral to order M?"""
    ctx = f.ctx
    mus = [ctx.scalar(m) for m in mus]
    if not mus[0].is_unit():
        raise ValueError("mu_0 must be a unit")
    total = f.scale(mus[0])
    cur = f
    for mu in mus[1:]:
        cur = cur.phi_p()
        if not mu.is_zero():
            total = total + cur.scale(mu / ctx.p)
    return total.is_integral()
