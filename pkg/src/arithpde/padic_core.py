"""Truncated unramified p-adic arithmetic.

Elements of W(F_{p^s}) are stored in the polynomial basis 1, x, ..., x^{s-1}
of Z_p[x]/(f), where f is the lexicographically least monic irreducible
polynomial of degree s over F_p, lifted with coefficients in [0, p).

A ``Scalar`` carries a valuation shift ``val``, a unit mantissa known modulo
p^(prec - val) and an absolute precision ``prec``.  Relative precision is
capped at the context precision N, so negative shifts (elements of the
fraction field K) are supported without losing significant digits.
"""

from __future__ import annotations

import math
import random
import re
from fractions import Fraction
from functools import lru_cache

from .errors import (
    ContextMismatch,
    DivisionByNonUnit,
    NotOneUnit,
    ParseError,
    PrecisionExhausted,
    ShiftBudgetExceeded,
)

INF = math.inf


def vp_int(n: int, p: int) -> float:
    """p-adic valuation of an integer (INF for 0)."""
    if n == 0:
        return INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


# -- polynomials over F_p, used only to pick and certify the modulus --------

def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, b, p):
    a = list(a)
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        _ptrim(a)
    return a


def _pmulmod(a, b, f, p):
    out = [0] * (len(a) + len(b) - 1 if a and b else 0)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _pmod(_ptrim(out), f, p)


def _ppowmod(a, e, f, p):
    result = [1]
    base = _pmod(a, f, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, f, p)
        base = _pmulmod(base, base, f, p)
        e >>= 1
    return result


def _pgcd(a, b, p):
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible_mod_p(f, p) -> bool:
    """Rabin's test for a monic polynomial given low-to-high."""
    s = len(f) - 1
    if s == 1:
        return True
    x = [0, 1]
    xq = _ppowmod(x, p ** s, f, p)
    if _ptrim([(c - d) % p for c, d in _zip_pad(xq, x)]):
        return False
    for ell in _prime_factors(s):
        h = _ppowmod(x, p ** (s // ell), f, p)
        diff = _ptrim([(c - d) % p for c, d in _zip_pad(h, x)])
        if len(_pgcd(f, diff, p)) != 1:
            return False
    return True


def _zip_pad(a, b):
    n = max(len(a), len(b))
    return zip(list(a) + [0] * (n - len(a)), list(b) + [0] * (n - len(b)))


def least_irreducible(p: int, s: int):
    """Least monic irreducible of degree s, ordering by (c_{s-1}, ..., c_0)."""
    if s == 1:
        return (0, 1)
    for code in range(p ** s):
        digits = []
        for _ in range(s):
            digits.append(code % p)
            code //= p
        # code runs through (c_{s-1}, ..., c_0) in lexicographic order
        coeffs = digits + [1]
        if coeffs[0] == 0:
            continue
        if is_irreducible_mod_p(coeffs, p):
            return tuple(coeffs)
    raise ValueError("no irreducible polynomial found")


class PadicContext:
    """Parameters (p, s, N) plus the derived modulus and Frobenius data.

    Contexts are interned: equal parameters give the same object.
    """

    _cache: dict = {}

    def __new__(cls, p: int, s: int = 1, N: int = 8, shift_budget=None):
        key = (p, s, N, shift_budget)
        obj = cls._cache.get(key)
        if obj is not None:
            return obj
        if not is_prime(p) or p < 3:
            raise ValueError(f"p must be an odd prime, got {p}")
        if s < 1 or N < 1:
            raise ValueError("need s >= 1 and N >= 1")
        obj = super().__new__(cls)
        obj._setup(p, s, N, shift_budget)
        cls._cache[key] = obj
        return obj

    def _setup(self, p, s, N, shift_budget):
        self.p = p
        self.s = s
        self.N = N
        self.shift_budget = shift_budget
        self.modulus = least_irreducible(p, s)
        if not is_irreducible_mod_p(list(self.modulus), p):
            raise ValueError("modulus is not irreducible")
        # x^{s+k} = sum_i red[k][i] x^i over Z
        red = []
        cur = [(-c) for c in self.modulus[:s]]
        for _ in range(max(s - 1, 0)):
            red.append(tuple(cur))
            top = cur[-1]
            cur = [0] + cur[:-1]
            cur = [c + top * (-m) for c, m in zip(cur, self.modulus[:s])]
        self._red = red
        self._frob_prec = 0
        self._frob_cols = None
        self._zero_vec = (0,) * s
        self._one_vec = (1,) + (0,) * (s - 1)

    def __repr__(self):
        return f"PadicContext(p={self.p}, s={self.s}, N={self.N})"

    def __reduce__(self):
        return (PadicContext, (self.p, self.s, self.N, self.shift_budget))

    @property
    def q_residue(self) -> int:
        return self.p ** self.s

    def with_precision(self, N: int) -> "PadicContext":
        return PadicContext(self.p, self.s, N, self.shift_budget)

    def lift(self, extra: int) -> "PadicContext":
        return self.with_precision(self.N + extra)

    def compatible(self, other: "PadicContext") -> bool:
        return self.p == other.p and self.s == other.s

    def check_budget(self, shift):
        if self.shift_budget is not None and shift < -self.shift_budget:
            raise ShiftBudgetExceeded(
                f"shift {shift} exceeds budget {self.shift_budget}")

    # -- vector arithmetic in Z[x]/(f) modulo an integer ---------------------

    def vmul(self, a, b, mod):
        if self.s == 1:
            return ((a[0] * b[0]) % mod,)
        s = self.s
        prod = [0] * (2 * s - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        for k in range(2 * s - 2, s - 1, -1):
            c = prod[k]
            if c:
                r = self._red[k - s]
                for i in range(s):
                    prod[i] += c * r[i]
        return tuple(x % mod for x in prod[:s])

    def vadd(self, a, b, mod):
        return tuple((x + y) % mod for x, y in zip(a, b))

    def vsub(self, a, b, mod):
        return tuple((x - y) % mod for x, y in zip(a, b))

    def vscale(self, a, c, mod):
        return tuple((x * c) % mod for x in a)

    def vpow(self, a, e, mod):
        result = tuple(x % mod for x in self._one_vec)
        base = a
        while e:
            if e & 1:
                result = self.vmul(result, base, mod)
            base = self.vmul(base, base, mod)
            e >>= 1
        return result

    def vval(self, a):
        v = INF
        p = self.p
        for x in a:
            if x:
                k = 0
                while x % p == 0:
                    x //= p
                    k += 1
                if k < v:
                    v = k
        return v

    def vinv(self, a, k):
        """Inverse of a unit vector modulo p^k."""
        p = self.p
        if self.s == 1:
            return (pow(a[0], -1, p ** k),)
        y = self.vpow(tuple(x % p for x in a), self.q_residue - 2, p)
        prec = 1
        while prec < k:
            prec = min(2 * prec, k)
            mod = p ** prec
            ay = self.vmul(a, y, mod)
            two_minus = tuple((-x) % mod for x in ay)
            two_minus = ((two_minus[0] + 2) % mod,) + two_minus[1:]
            y = self.vmul(y, two_minus, mod)
        return tuple(x % p ** k for x in y)

    def _eval_modulus(self, r, mod):
        acc = tuple(x % mod for x in self._one_vec)
        acc = self.vscale(acc, self.modulus[-1], mod)
        for c in reversed(self.modulus[:-1]):
            acc = self.vmul(acc, r, mod)
            acc = (((acc[0] + c) % mod),) + acc[1:]
        return acc

    def _eval_modulus_deriv(self, r, mod):
        s = self.s
        dcoef = [i * self.modulus[i] for i in range(1, s + 1)]
        acc = (dcoef[-1] % mod,) + (0,) * (s - 1)
        for c in reversed(dcoef[:-1]):
            acc = self.vmul(acc, r, mod)
            acc = (((acc[0] + c) % mod),) + acc[1:]
        return acc

    def _frobenius_columns(self, k):
        """Columns phi(x^i), i < s, modulo p^k."""
        if self._frob_cols is not None and self._frob_prec >= k:
            mod = self.p ** k
            return [tuple(x % mod for x in col) for col in self._frob_cols]
        p, s = self.p, self.s
        kk = max(k, 2 * self._frob_prec, 16)
        if s == 1:
            cols = [(1,)]
        else:
            mod1 = p
            x = (0, 1) + (0,) * (s - 2)
            r = self.vpow(x, p, mod1)
            prec = 1
            while prec < kk:
                prec = min(2 * prec, kk)
                mod = p ** prec
                fr = self._eval_modulus(r, mod)
                dfr = self._eval_modulus_deriv(r, mod)
                corr = self.vmul(fr, self.vinv(dfr, prec), mod)
                r = self.vsub(r, corr, mod)
            mod = p ** kk
            cols = [tuple(x % mod for x in self._one_vec)]
            for _ in range(1, s):
                cols.append(self.vmul(cols[-1], r, mod))
        self._frob_cols = cols
        self._frob_prec = kk
        return self._frobenius_columns(k)

    def frob_vec(self, a, k, times: int = 1):
        """Apply phi^times to a vector modulo p^k."""
        if self.s == 1:
            return (a[0] % (self.p ** k),)
        times %= self.s
        if times == 0:
            return tuple(x % self.p ** k for x in a)
        cols = self._frobenius_columns(k)
        mod = self.p ** k
        for _ in range(times):
            out = [0] * self.s
            for ai, col in zip(a, cols):
                if ai:
                    for i in range(self.s):
                        out[i] += ai * col[i]
            a = tuple(x % mod for x in out)
        return a

    # -- constructors ---------------------------------------------------------

    def scalar(self, x) -> "Scalar":
        if isinstance(x, Scalar):
            if x.ctx is not self:
                raise ContextMismatch(f"{x.ctx} vs {self}")
            return x
        if isinstance(x, bool):
            x = int(x)
        if isinstance(x, int):
            if x == 0:
                return self.zero()
            return Scalar._make(self, (x,) + (0,) * (self.s - 1), 0, INF)
        if isinstance(x, Fraction):
            if x == 0:
                return self.zero()
            num = self.scalar(x.numerator)
            den = self.scalar(x.denominator)
            return num / den
        if isinstance(x, (tuple, list)):
            if len(x) != self.s:
                raise ValueError("vector length must equal s")
            return Scalar._make(self, tuple(int(c) for c in x), 0, self.N)
        if isinstance(x, str):
            return Scalar.parse(self, x)
        raise TypeError(f"cannot convert {type(x).__name__} to Scalar")

    def zero(self, prec=INF) -> "Scalar":
        return Scalar(self, prec, self._zero_vec, prec)

    def one(self) -> "Scalar":
        return self.scalar(1)

    def generator(self) -> "Scalar":
        """The class of x in the polynomial basis (a lift of a field generator)."""
        if self.s == 1:
            return self.zero()
        return self.scalar((0, 1) + (0,) * (self.s - 2))

    def random_scalar(self, rng: random.Random, integral: bool = True,
                      min_val: int = 0) -> "Scalar":
        mod = self.p ** self.N
        vec = tuple(rng.randrange(mod) for _ in range(self.s))
        shift = min_val if integral else rng.randint(-2, 2)
        return Scalar._make(self, vec, shift, shift + self.N)

    def random_unit(self, rng: random.Random) -> "Scalar":
        while True:
            a = self.random_scalar(rng)
            if a.val == 0:
                return a

    def residue(self, vec) -> "ResidueElem":
        return ResidueElem(self, tuple(int(c) % self.p for c in vec))

    def residue_elements(self):
        """All elements of F_{p^s} in a fixed order."""
        p, s = self.p, self.s
        out = []
        for code in range(p ** s):
            digits = []
            for _ in range(s):
                digits.append(code % p)
                code //= p
            out.append(ResidueElem(self, tuple(digits)))
        return out

    def roots_of_unity(self):
        """Teichmuller lifts of all nonzero residues, in a fixed order."""
        return _roots_of_unity(self)


@lru_cache(maxsize=None)
def _roots_of_unity(ctx):
    return tuple(teichmuller(r) for r in ctx.residue_elements() if not r.is_zero())


class ResidueElem:
    """Element of the residue field F_{p^s}."""

    __slots__ = ("ctx", "vec")

    def __init__(self, ctx: PadicContext, vec):
        self.ctx = ctx
        self.vec = tuple(int(c) % ctx.p for c in vec)

    def _coerce(self, other):
        if isinstance(other, ResidueElem):
            return other
        if isinstance(other, int):
            return ResidueElem(self.ctx, (other,) + (0,) * (self.ctx.s - 1))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ResidueElem(self.ctx, self.ctx.vadd(self.vec, other.vec, self.ctx.p))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ResidueElem(self.ctx, self.ctx.vsub(self.vec, other.vec, self.ctx.p))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return ResidueElem(self.ctx, tuple(-c for c in self.vec))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ResidueElem(self.ctx, self.ctx.vmul(self.vec, other.vec, self.ctx.p))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return ResidueElem(self.ctx, self.ctx.vpow(self.vec, e, self.ctx.p))

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("residue 0 is not invertible")
        return self ** (self.ctx.q_residue - 2)

    def frobenius(self, times: int = 1):
        return self ** (self.ctx.p ** times)

    def is_zero(self) -> bool:
        return not any(self.vec)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.vec == other.vec

    def __hash__(self):
        return hash(self.vec)

    def __repr__(self):
        if self.ctx.s == 1:
            return f"F({self.vec[0]})"
        return f"F{list(self.vec)}"


_SCALAR_RE = re.compile(
    r"^p\^(-?\d+)\*\[([0-9,\-]*)\]@(-?\d+|inf)$")


class Scalar:
    """Element of K = W(F_{p^s})[1/p] known modulo p^prec."""

    __slots__ = ("ctx", "val", "unit", "prec")

    def __init__(self, ctx, val, unit, prec):
        self.ctx = ctx
        self.val = val
        self.unit = unit
        self.prec = prec

    @staticmethod
    def _make(ctx: PadicContext, vec, shift, prec) -> "Scalar":
        """Normalize the value p^shift * vec known modulo p^prec."""
        p = ctx.p
        if prec == INF:
            v = ctx.vval(vec)
            if v == INF:
                return ctx.zero()
            prec = shift + v + ctx.N
        k = prec - shift
        if k <= 0:
            return Scalar(ctx, prec, ctx._zero_vec, prec)
        mod = p ** k
        vec = tuple(c % mod for c in vec)
        v = ctx.vval(vec)
        if v >= k:
            return Scalar(ctx, prec, ctx._zero_vec, prec)
        if v:
            pv = p ** v
            vec = tuple(c // pv for c in vec)
        e = shift + v
        ctx.check_budget(e)
        rel = min(prec - e, ctx.N)
        prec = e + rel
        modr = p ** rel
        return Scalar(ctx, e, tuple(c % modr for c in vec), prec)

    # -- basic predicates -----------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.unit)

    def is_exact_zero(self) -> bool:
        return self.prec == INF

    def valuation(self):
        return INF if self.is_zero() else self.val

    def is_unit(self) -> bool:
        return not self.is_zero() and self.val == 0

    def is_integral(self) -> bool:
        return self.is_zero() and self.prec >= 0 or self.val >= 0

    @property
    def rel_prec(self):
        return self.prec - self.val

    def as_vector(self, den: int = 0, prec=None):
        """Integer vector V with value = V / p^den, reduced mod p^(prec+den)."""
        prec = self.prec if prec is None else prec
        e = self.val + den
        if self.is_zero():
            return self.ctx._zero_vec
        if e < 0:
            raise ValueError("denominator too small for this scalar")
        mod = self.ctx.p ** (prec + den) if prec != INF else None
        pe = self.ctx.p ** e
        if mod is None:
            return tuple(c * pe for c in self.unit)
        return tuple((c * pe) % mod for c in self.unit)

    def _coerce(self, other):
        if isinstance(other, Scalar):
            if other.ctx is not self.ctx:
                raise ContextMismatch(f"{self.ctx} vs {other.ctx}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.scalar(other)
        return NotImplemented

    # -- ring operations ------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_exact_zero():
            return self
        if self.is_exact_zero():
            return other
        ctx = self.ctx
        prec = min(self.prec, other.prec)
        e = min(self.val, other.val)
        p = ctx.p
        k = prec - e
        if k <= 0:
            return ctx.zero(prec)
        mod = p ** k
        a = self.unit if self.val == e else ctx.vscale(self.unit, p ** (self.val - e), mod)
        b = other.unit if other.val == e else ctx.vscale(other.unit, p ** (other.val - e), mod)
        return Scalar._make(ctx, ctx.vadd(a, b, mod), e, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero():
            return self
        mod = self.ctx.p ** self.rel_prec
        return Scalar(self.ctx, self.val, tuple((-c) % mod for c in self.unit), self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        ctx = self.ctx
        if self.is_exact_zero() or other.is_exact_zero():
            return ctx.zero()
        prec = min(self.prec + other.val, other.prec + self.val)
        e = self.val + other.val
        if self.is_zero() or other.is_zero():
            return ctx.zero(prec)
        k = prec - e
        mod = ctx.p ** k
        return Scalar._make(ctx, ctx.vmul(self.unit, other.unit, mod), e, prec)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        rel = self.rel_prec
        u = self.ctx.vinv(self.unit, rel)
        self.ctx.check_budget(-self.val)
        return Scalar(self.ctx, -self.val, u, -self.val + rel)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def div_by_unit(self, other) -> "Scalar":
        other = self._coerce(other)
        if not other.is_unit():
            raise DivisionByNonUnit(f"{other} is not a unit")
        return self * other.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.ctx.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def mul_p_power(self, k: int) -> "Scalar":
        """Exact multiplication by p^k (k may be negative)."""
        if self.is_zero():
            return Scalar(self.ctx, self.prec + k, self.unit, self.prec + k) \
                if self.prec != INF else self
        self.ctx.check_budget(self.val + k)
        return Scalar(self.ctx, self.val + k, self.unit, self.prec + k)

    def with_prec(self, prec) -> "Scalar":
        """Reduce the absolute precision (never increases it)."""
        if prec >= self.prec:
            return self
        return Scalar._make(self.ctx, self.unit, self.val, prec)

    def to_ctx(self, ctx: PadicContext) -> "Scalar":
        """Move to a context with the same p, s; precision is clipped, never invented."""
        if ctx is self.ctx:
            return self
        if not ctx.compatible(self.ctx):
            raise ContextMismatch(f"{self.ctx} vs {ctx}")
        if self.is_exact_zero():
            return ctx.zero()
        if self.is_zero():
            return ctx.zero(self.prec)
        return Scalar._make(ctx, self.unit, self.val, self.prec)

    def lift_exact(self, ctx: PadicContext) -> "Scalar":
        """Reinterpret the stored representative in a (usually finer) context.

        The representative is taken as exact; use this only for inputs whose
        lift is canonical (integers, Teichmuller digits, user data).
        """
        if self.is_zero():
            return ctx.zero()
        return Scalar._make(ctx, self.unit, self.val, INF)

    def lift_rational(self, ctx: PadicContext) -> "Scalar":
        """Lift through the simplest rational congruent to each coordinate.

        Symbols and curve data are almost always small rationals; this lifts
        them to what they were meant to be rather than to their digits.
        Coordinates without a small rational form keep their digits.
        """
        if self.is_zero():
            return ctx.zero()
        rel = self.prec - self.val if self.prec != INF else self.ctx.N
        mod = self.ctx.p ** rel
        total = ctx.zero()
        for i, d in enumerate(self.unit):
            if d == 0:
                continue
            r = rational_reconstruct(d, mod, self.ctx.p)
            coord = ctx.scalar(r if r is not None else d)
            basis = Scalar._make(ctx, tuple(1 if k == i else 0 for k in range(ctx.s)), 0, INF)
            total = total + coord * basis
        return total.mul_p_power(self.val)

    # -- Frobenius and friends ------------------------------------------------

    def frobenius(self, times: int = 1) -> "Scalar":
        if self.is_zero() or self.ctx.s == 1:
            return self
        u = self.ctx.frob_vec(self.unit, self.rel_prec, times)
        return Scalar(self.ctx, self.val, u, self.prec)

    def delta_p(self) -> "Scalar":
        if not self.is_integral():
            raise ValueError("delta_p needs an integral argument")
        if self.prec - 1 < 1:
            raise PrecisionExhausted("delta_p would leave no precision")
        diff = self.frobenius() - self ** self.ctx.p
        # the difference is divisible by p in exact arithmetic
        diff = diff.with_prec(self.prec)
        return diff.mul_p_power(-1)

    def residue(self) -> ResidueElem:
        if not self.is_integral():
            from .errors import NonIntegralCoefficient
            raise NonIntegralCoefficient(f"{self} is not integral")
        if self.prec < 1:
            raise PrecisionExhausted("no residue digit known")
        if self.is_zero() or self.val > 0:
            return ResidueElem(self.ctx, self.ctx._zero_vec)
        return ResidueElem(self.ctx, self.unit)

    # -- comparison and text --------------------------------------------------

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except ContextMismatch:
            return False
        if other is NotImplemented:
            return False
        return (self - other).is_zero()

    def __ne__(self, other):
        return not self == other

    __hash__ = None

    def to_text(self) -> str:
        digits = ",".join(str(c) for c in self.unit)
        prec = "inf" if self.prec == INF else str(self.prec)
        val = self.val if self.prec != INF else 0
        return f"p^{val} * [{digits}] @{prec}"

    @staticmethod
    def parse(ctx: PadicContext, text: str) -> "Scalar":
        t = "".join(text.split())
        m = _SCALAR_RE.match(t)
        if m:
            val = int(m.group(1))
            digits = [int(d) for d in m.group(2).split(",") if d != ""]
            if len(digits) != ctx.s:
                raise ParseError(f"expected {ctx.s} digits in {text!r}")
            if m.group(3) == "inf":
                if any(digits):
                    raise ParseError("only zero may carry infinite precision")
                return ctx.zero()
            prec = int(m.group(3))
            return Scalar._make(ctx, tuple(digits), val, prec)
        try:
            return ctx.scalar(Fraction(t))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"cannot parse scalar {text!r}") from exc

    def rational_lift(self):
        """Integer R (s = 1, integral) in (-p^k/2, p^k/2] congruent to self."""
        if self.ctx.s != 1:
            raise ValueError("rational lift only for s = 1")
        if self.is_zero():
            return 0
        mod = self.ctx.p ** self.prec
        v = (self.unit[0] * self.ctx.p ** self.val) % mod if self.val >= 0 else None
        if v is None:
            raise ValueError("not integral")
        return v - mod if v > mod // 2 else v

    def __repr__(self):
        return self.to_text()


def teichmuller(r: ResidueElem) -> Scalar:
    """Multiplicative lift of a residue: the root of x^(p^s) = x above it."""
    ctx = r.ctx
    if r.is_zero():
        return ctx.zero()
    mod = ctx.p ** ctx.N
    x = tuple(r.vec)
    q = ctx.q_residue
    for _ in range(ctx.N):
        nxt = ctx.vpow(x, q, mod)
        if nxt == x:
            break
        x = nxt
    return Scalar._make(ctx, x, 0, ctx.N)


def frobenius(a: Scalar) -> Scalar:
    return a.frobenius()


def delta_p_scalar(a: Scalar) -> Scalar:
    return a.delta_p()


def valuation(a: Scalar):
    return a.valuation()


def padic_log_unit(u: Scalar) -> Scalar:
    """log(u) for u in 1 + pR by the Mercator series."""
    ctx = u.ctx
    if not u.is_integral() or u.residue() != ResidueElem(ctx, ctx._one_vec):
        raise NotOneUnit(f"{u} is not congruent to 1 mod p")
    x = u - 1
    if x.is_zero():
        return x
    vx = x.val
    target = u.prec
    total = ctx.zero()
    power = ctx.one()
    n = 0
    while True:
        n += 1
        power = power * x
        # later terms have valuation at least n*vx - log_p(n)
        if n * vx - math.log(n, ctx.p) >= target + 1 and n > 1:
            break
        term = power / n
        total = total + term if n % 2 else total - term
    return total.with_prec(target)


def rational_reconstruct(a: int, mod: int, p: int):
    """r/t = a mod `mod` with |r|, |t| <= sqrt(mod/2) and p not dividing t, or None."""
    a %= mod
    bound = int((mod // 2) ** 0.5)
    r0, r1, t0, t1 = mod, a, 0, 1
    while r1 > bound:
        k = r0 // r1
        r0, r1 = r1, r0 - k * r1
        t0, t1 = t1, t0 - k * t1
    if t1 == 0 or abs(t1) > bound or t1 % p == 0:
        return None
    return Fraction(r1, t1)
