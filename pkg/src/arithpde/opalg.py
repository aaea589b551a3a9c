"""Symbols, the operator ring A[phi_p, delta_q] and the {delta_p, delta_q}-jet ring.

Coefficients may be Scalars (constants, killed by delta_q) or QSeries
(where Frobenius means phi_p and delta_q acts as q d/dq).
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import comb

from .errors import DegreeExceeded, NotDivisible, ParseError
from .padic_core import PadicContext, Scalar
from .qseries import QSeries


# -- coefficient helpers ------------------------------------------------------

def _frob(x, times=1):
    if times == 0:
        return x
    if isinstance(x, QSeries):
        return x.phi_p(times)
    return x.frobenius(times)


def _dq(x, times=1):
    if times == 0:
        return x
    if isinstance(x, QSeries):
        for _ in range(times):
            x = x.delta_q()
        return x
    return None  # constants are killed


def _is_zero(x):
    return x is None or x.is_zero()


# -- symbols ---------------------------------------------------------------------

class SymbolPoly:
    """mu(xi_p, xi_q) = sum mu_ij xi_p^i xi_q^j."""

    def __init__(self, ctx: PadicContext, coeffs=None):
        self.ctx = ctx
        self.coeffs = {}
        for (i, j), a in (coeffs or {}).items():
            if not isinstance(a, QSeries):
                a = ctx.scalar(a)
            if not a.is_zero():
                self.coeffs[(i, j)] = a

    @classmethod
    def parse(cls, ctx: PadicContext, text: str) -> "SymbolPoly":
        text = text.strip()
        if text.startswith("sym"):
            return cls._parse_canonical(ctx, text)
        return cls(ctx, _SymbolParser(text, ctx.p).parse())

    @classmethod
    def _parse_canonical(cls, ctx, text):
        m = re.match(r"^sym\s*\{(.*)\}$", text, re.S)
        if not m:
            raise ParseError(f"bad symbol text {text!r}")
        body = m.group(1).strip()
        coeffs = {}
        if body:
            for part in re.split(r",\s*(?=\()", body):
                mm = re.match(r"^\((\d+),(\d+)\)\s*:\s*(.+)$", part.strip())
                if not mm:
                    raise ParseError(f"bad symbol entry {part!r}")
                coeffs[(int(mm.group(1)), int(mm.group(2)))] = Scalar.parse(ctx, mm.group(3))
        return cls(ctx, coeffs)

    def to_text(self) -> str:
        body = ", ".join(f"({i},{j}): {a.to_text()}" for (i, j), a in sorted(self.coeffs.items()))
        return "sym { " + body + " }" if body else "sym { }"

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.coeffs), default=0)

    def coeff(self, i, j):
        return self.coeffs.get((i, j), self.ctx.zero())

    def evaluate(self, xp, xq) -> Scalar:
        xp = self.ctx.scalar(xp)
        xq = self.ctx.scalar(xq)
        total = self.ctx.zero()
        for (i, j), a in self.coeffs.items():
            total = total + a * xp ** i * xq ** j
        return total

    def at_zero(self, n: int) -> Scalar:
        """mu(0, n), whose integer roots are the characteristic integers."""
        total = self.ctx.zero()
        for (i, j), a in self.coeffs.items():
            if i == 0:
                total = total + a * n ** j
        return total

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, a in other.coeffs.items():
            out[k] = out[k] + a if k in out else a
        return SymbolPoly(self.ctx, out)

    def __neg__(self):
        return SymbolPoly(self.ctx, {k: -a for k, a in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        """Commutative product of symbols (as polynomials)."""
        if not isinstance(other, SymbolPoly):
            a = self.ctx.scalar(other)
            return SymbolPoly(self.ctx, {k: c * a for k, c in self.coeffs.items()})
        out = {}
        for (i, j), a in self.coeffs.items():
            for (k, l), b in other.coeffs.items():
                key = (i + k, j + l)
                out[key] = out[key] + a * b if key in out else a * b
        return SymbolPoly(self.ctx, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SymbolPoly):
            return NotImplemented
        return not (self - other).coeffs

    __hash__ = None

    def __repr__(self):
        return f"SymbolPoly({self.to_text()})"


class _SymbolParser:
    """Recursive descent for sums of products of xp, xq, p and rationals."""

    TOKEN = re.compile(r"\s*(?:(\d+)|(xp|xq|ξp|ξq|ξ_p|ξ_q)|(p)|([-+*/^()−]))")

    def __init__(self, text, p):
        self.p = p
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = self.TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected input at {text[pos:]!r}")
            pos = m.end()
            if m.group(1):
                self.toks.append(("num", int(m.group(1))))
            elif m.group(2):
                self.toks.append(("var", "p" if m.group(2)[-1] == "p" else "q"))
            elif m.group(3):
                self.toks.append(("num", p))
            else:
                op = m.group(4)
                self.toks.append(("op", "-" if op == "−" else op))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self):
        poly = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input near token {self.i}")
        return poly

    def expr(self):
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        elif self.peek() == ("op", "+"):
            self.take()
        acc = _pscale(self.term(), sign)
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            acc = _padd(acc, _pscale(self.term(), 1 if op == "+" else -1))
        return acc

    def term(self):
        acc = self.power()
        while True:
            kind, val = self.peek()
            if (kind, val) == ("op", "*"):
                self.take()
                acc = _pmul(acc, self.power())
            elif (kind, val) == ("op", "/"):
                self.take()
                d = self.power()
                if set(d) != {(0, 0)} or d[(0, 0)] == 0:
                    raise ParseError("division only by nonzero rationals")
                acc = _pscale(acc, 1 / d[(0, 0)])
            elif kind in ("num", "var") or (kind, val) == ("op", "("):
                acc = _pmul(acc, self.power())
            else:
                return acc

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, e = self.take()
            if kind != "num":
                raise ParseError("exponent must be a non-negative integer")
            out = {(0, 0): Fraction(1)}
            for _ in range(e):
                out = _pmul(out, base)
            return out
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return {(0, 0): Fraction(val)}
        if kind == "var":
            return {(1, 0) if val == "p" else (0, 1): Fraction(1)}
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ParseError("missing ')'")
            return inner
        raise ParseError(f"unexpected token {val!r}")


def _padd(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v}


def _pscale(a, c):
    return {k: v * c for k, v in a.items() if v * c}


def _pmul(a, b):
    out = {}
    for (i, j), x in a.items():
        for (k, l), y in b.items():
            out[(i + k, j + l)] = out.get((i + k, j + l), 0) + x * y
    return {k: v for k, v in out.items() if v}


def mu_p_twist(mu: SymbolPoly, times: int = 1) -> SymbolPoly:
    """mu(p xi_p, xi_q)."""
    p = mu.ctx.p
    return SymbolPoly(mu.ctx, {(i, j): a * p ** (i * times) for (i, j), a in mu.coeffs.items()})


def pf_to_frechet(sigma: SymbolPoly) -> SymbolPoly:
    """theta with sigma(p xi_p, xi_q) = p theta."""
    twisted = mu_p_twist(sigma)
    out = {}
    for key, a in twisted.coeffs.items():
        if a.valuation() < 1:
            raise NotDivisible(f"coefficient of xi^{key} is not divisible by p")
        out[key] = a / sigma.ctx.p
    return SymbolPoly(sigma.ctx, out)


# -- operators -------------------------------------------------------------------

class OperatorElem:
    """sum a_ij phi_p^i delta_q^j with coefficients on the left."""

    def __init__(self, ctx: PadicContext, coeffs=None):
        self.ctx = ctx
        self.coeffs = {}
        for key, a in (coeffs or {}).items():
            if not isinstance(a, QSeries):
                a = ctx.scalar(a)
            if not a.is_zero():
                self.coeffs[key] = a

    @classmethod
    def identity(cls, ctx):
        return cls(ctx, {(0, 0): 1})

    @classmethod
    def phi(cls, ctx, i=1):
        return cls(ctx, {(i, 0): 1})

    @classmethod
    def dq(cls, ctx, j=1):
        return cls(ctx, {(0, j): 1})

    @classmethod
    def coefficient(cls, ctx, a):
        return cls(ctx, {(0, 0): a})

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, a in other.coeffs.items():
            out[k] = _coef_add(out[k], a) if k in out else a
        return OperatorElem(self.ctx, out)

    def __neg__(self):
        return OperatorElem(self.ctx, {k: -a for k, a in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, OperatorElem):
            return op_mul(self, other)
        return OperatorElem(self.ctx, {k: a * other for k, a in self.coeffs.items()})

    def __rmul__(self, other):
        return OperatorElem(self.ctx, {k: _coef_mul(other, a) for k, a in self.coeffs.items()})

    def apply(self, u: QSeries) -> QSeries:
        return operator_apply(self, u)

    def __call__(self, u):
        return operator_apply(self, u)

    def __eq__(self, other):
        if not isinstance(other, OperatorElem):
            return NotImplemented
        return not (self - other).coeffs

    __hash__ = None

    def __repr__(self):
        terms = [f"({a})phi^{i}dq^{j}" for (i, j), a in sorted(self.coeffs.items())]
        return "OperatorElem(" + " + ".join(terms or ["0"]) + ")"


def _coef_add(a, b):
    if isinstance(a, QSeries) or not isinstance(b, QSeries):
        return a + b
    return b + a


def _coef_mul(a, b):
    if isinstance(a, QSeries) and not isinstance(b, QSeries):
        return a.scale(b)
    if isinstance(b, QSeries) and not isinstance(a, QSeries):
        return b.scale(a)
    return a * b


def symbol_to_operator(mu: SymbolPoly) -> OperatorElem:
    return OperatorElem(mu.ctx, dict(mu.coeffs))


def operator_to_symbol(op: OperatorElem) -> SymbolPoly:
    return SymbolPoly(op.ctx, dict(op.coeffs))


def op_mul(a: OperatorElem, b: OperatorElem) -> OperatorElem:
    """Normal-form product using dq.phi = p phi.dq, phi.c = c^phi phi, [dq, c] = dq(c)."""
    p = a.ctx.p
    out = {}
    for (i, j), x in a.coeffs.items():
        for (k, l), y in b.coeffs.items():
            for t in range(j + 1):
                dy = _dq(y, t)
                if _is_zero(dy):
                    continue
                c = _coef_mul(x, _frob(dy, i))
                c = _coef_mul(c, comb(j, t) * p ** (k * (j - t)))
                key = (i + k, j - t + l)
                out[key] = _coef_add(out[key], c) if key in out else c
    return OperatorElem(a.ctx, out)


def operator_apply(op: OperatorElem, u: QSeries) -> QSeries:
    """sum a_ij phi_p^i (delta_q^j u)."""
    total = None
    dq_cache = {0: u}
    for (i, j), a in sorted(op.coeffs.items()):
        if j not in dq_cache:
            top = max(dq_cache)
            cur = dq_cache[top]
            for jj in range(top + 1, j + 1):
                cur = cur.delta_q()
                dq_cache[jj] = cur
        term = dq_cache[j].phi_p(i)
        term = term.scale(a) if not isinstance(a, QSeries) else a * term
        total = term if total is None else total + term
    if total is None:
        return QSeries.zero(u.ctx, u.M, u.sign, u.prec)
    return total


def symbol_right_action(theta: SymbolPoly, b) -> SymbolPoly:
    """theta . b, the symbol of the composite x -> theta(phi_p, delta_q)(b x)."""
    prod = op_mul(symbol_to_operator(theta), OperatorElem.coefficient(theta.ctx, b))
    return operator_to_symbol(prod)


def adjunction_ad_r(Q: SymbolPoly, r: int):
    """sum (-1)^j p^(-ij) phi_p^(r-i) delta_q^j b_ij."""
    if Q.degree > r or any(i > r for i, _ in Q.coeffs):
        raise DegreeExceeded(f"symbol of degree {Q.degree} exceeds r={r}")
    p = Q.ctx.p
    total = None
    for (i, j), b in sorted(Q.coeffs.items()):
        term = _dq(b, j)
        if _is_zero(term):
            continue
        term = _frob(term, r - i)
        factor = Fraction((-1) ** j, p ** (i * j))
        term = term.scale(factor) if isinstance(term, QSeries) else term * factor
        total = term if total is None else _coef_add(total, term)
    return Q.ctx.zero() if total is None else total


def euler_lagrange_energy(group: str, a, b, c, ctx: PadicContext, gamma0=None):
    """Euler-Lagrange data of the quadratic energy a f_q^2 + 2b f_p f_q + c f_p^2.

    Returns (nu, lam) where nu is a symbol in (xi_p, xi_q) acting on the
    q-character and lam a symbol in xi_p acting on the p-character.  For the
    elliptic case gamma0 is the Frobenius constant of the curve (the regime
    whose p-character has symbol xi_p + gamma0).
    """
    a, b, c = ctx.scalar(a), ctx.scalar(b), ctx.scalar(c)
    nu = SymbolPoly(ctx, {(1, 1): -2 * a.frobenius(), (2, 0): -2 * b.frobenius(), (0, 0): 2 * b})
    if group == "gm":
        lam = SymbolPoly(ctx, {(1, 0): -2 * c.frobenius(), (0, 0): 2 * c})
    elif group == "elliptic":
        if gamma0 is None:
            raise ValueError("elliptic energy needs gamma0")
        g0 = ctx.scalar(gamma0)
        lam = SymbolPoly(ctx, {(1, 0): 2 * c.frobenius() * g0.frobenius(), (0, 0): 2 * c})
    else:
        raise ValueError(f"unsupported group {group!r}")
    return nu, lam


# -- jets ----------------------------------------------------------------------------

class JetPoly:
    """Polynomial in the jet variables y^(i,j) = delta_p^i delta_q^j y.

    Monomials are sorted tuples of ((i, j), exponent) pairs.
    """

    def __init__(self, ctx: PadicContext, terms=None):
        self.ctx = ctx
        self.terms = {}
        for mono, a in (terms or {}).items():
            a = ctx.scalar(a)
            if not a.is_zero():
                self.terms[tuple(sorted(mono))] = a

    @classmethod
    def var(cls, ctx, i=0, j=0):
        return cls(ctx, {(((i, j), 1),): 1})

    @classmethod
    def const(cls, ctx, a):
        return cls(ctx, {(): a})

    def __add__(self, other):
        if not isinstance(other, JetPoly):
            other = JetPoly.const(self.ctx, other)
        out = dict(self.terms)
        for m, a in other.terms.items():
            out[m] = out[m] + a if m in out else a
        return JetPoly(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return JetPoly(self.ctx, {m: -a for m, a in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, JetPoly):
            other = JetPoly.const(self.ctx, other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, JetPoly):
            a = self.ctx.scalar(other)
            return JetPoly(self.ctx, {m: c * a for m, c in self.terms.items()})
        out = {}
        for m1, a in self.terms.items():
            for m2, b in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out[m] + a * b if m in out else a * b
        return JetPoly(self.ctx, out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = JetPoly.const(self.ctx, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def variables(self):
        return sorted({v for m in self.terms for v, _ in m})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, JetPoly):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        parts = []
        for m, a in sorted(self.terms.items()):
            mono = "*".join(f"y{i}{j}^{e}" if e > 1 else f"y{i}{j}" for (i, j), e in m)
            parts.append(f"({a})" + (f"*{mono}" if mono else ""))
        return "JetPoly(" + " + ".join(parts or ["0"]) + ")"


def _mono_mul(m1, m2):
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def jet_phi_p(P: JetPoly) -> JetPoly:
    """Ring endomorphism with y^(i,j) -> (y^(i,j))^p + p y^(i+1,j)."""
    ctx = P.ctx
    p = ctx.p
    images = {}
    total = JetPoly(ctx)
    for m, a in P.terms.items():
        term = JetPoly.const(ctx, a.frobenius())
        for v, e in m:
            if v not in images:
                images[v] = JetPoly.var(ctx, *v) ** p + JetPoly.var(ctx, v[0] + 1, v[1]) * p
            term = term * images[v] ** e
        total = total + term
    return total


def jet_delta_p(P: JetPoly) -> JetPoly:
    diff = jet_phi_p(P) - P ** P.ctx.p
    p = P.ctx.p
    return JetPoly(P.ctx, {m: a / p for m, a in diff.terms.items()})


def _jet_dq_var(ctx, v, cache):
    if v in cache:
        return cache[v]
    i, j = v
    if i == 0:
        out = JetPoly.var(ctx, 0, j + 1)
    else:
        prev = (i - 1, j)
        inner = _jet_dq_var(ctx, prev, cache)
        out = jet_phi_p(inner) - JetPoly.var(ctx, *prev) ** (ctx.p - 1) * inner
    cache[v] = out
    return out


def jet_delta_q(P: JetPoly) -> JetPoly:
    """Derivation extending delta_q y^(0,j) = y^(0,j+1); constants are killed."""
    ctx = P.ctx
    cache = {}
    total = JetPoly(ctx)
    for m, a in P.terms.items():
        for idx, (v, e) in enumerate(m):
            rest = list(m)
            if e == 1:
                rest.pop(idx)
            else:
                rest[idx] = (v, e - 1)
            term = JetPoly(ctx, {tuple(rest): a * e}) * _jet_dq_var(ctx, v, cache)
            total = total + term
    return total


def jet_evaluate(P: JetPoly, u: QSeries) -> QSeries:
    """Substitute y^(i,j) -> delta_p^i delta_q^j u."""
    cache = {}

    def value(v):
        if v not in cache:
            i, j = v
            if i == 0:
                cur = u
                for _ in range(j):
                    cur = cur.delta_q()
            else:
                cur = value((i - 1, j)).delta_p()
            cache[v] = cur
        return cache[v]

    total = QSeries.zero(u.ctx, u.M, u.sign, u.prec)
    for m, a in P.terms.items():
        term = QSeries.constant(u.ctx, a, u.M, u.sign)
        for v, e in m:
            term = term * value(v) ** e
        total = total + term
    return total
