from fractions import Fraction

import pytest

from arithpde.characters import ga_character, basic_series, energy_character, characteristic_integers
from arithpde.errors import DegreeExceeded, NotDivisible, ParseError
from arithpde.opalg import (
    SymbolPoly, OperatorElem, JetPoly, symbol_to_operator, operator_apply, op_mul,
    mu_p_twist, pf_to_frechet, adjunction_ad_r, euler_lagrange_energy,
    symbol_right_action, jet_delta_p, jet_delta_q, jet_evaluate, jet_phi_p,
)
from arithpde.qseries import QSeries

M = 30


def sym(ctx, text):
    return SymbolPoly.parse(ctx, text)


def random_operator(ctx, rng, degree=2, constant=True):
    coeffs = {}
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            if constant:
                coeffs[(i, j)] = ctx.random_scalar(rng)
            else:
                coeffs[(i, j)] = QSeries.random(ctx, rng, M)
    return OperatorElem(ctx, coeffs)


class TestSymbols:
    def test_grammar(self, ctx):
        mu = sym(ctx, "xq^2 + 3*xp*xq - 1/2")
        assert mu.coeff(0, 2) == ctx.one()
        assert mu.coeff(1, 1) == ctx.scalar(3)
        assert mu.coeff(0, 0) == ctx.scalar(Fraction(-1, 2))
        assert sym(ctx, "ξq−ξp+1") == sym(ctx, "xq - xp + 1")
        assert sym(ctx, "p*xp") == sym(ctx, "5*xp")
        assert sym(ctx, "(xp+1)^2") == sym(ctx, "xp^2 + 2*xp + 1")

    def test_canonical_text_round_trip(self, ctx2):
        mu = sym(ctx2, "xq^2 + 7*xp^2 - 3*xp + 1/3")
        text = mu.to_text()
        assert text.startswith("sym { (0,0):")
        assert SymbolPoly.parse(ctx2, text) == mu
        assert SymbolPoly.parse(ctx2, "sym { }") == SymbolPoly(ctx2)

    @pytest.mark.parametrize("bad", ["xq +", "xz", "(xp", "sym { (1): 2 }"])
    def test_grammar_rejects(self, ctx, bad):
        with pytest.raises(ParseError):
            sym(ctx, bad)

    def test_at_zero(self, ctx):
        mu = sym(ctx, "xq^2 - 4 + 4*xp")
        assert mu.at_zero(2).is_zero() and mu.at_zero(-2).is_zero()
        assert mu.at_zero(3) == ctx.scalar(5)


class TestOperators:
    def test_transcription(self, ctx):
        assert symbol_to_operator(sym(ctx, "1")) == OperatorElem.identity(ctx)
        assert symbol_to_operator(sym(ctx, "xq")) == OperatorElem.dq(ctx)
        assert symbol_to_operator(sym(ctx, "xp*xq")) == op_mul(OperatorElem.phi(ctx), OperatorElem.dq(ctx))

    def test_apply_examples(self, ctx2):
        mono = QSeries.monomial(ctx2, 4, 1, M)
        assert operator_apply(OperatorElem.dq(ctx2), mono) == QSeries.monomial(ctx2, 4, 4, M)
        a = ctx2.generator() + 1
        op = OperatorElem.phi(ctx2) - OperatorElem.identity(ctx2)
        assert operator_apply(op, QSeries.constant(ctx2, a, M)) == a.frobenius() - a

    def test_convection_kills_its_basic_series(self, ctx):
        for kappa in (1, 2, 3):
            ch = ga_character(ctx, f"xq + {kappa}*xp - {kappa}")
            u = basic_series(ch, kappa, 1, M).u
            op = symbol_to_operator(ch.mu)
            assert operator_apply(op, u).is_zero()

    def test_defining_relations(self, ctx2):
        dq, phi = OperatorElem.dq(ctx2), OperatorElem.phi(ctx2)
        assert op_mul(dq, phi) == op_mul(phi, dq) * ctx2.scalar(5)
        a = ctx2.generator() + 2
        coef = OperatorElem.coefficient(ctx2, a)
        assert op_mul(phi, coef) == op_mul(OperatorElem.coefficient(ctx2, a.frobenius()), phi)
        q = QSeries.monomial(ctx2, 1, 1, M)
        cq = OperatorElem.coefficient(ctx2, q)
        commutator = op_mul(dq, cq) - op_mul(cq, dq)
        assert commutator == OperatorElem.coefficient(ctx2, q.delta_q())

    def test_twist_formula(self, ctx2, rng):
        dq = OperatorElem.dq(ctx2)
        for _ in range(5):
            mu = random_operator(ctx2, rng)
            sym_mu = SymbolPoly(ctx2, mu.coeffs)
            twisted = symbol_to_operator(mu_p_twist(sym_mu))
            assert op_mul(dq, mu) == op_mul(twisted, dq)

    def test_twist_formula_on_series(self, ctx, rng):
        mu = sym(ctx, "xp*xq + 2*xp^2 - xq + 3")
        lhs_op = op_mul(OperatorElem.dq(ctx), symbol_to_operator(mu))
        rhs_op = op_mul(symbol_to_operator(mu_p_twist(mu)), OperatorElem.dq(ctx))
        for _ in range(50):
            u = QSeries.random(ctx, rng, M)
            assert operator_apply(lhs_op, u) == operator_apply(rhs_op, u)

    def test_product_is_associative(self, ctx, rng):
        for _ in range(3):
            a = random_operator(ctx, rng, 1, constant=False)
            b = random_operator(ctx, rng, 1, constant=False)
            c = random_operator(ctx, rng, 1, constant=False)
            assert op_mul(op_mul(a, b), c) == op_mul(a, op_mul(b, c))

    def test_product_matches_composition(self, ctx, rng):
        a = random_operator(ctx, rng, 2)
        b = random_operator(ctx, rng, 2)
        u = QSeries.random(ctx, rng, M)
        assert operator_apply(op_mul(a, b), u) == operator_apply(a, operator_apply(b, u))

    def test_right_action_property(self, ctx, rng):
        theta = sym(ctx, "xp*xq + xq^2 - 2")
        b = QSeries.random(ctx, rng, M)
        right = symbol_right_action(theta, b)
        u = QSeries.random(ctx, rng, M)
        lhs = operator_apply(symbol_to_operator(theta), b * u)
        assert lhs == operator_apply(symbol_to_operator(right), u)


class TestTwistsAndFrechet:
    def test_twist_examples(self, ctx):
        assert mu_p_twist(sym(ctx, "xq")) == sym(ctx, "xq")
        assert mu_p_twist(sym(ctx, "xp")) == sym(ctx, "5*xp")
        mu = sym(ctx, "xp^2*xq + xp - 3")
        assert mu_p_twist(mu_p_twist(mu)) == mu_p_twist(mu, 2) == sym(ctx, "625*xp^2*xq + 25*xp - 3")

    def test_pf_to_frechet_examples(self, ctx):
        assert pf_to_frechet(sym(ctx, "xp - p")) == sym(ctx, "xp - 1")
        assert pf_to_frechet(sym(ctx, "p*xq")) == sym(ctx, "xq")
        g1, g0 = 3, 1
        got = pf_to_frechet(sym(ctx, f"xp^2 + {g1}*xp + {g0}*p"))
        assert got == sym(ctx, f"p*xp^2 + {g1}*xp + {g0}")

    def test_pf_to_frechet_rejects(self, ctx):
        with pytest.raises(NotDivisible):
            pf_to_frechet(sym(ctx, "xq + 1"))


class TestAdjunction:
    def test_examples(self, ctx2):
        assert adjunction_ad_r(sym(ctx2, "xp"), 1) == ctx2.one()
        assert adjunction_ad_r(sym(ctx2, "xq"), 1).is_zero()
        b = ctx2.generator() + 3
        assert adjunction_ad_r(SymbolPoly(ctx2, {(0, 0): b}), 1) == b.frobenius()
        with pytest.raises(DegreeExceeded):
            adjunction_ad_r(sym(ctx2, "xp^2"), 1)

    def test_frobenius_step(self, ctx2, rng):
        for _ in range(5):
            coeffs = {(i, j): QSeries.random(ctx2, rng, M)
                      for i in range(2) for j in range(2 - i)}
            Q = SymbolPoly(ctx2, coeffs)
            assert adjunction_ad_r(Q, 2) == adjunction_ad_r(Q, 1).phi_p()


class TestEulerLagrange:
    def test_only_p_part(self, ctx):
        nu, lam = euler_lagrange_energy("gm", 0, 0, 3, ctx)
        assert nu == SymbolPoly(ctx)
        assert lam == sym(ctx, "-6*xp + 6")

    @pytest.mark.parametrize("b,c", [(1, 2), (2, 6), (3, 1), (2, 3)])
    def test_gm_characteristic_integers(self, ctx, b, c):
        ch = energy_character("gm", 1, b, c, ctx)
        expect = {Fraction(c, b)} & set(Fraction(k) for k in range(-64, 65))
        assert set(characteristic_integers(ch, 64).all) == {int(x) for x in expect}

    def test_nondegenerate_when_c_unit(self, ctx):
        assert energy_character("gm", 1, 0, 1, ctx).is_nondegenerate()
        assert not energy_character("gm", 1, 0, 5, ctx).is_nondegenerate()


class TestJets:
    def test_generators(self, ctx):
        y = JetPoly.var(ctx)
        assert jet_delta_p(y) == JetPoly.var(ctx, 1, 0)
        assert jet_delta_q(y) == JetPoly.var(ctx, 0, 1)
        y01, y11 = JetPoly.var(ctx, 0, 1), JetPoly.var(ctx, 1, 1)
        expect = y01 ** 5 + y11 * 5 - y ** 4 * y01
        assert jet_delta_q(JetPoly.var(ctx, 1, 0)) == expect

    def test_phi_on_variables(self, ctx):
        y = JetPoly.var(ctx)
        assert jet_phi_p(y) == y ** 5 + JetPoly.var(ctx, 1, 0) * 5

    def test_evaluation_is_a_morphism(self, ctx, rng):
        y = JetPoly.var(ctx)
        polys = [y, JetPoly.var(ctx, 1, 0), y * JetPoly.var(ctx, 0, 1) + 3,
                 y ** 2 - JetPoly.var(ctx, 0, 1) * 2]
        for P in polys:
            u = QSeries.random(ctx, rng, M)
            assert jet_evaluate(jet_delta_q(P), u) == jet_evaluate(P, u).delta_q()
            assert jet_evaluate(jet_delta_p(P), u) == jet_evaluate(P, u).delta_p()
        u = QSeries.random(ctx, rng, M)
        assert jet_evaluate(y, u) == u
        assert jet_evaluate(JetPoly.var(ctx, 1, 0), u) == u.delta_p()
