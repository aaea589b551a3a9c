import random
from fractions import Fraction

import pytest

from arithpde.characters import psi_p_scalar
from arithpde.errors import NotRootOfUnity, TorsionAtIdentity, DatumOutsideRange
from arithpde.formal_groups import WeierstrassCurve, formal_log
from arithpde.padic_core import PadicContext
from arithpde.qseries import QSeries
from arithpde.tate import (
    TateEquations, TateParams, TatePoint, divisor_sum, eisenstein, tate_curve, specialize_curve,
    torsion_embed, cubic_residual, chord_add, points_equal, torsion_is_homomorphism,
    tate_formal_log, tate_bvp, solution_value, tate_propagate, tate_huygens_check,
    specialize_at_q0,
)

M = 40


def brute_sigma(n, m):
    return sum(d ** m for d in range(1, n + 1) if n % d == 0)


def agree_to(a, b, k):
    d = a.truncate(min(a.M, b.M)) - b.truncate(min(a.M, b.M))
    return all(d.coeff(n).is_zero() or d.coeff(n).valuation() >= k for n in range(d.M + 1))


def equations(ctx, eta, beta=1, M=M):
    return TateEquations(TateParams.make(ctx, beta=beta, eta=eta, M=M))


class TestCurve:
    def test_divisor_sums(self):
        assert all(divisor_sum(n, m) == brute_sigma(n, m) for n in range(1, 60) for m in (1, 3, 5))

    def test_eisenstein_leading_terms(self, ctx):
        e4, e6 = eisenstein(ctx, 5)
        assert [e4.coeff(n) for n in range(4)] == [1, 240, 2160, 6720]
        assert [e6.coeff(n) for n in range(4)] == [1, -504, -16632, -122976]

    def test_constant_terms(self, ctx):
        E = tate_curve(ctx, 10)
        assert E.a4.coeff(0) == ctx.scalar(Fraction(-1, 48))
        assert E.a6.coeff(0) == ctx.scalar(Fraction(1, 864))

    def test_beta_scales_q(self, ctx):
        beta = ctx.scalar(3)
        e4, _ = eisenstein(ctx, 10, beta)
        plain, _ = eisenstein(ctx, 10)
        assert all(e4.coeff(n) == plain.coeff(n) * beta ** n for n in range(11))

    def test_specialization(self, ctx):
        E = specialize_curve(tate_curve(ctx, 30), 5)
        e4 = 1 + 240 * sum(brute_sigma(n, 3) * 5 ** n for n in range(1, 12))
        e6 = 1 - 504 * sum(brute_sigma(n, 5) * 5 ** n for n in range(1, 12))
        assert E.a4 == ctx.scalar(Fraction(-e4, 48))
        assert E.a6 == ctx.scalar(Fraction(e6, 864))


class TestTorsion:
    def test_constant_term(self, ctx2):
        for zeta in ctx2.roots_of_unity():
            if not (zeta - 1).is_unit():
                continue
            P = torsion_embed(ctx2, zeta, 10)
            assert P.x.coeff(0) == zeta / (1 - zeta) ** 2 + Fraction(1, 12)

    def test_on_curve(self, ctx2):
        E = tate_curve(ctx2, M)
        for zeta in ctx2.roots_of_unity()[1:8]:
            if (zeta - 1).is_unit():
                assert cubic_residual(E, torsion_embed(ctx2, zeta, M)).is_zero()

    def test_on_curve_with_beta(self, ctx):
        beta = ctx.scalar(2)
        E = tate_curve(ctx, M, beta)
        zeta = ctx.roots_of_unity()[2]
        assert cubic_residual(E, torsion_embed(ctx, zeta, M, beta)).is_zero()

    def test_homomorphism(self, ctx):
        assert torsion_is_homomorphism(ctx, 30)

    def test_doubling(self, ctx):
        E = tate_curve(ctx, 30)
        zeta = ctx.roots_of_unity()[1]
        P = torsion_embed(ctx, zeta, 30)
        assert points_equal(chord_add(E, P, P), torsion_embed(ctx, zeta * zeta, 30))

    def test_rejects(self, ctx2):
        with pytest.raises(TorsionAtIdentity):
            torsion_embed(ctx2, 1, 10)
        with pytest.raises(NotRootOfUnity):
            torsion_embed(ctx2, 2, 10)


class TestLog:
    def test_constant_term_is_the_curve_at_zero(self, ctx):
        L, log = tate_formal_log(TateParams.make(ctx, M=30), 30)
        flat = formal_log(WeierstrassCurve(Fraction(-1, 48), Fraction(1, 864), L), 20)
        def at_zero(c):
            return c.coeff(0) if isinstance(c, QSeries) else c
        assert all(at_zero(log.coeff(n)) == flat.coeff(n) for n in range(2, 21))
        assert log.coeff(1) == 1

    def test_log_of_basic_series(self, ctx):
        eq = equations(ctx, 1, M=30)
        sol = eq.basic_series(1, 2, 30)
        L, ell = eq.log_of(sol.u)
        got = ell.to_ctx(ctx)
        assert agree_to(got, sol.u_a.integrate_dlog(), ctx.N - 2)


class TestEquations:
    def test_eta_from_beta(self, ctx):
        P = TateParams.make(ctx, beta=2)
        assert P.eta == psi_p_scalar(ctx.scalar(2))
        assert TateParams.make(ctx, beta=2, c=3).eta == P.eta * 3
        assert TateParams.make(ctx, beta=ctx.roots_of_unity()[1]).eta.is_zero()

    def test_rejects_nonunits(self, ctx):
        with pytest.raises(ValueError):
            TateParams.make(ctx, beta=5)
        with pytest.raises(ValueError):
            TateParams.make(ctx, gamma=5)

    @pytest.mark.parametrize("eta,kappa", [(1, 1), (1, 3), (Fraction(1, 2), 2), (3, 4)])
    def test_diagonalization(self, ctx, eta, kappa):
        eq = equations(ctx, eta)
        sol = eq.basic_series(kappa, 2, M)
        expect = QSeries.monomial(ctx, kappa, (eq.params.eta * kappa + 1) * 2 / kappa, M)
        r = eq.psi1_pq(sol.u)
        assert r == expect.truncate(r.M).with_prec(r.prec)

    def test_basic_leading_term(self, ctx):
        sol = equations(ctx, 1).basic_series(2, 3, M)
        assert sol.u.coeff(1).is_zero()
        assert sol.u.coeff(2) == ctx.scalar(Fraction(3, 2))
        assert sol.u.is_integral()

    @pytest.mark.parametrize("kappa", [1, 2, 3])
    def test_quantized_solution(self, ctx, kappa):
        eq = equations(ctx, Fraction(-1, kappa))
        rep = eq.quantize(64, M)
        assert rep.kappa == kappa and rep.verified
        assert eq.psi1_pq(eq.basic_series(kappa, 7, M).u).is_zero()

    def test_only_zero(self, ctx):
        rep = equations(ctx, 1).quantize(64, M)
        assert rep.only_zero and rep.basis is None

    def test_torsion_beta_only_zero(self, ctx):
        eq = TateEquations(TateParams.make(ctx, beta=ctx.roots_of_unity()[2], M=M))
        assert eq.params.eta.is_zero()
        rep = eq.quantize(64, M)
        assert rep.only_zero and all(v == 0 for _, v in rep.pivots)

    def test_characteristic_set(self, ctx):
        assert equations(ctx, Fraction(-1, 3)).characteristic_set() == [3]
        assert equations(ctx, 1).characteristic_set() == [-1]

    @pytest.mark.parametrize("kappa", [1, 2])
    def test_wave(self, ctx, kappa):
        eq = equations(ctx, Fraction(-1, kappa))
        u = eq.basic_series(kappa, 3, M).u
        assert eq.wave(u, kappa ** 3).is_zero()
        assert not eq.wave(u, kappa ** 3 + 1).is_zero()

    def test_relations(self, ctx):
        eq = equations(ctx, None, beta=2, M=30)
        rng = random.Random(11)
        for _ in range(3):
            u = QSeries.random(ctx, rng, 30, constant=False)
            assert eq.first_relation_residual(u).is_zero()
            assert eq.second_relation_residual(u).is_zero()

    def test_torsion_tag_drops_out(self, ctx):
        eq = equations(ctx, 1)
        u = eq.basic_series(1, 1, M).u
        assert eq.psi1_pq(TatePoint(u, ctx.roots_of_unity()[1])) == eq.psi1_pq(u)

    def test_rejects_points_off_the_formal_group(self, ctx):
        with pytest.raises(ValueError):
            equations(ctx, 1).psi1_pq(QSeries.one(ctx, 10))


class TestBoundaryValues:
    def test_round_trip(self, ctx):
        eq = equations(ctx, -1)
        q0 = ctx.scalar(5)
        alpha = ctx.scalar(3)
        g = solution_value(eq, 1, alpha, q0)
        sol = tate_bvp(eq, 1, q0, g, with_series=False)
        assert (sol.alpha - alpha).is_zero() or (sol.alpha - alpha).valuation() >= ctx.N - 2

    def test_value_matches_series(self, ctx):
        eq = equations(ctx, -1, M=60)
        sol = eq.basic_series(1, 2, 60)
        q0 = ctx.scalar(5)
        direct = specialize_at_q0(sol.point, q0).formal
        assert (direct - solution_value(eq, 1, 2, q0)).valuation() >= ctx.N - 1

    def test_datum_range(self, ctx):
        with pytest.raises(DatumOutsideRange):
            tate_bvp(equations(ctx, -1), 2, 5, 5, with_series=False)

    def test_propagate_identity(self, ctx):
        eq = equations(ctx, -1)
        a = ctx.scalar(7)
        assert tate_propagate(eq, 1, 5, 5, a) == a

    def test_huygens_log_coordinate(self, ctx2):
        eq = equations(ctx2, -1)
        roots = ctx2.roots_of_unity()
        assert tate_huygens_check(eq, 1, 5, roots[3], roots[7], samples=3, rng=random.Random(1))
