import math
import random
from fractions import Fraction

import pytest

from arithpde.characters import (
    Character, EllipticPoint, ga_character, gm_character, ga_family, gm_family,
    elliptic_family, characteristic_integers, basic_coefficients, basic_series,
    apply_character, verify_diagonalization, diagonal_value, psi_q_of, psi_q_gm, psi_p_gm,
    psi_p_scalar, boundary_Bk0, group_combine, group_identity, convolve_point,
    reconstruct_from_boundary, solve_inhomogeneous, hensel_solve, bvp_at_q0, propagate,
    huygens_check, artin_schreier_witness, stationary_split, unit_decomposition, is_unmixed,
)
from arithpde.errors import (
    Degenerate, NotUnitSeries, NotFormalPoint, NonUnitLead, DatumOutsideRange,
    MultipleCharacteristicIntegers, SupportNotTotallyNonCharacteristic, ParseError,
)
from arithpde.formal_groups import WeierstrassCurve
from arithpde.opalg import pf_to_frechet
from arithpde.padic_core import PadicContext
from arithpde.qseries import QSeries, GroupRingElem, dwork_check, scale_q

M = 60


def convection(ctx, kappa=1):
    return ga_family(ctx, 1, 1, kappa)


def gm_convection(ctx, kappa=1):
    return gm_family(ctx, 1, [kappa])


@pytest.fixture(scope="module")
def curve():
    return WeierstrassCurve(1, 1, PadicContext(5, 1, 8))


@pytest.fixture(scope="module")
def ell_char(curve):
    # psi^1_q - psi^2_p, characteristic integer kappa = 1
    return elliptic_family(curve, 1, [-1])


def agree_to(a, b, k):
    d = a - b
    return all(d.coeff(n).is_zero() or d.coeff(n).valuation() >= k for n in range(d.M + 1))


def F(j, x):
    return math.prod(x ** i - 1 for i in range(1, j + 1))


class TestCharacteristicIntegers:
    def test_even_order_pair(self, ctx):
        for n in (1, 2, 3):
            ch = ga_family(ctx, 2, 1, n * n)
            assert characteristic_integers(ch).all == [-n, n]

    def test_gm_constant_lambda(self, ctx):
        ch = gm_character(ctx, "1", "3")
        assert characteristic_integers(ch).all == [3]

    def test_totally_noncharacteristic(self, ctx):
        data = characteristic_integers(ga_character(ctx, "xq - 1"))
        assert data.all == [1]
        assert data.is_totally_noncharacteristic(3)
        assert not data.is_totally_noncharacteristic(6)  # mu(0,6) = 5

    def test_exactness_flag(self, ctx):
        data = characteristic_integers(ga_family(ctx, 2, 1, 4))
        assert data.exact == {2: True, -2: True}

    def test_degenerate(self, ctx):
        with pytest.raises(Degenerate):
            characteristic_integers(ga_character(ctx, "xq + 5*xp - 5"))

    def test_elliptic(self, ell_char):
        assert characteristic_integers(ell_char).all == [1]


class TestBasicSeries:
    def test_convection_coefficients(self, ctx):
        b = basic_coefficients(convection(ctx, 1).mu, 1, 4)
        assert b[1] == ctx.scalar(Fraction(-1, 4))
        assert b[2] == ctx.scalar(Fraction(1, 96))
        for j in range(5):
            assert b[j] == ctx.scalar(Fraction((-1) ** j, F(j, 5)))

    def test_ga_support_and_value(self, ctx2):
        alpha = ctx2.generator() + 1
        sol = basic_series(convection(ctx2, 2), 2, alpha, M)
        assert sol.u.support() == {2, 10, 50}
        assert sol.u.coeff(2) == alpha
        assert sol.u.coeff(10) == alpha.frobenius() * Fraction(-1, 4)

    def test_gm_leading_terms(self, ctx2):
        alpha = ctx2.generator() + 2
        for kappa in (1, 2, 3):
            u = basic_series(gm_convection(ctx2, kappa), kappa, alpha, M).u
            assert u.coeff(0) == 1
            assert all(u.coeff(n).is_zero() for n in range(1, kappa))
            assert u.coeff(kappa) == alpha / kappa

    def test_gm_dwork_integrality(self, ctx):
        u = basic_series(gm_convection(ctx, 2), 2, 3, 125).u
        report = dwork_check(u)
        assert report["hypothesis_holds"] and report["conclusion_holds"]

    def test_elliptic_leading_term(self, ell_char):
        ctx = ell_char.ctx
        u = basic_series(ell_char, 1, 2, M).u
        assert u.is_integral()
        assert u.coeff(0).is_zero() and u.coeff(1) == 2

    def test_rejects_multiple_of_p(self, ctx):
        with pytest.raises(ValueError):
            basic_series(gm_convection(ctx, 5), 5, 1, M)


class TestApply:
    def test_plane_wave_frequency(self, ctx2):
        b = ctx2.generator() + 3
        u = QSeries.monomial(ctx2, 4, b, M)
        assert psi_q_gm(u) == QSeries.constant(ctx2, 4, M)
        assert psi_p_gm(u) == QSeries.constant(ctx2, psi_p_scalar(b), M)

    def test_psi_p_of_root_of_unity(self, ctx2):
        zeta = ctx2.roots_of_unity()[7]
        assert psi_p_scalar(zeta).is_zero()

    def test_psi_q_of_one_plus_q(self, ctx):
        u = QSeries.from_list(ctx, [1, 1] + [0] * (M - 1))
        expect = QSeries.from_list(ctx, [0] + [(-1) ** (n + 1) for n in range(1, M + 1)])
        assert psi_q_of("gm", u) == expect
        assert psi_q_of("ga", u) == u

    def test_psi_q_elliptic_recovers_additive_series(self, ell_char):
        sol = basic_series(ell_char, 1, 3, M)
        got = psi_q_of(ell_char, sol.point)
        assert got == sol.u_a.truncate(got.M).with_prec(got.prec)

    def test_gm_rejects_nonunit(self, ctx):
        with pytest.raises(NotUnitSeries):
            apply_character(gm_convection(ctx), QSeries.from_list(ctx, [5, 1]))

    def test_elliptic_rejects_nonformal(self, ell_char):
        with pytest.raises(NotFormalPoint):
            apply_character(ell_char, QSeries.one(ell_char.ctx, M))

    def test_torsion_tag_is_ignored(self, ell_char):
        u = basic_series(ell_char, 1, 1, M).u
        a = apply_character(ell_char, EllipticPoint(u, torsion="zeta"))
        assert a == apply_character(ell_char, EllipticPoint(u))

    def test_unit_decomposition(self, ctx2):
        zeta = ctx2.roots_of_unity()[3]
        lead = zeta * (1 + ctx2.scalar(5))
        u = QSeries.from_dict(ctx2, {2: lead, 3: 1}, M)
        d = unit_decomposition(u)
        assert d.n == 2 and d.zeta == zeta and d.lead == lead


class TestDiagonalization:
    @pytest.mark.parametrize("kappa", [1, 2, 3, -1, 7])
    def test_ga_kernel_and_noncharacteristic(self, ctx, kappa):
        ch = convection(ctx, 1)
        assert verify_diagonalization(ch, kappa, 3, M)

    @pytest.mark.parametrize("kappa", [1, 2, 3])
    def test_gm(self, ctx2, kappa):
        alpha = ctx2.generator() + 1
        ch = gm_convection(ctx2, 2)
        assert verify_diagonalization(ch, kappa, alpha, M)

    def test_characteristic_value_is_zero(self, ctx):
        ch = gm_convection(ctx, 2)
        assert apply_character(ch, basic_series(ch, 2, 4, M).u).is_zero()
        assert diagonal_value(ch, 2, 4, M).is_zero()

    def test_noncharacteristic_is_unit_multiple(self, ctx):
        ch = gm_convection(ctx, 2)
        val = apply_character(ch, basic_series(ch, 3, 1, M).u)
        assert val.support() == {3} and val.coeff(3).is_unit()

    @pytest.mark.parametrize("kappa", [1, 2])
    def test_elliptic(self, ell_char, kappa):
        assert verify_diagonalization(ell_char, kappa, 2, M)

    def test_alpha_zero(self, ctx):
        ch = gm_convection(ctx, 1)
        assert verify_diagonalization(ch, 1, 0, M)


class TestBoundaryAndReconstruction:
    def test_boundary_of_basic(self, ctx):
        for ch in (convection(ctx, 1), gm_convection(ctx, 1)):
            sol = basic_series(ch, 2, 7, M)
            assert boundary_Bk0(ch.kind, sol.u, 2) == 7
            assert boundary_Bk0(ch.kind, sol.u, 3).is_zero()
        assert boundary_Bk0("ga", QSeries.zero(ctx, M), 1).is_zero()

    def test_rebuild_single(self, ctx):
        ch = gm_convection(ctx, 1)
        u = basic_series(ch, 1, 6, M).u
        rec = reconstruct_from_boundary(ch, u)
        assert rec.pairs[0][0] == 1 and rec.pairs[0][1] == 6
        assert rec.residual_zero

    def test_rebuild_sum_of_two(self, ctx):
        ch = ga_family(ctx, 2, 1, 4)
        u = basic_series(ch, 2, 3, M).u
        assert reconstruct_from_boundary(ch, u).residual_zero
        for sign in (1, -1):
            us = [basic_series(ch, sign * 2, a, M).u for a in (2, 5)]
            rec = reconstruct_from_boundary(ch, us[0] + us[1])
            assert rec.residual_zero
            assert rec.pairs == [(sign * 2, ctx.scalar(7))]

    def test_rebuild_zero(self, ctx):
        ch = convection(ctx, 1)
        rec = reconstruct_from_boundary(ch, QSeries.zero(ctx, M))
        assert rec.residual_zero

    def test_rebuild_elliptic(self, ell_char):
        u = basic_series(ell_char, 1, 4, M).point
        assert reconstruct_from_boundary(ell_char, u).residual_zero

    def test_scale_covariance(self, ctx2):
        ch = gm_convection(ctx2, 1)
        alpha = ctx2.generator()
        zeta = ctx2.roots_of_unity()[5]
        left = basic_series(ch, 1, zeta * alpha, M).u
        right = scale_q(basic_series(ch, 1, alpha, M).u, zeta)
        # zeta * alpha is only known mod p^N, and exp divides by n! up to q^M
        assert agree_to(left, right, ctx2.N - 2)


class TestGroupStructure:
    def test_homomorphism_gm(self, ctx, rng):
        ch = gm_convection(ctx, 2)
        a = basic_series(ch, 1, 2, M).u
        b = basic_series(ch, 3, 1, M).u
        assert apply_character(ch, group_combine(ch, a, b)) == \
            apply_character(ch, a) + apply_character(ch, b)

    def test_homomorphism_elliptic(self, ell_char):
        a = basic_series(ell_char, 2, 1, M).point
        b = basic_series(ell_char, 3, 2, M).point
        lhs = apply_character(ell_char, group_combine(ell_char, a, b))
        rhs = apply_character(ell_char, a) + apply_character(ell_char, b)
        assert lhs == rhs.with_prec(lhs.prec)

    def test_equivariance(self, ctx2, rng):
        ch = gm_convection(ctx2, 2)
        roots = ctx2.roots_of_unity()
        f = GroupRingElem(ctx2, [(roots[2], 2), (roots[9], 1)])
        u = basic_series(ch, 1, ctx2.generator() + 1, M).u
        from arithpde.qseries import convolve
        assert apply_character(ch, convolve_point(ch, f, u)) == convolve(f, apply_character(ch, u))

    def test_identity(self, ctx):
        ch = gm_convection(ctx, 1)
        assert apply_character(ch, group_identity(ch, M)).is_zero()


class TestInhomogeneous:
    def test_single_term_inverts_diagonalization(self, ctx):
        ch = convection(ctx, 1)
        mu_at = ch.mu.at_zero(3)
        phi = QSeries.monomial(ctx, 3, mu_at, M)
        sol = solve_inhomogeneous(ch, phi)
        assert sol.u == basic_series(ch, 3, 1, M).u
        assert sol.residual_zero and sol.normalization_ok

    def test_zero(self, ctx):
        ch = gm_convection(ctx, 1)
        sol = solve_inhomogeneous(ch, QSeries.zero(ctx, M))
        assert sol.u == 1 and sol.residual_zero

    def test_two_terms(self, ctx, rng):
        ch = gm_convection(ctx, 1)
        phi = QSeries.from_dict(ctx, {2: rng.randrange(1, 100), 3: rng.randrange(1, 100)}, M)
        sol = solve_inhomogeneous(ch, phi)
        assert sol.residual_zero and sol.normalization_ok
        assert sol.short_support and sol.unmixed and sol.transcendence_hypothesis

    def test_rejects_characteristic_support(self, ctx):
        with pytest.raises(SupportNotTotallyNonCharacteristic):
            solve_inhomogeneous(convection(ctx, 1), QSeries.monomial(ctx, 1, 1, M))

    def test_unmixed(self, ctx):
        assert is_unmixed(convection(ctx).mu)
        assert not is_unmixed(ga_character(ctx, "xq + xp*xq - 1").mu)
        assert is_unmixed(ga_character(ctx, "xq + 5*xp*xq - 1").mu)


class TestHensel:
    def test_trivial(self, ctx):
        assert hensel_solve([ctx.one()], 7) == 7

    def test_two_terms(self, ctx2):
        c = [ctx2.one(), ctx2.scalar(5)]
        g = ctx2.generator() + 4
        alpha = hensel_solve(c, g)
        assert alpha + alpha.frobenius() * 5 == g

    def test_round_trip(self, ctx2, rng):
        for _ in range(50):
            c = [ctx2.random_unit(rng), ctx2.random_scalar(rng, min_val=1), ctx2.random_scalar(rng, min_val=2)]
            alpha = ctx2.random_scalar(rng)
            g = c[0] * alpha + c[1] * alpha.frobenius() + c[2] * alpha.frobenius(2)
            assert hensel_solve(c, g) == alpha

    def test_needs_unit_lead(self, ctx):
        with pytest.raises(NonUnitLead):
            hensel_solve([ctx.scalar(5)], 1)


class TestBVP:
    @pytest.mark.parametrize("make", [convection, gm_convection])
    def test_round_trip(self, ctx2, make):
        ch = make(ctx2, 1)
        alpha = ctx2.generator() + 2
        basic = basic_series(ch, 1, alpha, 125)
        for zeta in ctx2.roots_of_unity()[:6]:
            q0 = zeta * 5
            g = basic.u.evaluate_at(q0)
            sol = bvp_at_q0(ch, q0, g)
            diff = sol.alpha - alpha
            assert diff.is_zero() or diff.valuation() >= ctx2.N - 2

    def test_identity_datum(self, ctx):
        assert bvp_at_q0(convection(ctx), 5, 0).alpha.is_zero()
        sol = bvp_at_q0(gm_convection(ctx), 5, 1)
        assert sol.alpha.is_zero() and sol.u == 1

    def test_root_of_unity_datum(self, ctx2):
        zeta = ctx2.roots_of_unity()[4]
        sol = bvp_at_q0(gm_convection(ctx2), 5, zeta)
        assert sol.u == QSeries.constant(ctx2, zeta, 125)

    def test_datum_range(self, ctx):
        with pytest.raises(DatumOutsideRange):
            bvp_at_q0(convection(ctx), 5, 1)

    def test_needs_single_kappa(self, ctx):
        with pytest.raises(MultipleCharacteristicIntegers):
            bvp_at_q0(ga_character(ctx, "(xq-1)*(xq-2) + xp"), 5, 0)

    def test_propagate_identity(self, ctx):
        ch = convection(ctx)
        g = ctx.scalar(35)
        assert propagate(ch, 5, 5, g) == g

    @pytest.mark.parametrize("make", [convection, gm_convection])
    def test_huygens(self, ctx2, make):
        roots = ctx2.roots_of_unity()
        ch = make(ctx2, 1)
        rng = random.Random(3)
        assert huygens_check(ch, 5, ctx2.one(), ctx2.one(), samples=2, rng=rng)
        assert huygens_check(ch, 5, roots[3], roots[10], samples=3, rng=rng)


class TestArtinSchreier:
    def test_convection(self, ctx):
        ch = convection(ctx, 1)
        w = artin_schreier_witness(ch, basic_series(ch, 1, 3, M).u)
        assert w.verified and w.unmixed and w.degree == 5

    def test_gm_convection(self, ctx):
        ch = gm_convection(ctx, 1)
        w = artin_schreier_witness(ch, basic_series(ch, 1, 2, M).u)
        assert w.verified and w.degree == 5

    def test_heat_family_degree(self, ctx):
        ch = ga_family(ctx, 1, 2, 1)
        w = artin_schreier_witness(ch, basic_series(ch, 1, 1, M).u)
        assert w.verified and w.degree == 25

    def test_zero(self, ctx):
        assert artin_schreier_witness(convection(ctx), QSeries.zero(ctx, M)).verified


class TestStationarySplit:
    def test_constant_solution(self, ctx):
        ch = convection(ctx)
        c = QSeries.constant(ctx, 4, M)
        split = stationary_split(ch, c)
        assert split.stationary == c and split.moving.is_zero() and split.verified

    def test_basic_series(self, ctx):
        ch = gm_convection(ctx)
        u = basic_series(ch, 1, 2, M).u
        split = stationary_split(ch, u)
        assert split.stationary == 1 and split.moving == u and split.verified

    def test_torsion_times_basic(self, ctx2):
        ch = gm_convection(ctx2)
        zeta = ctx2.roots_of_unity()[6]
        u = basic_series(ch, 1, ctx2.generator(), M).u
        split = stationary_split(ch, u.scale(zeta))
        assert split.stationary == QSeries.constant(ctx2, zeta, M) and split.moving == u


class TestSymbolsOfFamilies:
    def test_frechet_equals_characteristic(self, ctx, curve):
        chars = [ga_family(ctx, r, s, 4) for r in (1, 2) for s in (1, 2)]
        chars += [gm_family(ctx, r, [1, 2]) for r in (1, 2)]
        chars += [elliptic_family(curve, 1, [-1]), elliptic_family(curve, 2, [1, 3])]
        for ch in chars:
            assert pf_to_frechet(ch.picard_fuchs) == ch.frechet_symbol
            if ch.kind != "ga":
                assert ch.frechet_symbol == ch.characteristic_polynomial

    def test_gm_formula(self, ctx):
        ch = gm_character(ctx, "xq + 2*xp", "3*xp + 1")
        expect = "(5*2*xp + xq)*xq + (15*xp + 1)*(xp - 1)"
        from arithpde.opalg import SymbolPoly
        assert ch.characteristic_polynomial == SymbolPoly.parse(ctx, expect)

    def test_elliptic_formula(self, curve, ell_char):
        from arithpde.opalg import SymbolPoly
        ctx = curve.ctx
        g1 = ell_char.gamma1
        assert ell_char.gamma0 == 1 and g1 == 3
        expect = SymbolPoly.parse(ctx, "xq - 5*xp^2 - 3*xp - 1")
        assert ell_char.characteristic_polynomial == expect


class TestText:
    def test_round_trip(self, ctx, ell_char):
        for ch in (convection(ctx), gm_convection(ctx, 2), ell_char):
            back = Character.parse(ctx, ch.to_text())
            assert back.kind == ch.kind
            assert back.characteristic_polynomial == ch.characteristic_polynomial

    def test_rejects(self, ctx):
        with pytest.raises(ParseError):
            Character.parse(ctx, "char kind=xx nu=xq")
        with pytest.raises(ParseError):
            Character.parse(ctx, "kind=ga nu=xq")
