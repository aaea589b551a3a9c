"""Property tests over randomly drawn series, scalars and characteristic integers."""

from hypothesis import given, settings, strategies as st, HealthCheck

from arithpde.characters import (
    apply_character, basic_series, convolve_point, ga_family, gm_family, group_combine,
    hensel_solve, psi_q_of, verify_diagonalization,
)
from arithpde.opalg import operator_apply, symbol_to_operator
from arithpde.padic_core import PadicContext
from arithpde.qseries import GroupRingElem, QSeries, convolve, scale_q
from arithpde.tate import TateEquations, TateParams

CTX = PadicContext(5, 1, 8)
CTX2 = PadicContext(5, 2, 8)
M = 25
MOD = 5 ** 8

common = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

coeffs = st.lists(st.integers(0, MOD - 1), min_size=M + 1, max_size=M + 1)
units = st.integers(1, MOD - 1).filter(lambda x: x % 5)
pairs = st.lists(st.tuples(st.integers(0, MOD - 1), st.integers(0, MOD - 1)),
                 min_size=M + 1, max_size=M + 1)


def series(values, ctx=CTX):
    return QSeries.from_list(ctx, values)


def series2(values):
    return QSeries.from_list(CTX2, [CTX2.scalar(list(v)) for v in values])


def gm_unit(values):
    return series([1] + values[1:])


def formal_point(values):
    return series([0] + values[1:])


@common
@given(coeffs, coeffs)
def test_gm_character_is_a_homomorphism(a, b):
    ch = gm_family(CTX, 1, [2])
    u, v = gm_unit(a), gm_unit(b)
    assert apply_character(ch, u * v) == apply_character(ch, u) + apply_character(ch, v)


@common
@given(coeffs, coeffs)
def test_ga_character_is_additive(a, b):
    ch = ga_family(CTX, 2, 1, 4)
    u, v = series(a), series(b)
    assert apply_character(ch, u + v) == apply_character(ch, u) + apply_character(ch, v)


@common
@given(pairs, st.integers(0, 23), st.integers(0, 23), st.integers(-3, 3))
def test_equivariance_under_convolution(values, i, j, m):
    ch = gm_family(CTX2, 1, [1])
    roots = CTX2.roots_of_unity()
    f = GroupRingElem(CTX2, [(roots[i], 1), (roots[j], m)])
    u = series2([(1, 0)] + values[1:])
    assert apply_character(ch, convolve_point(ch, f, u)) == convolve(f, apply_character(ch, u))


@common
@given(coeffs)
def test_psi_p_psi_q_commutation(values):
    # delta_q psi_p = (phi_p - 1) psi_q on Gm
    from arithpde.characters import psi_p_gm, psi_q_gm
    u = gm_unit(values)
    lhs = psi_p_gm(u).delta_q()
    q = psi_q_gm(u)
    rhs = q.phi_p() - q
    m = min(lhs.M, rhs.M)
    prec = min(lhs.prec, rhs.prec)
    assert lhs.truncate(m).with_prec(prec) == rhs.truncate(m).with_prec(prec)


@common
@given(st.integers(-10, 10).filter(bool), units, st.sampled_from(["ga", "gm"]))
def test_diagonalization(kappa, alpha, kind):
    ch = ga_family(CTX, 1, 1, 2) if kind == "ga" else gm_family(CTX, 1, [2])
    if kind == "gm" and (kappa % 5 == 0 or kappa < 0):
        return
    assert verify_diagonalization(ch, kappa, alpha, M)


@common
@given(st.integers(0, 23), st.tuples(units, st.integers(0, MOD - 1)))
def test_scale_covariance_of_ga_basic(i, alpha):
    ch = ga_family(CTX2, 1, 1, 1)
    zeta = CTX2.roots_of_unity()[i]
    a = CTX2.scalar(list(alpha))
    left = basic_series(ch, 1, zeta * a, M).u
    assert left == scale_q(basic_series(ch, 1, a, M).u, zeta)


@common
@given(st.tuples(units, st.integers(0, MOD - 1)), st.integers(0, MOD - 1), st.integers(0, MOD - 1),
       st.tuples(st.integers(0, MOD - 1), st.integers(0, MOD - 1)))
def test_hensel_inverse(c0, c1, c2, alpha):
    c = [CTX2.scalar(list(c0)), CTX2.scalar(c1 * 5), CTX2.scalar(c2 * 25)]
    a = CTX2.scalar(list(alpha))
    g = c[0] * a + c[1] * a.frobenius() + c[2] * a.frobenius(2)
    assert hensel_solve(c, g) == a


@common
@given(coeffs)
def test_operator_matches_character_on_additive_group(values):
    ch = ga_family(CTX, 1, 1, 3)
    u = series(values)
    op = symbol_to_operator(ch.mu)
    assert operator_apply(op, u) == apply_character(ch, u)


@common
@given(coeffs, coeffs)
def test_formal_group_law_respects_the_elliptic_log(a, b):
    from arithpde.characters import elliptic_family
    from arithpde.formal_groups import WeierstrassCurve
    ch = elliptic_family(WeierstrassCurve(1, 1, CTX), 1, [-1])
    u, v = formal_point(a), formal_point(b)
    lhs = psi_q_of(ch, group_combine(ch, u, v))
    rhs = psi_q_of(ch, u) + psi_q_of(ch, v)
    m = min(lhs.M, rhs.M)
    assert lhs.truncate(m) == rhs.truncate(m).with_prec(lhs.prec)


TATE = TateEquations(TateParams.make(CTX, eta=1, M=20))


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 4), units)
def test_tate_diagonalization(kappa, alpha):
    sol = TATE.basic_series(kappa, alpha, 20)
    r = TATE.psi1_pq(sol.u)
    expect = QSeries.monomial(CTX, kappa, (TATE.params.eta * kappa + 1) * alpha / kappa, 20)
    assert r == expect.truncate(r.M).with_prec(r.prec)
