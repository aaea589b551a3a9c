import random
import sys
from fractions import Fraction

import pytest

from arithpde.padic_core import PadicContext


@pytest.fixture
def ctx():
    return PadicContext(5, 1, 8)


@pytest.fixture
def ctx2():
    return PadicContext(5, 2, 8)


@pytest.fixture
def rng():
    return random.Random(20261014)


def residue_mod(x: Fraction, p: int, k: int) -> int:
    """Image of a p-integral rational in Z/p^k, computed with plain integers."""
    x = Fraction(x)
    mod = p ** k
    return (x.numerator * pow(x.denominator, -1, mod)) % mod


def scalar_int(a, k=None) -> int:
    """Integral s=1 scalar as an integer mod p^k (k defaults to its precision)."""
    p = a.ctx.p
    k = a.prec if k is None else k
    if a.is_zero():
        return 0
    return (a.unit[0] * p ** a.val) % p ** k


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "ACCEPTANCE", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
