import io
import subprocess
import sys

import pytest

from arithpde.cli import main
from arithpde.padic_core import PadicContext
from arithpde.qseries import QSeries


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


CONV = ("--group", "ga", "--mu", "xq+xp-1")


def test_define_reports_characteristic_integers():
    code, text = run("define", *CONV)
    assert code == 0
    assert text.startswith("char kind=ga")
    assert "characteristic plus=[1] minus=[]" in text


def test_define_curve():
    code, text = run("define", "--curve", "a4=1 a6=1")
    assert code == 0 and "a4=" in text


def test_basic_then_apply_gives_zero(tmp_path):
    code, text = run("basic", *CONV, "--kappa", "1", "--alpha", "3", "--prec-q", "40")
    assert code == 0
    u = QSeries.parse(text)
    assert u.coeff(1) == 3
    path = tmp_path / "u.txt"
    path.write_text(text)
    code, text = run("apply", *CONV, "--prec-q", "40", "--series", str(path))
    assert code == 0
    assert QSeries.parse(text).is_zero()
    assert text.splitlines()[0].startswith("series p=5 s=1 N=8")


def test_gm_basic_and_apply(tmp_path):
    args = ("--group", "gm", "--nu", "1", "--lam", "2", "--prec-q", "30")
    code, text = run("basic", *args, "--kappa", "2")
    assert code == 0
    path = tmp_path / "u.txt"
    path.write_text(text)
    code, text = run("apply", *args, "--series", str(path))
    assert code == 0 and QSeries.parse(text).is_zero()


def test_solve_inhomogeneous(tmp_path):
    ctx = PadicContext(5, 1, 8)
    phi = QSeries.from_dict(ctx, {2: 1, 3: 2}, 30)
    path = tmp_path / "phi.txt"
    path.write_text(phi.to_text())
    code, text = run("solve", *CONV, "--prec-q", "30", "--rhs", str(path))
    assert code == 0
    assert "residual_zero=1 normalization=1" in text


def test_solve_bvp():
    code, text = run("solve", *CONV, "--prec-q", "30", "--q0", "5", "--datum", "10")
    assert code == 0
    assert text.startswith("kappa 1\nalpha ")


def test_tate_only_zero_and_basis():
    code, text = run("tate", "beta=1", "eta=1", "M=30")
    assert code == 0 and "solutions only-zero certified=1" in text
    code, text = run("tate", "beta=1", "eta=-1/2", "M=30")
    assert code == 0 and "solutions basis kappa=2 verified=1" in text


def test_verify_is_deterministic():
    a = run("verify", "axioms", "--count", "10", "--prec-q", "30")
    b = run("verify", "axioms", "--count", "10", "--prec-q", "30")
    assert a == b
    assert a[0] == 0
    assert "# result:" in a[1] and " 0 fail" in a[1]


def test_verify_seed_is_recorded():
    code, text = run("verify", "axioms", "--count", "5", "--prec-q", "20", "--seed", "7")
    assert code == 0 and "seed=7" in text


def test_mutation_is_caught():
    code, text = run("verify", "axioms", "--count", "10", "--prec-q", "30", "--mutate-delta-p")
    assert code == 1
    assert "fail" in text and "mutate_delta_p=1" in text


def test_honda_report():
    code, text = run("verify", "honda", "--prec-q", "125")
    assert code == 0
    assert "honda" in text


def test_timing_is_opt_in():
    _, plain = run("verify", "axioms", "--count", "5", "--prec-q", "20")
    _, timed = run("verify", "axioms", "--count", "5", "--prec-q", "20", "--timing")
    assert not any(line.endswith("s") and line.rstrip("s")[-1:].isdigit() for line in plain.splitlines())
    assert timed != plain


@pytest.mark.parametrize("argv,code", [
    (("basic", "--group", "ga", "--mu", "xq +", "--kappa", "1"), 2),
    (("basic", *CONV, "--kappa", "0"), 2),
    (("solve", *CONV), 2),
    (("apply", *CONV, "--series", "/nonexistent/file"), 2),
    (("tate", "eta=1"), 2),
    (("basic", "--group", "ga", "--mu", "xq + 5*xp - 5", "--kappa", "1"), 1),
    (("nonsense",), 2),
])
def test_exit_codes(argv, code):
    assert run(*argv)[0] == code


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "arithpde", "define", *CONV],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "kind=ga" in proc.stdout
