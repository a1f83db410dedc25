from fractions import Fraction

import mpmath
import pytest

from totpos.checker import is_tn, is_tp
from totpos.numkernel import DomainError, Matrix, det, rank, to_mpf
from totpos.transforms import (
    Constant,
    Expression,
    Mode,
    Power,
    PreserverQuery,
    apply_entrywise,
    classify_preservers,
    descriptor_from_text,
    falsify,
    functional_equation_residual,
    hadamard_power,
    in_mid_convex_class,
    is_constant_preserver,
    is_power_preserver,
    random_hankel_tn,
    random_symmetric_tn,
    random_tn,
)
from totpos.witnesses import matrix_C, matrix_C_rational


def test_apply_examples():
    M = Matrix([[0, 1], [2, 3]])
    assert apply_entrywise(M, Power(1, 0)) == Matrix([[0, 1], [1, 1]])
    B = apply_entrywise(Matrix([[2, 4], [1, 2]]), Expression.parse("exp(x) - 1"))
    assert float(det(B)) == pytest.approx(-51.28, abs=0.01)
    assert apply_entrywise(M, Constant(3)) == Matrix([[3, 3], [3, 3]])
    with pytest.raises(DomainError):
        apply_entrywise(Matrix([[-1, 1]]), Power(1, 2))


def test_power_one_is_exact_scaling():
    M = random_tn(4, 3, seed=1)
    assert apply_entrywise(M, Power(Fraction(5, 2), 1)) == M.scale(Fraction(5, 2))


def test_hadamard_powers():
    C = matrix_C_rational(Fraction(1, 2))
    assert det(hadamard_power(C, 2)) == Fraction(7, 8)
    J = Matrix([[1] * 3] * 3)
    for a in (0, Fraction(1, 3), 2, 7):
        assert hadamard_power(J, a) == J
    M = random_tn(3, 3, seed=4)
    left = hadamard_power(hadamard_power(M, 2), 3)
    assert left == hadamard_power(M, 6)
    F = hadamard_power(hadamard_power(M, Fraction(1, 2)), 2)
    assert all(abs(F[i, j] - to_mpf(M[i, j], 128)) <= 1e-30 for i in range(3) for j in range(3))


def test_matrix_C_square_has_positive_det():
    C = matrix_C()
    d = det(hadamard_power(C, 2))
    assert float(d) == pytest.approx(0.5, rel=1e-9)
    assert is_tn(hadamard_power(C, 2)).holds


def test_classification_table():
    assert classify_preservers(PreserverQuery(Mode.TN, 1)).kind == "any-nonneg"
    assert classify_preservers(PreserverQuery(Mode.TP, 1)).kind == "any-positive"
    assert classify_preservers(PreserverQuery("TN_SYM", 2)).kind == "mid-convex"
    assert classify_preservers(PreserverQuery("hankel_all", 3)).kind == "absolutely-monotonic"
    cls = classify_preservers(PreserverQuery(Mode.TN_SYM, 4))
    assert 1 in cls.alphas and 2 in cls.alphas and Fraction(3, 2) not in cls.alphas
    assert classify_preservers(PreserverQuery(Mode.TP, 5)).kind == "powers-only"
    with pytest.raises(ValueError):
        PreserverQuery(Mode.TN, 0)
    with pytest.raises(ValueError):
        Mode.parse("XX")


@pytest.mark.parametrize("mode,delta,c,alpha,expected", [
    ("TN", 2, 1, Fraction(1, 2), True),
    ("TN", 3, 1, Fraction(1, 2), False),
    ("TN", 3, 2, 3, True),
    ("TN", 4, 1, 2, False),
    ("TN", 6, 3, 1, True),
    ("TP", 2, 1, 0, False),
    ("TP", 2, 1, Fraction(1, 10), True),
    ("TP_SYM", 4, 1, 2, True),
    ("TP_SYM", 4, 1, Fraction(3, 2), False),
    ("TN_SYM", 5, 1, 2, False),
    ("HANKEL_FIXED", 4, 1, Fraction(5, 2), True),
    ("HANKEL_FIXED", 4, 1, Fraction(3, 2), False),
    ("HANKEL_FIXED", 4, 1, 1, True),
    ("HANKEL_FIXED", 4, 1, 2, True),
    ("HANKEL_ALL", 3, 1, 3, True),
    ("HANKEL_ALL", 3, 1, Fraction(7, 2), False),
])
def test_is_power_preserver(mode, delta, c, alpha, expected):
    assert is_power_preserver(PreserverQuery(mode, delta), c, alpha) is expected


def test_constants():
    assert is_constant_preserver(PreserverQuery("TN", 4), 2)
    assert not is_constant_preserver(PreserverQuery("TP", 4), 2)
    assert is_constant_preserver(PreserverQuery("TP", 1), 2)
    assert not is_constant_preserver(PreserverQuery("TP", 1), 0)
    assert is_power_preserver(PreserverQuery("TN", 3), 0, 5)  # zero map


def test_descriptor_from_text():
    assert descriptor_from_text("3") == Constant(3)
    assert descriptor_from_text("x") == Power(1, 1)
    assert descriptor_from_text("2*x^0.5") == Power(2, Fraction(1, 2))
    assert descriptor_from_text("x^3*4") == Power(4, 3)
    assert isinstance(descriptor_from_text("exp(x)"), Expression)


def test_falsify_examples():
    cert = falsify(Expression.parse("exp(x) - 1"), PreserverQuery("TN", 2))
    assert cert is not None and cert.family == "A"
    assert cert.verify()
    assert float(cert.violation.value) < 0
    for mode in ("TN", "TP", "TN_SYM", "TP_SYM", "HANKEL_FIXED"):
        assert falsify(Power(3, 1), PreserverQuery(mode, 4), budget=150) is None


def test_falsify_is_deterministic_and_records_errors():
    F = Power(1, Fraction(3, 2))
    a = falsify(F, PreserverQuery("TN", 4), budget=200)
    b = falsify(F, PreserverQuery("TN", 4), budget=200)
    assert a is not None and a.record() == b.record()
    errors = []
    assert falsify(Expression.parse("sqrt(x - 1000)"), PreserverQuery("TN", 2), budget=30,
                   errors=errors) is None
    assert len(errors) == 30


def test_random_tn_reproducible_and_ranked():
    assert random_tn(4, 5, seed=9) == random_tn(4, 5, seed=9)
    for s in range(10):
        M = random_tn(4, 4, True, seed=s)
        assert rank(M) == 4 and is_tn(M).holds
        assert is_tp(random_tn(3, 4, seed=s, strict=True)).holds
        S = random_symmetric_tn(4, s)
        assert S == S.T and is_tn(S).holds
        H = random_hankel_tn(4, s)
        assert all(H[i, j] == H[i + 1, j - 1] for i in range(3) for j in range(1, 4))
        assert is_tn(H).holds


def test_functional_equation_probe():
    assert functional_equation_residual(Power(2, Fraction(3, 2))) < 1e-20
    assert functional_equation_residual(Expression.parse("x + 1")) > 1


def test_mid_convex_probe():
    assert in_mid_convex_class(Power(1, Fraction(1, 2)))
    assert in_mid_convex_class(Expression.parse("exp(x)"), strict=True)
    assert not in_mid_convex_class(Expression.parse("log(x + 1)"))
    assert not in_mid_convex_class(Expression.parse("1/(x+1)"))
    assert not in_mid_convex_class(Constant(0), strict=True)


def test_entrywise_map_keeps_float_variant():
    F = matrix_C()
    B = apply_entrywise(F, Power(1, 2))
    assert not B.exact and isinstance(B[0, 0], mpmath.mpf)
