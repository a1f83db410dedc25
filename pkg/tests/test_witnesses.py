import random
from fractions import Fraction

import pytest

from totpos.checker import is_pos_def, is_tn, is_tp
from totpos.numkernel import Matrix, det, minor
from totpos.transforms import hadamard_power
from totpos import witnesses as w


def test_2x2_families():
    assert w.family_A(2, 3) == Matrix([[2, 6], [1, 3]])
    assert w.family_A(0, 0) == Matrix([[0, 0], [1, 0]])
    rng = random.Random(0)
    for _ in range(100):
        x, y = Fraction(rng.randint(0, 50), rng.randint(1, 7)), Fraction(rng.randint(0, 50), rng.randint(1, 7))
        assert det(w.family_A(x, y)) == 0 and det(w.family_B(x, y)) == 0
        assert is_tn(w.family_A(x, y)).holds and is_tn(w.family_B(x, y)).holds
    with pytest.raises(ValueError):
        w.family_A(-1, 2)


def test_sym_rank1():
    assert w.sym_rank1(1, 1) == Matrix([[1, 1], [1, 1]])
    M = w.sym_rank1(4, 9)
    assert M == Matrix([[4, 6], [6, 9]]) and det(M) == 0
    F = w.sym_rank1(2, 3)
    assert not F.exact and is_tn(F).holds


def test_monotone_pair_and_M_tp():
    assert is_tp(w.monotone_pair(1, 2)).holds
    M = w.family_M_tp(1, 4, 1)
    assert M == Matrix([[2, 3], [3, 5]]) and det(M) == 1
    for x, y in [(Fraction(1, 4), 9), (4, 1), (Fraction(1, 9), Fraction(4, 9))]:
        assert is_tp(w.family_M_tp(x, y, Fraction(1, 10))).holds
    with pytest.raises(ValueError):
        w.family_M_tp(4, 9, 0)


def test_matrix_C():
    C = w.matrix_C()
    assert abs(det(C)) <= 1e-12
    assert is_tn(C).holds
    assert is_tn(hadamard_power(C, 0.9)).fails


def test_detC_formula_examples():
    m, p, err = w.verify_detC_formula(1, 1)
    assert abs(m) < 1e-30 and p == 0
    m, p, err = w.verify_detC_formula(1, 2)
    assert float(m) == pytest.approx(0.5) and err < 1e-20
    m, p, err = w.verify_detC_formula(2, 3)
    assert float(p) == pytest.approx(6) and err < 1e-20


def test_N_and_T():
    for eps in [Fraction(k, 10) for k in range(1, 10)]:
        for x in (Fraction(1, 10), 1, 10):
            assert is_tn(w.family_N(eps, x)).holds
    assert w.family_N(Fraction(1, 2), 0) == Matrix([[1] * 4] * 4)
    with pytest.raises(ValueError):
        w.family_N(1, 1)
    for x in (Fraction(1, 10 ** 4), Fraction(1, 100), 1):
        T = w.family_T(x)
        assert is_tn(T).holds
        assert T == T.T


def test_T_upper_right_minor_turns_negative():
    x = Fraction(1, 10 ** 5)
    T2 = hadamard_power(w.family_T(x), 2)
    v = minor(T2, w.T_UPPER_RIGHT)
    assert v < 0


def test_moment_two_point():
    assert w.moment_two_point(Fraction(1, 3), 1) == Matrix([[2]])
    D = w.moment_two_point(Fraction(1, 2), 4)
    assert is_tn(D).holds
    assert is_pos_def(hadamard_power(D, 1.5)).fails
    D5 = w.moment_two_point(Fraction(1, 2), 5)
    assert D5.submatrix(range(4), range(4)) == D
    with pytest.raises(ValueError):
        w.moment_two_point(1, 3)


def test_vasudeva_sets():
    assert w.vasudeva_A(2, 1) == Matrix([[2, 1], [1, 2]])
    assert w.vasudeva_B(2, 1, 1) == Matrix([[2, 1], [1, 1]])
    firsts, seconds = w.vasudeva_sets(20, seed=4)
    assert any(not A.exact for A in firsts) and any(A.exact for A in firsts)
    for A in firsts + seconds:
        assert is_tn(A).holds
    for B in seconds:
        assert B.exact and B[0, 0] * B[1, 1] > B[0, 1] ** 2


def test_N_expansion_coefficients():
    c3, c4 = w.n_expansion_coefficients(Fraction(1, 2), 2)
    assert c3 == 2
    c3, c4 = w.n_expansion_coefficients(Fraction(1, 10), 2)
    assert c3 == Fraction(8, 100)
    assert w.n_expansion_coefficients(Fraction(1, 2), 1)[1] == 0
    for eps in (Fraction(1, 2), Fraction(1, 10)):
        fit = w.verify_N_expansion(eps, 2)
        assert fit.conclusive and fit.cubic_rel_error < 0.05
