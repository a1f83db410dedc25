import itertools
import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from totpos.numkernel import (
    DomainError,
    Matrix,
    MinorIndex,
    cofactor_det,
    count_minors,
    default_precision,
    default_rel_tol,
    det,
    enumerate_minors,
    format_scalar,
    iter_all_minors,
    minor,
    parse_scalar,
    power_scalar,
    rank,
    to_mpf,
)
from totpos.witnesses import family_A, family_N, matrix_C

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def square(n):
    return st.lists(st.lists(fractions, min_size=n, max_size=n), min_size=n, max_size=n)


@given(st.integers(1, 4).flatmap(square))
@settings(max_examples=150, deadline=None)
def test_det_matches_cofactor_expansion(rows):
    M = Matrix(rows)
    assert det(M) == cofactor_det(M)


@given(st.integers(1, 5).flatmap(square), st.randoms(use_true_random=False))
@settings(max_examples=80, deadline=None)
def test_det_transpose_and_permutation(rows, rnd):
    M = Matrix(rows)
    assert det(M.T) == det(M)
    perm = list(range(M.m))
    rnd.shuffle(perm)
    inversions = sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j])
    P = Matrix([rows[p] for p in perm])
    assert det(P) == (-1) ** inversions * det(M)


def test_det_examples():
    assert det(Matrix([[1, 1], [1, 1]])) == 0
    d = det(family_A(2, 3))
    assert d == 0 and isinstance(d, Fraction)
    assert abs(det(matrix_C())) <= 1e-12
    with pytest.raises(ValueError):
        det(Matrix([[1, 2, 3], [4, 5, 6]]))


def test_float_det_agrees_with_exact():
    rng = random.Random(7)
    for _ in range(60):
        n = rng.randint(1, 6)
        rows = [[Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)] for _ in range(n)]
        M = Matrix(rows)
        exact = det(M)
        approx = det(M.to_float())
        assert abs(approx - to_mpf(exact, 128)) <= 1e-10 * max(1, abs(to_mpf(exact, 128)))


def test_minor_examples():
    M = Matrix([[2, 1], [1, 1]])
    assert minor(M, MinorIndex((0, 1), (0, 1))) == det(M)
    N = family_N(Fraction(1, 2), 1)
    assert minor(N, MinorIndex((1, 2), (1, 2))) == 2
    assert minor(N, ((3,), (2,))) == N[3, 2]
    with pytest.raises(IndexError):
        minor(M, MinorIndex((0, 2), (0, 1)))
    with pytest.raises(ValueError):
        minor(M, MinorIndex((0, 1), (0,)))


def test_enumerate_counts():
    assert len(list(enumerate_minors(2, 2, 1))) == 4
    assert len(list(enumerate_minors(4, 4, 2, contiguous=True))) == 9
    assert len(list(enumerate_minors(3, 3, 3))) == 1
    for m, n in [(3, 5), (4, 4), (6, 2)]:
        for k in range(1, min(m, n) + 1):
            full = list(enumerate_minors(m, n, k))
            assert len(full) == math.comb(m, k) * math.comb(n, k) == count_minors(m, n, k)
            assert full == sorted(full)
            cont = list(enumerate_minors(m, n, k, contiguous=True))
            assert len(cont) == (m - k + 1) * (n - k + 1)
    with pytest.raises(ValueError):
        list(enumerate_minors(3, 3, 4))


def test_iter_all_minors_matches_direct():
    rng = random.Random(3)
    rows = [[Fraction(rng.randint(0, 9), rng.randint(1, 3)) for _ in range(4)] for _ in range(5)]
    M = Matrix(rows)
    seen = list(iter_all_minors(M))
    assert len(seen) == sum(count_minors(5, 4, k) for k in range(1, 5))
    for idx, v in seen:
        assert v == minor(M, idx)
    F = M.to_float()
    for (idx, v), (_, w) in zip(iter_all_minors(F), seen):
        assert abs(v - to_mpf(w, 128)) <= 1e-25 * max(1, abs(to_mpf(w, 128)))


def test_rank_examples():
    assert rank(Matrix.zeros(3, 3)) == 0
    assert rank(matrix_C()) == 2
    assert rank(family_N(Fraction(1, 2), 1)) == 4
    assert rank(Matrix([[1, 2, 3], [2, 4, 6]])) == 1


def test_scalar_parse_and_format_roundtrip():
    assert parse_scalar("3/4") == Fraction(3, 4)
    assert parse_scalar("-0.125") == Fraction(-1, 8)
    with pytest.raises(ValueError):
        parse_scalar("1/-2")
    with pytest.raises(ValueError):
        parse_scalar("abc")
    v = parse_scalar("0.1", exact=False, prec=128)
    assert parse_scalar(format_scalar(v, 128), exact=False, prec=128) == v
    assert format_scalar(Fraction(-7, 3)) == "-7/3"


def test_matrix_variants_do_not_mix():
    with pytest.raises(TypeError):
        Matrix([[1, mpmath.mpf(2)]])
    with pytest.raises(TypeError):
        Matrix([[1]]) + Matrix([[1]]).to_float()
    M = Matrix([[Fraction(1, 3)]])
    assert M.to_float().exact is False
    assert M.to_float().to_exact()[0, 0] != Fraction(1, 3)  # binary value of 1/3


def test_power_convention():
    assert power_scalar(Fraction(0), 0, 128) == 0
    assert power_scalar(Fraction(4), Fraction(1, 2), 128) == 2
    assert power_scalar(Fraction(2), 3, 128) == 8
    assert not isinstance(power_scalar(Fraction(2), Fraction(1, 2), 128), Fraction)
    with pytest.raises(DomainError):
        power_scalar(Fraction(-1), 2, 128)
    with pytest.raises(DomainError):
        power_scalar(Fraction(0), -1, 128)


def test_precision_environment(monkeypatch):
    monkeypatch.setenv("TOTPOS_PRECISION", "200")
    assert default_precision() == 200
    monkeypatch.setenv("TOTPOS_PRECISION", "20")
    with pytest.raises(ValueError):
        default_precision()
    assert default_rel_tol(53) == pytest.approx(1e-9)
    assert default_rel_tol(128) < 1e-30


def test_float_det_on_badly_scaled_rows():
    # rows spanning ~1e-50..1e100; unscaled elimination gets the sign wrong
    with mpmath.workprec(256):
        nodes = [mpmath.mpf("0.9932278"), mpmath.mpf("1.0033628"), mpmath.mpf(2), mpmath.mpf(4)]
        exps = [mpmath.mpf(1), mpmath.mpf("158.528"), mpmath.mpf("159.528"), mpmath.mpf("160.528")]
        F = Matrix([[u ** a for a in exps] for u in nodes], exact=False, prec=256)
    exact = det(F.to_exact())
    assert exact > 0
    assert abs(det(F) - to_mpf(exact, 256)) <= 1e-40 * abs(to_mpf(exact, 256))
