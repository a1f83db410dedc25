"""The ten acceptance criteria, each with its stated tolerance and time limit."""

import itertools
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import mpmath

from totpos.checker import is_pos_def, is_tn, is_tp, is_tp_hankel
from totpos.completion import (
    UnsupportedError,
    VerificationError,
    complete_hankel_sym,
    densify_to_tp,
    embed_2x2_at_position,
    embed_2x2_vandermonde,
    embed_equally_spaced,
    extend_backwards,
    hankel_from_moments,
)
from totpos.numkernel import Matrix, det, iter_all_minors, minor, rank, to_mpf
from totpos.transforms import (
    T_X_GRID,
    Mode,
    Power,
    PreserverQuery,
    falsify,
    hadamard_power,
    is_power_preserver,
    random_hankel_tn,
    random_tn,
)
from totpos import witnesses as w


@contextmanager
def time_limit(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.1f} s, limit {seconds} s"


def test_criterion_1():
    with time_limit(1):
        assert abs(det(w.matrix_C())) <= 1e-12
        for c, alpha in itertools.product((1, 2), (Fraction(1, 2), 1, 2, 3)):
            _, _, err = w.verify_detC_formula(c, alpha)
            assert err <= 1e-9, (c, alpha, err)


def test_criterion_2():
    with time_limit(10):
        cert = is_tn(hadamard_power(w.matrix_C(), Fraction(9, 10)))
        assert cert.fails and len(cert.witness.rows) == 3
        rng = random.Random(2)
        for _ in range(200):
            M = random_tn(3, 3, seed=rng.randint(0, 10 ** 9))
            for alpha in (1, Fraction(3, 2), 2):
                assert is_tn(hadamard_power(M, alpha)).holds, (M, alpha)


def test_criterion_3():
    with time_limit(30):
        for k in range(1, 10):
            for x in (Fraction(1, 10), 1, 10):
                assert is_tn(w.family_N(Fraction(k, 10), x)).holds
        cx = falsify(Power(1, 2), PreserverQuery(Mode.TN, 4))
        assert cx is not None and cx.family == "N" and cx.verify()
        with mpmath.workprec(128):
            for eps in (Fraction(1, 2), Fraction(1, 10)):
                fit = w.verify_N_expansion(eps, 2, prec=128)
                assert fit.conclusive and fit.cubic_rel_error <= 0.05, (eps, fit)


def test_criterion_4():
    with time_limit(10):
        found = [x for x in T_X_GRID if minor(hadamard_power(w.family_T(x), 2), w.T_UPPER_RIGHT) < 0]
        assert found
        for x in T_X_GRID + (Fraction(1, 10), Fraction(1)):
            assert is_tn(w.family_T(x)).holds


def test_criterion_5():
    with time_limit(1):
        D = w.moment_two_point(Fraction(1, 2), 4)
        bad = hadamard_power(D, Fraction(3, 2))
        with mpmath.workprec(128):
            A = mpmath.matrix([[to_mpf(bad[i, j], 128) for j in range(4)] for i in range(4)])
            assert min(mpmath.eigsy(A)[0]) < 0
        assert is_pos_def(bad).fails
        good = hadamard_power(D, 2)
        assert is_pos_def(good, strict=False).holds
        assert all(v >= -1e-12 for _, v in iter_all_minors(good))


def random_tp_2x2(rng):
    while True:
        a, b, c, d = (Fraction(rng.randint(1, 50), rng.randint(1, 10)) for _ in range(4))
        if a * d > b * c:
            return Matrix([[a, b], [c, d]])


def test_criterion_6():
    with time_limit(60):
        rng = random.Random(6)
        pairs = list(itertools.combinations(range(4), 2))
        for i in range(500):
            A = random_tp_2x2(rng)
            m, n = rng.randint(2, 6), rng.randint(2, 6)
            assert is_tp(embed_2x2_vandermonde(A, m, n).realize(m, n)).holds
            for rows, cols in itertools.product(pairs, pairs):
                assert is_tp(embed_2x2_at_position(A, 4, 4, rows, cols).realize(4, 4)).holds
        for delta in range(2, 7):
            assert is_tp_hankel(complete_hankel_sym(2, 1, 3, delta).matrix).holds
        a, b, c = 2, 1, 3
        for n, k, N in ((0, 1, 2), (1, 1, 3), (2, 2, 4), (3, 1, 5)):
            done = embed_equally_spaced(a, b, c, n, k, N)
            assert is_tp_hankel(done.matrix).holds
            for t, want in zip((n, n + k, n + 2 * k), (a, b, c)):
                assert abs(to_mpf(done.moments[t], 128) - want) <= 1e-12


def test_criterion_7():
    with time_limit(5):
        moments = complete_hankel_sym(2, 1, 3, 4).moments
        assert is_tp_hankel(hankel_from_moments(moments)).holds
        _, once = extend_backwards(moments)
        assert is_tp_hankel(hankel_from_moments(once)).holds
        _, twice = extend_backwards(once)
        assert is_tp_hankel(hankel_from_moments(twice)).holds
        exact = [Fraction(1, j + 1) for j in range(7)]  # Hilbert 4x4
        try:
            extend_backwards(exact, margin=0)
        except VerificationError as exc:
            assert exc.certificate is not None and exc.certificate.fails
        else:
            raise AssertionError("margin 0 accepted")


def test_criterion_8():
    with time_limit(30):
        rng = random.Random(8)
        for _ in range(50):
            m, n = rng.randint(2, 5), rng.randint(2, 5)
            M = random_tn(m, n, True, seed=rng.randint(0, 10 ** 9))
            assert rank(M) == min(m, n)
            B, _ = densify_to_tp(M)
            assert is_tp(B).holds and B.distance(M) <= Fraction(1, 1000)
        for M in (w.matrix_C(), w.moment_two_point(Fraction(1, 2), 4) @ Matrix([[1, 1], [1, 1], [0, 0], [0, 0]])
                  @ Matrix([[1, 0, 0, 0], [0, 0, 0, 0]])):
            try:
                densify_to_tp(M)
            except UnsupportedError as exc:
                assert str(exc).startswith("unsupported:")
            else:
                raise AssertionError("rank-deficient input accepted")


ALPHAS = (0, Fraction(1, 2), Fraction(9, 10), 1, Fraction(3, 2), 2, Fraction(5, 2), 3)


def test_criterion_9():
    with time_limit(300):
        mismatches = []
        for mode in (Mode.TN, Mode.TP, Mode.TN_SYM, Mode.TP_SYM, Mode.HANKEL_FIXED):
            for delta in range(2, 6):
                q = PreserverQuery(mode, delta)
                for alpha in ALPHAS:
                    expected = is_power_preserver(q, 1, alpha)
                    cx = falsify(Power(1, alpha), q, budget=300)
                    if expected != (cx is None) or (cx is not None and not cx.verify()):
                        mismatches.append((mode.value, delta, alpha))
        assert not mismatches, mismatches


def random_matrix(rng, m, n):
    kind = rng.random()
    if kind < 0.4:
        return random_tn(m, n, seed=rng.randint(0, 10 ** 9), strict=True)
    if kind < 0.7:
        return random_tn(m, n, rng.random() < 0.5, seed=rng.randint(0, 10 ** 9))
    return Matrix([[Fraction(rng.randint(1, 20), rng.randint(1, 4)) for _ in range(n)] for _ in range(m)])


def test_criterion_10():
    with time_limit(60):
        rng = random.Random(10)
        for _ in range(1000):
            M = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
            assert is_tp(M).holds == is_tp(M, full=True).holds
        for i in range(200):
            size = rng.randint(2, 5)
            H = random_hankel_tn(size, seed=i, atoms=rng.randint(1, size + 1))
            assert is_tp_hankel(H).holds == is_tp(H, full=True).holds
