"""Explicit test matrices used to separate entrywise preservers.

Every constructor returns an exact matrix whenever its inputs are rational
and no irrational entry is forced (``sqrt(xy)`` entries stay exact when
``xy`` is a rational square).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .numkernel import (
    Matrix,
    _exact_root,
    default_precision,
    det,
    is_exact,
    power_scalar,
    to_mpf,
)


def _nonneg(*values) -> None:
    for v in values:
        if v < 0:
            raise ValueError(f"parameter must be non-negative, got {v}")


def _matrix(rows, prec):
    """Exact when every entry is rational, else float at ``prec``."""
    flat = [v for r in rows for v in r]
    exact = all(is_exact(v) for v in flat)
    return Matrix(rows, exact=exact, prec=prec)


def _sqrt(v, prec):
    if is_exact(v):
        root = _exact_root(Fraction(v), 2)
        if root is not None:
            return root
    with mpmath.workprec(prec):
        return mpmath.sqrt(to_mpf(v, prec))


# 2x2 families -------------------------------------------------------------


def family_A(x, y, prec: int | None = None) -> Matrix:
    """``[[x, xy], [1, y]]``; TN and singular for ``x, y >= 0``."""
    _nonneg(x, y)
    return _matrix([[x, x * y], [1, y]], prec)


def family_B(x, y, prec: int | None = None) -> Matrix:
    """``[[xy, x], [y, 1]]``; TN and singular for ``x, y >= 0``."""
    _nonneg(x, y)
    return _matrix([[x * y, x], [y, 1]], prec)


def family_A_tp(x, y, eps, a=1, prec: int | None = None) -> Matrix:
    """TP perturbation ``[[ax, axy], [a - eps, ay]]`` (``x, y > 0``, ``0 < eps < a``)."""
    if not (x > 0 and y > 0 and 0 < eps < a):
        raise ValueError("need x, y > 0 and 0 < eps < a")
    return _matrix([[a * x, a * x * y], [a - eps, a * y]], prec)


def family_B_tp(x, y, eps, a=1, prec: int | None = None) -> Matrix:
    """TP perturbation ``[[axy, ax], [ay, a + eps]]``."""
    if not (x > 0 and y > 0 and eps > 0 and a > 0):
        raise ValueError("need x, y, eps, a > 0")
    return _matrix([[a * x * y, a * x], [a * y, a + eps]], prec)


def sym_rank1(x, y, prec: int | None = None) -> Matrix:
    """Symmetric rank-one ``[[x, sqrt(xy)], [sqrt(xy), y]]``."""
    _nonneg(x, y)
    prec = prec or default_precision()
    g = _sqrt(x * y, prec)
    if not is_exact(g):
        with mpmath.workprec(prec):
            return Matrix([[x, g], [g, y]], exact=False, prec=prec)
    return Matrix([[x, g], [g, y]], prec=prec)


def monotone_pair(x, y, prec: int | None = None) -> Matrix:
    """``[[y, x], [x, y]]`` for ``y > x >= 0``."""
    _nonneg(x)
    if not y > x:
        raise ValueError("monotonicity pair needs y > x")
    return _matrix([[y, x], [x, y]], prec)


def family_M_tp(x, y, eps, prec: int | None = None) -> Matrix:
    """``[[x+e, sqrt(xy)+e], [sqrt(xy)+e, y+e]]``, TP for ``x != y`` and ``e > 0``."""
    if not (x > 0 and y > 0 and eps > 0) or x == y:
        raise ValueError("need x, y, eps > 0 and x != y")
    prec = prec or default_precision()
    g = _sqrt(x * y, prec)
    with mpmath.workprec(prec):
        rows = [[x + eps, g + eps], [g + eps, y + eps]]
    return _matrix(rows, prec)


# 3x3 ----------------------------------------------------------------------


def family_A_sym(x, y, prec: int | None = None) -> Matrix:
    """Symmetric rank-one 3x3 containing ``family_A(x, y)`` as a submatrix."""
    _nonneg(x, y)
    return _matrix([[x * x, x, x * y], [x, 1, y], [x * y, y, y * y]], prec)


def family_B_sym(x, y, prec: int | None = None) -> Matrix:
    """Symmetric rank-one 3x3 containing ``family_B(x, y)`` (``y > 0``)."""
    _nonneg(x)
    if not y > 0:
        raise ValueError("need y > 0")
    y = Fraction(y) if is_exact(y) else y
    return _matrix([[x * x * y, x * y, x], [x * y, y, 1], [x, 1, 1 / y]], prec)


def matrix_C(prec: int | None = None) -> Matrix:
    """Tridiagonal 3x3 with unit diagonal and ``1/sqrt(2)`` off the diagonal.

    TN and singular; its Hadamard powers below 1 are not TN.
    """
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        r = 1 / mpmath.sqrt(2)
        z = mpmath.mpf(0)
        one = mpmath.mpf(1)
        return Matrix([[one, r, z], [r, one, r], [z, r, one]], exact=False, prec=prec)


def matrix_C_rational(b=Fraction(7, 10)) -> Matrix:
    """Rational stand-in for ``matrix_C`` with off-diagonal ``b``; TN iff ``2b^2 <= 1``."""
    return Matrix([[1, b, 0], [b, 1, b], [0, b, 1]])


# 4x4 / 5x5 ----------------------------------------------------------------


def M_eps(eps) -> list[list]:
    h = Fraction(5, 2) if is_exact(eps) else 2.5
    return [
        [0, 0, 0, 0],
        [0, 1, 2, 3],
        [0, 2, 4 + eps, 6 + h * eps],
        [0, 3, 8, 14 + eps],
    ]


def family_N(eps, x, prec: int | None = None) -> Matrix:
    """``J + x M(eps)``: TN for ``0 < eps < 1`` and ``x > 0``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    _nonneg(x)
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        rows = [[1 + x * v for v in r] for r in M_eps(eps)]
    return _matrix(rows, prec)


T_TABLE = (
    (2, 3, 6, 14, 36),
    (3, 6, 14, 36, 98),
    (6, 14, 36, 98, 276),
    (14, 36, 98, 284, 842),
    (36, 98, 276, 842, 2604),
)


def family_T(x, prec: int | None = None) -> Matrix:
    """Symmetric 5x5 ``J + x T``; TN for ``x > 0``."""
    if not x > 0:
        raise ValueError("need x > 0")
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        rows = [[1 + x * v for v in r] for r in T_TABLE]
    return _matrix(rows, prec)


T_UPPER_RIGHT = ((0, 1, 2, 3), (1, 2, 3, 4))


def moment_two_point(x, size: int, prec: int | None = None) -> Matrix:
    """Moment matrix ``(1 + x^(i+j))`` of the measure ``delta_1 + delta_x``."""
    if not 0 < x < 1:
        raise ValueError("need 0 < x < 1")
    if size < 1:
        raise ValueError("size must be positive")
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        rows = [[1 + x ** (i + j) for j in range(size)] for i in range(size)]
    return _matrix(rows, prec)


def hilbert(size: int) -> Matrix:
    """Moment matrix of Lebesgue measure on [0, 1]; TP Hankel."""
    return Matrix([[Fraction(1, i + j + 1) for j in range(size)] for i in range(size)])


# test sets for the 2x2 symmetric characterisation ------------------------


def vasudeva_A(a, b, prec: int | None = None) -> Matrix:
    if not a > b > 0:
        raise ValueError("need a > b > 0")
    return _matrix([[a, b], [b, a]], prec)


def vasudeva_B(a, b, c) -> Matrix:
    if not all(is_exact(v) for v in (a, b, c)):
        raise ValueError("a, b, c must be rational")
    if not (a > 0 and b > 0 and c > 0 and a * c > b * b):
        raise ValueError("need a, b, c > 0 and ac > b^2")
    return Matrix([[a, b], [b, c]])


def vasudeva_sets(count: int, seed: int = 0, prec: int | None = None):
    """Sample ``count`` members of each reduced test set.

    The first list holds ``[[a, b], [b, a]]`` with ``a > b > 0`` and at
    least one of ``a, b`` rational (every other sample has an irrational
    entry); the second holds rational ``[[a, b], [b, c]]`` with ``ac > b^2``.
    """
    rng = random.Random(seed)
    prec = prec or default_precision()
    firsts, seconds = [], []
    for i in range(count):
        a = Fraction(rng.randint(2, 60), rng.randint(1, 10))
        if i % 2:
            with mpmath.workprec(prec):
                b = to_mpf(a, prec) / mpmath.sqrt(rng.randint(2, 7) + mpmath.mpf(1) / 3)
            firsts.append(vasudeva_A(to_mpf(a, prec), b, prec))
        else:
            b = a * Fraction(rng.randint(1, 99), 100)
            firsts.append(vasudeva_A(a, b, prec))
        a = Fraction(rng.randint(1, 40), rng.randint(1, 8))
        c = Fraction(rng.randint(1, 40), rng.randint(1, 8))
        bound = a * c
        b = Fraction(rng.randint(1, 99), 100)
        b = b * _floor_sqrt_fraction(bound)
        seconds.append(vasudeva_B(a, b, c))
    return firsts, seconds


def _floor_sqrt_fraction(q: Fraction) -> Fraction:
    """A rational lower bound for ``sqrt(q)`` within 1e-6 relative."""
    r = Fraction(mpmath.nstr(mpmath.sqrt(mpmath.mpf(q.numerator) / q.denominator), 20)).limit_denominator(10 ** 8)
    while r * r >= q:
        r *= Fraction(999999, 1000000)
    return r


# published identities -----------------------------------------------------


def verify_detC_formula(c, alpha, prec: int | None = None):
    """Compare ``det(c * C^alpha)`` with ``c^3 (1 - 2^(1 - alpha))``.

    Returns ``(measured, predicted, error)`` with the error relative to
    ``max(1, |predicted|)``.
    """
    if not c > 0:
        raise ValueError("need c > 0")
    prec = prec or default_precision()
    C = matrix_C(prec)
    with mpmath.workprec(prec):
        cc, aa = to_mpf(c, prec), to_mpf(alpha, prec)
        P = C.map(lambda v: cc * power_scalar(v, aa, prec, exact=False))
        measured = det(P)
        predicted = cc ** 3 * (1 - mpmath.mpf(2) ** (1 - aa))
        error = abs(measured - predicted) / max(1, abs(predicted))
    return measured, predicted, error


@dataclass(frozen=True)
class ExpansionFit:
    cubic: object
    quartic: object
    predicted_cubic: object
    predicted_quartic: object
    cubic_rel_error: object
    quartic_rel_error: object
    conclusive: bool


def n_expansion_coefficients(eps, alpha):
    """Leading small-``x`` coefficients of ``det N(eps, x)^alpha``."""
    cubic = eps ** 2 * alpha ** 3
    quartic = (8 - 70 * eps - 59 * eps ** 2 - 4 * eps ** 3) * (alpha ** 3 - alpha ** 4) / 4
    return cubic, quartic


def verify_N_expansion(eps, alpha, xs=(Fraction(1, 1000), Fraction(2, 1000), Fraction(4, 1000)),
                       prec: int | None = None) -> ExpansionFit:
    """Least-squares fit of ``det N(eps, x)^alpha / x^3 ~ c3 + c4 x`` over ``xs``."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        pc, pq = n_expansion_coefficients(to_mpf(eps, prec), to_mpf(alpha, prec))
        xs = list(xs)
        if len(set(xs)) < 2:
            return ExpansionFit(None, None, pc, pq, None, None, False)
        ys = []
        for x in xs:
            N = family_N(eps, x, prec)
            P = _hadamard(N, alpha, prec)
            ys.append(to_mpf(det(P), prec) / to_mpf(x, prec) ** 3)
        A = mpmath.matrix([[1, to_mpf(x, prec)] for x in xs])
        try:
            sol, _res = mpmath.qr_solve(A, mpmath.matrix(ys))
        except ZeroDivisionError:
            return ExpansionFit(None, None, pc, pq, None, None, False)
        c3, c4 = sol[0], sol[1]
        e3 = abs(c3 - pc) / abs(pc) if pc else abs(c3)
        e4 = abs(c4 - pq) / abs(pq) if pq else abs(c4)
    return ExpansionFit(c3, c4, pc, pq, e3, e4, True)


def _hadamard(M: Matrix, alpha, prec: int) -> Matrix:
    vals = [[power_scalar(v, alpha, prec) for v in r] for r in M.rows()]
    return _matrix(vals, prec)
