"""Scalars, immutable matrices, determinants and minor enumeration.

Two scalar variants are supported and never mixed implicitly:

* exact  -- :class:`fractions.Fraction`, always in lowest terms;
* float  -- :class:`mpmath.mpf` carried at a fixed binary precision.

A :class:`Matrix` holds entries of one variant only.  Converting between
variants is explicit (:meth:`Matrix.to_float`, :meth:`Matrix.to_exact`).
"""

from __future__ import annotations

import itertools
import math
import os
from fractions import Fraction
from math import comb
from typing import Iterable, Iterator, NamedTuple, Sequence

import mpmath

DEFAULT_PRECISION = 128
BASE_REL_TOL = 1e-9  # sign band at double precision (53 bits)


def default_precision() -> int:
    """Working precision in bits; ``TOTPOS_PRECISION`` overrides the default."""
    value = os.environ.get("TOTPOS_PRECISION")
    if not value:
        return DEFAULT_PRECISION
    prec = int(value)
    if prec < 53:
        raise ValueError(f"TOTPOS_PRECISION must be >= 53, got {prec}")
    return prec


def default_rel_tol(prec: int) -> float:
    """Relative sign tolerance for float minors at ``prec`` bits.

    1e-9 at 53 bits, shrinking by a factor 2 per additional bit.
    """
    return BASE_REL_TOL * 2.0 ** (53 - prec)


class MinorIndex(NamedTuple):
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.rows)


class DomainError(ValueError):
    """A scalar function was evaluated outside its domain."""


# --------------------------------------------------------------------------
# scalars


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def parse_scalar(text: str, exact: bool = True, prec: int | None = None):
    """Parse ``"p/q"``, an integer, or a decimal literal.

    With ``exact`` the result is a :class:`Fraction` (decimals are read
    exactly); otherwise an ``mpf`` at ``prec`` bits.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty scalar literal")
    if exact:
        try:
            value = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad rational literal {text!r}") from exc
        if "/" in text and int(text.split("/")[1]) <= 0:
            raise ValueError(f"denominator must be positive in {text!r}")
        return value
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        if "/" in text:
            num, den = text.split("/")
            return mpmath.mpf(num) / mpmath.mpf(den)
        try:
            return mpmath.mpf(text)
        except ValueError as exc:
            raise ValueError(f"bad float literal {text!r}") from exc


def format_scalar(value, prec: int | None = None) -> str:
    """Inverse of :func:`parse_scalar`; floats keep enough digits to round-trip."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return str(value)
    prec = prec or default_precision()
    dps = mpmath.libmp.repr_dps(prec)
    return mpmath.libmp.to_str(value._mpf_, dps)


def to_mpf(value, prec: int):
    """Round ``value`` to an mpf of ``prec`` bits (nearest)."""
    libmp = mpmath.libmp
    rnd = libmp.round_nearest
    if isinstance(value, mpmath.mpf):
        t = value._mpf_
        return value if t[3] <= prec else mpmath.mp.make_mpf(libmp.mpf_pos(t, prec, rnd))
    if isinstance(value, Fraction):
        return mpmath.mp.make_mpf(libmp.from_rational(value.numerator, value.denominator, prec, rnd))
    if isinstance(value, int) and not isinstance(value, bool):
        return mpmath.mp.make_mpf(libmp.from_int(value, prec, rnd))
    with mpmath.workprec(prec):
        if isinstance(value, Fraction):
            return mpmath.mpf(value.numerator) / value.denominator
        return mpmath.mpf(value)


# --------------------------------------------------------------------------
# matrices


class Matrix:
    """Immutable dense ``m x n`` matrix with entries of a single scalar variant.

    Parameters
    ----------
    rows:
        Nested sequence of entries (row-major).
    exact:
        ``True`` for rational entries, ``False`` for mpf entries.  When
        omitted the variant is inferred; mixing ints/Fractions with floats
        raises ``TypeError`` (use :meth:`to_float` instead).
    prec:
        Binary precision of float entries.
    """

    __slots__ = ("_rows", "m", "n", "exact", "prec")

    def __init__(self, rows: Iterable[Iterable], exact: bool | None = None,
                 prec: int | None = None):
        data = [list(r) for r in rows]
        if not data or not data[0]:
            raise ValueError("matrix must have at least one row and column")
        n = len(data[0])
        if any(len(r) != n for r in data):
            raise ValueError("ragged matrix rows")
        self.prec = prec or default_precision()
        flat = [v for r in data for v in r]
        if exact is None:
            kinds = {is_exact(v) for v in flat}
            if len(kinds) > 1:
                raise TypeError("mixed exact and float entries; convert explicitly")
            exact = kinds.pop()
        self.exact = bool(exact)
        if self.exact:
            conv = []
            for v in flat:
                if not is_exact(v):
                    raise TypeError(f"non-rational entry {v!r} in exact matrix")
                conv.append(Fraction(v))
        else:
            conv = [to_mpf(v, self.prec) for v in flat]
        self.m = len(data)
        self.n = n
        self._rows = tuple(tuple(conv[i * n:(i + 1) * n]) for i in range(self.m))

    # construction helpers
    @classmethod
    def from_function(cls, m: int, n: int, fn, exact=None, prec=None) -> "Matrix":
        return cls([[fn(i, j) for j in range(n)] for i in range(m)], exact=exact, prec=prec)

    @classmethod
    def identity(cls, n: int, exact: bool = True, prec=None) -> "Matrix":
        return cls.from_function(n, n, lambda i, j: int(i == j), exact=exact, prec=prec)

    @classmethod
    def zeros(cls, m: int, n: int, exact: bool = True, prec=None) -> "Matrix":
        return cls.from_function(m, n, lambda i, j: 0, exact=exact, prec=prec)

    # access
    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    @property
    def is_square(self) -> bool:
        return self.m == self.n

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i][j]

    def rows(self) -> tuple[tuple, ...]:
        return self._rows

    def tolist(self) -> list[list]:
        return [list(r) for r in self._rows]

    def __iter__(self):
        return iter(self._rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.exact == other.exact and self._rows == other._rows

    def __hash__(self):
        return hash((self.exact, self._rows))

    def __repr__(self) -> str:
        kind = "exact" if self.exact else f"float{self.prec}"
        body = "; ".join(", ".join(format_scalar(v, 30) if not self.exact else str(v)
                                   for v in r) for r in self._rows)
        return f"Matrix[{kind}]({self.m}x{self.n}: {body})"

    # conversions
    def to_float(self, prec: int | None = None) -> "Matrix":
        """Explicit conversion to float entries (lossy for non-dyadic rationals)."""
        prec = prec or self.prec
        return Matrix(self._rows, exact=False, prec=prec)

    def to_exact(self) -> "Matrix":
        """Exact binary value of every float entry."""
        if self.exact:
            return self
        return Matrix([[_mpf_to_fraction(v) for v in r] for r in self._rows],
                      exact=True, prec=self.prec)

    # structure
    @property
    def T(self) -> "Matrix":
        return Matrix(list(zip(*self._rows)), exact=self.exact, prec=self.prec)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix([[self._rows[i][j] for j in cols] for i in rows],
                      exact=self.exact, prec=self.prec)

    def truncation(self) -> "Matrix":
        """The matrix with its first row and last column deleted."""
        if self.m < 2 or self.n < 2:
            raise ValueError("truncation needs at least 2 rows and 2 columns")
        return self.submatrix(range(1, self.m), range(self.n - 1))

    def map(self, fn, exact: bool | None = None) -> "Matrix":
        return Matrix([[fn(v) for v in r] for r in self._rows],
                      exact=self.exact if exact is None else exact, prec=self.prec)

    def scale(self, c) -> "Matrix":
        with mpmath.workprec(self.prec):
            return self.map(lambda v: c * v)

    def __add__(self, other: "Matrix") -> "Matrix":
        _check_compatible(self, other)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        with mpmath.workprec(self.prec):
            return Matrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)],
                          exact=self.exact, prec=self.prec)

    def __sub__(self, other: "Matrix") -> "Matrix":
        _check_compatible(self, other)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        with mpmath.workprec(self.prec):
            return Matrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)],
                          exact=self.exact, prec=self.prec)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        _check_compatible(self, other)
        if self.n != other.m:
            raise ValueError("shape mismatch in product")
        cols = list(zip(*other._rows))
        with mpmath.workprec(self.prec):
            out = [[_dot(r, c, self.exact) for c in cols] for r in self._rows]
        return Matrix(out, exact=self.exact, prec=self.prec)

    def direct_sum(self, other: "Matrix") -> "Matrix":
        _check_compatible(self, other)
        m, n = self.m + other.m, self.n + other.n
        zero = Fraction(0) if self.exact else mpmath.mpf(0)
        out = [[zero] * n for _ in range(m)]
        for i, r in enumerate(self._rows):
            out[i][:self.n] = r
        for i, r in enumerate(other._rows):
            out[self.m + i][self.n:] = r
        return Matrix(out, exact=self.exact, prec=self.prec)

    def norm_max(self):
        """Largest absolute entry."""
        return max(abs(v) for r in self._rows for v in r)

    def distance(self, other: "Matrix"):
        """Largest absolute entrywise difference."""
        return (self - other).norm_max()


def _mpf_to_fraction(v) -> Fraction:
    if not v:
        return Fraction(0)
    man, exp = v.man_exp
    return Fraction(man) * Fraction(2) ** exp


def _dot(r, c, exact):
    if exact:
        return sum((a * b for a, b in zip(r, c)), Fraction(0))
    return mpmath.fsum(a * b for a, b in zip(r, c))


def _check_compatible(a: Matrix, b: Matrix) -> None:
    if a.exact != b.exact:
        raise TypeError("cannot combine exact and float matrices implicitly")


# --------------------------------------------------------------------------
# determinants


def _row_scalings(rows: Sequence[Sequence[Fraction]]) -> list[int]:
    out = []
    for r in rows:
        lcm = 1
        for v in r:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        out.append(lcm)
    return out


def _clear_denominators(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], int]:
    """Scale each row to integers; returns the integer rows and the product of scalings."""
    lcms = _row_scalings(rows)
    out = [[v.numerator * (lcm // v.denominator) for v in r] for r, lcm in zip(rows, lcms)]
    return out, math.prod(lcms)


def bareiss_det(a: list[list[int]]) -> int:
    """Fraction-free elimination on a square integer matrix (modified in place)."""
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - aik * row_k[j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def _magnitude(v) -> int | None:
    """Binary exponent ``e`` with ``2^(e-1) <= |v| < 2^e``; ``None`` for zero."""
    _sign, man, exp, bc = v._mpf_
    return exp + bc if man else None


def _equilibration(mags, n: int):
    """Power-of-two row and column exponents bringing every line to unit scale.

    Both orders (rows first, columns first) are tried; the one with the
    smaller total exponent is returned as ``(row_shifts, col_shifts)``.
    """
    def lines(first_rows: bool):
        get = (lambda t, u: mags[t][u]) if first_rows else (lambda t, u: mags[u][t])
        first = []
        for t in range(n):
            vals = [get(t, u) for u in range(n) if get(t, u) is not None]
            first.append(max(vals) if vals else 0)
        second = []
        for u in range(n):
            vals = [get(t, u) - first[t] for t in range(n) if get(t, u) is not None]
            second.append(max(vals) if vals else 0)
        return (first, second) if first_rows else (second, first)

    return min((lines(True), lines(False)), key=lambda rc: sum(rc[0]) + sum(rc[1]))


def _float_det(rows, prec: int):
    # Rows and columns are first brought to unit scale by exact power-of-two
    # factors, so the elimination error stays relative to the line maxima
    # rather than to the largest entry of the whole matrix.
    n = len(rows)
    with mpmath.workprec(prec):
        if n == 1:
            return mpmath.mpf(rows[0][0])
        if n == 2:  # error already bounded by the line products
            (p, q), (r, t) = rows
            return mpmath.mpf(p) * t - mpmath.mpf(q) * r
        a = [[mpmath.mpf(v) for v in r] for r in rows]
        rsh, csh = _equilibration([[_magnitude(v) for v in r] for r in a], n)
        a = [[mpmath.ldexp(v, -(rsh[i] + csh[j])) if v else v for j, v in enumerate(r)]
             for i, r in enumerate(a)]
        shift = sum(rsh) + sum(csh)
        det = mpmath.mpf(1)
        for k in range(n):
            p = max(range(k, n), key=lambda i: abs(a[i][k]))
            if a[p][k] == 0:
                return mpmath.mpf(0)
            if p != k:
                a[k], a[p] = a[p], a[k]
                det = -det
            pivot = a[k][k]
            det *= pivot
            for i in range(k + 1, n):
                f = a[i][k] / pivot
                if f:
                    row_i, row_k = a[i], a[k]
                    for j in range(k + 1, n):
                        row_i[j] -= f * row_k[j]
        return mpmath.ldexp(det, shift)


def _det_rows(rows, exact: bool, prec: int):
    if exact:
        ints, scale = _clear_denominators(rows)
        return Fraction(bareiss_det(ints), scale)
    return _float_det(rows, prec)


def det(M: Matrix):
    """Determinant: fraction-free for exact matrices, pivoted elimination for floats."""
    if not M.is_square:
        raise ValueError(f"determinant of non-square {M.m}x{M.n} matrix")
    return _det_rows(M.rows(), M.exact, M.prec)


def cofactor_det(M: Matrix):
    """Determinant by cofactor expansion (slow reference implementation)."""
    if not M.is_square:
        raise ValueError("determinant of non-square matrix")

    def rec(rows):
        if len(rows) == 1:
            return rows[0][0]
        total = 0
        for j, v in enumerate(rows[0]):
            if v == 0:
                continue
            rest = [r[:j] + r[j + 1:] for r in rows[1:]]
            total += (-1) ** j * v * rec(rest)
        return total

    with mpmath.workprec(M.prec):
        out = rec([list(r) for r in M.rows()])
    return Fraction(out) if M.exact else mpmath.mpf(out)


def _validate_index(M: Matrix, idx: MinorIndex) -> None:
    rows, cols = tuple(idx.rows), tuple(idx.cols)
    if len(rows) != len(cols) or not rows:
        raise ValueError(f"ragged minor index {idx}")
    for seq, bound in ((rows, M.m), (cols, M.n)):
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise ValueError(f"minor index not strictly increasing: {idx}")
        if seq[0] < 0 or seq[-1] >= bound:
            raise IndexError(f"minor index {idx} out of bounds for {M.m}x{M.n}")


def minor(M: Matrix, idx: MinorIndex | tuple):
    """Determinant of the submatrix selected by ``idx`` (0-based rows/cols)."""
    idx = MinorIndex(tuple(idx[0]), tuple(idx[1]))
    _validate_index(M, idx)
    rows = [[M[i, j] for j in idx.cols] for i in idx.rows]
    return _det_rows(rows, M.exact, M.prec)


def enumerate_minors(m: int, n: int, k: int, contiguous: bool = False) -> Iterator[MinorIndex]:
    """Lazily yield ``k x k`` minor indices in lexicographic (rows, cols) order."""
    if not 1 <= k <= min(m, n):
        raise ValueError(f"minor size {k} out of range for {m}x{n}")
    if contiguous:
        for i in range(m - k + 1):
            rows = tuple(range(i, i + k))
            for j in range(n - k + 1):
                yield MinorIndex(rows, tuple(range(j, j + k)))
        return
    col_sets = list(itertools.combinations(range(n), k))
    for rows in itertools.combinations(range(m), k):
        for cols in col_sets:
            yield MinorIndex(rows, cols)


def count_minors(m: int, n: int, k: int, contiguous: bool = False) -> int:
    if contiguous:
        return (m - k + 1) * (n - k + 1)
    return comb(m, k) * comb(n, k)


def iter_all_minors(M: Matrix, max_order: int | None = None):
    """Yield ``(MinorIndex, value)`` for every minor up to ``max_order``.

    Order is by size, then lexicographic.  Each level is computed from the
    previous one by Laplace expansion along the first selected row, so a
    full sweep costs O(k) operations per minor.  Exact matrices are scaled to
    integers once up front.
    """
    kmax = min(M.m, M.n) if max_order is None else max_order
    if M.exact:
        lcms = _row_scalings(M.rows())
        a, _ = _clear_denominators(M.rows())
    else:
        a = [list(r) for r in M.rows()]
    prev: dict = {}
    ctx = mpmath.workprec(M.prec)
    ctx.__enter__()
    try:
        for k in range(1, kmax + 1):
            cur: dict = {}
            col_sets = list(itertools.combinations(range(M.n), k))
            for rows in itertools.combinations(range(M.m), k):
                r0 = a[rows[0]]
                rest = rows[1:]
                for cols in col_sets:
                    if k == 1:
                        val = r0[cols[0]]
                    else:
                        val = 0
                        sgn = 1
                        for t, c in enumerate(cols):
                            entry = r0[c]
                            if entry:
                                sub = prev[(rest, cols[:t] + cols[t + 1:])]
                                if sub:
                                    val = val + entry * sub if sgn > 0 else val - entry * sub
                            sgn = -sgn
                    cur[(rows, cols)] = val
                    if M.exact:
                        denom = 1
                        for i in rows:
                            denom *= lcms[i]
                        yield MinorIndex(rows, cols), Fraction(val, denom)
                    else:
                        yield MinorIndex(rows, cols), mpmath.mpf(val)
            prev = cur
    finally:
        ctx.__exit__(None, None, None)


# --------------------------------------------------------------------------
# rank and sign policy


def rank(M: Matrix, rel_tol: float | None = None) -> int:
    """Exact rank, or numerical rank with pivot threshold ``rel_tol * max(1, |M|)``."""
    if M.exact:
        a, _ = _clear_denominators(M.rows())
        m, n = M.m, M.n
        r = 0
        prev = 1
        for c in range(n):
            piv = next((i for i in range(r, m) if a[i][c] != 0), None)
            if piv is None:
                continue
            a[r], a[piv] = a[piv], a[r]
            p = a[r][c]
            for i in range(r + 1, m):
                aic = a[i][c]
                for j in range(c + 1, n):
                    a[i][j] = (a[i][j] * p - aic * a[r][j]) // prev
                a[i][c] = 0
            prev = p
            r += 1
            if r == m:
                break
        return r
    tol = (default_rel_tol(M.prec) if rel_tol is None else rel_tol)
    with mpmath.workprec(M.prec):
        a = [list(r) for r in M.rows()]
        thresh = tol * max(1, M.norm_max())
        m, n = M.m, M.n
        r = 0
        cols = list(range(n))
        while r < min(m, n):
            best, bi, bj = mpmath.mpf(0), -1, -1
            for i in range(r, m):
                for j in range(r, n):
                    if abs(a[i][cols[j]]) > best:
                        best, bi, bj = abs(a[i][cols[j]]), i, j
            if best <= thresh:
                break
            a[r], a[bi] = a[bi], a[r]
            cols[r], cols[bj] = cols[bj], cols[r]
            p = a[r][cols[r]]
            for i in range(r + 1, m):
                f = a[i][cols[r]] / p
                for j in range(r, n):
                    a[i][cols[j]] -= f * a[r][cols[j]]
            r += 1
        return r


def minor_scales(M: Matrix):
    """Per-row and per-column largest absolute entries (as mpf)."""
    with mpmath.workprec(M.prec):
        rows = [max((abs(to_mpf(v, M.prec)) for v in r), default=mpmath.mpf(0)) for r in M.rows()]
        cols = [max(abs(to_mpf(M[i, j], M.prec)) for i in range(M.m)) for j in range(M.n)]
    return rows, cols


def sign_tolerance(M: Matrix, idx, rel_tol: float | None = None, scales=None):
    """Indeterminacy band for a float minor of ``M``.

    For a :class:`MinorIndex` the band is ``rel_tol`` times the smaller of the
    products of the selected rows' and columns' largest entries (a
    Hadamard-type bound on the minor's magnitude).  An integer ``k`` falls back
    to ``rel_tol * max(1, |M|^k)``.
    """
    tol = default_rel_tol(M.prec) if rel_tol is None else rel_tol
    with mpmath.workprec(M.prec):
        if isinstance(idx, int):
            return tol * max(mpmath.mpf(1), M.norm_max() ** idx)
        rmax, cmax = scales if scales is not None else minor_scales(M)
        pr = mpmath.fprod(rmax[i] for i in idx.rows)
        pc = mpmath.fprod(cmax[j] for j in idx.cols)
        return tol * min(pr, pc)


def classify_sign(value, M: Matrix, idx, rel_tol: float | None = None,
                  scales=None) -> int | None:
    """+1, -1, 0 for exact values; for floats ``None`` inside the tolerance band."""
    if M.exact:
        return (value > 0) - (value < 0)
    tau = sign_tolerance(M, idx, rel_tol, scales)
    if value > tau:
        return 1
    if value < -tau:
        return -1
    return None


def _exact_root(q: Fraction, k: int) -> Fraction | None:
    """The rational ``k``-th root of ``q >= 0`` if it exists."""
    def iroot(v: int) -> int | None:
        if v < 2:
            return v
        x = 1 << -(-v.bit_length() // k)
        while True:
            y = ((k - 1) * x + v // x ** (k - 1)) // k
            if y >= x:
                break
            x = y
        return x if x ** k == v else None

    num, den = iroot(q.numerator), iroot(q.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def power_scalar(x, alpha, prec: int, exact: bool = True):
    """``x ** alpha`` on ``x >= 0`` with the convention ``0 ** 0 == 0``.

    Exact inputs stay exact when the result is rational (integer exponents,
    or rational exponents of perfect powers); otherwise an mpf at ``prec``.
    """
    if x < 0:
        raise DomainError(f"power of negative number {x}")
    if x == 0:
        if alpha < 0:
            raise DomainError("negative power of zero")
        return Fraction(0) if (exact and is_exact(x)) else mpmath.mpf(0)
    if exact and is_exact(x) and is_exact(alpha):
        alpha = Fraction(alpha)
        x = Fraction(x)
        if alpha.denominator == 1:
            return x ** alpha.numerator
        root = _exact_root(x, alpha.denominator)
        if root is not None:
            return root ** alpha.numerator
    with mpmath.workprec(prec):
        return to_mpf(x, prec) ** to_mpf(alpha, prec)
