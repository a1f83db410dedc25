"""Constructive TP completions and embeddings.

Everything returned here has been re-checked by :mod:`totpos.checker`; a
construction that does not verify raises :class:`VerificationError` rather
than being handed back.  Indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import checker
from .numkernel import (
    Matrix,
    MinorIndex,
    _exact_root,
    default_precision,
    det,
    is_exact,
    minor,
    power_scalar,
    rank,
    to_mpf,
)


class VerificationError(ValueError):
    """A construction failed its post-hoc checker verification."""

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class UnsupportedError(ValueError):
    pass


def _as_matrix(A) -> Matrix:
    return A if isinstance(A, Matrix) else Matrix(A)


def _require_tp_2x2(A: Matrix) -> None:
    if A.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if not checker.is_tp(A, full=True):
        raise ValueError("input 2x2 matrix is not totally positive")


def _log(v, prec):
    return mpmath.log(to_mpf(v, prec))


def _ratio(num, den):
    return Fraction(num) / Fraction(den) if is_exact(num) and is_exact(den) else num / den


def _log_ratio_exponent(target, base, prec):
    """Solve ``base^t = target`` for ``t`` (exact when ``target`` is an integer power)."""
    if is_exact(target) and is_exact(base):
        t, b = Fraction(target), Fraction(base)
        for k in range(-64, 65):
            if b ** k == t:
                return Fraction(k)
    return _log(target, prec) / _log(base, prec)


# --------------------------------------------------------------------------
# 2x2 -> generalized Vandermonde


@dataclass(frozen=True)
class VandermondeEmbedding:
    """``(u_i ** alpha_j)`` contains ``mu * A`` on ``rows x cols``."""

    mu: object
    nodes: tuple
    exponents: tuple
    rows: tuple = (0, 1)
    cols: tuple = (0, 1)
    case: str = "generic"
    prec: int = 128

    @property
    def increasing(self) -> bool:
        return self.nodes[1] > self.nodes[0]

    def realize(self, m: int | None = None, n: int | None = None) -> Matrix:
        m = len(self.nodes) if m is None else m
        n = len(self.exponents) if n is None else n
        if m > len(self.nodes) or n > len(self.exponents):
            raise ValueError("embedding has too few nodes or exponents")
        with mpmath.workprec(self.prec):
            rows = [[power_scalar(u, a, self.prec) if a >= 0 else _neg_power(u, a, self.prec)
                     for a in self.exponents[:n]] for u in self.nodes[:m]]
        exact = all(is_exact(v) for r in rows for v in r)
        if not exact:
            rows = [[to_mpf(v, self.prec) for v in r] for r in rows]
        return Matrix(rows, exact=exact, prec=self.prec)

    def selected(self, m: int | None = None, n: int | None = None):
        """The 2x2 submatrix of :meth:`realize` at the embedding position."""
        R = self.realize(m, n)
        return [[R[i, j] for j in self.cols] for i in self.rows]

    def record(self) -> dict:
        return {"mu": self.mu, "u": list(self.nodes), "alpha": list(self.exponents),
                "rows": list(self.rows), "cols": list(self.cols), "case": self.case}


def _neg_power(u, a, prec):
    if is_exact(u) and is_exact(a) and Fraction(a).denominator == 1:
        return Fraction(u) ** int(a)
    with mpmath.workprec(prec):
        return to_mpf(u, prec) ** to_mpf(a, prec)


def _unify(pair, prec):
    """Keep a pair exact only if both members are; float pairs share one type."""
    if all(is_exact(v) for v in pair):
        return tuple(Fraction(v) for v in pair)
    return tuple(to_mpf(v, prec) for v in pair)


def _solve_2x2(A: Matrix, prec: int):
    """Return ``(case, mu, (u1, u2), (alpha1, alpha2))`` with ``u_i^alpha_j = mu A_ij``."""
    case, mu, u, alpha = _solve_cases(A, prec)
    return case, mu, _unify(u, prec), _unify(alpha, prec)


def _solve_cases(A: Matrix, prec: int):
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    half, two = Fraction(1, 2), Fraction(2)
    with mpmath.workprec(prec):
        if b == c == d:  # [[l, 1], [1, 1]], l > 1
            return "A1", _ratio(1, b), (_ratio(a, b), Fraction(1)), (Fraction(1), Fraction(0))
        if a == c == d:  # [[1, m], [1, 1]], m < 1
            t = _log_ratio_exponent(_ratio(b, a), half, prec)
            return "A2", _ratio(1, a), (half, Fraction(1)), (Fraction(0), t)
        if a == b == d:  # [[1, 1], [m, 1]]
            t = _log_ratio_exponent(_ratio(c, a), half, prec)
            return "A3", _ratio(1, a), (Fraction(1), half), (t, Fraction(0))
        if a == b == c:  # [[1, 1], [1, l]], l > 1
            t = _log_ratio_exponent(_ratio(d, a), two, prec)
            return "A4", _ratio(1, a), (Fraction(1), two), (Fraction(0), t)
        if a == b:  # [[1, 1], [g, h]]
            g, h = _ratio(c, a), _ratio(d, a)
            return "A5", _ratio(1, a), (Fraction(1), g), (Fraction(1), _log_ratio_exponent(h, g, prec))
        if c == d:  # [[h, g], [1, 1]]
            g, h = _ratio(b, c), _ratio(a, c)
            return "A6", _ratio(1, c), (h, Fraction(1)), (Fraction(1), _log_ratio_exponent(g, h, prec))
        if b == d:  # [[h, 1], [g, 1]]
            return "A7", _ratio(1, b), (_ratio(a, b), _ratio(c, b)), (Fraction(1), Fraction(0))
        if a == c:  # [[1, g], [1, h]]
            return "A8", _ratio(1, a), (_ratio(b, a), _ratio(d, a)), (Fraction(0), Fraction(1))
        la, lb, lc, ld = (_log(v, prec) for v in (a, b, c, d))
        mu = mpmath.exp((lb * lc - la * ld) / (la + ld - lb - lc))
        alpha2 = (lb - ld) / (la - lc)
        return "generic", mu, (mu * to_mpf(a, prec), mu * to_mpf(c, prec)), (Fraction(1), alpha2)


def _pad(u1, u2, a1, a2, K):
    """Continue the solved pair with its own node ratio and exponent step."""
    return _grid(u1, u2, 0, 1, K, geometric=True), _grid(a1, a2, 0, 1, K, geometric=False)


def _decided(test, M: Matrix) -> checker.Certificate:
    """Run ``test``; if a float matrix is inconclusive, decide on its exact
    binary value instead (constructions here span many orders of magnitude)."""
    cert = test(M)
    if cert.verdict is checker.Verdict.INCONCLUSIVE and not M.exact:
        cert = test(M.to_exact())
    return cert


def _verify_embedding(emb: VandermondeEmbedding, A: Matrix, m: int, n: int) -> VandermondeEmbedding:
    R = emb.realize(m, n)
    cert = checker.is_tp(R)
    if not cert.holds:
        raise VerificationError(f"generalized Vandermonde realization is not TP ({cert.verdict.value})", cert)
    sel = [[R[i, j] for j in emb.cols] for i in emb.rows]
    with mpmath.workprec(emb.prec):
        tol = mpmath.mpf(2) ** (16 - emb.prec)
        for i in range(2):
            for j in range(2):
                want = emb.mu * A[i, j]
                got = sel[i][j]
                if is_exact(want) and is_exact(got):
                    ok = want == got
                else:
                    ok = abs(to_mpf(got, emb.prec) - to_mpf(want, emb.prec)) <= tol * max(1, abs(to_mpf(want, emb.prec)))
                if not ok:
                    raise VerificationError(f"embedded entry ({i}, {j}) does not match mu*A")
    return emb


def _escalating(build, prec: int):
    """Run ``build(prec)``, doubling the precision (up to 4x) while float
    verification is inconclusive."""
    for p in (prec, 2 * prec, 4 * prec):
        try:
            return build(p)
        except VerificationError as exc:
            cert = exc.certificate
            if cert is None or cert.verdict is not checker.Verdict.INCONCLUSIVE or p == 4 * prec:
                raise


def embed_2x2_vandermonde(A, m: int, n: int, prec: int | None = None) -> VandermondeEmbedding:
    """Embed a positive multiple of a TP 2x2 ``A`` as the leading block of a
    TP generalized Vandermonde matrix with ``K = max(m, n)`` nodes."""
    A = _as_matrix(A)
    if m < 2 or n < 2:
        raise ValueError("need m, n >= 2")
    _require_tp_2x2(A)

    def build(bits):
        case, mu, (u1, u2), (a1, a2) = _solve_2x2(A, bits)
        assert (u2 > u1) == (a2 > a1) and u1 != u2, "degenerate case detection failed"
        with mpmath.workprec(bits):
            nodes, exps = _pad(u1, u2, a1, a2, max(m, n))
        emb = VandermondeEmbedding(mu, nodes, exps, (0, 1), (0, 1), case, bits)
        return _verify_embedding(emb, A, m, n)

    return _escalating(build, prec or default_precision())


def _grid(first, second, lo: int, hi: int, K: int, geometric: bool):
    """Length-``K`` progression with ``g[lo] = first`` and ``g[hi] = second``.

    Geometric grids keep the ratio ``(second/first)^(1/(hi-lo))`` throughout,
    arithmetic ones the step ``(second-first)/(hi-lo)``.  The realized matrix
    is then a diagonal rescaling of ``(q^(ij))`` and stays well conditioned.
    """
    span = hi - lo
    ends = (first, second)
    if geometric:
        ratio = None
        if is_exact(first) and is_exact(second):
            ratio = _exact_root(Fraction(second) / Fraction(first), span)
        if ratio is None:
            ratio = (to_mpf(second, mpmath.mp.prec) / to_mpf(first, mpmath.mp.prec)) ** (mpmath.mpf(1) / span)
            first = to_mpf(first, mpmath.mp.prec)
        g = [first * ratio ** (i - lo) for i in range(K)]
    else:
        if is_exact(first) and is_exact(second):
            step = (Fraction(second) - Fraction(first)) / span
        else:
            first = to_mpf(first, mpmath.mp.prec)
            step = (to_mpf(second, mpmath.mp.prec) - first) / span
        g = [first + step * (i - lo) for i in range(K)]
    if all(is_exact(v) for v in g) or not any(is_exact(v) for v in ends):
        g[lo], g[hi] = ends  # the solved values themselves, not recomputed ones
    else:
        g[lo], g[hi] = (to_mpf(v, mpmath.mp.prec) for v in ends)
    return tuple(g)


def embed_2x2_at_position(A, m: int, n: int, rows, cols,
                          prec: int | None = None) -> VandermondeEmbedding:
    """Place a positive multiple of TP ``A`` at ``rows x cols`` of a TP ``m x n``.

    Nodes form a geometric and exponents an arithmetic progression through
    the two solved values.
    """
    A = _as_matrix(A)
    p, p2 = rows
    q, q2 = cols
    if not (0 <= p < p2 < m and 0 <= q < q2 < n):
        raise IndexError(f"position rows={rows}, cols={cols} invalid for {m}x{n}")
    _require_tp_2x2(A)
    K = max(m, n)

    def build(bits):
        case, mu, (u1, u2), (a1, a2) = _solve_2x2(A, bits)
        assert (u2 > u1) == (a2 > a1) and u1 != u2, "degenerate case detection failed"
        with mpmath.workprec(bits):
            nodes = _grid(u1, u2, p, p2, K, geometric=True)
            exps = _grid(a1, a2, q, q2, K, geometric=False)
        emb = VandermondeEmbedding(mu, nodes, exps, (p, p2), (q, q2), case, bits)
        return _verify_embedding(emb, A, m, n)

    return _escalating(build, prec or default_precision())


# --------------------------------------------------------------------------
# Hankel completions


def _hankel(moments, size: int, prec: int) -> Matrix:
    rows = [[moments[i + j] for j in range(size)] for i in range(size)]
    exact = all(is_exact(v) for r in rows for v in r)
    if not exact:
        rows = [[to_mpf(v, prec) for v in r] for r in rows]
    return Matrix(rows, exact=exact, prec=prec)


def hankel_from_moments(moments, prec: int | None = None) -> Matrix:
    """Square Hankel matrix ``(s_{i+j})`` from ``s_0..s_{2N}``."""
    if len(moments) % 2 == 0:
        raise ValueError("need an odd number of moments s_0..s_2N")
    return _hankel(list(moments), (len(moments) + 1) // 2, prec or default_precision())


def _verify_hankel(H: Matrix, what: str) -> None:
    cert = _decided(checker.is_tp_hankel, H)
    if not cert.holds:
        raise VerificationError(f"{what} is not TP ({cert.verdict.value}, witness {cert.witness})", cert)


@dataclass(frozen=True)
class BackwardsExtension:
    s_minus1: object
    s_minus2: object
    margin: object
    roots: tuple = ()


@dataclass(frozen=True)
class HankelCompletion:
    s: object
    scale: object
    moments: tuple
    size: int
    n: int = 0
    k: int = 1
    extensions: tuple = field(default=())
    prec: int = 128

    @property
    def matrix(self) -> Matrix:
        return _hankel(self.moments, self.size, self.prec)

    def record(self) -> dict:
        return {"s": self.s, "scale": self.scale, "moments": list(self.moments),
                "size": self.size, "n": self.n, "k": self.k,
                "extensions": [{"s_minus1": e.s_minus1, "s_minus2": e.s_minus2,
                                "margin": e.margin} for e in self.extensions]}


def _solve_h(rho, prec):
    """Positive root of ``(s+1)^2 / (2s+1) = rho``: ``s = rho - 1 + sqrt(rho(rho-1))``."""
    disc = rho * (rho - 1)
    if is_exact(disc):
        root = _exact_root(Fraction(disc), 2)
        if root is not None:
            return rho - 1 + root
    with mpmath.workprec(prec):
        return to_mpf(rho, prec) - 1 + mpmath.sqrt(to_mpf(disc, prec))


def _check_sym_tp(a, b, c):
    if not (a > 0 and b > 0 and c > 0 and a * c > b * b):
        raise ValueError("target [[a, b], [b, c]] must be TP (a, b, c > 0 and ac > b^2)")


def _stretched_moments(a, b, s, k: int, count: int, prec: int):
    """``a * C^j / (j s / k + 1)`` with ``C = ((b/a)(s+1))^(1/k)``."""
    base = _ratio(b, a) * (s + 1)
    exact = is_exact(base) and is_exact(s)
    if exact and k > 1:
        C = _exact_root(Fraction(base), k)
        exact = C is not None
    else:
        C = base
    out = []
    with mpmath.workprec(prec):
        if not exact:
            C = to_mpf(base, prec) ** (mpmath.mpf(1) / k)
        for j in range(count):
            if exact:
                out.append(Fraction(a) * Fraction(C) ** j / (Fraction(j) * s / k + 1))
            else:
                out.append(to_mpf(a, prec) * C ** j / (j * to_mpf(s, prec) / k + 1))
    return out


def complete_hankel_sym(a, b, c, delta: int, prec: int | None = None) -> HankelCompletion:
    """Embed TP ``[[a, b], [b, c]]`` as the leading block of a TP ``delta x delta``
    Hankel moment matrix of ``f(x) = a'(s+1) x^s`` on [0, 1]."""
    if delta < 2:
        raise ValueError("delta must be at least 2")
    _check_sym_tp(a, b, c)
    prec = prec or default_precision()
    rho = _ratio(a * c, b * b)
    s = _solve_h(rho, prec)
    moments = _stretched_moments(a, b, s, 1, 2 * delta - 1, prec)
    moments[:3] = [a, b, c]  # exact by construction; removes float drift
    done = HankelCompletion(s, a, tuple(moments), delta, prec=prec)
    _verify_hankel(done.matrix, "Hankel completion")
    return done


def _affine_root(rows, prec):
    """Root of ``det`` as a function of the (0, 0) entry, and the cofactor."""
    exact = all(is_exact(v) for r in rows for v in r)
    size = len(rows)
    mk = (lambda r: Matrix(r)) if exact else (lambda r: Matrix(r, exact=False, prec=prec))
    if size == 1:
        return Fraction(0) if exact else mpmath.mpf(0), Fraction(1) if exact else mpmath.mpf(1)
    cof = det(mk([r[1:] for r in rows[1:]]))
    z = [list(r) for r in rows]
    z[0][0] = Fraction(0) if exact else mpmath.mpf(0)
    const = det(mk(z))
    with mpmath.workprec(prec):
        return -const / cof, cof


def _default_margin(root):
    return max(1, abs(root))


def extend_backwards(moments, margin=None, prec: int | None = None,
                     verify_input: bool = True):
    """Prepend ``s_-2, s_-1`` to a TP Hankel moment sequence ``s_0..s_2N``.

    Each new value is ``max(root, 0) + margin`` where ``root`` zeroes the
    relevant determinant; the default margin is ``max(1, |root|)``.  Returns
    ``(BackwardsExtension, extended_moments)``.
    """
    moments = list(moments)
    if len(moments) % 2 == 0 or len(moments) < 1:
        raise ValueError("need moments s_0..s_2N (odd length)")
    prec = prec or default_precision()
    N = (len(moments) - 1) // 2
    if verify_input:
        _verify_hankel(_hankel(moments, N + 1, prec), "input Hankel matrix")
    if margin is not None and margin < 0:
        raise ValueError("margin must be non-negative")
    with mpmath.workprec(prec):
        exact = all(is_exact(v) for v in moments) and (margin is None or is_exact(margin))
        zero = Fraction(0) if exact else mpmath.mpf(0)
        # A' has s_-1 in the corner and entries s_{-1 + i + j}, size N + 1.
        seq1 = [zero] + moments[:-1]
        root1, _ = _affine_root([[seq1[i + j] for j in range(N + 1)] for i in range(N + 1)], prec)
        m1 = _default_margin(root1) if margin is None else margin
        s1 = max(root1, 0) + m1
        # A'' has s_-2 in the corner and entries s_{-2 + i + j}, size N + 2.
        seq2 = [zero, s1] + moments
        root2, _ = _affine_root([[seq2[i + j] for j in range(N + 2)] for i in range(N + 2)], prec)
        m2 = _default_margin(root2) if margin is None else margin
        s2 = max(root2, 0) + m2
        extended = [s2, s1] + moments
    A2 = _hankel(extended, N + 2, prec)
    _verify_hankel(A2, "backwards extension A''")
    return BackwardsExtension(s1, s2, margin if margin is not None else (m1, m2),
                              (root1, root2)), tuple(extended)


def embed_equally_spaced(a, b, c, n: int, k: int, N: int,
                         prec: int | None = None) -> HankelCompletion:
    """TP ``(N+1) x (N+1)`` Hankel matrix with ``s_n = a, s_{n+k} = b, s_{n+2k} = c``."""
    if n < 0 or k < 1 or n + 2 * k > 2 * N:
        raise ValueError("need 0 <= n < n + 2k <= 2N")
    _check_sym_tp(a, b, c)
    prec = prec or default_precision()
    rho = _ratio(a * c, b * b)
    s = _solve_h(rho, prec)
    seq = _stretched_moments(a, b, s, k, 2 * N + 1, prec)
    for t, v in zip((0, k, 2 * k), (a, b, c)):
        if is_exact(seq[t]) or not is_exact(v):
            continue
        seq[t] = to_mpf(v, prec)  # pin prescribed values exactly
    exts = []
    for _ in range(math.ceil(n / 2)):
        ext, seq = extend_backwards(seq, prec=prec, verify_input=False)
        seq = list(seq)
        exts.append(ext)
    offset = 0 if n % 2 == 0 else 1  # leading block of M or of M^(1)
    final = tuple(seq[offset:offset + 2 * N + 1])
    done = HankelCompletion(s, a, final, N + 1, n, k, tuple(exts), prec)
    H = done.matrix
    _verify_hankel(H, "equally spaced embedding")
    with mpmath.workprec(prec):
        for t, want in zip((n, n + k, n + 2 * k), (a, b, c)):
            got = final[t]
            err = abs(to_mpf(got, prec) - to_mpf(want, prec))
            if err > 1e-12 * max(1, abs(to_mpf(want, prec))):
                raise VerificationError(f"prescribed entry s_{t} off by {err}")
    return done


# --------------------------------------------------------------------------
# Whitney-style densification


def gaussian_kernel(size: int, delta) -> Matrix:
    """``(delta^((i-j)^2))``: TP for ``0 < delta < 1``."""
    return Matrix([[Fraction(delta) ** ((i - j) ** 2) for j in range(size)] for i in range(size)])


def sandwich(M: Matrix, delta) -> Matrix:
    """``G M H`` with Gaussian kernels on both sides (exact)."""
    M = M if M.exact else M.to_exact()
    return gaussian_kernel(M.m, delta) @ M @ gaussian_kernel(M.n, delta)


def densify_to_tp(M: Matrix, tol=Fraction(1, 1000), max_iter: int = 200) -> tuple[Matrix, Fraction]:
    """TP matrix within ``tol`` (max-entry norm) of a full-rank TN ``M``.

    The computation is exact (float input is taken at its exact binary
    value).  Returns ``(B, delta)``.
    """
    M = _as_matrix(M)
    X = M if M.exact else M.to_exact()
    if not checker.is_tn(M).holds:
        raise ValueError("input matrix is not totally non-negative")
    if rank(M) < min(M.m, M.n):
        raise UnsupportedError("unsupported: Whitney densification implemented only for full-rank TN")
    tol = Fraction(tol) if not isinstance(tol, float) else Fraction(str(tol))
    delta = Fraction(1, 2)
    for _ in range(max_iter):
        B = sandwich(X, delta)
        if B.distance(X) <= tol:
            if checker.is_tp(B).holds:
                return B, delta
        delta /= 2
    raise VerificationError(f"densification did not reach tol={tol} within {max_iter} steps")
