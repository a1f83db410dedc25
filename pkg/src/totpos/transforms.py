"""Entrywise transforms, the preserver classification, and a falsifier."""

from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import mpmath

from . import checker, witnesses
from .completion import sandwich
from .expr import BinOp, Num, Var, evaluate, parse_expression, to_text
from .numkernel import (
    DomainError,
    Matrix,
    default_precision,
    is_exact,
    power_scalar,
    rank,
    to_mpf,
)


def _scalar(v):
    """Floats are read as the decimal they print as (``0.9`` means 9/10)."""
    if isinstance(v, float):
        return Fraction(repr(v))
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return v


# --------------------------------------------------------------------------
# function descriptors


@dataclass(frozen=True)
class Constant:
    c: object

    def __call__(self, x, prec: int | None = None):
        return _scalar(self.c)

    def describe(self) -> str:
        return f"F(x) = {self.c}"


@dataclass(frozen=True)
class Power:
    """``c * x^alpha`` with ``0^0 = 0``."""

    c: object
    alpha: object

    def __post_init__(self):
        object.__setattr__(self, "c", _scalar(self.c))
        object.__setattr__(self, "alpha", _scalar(self.alpha))
        if not self.c > 0:
            raise ValueError("Power needs c > 0")

    def __call__(self, x, prec: int | None = None):
        prec = prec or default_precision()
        v = power_scalar(x, self.alpha, prec)
        if is_exact(v) and is_exact(self.c):
            return self.c * v
        with mpmath.workprec(prec):
            return to_mpf(self.c, prec) * to_mpf(v, prec)

    def describe(self) -> str:
        return f"F(x) = {self.c}*x^{self.alpha}"


@dataclass(frozen=True)
class Expression:
    tree: object
    text: str = ""

    @classmethod
    def parse(cls, text: str) -> "Expression":
        tree = parse_expression(text)
        return cls(tree, to_text(tree))

    def __call__(self, x, prec: int | None = None):
        return evaluate(self.tree, x, prec or default_precision())

    def describe(self) -> str:
        return f"F(x) = {self.text or to_text(self.tree)}"


def descriptor_from_text(text: str):
    """Parse an expression and recognise ``c``, ``x^a``, ``c*x^a`` and ``c*x``."""
    tree = parse_expression(text)
    simple = _as_power(tree)
    if simple is not None:
        return simple
    return Expression(tree, to_text(tree))


def _as_power(tree):
    if isinstance(tree, Num):
        return Constant(tree.value) if tree.value >= 0 else None
    if isinstance(tree, Var):
        return Power(1, 1)
    if isinstance(tree, BinOp) and tree.op == "^" and isinstance(tree.left, Var) \
            and isinstance(tree.right, Num):
        return Power(1, tree.right.value)
    if isinstance(tree, BinOp) and tree.op == "*":
        for k, p in ((tree.left, tree.right), (tree.right, tree.left)):
            if isinstance(k, Num) and k.value > 0:
                inner = _as_power(p)
                if isinstance(inner, Power):
                    return Power(k.value * inner.c, inner.alpha)
    return None


def apply_entrywise(M: Matrix, F, prec: int | None = None, positive: bool = False) -> Matrix:
    """``(F(a_ij))``.  ``positive`` restricts the domain to ``(0, inf)``."""
    prec = prec or M.prec
    out = []
    for r in M.rows():
        row = []
        for v in r:
            if v < 0 or (positive and v == 0):
                raise DomainError(f"entry {v} outside the domain of F")
            row.append(F(v, prec))
        out.append(row)
    exact = M.exact and all(is_exact(v) for r in out for v in r)
    if not exact:
        out = [[to_mpf(v, prec) for v in r] for r in out]
    return Matrix(out, exact=exact, prec=prec)


def hadamard_power(M: Matrix, alpha, prec: int | None = None) -> Matrix:
    """``M^(o alpha)`` with ``0^0 = 0``; negative entries are rejected."""
    return apply_entrywise(M, _RawPower(_scalar(alpha)), prec)


@dataclass(frozen=True)
class _RawPower:
    alpha: object

    def __call__(self, x, prec=None):
        return power_scalar(x, self.alpha, prec or default_precision())


# --------------------------------------------------------------------------
# classification


class Mode(str, Enum):
    TN = "TN"
    TP = "TP"
    TN_SYM = "TN_SYM"
    TP_SYM = "TP_SYM"
    HANKEL_FIXED = "HANKEL_FIXED"
    HANKEL_ALL = "HANKEL_ALL"

    @classmethod
    def parse(cls, text) -> "Mode":
        if isinstance(text, Mode):
            return text
        key = str(text).upper().replace("-", "_")
        aliases = {"TNSYM": "TN_SYM", "TPSYM": "TP_SYM", "HANKEL": "HANKEL_FIXED"}
        return cls(aliases.get(key, key))

    @property
    def positive(self) -> bool:
        return self in (Mode.TP, Mode.TP_SYM)


@dataclass(frozen=True)
class PreserverQuery:
    mode: Mode
    delta: int = 2

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.delta < 1:
            raise ValueError("delta must be a positive integer")


@dataclass(frozen=True)
class AlphaSet:
    """``points`` together with ``(lower, inf)`` (closed if ``closed``), and
    optionally every non-negative integer."""

    lower: object = None
    closed: bool = True
    points: tuple = ()
    integers: bool = False

    def __contains__(self, alpha) -> bool:
        alpha = _scalar(alpha)
        if alpha in self.points:
            return True
        if self.integers and alpha >= 0 and alpha == int(alpha):
            return True
        if self.lower is None:
            return False
        return alpha > self.lower or (self.closed and alpha == self.lower)

    def __str__(self) -> str:
        parts = []
        if self.integers:
            parts.append("Z>=0")
        parts += [f"{{{p}}}" for p in self.points]
        if self.lower is not None:
            parts.append(f"{'[' if self.closed else '('}{self.lower}, inf)")
        return " u ".join(parts) or "{}"


@dataclass(frozen=True)
class PreserverClass:
    kind: str  # any-nonneg, any-positive, constants-and-powers, powers-only, mid-convex, absolutely-monotonic
    alphas: AlphaSet | None = None
    constants: bool = False
    strict: bool = False
    description: str = ""

    def __str__(self) -> str:
        return self.description


def _cp(alphas: AlphaSet, text: str) -> PreserverClass:
    return PreserverClass("constants-and-powers", alphas, True, False,
                          f"constants c >= 0 or F(x) = c*x^a, c > 0, a in {alphas}" if text is None else text)


def _po(alphas: AlphaSet) -> PreserverClass:
    return PreserverClass("powers-only", alphas, False, True, f"F(x) = c*x^a, c > 0, a in {alphas}")


_ONE = AlphaSet(points=(Fraction(1),))


def classify_preservers(q: PreserverQuery) -> PreserverClass:
    """The entrywise preservers for ``q.mode`` on ``delta x delta`` matrices."""
    mode, d = q.mode, q.delta
    if mode is Mode.HANKEL_ALL:
        return PreserverClass("absolutely-monotonic", None, True, False,
                              "absolutely monotonic: F(x) = sum c_k x^k with c_k >= 0")
    if mode is Mode.HANKEL_FIXED:
        if d == 1:
            return PreserverClass("any-nonneg", description="any F: [0, inf) -> [0, inf)")
        return _cp(AlphaSet(Fraction(d - 2), False, (), True), None)
    if d == 1:
        if mode.positive:
            return PreserverClass("any-positive", strict=True, description="any F: (0, inf) -> (0, inf)")
        return PreserverClass("any-nonneg", description="any F: [0, inf) -> [0, inf)")
    if mode is Mode.TN:
        table = {2: AlphaSet(Fraction(0)), 3: AlphaSet(Fraction(1))}
        if d in table:
            return _cp(table[d], None)
        return _cp(_ONE, "constants c >= 0 or F(x) = cx, c > 0")
    if mode is Mode.TP:
        table = {2: AlphaSet(Fraction(0), False), 3: AlphaSet(Fraction(1))}
        return _po(table.get(d, _ONE))
    if d == 2:
        if mode is Mode.TN_SYM:
            return PreserverClass("mid-convex", None, True, False,
                                  "non-negative, non-decreasing, multiplicatively mid-convex")
        return PreserverClass("mid-convex", None, False, True,
                              "positive, increasing, multiplicatively mid-convex")
    alphas = {3: AlphaSet(Fraction(1)),
              4: AlphaSet(Fraction(2), True, (Fraction(1),))}.get(d, _ONE)
    return _cp(alphas, None) if mode is Mode.TN_SYM else _po(alphas)


def is_power_preserver(q: PreserverQuery, c, alpha) -> bool:
    """Is ``c * x^alpha`` (or the constant ``c`` when ``c == 0``) in the class?"""
    cls = classify_preservers(q)
    c, alpha = _scalar(c), _scalar(alpha)
    if c < 0:
        return False
    if c == 0:  # the zero constant
        return cls.constants or cls.kind == "any-nonneg"
    if cls.kind == "any-positive":
        return True
    if cls.kind == "any-nonneg":
        return alpha >= 0
    if cls.kind == "mid-convex":
        return alpha > 0 if cls.strict else alpha >= 0
    if cls.kind == "absolutely-monotonic":
        return alpha >= 0 and alpha == int(alpha)
    return alpha in cls.alphas


def is_constant_preserver(q: PreserverQuery, c) -> bool:
    """Constant maps ``F = c`` (``c >= 0``)."""
    cls = classify_preservers(q)
    c = _scalar(c)
    if c < 0:
        return False
    if cls.kind == "any-positive":
        return c > 0
    if cls.kind == "mid-convex" and not cls.strict:
        return True
    return cls.constants or cls.kind == "any-nonneg"


def _log_grid(lo: float, hi: float, count: int):
    out = []
    for t in range(count):
        v = 10 ** (math.log10(lo) + (math.log10(hi) - math.log10(lo)) * t / (count - 1))
        out.append(Fraction(f"{v:.2g}"))
    return out


def in_mid_convex_class(F, strict: bool = False, grid=None, prec: int | None = None,
                        rel_tol: float = 1e-12) -> bool:
    """Sampled test of (strict) non-negativity, monotonicity and
    multiplicative mid-convexity ``F(sqrt(xy))^2 <= F(x) F(y)``.

    Grid points are squares of rationals so ``sqrt(xy)`` stays exact.
    """
    prec = prec or default_precision()
    roots = grid or _log_grid(1e-2, 1e1, 13)
    xs = sorted({r * r for r in roots})
    with mpmath.workprec(prec):
        try:
            vals = {x: to_mpf(F(x, prec), prec) for x in xs}
            if not strict:
                vals[Fraction(0)] = to_mpf(F(Fraction(0), prec), prec)
        except DomainError:
            return False
        keys = sorted(vals)
        for x in keys:
            if vals[x] < 0 or (strict and vals[x] <= 0):
                return False
        for x, y in zip(keys, keys[1:]):
            slack = rel_tol * max(1, abs(vals[x]))
            if vals[y] < vals[x] - slack or (strict and vals[y] <= vals[x]):
                return False
        for i, a in enumerate(roots):
            for b in roots[i + 1:]:
                g = vals[a * b] if (a * b) in vals else to_mpf(F(a * b, prec), prec)
                lhs, rhs = g * g, vals[a * a] * vals[b * b]
                if lhs > rhs + rel_tol * max(1, abs(rhs)):
                    return False
    return True


def functional_equation_residual(F, grid=None, prec: int | None = None):
    """``max |F(xy) F(1) - F(x) F(y)|`` over a log-spaced grid."""
    prec = prec or default_precision()
    grid = grid or _log_grid(1e-2, 1e2, 7)
    worst = mpmath.mpf(0)
    with mpmath.workprec(prec):
        f1 = to_mpf(F(Fraction(1), prec), prec)
        for x in grid:
            for y in grid:
                r = abs(to_mpf(F(x * y, prec), prec) * f1
                        - to_mpf(F(x, prec), prec) * to_mpf(F(y, prec), prec))
                worst = max(worst, r)
    return worst


# --------------------------------------------------------------------------
# random TN / TP matrices


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def _param(rng: random.Random, positive: bool, zero_prob: float) -> Fraction:
    if not positive and rng.random() < zero_prob:
        return Fraction(0)
    return Fraction(rng.randint(1, 6), rng.randint(1, 4))


def _bidiagonal_product(size: int, rng, positive: bool, zero_prob: float, lower: bool) -> Matrix:
    """Neville-ordered product of elementary bidiagonal factors."""
    P = Matrix.identity(size)
    for k in range(1, size):
        for i in range(size - 1, k - 1, -1):
            p = _param(rng, positive, zero_prob)
            if p == 0:
                continue
            E = [[Fraction(int(r == c)) for c in range(size)] for r in range(size)]
            if lower:
                E[i][i - 1] = p
            else:
                E[i - 1][i] = p
            P = P @ Matrix(E)
    return P


def random_tn(m: int, n: int, full_rank: bool = False, seed=0, *, strict: bool = False,
              zero_prob: float = 0.3) -> Matrix:
    """Random exact TN ``m x n`` matrix ``L D U`` from bidiagonal factors.

    ``full_rank`` forces a positive diagonal; ``strict`` makes every
    parameter positive, which gives a TP matrix.
    """
    if m < 1 or n < 1:
        raise ValueError("m, n must be positive")
    rng = _rng(seed)
    L = _bidiagonal_product(m, rng, strict, zero_prob, lower=True)
    U = _bidiagonal_product(n, rng, strict, zero_prob, lower=False)
    diag = [_param(rng, full_rank or strict, zero_prob) for _ in range(min(m, n))]
    D = Matrix([[diag[i] if i == j else Fraction(0) for j in range(n)] for i in range(m)])
    A = L @ D @ U
    cert = checker.is_tp(A) if strict else checker.is_tn(A)
    if not cert.holds:  # construction guarantees this
        raise AssertionError(f"random_tn produced a matrix failing its check: {cert}")
    return A


def random_tp(m: int, n: int, seed=0) -> Matrix:
    return random_tn(m, n, True, seed, strict=True)


def random_symmetric_tn(size: int, seed=0, *, strict: bool = False, full_rank: bool = False,
                        zero_prob: float = 0.3) -> Matrix:
    """``L D L^T``; TP when ``strict``."""
    rng = _rng(seed)
    L = _bidiagonal_product(size, rng, strict, zero_prob, lower=True)
    diag = [_param(rng, full_rank or strict, zero_prob) for _ in range(size)]
    D = Matrix([[diag[i] if i == j else Fraction(0) for j in range(size)] for i in range(size)])
    A = L @ D @ L.T
    cert = checker.is_tp(A) if strict else checker.is_tn(A)
    if not cert.holds:
        raise AssertionError(f"random_symmetric_tn produced a matrix failing its check: {cert}")
    return A


def random_hankel_tn(size: int, seed=0, atoms: int | None = None) -> Matrix:
    """Moment matrix of a random positive discrete measure on ``(0, 2]``.

    With at least ``size`` atoms the result is TP.
    """
    rng = _rng(seed)
    atoms = atoms if atoms is not None else rng.randint(1, size + 1)
    points = rng.sample(range(1, 41), atoms)
    nodes = [Fraction(p, 20) for p in points]
    weights = [Fraction(rng.randint(1, 9), rng.randint(1, 4)) for _ in nodes]
    moments = [sum(w * t ** k for w, t in zip(weights, nodes)) for k in range(2 * size - 1)]
    A = Matrix([[moments[i + j] for j in range(size)] for i in range(size)])
    if not checker.is_tn(A).holds:
        raise AssertionError("moment matrix failed its TN check")
    return A


# --------------------------------------------------------------------------
# falsifier


@dataclass(frozen=True)
class CounterexampleCertificate:
    matrix: Matrix
    transformed: Matrix
    violation: checker.Certificate
    family: str
    params: dict = field(default_factory=dict)
    mode: Mode = Mode.TN
    delta: int = 2
    source: checker.Certificate | None = None
    tried: int = 0

    def verify(self) -> bool:
        """Re-run both checks from scratch."""
        return _source_holds(self.mode, self.matrix) and _image_fails(self.mode, self.transformed)

    def record(self) -> dict:
        return {"family": self.family, "params": {k: str(v) for k, v in self.params.items()},
                "mode": self.mode.value, "delta": self.delta, "tried": self.tried}


def _source_holds(mode: Mode, A: Matrix) -> bool:
    if mode in (Mode.TN_SYM, Mode.TP_SYM) and not checker.structure_tests(A).symmetric:
        return False
    if mode in (Mode.HANKEL_FIXED, Mode.HANKEL_ALL) and not checker.structure_tests(A).hankel:
        return False
    cert = checker.is_tp(A) if mode.positive else checker.is_tn(A)
    return cert.holds


def _image_check(mode: Mode, B: Matrix) -> checker.Certificate:
    return checker.is_tp(B) if mode.positive else checker.is_tn(B)


def _image_fails(mode: Mode, B: Matrix) -> bool:
    return _image_check(mode, B).fails


XY_GRID = tuple(_log_grid(1e-2, 1e2, 7))
EPS_GRID = (Fraction(1, 20), Fraction(1, 10), Fraction(3, 10), Fraction(1, 2), Fraction(9, 10))
N_X_GRID = tuple(_log_grid(1e-4, 1, 9))
T_X_GRID = tuple(_log_grid(1e-6, 1e-3, 7))
D_X_GRID = (Fraction(1, 10), Fraction(3, 10), Fraction(1, 2), Fraction(7, 10), Fraction(9, 10))
C_SCALES = (Fraction(1, 100), Fraction(1), Fraction(100))
HILBERT_ETAS = (Fraction(1, 10 ** 6), Fraction(1, 10 ** 12))
SANDWICH_DELTAS = (Fraction(1, 10 ** 4), Fraction(1, 10 ** 8))


def _pad(W: Matrix, size: int, fill_identity: bool) -> Matrix:
    if W.m >= size:
        return W
    k = size - W.m
    tail = Matrix.identity(k) if fill_identity else Matrix.zeros(k, k)
    if not W.exact:
        tail = tail.to_float(W.prec)
    return W.direct_sum(tail)


def _tp_approximant(W: Matrix, size: int) -> Matrix | None:
    """A TP ``size x size`` matrix close to ``W`` (padded with an identity).

    Tries ``P + eta * Hilbert`` first, then the Gaussian sandwich of ``P``;
    both keep symmetry.
    """
    P = _pad(W if W.exact else W.to_exact(), size, True)
    for eta in HILBERT_ETAS:
        B = P + witnesses.hilbert(size).scale(eta)
        if checker.is_tp(B).holds:
            return B
    if rank(P) == size:
        for d in SANDWICH_DELTAS:
            B = sandwich(P, d)
            if checker.is_tp(B).holds:
                return B
    return None


def _raw_families(mode: Mode, delta: int, prec: int):
    """Yield ``(family, params, matrix)`` in schedule order (unverified)."""
    sym = mode in (Mode.TN_SYM, Mode.TP_SYM)
    hankel = mode in (Mode.HANKEL_FIXED, Mode.HANKEL_ALL)
    pos = mode.positive
    xy = XY_GRID
    pairs = [(x, y) for x in xy for y in xy]
    lt_pairs = [(x, y) for x in xy for y in xy if x < y]

    def emit(fam, params, W):
        if W.m > delta:
            return None
        if hankel:
            return (fam, params, W) if W.m == delta else None
        if pos:
            B = W if (W.m == delta and checker.is_tp(W).holds) else _tp_approximant(W, delta)
            return None if B is None else (fam, params, B)
        return fam, params, _pad(W, delta, False)

    def gen():
        # 2x2 families
        if not sym and not hankel:
            for x, y in pairs:
                if pos:
                    yield "A", {"x": x, "y": y, "eps": Fraction(1, 10)}, witnesses.family_A_tp(x, y, Fraction(1, 10))
                    yield "B", {"x": x, "y": y, "eps": Fraction(1, 10)}, witnesses.family_B_tp(x, y, Fraction(1, 10))
                else:
                    yield "A", {"x": x, "y": y}, witnesses.family_A(x, y)
                    yield "B", {"x": x, "y": y}, witnesses.family_B(x, y)
        for x, y in lt_pairs:
            if pos:
                if sym or hankel:
                    continue
                yield "sym_rank1", {"x": x * x, "y": y * y, "eps": Fraction(1, 10)}, \
                    witnesses.family_M_tp(x * x, y * y, Fraction(1, 10))
            else:
                yield "sym_rank1", {"x": x * x, "y": y * y}, witnesses.sym_rank1(x * x, y * y)
        for x, y in lt_pairs + [(Fraction(0), y) for y in xy]:
            if pos and x == 0:
                continue
            yield "monotone_pair", {"x": x, "y": y}, witnesses.monotone_pair(x, y)
        if pos:
            for x, y in lt_pairs:
                yield "M_tp", {"x": x * x, "y": y * y, "eps": Fraction(1, 10)}, \
                    witnesses.family_M_tp(x * x, y * y, Fraction(1, 10))
        if sym and not pos:
            for x, y in pairs[::4]:
                yield "A_sym", {"x": x, "y": y}, witnesses.family_A_sym(x, y)
                yield "B_sym", {"x": x, "y": y}, witnesses.family_B_sym(x, y)
        # matrix C and scalings
        if not hankel:
            C = witnesses.matrix_C(prec)
            for t in C_SCALES:
                yield "C", {"scale": t}, C.scale(to_mpf(t, prec))
        # N family
        if not sym and not hankel:
            for eps in EPS_GRID:
                for x in N_X_GRID:
                    yield "N", {"eps": eps, "x": x}, witnesses.family_N(eps, x)
        # T family
        if not hankel:
            for x in T_X_GRID:
                yield "T", {"x": x}, witnesses.family_T(x)
        # two-point moment matrices
        for x in D_X_GRID:
            for size in ((delta,) if hankel else range(max(2, min(delta, 4)), delta + 1)):
                yield "D", {"x": x, "size": size}, witnesses.moment_two_point(x, size)

    for fam, params, W in gen():
        item = emit(fam, params, W)
        if item is not None:
            yield item


@functools.lru_cache(maxsize=64)
def _verified_schedule(mode: Mode, delta: int, prec: int) -> tuple:
    out = []
    for fam, params, A in _raw_families(mode, delta, prec):
        if _source_holds(mode, A):
            out.append((fam, params, A))
    return tuple(out)


def _random_sample(mode: Mode, delta: int, seed: int, i: int) -> Matrix:
    s = random.Random(seed * 1_000_003 + i)
    if mode in (Mode.HANKEL_FIXED, Mode.HANKEL_ALL):
        return random_hankel_tn(delta, s)
    sym = mode in (Mode.TN_SYM, Mode.TP_SYM)
    if mode.positive:
        return random_symmetric_tn(delta, s, strict=True) if sym else random_tp(delta, delta, s)
    return random_symmetric_tn(delta, s) if sym else random_tn(delta, delta, bool(i % 2), s)


def falsify(F, q: PreserverQuery, budget: int = 500, seed: int = 0,
            prec: int | None = None, errors: list | None = None):
    """Hunt for a matrix with the source property whose image under ``F``
    lacks it.  Returns the schedule-first :class:`CounterexampleCertificate`
    or ``None``.  Evaluation failures are appended to ``errors`` and skipped.
    """
    prec = prec or default_precision()
    mode = q.mode
    delta = q.delta if mode is not Mode.HANKEL_ALL else max(q.delta, 2)
    tried = 0

    def attempt(fam, params, A):
        try:
            B = apply_entrywise(A, F, prec, positive=mode.positive)
        except (DomainError, ZeroDivisionError, OverflowError, ValueError) as exc:
            if errors is not None:
                errors.append((fam, params, str(exc)))
            return None
        cert = _image_check(mode, B)
        if cert.fails:
            return CounterexampleCertificate(A, B, cert, fam, dict(params), mode, delta,
                                             None, tried)
        return None

    sizes = range(2, delta + 1) if mode is Mode.HANKEL_ALL else (delta,)
    for size in sizes:
        for fam, params, A in _verified_schedule(mode, size, prec):
            if tried >= budget:
                return None
            tried += 1
            found = attempt(fam, params, A)
            if found is not None:
                return found
    i = 0
    while tried < budget:
        A = _random_sample(mode, delta, seed, i)
        i += 1
        tried += 1
        found = attempt("random", {"seed": seed, "index": i - 1}, A)
        if found is not None:
            return found
    return None
