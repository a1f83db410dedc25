"""Total positivity / non-negativity checks with auditable certificates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import mpmath

from .numkernel import (
    Matrix,
    MinorIndex,
    classify_sign,
    minor_scales,
    enumerate_minors,
    iter_all_minors,
    minor,
)

DEFAULT_SIZE_GUARD = 10


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


class SizeGuardError(ValueError):
    """Full minor enumeration was refused because the matrix is too large."""


@dataclass(frozen=True)
class Certificate:
    """Outcome of a check.

    ``witness``/``value`` name the violating minor when the verdict is
    ``fails``, or the first minor inside the float tolerance band when it is
    ``inconclusive``.  ``indeterminate`` counts float minors that fell inside
    the band; for TN checks those are treated as zeros unless the caller
    asked for a strict boundary.
    """

    verdict: Verdict
    property: str
    witness: MinorIndex | None = None
    value: object = None
    order: int | None = None
    method: str = "full"
    deterministic: bool = True
    exact: bool = True
    indeterminate: int = 0
    checked: int = 0

    def __bool__(self) -> bool:
        return self.verdict is Verdict.HOLDS

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    @property
    def fails(self) -> bool:
        return self.verdict is Verdict.FAILS

    @property
    def contiguous_shortcut(self) -> bool:
        return self.method in ("contiguous", "hankel")


@dataclass(frozen=True)
class CheckRequest:
    matrix: Matrix
    property: str = "TN"  # TN, TP, TN_r, TP_r, PD, PSD, TP_HANKEL
    order: int | None = None
    deterministic: bool = True
    full: bool = False
    rel_tol: float | None = None
    strict_boundary: bool = False
    size_guard: int = DEFAULT_SIZE_GUARD
    options: dict = field(default_factory=dict)


def _order(M: Matrix, order: int | None) -> int:
    kmax = min(M.m, M.n)
    if order is None:
        return kmax
    if not 1 <= order <= kmax:
        raise ValueError(f"order r={order} must lie in [1, {kmax}]")
    return order


def _guard(M: Matrix, size_guard: int) -> None:
    if min(M.m, M.n) > size_guard:
        raise SizeGuardError(
            f"refusing full minor enumeration for {M.m}x{M.n} "
            f"(min dimension > {size_guard}); raise size_guard explicitly")


def is_tn(M: Matrix, order: int | None = None, *, deterministic: bool = True,
          rel_tol: float | None = None, strict_boundary: bool = False,
          size_guard: int = DEFAULT_SIZE_GUARD) -> Certificate:
    """Check total non-negativity (of order ``order`` if given).

    Always a full enumeration: the contiguous shortcut needs strict
    positivity.  Float minors within the tolerance band count as zero; with
    ``strict_boundary`` they make the verdict inconclusive instead.
    """
    r = _order(M, order)
    _guard(M, size_guard)
    prop = "TN" if order is None else "TN_r"
    first_band = None
    band = 0
    checked = 0
    scales = None if M.exact else minor_scales(M)
    for idx, value in iter_all_minors(M, r):
        checked += 1
        s = classify_sign(value, M, idx, rel_tol, scales)
        if s is None:
            band += 1
            if first_band is None:
                first_band = (idx, value)
        elif s < 0:
            return Certificate(Verdict.FAILS, prop, idx, value, order, "full",
                               deterministic, M.exact, band, checked)
    if band and strict_boundary:
        return Certificate(Verdict.INCONCLUSIVE, prop, first_band[0], first_band[1],
                           order, "full", deterministic, M.exact, band, checked)
    return Certificate(Verdict.HOLDS, prop, None, None, order, "full",
                       deterministic, M.exact, band, checked)


def _positivity_scan(M, indices, prop, order, method, deterministic, rel_tol):
    scales = None if M.exact else minor_scales(M)
    first_band = None
    band = 0
    checked = 0
    for idx, value in indices:
        checked += 1
        s = classify_sign(value, M, idx, rel_tol, scales)
        if s is None:
            band += 1
            if first_band is None:
                first_band = (idx, value)
        elif s <= 0:
            return Certificate(Verdict.FAILS, prop, idx, value, order, method,
                               deterministic, M.exact, band, checked)
    if band:
        return Certificate(Verdict.INCONCLUSIVE, prop, first_band[0], first_band[1],
                           order, method, deterministic, M.exact, band, checked)
    return Certificate(Verdict.HOLDS, prop, None, None, order, method,
                       deterministic, M.exact, band, checked)


def _contiguous_minors(M: Matrix, r: int):
    for k in range(1, r + 1):
        for idx in enumerate_minors(M.m, M.n, k, contiguous=True):
            yield idx, minor(M, idx)


def is_tp(M: Matrix, order: int | None = None, *, full: bool = False,
          deterministic: bool = True, rel_tol: float | None = None,
          size_guard: int = DEFAULT_SIZE_GUARD) -> Certificate:
    """Check total positivity (of order ``order`` if given).

    By default only contiguous minors of size <= order are examined (Fekete);
    ``full=True`` enumerates every minor instead.
    """
    r = _order(M, order)
    prop = "TP" if order is None else "TP_r"
    if full:
        _guard(M, size_guard)
        return _positivity_scan(M, iter_all_minors(M, r), prop, order, "full",
                                deterministic, rel_tol)
    return _positivity_scan(M, _contiguous_minors(M, r), prop, order, "contiguous",
                            deterministic, rel_tol)


def _is_symmetric(M: Matrix) -> bool:
    if not M.is_square:
        return False
    if M.exact:
        return all(M[i, j] == M[j, i] for i in range(M.m) for j in range(i))
    with mpmath.workprec(M.prec):
        tol = mpmath.mpf(2) ** (8 - M.prec) * max(1, M.norm_max())
        return all(abs(M[i, j] - M[j, i]) <= tol for i in range(M.m) for j in range(i))


def _is_hankel(M: Matrix) -> bool:
    if M.exact:
        return all(M[i, j] == M[i + 1, j - 1]
                   for i in range(M.m - 1) for j in range(1, M.n))
    with mpmath.workprec(M.prec):
        tol = mpmath.mpf(2) ** (8 - M.prec) * max(1, M.norm_max())
        return all(abs(M[i, j] - M[i + 1, j - 1]) <= tol
                   for i in range(M.m - 1) for j in range(1, M.n))


def _leading_principal(M: Matrix, row_offset: int = 0):
    for k in range(1, M.n - row_offset + 1):
        idx = MinorIndex(tuple(range(row_offset, row_offset + k)), tuple(range(k)))
        yield idx, minor(M, idx)


def is_pos_def(M: Matrix, *, strict: bool = True, rel_tol: float | None = None,
               size_guard: int = DEFAULT_SIZE_GUARD) -> Certificate:
    """Positive definiteness via leading principal minors.

    ``strict=False`` checks positive semidefiniteness instead, through all
    principal minors (float minors inside the band count as zero).
    """
    if not M.is_square or not _is_symmetric(M):
        raise ValueError("positive definiteness needs a square symmetric matrix")
    if strict:
        return _positivity_scan(M, _leading_principal(M), "PD", None,
                                "leading-principal", True, rel_tol)
    _guard(M, size_guard)

    def principal():
        for k in range(1, M.n + 1):
            for s in itertools.combinations(range(M.n), k):
                idx = MinorIndex(s, s)
                yield idx, minor(M, idx)

    band = 0
    checked = 0
    scales = None if M.exact else minor_scales(M)
    for idx, value in principal():
        checked += 1
        sgn = classify_sign(value, M, idx, rel_tol, scales)
        if sgn is None:
            band += 1
        elif sgn < 0:
            return Certificate(Verdict.FAILS, "PSD", idx, value, None, "principal",
                               True, M.exact, band, checked)
    return Certificate(Verdict.HOLDS, "PSD", None, None, None, "principal",
                       True, M.exact, band, checked)


def is_tp_hankel(M: Matrix, *, rel_tol: float | None = None) -> Certificate:
    """TP test for square Hankel matrices: ``M`` and its truncation must be PD.

    Witness indices refer to ``M`` itself; minors of the truncation sit on
    rows ``1..k`` and columns ``0..k-1``.
    """
    if not M.is_square:
        raise ValueError("Hankel TP test needs a square matrix")
    if not _is_hankel(M):
        raise ValueError("matrix is not Hankel")

    def minors():
        yield from _leading_principal(M)
        if M.n > 1:
            yield from _leading_principal(M, row_offset=1)

    return _positivity_scan(M, minors(), "TP", None, "hankel", True, rel_tol)


@dataclass(frozen=True)
class Structure:
    symmetric: bool
    hankel: bool
    positive_entries: bool


def structure_tests(M: Matrix) -> Structure:
    positive = all(v > 0 for r in M.rows() for v in r)
    return Structure(_is_symmetric(M), _is_hankel(M), positive)


def check(req: CheckRequest) -> Certificate:
    """Dispatch a :class:`CheckRequest` to the matching checker."""
    prop = req.property.upper()
    M = req.matrix
    if prop in ("TN", "TN_R"):
        return is_tn(M, req.order, deterministic=req.deterministic, rel_tol=req.rel_tol,
                     strict_boundary=req.strict_boundary, size_guard=req.size_guard)
    if prop in ("TP", "TP_R"):
        return is_tp(M, req.order, full=req.full, deterministic=req.deterministic,
                     rel_tol=req.rel_tol, size_guard=req.size_guard)
    if prop == "PD":
        return is_pos_def(M, rel_tol=req.rel_tol)
    if prop == "PSD":
        return is_pos_def(M, strict=False, rel_tol=req.rel_tol, size_guard=req.size_guard)
    if prop in ("TP_HANKEL", "HANKEL"):
        return is_tp_hankel(M, rel_tol=req.rel_tol)
    raise ValueError(f"unknown property {req.property!r}")
