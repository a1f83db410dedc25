"""Matrix files: JSON (rational or float) and headerless CSV (float)."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .numkernel import Matrix, default_precision, format_scalar, parse_scalar


class MatrixFileError(ValueError):
    pass


def matrix_to_dict(M: Matrix) -> dict:
    out = {
        "rows": M.m,
        "cols": M.n,
        "scalar": "rational" if M.exact else "float",
        "data": [format_scalar(v, M.prec) for r in M.rows() for v in r],
    }
    if not M.exact:
        out["precision"] = M.prec
    return out


def matrix_from_dict(obj: dict, prec: int | None = None) -> Matrix:
    try:
        m, n = int(obj["rows"]), int(obj["cols"])
        scalar = obj.get("scalar", "rational")
        data = obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixFileError(f"malformed matrix object: {exc}") from exc
    if scalar not in ("rational", "float"):
        raise MatrixFileError(f"unknown scalar kind {scalar!r}")
    if data and isinstance(data[0], list):  # nested rows are accepted too
        if len(data) != m or any(len(r) != n for r in data):
            raise MatrixFileError("data dimensions do not match rows/cols")
        data = [v for r in data for v in r]
    if len(data) != m * n:
        raise MatrixFileError(f"expected {m * n} entries, found {len(data)}")
    exact = scalar == "rational"
    prec = prec or int(obj.get("precision") or default_precision())
    try:
        vals = [parse_scalar(str(v), exact=exact, prec=prec) for v in data]
    except ValueError as exc:
        raise MatrixFileError(str(exc)) from exc
    return Matrix([vals[i * n:(i + 1) * n] for i in range(m)], exact=exact, prec=prec)


def read_csv(text: str, prec: int | None = None) -> Matrix:
    prec = prec or default_precision()
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise MatrixFileError("empty CSV matrix")
    try:
        vals = [[parse_scalar(c, exact=False, prec=prec) for c in r] for r in rows]
        return Matrix(vals, exact=False, prec=prec)
    except ValueError as exc:
        raise MatrixFileError(str(exc)) from exc


def write_csv(M: Matrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    F = M.to_float() if M.exact else M
    for r in F.rows():
        w.writerow([format_scalar(v, F.prec) for v in r])
    return buf.getvalue()


def read_matrix(path, prec: int | None = None) -> Matrix:
    """Load ``.json`` (MatrixFile schema) or ``.csv`` (float entries)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MatrixFileError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".csv":
        return read_csv(text, prec)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"invalid JSON in {path}: {exc}") from exc
    return matrix_from_dict(obj, prec)


def write_matrix(M: Matrix, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        path.write_text(write_csv(M), encoding="utf-8")
    else:
        path.write_text(json.dumps(matrix_to_dict(M), indent=2) + "\n", encoding="utf-8")
