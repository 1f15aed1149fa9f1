"""Reader/writer for the alist sparse parity-check matrix format.

Layout (all tokens whitespace-separated, indices 1-based):

    line 1: n_cols n_rows
    line 2: max_col_degree max_row_degree
    line 3: per-column degrees (n_cols entries)
    line 4: per-row degrees (n_rows entries)
    next n_cols lines: row indices of the ones in each column
    next n_rows lines: column indices of the ones in each row

Some writers pad the index lists with zeros up to the max degree; zeros are
accepted and ignored on input, and never written on output.
"""

from __future__ import annotations

import numpy as np


class AlistParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__("line %d: %s" % (line, message))
        self.line = line


def _ints(text: str, lineno: int) -> list[int]:
    try:
        return [int(t) for t in text.split()]
    except ValueError:
        raise AlistParseError("expected integers, got %r" % text.strip(), lineno) from None


def load_alist(path) -> np.ndarray:
    """Load an alist file as a dense uint8 matrix of shape (rows, cols)."""
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    pos = 0

    def next_line() -> tuple[str, int]:
        # header lines: skip leading blanks
        nonlocal pos
        while pos < len(lines):
            line = lines[pos]
            pos += 1
            if line.strip():
                return line, pos
        raise AlistParseError("unexpected end of file", len(lines) + 1)

    def index_line(expected_degree: int) -> tuple[str, int]:
        # index-list lines: empty lines are legitimate degree-0 entries, and a
        # trailing empty line may have been swallowed by the final newline
        nonlocal pos
        if pos < len(lines):
            line = lines[pos]
            pos += 1
            return line, pos
        if expected_degree == 0:
            return "", pos + 1
        raise AlistParseError("unexpected end of file", len(lines) + 1)

    header, ln = next_line()
    dims = _ints(header, ln)
    if len(dims) != 2:
        raise AlistParseError("header must be 'cols rows'", ln)
    cols, rows = dims
    if cols < 0 or rows < 0:
        raise AlistParseError("negative dimension", ln)

    maxdeg_line, ln = next_line()
    maxdegs = _ints(maxdeg_line, ln)
    if len(maxdegs) != 2:
        raise AlistParseError("expected 'max_col_degree max_row_degree'", ln)

    col_deg_line, ln = next_line()
    col_deg = _ints(col_deg_line, ln)
    if len(col_deg) != cols:
        raise AlistParseError("expected %d column degrees, got %d" % (cols, len(col_deg)), ln)

    row_deg_line, ln = next_line()
    row_deg = _ints(row_deg_line, ln)
    if len(row_deg) != rows:
        raise AlistParseError("expected %d row degrees, got %d" % (rows, len(row_deg)), ln)

    m = np.zeros((rows, cols), dtype=np.uint8)
    for c in range(cols):
        line, ln = index_line(col_deg[c])
        idx = [i for i in _ints(line, ln) if i != 0]
        if len(idx) != col_deg[c]:
            raise AlistParseError(
                "column %d lists %d entries, degree says %d" % (c + 1, len(idx), col_deg[c]), ln
            )
        for i in idx:
            if not 1 <= i <= rows:
                raise AlistParseError("row index %d out of range 1..%d" % (i, rows), ln)
            m[i - 1, c] = 1
    for r in range(rows):
        line, ln = index_line(row_deg[r])
        idx = [i for i in _ints(line, ln) if i != 0]
        if len(idx) != row_deg[r]:
            raise AlistParseError(
                "row %d lists %d entries, degree says %d" % (r + 1, len(idx), row_deg[r]), ln
            )
        for j in idx:
            if not 1 <= j <= cols:
                raise AlistParseError("column index %d out of range 1..%d" % (j, cols), ln)
            if not m[r, j - 1]:
                raise AlistParseError(
                    "row list disagrees with column lists at (%d,%d)" % (r + 1, j), ln
                )
    if int(m.sum(axis=0).max(initial=0)) > 0 and row_deg and m.sum(axis=1).astype(int).tolist() != row_deg:
        raise AlistParseError("row degrees inconsistent with index lists", len(lines))
    return m


def save_alist(m, path) -> None:
    """Write a dense 0/1 matrix of shape (rows, cols) to an alist file."""
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    a = (a != 0).astype(np.uint8)
    rows, cols = a.shape
    col_deg = a.sum(axis=0).astype(int)
    row_deg = a.sum(axis=1).astype(int)
    with open(path, "w") as fh:
        fh.write("%d %d\n" % (cols, rows))
        fh.write("%d %d\n" % (col_deg.max(initial=0), row_deg.max(initial=0)))
        fh.write(" ".join(str(d) for d in col_deg) + "\n")
        fh.write(" ".join(str(d) for d in row_deg) + "\n")
        for c in range(cols):
            ones = np.flatnonzero(a[:, c]) + 1
            fh.write(" ".join(str(i) for i in ones) + "\n")
        for r in range(rows):
            ones = np.flatnonzero(a[r]) + 1
            fh.write(" ".join(str(j) for j in ones) + "\n")
