"""
Polynomial entry format - Encode/Decode matrices over Z[x]

Format:
Line 1: {ROWS} {COLS}
Following lines: {I} {J} {C0} {C1} ... {Ck}
Indices are 1-based and coefficients run from the constant term upwards.
Lines starting with % are comments.

Example:
2 2
1 1 -1 0 1
2 2 1
"""

import logging

from core.domain import POLYNOMIALS, IntPoly
from core.errors import DuplicateEntryError, ParseError
from core.quadmatrix import DEFAULT_LEAF_ORDER, QuadMatrix

logger = logging.getLogger(__name__)


def decode_poly_matrix(text, leaf_order=DEFAULT_LEAF_ORDER):
    """
    Decode polynomial entry text into a matrix over Z[x]

    Args:
        text: file contents

    Returns:
        QuadMatrix over the polynomial domain
    """
    lines = [(n, line.split()) for n, line in enumerate(text.splitlines(), start=1)
             if line.strip() and not line.lstrip().startswith("%")]
    if not lines:
        raise ParseError("missing 'rows cols' header", 1)

    number, header = lines[0]
    try:
        rows, cols = (int(p) for p in header)
    except ValueError:
        raise ParseError("expected 'rows cols'", number) from None
    if rows < 1 or cols < 1:
        raise ParseError("matrix dimensions must be positive", number)

    entries = {}
    for number, parts in lines[1:]:
        if len(parts) < 3:
            raise ParseError("expected 'i j c0 [c1 ...]'", number)
        try:
            i, j, *coefficients = (int(p) for p in parts)
        except ValueError:
            raise ParseError("indices and coefficients must be integers", number) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise ParseError(f"index ({i}, {j}) outside {rows}x{cols}", number)
        if (i, j) in entries:
            raise DuplicateEntryError(f"line {number}: duplicate entry at ({i}, {j})")
        entries[(i, j)] = IntPoly(coefficients)

    triplets = [(i - 1, j - 1, p) for (i, j), p in entries.items()]
    return QuadMatrix.from_triplets(POLYNOMIALS, rows, cols, triplets, leaf_order)


def encode_poly_matrix(m):
    """
    Encode a polynomial matrix, entries sorted by (col, row)

    Returns:
        str
    """
    lines = [f"{m.rows} {m.cols}"]
    for i, j, p in sorted(m.entries(), key=lambda e: (e[1], e[0])):
        lines.append(f"{i + 1} {j + 1} {POLYNOMIALS.format(p)}")
    return "\n".join(lines) + "\n"


def read_poly_matrix(path, leaf_order=DEFAULT_LEAF_ORDER):
    with open(path, "r", encoding="utf-8") as f:
        return decode_poly_matrix(f.read(), leaf_order)


def write_poly_matrix(m, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(encode_poly_matrix(m))
