"""
Matrix Market Module - Encode/Decode matrices in the Matrix Market exchange format

Supported headers:
%%MatrixMarket matrix coordinate|array integer|real general|symmetric

Example:
%%MatrixMarket matrix coordinate integer general
% identity of order 2
2 2 2
1 1 1
2 2 1

Exact rationals are written as an integer file scaled by a common
denominator, announced by a comment line `% denominator <D>`.
"""

import logging
import math
from fractions import Fraction

from core.domain import FLOATS, INTEGERS, POLYNOMIALS, RATIONALS
from core.errors import DuplicateEntryError, ParseError, UnsupportedFieldError
from core.quadmatrix import DEFAULT_LEAF_ORDER, QuadMatrix

logger = logging.getLogger(__name__)

BANNER = "%%MatrixMarket"
FORMATS = ("coordinate", "array")
FIELDS = ("integer", "real")
SYMMETRIES = ("general", "symmetric")
DENOMINATOR_COMMENT = "denominator"


def _parse_header(line):
    parts = line.split()
    if len(parts) != 5 or parts[0] != BANNER or parts[1].lower() != "matrix":
        raise ParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1)
    layout, field, symmetry = (p.lower() for p in parts[2:])
    if layout not in FORMATS:
        raise ParseError(f"unknown format {layout!r}", 1)
    if field not in FIELDS:
        raise UnsupportedFieldError(f"field {field!r} is not supported (integer or real only)")
    if symmetry not in SYMMETRIES:
        raise UnsupportedFieldError(f"symmetry {symmetry!r} is not supported (general or symmetric only)")
    return layout, field, symmetry


def _ints(parts, count, line_number, what):
    if len(parts) != count:
        raise ParseError(f"expected {what}", line_number)
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ParseError(f"expected {what}", line_number) from None


def decode_matrix_market(text, domain=None, leaf_order=DEFAULT_LEAF_ORDER):
    """
    Decode Matrix Market text into a quadtree matrix

    Args:
        text: file contents
        domain: target domain; defaults to int for integer files, float64 for
            real files and rational when a denominator comment is present
        leaf_order: leaf order of the result

    Returns:
        QuadMatrix
    """
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input", 1)
    layout, field, symmetry = _parse_header(lines[0])

    denominator = None
    body = []
    for number, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("%"):
            words = line[1:].split()
            if len(words) == 2 and words[0] == DENOMINATOR_COMMENT:
                try:
                    denominator = int(words[1])
                except ValueError:
                    raise ParseError(f"bad denominator {words[1]!r}", number) from None
                if denominator <= 0:
                    raise ParseError("denominator must be positive", number)
            continue
        body.append((number, line.split()))
    if not body:
        raise ParseError("missing size line", len(lines))

    if domain is None:
        if denominator is not None:
            domain = RATIONALS
        else:
            domain = INTEGERS if field == "integer" else FLOATS
    if domain == POLYNOMIALS:
        raise UnsupportedFieldError("polynomial matrices use the polynomial entry format")
    reader = RATIONALS if denominator is not None else domain

    size_line, size_parts = body[0]
    if layout == "coordinate":
        rows, cols, nnz = _ints(size_parts, 3, size_line, "'rows cols nnz'")
    else:
        rows, cols = _ints(size_parts, 2, size_line, "'rows cols'")
        nnz = None
    if rows < 1 or cols < 1:
        raise ParseError("matrix dimensions must be positive", size_line)
    if symmetry == "symmetric" and rows != cols:
        raise ParseError("a symmetric matrix must be square", size_line)

    def value_of(token, number):
        try:
            value = reader.parse(token)
        except ParseError as exc:
            raise ParseError(str(exc), number) from None
        if denominator is not None:
            value = Fraction(value) / denominator
        return domain.convert(value)

    entries = {}

    def put(i, j, value, number):
        if (i, j) in entries:
            raise DuplicateEntryError(f"line {number}: duplicate entry at ({i + 1}, {j + 1})")
        entries[(i, j)] = value

    if layout == "coordinate":
        data = body[1:]
        if len(data) != nnz:
            raise ParseError(f"expected {nnz} entries, found {len(data)}", data[-1][0] if data else size_line)
        for number, parts in data:
            if len(parts) != 3:
                raise ParseError("expected 'row col value'", number)
            i, j = _ints(parts[:2], 2, number, "integer indices")
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise ParseError(f"index ({i}, {j}) outside {rows}x{cols}", number)
            value = value_of(parts[2], number)
            put(i - 1, j - 1, value, number)
            if symmetry == "symmetric" and i != j:
                put(j - 1, i - 1, value, number)
    else:
        # column-major; symmetric arrays store the lower triangle only
        positions = [(i, j) for j in range(cols) for i in range(rows)
                     if symmetry == "general" or i >= j]
        tokens = [(number, token) for number, parts in body[1:] for token in parts]
        if len(tokens) != len(positions):
            raise ParseError(f"expected {len(positions)} values, found {len(tokens)}", body[-1][0])
        for (i, j), (number, token) in zip(positions, tokens):
            value = value_of(token, number)
            put(i, j, value, number)
            if symmetry == "symmetric" and i != j:
                put(j, i, value, number)

    triplets = [(i, j, v) for (i, j), v in entries.items()]
    logger.debug("decoded %dx%d %s matrix with %d stored entries", rows, cols, domain.name, len(triplets))
    return QuadMatrix.from_triplets(domain, rows, cols, triplets, leaf_order)


def encode_matrix_market(m, comments=()):
    """
    Encode a matrix as coordinate Matrix Market text, entries sorted by (col, row)

    Args:
        m: QuadMatrix over int, residue, rational or float64
        comments: extra comment lines

    Returns:
        str
    """
    if m.domain == POLYNOMIALS:
        raise UnsupportedFieldError("polynomial matrices use the polynomial entry format")
    entries = sorted(m.entries(), key=lambda e: (e[1], e[0]))
    extra = []
    if m.domain == FLOATS:
        field = "real"
        values = [repr(float(v)) for _, _, v in entries]
    elif m.domain == RATIONALS:
        field = "integer"
        denominator = math.lcm(1, *(Fraction(v).denominator for _, _, v in entries))
        values = [str(int(Fraction(v) * denominator)) for _, _, v in entries]
        if denominator != 1:
            extra.append(f"% {DENOMINATOR_COMMENT} {denominator}")
    else:
        field = "integer"
        values = [str(int(v)) for _, _, v in entries]

    lines = [f"{BANNER} matrix coordinate {field} general"]
    lines += [f"% {c}" for c in comments]
    lines += extra
    lines.append(f"{m.rows} {m.cols} {len(entries)}")
    lines += [f"{i + 1} {j + 1} {value}" for (i, j, _), value in zip(entries, values)]
    return "\n".join(lines) + "\n"


def read_matrix_market(path, domain=None, leaf_order=DEFAULT_LEAF_ORDER):
    with open(path, "r", encoding="utf-8") as f:
        return decode_matrix_market(f.read(), domain, leaf_order)


def write_matrix_market(m, path, comments=()):
    with open(path, "w", encoding="utf-8") as f:
        f.write(encode_matrix_market(m, comments))
