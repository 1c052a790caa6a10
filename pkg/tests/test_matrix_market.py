from fractions import Fraction

import pytest

from core.domain import FLOATS, INTEGERS, POLYNOMIALS, RATIONALS
from core.errors import DuplicateEntryError, ParseError, UnsupportedFieldError
from core.quadmatrix import QuadMatrix
from matrixio.matrix_market import (
    decode_matrix_market,
    encode_matrix_market,
    read_matrix_market,
    write_matrix_market,
)


def test_identity_round_trip(tmp_path):
    identity = QuadMatrix.identity(INTEGERS, 4)
    path = tmp_path / "identity.mtx"
    write_matrix_market(identity, path)
    assert read_matrix_market(path) == identity


def test_coordinate_with_comments():
    text = """%%MatrixMarket matrix coordinate integer general
% a comment
%

2 3 3
1 1 5
2 3 -7
1 2 0
"""
    m = decode_matrix_market(text)
    assert m.domain == INTEGERS
    assert m.shape == (2, 3)
    assert m.to_lists() == [[5, 0, 0], [0, 0, -7]]


def test_array_is_column_major():
    text = "%%MatrixMarket matrix array integer general\n2 2\n1\n3\n2\n4\n"
    assert decode_matrix_market(text).to_lists() == [[1, 2], [3, 4]]


def test_symmetric_storage():
    coordinate = "%%MatrixMarket matrix coordinate integer symmetric\n2 2 2\n1 1 4\n2 1 2\n"
    assert decode_matrix_market(coordinate).to_lists() == [[4, 2], [2, 0]]
    array = "%%MatrixMarket matrix array integer symmetric\n2 2\n4\n2\n3\n"
    assert decode_matrix_market(array).to_lists() == [[4, 2], [2, 3]]


def test_real_field():
    text = "%%MatrixMarket matrix coordinate real general\n1 2 2\n1 1 0.5\n1 2 -2e1\n"
    m = decode_matrix_market(text)
    assert m.domain == FLOATS
    assert m.to_lists() == [[0.5, -20.0]]
    assert decode_matrix_market(encode_matrix_market(m)) == m


def test_rational_denominator_comment():
    m = QuadMatrix.from_dense(RATIONALS, [[Fraction(1, 2), 0], [Fraction(-2, 3), 1]])
    text = encode_matrix_market(m, comments=("inverse",))
    assert "% denominator 6" in text
    assert "% inverse" in text
    decoded = decode_matrix_market(text)
    assert decoded.domain == RATIONALS
    assert decoded == m


def test_writer_sorts_by_column_then_row():
    m = QuadMatrix.from_dense(INTEGERS, [[1, 2], [3, 4]])
    lines = encode_matrix_market(m).splitlines()
    assert lines[1] == "2 2 4"
    assert lines[2:] == ["1 1 1", "2 1 3", "1 2 2", "2 2 4"]


def test_unsupported_headers():
    for field in ("complex", "pattern"):
        with pytest.raises(UnsupportedFieldError):
            decode_matrix_market(f"%%MatrixMarket matrix coordinate {field} general\n1 1 0\n")
    with pytest.raises(UnsupportedFieldError):
        decode_matrix_market("%%MatrixMarket matrix coordinate integer skew-symmetric\n1 1 0\n")
    with pytest.raises(UnsupportedFieldError):
        encode_matrix_market(QuadMatrix.identity(POLYNOMIALS, 2))


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as info:
        decode_matrix_market("%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 1 1\n3 1 1\n")
    assert info.value.line == 4
    with pytest.raises(ParseError) as info:
        decode_matrix_market("%%MatrixMarket matrix coordinate integer general\n2 2 1\n1 1 x\n")
    assert info.value.line == 3
    with pytest.raises(ParseError):
        decode_matrix_market("%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 1 1\n")
    with pytest.raises(ParseError):
        decode_matrix_market("%%MatrixMarket vector coordinate integer general\n")
    with pytest.raises(ParseError):
        decode_matrix_market("")


def test_duplicate_entries():
    with pytest.raises(DuplicateEntryError):
        decode_matrix_market("%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 1 1\n1 1 2\n")
