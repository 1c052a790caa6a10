import pytest

from core.domain import INTEGERS
from core.errors import InvalidSpecError
from core.multiply import multiply
from core.pivots import DiagSelector, PivotStructure


def test_selector_complement_is_an_involution():
    selector = DiagSelector([True, False, False, True])
    assert selector.complement().complement() == selector
    assert selector.complement().indices == (1, 2)
    assert (selector & selector) == selector
    assert selector.popcount == 2


def test_selector_halves_and_matrix():
    selector = DiagSelector.from_indices(4, [0, 3])
    top, bottom = selector.halves()
    assert top.indices == (0,)
    assert bottom.indices == (1,)
    assert selector.to_matrix(INTEGERS).entries() == [(0, 0, 1), (3, 3, 1)]


def test_structure_validation():
    with pytest.raises(InvalidSpecError):
        PivotStructure(2, ((0, 0), (0, 1)))
    with pytest.raises(InvalidSpecError):
        PivotStructure(2, ((0, 0), (1, 0)))
    with pytest.raises(InvalidSpecError):
        PivotStructure(2, ((2, 0),))


def test_row_and_col_selectors():
    e = PivotStructure(4, ((2, 0), (0, 3)))
    assert e.rank == 2
    assert e.row_selector.indices == (0, 2)
    assert e.col_selector.indices == (0, 3)
    assert e.row_selector.popcount == e.rank


def test_e_et_e_is_e():
    e = PivotStructure(4, ((1, 0), (3, 2)))
    m = e.to_matrix(INTEGERS)
    assert multiply(multiply(m, m.transpose()), m) == m
    assert multiply(m, m.transpose()) == e.row_selector.to_matrix(INTEGERS)
    assert multiply(m.transpose(), m) == e.col_selector.to_matrix(INTEGERS)


def test_sign():
    assert PivotStructure(2, ((0, 0), (1, 1))).sign() == 1
    assert PivotStructure(2, ((0, 1), (1, 0))).sign() == -1
    assert PivotStructure(3, ((0, 1), (1, 2), (2, 0))).sign() == 1
    assert PivotStructure(2, ((0, 1),)).sign() == 0


def test_assemble_quadrants():
    one = PivotStructure(1, ((0, 0),))
    empty = PivotStructure.empty(1)
    e = PivotStructure.assemble(empty, one, one, empty)
    assert e.pivots == ((0, 1), (1, 0))
    assert e.transpose() == e
