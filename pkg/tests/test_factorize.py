from fractions import Fraction

import numpy as np
import pytest

from core.domain import FLOATS, INTEGERS, RATIONALS
from core.errors import (
    InvalidSpecError,
    NonSquarePivotError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    NotTriangularError,
    ShapeMismatchError,
    SingularLeadingBlockError,
    SingularMatrixError,
)
from core.factorize import LOWER, UPPER, cholesky, invert_strassen, invert_triangular
from core.multiply import multiply
from core.quadmatrix import QuadMatrix
from engine.scheduler import TaskEngine, WorkerTopology
from tests.oracles import LEAF, bareiss_det, oracle_inverse, random_rows
from utils.generators import RandomSpec, generate_matrix


def rational(values, leaf_order=LEAF):
    return QuadMatrix.from_dense(RATIONALS, values, leaf_order)


def test_invert_identity():
    i = QuadMatrix.identity(RATIONALS, 8, LEAF)
    assert invert_strassen(i) == i


def test_invert_two_by_two():
    inverse = invert_strassen(QuadMatrix.from_dense(INTEGERS, [[1, 2], [3, 4]]))
    assert inverse.domain == RATIONALS
    assert inverse.to_lists() == [[-2, 1], [Fraction(3, 2), Fraction(-1, 2)]]


def test_invert_matches_gauss_jordan(small_cfg, rng):
    checked = 0
    while checked < 60:
        n = int(rng.integers(1, 9))
        values = random_rows(rng, n, n)
        if bareiss_det(values) == 0:
            continue
        try:
            inverse = invert_strassen(rational(values), small_cfg)
        except SingularLeadingBlockError:
            continue
        assert inverse.to_lists() == oracle_inverse(values)
        checked += 1


def test_invert_singular_matrix():
    with pytest.raises(SingularMatrixError):
        invert_strassen(rational([[1, 2], [2, 4]]))


def test_invert_singular_leading_block_reports_path():
    # invertible, but the leading 1x1 block is zero
    with pytest.raises(SingularLeadingBlockError) as info:
        invert_strassen(rational([[0, 1], [1, 0]]))
    assert info.value.path == ("A0",)


def test_invert_requires_square():
    with pytest.raises(ShapeMismatchError):
        invert_strassen(rational([[1, 2]]))


def test_invert_spd_with_engine(small_cfg):
    m = generate_matrix(RandomSpec(order=12, spd=True, bit_width=3), 5, RATIONALS, LEAF)
    serial = invert_strassen(m, small_cfg)
    with TaskEngine(WorkerTopology(4, granularity=4)) as engine:
        assert invert_strassen(m, small_cfg, engine) == serial
    assert multiply(m, serial, cfg=small_cfg) == QuadMatrix.identity(RATIONALS, 12, LEAF)


def test_invert_triangular_examples():
    i = QuadMatrix.identity(RATIONALS, 4, LEAF)
    assert invert_triangular(i, LOWER) == i
    assert invert_triangular(rational([[1, 0], [2, 1]]), LOWER).to_lists() == [[1, 0], [-2, 1]]
    diagonal = rational([[2, 0, 0, 0], [0, 4, 0, 0], [0, 0, 5, 0], [0, 0, 0, 10]])
    expected = [[Fraction(1, 2), 0, 0, 0], [0, Fraction(1, 4), 0, 0], [0, 0, Fraction(1, 5), 0],
                [0, 0, 0, Fraction(1, 10)]]
    assert invert_triangular(diagonal, LOWER).to_lists() == expected


def test_invert_triangular_random(small_cfg, rng):
    for n in (3, 7, 13):
        values = [[v if j < i else (int(rng.integers(1, 9)) if j == i else 0) for j, v in enumerate(row)]
                  for i, row in enumerate(random_rows(rng, n, n))]
        lower = rational(values)
        inverse = invert_triangular(lower, LOWER, small_cfg)
        assert multiply(lower, inverse, cfg=small_cfg) == QuadMatrix.identity(RATIONALS, n, LEAF)
        upper = lower.transpose()
        assert invert_triangular(upper, UPPER, small_cfg) == inverse.transpose()
        with TaskEngine(WorkerTopology(4, granularity=2)) as engine:
            assert invert_triangular(lower, LOWER, small_cfg, engine) == inverse


def test_invert_triangular_errors():
    with pytest.raises(SingularMatrixError) as info:
        invert_triangular(rational([[1, 0, 0], [1, 0, 0], [1, 1, 1]]), LOWER)
    assert info.value.index == 1
    with pytest.raises(NotTriangularError):
        invert_triangular(rational([[1, 1], [0, 1]]), LOWER)
    with pytest.raises(InvalidSpecError):
        invert_triangular(rational([[1]]), "diagonal")


def test_cholesky_examples():
    i = QuadMatrix.identity(RATIONALS, 4, LEAF)
    result = cholesky(i)
    assert result.H == i and result.Hinv == i
    result = cholesky(rational([[4, 2], [2, 2]]))
    assert result.H.to_lists() == [[2, 0], [1, 1]]
    assert result.Hinv.to_lists() == [[Fraction(1, 2), 0], [Fraction(-1, 2), 1]]


def test_cholesky_not_positive_definite():
    with pytest.raises(NotPositiveDefiniteError) as info:
        cholesky(rational([[1, 2], [2, 1]]))
    assert info.value.index == 1
    assert info.value.path == ("F",)


def test_cholesky_errors():
    with pytest.raises(NotSymmetricError):
        cholesky(rational([[1, 2], [3, 4]]))
    with pytest.raises(NonSquarePivotError):
        cholesky(rational([[2, 0], [0, 1]]))


def test_cholesky_float(small_cfg):
    m = generate_matrix(RandomSpec(order=10, spd=True, bit_width=4), 11, FLOATS, LEAF)
    result = cholesky(m, small_cfg)
    h = result.H.to_dense()
    assert np.allclose(h, np.tril(h))
    assert np.all(np.diag(h) > 0)
    assert np.allclose(h @ h.T, m.to_dense())
    assert np.allclose(result.Hinv.to_dense() @ h, np.eye(10))


def test_cholesky_rational_square_pivots(small_cfg):
    h = rational([[1, 0, 0], [2, 3, 0], [-1, 4, 2]])
    m = multiply(h, h.transpose())
    result = cholesky(m, small_cfg)
    assert result.H == h
    assert multiply(result.Hinv, h) == QuadMatrix.identity(RATIONALS, 3, LEAF)


def diagonally_dominant(rng, n):
    values = random_rows(rng, n, n)
    for i in range(n):
        values[i][i] = 10 * n * (1 if rng.integers(0, 2) else -1)
    return values


def test_float_inverse_residual(rng):
    n = 128
    block = rng.uniform(-1, 1, size=(n, n)) + 2 * n * np.eye(n)
    m = QuadMatrix.from_block(FLOATS, block, 16)
    inverse = invert_strassen(m).to_dense()
    residual = np.abs(block @ inverse - np.eye(n)).sum(axis=1).max()
    assert residual <= 1e-9


def check_exact_inverse(values, cfg):
    n = len(values)
    m = rational(values)
    inverse = invert_strassen(m, cfg)
    identity = QuadMatrix.identity(RATIONALS, n, LEAF)
    assert multiply(m, inverse, cfg=cfg) == identity
    assert multiply(inverse, m, cfg=cfg) == identity


def test_exact_rational_inverse(small_cfg, rng):
    for n in (16, 24):
        check_exact_inverse(diagonally_dominant(rng, n), small_cfg)


@pytest.mark.slow
@pytest.mark.parametrize("n", [32, 48, 64])
def test_exact_rational_inverse_large(small_cfg, rng, n):
    check_exact_inverse(diagonally_dominant(rng, n), small_cfg)
    spd = generate_matrix(RandomSpec(order=n, spd=True, bit_width=3), n, RATIONALS, LEAF)
    check_exact_inverse(spd.to_lists(), small_cfg)


def lower_factor(rng, n):
    return [[v if j < i else (int(rng.integers(1, 10)) if j == i else 0) for j, v in enumerate(row)]
            for i, row in enumerate(random_rows(rng, n, n))]


def check_cholesky_recovers_factor(values, cfg):
    g = rational(values)
    result = cholesky(multiply(g, g.transpose(), cfg=cfg), cfg)
    identity = QuadMatrix.identity(RATIONALS, len(values), LEAF)
    assert result.H == g
    assert multiply(result.H, result.Hinv, cfg=cfg) == identity
    assert multiply(result.Hinv, result.H, cfg=cfg) == identity


def test_cholesky_recovers_integer_factor(small_cfg, rng):
    for n in (5, 16, 24):
        check_cholesky_recovers_factor(lower_factor(rng, n), small_cfg)


@pytest.mark.slow
@pytest.mark.parametrize("n", [40, 64])
def test_cholesky_recovers_integer_factor_large(small_cfg, rng, n):
    check_cholesky_recovers_factor(lower_factor(rng, n), small_cfg)
