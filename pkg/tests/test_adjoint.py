from fractions import Fraction

import pytest

from core.adjoint import (
    ExtendedAdjoint,
    adjoint_extended,
    determinant,
    echelon_aux,
    echelon_form,
    kernel_basis,
    rank,
)
from core.domain import INTEGERS, POLYNOMIALS, RATIONALS, IntPoly, ResidueField
from core.errors import DivisionByZeroError, ShapeMismatchError
from core.multiply import multiply
from core.pivots import PivotStructure
from core.quadmatrix import QuadMatrix
from engine.scheduler import TaskEngine, WorkerTopology
from tests.oracles import LEAF, bareiss_det, oracle_nullspace, oracle_rank, random_rows
from utils.generators import low_rank_matrix


def integer(values):
    return QuadMatrix.from_dense(INTEGERS, values, LEAF)


def check_identities(m, result, cfg=None):
    """A * M = d0 * S, d * E = S * J_E, S = I_E * S"""
    padded = m.embed_padded("identity")
    e = result.E.to_matrix(m.domain, m.leaf_order)
    assert multiply(result.A, padded, cfg=cfg) == result.S.scale(result.d0)
    assert e.scale(result.d) == result.S.mask_cols(result.E.col_selector)
    assert result.S.mask_rows(result.E.row_selector) == result.S
    assert not m.domain.is_zero(result.d)


def test_zero_block():
    result = adjoint_extended(QuadMatrix.zeros(INTEGERS, 4, 4, LEAF), 1)
    assert result.A == QuadMatrix.identity(INTEGERS, 4, LEAF)
    assert result.S.is_zero
    assert result.E == PivotStructure.empty(4)
    assert result.d == 1


def test_order_one():
    result = adjoint_extended(integer([[5]]), 1)
    assert result.A.to_lists() == [[1]]
    assert result.S.to_lists() == [[5]]
    assert result.E.pivots == ((0, 0),)
    assert result.d == 5


def test_two_by_two():
    m = integer([[1, 2], [3, 4]])
    result = adjoint_extended(m)
    assert abs(result.d) == 2
    check_identities(m, result)


def test_zero_d0_is_rejected():
    with pytest.raises(DivisionByZeroError):
        adjoint_extended(integer([[1, 2], [3, 4]]), 0)


def test_identities_on_random_matrices(small_cfg, rng):
    for _ in range(60):
        n = int(rng.integers(1, 12))
        values = random_rows(rng, n, n, -3, 3)
        m = integer(values)
        result = adjoint_extended(m, cfg=small_cfg)
        check_identities(m, result, small_cfg)
        aux = echelon_aux(result, small_cfg)
        assert multiply(result.S, aux, cfg=small_cfg).is_zero


def test_rank_deficient_blocks(small_cfg):
    values = [[0, 0, 1, 2], [0, 0, 2, 4], [3, 1, 0, 0], [6, 2, 0, 1]]
    m = integer(values)
    result = adjoint_extended(m, cfg=small_cfg)
    check_identities(m, result, small_cfg)
    assert result.rank == oracle_rank(values)


def test_determinant_examples():
    assert determinant(QuadMatrix.identity(INTEGERS, 8, LEAF)) == 1
    assert determinant(integer([[1, 2], [2, 4]])) == 0
    assert determinant(integer([[0, 1], [1, 0]])) == -1
    assert determinant(integer([[1, 2], [3, 4]])) == -2


def test_determinant_matches_bareiss(small_cfg, rng):
    for _ in range(300):
        n = int(rng.integers(2, 9))
        values = random_rows(rng, n, n)
        assert determinant(integer(values), small_cfg) == bareiss_det(values)


def test_determinant_of_permutations(rng):
    for _ in range(30):
        n = int(rng.integers(2, 9))
        perm = [int(v) for v in rng.permutation(n)]
        values = [[1 if perm[i] == j else 0 for j in range(n)] for i in range(n)]
        assert determinant(integer(values)) == bareiss_det(values)


def test_determinant_over_other_domains(rng):
    values = random_rows(rng, 5, 5)
    expected = bareiss_det(values)
    assert determinant(QuadMatrix.from_dense(RATIONALS, values, LEAF)) == expected
    field = ResidueField(10007)
    assert determinant(QuadMatrix.from_dense(field, values, LEAF)) == expected % field.p


def test_polynomial_determinant():
    x = IntPoly([0, 1])
    m = QuadMatrix.from_dense(POLYNOMIALS, [[x, 1], [1, x]], LEAF)
    assert determinant(m) == x * x - 1


def test_rank_examples():
    assert rank(QuadMatrix.zeros(INTEGERS, 4, 4, LEAF)) == 0
    assert rank(QuadMatrix.identity(INTEGERS, 3, LEAF)) == 3
    assert rank(low_rank_matrix(8, 3, seed=7, leaf_order=LEAF)) == 3


def test_rank_matches_oracle(small_cfg, rng):
    for _ in range(50):
        rows, cols = (int(v) for v in rng.integers(1, 9, size=2))
        values = random_rows(rng, rows, cols, -1, 1)
        assert rank(integer(values), small_cfg) == oracle_rank(values)


def test_kernel_examples():
    assert kernel_basis(QuadMatrix.identity(INTEGERS, 4, LEAF)) == []
    vectors = kernel_basis(QuadMatrix.zeros(INTEGERS, 2, 2, LEAF))
    assert len(vectors) == 2
    assert oracle_rank(vectors) == 2
    (v,) = kernel_basis(integer([[1, 2], [2, 4]]))
    assert v[0] == -2 * v[1] and v[1] != 0


def test_kernel_spans_oracle_nullspace(small_cfg, rng):
    for _ in range(40):
        n = int(rng.integers(2, 9))
        r = int(rng.integers(0, n))
        values = low_rank_matrix(n, r, seed=int(rng.integers(1 << 30)), leaf_order=LEAF).to_lists() if r else \
            [[0] * n for _ in range(n)]
        vectors = kernel_basis(integer(values), small_cfg)
        assert len(vectors) == n - oracle_rank(values)
        for v in vectors:
            assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in values)
        oracle = oracle_nullspace(values)
        stacked = [[Fraction(x) for x in v] for v in vectors] + oracle
        assert oracle_rank(stacked) == len(oracle)


def test_square_shape_required():
    with pytest.raises(ShapeMismatchError):
        kernel_basis(integer([[1, 2, 3]]))
    with pytest.raises(ShapeMismatchError):
        determinant(integer([[1, 2, 3]]))
    with pytest.raises(ShapeMismatchError):
        echelon_form(integer([[1, 2, 3]]))


def test_echelon_form(rng):
    values = random_rows(rng, 6, 6)
    form = echelon_form(integer(values))
    assert form.S.mask_rows(form.E.row_selector) == form.S
    for i, j in form.E.pivots:
        assert form.S[i, j] == form.d


def test_graph_execution_matches_serial(small_cfg, rng):
    values = random_rows(rng, 24, 24)
    m = integer(values)
    serial = adjoint_extended(m, cfg=small_cfg)
    for mode in ("shared_queue", "multidispatch"):
        with TaskEngine(WorkerTopology(6, mode, granularity=4)) as engine:
            parallel = adjoint_extended(m, cfg=small_cfg, engine=engine)
        assert parallel.A == serial.A
        assert parallel.S == serial.S
        assert parallel.E == serial.E
        assert parallel.d == serial.d


def test_solver_reuse_keeps_results_independent(rng):
    solver = ExtendedAdjoint()
    a = integer(random_rows(rng, 4, 4))
    b = integer(random_rows(rng, 4, 4))
    first = solver.compute(a, 1)
    solver.compute(b, 1)
    assert first == solver.compute(a, 1)


def fifteen_bit_rows(rng, rows, cols):
    return random_rows(rng, rows, cols, -(2 ** 15) + 1, 2 ** 15 - 1)


def check_against_bareiss(values, cfg):
    m = integer(values)
    result = adjoint_extended(m, cfg=cfg)
    check_identities(m, result, cfg)
    assert determinant(m, cfg) == bareiss_det(values)
    return result


def test_fifteen_bit_matrices(small_cfg, rng):
    for _ in range(60):
        n = int(rng.integers(1, 17))
        check_against_bareiss(fifteen_bit_rows(rng, n, n), small_cfg)


@pytest.mark.slow
def test_fifteen_bit_matrices_many(small_cfg, rng):
    for trial in range(1000):
        n = trial % 16 + 1
        check_against_bareiss(fifteen_bit_rows(rng, n, n), small_cfg)


def nilpotent_shift(rng, n):
    return [[1 if j == i + 1 else 0 for j in range(n)] for i in range(n)]


def rank_one(rng, n):
    (u,), (v,) = fifteen_bit_rows(rng, 1, n), fifteen_bit_rows(rng, 1, n)
    return [[a * b for b in v] for a in u]


def duplicated_rows(rng, n):
    values = fifteen_bit_rows(rng, n, n)
    for i in range(1, n, 2):
        values[i] = list(values[i - 1])
    return values


def duplicated_columns(rng, n):
    return [list(col) for col in zip(*duplicated_rows(rng, n))]


def zero_rows(rng, n):
    values = fifteen_bit_rows(rng, n, n)
    for i in range(0, n, 3):
        values[i] = [0] * n
    return values


def strictly_lower(rng, n):
    return [[v if j < i else 0 for j, v in enumerate(row)] for i, row in enumerate(fifteen_bit_rows(rng, n, n))]


def strictly_upper(rng, n):
    return [list(col) for col in zip(*strictly_lower(rng, n))]


@pytest.mark.parametrize("n", [3, 5, 8, 13, 16])
@pytest.mark.parametrize("build", [nilpotent_shift, rank_one, duplicated_rows, duplicated_columns, zero_rows,
                                   strictly_lower, strictly_upper])
def test_structured_matrices(small_cfg, rng, build, n):
    values = build(rng, n)
    result = check_against_bareiss(values, small_cfg)
    padding = result.A.order - n
    assert result.rank - padding == oracle_rank(values)
    assert len(kernel_basis(integer(values), small_cfg)) == n - oracle_rank(values)
