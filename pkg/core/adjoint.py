"""
Extended adjoint mapping for PyQuadMat
Fraction-free recursive computation of the adjoint-style matrix A, the
echelon form S, its pivot structure E and the scale d, plus the derived
kernel, determinant and rank
"""

import logging
from dataclasses import dataclass
from typing import Any

from core.errors import DivisionByZeroError, ResultMismatchError, ShapeMismatchError
from core.multiply import Multiplier, multiply_accumulate
from core.pivots import DETERMINANT_SIGN_CONVENTION, PivotStructure
from core.quadmatrix import IDENTITY_PAD, QuadMatrix
from engine.graph import TaskGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdjointResult:
    """A * M = d0 * S and d * E = S * J_E, with S = I_E * S and d != 0"""

    A: QuadMatrix
    S: QuadMatrix
    E: PivotStructure
    d: Any
    d0: Any

    @property
    def rank(self):
        return self.E.rank


@dataclass(frozen=True)
class EchelonForm:
    S: QuadMatrix
    E: PivotStructure
    d: Any


@dataclass(frozen=True)
class _Reduced:
    m1_12: QuadMatrix
    m1_21: QuadMatrix
    m1_22: QuadMatrix


@dataclass(frozen=True)
class _Step4:
    m2_22: QuadMatrix
    m2_12: QuadMatrix
    t: QuadMatrix
    ds: Any
    r22: AdjointResult


class ExtendedAdjoint:
    """Runs the four-step recursion; every division in it is exact"""

    def __init__(self, cfg=None, engine=None):
        self.multiplier = Multiplier(cfg, engine)
        self.engine = engine

    def _mul(self, a, b):
        return self.multiplier.multiply(a, b)

    def _e_matrix(self, r, like):
        return r.E.to_matrix(like.domain, like.leaf_order)

    def echelon_aux(self, r):
        """Y = E^T * S - d * I"""
        e_t = self._e_matrix(r, r.S).transpose()
        return self._mul(e_t, r.S).sub(QuadMatrix.scalar(r.S.domain, r.S.order, r.d, r.S.leaf_order))

    def compute(self, m, d0):
        """AdjointResult of a padded square block, starting from the scale d0"""
        domain = m.domain
        if domain.is_zero(d0):
            raise DivisionByZeroError("extended adjoint called with d0 = 0")
        n = m.order
        if m.is_zero:
            logger.debug("zero block of order %d", n)
            return AdjointResult(QuadMatrix.scalar(domain, n, d0, m.leaf_order), m, PivotStructure.empty(n), d0, d0)
        if n == 1:
            a = m.scalar_value()
            return AdjointResult(QuadMatrix.scalar(domain, 1, d0, m.leaf_order), m,
                                 PivotStructure(1, ((0, 0),)), a, d0)

        m11, m12, m21, m22 = m.quadrants()
        # step one on the leading quadrant feeds all later steps; two and three are independent
        if self.engine is not None and n >= self.engine.granularity:
            graph = TaskGraph(f"adjoint:{n}")
            s1 = graph.add("step1", lambda: self.compute(m11, d0))
            red = graph.add("reduce", lambda r11: self._reduce(m12, m21, m22, d0, r11), s1)
            s2 = graph.add("step2", self._step2, s1, red)
            s3 = graph.add("step3", self._step3, s1, red)
            s4 = graph.add("step4", self._step4, s1, red, s2, s3)
            echelon = graph.add("echelon", self._assemble_s, s1, s2, s3, s4)
            adjoint = graph.add("adjoint", lambda r11, rd, r12, r21, st:
                                self._assemble_a(m21, d0, r11, rd, r12, r21, st), s1, red, s2, s3, s4)
            outputs = self.engine.run(graph)
            r11, r12, r21, step4 = outputs[s1], outputs[s2], outputs[s3], outputs[s4]
            s, a = outputs[echelon], outputs[adjoint]
        else:
            r11 = self.compute(m11, d0)
            reduced = self._reduce(m12, m21, m22, d0, r11)
            r12 = self._step2(r11, reduced)
            r21 = self._step3(r11, reduced)
            step4 = self._step4(r11, reduced, r12, r21)
            s = self._assemble_s(r11, r12, r21, step4)
            a = self._assemble_a(m21, d0, r11, reduced, r12, r21, step4)
        e = PivotStructure.assemble(r11.E, r12.E, r21.E, step4.r22.E)
        return AdjointResult(a, s, e, step4.r22.d, d0)

    def _reduce(self, m12, m21, m22, d0, r11):
        """Apply the first quadrant's transformation to the other three blocks"""
        y11 = self.echelon_aux(r11)
        e11_t = self._e_matrix(r11, m12).transpose()
        # right half: M12 brought into the row basis of S11
        m1_12 = self._mul(r11.A, m12).div_exact(d0)
        # bottom row: clear M21 against the pivot columns of S11
        m1_21 = self._mul(m21, y11).negate().div_exact(d0)
        m1_22 = m22.scale(r11.d).sub(self._mul(self._mul(m21, e11_t), m1_12)).div_exact(d0)
        return _Reduced(m1_12, m1_21, m1_22)

    def _step2(self, r11, reduced):
        """Rows of the reduced M12 that hold no pivot of S11"""
        return self.compute(reduced.m1_12.mask_rows(r11.E.row_selector.complement()), r11.d)

    def _step3(self, r11, reduced):
        """Reduced M21, continuing from the scale d11"""
        return self.compute(reduced.m1_21, r11.d)

    def _step4(self, r11, reduced, r12, r21):
        """Eliminate the last quadrant with steps two and three, then recurse on the remainder.

        ds = d21 * d12 / d11 is the scale the last recursion starts from.
        """
        domain = r11.S.domain
        d11, d12, d21 = r11.d, r12.d, r21.d
        y12 = self.echelon_aux(r12)
        m2_22 = self._mul(self._mul(r21.A, reduced.m1_22), y12).negate().div_exact(d11 * d11)
        ds = domain.div_exact(d21 * d12, d11)
        # correction of the upper right block by the pivots found below
        e21_t = self._e_matrix(r21, r11.S).transpose()
        t = self._mul(self._mul(r11.S, e21_t), r21.A).div_exact(d11)
        inner = self._mul(t, reduced.m1_22).sub(reduced.m1_12.mask_rows(r11.E.row_selector).scale(d21))
        m2_12 = self._mul(inner.div_exact(d11), y12).add(r12.S.scale(d21)).div_exact(d11)
        # only rows without a pivot from step three are left for the last block
        r22 = self.compute(m2_22.mask_rows(r21.E.row_selector.complement()), ds)
        return _Step4(m2_22, m2_12, t, ds, r22)

    def _assemble_s(self, r11, r12, r21, step4):
        """Echelon form of the whole block, every quadrant brought to the final scale d22"""
        r22, ds = step4.r22, step4.ds
        d21, d22 = r21.d, r22.d
        y21 = self.echelon_aux(r21)
        y22 = self.echelon_aux(r22)
        # pivots of the lower half clear their columns in the upper half
        m2_11 = self._mul(r11.S, y21).negate().div_exact(r11.d)
        m3_12 = self._mul(step4.m2_12, y22).negate().div_exact(ds)
        m3_22 = r22.S.sub(self._mul(step4.m2_22.mask_rows(r21.E.row_selector), y22).div_exact(ds))
        return QuadMatrix.from_quadrants(
            m2_11.scale(d22).div_exact(d21),
            m3_12,
            r21.S.scale(d22).div_exact(d21),
            m3_22,
        )

    def _assemble_a(self, m21, d0, r11, reduced, r12, r21, step4):
        """Transformation matrix as the block product of the per-step transformations"""
        r22, ds = step4.r22, step4.ds
        d11, d12, d21, d22 = r11.d, r12.d, r21.d, r22.d
        e11_t = self._e_matrix(r11, m21).transpose()
        e12_t = self._e_matrix(r12, m21).transpose()
        e22_t = self._e_matrix(r22, m21).transpose()
        # a1 covers the top half (steps one and two), a2 the bottom half (three and four)
        a1 = self._mul(r12.A, r11.A)
        a2 = self._mul(r22.A, r21.A)
        masked_12 = reduced.m1_12.mask_rows(r11.E.row_selector)
        l_block = a1.sub(self._mul(self._mul(masked_12, e12_t), a1).div_exact(d11)).div_exact(d11).scale(d22)
        masked_22 = step4.m2_22.mask_rows(r21.E.row_selector)
        p_block = a2.sub(self._mul(self._mul(masked_22, e22_t), a2).div_exact(ds)).div_exact(d21)
        # off-diagonal blocks of the transformation
        f_block = step4.t.scale(d22).add(
            self._mul(self._mul(step4.m2_12, e22_t), a2).div_exact(ds)).div_exact(d21).negate()
        g_block = self._mul(self._mul(m21, e11_t), r11.A).div_exact(d0).scale(d12).add(
            self._mul(self._mul(reduced.m1_22, e12_t), a1).div_exact(d11)).div_exact(d11).negate()
        return QuadMatrix.from_quadrants(
            l_block.add(self._mul(f_block, g_block)).div_exact(d12),
            f_block,
            self._mul(p_block, g_block).div_exact(d12),
            p_block,
        )


def _square_padded(m, what):
    if not m.is_square:
        raise ShapeMismatchError(f"{what} needs a square matrix, got {m.rows}x{m.cols}")
    return m.embed_padded(IDENTITY_PAD)


def adjoint_extended(m, d0=None, cfg=None, engine=None):
    """(A, S, E, d) of a square matrix, identity-padded to order 2^k"""
    padded = _square_padded(m, "extended adjoint")
    if d0 is None:
        d0 = m.domain.one
    return ExtendedAdjoint(cfg, engine).compute(padded, m.domain.convert(d0))


def echelon_aux(result, cfg=None, engine=None):
    return ExtendedAdjoint(cfg, engine).echelon_aux(result)


def echelon_form(m, cfg=None, engine=None):
    result = adjoint_extended(m, cfg=cfg, engine=engine)
    return EchelonForm(result.S, result.E, result.d)


def determinant(m, cfg=None, engine=None):
    """sign(E) * d at full rank, zero otherwise"""
    result = adjoint_extended(m, cfg=cfg, engine=engine)
    if not result.E.is_full_rank:
        return m.domain.zero
    return m.domain.convert(result.E.sign() * DETERMINANT_SIGN_CONVENTION * result.d)


def rank(m, cfg=None, engine=None):
    """Rank; non-square inputs are zero-extended to a square first"""
    padded = m.embed_padded(IDENTITY_PAD)
    result = ExtendedAdjoint(cfg, engine).compute(padded, m.domain.one)
    return result.rank - (padded.order - max(m.rows, m.cols))


def kernel_basis(m, cfg=None, engine=None):
    """Basis of the right kernel as lists of domain elements"""
    solver = ExtendedAdjoint(cfg, engine)
    padded = _square_padded(m, "kernel")
    result = solver.compute(padded, m.domain.one)
    if result.E.is_full_rank:
        return []
    y = solver.echelon_aux(result).to_dense()
    n = m.rows
    vectors = []
    for j in result.E.col_selector.complement().indices:
        column = y[:, j]
        if any(column[n:]):
            raise ResultMismatchError(f"kernel column {j} has nonzero padding coordinates")
        vectors.append(list(column[:n]))
    basis = QuadMatrix.from_triplets(m.domain, n, len(vectors),
                                     [(i, k, v[i]) for k, v in enumerate(vectors) for i in range(n)],
                                     m.leaf_order)
    if not multiply_accumulate(m, basis, cfg=cfg).is_zero:
        raise ResultMismatchError("kernel vectors are not annihilated by the matrix")
    return vectors
