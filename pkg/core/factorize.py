"""
Factorizations for PyQuadMat
Block-recursive Strassen inversion, triangular inversion and Cholesky
decomposition over fields
"""

import logging
from dataclasses import dataclass

from core.adjoint import determinant
from core.domain import FLOATS, RATIONALS, field_of
from core.errors import (
    InvalidSpecError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    NotTriangularError,
    ShapeMismatchError,
    SingularLeadingBlockError,
    SingularMatrixError,
)
from core.multiply import Multiplier
from core.quadmatrix import IDENTITY_PAD, QuadMatrix
from engine.graph import TaskGraph

logger = logging.getLogger(__name__)

LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class CholeskyResult:
    H: QuadMatrix
    Hinv: QuadMatrix


def _square_field_input(m, what):
    if not m.is_square:
        raise ShapeMismatchError(f"{what} needs a square matrix, got {m.rows}x{m.cols}")
    return m.convert(field_of(m.domain))


class Factorizer:
    """Recursive factorizations sharing one multiplier (and task engine)"""

    def __init__(self, cfg=None, engine=None):
        self.multiplier = Multiplier(cfg, engine)
        self.engine = engine

    def _mul(self, a, b):
        return self.multiplier.multiply(a, b)

    def _parallel(self, m):
        return self.engine is not None and m.order >= self.engine.granularity

    def _scalar(self, m, value):
        return QuadMatrix.scalar(m.domain, 1, value, m.leaf_order)

    # Strassen inversion

    def invert_strassen(self, m):
        """Inverse by the six-step block recursion; no pivoting"""
        m = _square_field_input(m, "inversion")
        padded = m.embed_padded(IDENTITY_PAD)
        try:
            inverse = self._invert(padded, ())
        except SingularLeadingBlockError as exc:
            if determinant(m) == 0:
                raise SingularMatrixError("matrix is singular") from exc
            raise
        return inverse.crop(m.rows, m.cols)

    def _invert(self, m, path):
        """Inverse of a padded block; path names the leading blocks taken to reach it"""
        if m.order == 1:
            a = m.scalar_value()
            if m.domain.is_zero(a):
                raise SingularLeadingBlockError(path)
            return self._scalar(m, m.domain.inverse(a))
        a0, a1, a2, a3 = m.quadrants()
        # M0 = -A0^-1 and the Schur complement A3 - A2 * A0^-1 * A1 = A3 + M3
        m0 = self._invert(a0, path + ("A0",)).negate()
        m1 = self._mul(m0, a1)
        m2 = self._mul(a2, m0)
        m3 = self._mul(m2, a1)
        # M4 is the inverse of the Schur complement
        m4 = self._invert(a3.add(m3), path + ("S",))
        m5 = self._mul(m4, m2)
        return QuadMatrix.from_quadrants(self._mul(m1, m5).sub(m0), self._mul(m1, m4), m5, m4)

    # Triangular inversion

    def invert_triangular(self, m, side=LOWER):
        """Inverse of a lower or upper triangular matrix; a zero diagonal entry is reported by index"""
        if side not in (LOWER, UPPER):
            raise InvalidSpecError(f"side must be {LOWER!r} or {UPPER!r}, got {side!r}")
        m = _square_field_input(m, "triangular inversion")
        for i, j, _ in m.entries():
            if (side == LOWER and j > i) or (side == UPPER and i > j):
                raise NotTriangularError(f"entry ({i}, {j}) is outside the {side} triangle")
        for k in range(m.rows):
            if m.domain.is_zero(m[k, k]):
                raise SingularMatrixError(f"zero diagonal entry at index {k}", index=k)
        padded = m.embed_padded(IDENTITY_PAD)
        return self._invert_triangular(padded, side == LOWER).crop(m.rows, m.cols)

    def _invert_triangular(self, m, lower):
        """Both diagonal blocks are inverted independently, the off-diagonal block follows from them"""
        if m.order == 1:
            return self._scalar(m, m.domain.inverse(m.scalar_value()))
        a, upper_block, lower_block, c = m.quadrants()
        if self._parallel(m):
            graph = TaskGraph(f"tri-inverse:{m.order}")
            first = graph.add("invert", lambda: self._invert_triangular(a, lower))
            second = graph.add("invert", lambda: self._invert_triangular(c, lower))
            outputs = self.engine.run(graph)
            a_inv, c_inv = outputs[first], outputs[second]
        else:
            a_inv = self._invert_triangular(a, lower)
            c_inv = self._invert_triangular(c, lower)
        zero = QuadMatrix.zeros(m.domain, a.order, a.order, m.leaf_order)
        if lower:
            off = self._mul(self._mul(c_inv, lower_block), a_inv).negate()
            return QuadMatrix.from_quadrants(a_inv, zero, off, c_inv)
        off = self._mul(self._mul(a_inv, upper_block), c_inv).negate()
        return QuadMatrix.from_quadrants(a_inv, off, zero, c_inv)

    # Cholesky

    def cholesky(self, m):
        """H lower triangular with positive diagonal and H * H^T = m, plus H^-1"""
        m = _square_field_input(m, "cholesky")
        if m.domain not in (RATIONALS, FLOATS):
            raise InvalidSpecError(f"cholesky needs the rational or float64 domain, got {m.domain.name}")
        if m != m.transpose():
            raise NotSymmetricError("matrix is not symmetric")
        padded = m.embed_padded(IDENTITY_PAD)
        h, h_inv = self._cholesky(padded, (), 0)
        return CholeskyResult(h.crop(m.rows, m.cols), h_inv.crop(m.rows, m.cols))

    def _cholesky(self, m, path, offset):
        """(H, H^-1) of a padded block whose first row is row offset of the input"""
        domain = m.domain
        if m.order == 1:
            pivot = m.scalar_value()
            if pivot <= 0:
                raise NotPositiveDefiniteError(pivot, path, offset)
            root = domain.sqrt(pivot)
            return self._scalar(m, root), self._scalar(m, domain.inverse(root))
        a1, a2, _, a3 = m.quadrants()
        # B from the leading block, C = A2^T * B^-T, then recurse on F = A3 - C * C^T
        half = a1.order
        b, b_inv = self._cholesky(a1, path + ("A1",), offset)
        c = self._mul(a2.transpose(), b_inv.transpose())
        f = a3.sub(self._mul(c, c.transpose()))
        d, d_inv = self._cholesky(f, path + ("F",), offset + half)
        # H^-1 = [[B^-1, 0], [-D^-1 * C * B^-1, D^-1]]
        zero = QuadMatrix.zeros(domain, half, half, m.leaf_order)
        h = QuadMatrix.from_quadrants(b, zero, c, d)
        off = self._mul(self._mul(d_inv, c), b_inv).negate()
        h_inv = QuadMatrix.from_quadrants(b_inv, zero, off, d_inv)
        return h, h_inv


def invert_strassen(m, cfg=None, engine=None):
    """Inverse of a square matrix over its fraction field.

    Raises SingularMatrixError for singular input and SingularLeadingBlockError
    when an invertible matrix meets a singular leading block.
    """
    return Factorizer(cfg, engine).invert_strassen(m)


def invert_triangular(m, side=LOWER, cfg=None, engine=None):
    """Inverse of a triangular matrix; side is LOWER or UPPER"""
    return Factorizer(cfg, engine).invert_triangular(m, side)


def cholesky(m, cfg=None, engine=None):
    """CholeskyResult of a symmetric positive definite matrix; integer input is solved over the rationals"""
    return Factorizer(cfg, engine).cholesky(m)
