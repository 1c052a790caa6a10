"""
Pivot bookkeeping for PyQuadMat
Diagonal 0/1 selectors and partial permutation (pivot) structures
"""

from dataclasses import dataclass, field

import numpy as np
from sympy.combinatorics import Permutation

from core.errors import InvalidSpecError, ShapeMismatchError
from core.quadmatrix import DEFAULT_LEAF_ORDER, QuadMatrix

# Multiplier applied to sign(E) * d when forming the determinant
DETERMINANT_SIGN_CONVENTION = 1


class DiagSelector:
    """Diagonal 0/1 matrix stored as a boolean mask"""

    __slots__ = ("mask",)

    def __init__(self, mask):
        mask = np.array(mask, dtype=bool)
        if mask.ndim != 1:
            raise ShapeMismatchError("selector mask must be one-dimensional")
        mask.flags.writeable = False
        self.mask = mask

    @classmethod
    def full(cls, order):
        return cls(np.ones(order, dtype=bool))

    @classmethod
    def empty(cls, order):
        return cls(np.zeros(order, dtype=bool))

    @classmethod
    def from_indices(cls, order, indices):
        mask = np.zeros(order, dtype=bool)
        mask[list(indices)] = True
        return cls(mask)

    @property
    def order(self):
        return self.mask.shape[0]

    @property
    def popcount(self):
        return int(self.mask.sum())

    @property
    def indices(self):
        return tuple(int(k) for k in np.flatnonzero(self.mask))

    def complement(self):
        """The involution I -> I-bar"""
        return DiagSelector(~self.mask)

    def __and__(self, other):
        return DiagSelector(self.mask & other.mask)

    __mul__ = __and__

    def halves(self):
        half = self.order // 2
        return DiagSelector(self.mask[:half]), DiagSelector(self.mask[half:])

    def to_matrix(self, domain, leaf_order=DEFAULT_LEAF_ORDER):
        return QuadMatrix.from_triplets(domain, self.order, self.order,
                                        [(k, k, domain.one) for k in self.indices], leaf_order)

    def __eq__(self, other):
        return isinstance(other, DiagSelector) and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash(self.mask.tobytes())

    def __repr__(self):
        return f"DiagSelector({''.join('1' if b else '0' for b in self.mask)})"


@dataclass(frozen=True)
class PivotStructure:
    """Pivot positions of an element E of P_n, at most one per row and column"""

    order: int
    pivots: tuple = field(default=())

    def __post_init__(self):
        pivots = tuple(sorted((int(i), int(j)) for i, j in self.pivots))
        rows = [i for i, _ in pivots]
        cols = [j for _, j in pivots]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise InvalidSpecError(f"pivot positions share a row or column: {pivots}")
        if any(not (0 <= k < self.order) for k in rows + cols):
            raise InvalidSpecError(f"pivot outside order {self.order}: {pivots}")
        object.__setattr__(self, "pivots", pivots)

    @classmethod
    def empty(cls, order):
        return cls(order, ())

    @classmethod
    def assemble(cls, nw, ne, sw, se):
        """Structure of [[E11, E12], [E21, E22]] from quadrant structures"""
        half = nw.order
        pivots = list(nw.pivots)
        pivots += [(i, j + half) for i, j in ne.pivots]
        pivots += [(i + half, j) for i, j in sw.pivots]
        pivots += [(i + half, j + half) for i, j in se.pivots]
        return cls(2 * half, tuple(pivots))

    @property
    def rank(self):
        return len(self.pivots)

    @property
    def is_full_rank(self):
        return self.rank == self.order

    @property
    def row_selector(self):
        """I_E = E * E^T"""
        return DiagSelector.from_indices(self.order, (i for i, _ in self.pivots))

    @property
    def col_selector(self):
        """J_E = E^T * E"""
        return DiagSelector.from_indices(self.order, (j for _, j in self.pivots))

    def sign(self):
        """Signature of the pivot permutation; 0 below full rank"""
        if not self.is_full_rank:
            return 0
        return Permutation([j for _, j in self.pivots]).signature()

    def to_matrix(self, domain, leaf_order=DEFAULT_LEAF_ORDER):
        return QuadMatrix.from_triplets(domain, self.order, self.order,
                                        [(i, j, domain.one) for i, j in self.pivots], leaf_order)

    def transpose(self):
        return PivotStructure(self.order, tuple((j, i) for i, j in self.pivots))
