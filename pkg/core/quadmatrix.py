"""
Quadtree matrices for PyQuadMat
Handles block storage with zero-block elision, padding to order 2^k and the
elementwise and structural operations shared by all algorithms
"""

import logging
from fractions import Fraction

import numpy as np

from core.domain import INTEGERS
from core.errors import (
    DuplicateEntryError,
    IndexOutOfRangeError,
    InvalidSpecError,
    ShapeMismatchError,
)

logger = logging.getLogger(__name__)

DEFAULT_LEAF_ORDER = 32

ZERO_PAD = "zero"
IDENTITY_PAD = "identity"


def next_power_of_two(n):
    return 1 << max(0, n - 1).bit_length()


def is_power_of_two(n):
    return n > 0 and n & (n - 1) == 0


class _ZeroNode:
    __slots__ = ()
    nnz = 0

    def __repr__(self):
        return "Zero"


ZERO = _ZeroNode()


class Leaf:
    """Dense read-only block; its order never exceeds the leaf order"""

    __slots__ = ("block", "nnz")

    def __init__(self, block, nnz):
        block.flags.writeable = False
        self.block = block
        self.nnz = nnz

    def __repr__(self):
        return f"Leaf({self.block.shape[0]}, nnz={self.nnz})"


class Split:
    """Four children (NW, NE, SW, SE) of half order"""

    __slots__ = ("children", "nnz")

    def __init__(self, children):
        self.children = tuple(children)
        self.nnz = sum(child.nnz for child in self.children)

    def __repr__(self):
        return f"Split(nnz={self.nnz})"


# Node level helpers. A node carries no order; callers pass it down.

def _make_leaf(domain, block):
    nnz = domain.count_nonzero(block)
    if not nnz:
        return ZERO
    return Leaf(block, nnz)


def _join(domain, leaf_order, order, children):
    if all(child is ZERO for child in children):
        return ZERO
    if order <= leaf_order:
        half = order // 2
        nw, ne, sw, se = (_dense(domain, child, half) for child in children)
        return _make_leaf(domain, np.block([[nw, ne], [sw, se]]))
    return Split(children)


def _quarter(domain, node, order):
    if node is ZERO:
        return ZERO, ZERO, ZERO, ZERO
    if isinstance(node, Split):
        return node.children
    half = order // 2
    b = node.block
    return (
        _make_leaf(domain, b[:half, :half]),
        _make_leaf(domain, b[:half, half:]),
        _make_leaf(domain, b[half:, :half]),
        _make_leaf(domain, b[half:, half:]),
    )


def _dense(domain, node, order):
    if node is ZERO:
        return domain.zeros(order)
    if isinstance(node, Leaf):
        return node.block
    half = order // 2
    nw, ne, sw, se = (_dense(domain, child, half) for child in node.children)
    return np.block([[nw, ne], [sw, se]])


def _from_dense(domain, leaf_order, block, order):
    if order <= leaf_order:
        return _make_leaf(domain, np.array(block, dtype=domain.dtype))
    half = order // 2
    children = (
        _from_dense(domain, leaf_order, block[:half, :half], half),
        _from_dense(domain, leaf_order, block[:half, half:], half),
        _from_dense(domain, leaf_order, block[half:, :half], half),
        _from_dense(domain, leaf_order, block[half:, half:], half),
    )
    return _join(domain, leaf_order, order, children)


def _from_entries(domain, leaf_order, order, entries, row0, col0):
    if not entries:
        return ZERO
    if order <= leaf_order:
        block = domain.zeros(order)
        for i, j, value in entries:
            block[i - row0, j - col0] = value
        return _make_leaf(domain, block)
    half = order // 2
    buckets = ([], [], [], [])
    for entry in entries:
        i, j, _ = entry
        buckets[2 * (i >= row0 + half) + (j >= col0 + half)].append(entry)
    children = (
        _from_entries(domain, leaf_order, half, buckets[0], row0, col0),
        _from_entries(domain, leaf_order, half, buckets[1], row0, col0 + half),
        _from_entries(domain, leaf_order, half, buckets[2], row0 + half, col0),
        _from_entries(domain, leaf_order, half, buckets[3], row0 + half, col0 + half),
    )
    return _join(domain, leaf_order, order, children)


def _binary(domain, leaf_order, order, a, b, kernel, recurse):
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        return _make_leaf(domain, kernel(a.block, b.block))
    half = order // 2
    pairs = zip(_quarter(domain, a, order), _quarter(domain, b, order))
    return _join(domain, leaf_order, order, [recurse(domain, leaf_order, half, x, y) for x, y in pairs])


def _add(domain, leaf_order, order, a, b):
    if a is ZERO:
        return b
    if b is ZERO:
        return a
    return _binary(domain, leaf_order, order, a, b, domain.add, _add)


def _sub(domain, leaf_order, order, a, b):
    if b is ZERO:
        return a
    if a is ZERO:
        return _unary(domain, leaf_order, order, b, domain.neg)
    return _binary(domain, leaf_order, order, a, b, domain.sub, _sub)


def _unary(domain, leaf_order, order, node, kernel):
    if node is ZERO:
        return ZERO
    if isinstance(node, Leaf):
        return _make_leaf(domain, kernel(node.block))
    half = order // 2
    return _join(domain, leaf_order, order, [_unary(domain, leaf_order, half, c, kernel) for c in node.children])


def _transpose(node):
    if node is ZERO:
        return ZERO
    if isinstance(node, Leaf):
        return Leaf(node.block.T.copy(), node.nnz)
    nw, ne, sw, se = node.children
    return Split((_transpose(nw), _transpose(sw), _transpose(ne), _transpose(se)))


def _mask(domain, leaf_order, order, node, rows, cols):
    """Zero every entry whose row (or column) flag is False"""
    if node is ZERO:
        return ZERO
    if (rows is None or rows.all()) and (cols is None or cols.all()):
        return node
    if (rows is not None and not rows.any()) or (cols is not None and not cols.any()):
        return ZERO
    if isinstance(node, Leaf):
        keep = np.ones((order, order), dtype=bool)
        if rows is not None:
            keep &= rows[:, None]
        if cols is not None:
            keep &= cols[None, :]
        return _make_leaf(domain, np.where(keep, node.block, domain.zero).astype(domain.dtype))
    half = order // 2
    top, bottom = (None, None) if rows is None else (rows[:half], rows[half:])
    left, right = (None, None) if cols is None else (cols[:half], cols[half:])
    nw, ne, sw, se = node.children
    return _join(domain, leaf_order, order, (
        _mask(domain, leaf_order, half, nw, top, left),
        _mask(domain, leaf_order, half, ne, top, right),
        _mask(domain, leaf_order, half, sw, bottom, left),
        _mask(domain, leaf_order, half, se, bottom, right),
    ))


def _equal(domain, order, a, b):
    if a is b:
        return True
    if a is ZERO or b is ZERO or a.nnz != b.nnz:
        return False
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        return domain.blocks_equal(a.block, b.block)
    half = order // 2
    return all(_equal(domain, half, x, y) for x, y in zip(_quarter(domain, a, order), _quarter(domain, b, order)))


def _entries(node, order, row0, col0):
    if node is ZERO:
        return
    if isinstance(node, Leaf):
        for (i, j), value in np.ndenumerate(node.block):
            if value:
                yield row0 + i, col0 + j, value
        return
    half = order // 2
    offsets = ((0, 0), (0, half), (half, 0), (half, half))
    for child, (di, dj) in zip(node.children, offsets):
        yield from _entries(child, half, row0 + di, col0 + dj)


class QuadMatrix:
    """Immutable quadtree matrix over a domain.

    ``rows`` and ``cols`` give the logical shape; ``order`` is the padded
    order 2^k >= max(rows, cols). Everything outside the logical shape is
    zero.
    """

    __slots__ = ("domain", "rows", "cols", "order", "leaf_order", "node")

    def __init__(self, domain, rows, cols, node=ZERO, leaf_order=DEFAULT_LEAF_ORDER):
        if rows < 1 or cols < 1:
            raise InvalidSpecError(f"matrix shape must be positive, got {rows}x{cols}")
        if not is_power_of_two(leaf_order):
            raise InvalidSpecError(f"leaf order must be a power of two, got {leaf_order}")
        self.domain = domain
        self.rows = rows
        self.cols = cols
        self.order = next_power_of_two(max(rows, cols))
        self.leaf_order = leaf_order
        self.node = node

    # Construction

    @classmethod
    def zeros(cls, domain, rows, cols=None, leaf_order=DEFAULT_LEAF_ORDER):
        return cls(domain, rows, rows if cols is None else cols, ZERO, leaf_order)

    @classmethod
    def from_triplets(cls, domain, rows, cols, entries, leaf_order=DEFAULT_LEAF_ORDER):
        """Build a matrix from (i, j, value) triplets; zero values are dropped"""
        seen = set()
        kept = []
        for i, j, value in entries:
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexOutOfRangeError(f"entry ({i}, {j}) outside {rows}x{cols}")
            if (i, j) in seen:
                raise DuplicateEntryError(f"duplicate entry at ({i}, {j})")
            seen.add((i, j))
            value = domain.convert(value)
            if not domain.is_zero(value):
                kept.append((i, j, value))
        result = cls(domain, rows, cols, ZERO, leaf_order)
        result.node = _from_entries(domain, leaf_order, result.order, kept, 0, 0)
        return result

    @classmethod
    def from_dense(cls, domain, values, leaf_order=DEFAULT_LEAF_ORDER):
        block = domain.block(values)
        if block.ndim != 2:
            raise ShapeMismatchError(f"expected a 2-d array, got shape {block.shape}")
        rows, cols = block.shape
        result = cls(domain, rows, cols, ZERO, leaf_order)
        padded = domain.zeros(result.order)
        padded[:rows, :cols] = block
        result.node = _from_dense(domain, leaf_order, padded, result.order)
        return result

    @classmethod
    def from_block(cls, domain, block, leaf_order=DEFAULT_LEAF_ORDER):
        """Padded square from a dense block whose order is a power of two"""
        order = block.shape[0]
        if block.shape != (order, order) or not is_power_of_two(order):
            raise ShapeMismatchError(f"expected a square power-of-two block, got {block.shape}")
        result = cls(domain, order, order, ZERO, leaf_order)
        result.node = _from_dense(domain, leaf_order, block, order)
        return result

    @classmethod
    def scalar(cls, domain, n, value, leaf_order=DEFAULT_LEAF_ORDER):
        """value times the n x n identity"""
        return cls.from_triplets(domain, n, n, [(k, k, value) for k in range(n)], leaf_order)

    @classmethod
    def identity(cls, domain, n, leaf_order=DEFAULT_LEAF_ORDER):
        return cls.scalar(domain, n, domain.one, leaf_order)

    @classmethod
    def from_quadrants(cls, nw, ne, sw, se):
        """Assemble four padded squares of equal order into one of twice the order"""
        half = nw.order
        for q in (ne, sw, se):
            if q.order != half or q.domain != nw.domain:
                raise ShapeMismatchError("quadrants must share order and domain")
        node = _join(nw.domain, nw.leaf_order, 2 * half,
                     [nw._node_for(nw), nw._node_for(ne), nw._node_for(sw), nw._node_for(se)])
        return cls(nw.domain, 2 * half, 2 * half, node, nw.leaf_order)

    def _node_for(self, other):
        if other.leaf_order == self.leaf_order:
            return other.node
        return other.with_leaf_order(self.leaf_order).node

    def _derive(self, node, rows=None, cols=None):
        return QuadMatrix(self.domain, self.rows if rows is None else rows,
                          self.cols if cols is None else cols, node, self.leaf_order)

    # Inspection

    @property
    def shape(self):
        return self.rows, self.cols

    @property
    def is_zero(self):
        return self.node is ZERO

    @property
    def is_square(self):
        return self.rows == self.cols

    @property
    def nnz(self):
        return self.node.nnz

    def density(self):
        """Exact fraction of nonzero entries over the logical area"""
        return Fraction(self.node.nnz, self.rows * self.cols)

    def quadrants(self):
        """NW, NE, SW, SE of the padded square, each a padded square of half order"""
        if self.order < 2:
            raise ShapeMismatchError("an order-1 matrix has no quadrants")
        half = self.order // 2
        return tuple(QuadMatrix(self.domain, half, half, child, self.leaf_order)
                     for child in _quarter(self.domain, self.node, self.order))

    def scalar_value(self):
        """The single entry of an order-1 matrix"""
        if self.order != 1:
            raise ShapeMismatchError(f"expected order 1, got {self.order}")
        return self.domain.zero if self.node is ZERO else self.node.block[0, 0]

    def __getitem__(self, index):
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexOutOfRangeError(f"entry ({i}, {j}) outside {self.rows}x{self.cols}")
        node, order = self.node, self.order
        while not isinstance(node, Leaf):
            if node is ZERO:
                return self.domain.zero
            half = order // 2
            node = node.children[2 * (i >= half) + (j >= half)]
            i, j, order = i % half, j % half, half
        return node.block[i, j]

    def dense_block(self):
        """Padded order x order array; read-only when it is a leaf's own block"""
        return _dense(self.domain, self.node, self.order)

    def to_dense(self):
        """Writable dense copy of the logical shape"""
        return np.array(_dense(self.domain, self.node, self.order)[:self.rows, :self.cols])

    def to_lists(self):
        return self.to_dense().tolist()

    def entries(self):
        """Nonzero (i, j, value) triplets"""
        return list(_entries(self.node, self.order, 0, 0))

    # Elementwise

    def _check_same_shape(self, other, what):
        if self.shape != other.shape:
            raise ShapeMismatchError(f"{what}: {self.rows}x{self.cols} vs {other.rows}x{other.cols}")
        if self.domain != other.domain:
            raise ShapeMismatchError(f"{what}: domains {self.domain.name} and {other.domain.name} differ")

    def add(self, other):
        self._check_same_shape(other, "add")
        if self.node is ZERO:
            return other
        return self._derive(_add(self.domain, self.leaf_order, self.order, self.node, self._node_for(other)))

    def sub(self, other):
        self._check_same_shape(other, "sub")
        return self._derive(_sub(self.domain, self.leaf_order, self.order, self.node, self._node_for(other)))

    def negate(self):
        return self._derive(_unary(self.domain, self.leaf_order, self.order, self.node, self.domain.neg))

    def transpose(self):
        return self._derive(_transpose(self.node), self.cols, self.rows)

    def scale(self, s):
        s = self.domain.convert(s)
        if self.domain.is_zero(s):
            return self._derive(ZERO)
        kernel = lambda block: self.domain.scale(block, s)
        return self._derive(_unary(self.domain, self.leaf_order, self.order, self.node, kernel))

    def div_exact(self, d):
        """Divide every entry exactly by d"""
        if d == 1:
            return self
        kernel = lambda block: self.domain.div_exact_block(block, d)
        return self._derive(_unary(self.domain, self.leaf_order, self.order, self.node, kernel))

    __add__ = add
    __sub__ = sub
    __neg__ = negate

    def mask_rows(self, selector):
        """Product diag(selector) * self"""
        rows = self._selector_mask(selector)
        return self._derive(_mask(self.domain, self.leaf_order, self.order, self.node, rows, None))

    def mask_cols(self, selector):
        """Product self * diag(selector)"""
        cols = self._selector_mask(selector)
        return self._derive(_mask(self.domain, self.leaf_order, self.order, self.node, None, cols))

    def _selector_mask(self, selector):
        mask = np.asarray(getattr(selector, "mask", selector), dtype=bool)
        if mask.shape != (self.order,):
            raise ShapeMismatchError(f"selector of length {mask.shape[0]} for order {self.order}")
        return mask

    # Shape changes

    def embed_padded(self, mode=ZERO_PAD):
        """Square matrix of the padded order; identity mode puts ones on the padding diagonal"""
        if mode not in (ZERO_PAD, IDENTITY_PAD):
            raise InvalidSpecError(f"unknown padding mode {mode!r}")
        padded = self._derive(self.node, self.order, self.order)
        start = max(self.rows, self.cols)
        if mode == ZERO_PAD or start == self.order:
            return padded
        pad = QuadMatrix.from_triplets(self.domain, self.order, self.order,
                                       [(k, k, self.domain.one) for k in range(start, self.order)],
                                       self.leaf_order)
        return padded.add(pad)

    def padded_to(self, order):
        """Zero-padded square of a larger power-of-two order"""
        if not is_power_of_two(order) or order < self.order:
            raise ShapeMismatchError(f"cannot pad order {self.order} to {order}")
        node, current = self.node, self.order
        while current < order:
            current *= 2
            node = _join(self.domain, self.leaf_order, current, (node, ZERO, ZERO, ZERO))
        return QuadMatrix(self.domain, order, order, node, self.leaf_order)

    def crop(self, rows, cols):
        """Leading rows x cols submatrix"""
        if rows > self.order or cols > self.order:
            raise ShapeMismatchError(f"cannot crop {self.order}x{self.order} to {rows}x{cols}")
        node, order = self.node, self.order
        target = next_power_of_two(max(rows, cols))
        while order > target:
            node = _quarter(self.domain, node, order)[0]
            order //= 2
        cropped = QuadMatrix(self.domain, rows, cols, node, self.leaf_order)
        keep_rows = np.arange(order) < rows
        keep_cols = np.arange(order) < cols
        cropped.node = _mask(self.domain, self.leaf_order, order, node, keep_rows, keep_cols)
        return cropped

    def convert(self, domain):
        """Same matrix with entries converted into another domain"""
        if domain == self.domain:
            return self
        return QuadMatrix.from_triplets(domain, self.rows, self.cols, self.entries(), self.leaf_order)

    def with_leaf_order(self, leaf_order):
        if leaf_order == self.leaf_order:
            return self
        return QuadMatrix.from_triplets(self.domain, self.rows, self.cols, self.entries(), leaf_order)

    # Comparison

    def __eq__(self, other):
        if not isinstance(other, QuadMatrix):
            return NotImplemented
        if self.shape != other.shape or self.domain != other.domain:
            return False
        return _equal(self.domain, self.order, self.node, self._node_for(other))

    __hash__ = None

    def __repr__(self):
        return f"QuadMatrix({self.rows}x{self.cols}, {self.domain.name}, nnz={self.nnz}, node={self.node!r})"


def from_triplets(rows, cols, entries, domain=INTEGERS, leaf_order=DEFAULT_LEAF_ORDER):
    return QuadMatrix.from_triplets(domain, rows, cols, entries, leaf_order)


def embed_padded(m, mode=ZERO_PAD):
    return m.embed_padded(mode)


def density(m):
    return m.density()
