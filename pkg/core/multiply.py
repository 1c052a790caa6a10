"""
Matrix multiplication for PyQuadMat
Recursive standard (eight products, fused accumulation) and Strassen
(seven products) multiplication with a density-driven switch
"""

import logging
from dataclasses import dataclass, replace
from functools import partial

from core.errors import InvalidSpecError, ShapeMismatchError
from core.quadmatrix import QuadMatrix, is_power_of_two
from engine.graph import TaskGraph

logger = logging.getLogger(__name__)

STANDARD = "standard"
STRASSEN = "strassen"
AUTO = "auto"
ALGORITHMS = (STANDARD, STRASSEN, AUTO)


@dataclass(frozen=True)
class MultiplyConfig:
    strassen_min_order: int = 128
    density_boundary: float = 0.3
    algorithm: str = AUTO

    def __post_init__(self):
        if not is_power_of_two(self.strassen_min_order):
            raise InvalidSpecError(f"strassen_min_order must be a power of two, got {self.strassen_min_order}")
        if not 0 < self.density_boundary <= 1:
            raise InvalidSpecError(f"density_boundary must lie in (0, 1], got {self.density_boundary}")
        if self.algorithm not in ALGORITHMS:
            raise InvalidSpecError(f"unknown algorithm {self.algorithm!r}")

    def check_leaf_order(self, leaf_order):
        if self.algorithm != STANDARD and self.strassen_min_order < 2 * leaf_order:
            raise InvalidSpecError(
                f"strassen_min_order {self.strassen_min_order} is below twice the leaf order {leaf_order}")


DEFAULT_CONFIG = MultiplyConfig()


def choose_algorithm(a, b, cfg=DEFAULT_CONFIG):
    """Strassen only for large operands that are both at least as dense as the boundary"""
    order = max(a.order, b.order)
    if order < cfg.strassen_min_order:
        return STANDARD
    if min(a.density(), b.density()) >= cfg.density_boundary:
        return STRASSEN
    return STANDARD


class Multiplier:
    """Multiplies padded square matrices of equal order.

    With an engine, levels of order >= the engine granularity are emitted
    as task graphs; otherwise the recursion runs on the calling worker.
    """

    def __init__(self, cfg=None, engine=None):
        self.cfg = cfg or DEFAULT_CONFIG
        self.engine = engine

    def multiply(self, a, b, c=None):
        """a x b + c"""
        if a.order != b.order or a.rows != a.order or b.rows != b.order:
            raise ShapeMismatchError(f"expected padded squares of equal order, got {a.shape} and {b.shape}")
        self.cfg.check_leaf_order(a.leaf_order)
        if c is None:
            c = QuadMatrix.zeros(a.domain, a.order, a.order, a.leaf_order)
        return self._product(a, b, c)

    def _parallel(self, m):
        return self.engine is not None and m.order >= self.engine.granularity and m.order > m.leaf_order

    def _product(self, a, b, c):
        algorithm = self.cfg.algorithm
        if algorithm == AUTO:
            algorithm = choose_algorithm(a, b, self.cfg)
        if algorithm == STRASSEN and a.order >= self.cfg.strassen_min_order and a.order > a.leaf_order:
            product = self._strassen(a, b)
            return product if c.is_zero else c.add(product)
        return self._standard(a, b, c)

    def _standard(self, a, b, c):
        if a.is_zero or b.is_zero:
            return c
        domain = a.domain
        if a.order <= a.leaf_order:
            block = domain.matmul(a.dense_block(), b.dense_block())
            if not c.is_zero:
                block = domain.add(block, c.dense_block())
            return QuadMatrix.from_block(domain, block, a.leaf_order)
        a0, a1, a2, a3 = a.quadrants()
        b0, b1, b2, b3 = b.quadrants()
        c0, c1, c2, c3 = c.quadrants()
        if self._parallel(a):
            pairs = ((a0, b0), (a1, b2), (a0, b1), (a1, b3), (a2, b0), (a3, b2), (a2, b1), (a3, b3))
            zero = QuadMatrix.zeros(domain, a.order // 2, a.order // 2, a.leaf_order)
            graph = TaskGraph(f"multiply:{a.order}")
            products = [graph.add("product", partial(self._product, x, y, zero)) for x, y in pairs]
            sums = [
                graph.add("sum", partial(_accumulate, acc), products[2 * k], products[2 * k + 1])
                for k, acc in enumerate((c0, c1, c2, c3))
            ]
            outputs = self.engine.run(graph)
            d0, d1, d2, d3 = (outputs[node_id] for node_id in sums)
        else:
            d0 = self._product(a0, b0, self._product(a1, b2, c0))
            d1 = self._product(a0, b1, self._product(a1, b3, c1))
            d2 = self._product(a2, b0, self._product(a3, b2, c2))
            d3 = self._product(a2, b1, self._product(a3, b3, c3))
        return QuadMatrix.from_quadrants(d0, d1, d2, d3)

    def _strassen(self, a, b):
        domain = a.domain
        half = a.order // 2
        zero = QuadMatrix.zeros(domain, half, half, a.leaf_order)
        if a.is_zero or b.is_zero:
            return QuadMatrix.zeros(domain, a.order, a.order, a.leaf_order)
        a11, a12, a21, a22 = a.quadrants()
        b11, b12, b21, b22 = b.quadrants()
        operands = (
            (a11.add(a22), b11.add(b22)),
            (a21.add(a22), b11),
            (a11, b12.sub(b22)),
            (a22, b21.sub(b11)),
            (a11.add(a12), b22),
            (a21.sub(a11), b11.add(b12)),
            (a12.sub(a22), b21.add(b22)),
        )
        if self._parallel(a):
            graph = TaskGraph(f"strassen:{a.order}")
            m = [graph.add("product", partial(self._product, x, y, zero)) for x, y in operands]
            quads = (
                graph.add("assemble", lambda m1, m4, m5, m7: m1.add(m4).sub(m5).add(m7), m[0], m[3], m[4], m[6]),
                graph.add("assemble", lambda m3, m5: m3.add(m5), m[2], m[4]),
                graph.add("assemble", lambda m2, m4: m2.add(m4), m[1], m[3]),
                graph.add("assemble", lambda m1, m2, m3, m6: m1.sub(m2).add(m3).add(m6), m[0], m[1], m[2], m[5]),
            )
            outputs = self.engine.run(graph)
            return QuadMatrix.from_quadrants(*(outputs[node_id] for node_id in quads))
        m1, m2, m3, m4, m5, m6, m7 = (self._product(x, y, zero) for x, y in operands)
        return QuadMatrix.from_quadrants(
            m1.add(m4).sub(m5).add(m7),
            m3.add(m5),
            m2.add(m4),
            m1.sub(m2).add(m3).add(m6),
        )


def _accumulate(c, p, q):
    return c.add(p).add(q)


def _padded_operands(a, b, c):
    if a.cols != b.rows:
        raise ShapeMismatchError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    if a.domain != b.domain:
        raise ShapeMismatchError(f"domains {a.domain.name} and {b.domain.name} differ")
    if c is not None and (c.shape != (a.rows, b.cols) or c.domain != a.domain):
        raise ShapeMismatchError(f"accumulator {c.rows}x{c.cols} does not match {a.rows}x{b.cols}")
    order = max(a.order, b.order, c.order if c is not None else 1)
    b = b.with_leaf_order(a.leaf_order)
    if c is None:
        c = QuadMatrix.zeros(a.domain, order, order, a.leaf_order)
    return a.padded_to(order), b.padded_to(order), c.with_leaf_order(a.leaf_order).padded_to(order)


def multiply_accumulate(a, b, c=None, cfg=None, engine=None):
    """A x B + C by the eight-product recursion; rectangular shapes are zero-padded"""
    cfg = cfg or DEFAULT_CONFIG
    if cfg.algorithm == STRASSEN:
        cfg = replace(cfg, algorithm=STANDARD)
    rows, cols = a.rows, b.cols
    pa, pb, pc = _padded_operands(a, b, c)
    multiplier = Multiplier(cfg, engine)
    cfg.check_leaf_order(pa.leaf_order)
    return multiplier._standard(pa, pb, pc).crop(rows, cols)


def multiply_strassen(a, b, cfg=None, engine=None):
    """A x B by Strassen's seven products down to strassen_min_order"""
    cfg = replace(cfg or DEFAULT_CONFIG, algorithm=STRASSEN)
    rows, cols = a.rows, b.cols
    pa, pb, pc = _padded_operands(a, b, None)
    return Multiplier(cfg, engine).multiply(pa, pb, pc).crop(rows, cols)


def multiply(a, b, c=None, cfg=None, engine=None):
    """A x B (+ C) with the algorithm named by cfg"""
    cfg = cfg or DEFAULT_CONFIG
    rows, cols = a.rows, b.cols
    pa, pb, pc = _padded_operands(a, b, c)
    return Multiplier(cfg, engine).multiply(pa, pb, pc).crop(rows, cols)
