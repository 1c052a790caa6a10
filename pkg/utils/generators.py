"""
Random matrices for PyQuadMat
Seeded generation of dense, sparse, symmetric and positive definite test
matrices
"""

import logging

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from core.domain import INTEGERS, POLYNOMIALS
from core.errors import InvalidSpecError
from core.multiply import multiply_accumulate
from core.quadmatrix import DEFAULT_LEAF_ORDER, QuadMatrix

logger = logging.getLogger(__name__)

DEFAULT_BIT_WIDTH = 15


class RandomSpec(BaseModel):
    order: int = Field(ge=1)
    density: float = Field(1.0, gt=0, le=1)
    bit_width: int = Field(DEFAULT_BIT_WIDTH, ge=1, le=62)
    symmetric: bool = False
    spd: bool = False

    @classmethod
    def checked(cls, **fields):
        """Build a spec, reporting invalid fields as InvalidSpecError"""
        try:
            return cls(**fields)
        except ValidationError as exc:
            first = exc.errors()[0]
            raise InvalidSpecError(f"{'.'.join(map(str, first['loc']))}: {first['msg']}") from None


def _values(rng, count, bit_width, domain):
    if domain == POLYNOMIALS:
        return [domain.random_element(rng, bit_width) for _ in range(count)]
    magnitudes = rng.integers(1, 2 ** bit_width, size=count)
    signs = rng.choice((-1, 1), size=count)
    return [domain.convert(int(m) * int(s)) for m, s in zip(magnitudes, signs)]


def _positions(rng, candidates, density):
    count = min(len(candidates), int(round(density * len(candidates))))
    if not count:
        return []
    chosen = rng.choice(len(candidates), size=count, replace=False)
    return [candidates[k] for k in np.sort(chosen)]


def generate_matrix(spec, seed, domain=INTEGERS, leaf_order=DEFAULT_LEAF_ORDER):
    """Deterministic random matrix for (spec, seed).

    General matrices get exactly round(density * order^2) nonzeros at
    distinct positions with magnitudes in [1, 2^bit_width). Symmetric ones
    draw the upper triangle and mirror it. SPD matrices are G * G^T + order * I
    for a random lower triangular G.
    """
    rng = np.random.default_rng(seed)
    n = spec.order
    if spec.spd:
        lower = [(i, j) for i in range(n) for j in range(i + 1)]
        positions = _positions(rng, lower, spec.density)
        g = QuadMatrix.from_triplets(domain, n, n, [(i, j, v) for (i, j), v in
                                                   zip(positions, _values(rng, len(positions), spec.bit_width, domain))],
                                     leaf_order)
        shift = QuadMatrix.scalar(domain, n, n, leaf_order)
        return multiply_accumulate(g, g.transpose(), shift)
    if spec.symmetric:
        upper = [(i, j) for i in range(n) for j in range(i, n)]
        positions = _positions(rng, upper, spec.density)
        values = _values(rng, len(positions), spec.bit_width, domain)
        triplets = []
        for (i, j), v in zip(positions, values):
            triplets.append((i, j, v))
            if i != j:
                triplets.append((j, i, v))
        return QuadMatrix.from_triplets(domain, n, n, triplets, leaf_order)
    cells = n * n
    count = int(round(spec.density * cells))
    flat = np.sort(rng.choice(cells, size=count, replace=False)) if count else []
    values = _values(rng, count, spec.bit_width, domain)
    triplets = [(int(k) // n, int(k) % n, v) for k, v in zip(flat, values)]
    logger.debug("generated order %d with %d nonzeros (seed %s)", n, count, seed)
    return QuadMatrix.from_triplets(domain, n, n, triplets, leaf_order)


def low_rank_matrix(order, rank, seed, bit_width=4, domain=INTEGERS, leaf_order=DEFAULT_LEAF_ORDER):
    """order x order product of random order x rank and rank x order factors"""
    left = generate_matrix(RandomSpec(order=order, bit_width=bit_width), seed, domain, leaf_order)
    right = generate_matrix(RandomSpec(order=order, bit_width=bit_width), seed + 1, domain, leaf_order)
    return multiply_accumulate(left.crop(order, rank), right.crop(rank, order))
