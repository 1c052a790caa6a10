"""
Multi-modular adjoint for PyQuadMat
Runs the extended adjoint over Z/p for several word-sized primes and
reconstructs the integer result with the Chinese remainder theorem
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import partial

import numpy as np
from sympy import prevprime
from sympy.ntheory.modular import crt, crt1

from core.adjoint import AdjointResult, ExtendedAdjoint
from core.domain import INTEGERS, ResidueField
from core.errors import (
    DivisionByZeroError,
    InconsistentResiduesError,
    InexactDivisionError,
    InvalidSpecError,
    ShapeMismatchError,
    UnluckyPrimeExhaustionError,
)
from core.quadmatrix import IDENTITY_PAD, QuadMatrix
from engine.graph import TaskGraph

logger = logging.getLogger(__name__)

DEFAULT_PRIME_BITS = 31
MIN_PRIME_BITS = 16
MAX_PRIME_BITS = 62
EXHAUSTION_FACTOR = 3


@dataclass(frozen=True)
class PrimeBasis:
    primes: tuple
    product: int

    def __post_init__(self):
        if len(set(self.primes)) != len(self.primes):
            raise InvalidSpecError(f"primes must be distinct: {self.primes}")


def adjoint_entry_bound(m):
    """ceil(sqrt(n^n * B^(2n))), B the largest absolute entry (at least 1)"""
    n = m.rows
    largest = max((abs(int(v)) for _, _, v in m.entries()), default=0)
    b = max(1, largest)
    square = n ** n * b ** (2 * n)
    root = math.isqrt(square)
    return root if root * root == square else root + 1


def _check_bits(prime_bits):
    if not MIN_PRIME_BITS <= prime_bits <= MAX_PRIME_BITS:
        raise InvalidSpecError(f"prime_bits must lie in [{MIN_PRIME_BITS}, {MAX_PRIME_BITS}], got {prime_bits}")


def _descending_primes(prime_bits, skip=()):
    skip = set(skip)
    p = 2 ** prime_bits
    while True:
        p = prevprime(p)
        if p == 2:
            return
        if p not in skip:
            yield p


def choose_primes(bound, prime_bits=DEFAULT_PRIME_BITS, seed_primes=()):
    """Fewest primes below 2^prime_bits (after any seeds) whose product exceeds 2*bound + 1"""
    _check_bits(prime_bits)
    threshold = 2 * bound + 1
    primes = list(seed_primes)
    product = math.prod(primes)
    candidates = _descending_primes(prime_bits, primes)
    while product <= threshold:
        p = next(candidates)
        primes.append(p)
        product *= p
    return PrimeBasis(tuple(primes), product)


def crt_reconstruct(residues):
    """The x in (-P/2, P/2] with x = value_i mod prime_i"""
    values = [int(v) for v, _ in residues]
    moduli = [int(p) for _, p in residues]
    solution = crt(moduli, values, symmetric=True)
    if solution is None:
        raise InconsistentResiduesError(f"no common solution for {residues}")
    return int(solution[0])


def _reconstruct_blocks(blocks, primes):
    """Entrywise symmetric reconstruction of dense residue blocks with precomputed idempotents"""
    product, cofactors, inverses = crt1(list(primes))
    product = int(product)
    total = None
    for block, cofactor, inverse in zip(blocks, cofactors, inverses):
        term = block * (int(cofactor) * int(inverse))
        total = term if total is None else total + term
    total = total % product
    return np.where(total > product // 2, total - product, total)


class ModularAdjoint:
    """Extended adjoint of an integer matrix through residue runs"""

    def __init__(self, prime_bits=DEFAULT_PRIME_BITS, cfg=None, engine=None, seed_primes=()):
        _check_bits(prime_bits)
        self.prime_bits = prime_bits
        self.cfg = cfg
        self.engine = engine
        self.seed_primes = tuple(seed_primes)

    def _run_prime(self, matrix, p):
        field = ResidueField(p)
        try:
            return ExtendedAdjoint(self.cfg, self.engine).compute(matrix.convert(field), field.one)
        except (DivisionByZeroError, InexactDivisionError):
            logger.info("prime %d is unlucky: a division failed", p)
            return None

    def _run_batch(self, matrix, primes):
        if self.engine is None:
            return [self._run_prime(matrix, p) for p in primes]
        graph = TaskGraph(f"crt:{matrix.order}")
        ids = [graph.add("residue-adjoint", partial(self._run_prime, matrix, p)) for p in primes]
        outputs = self.engine.run(graph)
        return [outputs[node_id] for node_id in ids]

    def compute(self, matrix):
        if matrix.domain != INTEGERS:
            raise InvalidSpecError(f"the CRT path needs an integer matrix, got {matrix.domain.name}")
        bound = adjoint_entry_bound(matrix)
        threshold = 2 * bound + 1
        basis = choose_primes(bound, self.prime_bits, self.seed_primes)
        planned = len(basis.primes) + 1
        budget = EXHAUSTION_FACTOR * planned
        logger.info("CRT basis of %d primes (%d bits) plus one verification prime for bound %d bits",
                    len(basis.primes), self.prime_bits, bound.bit_length())
        candidates = self._candidates()
        good = []
        consumed = 0
        wanted = planned
        while True:
            if consumed + wanted > budget:
                raise UnluckyPrimeExhaustionError(
                    f"consumed {consumed} primes for a planned basis of {planned}")
            batch = [next(candidates) for _ in range(wanted)]
            consumed += len(batch)
            for p, result in zip(batch, self._run_batch(matrix, batch)):
                if result is not None:
                    good.append((p, result))
            good, decided = self._discard_unlucky(good)
            primes = [p for p, _ in good]
            if decided and len(good) >= 2 and math.prod(primes[:-1]) > threshold:
                break
            wanted = max(1, planned - len(good))
        return self._reconstruct(matrix, good)

    def _candidates(self):
        yield from self.seed_primes
        yield from _descending_primes(self.prime_bits, self.seed_primes)

    def _discard_unlucky(self, runs):
        """Drop runs below the best rank or off the majority pivot structure"""
        if not runs:
            return runs, False
        best = max(result.rank for _, result in runs)
        at_best = [(p, r) for p, r in runs if r.rank == best]
        votes = Counter(r.E.pivots for _, r in at_best)
        structure, count = votes.most_common(1)[0]
        decided = 2 * count > len(at_best)
        if not decided:
            return runs, False
        kept = [(p, r) for p, r in at_best if r.E.pivots == structure]
        for p, r in runs:
            if r.rank != best or r.E.pivots != structure:
                logger.info("prime %d is unlucky (rank %d, best %d); replacing it", p, r.rank, best)
        return kept, True

    def _reconstruct(self, matrix, good):
        basis, (check_prime, check) = good[:-1], good[-1]
        primes = [p for p, _ in basis]
        leaf_order = matrix.leaf_order
        a = _reconstruct_blocks([r.A.to_dense() for _, r in basis], primes)
        s = _reconstruct_blocks([r.S.to_dense() for _, r in basis], primes)
        d = crt_reconstruct([(r.d, p) for p, r in basis])
        if (d - check.d) % check_prime or np.any((a - check.A.to_dense()) % check_prime) \
                or np.any((s - check.S.to_dense()) % check_prime):
            raise InconsistentResiduesError(f"verification prime {check_prime} disagrees with the reconstruction")
        return AdjointResult(
            QuadMatrix.from_dense(INTEGERS, a, leaf_order),
            QuadMatrix.from_dense(INTEGERS, s, leaf_order),
            check.E,
            d,
            1,
        )


def adjoint_via_crt(m, prime_bits=DEFAULT_PRIME_BITS, cfg=None, engine=None, seed_primes=()):
    """Same result as the direct integer extended adjoint, computed modulo primes"""
    if not m.is_square:
        raise ShapeMismatchError(f"extended adjoint needs a square matrix, got {m.rows}x{m.cols}")
    padded = m.embed_padded(IDENTITY_PAD)
    return ModularAdjoint(prime_bits, cfg, engine, seed_primes).compute(padded)
