"""
Domains for PyQuadMat
Element contracts for the commutative domains and fields the matrix
algorithms are generic over, plus the dense block kernels used by leaves
"""

import logging
import math
from fractions import Fraction

import numpy as np
from sympy import isprime
from sympy.polys.densearith import dup_add, dup_exquo, dup_mul, dup_neg, dup_sub
from sympy.polys.densebasic import dup_strip
from sympy.polys.domains import ZZ
from sympy.polys.polyerrors import ExactQuotientFailed

from core.errors import (
    DivisionByZeroError,
    InexactDivisionError,
    InvalidSpecError,
    NonSquarePivotError,
    ParseError,
)

logger = logging.getLogger(__name__)


class IntPoly:
    """Dense univariate polynomial with arbitrary precision integer coefficients.

    Coefficients are given low-to-high; the canonical form has no trailing
    zero coefficients, so the zero polynomial has no coefficients at all.
    Arithmetic is delegated to sympy's dense univariate routines.
    """

    __slots__ = ("_rep",)

    def __init__(self, coefficients=()):
        rep = [int(c) for c in reversed(list(coefficients))]
        self._rep = tuple(dup_strip(rep))

    @classmethod
    def _from_dup(cls, rep):
        poly = cls.__new__(cls)
        poly._rep = tuple(int(c) for c in dup_strip(list(rep)))
        return poly

    @staticmethod
    def _coerce(value):
        if isinstance(value, IntPoly):
            return value._rep
        if isinstance(value, (int, np.integer)):
            return (int(value),) if value else ()
        return None

    @property
    def coefficients(self):
        """Coefficients low-to-high"""
        return tuple(reversed(self._rep))

    @property
    def degree(self):
        """Degree, -1 for the zero polynomial"""
        return len(self._rep) - 1

    def __add__(self, other):
        rep = self._coerce(other)
        if rep is None:
            return NotImplemented
        return IntPoly._from_dup(dup_add(list(self._rep), list(rep), ZZ))

    __radd__ = __add__

    def __sub__(self, other):
        rep = self._coerce(other)
        if rep is None:
            return NotImplemented
        return IntPoly._from_dup(dup_sub(list(self._rep), list(rep), ZZ))

    def __rsub__(self, other):
        rep = self._coerce(other)
        if rep is None:
            return NotImplemented
        return IntPoly._from_dup(dup_sub(list(rep), list(self._rep), ZZ))

    def __mul__(self, other):
        rep = self._coerce(other)
        if rep is None:
            return NotImplemented
        return IntPoly._from_dup(dup_mul(list(self._rep), list(rep), ZZ))

    __rmul__ = __mul__

    def __neg__(self):
        return IntPoly._from_dup(dup_neg(list(self._rep), ZZ))

    def exquo(self, other):
        """Exact quotient; raises when other does not divide self"""
        rep = self._coerce(other)
        if rep is None:
            raise TypeError(f"cannot divide IntPoly by {type(other).__name__}")
        if not rep:
            raise DivisionByZeroError("polynomial division by zero")
        try:
            return IntPoly._from_dup(dup_exquo(list(self._rep), list(rep), ZZ))
        except ExactQuotientFailed:
            raise InexactDivisionError(self, IntPoly._from_dup(rep)) from None

    def __eq__(self, other):
        rep = self._coerce(other)
        if rep is None:
            return NotImplemented
        return self._rep == tuple(rep)

    def __hash__(self):
        return hash(self._rep)

    def __bool__(self):
        return bool(self._rep)

    def __repr__(self):
        return f"IntPoly({list(self.coefficients)})"

    def __str__(self):
        if not self._rep:
            return "0"
        terms = []
        for power, coeff in reversed(list(enumerate(self.coefficients))):
            if not coeff:
                continue
            magnitude = abs(coeff)
            if power == 0:
                body = str(magnitude)
            else:
                head = "" if magnitude == 1 else str(magnitude)
                body = head + ("x" if power == 1 else f"x^{power}")
            sign = "-" if coeff < 0 else "+"
            terms.append((sign, body))
        first_sign, first_body = terms[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return text


class Domain:
    """Base class for coefficient domains.

    Subclasses define the element contract; the block kernels below work on
    square numpy arrays holding domain elements.
    """

    name = "abstract"
    is_field = False
    dtype = object
    zero = 0
    one = 1

    def convert(self, value):
        raise NotImplementedError

    def is_zero(self, a):
        return not a

    def div_exact(self, a, b):
        raise NotImplementedError

    def inverse(self, a):
        raise TypeError(f"{self.name} is not a field")

    def sqrt(self, a):
        raise TypeError(f"square roots are not available in {self.name}")

    def random_element(self, rng, bits):
        """Random nonzero element with magnitude below 2**bits"""
        magnitude = int(rng.integers(1, 2 ** bits))
        if rng.integers(0, 2):
            magnitude = -magnitude
        return self.convert(magnitude)

    def parse(self, token):
        try:
            value = Fraction(token)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"not a number: {token!r}") from None
        if value.denominator != 1:
            raise ParseError(f"{token!r} is not an integer")
        return self.convert(value.numerator)

    def format(self, a):
        return str(a)

    # Dense block kernels

    def zeros(self, order):
        return np.full((order, order), self.zero, dtype=self.dtype)

    def block(self, values):
        """Convert a nested sequence into a block of domain elements"""
        source = np.asarray(values, dtype=object)
        out = np.empty(source.shape, dtype=self.dtype)
        for index, value in np.ndenumerate(source):
            out[index] = self.convert(value)
        return out

    def normalize(self, block):
        return block

    def add(self, a, b):
        return self.normalize(a + b)

    def sub(self, a, b):
        return self.normalize(a - b)

    def neg(self, a):
        return self.normalize(-a)

    def matmul(self, a, b):
        return self.normalize(a @ b)

    def scale(self, a, s):
        return self.normalize(a * s)

    def div_exact_block(self, a, d):
        divide = np.frompyfunc(lambda x: self.div_exact(x, d), 1, 1)
        return divide(a)

    def is_zero_block(self, a):
        return not any(a.flat)

    def count_nonzero(self, a):
        return sum(1 for x in a.flat if x)

    def blocks_equal(self, a, b):
        return a.shape == b.shape and bool(np.all(a == b))

    def __eq__(self, other):
        return isinstance(other, Domain) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class IntegerRing(Domain):
    """Arbitrary precision integers (the reference domain)"""

    name = "int"

    def convert(self, value):
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise InexactDivisionError(value.numerator, value.denominator)
            return value.numerator
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"{value} is not an integer")
        return int(value)

    def div_exact(self, a, b):
        if not b:
            raise DivisionByZeroError(f"{a} / 0")
        q, r = divmod(a, b)
        if r:
            raise InexactDivisionError(a, b)
        return q

    def div_exact_block(self, a, d):
        if not d:
            raise DivisionByZeroError("block division by zero")
        if d == 1:
            return a
        if d == -1:
            return -a
        q = a // d
        if __debug__ and not np.array_equal(q * d, a):
            bad = next(x for x in a.flat if x % d)
            raise InexactDivisionError(bad, d)
        return q


class PolynomialRing(Domain):
    """Univariate polynomials with integer coefficients"""

    name = "poly"
    zero = IntPoly()
    one = IntPoly((1,))

    def convert(self, value):
        if isinstance(value, IntPoly):
            return value
        if isinstance(value, (list, tuple)):
            return IntPoly(value)
        return IntPoly((IntegerRing.convert(self, value),))

    def div_exact(self, a, b):
        return self.convert(a).exquo(b)

    def random_element(self, rng, bits):
        degree = int(rng.integers(0, 3))
        coefficients = [int(rng.integers(-(2 ** bits) + 1, 2 ** bits)) for _ in range(degree + 1)]
        if not any(coefficients):
            coefficients[0] = 1
        return IntPoly(coefficients)

    def parse(self, token):
        try:
            return IntPoly(int(part) for part in token.split())
        except ValueError:
            raise ParseError(f"bad polynomial coefficients: {token!r}") from None

    def format(self, a):
        return " ".join(str(c) for c in a.coefficients) or "0"


class ResidueField(Domain):
    """Integers modulo an odd prime p; elements are ints in [0, p)"""

    is_field = True

    def __init__(self, p):
        p = int(p)
        if p < 3 or p % 2 == 0 or p >= 2 ** 62 or not isprime(p):
            raise InvalidSpecError(f"modulus must be an odd prime below 2^62, got {p}")
        self.p = p
        self.name = f"mod{p}"

    def convert(self, value):
        if isinstance(value, Fraction):
            return value.numerator * pow(value.denominator, -1, self.p) % self.p
        return int(value) % self.p

    def normalize(self, block):
        return block % self.p

    def div_exact(self, a, b):
        return a * self.inverse(b) % self.p

    def inverse(self, a):
        if not a % self.p:
            raise DivisionByZeroError(f"0 has no inverse modulo {self.p}")
        return pow(a, -1, self.p)

    def div_exact_block(self, a, d):
        return self.normalize(a * self.inverse(d))

    def random_element(self, rng, bits):
        return int(rng.integers(1, min(self.p, 2 ** 62)))


class RationalField(Domain):
    """Exact rationals in lowest terms"""

    name = "rational"
    is_field = True
    zero = Fraction(0)
    one = Fraction(1)

    def convert(self, value):
        return Fraction(value)

    def div_exact(self, a, b):
        if not b:
            raise DivisionByZeroError(f"{a} / 0")
        return Fraction(a) / b

    def inverse(self, a):
        if not a:
            raise DivisionByZeroError("0 has no inverse")
        return 1 / Fraction(a)

    def sqrt(self, a):
        a = Fraction(a)
        num, den = math.isqrt(a.numerator), math.isqrt(a.denominator)
        if num * num != a.numerator or den * den != a.denominator:
            raise NonSquarePivotError(f"{a} is not the square of a rational; use the float64 domain")
        return Fraction(num, den)

    def parse(self, token):
        try:
            return Fraction(token)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"not a number: {token!r}") from None

    def div_exact_block(self, a, d):
        if not d:
            raise DivisionByZeroError("block division by zero")
        return a / Fraction(d)


class RealField(Domain):
    """Machine doubles"""

    name = "float64"
    is_field = True
    dtype = np.float64
    zero = 0.0
    one = 1.0

    def convert(self, value):
        return float(value)

    def div_exact(self, a, b):
        if not b:
            raise DivisionByZeroError(f"{a} / 0.0")
        return a / b

    def inverse(self, a):
        if not a:
            raise DivisionByZeroError("0.0 has no inverse")
        return 1.0 / a

    def sqrt(self, a):
        return math.sqrt(a)

    def parse(self, token):
        try:
            return float(token)
        except ValueError:
            raise ParseError(f"not a number: {token!r}") from None

    def format(self, a):
        return repr(float(a))

    def div_exact_block(self, a, d):
        if not d:
            raise DivisionByZeroError("block division by zero")
        return a / d

    def is_zero_block(self, a):
        return not a.any()

    def count_nonzero(self, a):
        return int(np.count_nonzero(a))

    def blocks_equal(self, a, b):
        return np.array_equal(a, b)


INTEGERS = IntegerRing()
POLYNOMIALS = PolynomialRing()
RATIONALS = RationalField()
FLOATS = RealField()

_BY_NAME = {d.name: d for d in (INTEGERS, POLYNOMIALS, RATIONALS, FLOATS)}


def get_domain(name):
    """Look up a domain by its CLI name (int, poly, rational, float64, mod<p>)"""
    if name in _BY_NAME:
        return _BY_NAME[name]
    if name.startswith("mod"):
        return ResidueField(int(name[3:]))
    raise InvalidSpecError(f"unknown domain {name!r}")


def field_of(domain):
    """The field used when an algorithm needs division"""
    if domain.is_field:
        return domain
    if domain is INTEGERS or domain == INTEGERS:
        return RATIONALS
    raise InvalidSpecError(f"no fraction field available for {domain.name}")


def domain_of(value):
    if isinstance(value, IntPoly):
        return POLYNOMIALS
    if isinstance(value, Fraction):
        return RATIONALS
    if isinstance(value, (float, np.floating)):
        return FLOATS
    if isinstance(value, (int, np.integer)):
        return INTEGERS
    raise TypeError(f"no domain for {type(value).__name__}")


def div_exact(a, b):
    """Exact quotient q with q*b == a in the domain of a"""
    return domain_of(a).div_exact(a, b)


def reduce_mod(a, p):
    """Residue of the integer a modulo the odd prime p, in [0, p)"""
    return ResidueField(p).convert(a)


def field_inverse(a):
    """1 / a in the field of a's domain; integers are inverted as rationals"""
    domain = domain_of(a)
    if not domain.is_field:
        domain = field_of(domain)
    return domain.inverse(domain.convert(a))
