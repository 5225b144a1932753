"""Symbolic Hurwitzian continued fractions.

A descriptor is ``b0; preperiod; cycle`` where every cycle entry is either a
constant quotient or an integer-valued polynomial in ``j`` (Perron's
arithmetic progressions). The ``j``-th pass through the cycle evaluates its
progressions at ``start_j + j``.

Quotients are indexed from 0: ``b_0 = b0``, ``b_1..b_p`` is the preperiod and
``b_i`` for ``i > p`` is ``cycle[(i - p - 1) % L]``. Everything here is exact;
irrational values are enclosed in :class:`RationalInterval` objects whose
endpoints are convergents.
"""

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple, Union

# Finite limits are Fractions; math.inf compares correctly against them.
ExtendedRational = Union[Fraction, float]

BUILTIN_KINDS = ('e', 'e_squared', 'exp_inv', 'exp_2_over', 'tanh_inv', 'all_ones')


class DescriptorError(ValueError):
    """Invalid descriptor construction or an invalid emitted quotient."""


@dataclass(frozen=True)
class Const:
    c: int

    def __post_init__(self):
        if self.c < 1:
            raise DescriptorError(f"constant quotient must be positive, got {self.c}")

    def value(self, j: int) -> int:
        return self.c

    def __str__(self) -> str:
        return str(self.c)


@dataclass(frozen=True)
class Progression:
    """Integer-valued polynomial in ``j``; ``coeffs[k]`` multiplies ``j**k``."""

    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, 'coeffs', coeffs)
        if len(coeffs) < 2:
            raise DescriptorError("a progression needs degree >= 1; use Const for constants")
        if coeffs[-1] <= 0:
            raise DescriptorError(f"progression {self} must have a positive leading coefficient")

    @classmethod
    def linear(cls, slope: int, intercept: int) -> 'Progression':
        return cls((Fraction(intercept), Fraction(slope)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def denominator(self) -> int:
        return math.lcm(*(c.denominator for c in self.coeffs))

    def value(self, j: int) -> int:
        total = Fraction(0)
        for c in reversed(self.coeffs):
            total = total * j + c
        if total.denominator != 1:
            raise DescriptorError(f"progression {self} is not integer-valued at j={j}")
        return total.numerator

    def root_bound(self) -> int:
        """Every real root lies below this (Cauchy bound)."""
        lead = self.coeffs[-1]
        return 1 + math.ceil(max((abs(c / lead) for c in self.coeffs[:-1]), default=0))

    def validate(self, start_j: int) -> None:
        # degree+2 consecutive integer values pin down an integer-valued polynomial;
        # past the root bound the values stay positive integers
        last = max(start_j + self.degree + 2, self.root_bound() + 1)
        for j in range(start_j, last):
            if self.value(j) < 1:
                raise DescriptorError(f"progression {self} is not positive at j={j}")

    def __str__(self) -> str:
        terms = []
        for k, c in reversed(list(enumerate(self.coeffs))):
            if c == 0:
                continue
            mono = '' if k == 0 else ('j' if k == 1 else f'j^{k}')
            coef = str(c) if (c != 1 or k == 0) else ''
            terms.append(f"{coef}{mono}")
        return '+'.join(terms).replace('+-', '-')


CycleEntry = Union[Const, Progression]


@dataclass(frozen=True)
class HurwitzianDescriptor:
    b0: int
    preperiod: Tuple[int, ...]
    cycle: Tuple[CycleEntry, ...]
    start_j: int = 1
    name: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'preperiod', tuple(self.preperiod))
        object.__setattr__(self, 'cycle', tuple(self.cycle))
        if not self.cycle:
            raise DescriptorError("cycle must not be empty")
        if self.start_j < 0:
            raise DescriptorError(f"start_j must be >= 0, got {self.start_j}")
        if any(b < 1 for b in self.preperiod):
            raise DescriptorError(f"preperiod quotients must be positive: {self.preperiod}")
        for entry in self.cycle:
            if isinstance(entry, Progression):
                entry.validate(self.start_j)

    @property
    def is_quadratic(self) -> bool:
        """True when no cycle entry grows (order 0)."""
        return not any(isinstance(e, Progression) for e in self.cycle)

    @property
    def cycle_length(self) -> int:
        return len(self.cycle)

    def __str__(self) -> str:
        if self.name:
            return self.name
        pre = ', '.join(str(b) for b in self.preperiod)
        cyc = ', '.join(str(e) for e in self.cycle)
        return f"[{self.b0}; {pre + ', ' if pre else ''}({cyc})_j>={self.start_j}]"


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int

    @property
    def pair(self) -> Tuple[int, int]:
        return (self.p, self.q)


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @classmethod
    def point(cls, x) -> 'RationalInterval':
        return cls(Fraction(x), Fraction(x))

    @classmethod
    def hull(cls, a, b) -> 'RationalInterval':
        return cls(min(a, b), max(a, b))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: 'RationalInterval') -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other):
        if isinstance(other, RationalInterval):
            return RationalInterval(self.lo + other.lo, self.hi + other.hi)
        return RationalInterval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self):
        return RationalInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RationalInterval):
            products = [a * b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
            return RationalInterval(min(products), max(products))
        return RationalInterval.hull(self.lo * other, self.hi * other)

    __rmul__ = __mul__

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RationalInterval(Fraction(0), max(-self.lo, self.hi))

    def reciprocal(self) -> 'RationalInterval':
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError(f"interval {self} contains zero")
        return RationalInterval(1 / self.hi, 1 / self.lo)

    def __str__(self) -> str:
        return f"[{float(self.lo):.12g}, {float(self.hi):.12g}]"


# ----------------------------------------
# Builtin expansions
# ----------------------------------------

def _exp_inv(s: int) -> HurwitzianDescriptor:
    # e^{1/s} = [1; ((2j-1)s-1, 1, 1)]
    return HurwitzianDescriptor(
        1, (), (Progression.linear(2 * s, -s - 1), Const(1), Const(1)), 1, f"e^(1/{s})")


def _exp_2_over_odd(k: int) -> HurwitzianDescriptor:
    s = (k - 1) // 2
    cycle = (
        Progression.linear(3 * k, s),
        Progression.linear(12 * k, 6 * k),
        Progression.linear(3 * k, 5 * s + 2),
        Const(1),
        Const(1),
    )
    return HurwitzianDescriptor(1, (), cycle, 0, f"e^(2/{k})")


def _e() -> HurwitzianDescriptor:
    return HurwitzianDescriptor(2, (), (Const(1), Progression.linear(2, 0), Const(1)), 1, "e")


def _e_squared() -> HurwitzianDescriptor:
    cycle = (
        Progression.linear(3, -1),
        Const(1),
        Const(1),
        Progression.linear(3, 0),
        Progression.linear(12, 6),
    )
    return HurwitzianDescriptor(7, (), cycle, 1, "e^2")


def builtin_descriptor(kind: str, param: Optional[int] = None) -> HurwitzianDescriptor:
    """Descriptor for one of the classical Hurwitzian expansions.

    ``exp_inv(s)`` is e^{1/s} (s >= 2), ``exp_2_over(k)`` is e^{2/k},
    ``tanh_inv(s)`` is tanh(1/s). ``exp_2_over`` dispatches even k to
    ``exp_inv(k/2)`` (or e for k = 2) and k = 1 to e^2.
    """
    if kind == 'e':
        return _e()
    if kind == 'e_squared':
        return _e_squared()
    if kind == 'all_ones':
        return HurwitzianDescriptor(1, (), (Const(1),), 1, "golden ratio")

    if not isinstance(param, int) or isinstance(param, bool):
        raise DescriptorError(f"descriptor kind '{kind}' needs an integer parameter")

    if kind == 'exp_inv':
        if param < 2:
            raise DescriptorError(f"exp_inv needs s >= 2 (s={param} yields a zero quotient); use 'e'")
        return _exp_inv(param)
    if kind == 'exp_2_over':
        if param < 1:
            raise DescriptorError(f"exp_2_over needs k >= 1, got {param}")
        if param == 1:
            return _e_squared()
        if param == 2:
            return _e()
        if param % 2 == 0:
            return _exp_inv(param // 2)
        return _exp_2_over_odd(param)
    if kind == 'tanh_inv':
        if param < 1:
            raise DescriptorError(f"tanh_inv needs s >= 1, got {param}")
        return HurwitzianDescriptor(0, (), (Progression.linear(2 * param, -param),), 1, f"tanh(1/{param})")

    raise DescriptorError(f"unknown descriptor kind '{kind}' (expected one of {', '.join(BUILTIN_KINDS)})")


def quadratic_descriptor(b0: int, preperiod: Sequence[int], period: Sequence[int]) -> HurwitzianDescriptor:
    """Quadratic irrational ``[b0; preperiod, (period)]``."""
    return HurwitzianDescriptor(b0, tuple(preperiod), tuple(Const(c) for c in period), 1)


def _parse_entry(text: str) -> CycleEntry:
    from sympy import Poly, Symbol
    from sympy.parsing.sympy_parser import (
        implicit_multiplication_application, parse_expr, standard_transformations)

    j = Symbol('j')
    transformations = standard_transformations + (implicit_multiplication_application,)
    try:
        # "2j" would otherwise tokenize as a complex literal
        source = re.sub(r'(\d)\s*j', r'\1*j', text.replace('^', '**'))
        expr = parse_expr(source, local_dict={'j': j}, transformations=transformations)
        poly = Poly(expr, j)
    except Exception as exc:
        raise DescriptorError(f"cannot parse cycle entry '{text}': {exc}") from exc
    if not (poly.domain.is_ZZ or poly.domain.is_QQ):
        raise DescriptorError(f"cycle entry '{text}' must be a polynomial in j with rational coefficients")
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    if len(coeffs) == 1:
        if coeffs[0].denominator != 1:
            raise DescriptorError(f"constant entry '{text}' is not an integer")
        return Const(int(coeffs[0]))
    return Progression(tuple(coeffs))


def parse_descriptor(text: str, start_j: int = 1) -> HurwitzianDescriptor:
    """Parse ``"b0; pre1, pre2; f1(j), f2(j), ..."``.

    >>> str(parse_descriptor("2;;1,2j,1").cycle[1])
    '2j'
    """
    parts = [part.strip() for part in text.strip().strip('[]').split(';')]
    if len(parts) == 2:
        parts = [parts[0], '', parts[1]]
    if len(parts) != 3 or not parts[2]:
        raise DescriptorError(f"expected 'b0; preperiod; cycle', got '{text}'")
    try:
        b0 = int(parts[0])
        preperiod = tuple(int(x) for x in parts[1].split(',') if x.strip())
    except ValueError as exc:
        raise DescriptorError(f"b0 and preperiod must be integers in '{text}'") from exc
    cycle = tuple(_parse_entry(x.strip()) for x in parts[2].split(','))
    return HurwitzianDescriptor(b0, preperiod, cycle, start_j)


# ----------------------------------------
# Quotients and convergents
# ----------------------------------------

def cycle_position(d: HurwitzianDescriptor, i: int) -> Tuple[int, int]:
    """(cycle offset, j) producing ``b_i`` for ``i`` past the preperiod."""
    k = i - len(d.preperiod) - 1
    return k % d.cycle_length, d.start_j + k // d.cycle_length


def partial_quotient(d: HurwitzianDescriptor, i: int) -> int:
    if i < 0:
        raise ValueError(f"quotient index must be >= 0, got {i}")
    if i == 0:
        return d.b0
    if i <= len(d.preperiod):
        return d.preperiod[i - 1]
    offset, j = cycle_position(d, i)
    b = d.cycle[offset].value(j)
    if b < 1:
        raise DescriptorError(f"{d} emits quotient {b} at index {i}")
    return b


def quotients(d: HurwitzianDescriptor, start: int = 0) -> Iterator[int]:
    i = start
    while True:
        yield partial_quotient(d, i)
        i += 1


def leaping_offsets(d: HurwitzianDescriptor) -> List[int]:
    return [k for k, e in enumerate(d.cycle) if isinstance(e, Progression)]


def is_leaping_index(d: HurwitzianDescriptor, i: int) -> bool:
    """True when ``b_{i+1}`` comes from a progression."""
    if i + 1 <= len(d.preperiod):
        return False
    return isinstance(d.cycle[cycle_position(d, i + 1)[0]], Progression)


def convergents(d: HurwitzianDescriptor) -> Iterator[Convergent]:
    """Convergents from index -1 onwards: P_{i+1} = b_{i+1} P_i + P_{i-1}."""
    p_prev, q_prev = 0, 1
    p, q = 1, 0
    yield Convergent(-1, p, q)
    for i, b in enumerate(quotients(d)):
        p, p_prev = b * p + p_prev, p
        q, q_prev = b * q + q_prev, q
        yield Convergent(i, p, q)


@lru_cache(maxsize=256)
def _convergent_table(d: HurwitzianDescriptor, upto: int) -> Tuple[Tuple[int, int], ...]:
    table = []
    for c in convergents(d):
        if c.index > upto:
            break
        table.append((c.p, c.q))
    return tuple(table)


def convergent(d: HurwitzianDescriptor, i: int) -> Convergent:
    if i < -2:
        raise ValueError(f"convergent index must be >= -2, got {i}")
    if i == -2:
        return Convergent(-2, 0, 1)
    # round the cache key up so nearby requests share a table
    upto = max(64, 1 << max(i, 1).bit_length())
    p, q = _convergent_table(d, upto)[i + 1]
    return Convergent(i, p, q)


def _finite_value(terms: Sequence[int]) -> Fraction:
    """Exact value of the finite continued fraction ``[t0; t1, ..., tk]``."""
    value = Fraction(terms[-1])
    for t in reversed(terms[:-1]):
        value = t + 1 / value
    return value


def _tail_interval(terms: Iterator[int], precision: int) -> RationalInterval:
    """Enclose ``[t0; t1, ...]`` between consecutive convergents of the tail."""
    bound = Fraction(1, 1 << precision)
    p_prev, q_prev = 1, 0
    t0 = next(terms)
    p, q = t0, 1
    depth = 0
    for t in terms:
        p, p_prev = t * p + p_prev, p
        q, q_prev = t * q + q_prev, q
        depth += 1
        # |p/q - p_prev/q_prev| = 1/(q q_prev)
        if q * q_prev > 0 and Fraction(1, q * q_prev) < bound:
            break
    logging.debug(f"tail enclosure reached depth {depth} for {precision} bits")
    return RationalInterval.hull(Fraction(p, q), Fraction(p_prev, q_prev))


def eval_interval(d: HurwitzianDescriptor, precision: int) -> RationalInterval:
    """Interval of width < 2^-precision containing the value of ``d``."""
    if precision < 1:
        raise ValueError(f"precision must be >= 1 bit, got {precision}")
    return _tail_interval(quotients(d), precision)


def mu(d: HurwitzianDescriptor, i: int, precision: int) -> RationalInterval:
    """Enclosure of mu_i = [b_{i+1}; b_{i+2}, ...] + [0; b_i, ..., b_1].

    The backward part equals q_{i-1}/q_i exactly; ``q_i |q_i theta - p_i| = 1/mu_i``.
    """
    if i < 0:
        raise ValueError(f"mu index must be >= 0, got {i}")
    if precision < 1:
        raise ValueError(f"precision must be >= 1 bit, got {precision}")
    backward = Fraction(convergent(d, i - 1).q, convergent(d, i).q)
    return _tail_interval(quotients(d, i + 1), precision) + backward


def mu_limit(d: HurwitzianDescriptor, cycle_offset: int) -> ExtendedRational:
    """Limit of mu_i along indices i whose next quotient b_{i+1} sits at ``cycle_offset``.

    A progression entry tends to infinity, so each side of mu_i is cut at the
    nearest progression: [x0; ..., x_{u-1}, A, ...] -> [x0; ..., x_{u-1}].
    """
    if d.is_quadratic:
        raise DescriptorError(f"{d} has no progression; mu limits need unbounded quotients")
    length = d.cycle_length
    if not 0 <= cycle_offset < length:
        raise ValueError(f"cycle offset must be in [0, {length}), got {cycle_offset}")
    if isinstance(d.cycle[cycle_offset], Progression):
        return math.inf

    forward = []
    k = cycle_offset
    while isinstance(d.cycle[k % length], Const):
        forward.append(d.cycle[k % length].c)
        k += 1

    backward = []
    k = cycle_offset - 1
    while isinstance(d.cycle[k % length], Const):
        backward.append(d.cycle[k % length].c)
        k -= 1

    value = _finite_value(forward)
    if backward:
        value += 1 / _finite_value(backward)
    return value
