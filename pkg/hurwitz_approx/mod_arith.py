"""Periodicity modulo n of quotients, convergents and leapers.

Every sequence here is driven by a finite state machine (position in the
descriptor cycle, progression phase, last two pairs), so periods are found by
hashing states until one repeats. The raw state period is a multiple of the
cycle length; public :class:`PeriodInfo` results are reduced to the minimal
preperiod and period of the emitted values.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from sympy import divisors
from sympy.ntheory.modular import crt

from .cf_engine import HurwitzianDescriptor, Progression, convergent, partial_quotient
from .config import get_config

Pair = Tuple[int, int]


class PeriodBudgetExceeded(RuntimeError):
    """Period detection gave up after the configured number of states."""


@dataclass(frozen=True)
class ModPair:
    a: int
    b: int
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"modulus must be >= 2, got {self.n}")
        object.__setattr__(self, 'a', self.a % self.n)
        object.__setattr__(self, 'b', self.b % self.n)

    @property
    def pair(self) -> Pair:
        return (self.a, self.b)

    def scale(self, g: int) -> 'ModPair':
        return ModPair(g * self.a, g * self.b, self.n)

    def star(self) -> 'ModPair':
        """(P, Q) -> (P, -Q)."""
        return ModPair(self.a, -self.b, self.n)

    def __str__(self) -> str:
        return f"({self.a},{self.b})"


@dataclass(frozen=True)
class PeriodInfo:
    preperiod_len: int
    period_len: int
    entries: tuple
    completely_periodic: bool
    first_index: int = 0

    def __post_init__(self):
        if self.period_len < 1 or len(self.entries) != self.period_len:
            raise ValueError("period entries must match period_len >= 1")
        if self.completely_periodic and self.preperiod_len:
            raise ValueError("a completely periodic sequence has no preperiod")

    def at(self, i: int):
        """Element with sequence index ``i`` (``i >= first_index + preperiod_len``)."""
        k = i - self.first_index - self.preperiod_len
        if k < 0:
            raise IndexError(f"index {i} lies in the preperiod")
        return self.entries[k % self.period_len]


@dataclass(frozen=True)
class LeaperWitness:
    """Leaper index with Q_index = 0 (mod modulus)."""

    index: int
    modulus: int

    @property
    def half(self) -> int:
        return self.index // 2


def _budget(n: int, cycle_states: int, budget: Optional[int]) -> int:
    if budget is not None:
        return budget
    return get_config().get('budget.multiplier', 8) * n * n * cycle_states


def _minimize(seq: Sequence, start: int, period: int) -> Tuple[int, int]:
    """Minimal (preperiod, period) of a sequence periodic from ``start`` with ``period``.

    ``seq`` must hold at least ``start + 2 * period`` items.
    """
    best = period
    for t in divisors(period):
        if all(seq[k + t] == seq[k] for k in range(start, start + period)):
            best = t
            break
    pre = start
    while pre > 0 and seq[pre - 1] == seq[pre - 1 + best]:
        pre -= 1
    return pre, best


# ----------------------------------------
# Partial quotients
# ----------------------------------------

@lru_cache(maxsize=1024)
def progression_phase(entry: Progression, n: int) -> int:
    """Minimal period in j of the progression values modulo n (divides n * denominator)."""
    bound = n * entry.denominator
    values = [entry.value(j) % n for j in range(2 * bound)]
    for t in divisors(bound):
        if all(values[j + t] == values[j] for j in range(bound)):
            return t
    return bound


def _j_phase(d: HurwitzianDescriptor, n: int) -> int:
    phases = [progression_phase(e, n) for e in d.cycle if isinstance(e, Progression)]
    return math.lcm(*phases) if phases else 1


def _quotient_stream(d: HurwitzianDescriptor, n: int) -> Iterator[Tuple[tuple, int]]:
    """(state, b_i mod n) for i = 1, 2, ...; cycle states repeat with period L * phase."""
    for i, b in enumerate(d.preperiod, start=1):
        yield ('pre', i), b % n
    phase = _j_phase(d, n)
    while True:
        for t in range(phase):
            j = d.start_j + t
            for offset, entry in enumerate(d.cycle):
                yield (offset, t), entry.value(j) % n


def quotient_mod_period(d: HurwitzianDescriptor, n: int, budget: Optional[int] = None) -> PeriodInfo:
    """Period of b_i mod n for i >= 1."""
    if n < 2:
        raise ValueError(f"modulus must be >= 2, got {n}")
    cycle_states = d.cycle_length * _j_phase(d, n)
    limit = _budget(n, d.cycle_length, budget)
    if cycle_states > limit:
        raise PeriodBudgetExceeded(
            f"quotient period of {d} mod {n} needs {cycle_states} states (budget {limit})")

    pre = len(d.preperiod)
    stream = _quotient_stream(d, n)
    values = [next(stream)[1] for _ in range(pre + 2 * cycle_states)]
    pre_len, period = _minimize(values, pre, cycle_states)
    logging.debug(f"quotients of {d} mod {n}: preperiod {pre_len}, period {period}")
    return PeriodInfo(pre_len, period, tuple(values[pre_len:pre_len + period]), pre_len == 0, 1)


# ----------------------------------------
# Convergents
# ----------------------------------------

@dataclass(frozen=True)
class ConvergentOrbit:
    """Convergents mod n aligned with the descriptor cycle.

    ``pairs[i]`` is P_i mod n for i in ``[0, start + period)``; every index
    ``i >= start`` satisfies P_{i+period} = P_i and has the same leaping
    flag and cycle offset (offset of b_{i+1}) as ``i + period``.
    """

    descriptor: HurwitzianDescriptor
    modulus: int
    start: int
    period: int
    pairs: Tuple[Pair, ...]
    leaping: Tuple[bool, ...]
    offsets: Tuple[Optional[int], ...]

    def periodic_indices(self) -> range:
        return range(self.start, self.start + self.period)

    def leaping_pairs(self) -> List[Tuple[int, Pair]]:
        return [(i, self.pairs[i]) for i in self.periodic_indices() if self.leaping[i]]

    @cached_property
    def classes(self) -> Dict[Pair, Tuple[int, ...]]:
        """Periodic indices grouped by their pair."""
        grouped: Dict[Pair, List[int]] = {}
        for i in self.periodic_indices():
            grouped.setdefault(self.pairs[i], []).append(i)
        return {pair: tuple(indices) for pair, indices in grouped.items()}

    @cached_property
    def leaping_multiples(self) -> Dict[Pair, Tuple[int, int]]:
        """g * P_i -> (i, g) over leaping periodic indices i and units g."""
        n = self.modulus
        units = [g for g in range(1, n) if math.gcd(g, n) == 1]
        table: Dict[Pair, Tuple[int, int]] = {}
        for i, (a, b) in self.leaping_pairs():
            for g in units:
                table.setdefault(((g * a) % n, (g * b) % n), (i, g))
        logging.debug(f"unit multiples of {len(table)} leaping classes mod {n}")
        return table

    def matching(self, target: Pair) -> Tuple[int, ...]:
        """Periodic indices i with P_i = target (mod n)."""
        return self.classes.get(target, ())


@lru_cache(maxsize=512)
def _orbit(d: HurwitzianDescriptor, n: int, limit: int) -> ConvergentOrbit:
    stream = _quotient_stream(d, n)
    qstate, qvalue = next(stream)
    prev, cur = (1, 0), (d.b0 % n, 1 % n)
    seen: Dict[tuple, int] = {}
    pairs: List[Pair] = []
    leaping: List[bool] = []
    offsets: List[Optional[int]] = []

    i = 0
    while True:
        state = (qstate, prev, cur)
        if state in seen:
            start = seen[state]
            break
        if i >= limit:
            raise PeriodBudgetExceeded(f"convergents of {d} mod {n}: no period within {limit} states")
        seen[state] = i
        pairs.append(cur)
        offset = None if qstate[0] == 'pre' else qstate[0]
        offsets.append(offset)
        leaping.append(offset is not None and isinstance(d.cycle[offset], Progression))

        b = qvalue
        prev, cur = cur, ((b * cur[0] + prev[0]) % n, (b * cur[1] + prev[1]) % n)
        qstate, qvalue = next(stream)
        i += 1

    logging.debug(f"convergent orbit of {d} mod {n}: start {start}, period {i - start}, {i} states")
    return ConvergentOrbit(d, n, start, i - start, tuple(pairs), tuple(leaping), tuple(offsets))


def convergent_orbit(d: HurwitzianDescriptor, n: int, budget: Optional[int] = None) -> ConvergentOrbit:
    if n < 2:
        raise ValueError(f"modulus must be >= 2, got {n}")
    cycle_states = d.cycle_length * _j_phase(d, n)
    limit = len(d.preperiod) + _budget(n, cycle_states, budget)
    return _orbit(d, n, limit)


def convergent_mod_period(d: HurwitzianDescriptor, n: int, budget: Optional[int] = None) -> PeriodInfo:
    """Period of P_i mod n for i >= 0, entries as :class:`ModPair`."""
    orbit = convergent_orbit(d, n, budget)
    seq = list(orbit.pairs)
    while len(seq) < orbit.start + 2 * orbit.period:
        seq.append(seq[orbit.start + (len(seq) - orbit.start) % orbit.period])
    pre, period = _minimize(seq, orbit.start, orbit.period)
    entries = tuple(ModPair(a, b, n) for a, b in seq[pre:pre + period])
    return PeriodInfo(pre, period, entries, pre == 0, 0)


# ----------------------------------------
# Leapers of e^{1/s}
# ----------------------------------------

def leaper_coefficient(a: int, c1: int, c2: int) -> int:
    """Multiplier linking successive leapers across a block (a, c1, c2)."""
    return a * (c1 * c2 + 1) + c1 + c2


def perron_leapers(d: HurwitzianDescriptor) -> Iterator[Pair]:
    """Exact leapers of a descriptor whose cycle is one progression plus two constants.

    Yields X_0, X_1, ... where X_k = P_{i0 + 3k} and b_{i0 + 3k + 1} is the
    progression value; X_{k+1} = C_k X_k + X_{k-1}.
    """
    kinds = [isinstance(e, Progression) for e in d.cycle]
    if d.cycle_length != 3 or kinds.count(True) != 1:
        raise ValueError(f"{d} is not of the form (progression, c1, c2)")
    i0 = len(d.preperiod) + kinds.index(True)
    first, second = convergent(d, i0), convergent(d, i0 + 3)

    def coefficient(k: int) -> int:
        base = i0 + 3 * k
        return leaper_coefficient(*(partial_quotient(d, base + t) for t in (1, 2, 3)))

    c0 = coefficient(0)
    prev = (second.p - c0 * first.p, second.q - c0 * first.q)
    cur = first.pair
    k = 0
    while True:
        yield cur
        c = coefficient(k)
        prev, cur = cur, (c * cur[0] + prev[0], c * cur[1] + prev[1])
        k += 1


def _leaper_steps(s: int, modulus: Optional[int] = None) -> Iterator[Pair]:
    """L_{-1}, L_0, L_1, ... of e^{1/s}; A_j = (2j+1) 2s."""
    prev, cur = (1, -1), (1, 1)
    if modulus:
        prev, cur = (1, modulus - 1), (1, 1 % modulus)
    yield prev
    j = 0
    while True:
        yield cur
        a = leaper_coefficient((2 * j + 1) * s - 1, 1, 1)
        nxt = (a * cur[0] + prev[0], a * cur[1] + prev[1])
        if modulus:
            nxt = (nxt[0] % modulus, nxt[1] % modulus)
        prev, cur = cur, nxt
        j += 1


def leaper(s: int, j: int) -> Pair:
    """Exact j-th leaper (P_j, Q_j) of e^{1/s}, j >= -1."""
    if s < 1 or j < -1:
        raise ValueError(f"need s >= 1 and j >= -1, got s={s}, j={j}")
    for k, pair in enumerate(_leaper_steps(s), start=-1):
        if k == j:
            return pair


def leaper_mod(s: int, n: int, j: int) -> ModPair:
    if s < 1 or n < 2 or j < -1:
        raise ValueError(f"need s >= 1, n >= 2, j >= -1; got s={s}, n={n}, j={j}")
    for k, pair in enumerate(_leaper_steps(s, n), start=-1):
        if k == j:
            return ModPair(pair[0], pair[1], n)


def leapers_mod(s: int, n: int, count: int) -> List[ModPair]:
    """L_0, ..., L_{count-1} of e^{1/s} mod n."""
    steps = _leaper_steps(s, n)
    next(steps)
    return [ModPair(a, b, n) for a, b in itertools.islice(steps, count)]


def leaper_reflect(s: int, n: int, j: int) -> ModPair:
    """(-1)^j (Q_j, P_j) mod n, the j-th leaper of e^{1/(n-s)}."""
    if not 1 <= s < n:
        raise ValueError(f"reflection needs 1 <= s < n, got s={s}, n={n}")
    p, q = leaper_mod(s, n, j).pair
    sign = -1 if j % 2 else 1
    return ModPair(sign * q, sign * p, n)


def leaper_period(s: int, n: int, budget: Optional[int] = None) -> PeriodInfo:
    """Minimal period of the leapers of e^{1/s} mod n (completely periodic, length | 2n)."""
    if s < 1 or n < 2:
        raise ValueError(f"need s >= 1 and n >= 2, got s={s}, n={n}")
    limit = _budget(n, n, budget)
    steps = _leaper_steps(s, n)
    prev = next(steps)
    seen: Dict[tuple, int] = {}
    seq: List[Pair] = []
    for j, cur in enumerate(steps):
        state = (j % n, prev, cur)
        if state in seen:
            start = seen[state]
            break
        if j >= limit:
            raise PeriodBudgetExceeded(f"leapers of e^(1/{s}) mod {n}: no period within {limit} states")
        seen[state] = j
        seq.append(cur)
        prev = cur
    period = len(seq) - start
    for k in range(period):
        seq.append(seq[start + k])
    pre, minimal = _minimize(seq, start, period)
    logging.debug(f"leapers of e^(1/{s}) mod {n}: period {minimal}")
    entries = tuple(ModPair(a, b, n) for a, b in seq[pre:pre + minimal])
    return PeriodInfo(pre, minimal, entries, pre == 0, 0)


def leaper_half_scan(s: int, n: int) -> Tuple[List[Pair], int]:
    """Leapers L_0..L_K mod odd n (K = n // 2) and the recurrence steps used.

    The rest of the period follows from L_{K+j} = L_{K-j} and L_{n+j} = (P_j, -Q_j).
    """
    if n < 3 or n % 2 == 0:
        raise ValueError(f"half scan needs odd n >= 3, got {n}")
    half = n // 2
    steps = _leaper_steps(s, n)
    next(steps)
    scanned = [next(steps) for _ in range(half + 1)]
    return scanned, half


def zero_witness_index(s: int, n: int) -> Optional[int]:
    """Even leaper index 2 <= j <= 2n with Q_j = 0 (mod n), if any."""
    steps = _leaper_steps(s, n)
    next(steps)
    for j, (_, q) in enumerate(steps):
        if j > 2 * n:
            return None
        if j >= 2 and j % 2 == 0 and q == 0:
            return j


def crt_combine(first: LeaperWitness, second: LeaperWitness) -> LeaperWitness:
    """Merge even witnesses j_i = 2 r_i mod n_i into 2r with r = r_i (mod n_i)."""
    n1, n2 = first.modulus, second.modulus
    if math.gcd(n1, n2) != 1:
        raise ValueError(f"moduli {n1} and {n2} are not coprime")
    if first.index % 2 or second.index % 2:
        raise ValueError(f"witness indices must be even, got {first.index} and {second.index}")
    r, modulus = crt([n1, n2], [first.half, second.half])
    return LeaperWitness(2 * int(r), int(modulus))
