"""Zero decisions and exact values of n^2 L(theta, phi).

A target phi = (r theta + m)/n is matched against convergents through the
congruence g P_i = (m, -r) (mod n). Matching leaping convergents (g a unit)
make the constant zero; otherwise the constant is read off the limits of
mu_i along the g = 1 classes of the convergent period.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

from sympy import factorint
from sympy.ntheory.modular import solve_congruence

from .cf_engine import (
    Const,
    DescriptorError,
    ExtendedRational,
    HurwitzianDescriptor,
    builtin_descriptor,
    mu_limit,
)
from .mod_arith import Pair, convergent_orbit, leaper_half_scan, leaper_period


class ReductionError(ValueError):
    """The target reduces to n = 1, i.e. phi lies in Z theta + Z."""


@dataclass(frozen=True)
class ReducedTarget:
    """phi = (r theta + m) / n in reduced form."""

    r: int
    m: int
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ReductionError(f"reduced denominator must be >= 2, got {self.n}")
        if not (0 <= self.r < self.n and 0 <= self.m < self.n):
            raise ValueError(f"residues must lie in [0, {self.n}), got r={self.r}, m={self.m}")
        if math.gcd(self.r, self.m, self.n) != 1:
            raise ValueError(f"({self.r}, {self.m}, {self.n}) is not reduced")

    @property
    def congruence_pair(self) -> Pair:
        """(m, -r) mod n, the pair convergents are matched against."""
        return (self.m, (-self.r) % self.n)

    def __str__(self) -> str:
        return f"({self.r}θ+{self.m})/{self.n}"


def reduce(r: int, m: int, n: int) -> ReducedTarget:
    if n < 1:
        raise ValueError(f"denominator must be positive, got {n}")
    common = math.gcd(r, m, n)
    n //= common
    if n == 1:
        raise ReductionError(f"({r}θ+{m})/{n * common} lies in Zθ+Z; the constant is undefined")
    return ReducedTarget((r // common) % n, (m // common) % n, n)


def mirror_target(t: ReducedTarget) -> ReducedTarget:
    """(m - r theta) / n."""
    return reduce(-t.r, t.m, t.n)


def closure_targets(t: ReducedTarget) -> List[ReducedTarget]:
    """Reduced forms of g phi for g = 1..n-1."""
    return [reduce(g * t.r, g * t.m, t.n) for g in range(1, t.n)]


# ----------------------------------------
# Results
# ----------------------------------------

@dataclass(frozen=True)
class Zero:
    """L = 0 with witness g P_index = (m, -r) (mod n) at a leaping index."""

    index: Optional[int]
    g: int
    leaper_index: Optional[int] = None
    multiplications: Optional[int] = None
    factor_steps: Tuple[Tuple[int, int], ...] = ()
    tag: str = field(default='zero', init=False)

    @property
    def n2L(self) -> Fraction:
        return Fraction(0)

    @property
    def witness(self) -> Tuple[Optional[int], int]:
        return (self.leaper_index if self.leaper_index is not None else self.index, self.g)


@dataclass(frozen=True)
class Nonzero:
    multiplications: Optional[int] = None
    factor_steps: Tuple[Tuple[int, int], ...] = ()
    tag: str = field(default='nonzero', init=False)


@dataclass(frozen=True)
class ExactValue:
    n2L: Fraction
    M: ExtendedRational
    class_offsets: Tuple[int, ...]
    tag: str = field(default='value', init=False)

    def __post_init__(self):
        if not 0 < self.n2L < 1:
            raise ValueError(f"exact n^2 L must lie in (0, 1), got {self.n2L}")


@dataclass(frozen=True)
class BoundOnly:
    lower: Optional[Fraction] = None
    upper: Optional[Fraction] = None
    tag: str = field(default='bound', init=False)


@dataclass(frozen=True)
class Unknown:
    reason: str
    tag: str = field(default='unknown', init=False)


ApproxResult = Union[Zero, Nonzero, ExactValue, BoundOnly, Unknown]


@dataclass(frozen=True)
class SpecialZero:
    family: str
    s: int
    descriptor: HurwitzianDescriptor
    target: ReducedTarget


# ----------------------------------------
# Zero decision
# ----------------------------------------

def _require_progression(d: HurwitzianDescriptor) -> None:
    if d.is_quadratic:
        raise DescriptorError(f"{d} has no progression in its cycle")


def is_zero(d: HurwitzianDescriptor, t: ReducedTarget, budget: Optional[int] = None) -> ApproxResult:
    """Zero iff a leaping convergent satisfies g P_i = (m, -r) mod n for a unit g."""
    _require_progression(d)
    orbit = convergent_orbit(d, t.n, budget)
    hit = orbit.leaping_multiples.get(t.congruence_pair)
    if hit is None:
        return Nonzero()
    index, g = hit
    logging.debug(f"{d} at {t}: leaping P_{index} times {g} matches")
    return Zero(index, g)


def _canonical(pair: Pair, q: int) -> Tuple[Pair, int]:
    """Unit-scaled representative of ``pair`` mod prime power ``q`` and the unit used."""
    a, b = pair
    c = a if math.gcd(a, q) == 1 else b
    inverse = pow(c, -1, q)
    return ((a * inverse) % q, (b * inverse) % q), c


@dataclass(frozen=True)
class _FactorScan:
    modulus: int
    period: int
    steps: int
    classes: Dict[Pair, Tuple[int, ...]]
    pairs: Tuple[Pair, ...]


def _group_leapers(q: int, period: int, steps: int, pairs: List[Pair]) -> _FactorScan:
    grouped: Dict[Pair, List[int]] = {}
    for j, pair in enumerate(pairs):
        grouped.setdefault(_canonical(pair, q)[0], []).append(j)
    return _FactorScan(q, period, steps, {k: tuple(v) for k, v in grouped.items()}, tuple(pairs))


@lru_cache(maxsize=4096)
def _odd_prime_power_scan(s_mod: int, q: int) -> _FactorScan:
    # leapers mod q depend on s only through s mod q
    half, steps = leaper_half_scan(s_mod or q, q)
    k = q // 2
    full = list(half) + [half[2 * k - j] for j in range(k + 1, q)]
    full += [(p, (-b) % q) for p, b in full]
    return _group_leapers(q, 2 * q, steps, full)


@lru_cache(maxsize=1024)
def _two_power_scan(s_mod: int, q: int) -> _FactorScan:
    info = leaper_period(s_mod or q, q)
    pairs = [entry.pair for entry in info.entries]
    return _group_leapers(q, info.period_len, info.period_len, pairs)


def fast_is_zero_exp(s: int, t: ReducedTarget) -> ApproxResult:
    """Decide L(e^{1/s}, phi) = 0 from the leapers alone.

    Each odd prime power q | n needs the leapers L_0..L_{q//2} (fewer than
    q/2 recurrence steps); the mirrored and starred halves give the rest of
    the period. Per-factor index sets are merged with the Chinese remainder
    theorem; for odd factors only the parity of the index couples them.
    """
    if s < 1:
        raise ValueError(f"s must be positive, got {s}")
    n = t.n
    target = t.congruence_pair

    scans: List[Tuple[_FactorScan, Tuple[int, ...], int]] = []
    factor_steps: List[Tuple[int, int]] = []
    for p, e in sorted(factorint(n).items()):
        q = p ** e
        scan = _two_power_scan(s % q, q) if p == 2 else _odd_prime_power_scan(s % q, q)
        factor_steps.append((q, scan.steps))
        local = (target[0] % q, target[1] % q)
        canon, c = _canonical(local, q)
        indices = scan.classes.get(canon, ())
        if not indices:
            total = sum(steps for _, steps in factor_steps)
            logging.debug(f"e^(1/{s}) at {t}: no leaper matches mod {q}")
            return Nonzero(total, tuple(factor_steps))
        scans.append((scan, indices, c))

    total = sum(steps for _, steps in factor_steps)
    even = [entry for entry in scans if entry[0].modulus % 2 == 0]
    odd = [entry for entry in scans if entry[0].modulus % 2 == 1]
    anchors = [(0, 2), (1, 2)]
    if even:
        scan = even[0][0]
        anchors = [(j, scan.period) for j in even[0][1]]
        if scan.period % 2:
            # odd period mod 2^e leaves the parity free; pin it
            anchors = [tuple(int(x) for x in solve_congruence(a, (parity, 2)))
                       for a in anchors for parity in (0, 1)]

    for anchor in anchors:
        chosen = [anchor]
        for scan, indices, _ in odd:
            j = next((j for j in indices if solve_congruence(anchor, (j, scan.period)) is not None), None)
            if j is None:
                break
            chosen.append((j, scan.period))
        else:
            solution = solve_congruence(*chosen)
            j = int(solution[0])
            g = _combined_multiplier(scans, j, target)
            return Zero(_convergent_index(s, j, n), g, j, total, tuple(factor_steps))

    return Nonzero(total, tuple(factor_steps))


def _combined_multiplier(scans, j: int, target: Pair) -> int:
    residues, moduli = [], []
    for scan, _, _ in scans:
        q = scan.modulus
        a, b = scan.pairs[j % scan.period]
        c = 0 if math.gcd(a, q) == 1 else 1
        local = (target[0] % q, target[1] % q)
        residues.append((local[c] * pow((a, b)[c], -1, q)) % q)
        moduli.append(q)
    g, _ = solve_congruence(*zip(residues, moduli))
    return int(g)


def _convergent_index(s: int, j: int, n: int) -> int:
    if s >= 2:
        return 3 * j
    # e: leaper j >= 1 is P_{3j-2}; L_0 recurs at the end of the period
    return 3 * (j or 2 * n) - 2


# ----------------------------------------
# Values and bounds
# ----------------------------------------

def _negated(pair: Pair, n: int) -> Pair:
    return ((-pair[0]) % n, (-pair[1]) % n)


def _class_limits(d: HurwitzianDescriptor, orbit, indices) -> ExtendedRational:
    return max(mu_limit(d, orbit.offsets[i]) for i in indices)


def value(d: HurwitzianDescriptor, t: ReducedTarget, budget: Optional[int] = None) -> ApproxResult:
    """n^2 L(theta, phi) = 1/M with M the largest mu limit over the g = 1 and g = -1 classes.

    q -> -q leaves |q| ||q theta - phi|| unchanged, so the classes of phi and
    -phi both count.
    """
    _require_progression(d)
    decision = is_zero(d, t, budget)
    if isinstance(decision, Zero):
        return decision

    if any(isinstance(e, Const) and e.c > 1 for e in d.cycle):
        return Unknown(f"{d} has cycle constants above 1")

    n = t.n
    orbit = convergent_orbit(d, n, budget)
    plus = set(orbit.matching(t.congruence_pair))
    minus = set(orbit.matching(_negated(t.congruence_pair, n)))
    matches = tuple(sorted(plus | minus))
    if not matches:
        upper = coarse_upper_bound(d, t, budget)
        logging.debug(f"{d} at {t}: no g = +-1 class, bounding only")
        return BoundOnly(lower=Fraction(1), upper=upper)

    M = _class_limits(d, orbit, matches)
    if M == math.inf:
        index = next(i for i in matches if orbit.leaping[i])
        return Zero(index, 1 if index in plus else n - 1)
    if M == 1:
        return Unknown(f"{d} at {t}: M = 1")
    offsets = tuple(sorted({orbit.offsets[i] for i in matches}))
    return ExactValue(1 / Fraction(M), Fraction(M), offsets)


def coarse_upper_bound(d: HurwitzianDescriptor, t: ReducedTarget,
                       budget: Optional[int] = None) -> Optional[Fraction]:
    """min over matching classes of w^2 / limsup mu, w = min(g, n - g); None when no class matches."""
    _require_progression(d)
    orbit = convergent_orbit(d, t.n, budget)
    n = t.n
    target = t.congruence_pair
    best: Optional[Fraction] = None
    for g in range(1, n):
        if math.gcd(g, n) != 1:
            continue
        inverse = pow(g, -1, n)
        indices = orbit.matching(((target[0] * inverse) % n, (target[1] * inverse) % n))
        if not indices:
            continue
        M = _class_limits(d, orbit, indices)
        # g and g - n reach the same class
        w = min(g, n - g)
        bound = Fraction(0) if M == math.inf else Fraction(w * w) / Fraction(M)
        if best is None or bound < best:
            best = bound
    return best


def special_zero_families(n: int, m: int) -> Tuple[SpecialZero, SpecialZero]:
    """(e^{2/(n+1)}, m/n) and (e^{2/(n-1)}, -m theta/n), both zero for odd n."""
    if n < 3 or n % 2 == 0:
        raise ValueError(f"special zero families need odd n >= 3, got {n}")
    if m % n == 0:
        raise ValueError(f"m must not be a multiple of {n}")
    return (
        SpecialZero("m/n", (n + 1) // 2, builtin_descriptor('exp_2_over', n + 1), reduce(0, m, n)),
        SpecialZero("-m*theta/n", (n - 1) // 2, builtin_descriptor('exp_2_over', n - 1), reduce(-m, 0, n)),
    )
