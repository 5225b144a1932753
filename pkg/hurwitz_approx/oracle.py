"""Numerical cross-checks for the algebraic results.

Everything is certified: theta is enclosed by convergents, distances to the
nearest integer are bounded from both sides, and a computation that cannot
be certified within ``oracle.max_bits`` raises instead of guessing.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from .approx import ReducedTarget
from .cf_engine import HurwitzianDescriptor, RationalInterval, convergents, eval_interval, mu, partial_quotient
from .config import get_config


class PrecisionExhausted(RuntimeError):
    """A value could not be certified within the configured precision cap."""


class ClassificationError(RuntimeError):
    """No convergent match although n^2 lambda(S) < 1/2 guarantees one."""


def _tolerance(tolerance) -> Fraction:
    if tolerance is None:
        return get_config().fraction('oracle.tolerance')
    tolerance = Fraction(str(tolerance)) if isinstance(tolerance, (str, float)) else Fraction(tolerance)
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    return tolerance


def _bits_for(tolerance: Fraction) -> int:
    return math.ceil(math.log2(tolerance.denominator / tolerance.numerator)) if tolerance < 1 else 0


@lru_cache(maxsize=256)
def _theta(d: HurwitzianDescriptor, bits: int) -> RationalInterval:
    return eval_interval(d, bits)


# ----------------------------------------
# lambda(S)
# ----------------------------------------

@dataclass(frozen=True)
class LambdaValue:
    """lambda(S) = |S - r/n| ||S theta - phi|| with the integers behind it.

    ``N theta - M = n (S theta - phi - R)`` so ``n^2 lambda = |N| |N theta - M|``.
    """

    S: int
    R: int
    N: int
    M: int
    value: RationalInterval
    plain: RationalInterval
    bits: int

    def scaled(self, n: int) -> RationalInterval:
        return self.value * (n * n)


def lambda_S(d: HurwitzianDescriptor, t: ReducedTarget, S: int, tolerance=None,
             max_bits: Optional[int] = None) -> LambdaValue:
    if S == 0:
        raise ValueError("S must be nonzero")
    tol = _tolerance(tolerance)
    cap = max_bits if max_bits is not None else get_config().get('oracle.max_bits', 4096)
    N = S * t.n - t.r
    weight = Fraction(abs(N), t.n)
    bits = max(64, 2 * N.bit_length() + _bits_for(tol) + 8)

    while bits <= cap:
        x = (_theta(d, bits) * N - t.m) * Fraction(1, t.n)
        R = math.floor(x.lo + Fraction(1, 2))
        if R == math.floor(x.hi + Fraction(1, 2)):
            distance = abs(x - R)
            value = distance * weight
            if value.width < tol:
                return LambdaValue(S, R, N, t.m + R * t.n, value, distance * abs(S), bits)
        logging.debug(f"lambda({S}) at {t}: {bits} bits not enough, doubling")
        bits *= 2

    raise PrecisionExhausted(f"lambda({S}) for {d} at {t} not certified within {cap} bits")


# ----------------------------------------
# liminf scan
# ----------------------------------------

@dataclass(frozen=True)
class WindowMinimum:
    """min of |q| ||q theta - phi|| over 2^exponent <= |q| < 2^(exponent+1)."""

    exponent: int
    lo: Fraction
    hi: Fraction
    argmin_q: int

    @property
    def interval(self) -> RationalInterval:
        return RationalInterval(self.lo, self.hi)


@dataclass(frozen=True)
class ScanRecord:
    q_min: int
    q_max: int
    tolerance: Fraction
    windows: Tuple[WindowMinimum, ...]

    @property
    def minimum(self) -> RationalInterval:
        return RationalInterval(min(w.lo for w in self.windows), min(w.hi for w in self.windows))

    @property
    def argmin_q(self) -> int:
        return min(self.windows, key=lambda w: w.hi).argmin_q

    @property
    def running_envelope(self) -> List[RationalInterval]:
        """Prefix minima over windows; non-increasing."""
        out: List[RationalInterval] = []
        for w in self.windows:
            if out:
                out.append(RationalInterval(min(out[-1].lo, w.lo), min(out[-1].hi, w.hi)))
            else:
                out.append(w.interval)
        return out

    @property
    def tail_envelope(self) -> List[RationalInterval]:
        """Suffix minima over windows; non-decreasing, tends to the liminf."""
        out: List[RationalInterval] = []
        for w in reversed(self.windows):
            if out:
                out.append(RationalInterval(min(out[-1].lo, w.lo), min(out[-1].hi, w.hi)))
            else:
                out.append(w.interval)
        return out[::-1]

    @property
    def estimate(self) -> RationalInterval:
        return self.minimum

    def consistency(self, expected: Fraction, rel_tol: Fraction = Fraction(1, 20),
                    zero_threshold: Fraction = Fraction(1, 50)) -> str:
        """Label the scan against an algebraic value of L (not n^2 L)."""
        expected = Fraction(expected)
        estimate = self.estimate
        if expected == 0:
            ok = estimate.hi < zero_threshold
        else:
            band = RationalInterval(expected * (1 - rel_tol), expected * (1 + rel_tol))
            ok = estimate.overlaps(band)
        return "consistent" if ok else "inconsistent"


def _fixed_point(d: HurwitzianDescriptor, bits: int) -> Tuple[int, int]:
    """(A, w) with theta in [A, A + w] / 2^bits."""
    theta = _theta(d, bits + 2)
    scale = 1 << bits
    A = math.floor(theta.lo * scale)
    return A, math.ceil(theta.hi * scale) - A


def _scan_window(A: int, w: int, bits: int, t: ReducedTarget, sign: int,
                 first: int, last: int) -> Tuple[int, int]:
    """Smallest k * dist(U_k) over k in [first, last] for q = sign * k."""
    n, r, m = t.n, t.r, t.m
    B = n << bits
    N = sign * n * first - r
    U = N * A - (m << bits)
    step = sign * n * A
    best, best_k = None, first
    for k in range(first, last + 1):
        u = U % B
        center = k * min(u, B - u)
        if best is None or center < best:
            best, best_k = center, k
        U += step
    return best, best_k


def liminf_scan(d: HurwitzianDescriptor, t: ReducedTarget, q_max: Optional[int] = None,
                tolerance=None, q_min: int = 1) -> ScanRecord:
    """Window minima of |q| ||q theta - phi|| over 1 <= q_min <= |q| <= q_max, both signs.

    theta is replaced by a fixed-point enclosure [A, A + w] / 2^P; with
    N = n q - r the scaled offset U = N A - m 2^P moves by n A per step and
    ||q theta - phi|| lies within |N| w / (n 2^P) of dist(U) / (n 2^P).
    """
    q_max = q_max if q_max is not None else get_config().get('oracle.qmax', 1 << 20)
    if q_max < 16:
        raise ValueError(f"q_max must be >= 16, got {q_max}")
    if not 1 <= q_min <= q_max:
        raise ValueError(f"q_min must lie in [1, {q_max}], got {q_min}")
    tol = _tolerance(tolerance)
    n, r = t.n, t.r

    bits = 2 * (q_max + 1).bit_length() + _bits_for(tol) + 8
    A, w = _fixed_point(d, bits)
    B = n << bits

    windows: List[WindowMinimum] = []
    for exponent in range(q_min.bit_length() - 1, q_max.bit_length()):
        first = max(1 << exponent, q_min)
        last = min((2 << exponent) - 1, q_max)
        if first > last:
            continue
        # |q| |N| w bounds the enclosure error of every centre in the window
        error = last * (n * last + r) * w
        best = None
        for sign in (1, -1):
            center, k = _scan_window(A, w, bits, t, sign, first, last)
            if best is None or center < best[0]:
                best = (center, sign * k)
        lo = Fraction(max(best[0] - error, 0), B)
        hi = Fraction(best[0] + error, B)
        if hi - lo >= tol:
            raise PrecisionExhausted(f"window 2^{exponent}: enclosure width {float(hi - lo)} exceeds tolerance")
        windows.append(WindowMinimum(exponent, lo, hi, best[1]))
        logging.debug(f"window 2^{exponent}: min ~ {float(hi):.6f} at q = {best[1]}")

    return ScanRecord(q_min, q_max, tol, tuple(windows))


def window_rows(record: ScanRecord) -> List[Dict[str, object]]:
    """CSV rows: window_exponent, min_value_lo, min_value_hi, argmin_q."""
    return [
        {
            'window_exponent': w.exponent,
            'min_value_lo': f"{float(w.lo):.12g}",
            'min_value_hi': f"{float(w.hi):.12g}",
            'argmin_q': w.argmin_q,
        }
        for w in record.windows
    ]


# ----------------------------------------
# Small values
# ----------------------------------------

@dataclass(frozen=True)
class SmallValueClass:
    """How (M, N) = (m + Rn, Sn - r) relates to the convergents.

    ``kind`` is ``"convergent"`` for (M, N) = g P_i with n^2 lambda = g^2/mu_i,
    or ``"semiconvergent"`` for (M, N) = g (P_j +- P_{j-1}), where
    n^2 lambda >= g^2 (1 - w) and 0 <= w <= [0; b_{i+1}].
    """

    kind: str
    index: int
    g: int
    observed: RationalInterval
    predicted: RationalInterval
    slack: Optional[RationalInterval] = None

    def agrees(self, tolerance) -> bool:
        tol = _tolerance(tolerance)
        if self.kind == 'convergent':
            return abs(self.observed.midpoint - self.predicted.midpoint) <= tol + self.observed.width
        return self.observed.hi >= self.predicted.lo - tol


def _primitive(M: int, N: int) -> Tuple[int, int, int]:
    g = math.gcd(M, N)
    if N < 0:
        g = -g
    return g, M // g, N // g


def classify_small(d: HurwitzianDescriptor, t: ReducedTarget, S: int, tolerance=None) -> SmallValueClass:
    """Match lambda(S) with n^2 lambda(S) < 1 against convergents and semiconvergents."""
    tol = _tolerance(tolerance)
    lam = lambda_S(d, t, S, tol / (t.n * t.n))
    observed = lam.scaled(t.n)
    if observed.hi >= 1:
        raise ValueError(f"classification needs n^2 lambda({S}) < 1, got {observed}")

    g, p, q = _primitive(lam.M, lam.N)
    if math.gcd(g, t.n) != 1:
        raise ClassificationError(f"multiplier {g} of ({lam.M}, {lam.N}) is not a unit mod {t.n}")
    precision = max(64, 2 * q.bit_length() + _bits_for(tol) + 8)

    prev = None
    for c in convergents(d):
        if c.index >= 0 and c.pair == (p, q):
            predicted = mu(d, c.index, precision).reciprocal() * (g * g)
            return SmallValueClass('convergent', c.index, g, observed, predicted)
        if prev is not None and c.index >= 0 and observed.hi >= Fraction(1, 2):
            hit = _semiconvergent(d, c, prev, p, q, g, observed, precision)
            if hit is not None:
                return hit
        if c.q > 2 * q + 2:
            break
        prev = c

    if observed.hi < Fraction(1, 2):
        raise ClassificationError(f"no convergent of {d} matches ({lam.M}, {lam.N}) for S = {S}")
    raise ClassificationError(f"no convergent or semiconvergent of {d} matches ({lam.M}, {lam.N})")


def _semiconvergent(d, c, prev, p, q, g, observed, precision) -> Optional[SmallValueClass]:
    j = c.index
    x = Fraction(prev.q, c.q) if c.q else Fraction(0)
    if (p, q) == (c.p + prev.p, c.q + prev.q):
        # upper sign, i = j, slack w = y = [0; b_{j+1}, ...]
        i, sign = j, 1
    elif (p, q) == (c.p - prev.p, c.q - prev.q):
        i, sign = j - 1, -1
    else:
        return None
    if i < 0 or partial_quotient(d, i + 1) == 1:
        return None
    y = mu(d, j, precision) - x
    y = y.reciprocal()
    # n^2 lambda = g^2 (1 +- x)(1 -+ y) / (1 + x y)
    predicted = (RationalInterval.point(1 + sign * x) * (1 - y * sign)) * (g * g) \
        * (y * x + 1).reciprocal()
    slack = y if sign == 1 else RationalInterval.point(x)
    return SmallValueClass('semiconvergent', i, g, observed, predicted, slack)
