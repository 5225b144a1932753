"""Verification suites run by ``hurwitz-approx verify``.

Each suite walks a finite family of cases and stops at the first
counterexample, which is reported verbatim.
"""

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .approx import (
    ExactValue,
    Zero,
    fast_is_zero_exp,
    is_zero,
    reduce,
    special_zero_families,
    value,
)
from .cf_engine import builtin_descriptor
from .mod_arith import (
    LeaperWitness,
    ModPair,
    crt_combine,
    leaper_mod,
    leaper_period,
    leaper_reflect,
    leapers_mod,
    zero_witness_index,
)

# n -> residues s (mod n) with L(e^{1/s}, 1/n) = 0 missing from the older lists
ZERO_TABLE: Dict[int, Tuple[int, ...]] = {
    23: (12,),
    25: (13, 23),
    29: (15,),
    43: (25,),
    47: (11, 17, 33, 43),
    49: (1, 22, 46),
}

HALF = Fraction(1, 2)


@dataclass
class VerifyReport:
    suite: str
    passed: bool = True
    checked: int = 0
    counterexample: Optional[Dict[str, object]] = None
    notes: list = field(default_factory=list)

    def fail(self, **case) -> 'VerifyReport':
        self.passed = False
        self.counterexample = {k: str(v) for k, v in case.items()}
        logging.warning(f"verify {self.suite}: counterexample {self.counterexample}")
        return self


def exp_descriptor(s: int):
    """e^{1/s}, with s = 1 mapped to e."""
    return builtin_descriptor('e') if s == 1 else builtin_descriptor('exp_inv', s)


def verify_table(max_n: Optional[int] = None) -> VerifyReport:
    report = VerifyReport('table')
    for n, residues in ZERO_TABLE.items():
        if max_n is not None and n > max_n:
            continue
        target = reduce(0, 1, n)
        for s in residues:
            fast = fast_is_zero_exp(s, target)
            slow = is_zero(exp_descriptor(s), target)
            report.checked += 1
            if not (isinstance(fast, Zero) and isinstance(slow, Zero)):
                return report.fail(n=n, s=s, fast=fast, slow=slow)
    return report


def _shift_targets(n: int):
    return reduce(0, 1, n), reduce(n - 1, 0, n)


def verify_conjecture(max_value: int = 24) -> VerifyReport:
    """n^2 L(e^{2/k}, 1/n) and n^2 L(e^{2/k}, -theta/n) are 0 or 1/2."""
    report = VerifyReport('conjecture')
    for k in range(2, max_value + 1):
        d = builtin_descriptor('exp_2_over', k)
        for n in range(2, max_value + 1):
            for target in _shift_targets(n):
                result = value(d, target)
                report.checked += 1
                if not (isinstance(result, Zero) or (isinstance(result, ExactValue) and result.n2L == HALF)):
                    return report.fail(k=k, n=n, target=target, result=result)
    return report


def verify_ecor(max_value: int = 24) -> VerifyReport:
    """gcd(n, k) != 1 forces n^2 L = 1/2 at both targets."""
    report = VerifyReport('ecor')
    for k in range(2, max_value + 1):
        d = builtin_descriptor('exp_2_over', k)
        for n in range(2, max_value + 1):
            if math.gcd(n, k) == 1:
                continue
            for target in _shift_targets(n):
                result = value(d, target)
                report.checked += 1
                if not (isinstance(result, ExactValue) and result.n2L == HALF):
                    return report.fail(k=k, n=n, target=target, result=result)
    return report


def verify_specialzeros(max_value: int = 99) -> VerifyReport:
    report = VerifyReport('specialzeros')
    for n in range(3, max_value + 1, 2):
        for m in range(1, n):
            for family in special_zero_families(n, m):
                result = is_zero(family.descriptor, family.target)
                report.checked += 1
                if not isinstance(result, Zero):
                    return report.fail(n=n, m=m, family=family.family, result=result)
    return report


def _random_crt_cases(count: int, seed: int) -> List[Tuple[int, int, int]]:
    """Random (s, n1, n2) with coprime n1 n2 <= 500 and L(e^{1/s}, 1/n_i) = 0 for both."""
    zeros = {
        (s, n) for s in range(1, 51) for n in range(2, 251)
        if isinstance(fast_is_zero_exp(s, reduce(0, 1, n)), Zero)
    }
    cases = sorted(
        (s, n1, n2) for s, n1 in zeros for n2 in range(n1 + 1, 500 // n1 + 1)
        if (s, n2) in zeros and math.gcd(n1, n2) == 1
    )
    return random.Random(seed).sample(cases, min(count, len(cases)))


def verify_crt(count: int = 20, seed: int = 2024) -> VerifyReport:
    report = VerifyReport('crt')
    for s, n1, n2 in _random_crt_cases(count, seed):
        n = n1 * n2
        combined = is_zero(exp_descriptor(s), reduce(0, 1, n))
        report.checked += 1
        if not isinstance(combined, Zero):
            return report.fail(s=s, n1=n1, n2=n2, result=combined)
        witnesses = [zero_witness_index(s, m) for m in (n1, n2)]
        if None in witnesses:
            report.notes.append(f"s={s}, ({n1},{n2}): no even witness, CRT index skipped")
            continue
        merged = crt_combine(LeaperWitness(witnesses[0], n1), LeaperWitness(witnesses[1], n2))
        if leaper_mod(s, n, merged.index).b != 0:
            return report.fail(s=s, n1=n1, n2=n2, merged=merged)
    if report.checked < count:
        report.notes.append(f"only {report.checked} cases found")
    return report


def verify_leaper_period(max_value: int = 50) -> VerifyReport:
    """Symmetric period for odd n, period | 2n always, reflection identity."""
    report = VerifyReport('leaper-period')
    for n in range(2, max_value + 1):
        for s in range(1, max_value + 1):
            info = leaper_period(s, n)
            report.checked += 1
            if (2 * n) % info.period_len:
                return report.fail(s=s, n=n, period=info.period_len)
            if math.gcd(n, 2 * s) == 1 and info.period_len != 2 * n:
                return report.fail(s=s, n=n, period=info.period_len, expected=2 * n)
            if n % 2:
                half = n // 2
                for j in range(half + 1):
                    if info.at(half + j) != info.at(half - j):
                        return report.fail(s=s, n=n, mirror=j)
                for j in range(n):
                    if info.at(n + j) != info.at(j).star():
                        return report.fail(s=s, n=n, star=j)
            if s < n:
                own, mirrored = leapers_mod(s, n, 2 * n), leapers_mod(n - s, n, 2 * n)
                for j, (p, q) in enumerate(x.pair for x in own):
                    sign = -1 if j % 2 else 1
                    if ModPair(sign * q, sign * p, n) != mirrored[j]:
                        return report.fail(s=s, n=n, reflect=j)
                if leaper_reflect(s, n, 1) != mirrored[1]:
                    return report.fail(s=s, n=n, reflect=1)
    return report


SUITES: Dict[str, Callable[..., VerifyReport]] = {
    'table': verify_table,
    'conjecture': verify_conjecture,
    'ecor': verify_ecor,
    'specialzeros': verify_specialzeros,
    'crt': verify_crt,
    'leaper-period': verify_leaper_period,
}


def run_suite(name: str, max_value: Optional[int] = None) -> VerifyReport:
    if name not in SUITES:
        raise ValueError(f"unknown suite '{name}' (expected one of {', '.join(SUITES)})")
    suite = SUITES[name]
    if max_value is None or name == 'crt':
        report = suite()
    else:
        report = suite(max_value)
    logging.info(f"verify {name}: {'pass' if report.passed else 'FAIL'} after {report.checked} checks")
    return report
