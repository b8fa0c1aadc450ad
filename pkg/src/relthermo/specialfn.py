"""Exact constants needed by the summation engines.

Bernoulli numbers are kept as :class:`fractions.Fraction` and only turned into
floats by the caller. Zeta is provided at non-positive integers only, which is
where the residue engine needs it.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import ParameterDomainError

MAX_BERNOULLI_INDEX = 12


@lru_cache(maxsize=None)
def _bernoulli_table(kmax: int) -> tuple[Fraction, ...]:
    # B_0..B_kmax from sum_{j=0}^{m} C(m+1, j) B_j = 0, B_1 = -1/2 convention
    b = [Fraction(1)]
    for m in range(1, kmax + 1):
        acc = sum(math.comb(m + 1, j) * b[j] for j in range(m))
        b.append(-acc / (m + 1))
    return tuple(b)


def bernoulli(k: int, kmax: int = MAX_BERNOULLI_INDEX) -> Fraction:
    """Exact even-index Bernoulli number ``B_k`` for ``2 <= k <= kmax``."""
    if isinstance(k, bool) or not isinstance(k, int) or k % 2 or not 2 <= k <= kmax:
        raise ParameterDomainError(f"bernoulli index must be even in [2, {kmax}], got {k!r}")
    return _bernoulli_table(kmax)[k]


def zeta_at(s: int) -> Fraction:
    """Riemann zeta at a non-positive integer, as an exact rational.

    ``zeta(0) = -1/2``, ``zeta(-2m) = 0`` and ``zeta(1-2m) = -B_{2m}/(2m)``.
    """
    if isinstance(s, bool) or not isinstance(s, int):
        raise ParameterDomainError(f"zeta_at takes an integer argument, got {s!r}")
    if s == 1:
        raise ParameterDomainError("zeta has a pole at s = 1")
    if s > 0:
        raise ParameterDomainError(f"zeta_at only covers s <= 0, got {s}")
    if s == 0:
        return Fraction(-1, 2)
    if s % 2 == 0:
        return Fraction(0)
    m = (1 - s) // 2
    return -bernoulli(2 * m, kmax=max(MAX_BERNOULLI_INDEX, 2 * m)) / (2 * m)


def gamma_int(n: int) -> int:
    """Gamma at a positive integer, ``(n-1)!``."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParameterDomainError(f"gamma_int needs a positive integer, got {n!r}")
    return math.factorial(n - 1)
