"""Computable bijections between strings, pairs, triples, fractions and naturals.

Everything here is exact integer arithmetic (Python ints), no floating point,
so the maps stay bijective for unbounded inputs.  Naturals start at 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator


def _check_natural(value: int, name: str) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ValueError(f"{name} must be a non-negative integer, got {value!r}")


# ---------------------------------------------------------------------------
# Shortlex string ranking
# ---------------------------------------------------------------------------

def _shorter_count(k: int, n: int) -> int:
    """Number of strings over a k-symbol alphabet strictly shorter than n."""
    if k == 1:
        return n
    return (k ** n - 1) // (k - 1)


def string_rank(text: str, alphabet: str) -> int:
    """Shortlex rank of `text`: shorter strings first, then alphabet order.

    The empty string ranks 0.
    """
    if len(alphabet) < 1:
        raise ValueError("alphabet must contain at least one symbol")
    if len(set(alphabet)) != len(alphabet):
        raise ValueError("alphabet symbols must be distinct")
    index = {sym: i for i, sym in enumerate(alphabet)}
    k = len(alphabet)
    # positional value within the length class, most-significant symbol first
    value = 0
    for sym in text:
        if sym not in index:
            raise ValueError(f"symbol {sym!r} not in alphabet {alphabet!r}")
        value = value * k + index[sym]
    return _shorter_count(k, len(text)) + value


def string_unrank(rank: int, alphabet: str) -> str:
    """Inverse of string_rank over the same alphabet."""
    _check_natural(rank, "rank")
    if len(alphabet) < 1:
        raise ValueError("alphabet must contain at least one symbol")
    if len(set(alphabet)) != len(alphabet):
        raise ValueError("alphabet symbols must be distinct")
    k = len(alphabet)
    n = 0
    while _shorter_count(k, n + 1) <= rank:
        n += 1
    value = rank - _shorter_count(k, n)
    symbols = []
    for _ in range(n):
        value, digit = divmod(value, k)
        symbols.append(alphabet[digit])
    return "".join(reversed(symbols))


# ---------------------------------------------------------------------------
# Cantor pairing
# ---------------------------------------------------------------------------

def pair(a: int, b: int) -> int:
    """Diagonal pairing of two naturals: (a + b)(a + b + 1)/2 + b."""
    _check_natural(a, "a")
    _check_natural(b, "b")
    s = a + b
    return s * (s + 1) // 2 + b


def unpair(n: int) -> tuple[int, int]:
    """Inverse of pair, via the integer triangular root (exact)."""
    _check_natural(n, "n")
    t = (math.isqrt(8 * n + 1) - 1) // 2
    b = n - t * (t + 1) // 2
    return t - b, b


def triple(a: int, b: int, c: int) -> int:
    """Pairing of three naturals by composition: pair(a, pair(b, c))."""
    return pair(a, pair(b, c))


def untriple(n: int) -> tuple[int, int, int]:
    """Inverse of triple: unpair twice."""
    a, m = unpair(n)
    b, c = unpair(m)
    return a, b, c


# ---------------------------------------------------------------------------
# Non-negative rationals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedFraction:
    """A non-negative rational m/n in lowest terms (gcd(m, n) = 1, n >= 1)."""

    numerator: int
    denominator: int

    def __post_init__(self):
        _check_natural(self.numerator, "numerator")
        if not isinstance(self.denominator, int) or self.denominator < 1:
            raise ValueError(f"denominator must be a positive integer, got {self.denominator!r}")
        if math.gcd(self.numerator, self.denominator) != 1:
            raise ValueError(
                f"{self.numerator}/{self.denominator} is not reduced"
            )

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


def _diagonal_fraction(index: int) -> tuple[int, int]:
    """Candidate (numerator, denominator) at a diagonal position; may be unreduced."""
    num, den_minus_one = unpair(index)
    return num, den_minus_one + 1


def rational_rank(q: ReducedFraction) -> int:
    """Position of `q` in the diagonal enumeration that skips unreduced pairs.

    Cost is linear in pair(numerator, denominator - 1): the skip-scan has no
    closed form.
    """
    target = pair(q.numerator, q.denominator - 1)
    rank = 0
    for idx in range(target):
        num, den = _diagonal_fraction(idx)
        if math.gcd(num, den) == 1:
            rank += 1
    return rank


def rationals() -> Iterator[ReducedFraction]:
    """All non-negative reduced fractions, in diagonal enumeration order."""
    idx = 0
    while True:
        num, den = _diagonal_fraction(idx)
        if math.gcd(num, den) == 1:
            yield ReducedFraction(num, den)
        idx += 1


def rational_unrank(rank: int) -> ReducedFraction:
    """The rank-th reduced fraction in diagonal order (0/1 is rank 0)."""
    _check_natural(rank, "rank")
    return next(itertools.islice(rationals(), rank, None))
