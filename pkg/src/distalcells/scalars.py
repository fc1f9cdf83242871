"""Exact scalar kernel: rationals, p-adic valuations, unit residues, and the
multiplicative predicates used by the valued-field engines.

All values are `fractions.Fraction` (arbitrary precision, canonical form), so
every predicate here is decided exactly; there is no floating point anywhere.
Primes are restricted to odd p >= 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rat = Union[Fraction, int]


class Gamma:
    """Element of the value group extended with -inf and +inf.

    Total order: -inf < every finite level < +inf.  Finite levels add; an
    infinity absorbs finite shifts.  Adding opposite infinities is an error.
    """

    __slots__ = ("rank", "level")

    def __init__(self, rank: int, level: int):
        self.rank = rank  # -1: -inf, 0: finite, 1: +inf
        self.level = level

    @staticmethod
    def of(level: int) -> "Gamma":
        return Gamma(0, level)

    @property
    def is_finite(self) -> bool:
        return self.rank == 0

    def _key(self):
        return (self.rank, self.level)

    def __eq__(self, other):
        if isinstance(other, int):
            other = Gamma.of(other)
        return isinstance(other, Gamma) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __lt__(self, other):
        if isinstance(other, int):
            other = Gamma.of(other)
        return self._key() < other._key()

    def __le__(self, other):
        if isinstance(other, int):
            other = Gamma.of(other)
        return self._key() <= other._key()

    def __gt__(self, other):
        if isinstance(other, int):
            other = Gamma.of(other)
        return self._key() > other._key()

    def __ge__(self, other):
        if isinstance(other, int):
            other = Gamma.of(other)
        return self._key() >= other._key()

    def __add__(self, other) -> "Gamma":
        if isinstance(other, int):
            if self.rank != 0:
                return self
            return Gamma(0, self.level + other)
        if self.rank == 0 and other.rank == 0:
            return Gamma(0, self.level + other.level)
        if self.rank == 0:
            return other
        if other.rank == 0:
            return self
        if self.rank != other.rank:
            raise ValueError("cannot add opposite infinities")
        return self

    def __sub__(self, other: int) -> "Gamma":
        return self.__add__(-other)

    def __repr__(self):
        if self.rank == 1:
            return "+inf"
        if self.rank == -1:
            return "-inf"
        return str(self.level)


POS_INF = Gamma(1, 0)
NEG_INF = Gamma(-1, 0)


def _int_val(n: int, p: int) -> int:
    # n != 0
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(a: Rat, p: int) -> Gamma:
    """p-adic valuation of a rational; +inf exactly for 0."""
    a = Fraction(a)
    if a == 0:
        return POS_INF
    return Gamma.of(_int_val(a.numerator, p) - _int_val(a.denominator, p))


def valuation_int(a: Rat, p: int) -> int:
    """Finite valuation of a nonzero rational, as a plain int (hot path)."""
    a = Fraction(a)
    if a == 0:
        raise ZeroDivisionError("valuation_int of 0")
    return _int_val(a.numerator, p) - _int_val(a.denominator, p)


def unit_residue(a: Rat, p: int, k: int) -> int:
    """(a * p^-v(a)) mod p^k, computed via the modular inverse of the p-free
    denominator.  Requires a != 0 and k >= 1."""
    a = Fraction(a)
    if a == 0:
        raise ZeroDivisionError("unit residue of 0 is undefined")
    if k < 1:
        raise ValueError("k must be >= 1")
    num, den = a.numerator, a.denominator
    vn, vd = _int_val(num, p), _int_val(den, p)
    num //= p ** vn
    den //= p ** vd
    mod = p ** k
    return (num * pow(den, -1, mod)) % mod


def truncate(a: Rat, p: int, level: int) -> Fraction:
    """p-adic truncation of a below digit `level` (digits of index <= level).

    Two rationals x, y satisfy v(x - y) > level iff their truncations agree,
    so (level, truncate) is a canonical key for open balls of radius level.
    """
    a = Fraction(a)
    if a == 0:
        return Fraction(0)
    v = valuation_int(a, p)
    if v > level:
        return Fraction(0)
    u = unit_residue(a, p, level - v + 1)
    return Fraction(u) * Fraction(p) ** v


@dataclass(frozen=True)
class Padic:
    """A rational viewed inside Q_p for a fixed odd prime p.

    No truncated expansions are stored: the valuation and any finite unit
    residue are computed exactly on demand, which is all the predicates in
    this package ever need.
    """

    value: Fraction
    p: int

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0 or not _is_prime(self.p):
            raise ValueError("p must be an odd prime >= 3")
        object.__setattr__(self, "value", Fraction(self.value))

    def valuation(self) -> Gamma:
        return valuation(self.value, self.p)

    def unit_residue(self, k: int) -> int:
        return unit_residue(self.value, self.p, k)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def in_qmn(a: Rat, lam: Rat, m: int, n: int, p: int) -> bool:
    """Membership a in lam * Q_{m,n}, where Q_{m,n} is the union over k of
    p^(km) * (1 + p^n Z_p).

    For lam = 0 this degenerates to a == 0.  For nonzero arguments it holds
    iff m divides v(a/lam) and the unit part of a/lam is 1 mod p^n.
    """
    a, lam = Fraction(a), Fraction(lam)
    if m < 1 or n < 1:
        raise ValueError("m, n must be >= 1")
    if lam == 0:
        return a == 0
    if a == 0:
        return False
    r = a / lam
    if valuation_int(r, p) % m != 0:
        return False
    return unit_residue(r, p, n) == 1


def in_pn(a: Rat, n: int, p: int) -> bool:
    """Is a an n-th power in Q_p?  (0 counts: 0 = 0^n.)

    Decided exactly: n must divide v(a), and the unit part must have an n-th
    root modulo p^(2 v_p(n) + 1); by Hensel's lemma that residue precision is
    both sufficient and necessary.
    """
    a = Fraction(a)
    if n < 2:
        raise ValueError("n must be >= 2")
    if a == 0:
        return True
    if valuation_int(a, p) % n != 0:
        return False
    k = 2 * _int_val(n, p) + 1
    mod = p ** k
    u = unit_residue(a, p, k)
    return any(pow(x, n, mod) == u for x in range(1, mod) if x % p != 0)


def same_pn_coset(a: Rat, b: Rat, n: int, p: int) -> bool:
    """Do nonzero a, b lie in the same coset of the n-th powers P_n^x?"""
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ZeroDivisionError("coset test needs nonzero arguments")
    return in_pn(a / b, n, p)


def pn_coset_representatives(n: int, p: int) -> list[Fraction]:
    """A full list of coset representatives of Q_p^x / P_n^x, found by brute
    force over p^j * u with 0 <= j < n and u a unit residue."""
    k = 2 * _int_val(n, p) + 1
    reps: list[Fraction] = []
    for j in range(n):
        for u in range(1, p ** k):
            if u % p == 0:
                continue
            cand = Fraction(u) * Fraction(p) ** j
            if not any(same_pn_coset(cand, r, n, p) for r in reps):
                reps.append(cand)
    return reps


def qmn_coset_representatives(m: int, n: int, p: int) -> list[Fraction]:
    """Coset representatives of Q_p^x / Q_{m,n}^x: p^j * u over 0 <= j < m
    and units u mod p^n."""
    reps = []
    for j in range(m):
        for u in range(1, p ** n):
            if u % p == 0:
                continue
            reps.append(Fraction(u) * Fraction(p) ** j)
    return reps
