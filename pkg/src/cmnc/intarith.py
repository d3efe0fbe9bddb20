"""Exact integer arithmetic: factorization, divisor functions, gcd2, SPF sieve, F(Δ)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from flint import fmpz

from .errors import TableTooSmall, ValidationError

TRIAL_LIMIT = 10**6
# First 13 primes as Miller-Rabin bases: deterministic below 3.317e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3_317_044_064_679_887_385_961_981


@lru_cache(maxsize=1)
def _small_primes() -> tuple[int, ...]:
    sieve = np.ones(TRIAL_LIMIT + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(TRIAL_LIMIT) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.flatnonzero(sieve))


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin below 3.3e24; FLINT's proven test above."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        return bool(fmpz(n).is_prime())
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    """A nontrivial factor of the odd composite n (deterministic seeds)."""
    for c in range(1, 200):
        y, r, q, g = 2, 1, 1, 1
        m = 128
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"Pollard-Brent failed on {n}")


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def __iter__(self):
        return iter(self.factors)

    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]


def _split(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_brent(n)
    _split(d, out)
    _split(n // d, out)


@lru_cache(maxsize=65536)
def factorize(n: int) -> Factorization:
    """Prime factorization of ``n >= 1``; trial division to 1e6, then Pollard-Brent."""
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValidationError(f"expected an integer, got {n!r}")
    if n <= 0:
        raise ValidationError(f"factorize needs n >= 1, got {n}")
    found: dict[int, int] = {}
    m = n
    for p in _small_primes() if m > 1 else ():
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    if m > 1:
        if m < TRIAL_LIMIT * TRIAL_LIMIT or is_prime(m):
            found[m] = found.get(m, 0) + 1
        else:
            _split(m, found)
    return Factorization(n, tuple(sorted(found.items())))


def omega(n: int) -> int:
    return len(factorize(n).factors)


def sigma0(n: int) -> int:
    return math.prod(e + 1 for _, e in factorize(n))


def sigma1(n: int) -> int:
    return math.prod((p ** (e + 1) - 1) // (p - 1) for p, e in factorize(n))


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def largest_square_divisor_root(n: int) -> int:
    """The largest d with d**2 | n (n >= 1)."""
    return math.prod(p ** (e // 2) for p, e in factorize(n))


def gcd2(m: int, n: int) -> int:
    """Greatest common quadratic divisor: the largest d with d^2 | m and d^2 | n."""
    if m <= 0:
        raise ValidationError(f"gcd2 needs m >= 1, got {m}")
    if n == 0:
        raise ValidationError("gcd2 needs n != 0")
    return largest_square_divisor_root(math.gcd(m, abs(n)))


class SpfTable:
    """Smallest-prime-factor table on [0, limit] with derived ω and prefix-max ω.

    Immutable after construction. Entry k (2 <= k <= limit) of ``spf`` is the
    smallest prime dividing k; entries 0 and 1 are 0 and 1.
    """

    def __init__(self, limit: int):
        if limit < 1:
            raise ValidationError(f"SpfTable limit must be positive, got {limit}")
        self.limit = int(limit)
        spf = np.zeros(self.limit + 1, dtype=np.int32)
        spf[1] = 1
        for p in range(2, math.isqrt(self.limit) + 1):
            if spf[p] == 0:
                block = spf[p * p :: p]
                block[block == 0] = p
        rest = np.flatnonzero(spf == 0)
        spf[rest] = rest
        spf[0] = 0
        spf.setflags(write=False)
        self.spf = spf
        self._omega: np.ndarray | None = None
        self._omega_max: np.ndarray | None = None

    @property
    def omega(self) -> np.ndarray:
        """ω(k) for 0 <= k <= limit (ω(0) is reported as 0)."""
        if self._omega is None:
            om = np.zeros(self.limit + 1, dtype=np.int8)
            # k // spf[k] < k, so filling [2^m, 2^(m+1)) only reads earlier blocks.
            lo = 2
            while lo <= self.limit:
                hi = min(2 * lo, self.limit + 1)
                k = np.arange(lo, hi)
                p = self.spf[lo:hi]
                rest = k // p
                new_prime = (rest == 1) | (self.spf[rest] != p)
                om[lo:hi] = om[rest] + new_prime
                lo = hi
            om.setflags(write=False)
            self._omega = om
        return self._omega

    @property
    def omega_prefix_max(self) -> np.ndarray:
        if self._omega_max is None:
            mx = np.maximum.accumulate(self.omega)
            mx.setflags(write=False)
            self._omega_max = mx
        return self._omega_max

    def factorize(self, n: int) -> Factorization:
        if not 1 <= n <= self.limit:
            raise TableTooSmall(n, self.limit)
        found: dict[int, int] = {}
        m = n
        while m > 1:
            p = int(self.spf[m])
            found[p] = found.get(p, 0) + 1
            m //= p
        return Factorization(n, tuple(sorted(found.items())))


@lru_cache(maxsize=4)
def shared_table(limit: int) -> SpfTable:
    return SpfTable(limit)


def table_for(delta: int) -> SpfTable:
    """A cached table large enough for F(Δ), rounded up to a power of two."""
    need = max(math.isqrt(abs(delta)), 2)
    return shared_table(1 << (need - 1).bit_length())


def f_of_disc(delta, table: SpfTable | None = None) -> int:
    """F(Δ) = max{2^ω(a) : 1 <= a <= |Δ|^(1/2)}.

    ``delta`` may be a Discriminant or a plain integer.
    """
    delta = getattr(delta, "delta", delta)
    bound = math.isqrt(abs(delta))  # a <= |Δ|^(1/2)  <=>  a <= isqrt(|Δ|)
    if table is None:
        table = table_for(delta)
    if table.limit < bound:
        raise TableTooSmall(bound, table.limit)
    return 1 << int(table.omega_prefix_max[bound])
