"""Naive reference implementations used only by the tests.

Each one is written independently of the library code it checks, trading
speed for obviousness.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from flint import acb, arb, ctx, fmpq, fmpz_poly


def trial_factor(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def naive_divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def naive_gcd2(m: int, n: int) -> int:
    return max(d for d in range(1, math.isqrt(min(m, abs(n))) + 1) if m % (d * d) == 0 and n % (d * d) == 0)


def naive_F(delta: int) -> int:
    bound = math.isqrt(abs(delta))
    return max(2 ** len(trial_factor(a)) for a in range(1, bound + 1))


def naive_fundamental(delta: int) -> tuple[int, int]:
    """(D, f) by scanning for the largest f with Δ/f² still a discriminant."""
    best = 1
    for f in range(1, math.isqrt(-delta) + 1):
        if delta % (f * f) == 0 and (delta // (f * f)) % 4 in (0, 1):
            best = f
    return delta // (best * best), best


def _ab_grid(amax: int):
    a = np.repeat(np.arange(1, amax + 1), 2 * np.arange(1, amax + 1))
    b = np.concatenate([np.arange(-k + 1, k + 1) for k in range(1, amax + 1)])
    return a.astype(np.int64), b.astype(np.int64)


class DoubleLoopOracle:
    """Reduced forms of one discriminant by scanning every (a, b) with |b| <= a <= (|Δ|/3)^½.

    The (a, b) grid is built once and filtered per discriminant.
    """

    def __init__(self, max_abs: int):
        self.a, self.b = _ab_grid(math.isqrt(max_abs // 3) + 1)

    def forms(self, delta: int) -> list[tuple[int, int, int]]:
        n = -delta
        keep = 3 * self.a * self.a <= n
        a, b = self.a[keep], self.b[keep]
        num = b * b + n
        ok = num % (4 * a) == 0
        a, b = a[ok], b[ok]
        c = (b * b + n) // (4 * a)
        ok = (c >= a) & ~((b < 0) & (c == a)) & (np.gcd(np.gcd(a, b), c) == 1)
        return sorted(zip(a[ok].tolist(), b[ok].tolist(), c[ok].tolist()))


def triple_class_numbers(max_abs: int) -> np.ndarray:
    """C(Δ) for every |Δ| <= max_abs, counted by enumerating reduced triples directly."""
    cnt = np.zeros(max_abs + 1, dtype=np.int64)
    for a in range(1, math.isqrt(max_abs // 3) + 1):
        for b in range(-a + 1, a + 1):
            cmax = (max_abs + b * b) // (4 * a)
            if cmax < a:
                continue
            c = np.arange(a, cmax + 1, dtype=np.int64)
            ok = np.gcd(math.gcd(a, b), c) == 1
            if b < 0:
                ok &= c > a
            d = 4 * a * c - b * b
            np.add.at(cnt, d[ok], 1)
    return cnt


def flint_hilbert(delta: int) -> list[int]:
    """Coefficients of H_Δ, constant term first, from FLINT."""
    return [int(c) for c in fmpz_poly.hilbert_class_poly(delta).coeffs()]


def flint_j(re: Fraction, im_sq: Fraction, prec: int = 256) -> acb:
    with ctx.workprec(prec):
        y = arb(fmpq(im_sq.numerator, im_sq.denominator)).sqrt()
        return acb(arb(fmpq(re.numerator, re.denominator)), y).modular_j()


def brute_count(tau_re: Fraction, tau_im_sq: Fraction, eps: Fraction, delta: int) -> int:
    """C_ε(τ, Δ) by scanning every a up to the largest Im-compatible value and a wide b range."""
    n = -delta
    # any point within 1/2 of F has Im > √3/2 - 1/2 > 1/3
    amax = math.isqrt(9 * n // 4) + 1
    count = 0
    for a in range(1, amax + 1):
        centre = 2 * a * tau_re
        for b in range(math.floor(centre) - 2 * a - 1, math.ceil(centre) + 2 * a + 2):
            if (b * b + n) % (4 * a):
                continue
            c = (b * b + n) // (4 * a)
            if math.gcd(a, b, c) != 1:
                continue
            if _closer_than(Fraction(b, 2 * a), Fraction(n, 4 * a * a), tau_re, tau_im_sq, eps):
                count += 1
    return count


def _closer_than(x1, y1_sq, x2, y2_sq, eps) -> bool:
    """|z1 - z2| < ε decided with 300-bit balls, squaring out the root on a tie."""
    with ctx.workprec(300):
        q = lambda f: arb(fmpq(f.numerator, f.denominator))
        dist = ((q(x1) - q(x2)) ** 2 + (q(y1_sq).sqrt() - q(y2_sq).sqrt()) ** 2).sqrt()
        if dist < q(eps):
            return True
        if dist > q(eps):
            return False
    # exact tie region: (dx² + y1² + y2² - ε²)² vs 4 y1² y2²
    t = (x1 - x2) ** 2 + y1_sq + y2_sq - eps * eps
    return t < 0 or t * t < 4 * y1_sq * y2_sq


def naive_height(delta: int, prec: int = 256) -> float:
    """Height of j(τ) from the roots of FLINT's class polynomial."""
    poly = fmpz_poly.hilbert_class_poly(delta)
    with ctx.workprec(prec):
        total = arb(0)
        for r, _ in poly.complex_roots():
            m = abs(r)
            total += m.log() if m > 1 else arb(0)
        return float((total / poly.degree()).mid())
