"""Negative discriminants Δ = f²D and the modified conductor f̃."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DiscriminantError
from .intarith import divisors, factorize


@dataclass(frozen=True, order=True)
class Discriminant:
    """A validated negative discriminant.

    Construct through :func:`new_discriminant`; the constructor itself does
    not validate.
    """

    delta: int
    d_fund: int
    f: int
    f_mod: int

    @property
    def abs(self) -> int:
        return -self.delta

    def __int__(self) -> int:
        return self.delta

    def __str__(self) -> str:
        return str(self.delta)


def new_discriminant(delta: int | Discriminant) -> Discriminant:
    if isinstance(delta, Discriminant):
        return delta
    if isinstance(delta, bool) or not isinstance(delta, int):
        raise DiscriminantError(f"discriminant must be an integer, got {delta!r}")
    if delta >= 0:
        raise DiscriminantError(f"discriminant must be negative, got {delta}", reason="not-negative")
    if delta % 4 not in (0, 1):
        raise DiscriminantError(
            f"discriminant must be 0 or 1 mod 4, got {delta} = {delta % 4} mod 4",
            reason="invalid-residue",
        )
    square_root = 1
    core = 1
    for p, e in factorize(-delta):
        square_root *= p ** (e // 2)
        core *= p ** (e % 2)
    if -core % 4 == 1:
        d_fund, f = -core, square_root
    else:
        # -core is 2 or 3 mod 4, so Δ ≡ 0 mod 4 forces the square part to be even
        d_fund, f = -4 * core, square_root // 2
    f_mod = f if d_fund % 4 == 1 else 2 * f
    return Discriminant(delta, d_fund, f, f_mod)


def is_discriminant(delta: int) -> bool:
    return delta < 0 and delta % 4 in (0, 1)


def discriminants_in(lo: int, hi: int) -> list[Discriminant]:
    """All valid discriminants Δ with lo <= Δ <= hi, in increasing |Δ| order."""
    lo, hi = min(lo, hi), max(lo, hi)
    return [new_discriminant(d) for d in range(min(hi, -1), lo - 1, -1) if is_discriminant(d)]


def quadratic_divisors(d: Discriminant) -> list[int]:
    """The d >= 1 with d² | Δ; these are exactly the divisors of f̃."""
    out = divisors(d.f_mod)
    assert all(d.delta % (k * k) == 0 for k in out)
    assert d.delta // (d.f_mod**2) == d.d_fund // (4 if d.d_fund % 4 == 0 else 1)
    return out


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(abs(n))) if n else False


def class_number_bound(d: Discriminant) -> float:
    """π^-1 |Δ|^(1/2) (2 + log|Δ|), an upper bound for C(Δ) when Δ ∉ {-3, -4}."""
    return math.sqrt(d.abs) * (2 + math.log(d.abs)) / math.pi
