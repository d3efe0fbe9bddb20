"""Exact counts C_ε(τ, Δ) of discriminant-Δ points near τ, and their upper bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from flint import arb, ctx, fmpq

from .disc import Discriminant, new_discriminant
from .errors import HypothesisNotMet, ValidationError
from .forms import ExactPoint, QForm, in_fundamental_domain
from .intarith import f_of_disc, gcd2, omega, sigma0, sigma1
from .jeval import rational_ball, upper_float

COR_THRESHOLD = 10**14
LEMMA_EPS_LIMIT = Fraction(1, 4)


def _fraction(x) -> Fraction:
    if isinstance(x, float):
        raise ValidationError("ε must be an exact rational, not a float")
    return Fraction(x)


@dataclass(frozen=True)
class EpsQuery:
    tau: ExactPoint
    eps: Fraction
    disc: Discriminant

    def __post_init__(self):
        object.__setattr__(self, "eps", _fraction(self.eps))
        object.__setattr__(self, "disc", new_discriminant(self.disc))
        if not 0 < self.eps < Fraction(1, 2):
            raise ValidationError(f"ε must lie in (0, 1/2), got {self.eps}")
        if not in_fundamental_domain(self.tau):
            raise ValidationError(f"τ = {complex(self.tau)} is not in the fundamental domain")

    @property
    def bound_applies(self) -> bool:
        """The a/b window lemma behind the counting bound needs ε < 1/4."""
        return self.eps < LEMMA_EPS_LIMIT


@dataclass(frozen=True)
class EpsCountResult:
    exact_count: int
    thm_bound: float
    cor_bound: float | None
    a_interval: tuple[float, float]
    witnesses: tuple[QForm, ...] = field(default=())
    report_only: bool = False


def within_eps(z_re: Fraction, z_im_sq: Fraction, tau: ExactPoint, eps: Fraction) -> bool:
    """Exact test of |z - τ| < ε for points with rational real part and rational Im².

    |z - τ|² = dx² + s₁ + s₂ - 2√(s₁s₂) with s₁ = Im(z)², s₂ = Im(τ)², so
    |z - τ|² < ε² iff R < 2√(s₁s₂) with R = dx² + s₁ + s₂ - ε².
    """
    dx = z_re - tau.re
    s1, s2 = z_im_sq, tau.im_sq
    r = dx * dx + s1 + s2 - eps * eps
    return r < 0 or r * r < 4 * s1 * s2


def a_window(q: EpsQuery) -> tuple[float, float]:
    """The open interval I of admissible a (floating endpoints, for reporting)."""
    im = math.sqrt(q.tau.im_sq)
    root = math.sqrt(q.disc.abs)
    e = float(q.eps)
    return root / (2 * (im + e)), root / (2 * (im - e))


def _b_range(a: int, tau: ExactPoint, eps: Fraction) -> tuple[int, int]:
    lo = 2 * a * (tau.re - eps)
    hi = 2 * a * (tau.re + eps)
    return math.floor(lo) + 1, math.ceil(hi) - 1


def count_witnesses(q: EpsQuery) -> list[QForm]:
    """Every form (a, b, c) of discriminant Δ with |τ(a,b,c) - τ| < ε, in (a, b) order."""
    delta = q.disc.delta
    lo, hi = a_window(q)
    a_min = max(1, math.floor(lo * (1 - 1e-12)))
    a_max = math.ceil(hi * (1 + 1e-12))
    out = []
    for a in range(a_min, a_max + 1):
        b_lo, b_hi = _b_range(a, q.tau, q.eps)
        if b_lo > b_hi:
            continue
        four_a = 4 * a
        if b_hi - b_lo < 64:
            bs = [b for b in range(b_lo, b_hi + 1) if (b * b - delta) % four_a == 0]
        else:
            arr = np.arange(b_lo, b_hi + 1, dtype=np.int64)
            arr = arr[((arr * arr) - delta) % four_a == 0]
            bs = arr.tolist()
        for b in bs:
            c = (b * b - delta) // four_a
            if math.gcd(a, b, c) != 1:
                continue
            if within_eps(Fraction(b, 2 * a), Fraction(-delta, 4 * a * a), q.tau, q.eps):
                out.append(QForm(a, b, c))
    return out


def thm_bound_eps(q: EpsQuery, F_val: int | None = None, prec_bits: int = 128) -> float:
    """F·((48+16√3)/3·σ₁(f̃)/f̃·|Δ|^½ε² + (12+4√3)/3·|Δ|^½ε + 8|Δ|^¼σ₀(f̃)ε/(√3-1)^½ + 2), rounded up."""
    if F_val is None:
        F_val = f_of_disc(q.disc)
    ft = q.disc.f_mod
    with ctx.workprec(prec_bits):
        s3 = arb(3).sqrt()
        eps = arb(fmpq(q.eps.numerator, q.eps.denominator))
        root = arb(q.disc.abs).sqrt()
        t1 = (48 + 16 * s3) / 3 * arb(fmpq(sigma1(ft), ft)) * root * eps * eps
        t2 = (12 + 4 * s3) / 3 * root * eps
        t3 = 8 * root.sqrt() * sigma0(ft) * eps / (s3 - 1).sqrt()
        total = F_val * (t1 + t2 + t3 + 2)
    return upper_float(total)


def cor_bound_eps(q: EpsQuery, F_val: int | None = None, prec_bits: int = 128) -> float:
    """F·(46.488|Δ|^½ε² log log|Δ|^½ + 7.752|Δ|^½ε + 2), valid only for |Δ| >= 10^14."""
    if q.disc.abs < COR_THRESHOLD:
        raise HypothesisNotMet(f"|Δ| = {q.disc.abs} is below 10^14")
    if F_val is None:
        F_val = f_of_disc(q.disc)
    with ctx.workprec(prec_bits):
        eps = arb(fmpq(q.eps.numerator, q.eps.denominator))
        root = arb(q.disc.abs).sqrt()
        t1 = rational_ball("46.488") * root * eps * eps * root.log().log()
        t2 = rational_ball("7.752") * root * eps
        total = F_val * (t1 + t2 + 2)
    return upper_float(total)


def exact_count_eps(q: EpsQuery, with_bounds: bool = True) -> EpsCountResult:
    witnesses = tuple(count_witnesses(q))
    thm = cor = math.nan
    if with_bounds:
        thm = thm_bound_eps(q)
        cor = cor_bound_eps(q) if q.disc.abs >= COR_THRESHOLD else None
    return EpsCountResult(len(witnesses), thm, cor, a_window(q), witnesses, not q.bound_applies)


# ---------------------------------------------------------------------------
# Counting lemmas


class ResidueAudit(NamedTuple):
    class_count: int
    modulus: int
    bound: int


def residue_class_audit(a: int, delta: int) -> ResidueAudit:
    """Solutions of b² ≡ Δ (mod a), grouped into classes modulo a/gcd₂(a, Δ)."""
    if a < 1:
        raise ValidationError(f"a must be positive, got {a}")
    if delta == 0:
        raise ValidationError("Δ must be nonzero")
    modulus = a // gcd2(a, delta)
    roots = [b for b in range(a) if (b * b - delta) % a == 0]
    classes = {b % modulus for b in roots}
    # each class mod `modulus` must be a full union of residues mod a
    for r in classes:
        assert all((b * b - delta) % a == 0 for b in range(r, a, modulus))
    bound = 2 ** (omega(a // math.gcd(a, abs(delta))) + 1)
    return ResidueAudit(len(classes), modulus, bound)


def count_in_interval(lo: Fraction, hi: Fraction, m: int, r: int) -> int:
    """#{n ∈ [lo, hi] : n ≡ r (mod m)}."""
    first = math.ceil(Fraction(lo - r, m))
    last = math.floor(Fraction(hi - r, m))
    return max(0, last - first + 1)


def interval_count_bound(lo: Fraction, hi: Fraction, m: int) -> Fraction:
    return Fraction(hi - lo) / m + 1


def divisor_bounds_hold(d: Discriminant) -> tuple[bool, bool]:
    """σ₀(f̃) <= |Δ|^0.192 and σ₁(f̃)/f̃ <= 1.842 log log |Δ|^½ (stated for |Δ| >= 10^14)."""
    ft = d.f_mod
    with ctx.workprec(128):
        x = arb(d.abs)
        ok0 = arb(sigma0(ft)) <= x ** rational_ball("0.192")
        ok1 = arb(fmpq(sigma1(ft), ft)) <= rational_ball("1.842") * x.sqrt().log().log()
    return bool(ok0), bool(ok1)
