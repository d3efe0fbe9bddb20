"""Rigorous evaluation of q, E₄, η and the Klein j-function on F.

j = E₄³ / η²⁴ with η²⁴ = q·P(q)²⁴, P(q) = Σ_k (-1)^k q^(k(3k-1)/2) the
pentagonal-number series and E₄ = 1 + 240 Σ σ₃(n) qⁿ. Rounding error is
tracked by arb ball arithmetic; series truncation error is added to the
radius explicitly, so every returned ball contains the true value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from flint import acb, arb, ctx, fmpq

from .errors import DomainError, PrecisionExhausted
from .forms import CMPoint, QForm, ExactPoint, in_fundamental_domain, point_of_form, reduce_form

LN2 = math.log(2)
MAX_RETRIES = 6


def upper_float(x: arb) -> float:
    """A Python float >= every point of the ball x (inf on overflow)."""
    u = float(x.upper())
    return math.nextafter(u, math.inf) if math.isfinite(u) else u


def lower_float(x: arb) -> float:
    lo = float(x.lower())
    return math.nextafter(lo, -math.inf) if math.isfinite(lo) else lo


def rational_ball(x) -> arb:
    """A ball enclosing the exact rational x (a decimal string, int or Fraction)."""
    f = Fraction(x)
    return arb(fmpq(f.numerator, f.denominator))


@dataclass(frozen=True)
class BigComplex:
    """An arb complex ball with the precision it was requested at.

    Arithmetic delegates to the ball, so error radii propagate rigorously.
    """

    ball: acb
    prec_bits: int

    @property
    def re(self) -> arb:
        return self.ball.real.mid()

    @property
    def im(self) -> arb:
        return self.ball.imag.mid()

    @property
    def radius(self) -> arb:
        """Upper bound for |computed midpoint - true value|, as an exact arb."""
        return self.ball.real.rad() + self.ball.imag.rad()

    @property
    def err_abs(self) -> float:
        return upper_float(self.radius)

    def __complex__(self) -> complex:
        return complex(float(self.ball.real.mid()), float(self.ball.imag.mid()))

    def _wrap(self, value) -> BigComplex:
        return BigComplex(value, self.prec_bits)

    def _unwrap(self, other):
        return other.ball if isinstance(other, BigComplex) else other

    def __add__(self, other):
        return self._wrap(self.ball + self._unwrap(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.ball - self._unwrap(other))

    def __rsub__(self, other):
        return self._wrap(self._unwrap(other) - self.ball)

    def __mul__(self, other):
        return self._wrap(self.ball * self._unwrap(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.ball / self._unwrap(other))

    def __neg__(self):
        return self._wrap(-self.ball)

    def __abs__(self) -> arb:
        return abs(self.ball)

    def conjugate(self) -> BigComplex:
        return self._wrap(self.ball.conjugate())

    def contains(self, value) -> bool:
        return self.ball.contains(acb(value))


@dataclass(frozen=True)
class JValue:
    value: BigComplex
    tau: CMPoint
    terms_used: int
    working_prec: int = 0


def _check_domain(tau: ExactPoint) -> None:
    if not in_fundamental_domain(tau):
        raise DomainError(f"point {tau} is not in the fundamental domain; reduce it first")


def _im_lower(tau: ExactPoint) -> float:
    return math.sqrt(tau.im_sq.numerator / tau.im_sq.denominator) * (1 - 1e-12)


def _q_ball(tau: ExactPoint) -> acb:
    """q = e^(2πiτ) at the current working precision."""
    y = arb(fmpq(tau.im_sq.numerator, tau.im_sq.denominator)).sqrt()
    modulus = (-2 * arb.pi() * y).exp()
    x2 = 2 * tau.re
    s, c = arb.sin_cos_pi_fmpq(fmpq(x2.numerator, x2.denominator))
    return acb(modulus * c, modulus * s)


def eval_q(tau: ExactPoint, prec_bits: int = 128) -> BigComplex:
    _check_domain(tau)
    with ctx.workprec(prec_bits + 16):
        q = _q_ball(tau)
    return BigComplex(q, prec_bits)


@lru_cache(maxsize=None)
def _sigma3_table(n: int) -> tuple[int, ...]:
    sig = [0] * (n + 1)
    for d in range(1, n + 1):
        d3 = d**3
        for m in range(d, n + 1, d):
            sig[m] += d3
    return tuple(sig)


def _e4_terms(log_r: float, target_bits: int) -> int:
    """Smallest N with 240 (N+1)^4 r^(N+1) / (1 - ρ) below 2^-target (float estimate)."""
    n = 1
    while True:
        est = math.log(240) + 4 * math.log(n + 1) + (n + 1) * log_r + math.log(2)
        if est < -target_bits * LN2:
            return n
        n += 1


def _e4_tail(r: arb, n: int) -> arb:
    """Rigorous bound for 240 Σ_{m>n} σ₃(m) r^m, using σ₃(m) <= m^4."""
    rho = r * arb(fmpq((n + 2) ** 4, (n + 1) ** 4))
    return 240 * arb(n + 1) ** 4 * r ** (n + 1) / (1 - rho)


def _eta_terms(log_r: float, target_bits: int) -> int:
    k = 1
    while (k + 1) * (3 * k + 2) // 2 * log_r + math.log(4) >= -target_bits * LN2:
        k += 1
    return k


def _series(tau: ExactPoint, wp: int) -> tuple[acb, acb, acb, int]:
    """Return (q, E₄, P) balls including truncation tails, and the term count."""
    log_r = -2 * math.pi * _im_lower(tau)
    q = _q_ball(tau)
    r = q.abs_upper()
    n = _e4_terms(log_r, wp + 16)
    sig = _sigma3_table(max(n, 1))
    s = acb(0)
    for m in range(n, 0, -1):
        s = (s + sig[m]) * q
    tail = _e4_tail(r, n)
    e4 = 1 + 240 * s + acb(arb(0, tail), arb(0, tail))

    k_max = _eta_terms(log_r, wp + 16)
    p = acb(1)
    qpow = acb(1)
    e_prev = 0
    for k in range(1, k_max + 1):
        e1 = k * (3 * k - 1) // 2
        qpow = qpow * q ** (e1 - e_prev)
        pair = qpow + qpow * q**k
        p = p - pair if k % 2 else p + pair
        e_prev = e1
    m = (k_max + 1) * (3 * k_max + 2) // 2
    eta_tail = 2 * r**m / (1 - r)
    p = p + acb(arb(0, eta_tail), arb(0, eta_tail))
    return q, e4, p, n + 2 * k_max


def default_working_prec(tau: ExactPoint, prec_bits: int) -> int:
    """Requested bits + 64 guard bits + headroom for |j| ~ e^(2π Im τ)."""
    return prec_bits + 64 + math.ceil(2 * math.pi * math.sqrt(float(tau.im_sq)) / LN2)


def eval_j_ball(tau: ExactPoint, prec_bits: int = 128) -> tuple[acb, int, int]:
    """j(τ) as an acb ball meeting the error target; returns (ball, terms, working_prec)."""
    _check_domain(tau)
    wp = default_working_prec(tau, prec_bits)
    for _ in range(MAX_RETRIES):
        with ctx.workprec(wp):
            q, e4, p, terms = _series(tau, wp)
            p2 = p * p
            p4 = p2 * p2
            p8 = p4 * p4
            p24 = p8 * p8 * p8
            denom = q * p24
            if not denom.contains(0):
                j = e4 * e4 * e4 / denom
                rad = j.real.rad() + j.imag.rad()
                scale = arb(2) ** (8 - prec_bits) * arb(1).max(j.abs_lower())
                if rad <= scale:
                    return j, terms, wp
        wp *= 2
    raise PrecisionExhausted(f"j({tau}) did not reach {prec_bits} bits after {MAX_RETRIES} attempts")


def eval_j(tau: ExactPoint, prec_bits: int = 128) -> JValue:
    """j(τ) for τ ∈ F with |error| <= 2^(8 - prec_bits)·max(1, |j(τ)|)."""
    ball, terms, wp = eval_j_ball(tau, prec_bits)
    return JValue(BigComplex(ball, prec_bits), tau, terms, wp)


def eval_j_any(z: CMPoint, prec_bits: int = 128) -> JValue:
    """j at any CM point: reduce the form exactly, then evaluate on F."""
    red, _ = reduce_form(z.form)
    return eval_j(point_of_form(red), prec_bits)


def j_values(forms, prec_bits: int = 128) -> list[acb]:
    """j at the CM points of reduced forms, using j(τ(a,-b,c)) = conj j(τ(a,b,c))."""
    cache: dict = {}
    out = []
    for f in forms:
        key = (f.a, abs(f.b), f.c)
        if key not in cache:
            ball, _, _ = eval_j_ball(point_of_form(QForm(*key)), prec_bits)
            cache[key] = ball
        out.append(cache[key].conjugate() if f.b < 0 else cache[key])
    return out
