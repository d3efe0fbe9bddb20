"""Primitive positive definite binary quadratic forms and their CM points.

Conventions: the form (a, b, c) has discriminant b² - 4ac and CM point
τ(a, b, c) = (b + √Δ)/(2a), the root in ℍ of a·x² - b·x + c. Reduced forms
satisfy |b| <= a <= c with b >= 0 whenever |b| = a or a = c, which matches
the fundamental domain F: the open triangle with vertices ζ₃, ζ₆, i∞ plus the
arc [i, ζ₆] and the half-line [ζ₆, i∞).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .disc import Discriminant, new_discriminant
from .errors import UndecidableBoundary, ValidationError

Matrix = tuple[tuple[int, int], tuple[int, int]]
IDENTITY: Matrix = ((1, 0), (0, 1))
S_MATRIX: Matrix = ((0, -1), (1, 0))


def translation(n: int) -> Matrix:
    return ((1, n), (0, 1))


def mat_mul(g: Matrix, h: Matrix) -> Matrix:
    (a, b), (c, d) = g
    (e, f), (k, l) = h
    return ((a * e + b * k, a * f + b * l), (c * e + d * k, c * f + d * l))


def det(g: Matrix) -> int:
    return g[0][0] * g[1][1] - g[0][1] * g[1][0]


@dataclass(frozen=True, order=True)
class QForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a <= 0:
            raise ValidationError(f"form {self} is not positive definite (a <= 0)")
        if math.gcd(self.a, self.b, self.c) != 1:
            raise ValidationError(f"form {self} is not primitive")
        if self.b * self.b - 4 * self.a * self.c >= 0:
            raise ValidationError(f"form {self} has nonnegative discriminant")

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not abs(b) <= a <= c:
            return False
        return b >= 0 if (abs(b) == a or a == c) else True

    def conjugate(self) -> QForm:
        return QForm(self.a, -self.b, self.c)


@dataclass(frozen=True)
class ExactPoint:
    """A point of ℍ with rational real part and rational squared imaginary part."""

    re: Fraction
    im_sq: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im_sq", Fraction(self.im_sq))
        if self.im_sq <= 0:
            raise ValidationError("point must lie in the upper half plane")

    @property
    def abs_sq(self) -> Fraction:
        return self.re * self.re + self.im_sq

    def translate(self, n: int) -> ExactPoint:
        return ExactPoint(self.re + n, self.im_sq)

    def invert(self) -> ExactPoint:
        """z -> -1/z."""
        r = self.abs_sq
        return ExactPoint(-self.re / r, self.im_sq / (r * r))

    def __complex__(self) -> complex:
        return complex(float(self.re), math.sqrt(self.im_sq))

    @classmethod
    def from_complex(cls, z: complex) -> ExactPoint:
        """Exact conversion: binary floats are rationals."""
        im = Fraction(z.imag)
        return cls(Fraction(z.real), im * im)


@dataclass(frozen=True)
class CMPoint(ExactPoint):
    """τ(a, b, c) for a primitive positive definite form."""

    form: QForm | None = None

    @property
    def delta(self) -> int:
        return self.form.discriminant

    @property
    def re_num(self) -> int:
        return self.re.numerator

    @property
    def re_den(self) -> int:
        return self.re.denominator

    @property
    def im_sq_num(self) -> int:
        return self.im_sq.numerator

    @property
    def im_sq_den(self) -> int:
        return self.im_sq.denominator


def point_of_form(f: QForm) -> CMPoint:
    return CMPoint(Fraction(f.b, 2 * f.a), Fraction(-f.discriminant, 4 * f.a * f.a), f)


def form_of_point(p: CMPoint) -> QForm:
    return p.form


def reduce_form(f: QForm) -> tuple[QForm, Matrix]:
    """Gauss reduction. Returns (reduced form, g) with τ(reduced) = g·τ(f), g ∈ SL₂(ℤ)."""
    a, b, c = f.a, f.b, f.c
    g = IDENTITY
    while True:
        n = (a - b) // (2 * a)  # brings b into (-a, a]
        if n:
            c = a * n * n + b * n + c
            b = b + 2 * a * n
            g = mat_mul(translation(n), g)
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            g = mat_mul(S_MATRIX, g)
            continue
        return QForm(a, b, c), g


def in_fundamental_domain(z: ExactPoint) -> bool:
    if not (Fraction(-1, 2) < z.re <= Fraction(1, 2)):
        return False
    r = z.abs_sq
    return r > 1 or (r == 1 and z.re >= 0)


def mobius(g: Matrix, z: ExactPoint) -> ExactPoint:
    """Exact g·z as an ExactPoint (the form label, if any, is dropped)."""
    (p, q), (r, s) = g
    # (p z + q)/(r z + s) = (p z + q)(r z̄ + s)/|r z + s|²
    x, y2 = z.re, z.im_sq
    den = (r * x + s) ** 2 + r * r * y2
    re = ((p * x + q) * (r * x + s) + p * r * y2) / den
    return ExactPoint(re, y2 / (den * den))


def _reduce_exact(z: ExactPoint) -> tuple[ExactPoint, Matrix]:
    g = IDENTITY
    while True:
        n = -math.ceil(z.re - Fraction(1, 2))  # re into (-1/2, 1/2]
        if n:
            z = z.translate(n)
            g = mat_mul(translation(n), g)
        r = z.abs_sq
        if r < 1 or (r == 1 and z.re < 0):
            z = z.invert()
            g = mat_mul(S_MATRIX, g)
            continue
        return z, g


def _reduce_ball(z, max_steps: int = 10_000):
    """Reduction of an acb ball; raises UndecidableBoundary when a comparison straddles."""
    from flint import arb

    g = IDENTITY
    half = arb(1) / 2
    for _ in range(max_steps):
        n = -math.ceil(float(z.real.mid()) - 0.5)
        if n:
            z = z + n
            g = mat_mul(translation(n), g)
        x = z.real
        if not ((x > -half and x < half) or (x.is_exact() and x == half)):
            raise UndecidableBoundary(f"real part {x} straddles a vertical side of F")
        r = x * x + z.imag * z.imag
        if r > 1:
            return z, g
        if r < 1 or (r.is_exact() and r == 1 and x < 0):
            z = -1 / z
            g = mat_mul(S_MATRIX, g)
            continue
        if r.is_exact() and r == 1:
            return z, g
        raise UndecidableBoundary(f"|z|^2 = {r} straddles the unit circle")
    raise UndecidableBoundary("reduction did not terminate")


def reduce_to_fundamental(z):
    """Move z into F. Returns (z', g) with z' = g·z.

    Exact points (ExactPoint / CMPoint, or Python complex numbers, which are
    converted exactly) are reduced in rational arithmetic. ``acb`` balls and
    :class:`~cmnc.jeval.BigComplex` values use ball comparisons and raise
    :class:`UndecidableBoundary` when a ball straddles a boundary of F.
    """
    if isinstance(z, CMPoint):
        red, g = reduce_form(z.form)
        return point_of_form(red), g
    if isinstance(z, ExactPoint):
        return _reduce_exact(z)
    if isinstance(z, complex):
        return _reduce_exact(ExactPoint.from_complex(z))
    ball = getattr(z, "ball", z)
    out, g = _reduce_ball(ball)
    if ball is not z:
        return type(z)(out, z.prec_bits), g
    return out, g


def _forms_python(delta: int) -> list[QForm]:
    out = []
    n = -delta
    bmax = math.isqrt(n // 3)
    for b in range(n % 2, bmax + 1, 2):
        ac = (b * b + n) // 4
        for a in range(max(b, 1), math.isqrt(ac) + 1):
            if ac % a:
                continue
            c = ac // a
            if math.gcd(a, b, c) != 1:
                continue
            out.append(QForm(a, b, c))
            if 0 < b < a < c:
                out.append(QForm(a, -b, c))
    return out


def _forms_numpy(delta: int) -> list[QForm]:
    out = []
    n = -delta
    bmax = math.isqrt(n // 3)
    for b in range(n % 2, bmax + 1, 2):
        ac = (b * b + n) // 4
        top = math.isqrt(ac)
        lo = max(b, 1)
        if top < lo:
            continue
        a = np.arange(lo, top + 1, dtype=np.int64)
        a = a[ac % a == 0]
        for ai in a.tolist():
            c = ac // ai
            if math.gcd(ai, b, c) != 1:
                continue
            out.append(QForm(ai, b, c))
            if 0 < b < ai < c:
                out.append(QForm(ai, -b, c))
    return out


@lru_cache(maxsize=4096)
def enumerate_reduced(d: Discriminant | int) -> tuple[QForm, ...]:
    """Reduced primitive forms of discriminant Δ sorted by (a, b); the length is C(Δ)."""
    d = new_discriminant(d)
    big = d.abs > 4 * 10**6 and d.abs < 2**62
    forms = _forms_numpy(d.delta) if big else _forms_python(d.delta)
    return tuple(sorted(forms))


def class_number(d: Discriminant | int) -> int:
    return len(enumerate_reduced(d))


def reduced_points(d: Discriminant | int) -> list[CMPoint]:
    return [point_of_form(f) for f in enumerate_reduced(d)]


def principal_form(d: Discriminant | int) -> QForm:
    d = new_discriminant(d)
    k = d.abs % 2
    return QForm(1, k, (k + d.abs) // 4)
