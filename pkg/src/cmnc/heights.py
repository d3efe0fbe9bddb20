"""Weil heights of singular moduli and of x - α, with lower bounds and separation checks.

Singular moduli are algebraic integers, so the height is the average of
log⁺|x_k| over the archimedean conjugates x_k = j(τ_k), τ_k running over the
reduced CM points of Δ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from flint import acb, arb, ctx

from .classpoly import RATIONAL_SINGULAR_MODULI, eval_at_integer, hilbert_poly
from .disc import Discriminant, new_discriminant
from .errors import HypothesisNotMet, SameModulus, ZeroNorm
from .forms import IDENTITY, S_MATRIX, QForm, enumerate_reduced, mat_mul, mobius, point_of_form, translation
from .jeval import eval_j_ball, j_values, lower_float, upper_float

MAX_REFINE_BITS = 4096
LOG2 = math.log(2)
IM_HIGH_SQ = Fraction(169, 100)  # Im τ >= 1.3


@dataclass(frozen=True)
class HeightReport:
    disc: Discriminant
    h: float
    per_conjugate: tuple[tuple[QForm, float], ...]
    err: float
    alpha: int | None = None
    h_inverse_form: float | None = None
    norm_log: float | None = None


def _log_plus(x: acb, tau=None, prec_bits: int = 128) -> arb:
    """log max(1, |x|) as a ball; straddling |x| = 1 is refined, then bracketed."""
    bits = prec_bits
    while True:
        m = abs(x)
        if m > 1:
            return m.log()
        if m < 1:
            return arb(0)
        if tau is None or bits >= MAX_REFINE_BITS:
            hi = max(0.0, upper_float(m.log())) if m.upper() > 0 else 0.0
            return arb(hi / 2, hi / 2)
        bits *= 2
        x = tau(bits)


def _conjugate_terms(d: Discriminant, prec_bits: int, shift: int = 0):
    """(form, log⁺|j(τ) - shift| ball) for every reduced form of Δ."""
    forms = enumerate_reduced(d)
    out = []
    cache: dict = {}
    with ctx.workprec(prec_bits + 32):
        for f in forms:
            key = (f.a, abs(f.b), f.c)
            if key not in cache:
                p = point_of_form(QForm(*key))

                def tau(bits, p=p):
                    return eval_j_ball(p, bits)[0] - shift

                cache[key] = _log_plus(tau(prec_bits), tau, prec_bits)
            out.append((f, cache[key]))
    return out


def height_singular(d: Discriminant | int, prec_bits: int = 128) -> HeightReport:
    """h(x) = (1/C(Δ)) Σ_k log⁺|x_k|."""
    d = new_discriminant(d)
    terms = _conjugate_terms(d, prec_bits)
    with ctx.workprec(prec_bits + 32):
        total = arb(0)
        for _, t in terms:
            total += t
        h = total / len(terms)
    per = tuple((f, float(t.mid())) for f, t in terms)
    return HeightReport(d, max(0.0, float(h.mid())), per, upper_float(h.rad()))


def h_rational(alpha: int) -> float:
    """Height of the rational integer α."""
    return math.log(abs(alpha)) if abs(alpha) > 1 else 0.0


def height_diff_rational(d: Discriminant | int, alpha: int, prec_bits: int = 128) -> HeightReport:
    """h(x - α) for rational α, by the direct sum and by the inverse form plus the exact norm."""
    d = new_discriminant(d)
    h_poly = hilbert_poly(d)
    n = eval_at_integer(h_poly, alpha)
    if n == 0:
        raise ZeroNorm(f"x = α = {alpha}: H_{d.delta}({alpha}) = 0")
    forms = enumerate_reduced(d)
    deg = len(forms)
    with ctx.workprec(prec_bits + 32):
        direct = arb(0)
        inverse = arb(0)
        per = []
        for f, x in zip(forms, j_values(forms, prec_bits)):
            lp = _log_plus(x - alpha)
            lm = _log_plus(1 / (x - alpha))
            direct += lp
            inverse += lm
            per.append((f, float(lp.mid())))
        norm_log = arb(abs(n)).log()
        h_direct = direct / deg
        h_inverse = (inverse + norm_log) / deg
    err = upper_float(h_direct.rad() + h_inverse.rad())
    return HeightReport(
        d, float(h_direct.mid()), tuple(per), err, alpha, float(h_inverse.mid()), float(norm_log.mid())
    )


def lower_bound_51(d: Discriminant | int) -> float:
    """(π|Δ|^½ - 0.01)/C(Δ), valid for |Δ| >= 16."""
    d = new_discriminant(d)
    if d.abs < 16:
        raise HypothesisNotMet(f"|Δ| = {d.abs} < 16")
    return (math.pi * math.sqrt(d.abs) - 0.01) / len(enumerate_reduced(d))


def lower_bound_52_branches(d: Discriminant | int) -> tuple[float, float]:
    d = new_discriminant(d)
    lg = math.log(d.abs)
    return 3 / math.sqrt(5) * lg - 9.79, lg / (4 * math.sqrt(5)) - 5.93


def lower_bound_52(d: Discriminant | int) -> float:
    return max(lower_bound_52_branches(d))


def height_of_modulus(d_alpha: Discriminant | int, prec_bits: int = 128) -> float:
    d_alpha = new_discriminant(d_alpha)
    if d_alpha.delta in RATIONAL_SINGULAR_MODULI:
        return h_rational(RATIONAL_SINGULAR_MODULI[d_alpha.delta])
    return height_singular(d_alpha, prec_bits).h


def diff_height_lower(d: Discriminant | int, d_alpha: Discriminant | int) -> float:
    """max(applicable lower bounds for h(x)) - h(α) - log 2."""
    d = new_discriminant(d)
    bounds = [lower_bound_52(d)]
    if d.abs >= 16:
        bounds.append(lower_bound_51(d))
    return max(bounds) - height_of_modulus(d_alpha) - LOG2


# ---------------------------------------------------------------------------
# Separation


@dataclass(frozen=True)
class SeparationReport:
    disc: Discriminant
    disc_alpha: Discriminant
    min_distance: float
    margins: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(m >= 0 for m in self.margins.values())


_NEIGHBOUR_MATRICES = tuple(
    sorted(
        {
            mat_mul(translation(n), g)
            for n in (-1, 0, 1)
            for g in (IDENTITY, S_MATRIX, mat_mul(S_MATRIX, translation(1)), mat_mul(S_MATRIX, translation(-1)))
        }
    )
)


def nearest_orbit_distance(z, tau) -> float:
    """Euclidean distance from τ to the nearest point of SL₂(ℤ)z among the translates of F adjacent to τ."""
    tc = complex(tau)
    best = math.inf
    for g in _NEIGHBOUR_MATRICES:
        w = complex(mobius(g, z))
        best = min(best, abs(w - tc))
    return best


def _log_margin(value: arb, bound: float) -> float:
    """log(value) - log(bound), using the lower end of the value ball."""
    lo = lower_float(value)
    if lo <= 0:
        return -math.inf
    return math.log(lo) - math.log(bound)


def separation_audit(d: Discriminant | int, d_alpha: Discriminant | int, prec_bits: int = 128) -> SeparationReport:
    """Worst log-margin, over all conjugate pairs, of each applicable separation inequality."""
    d, d_alpha = new_discriminant(d), new_discriminant(d_alpha)
    if d.delta == d_alpha.delta:
        raise SameModulus("separation audit needs distinct discriminants")
    forms_x = enumerate_reduced(d)
    forms_a = enumerate_reduced(d_alpha)
    big = max(d.abs, d_alpha.abs)
    margins: dict[str, float] = {"thm52": math.inf}
    min_dist = math.inf
    with ctx.workprec(prec_bits + 32):
        xs = j_values(forms_x, prec_bits)
        alphas = j_values(forms_a, prec_bits)
        for fa, alpha in zip(forms_a, alphas):
            tau = point_of_form(fa)
            is_i = fa == QForm(1, 0, 1)
            is_z6 = fa == QForm(1, 1, 1)
            for fx, x in zip(forms_x, xs):
                diff = abs(x - alpha)
                min_dist = min(min_dist, float(diff.mid()))
                margins["thm52"] = min(margins["thm52"], _log_margin(diff, 800 / big**4))
                z = point_of_form(fx)
                if is_i:
                    margins["lemma53_disc"] = min(margins.get("lemma53_disc", math.inf), _log_margin(diff, 2000 / d.abs**2))
                    dz = abs(complex(z) - 1j)
                    margins["lemma53_dist"] = min(
                        margins.get("lemma53_dist", math.inf), _log_margin(diff, 20000 * min(dz, 0.01) ** 2)
                    )
                if tau.im_sq >= IM_HIGH_SQ:
                    dz = nearest_orbit_distance(z, tau)
                    margins["lemma51_high"] = min(
                        margins.get("lemma51_high", math.inf),
                        _log_margin(diff, math.exp(2.6 * math.pi) * min(0.4 * dz, 0.04)),
                    )
                elif not (is_i or is_z6):
                    dz = nearest_orbit_distance(z, tau)
                    bound = min(5e-7, 800 / d_alpha.abs**4, 2400 / d_alpha.abs**2 * dz)
                    margins["lemma51_low"] = min(margins.get("lemma51_low", math.inf), _log_margin(diff, bound))
    return SeparationReport(d, d_alpha, min_dist, margins)


# ---------------------------------------------------------------------------
# Bulk sweeps


def all_j_values(max_abs: int, prec_bits: int = 128):
    """j at every reduced CM point with |Δ| <= max_abs.

    Returns (discs, values, radii): numpy arrays of the discriminant of each
    point, its complex128 j-value and an upper bound for the float error.
    """
    discs, vals, rads = [], [], []
    for n in range(3, max_abs + 1):
        if (-n) % 4 not in (0, 1):
            continue
        forms = enumerate_reduced(-n)
        for x in j_values(forms, prec_bits):
            c = complex(float(x.real.mid()), float(x.imag.mid()))
            discs.append(-n)
            vals.append(c)
            rads.append(upper_float(x.real.rad() + x.imag.rad()) + abs(c) * 2.3e-16)
    return np.array(discs, dtype=np.int64), np.array(vals, dtype=np.complex128), np.array(rads)


def pairwise_separation_sweep(discs, vals, rads, block: int = 256):
    """Check |x - α| >= 800 max(|Δ|, |Δα|)^-4 for all pairs of distinct points.

    Returns (violations, worst log-margin, number of pairs). A pair whose
    float difference cannot be decided is reported as a violation.
    """
    n = len(vals)
    absd = np.abs(discs).astype(np.float64)
    worst = math.inf
    violations = []
    pairs = 0
    for s in range(0, n, block):
        v = vals[s : s + block, None]
        r = rads[s : s + block, None]
        ad = absd[s : s + block, None]
        diff = np.abs(v - vals[None, :])
        err = r + rads[None, :] + diff * 2.3e-16
        bound = 800.0 / np.maximum(ad, absd[None, :]) ** 4
        idx = np.arange(s, min(s + block, n))[:, None]
        mask = np.arange(n)[None, :] > idx
        pairs += int(mask.sum())
        lower = diff - err
        with np.errstate(divide="ignore", invalid="ignore"):
            margin = np.where(mask, np.log(np.maximum(lower, 0)) - np.log(bound), np.inf)
        worst = min(worst, float(margin.min()))
        bad = np.argwhere(mask & (lower < bound * (1 + 1e-9)))
        for i, j in bad:
            violations.append((int(s + i), int(j)))
    return violations, worst, pairs
