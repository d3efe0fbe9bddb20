"""Upper bounds for h(x - α), margin reports for the norm inequality, and a constants audit.

Every numeric claim in :func:`constants_audit` is evaluated with outward
rounded arb balls; ``a < b`` passes only when upper(a) < lower(b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from flint import arb, ctx, fmpq

from .classpoly import RATIONAL_SINGULAR_MODULI, norm_diff_rational_alpha, pair_product_log
from .cmcount import EpsQuery, exact_count_eps
from .disc import Discriminant, class_number_bound, discriminants_in, new_discriminant
from .errors import CmncError, HypothesisNotMet, SameModulus, ValidationError
from .forms import class_number, enumerate_reduced, point_of_form
from .heights import height_of_modulus
from .intarith import _small_primes, f_of_disc
from .jeval import lower_float, rational_ball, upper_float

BIG_THRESHOLD = 10**14
MAIN_THRESHOLD = 10**15
NORM_LIMIT = 10**6
Y_SHIFT = "9.78"
CASES = ("part1", "part2", "part3")
AUDIT_PREC = 192


@lru_cache(maxsize=512)
def _q_at(x: str, prec: int) -> arb:
    return rational_ball(x)


def _q(x) -> arb:
    """Ball around the exact decimal or rational x at the working precision."""
    return _q_at(str(x), ctx.prec)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class CertReport:
    case: str
    disc: int
    disc_alpha: int
    X: int
    Y: float | None = None
    A: float | None = None
    C_const: float | None = None
    eps_used: Fraction | None = None
    terms: dict = field(default_factory=dict)
    norm_log: float | None = None
    threshold: float | None = None
    hypothesis_ok: bool = False
    margin: float | None = None
    label: str = "empirical"
    norm_mode: str | None = None
    error: dict | None = None


def case_of(d_alpha: Discriminant | int) -> str:
    d_alpha = new_discriminant(d_alpha)
    return {-4: "part2", -3: "part3"}.get(d_alpha.delta, "part1")


def _case_name(case) -> str:
    name = case if isinstance(case, str) else f"part{case}"
    if name not in CASES:
        raise ValidationError(f"unknown case {case!r}; expected 1, 2 or 3")
    return name


def _class_number_or_bound(d: Discriminant) -> tuple[float, bool]:
    """C(Δ), or the analytic upper bound (flagged) when enumeration is out of reach."""
    if d.abs >= BIG_THRESHOLD:
        return math.floor(class_number_bound(d)), True
    return class_number(d), False


def _A(d: Discriminant, d_alpha: Discriminant) -> float:
    return f_of_disc(d) * math.log(max(d.abs, d_alpha.abs))


# ---------------------------------------------------------------------------
# Upper bounds for h(x - α)


def upper_bound_41(d_alpha, d, eps, prec_bits: int = 128) -> float:
    """Right side of the ε-dependent upper bound for h(x - α), norm term excluded.

    For α = 1728 the counting term uses C_ε(i, Δ); otherwise it sums C_ε(τ_k, Δ)
    over the reduced points τ_k of Δα, with d = C(Δα)·C(Δ) when C(Δα) > 1.
    """
    d_alpha, d = new_discriminant(d_alpha), new_discriminant(d)
    eps = Fraction(eps)
    case = case_of(d_alpha)
    with ctx.workprec(prec_bits):
        e = arb(fmpq(eps.numerator, eps.denominator))
        if case == "part2":
            if not 0 < eps <= Fraction(7, 1000):
                raise HypothesisNotMet(f"ε = {eps} must satisfy 0 < ε <= 7e-3")
            cnt = exact_count_eps(EpsQuery(point_of_form(enumerate_reduced(-4)[0]), eps, d), False).exact_count
            val = 2 * arb(cnt) / class_number(d) * arb(d.abs).log() + 2 * (1 / e).log() - _q("9.9")
            return float(val.mid())
        if case == "part3":
            raise HypothesisNotMet("no ε-dependent bound is stated for α = 0")
        limit = min(Fraction(1, 3 * d_alpha.abs**2), Fraction(1, 10**8))
        if not 0 < eps < limit:
            raise HypothesisNotMet(f"ε = {eps} must satisfy 0 < ε < min(1/(3|Δα|²), 1e-8) = {limit}")
        c_alpha = class_number(d_alpha)
        deg = class_number(d) * c_alpha
        total = 0
        for f in enumerate_reduced(d_alpha):
            total += exact_count_eps(EpsQuery(point_of_form(f), eps, d), False).exact_count
        big = arb(max(d.abs, d_alpha.abs)).log()
        val = 4 * arb(total) / deg * big + (1 / e).log() + 2 * arb(d_alpha.abs).log() - _q("7.783")
        return float(val.mid())


def upper_bound_42(d_alpha, d, prec_bits: int = 128) -> float:
    """The |Δ| >= 10^14 upper bound for h(x - α), norm term excluded.

    C(Δ) is replaced by its analytic upper bound, so the value is a bound on a bound.
    """
    d_alpha, d = new_discriminant(d_alpha), new_discriminant(d)
    if d.abs < BIG_THRESHOLD:
        raise HypothesisNotMet(f"|Δ| = {d.abs} is below 10^14")
    case = case_of(d_alpha)
    c, _ = _class_number_or_bound(d)
    with ctx.workprec(prec_bits):
        a = arb(f_of_disc(d)) * arb(max(d.abs, d_alpha.abs)).log()
        root = arb(d.abs).sqrt()
        if case == "part2":
            val = 4 * a / c + 2 * (a * root / c).log() - _q("2.68")
        elif case == "part3":
            val = 12 * a / c + 3 * (a * root / c).log() - _q("3.77")
        else:
            c_alpha = class_number(d_alpha)
            deg = c_alpha * c
            val = 8 * a * c_alpha / deg + (a * c_alpha * root / deg).log() + 4 * arb(d_alpha.abs).log() + _q("0.33")
    return float(val.mid())


def epsilon_choice(case, d_alpha, d, prec_bits: int = 128) -> Fraction:
    """The ε used to derive the |Δ| >= 10^14 bounds, rounded down to a dyadic rational."""
    case = _case_name(case)
    d_alpha, d = new_discriminant(d_alpha), new_discriminant(d)
    if d.abs < BIG_THRESHOLD:
        raise HypothesisNotMet(f"|Δ| = {d.abs} is below 10^14")
    c, _ = _class_number_or_bound(d)
    with ctx.workprec(prec_bits):
        a = arb(f_of_disc(d)) * arb(max(d.abs, d_alpha.abs)).log()
        root = arb(d.abs).sqrt()
        if case == "part1":
            c_alpha = class_number(d_alpha)
            deg = c_alpha * c
            e = _q("0.0003") * deg / (a * c_alpha * root * d_alpha.abs**2)
            limits = [Fraction(1, 3 * d_alpha.abs**2), Fraction(1, 10**8)]
        elif case == "part2":
            e = _q("0.3") * c / (a * root)
            limits = [Fraction(5, 10**4), Fraction(7, 1000)]
        else:
            raise HypothesisNotMet("no ε choice is made for α = 0")
        eps = Fraction(lower_float(e))
        for lim in limits:
            if not upper_float(e) <= lim:
                raise HypothesisNotMet(f"ε = {float(eps):.3e} exceeds {lim}")
    return eps


# ---------------------------------------------------------------------------
# Main inequality


def _hypothesis(case: str, d: Discriminant, d_alpha: Discriminant, c_alpha: int, h_alpha: float) -> bool:
    if case == "part1":
        log_first = 3.12 + 3 * (math.log(c_alpha) + 4 * math.log(d_alpha.abs) + h_alpha)
        return math.log(d.abs) >= log_first and d.abs >= MAIN_THRESHOLD * c_alpha**6
    return d.abs >= MAIN_THRESHOLD


def _norm(d: Discriminant, d_alpha: Discriminant) -> tuple[float, str, dict]:
    if d_alpha.delta in RATIONAL_SINGULAR_MODULI:
        res = norm_diff_rational_alpha(d, RATIONAL_SINGULAR_MODULI[d_alpha.delta])
        return res.log_abs, res.mode, {}
    res = pair_product_log(d_alpha, d)
    # log|Res| is log|N| when d = C(Δα)C(Δ); with d = C(Δα) it is C(Δ)·log|N|
    return res.log_abs, res.mode, {"norm_s1": res.log_abs / class_number(d)}


def main_theorem_check(d_alpha, d, prec_bits: int = 128) -> CertReport:
    """Evaluate the norm inequality for (Δα, Δ): every term, the threshold and the margin."""
    d_alpha, d = new_discriminant(d_alpha), new_discriminant(d)
    if d.delta == d_alpha.delta and class_number(d) == 1:
        raise SameModulus(f"x = α for Δ = Δα = {d.delta}")
    if d.abs > NORM_LIMIT:
        raise ValidationError(f"exact norms are limited to |Δ| <= {NORM_LIMIT}")
    case = case_of(d_alpha)
    c_alpha = class_number(d_alpha)
    h_alpha = height_of_modulus(d_alpha)
    c = class_number(d)
    x = d.abs
    norm_log, mode, extra = _norm(d, d_alpha)
    with ctx.workprec(prec_bits):
        lx = arb(x).log()
        root = arb(x).sqrt()
        pi = arb.pi()
        a = arb(f_of_disc(d)) * arb(max(x, d_alpha.abs)).log()
        y = (pi * root / c).max(3 / arb(5).sqrt() * lx - _q(Y_SHIFT))
        den = 3 / arb(5).sqrt() * lx - _q(Y_SHIFT)
        if case == "part1":
            cc = arb(c_alpha).log() + 4 * arb(d_alpha.abs).log() + arb(h_alpha) + _q("1.04")
            growth = 8 * a * c_alpha / (pi * root)
            num2 = a.log() + cc
            k3, threshold = 1, root / 2
        elif case == "part2":
            cc = arb(3456).log() - _q("2.67")
            growth = 4 * a / (pi * root)
            num2 = 2 * a.log() + cc
            k3, threshold = 2, root / 2
        else:
            cc = -_q("3.76")
            growth = 12 * a / (pi * root)
            num2 = 3 * a.log() + cc
            k3, threshold = 3, root / 20
        terms = {
            "growth": float(growth.mid()),
            "log_A_plus_C": float((num2 / den).mid()) if den > 0 else None,
            "log_ratio": float((k3 * (y / pi).log() / y).mid()),
            "norm": float((arb(norm_log) / (pi * root)).mid()),
        }
        terms.update(extra)
        thr = float(threshold.mid())
    ok = _hypothesis(case, d, d_alpha, c_alpha, h_alpha)
    return CertReport(
        case=case,
        disc=d.delta,
        disc_alpha=d_alpha.delta,
        X=x,
        Y=float(y.mid()),
        A=float(a.mid()),
        C_const=float(cc.mid()),
        eps_used=None,
        terms=terms,
        norm_log=norm_log,
        threshold=thr,
        hypothesis_ok=ok,
        margin=norm_log - thr,
        label="certified" if ok else "empirical",
        norm_mode=mode,
    )


def certify_range(case, d_alpha, delta_range: Iterable[int] | tuple[int, int], sink: Callable | None = None) -> Iterator[CertReport]:
    """One report per discriminant in the range, in increasing |Δ|; errors are recorded inline."""
    case = _case_name(case)
    d_alpha = new_discriminant(d_alpha)
    if case_of(d_alpha) != case:
        raise ValidationError(f"Δα = {d_alpha.delta} does not belong to {case}")
    if isinstance(delta_range, tuple) and len(delta_range) == 2:
        discs = discriminants_in(*delta_range)
    else:
        discs = sorted((new_discriminant(x) for x in delta_range), key=lambda t: t.abs)
    for d in discs:
        try:
            rep = main_theorem_check(d_alpha, d)
        except CmncError as exc:
            rep = CertReport(case, d.delta, d_alpha.delta, d.abs, error={"reason": exc.reason, "message": str(exc)})
        if sink is not None:
            sink(rep)
        yield rep


# ---------------------------------------------------------------------------
# Constants audit


@dataclass(frozen=True)
class AuditCheck:
    claim_id: str
    topic: str
    lower: float
    upper: float
    relation: str
    bound: str
    passed: bool
    counted: bool = True
    note: str = ""


@dataclass(frozen=True)
class ConstantsAudit:
    checks: tuple[AuditCheck, ...]

    @property
    def counted(self) -> tuple[AuditCheck, ...]:
        return tuple(c for c in self.checks if c.counted)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.counted)

    @property
    def findings(self) -> tuple[AuditCheck, ...]:
        return tuple(c for c in self.checks if not c.counted)


def _decide(value: arb, relation: str, bound: arb) -> bool:
    if relation == "<":
        return bool(value < bound)
    if relation == "<=":
        return bool(value <= bound)
    if relation == ">":
        return bool(value > bound)
    if relation == ">=":
        return bool(value >= bound)
    raise ValueError(relation)


class _Auditor:
    def __init__(self):
        self.checks: list[AuditCheck] = []

    def claim(self, cid, topic, value, relation, bound, counted=True, note=""):
        value = value if isinstance(value, arb) else _q(value)
        b = bound if isinstance(bound, arb) else _q(bound)
        self.checks.append(
            AuditCheck(cid, topic, lower_float(value), upper_float(value), relation, str(bound) if not isinstance(bound, arb) else f"{float(bound.mid()):.10g}", _decide(value, relation, b), counted, note)
        )

    def exact(self, cid, topic, value: Fraction, bound: Fraction, relation="=", note=""):
        ok = {"=": value == bound, "<=": value <= bound, "<": value < bound, ">=": value >= bound, ">": value > bound}[relation]
        self.checks.append(AuditCheck(cid, topic, float(value), float(value), relation, str(bound), ok, True, note))

    def sup(self, cid, topic, result, relation, bound, counted=True, note=""):
        """Record a supremum found by cell enumeration: result = (sup ball, covered)."""
        value, covered = result
        b = _q(bound)
        ok = covered and _decide(value, relation, b)
        self.checks.append(AuditCheck(cid, topic, lower_float(value), upper_float(value), relation, str(bound), ok, counted, note))


def _cell(lo: float, hi: float) -> arb:
    return arb(lo).union(arb(hi))


def _sup_cells(fn: Callable[[arb], arb], lo: float, hi: float, bound: arb, tail: arb | None = None, cells: int = 400, max_depth: int = 24):
    """Upper bound of fn over [lo, hi] by interval cells; cells failing `< bound` are bisected.

    ``tail``, when given, is a bound for fn on [hi, ∞) and is folded in.
    Returns (ball whose upper end bounds sup fn, whether every cell met the bound);
    on failure the ball is that of the first cell that could not be resolved.
    """
    ratio = (hi / lo) ** (1 / cells)
    edges = [lo * ratio**k for k in range(cells)] + [hi]
    stack = [(edges[k], edges[k + 1], 0) for k in range(cells)]
    worst = None
    ok = True
    stack.reverse()
    while stack:
        a, b, depth = stack.pop()
        v = fn(_cell(a, b))
        if not v.upper() < bound:
            if depth < max_depth:
                m = (a + b) / 2
                stack += [(a, m, depth + 1), (m, b, depth + 1)]
                continue
            return v, False
        worst = v if worst is None or v.upper() > worst.upper() else worst
    if tail is not None:
        ok = ok and bool(tail < bound)
        worst = tail if tail.upper() > worst.upper() else worst
    return worst, ok


def primorial_logs(limit: int) -> list[tuple[int, int, arb]]:
    """(k, p_k, log p_k#) for the primes p_k <= limit."""
    out = []
    acc = arb(0)
    for k, p in enumerate(_small_primes(), start=1):
        if p > limit:
            break
        acc += arb(p).log()
        out.append((k, p, acc))
    return out


def robin_constant(limit: int = 100_000) -> tuple[arb, int]:
    """max over primorials N = p_k# >= 26 with p_k <= limit of log log N - log N / k."""
    best, where = None, 0
    for k, p, ln in primorial_logs(limit):
        if k < 3:
            continue
        v = ln.log() - ln / k
        if best is None or v.upper() > best.upper():
            best, where = v, p
    return best, where


def constants_audit(prec_bits: int = AUDIT_PREC) -> ConstantsAudit:
    """Interval verification of every decimal constant used in the bound's derivation."""
    au = _Auditor()
    with ctx.workprec(max(prec_bits, 128)):
        pi = arb.pi()
        s3 = arb(3).sqrt()
        s5 = arb(5).sqrt()
        ln2 = arb(2).log()
        l14 = arb(10**14).log()
        l15 = arb(10**15).log()

        # counting corollary
        au.claim("cor-quadratic-coef", "counting", (48 + 16 * s3) / 3 * _q("1.842"), "<=", "46.488")
        au.exact("cor-exponent-sum", "counting", Fraction("0.25") + Fraction("0.192"), Fraction("0.442"))
        au.exact("cor-exponent-gap", "counting", 14 * (Fraction(1, 2) - Fraction("0.442")), Fraction("0.812"))
        au.claim("cor-sigma0-coef", "counting", 8 / ((s3 - 1).sqrt() * arb(10) ** _q("0.812")), "<=", "1.442")
        au.claim("cor-linear-coef", "counting", (12 + 4 * s3) / 3 + _q("1.442"), "<=", "7.752")

        # ε-dependent upper bound
        au.claim("ub1-small", "upper-bound", arb(2400) / 49 * _q("1e-8"), "<", "5e-7")
        au.claim("ub1-1410-low", "upper-bound", arb(2400) / 49, "<=", "1410")
        au.claim("ub1-1410-high", "upper-bound", _q(1410), "<=", (_q("2.6") * pi).exp() * _q("0.4"))
        au.claim("ub1-log2400", "upper-bound", arb(2400).log(), ">=", "7.783")
        au.claim("ub2-eps-square", "upper-bound", 1 / _q("7e-3") ** 2, ">", "20000")
        au.claim("ub2-log20000", "upper-bound", arb(20000).log(), ">=", "9.9")

        # ε choice for the first case
        au.exact("eps1-primorial", "epsilon", Fraction(2 * 3 * 5 * 7 * 11 * 13 * 17 * 19), Fraction(10**7), "<=")
        au.claim("eps1-third", "epsilon", (6 + 3 * l14) / (10000 * pi * l14) / 256, "<=", "1/3")
        au.claim("eps1-1e-8", "epsilon", (6 + 3 * l14) / (490000 * pi * l14) / 256, "<=", "1e-8")
        tail = (2 + l14) / (_q("18.54") * pi * l14) / 7**4
        au.claim("eps1-quad-term", "epsilon", _q("36e-8") * _q("48.488") * tail, "<=", "0.0005", note="as printed (48.488)")
        au.claim("eps1-quad-term-46", "epsilon", _q("36e-8") * _q("46.488") * tail, "<=", "0.0005", note="with the corollary's 46.488")
        au.exact("eps1-31.008", "epsilon", 4 * Fraction("7.752"), Fraction("31.008"))
        au.claim("eps1-lin-term", "epsilon", _q("0.0003") * _q("31.008") / 49, "<=", "0.0005")
        au.claim("eps1-0.33", "epsilon", _q("0.001") + (arb(10000) / 3).log() - _q("7.783"), "<=", "0.33")

        # ε choice for α = 1728
        au.claim("eps2-5e-4", "epsilon", _q("0.3") * (2 + l14) / (pi * l14) / 256, "<=", "5e-4")
        au.exact("eps2-7e-3", "epsilon", Fraction("5e-4"), Fraction("7e-3"), "<=")
        au.claim("eps2-2.84", "epsilon", 2 * _q("0.3") * _q("7.752") - 2 * _q("0.3").log() - _q("9.9"), "<=", "-2.84")
        au.claim(
            "eps2-2.68",
            "epsilon",
            2 * _q("46.488") * _q("0.09") * (2 + l14) / (_q("18.54") * pi * l14) - _q("2.84"),
            "<=",
            "-2.68",
        )

        # F at |Δ| = 10^14
        ll7 = arb(10**7).log().log()
        au.claim("F-loglog", "F", arb(256), ">=", _q("18.54") * ll7)
        au.claim("F-power", "F", arb(256), ">=", (_q("0.34") * l14 / ll7).exp())

        # first case
        c1, where = robin_constant()
        au.claim("c1", "case-1", c1, "<", "1.1713142", note=f"max over p_k <= 1e5, attained at p = {where}")
        c1b = _q("1.1713142")

        def u0(L):
            return ln2 / 2 / (L.log() - c1b - ln2) + L.log() / L - _q("0.5")

        def du0(L):
            g = L.log() - c1b - ln2
            return -ln2 / 2 / (L * g * g) + (1 - L.log()) / (L * L)

        l15lo, lmax = lower_float(l15), 1e6
        lm = arb(lmax)
        gm = lm.log() - c1b - ln2
        # past L = lmax every summand below is decreasing, so its value at lmax bounds the rest
        u0_tail = ln2 / 2 / gm + lm.log() / lm - _q("0.5")
        au.claim("u0-value", "case-1", u0(l15), "<=", "-0.1908")
        au.sup("u0-sup", "case-1", _sup_cells(u0, l15lo, lmax, _q("-0.1908"), tail=u0_tail), "<=", "-0.1908", note="log X >= log 1e15")
        au.sup("u0-decreasing", "case-1", _sup_cells(du0, l15lo, lmax, arb(0)), "<", "0")
        au.claim("t1-exponent", "case-1", 6 * _q("0.1908"), ">=", "1")
        au.claim("t1-bound", "case-1", 8 / pi * arb(10) ** (15 * _q("-0.1908")), "<=", "0.0035")

        c_low = 4 * arb(7).log() + arb(7).log() / (4 * s5) - _q("5.93") + _q("1.04")
        au.claim("C-lower", "case-1", c_low, ">", "3.11")
        au.sup(
            "g-at-x0",
            "case-1",
            _sup_cells(lambda c: arb(3).log() + c.log() - _q("0.8") * c, 3.11, 100.0, arb(0)),
            "<",
            "0",
            note="C-grid [3.11, 100]",
        )
        au.exact("x0-lower", "case-1", 3 * Fraction("3.11"), Fraction("9.33"), "=")
        au.exact("x0-vs-5/3", "case-1", Fraction("9.33"), Fraction(5, 3), ">=")

        def u2(L):
            return 1 / (3 / s5 - _q(Y_SHIFT) / L)

        def du1(L, c=_q("3.11")):
            g = L.log() - c1b - ln2
            return -ln2 / 2 / (L * g * g) + (1 - L.log() - c) / (L * L)

        def du2(L):
            t = 3 / s5 - _q(Y_SHIFT) / L
            return -_q(Y_SHIFT) / (L * L * t * t)

        l10lo = lower_float(arb(10**10).log())
        u1u2 = (ln2 / 2 / (l15.log() - c1b - ln2) + _q("0.6")) * u2(l15)
        au.claim("u1u2", "case-1", u1u2, "<", "0.7621")
        au.sup("u1-decreasing", "case-1", _sup_cells(du1, l10lo, lmax, arb(0)), "<", "0", note="C = 3.11, the worst case")
        au.sup("u2-decreasing", "case-1", _sup_cells(du2, l10lo, lmax, arb(0)), "<", "0")

        y_min = 3 / s5 * l15 - _q(Y_SHIFT)
        au.claim("t3-value", "case-1", (y_min / pi).log() / y_min, "<", "0.0672")
        au.claim("t3-decreasing", "case-1", y_min, ">", pi * arb(1).exp(), note="log(Y/π)/Y decreases for Y > πe")
        au.exact("sum-0.1672", "case-1", 1 - (Fraction("0.0035") + Fraction("0.7621") + Fraction("0.0672")), Fraction("0.1672"))
        au.claim("final-0.1672", "case-1", _q("0.1672") * pi, ">", "1/2")

        # α = 1728
        c2 = arb(3456).log() - _q("2.67")
        au.exact("C2-identity", "case-2", Fraction("-2.68") + Fraction("0.01"), Fraction("-2.67"))
        au.claim("C2-positive", "case-2", c2, ">", "0")
        au.claim("t1-0.0018", "case-2", 4 * _q("0.0014") / pi, "<", "0.0018")

        def env_log_a(L):
            return ln2 / 2 * L / (L.log() - c1b - ln2) + L.log()

        def t2_env(L):
            return (2 * env_log_a(L) + c2) / (3 / s5 * L - _q(Y_SHIFT))

        den_tail = 3 / s5 - _q(Y_SHIFT) / lm
        t2_tail = (ln2 / gm + (2 * lm.log() + c2) / lm) / den_tail

        au.claim(
            "t2-0.7337-envelope",
            "case-2",
            t2_env(l15),
            "<",
            "0.7337",
            counted=False,
            note="log A envelope evaluated at X = 1e15",
        )
        au.sup("t2-0.7337", "case-2", _t2_hybrid(c2, t2_env, t2_tail, l15lo, lmax), "<", "0.7337", note="exact F below the envelope switch")
        au.exact("sum-0.1973", "case-2", 1 - (Fraction("0.0018") + Fraction("0.7337") + Fraction("0.0672")), Fraction("0.1973"))
        au.claim("final-0.1973", "case-2", _q("0.1973") * pi, ">=", "1/2")
        au.claim(
            "final-0.1973-doubled",
            "case-2",
            (1 - (_q("0.0018") + _q("0.7337") + 2 * _q("0.0672"))) * pi,
            ">=",
            "1/2",
            counted=False,
            note="third term with coefficient 2",
        )

        # α = 0
        au.claim("AX-0.0014", "case-3", (u0(l15) * l15).exp(), "<", "0.0014", note="X^u0(X) at X = 1e15; u0 < 0 decreasing")

        def t2_case3(L):
            return (3 * env_log_a(L) - _q("3.76")) / (3 / s5 * L - _q(Y_SHIFT))

        t3_tail = (3 * ln2 / 2 / gm + 3 * lm.log() / lm) / den_tail
        au.sup("t2-0.7734", "case-3", _sup_cells(t2_case3, l15lo, lmax, _q("0.7734"), tail=t3_tail), "<", "0.7734", note="log X >= log 1e15")
        au.exact("C3-identity", "case-3", Fraction("-3.77") + Fraction("0.01"), Fraction("-3.76"))
        au.claim("C3-logA", "case-3", 3 * arb(30).log() - _q("3.76"), ">", "0")
        au.claim("C3-log1e15", "case-3", l15, ">", "30")
        au.claim("sum-0.019", "case-3", 1 - (12 / pi * _q("0.0014") + _q("0.7734") + 3 * _q("0.0672")), ">", "0.019")
        au.claim("final-0.019", "case-3", _q("0.019") * pi, ">", "1/20")
    return ConstantsAudit(tuple(au.checks))


def _t2_hybrid(c2: arb, envelope: Callable[[arb], arb], tail: arb, l_lo: float, l_max: float):
    """sup over X >= 1e15 of (2 log(F log X) + C)/((3/√5) log X - 9.78) with exact F.

    F = 2^k is constant on [p_k#², p_(k+1)#²) and the ratio decreases there,
    so each piece is bounded by its left end. From some piece on, the log A
    envelope takes over: cells up to l_max, then ``tail`` beyond.
    """
    s5 = arb(5).sqrt()
    bound = _q("0.7337")
    logs = primorial_logs(1000)
    k = max(k for k, _, ln in logs if upper_float(2 * ln) <= l_lo)
    left = arb(l_lo)
    worst = None
    while k + 1 < len(logs):
        val = (2 * (k * arb(2).log() + left.log()) + c2) / (3 / s5 * left - _q(Y_SHIFT))
        worst = val if worst is None or val.upper() > worst.upper() else worst
        nxt = 2 * logs[k][2]  # log p_(k+1)#², start of the next piece
        env, ok = _sup_cells(envelope, lower_float(nxt), l_max, bound, tail=tail)
        if ok:
            return (env if env.upper() > worst.upper() else worst), True
        k, left = k + 1, nxt
    return worst, False
