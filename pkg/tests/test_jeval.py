import math
import random
from fractions import Fraction

import pytest
from flint import acb, arb, ctx
from hypothesis import given, settings
from hypothesis import strategies as st

from cmnc.classpoly import RATIONAL_SINGULAR_MODULI
from cmnc.errors import DomainError
from cmnc.forms import ExactPoint, QForm, enumerate_reduced, point_of_form
from cmnc.jeval import eval_j, eval_j_any, eval_j_ball, eval_q, j_values, lower_float, rational_ball, upper_float
from oracles import flint_j

I = ExactPoint(0, 1)
RHO = ExactPoint(Fraction(1, 2), Fraction(3, 4))


def test_eval_q_examples():
    with ctx.workprec(200):
        q = eval_q(I, 128).ball
        assert q.real.overlaps((-2 * arb.pi()).exp()) and abs(q.imag) < arb(2) ** -120
        q = eval_q(RHO, 128).ball
        assert abs(q).overlaps((-arb.pi() * arb(3).sqrt()).exp())
        assert q.real < 0 and abs(q.imag) < arb(2) ** -120
        q = eval_q(ExactPoint(0, 4), 128).ball
        assert q.real.overlaps((-4 * arb.pi()).exp())


def test_eval_q_rejects_points_outside_domain():
    with pytest.raises(DomainError):
        eval_q(ExactPoint(0, Fraction(1, 4)))
    with pytest.raises(DomainError):
        eval_j(ExactPoint(Fraction(-1, 2), 1))


def test_special_values():
    j = eval_j(I, 256)
    assert abs(j.value.ball - 1728) < arb(2) ** -200
    assert j.value.contains(1728)
    j = eval_j(RHO, 256)
    assert abs(j.value.ball) < arb(2) ** -200


@pytest.mark.parametrize("form, value", [((2, 2, 1), 1728), ((1, 1, 1), 0), ((4, 2, 1), 54000), ((1, 0, 4), 287496), ((2, 0, 1), 8000)])
def test_eval_j_any(form, value):
    f = QForm(*form)
    j = eval_j_any(point_of_form(f))
    assert j.value.contains(value)


def test_class_number_one_values_round_to_integers():
    for delta, alpha in RATIONAL_SINGULAR_MODULI.items():
        (f,) = enumerate_reduced(delta)
        ball = eval_j(point_of_form(f), 128).value.ball
        assert ball.real.unique_fmpz() == alpha
        assert abs(ball.imag) < arb(2) ** -60


def test_error_target_met():
    for delta in (-23, -71, -163, -999):
        for f in enumerate_reduced(delta):
            jv = eval_j(point_of_form(f), 100)
            scale = max(1.0, upper_float(abs(jv.value.ball)))
            assert jv.value.err_abs <= 2.0 ** (8 - 100) * scale


def test_agrees_with_flint_modular_j():
    for delta in (-23, -47, -164, -1999, -4000):
        for f in enumerate_reduced(delta):
            p = point_of_form(f)
            ours = eval_j(p, 160).value.ball
            theirs = flint_j(p.re, p.im_sq, 400)
            assert ours.overlaps(theirs)


def _random_reduced_form(rng: random.Random, max_abs: int) -> QForm:
    while True:
        a = rng.randint(1, math.isqrt(max_abs // 3))
        b = rng.randint(-a + 1, a)
        cmax = (max_abs + b * b) // (4 * a)
        if cmax < a:
            continue
        c = rng.randint(a, cmax)
        if math.gcd(a, b, c) != 1 or (b < 0 and c == a):
            continue
        return QForm(a, b, c)


@given(st.randoms(use_true_random=False))
@settings(max_examples=40, deadline=None)
def test_precision_doubling(rng):
    f = _random_reduced_form(rng, 10**5)
    p = point_of_form(f)
    lo = eval_j(p, 96)
    hi = eval_j(p, 192)
    with ctx.workprec(400):
        diff = abs(lo.value.ball.mid() - hi.value.ball.mid())
    assert upper_float(diff) <= lo.value.err_abs + hi.value.err_abs
    assert hi.value.err_abs <= lo.value.err_abs


@given(st.randoms(use_true_random=False))
@settings(max_examples=40, deadline=None)
def test_conjugate_symmetry(rng):
    f = _random_reduced_form(rng, 10**4)
    if f.b in (0, f.a) or f.a == f.c:
        return
    j1 = eval_j(point_of_form(f), 128).value
    j2 = eval_j(point_of_form(QForm(f.a, -f.b, f.c)), 128).value
    # enough bits that subtracting the midpoints adds no rounding at |j| ~ 10^35
    with ctx.workprec(1000):
        diff = abs(j1.ball.mid() - j2.ball.mid().conjugate())
    assert upper_float(diff) <= 2 * (j1.err_abs + j2.err_abs)


def test_truncation_soundness():
    # a larger working precision also means more series terms; results stay within the reported error
    from cmnc.jeval import default_working_prec

    for f in enumerate_reduced(-719)[:10]:
        p = point_of_form(f)
        ball, terms, wp = eval_j_ball(p, 128)
        assert wp == default_working_prec(p, 128)
        big, terms2, _ = eval_j_ball(p, 256)
        assert terms2 > terms
        assert ball.overlaps(big)


def test_j_values_uses_conjugation():
    forms = enumerate_reduced(-23)
    vals = j_values(forms, 128)
    assert vals[1].overlaps(vals[2].conjugate())
    with ctx.workprec(128):
        s = vals[0] + vals[1] + vals[2]
    assert s.real.contains(-3491750)


def test_rational_ball_contains_exact_decimal():
    b = rational_ball("46.488")
    assert lower_float(b) <= 46.488 <= upper_float(b)
    with ctx.workprec(64):
        assert (rational_ball("0.1") * 10).contains(1)
    assert isinstance(b, arb)


def test_jvalue_fields():
    jv = eval_j(point_of_form(QForm(2, 1, 3)), 128)
    assert jv.tau.form == QForm(2, 1, 3)
    assert jv.terms_used > 0 and jv.working_prec >= 128
    assert isinstance(jv.value.ball, acb)
    z = complex(jv.value)
    assert abs(z - complex(737.849984966684, -1764.018938612746)) < 1e-6
