import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmnc.disc import (
    class_number_bound,
    discriminants_in,
    is_discriminant,
    is_squarefree,
    new_discriminant,
    quadratic_divisors,
)
from cmnc.errors import DiscriminantError
from cmnc.intarith import divisors
from oracles import naive_fundamental


@pytest.mark.parametrize(
    "delta, D, f, ft",
    [(-7, -7, 1, 1), (-12, -3, 2, 2), (-16, -4, 2, 4), (-3, -3, 1, 1), (-4, -4, 1, 2), (-144, -4, 6, 12)],
)
def test_new_discriminant_examples(delta, D, f, ft):
    d = new_discriminant(delta)
    assert (d.d_fund, d.f, d.f_mod) == (D, f, ft)
    assert d.abs == -delta and int(d) == delta


@pytest.mark.parametrize("delta, divs", [(-7, [1]), (-16, [1, 2, 4]), (-144, [1, 2, 3, 4, 6, 12])])
def test_quadratic_divisors_examples(delta, divs):
    assert quadratic_divisors(new_discriminant(delta)) == divs


@pytest.mark.parametrize("delta, reason", [(0, "not-negative"), (5, "not-negative"), (-1, "invalid-residue"), (-6, "invalid-residue")])
def test_rejections(delta, reason):
    with pytest.raises(DiscriminantError) as exc:
        new_discriminant(delta)
    assert exc.value.reason == reason


def test_rejection_set_exact():
    for n in range(-10**4, 10**4 + 1):
        accepted = True
        try:
            new_discriminant(n)
        except DiscriminantError:
            accepted = False
        assert accepted == (n < 0 and n % 4 in (0, 1)) == is_discriminant(n)


def test_non_integer_rejected():
    with pytest.raises(DiscriminantError):
        new_discriminant(-3.0)
    with pytest.raises(DiscriminantError):
        new_discriminant(True)


@given(st.integers(1, 10**6).map(lambda n: -n).filter(lambda d: d % 4 in (0, 1)))
@settings(max_examples=300, deadline=None)
def test_round_trip_and_fundamental(delta):
    d = new_discriminant(delta)
    assert d.f**2 * d.d_fund == delta
    assert d.d_fund % 4 in (0, 1)
    core = d.d_fund // 4 if d.d_fund % 4 == 0 else d.d_fund
    assert is_squarefree(core)
    if d.d_fund % 4 == 0:
        assert core % 4 in (2, 3)


@given(st.integers(3, 20000).map(lambda n: -n).filter(lambda d: d % 4 in (0, 1)))
@settings(max_examples=150, deadline=None)
def test_matches_naive_fundamental(delta):
    d = new_discriminant(delta)
    assert (d.d_fund, d.f) == naive_fundamental(delta)


def test_square_divisors_are_divisors_of_modified_conductor():
    # every Δ in [-10^5, -3]: {d : d² | Δ} = divisors of f̃
    for n in range(3, 10**5 + 1):
        if (-n) % 4 not in (0, 1):
            continue
        sq = [k for k in range(1, math.isqrt(n) + 1) if n % (k * k) == 0]
        assert sq == divisors(new_discriminant(-n).f_mod), n


def test_discriminants_in_order():
    ds = discriminants_in(-20, -3)
    assert [d.delta for d in ds] == [-3, -4, -7, -8, -11, -12, -15, -16, -19, -20]
    assert discriminants_in(-3, -20) == ds
    assert discriminants_in(-2, -1) == []


def test_class_number_bound_value():
    d = new_discriminant(-23)
    assert class_number_bound(d) == pytest.approx(math.sqrt(23) * (2 + math.log(23)) / math.pi)
