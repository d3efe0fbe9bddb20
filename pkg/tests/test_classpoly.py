import math
import subprocess
import sys

import pytest
from flint import arb, ctx, fmpz_poly
from hypothesis import given, settings
from hypothesis import strategies as st

from cmnc.classpoly import (
    RATIONAL_SINGULAR_MODULI,
    ClassPolyCache,
    compute_hilbert_poly,
    eval_at_integer,
    format_poly,
    hilbert_poly,
    norm_diff_rational_alpha,
    pair_product_log,
    parse_poly,
    rational_singular_modulus,
    resultant,
    serialize_poly,
)
from cmnc.errors import CorruptCacheEntry, SameModulus, ZeroNorm
from cmnc.forms import enumerate_reduced, point_of_form
from cmnc.jeval import eval_j
from oracles import flint_hilbert

KNOWN = {
    -3: "X",
    -4: "X - 1728",
    -7: "X + 3375",
    -8: "X - 8000",
    -11: "X + 32768",
    -15: "X^2 + 191025X - 121287375",
    -23: "X^3 + 3491750X^2 - 5151296875X + 12771880859375",
}


@pytest.mark.parametrize("delta, text", sorted(KNOWN.items(), reverse=True))
def test_known_polynomials(delta, text):
    h = hilbert_poly(delta)
    assert str(h) == text
    assert h.max_rounding_residual < 0.25 and h.max_imag_residual < 0.25


@pytest.mark.parametrize("delta", [-3, -4, -15, -20, -23, -39, -71, -99, -164, -388, -999, -1996, -4000])
def test_matches_flint(delta):
    assert list(hilbert_poly(delta).coeffs) == flint_hilbert(delta)


def test_recompute_at_higher_precision_is_identical():
    for delta in (-71, -356):
        h = compute_hilbert_poly(delta)
        h2 = compute_hilbert_poly(delta, h.prec_bits_used + 64)
        assert h.coeffs == h2.coeffs


@pytest.mark.slow
def test_roots_match_j_values():
    # every Δ in [-2000, -3]: each certified root ball of H_Δ overlaps exactly one
    # j-value, and |H_Δ(j)| is tiny against the evaluation scale Σ|c_k||j|^k
    for delta in range(-3, -2001, -1):
        if delta % 4 not in (0, 1):
            continue
        h = hilbert_poly(delta)
        forms = enumerate_reduced(delta)
        assert h.degree == len(forms)
        poly = fmpz_poly(list(h.coeffs))
        with ctx.workprec(200):
            roots = [r for r, _ in poly.complex_roots()]
            js = [eval_j(point_of_form(f), 128).value.ball for f in forms]
            for jv in js:
                assert sum(1 for r in roots if r.overlaps(jv)) == 1, delta
                m = abs(jv)
                scale = arb(1).max(sum(abs(c) * m**k for k, c in enumerate(h.coeffs)))
                assert abs(poly(jv)) < scale * arb(2) ** -20, delta


@pytest.mark.parametrize("coeffs, text", [((0, 1), "X"), ((-1728, 1), "X - 1728"), ((5, -1, 1), "X^2 - X + 5"), ((), "0")])
def test_format_poly(coeffs, text):
    assert format_poly(coeffs) == text


@given(st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=6), st.integers(-10**4, 10**4))
@settings(max_examples=200, deadline=None)
def test_eval_at_integer_matches_flint(coeffs, m):
    assert eval_at_integer(coeffs, m) == int(fmpz_poly(coeffs)(m))


@given(
    st.lists(st.integers(-50, 50), min_size=2, max_size=6).filter(lambda c: c[-1] != 0),
    st.lists(st.integers(-50, 50), min_size=2, max_size=6).filter(lambda c: c[-1] != 0),
)
@settings(max_examples=200, deadline=None)
def test_resultant_matches_flint(a, b):
    r = resultant(a, b)
    assert r == int(fmpz_poly(a).resultant(fmpz_poly(b)))
    assert abs(r) == abs(resultant(b, a))


def test_resultant_of_class_polynomials():
    for d1, d2 in ((-15, -23), (-20, -47), (-7, -71)):
        a, b = hilbert_poly(d1).coeffs, hilbert_poly(d2).coeffs
        assert abs(resultant(a, b)) == abs(resultant(b, a)) == abs(int(fmpz_poly(list(a)).resultant(fmpz_poly(list(b)))))


@pytest.mark.parametrize("delta, alpha, norm", [(-4, 0, 1728), (-8, 1728, 6272)])
def test_norm_diff_rational_alpha(delta, alpha, norm):
    r = norm_diff_rational_alpha(delta, alpha)
    assert r.exact == norm and r.log_abs == pytest.approx(math.log(norm))


def test_norm_zero():
    with pytest.raises(ZeroNorm):
        norm_diff_rational_alpha(-3, 0)
    with pytest.raises(ZeroNorm):
        norm_diff_rational_alpha(-163, RATIONAL_SINGULAR_MODULI[-163])


def test_norm_positive_over_range():
    for delta in range(-3, -400, -1):
        if delta % 4 not in (0, 1):
            continue
        for d_alpha, alpha in RATIONAL_SINGULAR_MODULI.items():
            if d_alpha == delta:
                continue
            assert norm_diff_rational_alpha(delta, alpha).exact >= 1


def test_pair_product_examples():
    assert pair_product_log(-3, -4).exact == 1728
    assert pair_product_log(-7, -8).exact == 11375
    r = pair_product_log(-15, -4)
    assert r.exact == abs(eval_at_integer(hilbert_poly(-15), 1728))
    assert abs(r.numeric_log - r.log_abs) < 1e-6 * r.log_abs
    with pytest.raises(SameModulus):
        pair_product_log(-23, -23)


def test_rational_singular_moduli_table():
    for delta, alpha in RATIONAL_SINGULAR_MODULI.items():
        assert len(enumerate_reduced(delta)) == 1
        assert rational_singular_modulus(delta) == alpha
    assert rational_singular_modulus(-23) is None
    ones = [n for n in range(3, 200) if (-n) % 4 in (0, 1) and len(enumerate_reduced(-n)) == 1]
    assert sorted(-d for d in RATIONAL_SINGULAR_MODULI) == ones


def test_serialize_format():
    h = hilbert_poly(-15)
    text = serialize_poly(h)
    lines = text.split("\n")
    assert lines[:4] == ["HCP v1", "disc=-15", "degree=2", f"prec_bits={h.prec_bits_used}"]
    assert lines[4].startswith("sha256=") and len(lines[4]) == 7 + 64
    assert lines[5:] == ["-121287375", "191025", "1", ""]
    assert parse_poly(text).coeffs == h.coeffs


@pytest.mark.parametrize(
    "mutate",
    [
        lambda t: t.replace("191025", "191026"),
        lambda t: t.replace("HCP v1", "HCP v2"),
        lambda t: t.replace("degree=2", "degree=3"),
        lambda t: t[:-5],
        lambda t: "",
    ],
)
def test_parse_rejects_tampering(mutate):
    text = serialize_poly(hilbert_poly(-15))
    with pytest.raises(CorruptCacheEntry):
        parse_poly(mutate(text))


def test_cache_round_trip(cache_dir):
    cache = ClassPolyCache(cache_dir)
    assert cache.get(-15) is None
    h = hilbert_poly(-15)
    path = cache.put(h)
    assert path.name == "hcp_15.txt"
    assert not path.with_name("hcp_15.txt.tmp").exists()
    first = path.read_bytes()
    assert cache.get(-15).coeffs == h.coeffs
    cache.put(cache.get(-15))
    assert path.read_bytes() == first


def test_cache_tamper_is_detected_and_repaired(cache_dir):
    cache = ClassPolyCache(cache_dir)
    h = cache.hilbert_poly(-23)
    path = cache.path(-23)
    path.write_text(path.read_text().replace("3491750", "3491751"))
    with pytest.raises(CorruptCacheEntry):
        cache.get(-23)
    assert cache.hilbert_poly(-23).coeffs == h.coeffs
    assert cache.get(-23).coeffs == h.coeffs


def test_cache_wrong_discriminant(cache_dir):
    cache = ClassPolyCache(cache_dir)
    cache.put(hilbert_poly(-15))
    cache.path(-20).write_text(cache.path(-15).read_text())
    with pytest.raises(CorruptCacheEntry):
        cache.get(-20)


def test_cache_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("CMNC_CACHE", str(tmp_path / "env"))
    cache = ClassPolyCache(tmp_path / "arg")
    assert cache.directory == tmp_path / "env"


def test_cache_survives_process_restart(cache_dir):
    code = (
        "import sys; from cmnc.classpoly import ClassPolyCache; "
        "print(ClassPolyCache(sys.argv[1]).hilbert_poly(-47).coeffs)"
    )
    outs = [subprocess.run([sys.executable, "-c", code, str(cache_dir)], capture_output=True, text=True, check=True).stdout for _ in range(2)]
    assert outs[0] == outs[1]
    assert eval(outs[0]) == tuple(flint_hilbert(-47))
