"""Hilbert class polynomials, exact resultants and norms of x - α.

H_Δ is built from numerical j-values as a product of real linear and
quadratic factors, each coefficient is rounded to the unique integer inside
its ball, and the whole construction is repeated 64 bits higher; both runs
must agree. The on-disk cache uses a small checksummed text format.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from flint import arb, arb_poly, ctx

from .disc import Discriminant, new_discriminant
from .errors import ComputationError, CorruptCacheEntry, PrecisionExhausted, SameModulus, ZeroNorm
from .forms import QForm, enumerate_reduced, point_of_form
from .jeval import eval_j_ball, upper_float

RESIDUAL_LIMIT = 0.25
MAX_DOUBLINGS = 4
CACHE_ENV = "CMNC_CACHE"


@dataclass(frozen=True)
class ClassPolynomial:
    """Monic H_Δ; ``coeffs`` run from the constant term up to the leading 1."""

    disc: Discriminant
    coeffs: tuple[int, ...]
    prec_bits_used: int
    max_rounding_residual: float | None = None
    max_imag_residual: float | None = None

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        return eval_at_integer(self, x)

    def __str__(self) -> str:
        return format_poly(self.coeffs)


@dataclass(frozen=True)
class NormResult:
    log_abs: float
    exact: int | None
    mode: str
    numeric_log: float | None = field(default=None, compare=False)


def format_poly(coeffs, var: str = "X") -> str:
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{mag}{mono}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts) if parts else "0"


def eval_at_integer(h, m: int) -> int:
    """Exact Horner evaluation; ``h`` is a ClassPolynomial or a coefficient list."""
    coeffs = h.coeffs if isinstance(h, ClassPolynomial) else h
    acc = 0
    for c in reversed(coeffs):
        acc = acc * m + c
    return acc


def _initial_bits(d: Discriminant, forms) -> int:
    size = math.pi * math.sqrt(d.abs) * sum(1 / f.a for f in forms) / math.log(2)
    return math.ceil(size) + 10 * len(forms) + 64


def _product(polys: list) -> arb_poly:
    while len(polys) > 1:
        polys = [polys[i] * polys[i + 1] if i + 1 < len(polys) else polys[i] for i in range(0, len(polys), 2)]
    return polys[0]


def _build(forms: tuple[QForm, ...], bits: int):
    """One numerical construction; returns (coeffs, rounding residual, imag residual) or None."""
    present = set(forms)
    factors = []
    imag_res = 0.0
    with ctx.workprec(bits + 32):
        for f in forms:
            if f.b < 0:
                continue
            j, _, _ = eval_j_ball(point_of_form(f), bits)
            if f.b > 0 and QForm(f.a, -f.b, f.c) in present:
                re = j.real
                factors.append(arb_poly([re * re + j.imag * j.imag, -2 * re, 1]))
            else:
                imag_res = max(imag_res, upper_float(abs(j.imag.mid()) + j.imag.rad()))
                factors.append(arb_poly([-j.real, 1]))
        poly = _product(factors)
        coeffs = []
        round_res = 0.0
        for x in poly.coeffs():
            n = (x.mid() + arb(1) / 2).floor().unique_fmpz()
            if n is None:
                return None
            res = upper_float(abs(x.mid() - n) + x.rad())
            round_res = max(round_res, res)
            coeffs.append(int(n))
    if round_res >= RESIDUAL_LIMIT or imag_res >= RESIDUAL_LIMIT:
        return None
    return tuple(coeffs), round_res, imag_res


def compute_hilbert_poly(d: Discriminant | int, prec_bits: int | None = None) -> ClassPolynomial:
    d = new_discriminant(d)
    forms = enumerate_reduced(d)
    bits = prec_bits or _initial_bits(d, forms)
    for _ in range(MAX_DOUBLINGS + 1):
        first = _build(forms, bits)
        if first is not None:
            second = _build(forms, bits + 64)
            if second is not None and second[0] == first[0]:
                coeffs, round_res, imag_res = first
                if coeffs[-1] != 1 or len(coeffs) != len(forms) + 1:
                    raise ComputationError(f"H_{d.delta} is not monic of degree C(Δ)")
                return ClassPolynomial(d, coeffs, bits, round_res, imag_res)
        bits *= 2
    raise PrecisionExhausted(f"H_{d.delta} could not be certified")


@lru_cache(maxsize=8192)
def hilbert_poly(d: Discriminant | int) -> ClassPolynomial:
    """Certified H_Δ (memoized in-process)."""
    return compute_hilbert_poly(new_discriminant(d))


# ---------------------------------------------------------------------------
# Exact resultants


def _trim(p: list[int]) -> list[int]:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _deg(p: list[int]) -> int:
    return -1 if len(p) == 1 and p[0] == 0 else len(p) - 1


def _content(p: list[int]) -> int:
    return math.gcd(*p)


def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of a by b: lc(b)^(deg a - deg b + 1)·a mod b."""
    r = list(a)
    db = _deg(b)
    lc = b[-1]
    e = _deg(a) - db + 1
    while _deg(r) >= db and _deg(r) >= 0:
        shift = _deg(r) - db
        lr = r[-1]
        r = [lc * x for x in r]
        for i, bc in enumerate(b):
            r[i + shift] -= lr * bc
        r.pop()
        e -= 1
        r = _trim(r) if r else [0]
    if e > 0:
        r = [x * lc**e for x in r]
    return r


def resultant(a, b) -> int:
    """Res(a, b) of integer polynomials (constant term first) by the subresultant PRS."""
    a = _trim([int(x) for x in a])
    b = _trim([int(x) for x in b])
    if _deg(a) < 0 or _deg(b) < 0:
        return 0
    ca, cb = _content(a), _content(b)
    a = [x // ca for x in a]
    b = [x // cb for x in b]
    t = ca ** _deg(b) * cb ** _deg(a)
    s = 1
    if _deg(a) < _deg(b):
        a, b = b, a
        if _deg(a) % 2 and _deg(b) % 2:
            s = -1
    g = h = 1
    while _deg(b) > 0:
        delta = _deg(a) - _deg(b)
        if _deg(a) % 2 and _deg(b) % 2:
            s = -s
        r = _prem(a, b)
        a = b
        div = g * h**delta
        b = [x // div for x in r]
        if _deg(b) < 0:
            return 0
        g = a[-1]
        h = h if delta == 0 else g**delta // h ** (delta - 1)
    da = _deg(a)
    h = b[0] ** da // h ** (da - 1) if da > 0 else h
    return s * t * h


# ---------------------------------------------------------------------------
# Norms


def _discriminant_of_root(alpha: int) -> Discriminant | None:
    return RATIONAL_SINGULAR_MODULI_INV.get(alpha)


def norm_diff_rational_alpha(d: Discriminant | int, alpha: int, poly: ClassPolynomial | None = None) -> NormResult:
    """|N(x - α)| = |H_Δ(α)| for the singular moduli x of discriminant Δ and integer α."""
    d = new_discriminant(d)
    h = poly or hilbert_poly(d)
    v = eval_at_integer(h, alpha)
    if v == 0:
        raise ZeroNorm(f"{alpha} is a root of H_{d.delta}: x = α")
    return NormResult(math.log(abs(v)), abs(v), "exact-rational-alpha")


def pair_product_log(d1: Discriminant | int, d2: Discriminant | int, check: bool = True) -> NormResult:
    """log|Res(H_Δ1, H_Δ2)| = Σ_{i,j} log|α_i - x_j|, exact, with a numerical cross-check."""
    d1, d2 = new_discriminant(d1), new_discriminant(d2)
    if d1.delta == d2.delta:
        raise SameModulus("equal discriminants have a zero resultant")
    h1, h2 = hilbert_poly(d1), hilbert_poly(d2)
    res = abs(resultant(h1.coeffs, h2.coeffs))
    log_abs = math.log(res)
    numeric = None
    if check:
        from .jeval import j_values

        with ctx.workprec(128):
            xs = j_values(enumerate_reduced(d1), 96)
            ys = j_values(enumerate_reduced(d2), 96)
            total = arb(0)
            for x in xs:
                for y in ys:
                    total += abs(x - y).log()
        numeric = float(total.mid())
        if abs(numeric - log_abs) > 1e-6 * max(1.0, abs(log_abs)):
            raise ComputationError(f"resultant {log_abs} disagrees with root products {numeric}")
    return NormResult(log_abs, res, "pair-product", numeric)


# Singular moduli of the 13 class-number-one discriminants.
RATIONAL_SINGULAR_MODULI = {
    -3: 0,
    -4: 1728,
    -7: -3375,
    -8: 8000,
    -11: -32768,
    -12: 54000,
    -16: 287496,
    -19: -884736,
    -27: -12288000,
    -28: 16581375,
    -43: -884736000,
    -67: -147197952000,
    -163: -262537412640768000,
}
RATIONAL_SINGULAR_MODULI_INV = {v: k for k, v in RATIONAL_SINGULAR_MODULI.items()}


def rational_singular_modulus(d: Discriminant | int) -> int | None:
    """The integer j-value when C(Δ) = 1, read off the certified H_Δ."""
    d = new_discriminant(d)
    h = hilbert_poly(d)
    return -h.coeffs[0] if h.degree == 1 else None


# ---------------------------------------------------------------------------
# Cache


def _body(coeffs) -> str:
    return "".join(f"{c}\n" for c in coeffs)


def serialize_poly(h: ClassPolynomial) -> str:
    body = _body(h.coeffs)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    header = (
        "HCP v1\n"
        f"disc={h.disc.delta}\n"
        f"degree={h.degree}\n"
        f"prec_bits={h.prec_bits_used}\n"
        f"sha256={digest}\n"
    )
    return header + body


def parse_poly(text: str, expect: Discriminant | None = None) -> ClassPolynomial:
    lines = text.split("\n")
    try:
        if lines[0] != "HCP v1":
            raise ValueError("bad magic line")
        delta = int(lines[1].removeprefix("disc="))
        degree = int(lines[2].removeprefix("degree="))
        prec = int(lines[3].removeprefix("prec_bits="))
        digest = lines[4].removeprefix("sha256=")
        if not lines[1].startswith("disc=") or not lines[4].startswith("sha256="):
            raise ValueError("bad header")
        body = "\n".join(lines[5:])
        if hashlib.sha256(body.encode("utf-8")).hexdigest() != digest:
            raise ValueError("checksum mismatch")
        coeffs = tuple(int(x) for x in lines[5:] if x != "")
        if len(coeffs) != degree + 1 or not body.endswith("\n"):
            raise ValueError("degree does not match coefficient count")
        if expect is not None and delta != expect.delta:
            raise ValueError(f"entry is for {delta}, expected {expect.delta}")
    except (ValueError, IndexError) as exc:
        raise CorruptCacheEntry(f"corrupt class polynomial cache entry: {exc}") from exc
    return ClassPolynomial(new_discriminant(delta), coeffs, prec)


def default_cache_dir(cache_dir: str | os.PathLike | None = None) -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    if cache_dir is not None:
        return Path(cache_dir)
    return Path.home() / ".cache" / "cmnc"


class ClassPolyCache:
    """Directory of ``hcp_<|Δ|>.txt`` files; writes are atomic (temp file + rename)."""

    def __init__(self, cache_dir: str | os.PathLike | None = None):
        self.directory = default_cache_dir(cache_dir)

    def path(self, d: Discriminant | int) -> Path:
        return self.directory / f"hcp_{new_discriminant(d).abs}.txt"

    def get(self, d: Discriminant | int) -> ClassPolynomial | None:
        """Cached H_Δ, ``None`` on a miss; raises CorruptCacheEntry on a bad file."""
        d = new_discriminant(d)
        p = self.path(d)
        if not p.exists():
            return None
        return parse_poly(p.read_text(encoding="utf-8"), expect=d)

    def put(self, h: ClassPolynomial) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        p = self.path(h.disc)
        tmp = p.with_name(p.name + ".tmp")
        tmp.write_bytes(serialize_poly(h).encode("utf-8"))
        os.replace(tmp, p)
        return p

    def hilbert_poly(self, d: Discriminant | int) -> ClassPolynomial:
        """Read through the cache; corrupt entries are recomputed and overwritten."""
        d = new_discriminant(d)
        try:
            h = self.get(d)
        except CorruptCacheEntry:
            h = None
        if h is None:
            h = hilbert_poly(d)
            self.put(h)
        return h
