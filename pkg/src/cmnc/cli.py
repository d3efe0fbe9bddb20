"""Command-line front end and report serialization.

Every subcommand produces a list of reports (plain dicts, or :class:`CertReport`
for ``certify``) that are rendered as JSON, CSV or text.  Real numbers are
written as decimal strings and rationals as ``p/q`` so nothing is rounded
twice on the way out.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from fractions import Fraction

from flint import arb, ctx

from .certify import CertReport, case_of, certify_range, constants_audit, main_theorem_check
from .classpoly import ClassPolyCache, norm_diff_rational_alpha, pair_product_log, rational_singular_modulus
from .cmcount import EpsQuery, cor_bound_eps, exact_count_eps, thm_bound_eps
from .disc import discriminants_in, new_discriminant
from .errors import CmncError, ComputationError, DomainError, ValidationError
from .forms import ExactPoint, QForm, enumerate_reduced, point_of_form, principal_form, reduce_form
from .heights import height_diff_rational, height_singular, lower_bound_51, lower_bound_52_branches
from .intarith import f_of_disc
from .jeval import eval_j

FORMATS = ("json", "csv", "text")
CERT_FIELDS = tuple(f.name for f in dataclasses.fields(CertReport))
TERM_NAMES = ("growth", "log_A_plus_C", "log_ratio", "norm", "norm_s1")
CSV_HEADER = (
    tuple(n for n in CERT_FIELDS if n not in ("terms", "error"))
    + tuple(f"terms.{n}" for n in TERM_NAMES)
    + ("error.reason", "error.message")
)
_ABSENT = ""
_NULL = "null"


class UsageError(ValidationError):
    reason = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    subcommand: str
    args: dict
    prec_bits: int = 128
    fmt: str = "text"
    cache_dir: str | None = None
    threads: int = 1
    timestamp: bool = True


# ---------------------------------------------------------------------------
# Value encoding


def encode_value(v):
    """JSON-ready form: numbers become strings, rationals become "p/q"."""
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, QForm):
        return f"{v.a},{v.b},{v.c}"
    if isinstance(v, dict):
        return {str(k): encode_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [encode_value(x) for x in v]
    if dataclasses.is_dataclass(v):
        return {f.name: encode_value(getattr(v, f.name)) for f in dataclasses.fields(v)}
    raise TypeError(f"cannot encode {type(v).__name__}")


def _dec_float(s):
    return None if s is None else float(s)


def _dec_fraction(s):
    return None if s is None else Fraction(s)


_CERT_DECODERS = {
    "case": str,
    "disc": int,
    "disc_alpha": int,
    "X": int,
    "Y": _dec_float,
    "A": _dec_float,
    "C_const": _dec_float,
    "eps_used": _dec_fraction,
    "norm_log": _dec_float,
    "threshold": _dec_float,
    "hypothesis_ok": bool,
    "margin": _dec_float,
    "label": str,
    "norm_mode": lambda s: s,
}


def cert_from_json(obj: dict) -> CertReport:
    kw = {k: dec(obj[k]) for k, dec in _CERT_DECODERS.items()}
    kw["terms"] = {k: _dec_float(v) for k, v in obj["terms"].items()}
    kw["error"] = None if obj["error"] is None else dict(obj["error"])
    return CertReport(**kw)


def _csv_cell(v) -> str:
    if v is None:
        return _ABSENT
    e = encode_value(v)
    return ("true" if e else "false") if isinstance(e, bool) else e


def cert_to_row(r: CertReport) -> list[str]:
    row = []
    for name in CSV_HEADER:
        if name.startswith("terms."):
            key = name[6:]
            if key not in r.terms:
                row.append(_ABSENT)
            else:
                row.append(_NULL if r.terms[key] is None else _csv_cell(r.terms[key]))
        elif name.startswith("error."):
            row.append(_ABSENT if r.error is None else str(r.error[name[6:]]))
        else:
            row.append(_csv_cell(getattr(r, name)))
    return row


def cert_from_row(row: dict) -> CertReport:
    kw = {}
    for name, dec in _CERT_DECODERS.items():
        cell = row[name]
        if name == "hypothesis_ok":
            kw[name] = cell == "true"
        else:
            kw[name] = None if cell == _ABSENT else dec(cell)
    terms = {}
    for key in TERM_NAMES:
        cell = row[f"terms.{key}"]
        if cell != _ABSENT:
            terms[key] = None if cell == _NULL else float(cell)
    kw["terms"] = terms
    kw["error"] = None if row["error.reason"] == _ABSENT else {"reason": row["error.reason"], "message": row["error.message"]}
    return CertReport(**kw)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        elif isinstance(v, list):
            out[prefix + k] = ";".join(x if isinstance(x, str) else json.dumps(x) for x in v)
        else:
            out[prefix + k] = v
    return out


def serialize_report(reports, fmt: str = "json", timestamp: str | None = None) -> bytes:
    """Render one report or a list of reports; output is deterministic given the inputs."""
    if isinstance(reports, (CertReport, dict)):
        reports = [reports]
    reports = list(reports)
    if fmt == "json":
        doc = {}
        if timestamp is not None:
            doc["timestamp"] = timestamp
        doc["reports"] = [encode_value(r) for r in reports]
        return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if all(isinstance(r, CertReport) for r in reports):
            w.writerow(CSV_HEADER)
            for r in reports:
                w.writerow(cert_to_row(r))
        else:
            flat = [_flatten(encode_value(r)) for r in reports]
            header = list(dict.fromkeys(k for row in flat for k in row))
            w.writerow(header)
            for row in flat:
                w.writerow(["" if row.get(k) is None else _csv_cell(row[k]) for k in header])
        return buf.getvalue().encode()
    if fmt == "text":
        lines = []
        for r in reports:
            enc = _flatten(encode_value(r))
            lines.append("  ".join(f"{k}={'-' if v is None else v}" for k, v in enc.items()))
        return ("\n".join(lines) + "\n").encode() if lines else b""
    raise UsageError(f"unknown format {fmt!r}")


def parse_report(data: bytes, fmt: str = "json") -> list:
    """Inverse of :func:`serialize_report` for certification reports."""
    text = data.decode()
    if fmt == "json":
        doc = json.loads(text)
        out = []
        for obj in doc["reports"]:
            out.append(cert_from_json(obj) if set(obj) == set(CERT_FIELDS) else obj)
        return out
    if fmt == "csv":
        rows = list(csv.DictReader(io.StringIO(text)))
        return [cert_from_row(r) for r in rows]
    raise UsageError(f"cannot parse format {fmt!r}")


# ---------------------------------------------------------------------------
# Argument parsing


def _int(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None


_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(s: str) -> Fraction:
    """Exact rational "p/q" or integer; decimals and exponents are rejected."""
    s = s.strip()
    if not _RATIONAL.match(s):
        raise UsageError(f"expected an exact rational p/q, got {s!r}")
    try:
        return Fraction(s)
    except ZeroDivisionError:
        raise UsageError(f"zero denominator in {s!r}") from None


def parse_tau(s: str) -> ExactPoint:
    """Either a discriminant (principal CM point) or "re,im" with rational re and im."""
    if "," not in s:
        return point_of_form(principal_form(new_discriminant(parse_rational_int(s))))
    re_s, im_s = s.split(",", 1)
    re_v, im_v = parse_rational(re_s), parse_rational(im_s)
    if im_v <= 0:
        raise DomainError(f"Im τ must be positive, got {im_v}")
    return ExactPoint(re_v, im_v * im_v)


def parse_rational_int(s: str) -> int:
    q = parse_rational(s)
    if q.denominator != 1:
        raise UsageError(f"expected an integer, got {s!r}")
    return int(q)


def parse_form(s: str) -> QForm:
    parts = s.split(",")
    if len(parts) != 3:
        raise UsageError(f"expected a,b,c, got {s!r}")
    return QForm(*(parse_rational_int(p) for p in parts))


def parse_range(s: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", s)
    if not m:
        raise UsageError(f"expected a range a..b, got {s!r}")
    return int(m.group(1)), int(m.group(2))


def _common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--prec", type=_int, default=d(128), help="working precision in bits")
    p.add_argument("--format", choices=FORMATS, default=d("text"))
    p.add_argument("--cache-dir", default=d(None))
    p.add_argument("--threads", type=_int, default=d(1))
    p.add_argument("--no-timestamp", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cmnc", description="Singular moduli: class groups, j-values, class polynomials, norms, bounds.")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def cmd(name, help_text, disc=True):
        sp = sub.add_parser(name, help=help_text)
        if disc:
            sp.add_argument("disc", type=_int)
        _common(sp, suppress=True)
        return sp

    cmd("disc", "fundamental discriminant, conductor and F(Δ)")
    cmd("forms", "reduced forms and their CM points")
    cmd("classnum", "class number C(Δ)")
    cmd("j", "j-values at the CM points").add_argument("--form", help="a,b,c (reduced first if needed)")
    cmd("hilbert", "Hilbert class polynomial (cached)")
    sp = cmd("count-eps", "exact C_ε(τ, Δ) with its upper bounds")
    sp.add_argument("--tau", required=True, help="a discriminant or re,im with rational parts")
    sp.add_argument("--eps", required=True, help="exact rational p/q")
    sp = cmd("bounds-eps", "upper bounds for C_ε(τ, Δ)")
    sp.add_argument("--eps", required=True)
    cmd("height", "Weil height of the singular moduli").add_argument("--alpha", type=_int, help="h(x - α) for rational α")
    sp = cmd("norm", "log |N(x - α)|", disc=False)
    sp.add_argument("--alpha-disc", type=_int, required=True)
    sp.add_argument("--disc", type=_int, required=True)
    sp = cmd("certify", "main-inequality margins over a range of discriminants", disc=False)
    sp.add_argument("--case", required=True, choices=("1", "2", "3"))
    sp.add_argument("--alpha-disc", type=_int, required=True)
    sp.add_argument("--range", required=True, help="a..b, e.g. -500..-3")
    cmd("audit-constants", "interval check of the numeric constants", disc=False)
    return p


def _glue_ranges(argv: list[str]) -> list[str]:
    # "--range -20..-3" would otherwise be read as an option
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--range" and i + 1 < len(argv):
            out.append(f"--range={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def parse_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(_glue_ranges(list(argv))))
    common = {k: ns.pop(k) for k in ("prec", "format", "cache_dir", "threads", "no_timestamp")}
    sc = ns.pop("subcommand")
    if common["prec"] < 16:
        raise UsageError("--prec must be at least 16")
    if common["threads"] < 1:
        raise UsageError("--threads must be positive")
    args = dict(ns)
    # validate everything up front
    if "disc" in args and args["disc"] is not None:
        new_discriminant(args["disc"])
    if "alpha_disc" in args:
        new_discriminant(args["alpha_disc"])
    if "eps" in args:
        args["eps"] = parse_rational(args["eps"])
    if "tau" in args:
        args["tau"] = parse_tau(args["tau"])
    if args.get("form"):
        args["form"] = parse_form(args["form"])
    if "range" in args:
        args["range"] = parse_range(args["range"])
    if sc == "certify":
        want = {"1": "part1", "2": "part2", "3": "part3"}[args["case"]]
        if case_of(args["alpha_disc"]) != want:
            raise UsageError(f"Δα = {args['alpha_disc']} does not belong to case {args['case']}")
    return RunConfig(
        sc,
        args,
        common["prec"],
        common["format"],
        common["cache_dir"],
        common["threads"],
        not common["no_timestamp"],
    )


# ---------------------------------------------------------------------------
# Subcommands


def _dec(x: arb, prec: int) -> str:
    digits = max(17, int(prec * 0.30103))
    with ctx.workprec(prec + 16):
        return x.mid().str(digits, radius=False)


def _cmd_disc(cfg):
    d = new_discriminant(cfg.args["disc"])
    return [{"disc": d.delta, "fundamental": d.d_fund, "conductor": d.f, "f_mod": d.f_mod, "F": f_of_disc(d)}]


def _cmd_forms(cfg):
    out = []
    for f in enumerate_reduced(cfg.args["disc"]):
        p = point_of_form(f)
        out.append({"form": f, "tau_re": p.re, "tau_im_sq": p.im_sq})
    return out


def _cmd_classnum(cfg):
    d = new_discriminant(cfg.args["disc"])
    return [{"disc": d.delta, "class_number": len(enumerate_reduced(d))}]


def _cmd_j(cfg):
    d = new_discriminant(cfg.args["disc"])
    form = cfg.args.get("form")
    if form is not None:
        if form.discriminant != d.delta:
            raise ValidationError(f"form {form} has discriminant {form.discriminant}, not {d.delta}")
        forms = [reduce_form(form)[0]]
    else:
        forms = enumerate_reduced(d)
    out = []
    for f in forms:
        jv = eval_j(point_of_form(f), cfg.prec_bits)
        b = jv.value.ball
        out.append(
            {
                "form": f,
                "re": _dec(b.real, cfg.prec_bits),
                "im": _dec(b.imag, cfg.prec_bits),
                "err": repr(jv.value.err_abs),
                "terms": jv.terms_used,
                "working_prec": jv.working_prec,
            }
        )
    return out


def _cmd_hilbert(cfg):
    h = ClassPolyCache(cfg.cache_dir).hilbert_poly(cfg.args["disc"])
    return [{"disc": h.disc.delta, "degree": h.degree, "poly": str(h), "coeffs": list(h.coeffs), "prec_bits": h.prec_bits_used}]


def _cmd_count_eps(cfg):
    q = EpsQuery(cfg.args["tau"], cfg.args["eps"], cfg.args["disc"])
    r = exact_count_eps(q)
    return [
        {
            "disc": q.disc.delta,
            "eps": q.eps,
            "exact_count": r.exact_count,
            "thm_bound": r.thm_bound,
            "cor_bound": r.cor_bound,
            "a_interval": list(r.a_interval),
            "witnesses": list(r.witnesses),
            "report_only": r.report_only,
        }
    ]


def _cmd_bounds_eps(cfg):
    q = EpsQuery(ExactPoint(0, 1), cfg.args["eps"], cfg.args["disc"])
    F = f_of_disc(q.disc)
    cor = cor_bound_eps(q, F) if q.disc.abs >= 10**14 else None
    return [{"disc": q.disc.delta, "eps": q.eps, "F": F, "thm_bound": thm_bound_eps(q, F, cfg.prec_bits), "cor_bound": cor}]


def _cmd_height(cfg):
    d = new_discriminant(cfg.args["disc"])
    alpha = cfg.args.get("alpha")
    if alpha is not None:
        r = height_diff_rational(d, alpha, cfg.prec_bits)
        return [{"disc": d.delta, "alpha": alpha, "h": r.h, "h_inverse_form": r.h_inverse_form, "norm_log": r.norm_log, "err": r.err}]
    r = height_singular(d, cfg.prec_bits)
    b1, b2 = lower_bound_52_branches(d)
    return [
        {
            "disc": d.delta,
            "h": r.h,
            "err": r.err,
            "lower_51": lower_bound_51(d) if d.abs >= 16 else None,
            "lower_52_log": b1,
            "lower_52_small": b2,
        }
    ]


def _cmd_norm(cfg):
    d = new_discriminant(cfg.args["disc"])
    da = new_discriminant(cfg.args["alpha_disc"])
    alpha = rational_singular_modulus(da)
    if alpha is not None:
        r = norm_diff_rational_alpha(d, alpha)
    else:
        r = pair_product_log(d, da)
    return [{"disc": d.delta, "disc_alpha": da.delta, "log_abs": r.log_abs, "exact": r.exact, "mode": r.mode}]


def _check_one(args):
    d_alpha, delta, case = args
    try:
        return main_theorem_check(d_alpha, delta)
    except CmncError as exc:
        return CertReport(case, delta, d_alpha, abs(delta), error={"reason": exc.reason, "message": str(exc)})


def _cmd_certify(cfg):
    d_alpha = cfg.args["alpha_disc"]
    lo, hi = cfg.args["range"]
    case = case_of(d_alpha)
    if cfg.threads == 1:
        return list(certify_range(case, d_alpha, (lo, hi)))
    jobs = [(d_alpha, d.delta, case) for d in discriminants_in(lo, hi)]
    with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
        return list(ex.map(_check_one, jobs, chunksize=16))


def _cmd_audit(cfg):
    audit = constants_audit()
    reports = [dataclasses.asdict(c) for c in audit.checks]
    return reports, (0 if audit.all_pass else 2)


COMMANDS = {
    "disc": _cmd_disc,
    "forms": _cmd_forms,
    "classnum": _cmd_classnum,
    "j": _cmd_j,
    "hilbert": _cmd_hilbert,
    "count-eps": _cmd_count_eps,
    "bounds-eps": _cmd_bounds_eps,
    "height": _cmd_height,
    "norm": _cmd_norm,
    "certify": _cmd_certify,
    "audit-constants": _cmd_audit,
}


def _text(cfg: RunConfig, reports) -> bytes:
    """Human-oriented output; single-valued commands print just the value."""
    sc = cfg.subcommand
    if sc == "classnum":
        return f"{reports[0]['class_number']}\n".encode()
    if sc == "hilbert":
        return f"{reports[0]['poly']}\n".encode()
    if sc == "audit-constants":
        lines = []
        for r in reports:
            tag = "PASS" if r["passed"] else "FAIL"
            kind = "" if r["counted"] else " (finding)"
            lines.append(f"{tag} {r['claim_id']:<28} [{r['lower']:.10g}, {r['upper']:.10g}] {r['relation']} {r['bound']}{kind}")
        return ("\n".join(lines) + "\n").encode()
    return serialize_report(reports, "text")


def _timestamp(cfg: RunConfig) -> str | None:
    return datetime.now(timezone.utc).isoformat(timespec="seconds") if cfg.timestamp else None


def _emit_error(exc: CmncError, fmt: str, ts: str | None, out, err) -> None:
    if fmt == "json":
        doc = {}
        if ts is not None:
            doc["timestamp"] = ts
        doc["error"] = {"reason": exc.reason, "message": str(exc)}
        out.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
    else:
        err.write(f"error [{exc.reason}]: {exc}\n")


def _guess_format(argv) -> str:
    for i, a in enumerate(argv):
        if a == "--format" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--format="):
            return a.split("=", 1)[1]
    return "text"


def _guess_timestamp(argv) -> bool:
    return "--no-timestamp" not in argv


def run(argv=None, stdout=None, stderr=None) -> int:
    """Execute one command; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    if any(a in ("-h", "--help") for a in argv):
        try:
            build_parser().parse_args(argv)
        except SystemExit as e:
            return int(e.code or 0)
    try:
        cfg = parse_config(argv)
    except CmncError as exc:
        ts = datetime.now(timezone.utc).isoformat(timespec="seconds") if _guess_timestamp(argv) else None
        _emit_error(exc, _guess_format(argv), ts, out, err)
        return 1
    ts = _timestamp(cfg)
    try:
        result = COMMANDS[cfg.subcommand](cfg)
    except CmncError as exc:
        _emit_error(exc, cfg.fmt, ts, out, err)
        return 1 if isinstance(exc, ValidationError) else 2
    except (ArithmeticError, MemoryError) as exc:
        _emit_error(ComputationError(f"{type(exc).__name__}: {exc}"), cfg.fmt, ts, out, err)
        return 2
    code = 0
    if isinstance(result, tuple):
        result, code = result
    if cfg.fmt == "text":
        data = _text(cfg, result)
    else:
        data = serialize_report(result, cfg.fmt, ts if cfg.fmt == "json" else None)
    out.write(data.decode())
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
