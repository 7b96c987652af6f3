"""Command-line front end.

Every subcommand writes a JSON report (also echoed to stdout) into the output
directory, plus CSV/SVG side files where they make sense.  Exit status is 0 on
success, 1 on a numerical failure or a residual above tolerance, 2 on bad
input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .algebra import BlaschkeProduct, ComplexPolynomial, RationalMap, complex_to_pairs, pairs_to_complex
from .circle import align_mod_automorphism, nth_root
from .curves import trace_level_set, write_svg
from .engine import fingerprint_polynomial, fingerprint_rational, verify_uniqueness
from .errors import LemniscateError, NotProperError
from .inverse import count_classes, expected_classes, invert_polynomial, invert_rational

log = logging.getLogger("lemniscate")

ENV_OUTPUT_DIR = "LEMNISCATE_OUTPUT_DIR"
ENV_THREADS = "LEMNISCATE_THREADS"

DEFAULT_TOLERANCES = {
    "conjugacy": 1e-6,
    "closing": 1e-4,
    "polynomial_residual": 1e-5,
    "rational_residual": 1e-4,
    "uniqueness": 1e-6,
}


class InputError(ValueError):
    pass


@dataclass
class JobConfig:
    """All defaults for one invocation; echoed into every report."""

    command: str
    inputs: dict = field(default_factory=dict)
    N: int = 1024
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    output_dir: str = "."
    threads: int | None = None

    def __post_init__(self):
        if not (256 <= self.N <= 8192 and self.N & (self.N - 1) == 0):
            raise InputError(f"N: expected a power of two between 256 and 8192, got {self.N}")
        for name, value in self.tolerances.items():
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise InputError(f"tolerances.{name}: expected a positive number, got {value!r}")


# ---------------------------------------------------------------------------
# JSON output
# ---------------------------------------------------------------------------


def _emit(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        text = format(x, ".17g")
        if "e" not in text and "." not in text and "n" not in text:
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(_emit(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON with every float printed to 17 significant digits."""
    return _emit(obj) + "\n"


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------


def _load_json(text: str, flag: str):
    if text.startswith("@"):
        path = Path(text[1:])
        try:
            text = path.read_text()
        except OSError as exc:
            raise InputError(f"{flag}: cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{flag}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _parse(flag: str, text: str, kind):
    data = _load_json(text, flag)
    try:
        return kind.from_json(data, where=flag.lstrip("-"))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _parse_values(text: str):
    data = _load_json(text, "--values")
    try:
        return pairs_to_complex(data, where="values")
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _parse_tolerances(items) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or name not in tol:
            raise InputError(f"--tol: expected NAME=VALUE with NAME in {sorted(tol)}, got {item!r}")
        try:
            tol[name] = float(value)
        except ValueError as exc:
            raise InputError(f"--tol {name}: not a number: {value!r}") from exc
    return tol


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _fingerprint_outputs(report, out: Path, stem: str) -> dict:
    k_csv = out / f"{stem}_k.csv"
    report.k.write_csv(k_csv)
    svg = out / f"{stem}_curve.svg"
    write_svg([report.curve], svg)
    curve_csv = out / f"{stem}_curve.csv"
    report.curve.write_csv(curve_csv)
    return {"k_csv": k_csv.name, "svg": svg.name, "curve_csv": curve_csv.name}


def cmd_fingerprint(args, cfg: JobConfig, out: Path) -> tuple[dict, bool]:
    p = _parse("--poly", args.poly, ComplexPolynomial)
    cfg.inputs["poly"] = p.to_json()
    rep = fingerprint_polynomial(p, cfg.N, check_exterior=not args.no_exterior)
    body = rep.to_json()
    body.update(_fingerprint_outputs(rep, out, "fingerprint"))
    rep.maps["interior"].write_csv(out / "fingerprint_interior_sigma.csv")
    ok = rep.residuals["conjugacy"] <= cfg.tolerances["conjugacy"]
    return body, ok


def cmd_fingerprint_rational(args, cfg, out):
    r = _parse("--rational", args.rational, RationalMap)
    cfg.inputs["rational"] = r.to_json()
    rep = fingerprint_rational(r, cfg.N)
    body = rep.to_json()
    body.update(_fingerprint_outputs(rep, out, "fingerprint"))
    ok = rep.residuals["conjugacy"] <= cfg.tolerances["conjugacy"]
    return body, ok


def cmd_invert(args, cfg, out):
    B = _parse("--blaschke", args.blaschke, BlaschkeProduct)
    cfg.inputs["blaschke"] = B.to_json()
    res = invert_polynomial(B, seed=cfg.seed, N=cfg.N)
    body = {
        "P": res.P.to_json(),
        "residual": res.residual,
        "alignment": res.alignment,
        "candidate_classes": len(res.candidates),
    }
    ok = res.residual <= cfg.tolerances["polynomial_residual"] and res.alignment <= cfg.tolerances["closing"]
    return body, ok


def cmd_invert_rational(args, cfg, out):
    A = _parse("--A", args.A, BlaschkeProduct)
    B = _parse("--B", args.B, BlaschkeProduct)
    cfg.inputs.update({"A": A.to_json(), "B": B.to_json()})
    res = invert_rational(A, B, seed=cfg.seed, N=cfg.N)
    body = {
        "R": res.R.to_json(),
        "residual": res.residual,
        "alignment": res.alignment,
        "candidate_classes": len(res.candidates),
    }
    return body, res.residual <= cfg.tolerances["rational_residual"]


def cmd_trace(args, cfg, out):
    if (args.poly is None) == (args.rational is None):
        raise InputError("trace: give exactly one of --poly or --rational")
    m = _parse("--poly", args.poly, ComplexPolynomial) if args.poly else _parse("--rational", args.rational, RationalMap)
    cfg.inputs["map"] = m.to_json()
    rep = trace_level_set(m, cfg.N)
    files = []
    for i, c in enumerate(rep.components):
        path = out / f"component_{i}.csv"
        c.write_csv(path)
        files.append(path.name)
    svg = out / "lemniscate.svg"
    write_svg(rep.components, svg)
    worst = max(float(np.max(np.abs(np.abs(m(c.samples)) - 1.0))) for c in rep.components)
    body = {
        "components": len(rep.components),
        "proper": rep.proper,
        "interior_simply_connected": rep.interior_simply_connected,
        "critical_value_split": list(rep.critical_value_split),
        "sublevel_inside": rep.inner_side_sublevel,
        "level_residual": worst,
        "component_csv": files,
        "svg": svg.name,
    }
    return body, True


def cmd_verify(args, cfg, out):
    p1 = _parse("--poly1", args.poly1, ComplexPolynomial)
    p2 = _parse("--poly2", args.poly2, ComplexPolynomial)
    cfg.inputs.update({"poly1": p1.to_json(), "poly2": p2.to_json()})
    same = verify_uniqueness(p1, p2, tol=cfg.tolerances["uniqueness"])
    return {"equivalent": same, "canonical1": p1.canonical_form().to_json(), "canonical2": p2.canonical_form().to_json()}, True


def cmd_count_classes(args, cfg, out):
    values = _parse_values(args.values)
    cfg.inputs.update({"n": args.n, "values": complex_to_pairs(values)})
    try:
        res = count_classes(values, args.n, seed=cfg.seed, budget=args.budget)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    body = {
        "count": res.count,
        "expected": expected_classes(args.n),
        "possibly_incomplete": res.possibly_incomplete,
        "classes": [c.to_json() for c in res.classes],
    }
    return body, True


def cmd_roundtrip(args, cfg, out):
    p = _parse("--poly", args.poly, ComplexPolynomial)
    cfg.inputs["poly"] = p.to_json()
    fwd = fingerprint_polynomial(p, cfg.N, check_exterior=False)
    back = invert_polynomial(fwd.B, seed=cfg.seed, N=cfg.N)
    fwd2 = fingerprint_polynomial(back.P, cfg.N, check_exterior=False)
    _, dist = align_mod_automorphism(fwd2.k, fwd.k)
    same = verify_uniqueness(p, back.P, tol=cfg.tolerances["uniqueness"])
    body = {
        "B": fwd.B.to_json(),
        "P_reconstructed": back.P.to_json(),
        "canonical_input": p.canonical_form().to_json(),
        "inverse_residual": back.residual,
        "fingerprint_alignment": dist,
        "same_class": same,
    }
    return body, same and dist <= cfg.tolerances["closing"]


COMMANDS = {
    "fingerprint": cmd_fingerprint,
    "fingerprint-rational": cmd_fingerprint_rational,
    "invert": cmd_invert,
    "invert-rational": cmd_invert_rational,
    "trace": cmd_trace,
    "verify": cmd_verify,
    "count-classes": cmd_count_classes,
    "roundtrip": cmd_roundtrip,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lemniscate", description="Fingerprints of polynomial and rational lemniscates.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, default=1024, help="boundary grid size (power of two, 256..8192)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help=f"output directory (default ${ENV_OUTPUT_DIR} or .)")
    common.add_argument("--threads", type=int, default=None, help=f"BLAS threads (default ${ENV_THREADS})")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fingerprint", parents=[common], help="fingerprint of a proper polynomial lemniscate")
    s.add_argument("--poly", required=True, help='JSON {"coeffs": [[re, im], ...]} or @file')
    s.add_argument("--no-exterior", action="store_true", help="skip the exterior-map cross check")
    s = sub.add_parser("fingerprint-rational", parents=[common], help="fingerprint of a rational lemniscate")
    s.add_argument("--rational", required=True, help='JSON {"num": {...}, "den": {...}} or @file')
    s = sub.add_parser("invert", parents=[common], help="polynomial from a Blaschke product")
    s.add_argument("--blaschke", required=True, help='JSON {"theta": t, "zeros": [[re, im], ...]} or @file')
    s = sub.add_parser("invert-rational", parents=[common], help="rational map from a Blaschke pair (A, B)")
    s.add_argument("--A", required=True)
    s.add_argument("--B", required=True)
    s = sub.add_parser("trace", parents=[common], help="trace the level set |m| = 1")
    s.add_argument("--poly")
    s.add_argument("--rational")
    s = sub.add_parser("verify", parents=[common], help="are two polynomials affinely equivalent")
    s.add_argument("--poly1", required=True)
    s.add_argument("--poly2", required=True)
    s = sub.add_parser("count-classes", parents=[common], help="count polynomials with given critical values")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--values", required=True, help="JSON list of [re, im] pairs")
    s.add_argument("--budget", type=int, default=None)
    s = sub.add_parser("roundtrip", parents=[common], help="fingerprint, invert, and compare")
    s.add_argument("--poly", required=True)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        threads = args.threads if args.threads is not None else os.environ.get(ENV_THREADS)
        threads = int(threads) if threads not in (None, "") else None
        if threads is not None and threads < 1:
            raise InputError("threads: expected a positive integer")
        cfg = JobConfig(
            command=args.command,
            N=args.N,
            tolerances=_parse_tolerances(args.tol),
            seed=args.seed,
            output_dir=args.out or os.environ.get(ENV_OUTPUT_DIR) or ".",
            threads=threads,
        )
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if threads is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=threads):
                body, ok = COMMANDS[args.command](args, cfg, out)
        else:
            body, ok = COMMANDS[args.command](args, cfg, out)
    except (InputError, NotProperError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LemniscateError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # preconditions raised by the library (bad degree, point outside, ...)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {"command": args.command, "status": "ok" if ok else "residual_above_tolerance", "config": asdict(cfg), "result": body}
    text = dumps(report)
    (out / f"{args.command}.json").write_text(text)
    sys.stdout.write(text)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
