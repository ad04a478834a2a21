"""Command-line front end: ``prmeasures generate|measure|test|verify``.

Exit codes: 0 success, 1 a failure of interest (flagged test row or theorem
violation), 2 usage error, 3 I/O error. Outputs never contain timestamps and
are identical for every ``--threads`` value.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

from . import __version__, measures, nist, report, verify
from .measures import SearchBounds, SearchBudgetError
from .sequence import (
    EllipticCurveSpec,
    InverseSpec,
    LegendreSpec,
    PeriodicSpec,
    RudinShapiroSpec,
    SequenceFormatError,
    ThueMorseSpec,
    decode,
    inverse_family_poly,
    read_sequence,
    spec_from_dict,
    spec_to_dict,
    write_sequence,
)
from .numtheory import poly_from_string

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


@contextlib.contextmanager
def _executor(threads: int):
    if threads <= 1:
        yield None
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            yield ex


def _map(fn, items, executor):
    return [fn(x) for x in items] if executor is None else list(executor.map(fn, items))


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


# -- generate ------------------------------------------------------------------

def _substitute(template: str, i: int) -> str:
    # the family parameter is written as ``i``; no other letter clashes
    return template.replace("i", str(i))


def _family_specs(args) -> list:
    kind = args.kind
    indices = range(args.start, args.start + args.count)
    if kind == "legendre":
        if args.p is None:
            raise UsageError("legendre needs --p")
        poly = args.poly or "x^31+i"
        return [LegendreSpec(args.p, tuple(poly_from_string(_substitute(poly, i), args.p)))
                for i in indices]
    if kind == "inverse":
        if args.p is None:
            raise UsageError("inverse needs --p")
        if args.poly:
            polys = [poly_from_string(_substitute(args.poly, i), args.p) for i in indices]
        else:
            polys = [inverse_family_poly(i, args.p) for i in indices]
        return [InverseSpec(args.p, tuple(f), args.half) for f in polys]
    if kind == "ec":
        need = ("p", "a", "b", "gx", "gy", "order")
        missing = [n for n in need if getattr(args, n) is None]
        if missing:
            raise UsageError("ec needs " + ", ".join("--" + n for n in missing))
        fn = args.function or "x^31+x+y+i"
        return [EllipticCurveSpec(args.p, args.a, args.b, (args.gx, args.gy), args.order,
                                  _substitute(fn, i)) for i in indices]
    if kind in ("thue-morse", "rudin-shapiro"):
        if args.length is None:
            raise UsageError(f"{kind} needs --length")
        cls = ThueMorseSpec if kind == "thue-morse" else RudinShapiroSpec
        return [cls(args.length)]
    if kind == "periodic":
        if not args.pattern or args.reps is None:
            raise UsageError("periodic needs --pattern and --reps")
        pattern = tuple(1 if ch in "+1" else -1 for ch in args.pattern if ch in "+-01")
        if len(pattern) != len(args.pattern):
            raise UsageError("pattern uses + - or 0 1 symbols")
        return [PeriodicSpec(pattern, args.reps)]
    raise UsageError(f"unknown generator {kind!r}")


def cmd_generate(args) -> int:
    if args.manifest:
        try:
            data = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            print(f"error: cannot read manifest: {exc}", file=sys.stderr)
            return EXIT_IO
        entries = [(e["file"], spec_from_dict(e["spec"])) for e in data["sequences"]]
        fmt = data.get("format", "ascii")
    else:
        if args.kind is None:
            raise UsageError("give a generator kind or --manifest")
        try:
            specs = _family_specs(args)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        start = args.start if args.kind in ("legendre", "inverse", "ec") else 1
        entries = [(f"seq_{start + j}", s) for j, s in enumerate(specs)]
        fmt = args.format
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def one(entry):
        name, spec = entry
        E = spec.generate()
        write_sequence(out / name, fmt, E)
        return {"file": name, "length": len(E), "spec": spec_to_dict(spec)}

    try:
        with _executor(args.threads) as ex:
            written = _map(one, entries, ex)
    except ValueError as exc:
        raise UsageError(f"invalid generator: {exc}") from None
    manifest = {"command": "generate", "format": fmt, "sequences": written,
                "tool": "prmeasures", "version": __version__}
    _write(out / "manifest.json", json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    for w in written:
        print(f"{out / w['file']}: {w['length']} symbols")
    return EXIT_OK


# -- measure -------------------------------------------------------------------

_MEASURE_RE = re.compile(r"^(W|C|Q|N)(\d*)$")


def _parse_measures(text: str) -> list[tuple[str, int]]:
    out = []
    for tok in text.split(","):
        m = _MEASURE_RE.match(tok.strip())
        if not m:
            raise UsageError(f"bad measure {tok!r}; use W, C<k>, Q<k> or N<k>")
        name, k = m.group(1), int(m.group(2) or 1)
        if name == "W" and m.group(2):
            raise UsageError("W takes no order")
        out.append((name, k))
    return out


def _bounds(args, N: int, k: int, name: str) -> SearchBounds:
    if args.b_max is None and args.d_max is None and args.samples is None:
        return measures.default_bounds(N, k, name, seed=args.seed)
    return SearchBounds(b_max=args.b_max, d_max=args.d_max,
                        sample_count=args.samples or 0, seed=args.seed)


def cmd_measure(args) -> int:
    wanted = _parse_measures(args.measures)
    try:
        E = read_sequence(args.file, args.format)
    except (OSError, SequenceFormatError) as exc:
        print(f"error: {args.file}: {exc}", file=sys.stderr)
        return EXIT_IO
    N = len(E)

    def one(item):
        name, k = item
        if name == "W":
            return measures.well_distribution(E, _bounds(args, N, 1, "W"))
        if name == "C":
            return measures.correlation(E, k, _bounds(args, N, k, "C"))
        if name == "Q":
            return measures.combined_measure(E, k, _bounds(args, N, k, "Q"))
        return measures.normality(E, k)

    try:
        with _executor(args.threads) as ex:
            results = _map(one, wanted, ex)
    except (SearchBudgetError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    lines = "".join(_dumps(dict(r.as_record(), file=str(args.file), N=N)) + "\n"
                    for r in results)
    _emit(lines, args.out)
    return EXIT_OK


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- test ---------------------------------------------------------------------------

def _suite_config(args) -> nist.SuiteConfig:
    cfg = nist.SuiteConfig()
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        try:
            cfg = nist.SuiteConfig.parse(text)
        except ValueError as exc:
            raise UsageError(f"{args.config}: {exc}") from None
    if args.alpha is not None:
        try:
            cfg = cfg.with_alpha(args.alpha)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return cfg


def cmd_test(args) -> int:
    cfg = _suite_config(args)

    def one(path):
        try:
            data = Path(path).read_bytes()
            E = decode(data, args.format)
        except (OSError, SequenceFormatError) as exc:
            return path, None, str(exc)
        return path, (hashlib.sha256(data).hexdigest(), nist.run_suite(E, cfg)), None

    with _executor(args.threads) as ex:
        outcomes = _map(one, args.files, ex)
    errors = [(p, err) for p, _, err in outcomes if err is not None]
    for p, err in errors:
        print(f"error: {p}: {err}", file=sys.stderr)
    done = [(p, res) for p, res, err in outcomes if err is None]
    if not done:
        return EXIT_IO
    rep = report.aggregate([res for _, (_, res) in done], cfg.alpha)
    text = report.render_text(rep)
    records = "".join(_dumps(dict(r.as_record(), file=str(p))) + "\n"
                      for p, (_, res) in done for r in res)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "results.jsonl", records)
        _write(out / "report.txt", text)
        _write(out / "report.jsonl", report.render_records(rep))
        manifest = {
            "command": "test",
            "config": cfg.dump(),
            "format": args.format,
            "inputs": [{"file": str(p), "sha256": h} for p, (h, _) in done],
            "tool": "prmeasures",
            "version": __version__,
        }
        _write(out / "manifest.json", json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    sys.stdout.write(text)
    if errors:
        return EXIT_IO
    flagged = any(r.proportion_flag or r.uniformity_flag for r in rep.rows)
    return EXIT_FAIL if flagged else EXIT_OK


# -- verify ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    if args.target != "all" and args.target not in verify.CHECK_NAMES:
        raise UsageError(f"unknown check {args.target!r}; choose from "
                         f"{', '.join(verify.CHECK_NAMES)} or all")
    with _executor(args.threads) as ex:
        checks = verify.run_checks(args.target, seed=args.seed, full=args.full, executor=ex)
    text = report.render_checks(checks)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "checks.jsonl",
               "".join(_dumps(c.as_record()) + "\n" for c in checks))
        _write(out / "checks.txt", text)
    sys.stdout.write(text)
    bad = [c for c in checks if c.violation]
    for c in bad:
        print(f"VIOLATION {c.name}: lhs={c.lhs} > rhs={c.rhs} {_dumps(c.context)}",
              file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


# -- parser ---------------------------------------------------------------------------

def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("ascii", "packed"), default="ascii")

    parser = argparse.ArgumentParser(prog="prmeasures",
                                     description="Pseudorandom measures and randomness tests.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write constructed sequences")
    g.add_argument("kind", nargs="?",
                   choices=("legendre", "inverse", "ec", "thue-morse", "rudin-shapiro", "periodic"))
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--manifest", help="regenerate the sequences listed in a manifest")
    g.add_argument("--count", type=_positive, default=1)
    g.add_argument("--start", type=int, default=1, help="first family index i")
    g.add_argument("--p", type=int)
    g.add_argument("--poly", help="polynomial in x; a bare i is the family index")
    g.add_argument("--half", action="store_true", help="inverse: keep n = 0..(p-1)/2")
    g.add_argument("--a", type=int)
    g.add_argument("--b", type=int)
    g.add_argument("--gx", type=int)
    g.add_argument("--gy", type=int)
    g.add_argument("--order", type=int, help="order T of the base point")
    g.add_argument("--function", help="curve function in x, y; a bare i is the family index")
    g.add_argument("--length", type=_positive)
    g.add_argument("--pattern", help="period, e.g. +--+")
    g.add_argument("--reps", type=_positive)
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("measure", parents=[common], help="compute W, C_k, Q_k, N_k")
    m.add_argument("file")
    m.add_argument("--measures", default="W,C2")
    m.add_argument("--b-max", type=_positive)
    m.add_argument("--d-max", type=int)
    m.add_argument("--samples", type=int)
    m.add_argument("--out", help="write records here instead of stdout")
    m.set_defaults(func=cmd_measure)

    t = sub.add_parser("test", parents=[common], help="run the test suite and summarise")
    t.add_argument("files", nargs="+")
    t.add_argument("--config", help="key=value suite configuration")
    t.add_argument("--alpha", type=float)
    t.add_argument("--out", help="directory for results, report and manifest")
    t.set_defaults(func=cmd_test)

    v = sub.add_parser("verify", parents=[common], help="check the proven inequalities")
    v.add_argument("target", nargs="?", default="all")
    v.add_argument("--full", action="store_true", help="include experiment-scale constructions")
    v.add_argument("--out", help="directory for check records")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
