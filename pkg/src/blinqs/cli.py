"""Command-line front end.

Subcommands: encode, transcode, decode, rd-curve, compare.  Exit codes:
0 success, 1 usage error, 2 malformed input (image or stream), 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys

from .container import parse, serialize
from .errors import FormatError, InvariantError
from .pipeline import (
    DEFAULT_CB_SIZE,
    DEFAULT_DELTA_MAX,
    DEFAULT_LEVELS,
    compare,
    decode_pipeline,
    encode_image,
    pcrd_truncate,
    rd_curve,
    reports_to_csv,
)
from .raster import read_image, write_image
from .transcoder import STANDARD_RATES, transcode

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_INVARIANT = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_encode_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", type=int, default=DEFAULT_LEVELS,
                   help="decomposition levels (default %(default)s)")
    p.add_argument("--cb-size", type=int, default=DEFAULT_CB_SIZE,
                   help="code block side, power of two >= 8 (default %(default)s)")
    p.add_argument("--delta-max", type=int, default=DEFAULT_DELTA_MAX,
                   help="quantization step cap (default %(default)s)")


def _parse_rates(text: str) -> list[float]:
    try:
        rates = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValueError(f"bad rate list {text!r}") from exc
    if any(r <= 0 for r in rates):
        raise ValueError("rates must be positive bpp values")
    return rates


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blinqs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[], help="image -> .bqs stream")
    p.add_argument("input", help="source image (.pgm or .bmp)")
    p.add_argument("-o", "--output", required=True, help="output .bqs path")
    _add_encode_params(p)
    p.add_argument("--mode", choices=["blinqs", "pcrd"], default="blinqs",
                   help="blinqs: full-quality embedded stream; "
                        "pcrd: rate-distortion truncated at encode time")
    p.add_argument("--rate", type=float, help="target bpp (pcrd mode only)")

    p = sub.add_parser("transcode", help="blindly cut a stream to a target rate")
    p.add_argument("input", help="source .bqs stream")
    p.add_argument("-o", "--output", required=True, help="output .bqs path")
    p.add_argument("--rate", type=float, required=True, help="target bpp")
    p.add_argument("--report", help="sidecar JSON path (default: <output>.json)")
    p.add_argument("--k-max", type=int, default=16, help="rate grid depth")
    p.add_argument("--tol", type=float, default=1e-4, help="rate grid early-stop")

    p = sub.add_parser("decode", help=".bqs stream -> PGM image")
    p.add_argument("input", help="source .bqs stream")
    p.add_argument("-o", "--output", required=True, help="output .pgm path")

    p = sub.add_parser("rd-curve", help="rate sweep for one allocator")
    p.add_argument("input", help="source image (.pgm or .bmp)")
    p.add_argument("--rates", default=",".join(str(r) for r in STANDARD_RATES),
                   help="comma-separated bpp targets")
    p.add_argument("--mode", choices=["blinqs", "pcrd"], default="blinqs")
    p.add_argument("--csv", help="output CSV path (default: stdout)")
    p.add_argument("--rate-includes-header", action="store_true",
                   help="count header and marker bytes against the budget")
    _add_encode_params(p)

    p = sub.add_parser("compare", help="rate sweep for both allocators")
    p.add_argument("input", help="source image (.pgm or .bmp)")
    p.add_argument("--rates", default=",".join(str(r) for r in STANDARD_RATES),
                   help="comma-separated bpp targets")
    p.add_argument("--csv", help="output CSV path (default: stdout)")
    p.add_argument("--rate-includes-header", action="store_true",
                   help="count header and marker bytes against the budget")
    _add_encode_params(p)

    return parser


def _read_container(path: str):
    with open(path, "rb") as fh:
        return parse(fh.read())


def _write_bytes(path: str, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


def _cmd_encode(args) -> int:
    img = read_image(args.input)
    result = encode_image(
        img, levels=args.levels, cb_size=args.cb_size, delta_max=args.delta_max
    )
    if args.mode == "pcrd":
        if args.rate is None:
            raise ValueError("--mode pcrd requires --rate")
        container, _ = pcrd_truncate(result, args.rate)
    else:
        if args.rate is not None:
            raise ValueError("encode --rate only applies to --mode pcrd; "
                             "use the transcode subcommand for blind cuts")
        container = result.container
    _write_bytes(args.output, serialize(container))
    return EXIT_OK


def _cmd_transcode(args) -> int:
    container = _read_container(args.input)
    cut, report = transcode(container, args.rate, k_max=args.k_max, tol=args.tol)
    _write_bytes(args.output, serialize(cut))
    sidecar = args.report or (args.output + ".json")
    payload = {"input": args.input, "output": args.output, **report.as_dict()}
    with open(sidecar, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def _cmd_decode(args) -> int:
    container = _read_container(args.input)
    write_image(args.output, decode_pipeline(container))
    return EXIT_OK


def _emit_csv(args, reports) -> None:
    text = reports_to_csv(reports)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_rd_curve(args) -> int:
    img = read_image(args.input)
    sweep = rd_curve(
        img,
        _parse_rates(args.rates),
        mode=args.mode,
        name=args.input,
        levels=args.levels,
        cb_size=args.cb_size,
        delta_max=args.delta_max,
        rate_includes_header=args.rate_includes_header,
    )
    _emit_csv(args, sweep.reports)
    return EXIT_OK


def _cmd_compare(args) -> int:
    img = read_image(args.input)
    sweep = compare(
        img,
        _parse_rates(args.rates),
        name=args.input,
        levels=args.levels,
        cb_size=args.cb_size,
        delta_max=args.delta_max,
        rate_includes_header=args.rate_includes_header,
    )
    _emit_csv(args, sweep.reports)
    return EXIT_OK


_COMMANDS = {
    "encode": _cmd_encode,
    "transcode": _cmd_transcode,
    "decode": _cmd_decode,
    "rd-curve": _cmd_rd_curve,
    "compare": _cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"blinqs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        print(f"blinqs: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"blinqs: i/o error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except InvariantError as exc:
        print(f"blinqs: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
