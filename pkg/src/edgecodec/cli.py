"""Command line front end: encode, decode, inspect, metrics.

Exit codes: 0 success, 1 usage error, 2 malformed data, 3 I/O failure.
Output files are written atomically (temp file + rename), so a failed run
never leaves a partial file behind.
"""

import argparse
import os
import sys
import tempfile

from . import bitstream, metrics
from .edge import EdgeParams
from .errors import CodecError
from .image_io import load_image, save_image
from .reconstruct import ReconParams, export_emc
from .vectorizer import DEFAULT_FIT_TOL

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; remap onto our code
    def error(self, message):
        raise _UsageError(message)


def _write_atomic(path: str, data: bytes):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _save_image_atomic(img, path: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        save_image(img, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cmd_encode(args) -> int:
    img = load_image(args.input)
    params = EdgeParams(
        low_threshold=args.edge_low,
        high_threshold=args.edge_high,
        min_component_pixels=args.min_component,
    )
    coded = bitstream.encode(
        img,
        with_color=args.layers == "full",
        edge_params=params,
        fit_tol=args.fit_tol,
    )
    data = bitstream.pack(coded)
    _write_atomic(args.output, data)
    base_bpp = metrics.bpp(len(coded.base), img.width, img.height)
    enh_bpp = metrics.bpp(len(coded.enh or b""), img.width, img.height)
    total_bpp = metrics.bpp(len(data), img.width, img.height)
    print(f"base_bpp={base_bpp:.6f}")
    print(f"enh_bpp={enh_bpp:.6f}")
    print(f"total_bpp={total_bpp:.6f}")
    return EXIT_OK


def _cmd_decode(args) -> int:
    with open(args.input, "rb") as fh:
        coded = bitstream.unpack(fh.read())
    recon = ReconParams(
        max_iterations=args.recon_iterations,
        tolerance=args.recon_tolerance,
    )
    if args.mode == "classical":
        img = bitstream.decode(coded, mode="classical", recon_params=recon)
        _save_image_atomic(img, args.output)
    else:
        edges, mask, colors = bitstream.decode(coded, mode="export")
        export_emc(edges, mask, colors, args.output)
    return EXIT_OK


def _cmd_inspect(args) -> int:
    with open(args.input, "rb") as fh:
        data = fh.read()
    coded = bitstream.unpack(data)
    serialized = bitstream.ppm_decompress(coded.base, bitstream.BASE_PPM)
    drawing = bitstream.deserialize_params(serialized, coded.width, coded.height)
    moves, lines, curves = drawing.op_counts()
    print(f"size: {coded.width}x{coded.height}")
    print(f"version: {coded.version}")
    print(f"base: {len(coded.base)} bytes ({metrics.bpp(len(coded.base), coded.width, coded.height):.6f} bpp)")
    print(f"ops: M={moves} L={lines} C={curves}")
    if coded.enh is None:
        print("enhancement: absent")
    else:
        raster = bitstream.rasterize(drawing)
        positions = bitstream.sample_positions(drawing, raster, bitstream.FORMAT_SAMPLING)
        print(
            f"enhancement: {len(coded.enh)} bytes "
            f"({metrics.bpp(len(coded.enh), coded.width, coded.height):.6f} bpp)"
        )
        print(f"positions: {len(positions)}")
    print(f"total: {len(data)} bytes ({metrics.bpp(len(data), coded.width, coded.height):.6f} bpp)")
    return EXIT_OK


def _cmd_metrics(args) -> int:
    if len(args.files) % 3 != 0:
        raise _UsageError("metrics expects ORIGINAL RECON STREAM triples")
    rows = []
    for i in range(0, len(args.files), 3):
        orig_path, recon_path, stream_path = args.files[i : i + 3]
        orig = load_image(orig_path)
        recon = load_image(recon_path)
        nbytes = os.path.getsize(stream_path)
        rows.append(
            {
                "name": os.path.basename(orig_path),
                "bpp": metrics.bpp(nbytes, orig.width, orig.height),
                "psnr": metrics.psnr(orig, recon),
                "ssim": metrics.ssim(orig, recon),
                "nme": None,
            }
        )
    text = metrics.metrics_csv(rows)
    if args.output:
        _write_atomic(args.output, text.encode())
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="edgecodec", description="Two-layer edge and color image codec")
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="compress an image")
    enc.add_argument("input", help="source PPM (P6)")
    enc.add_argument("output", help="coded stream path")
    enc.add_argument("--layers", choices=("base", "full"), default="full")
    enc.add_argument("--edge-low", type=float, default=EdgeParams().low_threshold)
    enc.add_argument("--edge-high", type=float, default=EdgeParams().high_threshold)
    enc.add_argument("--min-component", type=int, default=EdgeParams().min_component_pixels)
    enc.add_argument("--fit-tol", type=float, default=DEFAULT_FIT_TOL)
    enc.set_defaults(func=_cmd_encode)

    dec = sub.add_parser("decode", help="decompress a stream")
    dec.add_argument("input", help="coded stream path")
    dec.add_argument("output", help="output image (classical) or directory (export)")
    dec.add_argument("--mode", choices=("classical", "export"), default="classical")
    dec.add_argument("--recon-iterations", type=int, default=ReconParams().max_iterations)
    dec.add_argument("--recon-tolerance", type=float, default=ReconParams().tolerance)
    dec.set_defaults(func=_cmd_decode)

    ins = sub.add_parser("inspect", help="print stream structure")
    ins.add_argument("input", help="coded stream path")
    ins.set_defaults(func=_cmd_inspect)

    met = sub.add_parser("metrics", help="score decoded images against originals")
    met.add_argument("files", nargs="+", help="ORIGINAL RECON STREAM triples")
    met.add_argument("-o", "--output", help="write CSV here instead of stdout")
    met.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CodecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
