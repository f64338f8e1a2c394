"""Command-line front end.

Raw fields are headerless little-endian float32/float64 dumps in C order
(x fastest); their shape comes from ``--dims NZ NY NX`` and ``--type``.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time

import numpy as np

from . import metrics
from .codec import compress, decompress_full, decompress_to_level
from .container import CompressedArchive
from .core import Box
from .exceptions import HierzipError
from .random_access import decompress_box, decompress_slice, parse_slice
from .roi import Unit, boxes_for, format_boxes, parse_boxes, select_threshold, select_top_percent, unit_stats
from .synthetic import KINDS, make

TYPES = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}
CSV_COLUMNS = ["quality", "eb", "cr", "psnr", "max_err", "bits_per_value"]


def read_raw(path: str, dims, type_name: str) -> np.ndarray:
    dtype = TYPES[type_name]
    expected = math.prod(dims) * dtype.itemsize
    size = os.path.getsize(path)
    if size != expected:
        raise HierzipError(
            f"{path}: file has {size} bytes but dims {tuple(dims)} x {type_name} need {expected}"
        )
    return np.fromfile(path, dtype=dtype).reshape(dims).astype(dtype.newbyteorder("="))


def write_raw(path: str, array: np.ndarray) -> None:
    array = np.ascontiguousarray(array)
    array.astype(array.dtype.newbyteorder("<")).tofile(path)


def read_archive(path: str) -> CompressedArchive:
    with open(path, "rb") as fh:
        return CompressedArchive.from_bytes(fh.read())


def _add_field_args(p, required=True):
    p.add_argument("-i", "--input", required=required, help="raw input file")
    p.add_argument("--dims", type=int, nargs=3, metavar=("NZ", "NY", "NX"), required=required)
    p.add_argument("--type", choices=sorted(TYPES), default="f32")


def cmd_compress(args) -> int:
    field = read_raw(args.input, args.dims, args.type)
    if (args.eb_rel is None) == (args.eb_abs is None):
        raise HierzipError("give exactly one of --eb-rel / --eb-abs")
    mode, eb = ("rel", args.eb_rel) if args.eb_rel is not None else ("abs", args.eb_abs)
    archive = compress(
        field,
        eb,
        mode=mode,
        levels=args.levels,
        quality=args.quality,
        adaptive=not args.uniform_eb,
        n_threads=args.threads,
    )
    with open(args.output, "wb") as fh:
        fh.write(archive.to_bytes())
    print(f"cr={field.nbytes / archive.nbytes:.6g}")
    print(f"bytes={archive.nbytes}")
    return 0


def cmd_decompress(args) -> int:
    archive = read_archive(args.archive)
    picked = sum(x is not None for x in (args.level, args.box, args.slice, args.boxes))
    if picked > 1:
        raise HierzipError("--level, --box, --boxes and --slice are mutually exclusive")
    if args.boxes is not None:
        with open(args.boxes) as fh:
            boxes = parse_boxes(fh.read())
        for i, box in enumerate(boxes):
            write_raw(f"{args.output}{i:04d}.raw", decompress_box(archive, box, n_threads=args.threads))
        print(f"boxes={len(boxes)}")
        return 0
    if args.level is not None:
        out = decompress_to_level(archive, args.level, n_threads=args.threads)
    elif args.box is not None:
        box = Box.parse(args.box)
        out, plan, stats = decompress_box(archive, box, n_threads=args.threads, return_plan=True)
        _print_stats(plan, stats)
    elif args.slice is not None:
        axis, index = parse_slice(args.slice)
        out, plan, stats = decompress_slice(archive, axis, index, n_threads=args.threads, return_plan=True)
        _print_stats(plan, stats)
    else:
        out = decompress_full(archive, n_threads=args.threads)
    write_raw(args.output, out)
    print("shape=" + "x".join(str(n) for n in out.shape))
    return 0


def _print_stats(plan, stats):
    for level in range(2, plan.layout.levels + 1):
        print(f"l{level}_streams_decoded={stats.n_decoded(level)}/7")
        print(f"l{level}_points_predicted={stats.points_predicted.get(level, 0)}/{plan.points_total(level)}")


def cmd_roi(args) -> int:
    field = read_raw(args.input, args.dims, args.type)
    unit = Unit.parse(args.unit)
    stats = unit_stats(field, unit, args.stat)
    if (args.threshold is None) == (args.top is None):
        raise HierzipError("give exactly one of --threshold / --top")
    if args.threshold is not None:
        ids = select_threshold(stats, args.threshold)
    else:
        ids = select_top_percent(stats, args.top)
    text = format_boxes(boxes_for(field.shape, unit, ids))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    selected = sum(math.prod(b.shape) for b in boxes_for(field.shape, unit, ids))
    print(f"units={len(ids)}/{len(stats)} fraction={selected / field.size:.6g}", file=sys.stderr)
    return 0


def cmd_metrics(args) -> int:
    orig = read_raw(args.orig, args.dims, args.type)
    recon = read_raw(args.recon, args.dims, args.type)
    values = {"psnr": metrics.psnr(orig, recon), "max_err": metrics.max_abs_err(orig, recon)}
    if args.archive:
        size = os.path.getsize(args.archive)
        values["cr"] = metrics.compression_ratio(orig.nbytes, size)
        values["bits_per_value"] = metrics.bitrate(size, orig.size)
    sys.stdout.write(metrics.format_report(values))
    return 0


def cmd_info(args) -> int:
    archive = read_archive(args.archive)
    h = archive.header
    lines = {
        "version": h.version,
        "dims": " ".join(str(n) for n in h.dims),
        "type": "f32" if np.dtype(h.dtype).itemsize == 4 else "f64",
        "levels": h.levels,
        "quality": h.quality,
        "eb_mode": "rel" if h.rel_mode else "abs",
        "eb_requested": repr(h.eb_requested),
        "eb_schedule": " ".join(repr(e) for e in h.eb_schedule),
        "adaptive": int(h.adaptive),
        "degenerate": int(h.degenerate),
        "value_min": repr(h.value_min),
        "value_max": repr(h.value_max),
        "bytes": archive.nbytes,
        "base_bytes": h.base_length,
        "streams": len(archive.directory),
    }
    for k, v in lines.items():
        print(f"{k}={v}")
    if args.verbose:
        for e in archive.directory:
            print(
                f"stream level={e.level} parity={''.join(map(str, e.parity))} "
                f"bytes={e.length} symbols={e.symbol_count} outliers={e.outlier_count}"
            )
    return 0


def _sweep_input(args):
    if args.synthetic:
        dims = tuple(args.dims) if args.dims else (64, 64, 64)
        return make(args.synthetic, dims, dtype=TYPES[args.type].newbyteorder("="))
    if not args.input or not args.dims:
        raise HierzipError("rd-sweep needs -i/--dims or --synthetic")
    return read_raw(args.input, args.dims, args.type)


def cmd_rd_sweep(args) -> int:
    field = _sweep_input(args)
    rows = []
    for quality in args.qualities:
        for eb in args.ebs:
            archive = compress(
                field, eb, mode="rel", levels=args.levels, quality=quality,
                adaptive=not args.uniform_eb, n_threads=args.threads,
            )
            recon = decompress_full(archive, n_threads=args.threads)
            r = metrics.report(field, recon, archive.nbytes)
            rows.append({"quality": quality, "eb": eb, **{k: r[k] for k in CSV_COLUMNS[2:]}})
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_bench(args) -> int:
    for n in args.sizes:
        field = make("gaussians", (n, n, n))
        t0 = time.perf_counter()
        archive = compress(field, args.eb, levels=args.levels, n_threads=args.threads)
        t1 = time.perf_counter()
        decompress_full(archive, n_threads=args.threads)
        t2 = time.perf_counter()
        mb = field.nbytes / 2**20
        print(f"size={n}^3 compress_mb_s={mb / (t1 - t0):.1f} decompress_mb_s={mb / (t2 - t1):.1f} "
              f"cr={field.nbytes / archive.nbytes:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hierzip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress a raw field")
    _add_field_args(p)
    p.add_argument("--eb-rel", type=float)
    p.add_argument("--eb-abs", type=float)
    p.add_argument("--levels", type=int, choices=(2, 3), default=3)
    p.add_argument("--quality", choices=("direct", "linear", "cubic"), default="cubic")
    p.add_argument("--uniform-eb", action="store_true", help="disable the per-level bound schedule")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="full, progressive or random-access decompression")
    p.add_argument("archive")
    p.add_argument("--level", type=int)
    p.add_argument("--box", help="z0:z1,y0:y1,x0:x1 (half-open)")
    p.add_argument("--boxes", help="file with one box per line; writes OUTPUT0000.raw, ...")
    p.add_argument("--slice", help="axis=index, e.g. z=10")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("roi", help="select regions of interest")
    _add_field_args(p)
    p.add_argument("--unit", required=True, help="slice=z|y|x or block=EDGE")
    p.add_argument("--stat", choices=("range", "max"), default="max")
    p.add_argument("--threshold", type=float)
    p.add_argument("--top", type=float, help="select the top X percent of units")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_roi)

    p = sub.add_parser("metrics", help="compare an original and a reconstruction")
    p.add_argument("--orig", required=True)
    p.add_argument("--recon", required=True)
    p.add_argument("--dims", type=int, nargs=3, required=True)
    p.add_argument("--type", choices=sorted(TYPES), default="f32")
    p.add_argument("--archive", help="archive file, adds cr and bits_per_value")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("info", help="dump an archive header")
    p.add_argument("archive")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("rd-sweep", help="rate-distortion CSV per quality mode")
    _add_field_args(p, required=False)
    p.add_argument("--synthetic", choices=KINDS)
    p.add_argument("--ebs", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4])
    p.add_argument("--qualities", nargs="+", choices=("direct", "linear", "cubic"),
                   default=["direct", "linear", "cubic"])
    p.add_argument("--levels", type=int, choices=(2, 3), default=3)
    p.add_argument("--uniform-eb", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_rd_sweep)

    p = sub.add_parser("bench", help="throughput on synthetic cubes")
    p.add_argument("--sizes", type=int, nargs="+", default=[64, 256])
    p.add_argument("--eb", type=float, default=1e-3)
    p.add_argument("--levels", type=int, choices=(2, 3), default=3)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HierzipError, OSError, ValueError) as exc:
        print(f"hierzip: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
