"""Command-line front end; every subcommand is a thin shell over the library.

Exit codes: 0 success, 1 usage error, 2 data/resource error, 3 numerical
guard trip.  Numeric results travel through SSF1 containers; summaries go
to standard output, diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys

from ._parallel import THREADS_ENV
from .correlation import (
    multichannel_correlate,
    rotate_s2_spectral,
    rotate_so3_spectral,
)
from .gft import (
    GuardError,
    S2Signal,
    S2Spectrum,
    SO3Signal,
    SO3Spectrum,
    s2_dft_forward,
    s2_dft_inverse,
    s2_fft_forward,
    s2_fft_inverse,
    so3_dft_forward,
    so3_dft_inverse,
    so3_fft_forward,
    so3_fft_inverse,
)
from .grids import Rotation
from .harness import (
    EquivarianceConfig,
    run_bench,
    run_equivariance,
    write_reports_csv,
    write_reports_jsonl,
)
from .harmonics import ResourceLimitError
from .oracle import rotate_s2_by_resampling, rotate_so3_by_resampling
from .signals import (
    ContainerError,
    molecule_channels,
    project_image,
    read_container,
    read_container_header,
    read_molecule,
    read_pgm,
    write_container,
)

__all__ = ["UsageError", "main"]


class UsageError(Exception):
    """Bad flags or arguments; mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want code 1
        raise UsageError(message)


def _bandwidth_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bandwidth must be an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"bandwidth must be >= 1, got {value}")
    return value


def _bandwidth_list_arg(text: str) -> list[int]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("expected a comma-separated bandwidth list")
    return [_bandwidth_arg(p.strip()) for p in parts]


_TRANSFORMS = {
    ("s2", "forward", "fast"): s2_fft_forward,
    ("s2", "forward", "direct"): s2_dft_forward,
    ("s2", "inverse", "fast"): s2_fft_inverse,
    ("s2", "inverse", "direct"): s2_dft_inverse,
    ("so3", "forward", "fast"): so3_fft_forward,
    ("so3", "forward", "direct"): so3_dft_forward,
    ("so3", "inverse", "fast"): so3_fft_inverse,
    ("so3", "inverse", "direct"): so3_dft_inverse,
}

_SIGNAL_TYPES = {"s2": S2Signal, "so3": SO3Signal}
_SPECTRUM_TYPES = {"s2": S2Spectrum, "so3": SO3Spectrum}


def _cmd_transform(args) -> int:
    obj = read_container(args.input)
    wanted = (
        _SIGNAL_TYPES[args.kind]
        if args.direction == "forward"
        else _SPECTRUM_TYPES[args.kind]
    )
    if not isinstance(obj, wanted):
        raise ValueError(
            f"{args.input} holds {type(obj).__name__}, but --kind {args.kind} "
            f"--dir {args.direction} needs {wanted.__name__}"
        )
    result = _TRANSFORMS[(args.kind, args.direction, args.path)](obj)
    write_container(args.output, result)
    print(
        f"{args.kind} {args.direction} ({args.path}) b={obj.bandwidth} "
        f"channels={obj.channels} -> {args.output}"
    )
    return 0


def _cmd_correlate(args) -> int:
    bank = read_container(args.filter)
    signal = read_container(args.signal)
    wanted = _SIGNAL_TYPES[args.kind]
    for name, obj in (("filter", bank), ("signal", signal)):
        if not isinstance(obj, wanted):
            raise ValueError(
                f"{name} container holds {type(obj).__name__}, expected "
                f"{wanted.__name__}"
            )
    out = multichannel_correlate(
        bank,
        signal,
        bandwidth_out=args.bandwidth_out,
        out_channels=args.out_channels,
    )
    write_container(args.output, out)
    print(
        f"correlated {bank.channels}-channel bank with "
        f"{signal.channels}-channel signal -> {args.output} "
        f"(b={out.bandwidth}, channels={out.channels})"
    )
    return 0


def _cmd_rotate(args) -> int:
    obj = read_container(args.input)
    rotation = Rotation(args.alpha, args.beta, args.gamma)
    if isinstance(obj, S2Signal):
        fn = rotate_s2_spectral if args.method == "spectral" else rotate_s2_by_resampling
    elif isinstance(obj, SO3Signal):
        fn = rotate_so3_spectral if args.method == "spectral" else rotate_so3_by_resampling
    else:
        raise ValueError(
            f"{args.input} holds {type(obj).__name__}; rotate needs a signal"
        )
    write_container(args.output, fn(obj, rotation))
    print(
        f"rotated by (alpha={rotation.alpha:.6g}, beta={rotation.beta:.6g}, "
        f"gamma={rotation.gamma:.6g}) via {args.method} -> {args.output}"
    )
    return 0


def _cmd_equivariance(args) -> int:
    config = EquivarianceConfig(
        bandwidth=args.bandwidth,
        layers=args.layers,
        channels=args.channels,
        trials=500 if args.full_scale else args.trials,
        with_relu=args.relu,
        rotation_source=args.rotation,
        seed=args.seed,
    )
    report = run_equivariance(config, threads=args.threads)
    print(
        f"b={config.bandwidth} L={config.layers} relu={config.with_relu} "
        f"n={config.trials}: delta={report.delta:.6e} "
        f"(p50={report.delta_p50:.3e}, p95={report.delta_p95:.3e}, "
        f"{report.seconds:.2f}s)"
    )
    if args.output:
        write_reports_jsonl([report], args.output)
    if args.csv:
        write_reports_csv([report], args.csv)
    return 0


def _cmd_bench(args) -> int:
    records = run_bench(args.bandwidths, args.kind, args.repetitions)
    for record in records:
        if record.get("note"):
            line = f"{record['kind']:>3} b={record['bandwidth']:<3} {record['op']:<7} {record['path']:<6} {record['note']}"
        else:
            line = (
                f"{record['kind']:>3} b={record['bandwidth']:<3} "
                f"{record['op']:<7} {record['path']:<6} "
                f"{record['seconds'] * 1e3:10.3f} ms"
            )
        print(line)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record, sort_keys=True))
                fh.write("\n")
    return 0


def _cmd_project_image(args) -> int:
    image = read_pgm(args.image)
    signal = project_image(image, args.bandwidth)
    write_container(args.output, signal)
    print(
        f"projected {image.width}x{image.height} image onto b={args.bandwidth} "
        f"sphere -> {args.output}"
    )
    return 0


def _cmd_project_molecule(args) -> int:
    molecule = read_molecule(args.molecule, radius=args.radius)
    signal = molecule_channels(molecule, args.center, args.bandwidth)
    write_container(args.output, signal)
    print(
        f"projected {molecule.atom_count}-atom molecule (center {args.center}, "
        f"radius {molecule.radius:.6g}) onto b={args.bandwidth} sphere with "
        f"{signal.channels} charge channels -> {args.output}"
    )
    return 0


def _cmd_info(args) -> int:
    header = read_container_header(args.file)
    print(json.dumps(header, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--threads",
        type=int,
        default=None,
        metavar="N",
        help=f"worker cap for trial loops (0 = auto; default from ${THREADS_ENV})",
    )

    parser = _Parser(
        prog="so3fft",
        description="Harmonic analysis and correlation on the sphere and rotation group.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("transform", parents=[common], help="run a transform on a container")
    p.add_argument("--kind", choices=["s2", "so3"], required=True)
    p.add_argument("--dir", dest="direction", choices=["forward", "inverse"], required=True)
    p.add_argument("--path", choices=["fast", "direct"], default="fast")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("correlate", parents=[common], help="correlate a filter bank with a signal")
    p.add_argument("--kind", choices=["s2", "so3"], required=True)
    p.add_argument("--filter", required=True, help="filter bank container")
    p.add_argument("--signal", required=True, help="signal container")
    p.add_argument("--output", required=True)
    p.add_argument("--bandwidth-out", type=_bandwidth_arg, default=None)
    p.add_argument("--out-channels", type=int, default=None)
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("rotate", parents=[common], help="rotate a signal container")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--method", choices=["spectral", "resampling"], default="spectral")
    p.set_defaults(func=_cmd_rotate)

    p = sub.add_parser("equivariance", parents=[common], help="rotate-vs-apply drift experiment")
    p.add_argument("--bandwidth", type=_bandwidth_arg, required=True)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--channels", type=int, default=10)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--relu", action="store_true")
    p.add_argument("--rotation", choices=["spectral", "resampling"], default="spectral")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full-scale", action="store_true", help="run the full 500-trial protocol")
    p.add_argument("--output", default=None, help="JSONL report path")
    p.add_argument("--csv", default=None, help="CSV report path")
    p.set_defaults(func=_cmd_equivariance)

    p = sub.add_parser("bench", parents=[common], help="time fast vs. direct transforms")
    p.add_argument("--kind", choices=["s2", "so3"], default="so3")
    p.add_argument("--bandwidths", type=_bandwidth_list_arg, default=[2, 4, 8])
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--output", default=None, help="JSONL records path")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("project-image", parents=[common], help="stereographic image projection")
    p.add_argument("--image", required=True, help="P2/P5 graymap")
    p.add_argument("--bandwidth", type=_bandwidth_arg, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_project_image)

    p = sub.add_parser("project-molecule", parents=[common], help="per-charge potential channels")
    p.add_argument("--molecule", required=True, help="text file, 'charge x y z' per line")
    p.add_argument("--center", type=int, default=0)
    p.add_argument("--bandwidth", type=_bandwidth_arg, default=10)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_project_molecule)

    p = sub.add_parser("info", parents=[common], help="dump a container header")
    p.add_argument("file")
    p.set_defaults(func=_cmd_info)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        print(f"run '{parser.prog} --help' for details", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3
    except (ContainerError, ResourceLimitError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
