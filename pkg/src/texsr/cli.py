"""Command-line interface.

Subcommands: ``degrade``, ``build-model``, ``sample``, ``cgd-sample``,
``variance``, ``metrics``, ``inspect-kernel``.  The ``--output`` value
is a path *prefix*: each command appends suffixes like ``_sample_0.pfm``
and always writes an effective-configuration echo to
``<output>.config.txt`` so any run can be reproduced from its outputs.

All numeric data flows through PFM files; PNGs are 8-bit previews only.
Batch sampling uses seeds ``seed, seed+1, ..., seed+count-1``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
degeneracy.  Errors are reported as a single ``error: ...`` line on
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import scipy.fft

from . import analysis, cgd, fileio, kriging, operators
from .adsn import build_model
from .errors import (
    AllFrequenciesZeroed,
    CorruptHeader,
    DegenerateModel,
    NumericalBreakdown,
    TexsrError,
    UnsupportedFormat,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DEGENERATE = 4


class _Parser(argparse.ArgumentParser):
    """Argument parser honouring the single-line stderr error contract."""

    def error(self, message):
        raise _ConfigError(message)


class _ConfigError(Exception):
    pass


def _add_common_output(p):
    p.add_argument("--output", required=True, help="output path prefix")


def _add_operator_flags(p):
    p.add_argument("--stride", type=int, required=True,
                   help="zoom-out factor r (divides both image dimensions)")
    p.add_argument("--operator", default="bicubic",
                   help="'bicubic' or 'file:<path>' to a kernel tap table")


def _add_model_flags(p):
    p.add_argument("--no-periodic", action="store_true",
                   help="skip the periodic-component step on the reference")
    p.add_argument("--gray", action="store_true",
                   help="collapse colour input to a single channel (average)")


def build_parser() -> _Parser:
    parser = _Parser(prog="texsr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="blur + subsample an image")
    p.add_argument("--input", required=True)
    _add_common_output(p)
    _add_operator_flags(p)
    p.add_argument("--peak", type=float, default=255.0)
    p.add_argument("--gray", action="store_true")

    p = sub.add_parser("build-model", help="extract a texture model")
    p.add_argument("--reference", required=True)
    _add_common_output(p)
    _add_model_flags(p)

    for name in ("sample", "cgd-sample"):
        p = sub.add_parser(
            name,
            help="conditional super-resolution sampling"
            + (" (iterative reference solver)" if name == "cgd-sample" else ""),
        )
        p.add_argument("--input", required=True, help="low-resolution image")
        p.add_argument("--reference", required=True, help="texture reference image")
        _add_common_output(p)
        _add_operator_flags(p)
        p.add_argument("--epsilon", type=float, default=kriging.DEFAULT_EPSILON)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--count", type=int, default=1)
        p.add_argument("--peak", type=float, default=255.0)
        _add_model_flags(p)
        if name == "cgd-sample":
            p.add_argument("--cgd-steps", type=int, default=1000)
            p.add_argument("--cgd-eps", type=float, default=0.0)

    p = sub.add_parser("variance", help="per-pixel variance maps of the sampler")
    p.add_argument("--reference", required=True)
    p.add_argument("--input", help="low-resolution image for empirical sampling")
    _add_common_output(p)
    _add_operator_flags(p)
    p.add_argument("--epsilon", type=float, default=kriging.DEFAULT_EPSILON)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=0,
                   help="empirical sample count (0 = theoretical map only)")
    _add_model_flags(p)

    p = sub.add_parser("metrics", help="fidelity metrics between two images")
    p.add_argument("--input", required=True, help="reconstruction")
    p.add_argument("--reference", required=True, help="ground truth")
    _add_common_output(p)
    p.add_argument("--stride", type=int)
    p.add_argument("--operator", default="bicubic")
    p.add_argument("--peak", type=float, default=255.0)
    p.add_argument("--gray", action="store_true")

    p = sub.add_parser("inspect-kernel",
                       help="spectrum visualizations of the predictor")
    p.add_argument("--reference", required=True)
    _add_common_output(p)
    _add_operator_flags(p)
    p.add_argument("--epsilon", type=float, default=kriging.DEFAULT_EPSILON)
    _add_model_flags(p)

    return parser


_ECHO_KEYS = (
    "input", "reference", "output", "stride", "operator", "epsilon", "seed",
    "count", "cgd_steps", "cgd_eps", "peak", "no_periodic", "gray",
)


def _echo_config(args, extra: dict | None = None) -> None:
    lines = [f"command={args.command}"]
    ns = vars(args)
    for key in _ECHO_KEYS:
        if key in ns and ns[key] is not None:
            lines.append(f"{key}={ns[key]}")
    for key, value in (extra or {}).items():
        lines.append(f"{key}={value}")
    with open(f"{args.output}.config.txt", "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_planes(path, gray: bool) -> np.ndarray:
    planes, _ = fileio.read_image(path)
    if gray and planes.ndim == 3:
        planes = planes.mean(axis=0)
    return planes


def _make_operator(args, m: int, n: int) -> operators.DegradationOperator:
    spec = args.operator
    if spec == "bicubic":
        return operators.bicubic_operator(m, n, args.stride)
    if spec.startswith("file:"):
        taps, center = fileio.read_kernel_file(spec[len("file:"):])
        return operators.custom_operator(taps, center, args.stride, m, n)
    raise _ConfigError(
        f"--operator must be 'bicubic' or 'file:<path>', got {spec!r}"
    )


def _write_outputs(prefix: str, suffix: str, planes, peak: float) -> None:
    fileio.write_pfm(f"{prefix}_{suffix}.pfm", planes)
    fileio.write_png(f"{prefix}_{suffix}.png", planes, peak)


def cmd_degrade(args) -> int:
    planes = _load_planes(args.input, args.gray)
    op = _make_operator(args, planes.shape[-2], planes.shape[-1])
    lr = operators.apply(op, planes)
    fileio.write_pfm(f"{args.output}.pfm", lr)
    fileio.write_png(f"{args.output}.png", lr, args.peak)
    _echo_config(args)
    return EXIT_OK


def cmd_build_model(args) -> int:
    ref = _load_planes(args.reference, args.gray)
    model = build_model(ref, use_periodic=not args.no_periodic)
    textons = model.textons[0] if model.channels == 1 else model.textons
    fileio.write_pfm(f"{args.output}_texton.pfm", textons)
    extra = {f"mean_{ch}": float(m) for ch, m in enumerate(model.means)}
    extra["channels"] = model.channels
    _echo_config(args, extra)
    return EXIT_OK


def _sampling_setup(args):
    lr = _load_planes(args.input, args.gray)
    ref = _load_planes(args.reference, args.gray)
    model = build_model(ref, use_periodic=not args.no_periodic)
    op = _make_operator(args, *model.grid_shape)
    lr_channels = 1 if lr.ndim == 2 else lr.shape[0]
    if lr_channels != model.channels or lr.shape[-2:] != op.lr_shape:
        raise _ConfigError(
            f"low-resolution input {lr.shape} does not match reference grid "
            f"{model.grid_shape} with stride {args.stride}"
        )
    return lr, model, op


def cmd_sample(args) -> int:
    lr, model, op = _sampling_setup(args)
    try:
        kernel = kriging.kriging_kernel(model, op, args.epsilon)
    except DegenerateModel:
        kernel = None  # sr_sample falls back to the mean image
    for k in range(args.count):
        s = kriging.sr_sample(
            model, lr, op, args.seed + k, args.epsilon, kernel=kernel
        )
        _write_outputs(args.output, f"sample_{k}", s.sample, args.peak)
        _write_outputs(args.output, f"innovation_{k}",
                       s.innovation_component, args.peak)
        if k == 0:
            _write_outputs(args.output, "kriging",
                           s.kriging_component, args.peak)
    _echo_config(args)
    return EXIT_OK


def cmd_cgd_sample(args) -> int:
    lr, model, op = _sampling_setup(args)
    config = cgd.CgdConfig(epsilon=args.cgd_eps, max_steps=args.cgd_steps)
    report_lines = [f"max_steps={config.max_steps}", f"epsilon={config.epsilon}"]
    for k in range(args.count):
        info: dict = {}
        s = cgd.cgd_sr_sample(model, lr, op, args.seed + k, config, info)
        _write_outputs(args.output, f"sample_{k}", s.sample, args.peak)
        _write_outputs(args.output, f"innovation_{k}",
                       s.innovation_component, args.peak)
        if k == 0:
            _write_outputs(args.output, "kriging",
                           s.kriging_component, args.peak)
        for part in ("kriging_solve", "innovation_solve"):
            report_lines.append(
                f"sample_{k}_{part}_residual={info[part]['residual_norm']!r}"
            )
            report_lines.append(
                f"sample_{k}_{part}_iterations={info[part]['iterations']}"
            )
    with open(f"{args.output}_residual.txt", "w") as fh:
        fh.write("\n".join(report_lines) + "\n")
    _echo_config(args)
    return EXIT_OK


def cmd_variance(args) -> int:
    ref = _load_planes(args.reference, args.gray)
    model = build_model(ref, use_periodic=not args.no_periodic)
    op = _make_operator(args, *model.grid_shape)
    kernel = kriging.kriging_kernel(model, op, args.epsilon)
    theo = analysis.theoretical_variance_map(model, op, kernel)
    fileio.write_pfm(f"{args.output}_variance_theoretical.pfm", theo.total)
    scale = float(theo.total.max())
    preview_peak = scale if scale > 0.0 else 1.0
    fileio.write_png(f"{args.output}_variance_theoretical.png",
                     theo.total, preview_peak)
    if args.count:
        if args.input is not None:
            lr = _load_planes(args.input, args.gray)
        else:
            lr = operators.apply(op, ref)
        samples = [
            kriging.sr_sample(model, lr, op, args.seed + k,
                              args.epsilon, kernel=kernel).sample
            for k in range(args.count)
        ]
        emp = analysis.empirical_variance_map(samples)
        fileio.write_pfm(f"{args.output}_variance_empirical.pfm", emp.total)
        fileio.write_png(f"{args.output}_variance_empirical.png",
                         emp.total, preview_peak)
    _echo_config(args)
    return EXIT_OK


def cmd_metrics(args) -> int:
    u = _load_planes(args.input, args.gray)
    ref = _load_planes(args.reference, args.gray)
    op = None
    if args.stride is not None:
        op = _make_operator(args, ref.shape[-2], ref.shape[-1])
    report = analysis.metrics_report(u, ref, args.peak, op)
    flat = report.as_dict()
    with open(f"{args.output}.txt", "w") as fh:
        for key, value in flat.items():
            fh.write(f"{key}={value!r}\n")
    with open(f"{args.output}.json", "w") as fh:
        json.dump(flat, fh, indent=2)
        fh.write("\n")
    _echo_config(args)
    return EXIT_OK


def cmd_inspect_kernel(args) -> int:
    ref = _load_planes(args.reference, args.gray)
    model = build_model(ref, use_periodic=not args.no_periodic)
    op = _make_operator(args, *model.grid_shape)
    kernel = kriging.kriging_kernel(model, op, args.epsilon)
    cov_spectra = []
    pinv_spectra = []
    for ch in range(model.channels):
        cov = kriging.lr_covariance_kernel(model.textons[ch], op)
        cov_spectra.append(scipy.fft.fft2(cov))
        pinv, _ = kriging.pseudo_inverse_kernel(cov, args.epsilon)
        pinv_spectra.append(scipy.fft.fft2(pinv))
    fileio.write_spectrum_png(
        f"{args.output}_predictor_spectrum.png", kernel.spectrum
    )
    fileio.write_spectrum_png(
        f"{args.output}_lr_covariance_spectrum.png", np.stack(cov_spectra)
    )
    fileio.write_spectrum_png(
        f"{args.output}_lr_covariance_pinv_spectrum.png", np.stack(pinv_spectra)
    )
    _echo_config(args, {"zeroed_frequencies": kernel.zeroed_frequencies})
    return EXIT_OK


_COMMANDS = {
    "degrade": cmd_degrade,
    "build-model": cmd_build_model,
    "sample": cmd_sample,
    "cgd-sample": cmd_cgd_sample,
    "variance": cmd_variance,
    "metrics": cmd_metrics,
    "inspect-kernel": cmd_inspect_kernel,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateModel, AllFrequenciesZeroed, NumericalBreakdown) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (CorruptHeader, UnsupportedFormat, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TexsrError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
