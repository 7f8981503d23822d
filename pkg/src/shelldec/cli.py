"""Command-line tools: decompose, sum, resum, atom, serve.

Exit codes: 0 all curves converged, 1 decomposition did not converge,
2 usage error, 3 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .atoms import (
    AtomImageSpec,
    TableFormatError,
    atom_image,
    default_table_path,
    load_scattering_table,
)
from .decompose import PROTOCOLS, DecomposeConfig, decompose, refine, resolve_thresholds
from .expr import ExpressionError
from .shells import GridError, SampledCurve, evaluate_sum, make_grid


class UsageError(Exception):
    pass


_CONFIG_FLAGS = (
    ("max_peaks", int),
    ("eps_dec", float),
    ("eps_dec_scale", str),
    ("eps_peak", float),
    ("eps_term", float),
    ("protocol", str),
    ("b_min", float),
    ("c_min", float),
    ("decompose_range", str),
)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-peaks", type=int)
    p.add_argument("--eps-dec", type=float)
    p.add_argument("--eps-dec-scale", choices=("relative", "absolute"))
    p.add_argument("--eps-peak", type=float)
    p.add_argument("--eps-term", type=float)
    p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--b-min", type=float)
    p.add_argument("--c-min", type=float)
    p.add_argument("--decompose-range", help="accuracy interval, 'lo:hi' or 'hi'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shelldec",
        description="Shell decomposition of oscillating radial curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose curve-file columns into shell terms")
    p.add_argument("--params", help="parameter file with key = value lines")
    p.add_argument("--input", help="curve file (overrides the parameter file)")
    p.add_argument("--columns", help="comma-separated column labels or 1-based indices")
    p.add_argument("--coefficients-output")
    p.add_argument("--curves-output")
    _add_config_flags(p)

    p = sub.add_parser("sum", help="evaluate a coefficient file on a grid")
    p.add_argument("--coefficients", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--reference", help="curve file to difference against")
    p.add_argument("--labels", help="comma-separated block labels (default: all)")
    p.add_argument("--r-max", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--eps-term", type=float, default=1.0e-13)

    p = sub.add_parser("resum", help="like sum, optionally refining the coefficients first")
    p.add_argument("--coefficients", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--labels")
    p.add_argument("--refine", action="store_true")
    p.add_argument("--coefficients-output", help="where refined coefficients go")
    _add_config_flags(p)

    p = sub.add_parser("atom", help="synthesize resolution-limited atomic images")
    p.add_argument("--labels", required=True, help="comma-separated scatterer labels")
    p.add_argument("--resolution", type=float, required=True, help="cutoff d_high in A")
    p.add_argument("--b0", type=float, default=0.0, help="isotropic displacement in A^2")
    p.add_argument("--r-max", type=float, default=8.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--s-points", type=int, default=2001)
    p.add_argument("--table", help="scattering-factor table (default: bundled)")
    p.add_argument("--output", required=True)

    p = sub.add_parser("serve", help="run the interactive session API server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8440)
    p.add_argument("--table", help="scattering-factor table (default: bundled)")
    p.add_argument("--frontend", help="directory of static UI files to serve")

    return parser


def _merge_config(params: dict, args) -> DecomposeConfig:
    merged = dict(params)
    for key, cast in _CONFIG_FLAGS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    kwargs = {}
    for key in ("eps_dec", "eps_peak", "eps_term", "b_min", "c_min"):
        if key in merged:
            kwargs[key] = float(merged[key])
    if "max_peaks" in merged:
        kwargs["max_peaks"] = int(merged["max_peaks"])
    if "protocol" in merged:
        kwargs["protocol"] = str(merged["protocol"])
    if "eps_dec_scale" in merged:
        scale = str(merged["eps_dec_scale"])
        if scale not in ("relative", "absolute"):
            raise UsageError(f"eps_dec_scale must be relative or absolute, got {scale!r}")
        kwargs["eps_dec_absolute"] = scale == "absolute"
    if "decompose_range" in merged:
        kwargs["decompose_range"] = _parse_range(str(merged["decompose_range"]))
    try:
        return DecomposeConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return (0.0, float(parts[0]))
        if len(parts) == 2:
            return (float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise UsageError(f"bad range {text!r}; expected 'lo:hi' or 'hi'")


def _select_columns(table: fileio.CurveTable, selection: str | None):
    if selection is None:
        return table.curves()
    wanted = [tok.strip() for tok in selection.split(",") if tok.strip()]
    if not wanted:
        raise UsageError("empty column selection")
    labels = table.labels()
    picked = []
    for tok in wanted:
        if tok in labels:
            picked.append(table.curve(tok))
        elif tok.isdigit():
            idx = int(tok)
            if not (1 <= idx <= len(labels)):
                raise UsageError(f"column index {idx} out of range 1..{len(labels)}")
            picked.append(table.curve(labels[idx - 1]))
        else:
            raise UsageError(f"no column {tok!r}; available: {', '.join(labels)}")
    return picked


def _fit_columns(curve: SampledCurve, terms, eps_term: float):
    scale = abs(float(curve.f[0])) or float(np.max(np.abs(curve.f)))
    model = evaluate_sum(terms, curve.r, eps_term, scale)
    diff = curve.f - model
    return [
        (curve.label, curve.f),
        (f"{curve.label}_model", model),
        (f"{curve.label}_diff", diff),
    ], model, diff


def cmd_decompose(args) -> int:
    params = fileio.read_param_file(args.params) if args.params else {}
    config = _merge_config(params, args)
    input_path = args.input or params.get("input")
    if not input_path:
        raise UsageError("an input curve file is required (--input or parameter file)")
    table = fileio.read_curve_file(input_path)
    selection = args.columns or params.get("columns")
    curves = _select_columns(table, selection)

    coef_path = (
        args.coefficients_output
        or params.get("coefficients_output")
        or str(Path(input_path).with_suffix(".coef"))
    )
    fit_path = (
        args.curves_output
        or params.get("curves_output")
        or str(Path(input_path).with_suffix(".fit"))
    )

    blocks = []
    columns = []
    all_converged = True
    for curve in curves:
        dec = decompose(curve, config)
        blocks.append(fileio.CoefficientBlock(curve.label, "initial", dec.initial_terms))
        blocks.append(fileio.CoefficientBlock(curve.label, "refined", dec.terms))
        cols, _, _ = _fit_columns(curve, dec.terms, config.eps_term)
        columns.extend(cols)
        all_converged &= dec.converged
        print(
            f"{curve.label}: terms={len(dec.terms)} "
            f"max|diff|={dec.residual_max_full:.6e} (full interval) "
            f"{dec.residual_max_range:.6e} (decomposition interval) "
            f"converged={dec.converged}"
        )
    fileio.write_coefficient_file(coef_path, blocks)
    fileio.write_curve_file(fit_path, table.r, columns)
    return 0 if all_converged else 1


def _sum_like(args, do_refine: bool) -> int:
    blocks = fileio.read_coefficient_file(args.coefficients)
    seen: list[str] = []
    for b in blocks:
        if b.label not in seen:
            seen.append(b.label)
    labels = (
        [tok.strip() for tok in args.labels.split(",") if tok.strip()]
        if args.labels
        else seen
    )
    if not labels:
        raise UsageError("empty label selection")

    reference = fileio.read_curve_file(args.reference) if args.reference else None
    if reference is not None:
        r = reference.r
    else:
        if args.r_max is None or args.step is None:
            raise UsageError("--r-max and --step are required without a reference file")
        r = make_grid(args.r_max, args.step)

    config = _merge_config({}, args) if do_refine else None
    eps_term = config.eps_term if config is not None else args.eps_term

    columns = []
    out_blocks = []
    for label in labels:
        try:
            terms = fileio.select_terms(blocks, label)
        except KeyError as exc:
            raise UsageError(str(exc)) from None
        if reference is not None:
            try:
                curve = reference.curve(label)
            except KeyError as exc:
                raise UsageError(str(exc)) from None
            if do_refine and args.refine and terms:
                out_blocks.append(fileio.CoefficientBlock(label, "initial", list(terms)))
                terms = refine(curve, terms, config)
                out_blocks.append(fileio.CoefficientBlock(label, "refined", terms))
            cols, model, diff = _fit_columns(curve, terms, eps_term)
            columns.extend(cols)
            print(f"{label}: terms={len(terms)} max|diff|={np.max(np.abs(diff)):.6e}")
        else:
            model = evaluate_sum(terms, r, eps_term)
            columns.append((f"{label}_model", model))
            print(f"{label}: terms={len(terms)}")
    fileio.write_curve_file(args.output, r, columns)
    if do_refine and args.refine and out_blocks:
        out_path = args.coefficients_output or str(
            Path(args.coefficients).with_suffix(".refined.coef")
        )
        fileio.write_coefficient_file(out_path, out_blocks)
    return 0


def cmd_sum(args) -> int:
    return _sum_like(args, do_refine=False)


def cmd_resum(args) -> int:
    return _sum_like(args, do_refine=True)


def cmd_atom(args) -> int:
    if args.resolution <= 0.0:
        raise UsageError(f"resolution cutoff must be > 0, got {args.resolution}")
    if args.b0 < 0.0:
        raise UsageError(f"displacement parameter must be >= 0, got {args.b0}")
    labels = [tok.strip() for tok in args.labels.split(",") if tok.strip()]
    if not labels:
        raise UsageError("empty scatterer selection")
    table_path = args.table or default_table_path()
    entries = {sf.label: sf for sf in load_scattering_table(table_path)}
    columns = []
    r = None
    for label in labels:
        if label not in entries:
            raise UsageError(
                f"unknown scatterer {label!r}; available: {', '.join(entries)}"
            )
        spec = AtomImageSpec(
            label=label,
            resolution=args.resolution,
            b0=args.b0,
            r_max=args.r_max,
            step=args.step,
            s_points=args.s_points,
        )
        curve = atom_image(entries[label], spec)
        r = curve.r
        columns.append((label, curve.f))
        print(f"{label}: rho(0)={curve.f[0]:.6e}")
    fileio.write_curve_file(args.output, r, columns)
    return 0


def cmd_serve(args) -> int:
    from .server import run_server

    table_path = args.table or default_table_path()
    run_server(args.host, args.port, table_path, frontend=args.frontend)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "decompose": cmd_decompose,
        "sum": cmd_sum,
        "resum": cmd_resum,
        "atom": cmd_atom,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        OSError,
        GridError,
        ExpressionError,
        TableFormatError,
        fileio.CurveFormatError,
        fileio.CoefficientFormatError,
        fileio.ParamFileError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
