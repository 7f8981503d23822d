"""Text file formats shared by the command-line tools.

Curve files: '#' header lines, then rows of `r value1 value2 ...` with the
column labels in the last header line.  Coefficient files: one block per
curve and stage (`block <label> <stage> <M>` followed by M rows of
`R B C`).  Parameter files: `key = value` lines.  All numbers are written
in scientific notation with 17 significant digits so that reading a file
back reproduces the exact doubles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .shells import SampledCurve, ShellTerm

FLOAT_FMT = "{:.16e}"


class CurveFormatError(ValueError):
    pass


class CoefficientFormatError(ValueError):
    pass


class ParamFileError(ValueError):
    pass


@dataclass
class CurveTable:
    """Contents of a curve file: shared grid plus labelled value columns."""

    r: np.ndarray
    columns: list[tuple[str, np.ndarray]]

    def labels(self) -> list[str]:
        return [label for label, _ in self.columns]

    def curve(self, label: str) -> SampledCurve:
        for name, values in self.columns:
            if name == label:
                return SampledCurve(self.r, values, label=name)
        raise KeyError(f"no column {label!r}; available: {', '.join(self.labels())}")

    def curves(self) -> list[SampledCurve]:
        return [SampledCurve(self.r, v, label=name) for name, v in self.columns]


def read_curve_file(path) -> CurveTable:
    path = Path(path)
    return parse_curve_text(path.read_text(), name=str(path))


def parse_curve_text(text: str, name: str = "<curve>") -> CurveTable:
    path = name
    header: list[str] = []
    rows: list[list[float]] = []
    ncols = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if rows:
                raise CurveFormatError(f"{path}:{lineno}: header line after data rows")
            header.append(line[1:].strip())
            continue
        fields = line.split()
        try:
            row = [float(tok) for tok in fields]
        except ValueError:
            raise CurveFormatError(f"{path}:{lineno}: malformed numeric field") from None
        if ncols is None:
            ncols = len(row)
            if ncols < 2:
                raise CurveFormatError(f"{path}:{lineno}: need an r column plus values")
        elif len(row) != ncols:
            raise CurveFormatError(
                f"{path}:{lineno}: expected {ncols} columns, found {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise CurveFormatError(f"{path}: no data rows")
    data = np.array(rows)
    labels = [f"col{i}" for i in range(1, ncols)]
    if header:
        tokens = header[-1].split()
        if len(tokens) == ncols:
            labels = tokens[1:]
    return CurveTable(
        r=data[:, 0],
        columns=[(labels[i], data[:, i + 1]) for i in range(ncols - 1)],
    )


def format_curve_file(r: np.ndarray, columns, header_lines=()) -> str:
    """Render labelled columns against a shared r grid as curve-file text."""
    columns = list(columns)
    lines = [f"# {text}" for text in header_lines]
    lines.append("# r " + " ".join(label for label, _ in columns))
    for i, x in enumerate(np.asarray(r, dtype=float)):
        fields = [FLOAT_FMT.format(x)]
        fields += [FLOAT_FMT.format(float(values[i])) for _, values in columns]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def write_curve_file(path, r: np.ndarray, columns, header_lines=()) -> None:
    Path(path).write_text(format_curve_file(r, columns, header_lines))


@dataclass
class CoefficientBlock:
    label: str
    stage: str  # "initial" or "refined" (free token when hand-written)
    terms: list[ShellTerm] = field(default_factory=list)


def read_coefficient_file(path) -> list[CoefficientBlock]:
    path = Path(path)
    blocks: list[CoefficientBlock] = []
    expect = 0
    current: CoefficientBlock | None = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] == "block":
            if expect:
                raise CoefficientFormatError(
                    f"{path}:{lineno}: block started before previous one was complete"
                )
            if len(tokens) != 4:
                raise CoefficientFormatError(
                    f"{path}:{lineno}: expected 'block <label> <stage> <count>'"
                )
            try:
                expect = int(tokens[3])
            except ValueError:
                raise CoefficientFormatError(f"{path}:{lineno}: bad term count") from None
            current = CoefficientBlock(label=tokens[1], stage=tokens[2])
            blocks.append(current)
            continue
        if current is None:
            raise CoefficientFormatError(f"{path}:{lineno}: data before any block header")
        if expect == 0:
            raise CoefficientFormatError(f"{path}:{lineno}: more rows than declared")
        if len(tokens) != 3:
            raise CoefficientFormatError(f"{path}:{lineno}: expected three fields R B C")
        try:
            r_val, b_val, c_val = (float(t) for t in tokens)
        except ValueError:
            raise CoefficientFormatError(f"{path}:{lineno}: malformed numeric field") from None
        try:
            current.terms.append(ShellTerm(R=r_val, B=b_val, C=c_val))
        except ValueError as exc:
            raise CoefficientFormatError(f"{path}:{lineno}: {exc}") from None
        expect -= 1
    if expect:
        raise CoefficientFormatError(f"{path}: final block is missing {expect} rows")
    if not blocks:
        raise CoefficientFormatError(f"{path}: no coefficient blocks found")
    return blocks


def write_coefficient_file(path, blocks) -> None:
    lines = ["# shell decomposition coefficients: R B C"]
    for block in blocks:
        lines.append(f"block {block.label} {block.stage} {len(block.terms)}")
        for t in block.terms:
            lines.append(
                " ".join(FLOAT_FMT.format(v) for v in (t.R, t.B, t.C))
            )
    Path(path).write_text("\n".join(lines) + "\n")


def select_terms(blocks, label: str) -> list[ShellTerm]:
    """Pick the refined block for a label, or the only one present."""
    candidates = [b for b in blocks if b.label == label]
    if not candidates:
        known = ", ".join(sorted({b.label for b in blocks}))
        raise KeyError(f"no coefficient block for {label!r}; available: {known}")
    for b in candidates:
        if b.stage == "refined":
            return list(b.terms)
    return list(candidates[-1].terms)


PARAM_KEYS = (
    "input",
    "columns",
    "max_peaks",
    "eps_dec",
    "eps_dec_scale",
    "eps_peak",
    "eps_term",
    "protocol",
    "b_min",
    "c_min",
    "decompose_range",
    "coefficients_output",
    "curves_output",
)


def read_param_file(path) -> dict[str, str]:
    """Parse `key = value` lines; unknown keys are an error."""
    path = Path(path)
    params: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParamFileError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in PARAM_KEYS:
            raise ParamFileError(f"{path}:{lineno}: unknown parameter {key!r}")
        if not value:
            raise ParamFileError(f"{path}:{lineno}: empty value for {key!r}")
        if key in params:
            raise ParamFileError(f"{path}:{lineno}: duplicate parameter {key!r}")
        params[key] = value
    if "input" not in params:
        raise ParamFileError(f"{path}: mandatory parameter 'input' is missing")
    return params
