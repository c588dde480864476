"""Plain-text writers: delimited numeric tables and key = value documents.

All numbers are printed with 17 significant digits so that files round-trip
float64 values exactly and identical runs produce identical bytes.
"""

from __future__ import annotations

import contextlib
import io
import os
from typing import Iterable, Mapping, Sequence

SIG_FIGS = 17
_FMT = f".{SIG_FIGS}g"


def format_number(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, complex):
        return f"{format(x.real, _FMT)},{format(x.imag, _FMT)}"
    return format(float(x), _FMT)


def format_value(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return "nan"
    return format_number(x)


@contextlib.contextmanager
def _open_target(target):
    if hasattr(target, "write"):
        yield target
    else:
        with open(os.fspath(target), "w", encoding="utf-8") as fh:
            yield fh


def _header_lines(header: Mapping[str, object] | None) -> list[str]:
    if not header:
        return []
    return [f"# {key} = {format_value(value)}" for key, value in header.items()]


def write_table(
    target,
    column_names: Sequence[str],
    columns: Sequence[Iterable],
    header: Mapping[str, object] | None = None,
    delimiter: str = "\t",
) -> None:
    """Write parallel columns as delimited text with '#' comment headers."""
    cols = [list(c) for c in columns]
    if len(cols) != len(column_names):
        raise ValueError("column_names and columns length mismatch")
    n_rows = len(cols[0]) if cols else 0
    if any(len(c) != n_rows for c in cols):
        raise ValueError("columns have unequal lengths")
    with _open_target(target) as fh:
        for line in _header_lines(header):
            fh.write(line + "\n")
        fh.write("# columns: " + delimiter.join(column_names) + "\n")
        for row in zip(*cols):
            fh.write(delimiter.join(format_value(x) for x in row) + "\n")


def write_keyvalues(
    target,
    mapping: Mapping[str, object],
    header: Mapping[str, object] | None = None,
) -> None:
    """Write a flat key = value document."""
    with _open_target(target) as fh:
        for line in _header_lines(header):
            fh.write(line + "\n")
        for key, value in mapping.items():
            fh.write(f"{key} = {format_value(value)}\n")


def render_keyvalues(mapping: Mapping[str, object]) -> str:
    buf = io.StringIO()
    write_keyvalues(buf, mapping)
    return buf.getvalue()
