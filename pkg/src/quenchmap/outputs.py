"""Flat-file artifacts: CSV tables and the human-readable summary.

Numbers are written with 17 significant digits in scientific notation and LF
line endings, so identical inputs give byte-identical data files.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import GridState

FLOAT_FORMAT = "%.16e"
DENSITY_HEADER = "time,x,re,im,density"
COMPARE_HEADER = "time,l2_map_split,l2_map_proj,l2_split_proj"
BENCH_HEADER = "method,wall_time_s,l2_error,n_times"


def density_rows(states: Sequence[GridState]) -> np.ndarray:
    blocks = []
    for state in states:
        amps = state.amplitudes
        x = state.grid.points
        blocks.append(np.column_stack([np.full_like(x, state.time), x, amps.real, amps.imag,
                                       state.density]))
    return np.vstack(blocks) if blocks else np.empty((0, 5))


def _write_table(path: Path, header: str, rows: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        np.savetxt(fh, rows, fmt=FLOAT_FORMAT, delimiter=",", newline="\n",
                   header=header, comments="")
    return path


def write_density_csv(path, states: Sequence[GridState]) -> Path:
    return _write_table(path, DENSITY_HEADER, density_rows(states))


def write_compare_csv(path, times: Sequence[float], distances: Sequence[Sequence[float]]) -> Path:
    rows = np.column_stack([np.asarray(times, dtype=float), np.asarray(distances, dtype=float)])
    return _write_table(path, COMPARE_HEADER, rows.reshape(-1, 4))


def write_bench_csv(path, reports) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [BENCH_HEADER]
    for r in reports:
        lines.append(",".join([r.method, FLOAT_FORMAT % r.wall_time,
                               FLOAT_FORMAT % r.l2_error_vs_reference, str(r.n_output_times)]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Header and numeric body of a CSV written by this module."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    body = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, body


def write_summary(path, sections: Iterable[tuple[str, Iterable[str]]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    out = []
    for title, lines in sections:
        out.append(f"[{title}]")
        out.extend(f"  {line}" for line in lines)
        out.append("")
    path.write_text("\n".join(out), encoding="utf-8", newline="\n")
    return path
