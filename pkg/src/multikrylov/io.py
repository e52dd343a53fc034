"""Portable on-disk containers: matrices, run records and figure tables.

Matrix container (text, row-major): a header line

    # hpmatrix rows=R cols=C precision_bits=B kind=complex|real

followed by one row per line, entries as full-precision decimal strings
("re im" pairs for complex).  The decimal width is chosen so parsing at the
stated precision reproduces the stored binary values exactly.

Run records are JSON documents; every write is atomic (write to a temp file
in the target directory, then rename).
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np
from gmpy2 import mpc

from .precision import HVector, Precision, mpfr_to_str, str_to_mpfr


def atomic_write_text(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_record(path: Path, payload: dict):
    atomic_write_text(Path(path), json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json_record(path: Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_matrix_text(path: Path, rows, bits: int, kind: str = "complex"):
    """Store vectors/matrix rows; ``rows`` is an iterable of HVector or arrays."""
    lines = []
    n_cols = None
    body = []
    for row in rows:
        if isinstance(row, HVector):
            entries = row.entries
            cells = [
                f"{mpfr_to_str(e.real, bits)} {mpfr_to_str(e.imag, bits)}"
                if kind == "complex"
                else mpfr_to_str(e.real, bits)
                for e in entries
            ]
        else:
            arr = np.asarray(row)
            cells = [
                f"{complex(v).real!r} {complex(v).imag!r}"
                if kind == "complex"
                else repr(float(v))
                for v in arr
            ]
        if n_cols is None:
            n_cols = len(cells)
        elif len(cells) != n_cols:
            raise ValueError("ragged rows")
        body.append(" ".join(cells))
    lines.append(f"# hpmatrix rows={len(body)} cols={n_cols or 0} precision_bits={bits} kind={kind}")
    lines.extend(body)
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_matrix_text(path: Path):
    """Parse the matrix container; returns (list of HVector, Precision, kind)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# hpmatrix"):
            raise ValueError(f"{path} is not a matrix container")
        fields = dict(kv.split("=") for kv in header.split()[2:])
        bits = int(fields["precision_bits"])
        kind = fields["kind"]
        precision = Precision(max(bits, 53))
        rows = []
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            with precision.context():
                if kind == "complex":
                    entries = [
                        mpc(str_to_mpfr(parts[2 * i], bits), str_to_mpfr(parts[2 * i + 1], bits))
                        for i in range(len(parts) // 2)
                    ]
                else:
                    entries = [mpc(str_to_mpfr(p, bits)) for p in parts]
            rows.append(HVector(entries, precision))
    return rows, precision, kind


FIGURE_COLUMNS = ("size", "integrable", "chaotic_mean", "chaotic_sem")


def write_figure_table(path: Path, rows: list, figure_id: str):
    """Delimited table for external bar plotting, one row per system size."""
    lines = [
        f"# figure={figure_id}",
        "# columns: " + "\t".join(FIGURE_COLUMNS),
        "# integrable bars are drawn white, chaotic bars black",
    ]
    for row in rows:
        lines.append(
            "\t".join([str(row["size"])] + [repr(float(row[c])) for c in FIGURE_COLUMNS[1:]])
        )
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_figure_table(path: Path) -> list:
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            size, v_int, v_cha, sem = line.split("\t")
            rows.append(
                {
                    "size": size,
                    "integrable": float(v_int),
                    "chaotic_mean": float(v_cha),
                    "chaotic_sem": float(sem),
                }
            )
    return rows
